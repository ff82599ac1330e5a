use std::f64::consts::TAU;

use rand::Rng;

use super::pointwise::sample_rng;
use super::CheckRow;
use crate::error::{Error, Result};
use crate::geometry::{
    isocapacitary_weighted, lipschitz_characteristic, trace_inequality_check, BoundaryWeightSamples, Domain2D, TraceCheck,
    DEFAULT_BOUNDARY_SAMPLES,
};
use crate::solver::{generate_mesh, Mesh};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TestFieldKind {
    /// `max(0, 1 - |x - x0| / rho)`.
    Tent,
    /// `exp(1 - 1 / (1 - |x - x0|^2 / rho^2))` inside `B_rho(x0)`.
    Bump,
}

/// Nodal values of a tent or bump of radius `rho` centred at `x0`.
pub fn test_field(mesh: &Mesh, kind: TestFieldKind, x0: [f64; 2], rho: f64, amplitude: f64) -> Vec<f64> {
    mesh.vertices()
        .iter()
        .map(|x| {
            let s = (x[0] - x0[0]).hypot(x[1] - x0[1]) / rho;
            if s >= 1.0 {
                return 0.0;
            }
            amplitude
                * match kind {
                    TestFieldKind::Tent => 1.0 - s,
                    TestFieldKind::Bump => (1.0 - 1.0 / (1.0 - s * s)).exp(),
                }
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceCase {
    pub radius: f64,
    pub center: [f64; 2],
    pub kind: TestFieldKind,
    pub k_value: f64,
    pub l_omega: f64,
    pub check: TraceCheck,
}

/// Trace inequality with weight `|kappa|` on `count` seeded tent and bump fields per radius.
///
/// Each field is centred at a random boundary point and supported in a ball of radius
/// between `R/2` and `R`; `K(R)` is the cap-family estimate with capacity meshes of size `R/8`.
pub fn verify_trace(dom: &Domain2D, radii: &[f64], count: usize, seed: u64, mesh_h: f64) -> Result<Vec<TraceCase>> {
    if dom.is_polygon() {
        return Err(Error::UnsupportedKind("the curvature weight needs a smooth boundary".into()));
    }
    let mesh = generate_mesh(dom, mesh_h)?;
    let weight = BoundaryWeightSamples::curvature(dom, DEFAULT_BOUNDARY_SAMPLES)?;
    let mut out = Vec::with_capacity(radii.len() * count);
    for (stream, &r) in radii.iter().enumerate() {
        let lip = lipschitz_characteristic(dom, r)?;
        let k_value = isocapacitary_weighted(dom, &weight, r, r / 8.0)?;
        for i in 0..count {
            let mut rng = sample_rng(seed, stream as u64, i as u64);
            let center = dom.point(rng.gen_range(0.0..TAU));
            let rho = r * rng.gen_range(0.5..=1.0);
            let amplitude = rng.gen_range(0.5..2.0);
            let kind = if i % 2 == 0 { TestFieldKind::Tent } else { TestFieldKind::Bump };
            let v = test_field(&mesh, kind, center, rho, amplitude);
            let check = trace_inequality_check(&weight, &mesh, &v, r, center, &lip, k_value)?;
            out.push(TraceCase { radius: r, center, kind, k_value, l_omega: lip.l_omega, check });
        }
    }
    Ok(out)
}

pub fn trace_rows(dom: &Domain2D, mesh_h: f64, cases: &[TraceCase]) -> Vec<CheckRow> {
    cases
        .iter()
        .map(|c| CheckRow {
            check: format!("trace_{}_R{}", if c.kind == TestFieldKind::Tent { "tent" } else { "bump" }, c.radius),
            domain: dom.label(),
            norm: "euclidean".into(),
            young: "-".into(),
            h: Some(mesh_h),
            eps_final: None,
            lhs: c.check.lhs,
            rhs: c.check.rhs,
            ratio: c.check.lhs / c.check.rhs,
            bound: 1.0,
            pass: c.check.holds,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fields_vanish_outside_their_ball() {
        let mesh = generate_mesh(&Domain2D::disk(1.0).unwrap(), 0.1).unwrap();
        for kind in [TestFieldKind::Tent, TestFieldKind::Bump] {
            let v = test_field(&mesh, kind, [1.0, 0.0], 0.4, 1.0);
            for (x, val) in mesh.vertices().iter().zip(&v) {
                if (x[0] - 1.0).hypot(x[1]) >= 0.4 {
                    assert_eq!(*val, 0.0);
                }
            }
            assert!(v.iter().any(|&x| x > 0.0));
        }
    }
}
