use std::sync::Arc;

use nalgebra::{Matrix2, Vector2};

use crate::error::{Error, Result};
use crate::geometry::{anisotropic_sff, Domain2D};
use crate::norms::{AnisotropicNorm, ZERO_CUTOFF};

type Fn2 = Arc<dyn Fn([f64; 2]) -> f64 + Send + Sync>;
type Grad2 = Arc<dyn Fn([f64; 2]) -> [f64; 2] + Send + Sync>;
type Hess2 = Arc<dyn Fn([f64; 2]) -> [[f64; 2]; 2] + Send + Sync>;

const FD_STEP: f64 = 1e-4;

/// Planar scalar field with optional closed-form derivatives; missing ones use central differences.
#[derive(Clone)]
pub struct ScalarField {
    value: Fn2,
    gradient: Option<Grad2>,
    hessian: Option<Hess2>,
}

impl ScalarField {
    pub fn new(f: impl Fn([f64; 2]) -> f64 + Send + Sync + 'static) -> Self {
        Self { value: Arc::new(f), gradient: None, hessian: None }
    }

    pub fn with_gradient(mut self, g: impl Fn([f64; 2]) -> [f64; 2] + Send + Sync + 'static) -> Self {
        self.gradient = Some(Arc::new(g));
        self
    }

    pub fn with_hessian(mut self, h: impl Fn([f64; 2]) -> [[f64; 2]; 2] + Send + Sync + 'static) -> Self {
        self.hessian = Some(Arc::new(h));
        self
    }

    pub fn constant(c: f64) -> Self {
        Self::new(move |_| c).with_gradient(|_| [0.0; 2]).with_hessian(|_| [[0.0; 2]; 2])
    }

    /// `c (R^2 - |x|^2)`, which vanishes on the circle of radius `R`.
    pub fn paraboloid(radius: f64, c: f64) -> Self {
        Self::new(move |x| c * (radius * radius - x[0] * x[0] - x[1] * x[1]))
            .with_gradient(move |x| [-2.0 * c * x[0], -2.0 * c * x[1]])
            .with_hessian(move |_| [[-2.0 * c, 0.0], [0.0, -2.0 * c]])
    }

    pub fn value(&self, x: [f64; 2]) -> f64 {
        (self.value)(x)
    }

    pub fn gradient(&self, x: [f64; 2]) -> [f64; 2] {
        match &self.gradient {
            Some(g) => g(x),
            None => central_gradient(|p| self.value(p), x, FD_STEP),
        }
    }

    pub fn hessian(&self, x: [f64; 2]) -> [[f64; 2]; 2] {
        if let Some(h) = &self.hessian {
            return h(x);
        }
        let s = FD_STEP;
        let mut out = [[0.0; 2]; 2];
        for j in 0..2 {
            let (mut p, mut m) = (x, x);
            p[j] += s;
            m[j] -= s;
            let (gp, gm) = (self.gradient(p), self.gradient(m));
            for i in 0..2 {
                out[i][j] = (gp[i] - gm[i]) / (2.0 * s);
            }
        }
        // symmetrize away the differencing error
        let off = 0.5 * (out[0][1] + out[1][0]);
        out[0][1] = off;
        out[1][0] = off;
        out
    }
}

fn central_gradient(f: impl Fn([f64; 2]) -> f64, x: [f64; 2], s: f64) -> [f64; 2] {
    let mut g = [0.0; 2];
    for (j, gj) in g.iter_mut().enumerate() {
        let (mut p, mut m) = (x, x);
        p[j] += s;
        m[j] -= s;
        *gj = (f(p) - f(m)) / (2.0 * s);
    }
    g
}

/// `J[i][j] = d V_i / d x_j` by central differences.
fn central_jacobian(v: &impl Fn([f64; 2]) -> [f64; 2], x: [f64; 2], s: f64) -> [[f64; 2]; 2] {
    let mut out = [[0.0; 2]; 2];
    for j in 0..2 {
        let (mut p, mut m) = (x, x);
        p[j] += s;
        m[j] -= s;
        let (vp, vm) = (v(p), v(m));
        for i in 0..2 {
            out[i][j] = (vp[i] - vm[i]) / (2.0 * s);
        }
    }
    out
}

/// Largest `|(div V)^2 - tr((DV)^2) - div(V div V - DV V)|` over `points`, with every
/// derivative taken by central differences of width `step` (nested for the last term).
pub fn verify_divergence_identity(v: impl Fn([f64; 2]) -> [f64; 2] + Sync, points: &[[f64; 2]], step: f64) -> Result<f64> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidInput(format!("step must be positive, got {step}")));
    }
    let flux = |x: [f64; 2]| {
        let j = central_jacobian(&v, x, step);
        let div = j[0][0] + j[1][1];
        let val = v(x);
        [
            val[0] * div - (j[0][0] * val[0] + j[0][1] * val[1]),
            val[1] * div - (j[1][0] * val[0] + j[1][1] * val[1]),
        ]
    };
    let mut worst: f64 = 0.0;
    for &x in points {
        let j = central_jacobian(&v, x, step);
        let div = j[0][0] + j[1][1];
        let tr_sq = j[0][0] * j[0][0] + 2.0 * j[0][1] * j[1][0] + j[1][1] * j[1][1];
        let jf = central_jacobian(&flux, x, step);
        worst = worst.max((div * div - tr_sq - (jf[0][0] + jf[1][1])).abs());
    }
    Ok(worst)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReillyTerms {
    /// `int (div W)^2`.
    pub lhs: f64,
    /// `int tr((DW)^2)`.
    pub interior: f64,
    /// `int_{dOmega} h^2 H(nu) H^2(grad v) tr B^H`.
    pub boundary: f64,
    /// Zero for the unit weight in the transport direction used here.
    pub transport: f64,
    pub residual: f64,
}

/// Both sides of the anisotropic Reilly identity for `W = h H(grad v) grad H(grad v)`.
///
/// Area integrals use the `resolution x resolution` tensor-product rule of the domain,
/// the boundary integral the periodic trapezoid rule with `4 resolution` nodes.
pub fn verify_reilly(
    norm: &AnisotropicNorm,
    dom: &Domain2D,
    v: &ScalarField,
    h: &ScalarField,
    resolution: usize,
) -> Result<ReillyTerms> {
    if norm.dim() != 2 {
        return Err(Error::InvalidInput("the Reilly check needs a planar norm".into()));
    }
    if dom.is_polygon() {
        return Err(Error::UnsupportedKind("the Reilly check needs a smooth boundary".into()));
    }
    if resolution < 8 {
        return Err(Error::InvalidInput(format!("quadrature resolution must be at least 8, got {resolution}")));
    }
    let boundary_nodes = 4 * resolution;
    let dt = std::f64::consts::TAU / boundary_nodes as f64;
    for k in 0..boundary_nodes {
        let x = dom.point((k as f64 + 0.5) * dt);
        let val = v.value(x);
        if val.abs() > 1e-10 {
            return Err(Error::InvalidInput(format!("v does not vanish on the boundary: v{x:?} = {val:e}")));
        }
    }

    let (mut lhs, mut interior) = (0.0, 0.0);
    for (x, w) in dom.area_quadrature(resolution) {
        let gv = v.gradient(x);
        if gv[0].hypot(gv[1]) < ZERO_CUTOFF {
            continue;
        }
        let (hv, g, d2h) = norm.derivatives(&gv);
        let grad_h = Vector2::new(g[0], g[1]);
        let d2h = Matrix2::new(d2h[(0, 0)], d2h[(0, 1)], d2h[(1, 0)], d2h[(1, 1)]);
        // D(H grad H) = H D^2 H + grad H grad H^T
        let s = d2h * hv + grad_h * grad_h.transpose();
        let hv2 = v.hessian(x);
        let d2v = Matrix2::new(hv2[0][0], hv2[0][1], hv2[1][0], hv2[1][1]);
        let gh = h.gradient(x);
        let dw = (grad_h * hv) * Vector2::new(gh[0], gh[1]).transpose() + s * d2v * h.value(x);
        let div = dw.trace();
        lhs += w * div * div;
        interior += w * (dw * dw).trace();
    }

    let mut boundary = 0.0;
    for k in 0..boundary_nodes {
        let t = k as f64 * dt;
        let x = dom.point(t);
        let gv = v.gradient(x);
        if gv[0].hypot(gv[1]) < ZERO_CUTOFF {
            continue;
        }
        let hv = norm.eval(&gv);
        let h_nu = norm.eval(&dom.normal(t));
        let tr_b = anisotropic_sff(norm, dom, t)?.tr_b_h;
        let weight = h.value(x);
        boundary += weight * weight * h_nu * hv * hv * tr_b * dom.speed(t) * dt;
    }
    Ok(ReillyTerms { lhs, interior, boundary, transport: 0.0, residual: lhs - interior - boundary })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn identity_field_has_zero_residual() {
        let pts = [[0.3, -0.2], [1.0, 2.0]];
        assert!(verify_divergence_identity(|x| x, &pts, 1e-4).unwrap() < 1e-6);
        assert!(verify_divergence_identity(|_| [1.0, -2.0], &pts, 1e-4).unwrap() == 0.0);
    }

    #[test]
    fn reilly_euclidean_disk_values() {
        let e = AnisotropicNorm::euclidean(2).unwrap();
        let disk = Domain2D::disk(1.0).unwrap();
        let r = verify_reilly(&e, &disk, &ScalarField::paraboloid(1.0, 1.0), &ScalarField::constant(1.0), 64).unwrap();
        assert!((r.lhs - 16.0 * PI).abs() < 1e-9);
        assert!((r.interior - 8.0 * PI).abs() < 1e-9);
        assert!((r.boundary - 8.0 * PI).abs() < 1e-9);
    }

    #[test]
    fn finite_difference_derivatives_match_closed_forms() {
        let exact = ScalarField::paraboloid(1.0, 1.0);
        let fd = ScalarField::new(|x| 1.0 - x[0] * x[0] - x[1] * x[1]);
        let x = [0.3, 0.4];
        let (a, b) = (exact.gradient(x), fd.gradient(x));
        assert!((a[0] - b[0]).abs() < 1e-8 && (a[1] - b[1]).abs() < 1e-8);
        assert!((fd.hessian(x)[0][0] + 2.0).abs() < 1e-5);
    }

    #[test]
    fn nonvanishing_field_is_rejected() {
        let e = AnisotropicNorm::euclidean(2).unwrap();
        let disk = Domain2D::disk(1.0).unwrap();
        let bad = ScalarField::paraboloid(2.0, 1.0);
        assert!(matches!(verify_reilly(&e, &disk, &bad, &ScalarField::constant(1.0), 32), Err(Error::InvalidInput(_))));
    }
}
