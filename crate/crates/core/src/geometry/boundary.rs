use std::f64::consts::PI;

use rayon::prelude::*;

use super::domain::{dist, Domain2D};
use crate::error::{Error, Result};
use crate::norms::AnisotropicNorm;

pub const DEFAULT_BOUNDARY_SAMPLES: usize = 4096;
pub const PSI_CENTERS: usize = 256;
const LIPSCHITZ_ANCHORS: usize = 256;
const LIPSCHITZ_STEPS: usize = 16384;

/// Anisotropic second fundamental form in the plane, where it is a scalar equal to its trace.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnisotropicSff {
    pub b_h: f64,
    pub tr_b_h: f64,
}

/// `D^2 H(nu) tau . tau` at boundary parameter `t`.
pub fn tangential_factor(norm: &AnisotropicNorm, dom: &Domain2D, t: f64) -> Result<f64> {
    if norm.dim() != 2 {
        return Err(Error::InvalidInput(format!("boundary geometry needs a planar norm, got dimension {}", norm.dim())));
    }
    let nu = dom.normal(t);
    let tau = dom.unit_tangent(t);
    let h = norm.hessian(&nu)?;
    Ok(h[(0, 0)] * tau[0] * tau[0] + 2.0 * h[(0, 1)] * tau[0] * tau[1] + h[(1, 1)] * tau[1] * tau[1])
}

pub fn anisotropic_sff(norm: &AnisotropicNorm, dom: &Domain2D, t: f64) -> Result<AnisotropicSff> {
    let kappa = dom.curvature(t)?;
    let b = kappa * tangential_factor(norm, dom, t)?;
    Ok(AnisotropicSff { b_h: b, tr_b_h: b })
}

/// Slope bound `L_Omega` and chart radius `R_Omega`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LipschitzCharacteristic {
    pub l_omega: f64,
    pub r_omega: f64,
}

/// Largest slope of the boundary over the chart `|xi| < window` aligned with `normal`
/// at `gamma(t0)`, walking the connected arc through the anchor.
///
/// `None` when the arc turns back before leaving the window.
fn chart_slope(dom: &Domain2D, t0: f64, normal: [f64; 2], window: f64) -> Option<f64> {
    let tau = [-normal[1], normal[0]];
    let x0 = dom.point(t0);
    let dt = 2.0 * PI / LIPSCHITZ_STEPS as f64;
    let mut worst: f64 = 0.0;
    for dir in [1.0, -1.0] {
        let mut k = 0;
        loop {
            // midpoints avoid the corners of polygons
            let t = t0 + dir * (k as f64 + 0.5) * dt;
            let p = dom.point(t);
            let xi = dir * ((p[0] - x0[0]) * tau[0] + (p[1] - x0[1]) * tau[1]);
            if xi >= window {
                break;
            }
            let d = dom.tangent(t);
            let along = d[0] * tau[0] + d[1] * tau[1];
            let across = d[0] * normal[0] + d[1] * normal[1];
            if along <= 1e-12 * (d[0].hypot(d[1])) {
                return None;
            }
            worst = worst.max(across.abs() / along);
            k += 1;
            if k > LIPSCHITZ_STEPS {
                return None;
            }
        }
    }
    Some(worst)
}

/// Samples 256 anchors and measures the largest chart slope within `window`.
///
/// Polygon anchors near a corner also try the chart aligned with the corner bisector
/// and keep the flatter graph.
pub fn lipschitz_characteristic(dom: &Domain2D, window: f64) -> Result<LipschitzCharacteristic> {
    if !(window > 0.0 && window < dom.diameter() / 2.0) {
        return Err(Error::InvalidInput(format!(
            "window must lie in (0, d/2) = (0, {}), got {window}",
            dom.diameter() / 2.0
        )));
    }
    let slopes: Vec<Result<f64>> = (0..LIPSCHITZ_ANCHORS)
        .into_par_iter()
        .map(|i| {
            let t0 = 2.0 * PI * (i as f64 + 0.5) / LIPSCHITZ_ANCHORS as f64;
            let mut candidates = vec![dom.normal(t0)];
            if let Some(vertices) = dom.polygon_vertices() {
                let x0 = dom.point(t0);
                for (j, v) in vertices.iter().enumerate() {
                    if dist(*v, x0) < 2.0 * window {
                        candidates.push(corner_bisector(dom, j));
                    }
                }
            }
            let best = candidates.into_iter().filter_map(|n| chart_slope(dom, t0, n, window)).reduce(f64::min);
            best.or_else(|| {
                // tilted charts, one degree apart
                let nu = dom.normal(t0);
                (-89..=89)
                    .filter_map(|deg| {
                        let (s, c) = (deg as f64).to_radians().sin_cos();
                        chart_slope(dom, t0, [c * nu[0] - s * nu[1], s * nu[0] + c * nu[1]], window)
                    })
                    .reduce(f64::min)
            })
            .ok_or_else(|| Error::WindowTooLarge(format!("the boundary folds over inside the chart at t = {t0:.6}")))
        })
        .collect();
    let mut l: f64 = 0.0;
    for s in slopes {
        l = l.max(s?);
    }
    Ok(LipschitzCharacteristic { l_omega: l, r_omega: window })
}

fn corner_bisector(dom: &Domain2D, j: usize) -> [f64; 2] {
    let t = dom.vertex_parameter(j).unwrap();
    let h = 1e-9;
    let (a, b) = (dom.normal(t - h), dom.normal(t + h));
    let s = [a[0] + b[0], a[1] + b[1]];
    let n = s[0].hypot(s[1]);
    [s[0] / n, s[1] / n]
}

/// Samples of the boundary measure `rho dH^1`: `w_i = density_i * ds_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryWeightSamples {
    pub params: Vec<f64>,
    pub points: Vec<[f64; 2]>,
    pub ds: Vec<f64>,
    pub density: Vec<f64>,
}

impl BoundaryWeightSamples {
    pub fn new(params: Vec<f64>, points: Vec<[f64; 2]>, ds: Vec<f64>, density: Vec<f64>) -> Result<Self> {
        let n = params.len();
        if points.len() != n || ds.len() != n || density.len() != n {
            return Err(Error::InvalidInput("boundary sample arrays differ in length".into()));
        }
        if ds.iter().chain(&density).any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(Error::InvalidInput("boundary weights must be finite and non-negative".into()));
        }
        Ok(Self { params, points, ds, density })
    }

    /// Midpoint samples of `density(t) ds` along the whole boundary.
    pub fn from_density(dom: &Domain2D, samples: usize, density: impl Fn(f64) -> Result<f64>) -> Result<Self> {
        if samples == 0 {
            return Err(Error::InvalidInput("at least one boundary sample is required".into()));
        }
        let dt = 2.0 * PI / samples as f64;
        let mut params = Vec::with_capacity(samples);
        let mut points = Vec::with_capacity(samples);
        let mut ds = Vec::with_capacity(samples);
        let mut dens = Vec::with_capacity(samples);
        for k in 0..samples {
            let t = (k as f64 + 0.5) * dt;
            params.push(t);
            points.push(dom.point(t));
            ds.push(dom.speed(t) * dt);
            dens.push(density(t)?);
        }
        Self::new(params, points, ds, dens)
    }

    /// `rho = |kappa|`.
    pub fn curvature(dom: &Domain2D, samples: usize) -> Result<Self> {
        Self::from_density(dom, samples, |t| Ok(dom.curvature(t)?.abs()))
    }

    /// `rho = |B^H|`.
    pub fn anisotropic_curvature(norm: &AnisotropicNorm, dom: &Domain2D, samples: usize) -> Result<Self> {
        Self::from_density(dom, samples, |t| Ok(anisotropic_sff(norm, dom, t)?.b_h.abs()))
    }

    /// A measure with constant `density` on a set of total length `measure`, split in `samples` pieces.
    pub fn uniform(measure: f64, density: f64, samples: usize) -> Result<Self> {
        let ds = measure / samples as f64;
        Self::new(
            (0..samples).map(|k| (k as f64 + 0.5) * ds).collect(),
            vec![[0.0; 2]; samples],
            vec![ds; samples],
            vec![density; samples],
        )
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.ds.iter().zip(&self.density).map(|(d, r)| d * r).collect()
    }

    pub fn total(&self) -> f64 {
        self.weights().iter().sum()
    }

    pub fn max_density(&self) -> f64 {
        self.density.iter().copied().fold(0.0, f64::max)
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.params.clone(), self.points.clone(), self.ds.clone(), self.density.iter().map(|d| d * factor).collect())
    }

    /// Samples whose point lies within distance `r` of `center` (open ball when `closed` is false).
    pub fn restrict_to_ball(&self, center: [f64; 2], r: f64, closed: bool) -> Self {
        let keep: Vec<usize> = (0..self.len())
            .filter(|&i| {
                let d = dist(self.points[i], center);
                if closed {
                    d <= r
                } else {
                    d < r
                }
            })
            .collect();
        Self {
            params: keep.iter().map(|&i| self.params[i]).collect(),
            points: keep.iter().map(|&i| self.points[i]).collect(),
            ds: keep.iter().map(|&i| self.ds[i]).collect(),
            density: keep.iter().map(|&i| self.density[i]).collect(),
        }
    }
}

/// Marcinkiewicz norm from the decreasing rearrangement of the sampled density.
///
/// `g**(s) = s^-1 int_0^s g*` is evaluated on the cumulative measures of the sorted
/// samples; the weight is `s log(1 + 1/s)` for `n = 2` and `s^(1/(n-1))` otherwise.
pub fn marcinkiewicz_norm(samples: &BoundaryWeightSamples, n: usize) -> Result<f64> {
    if !(n == 2 || n == 3) {
        return Err(Error::InvalidInput(format!("dimension must be 2 or 3, got {n}")));
    }
    if samples.ds.iter().chain(&samples.density).any(|v| *v < 0.0) {
        return Err(Error::InvalidInput("negative boundary weight".into()));
    }
    let mut order: Vec<usize> = (0..samples.len()).filter(|&i| samples.ds[i] > 0.0).collect();
    order.sort_by(|&a, &b| samples.density[b].total_cmp(&samples.density[a]).then(a.cmp(&b)));
    let (mut s, mut integral, mut best) = (0.0, 0.0, 0.0_f64);
    for i in order {
        s += samples.ds[i];
        integral += samples.ds[i] * samples.density[i];
        let weight = if n == 2 { s * (1.0 + 1.0 / s).ln() } else { s.powf(1.0 / (n as f64 - 1.0)) };
        best = best.max(weight * integral / s);
    }
    Ok(best)
}

/// Per-center Marcinkiewicz norms of `weight` restricted to `B_r(x_c)`, with `centers`
/// equally spaced in the boundary parameter.
pub fn psi_profile(dom: &Domain2D, weight: &BoundaryWeightSamples, r: f64, centers: usize) -> Result<Vec<f64>> {
    check_radius(dom, r)?;
    (0..centers)
        .into_par_iter()
        .map(|c| {
            let x = dom.point(2.0 * PI * c as f64 / centers as f64);
            marcinkiewicz_norm(&weight.restrict_to_ball(x, r, false), 2)
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct PsiValues {
    /// `Psi_Omega(r)` with weight `|kappa|`.
    pub plain: f64,
    /// `Psi^H_Omega(r)` with weight `|B^H|`.
    pub anisotropic: f64,
    pub plain_profile: Vec<f64>,
    pub anisotropic_profile: Vec<f64>,
}

pub fn psi_function(dom: &Domain2D, norm: &AnisotropicNorm, r: f64) -> Result<PsiValues> {
    check_radius(dom, r)?;
    let plain_w = BoundaryWeightSamples::curvature(dom, DEFAULT_BOUNDARY_SAMPLES)?;
    let aniso_w = BoundaryWeightSamples::anisotropic_curvature(norm, dom, DEFAULT_BOUNDARY_SAMPLES)?;
    let plain_profile = psi_profile(dom, &plain_w, r, PSI_CENTERS)?;
    let anisotropic_profile = psi_profile(dom, &aniso_w, r, PSI_CENTERS)?;
    Ok(PsiValues {
        plain: plain_profile.iter().copied().fold(0.0, f64::max),
        anisotropic: anisotropic_profile.iter().copied().fold(0.0, f64::max),
        plain_profile,
        anisotropic_profile,
    })
}

/// Radii admissible for the boundary functionals: any `r` below the largest chart window.
pub(crate) fn check_radius(dom: &Domain2D, r: f64) -> Result<()> {
    if dom.is_polygon() {
        return Err(Error::UnsupportedKind("curvature functionals need a smooth boundary".into()));
    }
    if !(r > 0.0 && r < dom.diameter() / 2.0) {
        return Err(Error::InvalidInput(format!("radius must lie in (0, d/2) = (0, {}), got {r}", dom.diameter() / 2.0)));
    }
    Ok(())
}

/// `min_s D^2H(nu) tau . tau` and `max_s` of the same factor over the boundary samples.
pub fn tangential_factor_range(norm: &AnisotropicNorm, dom: &Domain2D, samples: usize) -> Result<(f64, f64)> {
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    for k in 0..samples {
        let f = tangential_factor(norm, dom, (k as f64 + 0.5) * 2.0 * PI / samples as f64)?;
        lo = lo.min(f);
        hi = hi.max(f);
    }
    Ok((lo, hi))
}
