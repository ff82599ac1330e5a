//! Anisotropic norms `H` on `R^n` with first and second derivatives, the dual
//! norm `H_0`, and sampled ellipticity diagnostics.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::quadrature::golden_max;

/// Vectors shorter than this are treated as the origin.
pub const ZERO_CUTOFF: f64 = 1e-14;

/// Safety margin applied to sampled ellipticity constants.
const SAMPLED_BOUND_MARGIN: f64 = 0.01;

/// Number of unit directions used when ellipticity constants are sampled at construction.
const CONSTRUCTION_SAMPLES: usize = 4096;

pub type NormFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum NormKind {
    Euclidean,
    /// `H(xi) = sqrt(sum a_i xi_i^2)`.
    WeightedQuadratic { weights: Vec<f64> },
    /// `H(xi) = (alpha |xi|_q^p + beta |xi|^p)^(1/p)`.
    Blend { p: f64, q: f64, alpha: f64, beta: f64 },
    /// Closed form supplied by the caller; derivatives by central differences.
    Custom { name: String, eval: NormFn },
}

impl fmt::Debug for NormKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NormKind::Euclidean => write!(f, "Euclidean"),
            NormKind::WeightedQuadratic { weights } => write!(f, "WeightedQuadratic({weights:?})"),
            NormKind::Blend { p, q, alpha, beta } => {
                write!(f, "Blend(p={p}, q={q}, alpha={alpha}, beta={beta})")
            }
            NormKind::Custom { name, .. } => write!(f, "Custom({name})"),
        }
    }
}

/// A norm `H` together with ellipticity constants `lambda <= Lambda` for `1/2 D^2 H^2`.
#[derive(Clone, Debug)]
pub struct AnisotropicNorm {
    dim: usize,
    kind: NormKind,
    lambda: f64,
    big_lambda: f64,
}

/// Restriction of `D^2 H(xi)` to the orthogonal complement of a unit vector `xi`.
#[derive(Clone, Debug, PartialEq)]
pub struct TangentialHessianReport {
    pub eig_min: f64,
    pub eig_max: f64,
    pub lower_bound: f64,
    pub upper_bound: f64,
}

impl TangentialHessianReport {
    pub fn holds(&self) -> bool {
        let slack = |v: f64| (1e-9 * v.abs()).max(1e-13);
        self.eig_min > 0.0
            && self.eig_min >= self.lower_bound - slack(self.lower_bound)
            && self.eig_max <= self.upper_bound + slack(self.upper_bound)
    }
}

impl AnisotropicNorm {
    pub fn euclidean(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self { dim, kind: NormKind::Euclidean, lambda: 1.0, big_lambda: 1.0 })
    }

    pub fn weighted_quadratic(weights: &[f64]) -> Result<Self> {
        check_dim(weights.len())?;
        if weights.iter().any(|w| !w.is_finite() || *w <= 0.0) {
            return Err(Error::InvalidInput(format!("weights must be positive and finite, got {weights:?}")));
        }
        let lambda = weights.iter().cloned().fold(f64::INFINITY, f64::min);
        let big_lambda = weights.iter().cloned().fold(0.0, f64::max);
        Ok(Self {
            dim: weights.len(),
            kind: NormKind::WeightedQuadratic { weights: weights.to_vec() },
            lambda,
            big_lambda,
        })
    }

    /// The blend `(alpha K^p + beta |xi|^p)^(1/p)` with `K` the `l^q` norm.
    ///
    /// The ellipticity constants are sampled and widened by 1%.
    pub fn blend(dim: usize, p: f64, q: f64, alpha: f64, beta: f64) -> Result<Self> {
        check_dim(dim)?;
        if !(p > 1.0 && q >= 2.0 && alpha >= 0.0 && beta > 0.0) || !(p * q * alpha * beta).is_finite() {
            return Err(Error::InvalidInput(format!(
                "blend norm needs p > 1, q >= 2, alpha >= 0, beta > 0 (got p={p}, q={q}, alpha={alpha}, beta={beta})"
            )));
        }
        Self::with_sampled_bounds(dim, NormKind::Blend { p, q, alpha, beta })
    }

    /// A user-supplied norm. It must be even, 1-homogeneous and `C^2` away from the origin.
    pub fn custom(dim: usize, name: &str, eval: NormFn) -> Result<Self> {
        check_dim(dim)?;
        Self::with_sampled_bounds(dim, NormKind::Custom { name: name.to_string(), eval })
    }

    fn with_sampled_bounds(dim: usize, kind: NormKind) -> Result<Self> {
        let mut norm = Self { dim, kind, lambda: 1.0, big_lambda: 1.0 };
        let (lo, hi) = norm.ellipticity_bounds(CONSTRUCTION_SAMPLES)?;
        if !(lo > 0.0 && hi.is_finite()) {
            return Err(Error::AssumptionViolated(format!(
                "sampled ellipticity bounds ({lo}, {hi}) are not uniformly elliptic"
            )));
        }
        norm.lambda = lo * (1.0 - SAMPLED_BOUND_MARGIN);
        norm.big_lambda = hi * (1.0 + SAMPLED_BOUND_MARGIN);
        Ok(norm)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &NormKind {
        &self.kind
    }

    /// Lower ellipticity constant `lambda`.
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Upper ellipticity constant `Lambda`.
    pub fn big_lambda(&self) -> f64 {
        self.big_lambda
    }

    pub fn label(&self) -> String {
        match &self.kind {
            NormKind::Euclidean => "euclidean".into(),
            NormKind::WeightedQuadratic { weights } => {
                let w: Vec<String> = weights.iter().map(|w| format!("{w}")).collect();
                format!("weighted({})", w.join(";"))
            }
            NormKind::Blend { p, q, alpha, beta } => format!("blend(p={p};q={q};a={alpha};b={beta})"),
            NormKind::Custom { name, .. } => format!("custom({name})"),
        }
    }

    fn check_len(&self, xi: &[f64]) -> Result<()> {
        if xi.len() != self.dim {
            return Err(Error::InvalidInput(format!("expected a vector of length {}, got {}", self.dim, xi.len())));
        }
        Ok(())
    }

    /// `H(xi)`.
    pub fn value(&self, xi: &[f64]) -> Result<f64> {
        self.check_len(xi)?;
        if xi.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite component in {xi:?}")));
        }
        Ok(self.eval(xi))
    }

    /// Unchecked evaluation used on hot paths.
    pub fn eval(&self, xi: &[f64]) -> f64 {
        match &self.kind {
            NormKind::Euclidean => euclid(xi),
            NormKind::WeightedQuadratic { weights } => {
                xi.iter().zip(weights).map(|(x, a)| a * x * x).sum::<f64>().sqrt()
            }
            NormKind::Blend { p, q, alpha, beta } => {
                let r = euclid(xi);
                if r < ZERO_CUTOFF {
                    return 0.0;
                }
                // Scale out |xi| to avoid overflow in the powers.
                let k = lq_norm(xi, *q) / r;
                r * (alpha * k.powf(*p) + beta).powf(1.0 / p)
            }
            NormKind::Custom { eval, .. } => eval(xi),
        }
    }

    fn nonzero(&self, xi: &[f64]) -> Result<()> {
        self.check_len(xi)?;
        if xi.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite component in {xi:?}")));
        }
        if euclid(xi) < ZERO_CUTOFF {
            return Err(Error::SingularPoint("H is not differentiable at the origin".into()));
        }
        Ok(())
    }

    /// `grad H(xi)` for `xi != 0`.
    pub fn gradient(&self, xi: &[f64]) -> Result<DVector<f64>> {
        self.nonzero(xi)?;
        Ok(self.derivatives(xi).1)
    }

    /// `D^2 H(xi)` for `xi != 0`.
    pub fn hessian(&self, xi: &[f64]) -> Result<DMatrix<f64>> {
        self.nonzero(xi)?;
        Ok(self.derivatives(xi).2)
    }

    /// `1/2 D^2 H^2(xi) = H D^2 H + grad H (x) grad H`.
    pub fn half_hessian_sq(&self, xi: &[f64]) -> Result<DMatrix<f64>> {
        self.nonzero(xi)?;
        let (h, g, hess) = self.derivatives(xi);
        Ok(hess * h + &g * g.transpose())
    }

    /// Value, gradient and Hessian at `xi != 0`, without argument checks.
    pub fn derivatives(&self, xi: &[f64]) -> (f64, DVector<f64>, DMatrix<f64>) {
        let n = self.dim;
        match &self.kind {
            NormKind::Euclidean => {
                let r = euclid(xi);
                let g = DVector::from_iterator(n, xi.iter().map(|x| x / r));
                let hess = (DMatrix::identity(n, n) - &g * g.transpose()) / r;
                (r, g, hess)
            }
            NormKind::WeightedQuadratic { weights } => {
                let h = self.eval(xi);
                let g = DVector::from_iterator(n, xi.iter().zip(weights).map(|(x, a)| a * x / h));
                let a = DMatrix::from_diagonal(&DVector::from_column_slice(weights));
                let hess = (a - &g * g.transpose()) / h;
                (h, g, hess)
            }
            NormKind::Blend { p, q, alpha, beta } => blend_derivatives(xi, *p, *q, *alpha, *beta),
            NormKind::Custom { eval, .. } => fd_derivatives(eval.as_ref(), xi),
        }
    }

    /// Dual norm `H_0(x) = sup_{xi != 0} xi . x / H(xi)`.
    pub fn dual_value(&self, x: &[f64]) -> f64 {
        match &self.kind {
            NormKind::Euclidean => euclid(x),
            NormKind::WeightedQuadratic { weights } => {
                x.iter().zip(weights).map(|(v, a)| v * v / a).sum::<f64>().sqrt()
            }
            _ => {
                if euclid(x) < ZERO_CUTOFF {
                    return 0.0;
                }
                if self.dim == 2 {
                    self.dual_planar(x)
                } else {
                    self.dual_sphere_ascent(x)
                }
            }
        }
    }

    fn dual_planar(&self, x: &[f64]) -> f64 {
        let ratio = |theta: f64| {
            let e = [theta.cos(), theta.sin()];
            (e[0] * x[0] + e[1] * x[1]) / self.eval(&e)
        };
        let grid = 720;
        let step = 2.0 * PI / grid as f64;
        let (mut best_k, mut best) = (0, f64::NEG_INFINITY);
        for k in 0..grid {
            let v = ratio(k as f64 * step);
            if v > best {
                best = v;
                best_k = k;
            }
        }
        let centre = best_k as f64 * step;
        let (_, refined) = golden_max(ratio, centre - step, centre + step, 1e-10);
        refined.max(best)
    }

    fn dual_sphere_ascent(&self, x: &[f64]) -> f64 {
        let n = self.dim;
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_d0a1);
        let ratio = |e: &[f64]| e.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() / self.eval(e);
        let mut best = f64::NEG_INFINITY;
        for start in 0..64 {
            let mut e: Vec<f64> = if start == 0 {
                x.to_vec()
            } else {
                (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
            };
            normalize(&mut e);
            let mut step = 0.5;
            let mut val = ratio(&e);
            for _ in 0..400 {
                let h = self.eval(&e);
                let (_, g, _) = self.derivatives(&e);
                let dot: f64 = e.iter().zip(x).map(|(a, b)| a * b).sum();
                // gradient of xi.x / H(xi) at xi = e
                let mut grad: Vec<f64> = (0..n).map(|i| x[i] / h - dot * g[i] / (h * h)).collect();
                let radial: f64 = grad.iter().zip(&e).map(|(a, b)| a * b).sum();
                for i in 0..n {
                    grad[i] -= radial * e[i];
                }
                if euclid(&grad) < 1e-14 {
                    break;
                }
                loop {
                    let mut cand: Vec<f64> = (0..n).map(|i| e[i] + step * grad[i]).collect();
                    normalize(&mut cand);
                    let cv = ratio(&cand);
                    if cv >= val {
                        e = cand;
                        val = cv;
                        step *= 1.5;
                        break;
                    }
                    step *= 0.5;
                    if step < 1e-14 {
                        break;
                    }
                }
                if step < 1e-14 {
                    break;
                }
            }
            best = best.max(val);
        }
        best
    }

    /// Min and max eigenvalue of `1/2 D^2 H^2` over sampled unit vectors.
    ///
    /// In two dimensions the samples are equally spaced angles; otherwise
    /// seeded uniform directions on the sphere.
    pub fn ellipticity_bounds(&self, sample_count: usize) -> Result<(f64, f64)> {
        if sample_count < 100 {
            return Err(Error::InvalidInput(format!("sample_count must be at least 100, got {sample_count}")));
        }
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        let mut visit = |xi: &[f64]| {
            let (h, g, hess) = self.derivatives(xi);
            let m = hess * h + &g * g.transpose();
            let (a, b) = sym_eig_range(&m);
            lo = lo.min(a);
            hi = hi.max(b);
        };
        if self.dim == 2 {
            for k in 0..sample_count {
                let t = 2.0 * PI * (k as f64 + 0.5) / sample_count as f64;
                visit(&[t.cos(), t.sin()]);
            }
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(0xe11_1971);
            for _ in 0..sample_count {
                let mut e: Vec<f64> = (0..self.dim).map(|_| gaussian(&mut rng)).collect();
                normalize(&mut e);
                visit(&e);
            }
        }
        Ok((lo, hi))
    }

    /// Eigenvalues of `D^2 H(xi)` on `xi^perp` against `lambda/sqrt(Lambda)` and
    /// `(Lambda/sqrt(lambda)) (1 + Lambda/lambda)`.
    pub fn check_tangential_hessian(&self, xi: &[f64]) -> Result<TangentialHessianReport> {
        self.check_len(xi)?;
        if (euclid(xi) - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput(format!("expected a unit vector, |xi| = {}", euclid(xi))));
        }
        let hess = self.derivatives(xi).2;
        let basis = orthonormal_complement(xi);
        let restricted = basis.transpose() * hess * &basis;
        let (eig_min, eig_max) = sym_eig_range(&restricted);
        let (l, big) = (self.lambda, self.big_lambda);
        Ok(TangentialHessianReport {
            eig_min,
            eig_max,
            lower_bound: l / big.sqrt(),
            upper_bound: big / l.sqrt() * (1.0 + big / l),
        })
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if dim < 2 {
        return Err(Error::InvalidInput(format!("dimension must be at least 2, got {dim}")));
    }
    Ok(())
}

pub(crate) fn euclid(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn normalize(v: &mut [f64]) {
    let r = euclid(v);
    if r > 0.0 {
        v.iter_mut().for_each(|x| *x /= r);
    }
}

fn lq_norm(xi: &[f64], q: f64) -> f64 {
    let m = xi.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()));
    if m == 0.0 {
        return 0.0;
    }
    m * xi.iter().map(|x| (x.abs() / m).powf(q)).sum::<f64>().powf(1.0 / q)
}

fn gaussian<R: Rng>(rng: &mut R) -> f64 {
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
}

/// Smallest and largest eigenvalue of a symmetric matrix.
pub fn sym_eig_range(m: &DMatrix<f64>) -> (f64, f64) {
    if m.nrows() == 2 {
        let (a, b, c) = (m[(0, 0)], 0.5 * (m[(0, 1)] + m[(1, 0)]), m[(1, 1)]);
        let mean = 0.5 * (a + c);
        let rad = (0.25 * (a - c) * (a - c) + b * b).sqrt();
        return (mean - rad, mean + rad);
    }
    if m.nrows() == 1 {
        return (m[(0, 0)], m[(0, 0)]);
    }
    let sym = 0.5 * (m + m.transpose());
    let eig = SymmetricEigen::new(sym);
    let lo = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = eig.eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    (lo, hi)
}

/// Columns form an orthonormal basis of the complement of the unit vector `xi`.
fn orthonormal_complement(xi: &[f64]) -> DMatrix<f64> {
    let n = xi.len();
    if n == 2 {
        return DMatrix::from_column_slice(2, 1, &[-xi[1], xi[0]]);
    }
    let mut cols: Vec<DVector<f64>> = Vec::with_capacity(n - 1);
    let e = DVector::from_column_slice(xi);
    for k in 0..n {
        let mut v = DVector::zeros(n);
        v[k] = 1.0;
        v -= &e * e[k];
        for c in &cols {
            let d = c.dot(&v);
            v -= c * d;
        }
        let r = v.norm();
        if r > 1e-8 {
            cols.push(v / r);
        }
        if cols.len() == n - 1 {
            break;
        }
    }
    DMatrix::from_columns(&cols)
}

fn blend_derivatives(xi: &[f64], p: f64, q: f64, alpha: f64, beta: f64) -> (f64, DVector<f64>, DMatrix<f64>) {
    let n = xi.len();
    // Derivatives are computed for the unit vector and rescaled by homogeneity:
    // H is 1-homogeneous, grad H 0-homogeneous, D^2 H (-1)-homogeneous.
    let scale = euclid(xi);
    let e: Vec<f64> = xi.iter().map(|x| x / scale).collect();

    let k = lq_norm(&e, q);
    let kg = DVector::from_iterator(n, e.iter().map(|x| x.abs().powf(q - 1.0) * x.signum() / k.powf(q - 1.0)));
    let mut kh = DMatrix::from_diagonal(&DVector::from_iterator(
        n,
        e.iter().map(|x| (q - 1.0) * x.abs().powf(q - 2.0) / k.powf(q - 1.0)),
    ));
    kh -= &kg * kg.transpose() * ((q - 1.0) / k);

    // |e| = 1
    let rg = DVector::from_column_slice(&e);
    let rh = DMatrix::identity(n, n) - &rg * rg.transpose();

    let f = alpha * k.powf(p) + beta;
    let fg = &kg * (alpha * p * k.powf(p - 1.0)) + &rg * (beta * p);
    let fh = (&kg * kg.transpose() * ((p - 1.0) * k.powf(p - 2.0)) + &kh * k.powf(p - 1.0)) * (alpha * p)
        + (&rg * rg.transpose() * (p - 1.0) + rh) * (beta * p);

    let h = f.powf(1.0 / p);
    let g = &fg * (f.powf(1.0 / p - 1.0) / p);
    let hess = fh * (f.powf(1.0 / p - 1.0) / p) + &fg * fg.transpose() * ((1.0 / p) * (1.0 / p - 1.0) * f.powf(1.0 / p - 2.0));
    (h * scale, g, hess / scale)
}

fn fd_derivatives(eval: &(dyn Fn(&[f64]) -> f64 + Send + Sync), xi: &[f64]) -> (f64, DVector<f64>, DMatrix<f64>) {
    let n = xi.len();
    let h = 1e-5 * euclid(xi).max(1.0);
    let value = eval(xi);
    let mut work = xi.to_vec();
    let mut grad = DVector::zeros(n);
    for i in 0..n {
        work[i] = xi[i] + h;
        let fp = eval(&work);
        work[i] = xi[i] - h;
        let fm = eval(&work);
        work[i] = xi[i];
        grad[i] = (fp - fm) / (2.0 * h);
    }
    let mut hess = DMatrix::zeros(n, n);
    for i in 0..n {
        work[i] = xi[i] + h;
        let fp = eval(&work);
        work[i] = xi[i] - h;
        let fm = eval(&work);
        work[i] = xi[i];
        hess[(i, i)] = (fp - 2.0 * value + fm) / (h * h);
        for j in 0..i {
            let mut corner = |si: f64, sj: f64| {
                work[i] = xi[i] + si * h;
                work[j] = xi[j] + sj * h;
                let v = eval(&work);
                work[i] = xi[i];
                work[j] = xi[j];
                v
            };
            let d = (corner(1.0, 1.0) - corner(1.0, -1.0) - corner(-1.0, 1.0) + corner(-1.0, -1.0)) / (4.0 * h * h);
            hess[(i, j)] = d;
            hess[(j, i)] = d;
        }
    }
    (value, grad, hess)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn blend4() -> AnisotropicNorm {
        AnisotropicNorm::blend(2, 4.0, 4.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn value_examples() {
        let e = AnisotropicNorm::euclidean(2).unwrap();
        assert_relative_eq!(e.value(&[3.0, 4.0]).unwrap(), 5.0);
        assert_relative_eq!(blend4().value(&[1.0, 0.0]).unwrap(), 2f64.powf(0.25), epsilon = 1e-14);
        let w = AnisotropicNorm::weighted_quadratic(&[4.0, 1.0]).unwrap();
        assert_relative_eq!(w.value(&[1.0, 1.0]).unwrap(), 5f64.sqrt(), epsilon = 1e-14);
    }

    #[test]
    fn non_finite_input_is_rejected() {
        let e = AnisotropicNorm::euclidean(2).unwrap();
        assert!(matches!(e.value(&[f64::NAN, 1.0]), Err(Error::InvalidInput(_))));
        assert!(matches!(e.value(&[1.0, 2.0, 3.0]), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn gradient_examples() {
        let e = AnisotropicNorm::euclidean(2).unwrap();
        let g = e.gradient(&[3.0, 4.0]).unwrap();
        assert_relative_eq!(g[0], 0.6, epsilon = 1e-15);
        assert_relative_eq!(g[1], 0.8, epsilon = 1e-15);
        let w = AnisotropicNorm::weighted_quadratic(&[4.0, 1.0]).unwrap();
        let g = w.gradient(&[1.0, 0.0]).unwrap();
        assert_relative_eq!(g[0], 2.0, epsilon = 1e-15);
        assert_relative_eq!(g[1], 0.0, epsilon = 1e-15);
        assert!(matches!(w.gradient(&[0.0, 0.0]), Err(Error::SingularPoint(_))));
        assert!(matches!(w.hessian(&[1e-15, 0.0]), Err(Error::SingularPoint(_))));
    }

    #[test]
    fn euclidean_hessian_example() {
        let e = AnisotropicNorm::euclidean(2).unwrap();
        let h = e.hessian(&[1.0, 0.0]).unwrap();
        assert_eq!(h, DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 1.0]));
        let xi = [0.3, -1.7];
        let hx = e.hessian(&xi).unwrap() * DVector::from_column_slice(&xi);
        assert!(hx.norm() < 1e-15);
    }

    #[test]
    fn blend_hessian_matches_central_differences() {
        let norm = blend4();
        let xi = [1.0, 1.0];
        let analytic = norm.hessian(&xi).unwrap();
        let step = 1e-5;
        for j in 0..2 {
            let mut plus = xi;
            let mut minus = xi;
            plus[j] += step;
            minus[j] -= step;
            let gp = norm.gradient(&plus).unwrap();
            let gm = norm.gradient(&minus).unwrap();
            for i in 0..2 {
                let fd = (gp[i] - gm[i]) / (2.0 * step);
                let rel = (fd - analytic[(i, j)]).abs() / analytic.norm();
                assert!(rel < 1e-6, "entry ({i},{j}): fd {fd} vs {}", analytic[(i, j)]);
            }
        }
    }

    #[test]
    fn blend_gradient_matches_central_differences_in_three_dimensions() {
        let norm = AnisotropicNorm::blend(3, 3.0, 4.0, 0.5, 2.0).unwrap();
        let xi = [0.4, -1.1, 0.7];
        let g = norm.gradient(&xi).unwrap();
        for i in 0..3 {
            let mut plus = xi;
            let mut minus = xi;
            plus[i] += 1e-6;
            minus[i] -= 1e-6;
            let fd = (norm.eval(&plus) - norm.eval(&minus)) / 2e-6;
            assert!((fd - g[i]).abs() < 1e-8);
        }
    }

    #[test]
    fn dual_examples() {
        let e = AnisotropicNorm::euclidean(2).unwrap();
        assert_relative_eq!(e.dual_value(&[3.0, 4.0]), 5.0);
        let w = AnisotropicNorm::weighted_quadratic(&[4.0, 1.0]).unwrap();
        assert_relative_eq!(w.dual_value(&[2.0, 0.0]), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn numeric_dual_agrees_with_closed_form() {
        // Same norm routed through the numeric path.
        let custom = AnisotropicNorm::custom(2, "w41", Arc::new(|x: &[f64]| (4.0 * x[0] * x[0] + x[1] * x[1]).sqrt())).unwrap();
        for x in [[2.0f64, 0.0], [0.3, -1.2], [-1.0, 1.0]] {
            let exact = (x[0] * x[0] / 4.0 + x[1] * x[1]).sqrt();
            assert!((custom.dual_value(&x) - exact).abs() < 1e-10);
        }
        let custom3 = AnisotropicNorm::custom(3, "w412", Arc::new(|x: &[f64]| (4.0 * x[0] * x[0] + x[1] * x[1] + 2.0 * x[2] * x[2]).sqrt())).unwrap();
        let x = [0.5, -0.25, 1.0];
        let exact = (0.25 / 4.0 + 0.0625 + 0.5f64).sqrt();
        assert!((custom3.dual_value(&x) - exact).abs() < 1e-8);
    }

    #[test]
    fn ellipticity_examples() {
        let e = AnisotropicNorm::euclidean(2).unwrap();
        let (lo, hi) = e.ellipticity_bounds(1000).unwrap();
        assert_relative_eq!(lo, 1.0, epsilon = 1e-12);
        assert_relative_eq!(hi, 1.0, epsilon = 1e-12);
        let w = AnisotropicNorm::weighted_quadratic(&[4.0, 1.0]).unwrap();
        let (lo, hi) = w.ellipticity_bounds(1000).unwrap();
        assert_relative_eq!(lo, 1.0, epsilon = 1e-12);
        assert_relative_eq!(hi, 4.0, epsilon = 1e-12);
        assert!(e.ellipticity_bounds(99).is_err());
    }

    #[test]
    fn blend_ellipticity_estimates_are_stable_and_bracketed() {
        let norm = blend4();
        let (lo1, hi1) = norm.ellipticity_bounds(10_000).unwrap();
        let (lo2, hi2) = norm.ellipticity_bounds(20_000).unwrap();
        assert!((lo1 - lo2).abs() / lo2 < 5e-4);
        assert!((hi1 - hi2).abs() / hi2 < 5e-4);
        assert!(norm.lambda() <= lo2 + 1e-8);
        assert!(hi2 <= norm.big_lambda() + 1e-8);
    }

    #[test]
    fn tangential_hessian_examples() {
        let e = AnisotropicNorm::euclidean(2).unwrap();
        let r = e.check_tangential_hessian(&[1.0, 0.0]).unwrap();
        assert_relative_eq!(r.eig_min, 1.0, epsilon = 1e-15);
        assert_relative_eq!(r.lower_bound, 1.0);
        assert_relative_eq!(r.upper_bound, 2.0);
        assert!(r.holds());

        let w = AnisotropicNorm::weighted_quadratic(&[4.0, 1.0]).unwrap();
        let r = w.check_tangential_hessian(&[1.0, 0.0]).unwrap();
        assert_relative_eq!(r.lower_bound, 0.5);
        assert_relative_eq!(r.upper_bound, 20.0);
        assert!(r.holds());
        assert!(r.eig_min > 0.0);

        assert!(matches!(w.check_tangential_hessian(&[2.0, 0.0]), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn tangential_hessian_holds_in_three_dimensions() {
        let norm = AnisotropicNorm::blend(3, 4.0, 4.0, 1.0, 1.0).unwrap();
        let mut xi = [0.2, 0.9, -0.4];
        normalize(&mut xi);
        let r = norm.check_tangential_hessian(&xi).unwrap();
        assert!(r.holds(), "{r:?}");
    }

    #[test]
    fn invalid_constructions() {
        assert!(AnisotropicNorm::euclidean(1).is_err());
        assert!(AnisotropicNorm::weighted_quadratic(&[1.0, -1.0]).is_err());
        assert!(AnisotropicNorm::blend(2, 1.0, 4.0, 1.0, 1.0).is_err());
        assert!(AnisotropicNorm::blend(2, 4.0, 1.5, 1.0, 1.0).is_err());
    }
}
