//! The stress map `A(xi) = b(H(xi)) grad H(xi)`, its regularization `A_eps`,
//! Jacobians, and the pointwise inequalities they satisfy.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::norms::{euclid, sym_eig_range, AnisotropicNorm, ZERO_CUTOFF};
use crate::young::{RegularizedYoung, YoungFunction};

/// Relative slack for pointwise inequality checks.
pub const REL_SLACK: f64 = 1e-9;
/// Absolute floor for pointwise inequality checks.
pub const ABS_FLOOR: f64 = 1e-13;

/// `lhs <= rhs` up to the roundoff slack used by every pointwise check.
pub fn leq_with_slack(lhs: f64, rhs: f64) -> bool {
    lhs <= rhs + (REL_SLACK * lhs.abs().max(rhs.abs())).max(ABS_FLOOR)
}

#[derive(Clone, Debug)]
pub struct StressOperator {
    norm: AnisotropicNorm,
    young: YoungFunction,
    regularized: Option<RegularizedYoung>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceInequality {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

impl StressOperator {
    pub fn new(norm: AnisotropicNorm, young: YoungFunction) -> Self {
        Self { norm, young, regularized: None }
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::InvalidInput(format!("epsilon must lie in (0, 1), got {epsilon}")));
        }
        Ok(Self {
            norm: self.norm.clone(),
            young: self.young.clone(),
            regularized: Some(self.young.regularize(epsilon)?),
        })
    }

    /// The same pair without regularization.
    pub fn unregularized(&self) -> Self {
        Self { norm: self.norm.clone(), young: self.young.clone(), regularized: None }
    }

    pub fn norm(&self) -> &AnisotropicNorm {
        &self.norm
    }

    pub fn young(&self) -> &YoungFunction {
        &self.young
    }

    pub fn epsilon(&self) -> Option<f64> {
        self.regularized.as_ref().map(|r| r.epsilon())
    }

    pub fn regularized_young(&self) -> Option<&RegularizedYoung> {
        self.regularized.as_ref()
    }

    /// `lambda min{1, i_b}`.
    pub fn lower_constant(&self) -> f64 {
        self.norm.lambda() * self.young.i_b().min(1.0)
    }

    /// `Lambda max{1, s_b}`.
    pub fn upper_constant(&self) -> f64 {
        self.norm.big_lambda() * self.young.s_b().max(1.0)
    }

    /// `Lambda max{1, s_b} / (lambda min{1, i_b})`, the constant of the convex-domain estimate.
    pub fn ellipticity_ratio(&self) -> f64 {
        self.upper_constant() / self.lower_constant()
    }

    fn b_of(&self, t: f64) -> f64 {
        match &self.regularized {
            Some(r) => r.b_eps(t),
            None => self.young.b(t),
        }
    }

    /// Energy density `B(H(xi))`, or `B_eps(H(xi))` when regularized.
    pub fn energy_density(&self, xi: &[f64]) -> f64 {
        let h = self.norm.eval(xi);
        match &self.regularized {
            Some(r) => r.big_b_eps(h),
            None => self.young.big_b(h),
        }
    }

    /// `A(xi)` or `A_eps(xi)`; zero at the origin.
    pub fn stress(&self, xi: &[f64]) -> DVector<f64> {
        if euclid(xi) < ZERO_CUTOFF {
            return DVector::zeros(xi.len());
        }
        let (h, g, _) = self.norm.derivatives(xi);
        g * self.b_of(h)
    }

    /// Stress for the planar case without heap allocation in the caller.
    pub fn stress2(&self, xi: [f64; 2]) -> [f64; 2] {
        let s = self.stress(&xi);
        [s[0], s[1]]
    }

    /// `D A_eps(xi)`, assembled from `b_eps'(H) grad H (x) grad H + b_eps(H) D^2 H`.
    pub fn stress_jacobian(&self, xi: &[f64]) -> Result<DMatrix<f64>> {
        let reg = self.regularized.as_ref().ok_or_else(|| {
            Error::Configuration("stress_jacobian needs a regularized operator (epsilon is absent)".into())
        })?;
        if xi.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite component in {xi:?}")));
        }
        if euclid(xi) < ZERO_CUTOFF {
            return Err(Error::SingularPoint("the Jacobian of A_eps is not defined at the origin".into()));
        }
        let (h, g, hess) = self.norm.derivatives(xi);
        let j = &g * g.transpose() * reg.db_eps(h) + hess * reg.b_eps(h);
        let asym = (&j - j.transpose()).norm();
        if asym > 1e-8 * j.norm().max(1.0) {
            return Err(Error::Numerical(format!("Jacobian asymmetry {asym:e} exceeds 1e-8")));
        }
        Ok(0.5 * (&j + j.transpose()))
    }

    /// `tr((D A_eps M)^2)` against `(lambda min{1,i_b} / (Lambda max{1,s_b}))^2 |D A_eps M|^2`.
    pub fn matrix_trace_inequality_check(&self, xi: &[f64], m: &DMatrix<f64>) -> Result<TraceInequality> {
        check_symmetric(m)?;
        let j = self.stress_jacobian(xi)?;
        let ratio = self.lower_constant() / self.upper_constant();
        Ok(trace_inequality(&j, m, ratio))
    }

    /// `(A(xi) - A(eta)) . (xi - eta)`.
    pub fn monotonicity_gap(&self, xi: &[f64], eta: &[f64]) -> f64 {
        let d = self.stress(xi) - self.stress(eta);
        d.iter().zip(xi.iter().zip(eta)).map(|(s, (a, b))| s * (a - b)).sum()
    }
}

fn check_symmetric(m: &DMatrix<f64>) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::InvalidInput("matrix must be square".into()));
    }
    let asym = (m - m.transpose()).norm();
    if asym > 1e-12 * m.norm().max(1.0) {
        return Err(Error::InvalidInput(format!("matrix is not symmetric (asymmetry {asym:e})")));
    }
    Ok(())
}

fn trace_inequality(x: &DMatrix<f64>, y: &DMatrix<f64>, ratio: f64) -> TraceInequality {
    let xy = x * y;
    let lhs = (&xy * &xy).trace();
    let rhs = ratio * ratio * xy.norm_squared();
    TraceInequality { lhs, rhs, holds: lhs >= rhs - 1e-9 * rhs.abs() }
}

/// For symmetric positive definite `x` and symmetric `y`:
/// `tr((XY)^2) >= (lambda_min / lambda_max)^2 |XY|^2`.
pub fn algebraic_trace_check(x: &DMatrix<f64>, y: &DMatrix<f64>) -> Result<TraceInequality> {
    check_symmetric(x)?;
    check_symmetric(y)?;
    let (lo, hi) = sym_eig_range(x);
    if lo <= 0.0 {
        return Err(Error::InvalidInput(format!("X must be positive definite (smallest eigenvalue {lo})")));
    }
    Ok(trace_inequality(x, y, lo / hi))
}
