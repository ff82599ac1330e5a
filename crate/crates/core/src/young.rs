//! Young functions `B(t) = int_0^t b`, the quotient `a = b/t`, growth indices
//! and the quadratic-growth regularization `a_eps`.

use std::fmt;
use std::sync::{Arc, OnceLock};

use crate::error::{Error, Result};
use crate::quadrature::{adaptive_simpson, gauss_legendre};

const QUAD_REL_TOL: f64 = 1e-10;
const QUAD_ABS_FLOOR: f64 = 1e-14;
const INDEX_GRID_POINTS: usize = 2048;
const EPS_PANELS: usize = 12;

fn eps_rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(10))
}

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum YoungKind {
    /// `B(t) = t^p`.
    Power { p: f64 },
    /// `B(t) = t^p log^q(c + t)`.
    PowerLog { p: f64, q: f64, c: f64 },
    /// User-supplied derivative `b`; `B` by quadrature, `b'` by central differences.
    Custom { name: String, b: ScalarFn },
}

impl fmt::Debug for YoungKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            YoungKind::Power { p } => write!(f, "Power(p={p})"),
            YoungKind::PowerLog { p, q, c } => write!(f, "PowerLog(p={p}, q={q}, c={c})"),
            YoungKind::Custom { name, .. } => write!(f, "Custom({name})"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct YoungFunction {
    kind: YoungKind,
    i_b: f64,
    s_b: f64,
}

/// `(b(t), B(t), a(t))`. `a` is `+inf` at `t = 0` when `i_a < 0`, flagged by `a_infinite`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct YoungValues {
    pub b: f64,
    pub big_b: f64,
    pub a: f64,
    pub a_infinite: bool,
}

impl YoungFunction {
    pub fn power(p: f64) -> Result<Self> {
        if !(p > 1.0 && p.is_finite()) {
            return Err(Error::InvalidInput(format!("power Young function needs p > 1, got {p}")));
        }
        Ok(Self { kind: YoungKind::Power { p }, i_b: p - 1.0, s_b: p - 1.0 })
    }

    /// `t^p log^q(c + t)`. Convexity is checked on a log-grid; `c` must exceed 1.
    pub fn power_log(p: f64, q: f64, c: f64) -> Result<Self> {
        if !(p > 1.0 && c > 1.0 && p.is_finite() && q.is_finite() && c.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "power-log Young function needs p > 1 and c > 1 (got p={p}, q={q}, c={c})"
            )));
        }
        Self::with_estimated_indices(YoungKind::PowerLog { p, q, c })
    }

    pub fn custom(name: &str, b: ScalarFn) -> Result<Self> {
        Self::with_estimated_indices(YoungKind::Custom { name: name.to_string(), b })
    }

    fn with_estimated_indices(kind: YoungKind) -> Result<Self> {
        let mut y = Self { kind, i_b: 0.0, s_b: 0.0 };
        y.check_convexity()?;
        let (i_b, s_b) = y.growth_indices()?;
        y.i_b = i_b;
        y.s_b = s_b;
        Ok(y)
    }

    fn check_convexity(&self) -> Result<()> {
        let mut prev = 0.0;
        for t in log_grid(INDEX_GRID_POINTS) {
            let b = self.b(t);
            if !b.is_finite() || b < 0.0 {
                return Err(Error::AssumptionViolated(format!("b({t:e}) = {b} is not a finite non-negative value")));
            }
            if b < prev * (1.0 - 1e-12) {
                return Err(Error::AssumptionViolated(format!(
                    "b is decreasing near t = {t:e}; B is not convex for these parameters"
                )));
            }
            prev = b;
        }
        Ok(())
    }

    pub fn kind(&self) -> &YoungKind {
        &self.kind
    }

    pub fn i_b(&self) -> f64 {
        self.i_b
    }

    pub fn s_b(&self) -> f64 {
        self.s_b
    }

    pub fn i_a(&self) -> f64 {
        self.i_b - 1.0
    }

    pub fn s_a(&self) -> f64 {
        self.s_b - 1.0
    }

    pub fn label(&self) -> String {
        match &self.kind {
            YoungKind::Power { p } => format!("power(p={p})"),
            YoungKind::PowerLog { p, q, c } => format!("powerlog(p={p};q={q};c={c})"),
            YoungKind::Custom { name, .. } => format!("custom({name})"),
        }
    }

    /// `b(t)` for `t >= 0`.
    pub fn b(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        match &self.kind {
            YoungKind::Power { p } => p * t.powf(p - 1.0),
            YoungKind::PowerLog { p, q, c } => {
                let l = (c + t).ln();
                t.powf(p - 1.0) * l.powf(q - 1.0) * (p * l + q * t / (c + t))
            }
            YoungKind::Custom { b, .. } => b(t),
        }
    }

    /// `b'(t)` for `t > 0`.
    pub fn db(&self, t: f64) -> f64 {
        match &self.kind {
            YoungKind::Power { p } => p * (p - 1.0) * t.powf(p - 2.0),
            YoungKind::PowerLog { p, q, c } => {
                let l = (c + t).ln();
                let s = c + t;
                p * (p - 1.0) * t.powf(p - 2.0) * l.powf(*q)
                    + 2.0 * p * q * t.powf(p - 1.0) * l.powf(q - 1.0) / s
                    + q * t.powf(*p) * l.powf(q - 2.0) * (q - 1.0 - l) / (s * s)
            }
            YoungKind::Custom { b, .. } => {
                let h = 1e-6 * t.max(1e-300);
                (b(t + h) - b(t - h)) / (2.0 * h)
            }
        }
    }

    /// `B(t)`: closed form for the power kinds, quadrature of `b` otherwise.
    pub fn big_b(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        match &self.kind {
            YoungKind::Power { p } => t.powf(*p),
            YoungKind::PowerLog { p, q, c } => t.powf(*p) * (c + t).ln().powf(*q),
            YoungKind::Custom { .. } => adaptive_simpson(|s| self.b(s), 0.0, t, QUAD_REL_TOL, QUAD_ABS_FLOOR),
        }
    }

    /// `a(t) = b(t)/t` for `t > 0`.
    pub fn a(&self, t: f64) -> f64 {
        match &self.kind {
            YoungKind::Power { p } => p * t.powf(p - 2.0),
            YoungKind::PowerLog { p, q, c } => {
                let l = (c + t).ln();
                t.powf(p - 2.0) * l.powf(q - 1.0) * (p * l + q * t / (c + t))
            }
            YoungKind::Custom { b, .. } => b(t) / t,
        }
    }

    /// `a'(t) = (b'(t) - a(t)) / t`.
    pub fn da(&self, t: f64) -> f64 {
        (self.db(t) - self.a(t)) / t
    }

    /// Limit of `a` at the origin: 0 if `i_a > 0`, `b'(0+)` if `i_a = 0`, `+inf` if `i_a < 0`.
    fn a_at_zero(&self) -> (f64, bool) {
        let near_zero_index = match &self.kind {
            YoungKind::Power { p } | YoungKind::PowerLog { p, .. } => p - 2.0,
            YoungKind::Custom { .. } => self.i_a(),
        };
        if near_zero_index > 0.0 {
            (0.0, false)
        } else if near_zero_index == 0.0 {
            match &self.kind {
                YoungKind::Power { p } => (*p, false),
                YoungKind::PowerLog { p, q, c } => (p * c.ln().powf(*q), false),
                YoungKind::Custom { .. } => (self.db(1e-12), false),
            }
        } else {
            (f64::INFINITY, true)
        }
    }

    pub fn values(&self, t: f64) -> Result<YoungValues> {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Error::InvalidInput(format!("t must be finite and non-negative, got {t}")));
        }
        if t == 0.0 {
            let (a, a_infinite) = self.a_at_zero();
            return Ok(YoungValues { b: 0.0, big_b: 0.0, a, a_infinite });
        }
        Ok(YoungValues { b: self.b(t), big_b: self.big_b(t), a: self.a(t), a_infinite: false })
    }

    /// `inf` and `sup` of `t b'(t) / b(t)`; exact for the power kind,
    /// otherwise scanned on 2048 log-spaced points in `[1e-6, 1e6]`.
    pub fn growth_indices(&self) -> Result<(f64, f64)> {
        let (lo, hi) = match &self.kind {
            YoungKind::Power { p } => (p - 1.0, p - 1.0),
            _ => {
                let mut lo = f64::INFINITY;
                let mut hi = f64::NEG_INFINITY;
                for t in log_grid(INDEX_GRID_POINTS) {
                    let r = t * self.db(t) / self.b(t);
                    lo = lo.min(r);
                    hi = hi.max(r);
                }
                (lo, hi)
            }
        };
        if !(lo > 0.0) {
            return Err(Error::AssumptionViolated(format!("lower growth index i_b = {lo} is not positive")));
        }
        if !hi.is_finite() {
            return Err(Error::AssumptionViolated("upper growth index s_b is not finite".into()));
        }
        Ok((lo, hi))
    }

    pub fn regularize(&self, epsilon: f64) -> Result<RegularizedYoung> {
        RegularizedYoung::new(self.clone(), epsilon)
    }
}

fn log_grid(n: usize) -> impl Iterator<Item = f64> {
    let (lo, hi) = (1e-6_f64.ln(), 1e6_f64.ln());
    (0..n).map(move |k| (lo + (hi - lo) * k as f64 / (n - 1) as f64).exp())
}

/// The quadratic-growth family `a_eps(t) = (a(sqrt(eps + t^2)) + eps) / (1 + eps a(sqrt(eps + t^2)))`.
#[derive(Clone, Debug)]
pub struct RegularizedYoung {
    base: YoungFunction,
    epsilon: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegularizedValues {
    pub a_eps: f64,
    pub b_eps: f64,
    pub big_b_eps: f64,
}

impl RegularizedYoung {
    pub fn new(base: YoungFunction, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon <= 1.0) {
            return Err(Error::InvalidInput(format!("epsilon must lie in (0, 1], got {epsilon}")));
        }
        Ok(Self { base, epsilon })
    }

    pub fn base(&self) -> &YoungFunction {
        &self.base
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn a_eps(&self, t: f64) -> f64 {
        let e = self.epsilon;
        let a = self.base.a((e + t * t).sqrt());
        (a + e) / (1.0 + e * a)
    }

    /// Derivative of `a_eps` in `t`.
    pub fn da_eps(&self, t: f64) -> f64 {
        let e = self.epsilon;
        let s = (e + t * t).sqrt();
        let a = self.base.a(s);
        let denom = 1.0 + e * a;
        (1.0 - e * e) / (denom * denom) * self.base.da(s) * t / s
    }

    pub fn b_eps(&self, t: f64) -> f64 {
        self.a_eps(t) * t
    }

    /// `b_eps'(t) = a_eps(t) + t a_eps'(t)`.
    pub fn db_eps(&self, t: f64) -> f64 {
        self.a_eps(t) + t * self.da_eps(t)
    }

    /// `B_eps(t)`, integrated in `sigma = sqrt(eps + tau^2)` where `tau dtau = sigma dsigma`.
    ///
    /// A fixed number of geometric panels keeps the result a smooth function of `t`,
    /// which the Newton line search relies on.
    pub fn big_b_eps(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let e = self.epsilon;
        let lo = e.sqrt();
        let hi = (e + t * t).sqrt();
        let (nodes, weights) = eps_rule();
        let ratio = (hi / lo).powf(1.0 / EPS_PANELS as f64);
        let mut total = 0.0;
        let mut a0 = lo;
        for k in 0..EPS_PANELS {
            let a1 = if k + 1 == EPS_PANELS { hi } else { a0 * ratio };
            let (mid, half) = (0.5 * (a0 + a1), 0.5 * (a1 - a0));
            let mut panel = 0.0;
            for (x, w) in nodes.iter().zip(weights) {
                let sigma = mid + half * x;
                let a = self.base.a(sigma);
                panel += w * (a + e) / (1.0 + e * a) * sigma;
            }
            total += half * panel;
            a0 = a1;
        }
        total
    }

    pub fn values(&self, t: f64) -> Result<RegularizedValues> {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Error::InvalidInput(format!("t must be finite and non-negative, got {t}")));
        }
        Ok(RegularizedValues { a_eps: self.a_eps(t), b_eps: self.b_eps(t), big_b_eps: self.big_b_eps(t) })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn power_values_examples() {
        let y = YoungFunction::power(2.0).unwrap();
        let v = y.values(3.0).unwrap();
        assert_eq!((v.b, v.big_b, v.a), (6.0, 9.0, 2.0));
        let y = YoungFunction::power(3.0).unwrap();
        let v = y.values(0.0).unwrap();
        assert_eq!((v.b, v.big_b, v.a, v.a_infinite), (0.0, 0.0, 0.0, false));
        let v = YoungFunction::power(1.5).unwrap().values(0.0).unwrap();
        assert!(v.a_infinite && v.a.is_infinite());
        assert_eq!(YoungFunction::power(2.0).unwrap().values(0.0).unwrap().a, 2.0);
        assert!(matches!(y.values(-1.0), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn power_log_closed_form_matches_quadrature_of_b() {
        let y = YoungFunction::power_log(2.0, 1.0, std::f64::consts::E).unwrap();
        let closed = y.values(1.0).unwrap().big_b;
        let quad = adaptive_simpson(|s| y.b(s), 0.0, 1.0, 1e-12, 1e-16);
        assert!((closed - quad).abs() < 1e-10, "{closed} vs {quad}");
        assert_relative_eq!(closed, (1.0 + std::f64::consts::E).ln(), epsilon = 1e-15);
    }

    #[test]
    fn power_log_derivative_matches_central_differences() {
        let y = YoungFunction::power_log(2.5, -0.5, 8.0).unwrap();
        for t in [1e-3, 0.7, 3.0, 250.0] {
            let h = 1e-6 * t;
            let fd = (y.b(t + h) - y.b(t - h)) / (2.0 * h);
            assert!((fd - y.db(t)).abs() <= 1e-6 * y.db(t).abs(), "t={t}");
        }
    }

    #[test]
    fn growth_index_examples() {
        assert_eq!(YoungFunction::power(2.0).unwrap().growth_indices().unwrap(), (1.0, 1.0));
        assert_eq!(YoungFunction::power(4.0).unwrap().growth_indices().unwrap(), (3.0, 3.0));
        let y = YoungFunction::power_log(2.0, 1.0, 10.0).unwrap();
        let (lo, hi) = y.growth_indices().unwrap();
        assert!(lo >= 1.0 - 1e-12, "{lo}");
        assert!(hi <= 1.0 + 1.0 / 10f64.ln() + 1e-3, "{hi}");
        assert_eq!((y.i_b(), y.s_b()), (lo, hi));
    }

    #[test]
    fn assumption_violations() {
        // constant b: t b'/b = 0, so i_b is not positive
        let flat = YoungFunction::custom("constant", Arc::new(|_t: f64| 1.0));
        assert!(matches!(flat, Err(Error::AssumptionViolated(_))));
        // exponential growth overflows on the index grid
        let wild = YoungFunction::custom("exp", Arc::new(|t: f64| t.exp() - 1.0));
        assert!(matches!(wild, Err(Error::AssumptionViolated(_))));
        assert!(YoungFunction::power(1.0).is_err());
        assert!(YoungFunction::power_log(2.0, 1.0, 0.5).is_err());
    }

    #[test]
    fn nonconvex_power_log_is_rejected() {
        // Strongly negative log power with a small shift makes b decrease.
        assert!(matches!(YoungFunction::power_log(1.1, -3.0, 1.5), Err(Error::AssumptionViolated(_))));
    }

    #[test]
    fn custom_b_reproduces_power() {
        let y = YoungFunction::custom("cube", Arc::new(|t: f64| 3.0 * t * t)).unwrap();
        assert!((y.i_b() - 2.0).abs() < 1e-6 && (y.s_b() - 2.0).abs() < 1e-6);
        assert!((y.big_b(2.0) - 8.0).abs() < 1e-9);
    }

    #[test]
    fn regularized_examples() {
        let r = YoungFunction::power(2.0).unwrap().regularize(0.5).unwrap();
        assert_relative_eq!(r.values(1.0).unwrap().a_eps, 1.25, epsilon = 1e-15);
        assert_eq!(r.values(0.0).unwrap().b_eps, 0.0);
        assert!(YoungFunction::power(2.0).unwrap().regularize(0.0).is_err());
    }

    #[test]
    fn regularized_converges_pointwise_as_epsilon_vanishes() {
        for y in [YoungFunction::power(1.5).unwrap(), YoungFunction::power(3.0).unwrap(), YoungFunction::power_log(2.0, 1.0, 10.0).unwrap()] {
            let t = 0.8;
            let mut prev = f64::INFINITY;
            for k in 1..12 {
                let err = (y.regularize(10f64.powi(-k)).unwrap().a_eps(t) - y.a(t)).abs();
                assert!(err <= prev + 1e-15);
                prev = err;
            }
            assert!(prev < 1e-9 * y.a(t).max(1.0) * 1e2);
        }
    }

    #[test]
    fn regularized_derivative_matches_central_differences() {
        let r = YoungFunction::power(1.5).unwrap().regularize(0.01).unwrap();
        for t in [0.0, 0.05, 0.9, 7.0] {
            let h = 1e-6;
            let fd = (r.b_eps(t + h) - r.b_eps((t - h).max(0.0))) / (t + h - (t - h).max(0.0));
            assert!((fd - r.db_eps(t)).abs() < 1e-5 * r.db_eps(t).abs().max(1.0), "t={t}");
        }
    }
}
