use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::CheckRow;
use crate::error::{Error, Result};
use crate::norms::{sym_eig_range, AnisotropicNorm};
use crate::operator::{leq_with_slack, StressOperator};
use crate::young::YoungFunction;

pub const SWEEP_POWERS: [f64; 4] = [1.5, 2.0, 3.0, 4.0];
pub const SWEEP_EPSILONS: [f64; 3] = [0.5, 0.1, 0.01];
const EULER_TOL: f64 = 1e-10;
const DUAL_TOL: f64 = 1e-8;

/// Euclidean, weighted-quadratic `(4, 1)` and the `p = q = 4` blend.
pub fn sweep_norms() -> Vec<AnisotropicNorm> {
    vec![
        AnisotropicNorm::euclidean(2).unwrap(),
        AnisotropicNorm::weighted_quadratic(&[4.0, 1.0]).unwrap(),
        AnisotropicNorm::blend(2, 4.0, 4.0, 1.0, 1.0).unwrap(),
    ]
}

pub fn sweep_youngs() -> Vec<YoungFunction> {
    SWEEP_POWERS.iter().map(|&p| YoungFunction::power(p).unwrap()).collect()
}

/// Generator for sample `index` of stream `stream`; independent of thread scheduling.
pub fn sample_rng(seed: u64, stream: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng.set_word_pos(u128::from(index) * 64);
    rng
}

/// Planar vector with log-uniform length in `[1e-2, 1e2]` and uniform direction.
fn random_vector(rng: &mut ChaCha8Rng) -> [f64; 2] {
    let r = 10f64.powf(rng.gen_range(-2.0..2.0));
    let t = rng.gen_range(0.0..std::f64::consts::TAU);
    [r * t.cos(), r * t.sin()]
}

fn random_symmetric(rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let (a, b, c) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    DMatrix::from_row_slice(2, 2, &[a, b, b, c])
}

/// Worst case of one inequality over a sweep, in the form `lhs <= rhs`.
#[derive(Clone, Copy, Debug)]
struct Worst {
    lhs: f64,
    rhs: f64,
    score: f64,
    failures: usize,
}

impl Worst {
    fn new() -> Self {
        Self { lhs: f64::NAN, rhs: f64::NAN, score: f64::NEG_INFINITY, failures: 0 }
    }

    fn record(&mut self, lhs: f64, rhs: f64, score: f64, ok: bool) {
        if !ok {
            self.failures += 1;
        }
        if score > self.score || score.is_nan() {
            *self = Self { lhs, rhs, score, failures: self.failures };
        }
    }

    fn merge(mut self, other: Self) -> Self {
        let failures = self.failures + other.failures;
        if other.score > self.score || (other.score.is_nan() && !self.score.is_nan()) {
            self = other;
        }
        self.failures = failures;
        self
    }
}

#[derive(Clone, Copy, Debug)]
struct ComboWorst {
    trace: Worst,
    monotone: Worst,
    pinch: Worst,
    ellipticity: Worst,
}

impl ComboWorst {
    fn new() -> Self {
        Self { trace: Worst::new(), monotone: Worst::new(), pinch: Worst::new(), ellipticity: Worst::new() }
    }

    fn merge(self, o: Self) -> Self {
        Self {
            trace: self.trace.merge(o.trace),
            monotone: self.monotone.merge(o.monotone),
            pinch: self.pinch.merge(o.pinch),
            ellipticity: self.ellipticity.merge(o.ellipticity),
        }
    }
}

fn combo_sample(plain: &StressOperator, reg: &StressOperator, rng: &mut ChaCha8Rng, acc: &mut ComboWorst) -> Result<()> {
    let xi = random_vector(rng);
    let eta = random_vector(rng);
    let m = random_symmetric(rng);
    let (lo, hi) = (reg.lower_constant(), reg.upper_constant());
    let eps = reg.epsilon().unwrap();

    let t = reg.matrix_trace_inequality_check(&xi, &m)?;
    // tr((JM)^2) >= c |JM|^2 recorded as c |JM|^2 <= tr((JM)^2)
    acc.trace.record(t.rhs, t.lhs, t.rhs / t.lhs, t.holds);

    for op in [plain, reg] {
        let gap = op.monotonicity_gap(&xi, &eta);
        let d = (op.stress(&xi) - op.stress(&eta)).norm() * (xi[0] - eta[0]).hypot(xi[1] - eta[1]);
        // cosine of the angle between the stress and argument increments, negated
        acc.monotone.record(0.0, gap, -gap / d, gap > 0.0);
    }

    let j = reg.stress_jacobian(&xi)?;
    let (emin, emax) = sym_eig_range(&j);
    let (floor, ceil) = (eps * lo, hi / eps);
    acc.pinch.record(floor, emin, floor / emin, leq_with_slack(floor, emin));
    acc.pinch.record(emax, ceil, emax / ceil, leq_with_slack(emax, ceil));

    let a = reg.regularized_young().unwrap().a_eps(reg.norm().eval(&xi));
    acc.ellipticity.record(lo * a, emin, lo * a / emin, leq_with_slack(lo * a, emin));
    acc.ellipticity.record(emax, hi * a, emax / (hi * a), leq_with_slack(emax, hi * a));
    Ok(())
}

fn row(check: &str, norm: &str, young: &str, eps: Option<f64>, w: &Worst, bound: f64) -> CheckRow {
    CheckRow {
        check: check.into(),
        domain: "-".into(),
        norm: norm.into(),
        young: young.into(),
        h: None,
        eps_final: eps,
        lhs: w.lhs,
        rhs: w.rhs,
        ratio: w.score,
        bound,
        pass: w.failures == 0,
    }
}

/// Randomized pointwise inequalities for every `(norm, young, epsilon)` combination.
///
/// Per combination: the matrix trace inequality, monotonicity of `A` and `A_eps`, the
/// global Jacobian pinch and the `a_eps`-weighted ellipticity of `D A_eps`. Per norm: the
/// Euler identity and the dual identity `H_0(grad H) = 1`. Each sample draws from its own
/// generator, so results do not depend on the thread count.
pub fn operator_sweep(
    norms: &[AnisotropicNorm],
    youngs: &[YoungFunction],
    epsilons: &[f64],
    samples: usize,
    seed: u64,
) -> Result<Vec<CheckRow>> {
    if samples == 0 {
        return Err(Error::InvalidInput("the sweep needs at least one sample".into()));
    }
    let mut rows = Vec::new();
    let mut stream = 0u64;
    for norm in norms {
        if norm.dim() != 2 {
            return Err(Error::InvalidInput("the operator sweep samples planar norms".into()));
        }
        rows.extend(norm_checks(norm, samples, seed, stream));
        stream += 1;
        for young in youngs {
            let plain = StressOperator::new(norm.clone(), young.clone());
            for &eps in epsilons {
                let reg = plain.with_epsilon(eps)?;
                let s = stream;
                stream += 1;
                let worst = (0..samples as u64)
                    .into_par_iter()
                    .try_fold(ComboWorst::new, |mut acc, i| {
                        combo_sample(&plain, &reg, &mut sample_rng(seed, s, i), &mut acc)?;
                        Ok::<_, Error>(acc)
                    })
                    .try_reduce(ComboWorst::new, |a, b| Ok(a.merge(b)))?;
                let (n, y) = (norm.label(), young.label());
                rows.push(row("trace_inequality", &n, &y, Some(eps), &worst.trace, 1.0));
                rows.push(row("monotonicity", &n, &y, Some(eps), &worst.monotone, 0.0));
                rows.push(row("jacobian_pinch", &n, &y, Some(eps), &worst.pinch, 1.0));
                rows.push(row("jacobian_ellipticity", &n, &y, Some(eps), &worst.ellipticity, 1.0));
            }
        }
    }
    Ok(rows)
}

/// Euler identity, dual identity and tangential Hessian bounds of `norm` on random vectors.
pub fn norm_checks(norm: &AnisotropicNorm, samples: usize, seed: u64, stream: u64) -> Vec<CheckRow> {
    let (euler, dual, tangential) = (0..samples as u64)
        .into_par_iter()
        .fold(
            || (Worst::new(), Worst::new(), Worst::new()),
            |(mut euler, mut dual, mut tangential), i| {
                let xi = random_vector(&mut sample_rng(seed, stream, i));
                let (h, g, _) = norm.derivatives(&xi);
                let e = ((xi[0] * g[0] + xi[1] * g[1]) - h).abs() / h;
                euler.record(e, EULER_TOL, e, e <= EULER_TOL);
                let d = (norm.dual_value(g.as_slice()) - 1.0).abs();
                dual.record(d, DUAL_TOL, d, d <= DUAL_TOL);
                let r = xi[0].hypot(xi[1]);
                match norm.check_tangential_hessian(&[xi[0] / r, xi[1] / r]) {
                    Ok(t) => {
                        let score = (t.lower_bound / t.eig_min).max(t.eig_max / t.upper_bound);
                        tangential.record(t.eig_min, t.eig_max, score, t.holds());
                    }
                    Err(_) => tangential.record(f64::NAN, f64::NAN, f64::NAN, false),
                }
                (euler, dual, tangential)
            },
        )
        .reduce(
            || (Worst::new(), Worst::new(), Worst::new()),
            |a, b| (a.0.merge(b.0), a.1.merge(b.1), a.2.merge(b.2)),
        );
    let n = norm.label();
    vec![
        row("euler_identity", &n, "-", None, &euler, EULER_TOL),
        row("dual_identity", &n, "-", None, &dual, DUAL_TOL),
        row("tangential_hessian", &n, "-", None, &tangential, 1.0),
    ]
}

/// Growth indices, the `a_eps` pinch, doubling and the `B` sandwich of `young`.
///
/// Deterministic checks run on a log grid of `1e3` points in `[1e-4, 1e4]`; the doubling
/// check uses `samples` random pairs.
pub fn young_checks(young: &YoungFunction, epsilons: &[f64], samples: usize, seed: u64, stream: u64) -> Result<Vec<CheckRow>> {
    let grid: Vec<f64> = (0..1000).map(|k| 10f64.powf(-4.0 + 8.0 * k as f64 / 999.0)).collect();
    let y = young.label();
    let mut rows = Vec::new();
    let (ib, sb) = (young.i_b(), young.s_b());

    let mut growth = Worst::new();
    let mut sandwich = Worst::new();
    for &t in &grid {
        let idx = t * young.db(t) / young.b(t);
        let ok = leq_with_slack(ib, idx) && leq_with_slack(idx, sb);
        growth.record(idx, sb, (ib / idx).max(idx / sb), ok);
        let (lo, mid, hi) = (0.5 * t * young.b(0.5 * t), young.big_b(t), t * young.b(t));
        sandwich.record(lo, mid, lo / mid, leq_with_slack(lo, mid));
        sandwich.record(mid, hi, mid / hi, leq_with_slack(mid, hi));
    }
    rows.push(row("growth_indices", "-", &y, None, &growth, 1.0));
    rows.push(row("primitive_sandwich", "-", &y, None, &sandwich, 1.0));

    for &eps in epsilons {
        let reg = young.regularize(eps)?;
        let mut pinch = Worst::new();
        for &t in &grid {
            let a = reg.a_eps(t);
            pinch.record(eps, a, eps / a, leq_with_slack(eps, a));
            pinch.record(a, 1.0 / eps, a * eps, leq_with_slack(a, 1.0 / eps));
        }
        rows.push(row("a_eps_pinch", "-", &y, Some(eps), &pinch, 1.0));
    }

    let c = 2f64.powf(sb);
    let doubling = (0..samples as u64)
        .into_par_iter()
        .fold(Worst::new, |mut w, i| {
            let mut rng = sample_rng(seed, stream, i);
            let s = 10f64.powf(rng.gen_range(-3.0..3.0));
            let t = s * rng.gen_range(1.0..=2.0);
            let (bt, bs) = (young.b(t), c * young.b(s));
            w.record(bt, bs, bt / bs, leq_with_slack(bt, bs));
            w
        })
        .reduce(Worst::new, Worst::merge);
    rows.push(row("doubling", "-", &y, None, &doubling, 1.0));
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators_are_indexed_not_sequential() {
        let a: f64 = sample_rng(7, 3, 10).gen();
        let mut r = sample_rng(7, 3, 9);
        let _: f64 = r.gen();
        let b: f64 = sample_rng(7, 3, 10).gen();
        assert_eq!(a, b);
        assert_ne!(a, sample_rng(7, 4, 10).gen::<f64>());
    }

    #[test]
    fn young_checks_pass_for_the_sweep_powers() {
        for y in sweep_youngs() {
            for r in young_checks(&y, &SWEEP_EPSILONS, 500, 3, 0).unwrap() {
                assert!(r.pass, "{r:?}");
            }
        }
    }

    #[test]
    fn small_sweep_passes() {
        let rows = operator_sweep(&sweep_norms(), &sweep_youngs()[..2], &[0.1], 200, 1).unwrap();
        assert_eq!(rows.len(), 3 * 3 + 3 * 2 * 4);
        for r in &rows {
            assert!(r.pass, "{r:?}");
        }
    }
}
