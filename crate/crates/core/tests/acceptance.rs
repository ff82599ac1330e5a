//! End-to-end acceptance run: one PASS/FAIL line per criterion, then a single assertion.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use aniso_core::geometry::{capacity, isocapacitary_k, psi_function};
use aniso_core::solver::{generate_mesh, solve_continuation, BoundaryCondition, Source};
use aniso_core::verify::pointwise::{operator_sweep, sweep_norms, sweep_youngs, SWEEP_EPSILONS};
use aniso_core::verify::{verify_convex_estimate, verify_local_estimate, verify_reilly, verify_trace, LocalBall, ScalarField};
use aniso_core::{AnisotropicNorm, Domain2D, ProblemSpec, StressOperator, YoungFunction};

const SEED: u64 = 20240611;

struct Outcome {
    pass: bool,
    detail: String,
}

fn spec(p: f64, dom: Domain2D, source: Source) -> ProblemSpec {
    let op = StressOperator::new(AnisotropicNorm::euclidean(2).unwrap(), YoungFunction::power(p).unwrap());
    ProblemSpec::new(op, dom, source, BoundaryCondition::Dirichlet).unwrap()
}

fn disk() -> Domain2D {
    Domain2D::disk(1.0).unwrap()
}

fn within_budget(pass: bool, elapsed: Duration, budget: Option<u64>) -> bool {
    pass && budget.map_or(true, |b| elapsed <= Duration::from_secs(b))
}

fn pointwise_suite() -> Outcome {
    let rows = operator_sweep(&sweep_norms(), &sweep_youngs(), &SWEEP_EPSILONS, 100_000, SEED).unwrap();
    let failing: Vec<String> = rows.iter().filter(|r| !r.pass).map(|r| format!("{}[{} {}]", r.check, r.norm, r.young)).collect();
    let worst = rows.iter().map(|r| r.ratio / r.bound).fold(0.0, f64::max);
    Outcome { pass: failing.is_empty(), detail: format!("{} rows, worst ratio/bound {worst:.6}, failing {failing:?}", rows.len()) }
}

fn reilly_identity() -> Outcome {
    let v = ScalarField::paraboloid(1.0, 1.0);
    let one = ScalarField::constant(1.0);
    let e = verify_reilly(&AnisotropicNorm::euclidean(2).unwrap(), &disk(), &v, &one, 512).unwrap();
    let rel = |x: f64, target: f64| (x - target).abs() / target;
    let errs = [rel(e.lhs, 16.0 * PI), rel(e.interior, 8.0 * PI), rel(e.boundary, 8.0 * PI)];
    let w = verify_reilly(&AnisotropicNorm::weighted_quadratic(&[4.0, 1.0]).unwrap(), &disk(), &v, &one, 512).unwrap();
    let weighted = w.residual.abs() / w.lhs;
    Outcome {
        pass: errs.iter().all(|e| *e <= 0.005) && weighted <= 0.01,
        detail: format!("euclidean relative errors {errs:?}, weighted residual/lhs {weighted:.1e}"),
    }
}

fn convex_estimate() -> Outcome {
    let base = verify_convex_estimate(&spec(2.0, disk(), Source::Constant(4.0)), &[0.025]).unwrap();
    let target = 0.5f64.sqrt();
    let mut pass = (base.ratio2 - target).abs() <= 0.05 * target && base.ratio2 <= base.c2_bound;
    let mut detail = format!("p=2 disk ratio2 {:.4} (c2 {}); ", base.ratio2, base.c2_bound);
    let domains = [disk(), Domain2D::square(2.0).unwrap(), Domain2D::regular_polygon(6, 1.0).unwrap()];
    let mut worst: (f64, String) = (0.0, String::new());
    for p in [1.5, 3.0, 4.0] {
        for dom in &domains {
            for source in [Source::Constant(4.0), Source::gaussian_bump()] {
                let s = spec(p, dom.clone(), source);
                let r = verify_convex_estimate(&s, &[0.05, 0.025]).unwrap();
                let bound = 1.05 * r.c2_bound;
                for level in &r.levels {
                    let q = level.ratios.ratio2 / bound;
                    pass &= q <= 1.0;
                    if q > worst.0 {
                        worst = (q, format!("p={p} {} {} h={}", dom.label(), s.source.label(), level.h));
                    }
                }
            }
        }
    }
    detail += &format!("worst ratio2/(1.05 c2) {:.3} at {}", worst.0, worst.1);
    Outcome { pass, detail }
}

fn continuation_cauchy() -> Outcome {
    let s = spec(3.0, disk(), Source::Constant(4.0));
    let mesh = generate_mesh(&disk(), 0.05).unwrap();
    let r = solve_continuation(&s, &mesh).unwrap();
    let deltas: Vec<(f64, f64)> = r.rungs.iter().filter_map(|x| x.delta.map(|d| (x.epsilon, d))).collect();
    let pass = deltas.len() >= 2 && deltas.windows(2).all(|w| w[1].1 <= 1.1 * w[0].1);
    Outcome { pass, detail: format!("delta by epsilon {deltas:?}, stopped early {}", r.stopped_early) }
}

fn capacity_oracle() -> Outcome {
    let ball = generate_mesh(&disk(), 0.01).unwrap();
    let mut pass = true;
    let mut detail = Vec::new();
    for r in [0.25, 0.5] {
        let e: Vec<usize> = (0..ball.n_vertices()).filter(|&i| ball.vertices()[i][0].hypot(ball.vertices()[i][1]) <= r + 1e-9).collect();
        let cap = capacity(&ball, &e).unwrap();
        let exact = 2.0 * PI / (1.0 / r).ln();
        let err = (cap - exact).abs() / exact;
        pass &= err <= 0.02;
        detail.push(format!("r={r}: {cap:.4} vs {exact:.4} ({:.2}%)", 100.0 * err));
    }
    Outcome { pass, detail: detail.join(", ") }
}

fn trace_inequality() -> Outcome {
    let cases = verify_trace(&disk(), &[0.3, 0.5], 20, SEED, 0.025).unwrap();
    let worst = cases.iter().map(|c| c.check.lhs / c.check.rhs).fold(0.0, f64::max);
    let holds = cases.iter().filter(|c| c.check.holds).count();
    Outcome { pass: holds == cases.len() && cases.len() == 40, detail: format!("{holds}/{} hold, max lhs/rhs {worst:.3e}", cases.len()) }
}

fn local_estimate() -> Outcome {
    let s = spec(2.0, disk(), Source::Constant(4.0));
    let balls = [LocalBall { center: [0.0, 0.0], radius: 0.2 }, LocalBall { center: [0.0, 0.0], radius: 0.3 }];
    let coarse = verify_local_estimate(&s, 0.05, &balls).unwrap();
    let fine = verify_local_estimate(&s, 0.025, &balls).unwrap();
    let gaps: Vec<f64> = coarse.iter().zip(&fine).map(|(a, b)| (a.fitted_c - b.fitted_c).abs() / a.fitted_c).collect();
    let fitted: Vec<(f64, f64)> = coarse.iter().zip(&fine).map(|(a, b)| (a.fitted_c, b.fitted_c)).collect();
    Outcome {
        pass: gaps.iter().all(|g| g.is_finite() && *g <= 0.2),
        detail: format!("fitted c (h=0.05, h=0.025) {fitted:.4?}, relative change {gaps:.3?}"),
    }
}

fn smallness_functions() -> Outcome {
    let e = AnisotropicNorm::euclidean(2).unwrap();
    let radii = [0.4, 0.2, 0.1];
    let psi: Vec<f64> = radii.iter().map(|&r| psi_function(&disk(), &e, r).unwrap().plain).collect();
    let k: Vec<f64> = radii.iter().map(|&r| isocapacitary_k(&disk(), &e, r, r / 8.0).unwrap().plain).collect();
    let decreasing = |v: &[f64]| v.windows(2).all(|w| w[1] < w[0]) && v.iter().all(|x| *x > 0.0);
    Outcome { pass: decreasing(&psi) && decreasing(&k), detail: format!("psi {psi:.4?}, K {k:.4?}") }
}

#[test]
fn acceptance_criteria() {
    let criteria: [(&str, fn() -> Outcome, Option<u64>); 8] = [
        ("1 pointwise inequality suite", pointwise_suite, Some(60)),
        ("2 anisotropic Reilly identity", reilly_identity, Some(10)),
        ("3 convex-domain global estimate", convex_estimate, Some(300)),
        ("4 epsilon-continuation Cauchy behavior", continuation_cauchy, Some(60)),
        ("5 capacity oracle", capacity_oracle, Some(30)),
        ("6 trace inequality", trace_inequality, Some(60)),
        ("7 local estimate stability", local_estimate, None),
        ("8 smallness functions decrease", smallness_functions, None),
    ];
    let mut failed = Vec::new();
    for (name, run, budget) in criteria {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let pass = within_budget(outcome.pass, elapsed, budget);
        let limit = budget.map_or(String::new(), |b| format!(" of {b}s"));
        println!(
            "{} criterion {name}: {} [{:.1}s{limit}]",
            if pass { "PASS" } else { "FAIL" },
            outcome.detail,
            elapsed.as_secs_f64()
        );
        if !pass {
            failed.push(name);
        }
    }
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
