use std::f64::consts::PI;

use aniso_core::solver::{BoundaryCondition, Source};
use aniso_core::verify::{
    curvature_domain_constants, local_estimate_from_solution, stress_ratios, verify_c11_constants, verify_convex_estimate,
    verify_divergence_identity, verify_local_estimate, verify_reilly, verify_trace, LocalBall, ScalarField,
};
use aniso_core::{AnisotropicNorm, Domain2D, Error, ProblemSpec, StressOperator, YoungFunction};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn spec(p: f64, dom: Domain2D, source: Source) -> ProblemSpec {
    let op = StressOperator::new(AnisotropicNorm::euclidean(2).unwrap(), YoungFunction::power(p).unwrap());
    ProblemSpec::new(op, dom, source, BoundaryCondition::Dirichlet).unwrap()
}

fn ellipse_field(a: f64, b: f64) -> ScalarField {
    let (ia, ib) = (1.0 / (a * a), 1.0 / (b * b));
    ScalarField::new(move |x| 1.0 - ia * x[0] * x[0] - ib * x[1] * x[1])
        .with_gradient(move |x| [-2.0 * ia * x[0], -2.0 * ib * x[1]])
        .with_hessian(move |_| [[-2.0 * ia, 0.0], [0.0, -2.0 * ib]])
}

#[test]
fn divergence_identity_on_polynomial_fields() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let pts: Vec<[f64; 2]> = (0..1000).map(|_| [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]).collect();
    assert!(verify_divergence_identity(|x| x, &pts, 1e-4).unwrap() <= 1e-6);
    assert!(verify_divergence_identity(|_| [2.0, -1.0], &pts, 1e-4).unwrap() <= 1e-12);
    assert!(verify_divergence_identity(|x| [x[1] * x[1], x[0] * x[0]], &pts, 1e-4).unwrap() <= 1e-5);
}

#[test]
fn reilly_terms_on_the_unit_disk() {
    let e = AnisotropicNorm::euclidean(2).unwrap();
    let disk = Domain2D::disk(1.0).unwrap();
    let t = verify_reilly(&e, &disk, &ScalarField::paraboloid(1.0, 1.0), &ScalarField::constant(1.0), 64).unwrap();
    assert!((t.lhs - 16.0 * PI).abs() < 1e-9);
    assert!((t.interior - 8.0 * PI).abs() < 1e-9);
    assert!((t.boundary - 8.0 * PI).abs() < 1e-9);
    let z = verify_reilly(&e, &disk, &ScalarField::constant(0.0), &ScalarField::constant(1.0), 32).unwrap();
    assert_eq!((z.lhs, z.interior, z.boundary), (0.0, 0.0, 0.0));
    let bad = verify_reilly(&e, &disk, &ScalarField::constant(1.0), &ScalarField::constant(1.0), 32);
    assert!(matches!(bad, Err(Error::InvalidInput(_))));
    let sq = Domain2D::square(2.0).unwrap();
    assert!(matches!(
        verify_reilly(&e, &sq, &ScalarField::constant(0.0), &ScalarField::constant(1.0), 32),
        Err(Error::UnsupportedKind(_))
    ));
}

#[test]
fn reilly_residual_converges_at_least_at_second_order() {
    let blend = AnisotropicNorm::blend(2, 4.0, 4.0, 1.0, 1.0).unwrap();
    let cases = [
        (Domain2D::disk(1.0).unwrap(), ScalarField::paraboloid(1.0, 1.0)),
        (Domain2D::ellipse(2.0, 1.0).unwrap(), ellipse_field(2.0, 1.0)),
    ];
    for (dom, v) in &cases {
        let residuals: Vec<f64> = [8, 16, 32, 64]
            .iter()
            .map(|&n| verify_reilly(&blend, dom, v, &ScalarField::constant(1.0), n).unwrap().residual.abs())
            .collect();
        for w in residuals.windows(2) {
            assert!(w[1] <= w[0] / 4.0 + 1e-9, "{}: {residuals:?}", dom.label());
        }
        assert!(residuals[3] < 1e-8);
    }
}

#[test]
fn convex_ratios_are_invariant_under_source_scaling_for_the_quadratic_case() {
    let disk = Domain2D::disk(1.0).unwrap();
    let a = verify_convex_estimate(&spec(2.0, disk.clone(), Source::Constant(4.0)), &[0.1]).unwrap();
    let b = verify_convex_estimate(&spec(2.0, disk, Source::Constant(12.0)), &[0.1]).unwrap();
    assert!((a.ratio1 - b.ratio1).abs() < 1e-6 * a.ratio1);
    assert!((a.ratio2 - b.ratio2).abs() < 1e-6 * a.ratio2);
    assert!((a.ratio1 - 2f64.sqrt() / 4.0).abs() < 0.05 * a.ratio1, "{}", a.ratio1);
    assert!(a.pass && a.c2_bound == 1.0);
}

#[test]
fn convex_estimate_rejects_nonconvex_domains() {
    let arrow = Domain2D::polygon(vec![[-1.0, -1.0], [0.0, -0.3], [1.0, -1.0], [0.0, 1.0]]).unwrap();
    assert!(matches!(verify_convex_estimate(&spec(2.0, arrow, Source::Constant(4.0)), &[0.1]), Err(Error::Precondition(_))));
}

#[test]
fn local_radius_term_scales_with_the_inverse_square_radius() {
    let s = spec(2.0, Domain2D::disk(1.0).unwrap(), Source::Constant(4.0));
    let balls = [LocalBall { center: [0.0, 0.0], radius: 0.2 }, LocalBall { center: [0.0, 0.0], radius: 0.1 }];
    let r = verify_local_estimate(&s, 0.05, &balls).unwrap();
    assert!((r[1].radius_factor / r[0].radius_factor - 4.0).abs() < 0.05 * 4.0);
    assert!(r.iter().all(|x| x.fitted_c.is_finite() && x.fitted_c > 0.0));
    let mesh = aniso_core::solver::generate_mesh(&Domain2D::disk(1.0).unwrap(), 0.05).unwrap();
    let zero = local_estimate_from_solution(&s, &mesh, &vec![0.0; mesh.n_vertices()], &balls[..1]).unwrap();
    assert_eq!((zero[0].lhs, zero[0].stress_l2), (0.0, 0.0));
    let outside = [LocalBall { center: [0.5, 0.0], radius: 0.3 }];
    assert!(matches!(verify_local_estimate(&s, 0.05, &outside), Err(Error::InvalidInput(_))));
}

#[test]
fn curvature_constants_dominate_measured_ratios() {
    let c = verify_c11_constants(&spec(3.0, Domain2D::ellipse(2.0, 1.0).unwrap(), Source::gaussian_bump()), 0.05).unwrap();
    assert!(c.pass && c.ratios.ratio1.is_finite() && c.ratios.ratio2.is_finite());
    let disk = curvature_domain_constants(&Domain2D::disk(1.0).unwrap(), None).unwrap();
    assert!(disk.log10_c2 >= (2f64.powi(22) * 16.0).log10());
    assert!(matches!(curvature_domain_constants(&Domain2D::square(2.0).unwrap(), None), Err(Error::Precondition(_))));
}

#[test]
fn doubling_the_disk_doubles_ratio1_and_keeps_ratio2() {
    let ratios = |r: f64| {
        let s = spec(2.0, Domain2D::disk(r).unwrap(), Source::Constant(4.0));
        let mesh = aniso_core::solver::generate_mesh(&s.domain, 0.05 * r).unwrap();
        let u = aniso_core::solver::solve_continuation(&s, &mesh).unwrap().u;
        stress_ratios(&s, &mesh, &u).unwrap()
    };
    let (a, b) = (ratios(1.0), ratios(2.0));
    assert!((b.ratio1 / a.ratio1 - 2.0).abs() < 0.02, "{} {}", a.ratio1, b.ratio1);
    assert!((b.ratio2 / a.ratio2 - 1.0).abs() < 0.01, "{} {}", a.ratio2, b.ratio2);
}

#[test]
fn trace_inequality_holds_for_seeded_fields() {
    let cases = verify_trace(&Domain2D::disk(1.0).unwrap(), &[0.3], 6, 9, 0.05).unwrap();
    assert_eq!(cases.len(), 6);
    assert!(cases.iter().all(|c| c.check.holds && c.check.lhs > 0.0));
}
