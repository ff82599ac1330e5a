use aniso_core::operator::algebraic_trace_check;
use aniso_core::{AnisotropicNorm, Error, StressOperator, YoungFunction};
use approx::assert_relative_eq;
use nalgebra::DMatrix;
use proptest::prelude::*;

fn op(norm: AnisotropicNorm, p: f64) -> StressOperator {
    StressOperator::new(norm, YoungFunction::power(p).unwrap())
}

fn library() -> Vec<StressOperator> {
    let norms = [
        AnisotropicNorm::euclidean(2).unwrap(),
        AnisotropicNorm::weighted_quadratic(&[4.0, 1.0]).unwrap(),
        AnisotropicNorm::blend(2, 4.0, 4.0, 1.0, 1.0).unwrap(),
    ];
    let youngs = [
        YoungFunction::power(1.5).unwrap(),
        YoungFunction::power(2.0).unwrap(),
        YoungFunction::power(4.0).unwrap(),
        YoungFunction::power_log(2.0, 1.0, std::f64::consts::E).unwrap(),
    ];
    norms.iter().flat_map(|n| youngs.iter().map(move |y| StressOperator::new(n.clone(), y.clone()))).collect()
}

fn vec2(r: f64, t: f64) -> [f64; 2] {
    [r * t.cos(), r * t.sin()]
}

#[test]
fn stress_values() {
    let e = AnisotropicNorm::euclidean(2).unwrap();
    let s = op(e.clone(), 3.0).stress(&[2.0, 0.0]);
    assert_relative_eq!(s[0], 12.0, epsilon = 1e-12);
    assert_eq!(s[1], 0.0);
    let s = op(e.clone(), 2.0).stress2([3.0, 4.0]);
    assert_relative_eq!(s[0], 6.0, epsilon = 1e-12);
    assert_relative_eq!(s[1], 8.0, epsilon = 1e-12);
    assert_eq!(op(e, 1.5).stress2([0.0, 0.0]), [0.0, 0.0]);
}

#[test]
fn jacobian_of_the_quadratic_case_is_a_multiple_of_identity() {
    let o = op(AnisotropicNorm::euclidean(2).unwrap(), 2.0).with_epsilon(0.1).unwrap();
    let j = o.stress_jacobian(&[1.0, 0.0]).unwrap();
    assert!((j - DMatrix::identity(2, 2) * 1.75).norm() < 1e-12);
    assert!(matches!(o.stress_jacobian(&[0.0, 0.0]), Err(Error::SingularPoint(_))));
    let plain = op(AnisotropicNorm::euclidean(2).unwrap(), 2.0);
    assert!(matches!(plain.stress_jacobian(&[1.0, 0.0]), Err(Error::Configuration(_))));
}

#[test]
fn jacobian_matches_finite_differences() {
    for base in library() {
        let o = base.with_epsilon(0.1).unwrap();
        for xi in [vec2(0.7, 0.3), vec2(2.5, 2.0), vec2(0.05, -1.0)] {
            let j = o.stress_jacobian(&xi).unwrap();
            let s = 1e-6 * (xi[0].hypot(xi[1]));
            for c in 0..2 {
                let (mut p, mut m) = (xi, xi);
                p[c] += s;
                m[c] -= s;
                let col = (o.stress(&p) - o.stress(&m)) / (2.0 * s);
                for r in 0..2 {
                    assert!((col[r] - j[(r, c)]).abs() <= 1e-6 * j.norm(), "{:?} {:?}", o.young(), xi);
                }
            }
        }
    }
}

#[test]
fn trace_inequality_with_identity() {
    let o = op(AnisotropicNorm::euclidean(2).unwrap(), 2.0).with_epsilon(0.1).unwrap();
    let t = o.matrix_trace_inequality_check(&[1.0, 0.0], &DMatrix::identity(2, 2)).unwrap();
    assert!(t.holds);
    let j = o.stress_jacobian(&[1.0, 0.0]).unwrap();
    assert_relative_eq!(t.lhs, j.norm_squared(), max_relative = 1e-12);
    assert!(t.rhs <= t.lhs);
    let asym = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
    assert!(matches!(o.matrix_trace_inequality_check(&[1.0, 0.0], &asym), Err(Error::InvalidInput(_))));
}

#[test]
fn monotonicity_gap_of_the_quadratic_case() {
    let o = op(AnisotropicNorm::euclidean(2).unwrap(), 2.0);
    assert_relative_eq!(o.monotonicity_gap(&[1.0, 0.0], &[0.0, 0.0]), 2.0, epsilon = 1e-14);
    assert_eq!(o.monotonicity_gap(&[0.3, 0.4], &[0.3, 0.4]), 0.0);
}

#[test]
fn regularized_stress_converges_on_a_ball() {
    let grid: Vec<[f64; 2]> = (1..=40).flat_map(|i| (0..16).map(move |k| vec2(0.25 * i as f64, 0.4 * k as f64))).collect();
    for base in library() {
        let mut last = f64::INFINITY;
        for k in 2..16 {
            let o = base.with_epsilon(2f64.powi(-k)).unwrap();
            let err = grid.iter().map(|xi| (o.stress(xi) - base.stress(xi)).norm()).fold(0.0, f64::max);
            assert!(err < last, "{:?} {:?} k {k}", base.norm().kind(), base.young());
            last = err;
        }
    }
}

fn nonzero() -> impl Strategy<Value = [f64; 2]> {
    (-2.0f64..2.0, 0.0f64..std::f64::consts::TAU).prop_map(|(l, t)| vec2(10f64.powf(l), t))
}

fn symmetric() -> impl Strategy<Value = DMatrix<f64>> {
    (-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0).prop_map(|(a, b, c)| DMatrix::from_row_slice(2, 2, &[a, b, b, c]))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn coercivity_and_modulus_sandwich(xi in nonzero()) {
        for o in library() {
            let h = o.norm().eval(&xi);
            let a = o.stress(&xi);
            let b = o.young().b(h);
            prop_assert!(a[0] * xi[0] + a[1] * xi[1] >= o.young().big_b(h) * (1.0 - 1e-10));
            prop_assert!(o.norm().lambda().sqrt() * b <= a.norm() * (1.0 + 1e-10));
            prop_assert!(a.norm() <= o.norm().big_lambda().sqrt() * b * (1.0 + 1e-10));
        }
    }

    #[test]
    fn monotone_and_lipschitz(xi in nonzero(), eta in nonzero(), eps in 0.01f64..0.5) {
        prop_assume!((xi[0] - eta[0]).hypot(xi[1] - eta[1]) > 1e-8);
        for base in library() {
            prop_assert!(base.monotonicity_gap(&xi, &eta) > 0.0);
            let o = base.with_epsilon(eps).unwrap();
            prop_assert!(o.monotonicity_gap(&xi, &eta) > 0.0);
            let lhs = (o.stress(&xi) - o.stress(&eta)).norm();
            let rhs = o.upper_constant() / eps * (xi[0] - eta[0]).hypot(xi[1] - eta[1]);
            prop_assert!(lhs <= rhs * (1.0 + 1e-9));
        }
    }

    #[test]
    fn jacobian_eigenvalue_ratio_and_trace_inequality(xi in nonzero(), m in symmetric(), eps in 0.01f64..0.5) {
        for base in library() {
            let o = base.with_epsilon(eps).unwrap();
            let j = o.stress_jacobian(&xi).unwrap();
            let e = j.symmetric_eigenvalues();
            let (lo, hi) = (e.min(), e.max());
            prop_assert!(lo > 0.0);
            prop_assert!(hi / lo <= o.ellipticity_ratio() * (1.0 + 1e-9));
            prop_assert!(lo >= eps * o.lower_constant() * (1.0 - 1e-9));
            prop_assert!(hi <= o.upper_constant() / eps * (1.0 + 1e-9));
            prop_assert!(o.matrix_trace_inequality_check(&xi, &m).unwrap().holds);
        }
    }

    #[test]
    fn algebraic_trace_bound(a in 0.1f64..10.0, b in 0.1f64..10.0, t in 0.0f64..3.2, m in symmetric()) {
        let (c, s) = (t.cos(), t.sin());
        let q = DMatrix::from_row_slice(2, 2, &[c, -s, s, c]);
        let x = &q * DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![a, b])) * q.transpose();
        let x = 0.5 * (&x + x.transpose());
        prop_assert!(algebraic_trace_check(&x, &m).unwrap().holds);
    }
}
