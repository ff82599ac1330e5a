use std::ffi::CStr;
use std::ptr;

use aniso_ffi::*;

fn last_error() -> String {
    let p = aniso_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

struct Handles {
    norm: *mut AnisoNorm,
    young: *mut AnisoYoung,
    op: *mut AnisoOperator,
}

impl Handles {
    fn new(p: f64, eps: f64) -> Self {
        let mut norm = ptr::null_mut();
        let mut young = ptr::null_mut();
        let mut op = ptr::null_mut();
        unsafe {
            assert_eq!(aniso_norm_new_euclidean(&mut norm), AnisoStatus::Ok);
            assert_eq!(aniso_young_new_power(p, &mut young), AnisoStatus::Ok);
            assert_eq!(aniso_operator_new(norm, young, eps, &mut op), AnisoStatus::Ok);
        }
        Self { norm, young, op }
    }
}

impl Drop for Handles {
    fn drop(&mut self) {
        unsafe {
            aniso_operator_free(self.op);
            aniso_young_free(self.young);
            aniso_norm_free(self.norm);
        }
    }
}

#[test]
fn stress_of_the_three_power_matches_closed_form() {
    let h = Handles::new(3.0, 0.0);
    let mut out = [0.0; 2];
    let status = unsafe { aniso_operator_stress(h.op, [2.0, 0.0].as_ptr(), out.as_mut_ptr()) };
    assert_eq!(status, AnisoStatus::Ok);
    assert!((out[0] - 12.0).abs() < 1e-12 && out[1] == 0.0);
}

#[test]
fn regularized_jacobian_is_written_row_major() {
    let h = Handles::new(2.0, 0.1);
    let mut j = [0.0; 4];
    assert_eq!(unsafe { aniso_operator_jacobian(h.op, [1.0, 0.0].as_ptr(), j.as_mut_ptr()) }, AnisoStatus::Ok);
    assert!((j[0] - 1.75).abs() < 1e-12 && (j[3] - 1.75).abs() < 1e-12);
    assert!(j[1].abs() < 1e-12 && j[2].abs() < 1e-12);
}

#[test]
fn errors_map_to_status_codes_and_messages() {
    let h = Handles::new(2.0, 0.0);
    let mut j = [0.0; 4];
    assert_eq!(unsafe { aniso_operator_jacobian(h.op, [1.0, 0.0].as_ptr(), j.as_mut_ptr()) }, AnisoStatus::Configuration);
    assert!(last_error().contains("regularized"));

    let mut young = ptr::null_mut();
    assert_eq!(unsafe { aniso_young_new_power(0.5, &mut young) }, AnisoStatus::InvalidInput);
    assert!(young.is_null());

    let reg = Handles::new(2.0, 0.1);
    assert_eq!(unsafe { aniso_operator_jacobian(reg.op, [0.0, 0.0].as_ptr(), j.as_mut_ptr()) }, AnisoStatus::SingularPoint);

    aniso_clear_last_error();
    assert!(aniso_last_error_message().is_null());
}

#[test]
fn null_pointers_are_rejected() {
    let mut out = 0.0;
    assert_eq!(unsafe { aniso_norm_value(ptr::null(), [1.0, 0.0].as_ptr(), &mut out) }, AnisoStatus::NullPointer);
    assert!(last_error().contains("norm"));
    assert_eq!(unsafe { aniso_norm_new_euclidean(ptr::null_mut()) }, AnisoStatus::NullPointer);
    unsafe {
        aniso_norm_free(ptr::null_mut());
        aniso_solution_free(ptr::null_mut());
    }
    assert_eq!(unsafe { aniso_solution_len(ptr::null()) }, 0);
}

#[test]
fn last_error_is_thread_local() {
    let mut young = ptr::null_mut();
    assert_eq!(unsafe { aniso_young_new_power(0.5, &mut young) }, AnisoStatus::InvalidInput);
    let other = std::thread::spawn(|| aniso_last_error_message().is_null()).join().unwrap();
    assert!(other);
    assert!(!aniso_last_error_message().is_null());
}

#[test]
fn weighted_norm_and_its_dual() {
    let mut n = ptr::null_mut();
    let (mut v, mut d) = (0.0, 0.0);
    unsafe {
        assert_eq!(aniso_norm_new_weighted(4.0, 1.0, &mut n), AnisoStatus::Ok);
        assert_eq!(aniso_norm_value(n, [1.0, 0.0].as_ptr(), &mut v), AnisoStatus::Ok);
        assert_eq!(aniso_norm_dual_value(n, [2.0, 0.0].as_ptr(), &mut d), AnisoStatus::Ok);
        aniso_norm_free(n);
    }
    assert!((v - 2.0).abs() < 1e-14);
    assert!((d - 1.0).abs() < 1e-12);
}

#[test]
fn disk_solve_reproduces_the_paraboloid() {
    let h = Handles::new(2.0, 0.0);
    let mut dom = ptr::null_mut();
    let mut sol = ptr::null_mut();
    unsafe {
        assert_eq!(aniso_domain_new_disk(1.0, &mut dom), AnisoStatus::Ok);
        assert_eq!(aniso_solve(h.op, dom, 4.0, 0.1, &mut sol), AnisoStatus::Ok);
        let n = aniso_solution_len(sol);
        let mut xy = vec![0.0; 2 * n];
        let mut u = vec![0.0; n];
        assert_eq!(aniso_solution_copy(sol, xy.as_mut_ptr(), u.as_mut_ptr()), AnisoStatus::Ok);
        for k in 0..n {
            let exact = 0.5 * (1.0 - xy[2 * k].powi(2) - xy[2 * k + 1].powi(2));
            assert!((u[k] - exact).abs() < 0.02, "{k}: {} vs {exact}", u[k]);
        }
        let mut eps = 0.0;
        assert_eq!(aniso_solution_final_epsilon(sol, &mut eps), AnisoStatus::Ok);
        assert!(eps > 0.0 && eps <= 0.1);
        aniso_solution_free(sol);
        aniso_domain_free(dom);
    }
}

#[test]
fn convex_check_through_the_c_interface() {
    let h = Handles::new(2.0, 0.0);
    let mut dom = ptr::null_mut();
    let (mut ratio, mut bound) = (0.0, 0.0);
    unsafe {
        assert_eq!(aniso_domain_new_polygon([-1.0, -1.0, 1.0, -1.0, 1.0, 1.0, -1.0, 1.0].as_ptr(), 4, &mut dom), AnisoStatus::Ok);
        let mut area = 0.0;
        assert_eq!(aniso_domain_area(dom, &mut area), AnisoStatus::Ok);
        assert_eq!(area, 4.0);
        assert_eq!(aniso_verify_convex(h.op, dom, 4.0, 0.1, &mut ratio, &mut bound), AnisoStatus::Ok);
        aniso_domain_free(dom);
    }
    assert_eq!(bound, 1.0);
    assert!(ratio > 0.5 && ratio <= 1.05, "{ratio}");
}

#[test]
fn header_declares_the_interface() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/aniso.h")).unwrap();
    for name in ["aniso_solve", "aniso_last_error_message", "typedef struct AnisoOperator AnisoOperator", "ANISO_STATUS_PANIC = 14"] {
        assert!(header.contains(name), "{name}");
    }
}

#[test]
fn version_is_a_c_string() {
    let v = unsafe { CStr::from_ptr(aniso_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}
