//! Numerical checks of the integral identities, the pointwise operator inequalities and
//! the global and local stress estimates.

pub mod estimates;
pub mod identities;
pub mod pointwise;
pub mod trace;

use std::path::Path;

use serde::Serialize;

use crate::error::Result;
use crate::solver::ProblemSpec;

pub use estimates::{
    curvature_domain_constants, default_chart_radius, local_estimate_from_solution, stress_ratios, verify_c11_constants,
    verify_convex_estimate, verify_local_estimate, C11Check, ConvexEstimate, ConvexLevel, CurvatureConstants, LocalBall,
    LocalEstimate, StressRatios,
};
pub use identities::{verify_divergence_identity, verify_reilly, ReillyTerms, ScalarField};
pub use pointwise::{norm_checks, operator_sweep, young_checks, sweep_norms, sweep_youngs, SWEEP_EPSILONS, SWEEP_POWERS};
pub use trace::{test_field, trace_rows, verify_trace, TestFieldKind, TraceCase};

/// One line of every verification CSV.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckRow {
    pub check: String,
    pub domain: String,
    pub norm: String,
    pub young: String,
    pub h: Option<f64>,
    pub eps_final: Option<f64>,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub bound: f64,
    pub pass: bool,
}

impl CheckRow {
    /// Row labelled with the domain and operator of `spec`; numbers left at zero.
    pub fn for_spec(check: &str, spec: &ProblemSpec, h: Option<f64>, eps_final: Option<f64>) -> Self {
        Self {
            check: check.into(),
            domain: spec.domain.label(),
            norm: spec.op.norm().label(),
            young: spec.op.young().label(),
            h,
            eps_final,
            lhs: 0.0,
            rhs: 0.0,
            ratio: 0.0,
            bound: 0.0,
            pass: true,
        }
    }
}

pub fn write_rows_csv(path: &Path, rows: &[CheckRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_error)?;
    for r in rows {
        w.serialize(r).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_error(e: csv::Error) -> crate::error::Error {
    crate::error::Error::Io(e.to_string())
}
