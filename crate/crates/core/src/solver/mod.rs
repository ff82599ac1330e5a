//! P1 finite elements for the regularized energy, Newton iteration and epsilon-continuation.

pub mod fem;
pub mod fields;
pub mod linalg;
pub mod mesh;
pub mod meshgen;

pub use fem::{
    energy_eval, load_vector, mean_value, solve_continuation, solve_regularized, BoundaryCondition, ContinuationReport,
    EnergyEval, NewtonReport, ProblemSpec, RungReport, Source,
};
pub use fields::{gradient_field, recover_nodal, sobolev_norms, sobolev_norms_on, stress_field, write_solution_csv, SobolevNorms};
pub use mesh::Mesh;
pub use meshgen::generate_mesh;
