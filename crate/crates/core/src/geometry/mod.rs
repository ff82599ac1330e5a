//! Planar domains with analytic boundaries and the boundary functionals built on them.

pub mod boundary;
pub mod capacity;
pub mod domain;

pub use boundary::{
    anisotropic_sff, lipschitz_characteristic, DEFAULT_BOUNDARY_SAMPLES, marcinkiewicz_norm, psi_function, psi_profile, AnisotropicSff,
    BoundaryWeightSamples, LipschitzCharacteristic, PsiValues,
};
pub use capacity::{
    cap_families, capacity, isocapacitary_k, isocapacitary_weighted, trace_inequality_check, IsocapacitaryValues,
    TraceCheck,
};
pub use domain::{Domain2D, DomainKind};
