//! Finite elasticity written as a system of conservation laws in the state
//! variables deformation gradient `F` and momentum `p`.
//!
//! The crate provides small-tensor algebra, constitutive models, numerical
//! admissibility and hyperbolicity checks, and a periodic finite-volume solver
//! with involution and energy monitors.

pub mod admissibility;
pub mod constitutive;
pub mod diff;
pub mod error;
pub mod hyperbolicity;
pub mod linalg;
pub mod solver;
pub mod tensor;
pub mod tolerances;

pub use admissibility::{assess, extract_representation, AdmissibilityReport, CheckKind, ProbeSet};
pub use constitutive::{ConstitutiveModel, State, StoredEnergy};
pub use error::{Error, Result};
pub use hyperbolicity::{acoustic_tensor, assemble_m, eigenstructure, scan_acoustic, scan_directions, HyperbolicityReport};
pub use solver::{Field, Grid, MonitorTrace};
pub use tensor::{apply4, outer, Ten2, Ten4, Vec3};
pub use tolerances::Tolerances;
