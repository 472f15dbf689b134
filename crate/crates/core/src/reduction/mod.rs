//! Reduction of a contact manifold along its Reeb orbits and the integrality
//! of the reduced symplectic form.

pub mod fibration;
pub mod integrality;
pub mod mesh;

pub use fibration::{ExactnessWitness, Fibration, FibrationCheck, ReducedForm, Section};
pub use integrality::{integrality_report, integrate_refined, integrate_surface, IntegralityReport, RefinedIntegral};
pub use mesh::{Surface, SurfaceMesh};
