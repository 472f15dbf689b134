//! Executable contact geometry: contact forms and their Reeb fields, contact
//! Hamiltonian dynamics, symplectization, periodic-orbit detection, and the
//! contact-to-symplectic reduction with its integrality check.

pub mod catalog;
pub mod contact;
pub mod dynamics;
pub mod error;
pub mod expr;
pub mod forms;
pub mod linalg;
pub mod reduction;
pub mod sampling;
pub mod symplectization;

pub use error::{Error, Result};
pub use expr::{parse_expr, Chart, ScalarField};
pub use forms::{parse_form, KForm, SmoothMap, VectorField};
pub use sampling::SampleSet;
