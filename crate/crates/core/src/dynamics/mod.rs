//! Integration of vector fields, periodic-orbit detection and period
//! integrals over trivialized fibers.

pub mod ode;
pub mod period;
pub mod quadrature;

pub use ode::{flow, flow_linearization, form_drift, Field, FlowOptions, FnField, IntegratorStats, Trajectory};
pub use period::{detect_period, period_constancy, Classification, ConstancyReport, PeriodEstimate, PeriodOptions};
pub use quadrature::{integrate_adaptive, period_via_integral};
