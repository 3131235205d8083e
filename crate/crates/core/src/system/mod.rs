//! Sparse direct solves, backward Euler stepping and the discrete energy.

mod energy;
mod linsolve;
mod stepping;

pub use energy::discrete_energy;
pub use linsolve::Factorization;
pub use stepping::{backward_euler_step, run_transient, StepDiagnostics, Stepper, TransientState};
