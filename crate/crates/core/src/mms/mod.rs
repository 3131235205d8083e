//! Manufactured-solution verification.
//!
//! ```
//! use porostokes::mms::ManufacturedCase;
//! let case = ManufacturedCase::default();
//! let m = case.interface_corrections([0.3, 1.0], 0.0).unwrap();
//! assert_eq!(m.m1, 0.0);
//! ```

mod exact;
mod norms;
mod study;

pub use exact::{ManufacturedCase, ManufacturedSources, MmsParameters, ScalarJet, VectorJet};
pub use norms::{error_norms, squared_errors, uses_h1, MultiplierNorm, ERROR_ORDER, REPORT_ORDER};
pub use study::{
    boundary_data, exact_state, manufactured_load, mms_mesh, observed_rate, run_manufactured,
    spatial_convergence_study, steps_for, temporal_convergence_study, ErrorReport, ErrorRow, ManufacturedRun,
    StudyKind,
};
