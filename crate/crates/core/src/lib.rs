//! Finite elements for Stokes flow coupled across an interface to a linearized
//! poro-hyperelastic medium.
//!
//! The coupled unknowns are, in this order, the Stokes velocity `u_f`, the
//! relative fluid velocity `u_r`, the solid displacement `y_s`, the solid
//! velocity `u_s`, the Stokes pressure `p_S`, the pore pressure `p_P` and the
//! interface multiplier `λ`. The semi-discrete system `E ∂ₜX + H X = L` is
//! advanced with backward Euler.
//!
//! ```
//! use porostokes::mesh::{build_two_block_mesh, Rect};
//!
//! let mesh = build_two_block_mesh(Rect::new(0., 0., 1., 1.), Rect::new(0., 1., 1., 2.), 8, 4)?;
//! assert!((mesh.h() - 0.2795).abs() < 1e-4);
//! # Ok::<(), porostokes::Error>(())
//! ```

pub mod assembly;
pub mod error;
pub mod fespace;
pub mod field;
pub mod io;
pub mod mesh;
pub mod mms;
pub mod parallel;
pub mod quadrature;
pub mod scenarios;
pub mod sparse;
pub mod system;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/overview.md")]
    mod overview {}
    #[doc = include_str!("../../../book/src/meshes.md")]
    mod meshes {}
    #[doc = include_str!("../../../book/src/assembly.md")]
    mod assembly {}
    #[doc = include_str!("../../../book/src/stepping.md")]
    mod stepping {}
    #[doc = include_str!("../../../book/src/mms.md")]
    mod mms {}
    #[doc = include_str!("../../../book/src/scenarios.md")]
    mod scenarios {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
