//! Numerical core for the curvature-coupled growth of axisymmetric walled cells.
//!
//! The generatrix of the cell wall is described by the angle field `phi(x)` on the
//! rescaled abscissa `x in [0, 1]`; the state stores its derivative on a shifted
//! (cell-centred) grid. On top of that representation the crate provides the
//! quasi-stationary growth-material solver, the constitutive coupling, an
//! upwind/semi-implicit time stepper for the 2D and 3D wall-expansion equations,
//! the closed-form dispersion relations of the radially symmetric shape, Fourier
//! diagnostics and the inflating-ellipsoid toy model.
//!
//! The crate is `no_std` and only needs `alloc`.

#![cfg_attr(not(test), no_std)]
// `!(x > 0.0)` is used on purpose so NaN is rejected too; index loops mirror
// the stencils they implement.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;

mod math;

pub mod dynamics;
pub mod ellipsoid;
pub mod error;
pub mod geometry;
pub mod grid;
pub mod growth_field;
pub mod mechanics;
pub mod poly;
pub mod spectral;
pub mod stability;
pub mod tridiag;

pub use error::{Error, Result};
pub use geometry::WallProfile;
pub use grid::Grid;
pub use mechanics::{CouplingFunction, Diffusion, Dim, ModelParams};
