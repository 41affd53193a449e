//! Meshfree point collocation for steady incompressible flow.
//!
//! Velocity and pressure are carried as coefficients on a scattered node set.
//! Shape functions are moving least squares reproducing kernels built from a
//! compactly supported spline window, so every polynomial up to the basis
//! degree is reproduced exactly. First-order operators (pressure gradient,
//! velocity divergence) are half-spacing differences of the kernel
//! interpolant taken at staggered points around each collocation site; the
//! staggering keeps the discrete divergence/gradient pair dual and the saddle
//! system inf-sup stable on a single node set, without a second pressure
//! cloud. The block system is solved in the least-squares sense by a sparse
//! direct factorization, and a Picard loop adds the convective term for
//! steady Navier-Stokes.
//!
//! Module map:
//! - [`domain`], [`spatial`], [`nodes`], [`grid`]: geometry, node sets, and
//!   staggered collocation sites
//! - [`basis`], [`window`], [`shape`]: reproducing-kernel shape functions
//!   with analytic derivatives through second order
//! - [`sparse`], [`assembly`], [`system`]: discrete operators and the
//!   velocity-pressure saddle system
//! - [`solve`], [`infsup`]: least-squares solves, gauge handling, and the
//!   numerical inf-sup certificate
//! - [`kovasznay`], [`picard`], [`ghia`]: steady Navier-Stokes extension and
//!   reference solutions
//! - [`manufactured`], [`convergence`], [`fields`], [`config`], [`report`]:
//!   benchmark problems, error norms, and file emission

pub mod assembly;
pub mod basis;
pub mod cavity;
pub mod config;
pub mod convergence;
pub mod derived;
pub mod domain;
pub mod error;
pub mod fields;
pub mod ghia;
pub mod grid;
pub mod infsup;
pub mod kovasznay;
pub mod manufactured;
pub mod nodes;
pub mod picard;
pub mod shape;
pub mod solve;
pub mod sparse;
pub mod spatial;
pub mod system;
pub mod window;

pub use domain::Domain;
pub use error::{Error, Result};
pub use fields::FlowField;
pub use grid::{StaggeredStencil, VirtualGrid};
pub use nodes::NodeSet;
pub use shape::{DerivMask, DilationParameter, KernelConfig, ShapeRow, ShapeTable};
pub use sparse::SparseOperator;
pub use system::{BoundaryCondition, SaddleSystem, SystemConfig};
