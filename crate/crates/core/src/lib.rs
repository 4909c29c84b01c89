//! Finite-volume laboratory for third-order WENO3/CWENO3 reconstructions on
//! non-uniform 1D meshes, with a 2D quad-tree CWENO module.
//!
//! The point of the crate is the study of the regularization parameter in
//! the nonlinear weights: choosing it as a function of the local cell size
//! (eps = h_j or eps = h_j^2) instead of a fixed constant changes the
//! convergence behaviour of the reconstructions and of the fully discrete
//! schemes built on them. The modules cover mesh generation, the
//! reconstruction kernels, conservation/balance-law systems, SSPRK3 time
//! stepping, a well-balanced shallow-water discretization, an h-adaptive
//! driver with an entropy-production indicator, spectral stability
//! diagnostics, and the 2D quad-tree reconstruction.

pub mod adaptivity;
pub mod analysis;
pub mod error;
pub mod field;
pub mod mesh1d;
pub mod problems;
pub mod quadrature;
pub mod quadtree2d;
pub mod reconstruction;
pub mod swbalance;
pub mod systems;
pub mod timeintegration;

pub use error::{Error, Result};
pub use field::Field;
pub use mesh1d::{BoundaryKind, GridSpec, Mesh1D};
pub use reconstruction::{EpsilonPolicy, ReconKind, ReconstructionConfig};
pub use systems::{NumericalFlux, System};
