//! Variable-exponent subdiffusion solver.
//!
//! The crate discretizes
//!
//! ```text
//! D_t^{α(t)} u + L u = f,   L = -∇·(K ∇)
//! ```
//!
//! on the unit square with the L2-1σ formula in time (graded meshes, relaxed
//! superconvergence-point selection) and continuous P1/P2 Lagrange elements in
//! space. A mobile–immobile variant `u_t + k(t) D_t^{α(t)} u + L u = f` is also
//! supported on uniform temporal meshes.
//!
//! Module map:
//!
//! * [`temporal`]: graded meshes, step parameter policies, L2-1σ coefficients,
//!   complementary discrete kernels.
//! * [`sparse`]: CSR matrices and Jacobi-preconditioned conjugate gradients.
//! * [`fem2d`]: triangulations, Lagrange spaces, assembly, elliptic projection.
//! * [`solver`]: fully discrete time stepping and the stability certificate.
//! * [`harness`]: manufactured cases, convergence studies, config/CSV I/O and
//!   the coefficient property audit.

pub mod error;
pub mod fem2d;
pub mod harness;
pub mod solver;
pub mod sparse;
pub mod special;
pub mod temporal;

pub use error::{Error, Result};
