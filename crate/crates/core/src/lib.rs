//! Boundary integral solver for time-harmonic Maxwell scattering from
//! axisymmetric genus-1 bodies (tori of revolution).
//!
//! The solver represents electromagnetic fields through generalized Debye
//! sources: scalar densities `(r, q)` on the surface, augmented on a genus-1
//! surface by harmonic 1-form coefficients. Both the dielectric transmission
//! problem and the perfect-conductor problem reduce to second-kind Fredholm
//! systems along the generating curve, one azimuthal Fourier mode at a time.
//! The formulation stays well conditioned from moderate frequencies all the
//! way down to the zero-frequency limit.
//!
//! Module map:
//! - [`geometry`]: generating curve, surface grid, frames, homology cycles
//! - [`quadrature`]: hybrid Gauss-trapezoidal log rules, adaptive azimuthal
//!   modal reduction
//! - [`surface_calc`]: modal surface calculus (d, d*, Hodge star, inverse
//!   Laplace-Beltrami, harmonic 1-forms)
//! - [`kernels`]: Helmholtz kernels, low-frequency difference kernels, modal
//!   kernel tables
//! - [`boundary_ops`]: discrete boundary operators and trace formulas
//! - [`debye`]: material parameters, source-to-current maps, clutching maps
//! - [`solver`]: per-mode dense systems, solve, conditioning
//! - [`fields`]: off-surface field evaluation and Maxwell residuals
//! - [`harness`]: experiment drivers (manufactured solutions, sweeps, selftest)

pub mod boundary_ops;
pub mod config;
pub mod debye;
pub mod error;
pub mod fields;
pub mod geometry;
pub mod harness;
pub mod kernels;
pub mod quadrature;
pub mod solver;
pub mod surface_calc;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
