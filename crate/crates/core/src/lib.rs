//! Polystar bodies: polynomial approximations of star bodies on the sphere.
//!
//! A star body is described by its radial (or gauge) function on the unit
//! sphere. This crate samples such a function on an exact quadrature rule,
//! extracts its spherical harmonic components with zonal kernels, damps them
//! with a Newman–Shapiro filter and returns a polynomial on the sphere. The
//! same machinery yields polynomial approximations of intersection bodies
//! (through the Funk–Hecke multipliers of the spherical Radon transform),
//! which are then maximized to estimate largest central slices and widths.
//!
//! Module map:
//!
//! * [`gegenbauer`]: Gegenbauer polynomials, norms, roots and zonal kernels.
//! * [`quadrature`]: Gauss–Gegenbauer rules and product rules on spheres.
//! * [`harmonics`]: harmonic components, the filter and mollified expansions.
//! * [`bodies`]: radial/gauge evaluators for polytopes and closed-form bodies.
//! * [`intersect`]: intersection-body approximation in dimension three.
//! * [`optimize`]: multistart maximization on the sphere, slices and widths.
//! * [`cli`]: the `polystar` command-line front end.

pub mod bodies;
pub mod cli;
pub mod eigen;
pub mod error;
pub mod gegenbauer;
pub mod harmonics;
pub mod intersect;
pub mod optimize;
pub mod quadrature;
pub mod sphere;

pub use error::{Error, Result};
