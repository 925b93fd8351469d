//! Arithmetic volumes of torus-invariant metrized line bundles on smooth
//! projective toric varieties.
//!
//! A metric is handled through its concave function `g` on `R^d`
//! (the logarithm of the norm of the canonical rational section in
//! logarithmic torus coordinates). Everything downstream consumes `g` and
//! its Legendre–Fenchel conjugate:
//!
//! * [`lattice`]: exact polytopes, fans, divisors and support functions.
//! * [`metric`]: concrete metric models (log-sum-exp, canonical) and metric algebra.
//! * [`conjugate`]: numerical conjugate, the region where it is nonnegative, sup norms.
//! * [`quadrature`]: Monge–Ampère integrals, L² norms of monomials, the volume integral.
//! * [`sections`]: section spaces, small sections and lattice-point counts in ellipsoids.
//! * [`arithvol`]: positivity classification, arithmetic volume, Mahler measure, experiments.

pub mod arithvol;
pub mod conjugate;
pub mod error;
pub mod lattice;
pub mod metric;
pub mod quadrature;
pub mod sections;

pub use error::{Error, Result};
pub use metric::MetricModel;
pub use lattice::{
    Cone, Fan, Inequality, LatticePoint, LatticePolytope, Rational, RationalPoint, SupportFunction,
    TorusDivisor,
};

