//! Exact lattice and polytope combinatorics.
//!
//! Everything here works over `Q` with [`Rational`] coordinates: vertex and
//! facet descriptions, lattice-point enumeration of dilates, fans, torus
//! divisors and their support functions, and the monomial map attached to
//! the lattice points of a polytope.

pub(crate) mod exact;
mod fan;
mod point;
mod polytope;

pub use fan::{support_value, validate_smooth_fan, Cone, ConeSmoothness, Fan, SmoothnessReport, SupportFunction, TorusDivisor};
pub use point::{format_rational, parse_rational, LatticePoint, Rational, RationalPoint};
pub use polytope::{Inequality, LatticePolytope, MonomialMap};

pub(crate) use point::to_f64;

/// `Δ_D` of a torus divisor.
pub fn polytope_from_divisor(div: &TorusDivisor) -> crate::Result<LatticePolytope> {
    div.polytope()
}

/// Integer points of `l · P` in lexicographic order.
pub fn lattice_points(p: &LatticePolytope, l: u32) -> Vec<LatticePoint> {
    p.lattice_points(l)
}

/// `min_{v ∈ vert Δ_D} ⟨v, u⟩`.
pub fn support_function_eval(div: &TorusDivisor, u: &RationalPoint) -> crate::Result<Rational> {
    div.support_value(u)
}

pub fn monomial_map_matrix(p: &LatticePolytope) -> crate::Result<MonomialMap> {
    p.monomial_map()
}

pub fn minkowski_sum(p: &LatticePolytope, other: &LatticePolytope) -> crate::Result<LatticePolytope> {
    p.minkowski_sum(other)
}

pub fn polytope_volume(p: &LatticePolytope) -> crate::Result<Rational> {
    p.volume()
}
