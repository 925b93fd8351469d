use std::collections::BTreeSet;

use itertools::Itertools;
use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use super::exact::{self, int_rows};
use super::point::{q, LatticePoint, Rational, RationalPoint};
use crate::error::{Error, Result};

/// Half-space `⟨x, normal⟩ ≥ offset`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Inequality {
    pub normal: Vec<i64>,
    pub offset: Rational,
}

impl Inequality {
    pub fn new(normal: Vec<i64>, offset: Rational) -> Self {
        Self { normal, offset }
    }

    /// `⟨x, normal⟩ − offset`; nonnegative exactly on the half-space.
    pub fn slack(&self, x: &RationalPoint) -> Rational {
        x.dot_int(&self.normal) - &self.offset
    }

    pub fn is_satisfied(&self, x: &RationalPoint) -> bool {
        !self.slack(x).is_negative()
    }

    pub fn is_tight(&self, x: &RationalPoint) -> bool {
        self.slack(x).is_zero()
    }
}

/// A bounded rational polytope in `M_R`, kept in both vertex and half-space form.
///
/// The half-space form is irredundant: `facets` are the facets of the polytope
/// inside its affine hull and `equalities` cut out that affine hull
/// (`⟨x, w⟩ = c`). Vertices are sorted lexicographically.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatticePolytope {
    dim: usize,
    vertices: Vec<RationalPoint>,
    facets: Vec<Inequality>,
    equalities: Vec<(Vec<i64>, Rational)>,
    affine_dim: usize,
}

impl LatticePolytope {
    /// Convex hull of a finite point set.
    pub fn from_vertices(dim: usize, points: &[RationalPoint]) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyPolytope);
        }
        if let Some(p) = points.iter().find(|p| p.dim() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, found: p.dim() });
        }
        let pts: Vec<RationalPoint> = points.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect();
        let base = &pts[0];
        let diffs: Vec<Vec<Rational>> = pts[1..].iter().map(|p| p.sub(base).0).collect();
        let (span, _) = exact::rref(&diffs, dim);
        let affine_dim = span.len();

        let equalities: Vec<(Vec<i64>, Rational)> = exact::nullspace(&span, dim)
            .iter()
            .map(|w| {
                let w = exact::primitive_integer(w);
                let c = base.dot_int(&w);
                (w, c)
            })
            .collect();
        let eq_rows: Vec<Vec<Rational>> = int_rows(&equalities.iter().map(|(w, _)| w.clone()).collect::<Vec<_>>());

        let mut facets: BTreeSet<Inequality> = BTreeSet::new();
        if affine_dim > 0 {
            for subset in subsets(pts.len(), affine_dim) {
                let first = &pts[subset[0]];
                let mut rows: Vec<Vec<Rational>> = subset[1..].iter().map(|&i| pts[i].sub(first).0).collect();
                rows.extend(eq_rows.iter().cloned());
                let ns = exact::nullspace(&rows, dim);
                if ns.len() != 1 {
                    continue;
                }
                let normal = exact::primitive_integer(&ns[0]);
                let c = first.dot_int(&normal);
                let values: Vec<Rational> = pts.iter().map(|p| p.dot_int(&normal)).collect();
                if values.iter().all(|v| *v >= c) {
                    facets.insert(Inequality::new(normal, c));
                } else if values.iter().all(|v| *v <= c) {
                    facets.insert(Inequality::new(normal.iter().map(|x| -x).collect(), -c));
                }
            }
        }
        let facets: Vec<Inequality> = facets.into_iter().collect();

        let vertices: Vec<RationalPoint> = if affine_dim == 0 {
            vec![base.clone()]
        } else {
            pts.iter()
                .filter(|p| {
                    let tight: Vec<Vec<i64>> = facets.iter().filter(|f| f.is_tight(p)).map(|f| f.normal.clone()).collect();
                    exact::rank(&int_rows(&tight), dim) == affine_dim
                })
                .cloned()
                .collect()
        };

        Ok(Self { dim, vertices, facets, equalities, affine_dim })
    }

    /// Polytope `{x : ⟨x, u⟩ ≥ b}` for a finite list of half-spaces.
    pub fn from_inequalities(dim: usize, inequalities: &[Inequality]) -> Result<Self> {
        if let Some(h) = inequalities.iter().find(|h| h.normal.len() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, found: h.normal.len() });
        }
        let normals: Vec<Vec<i64>> = inequalities.iter().map(|h| h.normal.clone()).collect();
        if dim == 0 {
            return Self::from_vertices(0, &[RationalPoint::zero(0)]);
        }
        let bounded = positively_spans(&normals, dim);
        let mut candidates: BTreeSet<RationalPoint> = BTreeSet::new();
        for subset in subsets(inequalities.len(), dim) {
            let a: Vec<Vec<Rational>> = subset.iter().map(|&i| normals[i].iter().map(|&x| q(x)).collect()).collect();
            let b: Vec<Rational> = subset.iter().map(|&i| inequalities[i].offset.clone()).collect();
            let Some(x) = exact::solve_unique(&a, &b, dim) else {
                continue;
            };
            let x = RationalPoint(x);
            if inequalities.iter().all(|h| h.is_satisfied(&x)) {
                candidates.insert(x);
            }
        }
        if !bounded {
            return Err(Error::Unbounded);
        }
        if candidates.is_empty() {
            return Err(Error::EmptyPolytope);
        }
        let pts: Vec<RationalPoint> = candidates.into_iter().collect();
        Self::from_vertices(dim, &pts)
    }

    /// The standard simplex `conv{0, e_1, …, e_d}`.
    pub fn standard_simplex(dim: usize) -> Self {
        let mut pts = vec![RationalPoint::zero(dim)];
        for i in 0..dim {
            let mut e = vec![0; dim];
            e[i] = 1;
            pts.push(RationalPoint::from_ints(&e));
        }
        Self::from_vertices(dim, &pts).expect("simplex vertices are valid")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn affine_dim(&self) -> usize {
        self.affine_dim
    }

    pub fn is_full_dimensional(&self) -> bool {
        self.affine_dim == self.dim
    }

    pub fn vertices(&self) -> &[RationalPoint] {
        &self.vertices
    }

    pub fn facets(&self) -> &[Inequality] {
        &self.facets
    }

    pub fn equalities(&self) -> &[(Vec<i64>, Rational)] {
        &self.equalities
    }

    /// Full half-space description: facets plus both orientations of every equality.
    pub fn inequalities(&self) -> Vec<Inequality> {
        let mut out = self.facets.clone();
        for (w, c) in &self.equalities {
            out.push(Inequality::new(w.clone(), c.clone()));
            out.push(Inequality::new(w.iter().map(|x| -x).collect(), -c.clone()));
        }
        out
    }

    pub fn contains(&self, x: &RationalPoint) -> bool {
        x.dim() == self.dim
            && self.equalities.iter().all(|(w, c)| x.dot_int(w) == *c)
            && self.facets.iter().all(|f| f.is_satisfied(x))
    }

    /// Indices of facets tight at `x`.
    pub fn tight_facets(&self, x: &RationalPoint) -> Vec<usize> {
        (0..self.facets.len()).filter(|&i| self.facets[i].is_tight(x)).collect()
    }

    /// `x` lies in the relative interior (no facet is tight).
    pub fn in_relative_interior(&self, x: &RationalPoint) -> bool {
        self.contains(x) && self.tight_facets(x).is_empty()
    }

    /// The dilate `l · P`.
    pub fn dilate(&self, l: &Rational) -> Self {
        if l.is_zero() {
            return Self::from_vertices(self.dim, &[RationalPoint::zero(self.dim)]).expect("origin");
        }
        assert!(l.is_positive(), "dilation factor must be positive");
        Self {
            dim: self.dim,
            vertices: self.vertices.iter().map(|v| v.scale(l)).collect(),
            facets: self
                .facets
                .iter()
                .map(|f| Inequality::new(f.normal.clone(), &f.offset * l))
                .collect(),
            equalities: self.equalities.iter().map(|(w, c)| (w.clone(), c * l)).collect(),
            affine_dim: self.affine_dim,
        }
    }

    /// Integer points of `l · P` in lexicographic order.
    pub fn lattice_points(&self, l: u32) -> Vec<LatticePoint> {
        let scaled = self.dilate(&q(l as i64));
        let mut lo = vec![i64::MAX; self.dim];
        let mut hi = vec![i64::MIN; self.dim];
        for v in &scaled.vertices {
            for (j, c) in v.0.iter().enumerate() {
                lo[j] = lo[j].min(bigint_to_i64(&c.ceil().to_integer()));
                hi[j] = hi[j].max(bigint_to_i64(&c.floor().to_integer()));
            }
        }
        if self.dim == 0 {
            return vec![LatticePoint(vec![])];
        }
        if lo.iter().zip(&hi).any(|(a, b)| a > b) {
            return Vec::new();
        }
        let facets = scaled.integer_constraints();
        let mut out = Vec::new();
        let mut x = lo.clone();
        loop {
            if facets.iter().all(|(n, num, den, is_eq)| {
                let lhs: i128 = x.iter().zip(n).map(|(&a, &b)| a as i128 * b as i128).sum::<i128>() * den;
                if *is_eq {
                    lhs == *num
                } else {
                    lhs >= *num
                }
            }) {
                out.push(LatticePoint(x.clone()));
            }
            // odometer, last coordinate fastest
            let mut j = self.dim;
            loop {
                if j == 0 {
                    return out;
                }
                j -= 1;
                if x[j] < hi[j] {
                    x[j] += 1;
                    x[j + 1..].copy_from_slice(&lo[j + 1..]);
                    break;
                }
            }
        }
    }

    /// Constraints as `(normal, numerator, denominator, is_equality)` with `⟨x,n⟩·den ≥ num`.
    fn integer_constraints(&self) -> Vec<(Vec<i64>, i128, i128, bool)> {
        let conv = |c: &Rational| -> (i128, i128) {
            (bigint_to_i128(c.numer()), bigint_to_i128(c.denom()))
        };
        let mut out: Vec<(Vec<i64>, i128, i128, bool)> = self
            .facets
            .iter()
            .map(|f| {
                let (n, d) = conv(&f.offset);
                (f.normal.clone(), n, d, false)
            })
            .collect();
        for (w, c) in &self.equalities {
            let (n, d) = conv(c);
            out.push((w.clone(), n, d, true));
        }
        out
    }

    /// Pulling triangulation: simplices are listed as `dim + 1` vertices each.
    ///
    /// Returns `DegeneratePolytope` unless the polytope is full-dimensional.
    pub fn triangulate(&self) -> Result<Vec<Vec<RationalPoint>>> {
        if !self.is_full_dimensional() {
            return Err(Error::DegeneratePolytope);
        }
        Ok(triangulate_hull(self))
    }

    /// Exact Lebesgue volume, zero for a polytope that is not full-dimensional.
    pub fn volume(&self) -> Result<Rational> {
        if !self.is_full_dimensional() {
            return Ok(Rational::zero());
        }
        let simplices = self.triangulate()?;
        let d = self.dim;
        let factorial: i64 = (1..=d as i64).product();
        let mut total = Rational::zero();
        for s in &simplices {
            let rows: Vec<Vec<Rational>> = s[1..].iter().map(|p| p.sub(&s[0]).0).collect();
            total += exact::determinant(&rows).abs();
        }
        Ok(total / q(factorial))
    }

    /// Vertex set of `P + Q`.
    pub fn minkowski_sum(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: other.dim });
        }
        let sums: Vec<RationalPoint> = self
            .vertices
            .iter()
            .flat_map(|a| other.vertices.iter().map(move |b| a.add(b)))
            .collect();
        Self::from_vertices(self.dim, &sums)
    }

    /// Rows `b_j = m_j − m_0` over the lattice points `m_0 < … < m_n` of the polytope.
    pub fn monomial_map(&self) -> Result<MonomialMap> {
        let points = self.lattice_points(1);
        let Some(base) = points.first().cloned() else {
            return Err(Error::EmptyPolytope);
        };
        let rows = points[1..]
            .iter()
            .map(|m| m.0.iter().zip(&base.0).map(|(a, b)| a - b).collect())
            .collect();
        Ok(MonomialMap { base, points, rows })
    }
}

fn bigint_to_i64(x: &BigInt) -> i64 {
    num_traits::ToPrimitive::to_i64(x).expect("coordinate fits in i64")
}

fn bigint_to_i128(x: &BigInt) -> i128 {
    num_traits::ToPrimitive::to_i128(x).expect("rational component fits in i128")
}

fn triangulate_hull(p: &LatticePolytope) -> Vec<Vec<RationalPoint>> {
    let apex = p.vertices[0].clone();
    if p.affine_dim == 0 {
        return vec![vec![apex]];
    }
    let mut out = Vec::new();
    for facet in &p.facets {
        if facet.is_tight(&apex) {
            continue;
        }
        let face_vertices: Vec<RationalPoint> = p.vertices.iter().filter(|v| facet.is_tight(v)).cloned().collect();
        let face = LatticePolytope::from_vertices(p.dim, &face_vertices).expect("facet is nonempty");
        for mut simplex in triangulate_hull(&face) {
            simplex.insert(0, apex.clone());
            out.push(simplex);
        }
    }
    out
}

/// `true` iff the cone generated by `normals` is all of `R^dim`.
pub(crate) fn positively_spans(normals: &[Vec<i64>], dim: usize) -> bool {
    if exact::rank(&int_rows(normals), dim) < dim {
        return false;
    }
    let bases: Vec<Vec<Vec<Rational>>> = subsets(normals.len(), dim)
        .into_iter()
        .map(|s| s.iter().map(|&i| normals[i].iter().map(|&x| q(x)).collect()).collect::<Vec<Vec<Rational>>>())
        .filter(|b: &Vec<Vec<Rational>>| !exact::determinant(b).is_zero())
        .collect();
    (0..dim).all(|j| {
        [1i64, -1].iter().all(|&sign| {
            let mut target = vec![Rational::zero(); dim];
            target[j] = q(sign);
            bases.iter().any(|b| {
                // columns of the system are the basis vectors
                let a: Vec<Vec<Rational>> = (0..dim).map(|r| (0..dim).map(|c| b[c][r].clone()).collect()).collect();
                exact::solve_unique(&a, &target, dim).is_some_and(|c| exact::is_all_nonnegative(&c))
            })
        })
    })
}

/// The monomial map `s ↦ (χ^{m_0}(s) : … : χ^{m_n}(s))` normalized by `χ^{m_0}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonomialMap {
    pub base: LatticePoint,
    pub points: Vec<LatticePoint>,
    /// `b_j = m_j − m_0`, one row per non-base lattice point.
    pub rows: Vec<Vec<i64>>,
}

impl MonomialMap {
    /// `(1, s^{b_1}, …, s^{b_n})` at a torus point with nonzero rational coordinates.
    pub fn evaluate(&self, s: &[Rational]) -> Vec<Rational> {
        let mut out = vec![Rational::from_integer(1.into())];
        out.extend(self.rows.iter().map(|b| monomial(s, b)));
        out
    }

    /// `(χ^{m_0}(s), …, χ^{m_n}(s))`.
    pub fn characters(&self, s: &[Rational]) -> Vec<Rational> {
        self.points.iter().map(|m| monomial(s, &m.0)).collect()
    }
}

pub(crate) fn monomial(s: &[Rational], exponent: &[i64]) -> Rational {
    s.iter().zip(exponent).fold(Rational::from_integer(1.into()), |acc, (x, &e)| {
        let p = num_traits::pow(x.clone(), e.unsigned_abs() as usize);
        if e < 0 {
            acc / p
        } else {
            acc * p
        }
    })
}

pub(crate) fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    (0..n).combinations(k).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(c: &[i64]) -> RationalPoint {
        RationalPoint::from_ints(c)
    }

    #[test]
    fn subsets_enumerate_all_combinations() {
        assert_eq!(subsets(4, 2).len(), 6);
        assert_eq!(subsets(3, 0), vec![Vec::<usize>::new()]);
        assert_eq!(subsets(3, 3), vec![vec![0, 1, 2]]);
        assert!(subsets(2, 3).is_empty());
        assert_eq!(subsets(3, 1), vec![vec![0], vec![1], vec![2]]);
    }

    #[test]
    fn hull_drops_interior_points() {
        let p = LatticePolytope::from_vertices(2, &[pt(&[0, 0]), pt(&[2, 0]), pt(&[0, 2]), pt(&[1, 1]), pt(&[1, 0])]).unwrap();
        assert_eq!(p.vertices(), &[pt(&[0, 0]), pt(&[0, 2]), pt(&[2, 0])]);
        assert_eq!(p.facets().len(), 3);
    }

    #[test]
    fn lower_dimensional_hull() {
        let seg = LatticePolytope::from_vertices(2, &[pt(&[0, 0]), pt(&[1, 1]), pt(&[2, 2])]).unwrap();
        assert_eq!(seg.affine_dim(), 1);
        assert_eq!(seg.vertices(), &[pt(&[0, 0]), pt(&[2, 2])]);
        assert!(seg.contains(&pt(&[1, 1])));
        assert!(!seg.contains(&pt(&[1, 0])));
        assert_eq!(seg.lattice_points(1).len(), 3);
        assert_eq!(seg.triangulate(), Err(Error::DegeneratePolytope));
        assert_eq!(seg.volume().unwrap(), q(0));
    }

    #[test]
    fn unbounded_and_empty_systems() {
        let half_line = [Inequality::new(vec![1], q(0))];
        assert_eq!(LatticePolytope::from_inequalities(1, &half_line), Err(Error::Unbounded));
        let empty = [Inequality::new(vec![1], q(1)), Inequality::new(vec![-1], q(0))];
        assert_eq!(LatticePolytope::from_inequalities(1, &empty), Err(Error::EmptyPolytope));
    }

    #[test]
    fn square_volume_and_triangulation() {
        let sq = LatticePolytope::from_vertices(2, &[pt(&[0, 0]), pt(&[1, 0]), pt(&[0, 1]), pt(&[1, 1])]).unwrap();
        assert_eq!(sq.triangulate().unwrap().len(), 2);
        assert_eq!(sq.volume().unwrap(), q(1));
    }

    #[test]
    fn cube_volume() {
        let mut pts = Vec::new();
        for a in 0..2 {
            for b in 0..2 {
                for c in 0..2 {
                    pts.push(pt(&[2 * a, 2 * b, 2 * c]));
                }
            }
        }
        let cube = LatticePolytope::from_vertices(3, &pts).unwrap();
        assert_eq!(cube.facets().len(), 6);
        assert_eq!(cube.volume().unwrap(), q(8));
        assert_eq!(cube.lattice_points(1).len(), 27);
    }

    #[test]
    fn lattice_points_are_lexicographic() {
        let s = LatticePolytope::standard_simplex(2);
        let pts = s.lattice_points(2);
        let mut sorted = pts.clone();
        sorted.sort();
        assert_eq!(pts, sorted);
    }

    #[test]
    fn rational_polytope_lattice_points() {
        let half = Rational::new(1.into(), 2.into());
        let p = LatticePolytope::from_vertices(1, &[RationalPoint(vec![half.clone()]), RationalPoint(vec![q(5) * &half])]).unwrap();
        let pts: Vec<i64> = p.lattice_points(1).iter().map(|x| x.0[0]).collect();
        assert_eq!(pts, vec![1, 2]);
        let pts3: Vec<i64> = p.lattice_points(2).iter().map(|x| x.0[0]).collect();
        assert_eq!(pts3, vec![1, 2, 3, 4, 5]);
    }
}
