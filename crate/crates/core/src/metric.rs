//! Torus-invariant metrics in logarithmic coordinates.
//!
//! A metric on `O(D)` is represented by the concave function
//! `g(u) = log ‖s_D(exp(−u))‖` on `R^d`, which differs from the support
//! function `ψ_D` by a bounded amount. A [`MetricModel`] is a finite sum of
//! terms minus a constant shift:
//!
//! * log-sum-exp terms `−(1/λ) log Σ_m w_m exp(−λ⟨m, u⟩)` (smooth, concave),
//! * canonical terms `min_{v ∈ vert P} ⟨v, u⟩` (piecewise linear).
//!
//! The reference polytope of a model is the Minkowski sum of the term polytopes.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::lattice::{LatticePolytope, Rational, RationalPoint, TorusDivisor};

/// `u ↦ −(1/λ) log Σ_m w_m exp(−λ⟨m, u⟩)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LogSumExp {
    points: Vec<RationalPoint>,
    coords: Vec<Vec<f64>>,
    log_weights: Vec<f64>,
    sharpness: f64,
}

impl LogSumExp {
    pub fn new(points: Vec<RationalPoint>, weights: &[f64], sharpness: f64) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidArgument("log-sum-exp needs at least one point".into()));
        }
        if weights.len() != points.len() {
            return Err(Error::InvalidArgument(format!(
                "{} weights for {} points",
                weights.len(),
                points.len()
            )));
        }
        if !(sharpness.is_finite() && sharpness > 0.0) {
            return Err(Error::InvalidArgument(format!("sharpness must be positive, got {sharpness}")));
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::InvalidArgument(format!("weights must be positive, got {w}")));
        }
        let dim = points[0].dim();
        if let Some(p) = points.iter().find(|p| p.dim() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, found: p.dim() });
        }
        Ok(Self {
            coords: points.iter().map(RationalPoint::to_f64).collect(),
            points,
            log_weights: weights.iter().map(|w| w.ln()).collect(),
            sharpness,
        })
    }

    pub fn points(&self) -> &[RationalPoint] {
        &self.points
    }

    pub fn weights(&self) -> Vec<f64> {
        self.log_weights.iter().map(|w| w.exp()).collect()
    }

    pub fn sharpness(&self) -> f64 {
        self.sharpness
    }

    fn dim(&self) -> usize {
        self.points[0].dim()
    }

    /// Log-partition `L(u) = log Σ w_m exp(−λ⟨m,u⟩)` and the Gibbs weights `p_m`.
    fn log_partition(&self, u: &[f64]) -> (f64, Vec<f64>) {
        let s: Vec<f64> = self
            .coords
            .iter()
            .zip(&self.log_weights)
            .map(|(m, lw)| lw - self.sharpness * dot(m, u))
            .collect();
        let top = s.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let total: f64 = s.iter().map(|x| (x - top).exp()).sum();
        let log_z = top + total.ln();
        let p = s.iter().map(|x| (x - log_z).exp()).collect();
        (log_z, p)
    }

    pub fn value(&self, u: &[f64]) -> f64 {
        -self.log_partition(u).0 / self.sharpness
    }

    /// Accumulates `∇g` into `grad` and `−Hess g` into `neg_hess`; returns `g(u)`.
    pub(crate) fn accumulate(&self, u: &[f64], grad: &mut DVector<f64>, neg_hess: Option<&mut DMatrix<f64>>) -> f64 {
        let (log_z, p) = self.log_partition(u);
        let d = self.dim();
        let mut mean = DVector::zeros(d);
        for (m, w) in self.coords.iter().zip(&p) {
            for j in 0..d {
                mean[j] += w * m[j];
            }
        }
        *grad += &mean;
        if let Some(h) = neg_hess {
            for (m, w) in self.coords.iter().zip(&p) {
                for a in 0..d {
                    let da = m[a] - mean[a];
                    for b in 0..d {
                        h[(a, b)] += self.sharpness * w * da * (m[b] - mean[b]);
                    }
                }
            }
        }
        -log_z / self.sharpness
    }

    /// Terms whose points minimize `⟨m, direction⟩`: the restriction to a face of the hull.
    pub fn restrict_to_face(&self, direction: &[i64]) -> Self {
        let values: Vec<Rational> = self.points.iter().map(|m| m.dot_int(direction)).collect();
        let least = values.iter().min().expect("non-empty").clone();
        let keep: Vec<usize> = (0..self.points.len()).filter(|&i| values[i] == least).collect();
        Self {
            points: keep.iter().map(|&i| self.points[i].clone()).collect(),
            coords: keep.iter().map(|&i| self.coords[i].clone()).collect(),
            log_weights: keep.iter().map(|&i| self.log_weights[i]).collect(),
            sharpness: self.sharpness,
        }
    }

    /// `(1/λ) log w` of the single point, for one-point terms.
    pub(crate) fn linear_constant(&self) -> Option<f64> {
        (self.points.len() == 1).then(|| self.log_weights[0] / self.sharpness)
    }

    fn hull(&self) -> Result<LatticePolytope> {
        LatticePolytope::from_vertices(self.dim(), &self.points)
    }
}

/// `u ↦ min_{v ∈ vert P} ⟨v, u⟩`, the support function of `P`.
#[derive(Clone, Debug, PartialEq)]
pub struct Canonical {
    polytope: LatticePolytope,
    coords: Vec<Vec<f64>>,
}

impl Canonical {
    fn new(polytope: LatticePolytope) -> Self {
        let coords = polytope.vertices().iter().map(RationalPoint::to_f64).collect();
        Self { polytope, coords }
    }

    pub fn polytope(&self) -> &LatticePolytope {
        &self.polytope
    }

    fn argmin(&self, u: &[f64]) -> (f64, usize) {
        self.coords
            .iter()
            .enumerate()
            .map(|(i, v)| (dot(v, u), i))
            .fold((f64::INFINITY, 0), |best, cur| if cur.0 < best.0 { cur } else { best })
    }

    pub fn value(&self, u: &[f64]) -> f64 {
        self.argmin(u).0
    }

    pub fn exact_value(&self, u: &RationalPoint) -> Rational {
        crate::lattice::support_value(&self.polytope, u)
    }

    fn as_linear(&self) -> Option<LogSumExp> {
        (self.polytope.vertices().len() == 1)
            .then(|| LogSumExp::new(self.polytope.vertices().to_vec(), &[1.0], 1.0).expect("valid one-point term"))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Term {
    LogSumExp(LogSumExp),
    Canonical(Canonical),
}

/// A concave function `g` on `R^d` with gradient and Hessian oracles and its
/// reference polytope `Δ`.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricModel {
    dim: usize,
    polytope: LatticePolytope,
    terms: Vec<Term>,
    shift: f64,
}

impl MetricModel {
    /// Log-sum-exp model. Its polytope is `conv(points)`.
    pub fn log_sum_exp(points: Vec<RationalPoint>, weights: &[f64], sharpness: f64) -> Result<Self> {
        let term = LogSumExp::new(points, weights, sharpness)?;
        let polytope = term.hull()?;
        Ok(Self { dim: polytope.dim(), polytope, terms: vec![Term::LogSumExp(term)], shift: 0.0 })
    }

    /// Log-sum-exp model used as a metric on the line bundle with polytope `reference`.
    pub fn log_sum_exp_on(
        reference: &LatticePolytope,
        points: Vec<RationalPoint>,
        weights: &[f64],
        sharpness: f64,
    ) -> Result<Self> {
        let model = Self::log_sum_exp(points, weights, sharpness)?;
        if model.polytope.vertices() != reference.vertices() {
            return Err(Error::DomainMismatch);
        }
        Ok(model)
    }

    /// Fubini–Study model on `P^d`: simplex vertices, unit weights, sharpness 2.
    pub fn fubini_study(dim: usize) -> Self {
        let simplex = LatticePolytope::standard_simplex(dim);
        let n = simplex.vertices().len();
        Self::log_sum_exp(simplex.vertices().to_vec(), &vec![1.0; n], 2.0).expect("valid Fubini–Study data")
    }

    /// Canonical metric of a divisor: `g = ψ_D`.
    pub fn canonical(div: &TorusDivisor) -> Result<Self> {
        Ok(Self::canonical_on(div.polytope()?))
    }

    pub fn canonical_on(polytope: LatticePolytope) -> Self {
        Self {
            dim: polytope.dim(),
            terms: vec![Term::Canonical(Canonical::new(polytope.clone()))],
            polytope,
            shift: 0.0,
        }
    }

    /// `g ↦ g − λ`; the conjugate shifts by `+λ`.
    pub fn scaled(&self, lambda: f64) -> Self {
        let mut out = self.clone();
        out.shift += lambda;
        out
    }

    /// `g = g_1 + g_2` on the Minkowski sum of the polytopes.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: other.dim });
        }
        let polytope = self.polytope.minkowski_sum(&other.polytope)?;
        let mut canonical: Option<LatticePolytope> = None;
        let mut terms = Vec::new();
        for term in self.terms.iter().chain(&other.terms) {
            match term {
                Term::LogSumExp(t) => terms.push(Term::LogSumExp(t.clone())),
                Term::Canonical(c) => match c.as_linear() {
                    Some(linear) => terms.push(Term::LogSumExp(linear)),
                    None => {
                        canonical = Some(match canonical {
                            None => c.polytope.clone(),
                            Some(p) => p.minkowski_sum(&c.polytope)?,
                        })
                    }
                },
            }
        }
        if let Some(p) = canonical {
            terms.push(Term::Canonical(Canonical::new(p)));
        }
        Ok(Self { dim: self.dim, polytope, terms, shift: self.shift + other.shift })
    }

    /// Multiplies the sharpness of every log-sum-exp term by `factor` (bringing `g` closer to `ψ`).
    pub fn sharpened(&self, factor: f64) -> Result<Self> {
        let mut out = self.clone();
        for term in &mut out.terms {
            if let Term::LogSumExp(t) = term {
                *t = LogSumExp::new(t.points.clone(), &t.weights(), t.sharpness * factor)?;
            }
        }
        Ok(out)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn polytope(&self) -> &LatticePolytope {
        &self.polytope
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    /// Constant `λ` with `g = Σ terms − λ`.
    pub fn shift(&self) -> f64 {
        self.shift
    }

    pub fn is_smooth(&self) -> bool {
        self.terms.iter().all(|t| matches!(t, Term::LogSumExp(_)))
    }

    /// `−Hess g` positive-definite everywhere.
    pub fn is_strictly_positive(&self) -> bool {
        self.is_smooth() && self.polytope.is_full_dimensional()
    }

    pub fn is_canonical(&self) -> bool {
        !self.is_smooth()
    }

    pub fn value(&self, u: &[f64]) -> f64 {
        debug_assert_eq!(u.len(), self.dim);
        let sum: f64 = self
            .terms
            .iter()
            .map(|t| match t {
                Term::LogSumExp(t) => t.value(u),
                Term::Canonical(c) => c.value(u),
            })
            .sum();
        sum - self.shift
    }

    /// Exact `g(u)` for canonical models without shift.
    pub fn exact_value(&self, u: &RationalPoint) -> Option<Rational> {
        if self.shift != 0.0 {
            return None;
        }
        let mut total = Rational::from_integer(0.into());
        for t in &self.terms {
            match t {
                Term::Canonical(c) => total += c.exact_value(u),
                Term::LogSumExp(_) => return None,
            }
        }
        Some(total)
    }

    /// `∇g(u)`. For canonical terms this is the vertex attaining the minimum (a supergradient).
    pub fn gradient(&self, u: &[f64]) -> Vec<f64> {
        let mut grad = DVector::zeros(self.dim);
        for t in &self.terms {
            match t {
                Term::LogSumExp(t) => {
                    t.accumulate(u, &mut grad, None);
                }
                Term::Canonical(c) => {
                    let (_, i) = c.argmin(u);
                    for j in 0..self.dim {
                        grad[j] += c.coords[i][j];
                    }
                }
            }
        }
        grad.iter().copied().collect()
    }

    /// `Hess g(u)`; `None` for non-smooth models.
    pub fn hessian(&self, u: &[f64]) -> Option<DMatrix<f64>> {
        self.value_gradient_neg_hessian(u).map(|(_, _, h)| -h)
    }

    /// `(g, ∇g, −Hess g)` for smooth models.
    pub fn value_gradient_neg_hessian(&self, u: &[f64]) -> Option<(f64, DVector<f64>, DMatrix<f64>)> {
        if !self.is_smooth() {
            return None;
        }
        let mut grad = DVector::zeros(self.dim);
        let mut neg_hess = DMatrix::zeros(self.dim, self.dim);
        let mut value = -self.shift;
        for t in &self.terms {
            if let Term::LogSumExp(t) = t {
                value += t.accumulate(u, &mut grad, Some(&mut neg_hess));
            }
        }
        Some((value, grad, neg_hess))
    }

    /// `det(−Hess g(u))`, the unnormalized Monge–Ampère density.
    pub fn monge_ampere_density(&self, u: &[f64]) -> Option<f64> {
        self.value_gradient_neg_hessian(u).map(|(_, _, h)| if self.dim == 0 { 1.0 } else { h.determinant() })
    }

    /// Log-sum-exp terms after restriction to the face of `Δ` selected by the inner normal `direction`.
    pub(crate) fn face_terms(&self, direction: &[i64]) -> Option<Vec<LogSumExp>> {
        self.terms
            .iter()
            .map(|t| match t {
                Term::LogSumExp(t) => Some(t.restrict_to_face(direction)),
                Term::Canonical(_) => None,
            })
            .collect()
    }

    /// Sup of `|g − ψ_Δ|` over a sample of points.
    pub fn sampled_distance_to_support(&self, samples: &[Vec<f64>]) -> f64 {
        let psi = Canonical::new(self.polytope.clone());
        samples
            .iter()
            .map(|u| (self.value(u) - psi.value(u)).abs())
            .fold(0.0, f64::max)
    }

    /// Sup of `|g − other|` over a sample of points.
    pub fn sampled_distance(&self, other: &Self, samples: &[Vec<f64>]) -> f64 {
        samples
            .iter()
            .map(|u| (self.value(u) - other.value(u)).abs())
            .fold(0.0, f64::max)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// See [`MetricModel::log_sum_exp_on`].
pub fn log_sum_exp_metric(
    reference: &LatticePolytope,
    points: Vec<RationalPoint>,
    weights: &[f64],
    sharpness: f64,
) -> Result<MetricModel> {
    MetricModel::log_sum_exp_on(reference, points, weights, sharpness)
}

pub fn canonical_metric(div: &TorusDivisor) -> Result<MetricModel> {
    MetricModel::canonical(div)
}

pub fn scale_metric(m: &MetricModel, lambda: f64) -> MetricModel {
    m.scaled(lambda)
}

pub fn add_metrics(a: &MetricModel, b: &MetricModel) -> Result<MetricModel> {
    a.add(b)
}
