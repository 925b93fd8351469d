//! Numerical Legendre–Fenchel conjugate `ǧ(x) = inf_u (⟨x, u⟩ − g(u))`.
//!
//! For smooth models the objective `u ↦ ⟨x, u⟩ − g(u)` is convex with
//! gradient `x − ∇g(u)` and Hessian `−Hess g(u)`, and is minimized by damped
//! Newton. Points on the relative boundary of `Δ` are handled exactly: the
//! minimizer escapes along the inner normal of the minimal face containing
//! `x`, and the infimum equals the conjugate of the model restricted to that
//! face (log-sum-exp terms keep only the points on the face), solved in the
//! face's own linear span.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::lattice::exact;
use crate::lattice::{LatticePoint, Rational, RationalPoint};
use crate::metric::{dot, LogSumExp, MetricModel, Term};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConjugateOptions {
    /// Residual tolerance on `‖x − ∇g(u)‖`.
    pub tolerance: f64,
    /// Tolerance used when comparing conjugate values.
    pub value_tolerance: f64,
    /// `‖u‖` beyond which the iteration is declared divergent.
    pub radius: f64,
    pub max_iterations: usize,
}

impl Default for ConjugateOptions {
    fn default() -> Self {
        Self { tolerance: 1e-9, value_tolerance: 1e-8, radius: 1e3, max_iterations: 500 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Minimizer {
    Finite(Vec<f64>),
    /// Infimum approached along `finite_part + s · direction`, `s → ∞`.
    AtInfinity { direction: Vec<f64>, finite_part: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConjugateValue {
    pub x: Vec<f64>,
    pub value: f64,
    pub minimizer: Minimizer,
    pub converged: bool,
    pub residual: f64,
    pub iterations: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ThetaMembership {
    In,
    Out,
    Boundary,
}

enum Kind {
    Smooth(Vec<LogSumExp>),
    /// Canonical part plus linear terms: the conjugate is constant on `Δ`.
    Constant(f64),
    Unsupported,
}

/// Conjugate evaluator for one model; reuse it for sweeps over many points.
pub struct ConjugateSolver<'a> {
    model: &'a MetricModel,
    opts: ConjugateOptions,
    kind: Kind,
    interior_basis: DMatrix<f64>,
    /// Facets as `(normal, offset)` in floating point, for the starting guess.
    facets: Vec<(Vec<f64>, f64)>,
    barrier_scale: f64,
}

impl<'a> ConjugateSolver<'a> {
    pub fn new(model: &'a MetricModel, opts: ConjugateOptions) -> Self {
        let mut smooth = Vec::new();
        let mut constant = model.shift();
        let mut has_canonical = false;
        let mut nonlinear = false;
        for t in model.terms() {
            match t {
                Term::LogSumExp(t) => {
                    match t.linear_constant() {
                        Some(c) => constant += c,
                        None => nonlinear = true,
                    }
                    smooth.push(t.clone());
                }
                Term::Canonical(_) => has_canonical = true,
            }
        }
        let kind = match (has_canonical, nonlinear) {
            (false, _) => Kind::Smooth(smooth),
            (true, false) => Kind::Constant(constant),
            (true, true) => Kind::Unsupported,
        };
        let vertices = model.polytope().vertices();
        let diffs: Vec<RationalPoint> = vertices[1..].iter().map(|v| v.sub(&vertices[0])).collect();
        let interior_basis = span_basis(&diffs, model.dim());
        let facets = model
            .polytope()
            .facets()
            .iter()
            .map(|f| (f.normal.iter().map(|&v| v as f64).collect(), crate::lattice::to_f64(&f.offset)))
            .collect();
        let sharpness: Vec<f64> = match &kind {
            Kind::Smooth(terms) => terms.iter().filter(|t| t.linear_constant().is_none()).map(|t| t.sharpness()).collect(),
            _ => Vec::new(),
        };
        let barrier_scale = if sharpness.is_empty() { 1.0 } else { sharpness.len() as f64 / sharpness.iter().sum::<f64>() };
        Self { model, opts, kind, interior_basis, facets, barrier_scale }
    }

    pub fn options(&self) -> &ConjugateOptions {
        &self.opts
    }

    pub fn model(&self) -> &MetricModel {
        self.model
    }

    /// The value of `ǧ` on all of `Δ` when it is constant (canonical models).
    pub fn constant_value(&self) -> Option<f64> {
        match self.kind {
            Kind::Constant(c) => Some(c),
            _ => None,
        }
    }

    /// `ǧ(x)` at an exact point of `Δ`, including relative-boundary points.
    pub fn eval(&self, x: &RationalPoint) -> Result<ConjugateValue> {
        let poly = self.model.polytope();
        if x.dim() != self.model.dim() {
            return Err(Error::DimensionMismatch { expected: self.model.dim(), found: x.dim() });
        }
        if !poly.contains(x) {
            return Err(Error::NotInDomain);
        }
        let xf = x.to_f64();
        let terms = match &self.kind {
            Kind::Constant(c) => return Ok(constant_value(xf, *c)),
            Kind::Unsupported => return Err(unsupported()),
            Kind::Smooth(terms) => terms,
        };
        let tight = poly.tight_facets(x);
        if tight.is_empty() {
            let start = self.initial_guess(&xf);
            return self.newton(terms, &xf, &self.interior_basis, None, Some(&start));
        }
        let mut normal = vec![0i64; self.model.dim()];
        for &i in &tight {
            for (n, f) in normal.iter_mut().zip(&poly.facets()[i].normal) {
                *n += f;
            }
        }
        let face_terms = self.model.face_terms(&normal).expect("smooth model");
        let diffs: Vec<RationalPoint> = face_terms
            .iter()
            .flat_map(|t| {
                let pts = t.points();
                pts[1..].iter().map(move |p| p.sub(&pts[0]))
            })
            .collect();
        let basis = span_basis(&diffs, self.model.dim());
        let direction: Vec<f64> = {
            let n: Vec<f64> = normal.iter().map(|&v| v as f64).collect();
            let len = dot(&n, &n).sqrt();
            n.iter().map(|v| v / len).collect()
        };
        self.newton(&face_terms, &xf, &basis, Some(direction), None)
    }

    /// `ǧ(x)` at a floating-point point assumed to lie in the relative interior of `Δ`.
    pub fn eval_interior(&self, x: &[f64]) -> Result<ConjugateValue> {
        match &self.kind {
            Kind::Constant(c) => Ok(constant_value(x.to_vec(), *c)),
            Kind::Unsupported => Err(unsupported()),
            Kind::Smooth(terms) => {
                let start = self.initial_guess(x);
                self.newton(terms, x, &self.interior_basis, None, Some(&start))
            }
        }
    }

    /// `−(1/λ) Σ_F log(slack_F(x)) n_F`, exact for Fubini–Study metrics.
    fn initial_guess(&self, x: &[f64]) -> Vec<f64> {
        let mut u = vec![0.0; x.len()];
        for (normal, offset) in &self.facets {
            let slack = (dot(normal, x) - offset).max(1e-300);
            let w = -self.barrier_scale * slack.ln();
            for (ui, ni) in u.iter_mut().zip(normal) {
                *ui += w * ni;
            }
        }
        u
    }

    fn newton(
        &self,
        terms: &[LogSumExp],
        x: &[f64],
        basis: &DMatrix<f64>,
        escape: Option<Vec<f64>>,
        start: Option<&[f64]>,
    ) -> Result<ConjugateValue> {
        let d = self.model.dim();
        let k = basis.ncols();
        let shift = self.model.shift();
        let xv = DVector::from_column_slice(x);
        let lift = |t: &DVector<f64>| -> Vec<f64> { (basis * t).iter().copied().collect() };
        let objective = |t: &DVector<f64>, want_hessian: bool| -> (f64, DVector<f64>, Option<DMatrix<f64>>) {
            let u = lift(t);
            let mut grad = DVector::zeros(d);
            let mut neg_hess = want_hessian.then(|| DMatrix::zeros(d, d));
            let mut g = -shift;
            for term in terms {
                g += term.accumulate(&u, &mut grad, neg_hess.as_mut());
            }
            let f = dot(x, &u) - g;
            let grad_t = basis.transpose() * (&xv - grad);
            let hess_t = neg_hess.map(|h| basis.transpose() * h * basis);
            (f, grad_t, hess_t)
        };

        let finish = |t: &DVector<f64>, f: f64, residual: f64, converged: bool, iterations: usize| {
            let u = lift(t);
            let minimizer = match &escape {
                None => Minimizer::Finite(u),
                Some(dir) => Minimizer::AtInfinity { direction: dir.clone(), finite_part: u },
            };
            ConjugateValue { x: x.to_vec(), value: f, minimizer, converged, residual, iterations }
        };

        let mut t = match start {
            Some(u) => basis.transpose() * DVector::from_column_slice(u),
            None => DVector::zeros(k),
        };
        if k == 0 {
            let (f, _, _) = objective(&t, false);
            return Ok(finish(&t, f, 0.0, true, 0));
        }
        let (mut f, mut grad, mut hess) = objective(&t, true);
        for iteration in 0..self.opts.max_iterations {
            let residual = grad.norm();
            if residual <= self.opts.tolerance {
                return Ok(finish(&t, f, residual, true, iteration));
            }
            if lift(&t).iter().map(|v| v * v).sum::<f64>().sqrt() > self.opts.radius {
                return Ok(finish(&t, f, residual, false, iteration));
            }
            let h = hess.take().expect("hessian requested");
            let direction = newton_direction(&h, &grad);
            let slope = grad.dot(&direction);
            let mut step = 1.0;
            let mut accepted = None;
            while step > 1e-16 {
                let trial = &t + &direction * step;
                let (f_trial, g_trial, _) = objective(&trial, false);
                if f_trial.is_finite() && f_trial <= f + 1e-4 * step * slope {
                    accepted = Some((trial, f_trial, g_trial));
                    break;
                }
                // rounding floor: accept a step that still shrinks the gradient
                if f_trial.is_finite() && (f_trial - f).abs() <= 1e-14 * (1.0 + f.abs()) && g_trial.norm() < residual {
                    accepted = Some((trial, f_trial, g_trial));
                    break;
                }
                step *= 0.5;
            }
            let Some((trial, _, _)) = accepted else {
                let converged = residual <= self.opts.tolerance.sqrt() * 1e-2;
                return Ok(finish(&t, f, residual, converged, iteration));
            };
            t = trial;
            let next = objective(&t, true);
            f = next.0;
            grad = next.1;
            hess = next.2;
        }
        let residual = grad.norm();
        if residual <= self.opts.tolerance.sqrt() {
            return Ok(finish(&t, f, residual, false, self.opts.max_iterations));
        }
        Err(Error::NoConvergence(format!(
            "Newton stopped after {} iterations at x = {:?} with residual {residual:.3e}",
            self.opts.max_iterations, x
        )))
    }
}

fn newton_direction(h: &DMatrix<f64>, grad: &DVector<f64>) -> DVector<f64> {
    if let Some(chol) = h.clone().cholesky() {
        // squared ratio of the Cholesky diagonal bounds the condition number from below
        let diag = chol.l_dirty().diagonal();
        let (lo, hi) = diag.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        if lo > 0.0 && (hi / lo).powi(2) <= 1e12 {
            return -chol.solve(grad);
        }
    }
    -grad.clone()
}

fn constant_value(x: Vec<f64>, value: f64) -> ConjugateValue {
    let d = x.len();
    ConjugateValue { x, value, minimizer: Minimizer::Finite(vec![0.0; d]), converged: true, residual: 0.0, iterations: 0 }
}

fn unsupported() -> Error {
    Error::Unsupported("conjugate of a canonical metric plus a non-linear smooth term".into())
}

/// Orthonormal basis (as columns) of the span of exact vectors.
fn span_basis(vectors: &[RationalPoint], dim: usize) -> DMatrix<f64> {
    let rows: Vec<Vec<Rational>> = vectors.iter().map(|v| v.0.clone()).collect();
    let (reduced, _) = exact::rref(&rows, dim);
    let mut columns: Vec<DVector<f64>> = Vec::new();
    for row in &reduced {
        let mut v = DVector::from_iterator(dim, row.iter().map(crate::lattice::to_f64));
        for c in &columns {
            let proj = c.dot(&v);
            v -= c * proj;
        }
        let n = v.norm();
        columns.push(v / n);
    }
    if columns.is_empty() {
        DMatrix::zeros(dim, 0)
    } else {
        DMatrix::from_columns(&columns)
    }
}

/// `ǧ(x)` for an exact point of `Δ`.
pub fn conjugate_eval(m: &MetricModel, x: &RationalPoint, opts: &ConjugateOptions) -> Result<ConjugateValue> {
    ConjugateSolver::new(m, *opts).eval(x)
}

/// `in` if `ǧ(x) ≥ tol`, `out` if `ǧ(x) ≤ −tol`, `boundary` otherwise.
pub fn theta_membership(m: &MetricModel, x: &RationalPoint, tol: f64) -> Result<ThetaMembership> {
    let v = conjugate_eval(m, x, &ConjugateOptions::default())?.value;
    Ok(classify(v, tol))
}

fn classify(value: f64, tol: f64) -> ThetaMembership {
    if value >= tol {
        ThetaMembership::In
    } else if value <= -tol {
        ThetaMembership::Out
    } else {
        ThetaMembership::Boundary
    }
}

/// The region `Θ = {x ∈ Δ : ǧ(x) ≥ 0}` as a membership oracle.
pub struct ThetaRegion<'a> {
    solver: ConjugateSolver<'a>,
    tol: f64,
}

impl<'a> ThetaRegion<'a> {
    pub fn new(m: &'a MetricModel, tol: f64) -> Self {
        Self { solver: ConjugateSolver::new(m, ConjugateOptions::default()), tol }
    }

    pub fn membership(&self, x: &RationalPoint) -> Result<ThetaMembership> {
        Ok(classify(self.solver.eval(x)?.value, self.tol))
    }

    pub fn contains(&self, x: &RationalPoint) -> Result<bool> {
        Ok(self.membership(x)? != ThetaMembership::Out)
    }
}

/// `(max_Δ ǧ, argmax) = (−g(0), ∇g(0))` for smooth models.
pub fn conjugate_max(m: &MetricModel) -> Result<(f64, Vec<f64>)> {
    if !m.is_smooth() {
        return Err(Error::NotSmooth);
    }
    let origin = vec![0.0; m.dim()];
    Ok((-m.value(&origin), m.gradient(&origin)))
}

/// `‖χ^e‖_sup = exp(−l · ǧ(e / l))` for `e ∈ lΔ`.
pub fn sup_norm_monomial(m: &MetricModel, e: &LatticePoint, l: u32) -> Result<f64> {
    let v = conjugate_eval(m, &e.scaled_down(l), &ConjugateOptions::default())?;
    Ok((-(l as f64) * v.value).exp())
}

/// `⟨x, u⟩ − g(u) − ǧ(x)`, nonnegative by definition of the conjugate.
pub fn fenchel_young_residual(m: &MetricModel, x: &RationalPoint, u: &[f64]) -> Result<f64> {
    let v = conjugate_eval(m, x, &ConjugateOptions::default())?;
    Ok(dot(&x.to_f64(), u) - m.value(u) - v.value)
}

/// One row of a conjugate grid export.
#[derive(Clone, Debug, PartialEq)]
pub struct GridRow {
    pub x: RationalPoint,
    pub value: f64,
    pub converged: bool,
}

/// `ǧ` on the points of `Δ ∩ (1/n) Z^d`, lexicographic order.
pub fn conjugate_grid(m: &MetricModel, n: u32, opts: &ConjugateOptions) -> Result<Vec<GridRow>> {
    let solver = ConjugateSolver::new(m, *opts);
    m.polytope()
        .lattice_points(n)
        .iter()
        .map(|e| {
            let x = e.scaled_down(n);
            let v = solver.eval(&x)?;
            Ok(GridRow { x, value: v.value, converged: v.converged })
        })
        .collect()
}
