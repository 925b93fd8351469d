//! Numerical integration: the normalized Monge–Ampère measure on `R^d`, `L²`
//! norms of monomials, and `(d+1)! ∫_Δ max(ǧ, 0)`.

mod cubature;
mod gauss;
mod simplex;

use num_complex::Complex64;

pub use cubature::integrate_rd;
pub(crate) use cubature::adaptive_boxes;
pub use gauss::{compensated_sum, gauss_legendre, CompensatedSum, GaussRule};
pub use simplex::{integrate_simplices, Simplex};

use crate::conjugate::{ConjugateOptions, ConjugateSolver, Minimizer};
use crate::error::{Error, Result};
use crate::lattice::{to_f64, LatticePoint, RationalPoint};
use crate::metric::{dot, MetricModel};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureOptions {
    /// Relative tolerance.
    pub tolerance: f64,
    /// Cell budget of each adaptive pass.
    pub max_subdivisions: usize,
    /// First truncation radius for `R^d` integrals.
    pub initial_radius: f64,
    /// Radius at which a non-decaying truncation gives up.
    pub max_radius: f64,
    pub conjugate: ConjugateOptions,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-6,
            max_subdivisions: 20_000,
            initial_radius: 8.0,
            max_radius: 512.0,
            conjugate: ConjugateOptions::default(),
        }
    }
}

impl QuadratureOptions {
    pub fn with_tolerance(mut self, tolerance: f64) -> Result<Self> {
        if !(tolerance.is_finite() && tolerance > 0.0) {
            return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tolerance}")));
        }
        self.tolerance = tolerance;
        Ok(self)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
    pub cells: usize,
    pub converged: bool,
}

/// `det(−Hess g(u)) / vol(Δ) du`, a probability measure on `R^d`.
#[derive(Clone, Debug)]
pub struct MAMeasure<'a> {
    model: &'a MetricModel,
    inv_volume: f64,
}

impl<'a> MAMeasure<'a> {
    pub fn new(model: &'a MetricModel) -> Result<Self> {
        if !model.is_smooth() {
            return Err(Error::NotSmooth);
        }
        if !model.polytope().is_full_dimensional() {
            return Err(Error::DegeneratePolytope);
        }
        let volume = to_f64(&model.polytope().volume()?);
        Ok(Self { model, inv_volume: 1.0 / volume })
    }

    pub fn model(&self) -> &MetricModel {
        self.model
    }

    pub fn density(&self, u: &[f64]) -> f64 {
        self.model.monge_ampere_density(u).expect("smooth model") * self.inv_volume
    }

    pub fn integrate<F: Fn(&[f64]) -> f64>(&self, f: F, opts: &QuadratureOptions) -> Result<f64> {
        let center = vec![0.0; self.model.dim()];
        Ok(integrate_rd(&|u: &[f64]| f(u) * self.density(u), &center, 1.0, opts)?.value)
    }
}

/// `∫_{R^d} f dMA`.
pub fn integrate_ma<F: Fn(&[f64]) -> f64>(m: &MetricModel, f: F, opts: &QuadratureOptions) -> Result<f64> {
    MAMeasure::new(m)?.integrate(f, opts)
}

/// `‖χ^e‖²_{L²}` at level `l`, stored as a logarithm.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct L2Norm {
    pub log_value: f64,
    /// `true` when the integral did not converge and `log_value` is the
    /// analytic bound `−2l·ǧ(e/l)`.
    pub upper_bound: bool,
}

impl L2Norm {
    pub fn value(&self) -> f64 {
        self.log_value.exp()
    }
}

/// Evaluator for many monomial norms of one model.
pub struct L2Evaluator<'a> {
    measure: MAMeasure<'a>,
    solver: ConjugateSolver<'a>,
    opts: QuadratureOptions,
}

impl<'a> L2Evaluator<'a> {
    pub fn new(m: &'a MetricModel, opts: &QuadratureOptions) -> Result<Self> {
        Ok(Self { measure: MAMeasure::new(m)?, solver: ConjugateSolver::new(m, opts.conjugate), opts: *opts })
    }

    pub fn solver(&self) -> &ConjugateSolver<'a> {
        &self.solver
    }

    /// `∫ exp(−2l(⟨x, u⟩ − g(u))) dMA` for `x ∈ Δ`, i.e. `a_e` with `e = l·x`.
    pub fn norm_at(&self, x: &RationalPoint, l: u32) -> Result<L2Norm> {
        let conj = self.solver.eval(x)?;
        let m = self.measure.model();
        let center = match &conj.minimizer {
            Minimizer::Finite(u) => u.clone(),
            Minimizer::AtInfinity { finite_part, .. } => finite_part.clone(),
        };
        let lf = l as f64;
        let curvature = m
            .value_gradient_neg_hessian(&center)
            .map(|(_, _, h)| h.symmetric_eigen().eigenvalues.max())
            .unwrap_or(1.0);
        let scale = (1.0 / (2.0 * lf * curvature.max(1e-12)).sqrt()).clamp(1e-4, 1.0);
        let xf = x.to_f64();
        let cv = conj.value;
        let integrand = |u: &[f64]| {
            let (g, _, h) = m.value_gradient_neg_hessian(u).expect("smooth model");
            let gap = (dot(&xf, u) - g - cv).max(0.0);
            (-2.0 * lf * gap).exp() * h.determinant() * self.measure.inv_volume
        };
        match integrate_rd(&integrand, &center, scale, &self.opts) {
            Ok(e) => Ok(L2Norm { log_value: -2.0 * lf * cv + e.value.ln(), upper_bound: false }),
            Err(Error::NoConvergence(_)) => Ok(L2Norm { log_value: -2.0 * lf * cv, upper_bound: true }),
            Err(e) => Err(e),
        }
    }

    pub fn norm(&self, e: &LatticePoint, l: u32) -> Result<L2Norm> {
        self.norm_at(&e.scaled_down(l), l)
    }
}

/// `a_e = ∫ exp(−2(⟨e, u⟩ − l·g(u))) dMA` for `e ∈ lΔ`.
pub fn l2_norm_squared_monomial(m: &MetricModel, e: &LatticePoint, l: u32, opts: &QuadratureOptions) -> Result<L2Norm> {
    L2Evaluator::new(m, opts)?.norm(e, l)
}

/// `⟨χ^e, χ^{e'}⟩` including the angular integral over the compact torus,
/// evaluated with an `angular_points`-point trapezoid rule per circle.
pub fn l2_inner_product(
    m: &MetricModel,
    e: &LatticePoint,
    e2: &LatticePoint,
    l: u32,
    angular_points: usize,
    opts: &QuadratureOptions,
) -> Result<Complex64> {
    if e.dim() != e2.dim() {
        return Err(Error::DimensionMismatch { expected: e.dim(), found: e2.dim() });
    }
    let mut angular = Complex64::new(1.0, 0.0);
    for (a, b) in e.coords().iter().zip(e2.coords()) {
        let k = (a - b) as f64;
        let n = angular_points as f64;
        let s: Complex64 = (0..angular_points)
            .map(|j| Complex64::from_polar(1.0, k * std::f64::consts::TAU * j as f64 / n))
            .sum();
        angular *= s / n;
    }
    let sum: Vec<i64> = e.coords().iter().zip(e2.coords()).map(|(a, b)| a + b).collect();
    let midpoint = LatticePoint::new(sum).scaled_down(2 * l);
    let radial = L2Evaluator::new(m, opts)?.norm_at(&midpoint, l)?;
    Ok(angular * radial.value())
}

/// `(d+1)! ∫_Δ max(ǧ, 0) dx` with its error estimate.
pub fn volume_integral_estimate(m: &MetricModel, opts: &QuadratureOptions) -> Result<Estimate> {
    let d = m.dim();
    let factorial: f64 = (1..=d + 1).map(|k| k as f64).product();
    let poly = m.polytope();
    if !poly.is_full_dimensional() {
        return Ok(Estimate { value: 0.0, error: 0.0, evaluations: 0, cells: 0, converged: true });
    }
    let solver = ConjugateSolver::new(m, opts.conjugate);
    if let Some(c) = solver.constant_value() {
        let value = factorial * c.max(0.0) * to_f64(&poly.volume()?);
        return Ok(Estimate { value, error: 0.0, evaluations: 0, cells: 0, converged: true });
    }
    let simplices: Vec<Simplex> = poly
        .triangulate()?
        .iter()
        .map(|s| Simplex::new(s.iter().map(|v| v.to_f64()).collect()))
        .collect();
    let f = |x: &[f64]| solver.eval_interior(x).map(|v| v.value);
    let cells = opts.max_subdivisions.max(simplices.len());
    let e = integrate_simplices(simplices, &f, true, opts.tolerance, opts.tolerance * 1e-3, cells)?;
    Ok(Estimate { value: factorial * e.value, error: factorial * e.error, ..e })
}

/// `(d+1)! ∫_Δ max(ǧ, 0) dx`.
pub fn volume_integral(m: &MetricModel, opts: &QuadratureOptions) -> Result<f64> {
    let e = volume_integral_estimate(m, opts)?;
    if !e.converged {
        return Err(Error::NoConvergence(format!(
            "volume cubature stopped at {} cells with error estimate {:.3e}",
            e.cells, e.error
        )));
    }
    Ok(e.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{Fan, TorusDivisor};
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn beta(e: i64, l: i64) -> f64 {
        let f = |n: i64| (1..=n).map(|k| k as f64).product::<f64>();
        f(e) * f(l - e) / f(l + 1)
    }

    #[test]
    fn mass_is_one() {
        let opts = QuadratureOptions::default();
        for m in [MetricModel::fubini_study(1), MetricModel::fubini_study(2), MetricModel::fubini_study(1).sharpened(4.0).unwrap()] {
            let mass = integrate_ma(&m, |_| 1.0, &opts).unwrap();
            assert_abs_diff_eq!(mass, 1.0, epsilon = 1e-7);
        }
    }

    #[test]
    fn ma_examples() {
        let fs = MetricModel::fubini_study(1);
        let opts = QuadratureOptions::default();
        let v = integrate_ma(&fs, |u| (2.0 * fs.value(u)).exp(), &opts).unwrap();
        assert_relative_eq!(v, 0.5, max_relative = 1e-8);
        let bary = integrate_ma(&fs, |u| fs.gradient(u)[0], &opts).unwrap();
        assert_relative_eq!(bary, 0.5, max_relative = 1e-8);
    }

    #[test]
    fn monomial_norms_match_beta_integrals() {
        let fs = MetricModel::fubini_study(1);
        let opts = QuadratureOptions::default();
        for l in [1, 2, 5, 10] {
            for e in 0..=l {
                let a = l2_norm_squared_monomial(&fs, &LatticePoint::new(vec![e]), l as u32, &opts).unwrap();
                assert!(!a.upper_bound);
                assert_relative_eq!(a.value(), beta(e, l), max_relative = 1e-7);
            }
        }
    }

    #[test]
    fn canonical_has_no_l2_structure() {
        let div = TorusDivisor::new(Fan::projective_space(1), vec![0, 1]).unwrap();
        let can = MetricModel::canonical(&div).unwrap();
        let r = l2_norm_squared_monomial(&can, &LatticePoint::new(vec![0]), 1, &QuadratureOptions::default());
        assert_eq!(r, Err(Error::NotSmooth));
    }

    #[test]
    fn cross_products_vanish() {
        let fs = MetricModel::fubini_study(1);
        let v = l2_inner_product(&fs, &LatticePoint::new(vec![0]), &LatticePoint::new(vec![2]), 2, 64, &QuadratureOptions::default()).unwrap();
        assert!(v.norm() <= 1e-12);
        let d = l2_inner_product(&fs, &LatticePoint::new(vec![1]), &LatticePoint::new(vec![1]), 2, 64, &QuadratureOptions::default()).unwrap();
        assert_relative_eq!(d.re, 1.0 / 6.0, max_relative = 1e-7);
    }

    #[test]
    fn volume_examples() {
        let opts = QuadratureOptions::default();
        let v1 = volume_integral(&MetricModel::fubini_study(1), &opts).unwrap();
        assert_abs_diff_eq!(v1, 0.5, epsilon = 1e-6);
        let div = TorusDivisor::new(Fan::projective_space(2), vec![0, 0, 1]).unwrap();
        assert_eq!(volume_integral(&MetricModel::canonical(&div).unwrap(), &opts).unwrap(), 0.0);
        let lifted = MetricModel::canonical(&div).unwrap().scaled(0.25);
        assert_abs_diff_eq!(volume_integral(&lifted, &opts).unwrap(), 6.0 * 0.25 * 0.5, epsilon = 1e-15);
    }

    #[test]
    fn volume_p2() {
        let v = volume_integral(&MetricModel::fubini_study(2), &QuadratureOptions::default()).unwrap();
        assert_abs_diff_eq!(v, 1.25, epsilon = 1e-5);
    }
}
