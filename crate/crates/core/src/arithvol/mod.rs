//! Positivity, arithmetic volumes and the experiments built on them.

mod polynomial;

pub use polynomial::{
    mahler_measure, parseval_check, small_polynomial_search, torus_sup, IntPolynomial, MahlerOptions, ParsevalReport,
    SmallPolynomial,
};

use crate::conjugate::{conjugate_max, ConjugateSolver};
use crate::error::{Error, Result};
use crate::lattice::{LatticePoint, RationalPoint};
use crate::metric::MetricModel;
use crate::quadrature::{volume_integral, QuadratureOptions};
use crate::sections::{build_section_space, count_section_space};

pub const POSITIVITY_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct PositivityReport {
    pub ample: bool,
    pub nef: bool,
    pub big: bool,
    /// `ǧ(e)` for every lattice point `e` of `Δ`.
    pub witnesses: Vec<(LatticePoint, f64)>,
    pub g_at_origin: f64,
    /// Largest conjugate value found on a grid of `Δ` and at `∇g(0)`.
    pub conjugate_max: f64,
    /// `g(0) < 0` and `max ǧ > 0` give the same answer.
    pub bigness_agrees: bool,
    /// Some lattice value or `g(0)` lies within tolerance of zero.
    pub marginal: bool,
}

fn grid_level(dim: usize) -> u32 {
    match dim {
        0 | 1 => 64,
        2 => 16,
        _ => 6,
    }
}

/// Ample, nef and big from the conjugate at lattice points and the sign of `g(0)`.
pub fn classify_positivity(m: &MetricModel) -> Result<PositivityReport> {
    let tol = POSITIVITY_TOLERANCE;
    let solver = ConjugateSolver::new(m, Default::default());
    let points = m.polytope().lattice_points(1);
    if points.is_empty() {
        return Err(Error::InvalidArgument("the polytope has no lattice point".into()));
    }
    let witnesses: Vec<(LatticePoint, f64)> = points
        .into_iter()
        .map(|e| {
            let v = solver.eval(&e.to_rational())?.value;
            Ok((e, v))
        })
        .collect::<Result<_>>()?;
    let nef = witnesses.iter().all(|(_, v)| *v >= -tol);
    let ample = witnesses.iter().all(|(_, v)| *v > tol);
    let g0 = m.value(&vec![0.0; m.dim()]);
    let big = g0 < -tol;

    let n = grid_level(m.dim());
    let mut best = f64::NEG_INFINITY;
    for e in m.polytope().lattice_points(n) {
        best = best.max(solver.eval(&e.scaled_down(n))?.value);
    }
    if m.is_smooth() {
        let (_, argmax) = conjugate_max(m)?;
        if let Ok(v) = solver.eval_interior(&argmax) {
            best = best.max(v.value);
        }
    }
    let marginal = witnesses.iter().any(|(_, v)| v.abs() <= tol) || g0.abs() <= tol;
    Ok(PositivityReport {
        ample,
        nef,
        big,
        witnesses,
        g_at_origin: g0,
        conjugate_max: best,
        bigness_agrees: big == (best > tol),
        marginal,
    })
}

/// `(d+1)! ∫_Θ ǧ`.
pub fn arithmetic_volume(m: &MetricModel, opts: &QuadratureOptions) -> Result<f64> {
    volume_integral(m, opts)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceRow {
    pub level: u32,
    pub log_lower: f64,
    pub log_upper: f64,
    pub exact: Option<u128>,
    /// `(d+1)!·log_lower / l^{d+1}`.
    pub lower_estimate: f64,
    /// `(d+1)!·log_upper / l^{d+1}`.
    pub upper_estimate: f64,
    pub formula: f64,
    pub certified: bool,
}

/// Normalized logarithmic counts of small sections at each level, next to the volume formula.
pub fn volume_convergence_experiment(
    m: &MetricModel,
    levels: &[u32],
    budget: Option<u64>,
    opts: &QuadratureOptions,
) -> Result<Vec<ConvergenceRow>> {
    let formula = arithmetic_volume(m, opts)?;
    let d = m.dim() as i32;
    let factorial: f64 = (1..=d + 1).map(|k| k as f64).product();
    levels
        .iter()
        .map(|&l| {
            let space = build_section_space(m, l, opts)?;
            let count = count_section_space(&space, budget)?;
            let norm = factorial / (l as f64).powi(d + 1);
            Ok(ConvergenceRow {
                level: l,
                log_lower: count.log_lower,
                log_upper: count.log_upper,
                exact: count.exact,
                lower_estimate: norm * count.log_lower,
                upper_estimate: norm * count.log_upper,
                formula,
                certified: count.certified,
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct SequenceRow {
    pub k: u32,
    /// Sampled `sup |g_k − g|` over a box.
    pub distance: f64,
    pub volume: f64,
    pub limit_volume: f64,
}

/// Sample points of `[−radius, radius]^d`, `n` per axis.
pub fn sample_box(dim: usize, radius: f64, n: usize) -> Vec<Vec<f64>> {
    let axis: Vec<f64> = (0..n).map(|i| -radius + 2.0 * radius * i as f64 / (n - 1).max(1) as f64).collect();
    let mut out = vec![vec![]];
    for _ in 0..dim {
        out = out
            .into_iter()
            .flat_map(|p| {
                axis.iter().map(move |&x| {
                    let mut q = p.clone();
                    q.push(x);
                    q
                })
            })
            .collect();
    }
    out
}

/// Volumes along a metric sequence against the volume of its limit.
pub fn metric_sequence_experiment<F>(family: F, limit: &MetricModel, ks: &[u32], opts: &QuadratureOptions) -> Result<Vec<SequenceRow>>
where
    F: Fn(u32) -> Result<MetricModel>,
{
    let limit_volume = arithmetic_volume(limit, opts)?;
    let samples = sample_box(limit.dim(), 20.0, if limit.dim() <= 1 { 401 } else { 41 });
    ks.iter()
        .map(|&k| {
            let mk = family(k)?;
            if mk.polytope().vertices() != limit.polytope().vertices() {
                return Err(Error::DomainMismatch);
            }
            Ok(SequenceRow { k, distance: mk.sampled_distance(limit, &samples), volume: arithmetic_volume(&mk, opts)?, limit_volume })
        })
        .collect()
}

/// The sharpened Fubini–Study family `g_k = −(1/2k) log Σ e^{−2k⟨m, u⟩}` on the standard simplex.
pub fn sharpened_fubini_study(dim: usize, k: u32) -> Result<MetricModel> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be positive".into()));
    }
    MetricModel::fubini_study(dim).sharpened(k as f64)
}

/// `ǧ(x)` for an exact point, a convenience for table output.
pub fn conjugate_value(m: &MetricModel, x: &RationalPoint) -> Result<f64> {
    Ok(ConjugateSolver::new(m, Default::default()).eval(x)?.value)
}
