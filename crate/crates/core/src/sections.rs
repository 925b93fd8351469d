//! Monomial section spaces, small-section lattices and lattice-point
//! counts in diagonal ellipsoids.

use rayon::prelude::*;

use crate::conjugate::ConjugateSolver;
use crate::error::{Error, Result};
use crate::lattice::LatticePoint;
use crate::metric::MetricModel;
use crate::quadrature::{L2Evaluator, L2Norm, QuadratureOptions};

/// Tolerance for `ǧ(e/l) ≥ 0`.
pub const THETA_TOLERANCE: f64 = 1e-9;

/// Relative slack when flooring ellipsoid radii.
const FLOOR_SLACK: f64 = 1e-12;

pub const DEFAULT_BUDGET: u64 = 10_000_000;

#[derive(Clone, Debug, PartialEq)]
pub struct SectionSpace {
    pub level: u32,
    pub basis: Vec<LatticePoint>,
    /// `ǧ(e/l)` per basis element.
    pub conjugate: Vec<f64>,
    pub sup_norms: Vec<f64>,
    /// `a_e` per basis element; `None` for models without an `L²` structure.
    pub l2_diag: Option<Vec<L2Norm>>,
}

impl SectionSpace {
    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    /// `log ‖χ^e‖_sup = −l·ǧ(e/l)`.
    pub fn log_sup_norm(&self, i: usize) -> f64 {
        -(self.level as f64) * self.conjugate[i]
    }

    pub fn in_theta(&self, i: usize) -> bool {
        self.conjugate[i] >= -THETA_TOLERANCE
    }
}

/// Basis `lΔ ∩ Z^d` with sup norms and, for smooth full-dimensional models, `L²` norms.
pub fn build_section_space(m: &MetricModel, l: u32, opts: &QuadratureOptions) -> Result<SectionSpace> {
    if l == 0 {
        return Err(Error::InvalidArgument("level must be at least 1".into()));
    }
    let basis = m.polytope().lattice_points(l);
    let solver = ConjugateSolver::new(m, opts.conjugate);
    let conjugate: Vec<f64> =
        basis.par_iter().map(|e| solver.eval(&e.scaled_down(l)).map(|v| v.value)).collect::<Result<_>>()?;
    let sup_norms = conjugate.iter().map(|c| (-(l as f64) * c).exp()).collect();
    let l2_diag = if m.is_smooth() && m.polytope().is_full_dimensional() {
        let eval = L2Evaluator::new(m, opts)?;
        Some(basis.par_iter().map(|e| eval.norm(e, l)).collect::<Result<_>>()?)
    } else {
        None
    };
    Ok(SectionSpace { level: l, basis, conjugate, sup_norms, l2_diag })
}

/// `{e ∈ lΔ ∩ Z^d : ǧ(e/l) ≥ −tol}`, the monomials spanning the small sections.
pub fn small_section_lattice(m: &MetricModel, l: u32) -> Result<Vec<LatticePoint>> {
    if l == 0 {
        return Err(Error::InvalidArgument("level must be at least 1".into()));
    }
    let solver = ConjugateSolver::new(m, Default::default());
    let mut out = Vec::new();
    for e in m.polytope().lattice_points(l) {
        if solver.eval(&e.scaled_down(l))?.value >= -THETA_TOLERANCE {
            out.push(e);
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CountMethod {
    Exact,
    Bounds,
    /// Canonical metrics: small sections are `0` and `±χ^m`.
    SupNorm,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CountResult {
    pub exact: Option<u128>,
    pub log_lower: f64,
    pub log_upper: f64,
    pub method: CountMethod,
    /// `false` when some `a_e` was only known through an upper bound, making `log_upper` heuristic.
    pub certified: bool,
}

fn validate(diag: &[f64]) -> Result<()> {
    match diag.iter().find(|a| !(a.is_finite() && **a > 0.0)) {
        Some(a) => Err(Error::InvalidArgument(format!("ellipsoid coefficients must be positive and finite, got {a}"))),
        None => Ok(()),
    }
}

fn floor_radius(r: f64) -> f64 {
    (r * (1.0 + FLOOR_SLACK)).floor()
}

/// `Card{x ∈ Z^n : Σ a_i x_i² ≤ 1}` by depth-first enumeration.
pub fn count_ellipsoid_exact(diag: &[f64], budget: u64) -> Result<u128> {
    validate(diag)?;
    let mut a = diag.to_vec();
    a.sort_by(|x, y| y.total_cmp(x));
    let mut nodes = 0u64;
    let mut partial = 0u128;
    count_rec(&a, 1.0, &mut nodes, budget, &mut partial).map_err(|_| Error::BudgetExceeded { budget, partial })
}

struct OutOfBudget;

fn count_rec(a: &[f64], remaining: f64, nodes: &mut u64, budget: u64, partial: &mut u128) -> Result<u128, OutOfBudget> {
    *nodes += 1;
    if *nodes > budget {
        return Err(OutOfBudget);
    }
    let remaining = remaining.max(0.0);
    match a {
        [] => {
            *partial += 1;
            Ok(1)
        }
        [last] => {
            let c = 2 * floor_radius((remaining / last).sqrt()) as u128 + 1;
            *partial += c;
            Ok(c)
        }
        [first, rest @ ..] => {
            let k = floor_radius((remaining / first).sqrt()) as i64;
            let mut total = count_rec(rest, remaining, nodes, budget, partial)?;
            for x in 1..=k {
                let sub = count_rec(rest, remaining - first * (x * x) as f64, nodes, budget, partial)?;
                *partial += sub;
                total += 2 * sub;
            }
            Ok(total)
        }
    }
}

/// Box sandwich `(Σ log(2⌊1/√(n a_i)⌋+1), Σ log(2⌊1/√a_i⌋+1))`.
pub fn count_ellipsoid_bounds(diag: &[f64]) -> Result<(f64, f64)> {
    validate(diag)?;
    let logs: Vec<f64> = diag.iter().map(|a| a.ln()).collect();
    Ok(bounds_from_log(&logs))
}

fn radius_term(log_radius: f64) -> f64 {
    let r = floor_radius(log_radius.exp());
    (2.0 * r + 1.0).ln()
}

fn bounds_from_log(log_diag: &[f64]) -> (f64, f64) {
    let half_log_n = 0.5 * (log_diag.len() as f64).ln();
    let lower = log_diag.iter().map(|la| radius_term(-0.5 * la - half_log_n)).sum();
    let upper = log_diag.iter().map(|la| radius_term(-0.5 * la)).sum();
    (lower, upper)
}

/// Counts the ellipsoid `Σ a_e x_e² ≤ 1` built from the `L²` diagonal of `space`.
///
/// Entries known only through an upper bound contribute radius 0 to the
/// lower bound and the bound's radius to the upper one.
pub fn count_section_space(space: &SectionSpace, budget: Option<u64>) -> Result<CountResult> {
    let Some(diag) = &space.l2_diag else {
        let n = space.sup_norms.iter().filter(|&&s| s <= 1.0 + THETA_TOLERANCE).count();
        let small = space.sup_norms.iter().all(|&s| s >= 1.0 - THETA_TOLERANCE);
        if !small {
            return Err(Error::Unsupported("sup-norm counting requires all monomial norms ≥ 1".into()));
        }
        let exact = 2 * n as u128 + 1;
        let log = (exact as f64).ln();
        return Ok(CountResult { exact: Some(exact), log_lower: log, log_upper: log, method: CountMethod::SupNorm, certified: true });
    };
    let half_log_n = 0.5 * (diag.len() as f64).ln();
    let mut lower = 0.0;
    let mut upper = 0.0;
    let mut certified = true;
    for a in diag {
        upper += radius_term(-0.5 * a.log_value);
        if a.upper_bound {
            certified = false;
        } else {
            lower += radius_term(-0.5 * a.log_value - half_log_n);
        }
    }
    let exact = match budget {
        Some(b) if certified => {
            let values: Vec<f64> = diag.iter().map(|a| a.value()).collect();
            if values.iter().all(|v| v.is_finite() && *v > 0.0) {
                match count_ellipsoid_exact(&values, b) {
                    Ok(c) => Some(c),
                    Err(Error::BudgetExceeded { .. }) => None,
                    Err(e) => return Err(e),
                }
            } else {
                None
            }
        }
        _ => None,
    };
    let method = if exact.is_some() { CountMethod::Exact } else { CountMethod::Bounds };
    Ok(CountResult { exact, log_lower: lower, log_upper: upper, method, certified })
}

#[derive(Clone, Debug, PartialEq)]
pub struct GromovRow {
    pub level: u32,
    /// `max_e ‖χ^e‖_sup / ‖χ^e‖_{L²}`.
    pub max_ratio: f64,
    pub argmax: LatticePoint,
    pub ratio_over_sqrt_level: f64,
}

/// Sup-to-`L²` ratios for `l = 1..=l_max`, maximized over basis monomials with a computed norm.
pub fn gromov_ratio_table(m: &MetricModel, l_max: u32, opts: &QuadratureOptions) -> Result<Vec<GromovRow>> {
    if !m.is_smooth() {
        return Err(Error::NotSmooth);
    }
    (1..=l_max)
        .map(|l| {
            let space = build_section_space(m, l, opts)?;
            let diag = space.l2_diag.as_ref().ok_or(Error::NotSmooth)?;
            let mut best: Option<(f64, usize)> = None;
            for (i, a) in diag.iter().enumerate() {
                if a.upper_bound {
                    continue;
                }
                let log_ratio = space.log_sup_norm(i) - 0.5 * a.log_value;
                if best.is_none_or(|(b, _)| log_ratio > b) {
                    best = Some((log_ratio, i));
                }
            }
            let (log_ratio, i) = best.ok_or_else(|| Error::NoConvergence(format!("no L² norm converged at level {l}")))?;
            let max_ratio = log_ratio.exp();
            Ok(GromovRow { level: l, max_ratio, argmax: space.basis[i].clone(), ratio_over_sqrt_level: max_ratio / (l as f64).sqrt() })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{Fan, TorusDivisor};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn brute_count(diag: &[f64]) -> u128 {
        let radii: Vec<i64> = diag.iter().map(|a| (1.0 / a.sqrt()).floor() as i64 + 1).collect();
        let mut count = 0;
        let mut x: Vec<i64> = radii.iter().map(|r| -r).collect();
        loop {
            let q: f64 = diag.iter().zip(&x).map(|(a, v)| a * (v * v) as f64).sum();
            if q <= 1.0 + 1e-12 {
                count += 1;
            }
            let mut k = 0;
            loop {
                if k == x.len() {
                    return count;
                }
                x[k] += 1;
                if x[k] <= radii[k] {
                    break;
                }
                x[k] = -radii[k];
                k += 1;
            }
        }
    }

    #[test]
    fn exact_count_examples() {
        assert_eq!(count_ellipsoid_exact(&[0.5, 0.5], DEFAULT_BUDGET).unwrap(), 9);
        assert_eq!(count_ellipsoid_exact(&[1.0], DEFAULT_BUDGET).unwrap(), 3);
        assert_eq!(count_ellipsoid_exact(&[4.0, 4.0], DEFAULT_BUDGET).unwrap(), 1);
        assert_eq!(count_ellipsoid_exact(&[], DEFAULT_BUDGET).unwrap(), 1);
        assert_eq!(count_ellipsoid_exact(&[0.01, 0.01], DEFAULT_BUDGET).unwrap(), 317);
        assert!(count_ellipsoid_exact(&[0.0], 10).is_err());
    }

    #[test]
    fn budget_reports_partial_count() {
        match count_ellipsoid_exact(&[1e-4; 4], 1000) {
            Err(Error::BudgetExceeded { budget, partial }) => {
                assert_eq!(budget, 1000);
                assert!(partial > 0);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn bound_examples() {
        let (lo, hi) = count_ellipsoid_bounds(&[0.5, 0.5]).unwrap();
        assert_relative_eq!(lo, 9f64.ln(), max_relative = 1e-15);
        assert_relative_eq!(hi, 9f64.ln(), max_relative = 1e-15);
        let (lo, hi) = count_ellipsoid_bounds(&[1.0]).unwrap();
        assert_eq!((lo, hi), (3f64.ln(), 3f64.ln()));
        let (lo, hi) = count_ellipsoid_bounds(&[1e-4, 1e-4]).unwrap();
        assert!((hi - lo - 2f64.ln()).abs() < 0.05);
    }

    #[test]
    fn section_space_examples() {
        let opts = QuadratureOptions::default();
        let fs = build_section_space(&MetricModel::fubini_study(1), 1, &opts).unwrap();
        assert_eq!(fs.basis, vec![LatticePoint::new(vec![0]), LatticePoint::new(vec![1])]);
        assert_eq!(fs.sup_norms, vec![1.0, 1.0]);
        for a in fs.l2_diag.as_ref().unwrap() {
            assert_relative_eq!(a.value(), 0.5, max_relative = 1e-8);
        }
        let count = count_section_space(&fs, Some(DEFAULT_BUDGET)).unwrap();
        assert_eq!(count.exact, Some(9));
        let div = TorusDivisor::new(Fan::projective_space(1), vec![0, 1]).unwrap();
        let can = build_section_space(&MetricModel::canonical(&div).unwrap(), 3, &opts).unwrap();
        assert_eq!(can.len(), 4);
        assert!(can.sup_norms.iter().all(|&s| s == 1.0));
        assert!(can.l2_diag.is_none());
        assert_eq!(count_section_space(&can, None).unwrap().exact, Some(9));
        let p2 = build_section_space(&MetricModel::fubini_study(2), 1, &opts).unwrap();
        assert_eq!(p2.len(), 3);
        assert!(p2.sup_norms.iter().all(|&s| (s - 1.0).abs() < 1e-15));
    }

    #[test]
    fn small_sections() {
        let fs = MetricModel::fubini_study(1);
        assert_eq!(small_section_lattice(&fs, 1).unwrap().len(), 2);
        assert!(small_section_lattice(&fs.scaled(-1.0), 1).unwrap().is_empty());
        assert!(small_section_lattice(&fs.scaled(-1.0), 7).unwrap().is_empty());
        let div = TorusDivisor::new(Fan::projective_space(2), vec![0, 0, 1]).unwrap();
        assert_eq!(small_section_lattice(&MetricModel::canonical(&div).unwrap(), 3).unwrap().len(), 10);
    }

    #[test]
    fn gromov_examples() {
        let rows = gromov_ratio_table(&MetricModel::fubini_study(1), 2, &QuadratureOptions::default()).unwrap();
        assert_relative_eq!(rows[0].max_ratio, 2f64.sqrt(), max_relative = 1e-7);
        // at l = 2 the endpoints give √3 and the middle 0.5·√6
        assert_relative_eq!(rows[1].max_ratio, 3f64.sqrt(), max_relative = 1e-7);
        let div = TorusDivisor::new(Fan::projective_space(1), vec![0, 1]).unwrap();
        assert_eq!(gromov_ratio_table(&MetricModel::canonical(&div).unwrap(), 2, &QuadratureOptions::default()), Err(Error::NotSmooth));
    }

    proptest! {
        #[test]
        fn exact_count_matches_brute_force(diag in prop::collection::vec(0.02f64..3.0, 1..4)) {
            prop_assert_eq!(count_ellipsoid_exact(&diag, DEFAULT_BUDGET).unwrap(), brute_count(&diag));
        }

        #[test]
        fn exact_count_within_bounds(diag in prop::collection::vec(0.001f64..2.0, 1..5)) {
            let c = count_ellipsoid_exact(&diag, DEFAULT_BUDGET).unwrap();
            let (lo, hi) = count_ellipsoid_bounds(&diag).unwrap();
            let lc = (c as f64).ln();
            prop_assert!(lo <= lc + 1e-12 && lc <= hi + 1e-12, "{} {} {}", lo, lc, hi);
        }

        #[test]
        fn count_is_order_independent(mut diag in prop::collection::vec(0.01f64..2.0, 1..4)) {
            let a = count_ellipsoid_exact(&diag, DEFAULT_BUDGET).unwrap();
            diag.reverse();
            prop_assert_eq!(a, count_ellipsoid_exact(&diag, DEFAULT_BUDGET).unwrap());
        }
    }
}
