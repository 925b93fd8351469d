//! Adaptive tensor Gauss–Legendre cubature on boxes and on `R^d`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::gauss::{compensated_sum, gauss_legendre};
use super::{Estimate, QuadratureOptions};
use crate::error::{Error, Result};

/// (high, low) Gauss orders per axis.
pub(crate) fn box_orders(dim: usize) -> (usize, usize) {
    if dim <= 2 {
        (16, 8)
    } else {
        (8, 4)
    }
}

struct Cell {
    lo: Vec<f64>,
    hi: Vec<f64>,
    value: f64,
    error: f64,
}

impl PartialEq for Cell {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}
impl Eq for Cell {}
impl PartialOrd for Cell {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Cell {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn tensor_rule<F: Fn(&[f64]) -> f64>(f: &F, lo: &[f64], hi: &[f64], order: usize, evaluations: &mut usize) -> f64 {
    let d = lo.len();
    let rule = gauss_legendre(order);
    let half: Vec<f64> = lo.iter().zip(hi).map(|(a, b)| 0.5 * (b - a)).collect();
    let mid: Vec<f64> = lo.iter().zip(hi).map(|(a, b)| 0.5 * (a + b)).collect();
    let jac: f64 = half.iter().product();
    let mut index = vec![0usize; d];
    let mut point = vec![0.0; d];
    let mut total = 0.0;
    loop {
        let mut w = jac;
        for k in 0..d {
            point[k] = mid[k] + half[k] * rule.nodes[index[k]];
            w *= rule.weights[index[k]];
        }
        total += w * f(&point);
        *evaluations += 1;
        let mut k = 0;
        loop {
            if k == d {
                return total;
            }
            index[k] += 1;
            if index[k] < order {
                break;
            }
            index[k] = 0;
            k += 1;
        }
    }
}

fn evaluate_cell<F: Fn(&[f64]) -> f64>(f: &F, lo: Vec<f64>, hi: Vec<f64>, evaluations: &mut usize) -> Result<Cell> {
    let (high, low) = box_orders(lo.len());
    let value = tensor_rule(f, &lo, &hi, high, evaluations);
    let coarse = tensor_rule(f, &lo, &hi, low, evaluations);
    if !value.is_finite() || !coarse.is_finite() {
        return Err(Error::NoConvergence(format!("non-finite integrand on cell {lo:?}..{hi:?}")));
    }
    Ok(Cell { lo, hi, value, error: (value - coarse).abs() })
}

fn split<F: Fn(&[f64]) -> f64>(f: &F, cell: &Cell, evaluations: &mut usize) -> Result<Vec<Cell>> {
    let d = cell.lo.len();
    let mid: Vec<f64> = cell.lo.iter().zip(&cell.hi).map(|(a, b)| 0.5 * (a + b)).collect();
    (0..1usize << d)
        .map(|mask| {
            let mut lo = vec![0.0; d];
            let mut hi = vec![0.0; d];
            for k in 0..d {
                if mask >> k & 1 == 0 {
                    lo[k] = cell.lo[k];
                    hi[k] = mid[k];
                } else {
                    lo[k] = mid[k];
                    hi[k] = cell.hi[k];
                }
            }
            evaluate_cell(f, lo, hi, evaluations)
        })
        .collect()
}

/// Global adaptive integration over the union of `boxes` until the summed
/// error estimate is at most `abs_tol.max(rel_tol · |value|)`.
pub(crate) fn adaptive_boxes<F: Fn(&[f64]) -> f64>(
    f: &F,
    boxes: Vec<(Vec<f64>, Vec<f64>)>,
    rel_tol: f64,
    abs_tol: f64,
    max_cells: usize,
) -> Result<Estimate> {
    let mut evaluations = 0;
    let mut heap = BinaryHeap::new();
    for (lo, hi) in boxes {
        heap.push(evaluate_cell(f, lo, hi, &mut evaluations)?);
    }
    let mut converged = false;
    loop {
        let value = compensated_sum(heap.iter().map(|c| c.value));
        let error = compensated_sum(heap.iter().map(|c| c.error));
        if error <= abs_tol.max(rel_tol * value.abs()) {
            converged = true;
        }
        if converged || heap.len() >= max_cells {
            let mut cells: Vec<Cell> = heap.into_vec();
            cells.sort_by(|a, b| a.lo.partial_cmp(&b.lo).unwrap_or(Ordering::Equal));
            return Ok(Estimate {
                value: compensated_sum(cells.iter().map(|c| c.value)),
                error: compensated_sum(cells.iter().map(|c| c.error)),
                evaluations,
                cells: cells.len(),
                converged,
            });
        }
        // refine a batch of the worst cells before re-summing
        let batch = (heap.len() / 8).max(1);
        for _ in 0..batch {
            let Some(worst) = heap.pop() else { break };
            for child in split(f, &worst, &mut evaluations)? {
                heap.push(child);
            }
        }
    }
}

/// Breakpoints `c ± scale·2^k` up to `c ± radius`.
fn axis_breaks(center: f64, scale: f64, radius: f64) -> Vec<f64> {
    let mut offsets = vec![0.0];
    let mut s = scale.min(radius);
    while s < radius {
        offsets.push(s);
        s *= 2.0;
    }
    offsets.push(radius);
    let mut out: Vec<f64> = offsets.iter().rev().map(|o| center - o).collect();
    out.extend(offsets.iter().skip(1).map(|o| center + o));
    out
}

fn product_boxes(axes: &[Vec<f64>], skip: impl Fn(&[usize]) -> bool) -> Vec<(Vec<f64>, Vec<f64>)> {
    let d = axes.len();
    let mut out = Vec::new();
    if d == 0 {
        out.push((vec![], vec![]));
        return out;
    }
    let mut index = vec![0usize; d];
    loop {
        if !skip(&index) {
            let lo = (0..d).map(|k| axes[k][index[k]]).collect();
            let hi = (0..d).map(|k| axes[k][index[k] + 1]).collect();
            out.push((lo, hi));
        }
        let mut k = 0;
        loop {
            if k == d {
                return out;
            }
            index[k] += 1;
            if index[k] + 1 < axes[k].len() {
                break;
            }
            index[k] = 0;
            k += 1;
        }
    }
}

/// `∫_{R^d} f` over expanding boxes `‖u − center‖_∞ ≤ R`, `R` doubling until
/// the shell increment is below tolerance. `scale` sets the finest initial
/// cell width near `center`.
pub fn integrate_rd<F: Fn(&[f64]) -> f64>(f: &F, center: &[f64], scale: f64, opts: &QuadratureOptions) -> Result<Estimate> {
    let d = center.len();
    if d == 0 {
        return Ok(Estimate { value: f(&[]), error: 0.0, evaluations: 1, cells: 1, converged: true });
    }
    let mut radius = opts.initial_radius;
    let axes: Vec<Vec<f64>> = center.iter().map(|&c| axis_breaks(c, scale, radius)).collect();
    let inner = adaptive_boxes(f, product_boxes(&axes, |_| false), opts.tolerance, 0.0, opts.max_subdivisions)?;
    if !inner.converged {
        return Err(Error::NoConvergence(format!("cubature cell budget exhausted on the inner box of radius {radius}")));
    }
    let mut total = inner;
    while radius < opts.max_radius {
        let outer = 2.0 * radius;
        let axes: Vec<Vec<f64>> = center.iter().map(|&c| vec![c - outer, c - radius, c + radius, c + outer]).collect();
        let shell = adaptive_boxes(
            f,
            product_boxes(&axes, |idx| idx.iter().all(|&i| i == 1)),
            0.0,
            0.1 * opts.tolerance * total.value.abs(),
            opts.max_subdivisions,
        )?;
        total.value += shell.value;
        total.error += shell.error;
        total.evaluations += shell.evaluations;
        total.cells += shell.cells;
        radius = outer;
        if shell.value.abs() <= opts.tolerance * total.value.abs() {
            return Ok(total);
        }
    }
    Err(Error::NoConvergence(format!(
        "truncation increments did not decay up to radius {radius} (partial value {:.6e})",
        total.value
    )))
}
