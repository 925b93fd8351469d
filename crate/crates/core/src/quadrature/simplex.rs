//! Adaptive cubature on simplices: collapsed-coordinate Gauss products with
//! longest-edge bisection.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rayon::prelude::*;

use super::gauss::{compensated_sum, gauss_legendre};
use super::Estimate;
use crate::error::Result;

fn simplex_orders(dim: usize) -> (usize, usize) {
    if dim <= 2 {
        (12, 6)
    } else {
        (8, 4)
    }
}

/// Simplex with vertices in floating point; `volume` is its Lebesgue measure.
#[derive(Clone, Debug)]
pub struct Simplex {
    pub vertices: Vec<Vec<f64>>,
    pub volume: f64,
}

impl Simplex {
    pub fn new(vertices: Vec<Vec<f64>>) -> Self {
        let d = vertices.len() - 1;
        let m = nalgebra::DMatrix::from_fn(d, d, |r, c| vertices[r + 1][c] - vertices[0][c]);
        let factorial: f64 = (1..=d).map(|k| k as f64).product();
        let volume = if d == 0 { 1.0 } else { m.determinant().abs() / factorial };
        Self { vertices, volume }
    }

    fn dim(&self) -> usize {
        self.vertices.len() - 1
    }

    /// Nodes and weights of the `order^d` collapsed Gauss product rule.
    fn rule(&self, order: usize) -> Vec<(Vec<f64>, f64)> {
        let d = self.dim();
        let g = gauss_legendre(order);
        let factorial: f64 = (1..=d).map(|k| k as f64).product();
        let mut out = Vec::with_capacity(order.pow(d as u32));
        let mut index = vec![0usize; d];
        loop {
            let mut point = self.vertices[0].clone();
            let mut weight = factorial * self.volume;
            let mut prod = 1.0;
            for k in 0..d {
                let xi = 0.5 * (1.0 + g.nodes[index[k]]);
                weight *= 0.5 * g.weights[index[k]] * xi.powi((d - 1 - k) as i32);
                prod *= xi;
                for (p, (a, b)) in point.iter_mut().zip(self.vertices[k + 1].iter().zip(&self.vertices[k])) {
                    *p += prod * (a - b);
                }
            }
            out.push((point, weight));
            let mut k = 0;
            loop {
                if k == d {
                    return out;
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

    fn bisect(&self) -> (Simplex, Simplex) {
        let n = self.vertices.len();
        let mut best = (0, 1, -1.0);
        for i in 0..n {
            for j in i + 1..n {
                let len: f64 = self.vertices[i].iter().zip(&self.vertices[j]).map(|(a, b)| (a - b) * (a - b)).sum();
                if len > best.2 {
                    best = (i, j, len);
                }
            }
        }
        let (i, j, _) = best;
        let mid: Vec<f64> = self.vertices[i].iter().zip(&self.vertices[j]).map(|(a, b)| 0.5 * (a + b)).collect();
        let mut left = self.vertices.clone();
        let mut right = self.vertices.clone();
        left[j] = mid.clone();
        right[i] = mid;
        let half = 0.5 * self.volume;
        (Simplex { vertices: left, volume: half }, Simplex { vertices: right, volume: half })
    }
}

struct Cell {
    simplex: Simplex,
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

fn evaluate<F>(f: &F, simplex: Simplex, positive_part: bool, evaluations: &mut usize) -> Result<Cell>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    let (high, low) = simplex_orders(simplex.dim());
    let mut nodes = simplex.rule(high);
    let coarse = simplex.rule(low);
    let split = nodes.len();
    nodes.extend(coarse);
    *evaluations += nodes.len();
    let raw: Vec<f64> = if nodes.len() > 64 {
        nodes.par_iter().map(|(p, _)| f(p)).collect::<Result<_>>()?
    } else {
        nodes.iter().map(|(p, _)| f(p)).collect::<Result<_>>()?
    };
    let transform = |v: f64| if positive_part { v.max(0.0) } else { v };
    let value = compensated_sum(raw[..split].iter().zip(&nodes[..split]).map(|(v, (_, w))| w * transform(*v)));
    let coarse = compensated_sum(raw[split..].iter().zip(&nodes[split..]).map(|(v, (_, w))| w * transform(*v)));
    let mut error = (value - coarse).abs();
    if positive_part && raw.iter().any(|&v| v > 0.0) && raw.iter().any(|&v| v < 0.0) {
        error = error.max(0.01 * value.abs());
    }
    Ok(Cell { simplex, value, error })
}

/// `∫ f` (or `∫ max(f, 0)` when `positive_part`) over the union of `simplices`.
pub fn integrate_simplices<F>(
    simplices: Vec<Simplex>,
    f: &F,
    positive_part: bool,
    rel_tol: f64,
    abs_tol: f64,
    max_cells: usize,
) -> Result<Estimate>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    let mut evaluations = 0;
    let mut heap = BinaryHeap::new();
    for s in simplices {
        heap.push(evaluate(f, s, positive_part, &mut evaluations)?);
    }
    loop {
        let value = compensated_sum(heap.iter().map(|c| c.value));
        let error = compensated_sum(heap.iter().map(|c| c.error));
        let converged = error <= abs_tol.max(rel_tol * value.abs());
        if converged || heap.len() >= max_cells {
            let mut cells = heap.into_vec();
            cells.sort_by(|a, b| a.simplex.vertices.partial_cmp(&b.simplex.vertices).unwrap_or(Ordering::Equal));
            return Ok(Estimate {
                value: compensated_sum(cells.iter().map(|c| c.value)),
                error: compensated_sum(cells.iter().map(|c| c.error)),
                evaluations,
                cells: cells.len(),
                converged,
            });
        }
        let batch = (heap.len() / 8).max(1);
        for _ in 0..batch {
            let Some(worst) = heap.pop() else { break };
            let (a, b) = worst.simplex.bisect();
            heap.push(evaluate(f, a, positive_part, &mut evaluations)?);
            heap.push(evaluate(f, b, positive_part, &mut evaluations)?);
        }
    }
}
