//! Exact rational linear algebra on small dense matrices.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::point::{q, Rational};

/// Reduced row echelon form. Returns the reduced rows and pivot columns.
pub(crate) fn rref(rows: &[Vec<Rational>], ncols: usize) -> (Vec<Vec<Rational>>, Vec<usize>) {
    let mut m: Vec<Vec<Rational>> = rows.to_vec();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == m.len() {
            break;
        }
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for v in m[r].iter_mut() {
            *v *= &inv;
        }
        for i in 0..m.len() {
            if i != r && !m[i][c].is_zero() {
                let factor = m[i][c].clone();
                for j in 0..m[i].len() {
                    let delta = &factor * &m[r][j];
                    m[i][j] -= delta;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    m.truncate(r);
    (m, pivots)
}

pub(crate) fn rank(rows: &[Vec<Rational>], ncols: usize) -> usize {
    rref(rows, ncols).1.len()
}

/// Basis of `{x : rows · x = 0}`.
pub(crate) fn nullspace(rows: &[Vec<Rational>], ncols: usize) -> Vec<Vec<Rational>> {
    let (reduced, pivots) = rref(rows, ncols);
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Rational::zero(); ncols];
            v[f] = Rational::one();
            for (row, &p) in reduced.iter().zip(&pivots) {
                v[p] = -row[f].clone();
            }
            v
        })
        .collect()
}

/// A particular solution of `a · x = b` (free variables set to zero), or `None` if inconsistent.
pub(crate) fn solve(a: &[Vec<Rational>], b: &[Rational], ncols: usize) -> Option<Vec<Rational>> {
    let augmented: Vec<Vec<Rational>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();
    let (reduced, pivots) = rref(&augmented, ncols + 1);
    if pivots.last() == Some(&ncols) {
        return None;
    }
    let mut x = vec![Rational::zero(); ncols];
    for (row, &p) in reduced.iter().zip(&pivots) {
        x[p] = row[ncols].clone();
    }
    Some(x)
}

/// Unique solution of a square or overdetermined system with full column rank.
pub(crate) fn solve_unique(a: &[Vec<Rational>], b: &[Rational], ncols: usize) -> Option<Vec<Rational>> {
    if rank(a, ncols) != ncols {
        return None;
    }
    solve(a, b, ncols)
}

pub(crate) fn determinant(rows: &[Vec<Rational>]) -> Rational {
    let n = rows.len();
    let mut m = rows.to_vec();
    let mut det = Rational::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !m[i][c].is_zero()) else {
            return Rational::zero();
        };
        if p != c {
            m.swap(p, c);
            det = -det;
        }
        det *= &m[c][c];
        for i in c + 1..n {
            if !m[i][c].is_zero() {
                let factor = &m[i][c] / &m[c][c];
                for j in c..n {
                    let delta = &factor * &m[c][j];
                    m[i][j] -= delta;
                }
            }
        }
    }
    det
}

pub(crate) fn int_rows(rows: &[Vec<i64>]) -> Vec<Vec<Rational>> {
    rows.iter().map(|r| r.iter().map(|&x| q(x)).collect()).collect()
}

/// Integer determinant of a square integer matrix.
pub(crate) fn int_determinant(rows: &[Vec<i64>]) -> i64 {
    determinant(&int_rows(rows))
        .to_integer()
        .to_i64()
        .expect("determinant fits in i64")
}

/// Scales a nonzero rational vector to the primitive integer vector on the same ray.
pub(crate) fn primitive_integer(v: &[Rational]) -> Vec<i64> {
    let lcm = v
        .iter()
        .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let ints: Vec<BigInt> = v.iter().map(|x| (x * Rational::from_integer(lcm.clone())).to_integer()).collect();
    let gcd = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    ints.iter()
        .map(|x| {
            let y = if gcd.is_zero() { x.clone() } else { x / &gcd };
            y.to_i64().expect("primitive vector fits in i64")
        })
        .collect()
}

pub(crate) fn gcd_of(v: &[i64]) -> i64 {
    v.iter().fold(0i64, |acc, &x| acc.gcd(&x)).abs()
}

pub(crate) fn is_all_nonnegative(v: &[Rational]) -> bool {
    v.iter().all(|x| !x.is_negative())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qs(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&x| q(x)).collect()
    }

    #[test]
    fn nullspace_of_a_plane() {
        let rows = vec![qs(&[1, 1, 1])];
        let ns = nullspace(&rows, 3);
        assert_eq!(ns.len(), 2);
        for v in ns {
            let s: Rational = v.iter().cloned().sum();
            assert!(s.is_zero());
        }
    }

    #[test]
    fn solve_detects_inconsistency() {
        let a = vec![qs(&[1, 1]), qs(&[2, 2])];
        assert!(solve(&a, &qs(&[1, 3]), 2).is_none());
        assert_eq!(solve(&a, &qs(&[1, 2]), 2).unwrap(), qs(&[1, 0]));
        assert!(solve_unique(&a, &qs(&[1, 2]), 2).is_none());
    }

    #[test]
    fn determinants() {
        assert_eq!(int_determinant(&[vec![1, 0], vec![1, 2]]), 2);
        assert_eq!(int_determinant(&[vec![0, 1], vec![1, 0]]), -1);
        assert_eq!(int_determinant(&[vec![1, 2], vec![2, 4]]), 0);
    }

    #[test]
    fn primitive_vectors() {
        let v = vec![Rational::new(2.into(), 3.into()), Rational::new((-4).into(), 3.into())];
        assert_eq!(primitive_integer(&v), vec![1, -2]);
        assert_eq!(gcd_of(&[4, -6]), 2);
    }
}
