//! Integer Laurent polynomials on the compact torus: Mahler measure,
//! Parseval mass and sampled sup norms.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quadrature::{adaptive_boxes, compensated_sum};

/// `Σ a_ν X^ν` with integer coefficients; zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntPolynomial {
    variables: Vec<String>,
    terms: BTreeMap<Vec<i64>, i64>,
}

impl IntPolynomial {
    pub fn new(variables: Vec<String>, terms: impl IntoIterator<Item = (Vec<i64>, i64)>) -> Result<Self> {
        let n = variables.len();
        let mut map = BTreeMap::new();
        for (exp, c) in terms {
            if exp.len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: exp.len() });
            }
            let entry = map.entry(exp).or_insert(0i64);
            *entry = entry.checked_add(c).ok_or_else(|| Error::InvalidArgument("coefficient overflow".into()))?;
        }
        map.retain(|_, c| *c != 0);
        Ok(Self { variables, terms: map })
    }

    /// One-variable polynomial `Σ coeffs[k] X^k`.
    pub fn univariate(coeffs: &[i64]) -> Self {
        Self::new(vec!["X".into()], coeffs.iter().enumerate().map(|(k, &c)| (vec![k as i64], c))).expect("one variable")
    }

    /// Parses expressions like `X + 2`, `2*X^3 - X*Y`, `-x1^2 + 3 x2`.
    /// Variables are `[A-Za-z][0-9]*`, ordered by name.
    pub fn parse(s: &str) -> Result<Self> {
        Parser::new(s).parse()
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    pub fn nvars(&self) -> usize {
        self.variables.len()
    }

    pub fn terms(&self) -> &BTreeMap<Vec<i64>, i64> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_monomial(&self) -> bool {
        self.terms.len() == 1
    }

    /// `P(e^{iθ})`.
    pub fn eval_torus(&self, theta: &[f64]) -> Complex64 {
        self.terms
            .iter()
            .map(|(exp, &c)| {
                let phase: f64 = exp.iter().zip(theta).map(|(&e, &t)| e as f64 * t).sum();
                Complex64::from_polar(c as f64, phase)
            })
            .sum()
    }
}

impl fmt::Display for IntPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (exp, &c)) in self.terms.iter().rev().enumerate() {
            let sign = if c < 0 { "-" } else if i > 0 { "+" } else { "" };
            if i > 0 {
                write!(f, " {sign} ")?;
            } else {
                write!(f, "{sign}")?;
            }
            let a = c.unsigned_abs();
            let factors: Vec<String> = exp
                .iter()
                .zip(&self.variables)
                .filter(|(e, _)| **e != 0)
                .map(|(&e, v)| if e == 1 { v.clone() } else { format!("{v}^{e}") })
                .collect();
            match (a, factors.is_empty()) {
                (_, true) => write!(f, "{a}")?,
                (1, false) => write!(f, "{}", factors.join("*"))?,
                _ => write!(f, "{a}*{}", factors.join("*"))?,
            }
        }
        Ok(())
    }
}

struct Parser<'a> {
    chars: std::iter::Peekable<std::str::CharIndices<'a>>,
    src: &'a str,
}

type RawTerm = (i64, Vec<(String, i64)>);

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        Self { chars: src.char_indices().peekable(), src }
    }

    fn skip_ws(&mut self) {
        while self.chars.peek().is_some_and(|(_, c)| c.is_whitespace()) {
            self.chars.next();
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.peek().map(|&(_, c)| c)
    }

    fn error(&self, msg: &str) -> Error {
        Error::Parse(format!("{msg} in polynomial {:?}", self.src))
    }

    fn integer(&mut self) -> Result<i64> {
        self.skip_ws();
        let mut s = String::new();
        while let Some(&(_, c)) = self.chars.peek() {
            if c.is_ascii_digit() {
                s.push(c);
                self.chars.next();
            } else {
                break;
            }
        }
        s.parse().map_err(|_| self.error("expected an integer"))
    }

    fn variable(&mut self) -> Result<String> {
        self.skip_ws();
        let mut s = String::new();
        match self.chars.peek() {
            Some(&(_, c)) if c.is_ascii_alphabetic() => {
                s.push(c);
                self.chars.next();
            }
            _ => return Err(self.error("expected a variable")),
        }
        while let Some(&(_, c)) = self.chars.peek() {
            if c.is_ascii_digit() {
                s.push(c);
                self.chars.next();
            } else {
                break;
            }
        }
        Ok(s)
    }

    fn factor(&mut self) -> Result<(String, i64)> {
        let v = self.variable()?;
        if self.peek() == Some('^') {
            self.chars.next();
            let negative = if self.peek() == Some('-') {
                self.chars.next();
                true
            } else {
                false
            };
            let e = self.integer()?;
            return Ok((v, if negative { -e } else { e }));
        }
        Ok((v, 1))
    }

    fn term(&mut self) -> Result<RawTerm> {
        let mut coeff = 1i64;
        let mut factors = Vec::new();
        let mut seen = false;
        loop {
            match self.peek() {
                Some(c) if c.is_ascii_digit() => {
                    coeff = coeff.checked_mul(self.integer()?).ok_or_else(|| self.error("coefficient overflow"))?;
                }
                Some(c) if c.is_ascii_alphabetic() => factors.push(self.factor()?),
                _ => break,
            }
            seen = true;
            if self.peek() == Some('*') {
                self.chars.next();
                if !matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric()) {
                    return Err(self.error("dangling '*'"));
                }
            }
        }
        if !seen {
            return Err(self.error("expected a term"));
        }
        Ok((coeff, factors))
    }

    fn parse(mut self) -> Result<IntPolynomial> {
        let mut raw = Vec::new();
        let mut sign = 1i64;
        if self.peek() == Some('-') {
            self.chars.next();
            sign = -1;
        } else if self.peek() == Some('+') {
            self.chars.next();
        }
        loop {
            let (c, f) = self.term()?;
            raw.push((sign * c, f));
            match self.peek() {
                None => break,
                Some('+') => sign = 1,
                Some('-') => sign = -1,
                Some(c) => return Err(self.error(&format!("unexpected {c:?}"))),
            }
            self.chars.next();
        }
        let mut names: Vec<String> = raw.iter().flat_map(|(_, f)| f.iter().map(|(v, _)| v.clone())).collect();
        names.sort();
        names.dedup();
        let terms: Vec<(Vec<i64>, i64)> = raw
            .into_iter()
            .map(|(c, factors)| {
                let mut exp = vec![0i64; names.len()];
                for (v, e) in factors {
                    exp[names.binary_search(&v).expect("collected")] += e;
                }
                (exp, c)
            })
            .collect();
        IntPolynomial::new(names, terms)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MahlerOptions {
    pub tolerance: f64,
    /// Cell budget of the singular fallback.
    pub max_points: usize,
}

impl Default for MahlerOptions {
    fn default() -> Self {
        Self { tolerance: 1e-7, max_points: 50_000 }
    }
}

/// Midpoint trapezoid average of `f` over `n^d` torus points.
fn torus_average<F: Fn(&[f64]) -> f64>(f: &F, d: usize, n: usize) -> f64 {
    let h = std::f64::consts::TAU / n as f64;
    let mut index = vec![0usize; d];
    let mut theta = vec![0.0; d];
    let mut values = Vec::with_capacity(n.pow(d as u32));
    loop {
        for k in 0..d {
            theta[k] = (index[k] as f64 + 0.5) * h;
        }
        values.push(f(&theta));
        let mut k = 0;
        loop {
            if k == d {
                return compensated_sum(values) / (n as f64).powi(d as i32);
            }
            index[k] += 1;
            if index[k] < n {
                break;
            }
            index[k] = 0;
            k += 1;
        }
    }
}

/// Jensen's formula for `P` as a polynomial in its last variable, the others
/// fixed at `theta`: `log |c_top| + Σ log max(1, |α|)`.
fn slice_mahler(p: &IntPolynomial, theta: &[f64]) -> f64 {
    let last = p.nvars() - 1;
    let low = p.terms().keys().map(|e| e[last]).min().expect("nonzero polynomial");
    let high = p.terms().keys().map(|e| e[last]).max().expect("nonzero polynomial");
    let mut c = vec![Complex64::new(0.0, 0.0); (high - low) as usize + 1];
    for (e, &a) in p.terms() {
        let phase: f64 = e[..last].iter().zip(theta).map(|(&k, &t)| k as f64 * t).sum();
        c[(e[last] - low) as usize] += Complex64::from_polar(a as f64, phase);
    }
    let n = c.len() - 1;
    let lead = c[n];
    if n == 0 {
        return lead.norm().ln();
    }
    let companion = nalgebra::DMatrix::from_fn(n, n, |r, col| {
        if col == n - 1 {
            -c[r] / lead
        } else if r == col + 1 {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let roots = nalgebra::linalg::Schur::new(companion).eigenvalues();
    match roots {
        Some(roots) => lead.norm().ln() + roots.iter().map(|z| z.norm().max(1.0).ln()).sum::<f64>(),
        None => f64::NAN,
    }
}

/// `M(P) = ∫_{torus} log |P| dθ / (2π)^d`.
///
/// In one variable, doubles the trapezoid resolution until either the plain
/// averages or their Richardson extrapolants stabilize; the second criterion
/// catches the `1/N` error produced by zeros on the circle. In several
/// variables the innermost integral is done exactly by Jensen's formula, which
/// leaves a continuous integrand on the remaining angles. If neither criterion
/// is met the integral falls back to adaptive Gauss cubature, which refines
/// around the remaining singularities.
pub fn mahler_measure(p: &IntPolynomial, opts: &MahlerOptions) -> Result<f64> {
    if p.is_zero() {
        return Err(Error::InvalidArgument("Mahler measure of the zero polynomial".into()));
    }
    if p.is_monomial() {
        let c = *p.terms().values().next().expect("one term");
        return Ok((c.unsigned_abs() as f64).ln());
    }
    if p.nvars() == 1 {
        let f = |theta: &[f64]| p.eval_torus(theta).norm().ln();
        return torus_integral(p, &f, 1, opts);
    }
    let f = |theta: &[f64]| slice_mahler(p, theta);
    torus_integral(p, &f, p.nvars() - 1, opts)
}

fn torus_integral<F: Fn(&[f64]) -> f64>(p: &IntPolynomial, f: &F, d: usize, opts: &MahlerOptions) -> Result<f64> {
    let cap = if d <= 1 { 1 << 14 } else { 1 << (14 / d).max(4) };
    let mut n = 16usize;
    let mut prev = torus_average(f, d, n);
    let mut prev_extrapolated = f64::NAN;
    while n * 2 <= cap && prev.is_finite() {
        n *= 2;
        let cur = torus_average(f, d, n);
        if !cur.is_finite() {
            break;
        }
        let extrapolated = 2.0 * cur - prev;
        if (cur - prev).abs() <= opts.tolerance {
            return Ok(cur);
        }
        if (extrapolated - prev_extrapolated).abs() <= opts.tolerance {
            return Ok(extrapolated);
        }
        prev = cur;
        prev_extrapolated = extrapolated;
    }
    singular_fallback(p, f, d, opts)
}

fn singular_fallback<F: Fn(&[f64]) -> f64>(p: &IntPolynomial, f: &F, d: usize, opts: &MahlerOptions) -> Result<f64> {
    let tau = std::f64::consts::TAU;
    let pieces = if d <= 1 { 16 } else { 4 };
    let mut boxes = vec![(vec![], vec![])];
    for _ in 0..d {
        boxes = boxes
            .into_iter()
            .flat_map(|(lo, hi): (Vec<f64>, Vec<f64>)| {
                (0..pieces).map(move |i| {
                    let mut lo = lo.clone();
                    let mut hi = hi.clone();
                    lo.push(tau * i as f64 / pieces as f64);
                    hi.push(tau * (i + 1) as f64 / pieces as f64);
                    (lo, hi)
                })
            })
            .collect();
    }
    let volume = tau.powi(d as i32);
    let cells = opts.max_points.min(200_000);
    match adaptive_boxes(f, boxes, 0.0, opts.tolerance * volume, cells) {
        Ok(e) if e.converged => Ok(e.value / volume),
        Ok(e) => Err(Error::NoConvergence(format!(
            "Mahler measure of {p}: adaptive refinement stopped at {} cells with error {:.3e}",
            e.cells,
            e.error / volume
        ))),
        Err(_) => Err(Error::NoConvergence(format!("log |P| is singular at a quadrature node for P = {p}"))),
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ParsevalReport {
    /// `Σ a_ν²`, exact.
    pub mass: u128,
    pub is_unit_monomial: bool,
    /// `∫ |P|²` over the torus by the trapezoid rule.
    pub numerical_mass: f64,
}

/// Exact `Σ a_ν²` with a numerical check of `∫ |P|² = Σ a_ν²`.
pub fn parseval_check(p: &IntPolynomial) -> ParsevalReport {
    let mass: u128 = p.terms().values().map(|&c| (c as i128 * c as i128) as u128).sum();
    let d = p.nvars();
    // the trapezoid rule is exact for trigonometric polynomials of degree < n
    let spread = p
        .terms()
        .keys()
        .flat_map(|e| e.iter().map(|x| x.unsigned_abs()))
        .max()
        .unwrap_or(0) as usize;
    let n = 2 * spread + 2;
    let h = std::f64::consts::TAU / n as f64;
    let total = n.pow(d as u32);
    let numerical_mass = compensated_sum((0..total).map(|mut idx| {
        let theta: Vec<f64> = (0..d)
            .map(|_| {
                let t = (idx % n) as f64 * h;
                idx /= n;
                t
            })
            .collect();
        p.eval_torus(&theta).norm_sqr()
    })) / total as f64;
    ParsevalReport { mass, is_unit_monomial: mass == 1, numerical_mass }
}

/// `max |P|` over `n^d` equally spaced torus points.
pub fn torus_sup(p: &IntPolynomial, n: usize) -> f64 {
    let d = p.nvars();
    let h = std::f64::consts::TAU / n as f64;
    (0..n.pow(d as u32))
        .map(|mut idx| {
            let theta: Vec<f64> = (0..d)
                .map(|_| {
                    let t = (idx % n) as f64 * h;
                    idx /= n;
                    t
                })
                .collect();
            p.eval_torus(&theta).norm()
        })
        .fold(0.0, f64::max)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SmallPolynomial {
    pub polynomial: IntPolynomial,
    pub torus_sup: f64,
    pub parseval: ParsevalReport,
    /// Computed only for polynomials with sampled sup at most one.
    pub mahler: Option<f64>,
}

/// Every nonzero `Σ_{k ≤ degree} c_k X^k` with `c_k ∈ [−bound, bound]`.
pub fn small_polynomial_search(bound: i64, degree: usize, samples: usize, opts: &MahlerOptions) -> Result<Vec<SmallPolynomial>> {
    let width = (2 * bound + 1) as usize;
    let total = width.pow(degree as u32 + 1);
    let mut out = Vec::new();
    for mut idx in 0..total {
        let coeffs: Vec<i64> = (0..=degree)
            .map(|_| {
                let c = (idx % width) as i64 - bound;
                idx /= width;
                c
            })
            .collect();
        let p = IntPolynomial::univariate(&coeffs);
        if p.is_zero() {
            continue;
        }
        let sup = torus_sup(&p, samples);
        let mahler = if sup <= 1.0 + 1e-12 { Some(mahler_measure(&p, opts)?) } else { None };
        out.push(SmallPolynomial { parseval: parseval_check(&p), polynomial: p, torus_sup: sup, mahler });
    }
    Ok(out)
}
