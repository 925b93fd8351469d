use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact rational scalar used for all polytope data.
pub type Rational = BigRational;

pub(crate) fn q(value: i64) -> Rational {
    Rational::from_integer(BigInt::from(value))
}

pub(crate) fn to_f64(value: &Rational) -> f64 {
    value.to_f64().unwrap_or(f64::NAN)
}

/// Parses `"p/q"`, `"p"` or a terminating decimal such as `"0.25"` into an exact rational.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let text = text.trim();
    let bad = || Error::Parse(format!("invalid rational '{text}'"));
    if let Some((num, den)) = text.split_once('/') {
        let num = BigInt::from_str(num.trim()).map_err(|_| bad())?;
        let den = BigInt::from_str(den.trim()).map_err(|_| bad())?;
        if den.is_zero() {
            return Err(bad());
        }
        return Ok(Rational::new(num, den));
    }
    if let Some((int_part, frac_part)) = text.split_once('.') {
        if frac_part.is_empty() || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let negative = int_part.trim_start().starts_with('-');
        let int_digits = int_part.trim_start_matches(['-', '+']);
        let int_value = if int_digits.is_empty() {
            BigInt::zero()
        } else {
            BigInt::from_str(int_digits).map_err(|_| bad())?
        };
        let frac_value = BigInt::from_str(frac_part).map_err(|_| bad())?;
        let scale = num_traits::pow(BigInt::from(10), frac_part.len());
        let magnitude = Rational::new(int_value * &scale + frac_value, scale);
        return Ok(if negative { -magnitude } else { magnitude });
    }
    BigInt::from_str(text).map(Rational::from_integer).map_err(|_| bad())
}

/// Formats a rational as `p` or `p/q`.
pub fn format_rational(value: &Rational) -> String {
    if value.denom().is_one() {
        value.numer().to_string()
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}

/// A point of the character lattice `M ≅ Z^d`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LatticePoint(pub Vec<i64>);

impl LatticePoint {
    pub fn new(coords: Vec<i64>) -> Self {
        Self(coords)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn to_rational(&self) -> RationalPoint {
        RationalPoint(self.0.iter().map(|&c| q(c)).collect())
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0.iter().map(|&c| c as f64).collect()
    }

    /// The rational point `self / l`.
    pub fn scaled_down(&self, l: u32) -> RationalPoint {
        let den = BigInt::from(l);
        RationalPoint(
            self.0
                .iter()
                .map(|&c| Rational::new(BigInt::from(c), den.clone()))
                .collect(),
        )
    }

    pub fn dot(&self, other: &[i64]) -> i64 {
        self.0.iter().zip(other).map(|(a, b)| a * b).sum()
    }
}

impl fmt::Display for LatticePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// A point of `M_Q`, stored with reduced fractions.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RationalPoint(pub Vec<Rational>);

impl RationalPoint {
    pub fn new(coords: Vec<Rational>) -> Self {
        Self(coords)
    }

    pub fn zero(dim: usize) -> Self {
        Self(vec![Rational::zero(); dim])
    }

    pub fn from_ints(coords: &[i64]) -> Self {
        Self(coords.iter().map(|&c| q(c)).collect())
    }

    pub fn parse<S: AsRef<str>>(coords: &[S]) -> Result<Self> {
        coords
            .iter()
            .map(|c| parse_rational(c.as_ref()))
            .collect::<Result<Vec<_>>>()
            .map(Self)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[Rational] {
        &self.0
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0.iter().map(to_f64).collect()
    }

    pub fn dot_int(&self, normal: &[i64]) -> Rational {
        self.0
            .iter()
            .zip(normal)
            .fold(Rational::zero(), |acc, (x, &n)| acc + x * q(n))
    }

    pub fn dot(&self, other: &RationalPoint) -> Rational {
        self.0
            .iter()
            .zip(&other.0)
            .fold(Rational::zero(), |acc, (x, y)| acc + x * y)
    }

    pub fn add(&self, other: &RationalPoint) -> RationalPoint {
        RationalPoint(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &RationalPoint) -> RationalPoint {
        RationalPoint(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn scale(&self, factor: &Rational) -> RationalPoint {
        RationalPoint(self.0.iter().map(|a| a * factor).collect())
    }

    /// Returns the lattice point when every coordinate is an integer.
    pub fn to_lattice(&self) -> Option<LatticePoint> {
        self.0
            .iter()
            .map(|c| if c.is_integer() { c.to_integer().to_i64() } else { None })
            .collect::<Option<Vec<_>>>()
            .map(LatticePoint)
    }

    pub fn is_nonnegative(&self) -> bool {
        self.0.iter().all(|c| !c.is_negative())
    }
}

impl fmt::Display for RationalPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}", format_rational(c))?;
        }
        write!(f, ")")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_decimals() {
        assert_eq!(parse_rational("3/6").unwrap(), Rational::new(1.into(), 2.into()));
        assert_eq!(parse_rational("-0.25").unwrap(), Rational::new((-1).into(), 4.into()));
        assert_eq!(parse_rational(" 7 ").unwrap(), q(7));
        assert_eq!(parse_rational("2/-4").unwrap(), Rational::new((-1).into(), 2.into()));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
        assert!(parse_rational("1.").is_err());
    }

    #[test]
    fn denominators_are_positive_and_reduced() {
        let x = parse_rational("4/-6").unwrap();
        assert!(x.denom().is_positive());
        assert_eq!(format_rational(&x), "-2/3");
    }

    #[test]
    fn scaled_down_lattice_point() {
        let p = LatticePoint::new(vec![2, 3]);
        assert_eq!(p.scaled_down(4).to_string(), "(1/2, 3/4)");
        assert_eq!(p.scaled_down(1).to_lattice(), Some(p));
    }
}
