//! Exact rational scalars and the arithmetic mode switch.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Every quantity in a model (probabilities, prices, times) is held exactly.
pub type Rational = BigRational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("cannot parse `{input}` as a rational number")]
pub struct ParseRationalError {
    pub input: String,
}

/// Arithmetic used by the linear-programming backend.
///
/// Models are always stored exactly. `Float` solves the programs in `f64`
/// and certifies the outcome against `tol`; certificates are converted back to
/// rationals so the verification pass is the same in both modes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Arithmetic {
    Exact,
    Float { tol: f64 },
}

pub const DEFAULT_FLOAT_TOL: f64 = 1e-9;

/// Largest outcome count for which exact mode is the default.
pub const EXACT_DEFAULT_LIMIT: usize = 64;

impl Arithmetic {
    pub fn float() -> Self {
        Arithmetic::Float { tol: DEFAULT_FLOAT_TOL }
    }

    /// Exact for small spaces, float beyond [`EXACT_DEFAULT_LIMIT`] outcomes.
    pub fn default_for(outcomes: usize) -> Self {
        if outcomes <= EXACT_DEFAULT_LIMIT {
            Arithmetic::Exact
        } else {
            Arithmetic::float()
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Arithmetic::Exact)
    }

    /// Comparison tolerance as a rational; zero in exact mode.
    pub fn tolerance(&self) -> Rational {
        match self {
            Arithmetic::Exact => Rational::zero(),
            Arithmetic::Float { tol } => from_f64(*tol),
        }
    }
}

impl fmt::Display for Arithmetic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Arithmetic::Exact => write!(f, "exact"),
            Arithmetic::Float { .. } => write!(f, "float"),
        }
    }
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Exact binary value of a finite float. Non-finite input maps to zero.
pub fn from_f64(x: f64) -> Rational {
    Rational::from_float(x).unwrap_or_else(Rational::zero)
}

pub fn to_f64(x: &Rational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Parses `"a/b"`, integers, and finite decimals such as `"-1.25"` or `"2e-3"`.
pub fn parse_rational(s: &str) -> Result<Rational, ParseRationalError> {
    let err = || ParseRationalError { input: s.to_string() };
    let t = s.trim();
    if t.is_empty() {
        return Err(err());
    }
    if let Some((n, d)) = t.split_once('/') {
        let n = BigInt::from_str(n.trim()).map_err(|_| err())?;
        let d = BigInt::from_str(d.trim()).map_err(|_| err())?;
        if d.is_zero() {
            return Err(err());
        }
        return Ok(Rational::new(n, d));
    }
    parse_decimal(t).ok_or_else(err)
}

fn parse_decimal(t: &str) -> Option<Rational> {
    let (mantissa, exponent) = match t.find(['e', 'E']) {
        Some(pos) => (&t[..pos], t[pos + 1..].parse::<i32>().ok()?),
        None => (t, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (whole, frac) = match digits.split_once('.') {
        Some((w, f)) => (w, f),
        None => (digits, ""),
    };
    if whole.is_empty() && frac.is_empty() {
        return None;
    }
    if !whole.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let joined = format!("{whole}{frac}");
    let mut value = Rational::from_integer(BigInt::from_str(&joined).ok()?);
    let scale = exponent - frac.len() as i32;
    let ten = BigInt::from(10);
    if scale >= 0 {
        value *= Rational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        value /= Rational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Some(if neg { -value } else { value })
}

/// `"a/b"`, or `"a"` for integers.
pub fn format_rational(x: &Rational) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn sum<'a, I: IntoIterator<Item = &'a Rational>>(items: I) -> Rational {
    items.into_iter().fold(Rational::zero(), |acc, x| acc + x)
}

pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter()
        .zip(b)
        .filter(|(x, y)| !x.is_zero() && !y.is_zero())
        .fold(Rational::zero(), |acc, (x, y)| acc + x * y)
}

pub fn max_abs<'a, I: IntoIterator<Item = &'a Rational>>(items: I) -> Rational {
    items.into_iter().map(|x| x.abs()).max().unwrap_or_else(Rational::zero)
}

pub fn positive_part(x: &Rational) -> Rational {
    if x.is_positive() {
        x.clone()
    } else {
        Rational::zero()
    }
}

pub fn one() -> Rational {
    Rational::one()
}
