//! Exact arithmetic: rationals, monomials with rational exponents,
//! multivariate polynomials, rational functions, truncated Puiseux series
//! and square matrices over them.

pub mod gcd;
pub mod json;
pub mod matrix;
pub mod monomial;
pub mod parse;
pub mod poly;
pub mod ratfun;
pub mod series;
pub mod symbol;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::{BigRational, Ratio};
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub use matrix::Matrix;
pub use monomial::Monomial;
pub use poly::Polynomial;
pub use ratfun::RationalFunction;
pub use series::PuiseuxSeries;
pub use symbol::{vars, Symbol, VarSet};

/// Exact rational coefficient.
pub type Q = BigRational;

/// Exact rational exponent. Exponents stay small in every computation here,
/// so machine-word numerators and denominators suffice.
pub type Exp = Ratio<i64>;

pub type FieldMatrix = Matrix<RationalFunction>;
pub type SeriesMatrix = Matrix<PuiseuxSeries>;

pub fn q_int(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn q_frac(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn exp_int(n: i64) -> Exp {
    Exp::from_integer(n)
}

pub fn exp_frac(n: i64, d: i64) -> Exp {
    Exp::new(n, d)
}

/// Parses `a`, `-a` or `a/b` into an exact rational.
pub fn parse_q(s: &str) -> Result<Q> {
    let s = s.trim();
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: BigInt = n
        .parse()
        .map_err(|_| Error::parse(format!("invalid rational {s:?}")))?;
    let d: BigInt = d
        .parse()
        .map_err(|_| Error::parse(format!("invalid rational {s:?}")))?;
    if d.is_zero() {
        return Err(Error::parse(format!("zero denominator in {s:?}")));
    }
    Ok(Q::new(n, d))
}

/// Parses a rational exponent; numerator and denominator must fit in `i64`
/// and stay below a bound that keeps exponent arithmetic overflow free.
pub fn parse_exp(s: &str) -> Result<Exp> {
    let q = parse_q(s)?;
    q_to_exp(&q).ok_or_else(|| Error::parse(format!("exponent out of range: {s:?}")))
}

pub(crate) const EXP_BOUND: i64 = 1 << 24;

pub fn q_to_exp(q: &Q) -> Option<Exp> {
    let n = q.numer().to_i64()?;
    let d = q.denom().to_i64()?;
    if n.abs() > EXP_BOUND || d > EXP_BOUND {
        return None;
    }
    Some(Exp::new(n, d))
}

pub fn exp_to_q(e: &Exp) -> Q {
    q_frac(*e.numer(), *e.denom())
}

pub fn fmt_q(q: &Q) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn fmt_exp(e: &Exp) -> String {
    if e.is_integer() {
        e.numer().to_string()
    } else {
        format!("{}/{}", e.numer(), e.denom())
    }
}

pub fn floor_exp(e: &Exp) -> i64 {
    e.numer().div_floor(e.denom())
}

pub fn lcm_u64(a: u64, b: u64) -> u64 {
    a.lcm(&b)
}

/// Checked exponent addition guarding against overflow in adversarial input.
pub fn exp_add(a: Exp, b: Exp) -> Result<Exp> {
    let r = a + b;
    if r.numer().abs() > EXP_BOUND * EXP_BOUND || *r.denom() > EXP_BOUND {
        return Err(Error::NonRepresentable(format!(
            "exponent {} too large",
            fmt_exp(&r)
        )));
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_rationals() {
        assert_eq!(parse_q("3/6").unwrap(), q_frac(1, 2));
        assert_eq!(parse_q("-4").unwrap(), q_int(-4));
        assert!(parse_q("1/0").is_err());
        assert!(parse_q("x").is_err());
        assert_eq!(fmt_q(&q_frac(-2, 4)), "-1/2");
        assert_eq!(floor_exp(&exp_frac(-3, 2)), -2);
        assert_eq!(floor_exp(&exp_frac(5, 2)), 2);
    }
}
