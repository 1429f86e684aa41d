//! Parser for rational-function expressions such as `(1-z)/(1-z*hbar)`
//! or `hbar^(1/2)*(1+q)`.
//!
//! Grammar:
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := ('-' | '+') unary | power
//! power  := atom ('^' exponent)?
//! atom   := integer | symbol | '(' expr ')'
//! exponent := integer | '-' integer | '(' ['-'] integer ['/' integer] ')'
//! ```
//! Fractional exponents are only allowed on monomials.

use num_bigint::BigInt;
use num_traits::One;

use super::{exp_int, parse_exp, EXP_BOUND, Exp, Monomial, RationalFunction, Symbol, Q};
use crate::error::{Error, Result};

const MAX_DEPTH: usize = 64;
const MAX_INT_POWER: i64 = 64;
const MAX_POWER_DEGREE: i64 = 512;
pub(crate) const MAX_DEGREE: u64 = 4096;
const MAX_LEN: usize = 1 << 16;

pub fn parse_rf(input: &str) -> Result<RationalFunction> {
    if input.len() > MAX_LEN {
        return Err(Error::parse("expression too long"));
    }
    let mut p = Parser {
        src: input.as_bytes(),
        pos: 0,
        depth: 0,
    };
    let v = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(v)
}

/// Parses a slope or exponent value like `-3/2`.
pub fn parse_rational_exp(input: &str) -> Result<Exp> {
    parse_exp(input)
}

/// Keeps prefactor exponents small enough that further exponent arithmetic
/// cannot overflow.
fn bounded(f: RationalFunction) -> Result<RationalFunction> {
    for (_, e) in f.prefactor().iter() {
        if e.numer().abs() > EXP_BOUND || *e.denom() > EXP_BOUND {
            return Err(Error::parse("exponent out of range"));
        }
    }
    if f.numer().total_degree() > MAX_DEGREE || f.denom().total_degree() > MAX_DEGREE {
        return Err(Error::parse("polynomial degree out of range"));
    }
    Ok(f)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    depth: usize,
}

impl Parser<'_> {
    fn error(&self, msg: &str) -> Error {
        Error::parse(format!("{msg} at offset {}", self.pos))
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn enter(&mut self) -> Result<()> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(self.error("expression nested too deeply"));
        }
        Ok(())
    }

    fn expr(&mut self) -> Result<RationalFunction> {
        self.enter()?;
        let mut acc = self.term()?;
        loop {
            if self.eat(b'+') {
                let t = self.term()?;
                acc = bounded(acc.add(&t)?)?;
            } else if self.eat(b'-') {
                let t = self.term()?;
                acc = bounded(acc.sub(&t)?)?;
            } else {
                break;
            }
        }
        self.depth -= 1;
        Ok(acc)
    }

    fn term(&mut self) -> Result<RationalFunction> {
        let mut acc = self.unary()?;
        loop {
            if self.eat(b'*') {
                let t = self.unary()?;
                acc = bounded(acc.mul(&t))?;
            } else if self.eat(b'/') {
                let t = self.unary()?;
                acc = bounded(acc.div(&t)?)?;
            } else {
                break;
            }
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<RationalFunction> {
        self.enter()?;
        let v = if self.eat(b'-') {
            self.unary()?.neg()
        } else if self.eat(b'+') {
            self.unary()?
        } else {
            self.power()?
        };
        self.depth -= 1;
        Ok(v)
    }

    fn power(&mut self) -> Result<RationalFunction> {
        let base = self.atom()?;
        if !self.eat(b'^') {
            return Ok(base);
        }
        let e = self.exponent()?;
        if let Some((c, m)) = base.as_monomial() {
            if c.is_one() {
                return bounded(RationalFunction::monomial(c, m.pow(e)));
            }
        }
        if !e.is_integer() {
            return Err(self.error("fractional power of a non-monomial"));
        }
        let k = e.to_integer();
        let deg = base.numer().total_degree().max(base.denom().total_degree()) as i64;
        if k.abs() > MAX_INT_POWER || k.abs() * deg > MAX_POWER_DEGREE {
            return Err(self.error("integer power too large"));
        }
        base.pow(k)
    }

    fn integer(&mut self) -> Result<String> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("expected integer"));
        }
        Ok(std::str::from_utf8(&self.src[start..self.pos])
            .expect("ascii digits")
            .to_string())
    }

    fn exponent(&mut self) -> Result<Exp> {
        if self.eat(b'(') {
            let neg = self.eat(b'-');
            let n = self.integer()?;
            let text = if self.eat(b'/') {
                let d = self.integer()?;
                format!("{n}/{d}")
            } else {
                n
            };
            if !self.eat(b')') {
                return Err(self.error("expected ')'"));
            }
            let e = parse_exp(&text)?;
            return Ok(if neg { -e } else { e });
        }
        let neg = self.eat(b'-');
        let n = self.integer()?;
        let e = parse_exp(&n)?;
        if e > exp_int(MAX_INT_POWER * 16) {
            return Err(self.error("exponent too large"));
        }
        Ok(if neg { -e } else { e })
    }

    fn atom(&mut self) -> Result<RationalFunction> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let v = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.error("expected ')'"));
                }
                Ok(v)
            }
            Some(c) if c.is_ascii_digit() => {
                let n = self.integer()?;
                let n: BigInt = n.parse().map_err(|_| self.error("bad integer"))?;
                Ok(RationalFunction::constant(Q::from_integer(n)))
            }
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self.pos < self.src.len()
                    && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
                let s = Symbol::new(name)?;
                Ok(RationalFunction::monomial(Q::one(), Monomial::var(s)))
            }
            _ => Err(self.error("expected number, symbol or '('")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::{exp_frac, vars};
    use super::*;

    #[test]
    fn parses_basic_forms() {
        let a = parse_rf("hbar^(1/2) * (1 + z)").unwrap();
        assert_eq!(a.prefactor().exp(vars::hbar()), exp_frac(1, 2));
        let b = parse_rf("z^-2").unwrap();
        assert_eq!(b.prefactor().exp(vars::z()), exp_int(-2));
        assert!(parse_rf("(1+z)^(1/2)").is_err());
        assert!(parse_rf("1/(z-z)").is_err());
        assert!(parse_rf("(").is_err());
        assert!(parse_rf("z + ").is_err());
        assert_eq!(parse_rf("-(-3)").unwrap(), RationalFunction::int(3));
    }

    #[test]
    fn depth_limited() {
        let deep = "(".repeat(200) + "1" + &")".repeat(200);
        assert!(parse_rf(&deep).is_err());
    }
}
