use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_complex::Complex64;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::gcd::gcd;
use super::poly::{Exponents, Polynomial};
use super::{exp_int, Exp, Monomial, Symbol, Q};
use crate::error::{Error, Result};

/// Exact rational function `pre · num / den`.
///
/// Canonical form:
/// - `pre` carries every monomial factor, including fractional powers;
/// - neither `num` nor `den` is divisible by a variable;
/// - `den` is integral, primitive, with positive lex-leading coefficient;
/// - `gcd(num, den) = 1`.
/// - zero is `1 · 0 / 1`.
///
/// With these rules structural equality is mathematical equality.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RationalFunction {
    pre: Monomial,
    num: Polynomial,
    den: Polynomial,
}

pub(crate) fn exponents_to_monomial(e: &Exponents) -> Monomial {
    Monomial::from_pairs(e.iter().map(|&(s, k)| (s, exp_int(k as i64))))
}

impl RationalFunction {
    pub fn zero() -> Self {
        RationalFunction {
            pre: Monomial::one(),
            num: Polynomial::zero(),
            den: Polynomial::one(),
        }
    }

    pub fn one() -> Self {
        RationalFunction::constant(Q::one())
    }

    pub fn constant(c: Q) -> Self {
        RationalFunction {
            pre: Monomial::one(),
            num: Polynomial::constant(c),
            den: Polynomial::one(),
        }
    }

    pub fn int(c: i64) -> Self {
        RationalFunction::constant(super::q_int(c))
    }

    pub fn var(s: Symbol) -> Self {
        RationalFunction::monomial(Q::one(), Monomial::var(s))
    }

    pub fn monomial(c: Q, m: Monomial) -> Self {
        if c.is_zero() {
            return RationalFunction::zero();
        }
        RationalFunction {
            pre: m,
            num: Polynomial::constant(c),
            den: Polynomial::one(),
        }
    }

    pub fn from_poly(p: Polynomial) -> Self {
        RationalFunction::from_parts(Monomial::one(), p, Polynomial::one())
            .expect("nonzero denominator")
    }

    /// Builds and canonicalizes `pre · num / den`.
    pub fn from_parts(pre: Monomial, num: Polynomial, den: Polynomial) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if num.is_zero() {
            return Ok(RationalFunction::zero());
        }
        let mn = num.monomial_content();
        let md = den.monomial_content();
        let mut num = num.div_exponents(&mn).expect("content divides");
        let mut den = den.div_exponents(&md).expect("content divides");
        let pre = &(&pre * &exponents_to_monomial(&mn)) / &exponents_to_monomial(&md);
        if den.as_constant().is_none() && num.as_constant().is_none() {
            let g = gcd(&num, &den);
            if !g.is_one() {
                num = num.div_exact(&g).expect("gcd divides");
                den = den.div_exact(&g).expect("gcd divides");
            }
        }
        let (c, den) = den.primitive();
        let num = if c.is_one() { num } else { num.scale(&c.recip()) };
        Ok(RationalFunction { pre, num, den })
    }

    pub fn prefactor(&self) -> &Monomial {
        &self.pre
    }

    pub fn numer(&self) -> &Polynomial {
        &self.num
    }

    pub fn denom(&self) -> &Polynomial {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.pre.is_one() && self.num.is_one() && self.den.is_one()
    }

    /// `Some((c, m))` when the function is the single term `c·m`.
    pub fn as_monomial(&self) -> Option<(Q, Monomial)> {
        if self.den.is_one() && self.num.len() == 1 {
            let c = self.num.as_constant()?;
            return Some((c, self.pre.clone()));
        }
        None
    }

    pub fn as_constant(&self) -> Option<Q> {
        if self.pre.is_one() && self.den.is_one() {
            self.num.as_constant()
        } else if self.is_zero() {
            Some(Q::zero())
        } else {
            None
        }
    }

    pub fn vars(&self) -> BTreeSet<Symbol> {
        let mut v = self.num.vars();
        v.extend(self.den.vars());
        if !self.is_zero() {
            v.extend(self.pre.vars());
        }
        v
    }

    pub fn contains_var(&self, s: Symbol) -> bool {
        self.vars().contains(&s)
    }

    pub fn neg(&self) -> Self {
        RationalFunction {
            pre: self.pre.clone(),
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn scale(&self, c: &Q) -> Self {
        if c.is_zero() {
            return RationalFunction::zero();
        }
        RationalFunction {
            pre: self.pre.clone(),
            num: self.num.scale(c),
            den: self.den.clone(),
        }
    }

    pub fn mul_monomial(&self, m: &Monomial) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        RationalFunction {
            pre: &self.pre * m,
            num: self.num.clone(),
            den: self.den.clone(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.is_zero() {
            return Ok(other.clone());
        }
        if other.is_zero() {
            return Ok(self.clone());
        }
        let ratio = &self.pre / &other.pre;
        if !ratio.is_integral() {
            return Err(Error::NonRepresentable(format!(
                "sum of terms with prefactors {} and {}",
                self.pre, other.pre
            )));
        }
        let m = self.pre.gcd(&other.pre);
        let a1 = monomial_to_poly(&(&self.pre / &m));
        let a2 = monomial_to_poly(&(&other.pre / &m));
        let (num, den) = if self.den == other.den {
            (
                a1.mul(&self.num).add(&a2.mul(&other.num)),
                self.den.clone(),
            )
        } else {
            let g = gcd(&self.den, &other.den);
            let d1 = self.den.div_exact(&g).expect("gcd divides");
            let d2 = other.den.div_exact(&g).expect("gcd divides");
            (
                a1.mul(&self.num).mul(&d2).add(&a2.mul(&other.num).mul(&d1)),
                self.den.mul(&d2),
            )
        };
        RationalFunction::from_parts(m, num, den)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return RationalFunction::zero();
        }
        let pre = &self.pre * &other.pre;
        let (n1, d2) = cancel(&self.num, &other.den);
        let (n2, d1) = cancel(&other.num, &self.den);
        RationalFunction {
            pre,
            num: n1.mul(&n2),
            den: d1.mul(&d2),
        }
    }

    pub fn inv(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let (c, pp) = self.num.primitive();
        Ok(RationalFunction {
            pre: self.pre.inv(),
            num: self.den.scale(&c.recip()),
            den: pp,
        })
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        Ok(self.mul(&other.inv()?))
    }

    pub fn pow(&self, k: i64) -> Result<Self> {
        let base = if k < 0 { self.inv()? } else { self.clone() };
        let mut acc = RationalFunction::one();
        for _ in 0..k.unsigned_abs() {
            acc = acc.mul(&base);
        }
        Ok(acc)
    }

    /// Order of vanishing at `s = 0` (the prefactor exponent of `s`).
    pub fn valuation_in(&self, s: Symbol) -> Exp {
        self.pre.exp(s)
    }

    /// Order of growth at `s = ∞`: `f ~ s^k` with `k` returned.
    pub fn degree_at_infinity(&self, s: Symbol) -> Exp {
        self.pre.exp(s) + exp_int(self.num.degree(s) as i64) - exp_int(self.den.degree(s) as i64)
    }

    /// Value at `s = 0`.
    pub fn at_zero(&self, s: Symbol) -> Result<Self> {
        if self.is_zero() {
            return Ok(self.clone());
        }
        let (e, rest) = self.pre.split_off(s);
        if e > Exp::zero() {
            return Ok(RationalFunction::zero());
        }
        if e < Exp::zero() {
            return Err(Error::DivergentLimit(format!("pole of order {e} at {s}=0")));
        }
        RationalFunction::from_parts(
            rest,
            self.num.eval_var(s, &Q::zero()),
            self.den.eval_var(s, &Q::zero()),
        )
    }

    /// Value at `s = ∞`.
    pub fn at_infinity(&self, s: Symbol) -> Result<Self> {
        if self.is_zero() {
            return Ok(self.clone());
        }
        let k = self.degree_at_infinity(s);
        if k < Exp::zero() {
            return Ok(RationalFunction::zero());
        }
        if k > Exp::zero() {
            return Err(Error::DivergentLimit(format!("pole of order {k} at {s}=∞")));
        }
        let (_, rest) = self.pre.split_off(s);
        let ln = self.num.coefficients_in(s).pop().unwrap_or_default();
        let ld = self.den.coefficients_in(s).pop().unwrap_or_default();
        RationalFunction::from_parts(rest, ln, ld)
    }

    /// Substitutes `s ↦ m` for a monomial `m` with integer exponents.
    pub fn substitute(&self, s: Symbol, m: &Monomial) -> Result<Self> {
        if !m.is_integral() {
            return Err(Error::NonRepresentable(format!(
                "substitution {s} -> {m} with fractional exponents"
            )));
        }
        if self.is_zero() {
            return Ok(self.clone());
        }
        let (e, rest) = self.pre.split_off(s);
        let pre = &rest * &m.pow(e);
        let (pn, n) = substitute_poly(&self.num, s, m);
        let (pd, d) = substitute_poly(&self.den, s, m);
        RationalFunction::from_parts(&(&pre * &pn) / &pd, n, d)
    }

    /// Renames a variable; `to` must not already occur.
    pub fn rename(&self, from: Symbol, to: Symbol) -> Result<Self> {
        if from == to {
            return Ok(self.clone());
        }
        if self.contains_var(to) {
            return Err(Error::invalid(format!("variable {to} already present")));
        }
        let f = |x: Symbol| if x == from { to } else { x };
        let pre = Monomial::from_pairs(self.pre.iter().map(|(x, e)| (f(*x), *e)));
        RationalFunction::from_parts(pre, self.num.rename(f), self.den.rename(f))
    }

    /// Power series in `s` at `s = 0` with exponents `≤ order`.
    ///
    /// Returns `(exponent, coefficient)` pairs with nonzero coefficients,
    /// coefficients free of `s`.
    pub fn expand_at_zero(&self, s: Symbol, order: Exp) -> Result<Vec<(Exp, RationalFunction)>> {
        if self.is_zero() {
            return Ok(Vec::new());
        }
        let (e, rest) = self.pre.split_off(s);
        let nc = self.num.coefficients_in(s);
        let dc: Vec<RationalFunction> = self
            .den
            .coefficients_in(s)
            .into_iter()
            .map(RationalFunction::from_poly)
            .collect();
        let d0_inv = dc[0].inv()?;
        let mut coeffs: Vec<RationalFunction> = Vec::new();
        let mut out = Vec::new();
        let mut k = 0i64;
        while e + exp_int(k) <= order {
            let mut acc = nc
                .get(k as usize)
                .cloned()
                .map(RationalFunction::from_poly)
                .unwrap_or_else(RationalFunction::zero);
            for j in 1..=(k as usize).min(dc.len() - 1) {
                let c = &coeffs[k as usize - j];
                if !c.is_zero() && !dc[j].is_zero() {
                    acc = acc.sub(&dc[j].mul(c))?;
                }
            }
            let ck = acc.mul(&d0_inv);
            if !ck.is_zero() {
                out.push((e + exp_int(k), ck.mul_monomial(&rest)));
            }
            coeffs.push(ck);
            k += 1;
        }
        Ok(out)
    }

    /// Series in `1/s` at `s = ∞`: pairs `(k, c)` meaning `c·s^{-k}`, with `k ≤ order`.
    pub fn expand_at_infinity(
        &self,
        s: Symbol,
        order: Exp,
    ) -> Result<Vec<(Exp, RationalFunction)>> {
        let flipped = self.substitute(s, &Monomial::var(s).inv())?;
        flipped.expand_at_zero(s, order)
    }

    /// Numeric value. Variables in `exact` are substituted exactly into the
    /// polynomial parts before floating-point evaluation; all others are
    /// looked up in `complex`. Fractional powers use the principal branch.
    pub fn eval_numeric(
        &self,
        exact: &BTreeMap<Symbol, Q>,
        complex: &BTreeMap<Symbol, Complex64>,
    ) -> Result<Complex64> {
        let value = |s: Symbol| -> Result<Complex64> {
            if let Some(v) = exact.get(&s) {
                return Ok(Complex64::new(v.to_f64().unwrap_or(f64::NAN), 0.0));
            }
            complex
                .get(&s)
                .copied()
                .ok_or_else(|| Error::invalid(format!("variable {s} not bound")))
        };
        let poly_val = |p: &Polynomial| -> Result<Complex64> {
            let mut p = p.clone();
            for (s, v) in exact {
                if p.degree(*s) > 0 {
                    p = p.eval_var(*s, v);
                }
            }
            for s in p.vars() {
                value(s)?;
            }
            Ok(p.eval_with(
                |s| value(s).unwrap(),
                Complex64::new(0.0, 0.0),
                |c| Complex64::new(c.to_f64().unwrap_or(f64::NAN), 0.0),
            ))
        };
        let n = poly_val(&self.num)?;
        let d = poly_val(&self.den)?;
        if d == Complex64::new(0.0, 0.0) {
            return Err(Error::DivisionByZero);
        }
        let mut pre = Complex64::new(1.0, 0.0);
        for (s, e) in self.pre.iter() {
            let x = value(*s)?;
            pre *= principal_pow(x, e);
        }
        Ok(pre * n / d)
    }
}

pub fn principal_pow(x: Complex64, e: &Exp) -> Complex64 {
    if e.is_integer() {
        x.powi(*e.numer() as i32)
    } else {
        let ef = *e.numer() as f64 / *e.denom() as f64;
        (x.ln() * ef).exp()
    }
}

fn cancel(n: &Polynomial, d: &Polynomial) -> (Polynomial, Polynomial) {
    if d.as_constant().is_some() || n.as_constant().is_some() {
        return (n.clone(), d.clone());
    }
    let g = gcd(n, d);
    if g.is_one() {
        (n.clone(), d.clone())
    } else {
        (
            n.div_exact(&g).expect("gcd divides"),
            d.div_exact(&g).expect("gcd divides"),
        )
    }
}

pub(crate) fn monomial_to_poly(m: &Monomial) -> Polynomial {
    let mut e = Exponents::one();
    for (s, k) in m.iter() {
        debug_assert!(k.is_integer() && !k.is_negative());
        e = e.mul(&Exponents::var(*s, k.to_integer() as u32));
    }
    Polynomial::term(Q::one(), e)
}

/// Substitutes `s ↦ m` into a polynomial, returning `(shift, p)` with the
/// result equal to `shift · p` and `p` a genuine polynomial.
fn substitute_poly(p: &Polynomial, s: Symbol, m: &Monomial) -> (Monomial, Polynomial) {
    let mut terms: Vec<(Monomial, Q)> = Vec::new();
    for (e, c) in p.terms() {
        let k = e.get(s) as i64;
        let mono = &exponents_to_monomial(&e.without(s)) * &m.pow(exp_int(k));
        terms.push((mono, c.clone()));
    }
    let mut shift = Monomial::one();
    for (mono, _) in &terms {
        shift = shift.gcd(mono);
    }
    let mut out = Polynomial::zero();
    for (mono, c) in terms {
        let rel = &mono / &shift;
        out.add_term(
            monomial_to_poly(&rel).terms().next().unwrap().0.clone(),
            c,
        );
    }
    (shift, out)
}

impl fmt::Display for RationalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut parts: Vec<String> = Vec::new();
        if let Some(c) = self.num.as_constant() {
            if !c.is_one() || self.pre.is_one() {
                parts.push(if self.pre.is_one() {
                    super::fmt_q(&c)
                } else {
                    format!("({})", super::fmt_q(&c))
                });
            }
        } else {
            parts.push(format!("({})", self.num));
        }
        if !self.pre.is_one() {
            parts.push(self.pre.to_string());
        }
        let mut s = parts.join("*");
        if !self.den.is_one() {
            s = format!("{s}/({})", self.den);
        }
        f.write_str(&s)
    }
}

impl fmt::Debug for RationalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RF[{self}]")
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse::parse_rf;
    use super::super::{exp_frac, q_frac, vars};
    use super::*;

    #[test]
    fn inverse_pair_cancels() {
        let m = parse_rf("(1-z)/(1-z*hbar)").unwrap();
        let mi = parse_rf("(1-z*hbar)/(1-z)").unwrap();
        assert!(m.mul(&mi).is_one());
        assert_eq!(m.inv().unwrap(), mi);
    }

    #[test]
    fn sums_and_cancellation() {
        let a = parse_rf("1-z").unwrap();
        let b = parse_rf("z").unwrap();
        assert!(a.add(&b).unwrap().is_one());
        let c = parse_rf("(1-hbar)/(1-qb)").unwrap();
        let d = parse_rf("1-qb").unwrap();
        assert_eq!(c.mul(&d), parse_rf("1-hbar").unwrap());
        let x = parse_rf("z^2/(z+z*hbar)").unwrap();
        assert_eq!(x, parse_rf("z/(1+hbar)").unwrap());
    }

    #[test]
    fn denominators_normalized() {
        let a = parse_rf("1/(2-2*z)").unwrap();
        let b = parse_rf("(-1/2)/(z-1)").unwrap();
        assert_eq!(a, b);
        assert!(a.denom().leading_coeff() > Q::zero());
    }

    #[test]
    fn fractional_prefactors() {
        let h = vars::hbar();
        let r = RationalFunction::monomial(q_frac(1, 1), Monomial::var_pow(h, exp_frac(1, 2)));
        let one = RationalFunction::one();
        assert!(r.add(&one).is_err());
        let s = r.add(&r).unwrap();
        assert_eq!(s.as_monomial().unwrap().0, q_frac(2, 1));
    }

    #[test]
    fn values_at_charts() {
        let z = vars::z();
        let m = parse_rf("(1-z)/(1-z*hbar)").unwrap();
        assert!(m.at_zero(z).unwrap().is_one());
        assert_eq!(m.at_infinity(z).unwrap(), parse_rf("1/hbar").unwrap());
        let w = vars::w();
        let mw = m.substitute(z, &Monomial::var(w).inv()).unwrap();
        assert_eq!(mw, parse_rf("(w-1)/(w-hbar)").unwrap());
    }

    #[test]
    fn zadic_expansion() {
        let z = vars::z();
        let f = parse_rf("1/(1-z)").unwrap();
        let terms = f.expand_at_zero(z, exp_int(4)).unwrap();
        assert_eq!(terms.len(), 5);
        for (k, (e, c)) in terms.iter().enumerate() {
            assert_eq!(*e, exp_int(k as i64));
            assert!(c.is_one());
        }
        let g = parse_rf("(1-z)/(1-z*hbar)").unwrap();
        let t = g.expand_at_zero(z, exp_int(2)).unwrap();
        assert_eq!(t[1].1, parse_rf("hbar-1").unwrap());
        assert_eq!(t[2].1, parse_rf("hbar^2-hbar").unwrap());
    }
}
