use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use smallvec::SmallVec;

use super::{fmt_q, Q, Symbol};

/// Exponent vector of a polynomial term: sorted `(symbol, positive exponent)` pairs.
///
/// Ordering is lexicographic with the alphabetically smallest symbol
/// having the highest priority, which is a monomial order.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct Exponents(pub(crate) SmallVec<[(Symbol, u32); 4]>);

impl Exponents {
    pub fn one() -> Self {
        Exponents::default()
    }

    pub fn var(s: Symbol, e: u32) -> Self {
        let mut v = SmallVec::new();
        if e > 0 {
            v.push((s, e));
        }
        Exponents(v)
    }

    pub fn iter(&self) -> impl Iterator<Item = &(Symbol, u32)> {
        self.0.iter()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, s: Symbol) -> u32 {
        self.0.iter().find(|(v, _)| *v == s).map(|(_, e)| *e).unwrap_or(0)
    }

    pub fn total_degree(&self) -> u64 {
        self.0.iter().map(|(_, e)| *e as u64).sum()
    }

    pub fn mul(&self, other: &Exponents) -> Exponents {
        let mut out = SmallVec::with_capacity(self.0.len() + other.0.len());
        let (a, b) = (&self.0, &other.0);
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                Ordering::Equal => {
                    out.push((a[i].0, a[i].1 + b[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Exponents(out)
    }

    /// `self / other` if every exponent stays nonnegative.
    pub fn div(&self, other: &Exponents) -> Option<Exponents> {
        let mut out = SmallVec::new();
        let mut j = 0;
        for &(s, e) in &self.0 {
            if j < other.0.len() && other.0[j].0 < s {
                return None;
            }
            if j < other.0.len() && other.0[j].0 == s {
                let f = other.0[j].1;
                j += 1;
                if f > e {
                    return None;
                }
                if e > f {
                    out.push((s, e - f));
                }
            } else {
                out.push((s, e));
            }
        }
        if j < other.0.len() {
            return None;
        }
        Some(Exponents(out))
    }

    pub fn meet(&self, other: &Exponents) -> Exponents {
        let mut out = SmallVec::new();
        for &(s, e) in &self.0 {
            let f = other.get(s);
            let m = e.min(f);
            if m > 0 {
                out.push((s, m));
            }
        }
        Exponents(out)
    }

    pub fn without(&self, s: Symbol) -> Exponents {
        Exponents(self.0.iter().filter(|(v, _)| *v != s).cloned().collect())
    }
}

impl Ord for Exponents {
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b) = (&self.0, &other.0);
        let (mut i, mut j) = (0, 0);
        loop {
            match (a.get(i), b.get(j)) {
                (None, None) => return Ordering::Equal,
                (Some(_), None) => return Ordering::Greater,
                (None, Some(_)) => return Ordering::Less,
                (Some(&(sa, ea)), Some(&(sb, eb))) => match sa.cmp(&sb) {
                    // `a` has a positive power of a symbol that `b` lacks.
                    Ordering::Less => return Ordering::Greater,
                    Ordering::Greater => return Ordering::Less,
                    Ordering::Equal => {
                        if ea != eb {
                            return ea.cmp(&eb);
                        }
                        i += 1;
                        j += 1;
                    }
                },
            }
        }
    }
}

impl PartialOrd for Exponents {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Exponents {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (k, (s, e)) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{s}^{e}")?;
        }
        f.write_str("]")
    }
}

/// Sparse multivariate polynomial with rational coefficients and
/// nonnegative integer exponents.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct Polynomial {
    terms: BTreeMap<Exponents, Q>,
}

impl Polynomial {
    pub fn zero() -> Self {
        Polynomial::default()
    }

    pub fn one() -> Self {
        Polynomial::constant(Q::one())
    }

    pub fn constant(c: Q) -> Self {
        let mut p = Polynomial::zero();
        if !c.is_zero() {
            p.terms.insert(Exponents::one(), c);
        }
        p
    }

    pub fn var(s: Symbol) -> Self {
        Polynomial::term(Q::one(), Exponents::var(s, 1))
    }

    pub fn term(c: Q, e: Exponents) -> Self {
        let mut p = Polynomial::zero();
        if !c.is_zero() {
            p.terms.insert(e, c);
        }
        p
    }

    pub fn from_terms<I: IntoIterator<Item = (Exponents, Q)>>(it: I) -> Self {
        let mut p = Polynomial::zero();
        for (e, c) in it {
            p.add_term(e, c);
        }
        p
    }

    pub fn add_term(&mut self, e: Exponents, c: Q) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(e) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1
            && self
                .terms
                .iter()
                .next()
                .map(|(e, c)| e.is_one() && c.is_one())
                .unwrap_or(false)
    }

    /// The constant value if the polynomial has no variables.
    pub fn as_constant(&self) -> Option<Q> {
        match self.terms.len() {
            0 => Some(Q::zero()),
            1 => {
                let (e, c) = self.terms.iter().next().unwrap();
                e.is_one().then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Exponents, &Q)> {
        self.terms.iter()
    }

    pub fn into_terms(self) -> impl Iterator<Item = (Exponents, Q)> {
        self.terms.into_iter()
    }

    pub fn leading(&self) -> Option<(&Exponents, &Q)> {
        self.terms.iter().next_back()
    }

    pub fn leading_coeff(&self) -> Q {
        self.leading().map(|(_, c)| c.clone()).unwrap_or_else(Q::zero)
    }

    pub fn coeff(&self, e: &Exponents) -> Q {
        self.terms.get(e).cloned().unwrap_or_else(Q::zero)
    }

    pub fn vars(&self) -> BTreeSet<Symbol> {
        self.terms
            .keys()
            .flat_map(|e| e.iter().map(|(s, _)| *s))
            .collect()
    }

    pub fn degree(&self, s: Symbol) -> u32 {
        self.terms.keys().map(|e| e.get(s)).max().unwrap_or(0)
    }

    pub fn min_degree(&self, s: Symbol) -> u32 {
        self.terms.keys().map(|e| e.get(s)).min().unwrap_or(0)
    }

    pub fn total_degree(&self) -> u64 {
        self.terms.keys().map(|e| e.total_degree()).max().unwrap_or(0)
    }

    pub fn neg(&self) -> Polynomial {
        Polynomial {
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect(),
        }
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let (big, small) = if self.len() >= other.len() {
            (self, other)
        } else {
            (other, self)
        };
        let mut out = big.clone();
        for (e, c) in &small.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), -c);
        }
        out
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        if self.is_zero() || other.is_zero() {
            return Polynomial::zero();
        }
        let mut out = Polynomial::zero();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                out.add_term(ea.mul(eb), ca * cb);
            }
        }
        out
    }

    pub fn scale(&self, c: &Q) -> Polynomial {
        if c.is_zero() {
            return Polynomial::zero();
        }
        Polynomial {
            terms: self.terms.iter().map(|(e, x)| (e.clone(), x * c)).collect(),
        }
    }

    pub fn mul_exponents(&self, m: &Exponents) -> Polynomial {
        Polynomial {
            terms: self.terms.iter().map(|(e, c)| (e.mul(m), c.clone())).collect(),
        }
    }

    pub fn pow(&self, mut k: u32) -> Polynomial {
        let mut base = self.clone();
        let mut acc = Polynomial::one();
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Largest power product dividing every term.
    pub fn monomial_content(&self) -> Exponents {
        let mut it = self.terms.keys();
        let Some(first) = it.next() else {
            return Exponents::one();
        };
        let mut g = first.clone();
        for e in it {
            if g.is_one() {
                break;
            }
            g = g.meet(e);
        }
        g
    }

    pub fn div_exponents(&self, m: &Exponents) -> Option<Polynomial> {
        let mut terms = BTreeMap::new();
        for (e, c) in &self.terms {
            terms.insert(e.div(m)?, c.clone());
        }
        Some(Polynomial { terms })
    }

    /// Rational content `c` with `self = c·p`, `p` integral and primitive,
    /// lex-leading coefficient of `p` positive.
    pub fn content(&self) -> Q {
        if self.is_zero() {
            return Q::one();
        }
        let mut num = BigInt::zero();
        let mut den = BigInt::one();
        for c in self.terms.values() {
            num = num.gcd(c.numer());
            den = den.lcm(c.denom());
        }
        let mut c = Q::new(num, den);
        if self.leading_coeff().is_negative() {
            c = -c;
        }
        c
    }

    pub fn primitive(&self) -> (Q, Polynomial) {
        let c = self.content();
        if c.is_one() {
            return (c, self.clone());
        }
        let inv = c.recip();
        (c, self.scale(&inv))
    }

    /// Exact quotient, or `None` if `other` does not divide `self`.
    pub fn div_exact(&self, other: &Polynomial) -> Option<Polynomial> {
        if other.is_zero() {
            return None;
        }
        if self.is_zero() {
            return Some(Polynomial::zero());
        }
        if let Some(c) = other.as_constant() {
            return Some(self.scale(&c.recip()));
        }
        for s in other.vars() {
            if other.degree(s) > self.degree(s) {
                return None;
            }
        }
        let bound: Vec<(Symbol, u32)> = self
            .vars()
            .into_iter()
            .map(|s| (s, self.degree(s) - other.degree(s)))
            .collect();
        let (le, lc) = other.leading().map(|(e, c)| (e.clone(), c.clone()))?;
        let lc_inv = lc.recip();
        let mut rem = self.clone();
        let mut quot = Polynomial::zero();
        while let Some((re, rc)) = rem.leading().map(|(e, c)| (e.clone(), c.clone())) {
            let qe = re.div(&le)?;
            // an exact quotient has degree deg(self) - deg(other) in each variable
            if qe.iter().any(|&(s, k)| bound.iter().find(|b| b.0 == s).map_or(true, |b| k > b.1)) {
                return None;
            }
            let qc = rc * &lc_inv;
            let t = Polynomial::term(qc.clone(), qe.clone());
            rem = rem.sub(&other.mul(&t));
            quot.add_term(qe, qc);
        }
        Some(quot)
    }

    /// Coefficients as a univariate polynomial in `s`: entry `k` is the
    /// coefficient of `s^k`.
    pub fn coefficients_in(&self, s: Symbol) -> Vec<Polynomial> {
        let deg = self.degree(s) as usize;
        let mut out = vec![Polynomial::zero(); deg + 1];
        for (e, c) in &self.terms {
            let k = e.get(s) as usize;
            out[k].add_term(e.without(s), c.clone());
        }
        out
    }

    pub fn from_coefficients_in(s: Symbol, coeffs: &[Polynomial]) -> Polynomial {
        let mut out = Polynomial::zero();
        for (k, p) in coeffs.iter().enumerate() {
            let m = Exponents::var(s, k as u32);
            for (e, c) in &p.terms {
                out.add_term(e.mul(&m), c.clone());
            }
        }
        out
    }

    /// Substitutes `s = value` for a rational value.
    pub fn eval_var(&self, s: Symbol, value: &Q) -> Polynomial {
        let mut out = Polynomial::zero();
        let mut powers: Vec<Q> = vec![Q::one()];
        for (e, c) in &self.terms {
            let k = e.get(s) as usize;
            while powers.len() <= k {
                let next = powers.last().unwrap() * value;
                powers.push(next);
            }
            out.add_term(e.without(s), c * &powers[k]);
        }
        out
    }

    /// Substitutes a polynomial for a variable.
    pub fn compose_var(&self, s: Symbol, value: &Polynomial) -> Polynomial {
        let coeffs = self.coefficients_in(s);
        let mut out = Polynomial::zero();
        for c in coeffs.iter().rev() {
            out = out.mul(value).add(c);
        }
        out
    }

    /// Renames variables; the map must be injective on the variables present.
    pub fn rename(&self, f: impl Fn(Symbol) -> Symbol) -> Polynomial {
        let mut out = Polynomial::zero();
        for (e, c) in &self.terms {
            let mut m = Exponents::one();
            for &(s, k) in e.iter() {
                m = m.mul(&Exponents::var(f(s), k));
            }
            out.add_term(m, c.clone());
        }
        out
    }

    /// Evaluates with every variable bound through `value`.
    pub fn eval_with<T>(&self, value: impl Fn(Symbol) -> T, zero: T, from_q: impl Fn(&Q) -> T) -> T
    where
        T: Clone + std::ops::Add<Output = T> + std::ops::Mul<Output = T>,
    {
        let mut acc = zero;
        for (e, c) in &self.terms {
            let mut t = from_q(c);
            for &(s, k) in e.iter() {
                let v = value(s);
                for _ in 0..k {
                    t = t * v.clone();
                }
            }
            acc = acc + t;
        }
        acc
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        for (k, (e, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let a = c.abs();
            if k == 0 {
                if neg {
                    f.write_str("-")?;
                }
            } else if neg {
                f.write_str(" - ")?;
            } else {
                f.write_str(" + ")?;
            }
            let mut factors: Vec<String> = Vec::new();
            if !a.is_one() || e.is_one() {
                factors.push(fmt_q(&a));
            }
            for (s, p) in e.iter() {
                if *p == 1 {
                    factors.push(s.to_string());
                } else {
                    factors.push(format!("{s}^{p}"));
                }
            }
            f.write_str(&factors.join("*"))?;
        }
        Ok(())
    }
}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Polynomial({self})")
    }
}

#[cfg(test)]
mod tests {
    use super::super::{q_int, vars};
    use super::*;

    fn p(terms: &[(i64, &[(Symbol, u32)])]) -> Polynomial {
        Polynomial::from_terms(terms.iter().map(|(c, e)| {
            let mut x = Exponents::one();
            for &(s, k) in e.iter() {
                x = x.mul(&Exponents::var(s, k));
            }
            (x, q_int(*c))
        }))
    }

    #[test]
    fn lex_order_is_monomial_order() {
        let z = vars::z();
        let h = vars::hbar();
        let a = Exponents::var(h, 1);
        let b = Exponents::var(z, 5);
        // hbar sorts before z, so it has priority.
        assert!(a > b);
        let c = a.mul(&Exponents::var(z, 1));
        assert!(c > a);
        assert!(Exponents::one() < b);
        // multiplicativity
        let m = Exponents::var(z, 2);
        assert_eq!(a.mul(&m).cmp(&b.mul(&m)), a.cmp(&b));
    }

    #[test]
    fn exact_division() {
        let z = vars::z();
        let h = vars::hbar();
        let a = p(&[(1, &[]), (-1, &[(z, 1)])]);
        let b = p(&[(1, &[]), (-1, &[(z, 1), (h, 1)])]);
        let ab = a.mul(&b);
        assert_eq!(ab.div_exact(&a).unwrap(), b);
        assert_eq!(ab.div_exact(&b).unwrap(), a);
        assert!(a.div_exact(&b).is_none());
        assert_eq!(a.sub(&a), Polynomial::zero());
    }

    #[test]
    fn content_and_primitive() {
        let z = vars::z();
        let a = p(&[(-4, &[]), (6, &[(z, 1)])]);
        let (c, pp) = a.primitive();
        assert_eq!(c, q_int(2));
        assert_eq!(pp, p(&[(-2, &[]), (3, &[(z, 1)])]));
        let b = p(&[(4, &[]), (-6, &[(z, 1)])]);
        assert_eq!(b.content(), q_int(-2));
        assert_eq!(a.compose_var(z, &Polynomial::var(z)), a);
    }
}
