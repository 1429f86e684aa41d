use std::collections::BTreeMap;
use std::fmt;

use num_integer::Integer;
use num_traits::{Signed, Zero};

use super::{exp_int, fmt_exp, Exp, Monomial, RationalFunction, Symbol};
use crate::error::{Error, Result};

/// Truncated Puiseux series `Σ c_e q^e` in one distinguished variable.
///
/// Exponents lie in `(1/D)ℤ` and are `≤ N`; terms above `N` are unknown.
/// Coefficients are nonzero rational functions free of the series variable.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PuiseuxSeries {
    var: Symbol,
    den: i64,
    order: Exp,
    terms: Vec<(Exp, RationalFunction)>,
}

fn lcm_den(d: i64, e: &Exp) -> i64 {
    d.lcm(e.denom())
}

impl PuiseuxSeries {
    /// The zero series known through order `order`.
    pub fn zero(var: Symbol, order: Exp) -> Self {
        PuiseuxSeries {
            var,
            den: lcm_den(1, &order),
            order,
            terms: Vec::new(),
        }
    }

    pub fn one(var: Symbol, order: Exp) -> Self {
        PuiseuxSeries::constant(var, RationalFunction::one(), order)
    }

    pub fn constant(var: Symbol, c: RationalFunction, order: Exp) -> Self {
        PuiseuxSeries::monomial(var, c, Exp::zero(), order)
    }

    /// `c·q^e`, truncated at `order`.
    pub fn monomial(var: Symbol, c: RationalFunction, e: Exp, order: Exp) -> Self {
        let mut s = PuiseuxSeries::zero(var, order);
        s.den = lcm_den(s.den, &e);
        if !c.is_zero() && e <= order {
            s.terms.push((e, c));
        }
        s
    }

    /// Builds a series from arbitrary terms: duplicates are summed, zero
    /// coefficients and exponents above `order` dropped.
    pub fn from_terms<I>(var: Symbol, terms: I, order: Exp) -> Result<Self>
    where
        I: IntoIterator<Item = (Exp, RationalFunction)>,
    {
        let mut acc: BTreeMap<Exp, RationalFunction> = BTreeMap::new();
        let mut den = lcm_den(1, &order);
        for (e, c) in terms {
            if c.contains_var(var) {
                return Err(Error::invalid(format!(
                    "coefficient {c} contains the series variable {var}"
                )));
            }
            den = lcm_den(den, &e);
            if e > order || c.is_zero() {
                continue;
            }
            add_into(&mut acc, e, c)?;
        }
        Ok(PuiseuxSeries {
            var,
            den,
            order,
            terms: acc.into_iter().collect(),
        })
    }

    pub fn var(&self) -> Symbol {
        self.var
    }

    /// Exponent denominator `D`.
    pub fn den(&self) -> i64 {
        self.den
    }

    /// Truncation order `N`.
    pub fn order(&self) -> Exp {
        self.order
    }

    pub fn terms(&self) -> &[(Exp, RationalFunction)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, e: Exp) -> RationalFunction {
        match self.terms.binary_search_by(|(x, _)| x.cmp(&e)) {
            Ok(i) => self.terms[i].1.clone(),
            Err(_) => RationalFunction::zero(),
        }
    }

    /// Lowest exponent with a nonzero coefficient.
    pub fn valuation(&self) -> Option<Exp> {
        self.terms.first().map(|(e, _)| *e)
    }

    /// Valuation for truncation bookkeeping: the zero series counts as
    /// vanishing through its order.
    fn val_or_order(&self) -> Exp {
        self.valuation().unwrap_or(self.order)
    }

    pub fn with_den(mut self, d: i64) -> Self {
        self.den = self.den.lcm(&d);
        self
    }

    /// Forgets all knowledge above `order` (which must not exceed the current order).
    pub fn truncate(&self, order: Exp) -> Self {
        let order = if order < self.order { order } else { self.order };
        PuiseuxSeries {
            var: self.var,
            den: lcm_den(self.den, &order),
            order,
            terms: self.terms.iter().filter(|(e, _)| *e <= order).cloned().collect(),
        }
    }

    fn check_var(&self, other: &PuiseuxSeries) -> Result<()> {
        if self.var != other.var {
            return Err(Error::invalid(format!(
                "series variables differ: {} vs {}",
                self.var, other.var
            )));
        }
        Ok(())
    }

    pub fn neg(&self) -> Self {
        PuiseuxSeries {
            var: self.var,
            den: self.den,
            order: self.order,
            terms: self.terms.iter().map(|(e, c)| (*e, c.neg())).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_var(other)?;
        let order = self.order.min(other.order);
        let mut acc: BTreeMap<Exp, RationalFunction> = BTreeMap::new();
        for (e, c) in self.terms.iter().chain(other.terms.iter()) {
            if *e <= order {
                add_into(&mut acc, *e, c.clone())?;
            }
        }
        Ok(PuiseuxSeries {
            var: self.var,
            den: lcm_den(self.den.lcm(&other.den), &order),
            order,
            terms: acc.into_iter().collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_var(other)?;
        let va = self.val_or_order();
        let vb = other.val_or_order();
        let zero = Exp::zero();
        let order = (self.order + vb.min(zero)).min(other.order + va.min(zero));
        let mut acc: BTreeMap<Exp, RationalFunction> = BTreeMap::new();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e = *ea + *eb;
                if e > order {
                    break;
                }
                add_into(&mut acc, e, ca.mul(cb))?;
            }
        }
        Ok(PuiseuxSeries {
            var: self.var,
            den: lcm_den(self.den.lcm(&other.den), &order),
            order,
            terms: acc.into_iter().collect(),
        })
    }

    /// Multiplies every coefficient by a rational function free of the series variable.
    pub fn scale(&self, c: &RationalFunction) -> Result<Self> {
        if c.contains_var(self.var) {
            return Err(Error::invalid("scalar contains the series variable"));
        }
        if c.is_zero() {
            return Ok(PuiseuxSeries::zero(self.var, self.order).with_den(self.den));
        }
        Ok(PuiseuxSeries {
            var: self.var,
            den: self.den,
            order: self.order,
            terms: self.terms.iter().map(|(e, x)| (*e, x.mul(c))).collect(),
        })
    }

    /// Multiplies by `q^e`; the truncation order shifts along.
    pub fn shift(&self, e: Exp) -> Self {
        PuiseuxSeries {
            var: self.var,
            den: lcm_den(self.den, &e),
            order: self.order + e,
            terms: self.terms.iter().map(|(x, c)| (*x + e, c.clone())).collect(),
        }
    }

    /// Multiplicative inverse.
    ///
    /// Writing `a = c·q^v·(1 + u)`, the inverse is known through order `N − 2v`.
    pub fn inv(&self) -> Result<Self> {
        let Some((v, c)) = self.terms.first().cloned() else {
            return Err(Error::ZeroSeries);
        };
        let c_inv = c.inv()?;
        let d = self.den;
        let rel_order = self.order - v;
        let kmax = (rel_order * exp_int(d)).floor().to_integer();
        // u_k: coefficient of q^{k/D} in (a / (c q^v)) - 1
        let mut u: Vec<(i64, RationalFunction)> = Vec::new();
        for (e, x) in self.terms.iter().skip(1) {
            let k = ((*e - v) * exp_int(d)).to_integer();
            if k > kmax {
                break;
            }
            u.push((k, x.mul(&c_inv)));
        }
        let mut r: Vec<RationalFunction> = Vec::with_capacity(kmax.max(0) as usize + 1);
        for k in 0..=kmax.max(-1) {
            if k == 0 {
                r.push(RationalFunction::one());
                continue;
            }
            let mut acc = RationalFunction::zero();
            for (j, uj) in &u {
                if *j > k {
                    break;
                }
                let prev = &r[(k - j) as usize];
                if !prev.is_zero() {
                    acc = acc.sub(&uj.mul(prev))?;
                }
            }
            r.push(acc);
        }
        let order = self.order - v - v;
        let mut terms = Vec::new();
        for (k, x) in r.into_iter().enumerate() {
            let e = Exp::new(k as i64, d) - v;
            if !x.is_zero() && e <= order {
                terms.push((e, x.mul(&c_inv)));
            }
        }
        Ok(PuiseuxSeries {
            var: self.var,
            den: lcm_den(d, &order),
            order,
            terms,
        })
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        self.mul(&other.inv()?)
    }

    pub fn pow(&self, k: i64) -> Result<Self> {
        if k == 0 {
            return Ok(PuiseuxSeries::one(self.var, self.order));
        }
        let base = if k < 0 { self.inv()? } else { self.clone() };
        let mut acc = base.clone();
        for _ in 1..k.unsigned_abs() {
            acc = acc.mul(&base)?;
        }
        Ok(acc)
    }

    /// Applies `f` to every coefficient and re-canonicalizes.
    pub fn map_coeffs(
        &self,
        f: impl Fn(&RationalFunction) -> Result<RationalFunction>,
    ) -> Result<Self> {
        let mut terms = Vec::with_capacity(self.terms.len());
        for (e, c) in &self.terms {
            terms.push((*e, f(c)?));
        }
        Ok(PuiseuxSeries::from_terms(self.var, terms, self.order)?.with_den(self.den))
    }

    /// Coefficient of `q^0` when no negative powers are present.
    pub fn limit_q0(&self) -> Result<RationalFunction> {
        if let Some((e, _)) = self.terms.first() {
            if e.is_negative() {
                return Err(Error::DivergentLimit(fmt_exp(e)));
            }
        }
        if self.order.is_negative() {
            return Err(Error::invalid(format!(
                "truncation order {} does not determine the q^0 coefficient",
                fmt_exp(&self.order)
            )));
        }
        Ok(self.coeff(Exp::zero()))
    }

    /// Substitutes `x ↦ x·q^s` for a coefficient variable `x`.
    ///
    /// Each coefficient `x^k·P(x)/Q(x)` (with `P(0), Q(0) ≠ 0`) is re-expanded
    /// as a series in `q`. For `s > 0` this needs `k ≥ 0` (regular at `x = 0`),
    /// for `s < 0` it needs `k + deg P − deg Q ≤ 0` (regular at `x = ∞`):
    /// otherwise unknown terms above the truncation order could move below it.
    /// The result keeps the truncation order.
    pub fn substitute_slope(&self, x: Symbol, s: Exp) -> Result<Self> {
        if x == self.var {
            return Err(Error::invalid("cannot substitute into the series variable"));
        }
        if s.is_zero() {
            return Ok(self.clone());
        }
        let q = self.var;
        let n = self.order;
        let mut acc: BTreeMap<Exp, RationalFunction> = BTreeMap::new();
        for (e0, f) in &self.terms {
            let k = f.prefactor().exp(x);
            let dn = f.numer().degree(x) as i64;
            let dd = f.denom().degree(x) as i64;
            if s.is_positive() && k.is_negative() {
                return Err(Error::NonExpandableCoefficient(format!(
                    "{f} has a pole at {x}=0"
                )));
            }
            if s.is_negative() && k + exp_int(dn - dd) > Exp::zero() {
                return Err(Error::NonExpandableCoefficient(format!(
                    "{f} has a pole at {x}=∞"
                )));
            }
            let shift = *e0 + k * s;
            let target = n - shift;
            if target.is_negative() && !(s.is_negative()) {
                continue;
            }
            let rest = f.prefactor().split_off(x).1;
            let ns = poly_in_q(f.numer(), x, s, q)?;
            let ds = poly_in_q(f.denom(), x, s, q)?;
            let v_n = ns.val_or_order().min(Exp::zero());
            let v_d = ds.val_or_order();
            let n_d = target - v_n + v_d + v_d;
            let inv_d = PuiseuxSeries { order: n_d, ..ds }.truncate(n_d).inv()?;
            let v_inv = inv_d.val_or_order().min(Exp::zero());
            let ns = PuiseuxSeries {
                order: target - v_inv,
                ..ns
            }
            .truncate(target - v_inv);
            let prod = ns.mul(&inv_d)?;
            let xk = Monomial::var_pow(x, k);
            for (e, c) in prod.terms {
                let ee = e + shift;
                if ee <= n {
                    add_into(&mut acc, ee, c.mul_monomial(&xk).mul_monomial(&rest))?;
                }
            }
        }
        let mut den = self.den.lcm(s.denom());
        for e in acc.keys() {
            den = lcm_den(den, e);
        }
        Ok(PuiseuxSeries {
            var: q,
            den,
            order: n,
            terms: acc.into_iter().collect(),
        })
    }

    /// Expands every coefficient in the variable `x` at `x = 0` through
    /// `x`-order `xorder`, giving a map `(x-exponent, q-exponent) → coefficient`.
    pub fn bi_expand(&self, x: Symbol, xorder: Exp) -> Result<BiSeries> {
        let mut map = BTreeMap::new();
        for (e, c) in &self.terms {
            for (k, ck) in c.expand_at_zero(x, xorder)? {
                add_into_bi(&mut map, (k, *e), ck)?;
            }
        }
        Ok(BiSeries {
            x,
            q: self.var,
            xorder,
            qorder: self.order,
            terms: map,
        })
    }
}

/// Polynomial `P(x q^s)` as an exact series in `q` (order set to the top exponent).
fn poly_in_q(
    p: &super::Polynomial,
    x: Symbol,
    s: Exp,
    q: Symbol,
) -> Result<PuiseuxSeries> {
    let coeffs = p.coefficients_in(x);
    let mut terms = Vec::new();
    let mut top = Exp::zero();
    for (j, c) in coeffs.into_iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let e = s * exp_int(j as i64);
        if e > top {
            top = e;
        }
        let rf = RationalFunction::from_poly(c).mul_monomial(&Monomial::var_pow(x, exp_int(j as i64)));
        terms.push((e, rf));
    }
    PuiseuxSeries::from_terms(q, terms, top)
}

pub(crate) fn add_into(
    acc: &mut BTreeMap<Exp, RationalFunction>,
    e: Exp,
    c: RationalFunction,
) -> Result<()> {
    if c.is_zero() {
        return Ok(());
    }
    match acc.entry(e) {
        std::collections::btree_map::Entry::Vacant(v) => {
            v.insert(c);
        }
        std::collections::btree_map::Entry::Occupied(mut o) => {
            let s = o.get().add(&c)?;
            if s.is_zero() {
                o.remove();
            } else {
                *o.get_mut() = s;
            }
        }
    }
    Ok(())
}

fn add_into_bi(
    acc: &mut BTreeMap<(Exp, Exp), RationalFunction>,
    key: (Exp, Exp),
    c: RationalFunction,
) -> Result<()> {
    if c.is_zero() {
        return Ok(());
    }
    match acc.entry(key) {
        std::collections::btree_map::Entry::Vacant(v) => {
            v.insert(c);
        }
        std::collections::btree_map::Entry::Occupied(mut o) => {
            let s = o.get().add(&c)?;
            if s.is_zero() {
                o.remove();
            } else {
                *o.get_mut() = s;
            }
        }
    }
    Ok(())
}

/// A doubly truncated expansion `Σ c_{k,e} x^k q^e` used to compare a
/// `q`-series with coefficients in `x` against an `x`-series with
/// coefficients in `q` on their common window.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BiSeries {
    pub x: Symbol,
    pub q: Symbol,
    pub xorder: Exp,
    pub qorder: Exp,
    pub terms: BTreeMap<(Exp, Exp), RationalFunction>,
}

impl BiSeries {
    /// Builds the expansion from `Σ_k c_k(q) x^k` given as `(k, c_k)` pairs,
    /// expanding each `c_k` at `q = 0` through `qorder`.
    pub fn from_x_series(
        x: Symbol,
        q: Symbol,
        coeffs: &[(Exp, RationalFunction)],
        xorder: Exp,
        qorder: Exp,
    ) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (k, c) in coeffs {
            if *k > xorder {
                continue;
            }
            for (e, ce) in c.expand_at_zero(q, qorder)? {
                add_into_bi(&mut map, (*k, e), ce)?;
            }
        }
        Ok(BiSeries {
            x,
            q,
            xorder,
            qorder,
            terms: map,
        })
    }

    /// Restriction to `x`-exponents `≤ xorder` and `q`-exponents `≤ qorder`.
    pub fn window(&self, xorder: Exp, qorder: Exp) -> BiSeries {
        BiSeries {
            x: self.x,
            q: self.q,
            xorder,
            qorder,
            terms: self
                .terms
                .iter()
                .filter(|((k, e), _)| *k <= xorder && *e <= qorder)
                .map(|(k, c)| (*k, c.clone()))
                .collect(),
        }
    }

    /// First key where the two expansions differ on the common window.
    pub fn first_difference(&self, other: &BiSeries) -> Option<(Exp, Exp)> {
        let xo = self.xorder.min(other.xorder);
        let qo = self.qorder.min(other.qorder);
        let a = self.window(xo, qo);
        let b = other.window(xo, qo);
        let mut keys: Vec<_> = a.terms.keys().chain(b.terms.keys()).cloned().collect();
        keys.sort();
        keys.dedup();
        keys.into_iter().find(|k| a.terms.get(k) != b.terms.get(k))
    }
}

impl fmt::Display for PuiseuxSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let q = self.var;
        for (i, (e, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            if e.is_zero() {
                write!(f, "[{c}]")?;
            } else {
                write!(f, "[{c}]*{q}^({})", fmt_exp(e))?;
            }
        }
        if !self.terms.is_empty() {
            f.write_str(" + ")?;
        }
        write!(f, "O({q}^({}+))", fmt_exp(&self.order))
    }
}

impl fmt::Debug for PuiseuxSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Series[{self}]")
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse::parse_rf;
    use super::super::{exp_frac, vars};
    use super::*;

    fn ser(terms: &[(Exp, &str)], order: i64) -> PuiseuxSeries {
        PuiseuxSeries::from_terms(
            vars::q(),
            terms.iter().map(|(e, c)| (*e, parse_rf(c).unwrap())),
            exp_int(order),
        )
        .unwrap()
    }

    #[test]
    fn product_of_binomials() {
        let a = ser(&[(exp_int(0), "1"), (exp_int(1), "z")], 4);
        let b = ser(&[(exp_int(0), "1"), (exp_int(1), "-z")], 4);
        let p = a.mul(&b).unwrap();
        assert_eq!(p, ser(&[(exp_int(0), "1"), (exp_int(2), "-z^2")], 4));
        assert!(a.add(&a.neg()).unwrap().is_zero());
    }

    #[test]
    fn theta_factor_product_truncated() {
        let a = ser(&[(exp_int(0), "1"), (exp_int(1), "-x")], 1);
        let b = ser(&[(exp_int(0), "1"), (exp_int(1), "-1/x")], 1);
        let p = a.mul(&b).unwrap();
        assert_eq!(p, ser(&[(exp_int(0), "1"), (exp_int(1), "-x-1/x")], 1));
    }

    #[test]
    fn inverses() {
        let a = ser(&[(exp_int(0), "1"), (exp_int(1), "-z")], 5);
        let inv = a.inv().unwrap();
        for k in 0..=5 {
            assert_eq!(inv.coeff(exp_int(k)), parse_rf(&format!("z^{k}")).unwrap());
        }
        let h = PuiseuxSeries::monomial(vars::q(), RationalFunction::one(), exp_frac(1, 2), exp_int(3));
        let hi = h.inv().unwrap();
        assert_eq!(hi.terms().len(), 1);
        assert_eq!(hi.valuation(), Some(exp_frac(-1, 2)));
        assert_eq!(hi.order(), exp_int(2));
        let c = ser(&[(exp_int(0), "hbar^(1/2)"), (exp_int(1), "hbar^(1/2)")], 4);
        let ci = c.inv().unwrap();
        assert_eq!(ci.coeff(exp_int(3)), parse_rf("-hbar^(-1/2)").unwrap());
        assert!(ser(&[], 3).inv().is_err());
    }

    #[test]
    fn slope_substitution() {
        let z = vars::z();
        let a = ser(&[(exp_int(0), "1-z")], 3);
        let s = a.substitute_slope(z, exp_int(1)).unwrap();
        assert_eq!(s, ser(&[(exp_int(0), "1"), (exp_int(1), "-z")], 3));
        let g = ser(&[(exp_int(0), "1/(1-z)")], 3);
        let h = g.substitute_slope(z, exp_frac(1, 2)).unwrap();
        assert_eq!(h.den(), 2);
        for d in 0..=6 {
            assert_eq!(h.coeff(exp_frac(d, 2)), parse_rf(&format!("z^{d}")).unwrap());
        }
        let bad = ser(&[(exp_int(0), "1/z")], 3);
        assert!(bad.substitute_slope(z, exp_int(1)).is_err());
        assert!(bad.substitute_slope(z, exp_int(-1)).is_ok());
    }

    #[test]
    fn limits() {
        let a = ser(&[(exp_int(0), "1"), (exp_int(1), "-z"), (exp_int(2), "z^2")], 3);
        assert!(a.limit_q0().unwrap().is_one());
        let b = ser(&[(exp_int(-1), "z")], 3);
        assert!(matches!(b.limit_q0(), Err(Error::DivergentLimit(_))));
    }
}
