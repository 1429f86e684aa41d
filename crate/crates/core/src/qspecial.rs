//! q-Pochhammer symbols, the theta function and theta-product expressions
//! as truncated series in `q`.

use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::arith::{
    exp_int, fmt_exp, fmt_q, vars, Exp, Monomial, PuiseuxSeries, RationalFunction, Symbol, Q,
};
use crate::error::{Error, Result};

/// Factor-count guard for infinite products.
const MAX_FACTORS: i64 = 100_000;

/// A product `c · m · q^e` of a rational constant, a coefficient monomial and
/// a power of the series variable.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QMonomial {
    pub coeff: Q,
    pub mono: Monomial,
    pub qexp: Exp,
}

impl QMonomial {
    pub fn new(coeff: Q, mono: Monomial, qexp: Exp) -> Self {
        QMonomial { coeff, mono, qexp }
    }

    pub fn mono(mono: Monomial) -> Self {
        QMonomial::new(Q::one(), mono, Exp::zero())
    }

    pub fn q_pow(e: Exp) -> Self {
        QMonomial::new(Q::one(), Monomial::one(), e)
    }

    pub fn var(s: Symbol) -> Self {
        QMonomial::mono(Monomial::var(s))
    }

    pub fn mul(&self, other: &QMonomial) -> QMonomial {
        QMonomial {
            coeff: &self.coeff * &other.coeff,
            mono: &self.mono * &other.mono,
            qexp: self.qexp + other.qexp,
        }
    }

    pub fn inv(&self) -> Result<QMonomial> {
        if self.coeff.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(QMonomial {
            coeff: self.coeff.recip(),
            mono: self.mono.inv(),
            qexp: -self.qexp,
        })
    }

    pub fn shift_q(&self, e: Exp) -> QMonomial {
        QMonomial {
            qexp: self.qexp + e,
            ..self.clone()
        }
    }

    /// Substitutes `x ↦ x·q^s`.
    pub fn substitute_slope(&self, x: Symbol, s: Exp) -> QMonomial {
        QMonomial {
            qexp: self.qexp + self.mono.exp(x) * s,
            ..self.clone()
        }
    }

    pub fn coefficient_rf(&self) -> RationalFunction {
        RationalFunction::monomial(self.coeff.clone(), self.mono.clone())
    }

    pub fn to_series(&self, q: Symbol, order: Exp) -> PuiseuxSeries {
        PuiseuxSeries::monomial(q, self.coefficient_rf(), self.qexp, order)
    }
}

impl fmt::Display for QMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if !self.coeff.is_one() || (self.mono.is_one() && self.qexp.is_zero()) {
            parts.push(fmt_q(&self.coeff));
        }
        if !self.mono.is_one() {
            parts.push(self.mono.to_string());
        }
        if !self.qexp.is_zero() {
            parts.push(format!("q^({})", fmt_exp(&self.qexp)));
        }
        f.write_str(&parts.join("*"))
    }
}

/// `1 − x`, as an exact series through `order`.
fn one_minus(x: &QMonomial, q: Symbol, order: Exp) -> Result<PuiseuxSeries> {
    PuiseuxSeries::one(q, order).sub(&x.to_series(q, order))
}

/// `(x; q)_d = (1 − x)(1 − xq)⋯(1 − xq^{d−1})`, exact through `order`.
pub fn pochhammer_finite(x: &QMonomial, d: u32, order: Exp) -> Result<PuiseuxSeries> {
    let q = vars::q();
    let vneg: Exp = (0..d as i64)
        .map(|i| (x.qexp + exp_int(i)).min(Exp::zero()))
        .sum();
    let work = order - vneg;
    let mut acc = PuiseuxSeries::one(q, work);
    for i in 0..d as i64 {
        let f = one_minus(&x.shift_q(exp_int(i)), q, work)?;
        acc = acc.mul(&f)?.truncate(work);
    }
    Ok(acc.truncate(order))
}

/// `(x; q)_d` with `q` treated as an ordinary symbol: an exact rational function.
pub fn pochhammer_finite_rf(x: &RationalFunction, q: Symbol, d: u32) -> Result<RationalFunction> {
    let mut acc = RationalFunction::one();
    let mut qi = RationalFunction::one();
    for _ in 0..d {
        acc = acc.mul(&RationalFunction::one().sub(&x.mul(&qi))?);
        qi = qi.mul(&RationalFunction::var(q));
    }
    Ok(acc)
}

/// `(x; q)_∞ = ∏_{i≥0} (1 − x q^i)`, exact through `order`.
///
/// Factors with `qexp(x) + i ≤ 0` are kept exactly (a factor with exponent 0
/// is a `q`-free coefficient); a factor with positive exponent `v` is `1 + O(q^v)`
/// and is included while `v ≤ order − V`, where `V ≤ 0` is the total valuation
/// of the non-positive factors.
pub fn pochhammer_infinite(x: &QMonomial, order: Exp) -> Result<PuiseuxSeries> {
    let q = vars::q();
    if x.coeff.is_zero() {
        return Ok(PuiseuxSeries::one(q, order));
    }
    let r = x.qexp;
    // first index with positive exponent
    let first_pos = {
        let f = (-r).floor().to_integer() + 1;
        f.max(0)
    };
    if first_pos > MAX_FACTORS {
        return Err(Error::NonConvergentProduct(format!(
            "argument {x} needs more than {MAX_FACTORS} factors"
        )));
    }
    let vneg: Exp = (0..first_pos).map(|i| r + exp_int(i)).sum();
    let work = order - vneg;
    let mut neg = PuiseuxSeries::one(q, work);
    for i in 0..first_pos {
        let f = one_minus(&x.shift_q(exp_int(i)), q, work)?;
        neg = neg.mul(&f)?;
    }
    let mut pos = PuiseuxSeries::one(q, work);
    let last = (work - r).floor().to_integer();
    if last - first_pos > MAX_FACTORS {
        return Err(Error::NonConvergentProduct(format!(
            "argument {x} needs more than {MAX_FACTORS} factors"
        )));
    }
    let mut i = first_pos;
    while r + exp_int(i) <= work {
        let f = one_minus(&x.shift_q(exp_int(i)), q, work)?;
        pos = pos.mul(&f)?.truncate(work);
        i += 1;
    }
    Ok(neg.mul(&pos)?.truncate(order))
}

/// Valuation in `q` of `(x; q)_∞` restricted to factors `i ≥ start`.
fn pochhammer_valuation(r: Exp, start: i64) -> Exp {
    let mut v = Exp::zero();
    let mut i = start;
    while r + exp_int(i) < Exp::zero() {
        v += r + exp_int(i);
        i += 1;
    }
    v
}

/// `q`-valuation of `θ(c·m·q^r)`.
pub fn theta_valuation(r: Exp) -> Exp {
    -r.abs() / exp_int(2) + pochhammer_valuation(r, 1) + pochhammer_valuation(-r, 1)
}

/// `θ(x) = (x^{1/2} − x^{−1/2}) (qx; q)_∞ (q/x; q)_∞`, exact through `order`.
///
/// The argument must have coefficient 1 so that `x^{1/2}` is a monomial.
pub fn theta(x: &QMonomial, order: Exp) -> Result<PuiseuxSeries> {
    if !x.coeff.is_one() {
        return Err(Error::NonRepresentable(format!(
            "theta argument {x} must have unit coefficient"
        )));
    }
    let q = vars::q();
    let r = x.qexp;
    let half = exp_int(1) / exp_int(2);
    let v_pre = -r.abs() * half;
    let v_a = pochhammer_valuation(r, 1);
    let v_b = pochhammer_valuation(-r, 1);
    let sqrt = QMonomial::new(Q::one(), x.mono.pow(half), r * half);
    let pre_order = order - v_a - v_b;
    let pre = sqrt
        .to_series(q, pre_order)
        .sub(&sqrt.inv()?.to_series(q, pre_order))?;
    let a = pochhammer_infinite(&x.shift_q(exp_int(1)), order - v_pre - v_b)?;
    let b = pochhammer_infinite(&x.inv()?.shift_q(exp_int(1)), order - v_pre - v_a)?;
    Ok(pre.mul(&a)?.mul(&b)?.truncate(order))
}

/// `c · m · q^e · ∏ θ(x_k)^{n_k}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ThetaProduct {
    pub scalar: QMonomial,
    pub factors: Vec<(QMonomial, i32)>,
}

impl ThetaProduct {
    pub fn constant(c: QMonomial) -> Self {
        ThetaProduct {
            scalar: c,
            factors: Vec::new(),
        }
    }

    pub fn theta(x: QMonomial) -> Self {
        ThetaProduct {
            scalar: QMonomial::mono(Monomial::one()),
            factors: vec![(x, 1)],
        }
    }

    /// `θ(num) / θ(den)`.
    pub fn ratio(num: QMonomial, den: QMonomial) -> Self {
        ThetaProduct {
            scalar: QMonomial::mono(Monomial::one()),
            factors: vec![(num, 1), (den, -1)],
        }
    }

    pub fn mul(&self, other: &ThetaProduct) -> ThetaProduct {
        let mut factors = self.factors.clone();
        factors.extend(other.factors.iter().cloned());
        ThetaProduct {
            scalar: self.scalar.mul(&other.scalar),
            factors,
        }
    }

    pub fn inv(&self) -> Result<ThetaProduct> {
        Ok(ThetaProduct {
            scalar: self.scalar.inv()?,
            factors: self.factors.iter().map(|(x, n)| (x.clone(), -n)).collect(),
        })
    }

    pub fn substitute_slope(&self, x: Symbol, s: Exp) -> ThetaProduct {
        ThetaProduct {
            scalar: self.scalar.substitute_slope(x, s),
            factors: self
                .factors
                .iter()
                .map(|(a, n)| (a.substitute_slope(x, s), *n))
                .collect(),
        }
    }

    /// Analytic `q`-valuation.
    pub fn valuation(&self) -> Exp {
        self.scalar.qexp
            + self
                .factors
                .iter()
                .map(|(x, n)| theta_valuation(x.qexp) * exp_int(*n as i64))
                .sum::<Exp>()
    }

    /// Moves each theta argument to `q`-exponent in `[0, 1)` using
    /// `θ(q^m x) = (−1)^m q^{−m²/2} x^{−m} θ(x)`.
    pub fn reduced(&self) -> ThetaProduct {
        let mut scalar = self.scalar.clone();
        let mut factors = Vec::with_capacity(self.factors.len());
        for (x, n) in &self.factors {
            let m = x.qexp.floor();
            let f = x.qexp - m;
            let mi = m.to_integer();
            let k = exp_int(mi * *n as i64);
            if mi != 0 {
                if (mi * *n as i64) % 2 != 0 {
                    scalar.coeff = -scalar.coeff;
                }
                scalar.mono = &scalar.mono * &x.mono.pow(-k);
                scalar.qexp = scalar.qexp - k * (m / exp_int(2) + f);
            }
            factors.push((QMonomial { qexp: f, ..x.clone() }, *n));
        }
        ThetaProduct { scalar, factors }
    }

    /// Expansion exact through `order`.
    pub fn expand(&self, order: Exp) -> Result<PuiseuxSeries> {
        let q = vars::q();
        if self.scalar.coeff.is_zero() {
            return Ok(PuiseuxSeries::zero(q, order));
        }
        if self.factors.iter().any(|(x, _)| x.qexp < Exp::zero() || x.qexp >= exp_int(1)) {
            return self.reduced().expand(order);
        }
        let target = order - self.scalar.qexp;
        let vals: Vec<Exp> = self
            .factors
            .iter()
            .map(|(x, n)| theta_valuation(x.qexp) * exp_int(*n as i64))
            .collect();
        let neg_total: Exp = vals.iter().map(|v| (*v).min(Exp::zero())).sum();
        let mut acc = PuiseuxSeries::one(q, target - neg_total);
        for (k, (x, n)) in self.factors.iter().enumerate() {
            let own = vals[k].min(Exp::zero());
            let nf = target - (neg_total - own);
            let vt = theta_valuation(x.qexp);
            let f = if *n > 0 {
                let t = theta(x, nf - exp_int(*n as i64 - 1) * vt)?;
                t.pow(*n as i64)?
            } else if *n < 0 {
                let t = theta(x, nf + vt + vt)?;
                t.inv()?.pow(-(*n as i64))?
            } else {
                continue;
            };
            acc = acc.mul(&f)?;
        }
        let scaled = acc.scale(&self.scalar.coefficient_rf())?.shift(self.scalar.qexp);
        Ok(scaled.truncate(order))
    }
}

impl fmt::Display for ThetaProduct {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.scalar)?;
        for (x, n) in &self.factors {
            if *n == 1 {
                write!(f, "*theta({x})")?;
            } else {
                write!(f, "*theta({x})^({n})")?;
            }
        }
        Ok(())
    }
}

/// A finite sum of theta products.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ThetaExpr {
    pub terms: Vec<ThetaProduct>,
}

impl ThetaExpr {
    pub fn zero() -> Self {
        ThetaExpr { terms: Vec::new() }
    }

    pub fn one() -> Self {
        ThetaExpr::from(ThetaProduct::constant(QMonomial::mono(Monomial::one())))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn substitute_slope(&self, x: Symbol, s: Exp) -> ThetaExpr {
        ThetaExpr {
            terms: self.terms.iter().map(|t| t.substitute_slope(x, s)).collect(),
        }
    }

    pub fn add(&self, other: &ThetaExpr) -> ThetaExpr {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        ThetaExpr { terms }
    }

    pub fn mul(&self, other: &ThetaExpr) -> ThetaExpr {
        let mut terms = Vec::new();
        for a in &self.terms {
            for b in &other.terms {
                terms.push(a.mul(b));
            }
        }
        ThetaExpr { terms }
    }

    pub fn expand(&self, order: Exp) -> Result<PuiseuxSeries> {
        let mut acc = PuiseuxSeries::zero(vars::q(), order);
        for t in &self.terms {
            acc = acc.add(&t.expand(order)?)?;
        }
        Ok(acc)
    }

    /// The `q → 0` limit: the `q^0` coefficient, failing if any term has a
    /// negative power of `q`.
    pub fn limit_q0(&self) -> Result<RationalFunction> {
        self.expand(Exp::zero())?.limit_q0()
    }
}

impl From<ThetaProduct> for ThetaExpr {
    fn from(t: ThetaProduct) -> Self {
        ThetaExpr { terms: vec![t] }
    }
}

impl fmt::Display for ThetaExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self.terms.iter().map(|t| t.to_string()).collect();
        f.write_str(&parts.join(" + "))
    }
}

/// `Ψ₀(z) = (zħ; q)_∞ / (z; q)_∞` as a `q`-series through `order`.
pub fn psi0_closed(order: Exp) -> Result<PuiseuxSeries> {
    let z = Monomial::var(vars::z());
    let zh = &z * &Monomial::var(vars::hbar());
    let num = pochhammer_infinite(&QMonomial::mono(zh), order)?;
    let den = pochhammer_infinite(&QMonomial::mono(z), order)?;
    num.div(&den)
}

/// Coefficients `(ħ)_d/(q)_d` of `z^d` in `Ψ₀`, `q` as a formal symbol, `d ≤ zorder`.
pub fn psi0_sum(zorder: u32) -> Result<Vec<RationalFunction>> {
    let q = vars::q();
    let h = RationalFunction::var(vars::hbar());
    let mut out = Vec::with_capacity(zorder as usize + 1);
    for d in 0..=zorder {
        let num = pochhammer_finite_rf(&h, q, d)?;
        let den = pochhammer_finite_rf(&RationalFunction::var(q), q, d)?;
        out.push(num.div(&den)?);
    }
    Ok(out)
}

/// `Ψ∞(z) = ħ^{1/2} (q/z; q)_∞ / (q/(zħ); q)_∞` as a `q`-series through `order`.
pub fn psi_inf_closed(order: Exp) -> Result<PuiseuxSeries> {
    let zi = Monomial::var(vars::z()).inv();
    let zhi = &zi * &Monomial::var(vars::hbar()).inv();
    let num = pochhammer_infinite(&QMonomial::new(Q::one(), zi, exp_int(1)), order)?;
    let den = pochhammer_infinite(&QMonomial::new(Q::one(), zhi, exp_int(1)), order)?;
    let sqrt_h = RationalFunction::monomial(
        Q::one(),
        Monomial::var_pow(vars::hbar(), exp_int(1) / exp_int(2)),
    );
    num.div(&den)?.scale(&sqrt_h)
}

/// Coefficients of `z^{-d}` in `Ψ∞`: `ħ^{1/2} (ħ)_d/(q)_d (q/ħ)^d`, `q` formal.
pub fn psi_inf_sum(zorder: u32) -> Result<Vec<RationalFunction>> {
    let q = vars::q();
    let h = RationalFunction::var(vars::hbar());
    let sqrt_h = RationalFunction::monomial(
        Q::one(),
        Monomial::var_pow(vars::hbar(), exp_int(1) / exp_int(2)),
    );
    let q_over_h = RationalFunction::var(q).div(&h)?;
    psi0_sum(zorder)?
        .into_iter()
        .enumerate()
        .map(|(d, c)| Ok(c.mul(&q_over_h.pow(d as i64)?).mul(&sqrt_h)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::exp_frac;
    use crate::arith::parse::parse_rf;

    fn qm(s: &str, e: Exp) -> QMonomial {
        let (c, m) = parse_rf(s).unwrap().as_monomial().unwrap();
        QMonomial::new(c, m, e)
    }

    fn ser(terms: &[(i64, &str)], order: i64) -> PuiseuxSeries {
        PuiseuxSeries::from_terms(
            vars::q(),
            terms.iter().map(|(e, c)| (exp_int(*e), parse_rf(c).unwrap())),
            exp_int(order),
        )
        .unwrap()
    }

    #[test]
    fn finite_pochhammer() {
        let x = qm("x", Exp::zero());
        assert_eq!(pochhammer_finite(&x, 0, exp_int(3)).unwrap(), ser(&[(0, "1")], 3));
        let two = pochhammer_finite(&x, 2, exp_int(3)).unwrap();
        assert_eq!(two, ser(&[(0, "1-x"), (1, "x^2-x")], 3));
        let d = 3;
        let e = 2;
        let lhs = pochhammer_finite(&x, d, exp_int(10))
            .unwrap()
            .mul(&pochhammer_finite(&x.shift_q(exp_int(d as i64)), e, exp_int(10)).unwrap())
            .unwrap();
        assert_eq!(lhs, pochhammer_finite(&x, d + e, exp_int(10)).unwrap());
        let r = pochhammer_finite_rf(&parse_rf("hbar").unwrap(), vars::q(), 1)
            .unwrap()
            .div(&pochhammer_finite_rf(&parse_rf("q").unwrap(), vars::q(), 1).unwrap())
            .unwrap();
        assert_eq!(r, parse_rf("(1-hbar)/(1-q)").unwrap());
    }

    #[test]
    fn infinite_pochhammer() {
        let p = pochhammer_infinite(&qm("z", exp_int(1)), exp_int(2)).unwrap();
        let direct = ser(&[(0, "1"), (1, "-z"), (2, "-z")], 2);
        assert_eq!(p, direct);
        let p2 = pochhammer_infinite(&qm("1/z", exp_int(1)), exp_int(1)).unwrap();
        assert_eq!(p2, ser(&[(0, "1"), (1, "-1/z")], 1));
        let p3 = pochhammer_infinite(&qm("z", Exp::zero()), exp_int(1)).unwrap();
        assert_eq!(p3, ser(&[(0, "1-z"), (1, "z^2-z")], 1));
    }

    #[test]
    fn theta_low_order() {
        let t = theta(&qm("z", Exp::zero()), exp_int(1)).unwrap();
        // (z^{1/2} - z^{-1/2})(1 - qz)(1 - q/z) through q^1
        let pre = parse_rf("z^(1/2) - z^(-1/2)").unwrap();
        assert_eq!(t.coeff(Exp::zero()), pre);
        assert_eq!(t.coeff(exp_int(1)), pre.mul(&parse_rf("-z-1/z").unwrap()));
        assert_eq!(t.terms().len(), 2);
    }

    #[test]
    fn theta_reflection() {
        let t = theta(&qm("z", Exp::zero()), exp_int(2)).unwrap();
        let ti = theta(&qm("1/z", Exp::zero()), exp_int(2)).unwrap();
        assert_eq!(t.neg(), ti);
    }

    #[test]
    fn theta_quasi_periodicity() {
        let n = exp_int(4);
        let lhs = theta(&qm("z", exp_int(1)), n).unwrap();
        let rhs = theta(&qm("z", Exp::zero()), n + exp_frac(1, 2))
            .unwrap()
            .scale(&parse_rf("-1/z").unwrap())
            .unwrap()
            .shift(exp_frac(-1, 2));
        assert_eq!(lhs.truncate(n), rhs.truncate(n));
    }

    #[test]
    fn theta_product_limits() {
        let z = QMonomial::var(vars::z());
        let zh = qm("z*hbar", Exp::zero());
        let mon = ThetaExpr::from(ThetaProduct::ratio(z.clone(), zh.clone()));
        let at1 = mon.substitute_slope(vars::z(), exp_int(1)).limit_q0().unwrap();
        assert_eq!(at1, parse_rf("hbar^(3/2)*(1-z)/(1-z*hbar)").unwrap());
        let at0 = mon.limit_q0().unwrap();
        assert_eq!(at0, parse_rf("hbar^(1/2)*(1-z)/(1-z*hbar)").unwrap());
        let gen = mon.substitute_slope(vars::z(), exp_frac(1, 2)).limit_q0().unwrap();
        assert_eq!(gen, parse_rf("hbar^(1/2)").unwrap());
    }

    #[test]
    fn psi0_forms_agree() {
        let closed = psi0_closed(exp_int(5)).unwrap();
        let bi = closed.bi_expand(vars::z(), exp_int(5)).unwrap();
        let coeffs: Vec<(Exp, RationalFunction)> = psi0_sum(5)
            .unwrap()
            .into_iter()
            .enumerate()
            .map(|(d, c)| (exp_int(d as i64), c))
            .collect();
        let sum = crate::arith::series::BiSeries::from_x_series(
            vars::z(),
            vars::q(),
            &coeffs,
            exp_int(5),
            exp_int(5),
        )
        .unwrap();
        assert_eq!(bi.first_difference(&sum), None);
        assert_eq!(psi0_sum(2).unwrap()[2], parse_rf("(1-hbar)*(1-hbar*q)/((1-q)*(1-q^2))").unwrap());
    }
}
