use std::fmt;

use num_traits::{Signed, Zero};
use smallvec::SmallVec;

use super::{exp_int, fmt_exp, Exp, Symbol};

/// A power product `∏ x_i^{e_i}` with exact rational exponents.
///
/// Entries are sorted by symbol and zero exponents are never stored, so
/// structural equality is mathematical equality.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial {
    exps: SmallVec<[(Symbol, Exp); 4]>,
}

impl Monomial {
    pub fn one() -> Self {
        Monomial::default()
    }

    pub fn var(s: Symbol) -> Self {
        Monomial::var_pow(s, exp_int(1))
    }

    pub fn var_pow(s: Symbol, e: Exp) -> Self {
        let mut m = Monomial::default();
        if !e.is_zero() {
            m.exps.push((s, e));
        }
        m
    }

    pub fn from_pairs<I: IntoIterator<Item = (Symbol, Exp)>>(pairs: I) -> Self {
        let mut m = Monomial::one();
        for (s, e) in pairs {
            m = &m * &Monomial::var_pow(s, e);
        }
        m
    }

    pub fn is_one(&self) -> bool {
        self.exps.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &(Symbol, Exp)> {
        self.exps.iter()
    }

    pub fn exp(&self, s: Symbol) -> Exp {
        self.exps
            .iter()
            .find(|(v, _)| *v == s)
            .map(|(_, e)| *e)
            .unwrap_or_else(Exp::zero)
    }

    pub fn contains(&self, s: Symbol) -> bool {
        self.exps.iter().any(|(v, _)| *v == s)
    }

    pub fn vars(&self) -> impl Iterator<Item = Symbol> + '_ {
        self.exps.iter().map(|(s, _)| *s)
    }

    pub fn inv(&self) -> Self {
        Monomial {
            exps: self.exps.iter().map(|(s, e)| (*s, -*e)).collect(),
        }
    }

    pub fn pow(&self, k: Exp) -> Self {
        if k.is_zero() {
            return Monomial::one();
        }
        Monomial {
            exps: self.exps.iter().map(|(s, e)| (*s, *e * k)).collect(),
        }
    }

    /// Removes the variable `s` and returns its exponent.
    pub fn split_off(&self, s: Symbol) -> (Exp, Monomial) {
        let e = self.exp(s);
        let rest = Monomial {
            exps: self.exps.iter().filter(|(v, _)| *v != s).cloned().collect(),
        };
        (e, rest)
    }

    /// Componentwise minimum of exponents (missing entries count as zero).
    pub fn gcd(&self, other: &Monomial) -> Monomial {
        self.merge(other, |a, b| if a < b { a } else { b })
    }

    pub fn lcm(&self, other: &Monomial) -> Monomial {
        self.merge(other, |a, b| if a > b { a } else { b })
    }

    /// True when all exponents are integers.
    pub fn is_integral(&self) -> bool {
        self.exps.iter().all(|(_, e)| e.is_integer())
    }

    pub fn is_nonnegative(&self) -> bool {
        self.exps.iter().all(|(_, e)| !e.is_negative())
    }

    /// Least common multiple of the exponent denominators.
    pub fn denominator_lcm(&self) -> i64 {
        self.exps
            .iter()
            .fold(1i64, |acc, (_, e)| num_integer::lcm(acc, *e.denom()))
    }

    fn merge(&self, other: &Monomial, f: impl Fn(Exp, Exp) -> Exp) -> Monomial {
        let mut out = SmallVec::new();
        let (mut i, mut j) = (0, 0);
        let a = &self.exps;
        let b = &other.exps;
        while i < a.len() || j < b.len() {
            let (s, ea, eb) = if j >= b.len() || (i < a.len() && a[i].0 < b[j].0) {
                i += 1;
                (a[i - 1].0, a[i - 1].1, Exp::zero())
            } else if i >= a.len() || b[j].0 < a[i].0 {
                j += 1;
                (b[j - 1].0, Exp::zero(), b[j - 1].1)
            } else {
                i += 1;
                j += 1;
                (a[i - 1].0, a[i - 1].1, b[j - 1].1)
            };
            let e = f(ea, eb);
            if !e.is_zero() {
                out.push((s, e));
            }
        }
        Monomial { exps: out }
    }
}

impl std::ops::Mul for &Monomial {
    type Output = Monomial;
    fn mul(self, rhs: &Monomial) -> Monomial {
        self.merge(rhs, |a, b| a + b)
    }
}

impl std::ops::Div for &Monomial {
    type Output = Monomial;
    fn div(self, rhs: &Monomial) -> Monomial {
        self.merge(rhs, |a, b| a - b)
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exps.is_empty() {
            return f.write_str("1");
        }
        for (k, (s, e)) in self.exps.iter().enumerate() {
            if k > 0 {
                f.write_str("*")?;
            }
            if *e == exp_int(1) {
                write!(f, "{s}")?;
            } else if e.is_integer() && e.is_positive() {
                write!(f, "{s}^{}", fmt_exp(e))?;
            } else {
                write!(f, "{s}^({})", fmt_exp(e))?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Monomial({self})")
    }
}
