//! Slope intervals and enumeration of bounded-denominator fractions.

use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::arith::{fmt_exp, parse_exp, Exp};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Interval {
    #[serde(with = "super::exp_str")]
    pub lo: Exp,
    #[serde(with = "super::exp_str")]
    pub hi: Exp,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl Interval {
    pub fn closed(lo: Exp, hi: Exp) -> Self {
        Interval { lo, hi, lo_closed: true, hi_closed: true }
    }

    pub fn half_open(lo: Exp, hi: Exp) -> Self {
        Interval { lo, hi, lo_closed: true, hi_closed: false }
    }

    pub fn contains(&self, x: Exp) -> bool {
        let above = if self.lo_closed { x >= self.lo } else { x > self.lo };
        let below = if self.hi_closed { x <= self.hi } else { x < self.hi };
        above && below
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}{},{}{}",
            if self.lo_closed { '[' } else { '(' },
            fmt_exp(&self.lo),
            fmt_exp(&self.hi),
            if self.hi_closed { ']' } else { ')' }
        )
    }
}

impl FromStr for Interval {
    type Err = Error;

    /// `a:b` is the half-open `[a, b)`; bracket forms `[a,b]`, `[a,b)`,
    /// `(a,b]`, `(a,b)` are taken literally.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let iv = if let Some((a, b)) = t.split_once(':') {
            Interval::half_open(parse_exp(a)?, parse_exp(b)?)
        } else {
            let lo_closed = match t.chars().next() {
                Some('[') => true,
                Some('(') => false,
                _ => return Err(Error::parse(format!("bad interval {s:?}"))),
            };
            let hi_closed = match t.chars().last() {
                Some(']') => true,
                Some(')') => false,
                _ => return Err(Error::parse(format!("bad interval {s:?}"))),
            };
            let inner = &t[1..t.len() - 1];
            let (a, b) = inner
                .split_once(',')
                .ok_or_else(|| Error::parse(format!("bad interval {s:?}")))?;
            Interval { lo: parse_exp(a)?, hi: parse_exp(b)?, lo_closed, hi_closed }
        };
        if iv.lo > iv.hi {
            return Err(Error::invalid(format!("empty interval {s:?}")));
        }
        Ok(iv)
    }
}

/// Upper bound on the number of fractions a scan may produce.
pub const MAX_SCAN: u64 = 1 << 20;

/// All fractions `a/b` in the interval with `1 ≤ b ≤ maxden`, increasing.
///
/// Walks the Farey sequence of order `maxden` on each unit interval with the
/// next-term recurrence, so every fraction appears once in lowest terms.
pub fn farey_in(iv: &Interval, maxden: i64) -> Result<Vec<Exp>> {
    if maxden < 1 {
        return Err(Error::invalid("maxden must be at least 1"));
    }
    let start = iv.lo.floor().to_integer();
    let end = iv.hi.ceil().to_integer();
    let width = (end - start).max(0) as u64;
    let per_unit = (maxden as u64).saturating_mul(maxden as u64);
    if width.saturating_mul(per_unit) > MAX_SCAN * 4 {
        return Err(Error::invalid("scan too large; narrow the interval or lower maxden"));
    }
    let mut out = Vec::new();
    for k in start..end.max(start + 1) {
        // Farey sequence 0/1, 1/n, …, 1/1 shifted by k; 1/1 belongs to the next unit.
        let (mut a, mut b, mut c, mut d) = (0i64, 1i64, 1i64, maxden);
        loop {
            let x = Exp::new(a + k * b, b);
            if iv.contains(x) {
                out.push(x);
            }
            if c > d || (c == 1 && d == 1) {
                break;
            }
            let m = Integer::div_floor(&(maxden + b), &d);
            let (na, nb) = (c, d);
            c = m * c - a;
            d = m * d - b;
            a = na;
            b = nb;
        }
    }
    let last = Exp::from_integer(end.max(start + 1));
    if iv.contains(last) && out.last() != Some(&last) {
        out.push(last);
    }
    out.dedup();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::exp_frac;

    fn brute(iv: &Interval, n: i64) -> Vec<Exp> {
        let mut v = Vec::new();
        for b in 1..=n {
            for a in -10 * b..=10 * b {
                let x = Exp::new(a, b);
                if iv.contains(x) {
                    v.push(x);
                }
            }
        }
        v.sort();
        v.dedup();
        v
    }

    #[test]
    fn matches_brute_force() {
        for s in ["-1:0", "[-2,1]", "(-3,3)", "[0,0]", "(-1/2,5/3]"] {
            let iv: Interval = s.parse().unwrap();
            for n in 1..=6 {
                assert_eq!(farey_in(&iv, n).unwrap(), brute(&iv, n), "{s} n={n}");
            }
        }
        let iv: Interval = "-1:0".parse().unwrap();
        let four: Vec<Exp> = farey_in(&iv, 4).unwrap();
        let want = [exp_frac(-1, 1), exp_frac(-3, 4), exp_frac(-2, 3), exp_frac(-1, 2), exp_frac(-1, 3), exp_frac(-1, 4)];
        assert_eq!(four, want);
    }
}
