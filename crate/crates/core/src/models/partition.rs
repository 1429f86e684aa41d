//! Partitions, fractional line bundle eigenvalues and cyclic quiver components.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::arith::{exp_int, vars, Exp, FieldMatrix, Monomial, RationalFunction};
use crate::error::{Error, Result};

/// Weakly decreasing positive parts.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<u32>", into = "Vec<u32>")]
pub struct Partition(Vec<u32>);

impl Partition {
    pub fn new(mut parts: Vec<u32>) -> Result<Self> {
        if parts.contains(&0) {
            return Err(Error::invalid("partition parts must be positive"));
        }
        if parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::invalid(format!("parts {parts:?} are not weakly decreasing")));
        }
        parts.shrink_to_fit();
        Ok(Partition(parts))
    }

    pub fn empty() -> Self {
        Partition(Vec::new())
    }

    pub fn parts(&self) -> &[u32] {
        &self.0
    }

    pub fn size(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn transpose(&self) -> Partition {
        let w = self.0.first().copied().unwrap_or(0);
        Partition((1..=w).map(|c| self.0.iter().filter(|&&p| p >= c).count() as u32).collect())
    }

    /// Boxes `(i, j)` with `i` the row and `j` the column, both from 1.
    pub fn boxes(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.0
            .iter()
            .enumerate()
            .flat_map(|(r, &len)| (1..=len).map(move |c| (r as u32 + 1, c)))
    }
}

impl TryFrom<Vec<u32>> for Partition {
    type Error = Error;

    fn try_from(v: Vec<u32>) -> Result<Self> {
        Partition::new(v)
    }
}

impl From<Partition> for Vec<u32> {
    fn from(p: Partition) -> Self {
        p.0
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = self.0.iter().map(|p| p.to_string()).collect();
        write!(f, "({})", s.join(","))
    }
}

impl FromStr for Partition {
    type Err = Error;

    /// Accepts `2,1`, `(2,1)` or `()`.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().trim_start_matches('(').trim_end_matches(')').trim();
        if t.is_empty() {
            return Ok(Partition::empty());
        }
        let parts = t
            .split(',')
            .map(|x| x.trim().parse::<u32>().map_err(|_| Error::parse(format!("bad partition {s:?}"))))
            .collect::<Result<Vec<_>>>()?;
        Partition::new(parts)
    }
}

/// All partitions of `n` in reverse-lexicographic order: `(n)` first, `(1,…,1)` last.
pub fn partitions(n: u32) -> Vec<Partition> {
    fn rec(rest: u32, max: u32, cur: &mut Vec<u32>, out: &mut Vec<Partition>) {
        if rest == 0 {
            out.push(Partition(cur.clone()));
            return;
        }
        for p in (1..=rest.min(max)).rev() {
            cur.push(p);
            rec(rest - p, p, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, n, &mut Vec::new(), &mut out);
    out
}

/// Which box coordinate pairs with `t₁`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoxConvention {
    /// `t₁^{s(i−1)} t₂^{s(j−1)}` with `i` the row index.
    #[default]
    Row,
    /// Transposed: `i` is the column index.
    Column,
}

/// Eigenvalue `∏_{(i,j)∈λ} t₁^{s(i−1)} t₂^{s(j−1)}` of the fractional bundle `O(1)^s`.
pub fn fractional_bundle_eig(lambda: &Partition, s: Exp, conv: BoxConvention) -> Monomial {
    let (mut a, mut b) = (0i64, 0i64);
    for (i, j) in lambda.boxes() {
        let (i, j) = match conv {
            BoxConvention::Row => (i, j),
            BoxConvention::Column => (j, i),
        };
        a += i as i64 - 1;
        b += j as i64 - 1;
    }
    Monomial::from_pairs([(vars::t1(), s * exp_int(a)), (vars::t2(), s * exp_int(b))])
}

/// `O(1)^s · R · O(1)^{−s}` in the basis `basis`.
pub fn twist_r(s: Exp, r: &FieldMatrix, basis: &[Partition], conv: BoxConvention) -> Result<FieldMatrix> {
    if r.dim() != basis.len() {
        return Err(Error::IndexMismatch(format!(
            "matrix of dimension {} with a basis of {} partitions",
            r.dim(),
            basis.len()
        )));
    }
    let eig: Vec<Monomial> = basis.iter().map(|l| fractional_bundle_eig(l, s, conv)).collect();
    let mut out = r.clone();
    for i in 0..r.dim() {
        for j in 0..r.dim() {
            let x = r.get(i, j);
            if !x.is_zero() {
                out.set(i, j, x.mul_monomial(&(&eig[i] / &eig[j])));
            }
        }
    }
    Ok(out)
}

/// Diagonal matrix of `O(1)^s` eigenvalues.
pub fn fractional_bundle_matrix(s: Exp, basis: &[Partition], conv: BoxConvention) -> FieldMatrix {
    FieldMatrix::diag(
        basis
            .iter()
            .map(|l| RationalFunction::monomial(num_traits::One::one(), fractional_bundle_eig(l, s, conv)))
            .collect(),
    )
}

/// Dimension vector of a component of the fixed locus of a cyclic group of order `b`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CyclicComponent(pub Vec<u32>);

/// All compositions `(n₀, …, n_{b−1})` of `n` into `b` nonnegative parts, lexicographic.
pub fn cyclic_components(n: u32, b: u32) -> Result<Vec<CyclicComponent>> {
    if b == 0 {
        return Err(Error::invalid("b must be at least 1"));
    }
    fn rec(rest: u32, slots: u32, cur: &mut Vec<u32>, out: &mut Vec<CyclicComponent>) {
        if slots == 1 {
            cur.push(rest);
            out.push(CyclicComponent(cur.clone()));
            cur.pop();
            return;
        }
        for k in 0..=rest {
            cur.push(k);
            rec(rest - k, slots - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, b, &mut Vec::new(), &mut out);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::exp_frac;

    #[test]
    fn enumerations() {
        let p4 = partitions(4);
        let shown: Vec<String> = p4.iter().map(|p| p.to_string()).collect();
        assert_eq!(shown, ["(4)", "(3,1)", "(2,2)", "(2,1,1)", "(1,1,1,1)"]);
        assert_eq!(partitions(0), vec![Partition::empty()]);
        assert_eq!(partitions(1), vec![Partition::new(vec![1]).unwrap()]);
        let c = cyclic_components(2, 2).unwrap();
        assert_eq!(c, vec![CyclicComponent(vec![0, 2]), CyclicComponent(vec![1, 1]), CyclicComponent(vec![2, 0])]);
        assert_eq!(cyclic_components(0, 3).unwrap(), vec![CyclicComponent(vec![0, 0, 0])]);
        assert_eq!(cyclic_components(4, 1).unwrap(), vec![CyclicComponent(vec![4])]);
    }

    #[test]
    fn bundle_eigenvalues() {
        let l21: Partition = "2,1".parse().unwrap();
        let e = fractional_bundle_eig(&l21, exp_int(1), BoxConvention::Row);
        assert_eq!(e, &Monomial::var(vars::t1()) * &Monomial::var(vars::t2()));
        let l3: Partition = "(3)".parse().unwrap();
        let e = fractional_bundle_eig(&l3, exp_frac(1, 2), BoxConvention::Row);
        assert_eq!(e, Monomial::var_pow(vars::t2(), exp_frac(3, 2)));
        let e = fractional_bundle_eig(&l3, exp_frac(1, 2), BoxConvention::Column);
        assert_eq!(e, Monomial::var_pow(vars::t1(), exp_frac(3, 2)));
        assert_eq!(l3.transpose(), "1,1,1".parse().unwrap());
        assert!("1,2".parse::<Partition>().is_err());
    }
}
