use std::fmt;

use num_traits::Zero;

use super::{Exp, PuiseuxSeries, RationalFunction, Symbol};
use crate::error::{Error, Result};

/// Ring operations needed for matrix arithmetic.
pub trait Entry: Clone + PartialEq + fmt::Debug {
    /// Zero carrying the same metadata (series variable, order) as `self`.
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn is_zero_entry(&self) -> bool;
    fn add_entry(&self, other: &Self) -> Result<Self>;
    fn mul_entry(&self, other: &Self) -> Result<Self>;
    fn neg_entry(&self) -> Self;
}

impl Entry for RationalFunction {
    fn zero_like(&self) -> Self {
        RationalFunction::zero()
    }
    fn one_like(&self) -> Self {
        RationalFunction::one()
    }
    fn is_zero_entry(&self) -> bool {
        self.is_zero()
    }
    fn add_entry(&self, other: &Self) -> Result<Self> {
        self.add(other)
    }
    fn mul_entry(&self, other: &Self) -> Result<Self> {
        Ok(self.mul(other))
    }
    fn neg_entry(&self) -> Self {
        self.neg()
    }
}

impl Entry for PuiseuxSeries {
    fn zero_like(&self) -> Self {
        PuiseuxSeries::zero(self.var(), self.order()).with_den(self.den())
    }
    fn one_like(&self) -> Self {
        PuiseuxSeries::one(self.var(), self.order()).with_den(self.den())
    }
    fn is_zero_entry(&self) -> bool {
        self.is_zero()
    }
    fn add_entry(&self, other: &Self) -> Result<Self> {
        self.add(other)
    }
    fn mul_entry(&self, other: &Self) -> Result<Self> {
        self.mul(other)
    }
    fn neg_entry(&self) -> Self {
        self.neg()
    }
}

/// Dense square matrix, row-major.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Matrix<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Entry> Matrix<T> {
    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::invalid("empty matrix"));
        }
        let mut data = Vec::with_capacity(n * n);
        for r in rows {
            if r.len() != n {
                return Err(Error::invalid("matrix is not square"));
            }
            data.extend(r);
        }
        Ok(Matrix { n, data })
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Matrix { n, data }
    }

    pub fn try_from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Result<T>) -> Result<Self> {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j)?);
            }
        }
        Ok(Matrix { n, data })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.n + j] = v;
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &T)> {
        self.data
            .iter()
            .enumerate()
            .map(move |(k, v)| (k / self.n, k % self.n, v))
    }

    pub fn rows(&self) -> Vec<Vec<T>> {
        self.data.chunks(self.n).map(|c| c.to_vec()).collect()
    }

    pub fn map<U: Entry>(&self, f: impl Fn(&T) -> Result<U>) -> Result<Matrix<U>> {
        let mut data = Vec::with_capacity(self.data.len());
        for x in &self.data {
            data.push(f(x)?);
        }
        Ok(Matrix { n: self.n, data })
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::invalid(format!(
                "dimension mismatch: {} vs {}",
                self.n, other.n
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let mut data = Vec::with_capacity(self.data.len());
        for (a, b) in self.data.iter().zip(&other.data) {
            data.push(a.add_entry(b)?);
        }
        Ok(Matrix { n: self.n, data })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        Matrix {
            n: self.n,
            data: self.data.iter().map(|x| x.neg_entry()).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let n = self.n;
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let mut acc: Option<T> = None;
                for k in 0..n {
                    let a = self.get(i, k);
                    let b = other.get(k, j);
                    let t = a.mul_entry(b)?;
                    acc = Some(match acc {
                        None => t,
                        Some(x) => x.add_entry(&t)?,
                    });
                }
                data.push(acc.expect("n > 0"));
            }
        }
        Ok(Matrix { n, data })
    }

    pub fn transpose(&self) -> Self {
        Matrix::from_fn(self.n, |i, j| self.get(j, i).clone())
    }

    pub fn is_diagonal(&self) -> bool {
        self.entries().all(|(i, j, x)| i == j || x.is_zero_entry())
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.n).map(|i| self.get(i, i).clone()).collect()
    }

    /// First `(row, col)` where the two matrices differ.
    pub fn first_difference(&self, other: &Self) -> Option<(usize, usize)> {
        if self.n != other.n {
            return Some((0, 0));
        }
        self.entries()
            .find(|(i, j, x)| *x != other.get(*i, *j))
            .map(|(i, j, _)| (i, j))
    }
}

impl Matrix<RationalFunction> {
    pub fn identity(n: usize) -> Self {
        Matrix::scalar(n, RationalFunction::one())
    }

    pub fn scalar(n: usize, c: RationalFunction) -> Self {
        Matrix::from_fn(n, |i, j| {
            if i == j {
                c.clone()
            } else {
                RationalFunction::zero()
            }
        })
    }

    pub fn diag(d: Vec<RationalFunction>) -> Self {
        let n = d.len();
        Matrix::from_fn(n, |i, j| {
            if i == j {
                d[i].clone()
            } else {
                RationalFunction::zero()
            }
        })
    }

    pub fn is_identity(&self) -> bool {
        self.entries()
            .all(|(i, j, x)| if i == j { x.is_one() } else { x.is_zero() })
    }

    pub fn scale(&self, c: &RationalFunction) -> Self {
        Matrix {
            n: self.n,
            data: self.data.iter().map(|x| x.mul(c)).collect(),
        }
    }

    /// Inverse by Gauss-Jordan elimination over the rational-function field.
    pub fn inv(&self) -> Result<Self> {
        let n = self.n;
        let mut a = self.rows();
        let mut b = Matrix::identity(n).rows();
        for col in 0..n {
            let piv = (col..n)
                .find(|&r| !a[r][col].is_zero())
                .ok_or(Error::SingularMatrix)?;
            a.swap(col, piv);
            b.swap(col, piv);
            let p_inv = a[col][col].inv()?;
            for j in 0..n {
                a[col][j] = a[col][j].mul(&p_inv);
                b[col][j] = b[col][j].mul(&p_inv);
            }
            for r in 0..n {
                if r == col || a[r][col].is_zero() {
                    continue;
                }
                let f = a[r][col].clone();
                for j in 0..n {
                    let ta = a[col][j].mul(&f);
                    let tb = b[col][j].mul(&f);
                    a[r][j] = a[r][j].sub(&ta)?;
                    b[r][j] = b[r][j].sub(&tb)?;
                }
            }
        }
        Matrix::from_rows(b)
    }

    pub fn det(&self) -> Result<RationalFunction> {
        let n = self.n;
        let mut a = self.rows();
        let mut det = RationalFunction::one();
        for col in 0..n {
            let Some(piv) = (col..n).find(|&r| !a[r][col].is_zero()) else {
                return Ok(RationalFunction::zero());
            };
            if piv != col {
                a.swap(col, piv);
                det = det.neg();
            }
            det = det.mul(&a[col][col]);
            let p_inv = a[col][col].inv()?;
            for r in col + 1..n {
                if a[r][col].is_zero() {
                    continue;
                }
                let f = a[r][col].mul(&p_inv);
                for j in col..n {
                    let t = a[col][j].mul(&f);
                    a[r][j] = a[r][j].sub(&t)?;
                }
            }
        }
        Ok(det)
    }

    pub fn substitute(&self, s: Symbol, m: &super::Monomial) -> Result<Self> {
        self.map(|x| x.substitute(s, m))
    }

    pub fn at_zero(&self, s: Symbol) -> Result<Self> {
        self.map(|x| x.at_zero(s))
    }

    pub fn at_infinity(&self, s: Symbol) -> Result<Self> {
        self.map(|x| x.at_infinity(s))
    }

    /// Constant series matrix with these entries.
    pub fn to_series(&self, q: Symbol, order: Exp) -> Result<Matrix<PuiseuxSeries>> {
        self.map(|x| Ok(PuiseuxSeries::constant(q, x.clone(), order)))
    }
}

impl Matrix<PuiseuxSeries> {
    pub fn identity_series(n: usize, q: Symbol, order: Exp) -> Self {
        Matrix::from_fn(n, |i, j| {
            if i == j {
                PuiseuxSeries::one(q, order)
            } else {
                PuiseuxSeries::zero(q, order)
            }
        })
    }

    pub fn order(&self) -> Exp {
        self.data
            .iter()
            .map(|x| x.order())
            .min()
            .expect("nonempty matrix")
    }

    pub fn truncate(&self, order: Exp) -> Self {
        Matrix {
            n: self.n,
            data: self.data.iter().map(|x| x.truncate(order)).collect(),
        }
    }

    /// Matrix of `q^e` coefficients.
    pub fn coefficient(&self, e: Exp) -> Matrix<RationalFunction> {
        Matrix::from_fn(self.n, |i, j| self.get(i, j).coeff(e))
    }

    /// Inverse for matrices whose entries have nonnegative valuation and whose
    /// `q^0` coefficient matrix is invertible, via the Neumann series
    /// `Σ_k (−A₀⁻¹R)^k A₀⁻¹` where `A = A₀ + R`.
    pub fn inv(&self) -> Result<Self> {
        let order = self.order();
        let q = self.data[0].var();
        for x in &self.data {
            if let Some(v) = x.valuation() {
                if v < Exp::zero() {
                    return Err(Error::SingularMatrix);
                }
            }
        }
        let a0 = self.coefficient(Exp::zero());
        let a0_inv = a0.inv()?.to_series(q, order)?;
        let r = self.sub(&a0.to_series(q, order)?)?.truncate(order);
        let step = a0_inv.mul(&r)?.neg();
        let mut min_val: Option<Exp> = None;
        for x in &r.data {
            if let Some(v) = x.valuation() {
                min_val = Some(min_val.map_or(v, |m: Exp| m.min(v)));
            }
        }
        let mut acc = a0_inv.clone();
        let Some(v) = min_val else {
            return Ok(acc.truncate(order));
        };
        let terms = (order / v).floor().to_integer().max(0) as usize;
        let mut power = a0_inv.clone();
        for _ in 0..terms {
            power = step.mul(&power)?;
            acc = acc.add(&power)?;
        }
        Ok(acc.truncate(order))
    }

    pub fn is_identity_series(&self) -> bool {
        self.entries().all(|(i, j, x)| {
            if i == j {
                x.terms().len() == 1 && x.terms()[0].0.is_zero() && x.terms()[0].1.is_one()
            } else {
                x.is_zero()
            }
        })
    }
}

impl<T: fmt::Display> fmt::Display for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (k, row) in self.data.chunks(self.n).enumerate() {
            if k > 0 {
                f.write_str("; ")?;
            }
            let parts: Vec<String> = row.iter().map(|x| x.to_string()).collect();
            f.write_str(&parts.join(", "))?;
        }
        f.write_str("]")
    }
}

impl<T: fmt::Debug> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Matrix")
            .field("n", &self.n)
            .field("data", &self.data)
            .finish()
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse::parse_rf;
    use super::super::{exp_int, vars};
    use super::*;

    fn m(rows: &[&[&str]]) -> Matrix<RationalFunction> {
        Matrix::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|s| parse_rf(s).unwrap()).collect())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn inverse_round_trip() {
        let a = m(&[&["1-z", "z*hbar"], &["hbar", "1/(1-z)"]]);
        let ai = a.inv().unwrap();
        assert!(a.mul(&ai).unwrap().is_identity());
        assert!(ai.mul(&a).unwrap().is_identity());
        assert!(Matrix::identity(3).inv().unwrap().is_identity());
        let s = m(&[&["1", "z"], &["1", "z"]]);
        assert!(matches!(s.inv(), Err(Error::SingularMatrix)));
        assert!(s.det().unwrap().is_zero());
    }

    #[test]
    fn series_matrix_inverse() {
        let q = vars::q();
        let a = m(&[&["1", "0"], &["0", "2"]]).to_series(q, exp_int(4)).unwrap();
        let b = Matrix::from_fn(2, |i, j| {
            if i == j {
                PuiseuxSeries::monomial(q, parse_rf("z").unwrap(), exp_int(1), exp_int(4))
            } else {
                PuiseuxSeries::zero(q, exp_int(4))
            }
        });
        let c = a.add(&b).unwrap();
        let ci = c.inv().unwrap();
        assert!(c.mul(&ci).unwrap().is_identity_series());
    }
}
