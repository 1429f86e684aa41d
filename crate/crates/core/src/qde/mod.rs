//! First-order matrix q-difference equations `Ψ(zq)·L = M(z)·Ψ(z)`.
//!
//! Solutions are power series in the chart coordinate (`z` at `z = 0`,
//! `w = 1/z` at `z = ∞`) whose coefficients are exact matrices over the
//! rational-function field, with `q` a formal symbol.

pub mod numeric;

use num_traits::Signed;
use serde::{Deserialize, Serialize};

use crate::arith::gcd::gcd;
use crate::arith::json::{field_matrix_from_json, field_matrix_to_json, RfJson};
use crate::arith::{
    exp_int, fmt_exp, vars, Exp, FieldMatrix, Matrix, Monomial, Polynomial, PuiseuxSeries, RationalFunction,
    SeriesMatrix, Symbol,
};
use crate::error::{Error, Result};

/// Which end of the Kähler line a solution is analytic at.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Chart {
    Zero,
    Infinity,
}

#[derive(Clone, Debug, PartialEq)]
pub struct QDESystem {
    var: Symbol,
    l: FieldMatrix,
    m: FieldMatrix,
}

impl QDESystem {
    pub fn new(var: Symbol, l: FieldMatrix, m: FieldMatrix) -> Result<Self> {
        if var == vars::q() {
            return Err(Error::invalid("the shift variable cannot be q"));
        }
        if l.dim() != m.dim() {
            return Err(Error::invalid(format!(
                "L has dimension {} but M has dimension {}",
                l.dim(),
                m.dim()
            )));
        }
        if l.entries().any(|(_, _, x)| x.contains_var(var)) {
            return Err(Error::invalid(format!("L must not depend on {var}")));
        }
        if l.det()?.is_zero() {
            return Err(Error::invalid("L is not invertible"));
        }
        if m.det()?.is_zero() {
            return Err(Error::invalid("M is not invertible"));
        }
        Ok(QDESystem { var, l, m })
    }

    /// Rank-one system `Ψ(zq)·M(0) = M(z)·Ψ(z)`, so that `Ψ(0) = 1` is admissible.
    pub fn scalar(m: RationalFunction) -> Result<Self> {
        let z = vars::z();
        let l = m.at_zero(z)?;
        QDESystem::new(z, FieldMatrix::scalar(1, l), FieldMatrix::scalar(1, m))
    }

    pub fn rank(&self) -> usize {
        self.l.dim()
    }

    pub fn var(&self) -> Symbol {
        self.var
    }

    pub fn l(&self) -> &FieldMatrix {
        &self.l
    }

    pub fn m(&self) -> &FieldMatrix {
        &self.m
    }

    /// The same equation written in `w = 1/z`:
    /// `Φ(qw)·L⁻¹ = M(1/(qw))⁻¹·Φ(w)` for `Φ(w) = Ψ(1/w)`.
    pub fn at_infinity(&self, w: Symbol) -> Result<Self> {
        if self.m.entries().any(|(_, _, x)| x.contains_var(w)) {
            return Err(Error::invalid(format!("variable {w} already used")));
        }
        let inv_qw = &Monomial::var(vars::q()) * &Monomial::var(w);
        let m = self.m.substitute(self.var, &inv_qw.inv())?.inv()?;
        QDESystem::new(w, self.l.inv()?, m)
    }

    /// Conjugates by a constant invertible matrix: `M ↦ G·M·G⁻¹`, `L` unchanged.
    /// `G·Ψ` solves the conjugated system whenever `Ψ` solves this one.
    pub fn conjugate(&self, g: &FieldMatrix) -> Result<Self> {
        if g.entries().any(|(_, _, x)| x.contains_var(self.var)) {
            return Err(Error::invalid("gauge matrix must be constant"));
        }
        let m = g.mul(&self.m)?.mul(&g.inv()?)?;
        QDESystem::new(self.var, self.l.clone(), m)
    }

    /// Replaces `L` by `L·c` for a scalar `c`, e.g. to absorb a
    /// non-series prefactor of a solution.
    pub fn with_l_scaled(&self, c: &RationalFunction) -> Result<Self> {
        QDESystem::new(self.var, self.l.scale(c), self.m.clone())
    }

    /// `M = P/D` with `D` the lcm of the entry denominators, as coefficient
    /// lists `D_j`, `P_j` in the system variable through `order`.
    pub fn cleared_form(&self, order: u32) -> Result<(Vec<RationalFunction>, Vec<FieldMatrix>)> {
        let mut den = Polynomial::one();
        for (_, _, x) in self.m.entries() {
            let g = gcd(&den, x.denom());
            den = den.mul(&x.denom().div_exact(&g).expect("gcd divides"));
        }
        let den = RationalFunction::from_poly(den);
        let p = self.m.scale(&den);
        let far = exp_int(order as i64);
        let mut ds = vec![RationalFunction::zero(); order as usize + 1];
        for (e, c) in den.expand_at_zero(self.var, far)? {
            ds[e.to_integer() as usize] = c;
        }
        if ds[0].is_zero() {
            return Err(Error::NonExpandableCoefficient(format!("M has a pole at {}=0", self.var)));
        }
        let n = self.rank();
        let mut ps = vec![FieldMatrix::from_fn(n, |_, _| RationalFunction::zero()); order as usize + 1];
        for (i, j, x) in p.entries() {
            let k = x.valuation_in(self.var);
            if !k.is_integer() || k.is_negative() {
                return Err(Error::NonExpandableCoefficient(format!(
                    "M[{i}][{j}] = {} is not regular at {}=0",
                    self.m.get(i, j),
                    self.var
                )));
            }
            for (e, c) in x.expand_at_zero(self.var, far)? {
                ps[e.to_integer() as usize].set(i, j, c);
            }
        }
        Ok((ds, ps))
    }

    /// Coefficient matrices `M_j` of `M(z) = Σ M_j z^j`, `j ≤ order`.
    pub fn m_coefficients(&self, order: u32) -> Result<Vec<FieldMatrix>> {
        let n = self.rank();
        let mut out = vec![FieldMatrix::from_fn(n, |_, _| RationalFunction::zero()); order as usize + 1];
        for (i, j, x) in self.m.entries() {
            let k = x.valuation_in(self.var);
            if !k.is_integer() || k.is_negative() {
                return Err(Error::NonExpandableCoefficient(format!(
                    "M[{i}][{j}] = {x} is not regular at {}=0",
                    self.var
                )));
            }
            for (e, c) in x.expand_at_zero(self.var, exp_int(order as i64))? {
                out[e.to_integer() as usize].set(i, j, c);
            }
        }
        Ok(out)
    }
}

/// How the constant term `Ψ₀` is fixed; it must satisfy `Ψ₀·L = M(0)·Ψ₀`.
#[derive(Clone, Debug, PartialEq)]
pub enum Normalization {
    Identity,
    /// `L` and `M(0)` diagonal: `Ψ₀` is the permutation matching equal eigenvalues.
    Eigen,
    Custom(FieldMatrix),
}

#[derive(Clone, Debug, PartialEq)]
pub struct FundamentalSolution {
    var: Symbol,
    chart: Chart,
    coeffs: Vec<FieldMatrix>,
}

impl FundamentalSolution {
    pub fn from_coefficients(var: Symbol, chart: Chart, coeffs: Vec<FieldMatrix>) -> Result<Self> {
        let Some(first) = coeffs.first() else {
            return Err(Error::invalid("solution needs at least one coefficient"));
        };
        let n = first.dim();
        if coeffs.iter().any(|c| c.dim() != n) {
            return Err(Error::invalid("coefficient dimensions differ"));
        }
        Ok(FundamentalSolution { var, chart, coeffs })
    }

    pub fn var(&self) -> Symbol {
        self.var
    }

    pub fn chart(&self) -> Chart {
        self.chart
    }

    pub fn rank(&self) -> usize {
        self.coeffs[0].dim()
    }

    pub fn zorder(&self) -> u32 {
        (self.coeffs.len() - 1) as u32
    }

    pub fn coefficients(&self) -> &[FieldMatrix] {
        &self.coeffs
    }

    pub fn coefficient(&self, d: usize) -> &FieldMatrix {
        &self.coeffs[d]
    }

    /// Value at the chart origin.
    pub fn normalization(&self) -> &FieldMatrix {
        &self.coeffs[0]
    }

    pub fn coefficients_mut(&mut self) -> &mut Vec<FieldMatrix> {
        &mut self.coeffs
    }

    /// Each coefficient expanded as a `q`-series through `qorder`.
    pub fn q_expansion(&self, qorder: Exp) -> Result<Vec<SeriesMatrix>> {
        self.coeffs
            .iter()
            .map(|c| c.map(|x| q_series(x, qorder)))
            .collect()
    }
}

/// Expansion of `f` at `q = 0` as a truncated series.
pub fn q_series(f: &RationalFunction, order: Exp) -> Result<PuiseuxSeries> {
    let q = vars::q();
    let k = f.valuation_in(q);
    let terms = f.expand_at_zero(q, order)?;
    let den = *k.denom();
    Ok(PuiseuxSeries::from_terms(q, terms, order)?.with_den(den))
}

/// Splits a `q`-series matrix with coefficients depending on `x` into its
/// `x`-adic coefficients `[C_0, …, C_zorder]`.
pub fn split_chart(m: &SeriesMatrix, x: Symbol, zorder: u32) -> Result<Vec<SeriesMatrix>> {
    let n = m.dim();
    let q = vars::q();
    let order = m.order();
    let mut out: Vec<SeriesMatrix> = vec![SeriesMatrix::from_fn(n, |_, _| PuiseuxSeries::zero(q, order)); zorder as usize + 1];
    for (i, j, s) in m.entries() {
        let bi = s.bi_expand(x, exp_int(zorder as i64))?;
        let mut by_deg: Vec<Vec<(Exp, RationalFunction)>> = vec![Vec::new(); zorder as usize + 1];
        for (&(ex, eq), c) in &bi.terms {
            if !ex.is_integer() || ex.is_negative() {
                return Err(Error::NonExpandableCoefficient(format!(
                    "entry ({i},{j}) has {x}-exponent {}",
                    fmt_exp(&ex)
                )));
            }
            by_deg[ex.to_integer() as usize].push((eq, c.clone()));
        }
        for (d, terms) in by_deg.into_iter().enumerate() {
            let mut terms = terms;
            terms.sort_by(|a, b| a.0.cmp(&b.0));
            out[d].set(i, j, PuiseuxSeries::from_terms(q, terms, s.order())?.with_den(s.den()));
        }
    }
    Ok(out)
}

fn initial_coefficient(sys: &QDESystem, m0: &FieldMatrix, norm: &Normalization) -> Result<FieldMatrix> {
    let n = sys.rank();
    let l = sys.l();
    let psi0 = match norm {
        Normalization::Identity => FieldMatrix::identity(n),
        Normalization::Custom(c) => {
            if c.dim() != n {
                return Err(Error::invalid("normalization has the wrong dimension"));
            }
            c.clone()
        }
        Normalization::Eigen => {
            if !l.is_diagonal() || !m0.is_diagonal() {
                return Err(Error::NormalizationConflict(
                    "eigen normalization needs diagonal L and M(0)".into(),
                ));
            }
            let ld = l.diagonal();
            let md = m0.diagonal();
            let mut used = vec![false; n];
            let mut p = FieldMatrix::from_fn(n, |_, _| RationalFunction::zero());
            for (i, mi) in md.iter().enumerate() {
                let j = (0..n).find(|&j| !used[j] && &ld[j] == mi).ok_or_else(|| {
                    Error::NormalizationConflict(format!("eigenvalue {mi} of M(0) is not an eigenvalue of L"))
                })?;
                used[j] = true;
                p.set(i, j, RationalFunction::one());
            }
            p
        }
    };
    if psi0.det()?.is_zero() {
        return Err(Error::NormalizationConflict("Ψ(0) is singular".into()));
    }
    let lhs = psi0.mul(l)?;
    let rhs = m0.mul(&psi0)?;
    if let Some((i, j)) = lhs.first_difference(&rhs) {
        return Err(Error::NormalizationConflict(format!(
            "Ψ(0)·L ≠ M(0)·Ψ(0) at entry ({i},{j})"
        )));
    }
    Ok(psi0)
}

/// Solves `A·x = b` over the rational-function field by Gaussian elimination.
/// Returns `None` if `A` is singular.
fn solve_linear(mut a: Vec<Vec<RationalFunction>>, mut b: Vec<RationalFunction>) -> Result<Option<Vec<RationalFunction>>> {
    let n = b.len();
    for col in 0..n {
        let Some(piv) = (col..n).find(|&r| !a[r][col].is_zero()) else {
            return Ok(None);
        };
        a.swap(col, piv);
        b.swap(col, piv);
        let p_inv = a[col][col].inv()?;
        for r in col + 1..n {
            if a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].mul(&p_inv);
            for j in col..n {
                if !a[col][j].is_zero() {
                    let t = a[col][j].mul(&f);
                    a[r][j] = a[r][j].sub(&t)?;
                }
            }
            if !b[col].is_zero() {
                let t = b[col].mul(&f);
                b[r] = b[r].sub(&t)?;
            }
        }
    }
    let mut x = vec![RationalFunction::zero(); n];
    for i in (0..n).rev() {
        let mut acc = b[i].clone();
        for j in i + 1..n {
            if !a[i][j].is_zero() && !x[j].is_zero() {
                acc = acc.sub(&a[i][j].mul(&x[j]))?;
            }
        }
        x[i] = acc.div(&a[i][i])?;
    }
    Ok(Some(x))
}

/// Solves `c·X·L − M₀·X = R` for `X` by flattening to an `r²` linear system.
fn sylvester(c: &RationalFunction, l: &FieldMatrix, m0: &FieldMatrix, rhs: &FieldMatrix) -> Result<Option<FieldMatrix>> {
    let n = l.dim();
    let idx = |i: usize, k: usize| i * n + k;
    let mut a = vec![vec![RationalFunction::zero(); n * n]; n * n];
    let mut b = vec![RationalFunction::zero(); n * n];
    for i in 0..n {
        for k in 0..n {
            let row = idx(i, k);
            b[row] = rhs.get(i, k).clone();
            for t in 0..n {
                let lk = l.get(t, k);
                if !lk.is_zero() {
                    a[row][idx(i, t)] = a[row][idx(i, t)].add(&c.mul(lk))?;
                }
                let mi = m0.get(i, t);
                if !mi.is_zero() {
                    a[row][idx(t, k)] = a[row][idx(t, k)].sub(mi)?;
                }
            }
        }
    }
    let Some(x) = solve_linear(a, b)? else {
        return Ok(None);
    };
    Ok(Some(FieldMatrix::from_fn(n, |i, k| x[idx(i, k)].clone())))
}

/// Fundamental solution through `x`-degree `zorder`, where `x` is the
/// system's variable. The chart label is recorded for reporting only.
///
/// Works with the cleared form `D(x)·Ψ(xq)·L = P(x)·Ψ(x)`, where `D` is the
/// lcm of the entry denominators, so each degree needs only the few nonzero
/// `D_j`, `P_j`.
pub fn solve_matrix(sys: &QDESystem, norm: &Normalization, zorder: u32, chart: Chart) -> Result<FundamentalSolution> {
    let (ds, ps) = sys.cleared_form(zorder)?;
    let m0 = ps[0].scale(&ds[0].inv()?);
    let q = RationalFunction::var(vars::q());
    let psi0 = initial_coefficient(sys, &m0, norm)?;
    let mut coeffs = vec![psi0];
    for d in 1..=zorder as usize {
        let mut rhs = FieldMatrix::from_fn(sys.rank(), |_, _| RationalFunction::zero());
        for j in 1..=d {
            let prev = &coeffs[d - j];
            if !is_zero_matrix(&ps[j]) {
                rhs = rhs.add(&ps[j].mul(prev)?)?;
            }
            if !ds[j].is_zero() {
                let t = prev.mul(sys.l())?.scale(&ds[j].mul(&q.pow((d - j) as i64)?));
                rhs = rhs.sub(&t)?;
            }
        }
        let c = ds[0].mul(&q.pow(d as i64)?);
        let x = sylvester(&c, sys.l(), &ps[0], &rhs)?.ok_or(Error::Resonance(d as u32))?;
        coeffs.push(x);
    }
    FundamentalSolution::from_coefficients(sys.var(), chart, coeffs)
}

fn is_zero_matrix(m: &FieldMatrix) -> bool {
    m.entries().all(|(_, _, x)| x.is_zero())
}

/// Scalar solution of `Ψ(zq)·M(0) = M(z)·Ψ(z)` with `Ψ(0) = 1`.
pub fn solve_scalar(m: &RationalFunction, zorder: u32) -> Result<FundamentalSolution> {
    let sys = QDESystem::scalar(m.clone())?;
    solve_matrix(&sys, &Normalization::Identity, zorder, Chart::Zero)
}

fn q_exponent(f: &RationalFunction) -> Exp {
    let q = vars::q();
    f.valuation_in(q) + exp_int(f.numer().min_degree(q) as i64) - exp_int(f.denom().min_degree(q) as i64)
}

/// Checks `D(x)·Ψ(xq)·L − P(x)·Ψ(x) = 0` coefficient by coefficient, exactly.
/// Returns the verified `x`-order.
pub fn residual(sol: &FundamentalSolution, sys: &QDESystem) -> Result<u32> {
    if sol.rank() != sys.rank() {
        return Err(Error::invalid("solution and system ranks differ"));
    }
    let zorder = sol.zorder();
    let (ds, ps) = sys.cleared_form(zorder)?;
    let q = RationalFunction::var(vars::q());
    let shifted: Vec<FieldMatrix> = sol
        .coeffs
        .iter()
        .enumerate()
        .map(|(d, c)| Ok(c.mul(sys.l())?.scale(&q.pow(d as i64)?)))
        .collect::<Result<_>>()?;
    for d in 0..=zorder as usize {
        let mut diff = FieldMatrix::from_fn(sys.rank(), |_, _| RationalFunction::zero());
        for j in 0..=d {
            if !ds[j].is_zero() {
                diff = diff.add(&shifted[d - j].scale(&ds[j]))?;
            }
            if !is_zero_matrix(&ps[j]) {
                diff = diff.sub(&ps[j].mul(&sol.coeffs[d - j])?)?;
            }
        }
        let bad = diff.entries().find(|(_, _, x)| !x.is_zero()).map(|(r, c, x)| (r, c, q_exponent(x)));
        if let Some((row, col, e)) = bad {
            return Err(Error::ResidualNonzero {
                zdeg: d as i64,
                qexp: fmt_exp(&e),
                row,
                col,
            });
        }
    }
    Ok(zorder)
}

/// Residual check for a solution known only as `q`-series: `coeffs[d]` is
/// the `x^d` coefficient. Terms are compared through each entry's
/// truncation order. Returns the verified `x`-order.
pub fn residual_series(coeffs: &[SeriesMatrix], sys: &QDESystem) -> Result<u32> {
    let Some(first) = coeffs.first() else {
        return Err(Error::invalid("no coefficients"));
    };
    if first.dim() != sys.rank() {
        return Err(Error::invalid("solution and system ranks differ"));
    }
    let zorder = (coeffs.len() - 1) as u32;
    let qorder = coeffs.iter().map(|c| c.order()).min().expect("nonempty");
    let ms = sys.m_coefficients(zorder)?;
    let extra = exp_int(zorder as i64);
    let ms: Vec<SeriesMatrix> = ms
        .iter()
        .map(|m| m.map(|x| q_series(x, qorder + extra)))
        .collect::<Result<_>>()?;
    let l = sys.l().map(|x| q_series(x, qorder + extra))?;
    let q = vars::q();
    for d in 0..=zorder as usize {
        let lhs = coeffs[d].mul(&l)?.map(|x| Ok(x.shift(exp_int(d as i64))))?;
        let mut rhs = SeriesMatrix::from_fn(sys.rank(), |_, _| PuiseuxSeries::zero(q, qorder + extra));
        for j in 0..=d {
            rhs = rhs.add(&ms[j].mul(&coeffs[d - j])?)?;
        }
        let diff = lhs.sub(&rhs)?;
        let bad = diff.entries().find(|(_, _, x)| !x.is_zero()).map(|(r, c, x)| (r, c, x.terms()[0].0));
        if let Some((row, col, e)) = bad {
            return Err(Error::ResidualNonzero {
                zdeg: d as i64,
                qexp: fmt_exp(&e),
                row,
                col,
            });
        }
    }
    Ok(zorder)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemJson {
    pub var: String,
    #[serde(rename = "L")]
    pub l: Vec<Vec<RfJson>>,
    #[serde(rename = "M")]
    pub m: Vec<Vec<RfJson>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolutionJson {
    pub var: String,
    pub chart: Chart,
    pub zorder: u32,
    pub coefficients: Vec<Vec<Vec<RfJson>>>,
}

impl QDESystem {
    pub fn to_json(&self) -> SystemJson {
        SystemJson {
            var: self.var.to_string(),
            l: field_matrix_to_json(&self.l),
            m: field_matrix_to_json(&self.m),
        }
    }

    pub fn from_json(j: &SystemJson) -> Result<Self> {
        QDESystem::new(
            Symbol::new(&j.var)?,
            field_matrix_from_json(&j.l)?,
            field_matrix_from_json(&j.m)?,
        )
    }
}

impl FundamentalSolution {
    pub fn to_json(&self) -> SolutionJson {
        SolutionJson {
            var: self.var.to_string(),
            chart: self.chart,
            zorder: self.zorder(),
            coefficients: self.coeffs.iter().map(field_matrix_to_json).collect(),
        }
    }

    pub fn from_json(j: &SolutionJson) -> Result<Self> {
        let coeffs = j
            .coefficients
            .iter()
            .map(|c| field_matrix_from_json(c))
            .collect::<Result<Vec<_>>>()?;
        if coeffs.len() != j.zorder as usize + 1 {
            return Err(Error::parse("coefficient count does not match zorder"));
        }
        FundamentalSolution::from_coefficients(Symbol::new(&j.var)?, j.chart, coeffs)
    }
}

/// Rank-one matrix helper.
pub fn scalar_matrix(f: RationalFunction) -> FieldMatrix {
    Matrix::scalar(1, f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::parse::parse_rf;
    use crate::qspecial::{pochhammer_finite_rf, psi0_closed, psi_inf_closed, psi_inf_sum};

    fn tp0_m() -> RationalFunction {
        parse_rf("(1-z)/(1-z*hbar)").unwrap()
    }

    #[test]
    fn scalar_coefficients() {
        let sol = solve_scalar(&tp0_m(), 3).unwrap();
        assert_eq!(sol.coefficient(1).get(0, 0), &parse_rf("(1-hbar)/(1-q)").unwrap());
        let h = RationalFunction::var(vars::hbar());
        let q = RationalFunction::var(vars::q());
        let c3 = pochhammer_finite_rf(&h, vars::q(), 3)
            .unwrap()
            .div(&pochhammer_finite_rf(&q, vars::q(), 3).unwrap())
            .unwrap();
        assert_eq!(sol.coefficient(3).get(0, 0), &c3);
        let one = solve_scalar(&RationalFunction::one(), 4).unwrap();
        assert!(one.coefficients()[1..].iter().all(|c| c.get(0, 0).is_zero()));
    }

    #[test]
    fn residual_catches_mutation() {
        let sys = QDESystem::scalar(tp0_m()).unwrap();
        let mut sol = solve_scalar(&tp0_m(), 5).unwrap();
        assert_eq!(residual(&sol, &sys).unwrap(), 5);
        let c = sol.coefficients_mut();
        let bumped = c[3].get(0, 0).add(&RationalFunction::int(1)).unwrap();
        c[3].set(0, 0, bumped);
        match residual(&sol, &sys) {
            Err(Error::ResidualNonzero { zdeg, .. }) => assert_eq!(zdeg, 3),
            other => panic!("expected residual failure, got {other:?}"),
        }
    }

    #[test]
    fn closed_forms_pass_residual() {
        let sys = QDESystem::scalar(tp0_m()).unwrap();
        let n = exp_int(5);
        let psi0 = Matrix::from_rows(vec![vec![psi0_closed(n).unwrap()]]).unwrap();
        let parts = split_chart(&psi0, vars::z(), 5).unwrap();
        assert_eq!(residual_series(&parts, &sys).unwrap(), 5);

        let w = vars::w();
        let inf = sys
            .with_l_scaled(&parse_rf("hbar^(-1)").unwrap())
            .unwrap()
            .at_infinity(w)
            .unwrap();
        let zi = Monomial::var(w).inv();
        let pinf = psi_inf_closed(n).unwrap().map_coeffs(|c| c.substitute(vars::z(), &zi)).unwrap();
        let parts = split_chart(&Matrix::from_rows(vec![vec![pinf]]).unwrap(), w, 5).unwrap();
        assert_eq!(residual_series(&parts, &inf).unwrap(), 5);

        let sqrt_h = parse_rf("hbar^(1/2)").unwrap();
        let sol = solve_matrix(&inf, &Normalization::Custom(scalar_matrix(sqrt_h)), 4, Chart::Infinity).unwrap();
        let sums = psi_inf_sum(4).unwrap();
        for (d, c) in sums.iter().enumerate() {
            assert_eq!(sol.coefficient(d).get(0, 0), c);
        }
    }

    #[test]
    fn synthetic_rank_two() {
        let m = Matrix::from_rows(vec![
            vec![parse_rf("1").unwrap(), parse_rf("z").unwrap()],
            vec![parse_rf("0").unwrap(), parse_rf("hbar*(1-z)").unwrap()],
        ])
        .unwrap();
        let l = Matrix::diag(vec![parse_rf("1").unwrap(), parse_rf("hbar").unwrap()]);
        let sys = QDESystem::new(vars::z(), l, m).unwrap();
        let sol = solve_matrix(&sys, &Normalization::Identity, 6, Chart::Zero).unwrap();
        assert_eq!(residual(&sol, &sys).unwrap(), 6);
        let g = Matrix::from_rows(vec![
            vec![parse_rf("1").unwrap(), parse_rf("hbar").unwrap()],
            vec![parse_rf("0").unwrap(), parse_rf("2").unwrap()],
        ])
        .unwrap();
        let conj = sys.conjugate(&g).unwrap();
        // G·Ψ has constant term G, which satisfies G·L = (G·M₀·G⁻¹)·G.
        let sol2 = solve_matrix(&conj, &Normalization::Custom(g.clone()), 6, Chart::Zero).unwrap();
        for d in 0..=6 {
            assert_eq!(sol2.coefficient(d), &g.mul(sol.coefficient(d)).unwrap());
        }
    }

    #[test]
    fn identity_normalization_conflict() {
        let sys = QDESystem::new(
            vars::z(),
            FieldMatrix::identity(1),
            scalar_matrix(parse_rf("2*(1-z)").unwrap()),
        )
        .unwrap();
        assert!(matches!(
            solve_matrix(&sys, &Normalization::Identity, 2, Chart::Zero),
            Err(Error::NormalizationConflict(_))
        ));
    }
}
