//! Ordered products of wall-crossing operators: the q-difference operators
//! `𝐌_{O(k)}` and the product fundamental solutions.

use num_integer::Integer;
use num_traits::Signed;
use serde::{Deserialize, Serialize};

use super::{exp_str, l_pow, side_offset, wall_crossing, wall_set, walls_between, Frame, OperatorKind};
use crate::arith::json::{field_matrix_to_json, series_matrix_to_json, RfJson, SeriesJson};
use crate::arith::{fmt_exp, vars, Exp, FieldMatrix, Monomial, SeriesMatrix, Symbol};
use crate::error::{Error, Result};
use crate::models::{Model, MonomialGauge};
use crate::qde::{q_series, residual_series, split_chart, QDESystem};

/// Name of the symbol standing for `q^{1/D}` when fractional walls are shifted.
pub const Q_ROOT: &str = "qr";

/// `sym^den = q`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QScale {
    pub sym: Symbol,
    pub den: i64,
}

impl QScale {
    pub fn for_slopes(slopes: &[Exp]) -> Result<Self> {
        let den = slopes.iter().fold(1i64, |d, s| d.lcm(s.denom()));
        let sym = if den == 1 { vars::q() } else { Symbol::new(Q_ROOT)? };
        Ok(QScale { sym, den })
    }
}

/// `f(z) ↦ f(z q^e)`.
pub fn shift_arg(m: &FieldMatrix, var: Symbol, e: Exp, qs: &QScale) -> Result<FieldMatrix> {
    let k = e * Exp::from_integer(qs.den);
    if !k.is_integer() {
        return Err(Error::NonRepresentable(format!("q^({}) with root q^(1/{})", fmt_exp(&e), qs.den)));
    }
    let mono = &Monomial::var(var) * &Monomial::var_pow(qs.sym, k);
    m.substitute(var, &mono)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Crossing {
    #[serde(with = "exp_str")]
    pub wall: Exp,
    pub downward: bool,
}

/// Wall crossings of a piecewise-linear path through generic waypoints.
pub fn path_crossings(model: &Model, waypoints: &[Exp]) -> Result<Vec<Crossing>> {
    let ws = wall_set(model)?;
    for w in waypoints {
        if ws.contains(*w) {
            return Err(Error::WallSlope(fmt_exp(w)));
        }
    }
    let mut out = Vec::new();
    for pair in waypoints.windows(2) {
        let down = pair[1] < pair[0];
        for w in walls_between(model, pair[0], pair[1])? {
            out.push(Crossing { wall: w, downward: down });
        }
    }
    Ok(out)
}

fn same_chamber(model: &Model, a: Exp, b: Exp) -> Result<bool> {
    Ok(walls_between(model, a, b)?.is_empty())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QRootInfo {
    pub symbol: String,
    pub den: i64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Assembly {
    pub k: i64,
    pub kind: OperatorKind,
    pub frame: Frame,
    pub crossings: Vec<Crossing>,
    pub q_root: Option<QRootInfo>,
    pub matrix: FieldMatrix,
}

/// `𝐌_{O(k)}(z) = L^k · B_{w_m}(z q^{−w_m}) ⋯ B_{w_1}(z q^{−w_1})` along a path
/// from `−ε` to `−ε−k`; `B*` factors give `𝐌*`. Crossing a wall upwards
/// contributes the inverse factor. With several paths the products must agree.
pub fn assemble_m(model: &Model, k: i64, kind: OperatorKind, frame: Frame, paths: &[Vec<Exp>]) -> Result<Assembly> {
    let eps = side_offset(model, Exp::from_integer(0))?;
    let start = -eps;
    let end = start - Exp::from_integer(k);
    let default = vec![vec![start, end]];
    let paths = if paths.is_empty() { &default[..] } else { paths };
    let mut result: Option<Assembly> = None;
    for path in paths {
        let (Some(first), Some(last)) = (path.first(), path.last()) else {
            return Err(Error::invalid("empty path"));
        };
        if !same_chamber(model, *first, start)? || !same_chamber(model, *last, end)? {
            return Err(Error::invalid(format!(
                "path must run from the chamber of {} to the chamber of {}",
                fmt_exp(&start),
                fmt_exp(&end)
            )));
        }
        let crossings = path_crossings(model, path)?;
        let walls: Vec<Exp> = crossings.iter().map(|c| c.wall).collect();
        let qs = QScale::for_slopes(&walls)?;
        let mut acc = FieldMatrix::identity(model.rank());
        for c in &crossings {
            let b = wall_crossing(model, c.wall, kind, frame)?;
            let f = shift_arg(&b, model.var, -c.wall, &qs)?;
            acc = if c.downward { f.mul(&acc)? } else { f.inv()?.mul(&acc)? };
        }
        let matrix = l_pow(model, k)?.mul(&acc)?;
        let q_root = (qs.den > 1).then(|| QRootInfo { symbol: Q_ROOT.into(), den: qs.den });
        match &result {
            None => result = Some(Assembly { k, kind, frame, crossings, q_root, matrix }),
            Some(prev) => {
                if prev.matrix != matrix {
                    return Err(Error::PathMismatch);
                }
            }
        }
    }
    Ok(result.expect("at least one path"))
}

/// Finds `c` and `k` with `m(z) = c · r(z q^k)`, `c` a monomial, trying
/// `k = 0, 1, −1, 2, −2`.
pub fn find_gauge(m: &FieldMatrix, reference: &FieldMatrix, var: Symbol) -> Result<Option<MonomialGauge>> {
    let qs = QScale { sym: vars::q(), den: 1 };
    for k in [0i64, 1, -1, 2, -2] {
        let r = shift_arg(reference, var, Exp::from_integer(k), &qs)?;
        let Some((i, j, x)) = r.entries().find(|(_, _, x)| !x.is_zero()) else {
            continue;
        };
        let c = m.get(i, j).div(x)?;
        if c.as_monomial().is_none() {
            continue;
        }
        if r.scale(&c) == *m {
            return Ok(Some(MonomialGauge { factor: c, z_shift: k }));
        }
    }
    Ok(None)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssemblyReport {
    pub k: i64,
    pub kind: OperatorKind,
    pub frame: Frame,
    pub crossings: Vec<Crossing>,
    pub q_root: Option<QRootInfo>,
    pub matrix: Vec<Vec<RfJson>>,
    /// Gauge relating the result to the model's reference equation.
    pub gauge: Option<MonomialGauge>,
    /// Whether that gauge equals the one recorded in the model manifest.
    pub gauge_matches_manifest: Option<bool>,
}

pub fn assembly_report(model: &Model, a: &Assembly) -> Result<AssemblyReport> {
    let gauge = match (&model.reference, a.k, &a.q_root) {
        (Some(r), 1, None) => find_gauge(&a.matrix, r, model.var)?,
        _ => None,
    };
    let matches = match (&gauge, &model.gauge, a.kind, a.frame) {
        (Some(g), Some(mg), OperatorKind::B, Frame::Raw) => Some(*g == mg.assemble),
        _ => None,
    };
    Ok(AssemblyReport {
        k: a.k,
        kind: a.kind,
        frame: a.frame,
        crossings: a.crossings.clone(),
        q_root: a.q_root.clone(),
        matrix: field_matrix_to_json(&a.matrix),
        gauge,
        gauge_matches_manifest: matches,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Theta,
    MinusTheta,
}

/// Ordered factors of a product solution for walls with `|w| ≤ bound`:
/// `B̂_w(z q^{−w})^{−1}` for `w < 0` starting next to zero (theta side), or
/// `B̂*_w(z q^{−w})` for `w ≥ 0` (minus side). Entries are in `z` and `q`.
pub fn product_factors(model: &Model, side: Side, bound: i64) -> Result<Vec<(Exp, FieldMatrix)>> {
    let ws = wall_set(model)?;
    let b = Exp::from_integer(bound);
    let iv = match side {
        Side::Theta => super::farey::Interval { lo: -b, hi: Exp::from_integer(0), lo_closed: true, hi_closed: false },
        Side::MinusTheta => super::farey::Interval::closed(Exp::from_integer(0), b),
    };
    let mut walls = ws.walls_in(&iv)?;
    if side == Side::Theta {
        walls.reverse();
    }
    let qs = QScale::for_slopes(&walls)?;
    if qs.den > 1 {
        return Err(Error::NonRepresentable("product solutions across fractional walls".into()));
    }
    walls
        .into_iter()
        .map(|w| {
            let f = match side {
                Side::Theta => wall_crossing(model, w, OperatorKind::B, Frame::Normalized)?.inv()?,
                Side::MinusTheta => wall_crossing(model, w, OperatorKind::Bstar, Frame::Normalized)?,
            };
            Ok((w, shift_arg(&f, model.var, -w, &qs)?))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProductSolution {
    pub side: Side,
    /// `z` on the theta side, `w = 1/z` on the minus side.
    pub chart_var: Symbol,
    pub zorder: u32,
    pub qorder: Exp,
    pub walls: Vec<Exp>,
    pub series: SeriesMatrix,
    pub coefficients: Vec<SeriesMatrix>,
}

fn check_factor(w: Exp, f: &FieldMatrix, qorder: Exp) -> Result<()> {
    let below = w.abs() - Exp::from_integer(1);
    if below < Exp::from_integer(0) {
        return Ok(());
    }
    let d = f.sub(&FieldMatrix::identity(f.dim()))?;
    for (_, _, x) in d.entries() {
        if !q_series(x, below.min(qorder))?.is_zero() {
            return Err(Error::NonConvergentProduct(format!(
                "factor at wall {} differs from 1 below q^{}",
                fmt_exp(&w),
                fmt_exp(&w.abs())
            )));
        }
    }
    Ok(())
}

/// The truncated product solution, exact through `q^{qorder}`.
pub fn product_solution(model: &Model, side: Side, zorder: u32, qorder: u32) -> Result<ProductSolution> {
    let n = Exp::from_integer(qorder as i64);
    let factors = product_factors(model, side, qorder as i64)?;
    let chart_var = match side {
        Side::Theta => model.var,
        Side::MinusTheta => vars::w(),
    };
    let inv_w = Monomial::var(vars::w()).inv();
    let q = vars::q();
    let mut series = SeriesMatrix::identity_series(model.rank(), q, n);
    for (w, f) in &factors {
        check_factor(*w, f, n)?;
        let f = match side {
            Side::Theta => f.clone(),
            Side::MinusTheta => f.substitute(model.var, &inv_w)?,
        };
        let fs = f.map(|x| q_series(x, n))?;
        series = series.mul(&fs)?.truncate(n);
    }
    let coefficients = split_chart(&series, chart_var, zorder)?;
    Ok(ProductSolution {
        side,
        chart_var,
        zorder,
        qorder: n,
        walls: factors.iter().map(|(w, _)| *w).collect(),
        series,
        coefficients,
    })
}

/// The system a product solution should satisfy: `Ψ(zq)L = 𝐌̂_{O(1)}Ψ` on the
/// theta side, `Ψ(zq)L = 𝐌̂*_{O(1)}Ψ` rewritten in `w` on the minus side.
pub fn product_system(model: &Model, side: Side) -> Result<QDESystem> {
    let kind = match side {
        Side::Theta => OperatorKind::B,
        Side::MinusTheta => OperatorKind::Bstar,
    };
    let m = assemble_m(model, 1, kind, Frame::Normalized, &[])?;
    let sys = QDESystem::new(model.var, model.l.clone(), m.matrix)?;
    match side {
        Side::Theta => Ok(sys),
        Side::MinusTheta => sys.at_infinity(vars::w()),
    }
}

pub fn product_residual(model: &Model, sol: &ProductSolution) -> Result<u32> {
    residual_series(&sol.coefficients, &product_system(model, sol.side)?)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProductReport {
    pub side: Side,
    pub chart_var: String,
    pub zorder: u32,
    #[serde(with = "exp_str")]
    pub qorder: Exp,
    pub walls: Vec<String>,
    pub verified_order: u32,
    pub coefficients: Vec<Vec<Vec<SeriesJson>>>,
}

pub fn product_report(model: &Model, sol: &ProductSolution) -> Result<ProductReport> {
    Ok(ProductReport {
        side: sol.side,
        chart_var: sol.chart_var.to_string(),
        zorder: sol.zorder,
        qorder: sol.qorder,
        walls: sol.walls.iter().map(fmt_exp).collect(),
        verified_order: product_residual(model, sol)?,
        coefficients: sol.coefficients.iter().map(series_matrix_to_json).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::parse::parse_rf;
    use crate::arith::{exp_frac, exp_int, Matrix};
    use crate::models::partition::Partition;
    use crate::models::ExternalOperator;
    use crate::qspecial::psi0_closed;

    fn one(s: &str) -> FieldMatrix {
        FieldMatrix::scalar(1, parse_rf(s).unwrap())
    }

    #[test]
    fn tp0_assembly() {
        let m = Model::tp0();
        let a = assemble_m(&m, 1, OperatorKind::B, Frame::Raw, &[]).unwrap();
        assert_eq!(a.matrix, one("(1-z*q)/(1-z*q*hbar)"));
        assert_eq!(a.crossings, vec![Crossing { wall: exp_int(-1), downward: true }]);
        let r = assembly_report(&m, &a).unwrap();
        assert_eq!(r.gauge, Some(MonomialGauge::shift(1)));
        assert_eq!(r.gauge_matches_manifest, Some(true));
        let n = assemble_m(&m, 1, OperatorKind::B, Frame::Normalized, &[]).unwrap();
        assert_eq!(n.matrix, one("hbar^(-1)*(1-z*q)/(1-z*q*hbar)"));
        // a detour across 0 and back gives the same operator
        let eps = exp_frac(1, 2);
        let detour = vec![-eps, exp_frac(1, 3), exp_frac(-5, 4), exp_frac(-3, 2)];
        let b = assemble_m(&m, 1, OperatorKind::B, Frame::Raw, &[vec![-eps, exp_frac(-3, 2)], detour]).unwrap();
        assert_eq!(b.matrix, a.matrix);
        assert!(assemble_m(&m, 1, OperatorKind::B, Frame::Raw, &[vec![-eps, exp_int(-1)]]).is_err());
        let id = assemble_m(&Model::identity(), 3, OperatorKind::B, Frame::Raw, &[]).unwrap();
        assert!(id.crossings.is_empty() && id.matrix.is_identity());
    }

    #[test]
    fn tp0_product_solutions() {
        let m = Model::tp0();
        let th = product_solution(&m, Side::Theta, 6, 6).unwrap();
        assert_eq!(product_residual(&m, &th).unwrap(), 6);
        // Ψ_θ(z) = Ψ₀(zq)
        let shifted = psi0_closed(exp_int(12)).unwrap().substitute_slope(vars::z(), exp_int(1)).unwrap().truncate(exp_int(6));
        let want = split_chart(&Matrix::from_rows(vec![vec![shifted]]).unwrap(), vars::z(), 6).unwrap();
        assert_eq!(th.coefficients, want);
        let mt = product_solution(&m, Side::MinusTheta, 4, 4).unwrap();
        assert_eq!(product_residual(&m, &mt).unwrap(), 4);
        let zero = product_solution(&m, Side::Theta, 3, 0).unwrap();
        assert!(zero.series.is_identity_series());
    }

    #[test]
    fn hilb_ordering() {
        let mut m = Model::hilb(4).unwrap();
        let basis: Vec<Partition> = m.basis.clone();
        let walls = [exp_int(-1), exp_frac(-3, 4), exp_frac(-2, 3), exp_frac(-1, 2), exp_frac(-1, 3), exp_frac(-1, 4)];
        // distinct noncommuting unipotent operators, one per wall
        for (i, w) in walls.iter().enumerate() {
            let mat = Matrix::from_fn(5, |r, c| {
                if r == c {
                    parse_rf("1").unwrap()
                } else if c == r + 1 {
                    parse_rf(&format!("{}*z", i + 2)).unwrap()
                } else {
                    parse_rf("0").unwrap()
                }
            });
            m.add_operator(ExternalOperator { wall: *w, kind: OperatorKind::B, basis: basis.clone(), matrix: mat })
                .unwrap();
        }
        let a = assemble_m(&m, 1, OperatorKind::B, Frame::Raw, &[]).unwrap();
        let order: Vec<Exp> = a.crossings.iter().rev().map(|c| c.wall).collect();
        assert_eq!(order, walls);
        let q = a.q_root.clone().unwrap();
        assert_eq!((q.symbol.as_str(), q.den), (Q_ROOT, 12));
        let qs = QScale { sym: Symbol::new(Q_ROOT).unwrap(), den: 12 };
        let mut want = m.l.clone();
        for w in walls {
            let b = wall_crossing(&m, w, OperatorKind::B, Frame::Raw).unwrap();
            want = want.mul(&shift_arg(&b, vars::z(), -w, &qs).unwrap()).unwrap();
        }
        assert_eq!(a.matrix, want);
        assert!(matches!(product_solution(&m, Side::Theta, 2, 2), Err(Error::NonRepresentable(_))));
    }
}
