//! Exact identities among wall-crossing and transport operators.
//!
//! The raw operators of a model need not be trivial at their own chart
//! origin; the chart gauges `G_θ(s) = B_s(0_θ)` and `G_{−θ}(s) = B*_s(0_{−θ})`
//! are carried explicitly, so the infinity relations read
//! `B*_s(0_θ) T^{s+δ} = T^{s−δ} G_θ(s)` and `G_{−θ}(s) T^{s+δ} = T^{s−δ} B_s(0_{−θ})`.

use serde::{Deserialize, Serialize};

use super::assemble::{assemble_m, shift_arg, QScale};
use super::farey::Interval;
use super::{
    chart_gauge, declared_walls, is_wall, side_offset, slope_limit, transport, wall_crossing, walls_between,
    Direction, Frame, OperatorKind,
};
use crate::arith::{exp_add, fmt_exp, vars, Exp, FieldMatrix};
use crate::error::Result;
use crate::models::Model;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationCheck {
    pub relation: String,
    pub at: String,
    pub holds: bool,
    /// First differing entry when the identity fails.
    pub first_difference: Option<(usize, usize)>,
}

fn check(relation: &str, at: String, lhs: &FieldMatrix, rhs: &FieldMatrix) -> RelationCheck {
    let first_difference = lhs.first_difference(rhs);
    RelationCheck { relation: relation.into(), at, holds: first_difference.is_none(), first_difference }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowShift {
    pub holds: bool,
    pub first_difference: Option<(usize, usize)>,
}

/// Compares `L^{−1} b_s L` with `b_{s−1}`.
pub fn window_shift(l: &FieldMatrix, b_s: &FieldMatrix, b_prev: &FieldMatrix) -> Result<WindowShift> {
    let lhs = l.inv()?.mul(b_s)?.mul(l)?;
    let first_difference = lhs.first_difference(b_prev);
    Ok(WindowShift { holds: first_difference.is_none(), first_difference })
}

/// `L^{−1} B_s(z) L = B_{s−1}(z)` for the Picard generator.
pub fn check_window_shift(model: &Model, s: Exp, kind: OperatorKind) -> Result<WindowShift> {
    let b = wall_crossing(model, s, kind, Frame::Raw)?;
    let prev = wall_crossing(model, exp_add(s, Exp::from_integer(-1))?, kind, Frame::Raw)?;
    window_shift(&model.l, &b, &prev)
}

fn product(ms: impl Iterator<Item = Result<FieldMatrix>>, n: usize) -> Result<FieldMatrix> {
    ms.fold(Ok(FieldMatrix::identity(n)), |acc, m| acc?.mul(&m?))
}

/// Runs every identity on the declared walls of the interval.
pub fn relation_suite(model: &Model, iv: &Interval) -> Result<Vec<RelationCheck>> {
    let n = model.rank();
    let z = model.var;
    let id = FieldMatrix::identity(n);
    let mut out = Vec::new();
    let walls: Vec<Exp> = declared_walls(model, iv)?.into_iter().map(|w| w.slope).collect();
    for &s in &walls {
        let at = fmt_exp(&s);
        let b = wall_crossing(model, s, OperatorKind::B, Frame::Raw)?;
        let bs = wall_crossing(model, s, OperatorKind::Bstar, Frame::Raw)?;
        let tp = slope_limit(model, s, Direction::Plus)?;
        let tm = slope_limit(model, s, Direction::Minus)?;
        out.push(check("bstar_b_transport", at.clone(), &bs.mul(&tp)?, &tm.mul(&b)?));
        let g_theta = chart_gauge(model, s, OperatorKind::B)?;
        let g_minus = chart_gauge(model, s, OperatorKind::Bstar)?;
        out.push(check("chart_transport_theta", at.clone(), &bs.at_zero(z)?.mul(&tp)?, &tm.mul(&g_theta)?));
        out.push(check("chart_transport_minus_theta", at.clone(), &g_minus.mul(&tp)?, &tm.mul(&b.at_infinity(z)?)?));
        for kind in [OperatorKind::B, OperatorKind::Bstar] {
            let w = check_window_shift(model, s, kind)?;
            out.push(RelationCheck {
                relation: format!("window_shift_{kind}"),
                at: at.clone(),
                holds: w.holds,
                first_difference: w.first_difference,
            });
        }
        let bh = wall_crossing(model, s, OperatorKind::B, Frame::Normalized)?;
        let bsh = wall_crossing(model, s, OperatorKind::Bstar, Frame::Normalized)?;
        out.push(check("normalized_trivial_theta", at.clone(), &bh.at_zero(z)?, &id));
        out.push(check("normalized_trivial_minus_theta", at.clone(), &bsh.at_infinity(z)?, &id));
        let gauge_free = !g_theta.entries().chain(g_minus.entries()).any(|(_, _, x)| x.contains_var(z));
        out.push(RelationCheck {
            relation: "chart_gauge_constant".into(),
            at: at.clone(),
            holds: gauge_free,
            first_difference: None,
        });
    }
    // generic slopes between consecutive walls
    let mut cuts = vec![iv.lo];
    cuts.extend(walls.iter().copied());
    cuts.push(iv.hi);
    for pair in cuts.windows(2) {
        if pair[0] == pair[1] {
            continue;
        }
        let quarter = (pair[1] - pair[0]) / Exp::from_integer(4);
        let mid = [pair[0] + quarter, pair[0] + quarter * Exp::from_integer(3)];
        if is_wall(model, mid[0])? || is_wall(model, mid[1])? {
            continue;
        }
        let at = format!("({},{})", fmt_exp(&pair[0]), fmt_exp(&pair[1]));
        for m in mid {
            let b = wall_crossing(model, m, OperatorKind::B, Frame::Raw)?;
            let bs = wall_crossing(model, m, OperatorKind::Bstar, Frame::Raw)?;
            out.push(check("regularwc_b", fmt_exp(&m), &b, &id));
            out.push(check("regularwc_bstar", fmt_exp(&m), &bs, &id));
        }
        out.push(check("transport_constant", at, &transport(model, mid[0])?, &transport(model, mid[1])?));
    }
    // iterated infinity relations across the whole interval
    let s0 = exp_add(iv.lo, -side_offset(model, iv.lo)?)?;
    let s1 = exp_add(iv.hi, side_offset(model, iv.hi)?)?;
    let crossed = walls_between(model, s0, s1)?;
    let t0 = transport(model, s0)?;
    let t1 = transport(model, s1)?;
    let at = format!("{}->{}", fmt_exp(&s0), fmt_exp(&s1));
    let left = product(
        crossed.iter().rev().map(|&w| wall_crossing(model, w, OperatorKind::Bstar, Frame::Raw)?.at_zero(z)?.inv()),
        n,
    )?;
    let right = product(crossed.iter().map(|&w| chart_gauge(model, w, OperatorKind::B)), n)?;
    out.push(check("iterated_transport_theta", at.clone(), &left.mul(&t0)?.mul(&right)?, &t1));
    let left = product(crossed.iter().rev().map(|&w| chart_gauge(model, w, OperatorKind::Bstar)?.inv()), n)?;
    let right = product(
        crossed.iter().map(|&w| wall_crossing(model, w, OperatorKind::B, Frame::Raw)?.at_infinity(z)),
        n,
    )?;
    out.push(check("iterated_transport_minus_theta", at, &left.mul(&t0)?.mul(&right)?, &t1));
    out.extend(cocycle_checks(model)?);
    Ok(out)
}

/// `𝐌_{k₁+k₂}(z) = 𝐌_{k₁}(z q^{k₂}) 𝐌_{k₂}(z)` and the same with the factors
/// swapped, for `𝐌` and `𝐌*` in both frames.
pub fn cocycle_checks(model: &Model) -> Result<Vec<RelationCheck>> {
    let qs = QScale { sym: vars::q(), den: 1 };
    let mut out = Vec::new();
    for kind in [OperatorKind::B, OperatorKind::Bstar] {
        for frame in [Frame::Raw, Frame::Normalized] {
            for (k1, k2) in [(1i64, 1i64), (1, 2), (2, -1), (-1, -1)] {
                let m = |k: i64| assemble_m(model, k, kind, frame, &[]);
                let (a, b, ab) = (m(k1)?, m(k2)?, m(k1 + k2)?);
                if a.q_root.is_some() || b.q_root.is_some() {
                    continue;
                }
                let lhs1 = shift_arg(&a.matrix, model.var, Exp::from_integer(k2), &qs)?.mul(&b.matrix)?;
                let lhs2 = shift_arg(&b.matrix, model.var, Exp::from_integer(k1), &qs)?.mul(&a.matrix)?;
                let at = format!("{kind},{frame:?},{k1},{k2}").to_lowercase();
                out.push(check("cocycle", at.clone(), &lhs1, &ab.matrix));
                out.push(check("cocycle_swapped", at, &lhs2, &ab.matrix));
            }
        }
        let eps = side_offset(model, Exp::from_integer(0))?;
        let straight = vec![-eps, -eps - Exp::from_integer(1)];
        let detour = vec![-eps, Exp::from_integer(1) - eps, Exp::from_integer(-2) - eps, Exp::from_integer(-1) - eps];
        let agree = assemble_m(model, 1, kind, Frame::Raw, &[straight, detour]).is_ok();
        out.push(RelationCheck { relation: "path_independence".into(), at: kind.to_string(), holds: agree, first_difference: None });
    }
    Ok(out)
}

/// `B_s(0_{−θ}) = 1` and `B*_s(0_θ) = 1` on the raw operators, i.e. the
/// trivialization with the chart labels exchanged.
pub fn raw_swapped_triviality(model: &Model, iv: &Interval) -> Result<Vec<RelationCheck>> {
    let id = FieldMatrix::identity(model.rank());
    let mut out = Vec::new();
    for w in declared_walls(model, iv)? {
        let s = w.slope;
        let b = wall_crossing(model, s, OperatorKind::B, Frame::Raw)?;
        let bs = wall_crossing(model, s, OperatorKind::Bstar, Frame::Raw)?;
        out.push(check("raw_b_at_minus_theta", fmt_exp(&s), &b.at_infinity(model.var)?, &id));
        out.push(check("raw_bstar_at_theta", fmt_exp(&s), &bs.at_zero(model.var)?, &id));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::exp_int;
    use crate::arith::parse::parse_rf;

    #[test]
    fn tp0_relations_hold() {
        let iv: Interval = "[-3,3]".parse().unwrap();
        for model in [Model::tp0(), Model::diagonal(), Model::identity()] {
            let checks = relation_suite(&model, &iv).unwrap();
            let bad: Vec<_> = checks.iter().filter(|c| !c.holds).collect();
            assert!(bad.is_empty(), "{}: {bad:?}", model.name);
            assert!(raw_swapped_triviality(&model, &iv).unwrap().iter().all(|c| c.holds));
        }
    }

    #[test]
    fn window_shift_detects_mutation() {
        let m = Model::tp0();
        assert!(check_window_shift(&m, exp_int(0), OperatorKind::B).unwrap().holds);
        assert!(check_window_shift(&m, Exp::new(1, 3), OperatorKind::B).unwrap().holds);
        let b = wall_crossing(&m, exp_int(0), OperatorKind::B, Frame::Raw).unwrap();
        let mutated = b.scale(&parse_rf("1+z").unwrap());
        let prev = wall_crossing(&m, exp_int(-1), OperatorKind::B, Frame::Raw).unwrap();
        let w = window_shift(&m.l, &mutated, &prev).unwrap();
        assert!(!w.holds);
        assert_eq!(w.first_difference, Some((0, 0)));
    }
}
