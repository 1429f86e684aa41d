//! Slope limits of the monodromy, walls, wall-crossing and transport
//! operators.
//!
//! Two charts of the Kähler line are used: `0_θ` is `z = 0` and `0_{−θ}` is
//! `z = ∞`. A one-sided limit at `s` is evaluated at `s ± δ` with
//! `δ = 1/(2·den(s)·b)`, `b` the largest wall denominator, which is below
//! half the distance from `s` to any other wall.

pub mod assemble;
pub mod farey;
pub mod reconstruct;
pub mod relations;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::arith::json::{field_matrix_to_json, RfJson};
use crate::arith::{exp_add, fmt_exp, Exp, FieldMatrix};
use crate::error::{Error, Result};
use crate::models::{Model, WallSet};

use farey::{farey_in, Interval};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorKind {
    #[default]
    B,
    Bstar,
}

impl OperatorKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            OperatorKind::B => "b",
            OperatorKind::Bstar => "bstar",
        }
    }
}

impl fmt::Display for OperatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for OperatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "b" => Ok(OperatorKind::B),
            "bstar" | "b*" => Ok(OperatorKind::Bstar),
            _ => Err(Error::parse(format!("unknown operator kind {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    At,
    Plus,
    Minus,
}

impl FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "at" => Ok(Direction::At),
            "plus" | "+" => Ok(Direction::Plus),
            "minus" | "-" => Ok(Direction::Minus),
            _ => Err(Error::parse(format!("unknown direction {s:?}"))),
        }
    }
}

/// Raw operators as defined by one-sided limits, or normalized so that they
/// are trivial at their own chart origin.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Frame {
    #[default]
    Raw,
    Normalized,
}

pub(crate) mod exp_str {
    use serde::{Deserialize, Deserializer, Serializer};

    use crate::arith::{fmt_exp, parse_exp, Exp};

    pub fn serialize<S: Serializer>(e: &Exp, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&fmt_exp(e))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Exp, D::Error> {
        let s = String::deserialize(d)?;
        parse_exp(&s).map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Wall {
    #[serde(with = "exp_str")]
    pub slope: Exp,
    /// Denominators `b ≤ bound` with `slope = a/b` for some integer `a`.
    pub realized_by: Vec<i64>,
}

impl Wall {
    pub fn new(slope: Exp, bound: i64) -> Self {
        let d = *slope.denom();
        Wall {
            slope,
            realized_by: (1..=bound.max(d)).filter(|b| b % d == 0).collect(),
        }
    }
}

pub fn wall_set(model: &Model) -> Result<WallSet> {
    model
        .walls
        .ok_or_else(|| Error::UnknownWallGap(format!("model {} declares no walls", model.name)))
}

fn offset(s: Exp, bound: i64) -> Result<Exp> {
    let d = s
        .denom()
        .checked_mul(2 * bound)
        .ok_or_else(|| Error::NonRepresentable(format!("side offset at {}", fmt_exp(&s))))?;
    Ok(Exp::new(1, d))
}

/// The offset `δ` used for one-sided limits at `s`.
pub fn side_offset(model: &Model, s: Exp) -> Result<Exp> {
    offset(s, wall_set(model)?.gap_bound())
}

fn limit_with_bound(model: &Model, s: Exp, dir: Direction, bound: i64) -> Result<FieldMatrix> {
    let mon = model
        .monodromy
        .as_ref()
        .ok_or_else(|| Error::invalid(format!("model {} has no monodromy expression", model.name)))?;
    let t = match dir {
        Direction::At => s,
        Direction::Plus => exp_add(s, offset(s, bound)?)?,
        Direction::Minus => exp_add(s, -offset(s, bound)?)?,
    };
    let n = mon.len();
    FieldMatrix::try_from_fn(n, |i, j| mon[i][j].substitute_slope(model.var, t).limit_q0())
}

/// `lim_{q→0} Mon(z q^{s})`, or at `s ± δ`.
pub fn slope_limit(model: &Model, s: Exp, dir: Direction) -> Result<FieldMatrix> {
    let bound = match dir {
        Direction::At => 1,
        _ => wall_set(model)?.gap_bound(),
    };
    limit_with_bound(model, s, dir, bound)
}

fn from_limits(model: &Model, s: Exp, kind: OperatorKind, bound: i64) -> Result<FieldMatrix> {
    let at = limit_with_bound(model, s, Direction::At, bound)?;
    match kind {
        OperatorKind::B => limit_with_bound(model, s, Direction::Minus, bound)?.inv()?.mul(&at),
        OperatorKind::Bstar => at.mul(&limit_with_bound(model, s, Direction::Plus, bound)?.inv()?),
    }
}

fn pow(m: &FieldMatrix, k: i64) -> Result<FieldMatrix> {
    let base = if k < 0 { m.inv()? } else { m.clone() };
    let mut acc = FieldMatrix::identity(m.dim());
    for _ in 0..k.unsigned_abs() {
        acc = acc.mul(&base)?;
    }
    Ok(acc)
}

pub(crate) fn l_pow(model: &Model, k: i64) -> Result<FieldMatrix> {
    pow(&model.l, k)
}

fn from_external(model: &Model, s: Exp, kind: OperatorKind) -> Result<FieldMatrix> {
    if let Some(ws) = &model.walls {
        if !ws.contains(s) {
            return Ok(FieldMatrix::identity(model.rank()));
        }
    }
    if let Some(m) = model.external.get(&(s, kind)) {
        return Ok(m.clone());
    }
    // Window periodicity: B_{t+n} = L^n B_t L^{-n}, reduced to t ∈ [-1, 0).
    let n = s.floor().to_integer() + 1;
    let s0 = s - Exp::from_integer(n);
    let base = model.external.get(&(s0, kind)).ok_or_else(|| {
        Error::invalid(format!("model {} has no {kind} operator for wall {}", model.name, fmt_exp(&s0)))
    })?;
    l_pow(model, n)?.mul(base)?.mul(&l_pow(model, -n)?)
}

/// `B_s` or `B*_s` in the requested frame.
pub fn wall_crossing(model: &Model, s: Exp, kind: OperatorKind, frame: Frame) -> Result<FieldMatrix> {
    let raw = raw_operator(model, s, kind)?;
    match frame {
        Frame::Raw => Ok(raw),
        Frame::Normalized => match kind {
            OperatorKind::B => chart_gauge(model, s, OperatorKind::B)?.inv()?.mul(&raw),
            OperatorKind::Bstar => raw.mul(&chart_gauge(model, s, OperatorKind::Bstar)?.inv()?),
        },
    }
}

fn raw_operator(model: &Model, s: Exp, kind: OperatorKind) -> Result<FieldMatrix> {
    if model.monodromy.is_some() {
        from_limits(model, s, kind, wall_set(model)?.gap_bound())
    } else {
        from_external(model, s, kind)
    }
}

/// `G_θ(s) = B_s(0_θ)` for `B`, `G_{−θ}(s) = B*_s(0_{−θ})` for `B*`: the
/// value of the raw operator at its own chart origin.
pub fn chart_gauge(model: &Model, s: Exp, kind: OperatorKind) -> Result<FieldMatrix> {
    let raw = raw_operator(model, s, kind)?;
    match kind {
        OperatorKind::B => raw.at_zero(model.var),
        OperatorKind::Bstar => raw.at_infinity(model.var),
    }
}

pub fn is_wall(model: &Model, s: Exp) -> Result<bool> {
    if model.monodromy.is_none() {
        return Ok(wall_set(model)?.contains(s));
    }
    let bound = wall_set(model)?.gap_bound();
    Ok(!from_limits(model, s, OperatorKind::B, bound)?.is_identity()
        || !from_limits(model, s, OperatorKind::Bstar, bound)?.is_identity())
}

/// Declared walls in the interval.
pub fn declared_walls(model: &Model, iv: &Interval) -> Result<Vec<Wall>> {
    let ws = wall_set(model)?;
    Ok(ws.walls_in(iv)?.into_iter().map(|s| Wall::new(s, ws.gap_bound())).collect())
}

/// Scans the fractions of denominator at most `maxden` in the interval and
/// keeps those where a wall-crossing operator is nontrivial. When the model
/// also declares walls, the declared ones within the scan must coincide.
pub fn detect_walls(model: &Model, iv: &Interval, maxden: i64) -> Result<Vec<Wall>> {
    if model.monodromy.is_none() {
        let ws = wall_set(model)?;
        return Ok(farey_in(iv, maxden)?
            .into_iter()
            .filter(|s| ws.contains(*s))
            .map(|s| Wall::new(s, ws.gap_bound()))
            .collect());
    }
    let bound = model.walls.map(|w| w.gap_bound()).unwrap_or(1).max(maxden);
    let mut found = Vec::new();
    for s in farey_in(iv, maxden)? {
        let b = from_limits(model, s, OperatorKind::B, bound)?;
        let bs = from_limits(model, s, OperatorKind::Bstar, bound)?;
        if !b.is_identity() || !bs.is_identity() {
            found.push(s);
        }
    }
    if let Some(ws) = &model.walls {
        let declared: Vec<Exp> = ws.walls_in(iv)?.into_iter().filter(|s| *s.denom() <= maxden).collect();
        if declared != found {
            return Err(Error::MonodromyMismatch(format!(
                "declared walls [{}] differ from detected [{}]",
                join(&declared),
                join(&found)
            )));
        }
    }
    let b = model.walls.map(|w| w.gap_bound()).unwrap_or(maxden);
    Ok(found.into_iter().map(|s| Wall::new(s, b)).collect())
}

fn join(v: &[Exp]) -> String {
    v.iter().map(fmt_exp).collect::<Vec<_>>().join(", ")
}

/// `T^s` for a generic slope.
pub fn transport(model: &Model, s: Exp) -> Result<FieldMatrix> {
    if is_wall(model, s)? {
        return Err(Error::WallSlope(fmt_exp(&s)));
    }
    let t = slope_limit(model, s, Direction::At)?;
    if t.entries().any(|(_, _, x)| x.contains_var(model.var)) {
        return Err(Error::MonodromyMismatch(format!(
            "transport at {} depends on {}",
            fmt_exp(&s),
            model.var
        )));
    }
    Ok(t)
}

/// Walls strictly between two slopes, in the order met travelling from `a` to `b`.
pub fn walls_between(model: &Model, a: Exp, b: Exp) -> Result<Vec<Exp>> {
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    let iv = Interval { lo, hi, lo_closed: false, hi_closed: false };
    let mut v = wall_set(model)?.walls_in(&iv)?;
    if a > b {
        v.reverse();
    }
    Ok(v)
}

/// JSON form of an operator for reports.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatorJson {
    #[serde(with = "exp_str")]
    pub slope: Exp,
    pub kind: OperatorKind,
    pub frame: Frame,
    pub matrix: Vec<Vec<RfJson>>,
}

impl OperatorJson {
    pub fn new(slope: Exp, kind: OperatorKind, frame: Frame, m: &FieldMatrix) -> Self {
        OperatorJson { slope, kind, frame, matrix: field_matrix_to_json(m) }
    }
}
