//! Model instances: monodromy data, the Picard shift operator, wall sets
//! and wall-operator providers.

pub mod partition;

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::arith::json::{field_matrix_from_json, field_matrix_to_json, RfJson};
use crate::arith::parse::parse_rf;
use crate::arith::{fmt_exp, parse_exp, vars, Exp, FieldMatrix, Monomial, RationalFunction, Symbol};
use crate::error::{Error, Result};
use crate::qspecial::{QMonomial, ThetaExpr, ThetaProduct};
use crate::wall::farey::{farey_in, Interval};
use crate::wall::OperatorKind;

use partition::{fractional_bundle_matrix, partitions, BoxConvention, Partition};

/// Declared hyperplane arrangement in the slope line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "type", content = "bound")]
pub enum WallSet {
    Empty,
    /// Every fraction whose reduced denominator is at most the bound.
    DenominatorAtMost(i64),
}

impl WallSet {
    pub fn contains(&self, s: Exp) -> bool {
        match self {
            WallSet::Empty => false,
            WallSet::DenominatorAtMost(b) => *s.denom() <= *b,
        }
    }

    /// Largest wall denominator; any two distinct slopes with denominators
    /// `d` and at most this bound are at least `1/(d·bound)` apart.
    pub fn gap_bound(&self) -> i64 {
        match self {
            WallSet::Empty => 1,
            WallSet::DenominatorAtMost(b) => *b,
        }
    }

    pub fn walls_in(&self, iv: &Interval) -> Result<Vec<Exp>> {
        match self {
            WallSet::Empty => Ok(Vec::new()),
            WallSet::DenominatorAtMost(b) => farey_in(iv, *b),
        }
    }
}

/// `M_ref(z) ↦ factor · M_ref(z q^{z_shift})`: how a computed object relates
/// to its reference form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonomialGauge {
    #[serde(with = "rf_string")]
    pub factor: RationalFunction,
    pub z_shift: i64,
}

impl MonomialGauge {
    pub fn trivial() -> Self {
        MonomialGauge { factor: RationalFunction::one(), z_shift: 0 }
    }

    pub fn shift(z_shift: i64) -> Self {
        MonomialGauge { factor: RationalFunction::one(), z_shift }
    }
}

pub(crate) mod rf_string {
    use serde::{Deserialize, Deserializer, Serializer};

    use crate::arith::parse::parse_rf;
    use crate::arith::RationalFunction;

    pub fn serialize<S: Serializer>(f: &RationalFunction, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&f.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<RationalFunction, D::Error> {
        let s = String::deserialize(d)?;
        parse_rf(&s).map_err(serde::de::Error::custom)
    }
}

/// Gauges stored with a model: the assembled `𝐌_{O(1)}` against the
/// reference equation, and the reconstructed monodromy against `Mon`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaugeManifest {
    pub assemble: MonomialGauge,
    pub reconstruct: MonomialGauge,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Model {
    pub name: String,
    pub var: Symbol,
    /// `Mon(z)` entrywise; absent when only external operators are known.
    pub monodromy: Option<Vec<Vec<ThetaExpr>>>,
    /// Action of the Picard generator in the fixed-point basis.
    pub l: FieldMatrix,
    pub walls: Option<WallSet>,
    pub external: BTreeMap<(Exp, OperatorKind), FieldMatrix>,
    pub basis: Vec<Partition>,
    /// The equation `𝐌_{O(1)}` is expected to reproduce.
    pub reference: Option<FieldMatrix>,
    pub gauge: Option<GaugeManifest>,
}

fn z() -> QMonomial {
    QMonomial::var(vars::z())
}

fn zh(x: QMonomial) -> QMonomial {
    x.mul(&QMonomial::var(vars::hbar()))
}

/// `Mon(z) = θ(z)/θ(zħ)` for the point.
pub fn tp0_monodromy() -> ThetaExpr {
    ThetaExpr::from(ThetaProduct::ratio(z(), zh(z())))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Chamber {
    Plus,
    Minus,
}

/// Restriction of the mirror stable envelope to the fixed point.
pub fn mirror_stab_tp0(chamber: Chamber) -> ThetaExpr {
    match chamber {
        Chamber::Plus => ThetaExpr::from(ThetaProduct::theta(z())),
        Chamber::Minus => ThetaExpr::from(ThetaProduct::theta(zh(z()))),
    }
}

fn rf(s: &str) -> RationalFunction {
    parse_rf(s).expect("built-in expression")
}

impl Model {
    pub fn rank(&self) -> usize {
        self.l.dim()
    }

    pub fn tp0() -> Self {
        Model {
            name: "tp0".into(),
            var: vars::z(),
            monodromy: Some(vec![vec![tp0_monodromy()]]),
            l: FieldMatrix::scalar(1, rf("hbar^(-1)")),
            walls: Some(WallSet::DenominatorAtMost(1)),
            external: BTreeMap::new(),
            basis: Vec::new(),
            reference: Some(FieldMatrix::scalar(1, rf("(1-z)/(1-z*hbar)"))),
            gauge: Some(GaugeManifest {
                assemble: MonomialGauge::shift(1),
                reconstruct: MonomialGauge::shift(1),
            }),
        }
    }

    pub fn identity() -> Self {
        Model {
            name: "identity".into(),
            var: vars::z(),
            monodromy: Some(vec![vec![ThetaExpr::one()]]),
            l: FieldMatrix::identity(1),
            walls: Some(WallSet::Empty),
            external: BTreeMap::new(),
            basis: Vec::new(),
            reference: Some(FieldMatrix::identity(1)),
            gauge: Some(GaugeManifest {
                assemble: MonomialGauge::trivial(),
                reconstruct: MonomialGauge::trivial(),
            }),
        }
    }

    /// Two decoupled copies of the point, the second with `z ↦ za`.
    pub fn diagonal() -> Self {
        let za = z().mul(&QMonomial::var(vars::a()));
        Model {
            name: "diag2".into(),
            var: vars::z(),
            monodromy: Some(vec![
                vec![tp0_monodromy(), ThetaExpr::zero()],
                vec![ThetaExpr::zero(), ThetaExpr::from(ThetaProduct::ratio(za.clone(), zh(za)))],
            ]),
            l: FieldMatrix::scalar(2, rf("hbar^(-1)")),
            walls: Some(WallSet::DenominatorAtMost(1)),
            external: BTreeMap::new(),
            basis: Vec::new(),
            reference: Some(FieldMatrix::diag(vec![rf("(1-z)/(1-z*hbar)"), rf("(1-z*a)/(1-z*a*hbar)")])),
            gauge: Some(GaugeManifest {
                assemble: MonomialGauge::shift(1),
                reconstruct: MonomialGauge::shift(1),
            }),
        }
    }

    /// Hilbert scheme of `n` points: combinatorial data only; wall operators
    /// must be supplied externally.
    pub fn hilb(n: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("n must be at least 1"));
        }
        let basis = partitions(n);
        Ok(Model {
            name: format!("hilb{n}"),
            var: vars::z(),
            monodromy: None,
            l: fractional_bundle_matrix(Exp::from_integer(1), &basis, BoxConvention::Row),
            walls: Some(WallSet::DenominatorAtMost(n as i64)),
            external: BTreeMap::new(),
            basis,
            reference: None,
            gauge: None,
        })
    }

    /// `tp0`, `identity`, `diag2` or `hilb<n>`.
    pub fn builtin(name: &str) -> Result<Self> {
        match name {
            "tp0" => Ok(Model::tp0()),
            "identity" => Ok(Model::identity()),
            "diag2" => Ok(Model::diagonal()),
            _ => match name.strip_prefix("hilb").map(str::parse::<u32>) {
                Some(Ok(n)) => Model::hilb(n),
                _ => Err(Error::invalid(format!("unknown model {name:?}"))),
            },
        }
    }

    pub fn add_operator(&mut self, op: ExternalOperator) -> Result<()> {
        if op.basis != self.basis {
            return Err(Error::IndexMismatch(format!(
                "operator at wall {} uses a basis that differs from the model's partition order",
                fmt_exp(&op.wall)
            )));
        }
        if op.matrix.dim() != self.rank() {
            return Err(Error::IndexMismatch(format!(
                "operator at wall {} has dimension {}, model rank is {}",
                fmt_exp(&op.wall),
                op.matrix.dim(),
                self.rank()
            )));
        }
        if let Some(ws) = &self.walls {
            if !ws.contains(op.wall) {
                return Err(Error::invalid(format!("{} is not a declared wall", fmt_exp(&op.wall))));
            }
        }
        if op.matrix.det()?.is_zero() {
            return Err(Error::SingularMatrix);
        }
        self.external.insert((op.wall, op.kind), op.matrix);
        Ok(())
    }

    pub fn load_manifest(path: &Path) -> Result<Self> {
        let text = read(path)?;
        let m: ManifestJson = serde_json::from_str(&text)
            .map_err(|e| Error::parse(format!("{}: {e}", path.display())))?;
        let mut model = match m.kind.as_str() {
            "hilb" => Model::hilb(m.n.ok_or_else(|| Error::invalid("hilb manifest needs n"))?)?,
            other => Model::builtin(other)?,
        };
        if let Some(name) = m.name {
            model.name = name;
        }
        if let Some(ws) = m.declared_walls {
            model.walls = Some(ws);
        }
        let dir = path.parent().unwrap_or(Path::new("."));
        for f in &m.files {
            let p = dir.join(f);
            model.add_operator(ExternalOperator::from_json_str(&read(&p)?)?)?;
        }
        Ok(model)
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::invalid(format!("{}: {e}", path.display())))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestJson {
    #[serde(default)]
    pub name: Option<String>,
    pub kind: String,
    #[serde(default)]
    pub n: Option<u32>,
    #[serde(default)]
    pub declared_walls: Option<WallSet>,
    #[serde(default)]
    pub files: Vec<String>,
}

/// A wall-crossing operator read from a file.
#[derive(Clone, Debug, PartialEq)]
pub struct ExternalOperator {
    pub wall: Exp,
    pub kind: OperatorKind,
    pub basis: Vec<Partition>,
    pub matrix: FieldMatrix,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatorFileJson {
    pub wall: String,
    #[serde(default)]
    pub kind: OperatorKind,
    pub basis: Vec<Partition>,
    pub matrix: Vec<Vec<RfJson>>,
    /// Names the file's coefficients are written in.
    #[serde(default)]
    pub variables: Option<Vec<String>>,
}

impl ExternalOperator {
    pub fn from_json(j: &OperatorFileJson) -> Result<Self> {
        let matrix = field_matrix_from_json(&j.matrix)?;
        if matrix.dim() != j.basis.len() {
            return Err(Error::IndexMismatch(format!(
                "matrix of dimension {} with {} basis partitions",
                matrix.dim(),
                j.basis.len()
            )));
        }
        if let Some(vs) = &j.variables {
            let allowed: Vec<Symbol> = vs.iter().map(|v| Symbol::new(v)).collect::<Result<_>>()?;
            for (_, _, x) in matrix.entries() {
                if let Some(v) = x.vars().into_iter().find(|v| !allowed.contains(v)) {
                    return Err(Error::invalid(format!("variable {v} is not declared by the file")));
                }
            }
        }
        Ok(ExternalOperator { wall: parse_exp(&j.wall)?, kind: j.kind, basis: j.basis.clone(), matrix })
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let j: OperatorFileJson = serde_json::from_str(text).map_err(|e| Error::parse(e.to_string()))?;
        Self::from_json(&j)
    }

    pub fn to_json(&self) -> OperatorFileJson {
        OperatorFileJson {
            wall: fmt_exp(&self.wall),
            kind: self.kind,
            basis: self.basis.clone(),
            matrix: field_matrix_to_json(&self.matrix),
            variables: None,
        }
    }
}

/// Manifest entry for reports.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSummary {
    pub name: String,
    pub rank: usize,
    pub var: String,
    #[serde(rename = "L")]
    pub l: Vec<Vec<RfJson>>,
    pub walls: Option<WallSet>,
    pub external_walls: Vec<String>,
    pub basis: Vec<Partition>,
    pub gauge: Option<GaugeManifest>,
}

impl Model {
    pub fn summary(&self) -> ModelSummary {
        ModelSummary {
            name: self.name.clone(),
            rank: self.rank(),
            var: self.var.to_string(),
            l: field_matrix_to_json(&self.l),
            walls: self.walls,
            external_walls: self
                .external
                .keys()
                .map(|(w, k)| format!("{}:{}", fmt_exp(w), k.as_str()))
                .collect(),
            basis: self.basis.clone(),
            gauge: self.gauge.clone(),
        }
    }
}

/// Unit monomial `x^e` as a rational function.
pub fn mono_rf(x: Symbol, e: Exp) -> RationalFunction {
    RationalFunction::monomial(num_traits::One::one(), Monomial::var_pow(x, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{exp_int, Matrix};

    #[test]
    fn tp0_data() {
        let mon = tp0_monodromy();
        let plus = mirror_stab_tp0(Chamber::Plus);
        let minus = mirror_stab_tp0(Chamber::Minus);
        let n = exp_int(3);
        let via_stab = ThetaExpr::from(ThetaProduct::ratio(z(), zh(z()))).expand(n).unwrap();
        let p = plus.expand(n + exp_int(2)).unwrap();
        let m = minus.expand(n + exp_int(2)).unwrap();
        assert_eq!(p.div(&m).unwrap().truncate(n), via_stab);
        assert_eq!(mon.expand(n).unwrap(), via_stab);
        let lim = mon.limit_q0().unwrap();
        assert_eq!(lim, rf("hbar^(1/2)*(1-z)/(1-z*hbar)"));
    }

    #[test]
    fn builtin_models() {
        for name in ["tp0", "identity", "diag2", "hilb3"] {
            let m = Model::builtin(name).unwrap();
            assert_eq!(m.name, name);
        }
        assert_eq!(Model::builtin("hilb4").unwrap().rank(), 5);
        assert!(Model::builtin("hilb0").is_err());
        assert!(Model::builtin("nope").is_err());
    }

    #[test]
    fn external_operator_validation() {
        let mut m = Model::hilb(2).unwrap();
        let basis = m.basis.clone();
        let op = ExternalOperator {
            wall: Exp::new(-1, 2),
            kind: OperatorKind::B,
            basis: basis.clone(),
            matrix: Matrix::from_rows(vec![vec![rf("1"), rf("z")], vec![rf("0"), rf("1")]]).unwrap(),
        };
        let text = serde_json::to_string(&op.to_json()).unwrap();
        let back = ExternalOperator::from_json_str(&text).unwrap();
        assert_eq!(back, op);
        m.add_operator(back).unwrap();
        let bad = ExternalOperator { wall: Exp::new(-1, 3), ..op.clone() };
        assert!(m.add_operator(bad).is_err());
        let swapped = ExternalOperator { basis: vec![basis[1].clone(), basis[0].clone()], ..op };
        assert!(matches!(m.add_operator(swapped), Err(Error::IndexMismatch(_))));
    }
}
