//! One function per subcommand; each returns the report payload and its table.

use std::path::Path;

use num_complex::Complex64;
use serde::Serialize;
use serde_json::json;

use qdelab_core::arith::json::{decode_json, field_matrix_to_json, series_matrix_to_json, RfJson};
use qdelab_core::arith::parse::parse_rf;
use qdelab_core::arith::{fmt_exp, vars, Exp, FieldMatrix};
use qdelab_core::models::partition::{cyclic_components, fractional_bundle_eig, BoxConvention, Partition};
use qdelab_core::models::Model;
use qdelab_core::qde::numeric::{eval_rf, eval_series, Estimate, Point};
use qdelab_core::qde::{residual, solve_matrix, Chart, Normalization, QDESystem, SystemJson};
use qdelab_core::wall::assemble::{assemble_m, assembly_report, product_report, product_solution, Side};
use qdelab_core::wall::farey::Interval;
use qdelab_core::wall::reconstruct::{limit_suite, reconstruction_probes};
use qdelab_core::wall::relations::{raw_swapped_triviality, relation_suite};
use qdelab_core::wall::{
    declared_walls, detect_walls, is_wall, slope_limit, wall_crossing, Direction, Frame, OperatorJson, OperatorKind,
};
use qdelab_core::{Error, Result};

use crate::config::Config;
use crate::output::{Outcome, Table};

fn cell(m: &FieldMatrix) -> String {
    if m.dim() == 1 {
        m.get(0, 0).to_string()
    } else {
        m.to_string()
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::invalid(format!("{}: {e}", path.display())))
}

/// `Ψ(zq)·M(0) = M(z)·Ψ(z)` for the model's reference equation.
fn model_system(model: &Model) -> Result<QDESystem> {
    let m = model
        .reference
        .clone()
        .ok_or_else(|| Error::invalid(format!("model {} has no reference equation", model.name)))?;
    QDESystem::new(model.var, m.at_zero(model.var)?, m)
}

fn matrix_entries_table(t: &mut Table, label: &str, m: &FieldMatrix) {
    for (i, j, x) in m.entries() {
        t.push(vec![label.to_string(), i.to_string(), j.to_string(), x.to_string()]);
    }
}

pub fn solve(cfg: &Config, system: Option<&Path>) -> Result<Outcome> {
    let sys = match system {
        Some(p) => {
            let text = read(p)?;
            let j: SystemJson = decode_json(&text).map_err(|e| Error::parse(format!("{}: {e}", p.display())))?;
            QDESystem::from_json(&j)?
        }
        None => model_system(&cfg.load_model()?)?,
    };
    let norm = if sys.m().at_zero(sys.var())? == *sys.l() {
        Normalization::Identity
    } else {
        Normalization::Eigen
    };
    let sol = solve_matrix(&sys, &norm, cfg.zorder, Chart::Zero)?;
    let (verified, failure) = match residual(&sol, &sys) {
        Ok(v) => (v, None),
        Err(e @ Error::ResidualNonzero { .. }) => (0, Some(e.to_string())),
        Err(e) => return Err(e),
    };
    let qexp = sol.q_expansion(Exp::from_integer(cfg.qorder as i64))?;
    let mut t = Table::new(&["part", "zdeg", "row", "col", "value"]);
    for (d, c) in sol.coefficients().iter().enumerate() {
        for (i, j, x) in c.entries() {
            t.push(vec!["coefficient".into(), d.to_string(), i.to_string(), j.to_string(), x.to_string()]);
        }
    }
    let result = json!({
        "system": sys.to_json(),
        "solution": sol.to_json(),
        "q_expansion": qexp.iter().map(series_matrix_to_json).collect::<Vec<_>>(),
        "residual": { "verified_order": verified, "requested_order": cfg.zorder, "passed": failure.is_none() },
    });
    Ok(Outcome::new(result, t)?.failing(failure))
}

#[derive(Serialize)]
struct LimitRow {
    slope: String,
    wall: bool,
    at: Vec<Vec<RfJson>>,
    minus: Option<Vec<Vec<RfJson>>>,
    plus: Option<Vec<Vec<RfJson>>>,
}

pub fn limits(cfg: &Config) -> Result<Outcome> {
    let model = cfg.load_model()?;
    let mut rows = Vec::new();
    let mut t = Table::new(&["slope", "wall", "limit", "limit_minus", "limit_plus"]);
    for s in cfg.slopes()? {
        let at = slope_limit(&model, s, Direction::At)?;
        let wall = is_wall(&model, s)?;
        let (minus, plus) = if wall {
            (Some(slope_limit(&model, s, Direction::Minus)?), Some(slope_limit(&model, s, Direction::Plus)?))
        } else {
            (None, None)
        };
        let show = |m: &Option<FieldMatrix>| m.as_ref().map(cell).unwrap_or_default();
        t.push(vec![fmt_exp(&s), wall.to_string(), cell(&at), show(&minus), show(&plus)]);
        rows.push(LimitRow {
            slope: fmt_exp(&s),
            wall,
            at: field_matrix_to_json(&at),
            minus: minus.as_ref().map(field_matrix_to_json),
            plus: plus.as_ref().map(field_matrix_to_json),
        });
    }
    Outcome::new(json!({ "model": model.summary(), "limits": rows }), t)
}

pub fn walls(cfg: &Config) -> Result<Outcome> {
    let model = cfg.load_model()?;
    let iv = cfg.interval()?;
    let ws = detect_walls(&model, &iv, cfg.maxden)?;
    let mut t = Table::new(&["slope", "realized_by"]);
    for w in &ws {
        t.push(vec![fmt_exp(&w.slope), join(&w.realized_by)]);
    }
    Outcome::new(json!({ "model": model.name, "interval": iv.to_string(), "walls": ws }), t)
}

fn join(v: &[i64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

pub fn crossing(cfg: &Config, kinds: &[OperatorKind], frame: Frame) -> Result<Outcome> {
    let model = cfg.load_model()?;
    let mut ops = Vec::new();
    let mut t = Table::new(&["slope", "kind", "frame", "identity", "matrix"]);
    for s in cfg.slopes()? {
        for &kind in kinds {
            let m = wall_crossing(&model, s, kind, frame)?;
            t.push(vec![fmt_exp(&s), kind.to_string(), frame_str(frame).into(), m.is_identity().to_string(), cell(&m)]);
            ops.push(OperatorJson::new(s, kind, frame, &m));
        }
    }
    Outcome::new(json!({ "model": model.name, "operators": ops }), t)
}

fn frame_str(f: Frame) -> &'static str {
    match f {
        Frame::Raw => "raw",
        Frame::Normalized => "normalized",
    }
}

pub fn assemble(cfg: &Config, k: i64, kind: OperatorKind, frame: Frame) -> Result<Outcome> {
    let model = cfg.load_model()?;
    let a = assemble_m(&model, k, kind, frame, &[])?;
    let report = assembly_report(&model, &a)?;
    let failure = match report.gauge_matches_manifest {
        Some(false) => Some("assembled operator does not match the recorded gauge".to_string()),
        _ => None,
    };
    let mut t = Table::new(&["part", "row", "col", "value"]);
    matrix_entries_table(&mut t, "M", &a.matrix);
    Ok(Outcome::new(json!({ "model": model.summary(), "assembly": report }), t)?.failing(failure))
}

pub fn product(cfg: &Config, side: Side) -> Result<Outcome> {
    let model = cfg.load_model()?;
    let sol = product_solution(&model, side, cfg.zorder, cfg.qorder)?;
    let report = product_report(&model, &sol)?;
    let failure = (report.verified_order < cfg.zorder)
        .then(|| format!("residual verified only through z-order {}", report.verified_order));
    let mut t = Table::new(&["zdeg", "row", "col", "series"]);
    for (d, c) in sol.coefficients.iter().enumerate() {
        for (i, j, x) in c.entries() {
            t.push(vec![d.to_string(), i.to_string(), j.to_string(), x.to_string()]);
        }
    }
    Ok(Outcome::new(report, t)?.failing(failure))
}

#[derive(Clone, Debug, Serialize)]
struct Check {
    group: String,
    name: String,
    at: String,
    passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    detail: Option<String>,
}

/// Ten probes on `0.35 ≤ |z| ≤ 0.9` at spread-out arguments.
pub fn default_probes() -> Vec<Complex64> {
    (0..10)
        .map(|k| Complex64::from_polar(0.35 + 0.55 * k as f64 / 9.0, 0.61 * k as f64 - 2.3))
        .collect()
}

pub fn verify(cfg: &Config) -> Result<Outcome> {
    let model = cfg.load_model()?;
    let iv = cfg.interval()?;
    let mut checks = Vec::new();
    let mut add = |group: &str, name: &str, at: String, passed: bool| {
        checks.push(Check { group: group.into(), name: name.into(), at, passed, detail: None });
    };
    if model.monodromy.is_some() {
        for c in relation_suite(&model, &iv)? {
            add("relations", &c.relation, c.at, c.holds);
        }
        for c in raw_swapped_triviality(&model, &iv)? {
            add("raw_frame", &c.relation, c.at, c.holds);
        }
        let interior: Vec<Exp> = farey_slopes(&iv, cfg.maxden)?;
        for c in limit_suite(&model, &interior, cfg.qorder as i64)? {
            add("product_limits", &format!("{:?}", c.side).to_lowercase(), fmt_exp(&c.slope), c.is_identity);
        }
        if model.reference.is_some() {
            let a = assemble_m(&model, 1, OperatorKind::B, Frame::Raw, &[])?;
            let r = assembly_report(&model, &a)?;
            add("assembly", "gauge_matches_manifest", "O(1)".into(), r.gauge_matches_manifest == Some(true));
        }
        for side in [Side::Theta, Side::MinusTheta] {
            match product_solution(&model, side, cfg.zorder, cfg.qorder) {
                Ok(sol) => {
                    let v = product_report(&model, &sol)?.verified_order;
                    let at = format!("({},{})", cfg.zorder, cfg.qorder);
                    add("product_residual", &format!("{side:?}").to_lowercase(), at, v >= cfg.zorder);
                }
                Err(Error::NonRepresentable(_)) => {}
                Err(e) => return Err(e),
            }
        }
        let p = cfg.point()?;
        if p.value(vars::q()).is_ok() && p.value(vars::hbar()).is_ok() {
            let r = reconstruction_probes(&model, &p, &default_probes(), 30, 30, cfg.tol)?;
            for pr in &r.probes {
                add("reconstruction", "closes", format!("{}{:+}i", pr.z[0], pr.z[1]), pr.agrees);
            }
        }
    } else {
        let found: Vec<Exp> = declared_walls(&model, &iv)?.into_iter().map(|w| w.slope).collect();
        let scanned = farey_all(&iv, model.walls.map(|w| w.gap_bound()).unwrap_or(1))?;
        add("walls", "declared_equal_farey", iv.to_string(), found == scanned);
        if !model.external.is_empty() {
            let r = assemble_m(&model, 1, OperatorKind::B, Frame::Raw, &[]);
            add("assembly", "assembles", "O(1)".into(), r.is_ok());
            if let (Err(e), Some(c)) = (r, checks.last_mut()) {
                c.detail = Some(e.to_string());
            }
        }
    }
    let failed: Vec<&Check> = checks.iter().filter(|c| !c.passed).collect();
    let failure = (!failed.is_empty()).then(|| format!("{} of {} checks failed", failed.len(), checks.len()));
    let mut t = Table::new(&["group", "name", "at", "passed"]);
    for c in &checks {
        t.push(vec![c.group.clone(), c.name.clone(), c.at.clone(), c.passed.to_string()]);
    }
    let summary = json!({ "total": checks.len(), "failed": failed.len() });
    Ok(Outcome::new(json!({ "model": model.name, "summary": summary, "checks": checks }), t)?.failing(failure))
}

fn farey_all(iv: &Interval, maxden: i64) -> Result<Vec<Exp>> {
    qdelab_core::wall::farey::farey_in(iv, maxden)
}

/// Nonzero non-integer fractions of the interval, where product limits are checked.
fn farey_slopes(iv: &Interval, maxden: i64) -> Result<Vec<Exp>> {
    Ok(farey_all(iv, maxden.max(2))?.into_iter().filter(|s| !s.is_integer()).collect())
}

pub fn hilb_walls(cfg: &Config, n: u32) -> Result<Outcome> {
    let model = Model::hilb(n)?;
    let iv = cfg.interval()?;
    let ws = declared_walls(&model, &iv)?;
    let mut t = Table::new(&["slope", "realized_by"]);
    for w in &ws {
        t.push(vec![fmt_exp(&w.slope), join(&w.realized_by)]);
    }
    Outcome::new(json!({ "n": n, "interval": iv.to_string(), "walls": ws }), t)
}

#[derive(Serialize)]
struct BundleRow {
    partition: Partition,
    slope: String,
    eigenvalue: String,
}

pub fn hilb_bundle(cfg: &Config, n: u32, conv: BoxConvention, cyclic: Option<u32>) -> Result<Outcome> {
    let model = Model::hilb(n)?;
    let mut rows = Vec::new();
    let mut t = Table::new(&["partition", "slope", "eigenvalue"]);
    for s in cfg.slopes()? {
        for lambda in &model.basis {
            let e = fractional_bundle_eig(lambda, s, conv).to_string();
            t.push(vec![lambda.to_string(), fmt_exp(&s), e.clone()]);
            rows.push(BundleRow { partition: lambda.clone(), slope: fmt_exp(&s), eigenvalue: e });
        }
    }
    let cyc = match cyclic {
        Some(b) => Some(json!({ "b": b, "components": cyclic_components(n, b)?.into_iter().map(|c| c.0).collect::<Vec<_>>() })),
        None => None,
    };
    Outcome::new(json!({ "n": n, "convention": conv, "basis": model.basis, "eigenvalues": rows, "cyclic": cyc }), t)
}

#[derive(Serialize)]
struct EntryValue {
    row: usize,
    col: usize,
    re: f64,
    im: f64,
    error: f64,
}

pub fn eval(cfg: &Config, expr: Option<&str>) -> Result<Outcome> {
    let p: Point = cfg.point()?;
    let (label, values): (String, Vec<Vec<Estimate>>) = match expr {
        Some(e) => {
            let f = parse_rf(e)?;
            (f.to_string(), vec![vec![eval_rf(&f, &p)?]])
        }
        None => {
            let model = cfg.load_model()?;
            let mon = model
                .monodromy
                .as_ref()
                .ok_or_else(|| Error::invalid(format!("model {} has no monodromy expression", model.name)))?;
            let order = Exp::from_integer(cfg.qorder as i64);
            let vals = mon
                .iter()
                .map(|row| row.iter().map(|x| eval_series(&x.expand(order)?, &p)).collect::<Result<Vec<_>>>())
                .collect::<Result<Vec<_>>>()?;
            (format!("monodromy of {}", model.name), vals)
        }
    };
    let mut entries = Vec::new();
    let mut t = Table::new(&["row", "col", "re", "im", "error"]);
    let mut failure = None;
    for (i, row) in values.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            if v.error > cfg.tol && failure.is_none() {
                failure = Some(format!("error estimate {:e} at ({i},{j}) exceeds tolerance {:e}", v.error, cfg.tol));
            }
            t.push(vec![i.to_string(), j.to_string(), v.value.re.to_string(), v.value.im.to_string(), v.error.to_string()]);
            entries.push(EntryValue { row: i, col: j, re: v.value.re, im: v.value.im, error: v.error });
        }
    }
    Ok(Outcome::new(json!({ "expression": label, "entries": entries }), t)?.failing(failure))
}
