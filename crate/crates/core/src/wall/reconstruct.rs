//! The monodromy rebuilt from the two product solutions,
//! `Ψ_θ(z)^{−1} (T^{−ε})^{−1} Ψ_{−θ}(z)`, checked numerically against the
//! model's theta expression, and the `q → 0` limits of the products.

use num_complex::Complex64;
use num_traits::Signed;
use serde::{Deserialize, Serialize};

use super::assemble::{product_factors, shift_arg, QScale, Side};
use super::{exp_str, side_offset, transport};
use crate::arith::{vars, Exp, FieldMatrix, Monomial};
use crate::error::{Error, Result};
use crate::models::{Model, MonomialGauge};
use crate::qde::numeric::{eval_rf, eval_series, Estimate, NumMatrix, Point, SAFETY_FACTOR};

/// Deviations from the identity below this are indistinguishable from rounding.
const ROUNDING_FLOOR: f64 = 1e-13;

fn eval_matrix(m: &FieldMatrix, p: &Point) -> Result<NumMatrix> {
    let n = m.dim();
    let mut data = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            data.push(eval_rf(m.get(i, j), p)?);
        }
    }
    Ok(NumMatrix { n, data })
}

fn max_dev_from_identity(m: &NumMatrix) -> f64 {
    let mut d: f64 = 0.0;
    for i in 0..m.n {
        for j in 0..m.n {
            let one = if i == j { 1.0 } else { 0.0 };
            d = d.max((m.get(i, j).value - Complex64::new(one, 0.0)).norm());
        }
    }
    d
}

/// Product of the factors in order, with the omitted tail bounded
/// geometrically from the first two omitted factors.
pub fn eval_product(factors: &[FieldMatrix], omitted: &[FieldMatrix], p: &Point) -> Result<NumMatrix> {
    let n = factors.first().or(omitted.first()).map(|f| f.dim()).unwrap_or(1);
    let mut acc = NumMatrix {
        n,
        data: (0..n * n)
            .map(|k| Estimate::exact(Complex64::new(if k % (n + 1) == 0 { 1.0 } else { 0.0 }, 0.0)))
            .collect(),
    };
    for f in factors {
        acc = acc.mul(&eval_matrix(f, p)?);
    }
    let devs: Vec<f64> = omitted.iter().map(|f| Ok(max_dev_from_identity(&eval_matrix(f, p)?))).collect::<Result<_>>()?;
    let tail = match devs.as_slice() {
        [] => 0.0,
        [d] => SAFETY_FACTOR * d,
        [d1, d2, ..] => {
            if *d1 <= ROUNDING_FLOOR {
                // factors equal 1 to working precision
                SAFETY_FACTOR * ROUNDING_FLOOR
            } else {
                let rho = d2 / d1;
                if rho >= 1.0 {
                    return Err(Error::PrecisionLoss { estimate: rho, tolerance: 1.0 });
                }
                SAFETY_FACTOR * d1 / (1.0 - rho)
            }
        }
    };
    let norm = acc.data.iter().map(|e| e.value.norm()).fold(0.0, f64::max);
    for e in &mut acc.data {
        e.error += norm * tail * n as f64;
    }
    Ok(acc)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Probe {
    pub z: [f64; 2],
    pub reconstructed: Vec<[f64; 2]>,
    pub reference: Vec<[f64; 2]>,
    pub reconstructed_error: f64,
    pub reference_error: f64,
    pub tolerance: f64,
    pub agrees: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionReport {
    pub gauge: MonomialGauge,
    pub factors_per_side: i64,
    pub qorder: u32,
    pub probes: Vec<Probe>,
    pub closed: bool,
}

fn pair(c: Complex64) -> [f64; 2] {
    [c.re, c.im]
}

/// Evaluates both sides at every probe. The reference is
/// `factor · Mon(z q^{z_shift})` with the gauge from the model manifest, its
/// theta expansion taken through `q^{qorder}`.
pub fn reconstruction_probes(
    model: &Model,
    base: &Point,
    zs: &[Complex64],
    nfactors: i64,
    qorder: u32,
    tol: f64,
) -> Result<ReconstructionReport> {
    let mon = model
        .monodromy
        .as_ref()
        .ok_or_else(|| Error::invalid(format!("model {} has no monodromy expression", model.name)))?;
    let gauge = model.gauge.as_ref().map(|g| g.reconstruct.clone()).unwrap_or_else(MonomialGauge::trivial);
    let split = |side| -> Result<(Vec<FieldMatrix>, Vec<FieldMatrix>)> {
        let all = product_factors(model, side, nfactors + 2)?;
        let (kept, rest): (Vec<_>, Vec<_>) = all.into_iter().partition(|(w, _)| w.abs() <= Exp::from_integer(nfactors));
        Ok((kept.into_iter().map(|x| x.1).collect(), rest.into_iter().map(|x| x.1).collect()))
    };
    let (th, th_tail) = split(Side::Theta)?;
    let (mt, mt_tail) = split(Side::MinusTheta)?;
    let eps = side_offset(model, Exp::from_integer(0))?;
    let t = transport(model, -eps)?;
    let order = Exp::from_integer(qorder as i64);
    let shift = Exp::from_integer(gauge.z_shift);
    let reference: Vec<Vec<_>> = mon
        .iter()
        .map(|row| row.iter().map(|e| e.substitute_slope(model.var, shift).expand(order)).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    let mut probes = Vec::with_capacity(zs.len());
    for &z in zs {
        let p = base.without(model.var).with_complex(model.var, z);
        let psi_t = eval_product(&th, &th_tail, &p)?;
        let psi_m = eval_product(&mt, &mt_tail, &p)?;
        let recon = psi_t.inv()?.mul(&eval_matrix(&t, &p)?.inv()?).mul(&psi_m);
        let factor = eval_rf(&gauge.factor, &p)?;
        let n = recon.n;
        let mut ref_data = Vec::with_capacity(n * n);
        for row in &reference {
            for s in row {
                ref_data.push(factor.mul(&eval_series(s, &p)?));
            }
        }
        let refm = NumMatrix { n, data: ref_data };
        let agrees = recon.first_disagreement(&refm, tol).is_none();
        probes.push(Probe {
            z: pair(z),
            reconstructed: recon.data.iter().map(|e| pair(e.value)).collect(),
            reference: refm.data.iter().map(|e| pair(e.value)).collect(),
            reconstructed_error: recon.max_error(),
            reference_error: refm.max_error(),
            tolerance: tol.max(recon.max_error() + refm.max_error()),
            agrees,
        });
    }
    let closed = probes.iter().all(|p| p.agrees);
    Ok(ReconstructionReport { gauge, factors_per_side: nfactors, qorder, probes, closed })
}

/// As [`reconstruction_probes`], failing on the first disagreeing probe.
pub fn reconstruct_monodromy(
    model: &Model,
    base: &Point,
    zs: &[Complex64],
    nfactors: i64,
    qorder: u32,
    tol: f64,
) -> Result<ReconstructionReport> {
    let r = reconstruction_probes(model, base, zs, nfactors, qorder, tol)?;
    if let Some(p) = r.probes.iter().find(|p| !p.agrees) {
        return Err(Error::MonodromyMismatch(format!(
            "at z = {}{:+}i: reconstructed {:?}, reference {:?}",
            p.z[0], p.z[1], p.reconstructed, p.reference
        )));
    }
    Ok(r)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitCheck {
    pub side: Side,
    #[serde(with = "exp_str")]
    pub slope: Exp,
    pub walls_used: usize,
    pub is_identity: bool,
}

/// `lim_{q→0} Ψ(z q^s)` for a product solution, factor by factor over the
/// walls with `|w| ≤ bound`.
pub fn product_limit(model: &Model, side: Side, s: Exp, bound: i64) -> Result<(FieldMatrix, usize)> {
    let factors = product_factors(model, side, bound)?;
    let qs = QScale::for_slopes(&[s])?;
    let qs_full = qs;
    let mut acc = FieldMatrix::identity(model.rank());
    for (_, f) in &factors {
        // rewrite q = qr^D, then z ↦ z qr^{sD}
        let f = if qs.den > 1 {
            f.substitute(vars::q(), &Monomial::var_pow(qs.sym, Exp::from_integer(qs.den)))?
        } else {
            f.clone()
        };
        let g = shift_arg(&f, model.var, s, &qs_full)?;
        acc = acc.mul(&g.at_zero(qs.sym)?)?;
    }
    Ok((acc, factors.len()))
}

/// Interior slopes only: `s > 0` for the theta side, `s < 0` for the minus side,
/// where both limits should be the identity.
pub fn limit_suite(model: &Model, slopes: &[Exp], bound: i64) -> Result<Vec<LimitCheck>> {
    let mut out = Vec::new();
    for &s in slopes {
        let side = if s > Exp::from_integer(0) {
            Side::Theta
        } else if s < Exp::from_integer(0) {
            Side::MinusTheta
        } else {
            continue;
        };
        let (m, used) = product_limit(model, side, s, bound)?;
        out.push(LimitCheck { side, slope: s, walls_used: used, is_identity: m.is_identity() });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{exp_frac, q_frac};

    fn base() -> Point {
        // the theta expansion in q needs |q| < |z a hbar| at every probe
        Point::new().with_exact(vars::q(), q_frac(1, 10)).with_exact(vars::hbar(), q_frac(1, 3)).with_exact(vars::a(), q_frac(3, 2))
    }

    #[test]
    fn tp0_closes() {
        let zs: Vec<Complex64> = (0..4).map(|k| Complex64::from_polar(0.4 + 0.15 * k as f64, 0.7 * k as f64)).collect();
        let r = reconstruct_monodromy(&Model::tp0(), &base(), &zs, 30, 30, 1e-8).unwrap();
        assert!(r.closed);
        for p in &r.probes {
            assert!(p.reconstructed_error < 1e-12, "{p:?}");
        }
        let r = reconstruct_monodromy(&Model::diagonal(), &base(), &zs[..2], 30, 30, 1e-8).unwrap();
        assert!(r.closed);
        let r = reconstruct_monodromy(&Model::identity(), &base(), &zs[..1], 5, 5, 1e-8).unwrap();
        assert!(r.closed);
    }

    #[test]
    fn interior_limits() {
        let slopes = [exp_frac(1, 3), exp_frac(5, 2), exp_frac(-1, 2), exp_frac(-7, 3)];
        for c in limit_suite(&Model::tp0(), &slopes, 6).unwrap() {
            assert!(c.is_identity, "{c:?}");
            assert!(c.walls_used >= 6);
        }
    }
}
