//! JSON schema for exact values.
//!
//! - rational: `{"num": "-3", "den": "4"}` (decimal strings)
//! - monomial: `{"hbar": "1/2", "z": "-1"}` (exponent map, rational strings)
//! - polynomial: `[{"coeff": rational, "exps": {"z": 2}}, ...]`
//! - rational function: `{"prefactor": monomial, "num": polynomial, "den": polynomial}`
//!   or an expression string such as `"(1-z)/(1-z*hbar)"`
//! - series: `{"var": "q", "D": 2, "N": "3", "terms": [{"exp": "1/2", "coeff": rf}, ...]}`
//! - matrix: array of rows of entries

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::parse::{parse_rf, MAX_DEGREE};
use super::poly::{Exponents, Polynomial};
use super::{fmt_exp, parse_exp, parse_q, Matrix, Monomial, PuiseuxSeries, RationalFunction};
use super::{Exp, Symbol, Q};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RationalJson {
    pub num: String,
    pub den: String,
}

pub type MonomialJson = BTreeMap<String, String>;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermJson {
    pub coeff: RationalJson,
    pub exps: BTreeMap<String, u32>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RfObjectJson {
    #[serde(default)]
    pub prefactor: MonomialJson,
    pub num: Vec<TermJson>,
    pub den: Vec<TermJson>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RfJson {
    Expr(String),
    Object(RfObjectJson),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeriesTermJson {
    pub exp: String,
    pub coeff: RfJson,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeriesJson {
    pub var: String,
    #[serde(rename = "D")]
    pub den: i64,
    #[serde(rename = "N")]
    pub order: String,
    pub terms: Vec<SeriesTermJson>,
}

pub fn rational_to_json(q: &Q) -> RationalJson {
    RationalJson {
        num: q.numer().to_string(),
        den: q.denom().to_string(),
    }
}

pub fn rational_from_json(r: &RationalJson) -> Result<Q> {
    parse_q(&format!("{}/{}", r.num.trim(), r.den.trim()))
}

pub fn monomial_to_json(m: &Monomial) -> MonomialJson {
    m.iter()
        .map(|(s, e)| (s.to_string(), fmt_exp(e)))
        .collect()
}

pub fn monomial_from_json(m: &MonomialJson) -> Result<Monomial> {
    let mut out = Monomial::one();
    for (k, v) in m {
        let s = Symbol::new(k)?;
        let e = parse_exp(v)?;
        out = &out * &Monomial::var_pow(s, e);
    }
    Ok(out)
}

pub fn poly_to_json(p: &Polynomial) -> Vec<TermJson> {
    p.terms()
        .rev()
        .map(|(e, c)| TermJson {
            coeff: rational_to_json(c),
            exps: e.iter().map(|(s, k)| (s.to_string(), *k)).collect(),
        })
        .collect()
}

pub fn poly_from_json(terms: &[TermJson]) -> Result<Polynomial> {
    let mut p = Polynomial::zero();
    for t in terms {
        let mut e = Exponents::one();
        let mut deg = 0u64;
        for (k, v) in &t.exps {
            deg += *v as u64;
            e = e.mul(&Exponents::var(Symbol::new(k)?, *v));
        }
        if deg > MAX_DEGREE {
            return Err(Error::parse("polynomial degree out of range"));
        }
        p.add_term(e, rational_from_json(&t.coeff)?);
    }
    Ok(p)
}

pub fn rf_to_json(f: &RationalFunction) -> RfJson {
    RfJson::Object(RfObjectJson {
        prefactor: monomial_to_json(f.prefactor()),
        num: poly_to_json(f.numer()),
        den: poly_to_json(f.denom()),
    })
}

pub fn rf_from_json(j: &RfJson) -> Result<RationalFunction> {
    match j {
        RfJson::Expr(s) => parse_rf(s),
        RfJson::Object(o) => RationalFunction::from_parts(
            monomial_from_json(&o.prefactor)?,
            poly_from_json(&o.num)?,
            poly_from_json(&o.den)?,
        ),
    }
}

pub fn series_to_json(s: &PuiseuxSeries) -> SeriesJson {
    SeriesJson {
        var: s.var().to_string(),
        den: s.den(),
        order: fmt_exp(&s.order()),
        terms: s
            .terms()
            .iter()
            .map(|(e, c)| SeriesTermJson {
                exp: fmt_exp(e),
                coeff: rf_to_json(c),
            })
            .collect(),
    }
}

pub fn series_from_json(j: &SeriesJson) -> Result<PuiseuxSeries> {
    let var = Symbol::new(&j.var)?;
    if j.den < 1 || j.den > super::EXP_BOUND {
        return Err(Error::parse("exponent denominator D out of range"));
    }
    let order = parse_exp(&j.order)?;
    let mut terms = Vec::with_capacity(j.terms.len());
    for t in &j.terms {
        let e: Exp = parse_exp(&t.exp)?;
        if (e * Exp::from_integer(j.den)).denom() != &1 {
            return Err(Error::parse(format!(
                "exponent {} not a multiple of 1/{}",
                t.exp, j.den
            )));
        }
        terms.push((e, rf_from_json(&t.coeff)?));
    }
    if (order * Exp::from_integer(j.den)).denom() != &1 {
        return Err(Error::parse("truncation order not a multiple of 1/D"));
    }
    Ok(PuiseuxSeries::from_terms(var, terms, order)?.with_den(j.den))
}

pub fn field_matrix_to_json(m: &Matrix<RationalFunction>) -> Vec<Vec<RfJson>> {
    m.rows()
        .iter()
        .map(|r| r.iter().map(rf_to_json).collect())
        .collect()
}

pub fn field_matrix_from_json(rows: &[Vec<RfJson>]) -> Result<Matrix<RationalFunction>> {
    let mut out = Vec::with_capacity(rows.len());
    for r in rows {
        let mut row = Vec::with_capacity(r.len());
        for x in r {
            row.push(rf_from_json(x)?);
        }
        out.push(row);
    }
    Matrix::from_rows(out)
}

pub fn series_matrix_to_json(m: &Matrix<PuiseuxSeries>) -> Vec<Vec<SeriesJson>> {
    m.rows()
        .iter()
        .map(|r| r.iter().map(series_to_json).collect())
        .collect()
}

pub fn series_matrix_from_json(rows: &[Vec<SeriesJson>]) -> Result<Matrix<PuiseuxSeries>> {
    let mut out = Vec::with_capacity(rows.len());
    for r in rows {
        let mut row = Vec::with_capacity(r.len());
        for x in r {
            row.push(series_from_json(x)?);
        }
        out.push(row);
    }
    Matrix::from_rows(out)
}

fn decode<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| {
        Error::parse(format!("JSON at line {} column {}: {e}", e.line(), e.column()))
    })
}

pub fn decode_rf(text: &str) -> Result<RationalFunction> {
    rf_from_json(&decode::<RfJson>(text)?)
}

pub fn decode_series(text: &str) -> Result<PuiseuxSeries> {
    series_from_json(&decode::<SeriesJson>(text)?)
}

pub fn decode_field_matrix(text: &str) -> Result<Matrix<RationalFunction>> {
    field_matrix_from_json(&decode::<Vec<Vec<RfJson>>>(text)?)
}

pub fn decode_json<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    decode(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips() {
        let f = parse_rf("hbar^(1/2)*(1-z)/(3-3*z*hbar)").unwrap();
        let j = serde_json::to_string(&rf_to_json(&f)).unwrap();
        assert_eq!(decode_rf(&j).unwrap(), f);
        assert_eq!(decode_rf("\"(1-z)/(1-z*hbar)\"").unwrap(), parse_rf("(1-z)/(1-z*hbar)").unwrap());
        let s = PuiseuxSeries::from_terms(
            super::super::vars::q(),
            vec![(Exp::new(1, 2), f.clone()), (Exp::from_integer(2), parse_rf("z").unwrap())],
            Exp::from_integer(3),
        )
        .unwrap();
        let js = serde_json::to_string(&series_to_json(&s)).unwrap();
        assert_eq!(decode_series(&js).unwrap(), s);
    }

    #[test]
    fn rejects_malformed() {
        assert!(decode_rf("{").is_err());
        assert!(decode_rf(r#"{"num": [], "den": []}"#).is_err());
        assert!(decode_series(r#"{"var":"q","D":2,"N":"1","terms":[{"exp":"1/3","coeff":"1"}]}"#).is_err());
        assert!(decode_series(r#"{"var":"q","D":1,"N":"1","terms":[{"exp":"0","coeff":"q"}]}"#).is_err());
    }
}
