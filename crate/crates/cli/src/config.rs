//! Run configuration: built-in defaults, then a TOML file, then flags.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use qdelab_core::arith::{parse_exp, parse_q, Exp, Symbol};
use qdelab_core::models::Model;
use qdelab_core::qde::numeric::Point;
use qdelab_core::wall::farey::Interval;
use qdelab_core::{Error, Result};

pub const CONFIG_ENV: &str = "QDELAB_CONFIG";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub model: String,
    /// Truncation order in the Kähler variable.
    pub zorder: u32,
    /// Truncation order in `q`.
    pub qorder: u32,
    /// Largest accepted denominator of an input slope or exponent.
    pub dencap: i64,
    /// Largest denominator scanned for walls.
    pub maxden: i64,
    pub interval: String,
    pub slopes: Vec<String>,
    pub tol: f64,
    pub format: Format,
    /// Model manifest listing external wall-crossing operators.
    pub external: Option<PathBuf>,
    /// Numeric values for evaluation: rationals stay exact, anything else
    /// is read as a complex number such as `0.3+0.4i`.
    pub point: BTreeMap<String, String>,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            model: "tp0".into(),
            zorder: 8,
            qorder: 8,
            dencap: 64,
            maxden: 6,
            interval: "[-3,3]".into(),
            slopes: Vec::new(),
            tol: 1e-8,
            format: Format::Json,
            external: None,
            point: BTreeMap::from([("hbar".into(), "1/3".into()), ("q".into(), "1/10".into())]),
        }
    }
}

impl Config {
    pub fn from_toml(text: &str, origin: &Path) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::parse(format!("{}: {e}", origin.display())))
    }

    /// Reads `path`, or the file named by `QDELAB_CONFIG`, or falls back to defaults.
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let from_env = std::env::var_os(CONFIG_ENV).map(PathBuf::from);
        match path.map(Path::to_path_buf).or(from_env) {
            Some(p) => {
                let text = std::fs::read_to_string(&p)
                    .map_err(|e| Error::invalid(format!("{}: {e}", p.display())))?;
                Config::from_toml(&text, &p)
            }
            None => Ok(Config::default()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dencap < 1 {
            return Err(Error::invalid("dencap must be at least 1"));
        }
        if self.maxden < 1 {
            return Err(Error::invalid("maxden must be at least 1"));
        }
        if !(self.tol > 0.0) {
            return Err(Error::invalid("tol must be positive"));
        }
        self.interval()?;
        self.slopes()?;
        self.point()?;
        Ok(())
    }

    pub fn interval(&self) -> Result<Interval> {
        let iv: Interval = self.interval.parse()?;
        self.check_den(iv.lo)?;
        self.check_den(iv.hi)?;
        Ok(iv)
    }

    fn check_den(&self, e: Exp) -> Result<Exp> {
        if *e.denom() > self.dencap {
            return Err(Error::invalid(format!(
                "denominator of {e} exceeds the cap {}",
                self.dencap
            )));
        }
        Ok(e)
    }

    pub fn slopes(&self) -> Result<Vec<Exp>> {
        self.slopes.iter().map(|s| self.check_den(parse_exp(s)?)).collect()
    }

    pub fn point(&self) -> Result<Point> {
        let mut p = Point::new();
        for (k, v) in &self.point {
            let s = Symbol::new(k)?;
            p = match parse_q(v) {
                Ok(x) => p.with_exact(s, x),
                Err(_) => {
                    let c: Complex64 = v
                        .trim()
                        .parse()
                        .map_err(|_| Error::parse(format!("bad value {v:?} for {k}")))?;
                    p.with_complex(s, c)
                }
            };
        }
        Ok(p)
    }

    pub fn load_model(&self) -> Result<Model> {
        match &self.external {
            Some(path) => Model::load_manifest(path),
            None => Model::builtin(&self.model),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_overrides_defaults() {
        let c = Config::from_toml("model = \"diag2\"\nzorder = 3\n[point]\nz = \"0.5+0.1i\"\n", Path::new("x.toml")).unwrap();
        assert_eq!(c.model, "diag2");
        assert_eq!(c.zorder, 3);
        assert_eq!(c.qorder, 8);
        assert!(c.point.get("q").is_none());
        assert!(c.point().unwrap().value(qdelab_core::arith::vars::z()).is_ok());
    }

    #[test]
    fn rejects_bad_values() {
        assert!(Config::from_toml("zorder = -1", Path::new("x")).is_err());
        assert!(Config::from_toml("colour = 1", Path::new("x")).is_err());
        let c = Config { slopes: vec!["1/128".into()], ..Config::default() };
        assert!(c.validate().unwrap_err().is_input_error());
        let c = Config { tol: 0.0, ..Config::default() };
        assert!(c.validate().is_err());
    }
}
