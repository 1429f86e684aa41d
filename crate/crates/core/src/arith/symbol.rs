use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// A variable name packed into a single machine word.
///
/// Names are 1 to 8 ASCII characters, start with a letter and continue with
/// letters, digits or `_`. The packing is big-endian, so comparing the packed
/// words compares the names lexicographically.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Symbol(u64);

impl Symbol {
    pub fn new(name: &str) -> Result<Self> {
        let bytes = name.as_bytes();
        if bytes.is_empty() || bytes.len() > 8 {
            return Err(Error::parse(format!(
                "symbol name must have 1..=8 characters, got {name:?}"
            )));
        }
        if !bytes[0].is_ascii_alphabetic() {
            return Err(Error::parse(format!("symbol must start with a letter: {name:?}")));
        }
        let mut word = 0u64;
        for (i, &b) in bytes.iter().enumerate() {
            if !(b.is_ascii_alphanumeric() || b == b'_') {
                return Err(Error::parse(format!("invalid character in symbol {name:?}")));
            }
            word |= (b as u64) << (8 * (7 - i));
        }
        Ok(Symbol(word))
    }

    /// Infallible constructor for names known at compile time.
    ///
    /// Panics on an invalid name.
    pub fn from_static(name: &'static str) -> Self {
        Symbol::new(name).expect("invalid static symbol name")
    }

    pub fn as_string(&self) -> String {
        let mut out = String::with_capacity(8);
        for i in 0..8 {
            let b = ((self.0 >> (8 * (7 - i))) & 0xff) as u8;
            if b == 0 {
                break;
            }
            out.push(b as char);
        }
        out
    }
}

impl FromStr for Symbol {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Symbol::new(s)
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.as_string())
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Symbol({})", self.as_string())
    }
}

/// The variables used throughout the crate.
pub mod vars {
    use super::Symbol;

    pub fn q() -> Symbol {
        Symbol::from_static("q")
    }
    pub fn z() -> Symbol {
        Symbol::from_static("z")
    }
    /// Chart coordinate `w = 1/z` near `z = ∞`.
    pub fn w() -> Symbol {
        Symbol::from_static("w")
    }
    pub fn hbar() -> Symbol {
        Symbol::from_static("hbar")
    }
    pub fn a() -> Symbol {
        Symbol::from_static("a")
    }
    pub fn t1() -> Symbol {
        Symbol::from_static("t1")
    }
    pub fn t2() -> Symbol {
        Symbol::from_static("t2")
    }
}

/// An ordered set of distinct variable names with one distinguished series
/// variable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VarSet {
    names: Vec<Symbol>,
    series: Symbol,
}

impl VarSet {
    pub fn new(names: Vec<Symbol>, series: Symbol) -> Result<Self> {
        let mut seen = std::collections::BTreeSet::new();
        for s in &names {
            if !seen.insert(*s) {
                return Err(Error::invalid(format!("duplicate variable {s}")));
            }
        }
        if !seen.contains(&series) {
            return Err(Error::invalid(format!("series variable {series} not in the set")));
        }
        Ok(VarSet { names, series })
    }

    pub fn names(&self) -> &[Symbol] {
        &self.names
    }

    pub fn series_var(&self) -> Symbol {
        self.series
    }

    pub fn contains(&self, s: Symbol) -> bool {
        self.names.contains(&s)
    }

    /// Variables allowed inside coefficients: everything except the series variable.
    pub fn coefficient_vars(&self) -> impl Iterator<Item = Symbol> + '_ {
        self.names.iter().copied().filter(move |s| *s != self.series)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordering_matches_names() {
        let mut names = vec!["z", "hbar", "a", "t2", "t1", "q", "zz", "w"];
        let mut syms: Vec<Symbol> = names.iter().map(|n| Symbol::new(n).unwrap()).collect();
        names.sort();
        syms.sort();
        let back: Vec<String> = syms.iter().map(|s| s.as_string()).collect();
        assert_eq!(back, names);
    }

    #[test]
    fn rejects_bad_names() {
        assert!(Symbol::new("").is_err());
        assert!(Symbol::new("1x").is_err());
        assert!(Symbol::new("toolongname").is_err());
        assert!(Symbol::new("a-b").is_err());
    }

    #[test]
    fn varset_rejects_duplicates() {
        let z = vars::z();
        assert!(VarSet::new(vec![z, z, vars::q()], vars::q()).is_err());
        assert!(VarSet::new(vec![z], vars::q()).is_err());
        let vs = VarSet::new(vec![z, vars::hbar(), vars::q()], vars::q()).unwrap();
        assert_eq!(vs.coefficient_vars().count(), 2);
    }
}
