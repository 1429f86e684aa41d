//! Floating-point evaluation of exact objects with truncation-error estimates.
//!
//! A truncated series `Σ_{e ≤ N} c_e x^e` is summed directly. The unknown
//! tail is estimated geometrically: with `t` the last nonzero retained term
//! and `ρ` the largest per-step ratio among the last few terms, the tail is
//! `2·|t|·ρ^k/(1 − ρ)`, `k` the number of steps from `t` to the first
//! unknown exponent and 2 a safety factor. `ρ ≥ 1` is reported as
//! `PrecisionLoss`.

use std::collections::BTreeMap;

use num_complex::Complex64;

use super::FundamentalSolution;
use crate::arith::{Exp, PuiseuxSeries, RationalFunction, Symbol, Q};
use crate::error::{Error, Result};

pub const SAFETY_FACTOR: f64 = 2.0;
const TAIL_WINDOW: usize = 3;

/// A value together with an absolute error bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub value: Complex64,
    pub error: f64,
}

impl Estimate {
    pub fn exact(value: Complex64) -> Self {
        Estimate {
            value,
            error: value.norm() * 8.0 * f64::EPSILON,
        }
    }

    pub fn add(&self, o: &Estimate) -> Estimate {
        Estimate {
            value: self.value + o.value,
            error: self.error + o.error,
        }
    }

    pub fn sub(&self, o: &Estimate) -> Estimate {
        Estimate {
            value: self.value - o.value,
            error: self.error + o.error,
        }
    }

    pub fn mul(&self, o: &Estimate) -> Estimate {
        Estimate {
            value: self.value * o.value,
            error: self.value.norm() * o.error + o.value.norm() * self.error + self.error * o.error,
        }
    }

    pub fn inv(&self) -> Result<Estimate> {
        let a = self.value.norm();
        if self.error >= a {
            return Err(Error::PrecisionLoss {
                estimate: self.error,
                tolerance: a,
            });
        }
        Ok(Estimate {
            value: self.value.inv(),
            error: self.error / (a * (a - self.error)),
        })
    }

    pub fn div(&self, o: &Estimate) -> Result<Estimate> {
        Ok(self.mul(&o.inv()?))
    }

    /// True when the two values are compatible within `max(tol, e₁ + e₂)`.
    pub fn agrees(&self, o: &Estimate, tol: f64) -> bool {
        (self.value - o.value).norm() <= tol.max(self.error + o.error)
    }
}

/// Values of the variables: rationals are substituted exactly into
/// polynomial parts before rounding.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Point {
    pub exact: BTreeMap<Symbol, Q>,
    pub complex: BTreeMap<Symbol, Complex64>,
}

impl Point {
    pub fn new() -> Self {
        Point::default()
    }

    pub fn with_exact(mut self, s: Symbol, v: Q) -> Self {
        self.exact.insert(s, v);
        self
    }

    pub fn with_complex(mut self, s: Symbol, v: Complex64) -> Self {
        self.complex.insert(s, v);
        self
    }

    pub fn value(&self, s: Symbol) -> Result<Complex64> {
        use num_traits::ToPrimitive;
        if let Some(v) = self.exact.get(&s) {
            return Ok(Complex64::new(v.to_f64().unwrap_or(f64::NAN), 0.0));
        }
        self.complex
            .get(&s)
            .copied()
            .ok_or_else(|| Error::invalid(format!("variable {s} not bound")))
    }

    /// Copy with `s` removed, so it may be rebound.
    pub fn without(&self, s: Symbol) -> Point {
        let mut p = self.clone();
        p.exact.remove(&s);
        p.complex.remove(&s);
        p
    }
}

pub fn eval_rf(f: &RationalFunction, p: &Point) -> Result<Estimate> {
    Ok(Estimate::exact(f.eval_numeric(&p.exact, &p.complex)?))
}

/// Tail estimate from the retained terms `(k, |t_k|)`, `k` counting steps
/// of `1/den`, for a series truncated after step `last_step`. The step
/// ratio `ρ` is the largest per-step growth among the last few nonzero terms
/// (or `r^{1/den}` when fewer than two are present).
fn tail(mags: &[(i64, f64)], r: f64, last_step: i64, den: i64) -> Result<f64> {
    let nz: Vec<(i64, f64)> = mags.iter().filter(|(_, m)| *m > 0.0).cloned().collect();
    let Some(&(k_last, t_last)) = nz.last() else {
        return Ok(0.0);
    };
    let window = &nz[nz.len().saturating_sub(TAIL_WINDOW)..];
    let rho = if window.len() >= 2 {
        window
            .windows(2)
            .map(|w| (w[1].1 / w[0].1).powf(1.0 / (w[1].0 - w[0].0) as f64))
            .fold(0.0, f64::max)
    } else {
        r.powf(1.0 / den as f64)
    };
    if !(rho < 1.0) {
        return Err(Error::PrecisionLoss {
            estimate: f64::INFINITY,
            tolerance: 0.0,
        });
    }
    let ahead = (last_step - k_last + 1) as f64;
    Ok(SAFETY_FACTOR * t_last * rho.powf(ahead) / (1.0 - rho))
}

/// Sums a truncated series in the point's value of its variable.
pub fn eval_series(s: &PuiseuxSeries, p: &Point) -> Result<Estimate> {
    let x = p.value(s.var())?;
    let coeff_point = p.without(s.var());
    let mut value = Complex64::new(0.0, 0.0);
    let mut rounding = 0.0;
    let mut mags = Vec::with_capacity(s.terms().len());
    for (e, c) in s.terms() {
        let cv = eval_rf(c, &coeff_point)?;
        let xe = crate::arith::ratfun::principal_pow(x, e);
        value += cv.value * xe;
        rounding += cv.error * xe.norm();
        mags.push(((*e * Exp::from_integer(s.den())).to_integer(), (cv.value * xe).norm()));
    }
    let last = (s.order() * Exp::from_integer(s.den())).floor().to_integer();
    let t = tail(&mags, x.norm(), last, s.den())?;
    Ok(Estimate {
        value,
        error: rounding + t + value.norm() * 8.0 * f64::EPSILON,
    })
}

/// Evaluates a series and fails with `PrecisionLoss` if the estimate exceeds `tol`.
pub fn numeric_eval(s: &PuiseuxSeries, p: &Point, tol: f64) -> Result<Estimate> {
    let v = eval_series(s, p)?;
    if v.error > tol {
        return Err(Error::PrecisionLoss {
            estimate: v.error,
            tolerance: tol,
        });
    }
    Ok(v)
}

/// Square matrix of estimates, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct NumMatrix {
    pub n: usize,
    pub data: Vec<Estimate>,
}

impl NumMatrix {
    pub fn get(&self, i: usize, j: usize) -> Estimate {
        self.data[i * self.n + j]
    }

    pub fn mul(&self, o: &NumMatrix) -> NumMatrix {
        let n = self.n;
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = Estimate::exact(Complex64::new(0.0, 0.0));
                for k in 0..n {
                    acc = acc.add(&self.get(i, k).mul(&o.get(k, j)));
                }
                data.push(acc);
            }
        }
        NumMatrix { n, data }
    }

    fn frob(v: impl Iterator<Item = f64>) -> f64 {
        v.map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Inverse by Gauss-Jordan on the values; the error bound uses
    /// `‖ΔA⁻¹‖ ≤ ‖A⁻¹‖²‖ΔA‖ / (1 − ‖A⁻¹‖‖ΔA‖)` in the Frobenius norm.
    pub fn inv(&self) -> Result<NumMatrix> {
        let n = self.n;
        let mut a: Vec<Vec<Complex64>> = (0..n).map(|i| (0..n).map(|j| self.get(i, j).value).collect()).collect();
        let mut b: Vec<Vec<Complex64>> = (0..n)
            .map(|i| (0..n).map(|j| if i == j { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) }).collect())
            .collect();
        for col in 0..n {
            let piv = (col..n)
                .max_by(|&x, &y| a[x][col].norm().total_cmp(&a[y][col].norm()))
                .expect("nonempty");
            if a[piv][col].norm() == 0.0 {
                return Err(Error::SingularMatrix);
            }
            a.swap(col, piv);
            b.swap(col, piv);
            let p = a[col][col].inv();
            for j in 0..n {
                a[col][j] *= p;
                b[col][j] *= p;
            }
            for r in 0..n {
                if r != col {
                    let f = a[r][col];
                    for j in 0..n {
                        let (ta, tb) = (a[col][j] * f, b[col][j] * f);
                        a[r][j] -= ta;
                        b[r][j] -= tb;
                    }
                }
            }
        }
        let inv_norm = Self::frob(b.iter().flatten().map(|x| x.norm()));
        let err_norm = Self::frob(self.data.iter().map(|e| e.error));
        let k = inv_norm * err_norm;
        if k >= 1.0 {
            return Err(Error::PrecisionLoss {
                estimate: k,
                tolerance: 1.0,
            });
        }
        let e = inv_norm * inv_norm * err_norm / (1.0 - k) + inv_norm * 8.0 * f64::EPSILON * n as f64;
        Ok(NumMatrix {
            n,
            data: b.into_iter().flatten().map(|value| Estimate { value, error: e }).collect(),
        })
    }

    pub fn max_error(&self) -> f64 {
        self.data.iter().map(|e| e.error).fold(0.0, f64::max)
    }

    /// First entry where the matrices disagree beyond `max(tol, combined error)`.
    pub fn first_disagreement(&self, o: &NumMatrix, tol: f64) -> Option<(usize, usize)> {
        (0..self.n * self.n)
            .find(|&k| !self.data[k].agrees(&o.data[k], tol))
            .map(|k| (k / self.n, k % self.n))
    }
}

/// Evaluates `Σ_d Ψ_d x^d` at `x`, with the coefficients evaluated at `p`.
pub fn eval_solution(sol: &FundamentalSolution, x: Complex64, p: &Point) -> Result<NumMatrix> {
    let n = sol.rank();
    let r = x.norm();
    let mut data = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let mut value = Complex64::new(0.0, 0.0);
            let mut rounding = 0.0;
            let mut mags = Vec::new();
            let mut xd = Complex64::new(1.0, 0.0);
            for (d, c) in sol.coefficients().iter().enumerate() {
                let cv = eval_rf(c.get(i, j), p)?;
                value += cv.value * xd;
                rounding += cv.error * xd.norm();
                mags.push((d as i64, (cv.value * xd).norm()));
                xd *= x;
            }
            let t = tail(&mags, r, sol.zorder() as i64, 1)?;
            data.push(Estimate {
                value,
                error: rounding + t,
            });
        }
    }
    Ok(NumMatrix { n, data })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::parse::parse_rf;
    use crate::arith::{exp_int, q_frac, vars};

    #[test]
    fn simple_series() {
        let s = PuiseuxSeries::from_terms(
            vars::q(),
            vec![(exp_int(0), parse_rf("1").unwrap()), (exp_int(1), parse_rf("z").unwrap())],
            exp_int(1),
        )
        .unwrap();
        let p = Point::new()
            .with_exact(vars::q(), q_frac(1, 10))
            .with_complex(vars::z(), Complex64::new(1.0, 0.0));
        let v = eval_series(&s, &p).unwrap();
        assert!((v.value - Complex64::new(1.1, 0.0)).norm() < 1e-14);
        assert!(numeric_eval(&s, &p, 1e-6).is_err());
        assert!(numeric_eval(&s, &p, 1.0).is_ok());
    }

    #[test]
    fn inverse_bounds() {
        let a = Estimate {
            value: Complex64::new(2.0, 0.0),
            error: 0.01,
        };
        let b = a.inv().unwrap();
        assert!((b.value.re - 0.5).abs() < 1e-15);
        assert!(b.error >= 0.01 / 4.0);
        let m = NumMatrix { n: 1, data: vec![a] };
        let mi = m.inv().unwrap();
        assert!(mi.get(0, 0).agrees(&b, 1e-12));
    }
}
