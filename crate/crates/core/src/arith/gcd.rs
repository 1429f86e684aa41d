//! Multivariate polynomial gcd over the rationals.
//!
//! Most gcds met in practice are trivial, so the work is ordered from cheap
//! to expensive: structural shortcuts, a modular coprimality certificate,
//! trial division, and finally a recursive primitive remainder sequence.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::poly::{Exponents, Polynomial};
use super::{Symbol, Q};

const P: u64 = 2_147_483_647;

/// Normalized gcd: integral, primitive, positive lex-leading coefficient.
/// `gcd(0, 0) = 0`.
pub fn gcd(a: &Polynomial, b: &Polynomial) -> Polynomial {
    if a.is_zero() {
        return b.primitive().1;
    }
    if b.is_zero() {
        return a.primitive().1;
    }
    if a.as_constant().is_some() || b.as_constant().is_some() {
        return Polynomial::one();
    }
    let ma = a.monomial_content();
    let mb = b.monomial_content();
    let m = ma.meet(&mb);
    let a1 = a.div_exponents(&ma).expect("content divides");
    let b1 = b.div_exponents(&mb).expect("content divides");
    let g = gcd_no_monomial(&a1, &b1);
    g.mul_exponents(&m)
}

fn gcd_no_monomial(a: &Polynomial, b: &Polynomial) -> Polynomial {
    if a.as_constant().is_some() || b.as_constant().is_some() {
        return Polynomial::one();
    }
    if a == b {
        return a.primitive().1;
    }
    let va = a.vars();
    let vb = b.vars();
    let common: BTreeSet<Symbol> = va.intersection(&vb).cloned().collect();
    if common.is_empty() {
        return Polynomial::one();
    }
    // A variable present in only one argument cannot occur in the gcd, so
    // the gcd divides each of that argument's coefficients in the variable.
    if let Some(&v) = va.difference(&vb).next() {
        return gcd_with_coefficients(b, a, v);
    }
    if let Some(&v) = vb.difference(&va).next() {
        return gcd_with_coefficients(a, b, v);
    }
    if coprime_certificate(a, b, &common) {
        return Polynomial::one();
    }
    if a.len() <= b.len() {
        if b.div_exact(a).is_some() {
            return a.primitive().1;
        }
    } else if a.div_exact(b).is_some() {
        return b.primitive().1;
    }
    let (a, b) = (a.primitive().1, b.primitive().1);
    if let Some(g) = heu_gcd(&a, &b, 0) {
        return g.primitive().1;
    }
    prs_gcd(&a, &b, &common)
}

/// Stop the heuristic once evaluated coefficients pass this many bits.
const HEU_MAX_BITS: u64 = 1 << 16;

fn max_norm(p: &Polynomial) -> BigInt {
    p.terms().map(|(_, c)| c.numer().abs()).max().unwrap_or_default()
}

fn int_content(p: &Polynomial) -> BigInt {
    p.terms().fold(BigInt::zero(), |g, (_, c)| g.gcd(c.numer()))
}

/// Symmetric residue in `(-m/2, m/2]`.
fn smod(c: &BigInt, m: &BigInt) -> BigInt {
    let r = c.mod_floor(m);
    if &r * 2 > *m {
        r - m
    } else {
        r
    }
}

/// Heuristic gcd of integral polynomials: evaluate one variable at a large
/// integer, recurse, and lift the image back by its balanced ξ-adic digits.
/// A lift dividing both inputs is the gcd; otherwise `None` after a few
/// evaluation points. The result carries the gcd of the integer contents.
fn heu_gcd(a: &Polynomial, b: &Polynomial, depth: u32) -> Option<Polynomial> {
    if a.is_zero() || b.is_zero() || depth > 8 {
        return None;
    }
    let (ca, cb) = (int_content(a), int_content(b));
    let cg = ca.gcd(&cb);
    let Some(x) = a.vars().intersection(&b.vars()).next().copied() else {
        return Some(Polynomial::constant(Q::from_integer(cg)));
    };
    let a1 = a.scale(&Q::new(BigInt::one(), ca));
    let b1 = b.scale(&Q::new(BigInt::one(), cb));
    let dmax = a1.degree(x).min(b1.degree(x));
    let mut xi: BigInt = max_norm(&a1).min(max_norm(&b1)) * 2 + 29;
    for _ in 0..6 {
        let bits = xi.bits() * u64::from(a1.degree(x).max(b1.degree(x)) + 1);
        if bits > HEU_MAX_BITS {
            return None;
        }
        let xq = Q::from_integer(xi.clone());
        let (ea, eb) = (a1.eval_var(x, &xq), b1.eval_var(x, &xq));
        if let Some(mut img) = heu_gcd(&ea, &eb, depth + 1) {
            let mut digits = Vec::new();
            while !img.is_zero() && digits.len() <= dmax as usize {
                let d = Polynomial::from_terms(
                    img.terms().map(|(e, c)| (e.clone(), Q::from_integer(smod(c.numer(), &xi)))),
                );
                img = img.sub(&d).scale(&Q::new(BigInt::one(), xi.clone()));
                digits.push(d);
            }
            if img.is_zero() {
                let g = Polynomial::from_coefficients_in(x, &digits).primitive().1;
                if !g.is_zero() && a1.div_exact(&g).is_some() && b1.div_exact(&g).is_some() {
                    return Some(g.scale(&Q::from_integer(cg)));
                }
            }
        }
        xi = xi * 73794 / 27011;
    }
    None
}

/// gcd(p, coefficients of `other` in `v`), with `v` absent from `p`.
fn gcd_with_coefficients(p: &Polynomial, other: &Polynomial, v: Symbol) -> Polynomial {
    let mut coeffs: Vec<Polynomial> = other
        .coefficients_in(v)
        .into_iter()
        .filter(|c| !c.is_zero())
        .collect();
    coeffs.sort_by_key(|c| (c.total_degree(), c.len()));
    let mut g = p.clone();
    for c in coeffs {
        g = gcd(&g, &c);
        if g.as_constant().is_some() {
            return Polynomial::one();
        }
    }
    g.primitive().1
}

fn content_in(p: &Polynomial, x: Symbol) -> Polynomial {
    let mut coeffs: Vec<Polynomial> = p
        .coefficients_in(x)
        .into_iter()
        .filter(|c| !c.is_zero())
        .collect();
    coeffs.sort_by_key(|c| (c.total_degree(), c.len()));
    let mut g = Polynomial::zero();
    for c in coeffs {
        g = gcd(&g, &c);
        if g.as_constant().is_some() {
            return Polynomial::one();
        }
    }
    g
}

fn prs_gcd(a: &Polynomial, b: &Polynomial, common: &BTreeSet<Symbol>) -> Polynomial {
    let x = *common
        .iter()
        .min_by_key(|s| a.degree(**s).max(b.degree(**s)))
        .expect("nonempty");
    let ca = content_in(a, x);
    let cb = content_in(b, x);
    let c = gcd(&ca, &cb);
    let mut f = a.div_exact(&ca).expect("content divides");
    let mut g = b.div_exact(&cb).expect("content divides");
    if f.degree(x) < g.degree(x) {
        std::mem::swap(&mut f, &mut g);
    }
    while !g.is_zero() {
        if g.degree(x) == 0 {
            return c.primitive().1;
        }
        let r = pseudo_rem(&f, &g, x);
        f = g;
        g = if r.is_zero() {
            r
        } else {
            let cr = content_in(&r, x);
            r.div_exact(&cr).expect("content divides")
        };
    }
    f.mul(&c).primitive().1
}

fn pseudo_rem(f: &Polynomial, g: &Polynomial, x: Symbol) -> Polynomial {
    let dg = g.degree(x);
    let gc = g.coefficients_in(x);
    let lg = gc[dg as usize].clone();
    let mut r = f.clone();
    while !r.is_zero() && r.degree(x) >= dg {
        let dr = r.degree(x);
        let lr = r.coefficients_in(x).swap_remove(dr as usize);
        let shift = Exponents::var(x, dr - dg);
        r = r.mul(&lg).sub(&g.mul(&lr).mul_exponents(&shift));
    }
    r
}

fn q_mod(c: &Q) -> Option<u64> {
    let p = BigInt::from(P);
    let n = ((c.numer() % &p) + &p) % &p;
    let d = ((c.denom() % &p) + &p) % &p;
    let d = d.to_u64()?;
    if d == 0 {
        return None;
    }
    Some(mulmod(n.to_u64()?, inv_mod(d)))
}

fn mulmod(a: u64, b: u64) -> u64 {
    a * b % P
}

fn pow_mod(mut a: u64, mut e: u64) -> u64 {
    let mut r = 1;
    while e > 0 {
        if e & 1 == 1 {
            r = mulmod(r, a);
        }
        a = mulmod(a, a);
        e >>= 1;
    }
    r
}

fn inv_mod(a: u64) -> u64 {
    pow_mod(a, P - 2)
}

/// Reduces `p` modulo P after substituting fixed values for all variables
/// except `x`. Returns the dense coefficient vector in `x`.
fn eval_mod(p: &Polynomial, x: Symbol, point: &dyn Fn(Symbol) -> u64) -> Option<Vec<u64>> {
    let deg = p.degree(x) as usize;
    let mut out = vec![0u64; deg + 1];
    for (e, c) in p.terms() {
        let mut t = q_mod(c)?;
        let mut k = 0usize;
        for &(s, m) in e.iter() {
            if s == x {
                k = m as usize;
            } else {
                t = mulmod(t, pow_mod(point(s), m as u64));
            }
        }
        out[k] = (out[k] + t) % P;
    }
    Some(out)
}

fn trim(v: &mut Vec<u64>) {
    while v.len() > 1 && *v.last().unwrap() == 0 {
        v.pop();
    }
}

fn uni_rem(a: &[u64], b: &[u64]) -> Vec<u64> {
    let mut r = a.to_vec();
    let db = b.len() - 1;
    let inv = inv_mod(b[db]);
    while r.len() > db && !(r.len() == 1 && r[0] == 0) {
        let dr = r.len() - 1;
        let f = mulmod(r[dr], inv);
        for i in 0..=db {
            let idx = dr - db + i;
            r[idx] = (r[idx] + P - mulmod(f, b[i])) % P;
        }
        r.pop();
        trim(&mut r);
        if r.len() <= db {
            break;
        }
    }
    trim(&mut r);
    r
}

fn uni_gcd_degree(a: &[u64], b: &[u64]) -> usize {
    let (mut f, mut g) = (a.to_vec(), b.to_vec());
    trim(&mut f);
    trim(&mut g);
    if f.len() < g.len() {
        std::mem::swap(&mut f, &mut g);
    }
    loop {
        if g.len() == 1 && g[0] == 0 {
            return f.len() - 1;
        }
        if g.len() == 1 {
            return 0;
        }
        let r = uni_rem(&f, &g);
        f = g;
        g = r;
    }
}

/// Proves coprimality by showing the gcd has degree 0 in every common
/// variable. At an evaluation point where the leading coefficient of `a`
/// survives, the image of the gcd keeps its degree and divides both images,
/// so a constant univariate image gcd bounds that degree by 0.
/// Returns `false` when no certificate was found (not a proof of a common factor).
fn coprime_certificate(a: &Polynomial, b: &Polynomial, common: &BTreeSet<Symbol>) -> bool {
    for &x in common {
        let mut ok = false;
        for attempt in 0..3u64 {
            let point = |s: Symbol| -> u64 {
                let h = s
                    .to_string()
                    .bytes()
                    .fold(attempt.wrapping_mul(7919).wrapping_add(17), |acc, c| {
                        acc.wrapping_mul(131).wrapping_add(c as u64)
                    });
                2 + h % (P - 3)
            };
            let (Some(ea), Some(eb)) = (eval_mod(a, x, &point), eval_mod(b, x, &point)) else {
                continue;
            };
            let da = a.degree(x) as usize;
            let db = b.degree(x) as usize;
            if ea[da] == 0 && eb[db] == 0 {
                continue;
            }
            if uni_gcd_degree(&ea, &eb) == 0 {
                ok = true;
                break;
            }
        }
        if !ok {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::super::{q_int, vars};
    use super::*;

    fn lin(c0: i64, terms: &[(i64, &[(Symbol, u32)])]) -> Polynomial {
        let mut p = Polynomial::constant(q_int(c0));
        for (c, e) in terms {
            let mut x = Exponents::one();
            for &(s, k) in e.iter() {
                x = x.mul(&Exponents::var(s, k));
            }
            p.add_term(x, q_int(*c));
        }
        p
    }

    #[test]
    fn common_factor_found() {
        let z = vars::z();
        let h = vars::hbar();
        let q = vars::q();
        let f1 = lin(1, &[(-1, &[(z, 1)])]);
        let f2 = lin(1, &[(-1, &[(z, 1), (h, 1)])]);
        let f3 = lin(2, &[(3, &[(q, 2), (h, 1)])]);
        let a = f1.mul(&f2).mul(&f3);
        let b = f2.mul(&f3).mul(&f3);
        let g = gcd(&a, &b);
        assert_eq!(g, f2.mul(&f3).primitive().1);
        assert_eq!(gcd(&f1, &f2), Polynomial::one());
    }

    #[test]
    fn monomial_content_handled() {
        let z = vars::z();
        let h = vars::hbar();
        let a = lin(0, &[(2, &[(z, 2)]), (4, &[(z, 3), (h, 1)])]);
        let b = lin(0, &[(6, &[(z, 1), (h, 2)])]);
        assert_eq!(gcd(&a, &b), Polynomial::var(z));
    }

    #[test]
    fn powers_of_bivariate_factor() {
        let z = vars::z();
        let h = vars::hbar();
        let f = lin(-3, &[(2, &[(h, 1), (z, 2)]), (2, &[(h, 1)])]);
        let u = lin(1, &[(1, &[(z, 1)]), (-1, &[(h, 2)])]);
        let a = f.pow(9).mul(&u);
        let b = f.pow(6).mul(&u.pow(2)).mul(&lin(2, &[(1, &[(z, 3)])]));
        assert_eq!(gcd(&a, &b), f.pow(6).mul(&u).primitive().1);
        assert_eq!(gcd(&f.pow(5), &u.pow(3)), Polynomial::one());
    }

    #[test]
    fn univariate_q_products() {
        let q = vars::q();
        let mut den = Polynomial::one();
        for k in 1..=6 {
            den = den.mul(&lin(1, &[(-1, &[(q, k)])]));
        }
        let f = lin(1, &[(-1, &[(q, 6)])]);
        let g = gcd(&den, &f);
        assert_eq!(g, f.primitive().1);
        let h = lin(1, &[(1, &[(q, 1)])]);
        assert_eq!(gcd(&den, &h), h);
    }
}
