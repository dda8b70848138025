//! Integer/rational polynomial helpers: power sums via Newton's identities,
//! squarefree factorization and numerical roots.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::scalar::rational_to_f64;

type RPoly = Vec<BigRational>;

fn to_rpoly(coeffs: &[i64]) -> RPoly {
    coeffs.iter().map(|&c| BigRational::from_integer(BigInt::from(c))).collect()
}

fn trim(mut p: RPoly) -> RPoly {
    while p.len() > 1 && p.last().unwrap().is_zero() {
        p.pop();
    }
    p
}

fn degree(p: &RPoly) -> usize {
    p.len() - 1
}

fn is_zero_poly(p: &RPoly) -> bool {
    p.iter().all(|c| c.is_zero())
}

fn derivative(p: &RPoly) -> RPoly {
    if p.len() <= 1 {
        return vec![BigRational::zero()];
    }
    p.iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| c * BigRational::from_integer(BigInt::from(i)))
        .collect()
}

fn divmod(a: &RPoly, b: &RPoly) -> (RPoly, RPoly) {
    let b = trim(b.clone());
    let mut r = trim(a.clone());
    if degree(&r) < degree(&b) || is_zero_poly(&r) {
        return (vec![BigRational::zero()], r);
    }
    let db = degree(&b);
    let lead = b[db].clone();
    let mut q = vec![BigRational::zero(); degree(&r) - db + 1];
    while !is_zero_poly(&r) && degree(&r) >= db {
        let shift = degree(&r) - db;
        let f = r[degree(&r)].clone() / &lead;
        for (i, bi) in b.iter().enumerate() {
            r[shift + i] = &r[shift + i] - &f * bi;
        }
        q[shift] = f;
        r.pop();
        r = trim(r);
        if r.is_empty() {
            r.push(BigRational::zero());
        }
    }
    (trim(q), r)
}

fn monic(p: RPoly) -> RPoly {
    let p = trim(p);
    let lead = p.last().unwrap().clone();
    p.into_iter().map(|c| c / &lead).collect()
}

fn gcd(a: &RPoly, b: &RPoly) -> RPoly {
    let (mut a, mut b) = (trim(a.clone()), trim(b.clone()));
    while !is_zero_poly(&b) {
        let (_, r) = divmod(&a, &b);
        a = b;
        b = r;
    }
    monic(a)
}

/// Yun's algorithm: returns `(factor, multiplicity)` with squarefree,
/// pairwise coprime monic factors.
fn squarefree(p: &RPoly) -> Vec<(RPoly, usize)> {
    let p = monic(p.clone());
    if degree(&p) == 0 {
        return vec![];
    }
    let dp = derivative(&p);
    let mut a = gcd(&p, &dp);
    let mut b = divmod(&p, &a).0;
    let mut c = divmod(&dp, &a).0;
    let mut d: RPoly = {
        let db = derivative(&b);
        let n = c.len().max(db.len());
        (0..n)
            .map(|i| {
                c.get(i).cloned().unwrap_or_else(BigRational::zero)
                    - db.get(i).cloned().unwrap_or_else(BigRational::zero)
            })
            .collect()
    };
    let mut out = Vec::new();
    let mut i = 1;
    loop {
        a = gcd(&b, &d);
        if degree(&a) > 0 {
            out.push((a.clone(), i));
        }
        b = divmod(&b, &a).0;
        if degree(&b) == 0 {
            break;
        }
        c = divmod(&d, &a).0;
        let db = derivative(&b);
        let n = c.len().max(db.len());
        d = (0..n)
            .map(|k| {
                c.get(k).cloned().unwrap_or_else(BigRational::zero)
                    - db.get(k).cloned().unwrap_or_else(BigRational::zero)
            })
            .collect();
        i += 1;
    }
    out
}

fn horner(p: &[Complex64], z: Complex64) -> Complex64 {
    p.iter().rev().fold(Complex64::zero(), |acc, c| acc * z + c)
}

/// Roots of a squarefree monic polynomial (Durand–Kerner, then Newton
/// polishing on the original coefficients).
fn simple_roots(p: &RPoly) -> Vec<Complex64> {
    let n = degree(p);
    let c: Vec<Complex64> = p.iter().map(|x| Complex64::new(rational_to_f64(x), 0.0)).collect();
    if n == 1 {
        return vec![-c[0] / c[1]];
    }
    let bound = 1.0 + c[..n].iter().map(|x| x.norm()).fold(0.0, f64::max);
    let seed = Complex64::new(0.4, 0.9);
    let mut z: Vec<Complex64> = (0..n).map(|k| seed.powu(k as u32) * bound * 0.5).collect();
    for _ in 0..2000 {
        let mut delta = 0.0f64;
        for i in 0..n {
            let mut den = Complex64::one();
            for j in 0..n {
                if i != j {
                    den *= z[i] - z[j];
                }
            }
            let step = horner(&c, z[i]) / den;
            z[i] -= step;
            delta = delta.max(step.norm() / z[i].norm().max(1.0));
        }
        if delta < 1e-16 {
            break;
        }
    }
    let dc: Vec<Complex64> =
        c.iter().enumerate().skip(1).map(|(i, x)| x * i as f64).collect();
    for r in z.iter_mut() {
        for _ in 0..4 {
            let d = horner(&dc, *r);
            if d.norm() == 0.0 {
                break;
            }
            *r -= horner(&c, *r) / d;
        }
        if r.im.abs() < 1e-14 * r.norm().max(1.0) {
            r.im = 0.0;
        }
    }
    z
}

/// Complex roots with multiplicities of an integer polynomial given from the
/// constant term up.
pub fn roots_with_multiplicity(coeffs: &[i64]) -> Result<Vec<(Complex64, u32)>> {
    let p = trim(to_rpoly(coeffs));
    if degree(&p) == 0 {
        return Err(Error::invalid("characteristic polynomial must have degree >= 1"));
    }
    let mut out = Vec::new();
    for (factor, mult) in squarefree(&p) {
        for r in simple_roots(&factor) {
            out.push((r, mult as u32));
        }
    }
    // conjugate pairs exactly symmetric
    for i in 0..out.len() {
        if out[i].0.im > 0.0 {
            let target = out[i].0.conj();
            if let Some(j) = (0..out.len())
                .filter(|&j| j != i && out[j].0.im < 0.0)
                .min_by(|&a, &b| {
                    (out[a].0 - target).norm().partial_cmp(&(out[b].0 - target).norm()).unwrap()
                })
            {
                let avg = (out[i].0 + out[j].0.conj()) * 0.5;
                out[i].0 = avg;
                out[j].0 = avg.conj();
            }
        }
    }
    out.sort_by(|a, b| {
        (a.0.re, a.0.im).partial_cmp(&(b.0.re, b.0.im)).unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(out)
}

/// Power sums `p_1..=p_len` of the roots (with multiplicity), exactly.
pub fn power_sums(coeffs: &[i64], len: usize) -> Result<Vec<BigRational>> {
    let p = trim(to_rpoly(coeffs));
    let n = degree(&p);
    if n == 0 {
        return Err(Error::invalid("characteristic polynomial must have degree >= 1"));
    }
    let lead = p[n].clone();
    // monic: x^n + a_{n-1} x^{n-1} + ... + a_0
    let a: Vec<BigRational> = p.iter().map(|c| c / &lead).collect();
    let mut ps: Vec<BigRational> = Vec::with_capacity(len + 1);
    ps.push(BigRational::from_integer(BigInt::from(n)));
    for m in 1..=len {
        let mut v = BigRational::zero();
        for i in 1..=n.min(m - 1) {
            v -= &a[n - i] * &ps[m - i];
        }
        if m <= n {
            v -= &a[n - m] * BigRational::from_integer(BigInt::from(m));
        }
        ps.push(v);
    }
    ps.remove(0);
    Ok(ps)
}

/// Elementary symmetric functions `e_0..=e_n` from power sums `p_1..=p_n`.
pub fn elementary_from_power_sums(p: &[BigRational], n: usize) -> Vec<BigRational> {
    let mut e = vec![BigRational::one()];
    for k in 1..=n {
        let mut acc = BigRational::zero();
        for i in 1..=k {
            let term = &e[k - i] * &p[i - 1];
            if i % 2 == 1 {
                acc += term;
            } else {
                acc -= term;
            }
        }
        e.push(acc / BigRational::from_integer(BigInt::from(k)));
    }
    e
}

/// `prod_j (1 - alpha_j^r)` over the roots of `coeffs`, exactly.
pub fn prod_one_minus_powers(coeffs: &[i64], r: usize) -> Result<BigRational> {
    let n = trim(to_rpoly(coeffs)).len() - 1;
    let all = power_sums(coeffs, r * n)?;
    Ok(one_minus_from_sums(&all, n, r))
}

/// `prod_j (1 - alpha_j^r)` for `r = 1..=len`, sharing one power-sum table.
pub fn prod_one_minus_powers_upto(coeffs: &[i64], len: usize) -> Result<Vec<BigRational>> {
    let n = trim(to_rpoly(coeffs)).len() - 1;
    let all = power_sums(coeffs, len * n)?;
    Ok((1..=len).map(|r| one_minus_from_sums(&all, n, r)).collect())
}

fn one_minus_from_sums(all: &[BigRational], n: usize, r: usize) -> BigRational {
    let p: Vec<BigRational> = (1..=n).map(|m| all[r * m - 1].clone()).collect();
    let e = elementary_from_power_sums(&p, n);
    e.iter()
        .enumerate()
        .fold(BigRational::zero(), |acc, (i, ei)| if i % 2 == 0 { acc + ei } else { acc - ei })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ri(v: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(v))
    }

    #[test]
    fn newton_identities() {
        // x^2 - x + 11
        let p = power_sums(&[11, -1, 1], 3).unwrap();
        assert_eq!(p, vec![ri(1), ri(-21), ri(-32)]);
        assert_eq!(prod_one_minus_powers(&[11, -1, 1], 1).unwrap(), ri(11));
        assert_eq!(prod_one_minus_powers(&[11, -1, 1], 2).unwrap(), ri(143));
        // x^2 + 2: curve y^2 z + y z^2 = x^3 over F_2
        assert_eq!(prod_one_minus_powers(&[2, 0, 1], 1).unwrap(), ri(3));
        assert_eq!(prod_one_minus_powers(&[2, 0, 1], 2).unwrap(), ri(9));
    }

    #[test]
    fn roots_of_repeated_factors() {
        // (x - 2)^2 (x + 3)
        let r = roots_with_multiplicity(&[12, -8, -1, 1]).unwrap();
        assert_eq!(r.len(), 2);
        assert!((r[0].0 - Complex64::new(-3.0, 0.0)).norm() < 1e-13 && r[0].1 == 1);
        assert!((r[1].0 - Complex64::new(2.0, 0.0)).norm() < 1e-13 && r[1].1 == 2);
        let r = roots_with_multiplicity(&[11, -1, 1]).unwrap();
        let s = 43f64.sqrt() / 2.0;
        assert!((r[0].0 - Complex64::new(0.5, -s)).norm() < 1e-14);
        assert!((r[1].0 - Complex64::new(0.5, s)).norm() < 1e-14);
    }
}
