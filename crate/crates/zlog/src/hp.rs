//! Fixed-point natural logarithms of big integers and exact determinants.

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

const GUARD_BITS: u64 = 64;

/// `2 atanh(y) 2^w` for `y = num/den` in `[0, 1/3]`, in fixed point with `w`
/// fractional bits.
fn two_atanh(num: &BigUint, den: &BigUint, w: u64) -> BigUint {
    let y = (num << w) / den;
    let y2 = (&y * &y) >> w;
    let mut term = y;
    let mut sum = BigUint::zero();
    let mut k = 1u64;
    while !term.is_zero() {
        sum += &term / k;
        term = (&term * &y2) >> w;
        k += 2;
    }
    sum << 1
}

/// `round(ln(n) 2^bits)`, with an absolute error below two units.
pub fn ln_fixed(n: &BigUint, bits: u64) -> Result<BigInt> {
    if n.is_zero() {
        return Err(Error::invalid("log of zero"));
    }
    let w = bits + GUARD_BITS;
    // n = 2^e x with x in [1, 2)
    let e = n.bits() - 1;
    let pow = BigUint::one() << e;
    let ln_x = two_atanh(&(n - &pow), &(n + &pow), w);
    let ln2 = two_atanh(&BigUint::one(), &BigUint::from(3u32), w);
    let total = ln2 * e + ln_x;
    let rounded = (total + (BigUint::one() << (GUARD_BITS - 1))) >> GUARD_BITS;
    Ok(BigInt::from_biguint(Sign::Plus, rounded))
}

/// `round(ln|x| 2^bits)` for a nonzero rational (error below four units).
pub fn ln_abs_fixed(x: &BigRational, bits: u64) -> Result<BigInt> {
    if x.is_zero() {
        return Err(Error::invalid("log of zero"));
    }
    let num = x.numer().abs().to_biguint().expect("absolute value");
    let den = x.denom().abs().to_biguint().expect("absolute value");
    Ok(ln_fixed(&num, bits)? - ln_fixed(&den, bits)?)
}

/// Determinant of a square integer matrix by fraction-free elimination.
pub fn bareiss_det(mut m: Vec<Vec<BigInt>>) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&i| !m[i][k].is_zero()) {
                Some(i) => {
                    m.swap(k, i);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                m[i][j] = v.div_floor(&prev);
            }
        }
        prev = m[k][k].clone();
    }
    sign * m[n - 1][n - 1].clone()
}

/// Bound on `|det(A + E) - det(A)|` for an `n x n` matrix with
/// `|a_ij| <= m` and `|e_ij| <= delta`: `n! n delta (m + delta)^{n-1}`.
pub fn perturbation_bound(n: usize, m: &BigInt, delta: &BigInt) -> BigInt {
    let fact: BigInt = (1..=n as u64).map(BigInt::from).product();
    let base = m + delta;
    let mut p = BigInt::one();
    for _ in 1..n {
        p *= &base;
    }
    fact * BigInt::from(n) * delta * p
}

#[cfg(test)]
mod tests {
    use super::*;

    fn to_f64(x: &BigInt, bits: u64) -> f64 {
        let s = x.to_string();
        s.parse::<f64>().unwrap() / 2f64.powi(bits as i32)
    }

    #[test]
    fn logs_match_floats() {
        for n in [1u64, 2, 3, 10, 11, 143, 1 << 40, 999_999_937] {
            let v = ln_fixed(&BigUint::from(n), 80).unwrap();
            assert!((to_f64(&v, 80) - (n as f64).ln()).abs() < 1e-15, "{n}");
        }
        let x = BigRational::new(BigInt::from(-5), BigInt::from(7));
        assert!((to_f64(&ln_abs_fixed(&x, 80).unwrap(), 80) - (5f64 / 7.0).ln()).abs() < 1e-15);
    }

    #[test]
    fn ln2_to_many_digits() {
        // ln 2 = 0.693147180559945309417232121458176568075500134360255254120680...
        let v = ln_fixed(&BigUint::from(2u32), 200).unwrap();
        // two units of 2^-200 are below one unit in the 60th digit
        let digits = (v * BigInt::from(10).pow(60)) >> 200u32;
        let want: BigInt = "693147180559945309417232121458176568075500134360255254120680".parse().unwrap();
        assert!((digits - want).abs() <= BigInt::one());
    }

    #[test]
    fn bareiss_examples() {
        let m = |rows: &[&[i64]]| rows.iter().map(|r| r.iter().map(|&v| BigInt::from(v)).collect()).collect();
        assert_eq!(bareiss_det(m(&[&[2, 0], &[0, 3]])), BigInt::from(6));
        assert_eq!(bareiss_det(m(&[&[0, 1], &[1, 0]])), BigInt::from(-1));
        assert_eq!(bareiss_det(m(&[&[1, 2, 3], &[4, 5, 6], &[7, 8, 10]])), BigInt::from(-3));
        assert_eq!(bareiss_det(m(&[&[1, 2], &[2, 4]])), BigInt::zero());
    }
}
