//! Scalar plumbing shared by the generic algebra (series, exact fits) and the
//! floating-point engine.

use std::fmt::Debug;
use std::ops::Neg;

use num_bigint::{BigInt, BigUint, Sign};
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, Signed, ToPrimitive, Zero};

/// Coefficient ring for the generic series code: `f64`, `Complex64` and
/// `BigRational` all qualify.
pub trait Scalar: Clone + Debug + Num + Neg<Output = Self> + FromPrimitive {}

impl<T> Scalar for T where T: Clone + Debug + Num + Neg<Output = T> + FromPrimitive {}

pub fn ln_biguint(n: &BigUint) -> f64 {
    debug_assert!(!n.is_zero());
    let bits = n.bits();
    if bits <= 1000 {
        return n.to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 64;
    (n >> shift).to_f64().unwrap_or(f64::INFINITY).ln() + shift as f64 * std::f64::consts::LN_2
}

/// `log|x|` for a nonzero rational, without overflowing through `f64`.
pub fn ln_abs_rational(x: &BigRational) -> f64 {
    ln_biguint(x.numer().magnitude()) - ln_biguint(x.denom().magnitude())
}

pub fn rational_to_f64(x: &BigRational) -> f64 {
    match x.to_f64() {
        Some(v) if v.is_finite() => v,
        _ => {
            let s = if x.is_negative() { -1.0 } else { 1.0 };
            s * ln_abs_rational(x).exp()
        }
    }
}

pub fn big_int(v: i64) -> BigInt {
    BigInt::from(v)
}

pub fn rational(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn is_negative_int(x: &BigInt) -> bool {
    x.sign() == Sign::Minus
}

/// Best rational approximation `p/q` with `q <= max_den`, by continued
/// fractions. Returns `(p, q, |x - p/q|)`.
pub fn best_rational(x: f64, max_den: u64) -> (i64, u64, f64) {
    if !x.is_finite() {
        return (0, 1, f64::INFINITY);
    }
    let (mut h0, mut h1) = (0i128, 1i128);
    let (mut k0, mut k1) = (1i128, 0i128);
    let mut y = x;
    let mut best = (x.round() as i64, 1u64);
    for _ in 0..64 {
        let a = y.floor();
        let ai = a as i128;
        let h2 = ai * h1 + h0;
        let k2 = ai * k1 + k0;
        if k2 > max_den as i128 || k2 <= 0 {
            break;
        }
        best = (h2 as i64, k2 as u64);
        let frac = y - a;
        if frac.abs() < 1e-15 {
            break;
        }
        y = 1.0 / frac;
        h0 = h1;
        h1 = h2;
        k0 = k1;
        k1 = k2;
    }
    let err = (x - best.0 as f64 / best.1 as f64).abs();
    (best.0, best.1, err)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln_of_huge_integers() {
        let n = BigUint::from(2u32).pow(3000);
        assert!((ln_biguint(&n) - 3000.0 * std::f64::consts::LN_2).abs() < 1e-9);
        assert!((ln_biguint(&BigUint::from(11u32)) - 11f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn continued_fraction_fit() {
        assert_eq!(best_rational(0.5, 64).0, 1);
        assert_eq!(best_rational(0.5, 64).1, 2);
        let (p, q, e) = best_rational(-1.0 / 3.0 + 1e-9, 64);
        assert_eq!((p, q), (-1, 3));
        assert!(e < 1e-8);
        let (p, q, _) = best_rational(std::f64::consts::PI, 10);
        assert_eq!((p, q), (22, 7));
    }
}
