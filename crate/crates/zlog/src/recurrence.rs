//! Searching for (and ruling out) linear recurrences in `log N_r`.
//!
//! Least squares finds recurrences in float sequences. For exact counts the
//! Hankel determinants of `log N_r` are evaluated in fixed point with a
//! rigorous error bound: a determinant that clears the bound is certainly
//! nonzero, which rules out every recurrence of that order on the window.

use nalgebra::{DMatrix, DVector};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hp::{bareiss_det, ln_abs_fixed, perturbation_bound};
use crate::point_counts::CountSequence;

/// Normalized least-squares residual separating "found" from "falsified".
pub const RESIDUAL_THRESHOLD: f64 = 1e-8;
/// Fractional bits of the fixed-point logarithms.
pub const PRECISION_BITS: u64 = 512;
/// Error of each fixed-point entry, in units of `2^-PRECISION_BITS`.
const ENTRY_ERROR: i64 = 4;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RecurrenceFit {
    pub order: usize,
    pub coefficients: Vec<f64>,
    /// Sum of squared residuals divided by `sum a_r^2`.
    pub residual: f64,
}

fn check_horizon(len: usize, d: usize, horizon: usize) -> Result<()> {
    if d == 0 {
        return Err(Error::invalid("order must be >= 1"));
    }
    if horizon < 2 * d + 8 {
        return Err(Error::invalid(format!("horizon {horizon} < 2d + 8 = {}", 2 * d + 8)));
    }
    if horizon > len {
        return Err(Error::invalid(format!("horizon {horizon} exceeds the {len} available terms")));
    }
    Ok(())
}

/// Least-squares fit of `a_{r+d} = sum_i c_i a_{r+d-i}` over `r + d <= R`.
pub fn fit_recurrence(seq: &[f64], d: usize, horizon: usize) -> Result<RecurrenceFit> {
    check_horizon(seq.len(), d, horizon)?;
    let a = &seq[..horizon];
    let norm: f64 = a.iter().map(|x| x * x).sum();
    if norm == 0.0 {
        return Err(Error::Degenerate("all-zero sequence".into()));
    }
    let rows = horizon - d;
    let m = DMatrix::from_fn(rows, d, |r, i| a[r + d - 1 - i]);
    let b = DVector::from_fn(rows, |r, _| a[r + d]);
    let svd = m.clone().svd(true, true);
    let tol = 1e-14 * svd.singular_values.max();
    let c = svd.solve(&b, tol).map_err(|e| Error::Degenerate(e.to_string()))?;
    let res = (&m * &c - &b).norm_squared();
    Ok(RecurrenceFit { order: d, coefficients: c.iter().copied().collect(), residual: res / norm })
}

/// Exact coefficients of an order-`d` recurrence satisfied by all of `seq`,
/// if one exists with a nonsingular leading `d x d` system.
pub fn fit_recurrence_exact(seq: &[BigRational], d: usize) -> Option<Vec<BigRational>> {
    if d == 0 || seq.len() < 2 * d {
        return None;
    }
    // rows r = 0..d: sum_i c_i a_{r+d-1-i} = a_{r+d}
    let mut m: Vec<Vec<BigRational>> = (0..d)
        .map(|r| {
            let mut row: Vec<BigRational> = (0..d).map(|i| seq[r + d - 1 - i].clone()).collect();
            row.push(seq[r + d].clone());
            row
        })
        .collect();
    for k in 0..d {
        let p = (k..d).find(|&i| !m[i][k].is_zero())?;
        m.swap(k, p);
        let piv = m[k][k].clone();
        for v in m[k].iter_mut() {
            *v = &*v / &piv;
        }
        for i in 0..d {
            if i != k && !m[i][k].is_zero() {
                let f = m[i][k].clone();
                for j in k..=d {
                    let sub = &f * &m[k][j];
                    m[i][j] -= sub;
                }
            }
        }
    }
    let c: Vec<BigRational> = m.into_iter().map(|row| row[d].clone()).collect();
    let holds = (d..seq.len()).all(|n| {
        let s: BigRational = (0..d).map(|i| &c[i] * &seq[n - 1 - i]).sum();
        s == seq[n]
    });
    holds.then_some(c)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    RecurrenceFound { order: usize },
    FalsifiedUpTo { d_max: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrderResult {
    pub order: usize,
    /// Reported only when the residual is below the threshold.
    pub coefficients: Option<Vec<f64>>,
    pub residual: f64,
    /// `Some(true)` when some Hankel determinant is certified nonzero.
    pub excluded: Option<bool>,
    /// `log2` of the largest Hankel determinant, in real units.
    pub max_det_log2: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RecurrenceReport {
    pub sequence_id: String,
    pub horizon: usize,
    pub method: &'static str,
    pub orders: Vec<OrderResult>,
    pub verdict: Verdict,
    pub note: &'static str,
}

const NOTE: &str = "falsification covers orders up to d_max on the given horizon only";

fn log2_big(x: &BigInt) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = x.bits();
    let shift = bits.saturating_sub(60);
    let top: f64 = (x.abs() >> shift).to_string().parse().unwrap_or(f64::INFINITY);
    top.log2() + shift as f64
}

/// Certified Hankel test for order `d` on `a_1..a_R` given in fixed point.
/// Returns (excluded, log2 of the largest |det| in real units).
fn hankel_exclusion(fixed: &[BigInt], d: usize) -> (bool, f64) {
    let n = d + 1;
    let delta = BigInt::from(ENTRY_ERROR);
    let m = fixed.iter().map(|x| x.abs()).max().unwrap_or_default();
    let bound = perturbation_bound(n, &m, &delta) * 2;
    let windows = fixed.len() + 1 - 2 * n + 1;
    let dets: Vec<BigInt> = (0..windows)
        .into_par_iter()
        .map(|r| {
            let h: Vec<Vec<BigInt>> =
                (0..n).map(|i| (0..n).map(|j| fixed[r + i + j].clone()).collect()).collect();
            bareiss_det(h)
        })
        .collect();
    let best = dets.iter().map(|x| x.abs()).max().unwrap_or_default();
    let excluded = best > bound;
    (excluded, log2_big(&best) - (n as u64 * PRECISION_BITS) as f64)
}

/// Orders `1..=d_max` for the sequence `log|N_r|`, `r <= R`. Exact counts
/// use the certified Hankel test; the least-squares fit is reported along.
pub fn falsify_report(counts: &CountSequence, d_max: usize, horizon: usize) -> Result<RecurrenceReport> {
    counts.check_positive()?;
    check_horizon(counts.values.len(), d_max, horizon)?;
    let values = &counts.values[..horizon];
    let floats: Vec<f64> = values.iter().map(crate::scalar::ln_abs_rational).collect();
    let fixed: Vec<BigInt> =
        values.iter().map(|v| ln_abs_fixed(v, PRECISION_BITS)).collect::<Result<Vec<_>>>()?;
    let mut orders = Vec::with_capacity(d_max);
    let mut found = None;
    for d in 1..=d_max {
        let fit = fit_recurrence(&floats, d, horizon)?;
        let (excluded, det_log2) = hankel_exclusion(&fixed, d);
        if !excluded && found.is_none() {
            found = Some(d);
        }
        orders.push(OrderResult {
            order: d,
            coefficients: (!excluded).then(|| fit.coefficients.clone()),
            residual: fit.residual,
            excluded: Some(excluded),
            max_det_log2: Some(det_log2),
        });
    }
    Ok(RecurrenceReport {
        sequence_id: format!("log N_r, q = {}", counts.q),
        horizon,
        method: "certified_hankel",
        orders,
        verdict: match found {
            Some(order) => Verdict::RecurrenceFound { order },
            None => Verdict::FalsifiedUpTo { d_max },
        },
        note: NOTE,
    })
}

/// Least-squares-only report for a float sequence: order `d` counts as found
/// when the raw residual is below `1e-8 (1 + sum a^2)`.
pub fn falsify_sequence(id: &str, seq: &[f64], d_max: usize, horizon: usize) -> Result<RecurrenceReport> {
    check_horizon(seq.len(), d_max, horizon)?;
    let norm: f64 = seq[..horizon].iter().map(|x| x * x).sum();
    let mut orders = Vec::with_capacity(d_max);
    let mut found = None;
    for d in 1..=d_max {
        let fit = fit_recurrence(seq, d, horizon)?;
        let ok = fit.residual * norm < RESIDUAL_THRESHOLD * (1.0 + norm);
        if ok && found.is_none() {
            found = Some(d);
        }
        orders.push(OrderResult {
            order: d,
            coefficients: ok.then(|| fit.coefficients.clone()),
            residual: fit.residual,
            excluded: None,
            max_det_log2: None,
        });
    }
    Ok(RecurrenceReport {
        sequence_id: id.into(),
        horizon,
        method: "least_squares",
        orders,
        verdict: match found {
            Some(order) => Verdict::RecurrenceFound { order },
            None => Verdict::FalsifiedUpTo { d_max },
        },
        note: NOTE,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rational;

    #[test]
    fn trivial_fits() {
        let lin: Vec<f64> = (1..=20).map(|r| r as f64).collect();
        let f = fit_recurrence(&lin, 2, 20).unwrap();
        assert!((f.coefficients[0] - 2.0).abs() < 1e-12 && (f.coefficients[1] + 1.0).abs() < 1e-12);
        assert!(f.residual < 1e-20);
        let pow: Vec<f64> = (1..=20).map(|r| 2f64.powi(r)).collect();
        let f = fit_recurrence(&pow, 1, 20).unwrap();
        assert!((f.coefficients[0] - 2.0).abs() < 1e-12 && f.residual < 1e-20);
        assert!(fit_recurrence(&vec![0.0; 20], 1, 20).is_err());
        assert!(fit_recurrence(&lin, 8, 20).is_err());
    }

    #[test]
    fn exact_fit_finds_fibonacci() {
        let mut fib = vec![rational(1, 1), rational(1, 1)];
        for i in 2..30 {
            let next = &fib[i - 1] + &fib[i - 2];
            fib.push(next);
        }
        assert_eq!(fit_recurrence_exact(&fib, 2), Some(vec![rational(1, 1), rational(1, 1)]));
        assert_eq!(fit_recurrence_exact(&fib, 1), None);
    }
}
