//! Truncated power series over any [`Scalar`] ring.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::point_counts::CountSequence;
use crate::scalar::{ln_abs_rational, Scalar};

/// Coefficients `c_0..=c_R` of a series truncated after `t^R`.
#[derive(Clone, Debug, PartialEq)]
pub struct PowerSeries<T> {
    coeffs: Vec<T>,
}

impl<T: Scalar> PowerSeries<T> {
    pub fn new(coeffs: Vec<T>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::invalid("power series needs at least a constant term"));
        }
        Ok(Self { coeffs })
    }

    pub fn zero(order: usize) -> Self {
        Self { coeffs: vec![T::zero(); order + 1] }
    }

    pub fn one(order: usize) -> Self {
        let mut s = Self::zero(order);
        s.coeffs[0] = T::one();
        s
    }

    /// The series `t`.
    pub fn variable(order: usize) -> Self {
        let mut s = Self::zero(order);
        if order >= 1 {
            s.coeffs[1] = T::one();
        }
        s
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn coeff(&self, n: usize) -> T {
        self.coeffs.get(n).cloned().unwrap_or_else(T::zero)
    }

    pub fn into_coeffs(self) -> Vec<T> {
        self.coeffs
    }

    pub fn truncate(&self, order: usize) -> Self {
        let mut coeffs: Vec<T> = self.coeffs.iter().take(order + 1).cloned().collect();
        coeffs.resize(order + 1, T::zero());
        Self { coeffs }
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.order().min(other.order());
        let coeffs = (0..=n)
            .map(|i| self.coeffs[i].clone() + other.coeffs[i].clone())
            .collect();
        Self { coeffs }
    }

    pub fn scale(&self, c: &T) -> Self {
        Self { coeffs: self.coeffs.iter().map(|x| x.clone() * c.clone()).collect() }
    }

    /// Cauchy product, truncated to the smaller of the two orders.
    pub fn mul(&self, other: &Self) -> Self {
        let n = self.order().min(other.order());
        let mut coeffs = vec![T::zero(); n + 1];
        for (i, a) in self.coeffs.iter().enumerate().take(n + 1) {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate().take(n + 1 - i) {
                coeffs[i + j] = coeffs[i + j].clone() + a.clone() * b.clone();
            }
        }
        Self { coeffs }
    }

    /// `exp(s)` through `(exp s)' = s' exp s`, i.e.
    /// `n e_n = sum_{k=1}^n k s_k e_{n-k}`.
    pub fn exp(&self) -> Result<Self> {
        if !self.coeffs[0].is_zero() {
            return Err(Error::invalid("series_exp needs a zero constant term"));
        }
        let r = self.order();
        let mut e = vec![T::zero(); r + 1];
        e[0] = T::one();
        for n in 1..=r {
            let mut acc = T::zero();
            for k in 1..=n {
                if self.coeffs[k].is_zero() {
                    continue;
                }
                acc = acc + from_usize::<T>(k) * self.coeffs[k].clone() * e[n - k].clone();
            }
            e[n] = acc / from_usize::<T>(n);
        }
        Ok(Self { coeffs: e })
    }

    /// `log(s)` for constant term 1, through `s l' = s'`.
    pub fn log(&self) -> Result<Self> {
        if !self.coeffs[0].is_one() {
            return Err(Error::invalid("series_log needs constant term 1"));
        }
        let r = self.order();
        let mut l = vec![T::zero(); r + 1];
        for n in 1..=r {
            let mut acc = from_usize::<T>(n) * self.coeffs[n].clone();
            for k in 1..n {
                acc = acc - from_usize::<T>(k) * l[k].clone() * self.coeffs[n - k].clone();
            }
            l[n] = acc / from_usize::<T>(n);
        }
        Ok(Self { coeffs: l })
    }
}

fn from_usize<T: Scalar>(n: usize) -> T {
    T::from_usize(n).expect("index representable in the coefficient ring")
}

pub type RealPowerSeries = PowerSeries<f64>;

impl PowerSeries<f64> {
    /// Like [`PowerSeries::new`] but rejects NaN/Inf entries.
    pub fn real(coeffs: Vec<f64>) -> Result<Self> {
        if let Some(i) = coeffs.iter().position(|c| !c.is_finite()) {
            return Err(Error::invalid(format!("coefficient {i} is not finite")));
        }
        Self::new(coeffs)
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * t + c)
    }
}

/// `sum_{r>=1} log|N_r| t^r / r`, truncated at `order`.
pub fn log_count_series(counts: &CountSequence, order: usize) -> Result<RealPowerSeries> {
    if counts.values.len() < order {
        return Err(Error::invalid(format!(
            "need {order} counts, have {}",
            counts.values.len()
        )));
    }
    let mut c = vec![0.0; order + 1];
    for r in 1..=order {
        let n = &counts.values[r - 1];
        if n <= &num_rational::BigRational::from_integer(0.into()) {
            return Err(Error::NonPositiveCount { index: r, value: n.to_string() });
        }
        c[r] = ln_abs_rational(n) / r as f64;
    }
    RealPowerSeries::real(c)
}

/// `Z_log = exp(sum log N_r t^r / r)` as a truncated series. All counts must
/// be positive.
pub fn zlog_series(counts: &CountSequence, order: usize) -> Result<RealPowerSeries> {
    log_count_series(counts, order)?.exp()
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct RadiusEstimate {
    pub radius: f64,
    pub lower: f64,
    pub upper: f64,
    /// Plain `1 / max |c_r|^{1/r}` over the tail half, for comparison.
    pub root_test: f64,
}

/// Radius of convergence from the tail half of the coefficients.
///
/// The plain root test converges very slowly for series like
/// `exp(c t/(1-t))`, whose coefficients grow like `e^{2 sqrt(c n)}`. So the
/// estimate fits `log|c_n| ~ n A + B sqrt(n) + C log n + D` over the tail and
/// reports `e^{-A}`. The band comes from refitting on each half of the
/// window.
pub fn radius_estimate(s: &RealPowerSeries) -> Result<RadiusEstimate> {
    let r = s.order();
    if r < 32 {
        return Err(Error::invalid("radius_estimate needs order >= 32"));
    }
    let tail: Vec<(f64, f64)> = (r / 2..=r)
        .filter(|&n| n > 0 && s.coeffs[n] != 0.0)
        .map(|n| (n as f64, s.coeffs[n].abs().ln()))
        .collect();
    if tail.is_empty() {
        return Ok(RadiusEstimate {
            radius: f64::INFINITY,
            lower: f64::INFINITY,
            upper: f64::INFINITY,
            root_test: f64::INFINITY,
        });
    }
    let root_max = tail.iter().map(|(n, l)| l / n).fold(f64::NEG_INFINITY, f64::max);
    let root_test = (-root_max).exp();
    if tail.len() < 12 {
        return Ok(RadiusEstimate { radius: root_test, lower: root_test, upper: root_test, root_test });
    }
    let full = fit_growth(&tail);
    let mid = tail.len() / 2;
    let a = fit_growth(&tail[..mid]);
    let b = fit_growth(&tail[mid..]);
    let lower = full.min(a).min(b);
    let upper = full.max(a).max(b);
    Ok(RadiusEstimate { radius: full, lower, upper, root_test })
}

fn fit_growth(points: &[(f64, f64)]) -> f64 {
    let m = points.len();
    let n_max = points.iter().map(|p| p.0).fold(1.0, f64::max);
    // columns scaled to comparable size for conditioning
    let a = DMatrix::from_fn(m, 4, |i, j| {
        let n = points[i].0;
        match j {
            0 => n / n_max,
            1 => (n / n_max).sqrt(),
            2 => n.ln() / n_max.ln(),
            _ => 1.0,
        }
    });
    let y = DVector::from_iterator(m, points.iter().map(|p| p.1));
    let svd = a.svd(true, true);
    match svd.solve(&y, 1e-14) {
        Ok(c) => (-(c[0] / n_max)).exp(),
        Err(_) => f64::NAN,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;
    use num_traits::Zero;

    #[test]
    fn exp_of_variable_is_factorial_series() {
        let e = RealPowerSeries::variable(6).exp().unwrap();
        let mut f = 1.0;
        for n in 0..=6 {
            if n > 0 {
                f *= n as f64;
            }
            assert!((e.coeff(n) - 1.0 / f).abs() < 1e-15);
        }
    }

    #[test]
    fn exp_of_minus_log_one_minus_t_is_geometric() {
        let mut c = vec![0.0; 21];
        for (r, x) in c.iter_mut().enumerate().skip(1) {
            *x = 1.0 / r as f64;
        }
        let e = RealPowerSeries::real(c).unwrap().exp().unwrap();
        assert!(e.coeffs().iter().all(|x| (x - 1.0).abs() < 1e-13));
        assert_eq!(RealPowerSeries::zero(5).exp().unwrap(), RealPowerSeries::one(5));
    }

    #[test]
    fn exp_rejects_constant_term() {
        assert!(RealPowerSeries::one(3).exp().is_err());
        assert!(RealPowerSeries::zero(3).log().is_err());
    }

    #[test]
    fn exact_exp_log_round_trip() {
        let c: Vec<BigRational> = (0..12i64)
            .map(|i| if i == 0 { BigRational::zero() } else { crate::scalar::rational(i, i * i + 1) })
            .collect();
        let s = PowerSeries::new(c).unwrap();
        assert_eq!(s.exp().unwrap().log().unwrap(), s);
    }

    #[test]
    fn radius_of_simple_series() {
        let ones = RealPowerSeries::real(vec![1.0; 65]).unwrap();
        let est = radius_estimate(&ones).unwrap();
        assert!((est.radius - 1.0).abs() < 1e-9);
        let pow2 = RealPowerSeries::real((0..=64).map(|r| 2f64.powi(r)).collect()).unwrap();
        assert!((radius_estimate(&pow2).unwrap().radius - 0.5).abs() < 1e-9);
        let zeros = RealPowerSeries::one(40);
        assert!(radius_estimate(&zeros).unwrap().radius.is_infinite());
        assert!(radius_estimate(&RealPowerSeries::one(10)).is_err());
    }
}
