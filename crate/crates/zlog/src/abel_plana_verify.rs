//! Numerical checks of the Abel–Plana identities behind the continuation:
//! the classical formula, its box variant and the closed series for each
//! boundary integral.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::expansion::raw_terms;
use crate::motive_data::{select_truncation, SpectralData};
use crate::quadrature::{integrate_real, integrate_segment, QuadResult};
use crate::scalar::rational_to_f64;

/// Lower end of the `y`-range for the `H` integrals; the `j`-sums converge
/// like `e^{-2 pi j y}`.
pub const H_EPSILON: f64 = 0.1;
const SERIES_TAIL: f64 = 1e-16;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `h(r) = log(1 - sum eps lambda^r) e^{-w r}` on the box `Re r >= r0`,
/// `|Im r| <= K`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoxFunction {
    pub data: SpectralData,
    pub w: Complex64,
    pub r0: usize,
    pub k: f64,
}

impl BoxFunction {
    pub fn new(data: &SpectralData, w: Complex64, k: f64) -> Result<Self> {
        let r0 = select_truncation(data, k)?.r0;
        Ok(Self { data: data.clone(), w, r0, k })
    }

    pub fn eval(&self, r: Complex64) -> Complex64 {
        if self.data.is_empty() {
            return c(0.0, 0.0);
        }
        (1.0 - self.data.power_sum(r)).ln() * (-self.w * r).exp()
    }

    /// `sum |eps| |lambda|^x e^{|y| |arg lambda|}`, which dominates
    /// `|sum eps lambda^r|` at `Re r >= x`, `|Im r| <= y`.
    fn majorant(&self, x: f64, y: f64) -> f64 {
        self.data
            .items
            .iter()
            .map(|d| d.eps_f64().abs() * d.lambda.norm().powf(x) * (y.abs() * d.lambda.arg().abs()).exp())
            .sum()
    }

    /// `(C_k - w, m(k))` for enough levels that the omitted ones are below
    /// `SERIES_TAIL` on `Re r >= x`, `|Im r| <= y`.
    fn terms(&self, x: f64, y: f64) -> Result<Vec<(Complex64, f64)>> {
        if self.data.is_empty() {
            return Ok(Vec::new());
        }
        let q = self.majorant(x, y);
        if q >= 0.5 {
            return Err(Error::invalid("the box leaves the region where the level series converges"));
        }
        let levels = (1..=512).find(|&l| q.powi(l as i32 + 1) / (1.0 - q) < SERIES_TAIL).unwrap_or(512);
        Ok(raw_terms(&self.data, levels)?
            .into_iter()
            .map(|t| (t.log - self.w, rational_to_f64(&t.coef)))
            .collect())
    }

    fn check_window(&self, a: f64) -> Result<()> {
        if a < self.r0 as f64 - 1e-12 {
            return Err(Error::invalid(format!("a = {a} lies left of r0 = {}", self.r0)));
        }
        Ok(())
    }

    /// Point beyond which `int |h|` along `Re r` at height `y` is below `tol`.
    fn cutoff(&self, a: f64, y: f64, tol: f64) -> Result<f64> {
        if self.data.is_empty() {
            return Ok(a + 1.0);
        }
        let nu = self.data.items.iter().map(|d| -d.lambda.norm().ln()).fold(f64::INFINITY, f64::min);
        let decay = nu + self.w.re;
        if !(decay > 0.0) {
            return Err(Error::invalid("the integrand does not decay; need Re w > -min log|1/lambda|"));
        }
        let bound = |x: f64| 2.0 * self.majorant(x, y) * (-self.w.re * x + y * self.w.im.abs()).exp() / decay;
        let mut b = a;
        while bound(b) > tol * 1e-2 {
            b += 1.0;
            if b > a + 1e5 {
                return Err(Error::Quadrature { from: a.to_string(), to: "inf".into() });
            }
        }
        Ok(b)
    }
}

/// `1/(1 - e^{-2 pi i s})` evaluated stably for `Im s > 0`.
fn upper_kernel(s: Complex64) -> Complex64 {
    let e = (c(0.0, 2.0 * PI) * s).exp();
    -e / (1.0 - e)
}

/// `1/(e^{2 pi i s} - 1)` evaluated stably for `Im s < 0`.
fn lower_kernel(s: Complex64) -> Complex64 {
    let e = (c(0.0, -2.0 * PI) * s).exp();
    e / (1.0 - e)
}

/// `1/(e^{2 pi y} - 1)`.
fn bose(y: f64) -> f64 {
    1.0 / (2.0 * PI * y).exp_m1()
}

/// Number of `j` with `e^{-2 pi j y}` above the series tail.
fn j_count(y: f64) -> usize {
    ((-(SERIES_TAIL * 1e-2).ln()) / (2.0 * PI * y)).ceil() as usize + 1
}

/// Adaptive quadrature on a segment.
pub fn quad_segment<F: Fn(Complex64) -> Complex64>(f: F, a: Complex64, b: Complex64, tol: f64) -> Result<QuadResult> {
    integrate_segment(f, a, b, tol)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoxTerms {
    pub half_ends: Complex64,
    pub real_axis: Complex64,
    pub vertical_a: Complex64,
    pub vertical_b: Complex64,
    pub top: Complex64,
    pub bottom: Complex64,
}

impl BoxTerms {
    pub fn total(&self) -> Complex64 {
        self.half_ends + self.real_axis + self.vertical_a + self.vertical_b + self.top + self.bottom
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationReport {
    pub kind: String,
    pub w: Complex64,
    pub a: f64,
    /// `None` stands for `+infinity`.
    pub b: Option<f64>,
    pub k: f64,
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub discrepancy: f64,
    pub truncation_points: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub terms: Option<BoxTerms>,
}

fn vertical(h: &BoxFunction, x: f64, tol: f64) -> Result<Complex64> {
    let r = integrate_real(
        |y| (h.eval(c(x, y)) - h.eval(c(x, -y))) * bose(y),
        0.0,
        h.k,
        tol,
    )?;
    Ok(c(0.0, 1.0) * r.value)
}

/// The seven-term box identity on `[a, b] x [-K, K]`; returns the terms of
/// the right-hand side.
pub fn box_terms(h: &BoxFunction, a: i64, b: i64, tol: f64) -> Result<BoxTerms> {
    let (af, bf) = (a as f64, b as f64);
    let k = h.k;
    let real = integrate_real(|x| h.eval(c(x, 0.0)), af, bf, tol)?.value;
    let top = integrate_segment(|s| h.eval(s) * upper_kernel(s), c(af, k), c(bf, k), tol)?.value;
    let bottom = integrate_segment(|s| h.eval(s) * lower_kernel(s), c(af, -k), c(bf, -k), tol)?.value;
    Ok(BoxTerms {
        half_ends: 0.5 * (h.eval(c(af, 0.0)) + h.eval(c(bf, 0.0))),
        real_axis: real,
        vertical_a: vertical(h, af, tol)?,
        vertical_b: -vertical(h, bf, tol)?,
        top: -top,
        bottom,
    })
}

/// `|sum_{r=a}^b h(r) - RHS|` for the box identity.
pub fn verify_box_identity(h: &BoxFunction, a: i64, b: i64, tol: f64) -> Result<VerificationReport> {
    if b <= a {
        return Err(Error::invalid("need a < b"));
    }
    h.check_window(a as f64)?;
    let lhs: Complex64 = (a..=b).map(|r| h.eval(c(r as f64, 0.0))).sum();
    let terms = box_terms(h, a, b, tol)?;
    let rhs = terms.total();
    Ok(VerificationReport {
        kind: "box".into(),
        w: h.w,
        a: a as f64,
        b: Some(b as f64),
        k: h.k,
        lhs,
        rhs,
        discrepancy: (lhs - rhs).norm(),
        truncation_points: Vec::new(),
        terms: Some(terms),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StepKind {
    VPlus,
    VMinus,
    RealAxis,
    HPlus,
    HMinus,
}

impl StepKind {
    pub fn name(&self) -> &'static str {
        match self {
            StepKind::VPlus => "v_plus",
            StepKind::VMinus => "v_minus",
            StepKind::RealAxis => "real_axis",
            StepKind::HPlus => "h_plus",
            StepKind::HMinus => "h_minus",
        }
    }
}

impl std::str::FromStr for StepKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "v_plus" => StepKind::VPlus,
            "v_minus" => StepKind::VMinus,
            "real_axis" => StepKind::RealAxis,
            "h_plus" => StepKind::HPlus,
            "h_minus" => StepKind::HMinus,
            _ => return Err(Error::invalid(format!("unknown integral kind {s:?}"))),
        })
    }
}

/// Closed series for one boundary integral; `b = None` is `+infinity`.
/// For the `H` kinds `a` is the abscissa `u` and `b` is ignored.
pub fn step_series(kind: StepKind, h: &BoxFunction, a: f64, b: Option<f64>) -> Result<Complex64> {
    let k = h.k;
    let i = c(0.0, 1.0);
    match kind {
        StepKind::RealAxis => {
            let terms = h.terms(a, 0.0)?;
            Ok(terms
                .iter()
                .map(|&(x, m)| {
                    let lower = (a * x).exp() / x;
                    match b {
                        None => m * lower,
                        Some(b) => -m * ((b * x).exp() / x - lower),
                    }
                })
                .sum())
        }
        StepKind::VPlus | StepKind::VMinus => {
            let sign = if kind == StepKind::VPlus { 1.0 } else { -1.0 };
            let terms = h.terms(a, k)?;
            let jn = j_count(k);
            let at = |s: Complex64| -> Complex64 {
                let mut acc = c(0.0, 0.0);
                for &(x, m) in &terms {
                    for j in 1..=jn {
                        let xj = x + sign * 2.0 * PI * j as f64 * i;
                        acc += m * (s * xj).exp() / xj;
                    }
                }
                sign * acc
            };
            let lower = at(c(a, sign * k));
            Ok(match b {
                None => -lower,
                Some(b) => at(c(b, sign * k)) - lower,
            })
        }
        StepKind::HPlus | StepKind::HMinus => {
            let sign = if kind == StepKind::HPlus { 1.0 } else { -1.0 };
            let terms = h.terms(a, k)?;
            let jn = j_count(H_EPSILON);
            let mut acc = c(0.0, 0.0);
            for &(x, m) in &terms {
                let pre = m * (a * x).exp();
                let mut s = c(0.0, 0.0);
                for j in 1..=jn {
                    let e = sign * i * x - 2.0 * PI * j as f64;
                    let d = x + sign * 2.0 * PI * j as f64 * i;
                    s += ((k * e).exp() - (H_EPSILON * e).exp()) / d;
                }
                acc -= pre * s;
            }
            Ok(acc)
        }
    }
}

/// The defining integral by quadrature, with the truncation point used for
/// an infinite upper limit.
pub fn step_quadrature(kind: StepKind, h: &BoxFunction, a: f64, b: Option<f64>, tol: f64) -> Result<(Complex64, Option<f64>)> {
    let k = h.k;
    let i = c(0.0, 1.0);
    let upper = |y: f64| -> Result<(f64, Option<f64>)> {
        match b {
            Some(b) => Ok((b, None)),
            None => {
                let cut = h.cutoff(a, y, tol)?;
                Ok((cut, Some(cut)))
            }
        }
    };
    match kind {
        StepKind::RealAxis => {
            let (b, cut) = upper(0.0)?;
            Ok((integrate_real(|x| h.eval(c(x, 0.0)), a, b, tol)?.value, cut))
        }
        StepKind::VPlus => {
            let (b, cut) = upper(k)?;
            let v = integrate_segment(|s| h.eval(s) * upper_kernel(s), c(a, k), c(b, k), tol)?.value;
            Ok((v, cut))
        }
        StepKind::VMinus => {
            let (b, cut) = upper(k)?;
            let v = integrate_segment(|s| h.eval(s) * lower_kernel(s), c(a, -k), c(b, -k), tol)?.value;
            Ok((v, cut))
        }
        StepKind::HPlus | StepKind::HMinus => {
            let sign = if kind == StepKind::HPlus { 1.0 } else { -1.0 };
            let v = integrate_real(|y| h.eval(c(a, sign * y)) * bose(y), H_EPSILON, k, tol)?.value;
            Ok((sign * i * v, None))
        }
    }
}

/// Quadrature against closed series for one boundary integral.
pub fn verify_step_integrals(kind: StepKind, h: &BoxFunction, a: f64, b: Option<f64>, tol: f64) -> Result<VerificationReport> {
    h.check_window(a)?;
    if let Some(b) = b {
        if b <= a {
            return Err(Error::invalid("need a < b"));
        }
    } else if !(h.w.re > 0.0) && matches!(kind, StepKind::VPlus | StepKind::VMinus | StepKind::RealAxis) {
        return Err(Error::invalid("an infinite upper limit needs Re w > 0"));
    }
    let b = if matches!(kind, StepKind::HPlus | StepKind::HMinus) { None } else { b };
    let (quad, cut) = step_quadrature(kind, h, a, b, tol)?;
    let series = step_series(kind, h, a, b)?;
    Ok(VerificationReport {
        kind: kind.name().into(),
        w: h.w,
        a,
        b,
        k: h.k,
        lhs: quad,
        rhs: series,
        discrepancy: (quad - series).norm(),
        truncation_points: cut.into_iter().collect(),
        terms: None,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "test", rename_all = "snake_case")]
pub enum ClassicalTest {
    /// `h(s) = e^{-w s}`.
    ExpDecay { w: Complex64 },
    /// `h(s) = 1/(s+1)^2`.
    InverseSquare,
}

/// `sum_{n>=0} h(n)` in closed form against the classical Abel–Plana right
/// side `int_0^inf h + h(0)/2 + i int_0^inf (h(ib) - h(-ib))/(e^{2 pi b} - 1) db`.
pub fn verify_classical(test: ClassicalTest, tol: f64) -> Result<VerificationReport> {
    match test {
        ClassicalTest::ExpDecay { w } => {
            if !(w.re > 0.0) || w.im.abs() >= 2.0 * PI {
                return Err(Error::invalid("exp_decay needs Re w > 0 and |Im w| < 2 pi"));
            }
            let lhs = 1.0 / (1.0 - (-w).exp());
            let cut = (100.0 / tol).ln() / (2.0 * PI - w.im.abs());
            let tail = integrate_real(|b| 2.0 * (w * b).sin() * bose(b), 0.0, cut, tol * 1e-2)?.value;
            let rhs = 1.0 / w + 0.5 + tail;
            Ok(classical_report("exp_decay", w, lhs, rhs, cut))
        }
        ClassicalTest::InverseSquare => {
            let lhs = c(PI * PI / 6.0, 0.0);
            let cut = (100.0 / tol).ln() / (2.0 * PI);
            let tail = integrate_real(|b| c(4.0 * b / ((1.0 + b * b).powi(2)) * bose(b), 0.0), 0.0, cut, tol * 1e-2)?
                .value;
            Ok(classical_report("inverse_square", c(0.0, 0.0), lhs, 1.5 + tail, cut))
        }
    }
}

fn classical_report(kind: &str, w: Complex64, lhs: Complex64, rhs: Complex64, cut: f64) -> VerificationReport {
    VerificationReport {
        kind: kind.into(),
        w,
        a: 0.0,
        b: None,
        k: 0.0,
        lhs,
        rhs,
        discrepancy: (lhs - rhs).norm(),
        truncation_points: vec![cut],
        terms: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::motive_data::DEFAULT_K;

    fn half() -> SpectralData {
        SpectralData::from_tuples(&[(1, 1, 0.5, 0.0)]).unwrap()
    }

    #[test]
    fn classical_examples() {
        for w in [c(1.0, 0.0), c(2.0, 1.0)] {
            let r = verify_classical(ClassicalTest::ExpDecay { w }, 1e-12).unwrap();
            assert!(r.discrepancy < 1e-10, "{w}: {}", r.discrepancy);
        }
        assert!(verify_classical(ClassicalTest::InverseSquare, 1e-12).unwrap().discrepancy < 1e-9);
    }

    #[test]
    fn empty_box_is_exact() {
        let h = BoxFunction::new(&SpectralData::empty(), c(1.0, 0.0), DEFAULT_K).unwrap();
        assert_eq!(verify_box_identity(&h, 1, 4, 1e-12).unwrap().discrepancy, 0.0);
    }

    #[test]
    fn small_box() {
        let h = BoxFunction::new(&half(), c(2.0, 1.0), DEFAULT_K).unwrap();
        let r = verify_box_identity(&h, 2, 3, 1e-13).unwrap();
        assert!(r.discrepancy < 1e-9, "{}", r.discrepancy);
    }

    #[test]
    fn kernels_expand_as_geometric_series() {
        let s = c(0.3, 1.2);
        let direct = 1.0 / (1.0 - (c(0.0, -2.0 * PI) * s).exp());
        assert!((upper_kernel(s) - direct).norm() < 1e-14);
        let s = s.conj();
        let direct = 1.0 / ((c(0.0, 2.0 * PI) * s).exp() - 1.0);
        assert!((lower_kernel(s) - direct).norm() < 1e-14);
    }
}
