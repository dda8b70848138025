//! Analytic continuation of `log(1 - sum eps lambda^r)`-series: the
//! meromorphic `J~`, its path integral `I`, `F = exp(I/2)` and
//! `f = F F_conj`, plus full `Z_log` models built on top of them.

mod model;
mod poles;

pub use model::{ModelKind, PrefixTerm, ZlogModel};
pub use poles::{
    locate_weil_poles, monodromy_loop, residue_estimate, residue_estimate_with, MonodromyReport,
    ResidueReport,
};

use std::f64::consts::PI;
use std::str::FromStr;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::expansion::LevelExpansion;
use crate::motive_data::{levels_for_radius, select_truncation, SpectralData, TruncationParams};
use crate::quadrature::{fmt_c, integrate_segment, DEFAULT_TOL};

/// Inside this radius `J~` is summed from its Taylor series.
pub const SERIES_RADIUS: f64 = 0.5;
/// Default distance kept between a path and the divisor support.
pub const DEFAULT_CLEARANCE: f64 = 1e-3;
/// Points closer than this to a pole are refused.
pub const POLE_GUARD: f64 = 1e-6;

/// Parse `a+bi`, `a-bi`, `a`, `bi`, `-i`, ...
pub fn parse_complex(s: &str) -> Result<Complex64> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || Error::invalid(format!("bad complex number {s:?}"));
    if t.is_empty() {
        return Err(bad());
    }
    let Some(body) = t.strip_suffix('i') else {
        return t.parse::<f64>().map(|re| Complex64::new(re, 0.0)).map_err(|_| bad());
    };
    // split at the last sign that is not part of an exponent
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(i) => (&body[..i], &body[i..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        x => x.parse::<f64>().map_err(|_| bad())?,
    };
    Ok(Complex64::new(re.parse::<f64>().map_err(|_| bad())?, im))
}

/// A polyline starting at the origin.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PathSpec {
    pub vertices: Vec<Complex64>,
    pub clearance: f64,
}

impl PathSpec {
    pub fn new(vertices: Vec<Complex64>, clearance: f64) -> Result<Self> {
        if vertices.first() != Some(&Complex64::new(0.0, 0.0)) {
            return Err(Error::invalid("a path must start at 0"));
        }
        if !(clearance > 0.0) {
            return Err(Error::invalid("clearance must be positive"));
        }
        if vertices.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid("consecutive path vertices must differ"));
        }
        if vertices.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::invalid("path vertices must be finite"));
        }
        Ok(Self { vertices, clearance })
    }

    /// The straight path from 0 to `z` (just `[0]` for `z = 0`).
    pub fn straight(z: Complex64) -> Self {
        let mut vertices = vec![Complex64::new(0.0, 0.0)];
        if z != vertices[0] {
            vertices.push(z);
        }
        Self { vertices, clearance: DEFAULT_CLEARANCE }
    }

    pub fn with_clearance(mut self, clearance: f64) -> Self {
        self.clearance = clearance;
        self
    }

    pub fn end(&self) -> Complex64 {
        *self.vertices.last().expect("paths are non-empty")
    }

    pub fn max_abs(&self) -> f64 {
        self.vertices.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn length(&self) -> f64 {
        self.vertices.windows(2).map(|w| (w[1] - w[0]).norm()).sum()
    }

    /// Smallest distance from the path to `p`.
    pub fn distance_to(&self, p: Complex64) -> f64 {
        if self.vertices.len() == 1 {
            return (self.vertices[0] - p).norm();
        }
        self.vertices
            .windows(2)
            .map(|w| {
                let d = w[1] - w[0];
                let s = (((p - w[0]) * d.conj()).re / d.norm_sqr()).clamp(0.0, 1.0);
                (w[0] + d * s - p).norm()
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Refuses paths passing within the clearance of any point.
    pub fn check_clearance(&self, points: &[Complex64]) -> Result<()> {
        for &p in points {
            let d = self.distance_to(p);
            if d < self.clearance {
                return Err(Error::TooCloseToSupport { point: fmt_c(p), distance: d });
            }
        }
        Ok(())
    }
}

impl FromStr for PathSpec {
    type Err = Error;

    /// `;`-separated vertices; a leading `0` is added when missing.
    fn from_str(s: &str) -> Result<Self> {
        let mut vertices = vec![Complex64::new(0.0, 0.0)];
        for part in s.split(';').map(str::trim).filter(|p| !p.is_empty()) {
            let v = parse_complex(part)?;
            if v != *vertices.last().unwrap() {
                vertices.push(v);
            }
        }
        Self::new(vertices, DEFAULT_CLEARANCE)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ContinuationResult {
    pub value: Complex64,
    /// The logarithm accumulated along the path.
    pub branch_offset: Complex64,
    pub error_estimate: f64,
}

/// `J~` and friends for one data set, truncated for `|z| <= radius`.
#[derive(Clone, Debug)]
pub struct Engine {
    data: SpectralData,
    trunc: TruncationParams,
    expansion: LevelExpansion,
    radius: f64,
    half_log: Complex64,
    /// `a_r = log(1 - sum eps lambda^r)` for `r0 <= r < r0 + taylor.len()`.
    taylor: Vec<Complex64>,
    rho: f64,
}

impl Engine {
    pub fn new(data: &SpectralData, k: f64, radius: f64) -> Result<Self> {
        let mut trunc = select_truncation(data, k)?;
        let radius = radius.max(1.0);
        trunc.l_max = levels_for_radius(data, trunc.r0, radius)?;
        Self::with_params(data, trunc, radius)
    }

    pub fn with_params(data: &SpectralData, trunc: TruncationParams, radius: f64) -> Result<Self> {
        let expansion = LevelExpansion::build(data, trunc.l_max)?;
        let r0 = trunc.r0;
        let a = |r: usize| (1.0 - data.power_sum(Complex64::new(r as f64, 0.0))).ln();
        let mu = data.max_lambda();
        let scale = data.max_eps() * data.len() as f64 * 2.0;
        let mut taylor = Vec::new();
        if !data.is_empty() {
            let mut r = r0;
            while taylor.len() < 4000 {
                taylor.push(a(r));
                if scale * (mu * SERIES_RADIUS).powi(r as i32) < 1e-19 {
                    break;
                }
                r += 1;
            }
        }
        Ok(Self {
            half_log: if data.is_empty() { Complex64::new(0.0, 0.0) } else { 0.5 * a(r0) },
            rho: data.level_ratio(r0),
            data: data.clone(),
            trunc,
            expansion,
            radius,
            taylor,
        })
    }

    pub fn data(&self) -> &SpectralData {
        &self.data
    }

    pub fn trunc(&self) -> &TruncationParams {
        &self.trunc
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn expansion(&self) -> &LevelExpansion {
        &self.expansion
    }

    /// Poles of `J~` (the support of `D`) with `|z| <= radius`, with their
    /// coefficients.
    pub fn poles(&self) -> Vec<(Complex64, f64)> {
        self.expansion.poles_within(self.radius).into_iter().map(|(z, t)| (z, t.coef)).collect()
    }

    /// Poles of `J~` and of its conjugate counterpart (the support of `E`).
    pub fn poles_with_mirror(&self) -> Vec<Complex64> {
        let mut out: Vec<Complex64> = Vec::new();
        for (z, _) in self.poles() {
            for p in [z, z.conj()] {
                if !out.iter().any(|o| (o - p).norm() < 1e-9) {
                    out.push(p);
                }
            }
        }
        out
    }

    /// Bound on the omitted levels at `|z|`.
    pub fn tail_bound(&self, z_abs: f64) -> f64 {
        if self.data.is_empty() {
            return 0.0;
        }
        let l = self.trunc.l_max as i32;
        1.5 * z_abs.max(1.0).powi(self.trunc.r0 as i32) * self.rho.powi(l + 1)
            / ((l + 1) as f64 * (1.0 - self.rho))
    }

    fn check_radius(&self, z: Complex64) -> Result<()> {
        if z.norm() > self.radius * (1.0 + 1e-12) {
            return Err(Error::invalid(format!(
                "|z| = {} exceeds the truncation radius {}",
                z.norm(),
                self.radius
            )));
        }
        Ok(())
    }

    /// `sum_{r >= r0} a_r z^r` for `|z| <= SERIES_RADIUS`.
    pub fn j_series(&self, z: Complex64) -> Complex64 {
        let zr0 = z.powu(self.trunc.r0 as u32);
        self.taylor.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, a| acc * z + a) * zr0
    }

    /// `J~(z)/z` near the origin, `sum a_r z^{r-1}`.
    fn j_over_z_series(&self, z: Complex64) -> Complex64 {
        let zr = z.powu(self.trunc.r0 as u32 - 1);
        self.taylor.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, a| acc * z + a) * zr
    }

    /// `sum a_r z^r / r`: the path integral of `J~(w)/w` from 0 to `z`.
    fn i_series(&self, z: Complex64) -> Complex64 {
        let r0 = self.trunc.r0;
        let mut acc = Complex64::new(0.0, 0.0);
        let mut zr = z.powu(r0 as u32);
        for (i, a) in self.taylor.iter().enumerate() {
            acc += a * zr / (r0 + i) as f64;
            zr *= z;
        }
        acc
    }

    /// `J~` from the closed-form `j`-sum, without proximity checks.
    fn j_closed(&self, z: Complex64) -> Complex64 {
        let r0 = self.trunc.r0 as u32;
        let mut acc = self.half_log * z.powu(r0);
        for t in &self.expansion.terms {
            let v = t.lambda * z;
            acc += t.coef * v.powu(r0) * (v + 1.0) / (2.0 * (v - 1.0));
        }
        acc
    }

    fn nearest_pole(&self, z: Complex64) -> Option<(Complex64, f64)> {
        self.expansion
            .terms
            .iter()
            .map(|t| Complex64::new(1.0, 0.0) / t.lambda)
            .map(|p| (p, (p - z).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
    }

    /// `J~(z)`, the meromorphic continuation of `sum_{r>=r0} a_r z^r`.
    pub fn j_tilde(&self, z: Complex64) -> Result<Complex64> {
        self.check_radius(z)?;
        if let Some((p, d)) = self.nearest_pole(z) {
            if d < POLE_GUARD {
                return Err(Error::TooCloseToSupport { point: fmt_c(p), distance: d });
            }
        }
        Ok(self.j_unchecked(z))
    }

    fn j_unchecked(&self, z: Complex64) -> Complex64 {
        if z.norm() <= SERIES_RADIUS {
            self.j_series(z)
        } else {
            self.j_closed(z)
        }
    }

    /// `J~` of the conjugate data, `conj(J~(conj z))`.
    pub fn j_tilde_conj(&self, z: Complex64) -> Result<Complex64> {
        self.j_tilde(z.conj()).map(|v| v.conj())
    }

    /// `J~` with the literal symmetric `j`-sum `|j| <= j_max` and an explicit
    /// branch of `log z`; the result does not depend on the branch.
    pub fn j_tilde_branch(&self, z: Complex64, branch_log: Complex64, j_max: usize) -> Result<Complex64> {
        if (branch_log.exp() - z).norm() > 1e-9 * z.norm().max(1.0) {
            return Err(Error::invalid("exp(branch_log) does not match z"));
        }
        self.j_tilde(z)?;
        let r0 = self.trunc.r0 as f64;
        let mut acc = self.half_log * (r0 * branch_log).exp();
        for t in &self.expansion.terms {
            let x = t.lambda.ln() + branch_log;
            let mut s = Complex64::new(0.0, 0.0);
            for j in (1..=j_max as i64).rev() {
                let shift = Complex64::new(0.0, 2.0 * PI * j as f64);
                s += 1.0 / (x + shift) + 1.0 / (x - shift);
            }
            s += 1.0 / x;
            acc += t.coef * (r0 * x).exp() * s;
        }
        Ok(acc)
    }

    /// `T(w) = J~(e^{-w})`, the continuation of `sum_{r>=r0} a_r e^{-wr}`.
    pub fn eval_t(&self, w: Complex64) -> Result<Complex64> {
        self.j_tilde((-w).exp())
    }

    /// `T(w)` from the literal triple sum with `|j| <= j_max`.
    pub fn eval_t_literal(&self, w: Complex64, j_max: usize) -> Result<Complex64> {
        let z = (-w).exp();
        self.j_tilde_branch(z, -w, j_max)
    }

    /// Integrand `J~(w)/w`, summed from the series near 0.
    pub(crate) fn j_over_z(&self, z: Complex64) -> Complex64 {
        if z.norm() <= SERIES_RADIUS {
            self.j_over_z_series(z)
        } else {
            self.j_closed(z) / z
        }
    }

    /// `(J~(u) + J~_conj(u)) / (2u)`, the single-valued log-derivative of `f`.
    pub fn half_j_over_u(&self, u: Complex64) -> Complex64 {
        if u.norm() <= SERIES_RADIUS {
            let zr = u.powu(self.trunc.r0 as u32 - 1);
            return self.taylor.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, a| acc * u + a.re)
                * zr;
        }
        0.5 * (self.j_closed(u) + self.j_closed(u.conj()).conj()) / u
    }

    /// `log f(u) = sum Re(a_r) u^r / r` for `|u| <= SERIES_RADIUS`.
    pub fn log_f_series(&self, u: Complex64) -> Complex64 {
        let r0 = self.trunc.r0;
        let mut acc = Complex64::new(0.0, 0.0);
        let mut ur = u.powu(r0 as u32);
        for (i, a) in self.taylor.iter().enumerate() {
            acc += a.re * ur / (r0 + i) as f64;
            ur *= u;
        }
        acc
    }

    /// `(I, I_conj, error)` along a path: `I = int_0^z J~(w)/w dw` and the
    /// same for the conjugate data.
    fn integrals(&self, path: &PathSpec) -> Result<(Complex64, Complex64, f64)> {
        if path.max_abs() > self.radius * (1.0 + 1e-12) {
            return Err(Error::invalid("path leaves the truncation radius"));
        }
        let poles = self.poles_with_mirror();
        path.check_clearance(&poles)?;
        let pieces = split_at_series_radius(path);
        let mut i = self.i_series(pieces.start);
        let mut ic = self.i_series(pieces.start.conj()).conj();
        let mut err = 0.0;
        for (a, b) in pieces.segments {
            let r = integrate_segment(|w| self.j_over_z(w), a, b, DEFAULT_TOL)?;
            let rc = integrate_segment(|w| self.j_over_z(w.conj()).conj(), a, b, DEFAULT_TOL)?;
            i += r.value;
            ic += rc.value;
            err += r.error + rc.error;
        }
        err += 2.0 * path.length() / SERIES_RADIUS * self.tail_bound(path.max_abs());
        Ok((i, ic, err))
    }

    /// `I^U(z) = int_gamma J~(w)/w dw`.
    pub fn integrate_i(&self, path: &PathSpec) -> Result<ContinuationResult> {
        let (i, _, err) = self.integrals(path)?;
        Ok(ContinuationResult { value: i, branch_offset: i, error_estimate: err })
    }

    /// `F = exp(I/2)`.
    pub fn eval_big_f(&self, path: &PathSpec) -> Result<ContinuationResult> {
        let (i, _, err) = self.integrals(path)?;
        let value = (0.5 * i).exp();
        Ok(ContinuationResult { value, branch_offset: 0.5 * i, error_estimate: 0.5 * err * value.norm() })
    }

    /// `f = F F_conj = exp((I + I_conj)/2)`.
    pub fn eval_f(&self, path: &PathSpec) -> Result<ContinuationResult> {
        let (i, ic, err) = self.integrals(path)?;
        let log = 0.5 * (i + ic);
        let value = log.exp();
        Ok(ContinuationResult { value, branch_offset: log, error_estimate: 0.5 * err * value.norm() })
    }
}

struct PathPieces {
    /// Where the Taylor part ends.
    start: Complex64,
    segments: Vec<(Complex64, Complex64)>,
}

/// The first leg inside `|z| <= SERIES_RADIUS` is handled by series; the rest
/// by quadrature.
fn split_at_series_radius(path: &PathSpec) -> PathPieces {
    let v = &path.vertices;
    if v.len() == 1 {
        return PathPieces { start: v[0], segments: Vec::new() };
    }
    let first = v[1];
    let (start, mut segments) = if first.norm() <= SERIES_RADIUS {
        (first, Vec::new())
    } else {
        let p = first * (SERIES_RADIUS / first.norm());
        (p, vec![(p, first)])
    };
    for w in v[1..].windows(2) {
        segments.push((w[0], w[1]));
    }
    PathPieces { start, segments }
}

/// Convenience wrappers taking the data directly.
pub fn eval_t(w: Complex64, data: &SpectralData, k: f64) -> Result<Complex64> {
    Engine::new(data, k, (-w.re).exp().max(1.0))?.eval_t(w)
}

pub fn eval_j_tilde(z: Complex64, branch_log: Complex64, data: &SpectralData, k: f64) -> Result<Complex64> {
    let e = Engine::new(data, k, z.norm())?;
    if (branch_log.exp() - z).norm() > 1e-9 * z.norm().max(1.0) {
        return Err(Error::invalid("exp(branch_log) does not match z"));
    }
    e.j_tilde(z)
}

pub fn integrate_i(path: &PathSpec, data: &SpectralData, k: f64) -> Result<ContinuationResult> {
    Engine::new(data, k, path.max_abs())?.integrate_i(path)
}

pub fn eval_big_f(path: &PathSpec, data: &SpectralData, k: f64) -> Result<ContinuationResult> {
    Engine::new(data, k, path.max_abs())?.eval_big_f(path)
}

pub fn eval_f(path: &PathSpec, data: &SpectralData, k: f64) -> Result<ContinuationResult> {
    Engine::new(data, k, path.max_abs())?.eval_f(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::motive_data::DEFAULT_K;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn half() -> SpectralData {
        SpectralData::from_tuples(&[(1, 1, 0.5, 0.0)]).unwrap()
    }

    fn oracle_j(z: Complex64) -> Complex64 {
        (2..2000).map(|r| (1.0 - 0.5f64.powi(r)).ln() * z.powi(r)).sum()
    }

    #[test]
    fn complex_parsing() {
        assert_eq!(parse_complex("1+0.3i").unwrap(), c(1.0, 0.3));
        assert_eq!(parse_complex("2-i").unwrap(), c(2.0, -1.0));
        assert_eq!(parse_complex("-0.25+0.2i").unwrap(), c(-0.25, 0.2));
        assert_eq!(parse_complex("1e-3-2e-2i").unwrap(), c(1e-3, -2e-2));
        assert_eq!(parse_complex("-3").unwrap(), c(-3.0, 0.0));
        assert_eq!(parse_complex("i").unwrap(), c(0.0, 1.0));
        assert!(parse_complex("x").is_err());
        let p: PathSpec = "1.5+i;-3".parse().unwrap();
        assert_eq!(p.vertices, vec![c(0.0, 0.0), c(1.5, 1.0), c(-3.0, 0.0)]);
    }

    #[test]
    fn j_tilde_matches_power_series() {
        let e = Engine::new(&half(), DEFAULT_K, 4.0).unwrap();
        for z in [c(0.3, 0.0), c(0.7, 0.1), c(-0.9, 0.2)] {
            assert!((e.j_closed(z) - oracle_j(z)).norm() < 1e-12, "{z}");
            assert!((e.j_tilde(z).unwrap() - oracle_j(z)).norm() < 1e-12);
        }
        assert!(e.j_tilde(c(1e-8, 0.0)).unwrap().norm() < 1e-15);
        assert!(e.j_tilde(c(2.0, 0.0)).is_err());
    }

    #[test]
    fn branch_independence_and_literal_sum() {
        let e = Engine::new(&half(), DEFAULT_K, 4.0).unwrap();
        let z = c(3.0, 0.0);
        let closed = e.j_tilde(z).unwrap();
        let l0 = z.ln();
        for shift in [0.0, 2.0 * PI, -4.0 * PI] {
            let v = e.j_tilde_branch(z, l0 + c(0.0, shift), 200_000).unwrap();
            assert!((v - closed).norm() < 1e-4 * closed.norm().max(1.0), "{v} {closed}");
        }
    }

    #[test]
    fn integral_near_origin() {
        let e = Engine::new(&half(), DEFAULT_K, 1.0).unwrap();
        let z = c(0.3, 0.0);
        let want: f64 = (2..200).map(|r| (1.0 - 0.5f64.powi(r)).ln() * 0.3f64.powi(r) / r as f64).sum();
        let got = e.integrate_i(&PathSpec::straight(z)).unwrap();
        assert!((got.value.re - want).abs() < 1e-14);
        let zero = e.eval_f(&PathSpec::straight(c(0.0, 0.0))).unwrap();
        assert_eq!(zero.value, c(1.0, 0.0));
        // the quadrature leg agrees with the series leg
        let bent = PathSpec::new(vec![c(0.0, 0.0), c(0.2, 0.2), c(0.45, -0.1), z], 1e-3).unwrap();
        let direct = e.integrate_i(&PathSpec::straight(c(0.9, 0.0))).unwrap().value;
        let long = PathSpec::new(vec![c(0.0, 0.0), c(0.6, 0.5), c(0.9, 0.0)], 1e-3).unwrap();
        assert!((e.integrate_i(&long).unwrap().value - direct).norm() < 1e-11);
        assert!((e.integrate_i(&bent).unwrap().value.re - want).abs() < 1e-12);
    }
}
