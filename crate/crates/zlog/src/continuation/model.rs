//! Full `Z_log` models: an explicit prefix, a finite polynomial for the
//! first few coefficients and the spectral part `(1/s) log f(t^s)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{ContinuationResult, Engine, PathSpec, SERIES_RADIUS};
use crate::error::{Error, Result};
use crate::motive_data::{
    ln_abs_count, select_truncation, spectral_from_weil, SpectralData, SpectralDatum, WeilNumberSet,
};
use crate::quadrature::{fmt_c, integrate_segment, DEFAULT_TOL};

/// Elementary closed-form pieces of `log Z_log`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum PrefixTerm {
    /// `c t^s / (1 - t^s)`.
    Pole { c: f64, s: u32 },
    /// `-b log(1 - t^s)`.
    Log1m { b: f64, s: u32 },
}

impl PrefixTerm {
    fn s(&self) -> u32 {
        match *self {
            PrefixTerm::Pole { s, .. } | PrefixTerm::Log1m { s, .. } => s,
        }
    }

    /// Coefficient of `t^n` (`n >= 1`).
    pub fn coefficient(&self, n: usize) -> f64 {
        let s = self.s() as usize;
        if n % s != 0 {
            return 0.0;
        }
        match *self {
            PrefixTerm::Pole { c, .. } => c,
            PrefixTerm::Log1m { b, .. } => b * s as f64 / n as f64,
        }
    }

    fn derivative(&self, t: Complex64) -> Complex64 {
        let s = self.s();
        let ts = t.powu(s);
        let dts = s as f64 * t.powu(s - 1);
        match *self {
            PrefixTerm::Pole { c, .. } => c * dts / ((1.0 - ts) * (1.0 - ts)),
            PrefixTerm::Log1m { b, .. } => b * dts / (1.0 - ts),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelKind {
    Abelian,
    Motive { m: u32 },
    LambdaN { n: u32, q: u64 },
    Affine { n: u32, q: u64 },
    Raw,
}

/// `log Z_log(t) = sum prefix(t) + poly(t) + (1/s) log f(t^s)`, where `f` is
/// the continuation built from `data` and `poly` carries the coefficients
/// below `t^{s r0}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ZlogModel {
    pub kind: ModelKind,
    pub data: SpectralData,
    pub power: u32,
    pub prefix: Vec<PrefixTerm>,
    /// Coefficients of `t^0 .. t^{s r0 - 1}`.
    pub poly: Vec<f64>,
    #[serde(skip)]
    pub weil: Option<WeilNumberSet>,
    pub q: Option<f64>,
    pub k: f64,
    pub r0: usize,
}

impl ZlogModel {
    fn assemble(
        kind: ModelKind,
        data: SpectralData,
        power: u32,
        prefix: Vec<PrefixTerm>,
        k: f64,
        count: impl Fn(usize) -> Result<f64>,
    ) -> Result<Self> {
        if power == 0 {
            return Err(Error::invalid("variable power must be >= 1"));
        }
        let r0 = select_truncation(&data, k)?.r0;
        let len = power as usize * r0;
        let mut poly = vec![0.0; len];
        for (n, slot) in poly.iter_mut().enumerate().skip(1) {
            let pre: f64 = prefix.iter().map(|p| p.coefficient(n)).sum();
            *slot = count(n)? / n as f64 - pre;
        }
        let q = data.base_q;
        Ok(Self { kind, data, power, prefix, poly, weil: None, q, k, r0 })
    }

    /// Abelian variety from its Weil numbers: prefix `g log q t/(1-t)`.
    pub fn abelian(weil: WeilNumberSet, k: f64) -> Result<Self> {
        if !weil.is_abelian() {
            return Err(Error::invalid("abelian model needs a characteristic polynomial"));
        }
        let g = weil.g() as u32;
        let sm = spectral_from_weil(&weil, g)?;
        let prefix = vec![PrefixTerm::Pole { c: sm.prefix, s: 1 }];
        let w = weil.clone();
        let mut model = Self::assemble(ModelKind::Abelian, sm.data, 1, prefix, k, |n| {
            ln_abs_count(&w.virtual_count(n)?)
        })?;
        model.weil = Some(weil);
        Ok(model)
    }

    /// Motive with unique top weight `q^m`.
    pub fn motive(weil: WeilNumberSet, m: u32, k: f64) -> Result<Self> {
        let sm = spectral_from_weil(&weil, m)?;
        let prefix = vec![PrefixTerm::Pole { c: sm.prefix, s: 1 }];
        let w = weil.clone();
        let mut model = Self::assemble(ModelKind::Motive { m }, sm.data, sm.power, prefix, k, |n| {
            let v = w.virtual_count(n)?;
            ln_abs_count(&v).map_err(|_| Error::NonPositiveCount { index: n, value: v.to_string() })
        })?;
        model.weil = Some(weil);
        Ok(model)
    }

    /// `Lambda_n = Z_log(A^n - {0})`, counts `q^{nr} - 1`.
    pub fn lambda_n(n: u32, q: u64, k: f64) -> Result<Self> {
        if n == 0 || q < 2 {
            return Err(Error::invalid("lambda_n needs n >= 1 and q >= 2"));
        }
        let lq = (q as f64).ln();
        let lambda = (q as f64).powi(-(n as i32));
        let data = SpectralData::new(vec![SpectralDatum::new(1.into(), Complex64::new(lambda, 0.0))?])
            .with_base_q(q as f64);
        let prefix = vec![PrefixTerm::Pole { c: n as f64 * lq, s: 1 }];
        Self::assemble(ModelKind::LambdaN { n, q }, data, 1, prefix, k, |r| {
            let x = (n as usize * r) as f64 * lq;
            Ok(x + (-(-x).exp()).ln_1p())
        })
    }

    /// Affine space `A^n`: `Z_log = q^{n t/(1-t)}`.
    pub fn affine(n: u32, q: u64, k: f64) -> Result<Self> {
        if q < 2 {
            return Err(Error::invalid("q must be >= 2"));
        }
        let data = SpectralData::empty().with_base_q(q as f64);
        let prefix = vec![PrefixTerm::Pole { c: n as f64 * (q as f64).ln(), s: 1 }];
        Self::assemble(ModelKind::Affine { n, q }, data, 1, prefix, k, |r| {
            Ok((n as usize * r) as f64 * (q as f64).ln())
        })
    }

    /// Arbitrary data in the variable `t^s`; the low coefficients come from
    /// the data itself.
    pub fn raw(data: SpectralData, prefix: Vec<PrefixTerm>, power: u32, k: f64) -> Result<Self> {
        if prefix.iter().any(|p| p.s() == 0) {
            return Err(Error::invalid("prefix power must be >= 1"));
        }
        let s = power.max(1) as usize;
        let d = data.clone();
        let pre = prefix.clone();
        Self::assemble(ModelKind::Raw, data, power, prefix, k, |n| {
            let mut v: f64 = pre.iter().map(|p| p.coefficient(n)).sum::<f64>() * n as f64;
            if n % s == 0 {
                let rho = n / s;
                let x = 1.0 - d.power_sum(Complex64::new(rho as f64, 0.0));
                if x.norm() == 0.0 {
                    return Err(Error::NonPositiveCount { index: n, value: "0".into() });
                }
                v += x.norm().ln();
            }
            Ok(v)
        })
    }

    /// The model `h^0 + h^1` of a supersingular elliptic curve over `F_p`
    /// with eigenvalues `+-sqrt p`: `|N_{2s}| = 2 p^s |1 - p^{-s}/2|`.
    pub fn supersingular_y(p: u64, k: f64) -> Result<Self> {
        let data = SpectralData::new(vec![SpectralDatum::new(
            num_rational::Rational64::new(1, 2),
            Complex64::new(1.0 / p as f64, 0.0),
        )?])
        .with_base_q(p as f64);
        let prefix = vec![
            PrefixTerm::Log1m { b: 0.5 * 2f64.ln(), s: 2 },
            PrefixTerm::Pole { c: 0.5 * (p as f64).ln(), s: 2 },
        ];
        Self::raw(data, prefix, 2, k)
    }

    pub fn engine(&self, t_radius: f64) -> Result<Engine> {
        Engine::new(&self.data, self.k, t_radius.max(1.0).powi(self.power as i32))
    }

    /// Coefficients of `log Z_log`, `t^1 .. t^len` (index 0 is `t^1`).
    pub fn log_coefficients(&self, len: usize) -> Vec<f64> {
        let s = self.power as usize;
        (1..=len)
            .map(|n| {
                if n < self.poly.len() {
                    return self.prefix.iter().map(|p| p.coefficient(n)).sum::<f64>() + self.poly[n];
                }
                let mut v: f64 = self.prefix.iter().map(|p| p.coefficient(n)).sum();
                if n % s == 0 {
                    let rho = n / s;
                    let x = 1.0 - self.data.power_sum(Complex64::new(rho as f64, 0.0));
                    v += x.norm().ln() / n as f64;
                }
                v
            })
            .collect()
    }

    /// Points of the `t`-plane where the model is singular: roots of unity of
    /// the prefix and the `s`-th roots of `supp E` within the engine radius.
    pub fn singularities(&self, eng: &Engine) -> Vec<Complex64> {
        let mut out: Vec<Complex64> = Vec::new();
        let mut push = |z: Complex64| {
            if !out.iter().any(|o| (o - z).norm() < 1e-12 * z.norm().max(1.0)) {
                out.push(z);
            }
        };
        for p in &self.prefix {
            let s = p.s();
            for j in 0..s {
                push(Complex64::from_polar(1.0, 2.0 * PI * j as f64 / s as f64));
            }
        }
        for u in self.spectral_singularities(eng) {
            push(u);
        }
        out
    }

    /// `s`-th roots of `supp E`.
    pub fn spectral_singularities(&self, eng: &Engine) -> Vec<Complex64> {
        let s = self.power;
        let mut out = Vec::new();
        for u in eng.poles_with_mirror() {
            let base = Complex64::from_polar(u.norm().powf(1.0 / s as f64), u.arg() / s as f64);
            for j in 0..s {
                out.push(base * Complex64::from_polar(1.0, 2.0 * PI * j as f64 / s as f64));
            }
        }
        out
    }

    fn poly_value(&self, t: Complex64) -> Complex64 {
        self.poly.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * t + c)
    }

    fn poly_derivative(&self, t: Complex64) -> Complex64 {
        self.poly
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, (n, c)| acc * t + c * n as f64)
    }

    /// Derivative of the spectral part, `J_sym(t^s)/t`.
    fn spectral_derivative(&self, eng: &Engine, t: Complex64) -> Complex64 {
        let s = self.power;
        eng.half_j_over_u(t.powu(s)) * t.powu(s - 1)
    }

    fn check_engine(&self, eng: &Engine) -> Result<()> {
        if eng.trunc().r0 != self.r0 || eng.data() != &self.data {
            return Err(Error::invalid("engine was built for different data"));
        }
        Ok(())
    }

    /// `Z_log` continued along `path`.
    pub fn eval_zlog(&self, path: &PathSpec) -> Result<ContinuationResult> {
        let eng = self.engine(path.max_abs())?;
        self.eval_zlog_with(&eng, path)
    }

    pub fn eval_zlog_with(&self, eng: &Engine, path: &PathSpec) -> Result<ContinuationResult> {
        self.check_engine(eng)?;
        let s = self.power;
        if path.max_abs().powi(s as i32) > eng.radius() * (1.0 + 1e-12) {
            return Err(Error::invalid("path leaves the truncation radius"));
        }
        path.check_clearance(&self.singularities(eng))?;
        let split = SERIES_RADIUS.powf(1.0 / s as f64);
        let v = &path.vertices;
        let mut log = Complex64::new(0.0, 0.0);
        let mut err = 0.0;
        let mut segments = Vec::new();
        let mut start = v[0];
        if v.len() > 1 {
            let first = v[1];
            start = if first.norm() <= split { first } else { first * (split / first.norm()) };
            if start != first {
                segments.push((start, first));
            }
            segments.extend(v[1..].windows(2).map(|w| (w[0], w[1])));
        }
        // closed forms on the first leg (inside the unit disc)
        log += eng.log_f_series(start.powu(s)) / s as f64;
        for p in &self.prefix {
            if let PrefixTerm::Log1m { b, s } = *p {
                log -= b * (1.0 - start.powu(s)).ln();
            }
        }
        for (a, b) in segments {
            let r = integrate_segment(
                |t| {
                    let mut g = self.spectral_derivative(eng, t);
                    for p in &self.prefix {
                        if matches!(p, PrefixTerm::Log1m { .. }) {
                            g += p.derivative(t);
                        }
                    }
                    g
                },
                a,
                b,
                DEFAULT_TOL,
            )?;
            log += r.value;
            err += r.error;
        }
        let end = path.end();
        for p in &self.prefix {
            if let PrefixTerm::Pole { c, s } = *p {
                let ts = end.powu(s);
                log += c * ts / (1.0 - ts);
            }
        }
        log += self.poly_value(end);
        err += path.length() / split * eng.tail_bound(path.max_abs().powi(s as i32));
        let value = log.exp();
        Ok(ContinuationResult { value, branch_offset: log, error_estimate: err * value.norm() })
    }

    /// `(log Z_log)'(z)`, single-valued.
    pub fn log_derivative(&self, z: Complex64) -> Result<Complex64> {
        let eng = self.engine(z.norm() * 2.0)?;
        self.log_derivative_with(&eng, z)
    }

    pub fn log_derivative_with(&self, eng: &Engine, z: Complex64) -> Result<Complex64> {
        self.check_engine(eng)?;
        for p in self.singularities(eng) {
            let d = (p - z).norm();
            if d < super::POLE_GUARD {
                return Err(Error::TooCloseToSupport { point: fmt_c(p), distance: d });
            }
        }
        if z.norm().powi(self.power as i32) > eng.radius() * (1.0 + 1e-12) {
            return Err(Error::invalid("point outside the truncation radius"));
        }
        Ok(self.log_derivative_unchecked(eng, z))
    }

    pub(crate) fn log_derivative_unchecked(&self, eng: &Engine, z: Complex64) -> Complex64 {
        let mut v = self.spectral_derivative(eng, z) + self.poly_derivative(z);
        for p in &self.prefix {
            v += p.derivative(z);
        }
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::motive_data::DEFAULT_K;

    #[test]
    fn affine_space_is_q_to_the_n() {
        let m = ZlogModel::affine(2, 3, DEFAULT_K).unwrap();
        let r = m.eval_zlog(&PathSpec::straight(Complex64::new(0.5, 0.0))).unwrap();
        assert!((r.value - 9.0).norm() < 1e-12);
        assert!((m.log_derivative(Complex64::new(0.0, 0.0)).unwrap() - 2.0 * 3f64.ln()).norm() < 1e-14);
    }

    #[test]
    fn lambda_coefficients_match_counts() {
        let m = ZlogModel::lambda_n(1, 2, DEFAULT_K).unwrap();
        let c = m.log_coefficients(6);
        for (i, v) in c.iter().enumerate() {
            let n = i + 1;
            let want = ((2f64).powi(n as i32) - 1.0).ln() / n as f64;
            assert!((v - want).abs() < 1e-14, "{n}");
        }
    }

    #[test]
    fn y_motive_matches_counts() {
        // N_r = 1 - ((sqrt p)^r + (-sqrt p)^r)
        let p = 5u64;
        let m = ZlogModel::supersingular_y(p, DEFAULT_K).unwrap();
        let c = m.log_coefficients(12);
        for (i, v) in c.iter().enumerate() {
            let n = i + 1;
            let sp = (p as f64).sqrt();
            let count = 1.0 - (sp.powi(n as i32) + (-sp).powi(n as i32));
            assert!((v - count.abs().ln() / n as f64).abs() < 1e-13, "{n}");
        }
    }
}
