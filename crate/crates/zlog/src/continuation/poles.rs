//! Loops, residues and the recovery of Weil numbers from poles.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use super::{Engine, ZlogModel};
use crate::error::{Error, Result};
use crate::quadrature::{fmt_c, integrate_circle};
use crate::scalar::best_rational;

/// Circles may not pass closer than this fraction of the radius to a pole.
const LOOP_MARGIN: f64 = 0.05;
/// Snapping distance for residue probes.
const SNAP: f64 = 1e-6;
const LAURENT_NODES: usize = 256;
const MAX_ORDER: usize = 4;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonodromyReport {
    pub value: Complex64,
    /// `value / (2 pi i)`.
    pub ratio: Complex64,
    pub enclosed: Option<Complex64>,
    pub numer: i64,
    pub denom: u64,
    pub fit_error: f64,
}

/// `oint J~(w)/w dw` over `|w - center| = radius`, enclosing at most one pole.
pub fn monodromy_loop(eng: &Engine, center: Complex64, radius: f64) -> Result<MonodromyReport> {
    if !(radius > 0.0) {
        return Err(Error::invalid("loop radius must be positive"));
    }
    if center.norm() + radius > eng.radius() {
        return Err(Error::invalid("loop leaves the truncation radius"));
    }
    let mut enclosed = None;
    for (p, _) in eng.poles() {
        let d = (p - center).norm();
        if (d - radius).abs() < LOOP_MARGIN * radius {
            return Err(Error::Contour(format!("circle passes within {} of the pole {}", (d - radius).abs(), fmt_c(p))));
        }
        if d < radius {
            if enclosed.is_some() {
                return Err(Error::Contour("circle encloses more than one pole".into()));
            }
            enclosed = Some(p);
        }
    }
    let value = integrate_circle(|w| eng.j_over_z(w), center, radius, 1e-13)?.value;
    let ratio = value / Complex64::new(0.0, 2.0 * PI);
    let (numer, denom, err) = best_rational(ratio.re, eng.trunc().l_max.max(1) as u64);
    Ok(MonodromyReport { value, ratio, enclosed, numer, denom, fit_error: err.hypot(ratio.im) })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResidueReport {
    pub pole: Complex64,
    pub order: usize,
    pub residue: Complex64,
    pub numer: i64,
    pub denom: u64,
    pub fit_error: f64,
    pub probe_radius: f64,
}

/// Residue of the log-derivative at a simple pole of `Z_log`.
pub fn residue_estimate(model: &ZlogModel, pole: Complex64) -> Result<ResidueReport> {
    let eng = model.engine(2.0 * pole.norm().max(1.0))?;
    residue_estimate_with(model, &eng, pole)
}

pub fn residue_estimate_with(model: &ZlogModel, eng: &Engine, pole: Complex64) -> Result<ResidueReport> {
    let sing = model.singularities(eng);
    let (idx, d) = sing
        .iter()
        .enumerate()
        .map(|(i, p)| (i, (p - pole).norm()))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .ok_or_else(|| Error::invalid("the model has no singularities"))?;
    if d > SNAP * pole.norm().max(1.0) {
        return Err(Error::invalid(format!("no singularity within {SNAP} of {}", fmt_c(pole))));
    }
    let p = sing[idx];
    let next = sing
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != idx)
        .map(|(_, s)| (s - p).norm())
        .fold(f64::INFINITY, f64::min);
    let rho = (1e-3 * p.norm().max(1.0)).min(0.25 * next);
    let values: Vec<(Complex64, Complex64)> = (0..LAURENT_NODES)
        .map(|j| {
            let e = Complex64::from_polar(1.0, 2.0 * PI * j as f64 / LAURENT_NODES as f64);
            (e, model.log_derivative_unchecked(eng, p + e * rho))
        })
        .collect();
    // c_n = a_n rho^n
    let moment = |n: i64| -> Complex64 {
        values.iter().map(|(e, v)| v * e.powi(-n as i32)).sum::<Complex64>() / LAURENT_NODES as f64
    };
    let scale = values.iter().map(|(_, v)| v.norm()).fold(0.0, f64::max);
    let order = (1..=MAX_ORDER).rev().find(|&k| moment(-(k as i64)).norm() > 1e-6 * scale).unwrap_or(0);
    if order != 1 {
        return Err(Error::OrderMismatch { found: order });
    }
    let residue = moment(-1) * rho;
    let (numer, denom, err) = best_rational(residue.re, eng.trunc().l_max.max(1) as u64);
    Ok(ResidueReport {
        pole: p,
        order,
        residue,
        numer,
        denom,
        fit_error: err.hypot(residue.im),
        probe_radius: rho,
    })
}

/// Weight-one Weil numbers: simple poles of `Z_log` on `|z| = sqrt q`.
pub fn locate_weil_poles(model: &ZlogModel) -> Result<Vec<Complex64>> {
    let q = model.q.ok_or_else(|| Error::invalid("the model has no base field size"))?;
    let sq = q.sqrt();
    let eng = model.engine(2.0 * sq)?;
    let mut out: Vec<Complex64> = Vec::new();
    for z in model.spectral_singularities(&eng) {
        if (z.norm() - sq).abs() >= 1e-6 * sq || out.iter().any(|o| (o - z).norm() < 1e-9) {
            continue;
        }
        if residue_estimate_with(model, &eng, z).is_ok() {
            out.push(z);
        }
    }
    out.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(out)
}
