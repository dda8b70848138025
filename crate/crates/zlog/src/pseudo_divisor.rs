//! The pseudo-divisors `P`, `P^per`, `D = Phi^*(P^per)` and `E = D + c^*D`,
//! truncated to a window, plus local-finiteness certification.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::Zero;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::expansion::{cluster_by, raw_terms, tuple_count, RawTerm};
use crate::motive_data::{DataOrigin, SpectralData};
use crate::scalar::{best_rational, rational_to_f64};

/// Absolute radius for identifying coincident support points.
pub const CLUSTER_RADIUS: f64 = 1e-9;
/// Partial multiplicity sums beyond this are reported as infinite.
pub const INFINITE_MARKER: f64 = 1e12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Window {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Window {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Result<Self> {
        let ok = [re_min, re_max, im_min, im_max].iter().all(|v| v.is_finite())
            && re_min < re_max
            && im_min < im_max;
        if !ok {
            return Err(Error::invalid("window needs finite bounds with min < max"));
        }
        Ok(Self { re_min, re_max, im_min, im_max })
    }

    pub fn contains(&self, z: Complex64) -> bool {
        z.re >= self.re_min && z.re <= self.re_max && z.im >= self.im_min && z.im <= self.im_max
    }

    pub fn conj(&self) -> Self {
        Self { im_min: -self.im_max, im_max: -self.im_min, ..*self }
    }

    /// Largest `|z|` over the window.
    pub fn max_abs(&self) -> f64 {
        let re = self.re_min.abs().max(self.re_max.abs());
        let im = self.im_min.abs().max(self.im_max.abs());
        re.hypot(im)
    }

    /// Smallest `|z|` over the window.
    pub fn min_abs(&self) -> f64 {
        let clamp = |lo: f64, hi: f64| if lo <= 0.0 && hi >= 0.0 { 0.0 } else { lo.abs().min(hi.abs()) };
        clamp(self.re_min, self.re_max).hypot(clamp(self.im_min, self.im_max))
    }
}

impl FromStr for Window {
    type Err = Error;

    /// `re_min:re_max:im_min:im_max`
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<f64> = s
            .split(':')
            .map(|p| p.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::invalid(format!("bad window {s:?}")))?;
        if parts.len() != 4 {
            return Err(Error::invalid(format!("window {s:?} needs four fields")));
        }
        Self::new(parts[0], parts[1], parts[2], parts[3])
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Multiplicity {
    Finite(BigRational),
    Infinite,
}

impl Multiplicity {
    pub fn to_f64(&self) -> f64 {
        match self {
            Multiplicity::Finite(r) => rational_to_f64(r),
            Multiplicity::Infinite => f64::INFINITY,
        }
    }
}

impl fmt::Display for Multiplicity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Multiplicity::Finite(r) => write!(f, "{r}"),
            Multiplicity::Infinite => write!(f, "inf"),
        }
    }
}

impl Serialize for Multiplicity {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SupportPoint {
    pub location: Complex64,
    pub multiplicity: Multiplicity,
    pub level: usize,
    pub contributors: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DivisorKind {
    P,
    PperPlus,
    PperMinus,
    Pper,
    D,
    E,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PeriodicVariant {
    Plus,
    Minus,
    Full,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum FinitenessRule {
    NLe2,
    NLe1Periodic,
    /// Support of `P^per` inside `Z step + Z 2 pi i / m`.
    Lattice { m: u64, step: f64 },
    ProductConstruction,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum FinitenessStatus {
    LocallyFinite(FinitenessRule),
    Undetermined,
    NotLocallyFiniteWitness,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FinitenessVerdict {
    pub status: FinitenessStatus,
    /// Smallest pairwise distance among truncated `P^per` support points.
    pub min_gap: Option<f64>,
}

impl FinitenessVerdict {
    /// Whether the rule covers the periodified divisor (`N <= 2` only
    /// certifies `P` itself).
    pub fn certifies_periodic(&self) -> bool {
        matches!(self.status, FinitenessStatus::LocallyFinite(r) if r != FinitenessRule::NLe2)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PseudoDivisor {
    pub kind: DivisorKind,
    pub points: Vec<SupportPoint>,
    pub window: Window,
    pub l_max: usize,
    pub verdict: FinitenessVerdict,
    /// Set when `l_max` is too small to see every point of the window.
    pub coverage_warning: bool,
    /// `P` points with real part inside the window, any imaginary part.
    #[serde(skip)]
    strip: Vec<SupportPoint>,
    /// `P^per` representatives with imaginary part in `(-pi, pi]`.
    #[serde(skip)]
    reps: Vec<SupportPoint>,
}

impl PseudoDivisor {
    fn empty(kind: DivisorKind, window: Window, l_max: usize, verdict: FinitenessVerdict) -> Self {
        Self {
            kind,
            points: Vec::new(),
            window,
            l_max,
            verdict,
            coverage_warning: false,
            strip: Vec::new(),
            reps: Vec::new(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn locations(&self) -> Vec<Complex64> {
        self.points.iter().map(|p| p.location).collect()
    }

    /// Distance from `z` to the nearest support point.
    pub fn distance(&self, z: Complex64) -> f64 {
        self.points.iter().map(|p| (p.location - z).norm()).fold(f64::INFINITY, f64::min)
    }

    pub fn multiplicity_at(&self, z: Complex64) -> Option<&Multiplicity> {
        self.points
            .iter()
            .find(|p| (p.location - z).norm() <= CLUSTER_RADIUS)
            .map(|p| &p.multiplicity)
    }

    /// CSV rows `re,im,multiplicity,level`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("re,im,multiplicity,level\n");
        for p in &self.points {
            s.push_str(&format!(
                "{:.16e},{:.16e},{},{}\n",
                p.location.re, p.location.im, p.multiplicity, p.level
            ));
        }
        s
    }
}

fn merge_terms(items: Vec<(Complex64, &RawTerm)>) -> Vec<SupportPoint> {
    let labels = cluster_by(
        items.len(),
        |i| items[i].0.re,
        CLUSTER_RADIUS,
        |a, b| (items[a].0 - items[b].0).norm() <= CLUSTER_RADIUS,
    );
    let n = labels.iter().copied().max().map_or(0, |m| m + 1);
    let mut acc: Vec<Option<(Complex64, BigRational, usize, usize)>> = vec![None; n];
    for (i, (loc, t)) in items.iter().enumerate() {
        match &mut acc[labels[i]] {
            Some((_, c, lvl, cnt)) => {
                *c += &t.coef;
                *lvl = (*lvl).min(t.level);
                *cnt += 1;
            }
            slot @ None => *slot = Some((*loc, t.coef.clone(), t.level, 1)),
        }
    }
    let mut out: Vec<SupportPoint> = acc
        .into_iter()
        .flatten()
        .filter(|(_, c, _, _)| !c.is_zero())
        .map(|(location, c, level, contributors)| {
            let multiplicity = if rational_to_f64(&c).abs() > INFINITE_MARKER {
                Multiplicity::Infinite
            } else {
                Multiplicity::Finite(c)
            };
            SupportPoint { location, multiplicity, level, contributors }
        })
        .collect();
    sort_points(&mut out);
    out
}

fn sort_points(points: &mut [SupportPoint]) {
    points.sort_by(|a, b| {
        (a.location.re, a.location.im)
            .partial_cmp(&(b.location.re, b.location.im))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
}

fn min_abs_log(data: &SpectralData) -> f64 {
    data.items.iter().map(|d| -d.lambda.norm().ln()).fold(f64::INFINITY, f64::min)
}

fn with_infinite_check(mut verdict: FinitenessVerdict, points: &[SupportPoint]) -> FinitenessVerdict {
    if points.iter().any(|p| p.multiplicity == Multiplicity::Infinite) {
        verdict.status = FinitenessStatus::Undetermined;
    }
    verdict
}

/// `P = sum_k m(k) [sum k_i Log lambda_i]` for `|k| <= l_max`, restricted to
/// the window.
pub fn build_support_p(data: &SpectralData, l_max: usize, window: Window) -> Result<PseudoDivisor> {
    if l_max == 0 {
        return Err(Error::invalid("l_max must be >= 1"));
    }
    let verdict = classify_finiteness(data);
    if data.is_empty() {
        return Ok(PseudoDivisor::empty(DivisorKind::P, window, l_max, verdict));
    }
    let raw = raw_terms(data, l_max)?;
    let in_strip: Vec<(Complex64, &RawTerm)> = raw
        .iter()
        .filter(|t| t.log.re >= window.re_min && t.log.re <= window.re_max)
        .map(|t| (t.log, t))
        .collect();
    let strip = merge_terms(in_strip);
    let points: Vec<SupportPoint> = strip.iter().filter(|p| window.contains(p.location)).cloned().collect();
    let coverage_warning = (l_max as f64) < (-window.re_min).max(0.0) / min_abs_log(data);
    Ok(PseudoDivisor {
        kind: DivisorKind::P,
        verdict: with_infinite_check(verdict, &points),
        points,
        window,
        l_max,
        coverage_warning,
        strip,
        reps: Vec::new(),
    })
}

fn reduce_im(w: Complex64) -> (Complex64, i64) {
    let n = ((PI - w.im) / (2.0 * PI)).floor();
    let im = w.im + 2.0 * PI * n;
    (Complex64::new(w.re, im), -(n as i64))
}

/// Translates `T_j^* P` (`j >= 1`, `j <= -1` or all `j`) summed and cut to
/// the window of `p`.
pub fn periodify(p: &PseudoDivisor, variant: PeriodicVariant) -> Result<PseudoDivisor> {
    if p.kind != DivisorKind::P {
        return Err(Error::invalid("periodify needs a divisor of kind P"));
    }
    let w = p.window;
    let (kind, j_ok): (DivisorKind, fn(i64) -> bool) = match variant {
        PeriodicVariant::Plus => (DivisorKind::PperPlus, |j| j >= 1),
        PeriodicVariant::Minus => (DivisorKind::PperMinus, |j| j <= -1),
        PeriodicVariant::Full => (DivisorKind::Pper, |_| true),
    };
    let mut translates: Vec<(Complex64, RawTerm)> = Vec::new();
    for sp in &p.strip {
        let Multiplicity::Finite(c) = &sp.multiplicity else {
            continue;
        };
        let j_lo = ((w.im_min - sp.location.im) / (2.0 * PI)).ceil() as i64;
        let j_hi = ((w.im_max - sp.location.im) / (2.0 * PI)).floor() as i64;
        for j in j_lo..=j_hi {
            if j_ok(j) {
                let loc = sp.location + Complex64::new(0.0, 2.0 * PI * j as f64);
                translates.push((loc, RawTerm { log: loc, coef: c.clone(), level: sp.level }));
            }
        }
    }
    let items: Vec<(Complex64, &RawTerm)> = translates.iter().map(|(z, t)| (*z, t)).collect();
    let points = merge_terms(items);
    // representatives modulo 2 pi i for the pullback
    let reps = if variant == PeriodicVariant::Full {
        let reduced: Vec<(Complex64, RawTerm)> = p
            .strip
            .iter()
            .filter_map(|sp| match &sp.multiplicity {
                Multiplicity::Finite(c) => {
                    let (loc, _) = reduce_im(sp.location);
                    Some((loc, RawTerm { log: loc, coef: c.clone(), level: sp.level }))
                }
                Multiplicity::Infinite => None,
            })
            .collect();
        merge_terms(reduced.iter().map(|(z, t)| (*z, t)).collect())
    } else {
        Vec::new()
    };
    let mut verdict = p.verdict;
    if p.strip.iter().any(|s| s.multiplicity == Multiplicity::Infinite) {
        verdict.status = FinitenessStatus::Undetermined;
    }
    Ok(PseudoDivisor {
        kind,
        verdict: with_infinite_check(verdict, &points),
        points,
        window: w,
        l_max: p.l_max,
        coverage_warning: p.coverage_warning,
        strip: Vec::new(),
        reps,
    })
}

/// `D = Phi^* P^per` with `Phi(w) = e^{-w}`, restricted to a window in `z`.
/// The multiplicity at `z` is that of `P^per` at any point of the fiber.
pub fn pullback_exp(pper: &PseudoDivisor, window: Window) -> Result<PseudoDivisor> {
    if pper.kind != DivisorKind::Pper {
        return Err(Error::invalid("pullback_exp needs the full periodification P^per"));
    }
    let mut points: Vec<SupportPoint> = pper
        .reps
        .iter()
        .map(|sp| SupportPoint { location: (-sp.location).exp(), ..sp.clone() })
        .filter(|sp| window.contains(sp.location))
        .collect();
    sort_points(&mut points);
    // |z| <= R needs Re w >= -ln R to be covered by the P window
    let need = -window.max_abs().max(1.0).ln();
    let coverage_warning = pper.coverage_warning || pper.window.re_min > need + 1e-12;
    Ok(PseudoDivisor {
        kind: DivisorKind::D,
        verdict: pper.verdict,
        points,
        window,
        l_max: pper.l_max,
        coverage_warning,
        strip: Vec::new(),
        reps: Vec::new(),
    })
}

/// `E(z) = D(z) + D(conj z)`.
pub fn mirror_sum(d: &PseudoDivisor) -> Result<PseudoDivisor> {
    if d.kind != DivisorKind::D {
        return Err(Error::invalid("mirror_sum needs a divisor of kind D"));
    }
    let mut terms: Vec<(Complex64, RawTerm)> = Vec::new();
    for sp in &d.points {
        let Multiplicity::Finite(c) = &sp.multiplicity else {
            continue;
        };
        for loc in [sp.location, sp.location.conj()] {
            terms.push((loc, RawTerm { log: loc, coef: c.clone(), level: sp.level }));
        }
    }
    let window = d.window;
    let points: Vec<SupportPoint> = merge_terms(terms.iter().map(|(z, t)| (*z, t)).collect())
        .into_iter()
        .filter(|p| window.contains(p.location))
        .collect();
    Ok(PseudoDivisor {
        kind: DivisorKind::E,
        verdict: d.verdict,
        points,
        window,
        l_max: d.l_max,
        coverage_warning: d.coverage_warning,
        strip: Vec::new(),
        reps: Vec::new(),
    })
}

/// `D` of the data inside a `z`-window.
pub fn support_d(data: &SpectralData, l_max: usize, window: Window) -> Result<PseudoDivisor> {
    let r = window.max_abs().max(1.0);
    let p = build_support_p(data, l_max, Window::new(-r.ln() - 1e-9, 0.0, -PI, PI)?)?;
    pullback_exp(&periodify(&p, PeriodicVariant::Full)?, window)
}

/// `E = D + c^* D` inside a `z`-window.
pub fn support_e(data: &SpectralData, l_max: usize, window: Window) -> Result<PseudoDivisor> {
    let joint = window_union(window, window.conj());
    let mut e = mirror_sum(&support_d(data, l_max, joint)?)?;
    e.points.retain(|p| window.contains(p.location));
    e.window = window;
    Ok(e)
}

fn window_union(a: Window, b: Window) -> Window {
    Window {
        re_min: a.re_min.min(b.re_min),
        re_max: a.re_max.max(b.re_max),
        im_min: a.im_min.min(b.im_min),
        im_max: a.im_max.max(b.im_max),
    }
}

/// Denominator bound when reading `arg lambda / 2 pi` as a rational.
const ROOT_ORDER_CAP: u64 = 720;

fn lattice_rule(data: &SpectralData) -> Option<FinitenessRule> {
    let mut m: u64 = 1;
    for d in &data.items {
        let (_, den, err) = best_rational(d.lambda.arg() / (2.0 * PI), ROOT_ORDER_CAP);
        if err > 1e-10 {
            return None;
        }
        m = num_integer::lcm(m, den);
    }
    let logs: Vec<f64> = data.items.iter().map(|d| -d.lambda.norm().ln()).collect();
    let step = match data.base_q {
        Some(q) => {
            let half = 0.5 * q.ln();
            for l in &logs {
                if (l / half - (l / half).round()).abs() > 1e-9 {
                    return None;
                }
            }
            half
        }
        None => {
            let base = logs.iter().copied().fold(f64::INFINITY, f64::min);
            let mut den: u64 = 1;
            for l in &logs {
                let (_, d, err) = best_rational(l / base, 64);
                if err > 1e-10 {
                    return None;
                }
                den = num_integer::lcm(den, d);
            }
            base / den as f64
        }
    };
    Some(FinitenessRule::Lattice { m, step })
}

/// Level cap for the statistical `min_gap` scan.
fn gap_levels(n: usize) -> usize {
    (1..=12).rev().find(|&l| tuple_count(n, l) <= 20_000).unwrap_or(1)
}

fn min_gap(data: &SpectralData) -> Option<f64> {
    if data.is_empty() {
        return None;
    }
    let l = gap_levels(data.len());
    // beyond (l + 1) min|log lambda| the truncated levels are incomplete
    let reach = (l + 1) as f64 * min_abs_log(data);
    let window = Window::new(-reach + 1e-9, 0.0, -PI, PI).ok()?;
    let pts = periodify(&build_support_p_unclassified(data, l, window).ok()?, PeriodicVariant::Full).ok()?;
    let locs = pts.reps.iter().map(|p| p.location).collect::<Vec<_>>();
    let mut best = f64::INFINITY;
    for i in 0..locs.len() {
        for j in i + 1..locs.len() {
            // distance on the cylinder C / 2 pi i Z
            let d = locs[i] - locs[j];
            let im = d.im.abs() % (2.0 * PI);
            best = best.min(d.re.hypot(im.min(2.0 * PI - im)));
        }
    }
    best.is_finite().then_some(best)
}

fn build_support_p_unclassified(data: &SpectralData, l_max: usize, window: Window) -> Result<PseudoDivisor> {
    let verdict = FinitenessVerdict { status: FinitenessStatus::Undetermined, min_gap: None };
    let raw = raw_terms(data, l_max)?;
    let strip = merge_terms(
        raw.iter()
            .filter(|t| t.log.re >= window.re_min && t.log.re <= window.re_max)
            .map(|t| (t.log, t))
            .collect(),
    );
    let mut p = PseudoDivisor::empty(DivisorKind::P, window, l_max, verdict);
    p.points = strip.iter().filter(|s| window.contains(s.location)).cloned().collect();
    p.strip = strip;
    Ok(p)
}

/// First applicable certificate: `N <= 1`, the Weil lattice, the product
/// construction, then `N <= 2` (which only covers `P`).
pub fn classify_finiteness(data: &SpectralData) -> FinitenessVerdict {
    let status = if data.len() <= 1 {
        FinitenessStatus::LocallyFinite(FinitenessRule::NLe1Periodic)
    } else if let Some(rule) = lattice_rule(data) {
        FinitenessStatus::LocallyFinite(rule)
    } else if data.origin == (DataOrigin::Product { certified: true }) {
        FinitenessStatus::LocallyFinite(FinitenessRule::ProductConstruction)
    } else if data.len() <= 2 {
        FinitenessStatus::LocallyFinite(FinitenessRule::NLe2)
    } else {
        FinitenessStatus::Undetermined
    };
    FinitenessVerdict { status, min_gap: min_gap(data) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn half() -> SpectralData {
        SpectralData::from_tuples(&[(1, 1, 0.5, 0.0)]).unwrap()
    }

    fn rat(n: i64, d: i64) -> Multiplicity {
        Multiplicity::Finite(BigRational::new(BigInt::from(n), BigInt::from(d)))
    }

    #[test]
    fn p_of_a_single_datum() {
        let p = build_support_p(&half(), 3, Window::new(-3.0, 0.0, -1.0, 1.0).unwrap()).unwrap();
        assert_eq!(p.points.len(), 3);
        for (i, sp) in p.points.iter().rev().enumerate() {
            let l = i + 1;
            assert!((sp.location.re + l as f64 * 2f64.ln()).abs() < 1e-15);
            assert_eq!(sp.multiplicity, rat(1, l as i64));
        }
        let two = SpectralData::from_tuples(&[(2, 1, 0.5, 0.0)]).unwrap();
        let p = build_support_p(&two, 3, Window::new(-3.0, 0.0, -1.0, 1.0).unwrap()).unwrap();
        let m: Vec<Multiplicity> = p.points.iter().rev().map(|s| s.multiplicity.clone()).collect();
        assert_eq!(m, vec![rat(2, 1), rat(2, 1), rat(8, 3)]);
        assert!(build_support_p(&SpectralData::empty(), 3, p.window).unwrap().is_empty());
    }

    #[test]
    fn periodic_translates() {
        let w = Window::new(-1.0, 0.0, -10.0, 10.0).unwrap();
        let p = build_support_p(&half(), 1, w).unwrap();
        let full = periodify(&p, PeriodicVariant::Full).unwrap();
        assert_eq!(full.points.len(), 3);
        let plus = periodify(&p, PeriodicVariant::Plus).unwrap();
        assert_eq!(plus.points.len(), 1);
        assert!(plus.points[0].location.im > 6.0);
    }

    #[test]
    fn pullback_gives_powers_of_two() {
        let d = support_d(&half(), 8, Window::new(-300.0, 300.0, -1.0, 1.0).unwrap()).unwrap();
        let locs = d.locations();
        assert_eq!(locs.len(), 8);
        for (k, z) in locs.iter().enumerate() {
            assert!((z - 2f64.powi(k as i32 + 1)).norm() < 1e-9);
        }
        let e = mirror_sum(&d).unwrap();
        assert_eq!(e.points[0].multiplicity, rat(2, 1));
    }

    #[test]
    fn mirror_of_complex_point() {
        let w = Window::new(-3.0, 3.0, -3.0, 3.0).unwrap();
        let mut d = PseudoDivisor::empty(
            DivisorKind::D,
            w,
            1,
            FinitenessVerdict { status: FinitenessStatus::Undetermined, min_gap: None },
        );
        d.points.push(SupportPoint {
            location: Complex64::new(1.0, 1.0),
            multiplicity: rat(1, 1),
            level: 1,
            contributors: 1,
        });
        let e = mirror_sum(&d).unwrap();
        assert_eq!(e.points.len(), 2);
        assert!(e.points.iter().all(|p| p.multiplicity == rat(1, 1)));
    }

    #[test]
    fn classification() {
        let v = classify_finiteness(&half());
        assert_eq!(v.status, FinitenessStatus::LocallyFinite(FinitenessRule::NLe1Periodic));
        let generic = SpectralData::from_tuples(&[
            (1, 1, 0.5 * 1f64.cos(), 0.5 * 1f64.sin()),
            (1, 1, 0.4 * 2f64.sqrt().cos(), 0.4 * 2f64.sqrt().sin()),
            (1, 3, 0.3 * 3f64.sqrt().cos(), 0.3 * 3f64.sqrt().sin()),
        ])
        .unwrap();
        let v = classify_finiteness(&generic);
        assert_eq!(v.status, FinitenessStatus::Undetermined);
        assert!(v.min_gap.unwrap() > 0.0);
    }
}
