//! Frobenius eigenvalue models, virtual counts and the `(eps, lambda)`
//! spectral data that drives the continuation engine.

use std::f64::consts::PI;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::{BigRational, Rational64};
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::algebra::{power_sums, prod_one_minus_powers, prod_one_minus_powers_upto, roots_with_multiplicity};
use crate::error::{Error, Result};
use crate::scalar::rational_to_f64;

/// Relative tolerance for `|alpha| = q^{v/2}`.
pub const WEIGHT_TOLERANCE: f64 = 1e-10;
/// Default half-height of the imaginary strip.
pub const DEFAULT_K: f64 = PI;
/// Target for series tail bounds.
pub const TAIL_TARGET: f64 = 1e-12;
/// Hard cap on the level `l` of the multinomial expansions.
pub const LEVEL_CAP: usize = 512;
/// Evaluation radius used for the default `l_max`.
pub const DEFAULT_RADIUS: f64 = 8.0;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeilEntry {
    pub alpha: Complex64,
    pub weight: u32,
    pub mult: u32,
    /// Order of `alpha / q^{v/2}` as a root of unity, when it is one (up to
    /// order 1000).
    pub root_order: Option<u32>,
}

impl WeilEntry {
    pub fn sign(&self) -> i64 {
        if self.weight % 2 == 0 {
            1
        } else {
            -1
        }
    }

    pub fn supersingular(&self) -> bool {
        self.root_order.is_some()
    }
}

/// An integer characteristic polynomial whose roots all have weight `weight`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeilComponent {
    pub weight: u32,
    pub charpoly: Vec<i64>,
}

/// Frobenius eigenvalues of a variety or motive over `F_q`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeilNumberSet {
    pub q: u64,
    pub entries: Vec<WeilEntry>,
    /// Weight-one characteristic polynomial when this is an abelian variety.
    pub charpoly: Option<Vec<i64>>,
    /// Exact sources for all entries, when every entry came from one.
    pub components: Option<Vec<WeilComponent>>,
}

fn root_order(zeta: Complex64) -> Option<u32> {
    (1..=1000u32).find(|&n| (zeta.powu(n) - 1.0).norm() < 1e-9)
}

fn entries_from_charpoly(q: u64, weight: u32, charpoly: &[i64]) -> Result<Vec<WeilEntry>> {
    let scale = (q as f64).powf(weight as f64 / 2.0);
    roots_with_multiplicity(charpoly)?
        .into_iter()
        .map(|(alpha, mult)| {
            Ok(WeilEntry { alpha, weight, mult, root_order: root_order(alpha / scale) })
        })
        .collect()
}

impl WeilNumberSet {
    /// An abelian variety, given by the characteristic polynomial of
    /// Frobenius on `H^1` (constant term first).
    pub fn abelian(q: u64, charpoly: Vec<i64>) -> Result<Self> {
        if charpoly.len() < 3 || (charpoly.len() - 1) % 2 != 0 {
            return Err(Error::invalid("abelian charpoly must have even degree >= 2"));
        }
        let entries = entries_from_charpoly(q, 1, &charpoly)?;
        let s = Self {
            q,
            entries,
            components: Some(vec![WeilComponent { weight: 1, charpoly: charpoly.clone() }]),
            charpoly: Some(charpoly),
        };
        s.validate()?;
        Ok(s)
    }

    /// A motive assembled from weight-graded integer characteristic
    /// polynomials; virtual counts are then exact.
    pub fn motive(q: u64, components: Vec<WeilComponent>) -> Result<Self> {
        let mut entries = Vec::new();
        for c in &components {
            entries.extend(entries_from_charpoly(q, c.weight, &c.charpoly)?);
        }
        let s = Self { q, entries, charpoly: None, components: Some(components) };
        s.validate()?;
        Ok(s)
    }

    /// A motive from explicit eigenvalues `(alpha, weight, mult)`; virtual
    /// counts are floating point.
    pub fn from_eigenvalues(q: u64, eigen: Vec<(Complex64, u32, u32)>) -> Result<Self> {
        let entries = eigen
            .into_iter()
            .map(|(alpha, weight, mult)| {
                let scale = (q as f64).powf(weight as f64 / 2.0);
                WeilEntry { alpha, weight, mult, root_order: root_order(alpha / scale) }
            })
            .collect();
        let s = Self { q, entries, charpoly: None, components: None };
        s.validate()?;
        Ok(s)
    }

    /// `Z(w_1) + Z(w_2) + ...`: eigenvalue `q^w` in weight `2w`.
    pub fn tate(q: u64, twists: &[u32]) -> Result<Self> {
        let components = twists
            .iter()
            .map(|&w| WeilComponent { weight: 2 * w, charpoly: vec![-(q as i64).pow(w), 1] })
            .collect();
        Self::motive(q, components)
    }

    pub fn is_abelian(&self) -> bool {
        self.charpoly.is_some()
    }

    pub fn validate(&self) -> Result<()> {
        if self.q < 2 {
            return Err(Error::invalid("q must be >= 2"));
        }
        if self.entries.is_empty() {
            return Err(Error::invalid("Weil number set is empty"));
        }
        for e in &self.entries {
            if e.mult == 0 {
                return Err(Error::invalid("multiplicities must be positive"));
            }
            let expected = (self.q as f64).powf(e.weight as f64 / 2.0);
            if ((e.alpha.norm() - expected) / expected).abs() > WEIGHT_TOLERANCE {
                return Err(Error::invalid(format!(
                    "|{}| = {} is not q^(v/2) = {expected} for weight {}",
                    e.alpha,
                    e.alpha.norm(),
                    e.weight
                )));
            }
        }
        for e in &self.entries {
            let tol = 1e-9 * e.alpha.norm().max(1.0);
            let partner: u32 = self
                .entries
                .iter()
                .filter(|f| f.weight == e.weight && (f.alpha - e.alpha.conj()).norm() < tol)
                .map(|f| f.mult)
                .sum();
            if partner != e.mult {
                return Err(Error::invalid(format!("{} lacks a conjugate partner", e.alpha)));
            }
        }
        Ok(())
    }

    pub fn g(&self) -> usize {
        self.charpoly.as_ref().map_or(0, |c| (c.len() - 1) / 2)
    }

    /// `N_l`: `prod (1 - alpha^l)` for abelian varieties (the full motive
    /// `wedge^* h^1`), else `sum (-1)^v mult alpha^l`. Exact when sourced from
    /// integer polynomials; otherwise the binary value of the float sum.
    pub fn virtual_count(&self, l: usize) -> Result<BigRational> {
        if let Some(cp) = &self.charpoly {
            return prod_one_minus_powers(cp, l);
        }
        if let Some(components) = &self.components {
            let mut acc = BigRational::zero();
            for c in components {
                let p = power_sums(&c.charpoly, l)?;
                if c.weight % 2 == 0 {
                    acc += &p[l - 1];
                } else {
                    acc -= &p[l - 1];
                }
            }
            return Ok(acc);
        }
        let v = self.virtual_count_f64(l);
        BigRational::from_float(v).ok_or_else(|| Error::invalid("non-finite virtual count"))
    }

    /// `N_1..=N_len`; same values as `virtual_count`, computed in one pass.
    pub fn virtual_counts_upto(&self, len: usize) -> Result<Vec<BigRational>> {
        if let Some(cp) = &self.charpoly {
            return prod_one_minus_powers_upto(cp, len);
        }
        if let Some(components) = &self.components {
            let mut acc = vec![BigRational::zero(); len];
            for c in components {
                let p = power_sums(&c.charpoly, len)?;
                for (a, v) in acc.iter_mut().zip(p) {
                    if c.weight % 2 == 0 {
                        *a += v;
                    } else {
                        *a -= v;
                    }
                }
            }
            return Ok(acc);
        }
        (1..=len).map(|l| self.virtual_count(l)).collect()
    }

    pub fn virtual_count_f64(&self, l: usize) -> f64 {
        if self.charpoly.is_some() || self.components.is_some() {
            if let Ok(v) = self.virtual_count(l) {
                return rational_to_f64(&v);
            }
        }
        self.entries
            .iter()
            .map(|e| e.sign() as f64 * e.mult as f64 * e.alpha.powu(l as u32).re)
            .sum()
    }

    pub fn exact(&self) -> bool {
        self.components.is_some()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VirtualCounts {
    pub values: Vec<f64>,
    /// Present when every eigenvalue came from an integer polynomial.
    pub exact: Option<Vec<BigRational>>,
    pub vanish_bound: Option<usize>,
}

pub fn virtual_counts(weil: &WeilNumberSet, len: usize) -> Result<VirtualCounts> {
    if len == 0 {
        return Err(Error::invalid("length must be >= 1"));
    }
    let vanish_bound = check_unique_top_weight(weil).vanish_bound;
    if weil.exact() {
        let exact = weil.virtual_counts_upto(len)?;
        let values = exact.iter().map(rational_to_f64).collect();
        return Ok(VirtualCounts { values, exact: Some(exact), vanish_bound });
    }
    let values = (1..=len).map(|l| weil.virtual_count_f64(l)).collect();
    Ok(VirtualCounts { values, exact: None, vanish_bound })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TopWeight {
    pub unique: bool,
    /// `m` with top eigenvalue `q^m`.
    pub m: Option<u32>,
    /// Beyond this index `N_l != 0` is guaranteed.
    pub vanish_bound: Option<usize>,
}

/// Unique top weight: one eigenvalue of maximal size, equal to `q^m`, with
/// multiplicity one. For an abelian variety this is checked on the full motive
/// `wedge^* h^1`, whose top eigenvalue `q^g` is always unique.
pub fn check_unique_top_weight(weil: &WeilNumberSet) -> TopWeight {
    if weil.is_abelian() {
        let g = weil.g() as u32;
        let rho = (weil.q as f64).powf(-0.5);
        // other eigenvalues of wedge^* h^1 over q^g are bounded by q^{-1/2}
        let others = (1u64 << (2 * g).min(62)) as f64 - 1.0;
        let bound = (1..).find(|&l| others * rho.powi(l as i32) < 1.0).unwrap_or(1) - 1;
        return TopWeight { unique: true, m: Some(g), vanish_bound: Some(bound) };
    }
    let max = weil.entries.iter().map(|e| e.alpha.norm()).fold(0.0, f64::max);
    let tol = 1e-9 * max.max(1.0);
    let top: Vec<&WeilEntry> =
        weil.entries.iter().filter(|e| (e.alpha.norm() - max).abs() < tol).collect();
    let none = TopWeight { unique: false, m: None, vanish_bound: None };
    if top.len() != 1 || top[0].mult != 1 || top[0].weight % 2 != 0 {
        return none;
    }
    let m = top[0].weight / 2;
    let qm = (weil.q as f64).powi(m as i32);
    if (top[0].alpha - qm).norm() > 1e-9 * qm {
        return none;
    }
    let ratios: Vec<(f64, u32)> = weil
        .entries
        .iter()
        .filter(|e| (e.alpha.norm() - max).abs() >= tol)
        .map(|e| (e.alpha.norm() / qm, e.mult))
        .collect();
    let s = |l: i32| ratios.iter().map(|(r, n)| *n as f64 * r.powi(l)).sum::<f64>();
    let bound = (1..10_000).find(|&l| s(l) < 1.0).map(|l| l as usize - 1);
    TopWeight { unique: true, m: Some(m), vanish_bound: bound }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralDatum {
    pub eps: Rational64,
    pub lambda: Complex64,
}

impl SpectralDatum {
    pub fn new(eps: Rational64, lambda: Complex64) -> Result<Self> {
        if eps.is_zero() {
            return Err(Error::invalid("eps must be nonzero"));
        }
        let n = lambda.norm();
        if !(n > 0.0 && n < 1.0) {
            return Err(Error::invalid(format!("|lambda| = {n} must lie in (0, 1)")));
        }
        Ok(Self { eps, lambda })
    }

    pub fn eps_f64(&self) -> f64 {
        self.eps.to_f64().unwrap_or(f64::NAN)
    }

    pub fn conj(&self) -> Self {
        Self { eps: self.eps, lambda: self.lambda.conj() }
    }
}

/// Where a data set came from; products of certified factors inherit local
/// finiteness of their periodic divisor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataOrigin {
    Raw,
    Product { certified: bool },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralData {
    pub items: Vec<SpectralDatum>,
    pub origin: DataOrigin,
    /// Field size when the data came from Weil numbers; used by the lattice
    /// criterion.
    pub base_q: Option<f64>,
}

impl SpectralData {
    pub fn new(items: Vec<SpectralDatum>) -> Self {
        Self { items, origin: DataOrigin::Raw, base_q: None }
    }

    pub fn empty() -> Self {
        Self::new(Vec::new())
    }

    /// From `(eps_num, eps_den, re, im)` tuples.
    pub fn from_tuples(t: &[(i64, i64, f64, f64)]) -> Result<Self> {
        let items = t
            .iter()
            .map(|&(n, d, re, im)| SpectralDatum::new(Rational64::new(n, d), Complex64::new(re, im)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::new(items))
    }

    pub fn with_base_q(mut self, q: f64) -> Self {
        self.base_q = Some(q);
        self
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn conj(&self) -> Self {
        Self {
            items: self.items.iter().map(SpectralDatum::conj).collect(),
            origin: self.origin.clone(),
            base_q: self.base_q,
        }
    }

    /// Whether the multiset of `(eps, lambda)` is closed under conjugation.
    pub fn is_conjugate_closed(&self) -> bool {
        let mut used = vec![false; self.items.len()];
        for d in &self.items {
            let target = d.lambda.conj();
            match (0..self.items.len()).find(|&j| {
                !used[j]
                    && self.items[j].eps == d.eps
                    && (self.items[j].lambda - target).norm() < 1e-12
            }) {
                Some(j) => used[j] = true,
                None => return false,
            }
        }
        true
    }

    /// `sum eps_i lambda_i^r` with `lambda^r = exp(r Log lambda)`.
    pub fn power_sum(&self, r: Complex64) -> Complex64 {
        self.items.iter().map(|d| d.eps_f64() * (r * d.lambda.ln()).exp()).sum()
    }

    /// `max |eps_i|`.
    pub fn max_eps(&self) -> f64 {
        self.items.iter().map(|d| d.eps_f64().abs()).fold(0.0, f64::max)
    }

    pub fn max_lambda(&self) -> f64 {
        self.items.iter().map(|d| d.lambda.norm()).fold(0.0, f64::max)
    }

    /// `sum |eps_i| |lambda_i|^{r0}`, the ratio of the level series.
    pub fn level_ratio(&self, r0: usize) -> f64 {
        self.items.iter().map(|d| d.eps_f64().abs() * d.lambda.norm().powi(r0 as i32)).sum()
    }
}

/// Truncation parameters attached to a data set.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TruncationParams {
    pub k: f64,
    pub r0: usize,
    pub l_max: usize,
    pub j_max: usize,
    pub r_oracle: usize,
    /// `max |eps_i|`.
    pub m: f64,
}

fn strip_majorant(data: &SpectralData, k: f64, r0: usize) -> (f64, f64) {
    let mu = data.max_lambda().powi(r0 as i32);
    let up: f64 = data.items.iter().map(|d| (k * d.lambda.arg()).exp()).sum();
    let down: f64 = data.items.iter().map(|d| (-k * d.lambda.arg()).exp()).sum();
    let la0 = data
        .items
        .iter()
        .map(|d| d.lambda.norm().powi(r0 as i32) * (k * d.lambda.arg().abs()).exp())
        .fold(0.0, f64::max);
    (la0, data.max_eps() * mu * up.max(down))
}

/// Smallest level `L` with the tail of the level series below
/// [`TAIL_TARGET`] at `|z| <= radius`.
pub fn levels_for_radius(data: &SpectralData, r0: usize, radius: f64) -> Result<usize> {
    if data.is_empty() {
        return Ok(8);
    }
    let rho = data.level_ratio(r0);
    let mu = data.max_lambda();
    let zr = radius.max(1.0).powi(r0 as i32);
    for l in 1..=LEVEL_CAP {
        let next = (l + 1) as f64;
        let geometric_ok = radius * mu.powi(l as i32 + 1) <= 0.5;
        let tail = 1.5 * zr * rho.powi(l as i32 + 1) / (next * (1.0 - rho));
        if geometric_ok && tail < TAIL_TARGET {
            return Ok(l.max(8));
        }
    }
    Err(Error::TruncationCap { needed: LEVEL_CAP + 1, cap: LEVEL_CAP })
}

/// Smallest `j` with `e^{-2 pi y j} / (1 - e^{-2 pi y}) < TAIL_TARGET`.
pub fn j_terms_for(y: f64) -> usize {
    let y = y.abs().max(1e-3);
    let decay = (-2.0 * PI * y).exp();
    (1..100_000).find(|&j| decay.powi(j as i32) / (1.0 - decay) < TAIL_TARGET * 1e-2).unwrap_or(100_000).max(8)
}

/// Smallest `r0` for which the strip bounds certify `|e^{r log lambda_i}| < 1/2`
/// and `|sum eps_i lambda_i^r| < 1/2` on `Re r >= r0`, `|Im r| <= K`.
pub fn select_truncation(data: &SpectralData, k: f64) -> Result<TruncationParams> {
    if !(k > 0.0) {
        return Err(Error::invalid("K must be positive"));
    }
    let r0 = (1..)
        .find(|&r| {
            let (la0, la1) = strip_majorant(data, k, r);
            la0 < 0.5 && la1 < 0.5
        })
        .expect("|lambda| < 1 forces a finite r0");
    Ok(TruncationParams {
        k,
        r0,
        l_max: levels_for_radius(data, r0, DEFAULT_RADIUS)?,
        j_max: j_terms_for(k),
        r_oracle: 400,
        m: data.max_eps(),
    })
}

/// Output of [`spectral_from_weil`]: `log Z` contains `c t^s/(1-t^s)` and
/// `(1/s) sum_r log(1 - sum eps lambda^r) t^{s r}/r`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectralModel {
    pub data: SpectralData,
    /// `m log q`.
    pub prefix: f64,
    pub m: u32,
    /// Variable power `s` of the series part (after folding).
    pub power: u32,
}

fn merge_equal(items: Vec<SpectralDatum>) -> Vec<SpectralDatum> {
    let mut out: Vec<SpectralDatum> = Vec::new();
    for d in items {
        if let Some(e) = out
            .iter_mut()
            .find(|e| (e.lambda - d.lambda).norm() < 1e-12 * d.lambda.norm().max(1e-300))
        {
            e.eps += d.eps;
        } else {
            out.push(d);
        }
    }
    out.retain(|d| !d.eps.is_zero());
    out
}

/// Largest `s >= 2` such that the data is invariant under
/// `lambda -> e^{2 pi i/s} lambda` with equal `eps`; then
/// `sum eps lambda^r` vanishes unless `s | r`.
fn fold_order(items: &[SpectralDatum]) -> u32 {
    let n = items.len() as u32;
    (2..=n)
        .rev()
        .find(|&s| {
            let zeta = Complex64::from_polar(1.0, 2.0 * PI / s as f64);
            items.iter().all(|d| {
                items.iter().any(|e| {
                    e.eps == d.eps && (e.lambda - d.lambda * zeta).norm() < 1e-12
                })
            })
        })
        .unwrap_or(1)
}

/// Fold an orbit-invariant data set into the variable `t^s`: one datum
/// `(s eps, lambda^s)` per orbit.
fn fold(items: &[SpectralDatum], s: u32) -> Vec<SpectralDatum> {
    let mut reps: Vec<SpectralDatum> = Vec::new();
    for d in items {
        let p = d.lambda.powu(s);
        if !reps.iter().any(|r| (r.lambda - p).norm() < 1e-12) {
            reps.push(SpectralDatum { eps: d.eps * Rational64::from(s as i64), lambda: p });
        }
    }
    reps
}

/// Spectral data of a Weil number set with top eigenvalue `q^m`.
///
/// Abelian varieties use the product of the singletons `(1, alpha_j^{-1})`,
/// which agrees with the motive mapping of `wedge^* h^1`. Motives map each
/// non-top eigenvalue to `((-1)^{v+1} mult, alpha / q^m)`, and data invariant
/// under a root-of-unity rotation is folded into `t^s`.
pub fn spectral_from_weil(weil: &WeilNumberSet, m: u32) -> Result<SpectralModel> {
    let q = weil.q as f64;
    if weil.is_abelian() {
        let g = weil.g() as u32;
        if m != g {
            return Err(Error::invalid(format!("abelian variety of dimension {g} has top weight q^{g}")));
        }
        let mut data = SpectralData::empty().with_base_q(q);
        for e in &weil.entries {
            for _ in 0..e.mult {
                let single = SpectralData::new(vec![SpectralDatum::new(
                    Rational64::one(),
                    Complex64::one() / e.alpha,
                )?])
                .with_base_q(q);
                data = product_data(&data, &single)?;
            }
        }
        return Ok(SpectralModel { data, prefix: g as f64 * q.ln(), m: g, power: 1 });
    }
    let top = check_unique_top_weight(weil);
    if !top.unique {
        return Err(Error::invalid("Weil number set has no unique top weight"));
    }
    if top.m != Some(m) {
        return Err(Error::invalid(format!("top eigenvalue is q^{}, not q^{m}", top.m.unwrap_or(0))));
    }
    let qm = q.powi(m as i32);
    let mut items = Vec::new();
    for e in &weil.entries {
        if (e.alpha - qm).norm() < 1e-9 * qm && e.weight == 2 * m {
            continue;
        }
        let lambda = e.alpha / qm;
        if lambda.norm() >= 1.0 - 1e-12 {
            return Err(Error::invalid(format!("eigenvalue {} has |alpha| = q^m", e.alpha)));
        }
        let eps = Rational64::from(-e.sign() * e.mult as i64);
        items.push(SpectralDatum::new(eps, lambda)?);
    }
    let mut items = merge_equal(items);
    let s = fold_order(&items);
    if s > 1 {
        items = fold(&items, s);
    }
    Ok(SpectralModel {
        data: SpectralData::new(items).with_base_q(q),
        prefix: m as f64 * q.ln(),
        m,
        power: s,
    })
}

/// Data whose `1 - sum eps lambda^r` is the product of the two inputs'.
pub fn product_data(a: &SpectralData, b: &SpectralData) -> Result<SpectralData> {
    if a.is_empty() {
        return Ok(b.clone());
    }
    if b.is_empty() {
        return Ok(a.clone());
    }
    let mut items = a.items.clone();
    items.extend(b.items.iter().copied());
    for x in &a.items {
        for y in &b.items {
            let lambda = x.lambda * y.lambda;
            if lambda.norm() >= 1.0 {
                return Err(Error::invalid("product eigenvalue outside the unit disc"));
            }
            items.push(SpectralDatum { eps: -(x.eps * y.eps), lambda });
        }
    }
    let certified = crate::pseudo_divisor::classify_finiteness(a).certifies_periodic()
        && crate::pseudo_divisor::classify_finiteness(b).certifies_periodic();
    Ok(SpectralData {
        items,
        origin: DataOrigin::Product { certified },
        base_q: a.base_q.or(b.base_q),
    })
}

/// `|N_r|` as a float logarithm, for exact rational counts.
pub fn ln_abs_count(n: &BigRational) -> Result<f64> {
    if n.is_zero() {
        return Err(Error::NonPositiveCount { index: 0, value: "0".into() });
    }
    Ok(crate::scalar::ln_abs_rational(&n.abs()))
}

pub fn rational_from_int(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn ss4() -> WeilNumberSet {
        WeilNumberSet::motive(
            4,
            vec![
                WeilComponent { weight: 0, charpoly: vec![-1, 1] },
                WeilComponent { weight: 1, charpoly: vec![-4, 0, 1] },
                WeilComponent { weight: 2, charpoly: vec![-4, 1] },
            ],
        )
        .unwrap()
    }

    #[test]
    fn batched_counts_match_single_counts() {
        let e11 = WeilNumberSet::abelian(11, vec![11, -1, 1]).unwrap();
        for w in [e11, ss4()] {
            let all = w.virtual_counts_upto(12).unwrap();
            for (l, v) in all.iter().enumerate() {
                assert_eq!(v, &w.virtual_count(l + 1).unwrap());
            }
        }
    }

    #[test]
    fn supersingular_f4_data() {
        let model = spectral_from_weil(&ss4(), 1).unwrap();
        assert_eq!(model.power, 1);
        let mut got: Vec<(i64, f64)> =
            model.data.items.iter().map(|d| (*d.eps.numer(), d.lambda.re)).collect();
        got.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
        assert_eq!(got, vec![(1, -0.5), (-1, 0.25), (1, 0.5)]);
        assert!(model.data.is_conjugate_closed());
    }

    #[test]
    fn elliptic_curve_data_matches_product() {
        let e = WeilNumberSet::abelian(11, vec![11, -1, 1]).unwrap();
        let model = spectral_from_weil(&e, 1).unwrap();
        let mut lambdas: Vec<Complex64> = model.data.items.iter().map(|d| d.lambda).collect();
        lambdas.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap());
        let s = 43f64.sqrt() / 2.0;
        // alpha_j^{-1} = conj(alpha_j)/11, and the mixed product 1/11
        let expected = [c(1.0 / 11.0, 0.0), c(0.5 / 11.0, -s / 11.0), c(0.5 / 11.0, s / 11.0)];
        for want in expected {
            assert!(lambdas.iter().any(|l| (l - want).norm() < 1e-15));
        }
        assert_eq!(model.prefix, 11f64.ln());
        for r in 1..=10 {
            let n = rational_to_f64(&e.virtual_count(r).unwrap());
            let via = 11f64.powi(r as i32) * (1.0 - model.data.power_sum(c(r as f64, 0.0))).re;
            assert!((n - via).abs() < 1e-9 * n.abs());
        }
    }

    #[test]
    fn folded_motive_w() {
        // h^1 (+-sqrt p) plus h^2 (p), p = 5
        let w = WeilNumberSet::motive(
            5,
            vec![
                WeilComponent { weight: 1, charpoly: vec![-5, 0, 1] },
                WeilComponent { weight: 2, charpoly: vec![-5, 1] },
            ],
        )
        .unwrap();
        let model = spectral_from_weil(&w, 1).unwrap();
        assert_eq!(model.power, 2);
        assert_eq!(model.data.items.len(), 1);
        assert_eq!(model.data.items[0].eps, Rational64::from(2));
        assert!((model.data.items[0].lambda - 0.2).norm() < 1e-15);
    }

    #[test]
    fn virtual_counts_examples() {
        let h1 = WeilNumberSet::motive(5, vec![WeilComponent { weight: 1, charpoly: vec![-5, 0, 1] }])
            .unwrap();
        let v = virtual_counts(&h1, 2).unwrap();
        assert_eq!(v.exact.unwrap(), vec![rational_from_int(0), rational_from_int(-10)]);
        let e = WeilNumberSet::abelian(11, vec![11, -1, 1]).unwrap();
        assert_eq!(
            virtual_counts(&e, 2).unwrap().exact.unwrap(),
            vec![rational_from_int(11), rational_from_int(143)]
        );
        let t = WeilNumberSet::tate(7, &[0, 1]).unwrap();
        assert_eq!(virtual_counts(&t, 1).unwrap().exact.unwrap(), vec![rational_from_int(8)]);
    }

    #[test]
    fn top_weight_detection() {
        assert!(check_unique_top_weight(&ss4()).unique);
        let y = WeilNumberSet::motive(
            5,
            vec![
                WeilComponent { weight: 0, charpoly: vec![-1, 1] },
                WeilComponent { weight: 1, charpoly: vec![-5, 0, 1] },
            ],
        )
        .unwrap();
        assert!(!check_unique_top_weight(&y).unique);
        let t = check_unique_top_weight(&WeilNumberSet::tate(3, &[2]).unwrap());
        assert_eq!((t.unique, t.m, t.vanish_bound), (true, Some(2), Some(0)));
        assert!(spectral_from_weil(&y, 1).is_err());
    }

    #[test]
    fn weil_validation() {
        assert!(WeilNumberSet::from_eigenvalues(4, vec![(c(3.0, 0.0), 1, 1)]).is_err());
        assert!(WeilNumberSet::from_eigenvalues(4, vec![(c(0.0, 2.0), 1, 1)]).is_err());
        let ok = WeilNumberSet::from_eigenvalues(4, vec![(c(0.0, 2.0), 1, 1), (c(0.0, -2.0), 1, 1)])
            .unwrap();
        assert_eq!(ok.entries[0].root_order, Some(4));
    }

    #[test]
    fn truncation_examples() {
        let half = SpectralData::from_tuples(&[(1, 1, 0.5, 0.0)]).unwrap();
        assert_eq!(select_truncation(&half, PI).unwrap().r0, 2);
        assert_eq!(select_truncation(&SpectralData::empty(), 1.0).unwrap().r0, 1);
        let ss = spectral_from_weil(&ss4(), 1).unwrap().data;
        assert_eq!(select_truncation(&ss, PI).unwrap().r0, 16);
    }

    #[test]
    fn product_examples() {
        let a = SpectralData::from_tuples(&[(1, 1, 0.5, 0.0)]).unwrap();
        let p = product_data(&a, &a).unwrap();
        assert_eq!(p.items.len(), 3);
        for r in 1..=10 {
            let lhs = (1.0 - 0.5f64.powi(r)).powi(2);
            let rhs = 1.0 - p.power_sum(c(r as f64, 0.0)).re;
            assert!((lhs - rhs).abs() < 1e-15);
        }
        assert_eq!(product_data(&SpectralData::empty(), &a).unwrap(), a);
        assert_eq!(p.origin, DataOrigin::Product { certified: true });
    }
}
