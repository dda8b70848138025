//! Multinomial level expansion of `log(1 - sum eps_i lambda_i^r)`.
//!
//! `log(1 - sum eps lambda^r) = -sum_k m(k) e^{r C_k}` with
//! `m(k) = (l-1)!/prod k_i! * prod eps_i^{k_i}`, `l = |k|` and
//! `C_k = sum k_i Log lambda_i`. Every term of the continuation formulas is a
//! function of `(m(k), C_k)`.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::motive_data::SpectralData;
use crate::scalar::rational_to_f64;

/// Upper bound on enumerated `k`-tuples.
pub const TUPLE_BUDGET: u128 = 4_000_000;

#[derive(Clone, Debug, PartialEq)]
pub struct RawTerm {
    pub log: Complex64,
    pub coef: BigRational,
    pub level: usize,
}

/// Number of `k` in `N^N` with `1 <= |k| <= l_max`: `C(l_max + N, N) - 1`.
pub fn tuple_count(n: usize, l_max: usize) -> u128 {
    let mut c: u128 = 1;
    for i in 1..=n as u128 {
        c = c.saturating_mul(l_max as u128 + i) / i;
    }
    c.saturating_sub(1)
}

fn for_each_composition(n: usize, l: usize, f: &mut impl FnMut(&[usize])) {
    fn rec(k: &mut Vec<usize>, i: usize, left: usize, f: &mut impl FnMut(&[usize])) {
        if i + 1 == k.len() {
            k[i] = left;
            f(k);
            return;
        }
        for v in (0..=left).rev() {
            k[i] = v;
            rec(k, i + 1, left - v, f);
        }
    }
    let mut k = vec![0; n];
    rec(&mut k, 0, l, f);
}

/// All nonzero tuples up to level `l_max`, in a deterministic order.
pub fn raw_terms(data: &SpectralData, l_max: usize) -> Result<Vec<RawTerm>> {
    let n = data.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let count = tuple_count(n, l_max);
    if count > TUPLE_BUDGET {
        return Err(Error::BudgetExceeded { needed: count, budget: TUPLE_BUDGET });
    }
    let eps: Vec<BigRational> = data
        .items
        .iter()
        .map(|d| BigRational::new(BigInt::from(*d.eps.numer()), BigInt::from(*d.eps.denom())))
        .collect();
    let logs: Vec<Complex64> = data.items.iter().map(|d| d.lambda.ln()).collect();
    // eps_i^k and 1/k! tables
    let mut eps_pow: Vec<Vec<BigRational>> = Vec::with_capacity(n);
    for e in &eps {
        let mut row = vec![BigRational::one()];
        for k in 1..=l_max {
            let next = &row[k - 1] * e;
            row.push(next);
        }
        eps_pow.push(row);
    }
    let mut fact = vec![BigInt::one()];
    for k in 1..=l_max {
        let next = &fact[k - 1] * BigInt::from(k);
        fact.push(next);
    }
    let mut out = Vec::with_capacity(count as usize);
    for l in 1..=l_max {
        for_each_composition(n, l, &mut |k| {
            let mut den = BigInt::one();
            let mut c = BigRational::one();
            let mut log = Complex64::zero();
            for i in 0..n {
                if k[i] > 0 {
                    den *= &fact[k[i]];
                    c *= &eps_pow[i][k[i]];
                    log += logs[i] * k[i] as f64;
                }
            }
            let coef = c * BigRational::new(fact[l - 1].clone(), den);
            out.push(RawTerm { log, coef, level: l });
        });
    }
    Ok(out)
}

/// Greedy clustering of points along a sort key; `close` decides membership
/// and `window` bounds the key distance of possible partners. Returns, per
/// input index, its cluster id; cluster ids follow first appearance in key
/// order.
pub fn cluster_by<K, C>(n: usize, key: K, window: f64, close: C) -> Vec<usize>
where
    K: Fn(usize) -> f64,
    C: Fn(usize, usize) -> bool,
{
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| key(a).partial_cmp(&key(b)).unwrap_or(std::cmp::Ordering::Equal));
    let mut label = vec![usize::MAX; n];
    // (representative index, key) of open clusters, in key order
    let mut reps: Vec<(usize, f64)> = Vec::new();
    let mut next = 0;
    for &i in &order {
        let ki = key(i);
        let found = reps
            .iter()
            .rev()
            .take_while(|(_, kr)| ki - kr <= window)
            .find(|(r, _)| close(*r, i))
            .map(|(r, _)| label[*r]);
        match found {
            Some(c) => label[i] = c,
            None => {
                label[i] = next;
                next += 1;
                reps.push((i, ki));
            }
        }
    }
    label
}

/// One pole term of `J~`: all tuples sharing the same `Lambda = e^{C}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExpansionTerm {
    /// `Lambda = prod lambda_i^{k_i}`; the pole of `J~` sits at `1/Lambda`.
    pub lambda: Complex64,
    pub coef: f64,
    #[serde(skip)]
    pub exact: BigRational,
    pub level: usize,
    pub contributors: usize,
}

/// Level expansion merged in the multiplicative variable, where exact
/// cancellations (e.g. between mixed products of product data) drop out.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LevelExpansion {
    pub terms: Vec<ExpansionTerm>,
    pub l_max: usize,
}

impl LevelExpansion {
    pub fn build(data: &SpectralData, l_max: usize) -> Result<Self> {
        let raw = raw_terms(data, l_max)?;
        let lambdas: Vec<Complex64> = raw.iter().map(|t| t.log.exp()).collect();
        let labels = cluster_by(
            raw.len(),
            |i| raw[i].log.re,
            1e-10,
            |a, b| (lambdas[a] - lambdas[b]).norm() <= 1e-10 * lambdas[a].norm(),
        );
        let k = labels.iter().copied().max().map_or(0, |m| m + 1);
        let mut terms: Vec<Option<ExpansionTerm>> = vec![None; k];
        for (i, t) in raw.iter().enumerate() {
            match &mut terms[labels[i]] {
                Some(e) => {
                    e.exact += &t.coef;
                    e.level = e.level.min(t.level);
                    e.contributors += 1;
                }
                slot @ None => {
                    *slot = Some(ExpansionTerm {
                        lambda: lambdas[i],
                        coef: 0.0,
                        exact: t.coef.clone(),
                        level: t.level,
                        contributors: 1,
                    })
                }
            }
        }
        let mut terms: Vec<ExpansionTerm> = terms
            .into_iter()
            .flatten()
            .filter(|e| !e.exact.is_zero())
            .map(|mut e| {
                e.coef = rational_to_f64(&e.exact);
                e
            })
            .collect();
        terms.sort_by(|a, b| {
            (a.level, a.lambda.re, a.lambda.im)
                .partial_cmp(&(b.level, b.lambda.re, b.lambda.im))
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        Ok(Self { terms, l_max })
    }

    /// Poles `1/Lambda` of `J~` with `|z| <= radius`.
    pub fn poles_within(&self, radius: f64) -> Vec<(Complex64, &ExpansionTerm)> {
        self.terms
            .iter()
            .map(|t| (Complex64::one() / t.lambda, t))
            .filter(|(z, _)| z.norm() <= radius)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::motive_data::{product_data, SpectralData};

    #[test]
    fn coefficients_are_log_series() {
        // log(1 - x) = -sum x^l / l
        let data = SpectralData::from_tuples(&[(1, 1, 0.5, 0.0)]).unwrap();
        let e = LevelExpansion::build(&data, 4).unwrap();
        let coefs: Vec<f64> = e.terms.iter().map(|t| t.coef).collect();
        assert_eq!(coefs, vec![1.0, 0.5, 1.0 / 3.0, 0.25]);
        assert!((e.terms[2].lambda.re - 0.125).abs() < 1e-16);
    }

    #[test]
    fn tuple_count_matches_enumeration() {
        let data = SpectralData::from_tuples(&[(1, 1, 0.5, 0.0), (1, 2, 0.1, 0.2), (-1, 1, 0.3, 0.0)])
            .unwrap();
        assert_eq!(raw_terms(&data, 5).unwrap().len() as u128, tuple_count(3, 5));
        assert_eq!(tuple_count(1, 3), 3);
    }

    #[test]
    fn product_cross_terms_cancel() {
        let a = SpectralData::from_tuples(&[(1, 1, 0.5, 0.0)]).unwrap();
        let b = SpectralData::from_tuples(&[(1, 1, 0.2, 0.3)]).unwrap();
        let p = product_data(&a, &b).unwrap();
        let e = LevelExpansion::build(&p, 10).unwrap();
        // only pure powers of the two factors survive
        // levels above 10 are incomplete, so only terms with |Lambda| > mu^11
        // have all their contributions; of those only pure powers survive
        let complete: Vec<&ExpansionTerm> =
            e.terms.iter().filter(|t| t.lambda.norm() > 0.5f64.powi(11)).collect();
        assert_eq!(complete.len(), 17);
        let b = Complex64::new(0.2, 0.3);
        for t in complete {
            let pure = (1..=10).any(|l| {
                (t.lambda - 0.5f64.powi(l)).norm() < 1e-15 || (t.lambda - b.powi(l)).norm() < 1e-15
            });
            assert!(pure, "{}", t.lambda);
        }
    }
}
