//! Point counts `N_r = |X(F_{q^r})|`: brute-force enumeration over small
//! fields, closed forms for the standard cellular families, and counts from
//! Frobenius eigenvalues.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::motive_data::WeilNumberSet;

/// Largest number of ambient points `count_naive` will visit.
pub const ENUMERATION_BUDGET: u64 = 1 << 20;

/// `F_{p^k}` with elements encoded as base-`p` digit strings of the residue
/// polynomial (constant coefficient least significant).
#[derive(Clone, Debug)]
pub struct FiniteField {
    p: u64,
    k: u32,
    modulus: Vec<u64>,
    q: u64,
    exp: Vec<u32>,
    log: Vec<u32>,
}

impl FiniteField {
    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn degree(&self) -> u32 {
        self.k
    }

    pub fn size(&self) -> u64 {
        self.q
    }

    /// Monic modulus, coefficients from constant term up.
    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }

    pub fn add(&self, a: u32, b: u32) -> u32 {
        if self.p == 2 {
            return a ^ b;
        }
        let (mut a, mut b) = (a as u64, b as u64);
        let (mut out, mut scale) = (0u64, 1u64);
        while a > 0 || b > 0 {
            out += ((a % self.p + b % self.p) % self.p) * scale;
            a /= self.p;
            b /= self.p;
            scale *= self.p;
        }
        out as u32
    }

    pub fn mul(&self, a: u32, b: u32) -> u32 {
        if a == 0 || b == 0 {
            return 0;
        }
        let n = self.q - 1;
        let e = (self.log[a as usize] as u64 + self.log[b as usize] as u64) % n;
        self.exp[e as usize]
    }

    pub fn pow(&self, a: u32, e: u32) -> u32 {
        if e == 0 {
            return 1;
        }
        if a == 0 {
            return 0;
        }
        let n = self.q - 1;
        self.exp[((self.log[a as usize] as u64 * e as u64) % n) as usize]
    }

    /// Image of an integer under `Z -> F_p -> F_q`.
    pub fn from_int(&self, c: i64) -> u32 {
        c.rem_euclid(self.p as i64) as u32
    }
}

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

// Polynomials over F_p, coefficient vectors from the constant term up.

fn poly_trim(mut a: Vec<u64>) -> Vec<u64> {
    while a.len() > 1 && *a.last().unwrap() == 0 {
        a.pop();
    }
    a
}

fn poly_rem(a: &[u64], m: &[u64], p: u64) -> Vec<u64> {
    // m monic
    let mut r = a.to_vec();
    let dm = m.len() - 1;
    while r.len() > dm && r.len() > 1 {
        let lead = *r.last().unwrap();
        let shift = r.len() - 1 - dm;
        if lead != 0 {
            for (i, &mi) in m.iter().enumerate() {
                r[shift + i] = (r[shift + i] + p - (lead * mi) % p) % p;
            }
        }
        r.pop();
    }
    if r.is_empty() {
        r.push(0);
    }
    poly_trim(r)
}

fn poly_mulmod(a: &[u64], b: &[u64], m: &[u64], p: u64) -> Vec<u64> {
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + x * y) % p;
        }
    }
    poly_rem(&out, m, p)
}

fn digits(mut v: u64, p: u64, len: usize) -> Vec<u64> {
    let mut d = vec![0u64; len.max(1)];
    for x in d.iter_mut() {
        *x = v % p;
        v /= p;
    }
    d
}

fn undigits(d: &[u64], p: u64) -> u64 {
    d.iter().rev().fold(0, |acc, &x| acc * p + x)
}

fn is_irreducible(f: &[u64], p: u64) -> bool {
    let k = f.len() - 1;
    for deg in 1..=k / 2 {
        for idx in 0..p.pow(deg as u32) {
            let mut g = digits(idx, p, deg);
            g.push(1);
            if poly_rem(f, &g, p).iter().all(|&c| c == 0) {
                return false;
            }
        }
    }
    true
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

fn poly_powmod(base: &[u64], mut e: u64, m: &[u64], p: u64) -> Vec<u64> {
    let mut result = vec![1u64];
    let mut b = base.to_vec();
    while e > 0 {
        if e & 1 == 1 {
            result = poly_mulmod(&result, &b, m, p);
        }
        b = poly_mulmod(&b, &b, m, p);
        e >>= 1;
    }
    result
}

/// `F_{p^k}` with the lexicographically smallest monic irreducible modulus,
/// comparing coefficients from the leading term down.
pub fn make_field(p: u64, k: u32) -> Result<FiniteField> {
    if !is_prime(p) {
        return Err(Error::invalid(format!("{p} is not prime")));
    }
    if k == 0 {
        return Err(Error::invalid("extension degree must be >= 1"));
    }
    let q = (p as u128).checked_pow(k).unwrap_or(u128::MAX);
    if q > ENUMERATION_BUDGET as u128 {
        return Err(Error::BudgetExceeded { needed: q, budget: ENUMERATION_BUDGET as u128 });
    }
    let q = q as u64;
    let modulus = (0..q)
        .map(|idx| {
            let mut f = digits(idx, p, k as usize);
            f.push(1);
            f
        })
        .find(|f| is_irreducible(f, p))
        .ok_or_else(|| Error::invalid("no irreducible polynomial found"))?;

    let n = q - 1;
    let factors = prime_factors(n);
    let generator = (1..q)
        .map(|idx| poly_trim(digits(idx, p, k as usize)))
        .find(|g| factors.iter().all(|&l| poly_powmod(g, n / l, &modulus, p) != vec![1]))
        .ok_or_else(|| Error::invalid("no primitive element found"))?;

    let mut exp = vec![0u32; n as usize];
    let mut log = vec![0u32; q as usize];
    let mut cur = vec![1u64];
    for (i, slot) in exp.iter_mut().enumerate() {
        let v = undigits(&cur, p) as u32;
        *slot = v;
        log[v as usize] = i as u32;
        cur = poly_mulmod(&cur, &generator, &modulus, p);
    }
    Ok(FiniteField { p, k, modulus, q, exp, log })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ambient {
    Affine(usize),
    Projective(usize),
}

/// Integer polynomial as `(coefficient, exponent vector)` terms.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Polynomial {
    pub terms: Vec<(i64, Vec<u32>)>,
}

impl Polynomial {
    pub fn new(terms: Vec<(i64, Vec<u32>)>) -> Self {
        Self { terms }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VarietySpec {
    pub ambient: Ambient,
    #[serde(default)]
    pub equations: Vec<Polynomial>,
}

impl VarietySpec {
    pub fn variables(&self) -> usize {
        match self.ambient {
            Ambient::Affine(n) => n,
            Ambient::Projective(n) => n + 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let nv = self.variables();
        for (i, eq) in self.equations.iter().enumerate() {
            let mut degree = None;
            for (c, e) in &eq.terms {
                if e.len() > nv && e[nv..].iter().any(|&x| x > 0) {
                    return Err(Error::invalid(format!(
                        "equation {i} uses more than {nv} variables"
                    )));
                }
                if let Ambient::Projective(_) = self.ambient {
                    if *c == 0 {
                        continue;
                    }
                    let d: u32 = e.iter().sum();
                    match degree {
                        None => degree = Some(d),
                        Some(d0) if d0 != d => {
                            return Err(Error::invalid(format!(
                                "projective equation {i} is not homogeneous"
                            )))
                        }
                        _ => {}
                    }
                }
            }
        }
        if self.ambient == Ambient::Projective(0) && self.equations.is_empty() {
            return Err(Error::invalid("projective ambient with n = 0 needs an equation"));
        }
        Ok(())
    }

    /// Number of points `count_naive` would visit over a field of size `q`.
    pub fn enumeration_size(&self, q: u64) -> u128 {
        let q = q as u128;
        match self.ambient {
            Ambient::Affine(n) => q.checked_pow(n as u32).unwrap_or(u128::MAX),
            Ambient::Projective(n) => {
                (0..=n as u32).fold(0u128, |acc, i| acc.saturating_add(q.saturating_pow(i)))
            }
        }
    }
}

struct CompiledTerm {
    coef: u32,
    exps: Vec<(usize, u32)>,
}

fn compile(eq: &Polynomial, field: &FiniteField) -> Vec<CompiledTerm> {
    eq.terms
        .iter()
        .filter_map(|(c, e)| {
            let coef = field.from_int(*c);
            (coef != 0).then(|| CompiledTerm {
                coef,
                exps: e.iter().enumerate().filter(|(_, &x)| x > 0).map(|(i, &x)| (i, x)).collect(),
            })
        })
        .collect()
}

fn vanishes(eqs: &[Vec<CompiledTerm>], x: &[u32], field: &FiniteField) -> bool {
    eqs.iter().all(|terms| {
        let mut acc = 0u32;
        for t in terms {
            let mut v = t.coef;
            for &(i, e) in &t.exps {
                v = field.mul(v, field.pow(x[i], e));
                if v == 0 {
                    break;
                }
            }
            acc = field.add(acc, v);
        }
        acc == 0
    })
}

/// Counts tuples `x` with `x[..fixed.len()] = fixed` and the rest free.
fn count_block(
    eqs: &[Vec<CompiledTerm>],
    field: &FiniteField,
    fixed: &[u32],
    nvars: usize,
) -> u64 {
    let free = nvars - fixed.len();
    let q = field.size() as u32;
    if free == 0 {
        return vanishes(eqs, fixed, field) as u64;
    }
    // Split on the first free coordinate; deterministic sum.
    (0..q)
        .into_par_iter()
        .map(|first| {
            let mut x = fixed.to_vec();
            x.push(first);
            x.resize(nvars, 0);
            let start = fixed.len() + 1;
            let mut count = 0u64;
            loop {
                if vanishes(eqs, &x, field) {
                    count += 1;
                }
                let mut i = nvars;
                loop {
                    if i == start {
                        return count;
                    }
                    i -= 1;
                    x[i] += 1;
                    if x[i] < q {
                        break;
                    }
                    x[i] = 0;
                }
            }
        })
        .sum()
}

/// Exact number of `F_q`-points by enumeration. Projective points are
/// enumerated through normalized representatives (first nonzero coordinate 1).
pub fn count_naive(spec: &VarietySpec, field: &FiniteField) -> Result<u64> {
    spec.validate()?;
    let needed = spec.enumeration_size(field.size());
    if needed > ENUMERATION_BUDGET as u128 {
        return Err(Error::BudgetExceeded { needed, budget: ENUMERATION_BUDGET as u128 });
    }
    let eqs: Vec<_> = spec.equations.iter().map(|e| compile(e, field)).collect();
    Ok(match spec.ambient {
        Ambient::Affine(n) => count_block(&eqs, field, &[], n),
        Ambient::Projective(n) => (0..=n)
            .map(|lead| {
                let mut fixed = vec![0u32; lead];
                fixed.push(1);
                count_block(&eqs, field, &fixed, n + 1)
            })
            .sum(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum Family {
    Affine { n: u32 },
    Torus { n: u32 },
    Projective { n: u32 },
    Gl { k: u32 },
    Grassmann { k: u32, n: u32 },
    FullGrassmann { n: u32 },
    /// `|X(F_{q^r})| = q^{r(n-m)} (q^{rm} - q^{r(m-1)/2})`, `m` odd. The
    /// parameter `alpha` (the nonzero value of the form) does not enter.
    QuadricType1 { n: u32, m: u32, alpha: i64 },
}

fn gaussian_binomial(n: u32, k: u32, big_q: &BigUint) -> BigUint {
    let one = BigUint::one();
    let mut num = BigUint::one();
    let mut den = BigUint::one();
    for i in 0..k {
        num *= big_q.pow(n - i) - &one;
        den *= big_q.pow(k - i) - &one;
    }
    num / den
}

/// Closed-form count over `F_{q^r}`.
pub fn count_closed_form(family: &Family, q: u64, r: u32) -> Result<BigUint> {
    if q < 2 || r == 0 {
        return Err(Error::invalid("need q >= 2 and r >= 1"));
    }
    let big_q = BigUint::from(q).pow(r);
    let one = BigUint::one();
    Ok(match *family {
        Family::Affine { n } => big_q.pow(n),
        Family::Torus { n } => (big_q - one).pow(n),
        Family::Projective { n } => (0..=n).map(|i| big_q.pow(i)).sum(),
        Family::Gl { k } => {
            let mut v = big_q.pow(k * k.saturating_sub(1) / 2);
            for l in 1..=k {
                v *= big_q.pow(l) - &one;
            }
            v
        }
        Family::Grassmann { k, n } => {
            if k > n {
                return Err(Error::invalid("grassmann needs k <= n"));
            }
            gaussian_binomial(n, k, &big_q)
        }
        Family::FullGrassmann { n } => (0..=n).map(|k| gaussian_binomial(n, k, &big_q)).sum(),
        Family::QuadricType1 { n, m, alpha } => {
            if m % 2 == 0 || m > n || alpha == 0 {
                return Err(Error::invalid("quadric_type1 needs odd m <= n and alpha != 0"));
            }
            big_q.pow(n - m) * (big_q.pow(m) - big_q.pow((m - 1) / 2))
        }
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CountSource {
    Naive,
    ClosedForm(Family),
    Weil,
}

/// `N_1..=N_R` of one variety or motive over `F_q`.
#[derive(Clone, Debug, PartialEq)]
pub struct CountSequence {
    pub q: u64,
    pub values: Vec<BigRational>,
    pub source: CountSource,
}

impl CountSequence {
    pub fn new(q: u64, values: Vec<BigRational>, source: CountSource) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("count sequence must be non-empty"));
        }
        Ok(Self { q, values, source })
    }

    pub fn from_integers(q: u64, values: Vec<BigUint>, source: CountSource) -> Result<Self> {
        Self::new(
            q,
            values.into_iter().map(|v| BigRational::from_integer(BigInt::from(v))).collect(),
            source,
        )
    }

    pub fn closed_form(family: &Family, q: u64, len: usize) -> Result<Self> {
        let values = (1..=len as u32)
            .map(|r| count_closed_form(family, q, r))
            .collect::<Result<Vec<_>>>()?;
        Self::from_integers(q, values, CountSource::ClosedForm(family.clone()))
    }

    pub fn from_weil(weil: &WeilNumberSet, len: usize) -> Result<Self> {
        if len == 0 {
            return Err(Error::invalid("count sequence must be non-empty"));
        }
        let mut values = weil.virtual_counts_upto(len)?;
        if weil.is_abelian() {
            values.iter_mut().for_each(|v| *v = v.abs());
        }
        Self::new(weil.q, values, CountSource::Weil)
    }

    /// Pointwise product, i.e. the counts of `X_1 x X_2`.
    pub fn product(&self, other: &Self) -> Result<Self> {
        if self.q != other.q {
            return Err(Error::invalid("count sequences over different fields"));
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect();
        Self::new(self.q, values, self.source.clone())
    }

    /// Rejects sequences with a nonpositive entry.
    pub fn check_positive(&self) -> Result<()> {
        for (i, v) in self.values.iter().enumerate() {
            if !v.is_positive() {
                return Err(Error::NonPositiveCount { index: i + 1, value: v.to_string() });
            }
        }
        Ok(())
    }
}

/// `N_r` from Frobenius data: `|prod_j (1 - alpha_j^r)|` for an abelian model,
/// `sum (-1)^v alpha_{v,j}^r` for a motive. Exact whenever the eigenvalues come
/// from integer characteristic polynomials.
pub fn counts_from_weil(weil: &WeilNumberSet, r: usize) -> Result<BigRational> {
    if r == 0 {
        return Err(Error::invalid("extension degree must be >= 1"));
    }
    let v = weil.virtual_count(r)?;
    Ok(if weil.is_abelian() { v.abs() } else { v })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn curve() -> VarietySpec {
        // y^2 z + y z^2 - x^3 in variables (x, y, z)
        VarietySpec {
            ambient: Ambient::Projective(2),
            equations: vec![Polynomial::new(vec![
                (1, vec![0, 2, 1]),
                (1, vec![0, 1, 2]),
                (-1, vec![3, 0, 0]),
            ])],
        }
    }

    #[test]
    fn small_field_moduli() {
        assert_eq!(make_field(2, 1).unwrap().modulus(), &[0, 1]);
        assert_eq!(make_field(2, 2).unwrap().modulus(), &[1, 1, 1]);
        assert_eq!(make_field(3, 2).unwrap().modulus(), &[1, 0, 1]);
        assert!(make_field(4, 1).is_err());
        assert!(make_field(2, 21).is_err());
    }

    #[test]
    fn field_axioms_spot_check() {
        let f = make_field(3, 3).unwrap();
        for a in 1..f.size() as u32 {
            let inv = f.pow(a, (f.size() - 2) as u32);
            assert_eq!(f.mul(a, inv), 1);
            assert_eq!(f.pow(a, (f.size() - 1) as u32), 1);
        }
        // distributivity on a few triples
        for (a, b, c) in [(3, 7, 11), (20, 5, 26), (1, 2, 13)] {
            assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
        }
    }

    #[test]
    fn naive_counts() {
        let a1 = VarietySpec { ambient: Ambient::Affine(1), equations: vec![] };
        assert_eq!(count_naive(&a1, &make_field(2, 3).unwrap()).unwrap(), 8);
        assert_eq!(count_naive(&curve(), &make_field(2, 1).unwrap()).unwrap(), 3);
        assert_eq!(count_naive(&curve(), &make_field(2, 2).unwrap()).unwrap(), 9);
    }

    #[test]
    fn naive_rejects_bad_specs() {
        let p0 = VarietySpec { ambient: Ambient::Projective(0), equations: vec![] };
        assert!(count_naive(&p0, &make_field(2, 1).unwrap()).is_err());
        let inhom = VarietySpec {
            ambient: Ambient::Projective(1),
            equations: vec![Polynomial::new(vec![(1, vec![2, 0]), (1, vec![0, 1])])],
        };
        assert!(count_naive(&inhom, &make_field(2, 1).unwrap()).is_err());
        let big = VarietySpec { ambient: Ambient::Affine(3), equations: vec![] };
        assert!(matches!(
            count_naive(&big, &make_field(2, 8).unwrap()),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn closed_form_examples() {
        let c = |f: Family, q, r| count_closed_form(&f, q, r).unwrap();
        assert_eq!(c(Family::Projective { n: 2 }, 2, 1), BigUint::from(7u32));
        assert_eq!(c(Family::Gl { k: 2 }, 2, 1), BigUint::from(6u32));
        assert_eq!(c(Family::Grassmann { k: 1, n: 2 }, 3, 1), BigUint::from(4u32));
        assert_eq!(c(Family::Grassmann { k: 2, n: 4 }, 2, 1), BigUint::from(35u32));
        assert_eq!(c(Family::FullGrassmann { n: 2 }, 2, 1), BigUint::from(5u32));
        assert!(count_closed_form(&Family::QuadricType1 { n: 3, m: 2, alpha: 1 }, 2, 1).is_err());
    }
}
