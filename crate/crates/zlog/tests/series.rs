use approx::assert_relative_eq;
use num_bigint::BigUint;
use proptest::prelude::*;
use zlog::point_counts::{CountSequence, CountSource, Family};
use zlog::series::{radius_estimate, zlog_series};
use zlog::{RealPowerSeries, WeilNumberSet};

fn counts(q: u64, values: Vec<u64>) -> CountSequence {
    CountSequence::from_integers(q, values.into_iter().map(BigUint::from).collect(), CountSource::Naive).unwrap()
}

#[test]
fn first_coefficients() {
    let a1 = CountSequence::closed_form(&Family::Affine { n: 1 }, 2, 1).unwrap();
    assert_relative_eq!(zlog_series(&a1, 1).unwrap().coeff(1), 2f64.ln(), max_relative = 1e-15);
    let p1 = CountSequence::closed_form(&Family::Projective { n: 1 }, 2, 1).unwrap();
    assert_relative_eq!(zlog_series(&p1, 1).unwrap().coeff(1), 3f64.ln(), max_relative = 1e-15);
    let ones = counts(2, vec![1; 20]);
    let s = zlog_series(&ones, 20).unwrap();
    assert_eq!(s.coeff(0), 1.0);
    assert!(s.coeffs()[1..].iter().all(|&c| c == 0.0));
}

#[test]
fn affine_line_is_q_to_the_t_over_one_minus_t() {
    // q^{t/(1-t)} = exp(c t/(1-t)), c = log q; its coefficients satisfy
    // a_n = (c/n) sum_{k=1}^n k a_{n-k}
    let c = 5f64.ln();
    let mut a = vec![1.0];
    for n in 1..=30 {
        let s: f64 = (1..=n).map(|k| k as f64 * a[n - k]).sum();
        a.push(c * s / n as f64);
    }
    let seq = CountSequence::closed_form(&Family::Affine { n: 1 }, 5, 30).unwrap();
    let got = zlog_series(&seq, 30).unwrap();
    for (g, w) in got.coeffs().iter().zip(&a) {
        assert_relative_eq!(*g, *w, max_relative = 1e-13);
    }
}

#[test]
fn radius_of_the_e11_series() {
    let w = WeilNumberSet::abelian(11, vec![11, -1, 1]).unwrap();
    let s = zlog_series(&CountSequence::from_weil(&w, 256).unwrap(), 256).unwrap();
    let est = radius_estimate(&s).unwrap();
    assert!((0.9..=1.1).contains(&est.radius), "{est:?}");
    assert!(est.lower <= est.radius && est.radius <= est.upper);
}

#[test]
fn radius_of_simple_series() {
    let ones = RealPowerSeries::real(vec![1.0; 64]).unwrap();
    assert_relative_eq!(radius_estimate(&ones).unwrap().radius, 1.0, epsilon = 1e-6);
    let twos = RealPowerSeries::real((0..64).map(|r| 2f64.powi(r)).collect()).unwrap();
    assert_relative_eq!(radius_estimate(&twos).unwrap().radius, 0.5, epsilon = 1e-6);
    assert!(radius_estimate(&RealPowerSeries::real(vec![1.0; 16]).unwrap()).is_err());
}

fn family() -> impl Strategy<Value = Family> {
    prop_oneof![
        (1u32..4).prop_map(|n| Family::Affine { n }),
        (1u32..3).prop_map(|n| Family::Torus { n }),
        (1u32..4).prop_map(|n| Family::Projective { n }),
        (1u32..3).prop_map(|k| Family::Gl { k }),
        (1u32..3, 3u32..5).prop_map(|(k, n)| Family::Grassmann { k, n }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn zlog_is_multiplicative(a in family(), b in family(), q in prop::sample::select(vec![2u64, 3, 4, 5, 7])) {
        const R: usize = 32;
        let sa = CountSequence::closed_form(&a, q, R).unwrap();
        let sb = CountSequence::closed_form(&b, q, R).unwrap();
        let prod = zlog_series(&sa.product(&sb).unwrap(), R).unwrap();
        let mul = zlog_series(&sa, R).unwrap().mul(&zlog_series(&sb, R).unwrap());
        for (x, y) in prod.coeffs().iter().zip(mul.coeffs()) {
            prop_assert!((x - y).abs() <= 1e-12 * x.abs().max(1.0), "{} vs {}", x, y);
        }
    }

    #[test]
    fn exp_log_round_trip(tail in prop::collection::vec(-1.0f64..1.0, 1..33)) {
        // decaying coefficients, like a series with radius 2
        let mut c = vec![1.0];
        c.extend(tail.iter().enumerate().map(|(k, v)| v * 0.5f64.powi(k as i32 + 1)));
        let s = RealPowerSeries::real(c).unwrap();
        let back = s.log().unwrap().exp().unwrap();
        for (x, y) in back.coeffs().iter().zip(s.coeffs()) {
            prop_assert!((x - y).abs() <= 1e-13, "{} vs {}", x, y);
        }
    }
}
