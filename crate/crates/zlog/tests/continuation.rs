use std::f64::consts::PI;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use zlog::continuation::{
    eval_f, eval_t, locate_weil_poles, monodromy_loop, residue_estimate, Engine, PathSpec, ZlogModel,
};
use zlog::motive_data::{spectral_from_weil, WeilComponent, DEFAULT_K};
use zlog::scalar::ln_abs_rational;
use zlog::{Error, SpectralData, WeilNumberSet};

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

fn e11() -> WeilNumberSet {
    WeilNumberSet::abelian(11, vec![11, -1, 1]).unwrap()
}

fn half() -> SpectralData {
    SpectralData::from_tuples(&[(1, 1, 0.5, 0.0)]).unwrap()
}

/// `N_r = 1 - p_r + q^r` with `p_r = a^r + b^r` from the trace recurrence
/// `p_r = t p_{r-1} - det p_{r-2}`.
fn curve_counts(t: i64, det: i64, q: i64, len: usize) -> Vec<BigInt> {
    let (mut p0, mut p1) = (BigInt::from(2), BigInt::from(t));
    let mut qr = BigInt::from(1);
    let mut out = Vec::new();
    for _ in 0..len {
        qr *= q;
        out.push(BigInt::from(1) - &p1 + &qr);
        let p2 = &p1 * t - &p0 * det;
        p0 = std::mem::replace(&mut p1, p2);
    }
    out
}

/// `exp(sum_{r <= len} log|N_r| z^r / r)`.
fn count_oracle(counts: &[BigInt], z: Complex64) -> Complex64 {
    let mut acc = c(0.0, 0.0);
    let mut zr = c(1.0, 0.0);
    for (i, n) in counts.iter().enumerate() {
        zr *= z;
        acc += ln_abs_rational(&BigRational::from_integer(n.clone())) * zr / (i + 1) as f64;
    }
    acc.exp()
}

#[test]
fn t_matches_partial_sums_for_supersingular_data() {
    let data = spectral_from_weil(&ss4(), 1).unwrap().data;
    let r0 = 16;
    for w in [c(1.0, 0.0), c(1.0, 0.3), c(2.0, -1.0)] {
        let oracle: Complex64 = (r0..=400)
            .map(|r| (1.0 - data.power_sum(c(r as f64, 0.0))).ln() * (-w * r as f64).exp())
            .sum();
        let got = eval_t(w, &data, DEFAULT_K).unwrap();
        assert!((got - oracle).norm() < 1e-8, "{w}: {got} vs {oracle}");
    }
    assert_eq!(eval_t(c(0.3, 0.1), &SpectralData::empty(), DEFAULT_K).unwrap(), c(0.0, 0.0));
}

#[test]
fn t_deep_in_the_right_half_plane() {
    // the sum is h(2) + h(3) + ..., about twice the half-weighted first term
    let w = c(5.0, 0.0);
    let h = |r: i32| (1.0 - 0.5f64.powi(r)).ln() * (-5.0 * r as f64).exp();
    let got = eval_t(w, &half(), DEFAULT_K).unwrap();
    let sum: f64 = (2..60).map(h).sum();
    assert!((got.re - sum).abs() < 1e-15 && got.im.abs() < 1e-18);
    assert!((got.re - 0.5 * h(2)).abs() > 1e-6);
}

#[test]
fn literal_triple_sum_agrees_with_closed_form() {
    let eng = Engine::new(&half(), DEFAULT_K, 4.0).unwrap();
    let w = c(-1.0, 0.4);
    let closed = eng.eval_t(w).unwrap();
    let literal = eng.eval_t_literal(w, 100_000).unwrap();
    assert!((closed - literal).norm() < 1e-4 * closed.norm().max(1.0));
}

#[test]
fn unit_disc_oracle_for_e11() {
    let model = ZlogModel::abelian(e11(), DEFAULT_K).unwrap();
    for z in [c(0.3, 0.0), c(0.4, 0.0), c(-0.25, 0.2)] {
        let got = model.eval_zlog(&PathSpec::straight(z)).unwrap();
        let want = count_oracle(&curve_counts(1, 11, 11, 400), z);
        assert!((got.value - want).norm() < 1e-7 * want.norm(), "{z}: {} vs {want}", got.value);
    }
}

#[test]
fn unit_disc_oracle_for_supersingular_motive() {
    let model = ZlogModel::motive(ss4(), 1, DEFAULT_K).unwrap();
    for z in [c(0.2, 0.0), c(-0.1, 0.15)] {
        let got = model.eval_zlog(&PathSpec::straight(z)).unwrap();
        // alpha = +-2 over F_4: trace 0, determinant -4
        let want = count_oracle(&curve_counts(0, -4, 4, 400), z);
        assert!((got.value - want).norm() < 1e-7 * want.norm(), "{z}");
    }
}

#[test]
fn projective_line_from_lambda_models() {
    let l1 = ZlogModel::lambda_n(1, 3, DEFAULT_K).unwrap();
    let l2 = ZlogModel::lambda_n(2, 3, DEFAULT_K).unwrap();
    let path = PathSpec::new(vec![c(0.0, 0.0), c(0.3, 0.4), c(0.6, -0.2)], 1e-3).unwrap();
    let ratio = l2.eval_zlog(&path).unwrap().value / l1.eval_zlog(&path).unwrap().value;
    // Z_log(P^1) from the counts 1 + 3^r
    let mut acc = c(0.0, 0.0);
    let z = c(0.6, -0.2);
    for r in 1..=300 {
        acc += (1.0 + 3f64.powi(r)).ln() * z.powi(r) / r as f64;
    }
    assert!((ratio - acc.exp()).norm() < 1e-9 * ratio.norm());
}

#[test]
fn monodromy_around_level_poles() {
    let eng = Engine::new(&half(), DEFAULT_K, 10.0).unwrap();
    let one = monodromy_loop(&eng, c(2.0, 0.0), 0.5).unwrap();
    assert!((one.value.norm() / (2.0 * PI) - 1.0).abs() < 1e-6);
    assert_eq!((one.numer, one.denom), (1, 1));
    let two = monodromy_loop(&eng, c(4.0, 0.0), 0.5).unwrap();
    assert!((two.value.norm() / (2.0 * PI) - 0.5).abs() < 1e-6);
    let none = monodromy_loop(&eng, c(3.0, 2.0), 0.5).unwrap();
    assert!(none.value.norm() < 1e-10);
    assert!(matches!(monodromy_loop(&eng, c(3.0, 0.0), 1.0), Err(Error::Contour(_))));
    assert!(matches!(monodromy_loop(&eng, c(3.0, 0.0), 1.5), Err(Error::Contour(_))));
}

#[test]
fn residues_of_e11() {
    let model = ZlogModel::abelian(e11(), DEFAULT_K).unwrap();
    let a1 = c(0.5, 43f64.sqrt() / 2.0);
    let r1 = residue_estimate(&model, a1).unwrap();
    assert!((r1.residue - 1.0).norm() < 1e-4);
    let r2 = residue_estimate(&model, a1 * a1).unwrap();
    assert!((r2.residue - 0.5).norm() < 1e-4);
    assert_eq!((r2.numer, r2.denom), (1, 2));
    assert!(matches!(residue_estimate(&model, c(1.0, 0.0)), Err(Error::OrderMismatch { found: 2 })));
}

#[test]
fn weil_numbers_from_poles() {
    let model = ZlogModel::abelian(e11(), DEFAULT_K).unwrap();
    let poles = locate_weil_poles(&model).unwrap();
    let s = 43f64.sqrt() / 2.0;
    assert_eq!(poles.len(), 2);
    assert!((poles[0] - c(0.5, -s)).norm() < 1e-8);
    assert!((poles[1] - c(0.5, s)).norm() < 1e-8);
    let ss = ZlogModel::motive(ss4(), 1, DEFAULT_K).unwrap();
    let poles = locate_weil_poles(&ss).unwrap();
    assert_eq!(poles.len(), 2);
    assert!((poles[0] + 2.0).norm() < 1e-8 && (poles[1] - 2.0).norm() < 1e-8);
    assert!(locate_weil_poles(&ZlogModel::affine(1, 5, DEFAULT_K).unwrap()).unwrap().is_empty());
}

#[test]
fn branch_periods_around_the_pole_cluster() {
    let a = PathSpec::straight(c(-3.0, 0.0));
    let b = PathSpec::new(
        vec![c(0.0, 0.0), c(1.5, 1.0), c(10.0, 1.0), c(10.0, -1.0), c(1.5, -1.0), c(-3.0, 0.0)],
        1e-3,
    )
    .unwrap();
    let fa = eval_f(&a, &half(), DEFAULT_K).unwrap();
    let fb = eval_f(&b, &half(), DEFAULT_K).unwrap();
    let ratio = fb.value / fa.value;
    assert!((ratio.norm() - 1.0).abs() < 1e-8, "{ratio}");
    // the loop runs clockwise around 2, 4, 8 with residues 1, 1/2, 1/3
    let turns = ratio.arg() / (2.0 * PI);
    assert!((turns - 1.0 / 6.0).abs() < 1e-6, "{turns}");
}

#[test]
fn real_data_gives_real_values_on_the_segment() {
    let z = 0.7;
    let got = eval_f(&PathSpec::straight(c(z, 0.0)), &half(), DEFAULT_K).unwrap();
    let oracle: f64 = (2..400).map(|r| (1.0 - 0.5f64.powi(r)).ln() * z.powi(r) / r as f64).sum();
    assert!(got.value.im.abs() < 1e-14);
    assert!((got.value.re - oracle.exp()).abs() < 1e-9);
}

#[test]
fn log_derivative_matches_finite_differences() {
    let model = ZlogModel::abelian(e11(), DEFAULT_K).unwrap();
    let z = c(-1.5, 0.7);
    let h = 1e-4;
    let eng = model.engine(3.0).unwrap();
    let at = |x: Complex64| {
        let p = PathSpec::new(vec![c(0.0, 0.0), c(-0.5, 0.7), x], 1e-3).unwrap();
        model.eval_zlog_with(&eng, &p).unwrap().branch_offset
    };
    let fd = (at(z + h) - at(z - h)) / (2.0 * h);
    let d = model.log_derivative_with(&eng, z).unwrap();
    assert!((fd - d).norm() < 1e-5 * d.norm().max(1.0), "{fd} vs {d}");
}

#[test]
fn clearance_is_enforced() {
    let err = eval_f(&PathSpec::straight(c(3.0, 0.0)), &half(), DEFAULT_K).unwrap_err();
    assert!(matches!(err, Error::TooCloseToSupport { .. }));
    let model = ZlogModel::abelian(e11(), DEFAULT_K).unwrap();
    assert!(model.eval_zlog(&PathSpec::straight(c(1.5, 0.0))).is_err());
}
