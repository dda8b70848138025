use num_complex::Complex64;
use zlog::abel_plana_verify::{
    box_terms, step_series, verify_box_identity, verify_step_integrals, BoxFunction, StepKind,
};
use zlog::motive_data::{spectral_from_weil, WeilComponent, DEFAULT_K};
use zlog::{SpectralData, WeilNumberSet};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn ss4_data() -> SpectralData {
    let w = WeilNumberSet::motive(
        4,
        vec![
            WeilComponent { weight: 0, charpoly: vec![-1, 1] },
            WeilComponent { weight: 1, charpoly: vec![-4, 0, 1] },
            WeilComponent { weight: 2, charpoly: vec![-4, 1] },
        ],
    )
    .unwrap();
    spectral_from_weil(&w, 1).unwrap().data
}

fn e11_data() -> SpectralData {
    spectral_from_weil(&WeilNumberSet::abelian(11, vec![11, -1, 1]).unwrap(), 1).unwrap().data
}

fn half() -> SpectralData {
    SpectralData::from_tuples(&[(1, 1, 0.5, 0.0)]).unwrap()
}

fn ws() -> [Complex64; 3] {
    [c(1.0, 0.0), c(1.0, 0.3), c(2.0, -1.0)]
}

#[test]
fn box_identity_sweep() {
    for data in [ss4_data(), half(), e11_data()] {
        for w in ws() {
            let h = BoxFunction::new(&data, w, DEFAULT_K).unwrap();
            let r0 = h.r0 as i64;
            for (a, b) in [(r0, r0 + 8), (r0 + 1, r0 + 4)] {
                let r = verify_box_identity(&h, a, b, 1e-13).unwrap();
                assert!(r.discrepancy < 1e-9, "w={w} a={a} b={b}: {}", r.discrepancy);
            }
        }
    }
}

#[test]
fn box_windows_telescope() {
    let h = BoxFunction::new(&half(), c(1.0, 0.3), DEFAULT_K).unwrap();
    let d = |a, b| verify_box_identity(&h, a, b, 1e-13).unwrap().discrepancy;
    assert!(d(2, 9) <= d(2, 5) + d(5, 9) + 1e-12);
}

#[test]
fn step_integrals_match_series() {
    let cases = [
        (StepKind::VPlus, half(), c(1.5, 0.0), 2.0, Some(10.0)),
        (StepKind::VMinus, half(), c(1.5, 0.0), 2.0, Some(10.0)),
        (StepKind::VPlus, half(), c(1.0, 0.3), 2.0, None),
        (StepKind::VMinus, ss4_data(), c(2.0, -1.0), 16.0, None),
        (StepKind::RealAxis, ss4_data(), c(2.0, 0.0), 16.0, None),
        (StepKind::RealAxis, half(), c(1.0, 0.3), 3.0, Some(7.0)),
        (StepKind::HPlus, half(), c(1.0, 0.0), 2.0, None),
        (StepKind::HMinus, half(), c(1.0, 0.0), 2.0, None),
        (StepKind::HPlus, ss4_data(), c(1.0, 0.3), 17.0, None),
        (StepKind::HMinus, e11_data(), c(2.0, -1.0), 5.0, None),
    ];
    for (kind, data, w, a, b) in cases {
        let h = BoxFunction::new(&data, w, DEFAULT_K).unwrap();
        let r = verify_step_integrals(kind, &h, a, b, 1e-13).unwrap();
        assert!(r.discrepancy < 1e-8, "{kind:?} w={w}: {} vs {}", r.lhs, r.rhs);
    }
}

#[test]
fn series_for_the_horizontal_sides_close_the_box() {
    let h = BoxFunction::new(&half(), c(1.0, 0.3), DEFAULT_K).unwrap();
    let (a, b) = (2, 9);
    let t = box_terms(&h, a, b, 1e-13).unwrap();
    let vp = step_series(StepKind::VPlus, &h, a as f64, Some(b as f64)).unwrap();
    let vm = step_series(StepKind::VMinus, &h, a as f64, Some(b as f64)).unwrap();
    let lhs: Complex64 = (a..=b).map(|r| h.eval(c(r as f64, 0.0))).sum();
    let rhs = t.half_ends + t.real_axis + t.vertical_a + t.vertical_b - vp + vm;
    assert!((lhs - rhs).norm() < 1e-8);
}

#[test]
fn infinite_limits_need_the_right_half_plane() {
    let h = BoxFunction::new(&half(), c(-0.1, 0.0), DEFAULT_K).unwrap();
    assert!(verify_step_integrals(StepKind::RealAxis, &h, 2.0, None, 1e-12).is_err());
    assert!(verify_step_integrals(StepKind::VPlus, &h, 1.0, Some(3.0), 1e-12).is_err());
}
