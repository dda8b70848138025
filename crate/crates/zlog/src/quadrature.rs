//! Globally adaptive Gauss–Kronrod (7/15) quadrature of complex-valued
//! functions along straight segments, polylines and circles.

use std::collections::BinaryHeap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

pub const DEFAULT_TOL: f64 = 1e-11;
pub const MAX_SUBDIVISIONS: usize = 2000;

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QuadResult {
    pub value: Complex64,
    pub error: f64,
    pub evaluations: usize,
}

/// One 15-point Kronrod rule on `[a, b]`: (value, error estimate, integral of |f|).
fn kronrod<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> (Complex64, f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    let mut abs = fc.norm() * WGK[7];
    for i in 0..7 {
        let x = h * XGK[i];
        let (f1, f2) = (f(c - x), f(c + x));
        k += (f1 + f2) * WGK[i];
        abs += (f1.norm() + f2.norm()) * WGK[i];
        if i % 2 == 1 {
            g += (f1 + f2) * WG[i / 2];
        }
    }
    ((k * h), ((k - g) * h).norm(), abs * h.abs())
}

struct Piece {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// `int_a^b f(x) dx` for real `a < b` with absolute tolerance `tol`
/// (relaxed to a few ulps of `int |f|` when that is larger).
pub fn integrate_real<F: Fn(f64) -> Complex64>(f: F, a: f64, b: f64, tol: f64) -> Result<QuadResult> {
    if a == b {
        return Ok(QuadResult { value: Complex64::new(0.0, 0.0), error: 0.0, evaluations: 0 });
    }
    let (value, error, mut abs_total) = kronrod(&f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Piece { a, b, value, error });
    let mut total = value;
    let mut err = error;
    let mut evaluations = 15;
    let mut splits = 0;
    loop {
        let goal = tol.max(abs_total * 1e-15);
        if !total.re.is_finite() || !total.im.is_finite() {
            return Err(Error::Quadrature { from: a.to_string(), to: b.to_string() });
        }
        if err <= goal {
            break;
        }
        if splits >= MAX_SUBDIVISIONS {
            return Err(Error::Quadrature { from: a.to_string(), to: b.to_string() });
        }
        let worst = heap.pop().expect("heap holds every piece");
        let m = 0.5 * (worst.a + worst.b);
        let (v1, e1, a1) = kronrod(&f, worst.a, m);
        let (v2, e2, a2) = kronrod(&f, m, worst.b);
        evaluations += 30;
        splits += 1;
        total += v1 + v2 - worst.value;
        err += e1 + e2 - worst.error;
        abs_total += a1 + a2;
        heap.push(Piece { a: worst.a, b: m, value: v1, error: e1 });
        heap.push(Piece { a: m, b: worst.b, value: v2, error: e2 });
        // recompute from pieces now and then to avoid drift
        if splits % 64 == 0 {
            total = heap.iter().map(|p| p.value).sum();
            err = heap.iter().map(|p| p.error).sum();
        }
    }
    Ok(QuadResult { value: total, error: err, evaluations })
}

/// `int f(z) dz` along the straight segment from `a` to `b`.
pub fn integrate_segment<F: Fn(Complex64) -> Complex64>(
    f: F,
    a: Complex64,
    b: Complex64,
    tol: f64,
) -> Result<QuadResult> {
    let d = b - a;
    integrate_real(|s| f(a + d * s) * d, 0.0, 1.0, tol).map_err(|_| Error::Quadrature {
        from: fmt_c(a),
        to: fmt_c(b),
    })
}

/// Sum of segment integrals along a polyline.
pub fn integrate_polyline<F: Fn(Complex64) -> Complex64>(
    f: F,
    vertices: &[Complex64],
    tol: f64,
) -> Result<QuadResult> {
    let mut acc = QuadResult { value: Complex64::new(0.0, 0.0), error: 0.0, evaluations: 0 };
    for w in vertices.windows(2) {
        let r = integrate_segment(&f, w[0], w[1], tol)?;
        acc.value += r.value;
        acc.error += r.error;
        acc.evaluations += r.evaluations;
    }
    Ok(acc)
}

/// `oint f(z) dz` over the positively oriented circle, by the periodic
/// trapezoid rule with doubling until successive values agree to `tol`.
pub fn integrate_circle<F: Fn(Complex64) -> Complex64>(
    f: F,
    center: Complex64,
    radius: f64,
    tol: f64,
) -> Result<QuadResult> {
    let sample = |n: usize, offset: usize, step: usize| -> Complex64 {
        (offset..n)
            .step_by(step)
            .map(|k| {
                let e = Complex64::from_polar(1.0, 2.0 * PI * k as f64 / n as f64);
                f(center + e * radius) * e
            })
            .sum()
    };
    let mut n = 64;
    let mut sum = sample(n, 0, 1);
    let mut value = sum * Complex64::new(0.0, 2.0 * PI * radius / n as f64);
    while n < 1 << 16 {
        // reuse the even nodes
        let odd = sample(2 * n, 1, 2);
        sum += odd;
        n *= 2;
        let next = sum * Complex64::new(0.0, 2.0 * PI * radius / n as f64);
        let change = (next - value).norm();
        value = next;
        if change < tol {
            return Ok(QuadResult { value, error: change, evaluations: n });
        }
    }
    Err(Error::Contour(format!(
        "trapezoid rule did not converge on the circle |z - {}| = {radius}",
        fmt_c(center)
    )))
}

pub fn fmt_c(z: Complex64) -> String {
    if z.im < 0.0 {
        format!("{}-{}i", z.re, -z.im)
    } else {
        format!("{}+{}i", z.re, z.im)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn constant_and_exponential() {
        let one = integrate_real(|_| c(1.0, 0.0), 0.0, 1.0, 1e-12).unwrap();
        assert!((one.value - 1.0).norm() < 1e-15);
        let e = integrate_real(|s| c((-s).exp(), 0.0), 0.0, 10.0, 1e-12).unwrap();
        assert!((e.value.re - (1.0 - (-10f64).exp())).abs() < 1e-12);
    }

    #[test]
    fn residue_theorem_on_square() {
        let sq = [c(1.0, -1.0), c(1.0, 1.0), c(-1.0, 1.0), c(-1.0, -1.0), c(1.0, -1.0)];
        let r = integrate_polyline(|z| 1.0 / z, &sq, 1e-12).unwrap();
        assert!((r.value - c(0.0, 2.0 * PI)).norm() < 1e-10);
        let circle = integrate_circle(|z| 1.0 / (z - 0.3), c(0.0, 0.0), 1.0, 1e-13).unwrap();
        assert!((circle.value - c(0.0, 2.0 * PI)).norm() < 1e-12);
    }

    #[test]
    fn endpoint_singularity_converges() {
        let r = integrate_real(|x| c(x.sqrt().ln(), 0.0), 0.0, 1.0, 1e-10).unwrap();
        assert!((r.value.re + 0.5).abs() < 1e-9);
    }
}
