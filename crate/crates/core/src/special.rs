//! Cylindrical Bessel and Hankel functions of integer order.
//!
//! The boundary-integral kernels need `J_0, J_1, Y_0, Y_1` at arbitrary
//! positive arguments, and the analytic disk series needs `J_n`, `H1_n` up to
//! order ~40. Everything is built from two stable pieces:
//!
//! * `J_n` for all orders at once by downward (Miller) recurrence, normalized
//!   with `J_0(x) + 2 Σ J_{2m}(x) = 1`;
//! * `Y_0`, `Y_1` from Neumann's series
//!   `Y_0 = (2/π)(ln(x/2)+γ) J_0 + (4/π) Σ_{m≥1} (-1)^{m+1} J_{2m}/m`
//!   and its term-wise derivative, then upward recurrence for higher orders
//!   (stable because `Y_n` is the dominant solution).
//!
//! No fitted polynomial coefficients are involved; accuracy is limited only
//! by rounding in the series, ~1e-14 relative over the range used here
//! (checked against the Wronskian identity and frozen reference values).

use num_complex::Complex64;

/// Euler–Mascheroni constant.
const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

const FRAC_2_PI: f64 = core::f64::consts::FRAC_2_PI;

/// `J_0 .. J_nmax` at `x > 0` by downward recurrence.
///
/// The start order is padded far enough above `max(nmax, x)` that the
/// contamination from the unwanted solution is below f64 resolution.
pub fn bessel_j_upto(x: f64, nmax: usize) -> Vec<f64> {
    assert!(x > 0.0 && x.is_finite(), "bessel_j_upto: x must be positive and finite");
    let start = nmax.max(x.ceil() as usize) + 44;
    let mut out = vec![0.0f64; nmax + 1];

    let mut above = 0.0f64; // trial J_{m+1}
    let mut cur = 1e-300f64; // trial J_m, m = start
    let mut norm = 0.0f64; // accumulates J_0 + 2 Σ J_{2m}
    for m in (0..=start).rev() {
        if m <= nmax {
            out[m] = cur;
        }
        if m == 0 {
            norm += cur;
        } else if m % 2 == 0 {
            norm += 2.0 * cur;
        }
        let below = (2.0 * m as f64 / x) * cur - above;
        above = cur;
        cur = below;
        if cur.abs() > 1e250 {
            let scale = 1e-250;
            cur *= scale;
            above *= scale;
            norm *= scale;
            for v in out.iter_mut() {
                *v *= scale;
            }
        }
    }
    let inv = 1.0 / norm;
    for v in out.iter_mut() {
        *v *= inv;
    }
    out
}

/// `J_0, J_1, Y_0, Y_1` evaluated together (shares one recurrence pass).
#[derive(Clone, Copy, Debug)]
pub struct Cyl01 {
    pub j0: f64,
    pub j1: f64,
    pub y0: f64,
    pub y1: f64,
}

pub fn cyl01(x: f64) -> Cyl01 {
    let jmax = x.ceil() as usize + 46;
    let j = bessel_j_upto(x, jmax);
    let (y0, y1) = y01_from_j(x, &j);
    Cyl01 { j0: j[0], j1: j[1], y0, y1 }
}

fn y01_from_j(x: f64, j: &[f64]) -> (f64, f64) {
    let log_term = (0.5 * x).ln() + EULER_GAMMA;
    // Y_0 = (2/π)(ln(x/2)+γ) J_0 + (4/π) Σ (-1)^{m+1} J_{2m}/m
    let mut s0 = 0.0f64;
    // Y_1 = -Y_0' = (2/π)[(ln(x/2)+γ) J_1 - J_0/x] - (2/π) Σ (-1)^{m+1} (J_{2m-1}-J_{2m+1})/m
    let mut s1 = 0.0f64;
    let mut sign = 1.0f64;
    let mut m = 1usize;
    while 2 * m + 1 < j.len() {
        s0 += sign * j[2 * m] / m as f64;
        s1 += sign * (j[2 * m - 1] - j[2 * m + 1]) / m as f64;
        sign = -sign;
        m += 1;
    }
    let y0 = FRAC_2_PI * (log_term * j[0] + 2.0 * s0);
    let y1 = FRAC_2_PI * (log_term * j[1] - j[0] / x - s1);
    (y0, y1)
}

/// `Y_0 .. Y_nmax` at `x > 0`; upward recurrence above the series seeds.
pub fn bessel_y_upto(x: f64, nmax: usize) -> Vec<f64> {
    assert!(x > 0.0 && x.is_finite(), "bessel_y_upto: x must be positive and finite");
    let jmax = x.ceil() as usize + 46;
    let j = bessel_j_upto(x, jmax);
    let (y0, y1) = y01_from_j(x, &j);
    let mut out = vec![0.0f64; nmax + 1];
    out[0] = y0;
    if nmax >= 1 {
        out[1] = y1;
    }
    for n in 1..nmax {
        out[n + 1] = (2.0 * n as f64 / x) * out[n] - out[n - 1];
    }
    out
}

pub fn bessel_j(n: usize, x: f64) -> f64 {
    bessel_j_upto(x, n)[n]
}

pub fn bessel_y(n: usize, x: f64) -> f64 {
    bessel_y_upto(x, n)[n]
}

/// Hankel functions of the first kind, orders 0 and 1.
pub fn hankel1_01(x: f64) -> (Complex64, Complex64) {
    let c = cyl01(x);
    (Complex64::new(c.j0, c.y0), Complex64::new(c.j1, c.y1))
}

/// `H^(1)_0 .. H^(1)_nmax` at `x > 0`.
pub fn hankel1_upto(x: f64, nmax: usize) -> Vec<Complex64> {
    let j = bessel_j_upto(x, nmax);
    let y = bessel_y_upto(x, nmax);
    j.iter().zip(y.iter()).map(|(&re, &im)| Complex64::new(re, im)).collect()
}

#[cfg(test)]
#[allow(clippy::excessive_precision)] // frozen reference values keep their full printed digits
mod tests {
    use super::*;

    // (n, x, J_n(x), Y_n(x)) from mpmath at 30 digits.
    const REFERENCE: &[(usize, f64, f64, f64)] = &[
        (0, 0.1, 0.99750156206604003, -1.5342386513503668),
        (1, 0.1, 0.049937526036242000, -6.4589510947020266),
        (0, 1.0, 0.76519768655796655, 0.088256964215676958),
        (1, 1.0, 0.44005058574493352, -0.78121282130028872),
        (0, 2.5, -0.048383776468197996, 0.49807035961523189),
        (1, 2.5, 0.49709410246427404, 0.14591813796678580),
        (0, 7.3, 0.28821694763501440, 0.062773886374037598),
        (1, 7.3, 0.082570430493257831, -0.28459437186807211),
        (0, 13.7, 0.20322083263300717, 0.071688304015679300),
        (1, 13.7, 0.079142765100114513, -0.20074214532775559),
        (0, 29.0, -0.14784876468298405, 0.0094811597218333569),
        (1, 29.0, 0.0069342045592652512, 0.14803411911941652),
        (0, 50.0, 0.055812327669251815, -0.098064995470077079),
        (1, 50.0, -0.097511828125175138, -0.056795668562014768),
        (5, 1.0, 0.00024975773021123443, -260.40586662581222),
        (12, 4.243, 1.2220879871482024e-5, -2322.0142144959379),
        (20, 11.0, 5.9309351288505722e-5, -321.70885446509470),
        (31, 1.0, 5.6189483272156813e-44, -1.8283515685825775e41),
        (40, 0.1, 1.1146246002516423e-100, -7.1394189904180965e97),
        (40, 50.0, -0.13817628120116143, -0.045308011195609008),
        (41, 29.0, 5.8406080208299115e-5, -188.30238803905006),
    ];

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn matches_reference_values() {
        for &(n, x, jr, yr) in REFERENCE {
            assert!(rel(bessel_j(n, x), jr) < 5e-14, "J_{n}({x})");
            assert!(rel(bessel_y(n, x), yr) < 5e-14, "Y_{n}({x})");
        }
    }

    #[test]
    fn wronskian_identity() {
        // J_{n+1}(x) Y_n(x) - J_n(x) Y_{n+1}(x) = 2/(πx), relative to 1e-12.
        let mut x = 0.1f64;
        while x <= 50.0 {
            let nmax = 41;
            let j = bessel_j_upto(x, nmax + 1);
            let y = bessel_y_upto(x, nmax + 1);
            let exact = 2.0 / (core::f64::consts::PI * x);
            for n in 0..=nmax {
                let w = j[n + 1] * y[n] - j[n] * y[n + 1];
                assert!(
                    rel(w, exact) < 1e-12,
                    "wronskian n={n} x={x}: {w} vs {exact}"
                );
            }
            x *= 1.17;
        }
    }

    #[test]
    fn small_argument_behavior() {
        // J_0 -> 1, J_1 ~ x/2, Y_0 ~ (2/π) ln x near zero.
        let x = 1e-8;
        let c = cyl01(x);
        assert!((c.j0 - 1.0).abs() < 1e-15);
        assert!(rel(c.j1, x / 2.0) < 1e-12);
        assert!(rel(c.y0, FRAC_2_PI * ((0.5 * x).ln() + EULER_GAMMA)) < 1e-12);
        assert!(rel(c.y1, -FRAC_2_PI / x) < 1e-12);
    }

    #[test]
    fn hankel_components_match() {
        // cyl01 and the per-order entry points use different recurrence
        // start orders, so agreement is to rounding, not bit-exact.
        let (h0, h1) = hankel1_01(3.7);
        assert!(rel(h0.re, bessel_j(0, 3.7)) < 1e-14);
        assert!(rel(h0.im, bessel_y(0, 3.7)) < 1e-14);
        assert!(rel(h1.re, bessel_j(1, 3.7)) < 1e-14);
        assert!(rel(h1.im, bessel_y(1, 3.7)) < 1e-14);
    }
}
