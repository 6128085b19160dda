//! Complex dilogarithm `Li₂(z) = Σ_{k≥1} z^k/k²` on the principal branch.

use num_complex::Complex64;
use std::f64::consts::PI;

const PI2_6: f64 = PI * PI / 6.0;

/// `B_{2k}/(2k+1)!` for k = 1..=11.
const BERNOULLI: [f64; 11] = [
    1.0 / 36.0,
    -1.0 / 3600.0,
    1.0 / 211680.0,
    -1.0 / 10886400.0,
    1.0 / 526901760.0,
    -4.064_761_645_144_225_5e-11,
    8.921_691_020_456_453e-13,
    -1.993_929_586_072_107_6e-14,
    4.518_980_029_619_918_2e-16,
    -1.035_651_761_218_124_7e-17,
    2.395_218_621_026_186_7e-19,
];

/// `Li₂` as a series in `u = −ln(1 − z)`, accurate for `|u| ≲ 1.3`.
fn bernoulli_series(u: Complex64) -> Complex64 {
    let u2 = u * u;
    let mut sum = Complex64::new(0.0, 0.0);
    let mut p = u * u2;
    for &c in &BERNOULLI {
        sum += p * c;
        p *= u2;
    }
    u - u2 * 0.25 + sum
}

fn real_dilog(x: f64) -> f64 {
    dilog(Complex64::new(x, 0.0)).re
}

/// Principal-branch dilogarithm. On the cut `z = x > 1` the value is the
/// limit from below, `Im Li₂(x) = −π ln x`.
pub fn dilog(z: Complex64) -> Complex64 {
    let (x, y) = (z.re, z.im);
    if y == 0.0 {
        if x == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if x == 1.0 {
            return Complex64::new(PI2_6, 0.0);
        }
        if x > 1.0 {
            let l = x.ln();
            return Complex64::new(2.0 * PI2_6 - 0.5 * l * l - real_dilog(1.0 / x), -PI * l);
        }
    }
    let nz = z.norm_sqr();
    if nz < f64::EPSILON {
        return z * (Complex64::new(1.0, 0.0) + z * 0.25);
    }
    let one = Complex64::new(1.0, 0.0);
    if x <= 0.5 {
        if nz > 1.0 {
            // Li₂(z) = −Li₂(1/z) − π²/6 − ½ln²(−z)
            let l = (-z).ln();
            -bernoulli_series(-(one - one / z).ln()) - PI2_6 - 0.5 * l * l
        } else {
            bernoulli_series(-(one - z).ln())
        }
    } else if nz <= 2.0 * x {
        // Li₂(z) = −Li₂(1 − z) + π²/6 − ln z ln(1 − z)
        let lz = z.ln();
        -bernoulli_series(-lz) + PI2_6 - lz * (one - z).ln()
    } else {
        let l = (-z).ln();
        -bernoulli_series(-(one - one / z).ln()) - PI2_6 - 0.5 * l * l
    }
}
