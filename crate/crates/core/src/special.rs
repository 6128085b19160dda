//! Special functions used by the density kernels: gamma function wrappers,
//! the standard normal density and Kummer's confluent hypergeometric function.

use crate::error::{Error, Result};

const SERIES_CUTOFF: f64 = 30.0;
const MAX_TERMS: usize = 20_000;

pub const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Natural log of the gamma function for positive arguments.
pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma_r(x).0
}

/// The gamma function.
pub fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

/// Standard normal density.
pub fn normal_pdf(x: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * x * x).exp()
}

fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x.fract() == 0.0
}

/// Kummer's function 1F1(a; b; z) for real arguments.
///
/// Uses the power series for |z| <= 30 and the leading large-z asymptotic
/// expansion beyond; negative arguments go through Kummer's transformation.
pub fn kummer_1f1(a: f64, b: f64, z: f64) -> Result<f64> {
    let (ln_abs, sign) = ln_kummer_1f1(a, b, z)?;
    let v = sign * ln_abs.exp();
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Domain {
            function: "kummer_1f1",
            message: format!("overflow at a={a}, b={b}, z={z}"),
        })
    }
}

/// Returns `(ln|1F1(a;b;z)|, sign)`; the log form never overflows.
pub fn ln_kummer_1f1(a: f64, b: f64, z: f64) -> Result<(f64, f64)> {
    if !(a.is_finite() && b.is_finite() && z.is_finite()) {
        return Err(Error::NonFinite("kummer_1f1"));
    }
    if is_nonpositive_integer(b) {
        return Err(Error::Domain {
            function: "kummer_1f1",
            message: format!("b = {b} is a nonpositive integer"),
        });
    }
    if z == 0.0 || a == 0.0 {
        return Ok((0.0, 1.0));
    }
    if is_nonpositive_integer(a) {
        return Ok(to_log(series(a, b, z)));
    }
    if z < 0.0 {
        // M(a, b, z) = e^z M(b - a, b, -z)
        let (l, s) = ln_kummer_1f1(b - a, b, -z)?;
        return Ok((l + z, s));
    }
    if z <= SERIES_CUTOFF || a < 0.0 || b < 0.0 {
        return Ok(to_log(series(a, b, z)));
    }
    asymptotic(a, b, z)
}

fn to_log(v: f64) -> (f64, f64) {
    (v.abs().ln(), if v < 0.0 { -1.0 } else { 1.0 })
}

fn series(a: f64, b: f64, z: f64) -> f64 {
    let mut sum = 1.0;
    let mut comp = 0.0;
    let mut term = 1.0;
    for k in 0..MAX_TERMS {
        let kf = k as f64;
        term *= (a + kf) / (b + kf) * z / (kf + 1.0);
        // Neumaier summation
        let t = sum + term;
        if sum.abs() >= term.abs() {
            comp += (sum - t) + term;
        } else {
            comp += (term - t) + sum;
        }
        sum = t;
        if term == 0.0 {
            break;
        }
        let past_peak = (a + kf + 1.0).abs() * z.abs() < (b + kf + 1.0).abs() * (kf + 2.0);
        if past_peak && term.abs() <= 1e-17 * (sum + comp).abs() {
            break;
        }
    }
    sum + comp
}

fn asymptotic(a: f64, b: f64, z: f64) -> Result<(f64, f64)> {
    let mut sum = 1.0;
    let mut term = 1.0;
    let mut prev = f64::INFINITY;
    for k in 0..MAX_TERMS {
        let kf = k as f64;
        let next = term * (b - a + kf) * (1.0 - a + kf) / ((kf + 1.0) * z);
        if next == 0.0 || next.abs() > prev {
            break;
        }
        prev = next.abs();
        term = next;
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    let ln_pref = ln_gamma(b) - ln_gamma(a) + z + (a - b) * z.ln();
    let (l, s) = to_log(sum);
    if !ln_pref.is_finite() {
        return Err(Error::NonFinite("kummer_1f1 asymptotic prefactor"));
    }
    Ok((ln_pref + l, s))
}

#[cfg(test)]
mod tests {
    use super::*;

    // ln|1F1| and sign computed with 40-digit arithmetic
    const REFERENCE: &[(f64, f64, f64, f64, f64)] = &[
        (0.5, 0.5, 3.0, 3.0, 1.0),
        (2.3, 1.5, 10.0, 11.66574483793800233, 1.0),
        (1.2, 0.5, 29.5, 32.531566506200735384, 1.0),
        (1.2, 0.5, 30.5, 33.554745835961380677, 1.0),
        (4.7, 0.5, 45.0, 59.145596712522769049, 1.0),
        (5.2, 1.5, 120.0, 134.2352338782388745, 1.0),
        (0.7, 1.5, 250.0, 245.20214584855142088, 1.0),
        (7.45, 0.5, 33.0, 51.596016168807453392, 1.0),
        (2.5, 1.5, -12.0, -10.054089850944686695, -1.0),
        (0.3, 0.5, -40.0, -2.0521960244847028741, 1.0),
        (-2.0, 1.5, 7.0, 1.5546296759391053553, 1.0),
        (3.1, 2.2, 0.25, 0.3470193810468052738, 1.0),
        (0.6, 0.5, 900.0, 900.85432608459058366, 1.0),
    ];

    #[test]
    fn matches_high_precision_values() {
        for &(a, b, z, ln_ref, s_ref) in REFERENCE {
            let (l, s) = ln_kummer_1f1(a, b, z).unwrap();
            assert_eq!(s, s_ref, "sign at {a},{b},{z}");
            // relative error of the value = absolute error of its log
            assert!((l - ln_ref).abs() < 1e-12, "{a},{b},{z}: {l} vs {ln_ref}");
        }
    }

    #[test]
    fn elementary_identities() {
        for &z in &[-5.0, -0.3, 0.0, 0.7, 4.0, 12.0, 29.0] {
            let e = kummer_1f1(1.0, 1.0, z).unwrap();
            assert!((e / f64::exp(z) - 1.0).abs() < 1e-13);
            if z != 0.0 {
                let v = kummer_1f1(1.0, 2.0, z).unwrap();
                assert!((v / (f64::exp_m1(z) / z) - 1.0).abs() < 1e-13, "z={z}");
            }
            assert_eq!(kummer_1f1(2.5, 0.5, 0.0).unwrap(), 1.0);
        }
    }

    #[test]
    fn asymptotic_branch_agrees_with_series_past_cutoff() {
        for &(a, b) in &[(0.3, 0.5), (1.75, 1.5), (3.9, 0.5), (6.2, 1.5)] {
            for &z in &[31.0, 45.0, 80.0, 150.0] {
                let (la, _) = asymptotic(a, b, z).unwrap();
                let ls = series(a, b, z).ln();
                assert!((la - ls).abs() < 1e-12, "{a},{b},{z}: {la} vs {ls}");
            }
        }
    }

    #[test]
    fn rejects_nonpositive_integer_b() {
        assert!(matches!(
            kummer_1f1(1.0, -2.0, 1.0),
            Err(Error::Domain { .. })
        ));
        assert!(kummer_1f1(1.0, 0.0, 1.0).is_err());
    }
}
