//! Exact series for the transition density of the gamma-driven OU model
//! (no Brownian part):
//!
//! `p(c + z) = b^{at} e^{aκt²/2} e^{−bz} Σ_j e_j z^{at+j−1} / Γ(at + j)`
//!
//! where `c = e^{−κt}x₀ + θ(1 − e^{−κt})` is the lower support endpoint and
//! `Σ_j e_j u^j = exp(−a Σ_k (−1)^{k+1} b^k I_k u^k / k)`,
//! `I_k = ∫_0^t (e^{κu} − 1)^k du`.
//! The Fourier transform of the truncated sum is known in closed form.

use num_complex::Complex64;

use super::models::{BuiltinModel, ModelKind};
use crate::error::{Error, Result};
use crate::quadrature::{integrate, Tolerance};
use crate::special::ln_gamma;

#[derive(Clone, Debug)]
pub struct PureJumpSeries {
    endpoint: f64,
    shape: f64,
    b: f64,
    ln_norm: f64,
    coeffs: Vec<f64>,
}

impl PureJumpSeries {
    /// Series truncated after `terms` coefficients.
    pub fn new(model: &BuiltinModel, t: f64, terms: usize) -> Result<Self> {
        if model.kind != ModelKind::PureJumpOu {
            return Err(Error::InvalidModel("series is for the pure-jump model".into()));
        }
        if !(t.is_finite() && t > 0.0) || terms == 0 {
            return Err(Error::InvalidArgument("need t > 0 and at least one term".into()));
        }
        let (k, a, b) = (model.kappa, model.a, model.b);
        let v = (k * t).exp_m1();
        let tol = Tolerance {
            abs_tol: 0.0,
            rel_tol: 1e-12,
            mass_tol: 0.0,
            max_intervals: 200,
        };
        // h_k with (e^{κu} − 1)^k scaled by V^k
        let mut h = vec![0.0; terms];
        for (kk, hk) in h.iter_mut().enumerate().skip(1) {
            let (ik, _) = integrate(|u| ((k * u).exp_m1() / v).powi(kk as i32), &[0.0, t], tol)?;
            let sign = if kk % 2 == 1 { -1.0 } else { 1.0 };
            *hk = sign * a * (b * v).powi(kk as i32) * ik / kk as f64;
        }
        let mut coeffs = vec![0.0; terms];
        coeffs[0] = 1.0;
        for j in 1..terms {
            let s: f64 = (1..=j).map(|kk| kk as f64 * h[kk] * coeffs[j - kk]).sum();
            coeffs[j] = s / j as f64;
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("pure-jump series coefficients"));
        }
        let e = (-k * t).exp();
        Ok(Self {
            endpoint: e * model.x0 + model.theta * (1.0 - e),
            shape: a * t,
            b,
            ln_norm: a * t * b.ln() + 0.5 * a * k * t * t,
            coeffs,
        })
    }

    pub fn endpoint(&self) -> f64 {
        self.endpoint
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn density(&self, x: f64) -> f64 {
        let z = x - self.endpoint;
        if z <= 0.0 {
            return 0.0;
        }
        let lz = z.ln();
        self.coeffs
            .iter()
            .enumerate()
            .map(|(j, c)| {
                let nu = self.shape + j as f64;
                c * ((nu - 1.0) * lz - ln_gamma(nu) - self.b * z + self.ln_norm).exp()
            })
            .sum()
    }

    /// Fourier transform of [`Self::density`].
    pub fn char_function(&self, omega: f64) -> Complex64 {
        let s = Complex64::new(self.b, -omega);
        let ls = s.ln();
        let shift = Complex64::new(0.0, omega * self.endpoint);
        self.coeffs
            .iter()
            .enumerate()
            .map(|(j, c)| c * (shift + self.ln_norm - (self.shape + j as f64) * ls).exp())
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmark::charfn::char_function;

    #[test]
    fn transform_approaches_the_exact_characteristic_function() {
        let m = BuiltinModel::reference(ModelKind::PureJumpOu);
        let t = 1.0 / 12.0;
        let s = PureJumpSeries::new(&m, t, 60).unwrap();
        // the series in 1/(b − iω) converges for |b − iω| > b(e^{κt} − 1)
        for &w in &[0.0, 0.3, 2.0, 15.0, 100.0, 2000.0] {
            let exact = char_function(&m, t, w).unwrap();
            assert!((s.char_function(w) - exact).norm() < 1e-13, "w={w}");
        }
    }

    #[test]
    fn single_term_is_a_gamma_density_when_kappa_vanishes() {
        let m = BuiltinModel::new(ModelKind::PureJumpOu, 1e-12, 0.0, 0.0, 3.0, 2.0, 0.5).unwrap();
        let s = PureJumpSeries::new(&m, 1.0, 5).unwrap();
        for &z in &[0.1f64, 1.0, 4.0] {
            let g = (3.0 * 2f64.ln() + 2.0 * z.ln() - 2.0 * z - ln_gamma(3.0)).exp();
            assert!((s.density(0.5 + z) - g).abs() < 1e-10);
        }
    }
}
