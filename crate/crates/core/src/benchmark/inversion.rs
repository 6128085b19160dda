//! Fourier inversion of characteristic functions with binomial (Euler)
//! averaging of the truncated partial sums
//!
//! `s_n(x) = h/(2π)·Re φ(0) + (h/π) Σ_{k=1}^{n} [Re φ(kh) cos(khx) + Im φ(kh) sin(khx)]`,
//! `E(m, n, x) = Σ_{k=0}^{m} C(m, k) 2^{−m} s_{n+k}(x)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use super::charfn::{char_function, SqrtPath};
use super::models::{BuiltinModel, ModelKind};
use super::pure_jump_series::PureJumpSeries;
use crate::error::{Error, Result};

/// Bound on `Σ_{k>n+m} |φ(kh)|·h/π` enforced by widening `n`.
pub const TAIL_TOL: f64 = 1e-8;
/// Largest `n + m` the self-check may widen to.
pub const MAX_TERMS: usize = 1 << 18;
/// Terms of the exact pure-jump series subtracted before inverting.
pub const REFERENCE_TERMS: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InversionConfig {
    pub euler_m: usize,
    pub euler_n: usize,
    pub step_h: f64,
}

impl InversionConfig {
    pub const DEFAULT_M: usize = 11;
    pub const DEFAULT_N: usize = 50;

    pub fn new(euler_m: usize, euler_n: usize, step_h: f64) -> Result<Self> {
        let c = Self { euler_m, euler_n, step_h };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.euler_m < 1 || self.euler_n < self.euler_m {
            return Err(Error::InvalidArgument(format!(
                "need 1 <= euler_m <= euler_n, got m = {}, n = {}",
                self.euler_m, self.euler_n
            )));
        }
        if !(self.step_h.is_finite() && self.step_h > 0.0) {
            return Err(Error::InvalidArgument(format!("step_h must be positive, got {}", self.step_h)));
        }
        Ok(())
    }

    /// Default `m`, `n` with `h = 2π/(span + 2·pad)`.
    pub fn for_window(span: f64, pad: f64) -> Result<Self> {
        Self::new(Self::DEFAULT_M, Self::DEFAULT_N, 2.0 * PI / (span + 2.0 * pad))
    }
}

/// Padding of ten standard deviations plus `40/b` for the exponential
/// right tail of the jump part.
pub fn default_pad(model: &BuiltinModel, delta: f64) -> f64 {
    10.0 * model.leading_variance(delta).sqrt() + 40.0 / model.b
}

/// Configuration for reporting on `[lo, hi]`.
pub fn default_config(model: &BuiltinModel, delta: f64, lo: f64, hi: f64) -> Result<InversionConfig> {
    if !(lo.is_finite() && hi.is_finite() && hi > lo) {
        return Err(Error::InvalidArgument(format!("invalid window [{lo}, {hi}]")));
    }
    InversionConfig::for_window(hi - lo, default_pad(model, delta))
}

/// Precomputed frequency samples ready for repeated evaluation.
#[derive(Clone, Debug)]
pub struct FourierDensity {
    center: f64,
    h: f64,
    m: usize,
    n: usize,
    values: Vec<Complex64>,
    tail: f64,
    reference: Option<PureJumpSeries>,
}

impl FourierDensity {
    /// Samples `φ` at `kh` for `k = 0, 1, …` in increasing order, widening
    /// `n` until the tail bound [`TAIL_TOL`] holds. The series is expanded
    /// around `center` for numerical conditioning.
    pub fn from_char_fn<F>(mut phi: F, center: f64, cfg: InversionConfig) -> Result<Self>
    where
        F: FnMut(f64) -> Result<Complex64>,
    {
        cfg.validate()?;
        let (h, m) = (cfg.step_h, cfg.euler_m);
        let mut values: Vec<Complex64> = Vec::new();
        let mut n = cfg.euler_n;
        loop {
            let need = n + m;
            if need > MAX_TERMS {
                return Err(Error::Domain {
                    function: "invert_fourier",
                    message: format!("tail mass above {TAIL_TOL} with {MAX_TERMS} terms"),
                });
            }
            let probe = 2 * need + 64;
            while values.len() <= probe {
                let w = values.len() as f64 * h;
                let v = phi(w)? * Complex64::from_polar(1.0, -w * center);
                if !(v.re.is_finite() && v.im.is_finite()) {
                    return Err(Error::NonFinite("characteristic function sample"));
                }
                values.push(v);
            }
            let tail: f64 = values[need + 1..=probe].iter().map(|v| v.norm()).sum::<f64>() * h / PI;
            if tail < TAIL_TOL {
                values.truncate(need + 1);
                return Ok(Self { center, h, m, n, values, tail, reference: None });
            }
            n *= 2;
        }
    }

    /// Benchmark density of a built-in model. The pure-jump model inverts
    /// the difference from a truncated exact series whose density is added
    /// back in closed form.
    pub fn for_model(model: &BuiltinModel, delta: f64, cfg: InversionConfig) -> Result<Self> {
        let center = model.mean(delta);
        match model.kind {
            ModelKind::PureJumpOu => {
                let reference = PureJumpSeries::new(model, delta, REFERENCE_TERMS)?;
                let mut fd = Self::from_char_fn(
                    |w| Ok(char_function(model, delta, w)? - reference.char_function(w)),
                    center,
                    cfg,
                )?;
                fd.reference = Some(reference);
                Ok(fd)
            }
            ModelKind::ConstantDiffusion => Self::from_char_fn(|w| char_function(model, delta, w), center, cfg),
            ModelKind::SqrtDiffusion => {
                let mut path = SqrtPath::new(model, delta)?;
                Self::from_char_fn(|w| path.advance_to(w), center, cfg)
            }
        }
    }

    /// The truncation base after the tail self-check.
    pub fn euler_n(&self) -> usize {
        self.n
    }

    pub fn tail_mass(&self) -> f64 {
        self.tail
    }

    pub fn density(&self, x: f64) -> Result<f64> {
        let xc = x - self.center;
        let (h, n, m) = (self.h, self.n, self.m);
        let mut s = h / (2.0 * PI) * self.values[0].re;
        let mut avg = 0.0;
        let mut weight = 0.5f64.powi(m as i32);
        for (k, v) in self.values.iter().enumerate().skip(1) {
            let (sin, cos) = (k as f64 * h * xc).sin_cos();
            s += h / PI * (v.re * cos + v.im * sin);
            if k >= n {
                let j = k - n;
                avg += weight * s;
                weight *= (m - j) as f64 / (j + 1) as f64;
            }
        }
        if !avg.is_finite() {
            return Err(Error::NonFinite("Euler partial sums"));
        }
        Ok(avg + self.reference.as_ref().map_or(0.0, |r| r.density(x)))
    }

    pub fn densities(&self, xs: &[f64]) -> Result<Vec<f64>> {
        xs.par_iter().map(|&x| self.density(x)).collect()
    }
}

/// `E(m, n, x)` for the transition density of `model` over `delta`.
pub fn invert_fourier(model: &BuiltinModel, delta: f64, x: f64, cfg: InversionConfig) -> Result<f64> {
    FourierDensity::for_model(model, delta, cfg)?.density(x)
}
