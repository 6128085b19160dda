//! Euler–Maruyama paths of the built-in models with exact gamma increments.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use rayon::prelude::*;

use super::models::BuiltinModel;
use crate::error::{Error, Result};

pub const DEFAULT_STEPS: usize = 200;

/// Generator for path `index`, independent of thread scheduling.
pub fn path_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Brownian and gamma increments on a uniform grid.
#[derive(Clone, Debug)]
pub struct Noise {
    pub dt: f64,
    pub dw: Vec<f64>,
    pub dl: Vec<f64>,
}

impl Noise {
    pub fn sample<R: Rng>(rng: &mut R, horizon: f64, n_steps: usize, a: f64, b: f64) -> Result<Self> {
        if n_steps == 0 || !(horizon > 0.0) {
            return Err(Error::InvalidArgument("need n_steps >= 1 and a positive horizon".into()));
        }
        let dt = horizon / n_steps as f64;
        let gamma = Gamma::new(a * dt, 1.0 / b)
            .map_err(|e| Error::InvalidArgument(format!("gamma increment law: {e}")))?;
        let sq = dt.sqrt();
        let mut dw = Vec::with_capacity(n_steps);
        let mut dl = Vec::with_capacity(n_steps);
        for _ in 0..n_steps {
            let z: f64 = StandardNormal.sample(rng);
            dw.push(sq * z);
            dl.push(gamma.sample(rng));
        }
        Ok(Self { dt, dw, dl })
    }

    pub fn steps(&self) -> usize {
        self.dw.len()
    }
}

/// Euler scheme for `dX = ε[μ(X)dt + σ(X)dW + dL]` driven by `noise`;
/// `σ` is evaluated with full truncation.
pub fn euler_terminal(model: &BuiltinModel, eps: f64, noise: &Noise) -> f64 {
    let mut x = model.x0;
    for (dw, dl) in noise.dw.iter().zip(&noise.dl) {
        x += eps * (model.drift(x) * noise.dt + model.diffusion(x) * dw + dl);
    }
    x
}

/// Samples of `X(Δ)` from `x₀`, one ChaCha stream per path.
pub fn simulate_paths(model: &BuiltinModel, delta: f64, n_steps: usize, n_paths: usize, seed: u64) -> Result<Vec<f64>> {
    if n_steps == 0 || n_paths == 0 {
        return Err(Error::InvalidArgument("need n_steps >= 1 and n_paths >= 1".into()));
    }
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::InvalidArgument(format!("delta must be positive, got {delta}")));
    }
    (0..n_paths)
        .into_par_iter()
        .map(|i| {
            let mut rng = path_rng(seed, i as u64);
            let noise = Noise::sample(&mut rng, delta, n_steps, model.a, model.b)?;
            Ok(euler_terminal(model, 1.0, &noise))
        })
        .collect()
}
