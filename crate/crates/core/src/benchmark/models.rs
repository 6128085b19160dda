//! The three built-in mean-reverting models driven by a gamma process:
//! `dX = κ(θ − X)dt + σ_k(X) dW + dL` with `σ_1 ≡ 0`, `σ_2 ≡ σ` and
//! `σ_3(x) = σ√x`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::expansion::{ModelSpec, MAX_ORDER};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ModelKind {
    PureJumpOu,
    ConstantDiffusion,
    SqrtDiffusion,
}

impl ModelKind {
    pub const ALL: [ModelKind; 3] = [
        ModelKind::PureJumpOu,
        ModelKind::ConstantDiffusion,
        ModelKind::SqrtDiffusion,
    ];

    pub fn id(self) -> &'static str {
        match self {
            ModelKind::PureJumpOu => "pure-jump-ou",
            ModelKind::ConstantDiffusion => "constant-diffusion",
            ModelKind::SqrtDiffusion => "sqrt-diffusion",
        }
    }

    /// Highest order with a transcribed closed form.
    pub fn closed_form_max_order(self) -> usize {
        match self {
            ModelKind::PureJumpOu | ModelKind::ConstantDiffusion => 3,
            ModelKind::SqrtDiffusion => 2,
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pure-jump-ou" | "1" | "model1" => Ok(ModelKind::PureJumpOu),
            "constant-diffusion" | "2" | "model2" => Ok(ModelKind::ConstantDiffusion),
            "sqrt-diffusion" | "3" | "model3" => Ok(ModelKind::SqrtDiffusion),
            other => Err(Error::InvalidModel(format!(
                "unknown model id '{other}' (expected pure-jump-ou, constant-diffusion or sqrt-diffusion)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BuiltinModel {
    pub kind: ModelKind,
    pub kappa: f64,
    pub theta: f64,
    /// Unused by the pure-jump model.
    pub sigma: f64,
    pub a: f64,
    pub b: f64,
    pub x0: f64,
}

impl BuiltinModel {
    pub fn new(kind: ModelKind, kappa: f64, theta: f64, sigma: f64, a: f64, b: f64, x0: f64) -> Result<Self> {
        let m = Self {
            kind,
            kappa,
            theta,
            sigma: if kind == ModelKind::PureJumpOu { 0.0 } else { sigma },
            a,
            b,
            x0,
        };
        m.validate()?;
        Ok(m)
    }

    /// κ = 0.6, θ = 0.02, σ = 0.3, a = 100, b = 10, x₀ = 0.3.
    pub fn reference(kind: ModelKind) -> Self {
        Self::new(kind, 0.6, 0.02, 0.3, 100.0, 10.0, 0.3).expect("reference parameters are valid")
    }

    fn validate(&self) -> Result<()> {
        let all_finite = [self.kappa, self.theta, self.sigma, self.a, self.b, self.x0]
            .iter()
            .all(|v| v.is_finite());
        if !all_finite {
            return Err(Error::InvalidModel("parameters must be finite".into()));
        }
        if self.kappa <= 0.0 || self.a <= 0.0 || self.b <= 0.0 {
            return Err(Error::InvalidModel("kappa, a and b must be positive".into()));
        }
        if self.kind != ModelKind::PureJumpOu && self.sigma <= 0.0 {
            return Err(Error::InvalidModel("sigma must be positive".into()));
        }
        if self.kind == ModelKind::SqrtDiffusion && self.x0 <= 0.0 {
            return Err(Error::InvalidModel("sqrt-diffusion requires x0 > 0".into()));
        }
        Ok(())
    }

    /// κ(θ − x₀)
    pub fn eta(&self) -> f64 {
        self.kappa * (self.theta - self.x0)
    }

    pub fn drift(&self, x: f64) -> f64 {
        self.kappa * (self.theta - x)
    }

    pub fn diffusion(&self, x: f64) -> f64 {
        match self.kind {
            ModelKind::PureJumpOu => 0.0,
            ModelKind::ConstantDiffusion => self.sigma,
            ModelKind::SqrtDiffusion => self.sigma * x.max(0.0).sqrt(),
        }
    }

    /// Derivatives of μ and σ at x₀ up to `MAX_ORDER + 1`.
    pub fn spec(&self) -> ModelSpec {
        let k = MAX_ORDER + 1;
        let mut mu = vec![0.0; k + 1];
        mu[0] = self.eta();
        mu[1] = -self.kappa;
        let mut sig = vec![0.0; k + 1];
        match self.kind {
            ModelKind::PureJumpOu => {}
            ModelKind::ConstantDiffusion => sig[0] = self.sigma,
            ModelKind::SqrtDiffusion => {
                // d^n/dx^n x^{1/2} = (1/2)(1/2 − 1)…(1/2 − n + 1) x^{1/2 − n}
                let mut falling = 1.0;
                for (n, s) in sig.iter_mut().enumerate() {
                    *s = self.sigma * falling * self.x0.powf(0.5 - n as f64);
                    falling *= 0.5 - n as f64;
                }
            }
        }
        ModelSpec::new(self.x0, mu, sig, self.a, self.b).expect("validated parameters")
    }

    /// `E[X(t)] = θ + a/(bκ) + e^{−κt}(x₀ − θ − a/(bκ))`.
    pub fn mean(&self, t: f64) -> f64 {
        let m = self.theta + self.a / (self.b * self.kappa);
        m + (-self.kappa * t).exp() * (self.x0 - m)
    }

    /// Variance of the first-order approximation `x₀ + X₁(t)`.
    pub fn leading_variance(&self, t: f64) -> f64 {
        let s = self.diffusion(self.x0);
        s * s * t + self.a * t / (self.b * self.b)
    }
}
