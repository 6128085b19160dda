//! Pathwise expansion terms `X_m(Δ)` of the scaled solution
//! `X(ε, t) = x₀ + Σ ε^m X_m(t)`.
//!
//! `X_1 = μ(x₀) t + σ(x₀) W(t) + L(t)` and, for `m ≥ 2`,
//! `X_m(t) = ∫₀^t μ_{m-1}(s) ds + ∫₀^t σ_{m-1}(s) dW(s)` where `μ_m`, `σ_m` are
//! the Faà di Bruno compositions over the ordered compositions of `m`.

use std::sync::{Arc, Mutex};

use crate::error::{Error, Result};
use crate::ito_algebra::{IntegralExpression, IntegralIndex, Integrator, Term};

/// Highest density expansion order supported.
pub const MAX_ORDER: usize = 4;

/// Numeric description of `dX = μ(X)dt + σ(X)dW + dL` at the initial state.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelSpec {
    x0: f64,
    drift_derivs: Vec<f64>,
    diffusion_derivs: Vec<f64>,
    gamma_a: f64,
    gamma_b: f64,
    pure_jump: bool,
}

impl ModelSpec {
    /// `drift_derivs[k]` and `diffusion_derivs[k]` are the k-th derivatives of
    /// μ and σ at `x0`. The model is pure-jump when every diffusion derivative
    /// is zero.
    pub fn new(
        x0: f64,
        drift_derivs: Vec<f64>,
        diffusion_derivs: Vec<f64>,
        gamma_a: f64,
        gamma_b: f64,
    ) -> Result<Self> {
        let pure_jump = diffusion_derivs.iter().all(|&d| d == 0.0);
        let spec = Self {
            x0,
            drift_derivs,
            diffusion_derivs,
            gamma_a,
            gamma_b,
            pure_jump,
        };
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidModel(m.to_string()));
        if !self.x0.is_finite() {
            return bad("x0 must be finite");
        }
        if !(self.gamma_a.is_finite() && self.gamma_a > 0.0) {
            return bad("gamma shape rate a must be finite and positive");
        }
        if !(self.gamma_b.is_finite() && self.gamma_b > 0.0) {
            return bad("gamma scale parameter b must be finite and positive");
        }
        if self.drift_derivs.is_empty() || self.diffusion_derivs.is_empty() {
            return bad("derivative arrays must contain at least the value at x0");
        }
        if self
            .drift_derivs
            .iter()
            .chain(&self.diffusion_derivs)
            .any(|d| !d.is_finite())
        {
            return bad("derivative values must be finite");
        }
        if !self.pure_jump && self.diffusion_derivs[0] <= 0.0 {
            return bad("diffusion coefficient at x0 must be positive");
        }
        Ok(())
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn drift_derivs(&self) -> &[f64] {
        &self.drift_derivs
    }

    pub fn diffusion_derivs(&self) -> &[f64] {
        &self.diffusion_derivs
    }

    pub fn gamma_a(&self) -> f64 {
        self.gamma_a
    }

    pub fn gamma_b(&self) -> f64 {
        self.gamma_b
    }

    pub fn is_pure_jump(&self) -> bool {
        self.pure_jump
    }

    /// μ(x₀)
    pub fn mu0(&self) -> f64 {
        self.drift_derivs[0]
    }

    /// σ(x₀)
    pub fn sigma0(&self) -> f64 {
        self.diffusion_derivs[0]
    }

    /// Highest derivative order available for both coefficients.
    pub fn derivative_order(&self) -> usize {
        self.drift_derivs.len().min(self.diffusion_derivs.len()) - 1
    }

    /// Checks that derivatives up to order `m` are available.
    pub fn require_order(&self, m: usize) -> Result<()> {
        for (kind, d) in [("drift", &self.drift_derivs), ("diffusion", &self.diffusion_derivs)] {
            if d.len() <= m {
                return Err(Error::MissingDerivative {
                    kind,
                    order: m,
                    available: d.len() - 1,
                });
            }
        }
        Ok(())
    }
}

/// `(ℓ, (j₁,…,j_ℓ))` with `jᵢ ≥ 1` and `Σjᵢ = m`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IndexTuple {
    pub ell: usize,
    pub j: Vec<usize>,
}

impl IndexTuple {
    pub fn new(j: Vec<usize>) -> Self {
        Self { ell: j.len(), j }
    }

    pub fn order(&self) -> usize {
        self.j.iter().sum()
    }
}

/// All ordered compositions of `m`, sorted by length and then lexicographically.
pub fn index_set(m: usize) -> Result<Vec<IndexTuple>> {
    if m == 0 {
        return Err(Error::EmptyIndexSet);
    }
    fn rec(rest: usize, prefix: &mut Vec<usize>, out: &mut Vec<IndexTuple>) {
        if rest == 0 {
            out.push(IndexTuple::new(prefix.clone()));
            return;
        }
        for first in 1..=rest {
            prefix.push(first);
            rec(rest - first, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::with_capacity(1 << (m - 1));
    rec(m, &mut Vec::new(), &mut out);
    out.sort();
    Ok(out)
}

/// Which coefficient function a composition refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CoefficientKind {
    Drift,
    Diffusion,
}

impl CoefficientKind {
    fn name(self) -> &'static str {
        match self {
            CoefficientKind::Drift => "drift",
            CoefficientKind::Diffusion => "diffusion",
        }
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// `μ_m(s)` or `σ_m(s)` from the lower expansion terms `[X_1(s), …, X_m(s)]`.
pub fn coefficient_process(
    model: &ModelSpec,
    m: usize,
    kind: CoefficientKind,
    lower_terms: &[IntegralExpression],
) -> Result<IntegralExpression> {
    let derivs = match kind {
        CoefficientKind::Drift => model.drift_derivs(),
        CoefficientKind::Diffusion => model.diffusion_derivs(),
    };
    if m == 0 {
        return Ok(IntegralExpression::constant(derivs[0]));
    }
    if lower_terms.len() < m {
        return Err(Error::InvalidArgument(format!(
            "coefficient process of order {m} needs {m} lower terms, got {}",
            lower_terms.len()
        )));
    }
    let mut acc = IntegralExpression::zero();
    for tuple in index_set(m)? {
        let d = *derivs.get(tuple.ell).ok_or(Error::MissingDerivative {
            kind: kind.name(),
            order: tuple.ell,
            available: derivs.len() - 1,
        })?;
        if d == 0.0 {
            continue;
        }
        let mut prod = lower_terms[tuple.j[0] - 1].clone();
        for &ji in &tuple.j[1..] {
            prod = prod.multiply(&lower_terms[ji - 1]);
        }
        acc = acc.add(&prod.scale(d / factorial(tuple.ell)));
    }
    Ok(acc)
}

/// `X_1 = μ(x₀)·I_(0) + σ(x₀)·I_(1) + L`.
pub fn first_term(model: &ModelSpec) -> IntegralExpression {
    IntegralExpression::from_terms([
        Term {
            coeff: model.mu0(),
            pending: 0,
            index: IntegralIndex::from_tags(&[0], &[0]),
        },
        Term {
            coeff: model.sigma0(),
            pending: 0,
            index: IntegralIndex::from_tags(&[1], &[0]),
        },
        Term {
            coeff: 1.0,
            pending: 1,
            index: IntegralIndex::unit(),
        },
    ])
}

/// Builds and caches the expansion terms of one model.
#[derive(Debug)]
pub struct ExpansionEngine {
    model: ModelSpec,
    terms: Mutex<Vec<Arc<IntegralExpression>>>,
}

impl ExpansionEngine {
    pub fn new(model: ModelSpec) -> Self {
        Self {
            model,
            terms: Mutex::new(Vec::new()),
        }
    }

    pub fn model(&self) -> &ModelSpec {
        &self.model
    }

    /// `X_m(Δ)` for `1 ≤ m ≤ MAX_ORDER + 1`.
    pub fn term(&self, m: usize) -> Result<Arc<IntegralExpression>> {
        if m == 0 {
            return Err(Error::InvalidArgument("expansion terms start at m = 1".into()));
        }
        if m > MAX_ORDER + 1 {
            return Err(Error::OrderTooLarge {
                requested: m,
                max: MAX_ORDER + 1,
            });
        }
        let mut terms = self.terms.lock().expect("expansion cache poisoned");
        while terms.len() < m {
            let next = terms.len() + 1;
            let x = if next == 1 {
                first_term(&self.model)
            } else {
                let lower: Vec<IntegralExpression> =
                    terms.iter().map(|t| (**t).clone()).collect();
                let mu = coefficient_process(&self.model, next - 1, CoefficientKind::Drift, &lower)?;
                let sigma =
                    coefficient_process(&self.model, next - 1, CoefficientKind::Diffusion, &lower)?;
                mu.integrate(Integrator::Time)
                    .add(&sigma.integrate(Integrator::Wiener))
            };
            terms.push(Arc::new(x));
        }
        Ok(terms[m - 1].clone())
    }
}

/// Uncached `X_m(Δ)`.
pub fn expansion_term(model: &ModelSpec, m: usize) -> Result<IntegralExpression> {
    ExpansionEngine::new(model.clone())
        .term(m)
        .map(|t| (*t).clone())
}
