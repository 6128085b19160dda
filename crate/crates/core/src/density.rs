//! Assembly of the order-M density approximation.
//!
//! With `s = σ(x₀)√Δ` and `y = (x − x₀)/s`, the diffusion expansion reads
//! `p^{(M)}(x) = s⁻¹ Σ_{m≤M} Ω_m(y)` with
//! `Ω_m(y) = Σ_{(ℓ,j)∈S_m} ((−1)^ℓ/ℓ!) s^{−ℓ} ∫₀^∞ D₁^ℓ K_{(ℓ,j)}(z₁, z₂) φ(z₁) p_L(z₂) dz₂`
//! and `z₁ = y − (μ(x₀)Δ + z₂)/s`. For pure-jump models the Gaussian factor
//! is absent and `Ω_m(y) = Σ ((−1)^ℓ/ℓ!) ∂^ℓ[K_{(ℓ,j)} p_L](y − μ(x₀)Δ)`.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::{LN_2, PI};

use rayon::prelude::*;

use crate::conditioning::{compute_k, d1_operator, BivariatePolynomial, Conditioner};
use crate::error::{Error, Result};
use crate::expansion::{index_set, ExpansionEngine, IndexTuple, ModelSpec, MAX_ORDER};
use crate::quadrature::{integrate_vec, Tolerance};
use crate::special::{gamma, ln_gamma, ln_kummer_1f1};

/// Relative accuracy assumed for one evaluation of the Kummer kernel.
const KERNEL_EPS: f64 = 2e-14;
/// Analytic moments whose estimated relative error exceeds this are
/// recomputed by quadrature.
const ANALYTIC_REL_TOL: f64 = 1e-11;
/// Log-drop below the integrand peak at which the domain is truncated.
const TRUNCATION_LOG_DROP: f64 = 40.0;

/// How the Gaussian–gamma moment integrals are evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EvaluationPath {
    /// Closed form through Γ and 1F1, with per-entry quadrature fallback.
    Analytic,
    /// Adaptive quadrature only.
    Quadrature,
    /// Pure-jump models: exact derivatives of `K·p_L`.
    PureJump,
}

/// `[b^{aΔ}/Γ(aΔ)] z^{aΔ−1+shift} e^{−bz} Q(z)`, with `Q` stored by
/// increasing degree.
#[derive(Clone, Debug, PartialEq)]
pub struct GammaLaurentForm {
    shift: i32,
    poly: Vec<f64>,
}

impl GammaLaurentForm {
    pub fn new(shift: i32, poly: Vec<f64>) -> Self {
        Self { shift, poly }
    }

    /// The gamma density itself.
    pub fn gamma_density() -> Self {
        Self::new(0, vec![1.0])
    }

    pub fn shift(&self) -> i32 {
        self.shift
    }

    pub fn poly(&self) -> &[f64] {
        &self.poly
    }

    /// `d/dz[z^c e^{−bz} Q] = z^{c−1} e^{−bz} ((c − bz)Q + zQ′)`.
    pub fn derivative(&self, a_delta: f64, b: f64) -> Self {
        let c = a_delta - 1.0 + self.shift as f64;
        let mut q = vec![0.0; self.poly.len() + 1];
        for (i, &p) in self.poly.iter().enumerate() {
            q[i] += (c + i as f64) * p;
            q[i + 1] -= b * p;
        }
        Self::new(self.shift - 1, q)
    }

    /// Same function written with a smaller shift.
    pub fn with_shift(&self, shift: i32) -> Self {
        assert!(shift <= self.shift, "can only lower the shift");
        let pad = (self.shift - shift) as usize;
        let mut q = vec![0.0; pad];
        q.extend_from_slice(&self.poly);
        Self::new(shift, q)
    }

    pub fn scale(&self, c: f64) -> Self {
        Self::new(self.shift, self.poly.iter().map(|p| p * c).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        let k = self.shift.min(other.shift);
        let (a, b) = (self.with_shift(k), other.with_shift(k));
        let n = a.poly.len().max(b.poly.len());
        let poly = (0..n)
            .map(|i| a.poly.get(i).unwrap_or(&0.0) + b.poly.get(i).unwrap_or(&0.0))
            .collect();
        Self::new(k, poly)
    }

    /// `∫_0^∞` of the form, continued analytically in the exponent where
    /// the endpoint singularity is not integrable (Hadamard finite part).
    pub fn finite_part_integral(&self, a_delta: f64, b: f64) -> Result<f64> {
        let e = a_delta - 1.0 + self.shift as f64;
        let mut total = 0.0;
        for (i, &q) in self.poly.iter().enumerate() {
            if q == 0.0 {
                continue;
            }
            let s = e + i as f64 + 1.0;
            if s <= 0.0 && s == s.round() {
                return Err(Error::Singular { z: 0.0, exponent: s - 1.0 });
            }
            total += q * gamma(s) * b.powf(a_delta - s) / gamma(a_delta);
        }
        if total.is_finite() {
            Ok(total)
        } else {
            Err(Error::NonFinite("finite-part integral"))
        }
    }

    fn poly_at(&self, z: f64) -> f64 {
        self.poly.iter().rev().fold(0.0, |acc, &c| acc * z + c)
    }

    /// Value at `z`; zero for `z < 0`. At `z = 0` a negative exponent with a
    /// nonzero polynomial value is reported as singular.
    pub fn evaluate(&self, z: f64, a_delta: f64, b: f64) -> Result<f64> {
        let e = a_delta - 1.0 + self.shift as f64;
        let ln_norm = a_delta * b.ln() - ln_gamma(a_delta);
        if z < 0.0 {
            return Ok(0.0);
        }
        if z == 0.0 {
            let q0 = self.poly_at(0.0);
            return if q0 == 0.0 || e > 0.0 {
                Ok(0.0)
            } else if e == 0.0 {
                Ok(ln_norm.exp() * q0)
            } else {
                Err(Error::Singular { z, exponent: e })
            };
        }
        Ok((ln_norm + e * z.ln() - b * z).exp() * self.poly_at(z))
    }
}

/// Status of one grid point of an expansion density.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PointFlag {
    Regular,
    /// Pure-jump endpoint where the expansion terms diverge.
    Singular,
    /// Below the support of a pure-jump density.
    OutsideSupport,
}

/// Expansion density on a grid with the partial sums of every order.
#[derive(Clone, Debug, PartialEq)]
pub struct ExpansionDensity {
    pub x: Vec<f64>,
    /// `partial_sums[m][i]` is `p^{(m)}(x_i)`.
    pub partial_sums: Vec<Vec<f64>>,
    pub flags: Vec<PointFlag>,
}

/// Precomputed expansion of one model at one Δ up to order M.
#[derive(Debug)]
pub struct OmegaEvaluator {
    model: ModelSpec,
    delta: f64,
    order: usize,
    path: EvaluationPath,
    k_polys: BTreeMap<IndexTuple, BivariatePolynomial>,
    combined: Vec<BivariatePolynomial>,
    needed: Vec<(u32, u32)>,
    pj_forms: Vec<GammaLaurentForm>,
    scale: f64,
    a_delta: f64,
    ln_norm: f64,
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

impl OmegaEvaluator {
    /// Builds the evaluator, choosing the pure-jump path when the model has
    /// no diffusion and the analytic path otherwise.
    pub fn new(model: ModelSpec, delta: f64, order: usize) -> Result<Self> {
        let path = if model.is_pure_jump() {
            EvaluationPath::PureJump
        } else {
            EvaluationPath::Analytic
        };
        Self::with_path(model, delta, order, path)
    }

    pub fn with_path(model: ModelSpec, delta: f64, order: usize, path: EvaluationPath) -> Result<Self> {
        if !(delta.is_finite() && delta > 0.0) {
            return Err(Error::InvalidArgument(format!("delta must be positive, got {delta}")));
        }
        if order > MAX_ORDER {
            return Err(Error::OrderTooLarge {
                requested: order,
                max: MAX_ORDER,
            });
        }
        if (path == EvaluationPath::PureJump) != model.is_pure_jump() {
            return Err(Error::InvalidArgument(format!(
                "evaluation path {path:?} does not match the model (pure jump: {})",
                model.is_pure_jump()
            )));
        }
        model.require_order(order)?;
        let engine = ExpansionEngine::new(model.clone());
        let mut conditioner = Conditioner::new(delta, model.gamma_a())?;
        let mut k_polys = BTreeMap::new();
        for m in 1..=order {
            for tuple in index_set(m)? {
                let k = compute_k(&engine, &mut conditioner, &tuple)?;
                k_polys.insert(tuple, k);
            }
        }
        let scale = model.sigma0() * delta.sqrt();
        let a_delta = model.gamma_a() * delta;
        let b = model.gamma_b();
        let mut ev = Self {
            ln_norm: a_delta * b.ln() - ln_gamma(a_delta),
            model,
            delta,
            order,
            path,
            k_polys,
            combined: Vec::new(),
            needed: Vec::new(),
            pj_forms: Vec::new(),
            scale,
            a_delta,
        };
        if path == EvaluationPath::PureJump {
            ev.build_pure_jump()?;
        } else {
            ev.build_diffusion()?;
        }
        Ok(ev)
    }

    fn build_diffusion(&mut self) -> Result<()> {
        let mut combined = vec![BivariatePolynomial::constant(1.0)];
        for m in 1..=self.order {
            let mut acc = BivariatePolynomial::zero();
            for tuple in index_set(m)? {
                let ell = tuple.ell;
                let sign = if ell % 2 == 0 { 1.0 } else { -1.0 };
                let c = sign / factorial(ell) * self.scale.powi(-(ell as i32));
                acc = acc.add(&d1_operator(&self.k_polys[&tuple], ell).scale(c));
            }
            combined.push(acc);
        }
        let needed: BTreeSet<(u32, u32)> = combined.iter().flat_map(|p| p.terms().map(|(k, _)| k)).collect();
        self.needed = needed.into_iter().collect();
        self.combined = combined;
        Ok(())
    }

    fn build_pure_jump(&mut self) -> Result<()> {
        let b = self.model.gamma_b();
        let mut forms = vec![GammaLaurentForm::gamma_density()];
        for m in 1..=self.order {
            let mut acc = GammaLaurentForm::new(-(m as i32), vec![]);
            for tuple in index_set(m)? {
                let k = &self.k_polys[&tuple];
                if k.degree_z1().unwrap_or(0) > 0 {
                    return Err(Error::InvalidModel(
                        "pure-jump conditional expectation depends on z1".into(),
                    ));
                }
                let deg = k.degree_z2().unwrap_or(0) as usize;
                let mut q = vec![0.0; deg + 1];
                for ((_, n2), c) in k.terms() {
                    q[n2 as usize] += c;
                }
                let mut f = GammaLaurentForm::new(0, q);
                for _ in 0..tuple.ell {
                    f = f.derivative(self.a_delta, b);
                }
                let sign = if tuple.ell % 2 == 0 { 1.0 } else { -1.0 };
                acc = acc.add(&f.scale(sign / factorial(tuple.ell)));
            }
            forms.push(acc);
        }
        self.pj_forms = forms;
        Ok(())
    }

    pub fn model(&self) -> &ModelSpec {
        &self.model
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn path(&self) -> EvaluationPath {
        self.path
    }

    /// `σ(x₀)√Δ`; the y-variable is `(x − x₀)` divided by this on the
    /// diffusion path and the identity on the pure-jump path.
    pub fn scale(&self) -> f64 {
        if self.path == EvaluationPath::PureJump {
            1.0
        } else {
            self.scale
        }
    }

    pub fn to_y(&self, x: f64) -> f64 {
        (x - self.model.x0()) / self.scale()
    }

    pub fn k_polynomial(&self, tuple: &IndexTuple) -> Option<&BivariatePolynomial> {
        self.k_polys.get(tuple)
    }

    /// `Σ_{(ℓ,j)∈S_m} ((−1)^ℓ/ℓ!) s^{−ℓ} D₁^ℓ K_{(ℓ,j)}` (diffusion path).
    pub fn combined_polynomial(&self, m: usize) -> Option<&BivariatePolynomial> {
        self.combined.get(m)
    }

    /// Ω_m in closed Laurent form (pure-jump path).
    pub fn pure_jump_form(&self, m: usize) -> Option<&GammaLaurentForm> {
        self.pj_forms.get(m)
    }

    fn require_diffusion(&self) -> Result<()> {
        if self.path == EvaluationPath::PureJump {
            return Err(Error::InvalidArgument(
                "operation requires a diffusion model".into(),
            ));
        }
        Ok(())
    }

    fn shift_c(&self, y: f64) -> f64 {
        y - self.model.mu0() * self.delta / self.scale
    }

    /// `∫₀^∞ z^r φ(c − z/s) p_L(z) dz` by the Kummer closed form, with an
    /// estimate of its relative error.
    fn s_kernel(&self, r: u32, c: f64) -> Option<(f64, f64)> {
        let s = self.scale;
        let b = self.model.gamma_b();
        let rr = r as f64 + self.a_delta - 1.0;
        let ln_a = -(2.0 * s * s).ln();
        let bb = c / s - b;
        let w = 0.5 * (c - b * s) * (c - b * s);
        let p1 = 0.5 * (rr + 1.0);
        let p2 = 1.0 + 0.5 * rr;
        let (lm1, _) = ln_kummer_1f1(p1, 0.5, w).ok()?;
        let l1 = ln_gamma(p1) + lm1;
        let lpref = self.ln_norm - 0.5 * (2.0 * PI).ln() - LN_2 - p1 * ln_a - 0.5 * c * c;
        let (t1, t2, lmax) = if bb == 0.0 {
            (1.0, 0.0, l1)
        } else {
            let (lm2, _) = ln_kummer_1f1(p2, 1.5, w).ok()?;
            let l2 = bb.abs().ln() - 0.5 * ln_a + ln_gamma(p2) + lm2;
            let lmax = l1.max(l2);
            ((l1 - lmax).exp(), bb.signum() * (l2 - lmax).exp(), lmax)
        };
        let sum = t1 + t2;
        if !(sum > 0.0) {
            return None;
        }
        let value = (lpref + lmax).exp() * sum;
        if !value.is_finite() {
            return None;
        }
        let cond = (t1 + t2.abs()) / sum;
        Some((value, KERNEL_EPS * cond))
    }

    /// Analytic moments; `None` entries need the quadrature path.
    fn analytic_moments(&self, y: f64, pairs: &[(u32, u32)]) -> Vec<Option<f64>> {
        let c = self.shift_c(y);
        let rmax = pairs.iter().map(|&(a, b)| a + b).max().unwrap_or(0);
        let kernels: Vec<Option<(f64, f64)>> = (0..=rmax).map(|r| self.s_kernel(r, c)).collect();
        let inv_s = -1.0 / self.scale;
        pairs
            .iter()
            .map(|&(n1, n2)| {
                let mut sum = 0.0;
                let mut err = 0.0;
                for k in 0..=n1 {
                    let (v, rel) = kernels[(n2 + k) as usize]?;
                    let t = binomial(n1, k) * c.powi((n1 - k) as i32) * inv_s.powi(k as i32) * v;
                    sum += t;
                    err += t.abs() * (rel + 4.0 * f64::EPSILON);
                }
                if err <= ANALYTIC_REL_TOL * sum.abs() || (err == 0.0 && sum == 0.0) {
                    Some(sum)
                } else {
                    None
                }
            })
            .collect()
    }

    /// Moments by adaptive quadrature in `t = z₂^q`, `q = min(1, aΔ)`.
    fn quadrature_moments(&self, y: f64, pairs: &[(u32, u32)]) -> Result<Vec<f64>> {
        if pairs.is_empty() {
            return Ok(Vec::new());
        }
        let c = self.shift_c(y);
        let s = self.scale;
        let b = self.model.gamma_b();
        let ad = self.a_delta;
        let n1max = pairs.iter().map(|p| p.0).max().unwrap_or(0);
        let n2max = pairs.iter().map(|p| p.1).max().unwrap_or(0);
        let ln_sqrt_2pi = 0.5 * (2.0 * PI).ln();
        let log_weight = |z: f64| {
            let z1 = c - z / s;
            self.ln_norm + (ad - 1.0) * z.ln() - b * z - 0.5 * z1 * z1 - ln_sqrt_2pi
        };
        // log of z·|integrand|, i.e. mass per unit of ln z
        let envelope = |z: f64| {
            let z1 = c - z / s;
            log_weight(z) + z.ln() + n2max as f64 * z.ln().max(0.0) + n1max as f64 * (1.0 + z1.abs()).ln()
        };
        let center = s * (c - b * s);
        let gamma_mode = ((ad - 1.0 + n2max as f64) / b).max(0.0);
        let mut probes: Vec<f64> = (-48..=48)
            .map(|k| center + 0.25 * k as f64 * s)
            .chain((0..=60).map(|k| gamma_mode + k as f64 / b))
            .chain((0..=30).map(|k| (s.min(1.0 / b)) * 10f64.powi(-k / 2)))
            .filter(|z| *z > 0.0)
            .collect();
        probes.sort_by(f64::total_cmp);
        let peak = probes
            .iter()
            .map(|&z| envelope(z))
            .fold(f64::NEG_INFINITY, f64::max);
        let mut upper = probes
            .iter()
            .copied()
            .filter(|&z| envelope(z) > peak - TRUNCATION_LOG_DROP)
            .fold(0.0, f64::max);
        let step = s.min(1.0 / b);
        let mut k = 1.0;
        while envelope(upper) > peak - TRUNCATION_LOG_DROP - 5.0 {
            upper += step * k;
            k *= 2.0;
        }
        let q = ad.min(1.0);
        let to_t = |z: f64| z.powf(q);
        let mut breaks = vec![0.0, to_t(upper)];
        for m in [-8.0, -4.0, -2.0, -1.0, 0.0, 1.0, 2.0, 4.0, 8.0] {
            let z = center + m * s;
            if z > 0.0 && z < upper {
                breaks.push(to_t(z));
            }
        }
        if gamma_mode > 0.0 && gamma_mode < upper {
            breaks.push(to_t(gamma_mode));
        }
        breaks.sort_by(f64::total_cmp);
        breaks.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * b.abs().max(1e-300));
        let ln_jac_const = -q.ln();
        let integrand = |t: f64, out: &mut [f64]| {
            let z = t.powf(1.0 / q);
            let lw = log_weight(z) + ln_jac_const + (1.0 / q - 1.0) * t.ln();
            let w = if q < 1.0 {
                // z^{aΔ−1} dz/dt is the constant 1/q, so use it directly
                let z1 = c - z / s;
                (self.ln_norm - b * z - 0.5 * z1 * z1 - ln_sqrt_2pi + ln_jac_const).exp()
            } else {
                lw.exp()
            };
            let z1 = c - z / s;
            for (o, &(n1, n2)) in out.iter_mut().zip(pairs) {
                *o = w * z1.powi(n1 as i32) * z.powi(n2 as i32);
            }
        };
        let tol = Tolerance {
            abs_tol: 0.0,
            rel_tol: 1e-10,
            mass_tol: 1e-13,
            max_intervals: 4000,
        };
        Ok(integrate_vec(integrand, pairs.len(), &breaks, tol)?.values)
    }

    /// Moment integrals for all pairs, analytic where reliable.
    fn moments(&self, y: f64, pairs: &[(u32, u32)]) -> Result<Vec<f64>> {
        match self.path {
            EvaluationPath::PureJump => Err(Error::InvalidArgument(
                "moment integrals require a diffusion model".into(),
            )),
            EvaluationPath::Quadrature => self.quadrature_moments(y, pairs),
            EvaluationPath::Analytic => {
                let analytic = self.analytic_moments(y, pairs);
                let missing: Vec<(u32, u32)> = pairs
                    .iter()
                    .zip(&analytic)
                    .filter(|(_, a)| a.is_none())
                    .map(|(p, _)| *p)
                    .collect();
                let fallback = self.quadrature_moments(y, &missing)?;
                let mut fb = fallback.into_iter();
                Ok(analytic
                    .into_iter()
                    .map(|a| a.unwrap_or_else(|| fb.next().expect("one fallback per gap")))
                    .collect())
            }
        }
    }

    /// `∫₀^∞ z₁^{n₁} z₂^{n₂} φ(z₁) p_L(z₂) dz₂`.
    pub fn moment_integral(&self, n1: u32, n2: u32, y: f64) -> Result<f64> {
        self.require_diffusion()?;
        Ok(self.moments(y, &[(n1, n2)])?[0])
    }

    /// Analytic value if the closed form is judged reliable, else `None`.
    pub fn analytic_moment(&self, n1: u32, n2: u32, y: f64) -> Result<Option<f64>> {
        self.require_diffusion()?;
        Ok(self.analytic_moments(y, &[(n1, n2)])[0])
    }

    /// Quadrature value regardless of the configured path.
    pub fn quadrature_moment(&self, n1: u32, n2: u32, y: f64) -> Result<f64> {
        self.require_diffusion()?;
        Ok(self.quadrature_moments(y, &[(n1, n2)])?[0])
    }

    /// Ω₀(y) on the diffusion path.
    pub fn leading_term(&self, y: f64) -> Result<f64> {
        self.moment_integral(0, 0, y)
    }

    /// Ω_m(y) on the diffusion path.
    pub fn higher_term(&self, m: usize, y: f64) -> Result<f64> {
        self.require_diffusion()?;
        if m == 0 || m > self.order {
            return Err(Error::InvalidArgument(format!(
                "term order {m} outside 1..={}",
                self.order
            )));
        }
        let p = &self.combined[m];
        let pairs: Vec<(u32, u32)> = p.terms().map(|(k, _)| k).collect();
        let g = self.moments(y, &pairs)?;
        Ok(p.terms().zip(g).map(|((_, c), v)| c * v).sum())
    }

    /// Ω_m(y) on the pure-jump path, `y = x − x₀`.
    pub fn pure_jump_term(&self, m: usize, y: f64) -> Result<f64> {
        if self.path != EvaluationPath::PureJump {
            return Err(Error::InvalidArgument("model is not pure jump".into()));
        }
        let form = self.pj_forms.get(m).ok_or_else(|| {
            Error::InvalidArgument(format!("term order {m} outside 0..={}", self.order))
        })?;
        let z = y - self.model.mu0() * self.delta;
        form.evaluate(z, self.a_delta, self.model.gamma_b())
    }

    /// `[Ω₀(y), …, Ω_M(y)]`.
    pub fn omegas(&self, y: f64) -> Result<Vec<f64>> {
        match self.path {
            EvaluationPath::PureJump => (0..=self.order).map(|m| self.pure_jump_term(m, y)).collect(),
            _ => {
                let g = self.moments(y, &self.needed)?;
                let lookup: BTreeMap<(u32, u32), f64> = self.needed.iter().copied().zip(g).collect();
                Ok(self
                    .combined
                    .iter()
                    .map(|p| p.terms().map(|(k, c)| c * lookup[&k]).sum())
                    .collect())
            }
        }
    }

    /// Support endpoint in x of a pure-jump expansion.
    pub fn support_start(&self) -> Option<f64> {
        (self.path == EvaluationPath::PureJump)
            .then(|| self.model.x0() + self.model.mu0() * self.delta)
    }

    /// Partial sums `p^{(0)}, …, p^{(M)}` at each grid point.
    pub fn density(&self, x_grid: &[f64]) -> Result<ExpansionDensity> {
        if x_grid.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("grid values must be finite".into()));
        }
        if x_grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument("grid must be strictly increasing".into()));
        }
        let inv = 1.0 / self.scale();
        let rows: Vec<Result<(Vec<f64>, PointFlag)>> = x_grid
            .par_iter()
            .map(|&x| {
                let y = self.to_y(x);
                if let Some(start) = self.support_start() {
                    if x < start {
                        return Ok((vec![0.0; self.order + 1], PointFlag::OutsideSupport));
                    }
                }
                match self.omegas(y) {
                    Ok(om) => {
                        let mut acc = 0.0;
                        let sums = om
                            .iter()
                            .map(|o| {
                                acc += o * inv;
                                acc
                            })
                            .collect();
                        Ok((sums, PointFlag::Regular))
                    }
                    Err(Error::Singular { .. }) => {
                        Ok((vec![f64::NAN; self.order + 1], PointFlag::Singular))
                    }
                    Err(e) => Err(e),
                }
            })
            .collect();
        let mut partial_sums = vec![Vec::with_capacity(x_grid.len()); self.order + 1];
        let mut flags = Vec::with_capacity(x_grid.len());
        for r in rows {
            let (sums, flag) = r?;
            for (m, v) in sums.into_iter().enumerate() {
                partial_sums[m].push(v);
            }
            flags.push(flag);
        }
        Ok(ExpansionDensity {
            x: x_grid.to_vec(),
            partial_sums,
            flags,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn laurent_derivative_matches_finite_difference() {
        let (ad, b) = (1.9, 10.0);
        let f = GammaLaurentForm::new(-1, vec![0.3, -2.0, 5.0]);
        let d = f.derivative(ad, b);
        for &z in &[0.05, 0.2, 0.7, 1.5] {
            let h = 1e-6 * z;
            let fd = (f.evaluate(z + h, ad, b).unwrap() - f.evaluate(z - h, ad, b).unwrap()) / (2.0 * h);
            let an = d.evaluate(z, ad, b).unwrap();
            assert!((fd - an).abs() <= 1e-6 * an.abs().max(1e-12), "z={z}: {fd} vs {an}");
        }
    }

    #[test]
    fn laurent_endpoint_rules() {
        let (ad, b) = (0.4, 10.0);
        let f = GammaLaurentForm::gamma_density();
        assert!(matches!(f.evaluate(0.0, ad, b), Err(Error::Singular { .. })));
        assert_eq!(f.evaluate(-0.1, ad, b).unwrap(), 0.0);
        let g = GammaLaurentForm::new(2, vec![1.0]);
        assert_eq!(g.evaluate(0.0, ad, b).unwrap(), 0.0);
    }

    #[test]
    fn shift_lowering_preserves_values() {
        let f = GammaLaurentForm::new(1, vec![2.0, 1.0]);
        let g = f.with_shift(-2);
        for &z in &[0.1, 0.9] {
            let (a, b) = (f.evaluate(z, 1.3, 4.0).unwrap(), g.evaluate(z, 1.3, 4.0).unwrap());
            assert!((a - b).abs() < 1e-14 * a.abs());
        }
    }
}
