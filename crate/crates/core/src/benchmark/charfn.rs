//! Characteristic functions `φ(t; ω) = E[e^{iωX(t)} | X(0) = x₀]` of the
//! built-in models.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::dilog::dilog;
use super::models::{BuiltinModel, ModelKind};
use crate::error::{Error, Result};
use crate::quadrature::{integrate_vec, Tolerance};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Largest ratio between consecutive frequencies when following the
/// square-root model along a path.
const PATH_RATIO: f64 = 1.02;
const PATH_START: f64 = 1e-4;

fn check_t(t: f64) -> Result<()> {
    if t.is_finite() && t > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("time must be positive, got {t}")))
    }
}

fn finite(z: Complex64) -> Result<Complex64> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(z)
    } else {
        Err(Error::NonFinite("characteristic function"))
    }
}

/// Conditional mean drift part `e^{−κt}x₀ + θ(1 − e^{−κt})`.
fn drift_center(m: &BuiltinModel, t: f64) -> f64 {
    let e = (-m.kappa * t).exp();
    e * m.x0 + m.theta * (1.0 - e)
}

fn ou_gamma(m: &BuiltinModel, t: f64, omega: f64) -> Complex64 {
    let e = (-m.kappa * t).exp();
    let w = Complex64::new(0.0, omega / m.b);
    let jump = (dilog(w * e) - dilog(w)) * (m.a / m.kappa);
    let mut expo = I * omega * drift_center(m, t) - jump;
    if m.kind == ModelKind::ConstantDiffusion {
        expo -= omega * omega * m.sigma * m.sigma * (1.0 - e * e) / (4.0 * m.kappa);
    }
    expo.exp()
}

/// Principal logarithm made continuous along a path.
#[derive(Clone, Debug, Default)]
struct ContLog {
    arg: Option<f64>,
}

impl ContLog {
    fn eval(&mut self, w: Complex64) -> Complex64 {
        let mut a = w.arg();
        if let Some(p) = self.arg {
            a += 2.0 * PI * ((p - a) / (2.0 * PI)).round();
        }
        self.arg = Some(a);
        Complex64::new(w.norm().ln(), a)
    }
}

/// Dilogarithm continued analytically across its cut along a path.
#[derive(Clone, Debug, Default)]
struct ContLi2 {
    prev: Option<Complex64>,
    sheet: i32,
    log: ContLog,
}

impl ContLi2 {
    fn eval(&mut self, u: Complex64) -> Complex64 {
        if let Some(p) = self.prev {
            if p.im * u.im < 0.0 {
                let x = p.re + (u.re - p.re) * p.im / (p.im - u.im);
                if x > 1.0 {
                    self.sheet += if p.im > 0.0 { 1 } else { -1 };
                }
            }
        }
        self.prev = Some(u);
        let l = self.log.eval(u);
        dilog(u) + I * (2.0 * PI * self.sheet as f64) * l
    }
}

/// Square-root model evaluated along increasing ω with continuous branches.
#[derive(Clone, Debug)]
pub struct SqrtPath {
    model: BuiltinModel,
    t: f64,
    omega: f64,
    logs: [ContLog; 4],
    dilogs: [ContLi2; 4],
}

impl SqrtPath {
    pub fn new(model: &BuiltinModel, t: f64) -> Result<Self> {
        check_t(t)?;
        if model.kind != ModelKind::SqrtDiffusion {
            return Err(Error::InvalidModel("path evaluation is for the sqrt-diffusion model".into()));
        }
        let mut p = Self {
            model: *model,
            t,
            omega: 0.0,
            logs: Default::default(),
            dilogs: Default::default(),
        };
        p.eval_at(PATH_START)?;
        Ok(p)
    }

    /// `(α(t), β(t))` at `ω`, updating the branch state.
    fn eval_at(&mut self, w: f64) -> Result<(Complex64, Complex64)> {
        let m = &self.model;
        let (k, th, a, b, t) = (m.kappa, m.theta, m.a, m.b, self.t);
        let s2 = m.sigma * m.sigma;
        let e = (k * t).exp();
        let iw = I * w;
        let beta = 2.0 * iw * k / (2.0 * k * e + iw * s2 * (1.0 - e));
        let r = 2.0 * k / (iw * s2);
        let q = b * (2.0 * k - iw * s2) / (iw * (2.0 * k - b * s2));
        let one = Complex64::new(1.0, 0.0);
        let l1 = self.logs[0].eval(one - e * (one - r));
        let l2 = self.logs[1].eval(r);
        let l3 = self.logs[2].eval(one - e * q);
        let l4 = self.logs[3].eval(b - beta);
        let d1 = self.dilogs[0].eval(one - r);
        let d2 = self.dilogs[1].eval(e * (one - r));
        let d3 = self.dilogs[2].eval(q);
        let d4 = self.dilogs[3].eval(e * q);
        let alpha = (2.0 * k * k * th * t + a * s2 * t * b.ln() - (2.0 * k * th + a * s2 * t) * l1
            + 2.0 * k * th * l2
            + a * s2 * t * (l3 - l4))
            / s2
            + (d1 - d2 - d3 + d4) * (a / k);
        self.omega = w;
        Ok((finite(alpha)?, finite(beta)?))
    }

    /// `φ(t; ω)` for `ω` not below the previous call's frequency.
    pub fn advance_to(&mut self, omega: f64) -> Result<Complex64> {
        if omega == 0.0 {
            return Ok(Complex64::new(1.0, 0.0));
        }
        if !(omega >= self.omega) {
            return Err(Error::InvalidArgument(format!(
                "path frequencies must be nondecreasing ({omega} after {})",
                self.omega
            )));
        }
        let mut w = self.omega;
        while omega > w * PATH_RATIO {
            w *= PATH_RATIO;
            self.eval_at(w)?;
        }
        let (alpha, beta) = self.eval_at(omega)?;
        finite((alpha + beta * self.model.x0).exp())
    }
}

/// `φ(t; ω)` from the explicit formulas of each model; negative frequencies
/// use `φ(−ω) = conj φ(ω)`.
pub fn char_function(model: &BuiltinModel, t: f64, omega: f64) -> Result<Complex64> {
    check_t(t)?;
    if !omega.is_finite() {
        return Err(Error::InvalidArgument("frequency must be finite".into()));
    }
    if omega == 0.0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    if omega < 0.0 {
        return Ok(char_function(model, t, -omega)?.conj());
    }
    match model.kind {
        ModelKind::PureJumpOu | ModelKind::ConstantDiffusion => finite(ou_gamma(model, t, omega)),
        ModelKind::SqrtDiffusion => SqrtPath::new(model, t)?.advance_to(omega),
    }
}

/// `φ(t; ω)` on a nondecreasing grid of nonnegative frequencies.
pub fn char_function_grid(model: &BuiltinModel, t: f64, omegas: &[f64]) -> Result<Vec<Complex64>> {
    check_t(t)?;
    if omegas.iter().any(|w| !(w.is_finite() && *w >= 0.0)) || omegas.windows(2).any(|p| p[1] < p[0]) {
        return Err(Error::InvalidArgument("frequencies must be finite, nonnegative and sorted".into()));
    }
    match model.kind {
        ModelKind::SqrtDiffusion => {
            let mut path = SqrtPath::new(model, t)?;
            omegas.iter().map(|&w| path.advance_to(w)).collect()
        }
        _ => omegas.iter().map(|&w| char_function(model, t, w)).collect(),
    }
}

/// `φ(t; ω) = exp(α(t) + β(t)x₀)` with `α` obtained by integrating
/// `α′ = κθβ + ½σ²β² − a ln(1 − β/b)` numerically along the exact `β`.
pub fn char_function_quadrature(model: &BuiltinModel, t: f64, omega: f64) -> Result<Complex64> {
    check_t(t)?;
    if omega == 0.0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let m = *model;
    let (k, th, a, b) = (m.kappa, m.theta, m.a, m.b);
    let s2 = m.sigma * m.sigma;
    let beta = move |s: f64| -> Complex64 {
        let iw = I * omega;
        match m.kind {
            ModelKind::SqrtDiffusion => {
                let g = s2 * (-(-k * s).exp_m1()) / (2.0 * k);
                iw * (-k * s).exp() / (1.0 - iw * g)
            }
            _ => iw * (-k * s).exp(),
        }
    };
    let integrand = |s: f64, out: &mut [f64]| {
        let bt = beta(s);
        let mut d = k * th * bt - a * (1.0 - bt / b).ln();
        if m.kind == ModelKind::ConstantDiffusion {
            d += 0.5 * s2 * bt * bt;
        }
        out[0] = d.re;
        out[1] = d.im;
    };
    let tol = Tolerance {
        abs_tol: 1e-14,
        rel_tol: 1e-13,
        mass_tol: 0.0,
        max_intervals: 2000,
    };
    let r = integrate_vec(integrand, 2, &[0.0, t], tol)?;
    let alpha = Complex64::new(r.values[0], r.values[1]);
    finite((alpha + beta(t) * m.x0).exp())
}
