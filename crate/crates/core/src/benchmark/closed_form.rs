//! Hand-derived Ω_m of the three built-in models, written out term by term.
//! These are independent of the expansion engine and serve as its oracle.
//!
//! For the pure-jump model `y = x − x₀`; for the diffusion models
//! `y = (x − x₀)/(σ(x₀)√Δ)`.

use crate::error::{Error, Result};
use std::f64::consts::PI;

use rug::Float;

use crate::special::ln_gamma;

use super::models::{BuiltinModel, ModelKind};

/// Coefficient perturbation used by mutation tests of the validation suite.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Perturbation {
    pub relative: f64,
}

/// `₁F₁(a, b; w)` for `a, b > 0`, `w ≥ 0` by its positive series.
fn kummer_mp(a: f64, b: f64, w: &Float, prec: u32) -> Float {
    let mut term = Float::with_val(prec, 1);
    let mut sum = Float::with_val(prec, 1);
    let mut k = 0u32;
    loop {
        term *= Float::with_val(prec, a + k as f64) * w;
        term /= Float::with_val(prec, (b + k as f64) * (k + 1) as f64);
        sum += &term;
        k += 1;
        if k as f64 > w.to_f64() && term.clone() < sum.clone() >> prec {
            return sum;
        }
    }
}

/// Moment kernel `S_m(y)` of the diffusion models, evaluated from its
/// printed Γ/₁F₁ representation.
#[derive(Clone, Copy, Debug)]
pub struct MomentKernel {
    a_delta: f64,
    ln_norm: f64,
    big_a: f64,
    big_b: f64,
    ln_gauss: f64,
}

impl MomentKernel {
    pub fn new(model: &BuiltinModel, y: f64, delta: f64) -> Self {
        let s = model.diffusion(model.x0) * delta.sqrt();
        let var = s * s / delta;
        let a_delta = model.a * delta;
        let c = y - model.eta() * delta / s;
        Self {
            a_delta,
            ln_norm: a_delta * model.b.ln() - ln_gamma(a_delta),
            big_a: 1.0 / (2.0 * var * delta),
            big_b: y / s - model.eta() / var - model.b,
            ln_gauss: -0.5 * c * c,
        }
    }

    /// The two Γ·₁F₁ terms cancel when `B < 0`, so the sum is formed in
    /// multiprecision with enough bits to absorb `e^w`, `w = B²/(4A)`.
    pub fn s(&self, m: u32) -> Result<f64> {
        let r = m as f64 + self.a_delta - 1.0;
        let (aa, bb) = (self.big_a, self.big_b);
        let w = bb * bb / (4.0 * aa);
        if !w.is_finite() {
            return Err(Error::NonFinite("closed-form moment kernel"));
        }
        let prec = 128 + (3.0 * w * std::f64::consts::LOG2_E).ceil() as u32;
        let mp = |x: f64| Float::with_val(prec, x);
        let wm = mp(w);
        // B Γ(1 + r/2) ₁F₁(1 + r/2, 3/2; w) + √A Γ((1 + r)/2) ₁F₁((1 + r)/2, 1/2; w)
        let t1 = mp(bb) * mp(1.0 + 0.5 * r).gamma() * kummer_mp(1.0 + 0.5 * r, 1.5, &wm, prec);
        let t2 = mp(aa).sqrt() * mp(0.5 * (1.0 + r)).gamma() * kummer_mp(0.5 * (1.0 + r), 0.5, &wm, prec);
        let ln_pref = -(2.0 * (2.0 * PI).sqrt()).ln() + self.ln_norm - (1.0 + 0.5 * r) * aa.ln() + self.ln_gauss;
        let v = (t1 + t2) * mp(ln_pref).exp();
        let v = v.to_f64();
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite("closed-form moment kernel"))
        }
    }
}

/// Closed-form Ω_m for a built-in model.
pub fn closed_form_omega(model: &BuiltinModel, m: usize, y: f64, delta: f64) -> Result<f64> {
    closed_form_omega_perturbed(model, m, y, delta, Perturbation::default())
}

/// As [`closed_form_omega`] with the result scaled by `1 + relative`.
pub fn closed_form_omega_perturbed(
    model: &BuiltinModel,
    m: usize,
    y: f64,
    delta: f64,
    perturbation: Perturbation,
) -> Result<f64> {
    if m > model.kind.closed_form_max_order() {
        return Err(Error::OrderTooLarge {
            requested: m,
            max: model.kind.closed_form_max_order(),
        });
    }
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::InvalidArgument(format!("delta must be positive, got {delta}")));
    }
    let v = match model.kind {
        ModelKind::PureJumpOu => pure_jump(model, m, y, delta),
        ModelKind::ConstantDiffusion => constant_diffusion(model, m, y, delta)?,
        ModelKind::SqrtDiffusion => sqrt_diffusion(model, m, y, delta)?,
    };
    Ok(v * (1.0 + perturbation.relative))
}

fn pure_jump(p: &BuiltinModel, m: usize, y: f64, delta: f64) -> f64 {
    let (a, b, k) = (p.a, p.b, p.kappa);
    let eta = p.eta();
    let d = delta;
    let ad = a * d;
    let u = y - eta * d;
    if u <= 0.0 {
        return 0.0;
    }
    let pref = |shift: f64| (ad * b.ln() + (ad - shift) * u.ln() - b * u - ln_gamma(ad)).exp();
    let (ed, ed2, ed3, ed4, ed5) = (eta * d, (eta * d).powi(2), (eta * d).powi(3), (eta * d).powi(4), (eta * d).powi(5));
    let (y2, y3) = (y * y, y * y * y);
    match m {
        0 => pref(1.0),
        1 => -pref(2.0) / 2.0 * k * d * ((b * y - ad) * y + ed * (1.0 - b * y)),
        2 => {
            let br = b * b * u * u * (y2 * (4.0 + 3.0 * ad) - 2.0 * y * ed + ed2)
                - 2.0 * b * (1.0 + ad) * u * (y2 * (2.0 + 3.0 * ad) - 6.0 * ed * y + ed2)
                + (1.0 + ad) * (3.0 * a * a * y2 * d * d + 2.0 * (2.0 - 5.0 * ad) * ed * y + (2.0 + ad) * ed2);
            pref(3.0) / (24.0 * (1.0 + ad)) * k * k * d * d * br
        }
        _ => {
            let b2 = b * b;
            let b3 = b2 * b;
            let g0 = (b3 * (2.0 + ad) * y3 - b2 * (6.0 + ad * (8.0 + 3.0 * ad)) * y2
                + b * (1.0 + ad) * (2.0 + ad * (4.0 + 3.0 * ad)) * y
                - ad.powi(3) * (1.0 + ad))
                * y3;
            let g1 = ed
                * (b3 * (8.0 + 3.0 * ad) * y3 - b2 * (26.0 + 3.0 * ad * (9.0 + 2.0 * ad)) * y2
                    + b * (1.0 + ad) * (6.0 + ad * (20.0 + 3.0 * ad)) * y
                    - (1.0 + ad) * (2.0 + ad * (-6.0 + 7.0 * ad)))
                * y2;
            let g2 = ed2
                * (b3 * (13.0 + 3.0 * ad) * y3 - b2 * (40.0 + 3.0 * ad * (11.0 + ad)) * y2
                    + b * (1.0 + ad) * (14.0 + 19.0 * ad) * y
                    - (1.0 + ad) * (-4.0 + ad * (6.0 + ad)))
                * y;
            let g3 = ed3
                * (b3 * (11.0 + ad) * y3 - b2 * (27.0 + 17.0 * ad) * y2 + 3.0 * b * (1.0 + ad) * (4.0 + ad) * y
                    - ad * (1.0 + ad));
            let g4 = b * ed4 * (b * y * (-8.0 - 3.0 * ad + 5.0 * b * y) + 2.0 * (1.0 + ad));
            let g5 = b2 * ed5 * (1.0 - b * y);
            -pref(4.0) / (48.0 * (1.0 + ad)) * k.powi(3) * d.powi(3) * (g0 - g1 + g2 - g3 + g4 + g5)
        }
    }
}

fn constant_diffusion(p: &BuiltinModel, m: usize, y: f64, delta: f64) -> Result<f64> {
    let ker = MomentKernel::new(p, y, delta);
    let s = |k: u32| ker.s(k);
    let (k, sig, eta, d) = (p.kappa, p.sigma, p.eta(), delta);
    let ad = p.a * d;
    let sq = d.sqrt();
    let (y2, y4) = (y * y, y.powi(4));
    Ok(match m {
        0 => s(0)?,
        1 => k * sq / (2.0 * sig) * (y * s(1)? + (eta * d * y + sig * sq * (1.0 - y2)) * s(0)?),
        2 => {
            let inner = s(4)? + 2.0 * (eta * d - sig * sq * y) * s(3)?
                + (eta * eta * d - 2.0 * eta * sig * sq * y + sig * sig * (ad + (4.0 + 3.0 * ad) * y2)) * d * s(2)?
                + 2.0 * sig * sig * d.powf(1.5) * (1.0 + ad) * (eta * (1.0 + 3.0 * y2) * sq + 3.0 * sig * (1.0 - y2) * y) * s(1)?
                + sig * sig * d * d * (1.0 + ad)
                    * (eta * eta * (1.0 + 3.0 * y2) * d + 6.0 * eta * sig * sq * (1.0 - y2) * y
                        + sig * sig * (1.0 - 10.0 * y2 + 3.0 * y4))
                    * s(0)?;
            k * k / (24.0 * sig.powi(4) * (1.0 + ad)) * inner
        }
        _ => {
            let (e2, e3) = (eta * eta, eta.powi(3));
            let (s2, s3) = (sig * sig, sig.powi(3));
            let inner = 7.0 * y * s(5)?
                + (21.0 * eta * d * y - sig * sq * (-4.0 + 3.0 * ad + 21.0 * y2)) * s(4)?
                + (21.0 * e2 * d * y + eta * sig * sq * (5.0 - 9.0 * ad - 42.0 * y2)
                    + s2 * (-19.0 + 16.0 * ad + 7.0 * (4.0 + ad) * y2) * y)
                    * d
                    * s(3)?
                + (7.0 * e3 * d.powf(1.5) * y - e2 * sig * d * (2.0 + 9.0 * ad + 21.0 * y2)
                    + eta * s2 * sq * y * (4.0 + 39.0 * ad + 21.0 * (2.0 + ad) * y2)
                    + s3 * (9.0 + 16.0 * ad - 7.0 * (4.0 + 3.0 * ad) * y4 + (33.0 + 5.0 * ad) * y2))
                    * d.powf(1.5)
                    * s(2)?
                + sig * d * d * (1.0 + ad)
                    * (-3.0 * e3 * d.powf(1.5) + 3.0 * e2 * sig * d * (10.0 + 7.0 * y2) * y
                        + eta * s2 * sq * (23.0 + 19.0 * y2 - 42.0 * y4)
                        + s3 * (-16.0 - 67.0 * y2 + 21.0 * y4) * y)
                    * s(1)?
                + 7.0 * s2 * d.powf(2.5) * (1.0 + ad)
                    * (e3 * d.powf(1.5) * (1.0 + y2) * y + e2 * sig * d * (1.0 + 2.0 * y2 - 3.0 * y4)
                        + eta * s2 * sq * (-1.0 - 10.0 * y2 + 3.0 * y4) * y
                        - s3 * (1.0 + 5.0 * y2 - 7.0 * y4 + y.powi(6)))
                    * s(0)?;
            k.powi(3) * sq / (336.0 * sig.powi(5) * (1.0 + ad)) * inner
        }
    })
}

fn sqrt_diffusion(p: &BuiltinModel, m: usize, y: f64, delta: f64) -> Result<f64> {
    let ker = MomentKernel::new(p, y, delta);
    let s = |k: u32| ker.s(k);
    let (k, th, sig, x0, eta, d) = (p.kappa, p.theta, p.sigma, p.x0, p.eta(), delta);
    let ad = p.a * d;
    let sq = d.sqrt();
    // the polynomial coefficients are written in (x − x₀)/(σ√Δ)
    let v = y * x0.sqrt();
    let (v2, v4) = (v * v, v.powi(4));
    let (s2, s3, s4) = (sig * sig, sig.powi(3), sig.powi(4));
    let (th2, x02) = (th * th, x0 * x0);
    Ok(match m {
        0 => s(0)?,
        1 => {
            let inner = v * s(2)?
                + (2.0 * k * th * d * v + 2.0 * sig * (x0 - v2) * sq) * s(1)?
                + (k * eta * (th + x0) * d * d * v + 2.0 * k * th * sig * (x0 - v2) * d.powf(1.5)
                    + s2 * (-3.0 * x0 + v2) * d * v)
                    * s(0)?;
            inner / (4.0 * sig * x02 * sq)
        }
        _ => {
            let b4 = 10.0 * k * k * (3.0 * th2 - x02) * d * d - 60.0 * k * th * sig * d.powf(1.5) * v
                + (15.0 * (3.0 + ad) * v2 + (-12.0 + 17.0 * ad) * x0) * s2 * d;
            let b3 = 20.0 * k.powi(3) * th * (th2 - x02) * d.powi(3)
                - 20.0 * k * k * sig * (3.0 * th2 - x02) * d.powf(2.5) * v
                - 2.0 * k * s2 * ((7.0 + 6.0 * ad) * x02 + th * (x0 * (1.0 - 28.0 * ad) - 30.0 * (2.0 + ad) * v2)) * d * d
                + 2.0 * s3 * (x0 * (38.0 + 9.0 * ad) - 10.0 * (4.0 + 3.0 * ad) * v2) * d.powf(1.5) * v;
            let b2 = (5.0 * k.powi(4) * (th2 - x02).powi(2) * d * d
                - 20.0 * k.powi(3) * sig * th * (th2 - x02) * d.powf(1.5) * v
                + (eta * eta * (30.0 * v2 * (4.0 + 3.0 * ad) + x0 * (37.0 + 66.0 * ad))
                    + 12.0 * k * eta * x0 * (5.0 * v2 * (4.0 + 3.0 * ad) + x0 * (4.0 + 9.0 * ad))
                    + 20.0 * k * k * x02 * (x0 * ad + (4.0 + 3.0 * ad) * v2))
                    * s2
                    * d
                + 2.0 * s3 * eta * (-10.0 * v2 * (10.0 + 9.0 * ad) + x0 * (77.0 + 48.0 * ad)) * sq * v
                + 4.0 * k * s3 * x0 * (-5.0 * v2 * (10.0 + 9.0 * ad) + x0 * (48.0 + 33.0 * ad)) * sq * v
                - s4 * (-5.0 * (19.0 + 18.0 * ad) * v4 + (281.0 + 252.0 * ad) * x0 * v2 + (9.0 + 23.0 * ad) * x02))
                * d
                * d;
            let b1 = s2 * (1.0 + ad) * d.powf(2.5)
                * (-4.0 * k.powi(3) * (th2 - x02) * (3.0 * x02 - 8.0 * th * x0 - 15.0 * th * v2) * d.powf(1.5)
                    + 6.0 * sig
                        * (eta * eta * (23.0 * x0 - 30.0 * v2) + 4.0 * k * eta * x0 * (13.0 * x0 - 15.0 * v2)
                            + 20.0 * k * k * x02 * (x0 - v2))
                        * d
                        * v
                    + s2 * (eta * (7.0 * x02 - 552.0 * x0 * v2 + 180.0 * v4)
                        + 36.0 * k * x0 * (x02 - 16.0 * x0 * v2 + 5.0 * v4))
                        * sq
                    + s3 * (-241.0 * x02 + 382.0 * x0 * v2 - 60.0 * v4) * v);
            let b0 = 5.0 * s2 * (1.0 + ad) * d.powi(3)
                * (k * k * eta * eta * (x0 + 3.0 * v2) * (th + x0).powi(2) * d * d
                    + 12.0 * k * k * th * sig * eta * (x0 - v2) * (th + x0) * d.powf(1.5) * v
                    + 2.0 * s2 * d * (x02 - 10.0 * x0 * v2 + 3.0 * v4) * (3.0 * eta * eta + 6.0 * k * eta * x0 + 2.0 * k * k * x02)
                    - 4.0 * k * th * s3 * (15.0 * x02 - 20.0 * x0 * v2 + 3.0 * v4) * sq * v
                    + 3.0 * s4 * (-3.0 * x0.powi(3) + 21.0 * x02 * v2 - 11.0 * x0 * v4 + v.powi(6)));
            let inner = 5.0 * s(6)? + 20.0 * (k * th * d - sig * sq * v) * s(5)? + b4 * s(4)? + b3 * s(3)? + b2 * s(2)?
                + b1 * s(1)?
                + b0 * s(0)?;
            inner / (480.0 * s4 * x02 * x02 * d * d * (1.0 + ad))
        }
    })
}
