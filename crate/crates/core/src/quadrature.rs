//! Adaptive 21-point Gauss–Kronrod quadrature for vector-valued integrands
//! over finite intervals.

use crate::error::{Error, Result};

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_750_447_350_870,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// Stopping rule: component `i` is converged when its error estimate is
/// below `max(abs_tol, rel_tol·|I_i|, mass_tol·∫|f_i|)`.
#[derive(Clone, Copy, Debug)]
pub struct Tolerance {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub mass_tol: f64,
    pub max_intervals: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            rel_tol: 1e-10,
            mass_tol: 0.0,
            max_intervals: 4000,
        }
    }
}

#[derive(Clone, Debug)]
pub struct QuadratureResult {
    pub values: Vec<f64>,
    pub errors: Vec<f64>,
    /// `∫|f_i|`
    pub abs_mass: Vec<f64>,
}

struct Panel {
    a: f64,
    b: f64,
    values: Vec<f64>,
    errors: Vec<f64>,
    abs_mass: Vec<f64>,
}

fn rescale_error(err: f64, resabs: f64, resasc: f64) -> f64 {
    let mut e = err.abs();
    if resasc != 0.0 && e != 0.0 {
        let scale = (200.0 * e / resasc).powf(1.5);
        e = if scale < 1.0 { resasc * scale } else { resasc };
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        e = e.max(50.0 * f64::EPSILON * resabs);
    }
    e
}

fn kronrod_panel<F>(f: &F, dim: usize, a: f64, b: f64, buf: &mut [Vec<f64>]) -> Panel
where
    F: Fn(f64, &mut [f64]),
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    // buf[0..21] holds function values at the 21 nodes
    for (k, &x) in XGK.iter().enumerate() {
        if k < 10 {
            f(center - half * x, &mut buf[k]);
            f(center + half * x, &mut buf[20 - k]);
        } else {
            f(center, &mut buf[10]);
        }
    }
    let mut values = vec![0.0; dim];
    let mut errors = vec![0.0; dim];
    let mut abs_mass = vec![0.0; dim];
    for i in 0..dim {
        let mut rk = WGK[10] * buf[10][i];
        let mut rg = 0.0;
        let mut ra = WGK[10] * buf[10][i].abs();
        for k in 0..10 {
            let (lo, hi) = (buf[k][i], buf[20 - k][i]);
            rk += WGK[k] * (lo + hi);
            ra += WGK[k] * (lo.abs() + hi.abs());
            if k % 2 == 1 {
                rg += WG[k / 2] * (lo + hi);
            }
        }
        let mean = 0.5 * rk;
        let mut asc = WGK[10] * (buf[10][i] - mean).abs();
        for k in 0..10 {
            asc += WGK[k] * ((buf[k][i] - mean).abs() + (buf[20 - k][i] - mean).abs());
        }
        let h = half.abs();
        values[i] = rk * half;
        abs_mass[i] = ra * h;
        errors[i] = rescale_error((rk - rg) * half, ra * h, asc * h);
    }
    Panel {
        a,
        b,
        values,
        errors,
        abs_mass,
    }
}

/// Integrates a `dim`-valued function over the union of consecutive
/// intervals given by `breaks` (strictly increasing, at least two points).
pub fn integrate_vec<F>(f: F, dim: usize, breaks: &[f64], tol: Tolerance) -> Result<QuadratureResult>
where
    F: Fn(f64, &mut [f64]),
{
    if breaks.len() < 2 || breaks.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidArgument(
            "quadrature breakpoints must be strictly increasing".into(),
        ));
    }
    let mut buf = vec![vec![0.0; dim]; 21];
    let mut panels: Vec<Panel> = breaks
        .windows(2)
        .map(|w| kronrod_panel(&f, dim, w[0], w[1], &mut buf))
        .collect();
    loop {
        let mut values = vec![0.0; dim];
        let mut errors = vec![0.0; dim];
        let mut mass = vec![0.0; dim];
        for p in &panels {
            for i in 0..dim {
                values[i] += p.values[i];
                errors[i] += p.errors[i];
                mass[i] += p.abs_mass[i];
            }
        }
        if values.iter().chain(&errors).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("quadrature"));
        }
        let tols: Vec<f64> = (0..dim)
            .map(|i| {
                tol.abs_tol
                    .max(tol.rel_tol * values[i].abs())
                    .max(tol.mass_tol * mass[i])
                    .max(f64::MIN_POSITIVE)
            })
            .collect();
        if (0..dim).all(|i| errors[i] <= tols[i]) {
            return Ok(QuadratureResult {
                values,
                errors,
                abs_mass: mass,
            });
        }
        if panels.len() >= tol.max_intervals {
            let worst = (0..dim)
                .max_by(|&i, &j| (errors[i] / tols[i]).total_cmp(&(errors[j] / tols[j])))
                .unwrap_or(0);
            return Err(Error::Quadrature {
                estimate: values[worst],
                error: errors[worst],
            });
        }
        let score = |p: &Panel| {
            (0..dim)
                .map(|i| p.errors[i] / tols[i])
                .fold(0.0, f64::max)
        };
        let (worst_idx, _) = panels
            .iter()
            .enumerate()
            .map(|(k, p)| (k, score(p)))
            .max_by(|x, y| x.1.total_cmp(&y.1))
            .expect("at least one panel");
        let p = panels.swap_remove(worst_idx);
        let mid = 0.5 * (p.a + p.b);
        if !(mid > p.a && mid < p.b) {
            return Err(Error::Quadrature {
                estimate: values[0],
                error: errors[0],
            });
        }
        panels.push(kronrod_panel(&f, dim, p.a, mid, &mut buf));
        panels.push(kronrod_panel(&f, dim, mid, p.b, &mut buf));
    }
}

/// Scalar convenience wrapper around [`integrate_vec`]; returns
/// `(value, error estimate)`.
pub fn integrate<F>(f: F, breaks: &[f64], tol: Tolerance) -> Result<(f64, f64)>
where
    F: Fn(f64) -> f64,
{
    let r = integrate_vec(|x, out: &mut [f64]| out[0] = f(x), 1, breaks, tol)?;
    Ok((r.values[0], r.errors[0]))
}
