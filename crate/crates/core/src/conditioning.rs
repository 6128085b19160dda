//! Conditional expectations of iterated integrals given the terminal values
//! `W(Δ) = z₁√Δ` and `L(Δ) = z₂`.
//!
//! Under the conditioning `W(s) = B(s) − (s/Δ)B(Δ) + (s/√Δ)z₁` with `B` a
//! Brownian motion independent of `L`, so every `dW` level splits three ways.
//! Powers of `B(Δ)` are multiplied back into the iterated integrals, integrals
//! with a remaining `dB` level have zero mean, and the surviving pure-time
//! integrals are conditioned on `L(Δ)` through the Beta law of the gamma bridge.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use crate::accumulate::Accumulator;
use crate::error::{Error, Result};
use crate::expansion::{ExpansionEngine, IndexTuple, ModelSpec};
use crate::ito_algebra::{IntegralExpression, IntegralIndex, Integrator, Level};

/// Largest number of factors in a product `∏X_{jᵢ+1}` handled by [`compute_k`].
pub const MAX_ELL: usize = 4;

/// `coeff · z₁^z1_power · B(Δ)^b_delta_power · L(Δ)^pending · J_index(Δ)`
/// where `Wiener` levels of `index` integrate against the bridge noise `dB`.
/// The factors `1/√Δ` and `−1/Δ` produced by the split are part of `coeff`.
#[derive(Clone, Debug, PartialEq)]
pub struct BridgeTerm {
    pub coeff: f64,
    pub z1_power: u32,
    pub b_delta_power: u32,
    pub pending: u32,
    pub index: IntegralIndex,
}

/// Splits every Wiener level of every term into `dB`, `−(B(Δ)/Δ) ds` and
/// `(z₁/√Δ) ds`. The result is a multiset with one entry per choice.
pub fn bridge_expand(e: &IntegralExpression, delta: f64) -> Vec<BridgeTerm> {
    let mut out = Vec::new();
    for t in e.terms() {
        for (coeff, z1, b, index) in split_index(&t.index, delta) {
            debug_assert!((z1 + b) as usize <= t.index.len());
            out.push(BridgeTerm {
                coeff: t.coeff * coeff,
                z1_power: z1,
                b_delta_power: b,
                pending: t.pending,
                index,
            });
        }
    }
    out
}

fn split_index(index: &IntegralIndex, delta: f64) -> Vec<(f64, u32, u32, IntegralIndex)> {
    let inv_sqrt = 1.0 / delta.sqrt();
    let inv = -1.0 / delta;
    let mut partial: Vec<(f64, u32, u32, Vec<Level>)> = vec![(1.0, 0, 0, Vec::new())];
    for &level in index.levels() {
        let mut next = Vec::with_capacity(partial.len() * 3);
        for (c, z1, b, levels) in partial {
            match level.integrator {
                Integrator::Time => {
                    let mut l = levels;
                    l.push(level);
                    next.push((c, z1, b, l));
                }
                Integrator::Wiener => {
                    let mut l0 = levels.clone();
                    l0.push(level);
                    next.push((c, z1, b, l0));
                    let mut l1 = levels.clone();
                    l1.push(Level::time(level.l_power));
                    next.push((c * inv, z1, b + 1, l1));
                    let mut l2 = levels;
                    l2.push(Level::time(level.l_power));
                    next.push((c * inv_sqrt, z1 + 1, b, l2));
                }
            }
        }
        partial = next;
    }
    partial
        .into_iter()
        .map(|(c, z1, b, l)| (c, z1, b, IntegralIndex::new(l)))
        .collect()
}

/// `B(Δ)·J_α(Δ)` as a combination of iterated integrals: a new `dB` level
/// inserted at each of the `h+1` positions, plus each `dB` level of `α`
/// turned into a `ds` level.
pub fn multiply_b_once(index: &IntegralIndex) -> Vec<(IntegralIndex, f64)> {
    let levels = index.levels();
    let mut out = Vec::with_capacity(2 * levels.len() + 1);
    for pos in 0..=levels.len() {
        let mut l = levels.to_vec();
        l.insert(pos, Level::wiener(0));
        out.push((IntegralIndex::new(l), 1.0));
    }
    for (k, level) in levels.iter().enumerate() {
        if level.integrator == Integrator::Wiener {
            let mut l = levels.to_vec();
            l[k] = Level::time(level.l_power);
            out.push((IntegralIndex::new(l), 1.0));
        }
    }
    out
}

/// Multiplies all `B(Δ)` factors of `t` into its iterated integral.
pub fn eliminate_b_factor(t: &BridgeTerm) -> Vec<BridgeTerm> {
    eliminate_with(t, false)
}

fn eliminate_with(t: &BridgeTerm, prune: bool) -> Vec<BridgeTerm> {
    let mut current: BTreeMap<IntegralIndex, f64> = BTreeMap::from([(t.index.clone(), t.coeff)]);
    for remaining in (0..t.b_delta_power).rev() {
        let mut acc = Accumulator::new();
        for (idx, c) in &current {
            for (next, k) in multiply_b_once(idx) {
                // each further factor changes the dB count by one, and only
                // terms that end with no dB level have nonzero mean
                if prune && next.wiener_count() > remaining as usize {
                    continue;
                }
                acc.add(next, c * k);
            }
        }
        current = acc.finish();
    }
    current
        .into_iter()
        .map(|(index, coeff)| BridgeTerm {
            coeff,
            z1_power: t.z1_power,
            b_delta_power: 0,
            pending: t.pending,
            index,
        })
        .collect()
}

/// Removes terms with a `dB` level; they have zero conditional mean.
pub fn drop_martingale(terms: Vec<BridgeTerm>) -> Vec<BridgeTerm> {
    terms
        .into_iter()
        .filter(|t| {
            debug_assert_eq!(t.b_delta_power, 0, "B(Δ) factors must be eliminated first");
            t.index.is_pure_time()
        })
        .collect()
}

/// Polynomial in the ordered time variables `s₁ < … < s_h`.
#[derive(Clone, Debug, PartialEq)]
pub struct SimplexPolynomial {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, f64>,
}

impl SimplexPolynomial {
    pub fn constant(nvars: usize, c: f64) -> Self {
        let mut terms = BTreeMap::new();
        if c != 0.0 {
            terms.insert(vec![0; nvars], c);
        }
        Self { nvars, terms }
    }

    /// Single monomial `c ∏ s_k^{e_k}`.
    pub fn monomial(c: f64, exponents: Vec<u32>) -> Self {
        let nvars = exponents.len();
        let mut terms = BTreeMap::new();
        if c != 0.0 {
            terms.insert(exponents, c);
        }
        Self { nvars, terms }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32], f64)> {
        self.terms.iter().map(|(e, &c)| (e.as_slice(), c))
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, v)| (e.clone(), v * c)).collect(),
        }
    }

    /// Multiplies by a univariate polynomial in variable `var`
    /// (coefficients in increasing degree).
    pub fn mul_univariate(&self, var: usize, poly: &[f64]) -> Self {
        let mut acc = Accumulator::new();
        for (e, &c) in &self.terms {
            for (d, &p) in poly.iter().enumerate() {
                let mut ne = e.clone();
                ne[var] += d as u32;
                acc.add(ne, c * p);
            }
        }
        Self {
            nvars: self.nvars,
            terms: acc.finish(),
        }
    }

    pub fn evaluate(&self, s: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| c * e.iter().zip(s).map(|(&k, x)| x.powi(k as i32)).product::<f64>())
            .sum()
    }
}

/// `E[∏ L(s_k)^{n_k} | L(Δ) = z₂] = z₂^{m_h} · P(s₁,…,s_h)` for an all-time
/// index; returns `(P, m_h)`.
///
/// # Panics
/// If the index has a Wiener level.
pub fn gamma_condition(index: &IntegralIndex, gamma_a: f64, delta: f64) -> (SimplexPolynomial, u32) {
    assert!(index.is_pure_time(), "gamma conditioning needs an all-time index");
    let h = index.len();
    let mut p = SimplexPolynomial::constant(h, 1.0);
    let mut m = 0u32;
    for (k, level) in index.levels().iter().enumerate() {
        for r in m..m + level.l_power {
            p = p.mul_univariate(k, &[r as f64, gamma_a]);
        }
        m += level.l_power;
    }
    let denom: f64 = (0..m).map(|r| gamma_a * delta + r as f64).product();
    (p.scale(1.0 / denom), m)
}

/// `∫₀^Δ ∫₀^{s_h} … ∫₀^{s₂} p ds₁ … ds_h`, exact for polynomials.
pub fn simplex_integrate(p: &SimplexPolynomial, h: usize, delta: f64) -> f64 {
    assert_eq!(p.nvars(), h, "polynomial has {} variables, expected {h}", p.nvars());
    let mut acc = Accumulator::new();
    for (e, c) in p.terms() {
        // ∫ ∏ s_k^{e_k} over the simplex = Δ^{E_h} / ∏ E_k, E_k = Σ_{i≤k}(e_i + 1)
        let mut cum = 0u32;
        let mut denom = 1.0;
        for &ek in e {
            cum += ek + 1;
            denom *= cum as f64;
        }
        acc.add((), c * delta.powi(cum as i32) / denom);
    }
    acc.finish().get(&()).copied().unwrap_or(0.0)
}

/// Polynomial in `(z₁, z₂)`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct BivariatePolynomial {
    coeffs: BTreeMap<(u32, u32), f64>,
}

impl BivariatePolynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        Self::from_terms([((0, 0), c)])
    }

    pub fn from_terms<I: IntoIterator<Item = ((u32, u32), f64)>>(terms: I) -> Self {
        let mut acc = Accumulator::new();
        for (k, c) in terms {
            acc.add(k, c);
        }
        Self {
            coeffs: acc.finish(),
        }
    }

    pub fn coeff(&self, n1: u32, n2: u32) -> f64 {
        self.coeffs.get(&(n1, n2)).copied().unwrap_or(0.0)
    }

    pub fn terms(&self) -> impl Iterator<Item = ((u32, u32), f64)> + '_ {
        self.coeffs.iter().map(|(&k, &c)| (k, c))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree_z1(&self) -> Option<u32> {
        self.coeffs.keys().map(|k| k.0).max()
    }

    pub fn degree_z2(&self) -> Option<u32> {
        self.coeffs.keys().map(|k| k.1).max()
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::from_terms(self.terms().chain(other.terms()))
    }

    pub fn scale(&self, c: f64) -> Self {
        Self::from_terms(self.terms().map(|(k, v)| (k, v * c)))
    }

    pub fn evaluate(&self, z1: f64, z2: f64) -> f64 {
        self.coeffs
            .iter()
            .map(|(&(a, b), c)| c * z1.powi(a as i32) * z2.powi(b as i32))
            .sum()
    }

    /// `∂u/∂z₁ − z₁u`
    pub fn d1(&self) -> Self {
        let mut acc = Accumulator::new();
        for (&(a, b), &c) in &self.coeffs {
            if a > 0 {
                acc.add((a - 1, b), c * a as f64);
            }
            acc.add((a + 1, b), -c);
        }
        Self {
            coeffs: acc.finish(),
        }
    }

    /// Largest absolute coefficient difference.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut keys: Vec<(u32, u32)> = self.coeffs.keys().copied().collect();
        keys.extend(other.coeffs.keys());
        keys.into_iter()
            .map(|(a, b)| (self.coeff(a, b) - other.coeff(a, b)).abs())
            .fold(0.0, f64::max)
    }
}

impl fmt::Display for BivariatePolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .coeffs
            .iter()
            .map(|(&(a, b), c)| format!("{c:e}·z1^{a}·z2^{b}"))
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// Applies `D₁` `ell` times.
pub fn d1_operator(p: &BivariatePolynomial, ell: usize) -> BivariatePolynomial {
    (0..ell).fold(p.clone(), |acc, _| acc.d1())
}

/// Conditional expectations of expansion-term products for one model and Δ.
///
/// Results per iterated integral are cached, since products of expansion
/// terms share most of their indices.
#[derive(Debug)]
pub struct Conditioner {
    delta: f64,
    gamma_a: f64,
    cache: HashMap<IntegralIndex, Vec<((u32, u32), f64)>>,
}

impl Conditioner {
    pub fn new(delta: f64, gamma_a: f64) -> Result<Self> {
        if !(delta.is_finite() && delta > 0.0) {
            return Err(Error::InvalidArgument(format!("delta must be positive, got {delta}")));
        }
        Ok(Self {
            delta,
            gamma_a,
            cache: HashMap::new(),
        })
    }

    /// `E[e(Δ) | W(Δ) = z₁√Δ, L(Δ) = z₂]`.
    pub fn condition(&mut self, e: &IntegralExpression) -> BivariatePolynomial {
        let mut acc = Accumulator::new();
        for t in e.terms() {
            let contributions = self.condition_index(&t.index).clone();
            for ((z1, z2), v) in contributions {
                acc.add((z1, z2 + t.pending), t.coeff * v);
            }
        }
        BivariatePolynomial {
            coeffs: acc.finish(),
        }
    }

    fn condition_index(&mut self, index: &IntegralIndex) -> &Vec<((u32, u32), f64)> {
        if !self.cache.contains_key(index) {
            let mut acc = Accumulator::new();
            for (coeff, z1, b, j) in split_index(index, self.delta) {
                let w = j.wiener_count() as u32;
                if w > b || (b - w) % 2 == 1 {
                    continue;
                }
                let term = BridgeTerm {
                    coeff,
                    z1_power: z1,
                    b_delta_power: b,
                    pending: 0,
                    index: j,
                };
                for survivor in drop_martingale(eliminate_with(&term, true)) {
                    let (p, m) = gamma_condition(&survivor.index, self.gamma_a, self.delta);
                    let v = simplex_integrate(&p, survivor.index.len(), self.delta);
                    acc.add((survivor.z1_power, m), survivor.coeff * v);
                }
            }
            let v: Vec<_> = acc.finish().into_iter().collect();
            self.cache.insert(index.clone(), v);
        }
        &self.cache[index]
    }
}

/// `K_{(ℓ,j)}(z₁, z₂) = E[∏ X_{jᵢ+1}(Δ) | W(Δ) = z₁√Δ, L(Δ) = z₂]`.
pub fn compute_k(
    engine: &ExpansionEngine,
    conditioner: &mut Conditioner,
    tuple: &IndexTuple,
) -> Result<BivariatePolynomial> {
    if tuple.ell == 0 || tuple.ell != tuple.j.len() || tuple.j.contains(&0) {
        return Err(Error::InvalidArgument(format!("malformed index tuple {tuple:?}")));
    }
    if tuple.ell > MAX_ELL {
        return Err(Error::OrderTooLarge {
            requested: tuple.ell,
            max: MAX_ELL,
        });
    }
    let mut prod = (*engine.term(tuple.j[0] + 1)?).clone();
    for &j in &tuple.j[1..] {
        prod = prod.multiply(&*engine.term(j + 1)?);
    }
    Ok(conditioner.condition(&prod))
}

/// Convenience wrapper building a fresh engine and conditioner.
pub fn compute_k_for_model(
    ell: usize,
    j: &[usize],
    model: &ModelSpec,
    delta: f64,
) -> Result<BivariatePolynomial> {
    if j.len() != ell {
        return Err(Error::InvalidArgument(format!(
            "index tuple length {} does not match ell = {ell}",
            j.len()
        )));
    }
    let engine = ExpansionEngine::new(model.clone());
    let mut conditioner = Conditioner::new(delta, model.gamma_a())?;
    compute_k(&engine, &mut conditioner, &IndexTuple::new(j.to_vec()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ito_algebra::index_product;

    fn idx(tags: &[u8], pows: &[u32]) -> IntegralIndex {
        IntegralIndex::from_tags(tags, pows)
    }

    #[test]
    fn bridge_split_of_single_wiener_level() {
        let d = 0.25;
        let terms = bridge_expand(&IntegralExpression::single(1.0, idx(&[1], &[0])), d);
        assert_eq!(terms.len(), 3);
        let find = |z1, b, tag| {
            terms
                .iter()
                .find(|t| t.z1_power == z1 && t.b_delta_power == b && t.index == idx(&[tag], &[0]))
                .map(|t| t.coeff)
        };
        assert_eq!(find(0, 0, 1), Some(1.0));
        assert_eq!(find(0, 1, 0), Some(-4.0));
        assert_eq!(find(1, 0, 0), Some(2.0));
        let pure = bridge_expand(&IntegralExpression::single(1.0, idx(&[0], &[1])), d);
        assert_eq!(pure.len(), 1);
        assert_eq!(pure[0].index, idx(&[0], &[1]));
        let two = bridge_expand(&IntegralExpression::single(1.0, idx(&[1, 1], &[0, 0])), d);
        assert_eq!(two.len(), 9);
    }

    #[test]
    fn b_elimination_examples() {
        let t = |index| BridgeTerm {
            coeff: 1.0,
            z1_power: 0,
            b_delta_power: 1,
            pending: 0,
            index,
        };
        let out = eliminate_b_factor(&t(idx(&[1], &[0])));
        assert_eq!(out.len(), 2);
        assert!(out.iter().any(|r| r.index == idx(&[1, 1], &[0, 0]) && r.coeff == 2.0));
        assert!(out.iter().any(|r| r.index == idx(&[0], &[0]) && r.coeff == 1.0));
        let out = eliminate_b_factor(&t(idx(&[0], &[1])));
        assert_eq!(out.len(), 2);
        assert!(out.iter().any(|r| r.index == idx(&[1, 0], &[0, 1])));
        assert!(out.iter().any(|r| r.index == idx(&[0, 1], &[1, 0])));
        let mut none = t(idx(&[1, 0], &[2, 1]));
        none.b_delta_power = 0;
        assert_eq!(eliminate_b_factor(&none), vec![none.clone()]);
    }

    #[test]
    fn b_multiplication_matches_general_product() {
        let b = idx(&[1], &[0]);
        let cases = [
            idx(&[1], &[0]),
            idx(&[0], &[1]),
            idx(&[1, 0], &[2, 1]),
            idx(&[0, 1, 1], &[1, 0, 3]),
            idx(&[1, 1, 0, 1], &[0, 1, 1, 2]),
        ];
        for c in cases {
            let mut explicit: BTreeMap<IntegralIndex, f64> = BTreeMap::new();
            for (i, k) in multiply_b_once(&c) {
                *explicit.entry(i).or_default() += k;
            }
            let general = index_product(&b, &c);
            assert_eq!(explicit, *general, "{c}");
        }
    }

    #[test]
    fn martingale_terms_vanish() {
        let mk = |index| BridgeTerm {
            coeff: 1.0,
            z1_power: 0,
            b_delta_power: 0,
            pending: 0,
            index,
        };
        assert!(drop_martingale(vec![mk(idx(&[1], &[0]))]).is_empty());
        let kept = drop_martingale(vec![mk(idx(&[0], &[1])), mk(idx(&[0, 1], &[0, 0]))]);
        assert_eq!(kept, vec![mk(idx(&[0], &[1]))]);
    }

    #[test]
    fn gamma_condition_examples() {
        let (a, d) = (100.0, 1.0 / 52.0);
        let (p, m) = gamma_condition(&idx(&[0], &[1]), a, d);
        assert_eq!(m, 1);
        let s = 0.007;
        assert!((p.evaluate(&[s]) - s / d).abs() < 1e-14);
        let (p, m) = gamma_condition(&idx(&[0, 0], &[1, 1]), a, d);
        assert_eq!(m, 2);
        let (s1, s2) = (0.004, 0.011);
        let expect = (a * s1) * (a * s2 + 1.0) / ((a * d) * (a * d + 1.0));
        assert!((p.evaluate(&[s1, s2]) - expect).abs() < 1e-14);
        let (p, m) = gamma_condition(&idx(&[0], &[0]), a, d);
        assert_eq!(m, 0);
        assert_eq!(p, SimplexPolynomial::constant(1, 1.0));
        let (p, m) = gamma_condition(&idx(&[0, 0, 0], &[0, 0, 0]), a, d);
        assert_eq!(m, 0);
        assert_eq!(p, SimplexPolynomial::constant(3, 1.0));
    }

    #[test]
    fn simplex_integrals() {
        let d = 0.3;
        assert!((simplex_integrate(&SimplexPolynomial::constant(2, 1.0), 2, d) - d * d / 2.0).abs() < 1e-16);
        let s1 = SimplexPolynomial::monomial(1.0, vec![1, 0]);
        assert!((simplex_integrate(&s1, 2, d) - d.powi(3) / 6.0).abs() < 1e-16);
        let s1_over_d = SimplexPolynomial::monomial(1.0 / d, vec![1]);
        assert!((simplex_integrate(&s1_over_d, 1, d) - d / 2.0).abs() < 1e-16);
        for h in 1..=6 {
            let f: f64 = (1..=h).map(|k| k as f64).product();
            let v = simplex_integrate(&SimplexPolynomial::constant(h, 1.0), h, d);
            assert!((v - d.powi(h as i32) / f).abs() < 1e-17);
        }
    }

    #[test]
    fn d1_examples_and_hermite() {
        let one = BivariatePolynomial::constant(1.0);
        assert_eq!(d1_operator(&one, 1), BivariatePolynomial::from_terms([((1, 0), -1.0)]));
        assert_eq!(
            d1_operator(&one, 2),
            BivariatePolynomial::from_terms([((2, 0), 1.0), ((0, 0), -1.0)])
        );
        let z1 = BivariatePolynomial::from_terms([((1, 0), 1.0)]);
        assert_eq!(
            d1_operator(&z1, 1),
            BivariatePolynomial::from_terms([((0, 0), 1.0), ((2, 0), -1.0)])
        );
        // He_{n+1} = z He_n − n He_{n−1}
        let mut he = vec![
            BivariatePolynomial::constant(1.0),
            BivariatePolynomial::from_terms([((1, 0), 1.0)]),
        ];
        for n in 1..6 {
            let z_he: Vec<_> = he[n].terms().map(|((a, b), c)| ((a + 1, b), c)).collect();
            let next = BivariatePolynomial::from_terms(z_he).add(&he[n - 1].scale(-(n as f64)));
            he.push(next);
        }
        for (l, h) in he.iter().enumerate() {
            let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
            let d = d1_operator(&one, l);
            assert!(d.max_abs_diff(&h.scale(sign)) < 1e-12, "ell = {l}");
            assert_eq!(d.degree_z1(), Some(l as u32));
        }
    }
}
