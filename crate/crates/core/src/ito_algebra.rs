//! Iterated Itô integrals with gamma-process integrand powers.
//!
//! An [`IntegralIndex`] is the list of levels of
//! `I(t) = ∫₀^t ∫₀^{s_h} … ∫₀^{s_2} L(s_1)^{n_1} dW_{i_1}(s_1) … L(s_h)^{n_h} dW_{i_h}(s_h)`,
//! innermost level first, where `W_0(s) = s` and `W_1` is the Brownian motion.
//! An [`IntegralExpression`] is a finite linear combination of such
//! integrals, each optionally multiplied by a power of `L(t)` that has not yet
//! been absorbed into an outer level.

use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::rc::Rc;

use crate::accumulate::Accumulator;

/// Integrator of one level.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Integrator {
    /// `ds`
    Time,
    /// `dW(s)`; in bridge-expanded expressions this is the bridge increment `dB(s)`.
    Wiener,
}

impl Integrator {
    pub fn tag(self) -> u8 {
        match self {
            Integrator::Time => 0,
            Integrator::Wiener => 1,
        }
    }
}

/// One level of an iterated integral: integrator and the power of `L(s)`
/// multiplying the integrand at that level.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Level {
    pub integrator: Integrator,
    pub l_power: u32,
}

impl Level {
    pub fn new(integrator: Integrator, l_power: u32) -> Self {
        Self {
            integrator,
            l_power,
        }
    }

    pub fn time(l_power: u32) -> Self {
        Self::new(Integrator::Time, l_power)
    }

    pub fn wiener(l_power: u32) -> Self {
        Self::new(Integrator::Wiener, l_power)
    }
}

/// Levels of an iterated integral, innermost first. The empty index is the
/// constant 1.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IntegralIndex {
    levels: Vec<Level>,
}

impl IntegralIndex {
    pub fn unit() -> Self {
        Self::default()
    }

    pub fn new(levels: Vec<Level>) -> Self {
        Self { levels }
    }

    /// Builds an index from integrator tags (0 = time, 1 = Wiener) and
    /// L-powers, innermost first.
    ///
    /// # Panics
    /// If the slices differ in length or a tag is not 0 or 1.
    pub fn from_tags(tags: &[u8], powers: &[u32]) -> Self {
        assert_eq!(tags.len(), powers.len(), "tag and power lists differ in length");
        let levels = tags
            .iter()
            .zip(powers)
            .map(|(&t, &n)| {
                let integrator = match t {
                    0 => Integrator::Time,
                    1 => Integrator::Wiener,
                    _ => panic!("integrator tag must be 0 or 1, got {t}"),
                };
                Level::new(integrator, n)
            })
            .collect();
        Self { levels }
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn wiener_count(&self) -> usize {
        self.levels
            .iter()
            .filter(|l| l.integrator == Integrator::Wiener)
            .count()
    }

    pub fn is_pure_time(&self) -> bool {
        self.wiener_count() == 0
    }

    pub fn total_l_power(&self) -> u32 {
        self.levels.iter().map(|l| l.l_power).sum()
    }

    /// The index with `level` appended as the new outermost level.
    pub fn pushed(&self, level: Level) -> Self {
        let mut levels = Vec::with_capacity(self.levels.len() + 1);
        levels.extend_from_slice(&self.levels);
        levels.push(level);
        Self { levels }
    }

    /// Splits off the outermost level.
    pub fn split_last(&self) -> Option<(IntegralIndex, Level)> {
        let (&last, rest) = self.levels.split_last()?;
        Some((
            Self {
                levels: rest.to_vec(),
            },
            last,
        ))
    }
}

impl fmt::Display for IntegralIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tags: Vec<String> = self.levels.iter().map(|l| l.integrator.tag().to_string()).collect();
        let pows: Vec<String> = self.levels.iter().map(|l| l.l_power.to_string()).collect();
        write!(f, "I[({}),({})]", tags.join(","), pows.join(","))
    }
}

/// `coeff · L(t)^pending · I_index(t)`
#[derive(Clone, Debug, PartialEq)]
pub struct Term {
    pub coeff: f64,
    pub pending: u32,
    pub index: IntegralIndex,
}

/// Linear combination of terms in canonical form: one entry per
/// `(index, pending)` pair, ordered lexicographically, no zero coefficients.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct IntegralExpression {
    terms: BTreeMap<(IntegralIndex, u32), f64>,
}

impl IntegralExpression {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        Self::from_terms([Term {
            coeff: c,
            pending: 0,
            index: IntegralIndex::unit(),
        }])
    }

    /// `L(t)^p`
    pub fn pending_l(p: u32) -> Self {
        Self::from_terms([Term {
            coeff: 1.0,
            pending: p,
            index: IntegralIndex::unit(),
        }])
    }

    pub fn single(coeff: f64, index: IntegralIndex) -> Self {
        Self::from_terms([Term {
            coeff,
            pending: 0,
            index,
        }])
    }

    pub fn from_terms<I: IntoIterator<Item = Term>>(terms: I) -> Self {
        let mut acc = Accumulator::new();
        for t in terms {
            acc.add((t.index, t.pending), t.coeff);
        }
        Self {
            terms: acc.finish(),
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = Term> + '_ {
        self.terms.iter().map(|((index, pending), &coeff)| Term {
            coeff,
            pending: *pending,
            index: index.clone(),
        })
    }

    /// Coefficient of `L^pending · I_index`, zero when absent.
    pub fn coeff(&self, index: &IntegralIndex, pending: u32) -> f64 {
        self.terms
            .get(&(index.clone(), pending))
            .copied()
            .unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn max_level_count(&self) -> usize {
        self.terms.keys().map(|(i, _)| i.len()).max().unwrap_or(0)
    }

    pub fn max_pending(&self) -> u32 {
        self.terms.keys().map(|(_, p)| *p).max().unwrap_or(0)
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::from_terms(self.terms().chain(other.terms()))
    }

    pub fn scale(&self, c: f64) -> Self {
        Self::from_terms(self.terms().map(|mut t| {
            t.coeff *= c;
            t
        }))
    }

    /// Itô product of two expressions.
    pub fn multiply(&self, other: &Self) -> Self {
        let mut acc = Accumulator::new();
        for ((i1, p1), &c1) in &self.terms {
            for ((i2, p2), &c2) in &other.terms {
                let prod = index_product(i1, i2);
                for (idx, &k) in prod.iter() {
                    acc.add((idx.clone(), p1 + p2), c1 * c2 * k);
                }
            }
        }
        Self {
            terms: acc.finish(),
        }
    }

    /// Appends one outer level: `c L(s)^p I_α(s)` becomes `c I_{α‖(i,p)}(t)`.
    pub fn integrate(&self, integrator: Integrator) -> Self {
        Self::from_terms(self.terms().map(|t| Term {
            coeff: t.coeff,
            pending: 0,
            index: t.index.pushed(Level::new(integrator, t.pending)),
        }))
    }

    /// Largest absolute coefficient difference against `other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut keys: Vec<&(IntegralIndex, u32)> = self.terms.keys().collect();
        keys.extend(other.terms.keys());
        keys.into_iter()
            .map(|k| {
                let a = self.terms.get(k).copied().unwrap_or(0.0);
                let b = other.terms.get(k).copied().unwrap_or(0.0);
                (a - b).abs()
            })
            .fold(0.0, f64::max)
    }
}

impl fmt::Display for IntegralExpression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|((i, p), c)| {
                if *p == 0 {
                    format!("{c:e}·{i}")
                } else {
                    format!("{c:e}·L^{p}·{i}")
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

type ProductTable = Rc<BTreeMap<IntegralIndex, f64>>;

const CACHE_LIMIT: usize = 1 << 20;

thread_local! {
    static PRODUCT_CACHE: RefCell<HashMap<(IntegralIndex, IntegralIndex), ProductTable>> =
        RefCell::new(HashMap::new());
}

/// Product of two iterated integrals at a common time as a linear
/// combination of iterated integrals. Coefficients are nonnegative integers.
pub fn index_product(a: &IntegralIndex, b: &IntegralIndex) -> ProductTable {
    if a.is_empty() {
        return Rc::new(BTreeMap::from([(b.clone(), 1.0)]));
    }
    if b.is_empty() {
        return Rc::new(BTreeMap::from([(a.clone(), 1.0)]));
    }
    // the product is symmetric, so cache one orientation
    let key = if a <= b {
        (a.clone(), b.clone())
    } else {
        (b.clone(), a.clone())
    };
    if let Some(hit) = PRODUCT_CACHE.with(|c| c.borrow().get(&key).cloned()) {
        return hit;
    }
    let (a_rest, a_last) = a.split_last().expect("nonempty");
    let (b_rest, b_last) = b.split_last().expect("nonempty");
    let mut out: BTreeMap<IntegralIndex, f64> = BTreeMap::new();
    for (idx, k) in index_product(a, &b_rest).iter() {
        *out.entry(idx.pushed(b_last)).or_default() += k;
    }
    for (idx, k) in index_product(&a_rest, b).iter() {
        *out.entry(idx.pushed(a_last)).or_default() += k;
    }
    if a_last.integrator == Integrator::Wiener && b_last.integrator == Integrator::Wiener {
        let bracket = Level::time(a_last.l_power + b_last.l_power);
        for (idx, k) in index_product(&a_rest, &b_rest).iter() {
            *out.entry(idx.pushed(bracket)).or_default() += k;
        }
    }
    let out = Rc::new(out);
    PRODUCT_CACHE.with(|c| {
        let mut c = c.borrow_mut();
        if c.len() >= CACHE_LIMIT {
            c.clear();
        }
        c.insert(key, out.clone());
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn idx(tags: &[u8], pows: &[u32]) -> IntegralIndex {
        IntegralIndex::from_tags(tags, pows)
    }

    #[test]
    fn brownian_square() {
        let w = IntegralExpression::single(1.0, idx(&[1], &[0]));
        let w2 = w.multiply(&w);
        let expected = IntegralExpression::from_terms([
            Term {
                coeff: 2.0,
                pending: 0,
                index: idx(&[1, 1], &[0, 0]),
            },
            Term {
                coeff: 1.0,
                pending: 0,
                index: idx(&[0], &[0]),
            },
        ]);
        assert_eq!(w2, expected);
    }

    #[test]
    fn time_square_has_no_bracket() {
        let t = IntegralExpression::single(1.0, idx(&[0], &[0]));
        assert_eq!(
            t.multiply(&t),
            IntegralExpression::single(2.0, idx(&[0, 0], &[0, 0]))
        );
    }

    #[test]
    fn pending_powers_add() {
        let l = IntegralExpression::pending_l(1);
        assert_eq!(l.multiply(&l), IntegralExpression::pending_l(2));
    }

    #[test]
    fn bracket_carries_combined_l_power() {
        let a = IntegralExpression::single(1.0, idx(&[1], &[1]));
        let b = IntegralExpression::single(1.0, idx(&[1], &[2]));
        let p = a.multiply(&b);
        assert_eq!(p.coeff(&idx(&[0], &[3]), 0), 1.0);
        assert_eq!(p.coeff(&idx(&[1, 1], &[1, 2]), 0), 1.0);
        assert_eq!(p.coeff(&idx(&[1, 1], &[2, 1]), 0), 1.0);
        assert_eq!(p.len(), 3);
    }

    #[test]
    fn integrate_absorbs_pending_power() {
        let l = IntegralExpression::pending_l(1);
        assert_eq!(
            l.integrate(Integrator::Time),
            IntegralExpression::single(1.0, idx(&[0], &[1]))
        );
        let w = IntegralExpression::single(1.0, idx(&[1], &[0]));
        assert_eq!(
            w.integrate(Integrator::Wiener),
            IntegralExpression::single(1.0, idx(&[1, 1], &[0, 0]))
        );
    }

    #[test]
    fn integrate_first_order_term() {
        let (mu, sigma) = (-0.168, 0.3);
        let x1 = IntegralExpression::from_terms([
            Term {
                coeff: mu,
                pending: 0,
                index: idx(&[0], &[0]),
            },
            Term {
                coeff: sigma,
                pending: 0,
                index: idx(&[1], &[0]),
            },
            Term {
                coeff: 1.0,
                pending: 1,
                index: IntegralIndex::unit(),
            },
        ]);
        let got = x1.integrate(Integrator::Time);
        let expected = IntegralExpression::from_terms([
            Term {
                coeff: mu,
                pending: 0,
                index: idx(&[0, 0], &[0, 0]),
            },
            Term {
                coeff: sigma,
                pending: 0,
                index: idx(&[1, 0], &[0, 0]),
            },
            Term {
                coeff: 1.0,
                pending: 0,
                index: idx(&[0], &[1]),
            },
        ]);
        assert_eq!(got, expected);
    }

    #[test]
    fn shuffle_count_for_time_integrals() {
        // (t^h / h!)(t^k / k!) = C(h+k, h) t^{h+k}/(h+k)!
        let a = IntegralExpression::single(1.0, idx(&[0, 0], &[0, 0]));
        let b = IntegralExpression::single(1.0, idx(&[0, 0, 0], &[0, 0, 0]));
        let p = a.multiply(&b);
        assert_eq!(p.coeff(&idx(&[0; 5], &[0; 5]), 0), 10.0);
        assert_eq!(p.len(), 1);
    }
}
