use gammaexp::benchmark::simulate::{path_rng, Noise};
use gammaexp::benchmark::{BuiltinModel, ModelKind};
use gammaexp::expansion::ExpansionEngine;
use gammaexp::ito_algebra::{IntegralExpression, IntegralIndex, Integrator, Term};
use gammaexp::pathwise::DiscretePath;
use proptest::prelude::*;
use rayon::prelude::*;

fn index() -> impl Strategy<Value = IntegralIndex> {
    prop::collection::vec((0u8..2, 0u32..3), 0..3).prop_map(|levels| {
        let (tags, powers): (Vec<u8>, Vec<u32>) = levels.into_iter().unzip();
        IntegralIndex::from_tags(&tags, &powers)
    })
}

fn expression() -> impl Strategy<Value = IntegralExpression> {
    prop::collection::vec((-2.0f64..2.0, 0u32..2, index()), 1..4).prop_map(|terms| {
        IntegralExpression::from_terms(terms.into_iter().map(|(coeff, pending, index)| Term { coeff, pending, index }))
    })
}

fn scale_of(e: &IntegralExpression) -> f64 {
    e.terms().map(|t| t.coeff.abs()).fold(1.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn product_is_commutative(a in expression(), b in expression()) {
        let d = a.multiply(&b).max_abs_diff(&b.multiply(&a));
        prop_assert!(d <= 1e-12 * scale_of(&a) * scale_of(&b));
    }

    #[test]
    fn product_is_associative(a in expression(), b in expression(), c in expression()) {
        let left = a.multiply(&b).multiply(&c);
        let right = a.multiply(&b.multiply(&c));
        let tol = 1e-11 * scale_of(&a) * scale_of(&b) * scale_of(&c);
        prop_assert!(left.max_abs_diff(&right) <= tol);
    }

    #[test]
    fn product_distributes_over_sums(a in expression(), b in expression(), c in expression()) {
        let left = a.multiply(&b.add(&c));
        let right = a.multiply(&b).add(&a.multiply(&c));
        let tol = 1e-12 * scale_of(&a) * (scale_of(&b) + scale_of(&c));
        prop_assert!(left.max_abs_diff(&right) <= tol);
    }

    #[test]
    fn constants_act_as_scalars(a in expression(), c in -3.0f64..3.0) {
        let d = a.multiply(&IntegralExpression::constant(c)).max_abs_diff(&a.scale(c));
        prop_assert!(d <= 1e-14 * scale_of(&a));
        prop_assert!(a.multiply(&IntegralExpression::zero()).is_zero());
    }

    #[test]
    fn integration_is_linear(a in expression(), b in expression(), c in -3.0f64..3.0) {
        for integrator in [Integrator::Time, Integrator::Wiener] {
            let left = a.scale(c).add(&b).integrate(integrator);
            let right = a.integrate(integrator).scale(c).add(&b.integrate(integrator));
            prop_assert!(left.max_abs_diff(&right) <= 1e-13 * (scale_of(&a) * c.abs() + scale_of(&b)));
            prop_assert_eq!(left.max_pending(), 0);
        }
    }

    #[test]
    fn pending_powers_add_under_products(p in 0u32..4, q in 0u32..4) {
        let prod = IntegralExpression::pending_l(p).multiply(&IntegralExpression::pending_l(q));
        prop_assert_eq!(prod.max_abs_diff(&IntegralExpression::pending_l(p + q)), 0.0);
    }
}

/// Paired statistics of `a ⋆ b − a·b` over simulated paths: the largest
/// z-score and the largest mean gap relative to `E|a·b|`. Left-point sums
/// leave an `O(dt)` diagonal in the difference, removed by Richardson
/// extrapolation between a path and its two-step coarsening.
fn product_gaps(kind: ModelKind, pairs: &[(usize, usize)], paths: usize, seed: u64) -> (f64, f64) {
    let m = BuiltinModel::reference(kind);
    let delta = 1.0 / 12.0;
    let engine = ExpansionEngine::new(m.spec());
    let x: Vec<IntegralExpression> = (1..=3).map(|k| (*engine.term(k).unwrap()).clone()).collect();
    let mut exprs = x.clone();
    exprs.extend(pairs.iter().map(|&(i, j)| x[i - 1].multiply(&x[j - 1])));
    let gaps = |path: &DiscretePath| -> Vec<(f64, f64)> {
        let v = path.evaluate_many(&exprs);
        pairs
            .iter()
            .enumerate()
            .map(|(k, &(i, j))| (v[3 + k] - v[i - 1] * v[j - 1], v[i - 1] * v[j - 1]))
            .collect()
    };
    let samples: Vec<Vec<(f64, f64)>> = (0..paths)
        .into_par_iter()
        .map(|i| {
            let mut rng = path_rng(seed, i as u64);
            let noise = Noise::sample(&mut rng, delta, 2000, m.a, m.b).unwrap();
            let fine = DiscretePath::from_increments(noise.dt, noise.dw.clone(), &noise.dl);
            let pair_sum = |v: &[f64]| v.chunks(2).map(|c| c[0] + c[1]).collect::<Vec<f64>>();
            let coarse = DiscretePath::from_increments(2.0 * noise.dt, pair_sum(&noise.dw), &pair_sum(&noise.dl));
            gaps(&fine).iter().zip(gaps(&coarse)).map(|(f, c)| (2.0 * f.0 - c.0, f.1)).collect()
        })
        .collect();
    let n = samples.len() as f64;
    let (mut z, mut rel) = (0.0f64, 0.0f64);
    for k in 0..pairs.len() {
        let mean = samples.iter().map(|s| s[k].0).sum::<f64>() / n;
        let var = samples.iter().map(|s| (s[k].0 - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let size = samples.iter().map(|s| s[k].1.abs()).sum::<f64>() / n;
        z = z.max(mean.abs() / (var / n).sqrt());
        rel = rel.max(mean.abs() / size);
    }
    (z, rel)
}

#[test]
fn products_of_expansion_terms_match_simulation() {
    let pairs = [(1, 1), (1, 2), (2, 2), (1, 3)];
    for (kind, seed) in [(ModelKind::ConstantDiffusion, 21), (ModelKind::SqrtDiffusion, 22)] {
        let (z, _) = product_gaps(kind, &pairs, 4000, seed);
        assert!(z < 3.0, "{kind}: |z| = {z:.2}");
    }
}

#[test]
fn pure_jump_products_hold_pathwise() {
    // no bracket terms: the paired gap is discretization only
    let (_, rel) = product_gaps(ModelKind::PureJumpOu, &[(1, 1), (1, 2), (2, 2), (1, 3)], 500, 23);
    assert!(rel < 1e-6, "relative gap {rel:e}");
}

#[test]
fn squared_brownian_motion_has_the_quadratic_variation_term() {
    let w = IntegralExpression::single(1.0, IntegralIndex::from_tags(&[1], &[0]));
    let sq = w.multiply(&w);
    assert_eq!(sq.coeff(&IntegralIndex::from_tags(&[1, 1], &[0, 0]), 0), 2.0);
    assert_eq!(sq.coeff(&IntegralIndex::from_tags(&[0], &[0]), 0), 1.0);
    assert_eq!(sq.len(), 2);
}
