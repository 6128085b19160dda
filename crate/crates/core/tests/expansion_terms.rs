use gammaexp::benchmark::{BuiltinModel, ModelKind};
use gammaexp::expansion::{index_set, ExpansionEngine, MAX_ORDER};
use gammaexp::ito_algebra::{IntegralExpression, IntegralIndex, Term};
use gammaexp::validation::{taylor_order, McBudget};

fn term(coeff: f64, pending: u32, tags: &[u8], powers: &[u32]) -> Term {
    Term { coeff, pending, index: IntegralIndex::from_tags(tags, powers) }
}

fn x(kind: ModelKind, m: usize) -> IntegralExpression {
    let engine = ExpansionEngine::new(BuiltinModel::reference(kind).spec());
    (*engine.term(m).unwrap()).clone()
}

#[test]
fn first_term_is_drift_noise_and_jump_level() {
    for kind in [ModelKind::ConstantDiffusion, ModelKind::SqrtDiffusion, ModelKind::PureJumpOu] {
        let m = BuiltinModel::reference(kind);
        let expected = IntegralExpression::from_terms([
            term(m.eta(), 0, &[0], &[0]),
            term(m.diffusion(m.x0), 0, &[1], &[0]),
            term(1.0, 1, &[], &[]),
        ]);
        assert_eq!(x(kind, 1).max_abs_diff(&expected), 0.0, "{kind}");
    }
}

#[test]
fn second_term_of_the_pure_jump_model() {
    let m = BuiltinModel::reference(ModelKind::PureJumpOu);
    let expected = IntegralExpression::from_terms([
        term(-m.kappa * m.eta(), 0, &[0, 0], &[0, 0]),
        term(-m.kappa, 0, &[0], &[1]),
    ]);
    assert!(x(ModelKind::PureJumpOu, 2).max_abs_diff(&expected) < 1e-15);
}

#[test]
fn second_term_of_the_constant_diffusion_model() {
    let m = BuiltinModel::reference(ModelKind::ConstantDiffusion);
    let k = m.kappa;
    let expected = IntegralExpression::from_terms([
        term(-k * m.eta(), 0, &[0, 0], &[0, 0]),
        term(-k * m.sigma, 0, &[1, 0], &[0, 0]),
        term(-k, 0, &[0], &[1]),
    ]);
    assert!(x(ModelKind::ConstantDiffusion, 2).max_abs_diff(&expected) < 1e-15);
}

#[test]
fn second_term_of_the_sqrt_diffusion_model() {
    let m = BuiltinModel::reference(ModelKind::SqrtDiffusion);
    let (k, s0) = (m.kappa, m.sigma * m.x0.sqrt());
    let ds = m.sigma / (2.0 * m.x0.sqrt());
    let expected = IntegralExpression::from_terms([
        term(-k * m.eta(), 0, &[0, 0], &[0, 0]),
        term(-k * s0, 0, &[1, 0], &[0, 0]),
        term(-k, 0, &[0], &[1]),
        term(ds * m.eta(), 0, &[0, 1], &[0, 0]),
        term(ds * s0, 0, &[1, 1], &[0, 0]),
        term(ds, 0, &[1], &[1]),
    ]);
    assert!(x(ModelKind::SqrtDiffusion, 2).max_abs_diff(&expected) < 1e-15);
}

#[test]
fn index_sets_have_all_compositions() {
    for m in 1..=12 {
        let set = index_set(m).unwrap();
        assert_eq!(set.len(), 1 << (m - 1));
        assert!(set.iter().all(|t| t.order() == m && t.j.iter().all(|&j| j >= 1)));
        assert!(set.windows(2).all(|w| w[0] < w[1]));
    }
}

#[test]
fn level_counts_and_pending_powers() {
    for kind in [ModelKind::ConstantDiffusion, ModelKind::SqrtDiffusion, ModelKind::PureJumpOu] {
        for m in 1..=MAX_ORDER + 1 {
            let t = x(kind, m);
            assert!(t.max_level_count() <= m, "{kind} m={m}");
            if m > 1 {
                assert_eq!(t.max_pending(), 0, "{kind} m={m}");
            }
        }
    }
}

#[test]
fn terms_beyond_the_supported_order_are_rejected() {
    let engine = ExpansionEngine::new(BuiltinModel::reference(ModelKind::ConstantDiffusion).spec());
    assert!(engine.term(0).is_err());
    assert!(engine.term(MAX_ORDER + 2).is_err());
}

#[test]
fn truncated_expansion_has_the_taylor_order() {
    let reports = taylor_order(McBudget::REDUCED, 5);
    assert_eq!(reports.len(), 2);
    for report in reports {
        assert!(report.passed, "{}: {} ({})", report.name, report.measured, report.detail);
    }
}
