use gammaexp::benchmark::closed_form::{closed_form_omega, closed_form_omega_perturbed, Perturbation};
use gammaexp::benchmark::error_metric::pure_jump_endpoint;
use gammaexp::benchmark::{BuiltinModel, ModelKind};
use gammaexp::density::OmegaEvaluator;
use gammaexp::special::gamma;
use gammaexp::Error;

const DELTAS: [f64; 3] = [1.0 / 12.0, 1.0 / 52.0, 1.0 / 252.0];

fn grid(m: &BuiltinModel, delta: f64) -> Vec<f64> {
    let sd = m.leading_variance(delta).sqrt();
    let mean = m.mean(delta);
    let mut lo = mean - 5.0 * sd;
    if m.kind == ModelKind::PureJumpOu {
        lo = lo.max(pure_jump_endpoint(m, delta) + 1e-3 * sd);
    }
    let hi = mean + 5.0 * sd;
    (0..50).map(|i| lo + (hi - lo) * i as f64 / 49.0).collect()
}

fn worst_gap(kind: ModelKind, order: usize, perturbation: Perturbation) -> f64 {
    let m = BuiltinModel::reference(kind);
    let mut worst = 0.0f64;
    for delta in DELTAS {
        let ev = OmegaEvaluator::new(m.spec(), delta, order).unwrap();
        for x in grid(&m, delta) {
            let y = ev.to_y(x);
            let om = ev.omegas(y).unwrap()[order];
            let cf = closed_form_omega_perturbed(&m, order, y, delta, perturbation).unwrap();
            worst = worst.max((om - cf).abs() / (1.0 + cf.abs()));
        }
    }
    worst
}

#[test]
fn pure_jump_terms_match_closed_forms() {
    for order in 0..=3 {
        let g = worst_gap(ModelKind::PureJumpOu, order, Perturbation::default());
        assert!(g <= 1e-10, "m={order}: {g:e}");
    }
}

#[test]
fn constant_diffusion_terms_match_closed_forms_through_second_order() {
    for order in 0..=2 {
        let g = worst_gap(ModelKind::ConstantDiffusion, order, Perturbation::default());
        assert!(g <= 1e-10, "m={order}: {g:e}");
    }
}

#[test]
fn sqrt_diffusion_terms_match_closed_forms_through_first_order() {
    for order in 0..=1 {
        let g = worst_gap(ModelKind::SqrtDiffusion, order, Perturbation::default());
        assert!(g <= 1e-10, "m={order}: {g:e}");
    }
}

#[test]
fn perturbed_coefficients_are_detected() {
    let p = Perturbation { relative: 1e-6 };
    for kind in [ModelKind::PureJumpOu, ModelKind::ConstantDiffusion, ModelKind::SqrtDiffusion] {
        assert!(worst_gap(kind, 0, p) > 1e-10, "{kind}");
    }
}

#[test]
fn leading_pure_jump_term_is_a_shifted_gamma_density() {
    let m = BuiltinModel::reference(ModelKind::PureJumpOu);
    let delta = 1.0 / 52.0;
    let ad = m.a * delta;
    let shift = m.eta() * delta;
    for y in [0.05, 0.2, 0.5] {
        let u: f64 = y - shift;
        let direct = m.b.powf(ad) * u.powf(ad - 1.0) * (-m.b * u).exp() / gamma(ad);
        let cf = closed_form_omega(&m, 0, y, delta).unwrap();
        assert!((cf - direct).abs() <= 1e-12 * direct, "y={y}");
    }
    assert_eq!(closed_form_omega(&m, 0, shift - 1e-3, delta).unwrap(), 0.0);
}

#[test]
fn orders_outside_the_published_range_are_rejected() {
    let m = BuiltinModel::reference(ModelKind::SqrtDiffusion);
    assert!(matches!(
        closed_form_omega(&m, 3, 0.0, 1.0 / 52.0),
        Err(Error::OrderTooLarge { requested: 3, max: 2 })
    ));
}
