use ricciforge_core::global_verify::{diameter_estimate, DiameterOptions};
use ricciforge_core::metric::{choose_lambda, lambda_margins, potential_samples, MetricParams};
use ricciforge_core::perturbation::{auto_epsilon, model_rho_check, ModelChart, MODEL_BETA};
use ricciforge_core::s3core::{sample_grid, PoleConfiguration, DEFAULT_EXCLUSION};

#[test]
fn chosen_lambda_holds_on_a_fresh_grid() {
    for k in [1u32, 2, 5] {
        let delta = 0.05;
        let lambda = choose_lambda(k, delta).unwrap();
        let pts =
            sample_grid(20_000, &PoleConfiguration::with_exclusion(k, DEFAULT_EXCLUSION).unwrap(), 0xF2E5).unwrap();
        let m = lambda_margins(lambda, &potential_samples(k, &pts).unwrap());
        assert!(m.satisfied(delta), "k = {k}, lambda = {lambda}: {m:?}");
        // and the choice is minimal on its own grid up to the headroom
        assert!(
            lambda == 2.0 || !lambda_margins(lambda / 2.0, &potential_samples(k, &pts).unwrap()).satisfied(0.9 * delta)
        );
    }
}

#[test]
fn diameter_estimate_is_stable_under_refinement() {
    let params = MetricParams::new(2, choose_lambda(2, 0.05).unwrap()).unwrap();
    let coarse = diameter_estimate(&params, &DiameterOptions { nodes: 2500, ..Default::default() }).unwrap();
    let fine = diameter_estimate(&params, &DiameterOptions::default()).unwrap();
    assert!((coarse.estimate - fine.estimate).abs() < 0.05, "{coarse:?} {fine:?}");
    assert!(fine.max_edge < coarse.max_edge);
}

#[test]
fn perturbation_amplitude_is_reproducible() {
    let chart = ModelChart::new(4, 32.0, MODEL_BETA).unwrap();
    let rho = model_rho_check(&chart, 1.0, 30, 5).unwrap();
    let a = auto_epsilon(&chart, rho.r_k, 40, 6).unwrap();
    let b = auto_epsilon(&chart, rho.r_k, 40, 6).unwrap();
    assert_eq!(a, b);
    assert!(a.eps > 1e-8 && a.eps <= 1.0);
}
