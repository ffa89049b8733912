use baplab_core::ap::ApSignal;
use baplab_core::diagnostics::tail_uniformity;
use baplab_core::kinetic::{
    chi, chi_moment_check, dissipation_budget, multiplier_probe, probe_sweep, time_truncation, DEFAULT_XI_NODES,
};
use baplab_core::model::{gallery, omega_delta, sphere_directions, OmegaOptions};
use baplab_core::{GridSpec, Solver, SolverConfig};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn chi_is_odd(xi in -3.0..3.0f64, u in -3.0..3.0f64) {
        prop_assert_eq!(chi(xi, u), -chi(-xi, -u));
    }

    #[test]
    fn truncation_shape(b in 0.01..10.0f64, t in -30.0..30.0f64, h in 1e-9..1e-6f64) {
        let v = time_truncation(b, t);
        prop_assert!((0.0..=1.0).contains(&v));
        prop_assert_eq!(v, time_truncation(b, -t));
        if t.abs() > 2.0 * b {
            prop_assert_eq!(v, 0.0);
        }
        // Lipschitz with constant 1/B
        prop_assert!((time_truncation(b, t + h) - v).abs() <= h / b * (1.0 + 1e-9) + 1e-15);
    }

    #[test]
    fn sup_of_multiplier_shrinks_with_ell(tau in -2.0..2.0f64, kappa in -2.0..2.0f64) {
        for model in [gallery::burgers_1d(1.0), gallery::degenerate_diffusion_1d(1.0)] {
            let mut prev = 0.0;
            for ell in [1e-1, 1e-2, 1e-3, 1e-4] {
                let p = multiplier_probe(&model, tau, &[kappa], ell, 513).unwrap();
                prop_assert!(p.sup_m >= prev);
                prop_assert!(p.sup_m <= 1.0 / ell.sqrt() * (1.0 + 1e-12));
                prev = p.sup_m;
            }
        }
    }
}

#[test]
fn chi_moments_of_random_states() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let states: Vec<f64> = (0..1000).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    let r = chi_moment_check(&states, 1.0, DEFAULT_XI_NODES).unwrap();
    assert!(r.within_bound(), "{r:?}");
    let r = chi_moment_check(&[0.0, 1.0, -1.0], 1.0, DEFAULT_XI_NODES).unwrap();
    assert!(r.within_bound());
}

#[test]
fn multiplier_integral_is_dominated_by_omega() {
    for model in gallery::acceptance_gallery() {
        let dirs = sphere_directions(model.dims(), 3.0, 720, 0).unwrap();
        for ell in [1e-2, 1e-4] {
            let (omega, _) = omega_delta(&model, 3.0, ell, &OmegaOptions::default()).unwrap();
            for p in probe_sweep(&model, &dirs, ell, DEFAULT_XI_NODES).unwrap() {
                assert!(ell * p.int_m2 <= omega * (1.0 + 1e-12), "{} ℓ={ell}", model.name());
            }
        }
    }
}

fn run(model: baplab_core::Model, sig: &ApSignal, n: usize, t: f64) -> baplab_core::Trajectory {
    let d = model.dims();
    let mut c = SolverConfig::new(model, GridSpec::uniform(d, 1.0, n).unwrap(), t);
    c.store_fields = true;
    Solver::new(c).unwrap().run(sig).unwrap()
}

#[test]
fn dissipation_budget_identities() {
    let sig = ApSignal::sine(vec![1.0], 0.5, 0.0);
    // a state bound of 0.5 gives the budget ceiling 1/8
    let tr = run(gallery::burgers_1d(0.5), &sig, 128, 2.0);
    let k = dissipation_budget(&tr, 256).unwrap();
    assert!(k.nonnegative && k.within_bound);
    assert!(k.bound == 0.125 && k.cumulative_budget <= 0.125);
    assert!((k.cumulative_budget - k.budget_identity).abs() <= 1e-12);
    assert!((k.budget_from_fields.unwrap() - k.budget_identity).abs() <= 1e-12);
    assert!(k.chi_residuals.iter().all(|c| c.within_bound()));

    let flat = run(gallery::zero_1d(1.0), &sig, 64, 0.5);
    let k = dissipation_budget(&flat, 128).unwrap();
    assert_eq!(k.cumulative_budget, 0.0);
    assert!(k.dissipation_per_step.iter().all(|&d| d == 0.0));
}

#[test]
fn linear_transport_keeps_its_spectral_tail() {
    // at unit CFL the update is an exact shift, which only rotates phases
    let sig = ApSignal::sine(vec![1.0], 0.5, 0.0).add(&ApSignal::cosine(vec![3.0], 0.2, 0.0)).unwrap();
    let mut c = SolverConfig::new(gallery::linear_advection_1d(1.0, 1.0), GridSpec::uniform(1, 1.0, 64).unwrap(), 0.5);
    c.cfl_convective = 1.0;
    c.store_fields = true;
    let tr = Solver::new(c).unwrap().run(&sig).unwrap();
    let r = tail_uniformity(&tr, 2, 1e-10).unwrap();
    assert!(r.pass, "{} vs {}", r.max_tail, r.initial_tail);
}
