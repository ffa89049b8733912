use baplab_core::ap::ApSignal;
use baplab_core::diagnostics::grid_n1;
use baplab_core::model::{gallery, Model};
use baplab_core::solver::{init_field, numerical_flux};
use baplab_core::{Field, GridSpec, Solver, SolverConfig};
use proptest::prelude::*;

fn diagonal_models() -> Vec<Model> {
    vec![
        gallery::burgers_1d(1.0),
        gallery::linear_advection_1d(1.0, 1.0),
        gallery::degenerate_diffusion_1d(1.0),
        gallery::zero_1d(1.0),
        gallery::anisotropic_2d(1.0),
    ]
}

fn grid_for(model: &Model) -> GridSpec {
    match model.dims() {
        1 => GridSpec::uniform(1, 1.0, 64).unwrap(),
        _ => GridSpec::uniform(2, 1.0, 16).unwrap(),
    }
}

fn field_from(grid: &GridSpec, raw: &[f64]) -> Field {
    Field::new(grid.clone(), raw.iter().cycle().take(grid.len()).copied().collect()).unwrap()
}

fn stored_run(model: Model, u0: Field, t: f64) -> baplab_core::Trajectory {
    let mut c = SolverConfig::new(model, u0.grid().clone(), t);
    c.store_fields = true;
    Solver::new(c).unwrap().run_field(u0).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn conservation_and_max_principle(raw in prop::collection::vec(-1.0..1.0f64, 256)) {
        for model in diagonal_models().into_iter().chain([gallery::mixed_diffusion_2d(1.0)]) {
            let diagonal = model.is_diagonal();
            let name = model.name().to_string();
            let u0 = field_from(&grid_for(&model), &raw);
            let (lo, hi, mean0) = (u0.min(), u0.max(), u0.mean());
            let scale = mean0.abs().max(u0.max_abs());
            let tr = stored_run(model, u0, 0.05);
            for f in &tr.fields {
                prop_assert!((f.mean() - mean0).abs() <= 1e-12 * scale, "{}", name);
                if diagonal {
                    prop_assert!(f.min() >= lo - 1e-12 && f.max() <= hi + 1e-12, "{}", name);
                }
            }
        }
    }

    #[test]
    fn l1_contraction_and_l2_monotonicity(
        a in prop::collection::vec(-1.0..1.0f64, 256),
        b in prop::collection::vec(-1.0..1.0f64, 256),
    ) {
        for model in diagonal_models() {
            let g = grid_for(&model);
            let name = model.name().to_string();
            let cfg = SolverConfig::new(model, g.clone(), 0.05);
            let r = baplab_core::diagnostics::contraction_fields(&cfg, field_from(&g, &a), field_from(&g, &b)).unwrap();
            prop_assert!(r.verdict.passed(), "{}: {}", name, r.max_step_increase);
            let tr = Solver::new(cfg).unwrap().run_field(field_from(&g, &a)).unwrap();
            prop_assert!(tr.snapshots.windows(2).all(|w| w[1].l2 <= w[0].l2 + 1e-12), "{}", name);
        }
    }

    #[test]
    fn translation_equivariance(raw in prop::collection::vec(-1.0..1.0f64, 256), shift in -7isize..8) {
        for model in diagonal_models().into_iter().chain([gallery::mixed_diffusion_2d(1.0)]) {
            let g = grid_for(&model);
            let solver = Solver::new(SolverConfig::new(model, g.clone(), 0.03)).unwrap();
            let u0 = field_from(&g, &raw);
            for axis in 0..g.dims() {
                let a = solver.evolve(u0.shifted(axis, shift)).unwrap();
                let b = solver.evolve(u0.clone()).unwrap().shifted(axis, shift);
                prop_assert_eq!(a.values(), b.values());
            }
        }
    }

    #[test]
    fn numerical_flux_is_consistent_and_monotone(a in -1.0..1.0f64, b in -1.0..1.0f64, h in 0.0..0.1f64) {
        for model in diagonal_models() {
            for axis in 0..model.dims() {
                let f = |x, y| numerical_flux(&model, x, y, axis).unwrap();
                let exact = model.flux(axis).eval(a);
                prop_assert!((f(a, a) - exact).abs() <= 1e-14 * (1.0 + exact.abs()));
                let a2 = (a + h).min(1.0);
                let b2 = (b + h).min(1.0);
                prop_assert!(f(a2, b) >= f(a, b) - 1e-15);
                prop_assert!(f(a, b2) <= f(a, b) + 1e-15);
            }
        }
    }
}

#[test]
fn vanishing_viscosity_converges() {
    let sig = ApSignal::sine(vec![1.0], 0.5, 0.0);
    let g = GridSpec::uniform(1, 1.0, 256).unwrap();
    let ends: Vec<Field> = [1e-2, 1e-3, 1e-4]
        .iter()
        .map(|&eps| {
            let mut c = SolverConfig::new(gallery::burgers_1d(1.0), g.clone(), 0.5);
            c.viscosity = eps;
            let solver = Solver::new(c).unwrap();
            solver.evolve(init_field(&sig, &g).unwrap()).unwrap()
        })
        .collect();
    let d1 = grid_n1(&ends[0], &ends[1]).unwrap();
    let d2 = grid_n1(&ends[1], &ends[2]).unwrap();
    assert!(d2 < d1, "{d1} {d2}");
}

#[test]
fn burgers_decay_at_t2_matches_reference_and_sawtooth() {
    let sig = ApSignal::sine(vec![1.0], 0.5, 0.0);
    let ratio = |n: usize| {
        let c = SolverConfig::new(gallery::burgers_1d(1.0), GridSpec::uniform(1, 1.0, n).unwrap(), 2.0);
        let tr = Solver::new(c).unwrap().run(&sig).unwrap();
        tr.last().l1_to_mean / tr.initial().l1_to_mean
    };
    let (r512, r2048) = (ratio(512), ratio(2048));
    assert!((r512 - r2048).abs() < 0.01, "{r512} {r2048}");
    // sawtooth of amplitude 1/(2t): D = 1/(4t); D(0) = 1/π for 0.5 sin
    let asymptotic = (1.0 / 8.0) * std::f64::consts::PI;
    assert!((r2048 - asymptotic).abs() < 0.06, "{r2048}");
    assert!(r512 > 0.05);
    // the long horizon does decay below 5%
    let c = SolverConfig::new(gallery::burgers_1d(1.0), GridSpec::uniform(1, 1.0, 512).unwrap(), 20.0);
    let tr = Solver::new(c).unwrap().run(&sig).unwrap();
    assert!(tr.last().l1_to_mean < 0.05 * tr.initial().l1_to_mean);
}
