use std::f64::consts::PI;

use baplab_core::ap::{AlmostPeriodOptions, ApSignal, FrequencySet};
use num_complex::Complex64;
use proptest::prelude::*;

/// Composite Simpson rule, used as an oracle independent of the library's midpoint rules.
fn simpson(a: f64, b: f64, n: usize, f: impl Fn(f64) -> f64) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for j in 1..n {
        s += f(a + j as f64 * h) * if j % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

fn signal_from(freqs: &[f64], amps: &[(f64, f64)]) -> ApSignal {
    ApSignal::from_terms(
        1,
        freqs.iter().zip(amps).map(|(&l, &(re, im))| (vec![l], Complex64::new(re, im))),
    )
    .unwrap()
}

/// Frequencies at least 0.1 apart, drawn from a grid of irrational offsets.
fn separated_freqs() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::btree_set(-20i32..=20, 1..6)
        .prop_map(|s| s.into_iter().map(|k| k as f64 * 0.25 + 0.01 * 2f64.sqrt()).collect())
}

fn amps(n: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-2.0..2.0f64, -2.0..2.0f64), n)
}

#[test]
fn l1_seminorm_of_sine_is_two_over_pi() {
    let sig = ApSignal::sine(vec![1.0], 1.0, 0.0);
    let est = sig.besicovitch_seminorm(1, &[10.0, 100.0]).unwrap();
    let oracle = simpson(-50.0, 50.0, 400_000, |x| (2.0 * PI * x).sin().abs()) / 100.0;
    // midpoint at 64 samples per unit resolves the kinks of |sin| to about 3e-4
    assert!((est.value - oracle).abs() < 1e-3, "{} vs {}", est.value, oracle);
    assert!((est.value - 2.0 / PI).abs() < 0.05);
    assert!(est.residual < 0.05);
}

#[test]
fn quasi_periodic_almost_periods_pass_a_dense_recheck() {
    let sig = ApSignal::from_terms(
        1,
        [(vec![1.0], Complex64::new(1.0, 0.0)), (vec![2f64.sqrt()], Complex64::new(1.0, 0.0))],
    )
    .unwrap();
    let taus = sig.epsilon_almost_periods(0.2, 200.0, 1.0, &AlmostPeriodOptions::default()).unwrap();
    assert!(!taus.is_empty());
    assert!(taus.iter().any(|t| t[0] != 0.0), "only the trivial period found");
    for tau in &taus {
        let t = tau[0];
        let worst = (0..40)
            .map(|k| {
                let x0 = 0.25 * k as f64;
                simpson(x0, x0 + 1.0, 2000, |y| (sig.eval(&[y + t]) - sig.eval(&[y])).norm())
            })
            .fold(0.0, f64::max);
        assert!(worst <= 0.2 + 1e-9, "tau {t}: {worst}");
    }
    // every accepted integer shift must be close to a multiple of 1/√2
    for tau in &taus {
        let frac = (tau[0] * 2f64.sqrt()).fract();
        assert!(frac.min(1.0 - frac) < 0.04);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn mean_value_is_the_zero_coefficient(freqs in separated_freqs(), a in amps(6), c in -3.0..3.0f64) {
        let sig = signal_from(&freqs, &a).add(&ApSignal::constant(1, c)).unwrap();
        prop_assert_eq!(sig.mean_value(), sig.fourier_coefficient(&[0.0]).unwrap());
    }

    #[test]
    fn parseval_and_box_average_agree(freqs in separated_freqs(), a in amps(6)) {
        let sig = signal_from(&freqs, &a);
        prop_assume!(!sig.is_empty());
        let exact: f64 = sig.terms().map(|(_, z)| z.norm_sqr()).sum::<f64>().sqrt();
        let n2 = sig.besicovitch_seminorm(2, &[]).unwrap().value;
        prop_assert!((n2 - exact).abs() <= 1e-14 * exact);
        let boxed = sig.box_average(2, 1000.0, 16);
        prop_assert!((boxed - n2).abs() < 0.05 * n2, "{} vs {}", boxed, n2);
    }

    #[test]
    fn projection_error_shrinks_under_doubling(k in 1u32..50, scale in 0.1..5.0f64) {
        let lam = scale * (k as f64).sqrt() + 2f64.sqrt() * 1e-3;
        let sig = ApSignal::sine(vec![lam], 1.0, 0.0);
        let mut prev = f64::INFINITY;
        let mut l = 1.0;
        for _ in 0..20 {
            let (_, err) = sig.commensurate_project(&[l]).unwrap();
            prop_assert!(err <= prev);
            prop_assert!(err <= 0.5 / l + 1e-15);
            prev = err;
            l *= 2.0;
        }
        prop_assert!(prev < 1e-6);
    }

    #[test]
    fn truncation_never_increases_n2(
        freqs in separated_freqs(), a in amps(6), mask in prop::collection::vec(any::<bool>(), 6),
        w in prop::collection::vec(0.0..=1.0f64, 6),
    ) {
        let sig = signal_from(&freqs, &a);
        let n2 = sig.energy().sqrt();
        let kept: Vec<Vec<f64>> = freqs.iter().zip(&mask).filter(|(_, &m)| m).map(|(&l, _)| vec![l]).collect();
        let keep = FrequencySet::from_members(1, kept.clone()).unwrap();
        let weights: Vec<(Vec<f64>, f64)> = kept.iter().cloned().zip(w.iter().copied()).collect();
        let cut = sig.spectral_truncate(&keep, Some(&weights)).unwrap();
        prop_assert!(cut.energy().sqrt() <= n2 * (1.0 + 1e-15));
        let full = FrequencySet::from_members(1, freqs.iter().map(|&l| vec![l])).unwrap();
        prop_assert_eq!(sig.spectral_truncate(&full, None).unwrap().energy(), sig.energy());
        // a strictly partial keep set or a weight below one loses energy
        let all_kept = sig.spectrum().is_subset(&keep);
        let unit_weights = weights.iter().all(|(_, w)| *w == 1.0);
        if !(all_kept && unit_weights) && sig.terms().all(|(_, z)| z.norm() > 1e-6) {
            let lost = weights.iter().any(|(_, w)| *w < 1.0 - 1e-9) || !all_kept;
            if lost {
                prop_assert!(cut.energy() < sig.energy());
            }
        }
    }

    #[test]
    fn closure_is_nested_and_symmetric(freqs in prop::collection::vec(-3.0..3.0f64, 1..3), n in 1usize..3) {
        let base = FrequencySet::from_members(1, freqs.iter().map(|&l| vec![l])).unwrap();
        let lo = base.group_closure(n, 10_000).unwrap();
        let hi = base.group_closure(n + 1, 10_000).unwrap();
        prop_assert!(lo.is_subset(&hi));
        prop_assert!(lo.contains(&[0.0]));
        for f in lo.iter() {
            prop_assert!(lo.contains(&[-f[0]]));
        }
    }

    #[test]
    fn tail_mass_is_monotone_in_the_set(
        freqs in separated_freqs(), a in amps(6),
        m1 in prop::collection::vec(any::<bool>(), 6), m2 in prop::collection::vec(any::<bool>(), 6),
    ) {
        let sig = signal_from(&freqs, &a);
        let small: Vec<Vec<f64>> = freqs.iter().zip(&m1).filter(|(_, &m)| m).map(|(&l, _)| vec![l]).collect();
        let extra: Vec<Vec<f64>> = freqs.iter().zip(&m2).filter(|(_, &m)| m).map(|(&l, _)| vec![l]).collect();
        let f = FrequencySet::from_members(1, small.clone()).unwrap();
        let g = FrequencySet::from_members(1, small.into_iter().chain(extra)).unwrap();
        prop_assert!(sig.spectral_tail_mass(&g) <= sig.spectral_tail_mass(&f));
        prop_assert!(sig.spectral_tail_mass(&FrequencySet::new(1)) <= sig.energy() * (1.0 + 1e-15));
    }
}
