//! Monte Carlo behaviour of the generators and estimators, at fixed seeds.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use spcelab::coincidence::{
    chsh_statistic, measure_correlation, run_chsh_experiment, CoincidenceWindow, SettingsQuadruple,
};
use spcelab::hv::{
    ContextualEventModel, DeterministicSharedSpaceModel, FactorizableModel, Generator, Outcome, Setting, CHUNK_PAIRS,
};
use spcelab::purity::{split_sample_purity, PurityInput};
use spcelab::timeseries::{
    acf, descriptive_stats, fit_ar, normal_scores, select_order, simulate_ar, theoretical_acf, ArModel, DEFAULT_BURN_IN,
};

const ALICE: [&str; 2] = ["a", "a'"];
const BOB: [&str; 2] = ["b", "b'"];

fn normals(seed: u64, n: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

fn plus_fraction(events: &[spcelab::hv::Detection]) -> f64 {
    events.iter().filter(|e| e.outcome == Outcome::Plus).count() as f64 / events.len() as f64
}

#[test]
fn quantum_oracle_does_not_signal() {
    let n = 200_000;
    let a = Setting::new("a", 0.3).unwrap();
    let sigma = 0.5 / (n as f64).sqrt();
    for (i, theta) in [0.0, 0.7, 1.9, 3.0].into_iter().enumerate() {
        let b = Setting::new("b", theta).unwrap();
        let (sa, sb) = Generator::QuantumOracle.sample(&a, &b, n, 100 + i as u64).unwrap();
        assert!((plus_fraction(&sa.events) - 0.5).abs() < 4.0 * sigma);
        assert!((plus_fraction(&sb.events) - 0.5).abs() < 4.0 * sigma);
    }
}

#[test]
fn quantum_oracle_reaches_tsirelson() {
    let r = run_chsh_experiment(
        &Generator::QuantumOracle,
        &SettingsQuadruple::standard(),
        100_000,
        CoincidenceWindow::Unwindowed,
        5,
    )
    .unwrap();
    assert!(
        (r.s - 2.0 * 2f64.sqrt()).abs() < 3.0 * r.s_std_error,
        "{} ± {}",
        r.s,
        r.s_std_error
    );
}

#[test]
fn factorizable_models_respect_the_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let quad = SettingsQuadruple::standard();
    for m in 0..100u64 {
        let model = FactorizableModel::random(&mut rng, 1 + (m % 6) as usize, &ALICE, &BOB);
        let e = |x, y| model.expected_correlation(x, y).unwrap();
        let exact = chsh_statistic(e("a", "b"), e("a", "b'"), e("a'", "b"), e("a'", "b'")).unwrap();
        assert!(exact <= 2.0 + 1e-12);
        let r = run_chsh_experiment(
            &Generator::Factorizable(model),
            &quad,
            10_000,
            CoincidenceWindow::Unwindowed,
            m,
        )
        .unwrap();
        assert!(r.s <= 2.0 + 5.0 * r.s_std_error, "model {m}: {}", r.s);
    }
}

#[test]
fn deterministic_models_respect_the_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let quad = SettingsQuadruple::standard();
    for m in 0..100u64 {
        let model = DeterministicSharedSpaceModel::random(&mut rng, 1 + (m % 8) as usize, &ALICE, &BOB);
        let e = |x, y| model.expected_correlation(x, y).unwrap();
        let exact = chsh_statistic(e("a", "b"), e("a", "b'"), e("a'", "b"), e("a'", "b'")).unwrap();
        assert!(exact <= 2.0 + 1e-12);
        let r = run_chsh_experiment(
            &Generator::Deterministic(model),
            &quad,
            10_000,
            CoincidenceWindow::Unwindowed,
            m,
        )
        .unwrap();
        assert!(r.s <= 2.0 + 5.0 * r.s_std_error, "model {m}: {}", r.s);
    }
}

#[test]
fn sampled_correlations_match_model_expectations() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let f = FactorizableModel::random(&mut rng, 4, &ALICE, &BOB);
    let d = DeterministicSharedSpaceModel::random(&mut rng, 4, &ALICE, &BOB);
    let a = Setting::new("a'", 1.0).unwrap();
    let b = Setting::new("b", 2.0).unwrap();
    let cases = [
        (
            Generator::Factorizable(f.clone()),
            f.expected_correlation("a'", "b").unwrap(),
        ),
        (
            Generator::Deterministic(d.clone()),
            d.expected_correlation("a'", "b").unwrap(),
        ),
    ];
    for (g, expected) in cases {
        let est = measure_correlation(&g, &a, &b, 100_000, CoincidenceWindow::Unwindowed, 3).unwrap();
        assert!(
            (est.e_hat - expected).abs() < 4.0 * est.std_error + 1e-9,
            "{}: {} vs {expected}",
            g.name(),
            est.e_hat
        );
    }
}

#[test]
fn contextual_default_violates_chsh() {
    let r = run_chsh_experiment(
        &Generator::Contextual(ContextualEventModel::default()),
        &SettingsQuadruple::standard(),
        200_000,
        CoincidenceWindow::new(ContextualEventModel::DEFAULT_WINDOW_T0).unwrap(),
        8,
    )
    .unwrap();
    assert!(r.s > 2.4, "{}", r.s);
    // without the window the same events are local
    let open = run_chsh_experiment(
        &Generator::Contextual(ContextualEventModel::default()),
        &SettingsQuadruple::standard(),
        200_000,
        CoincidenceWindow::Unwindowed,
        8,
    )
    .unwrap();
    assert!(open.s <= 2.0 + 5.0 * open.s_std_error, "{}", open.s);
}

#[test]
fn generation_is_reproducible_and_chunk_consistent() {
    let a = Setting::new("a", 0.4).unwrap();
    let b = Setting::new("b", 1.1).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let gens = [
        Generator::QuantumOracle,
        Generator::Factorizable(FactorizableModel::random(&mut rng, 3, &["a"], &["b"])),
        Generator::Deterministic(DeterministicSharedSpaceModel::random(&mut rng, 3, &["a"], &["b"])),
        Generator::Contextual(ContextualEventModel::default()),
    ];
    let long = CHUNK_PAIRS + 17;
    for g in &gens {
        let first = g.sample(&a, &b, long, 77).unwrap();
        assert_eq!(first, g.sample(&a, &b, long, 77).unwrap(), "{}", g.name());
        assert_ne!(
            first.0.events,
            g.sample(&a, &b, long, 78).unwrap().0.events,
            "{}",
            g.name()
        );
        // a shorter run is a prefix of a longer one
        let short = g.sample(&a, &b, 1000, 77).unwrap();
        assert_eq!(short.0.events[..], first.0.events[..1000], "{}", g.name());
        assert_eq!(short.1.events[..], first.1.events[..1000], "{}", g.name());
    }
}

#[test]
fn ar1_fit_is_accurate() {
    let model = ArModel::new(vec![0.9], 1.0).unwrap();
    let x = simulate_ar(&model, 100_000, 4, DEFAULT_BURN_IN);
    let fit = fit_ar(x.values(), 1).unwrap();
    assert!((fit.coefficients()[0] - 0.9).abs() < 0.01, "{:?}", fit.coefficients());
    assert!((fit.noise_variance() - 1.0).abs() < 0.02);
}

#[test]
fn white_noise_fit_stays_in_band() {
    let n = 2000;
    let inside = (0..100u64)
        .filter(|&s| {
            let x = normals(s, n);
            fit_ar(&x, 1).unwrap().coefficients()[0].abs() <= 1.96 / (n as f64).sqrt()
        })
        .count();
    assert!(inside >= 88, "{inside}");
}

#[test]
fn order_selection() {
    let white = (0..100u64)
        .filter(|&s| select_order(&normals(1000 + s, 500), 20).unwrap().order == 0)
        .count();
    assert!(white >= 90, "white noise picked 0 in {white}/100");
    let model = ArModel::new(vec![0.8], 1.0).unwrap();
    let ar1 = (0..100u64)
        .filter(|&s| {
            select_order(simulate_ar(&model, 2000, s, DEFAULT_BURN_IN).values(), 20)
                .unwrap()
                .order
                == 1
        })
        .count();
    assert!(ar1 >= 90, "AR(1) picked 1 in {ar1}/100");
}

#[test]
fn simulated_acf_tracks_theory() {
    let model = ArModel::new(vec![0.25, 0.5], 1.0).unwrap();
    let n = 100_000;
    let x = simulate_ar(&model, n, 10, DEFAULT_BURN_IN);
    let sample = acf(x.values(), 10).unwrap();
    let theory = theoretical_acf(&model, 10);
    for k in 1..=10 {
        assert!(
            (sample[k] - theory[k]).abs() < 3.0 / (n as f64).sqrt(),
            "lag {k}: {} vs {}",
            sample[k],
            theory[k]
        );
    }
    let d = descriptive_stats(x.values()).unwrap();
    assert!((d.variance / model.theoretical_variance() - 1.0).abs() < 0.05);
}

#[test]
fn purity_examples() {
    let x = normals(5, 5000);
    let r = split_sample_purity(PurityInput::Real(&x), 5).unwrap();
    assert_eq!(r.comparisons.len(), 10);
    assert_eq!(r.family_size, 11);
    assert!(!r.flagged, "min p {}", r.min_p_value);

    let mut shifted = normals(6, 1000);
    for v in &mut shifted[500..] {
        *v += 1.0;
    }
    let r = split_sample_purity(PurityInput::Real(&shifted), 2).unwrap();
    assert!(r.flagged);
    assert!(r.comparisons[0].p_value < 1e-10);
}

#[test]
fn normal_scores_shape() {
    let x = normals(12, 2000);
    let pts = normal_scores(&x).unwrap();
    let d = descriptive_stats(&x).unwrap();
    let n = pts.len();
    for &(q, v) in &pts[n / 20..n - n / 20] {
        assert!((q - (v - d.mean) / d.std_dev).abs() < 0.2);
    }

    // uniform data: light tails give an S-shaped plot
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let u: Vec<f64> = (0..2000).map(|_| rng.random::<f64>()).collect();
    let pts = normal_scores(&u).unwrap();
    let d = descriptive_stats(&u).unwrap();
    let dev = |&(q, v): &(f64, f64)| q - (v - d.mean) / d.std_dev;
    assert!(dev(&pts[0]) < -0.5);
    assert!(dev(&pts[n - 1]) > 0.5);
}

#[test]
fn descriptive_stats_of_normals() {
    let n = 10_000;
    let d = descriptive_stats(&normals(14, n)).unwrap();
    assert!(d.mean.abs() < 4.0 / (n as f64).sqrt());
    assert!((d.variance - 1.0).abs() < 0.06);
    assert!(d.skewness.unwrap().abs() < 0.1);
    assert!(d.excess_kurtosis.unwrap().abs() < 0.2);
}
