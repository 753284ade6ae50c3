mod common;

use approx::assert_relative_eq;
use proptest::prelude::*;

use lengthbias::debias::{
    accept_probability, debias_normalizer, debias_step, debiased_mixture, exact_debias_cdf, exact_debias_density,
    run_debias, DebiasChain, WeightFn,
};
use lengthbias::diagnostics::{ks_critical_001, ks_statistic};
use lengthbias::dpmm::{mixture_density, sample_predictive, ChainState};
use lengthbias::rng::stream_rng;
use lengthbias::stats::GammaParams;

use common::{batch_means_se, integrate, integrate_positive_log, integrate_to_inf, mean};

fn gamma_proposals(shape: f64, rate: f64, n: usize, seed: u64) -> Vec<f64> {
    let g = GammaParams::new(shape, rate).unwrap();
    let mut rng = stream_rng(seed, 0);
    (0..n).map(|_| g.sample(&mut rng)).collect()
}

fn random_state(seed: u64) -> ChainState {
    use rand::Rng;
    let mut rng = stream_rng(seed, 9);
    let k = rng.random_range(1..6);
    let raw: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..1.0)).collect();
    let covered = rng.random_range(0.6..0.999);
    let total: f64 = raw.iter().sum();
    let w: Vec<f64> = raw.iter().map(|x| covered * x / total).collect();
    let mu = (0..k).map(|_| rng.random_range(-1.5..2.0)).collect();
    ChainState::from_weights(&w, mu, rng.random_range(0.5..6.0), rng.random_range(0.3..2.0)).unwrap()
}

#[test]
fn far_proposal_is_rarely_accepted() {
    let mut rng = stream_rng(1, 2);
    let mut accepted = 0;
    for _ in 0..100_000 {
        let mut chain = DebiasChain::new(1.0).unwrap();
        if debias_step(&mut chain, 1e6, &WeightFn::Length, &mut rng).unwrap() {
            accepted += 1;
        }
    }
    assert!(accepted <= 10, "{accepted}");
}

#[test]
fn smaller_proposal_always_accepted() {
    let mut rng = stream_rng(2, 2);
    let mut chain = DebiasChain::new(2.0).unwrap();
    assert!(chain.step(1.0, &WeightFn::Length, &mut rng).unwrap());
    assert_eq!(chain.x_current, 1.0);
}

#[test]
fn constant_proposals_always_accepted() {
    let run = run_debias(vec![1.5; 1000], 1.5, &WeightFn::Length, &mut stream_rng(3, 2)).unwrap();
    assert_eq!(run.acceptance_rate(), 1.0);
    assert_eq!(run.accept_count, 1000);
}

#[test]
fn toy_run_recovers_exponential_moments() {
    let proposals = gamma_proposals(2.0, 1.0, 10_000, 4);
    let run = run_debias(proposals, 1.0, &WeightFn::Length, &mut stream_rng(4, 2)).unwrap();
    let m1 = mean(&run.samples);
    let m2 = run.samples.iter().map(|x| x * x).sum::<f64>() / run.samples.len() as f64;
    assert!((m1 - 1.0).abs() < 0.05, "{m1}");
    assert!((m2 - 2.0).abs() < 0.15, "{m2}");
}

#[test]
fn acceptance_rate_matches_double_integral() {
    // stationary x ~ Ga(1, 1), proposal y ~ Ga(2, 1): E[min(1, x / y)]
    let f = GammaParams::new(1.0, 1.0).unwrap();
    let g = GammaParams::new(2.0, 1.0).unwrap();
    let inner = |x: f64| integrate_to_inf(|y| g.pdf(y) * (x / y).min(1.0), 0.0, 1e-10);
    let expected = integrate_to_inf(|x| f.pdf(x) * inner(x), 0.0, 1e-9);
    let proposals = gamma_proposals(2.0, 1.0, 200_000, 5);
    let run = run_debias(proposals, 1.0, &WeightFn::Length, &mut stream_rng(5, 2)).unwrap();
    assert!((run.acceptance_rate() - expected).abs() < 0.01, "{} vs {expected}", run.acceptance_rate());
}

#[test]
fn chain_states_are_start_or_past_proposals() {
    let proposals = gamma_proposals(2.0, 0.5, 2000, 6);
    let run = run_debias(proposals.clone(), 0.7, &WeightFn::Length, &mut stream_rng(6, 2)).unwrap();
    for (t, &x) in run.samples.iter().enumerate() {
        assert!(x == 0.7 || proposals[..=t].contains(&x));
    }
    let running = &run.acceptance_running;
    assert_eq!(running.len(), 2000);
    assert_relative_eq!(running[1999], run.accept_count as f64 / 2000.0);
}

#[test]
fn gamma_pairs_under_length_bias() {
    for (seed, (gs, gr), (fs, fr)) in [(7, (2.0, 1.0), (1.0, 1.0)), (8, (2.0, 0.5), (1.0, 0.5)), (9, (10.0, 1.0), (9.0, 1.0))] {
        let proposals = gamma_proposals(gs, gr, 100_000, seed);
        let run = run_debias(proposals, 1.0, &WeightFn::Length, &mut stream_rng(seed, 2)).unwrap();
        let z = (mean(&run.samples) - fs / fr) / batch_means_se(&run.samples);
        assert!(z.abs() < 3.5, "Ga({gs},{gr}): z = {z}");
        let sq: Vec<f64> = run.samples.iter().map(|x| x * x).collect();
        let z2 = (mean(&sq) - fs * (fs + 1.0) / (fr * fr)) / batch_means_se(&sq);
        assert!(z2.abs() < 3.5, "Ga({gs},{gr}) second moment: z = {z2}");
    }
}

#[test]
fn discrete_kernel_satisfies_detailed_balance() {
    // target f on 50 points; proposals from g ∝ x f
    let xs: Vec<f64> = (1..=50).map(|k| 0.2 * k as f64).collect();
    let f_raw: Vec<f64> = xs.iter().map(|x| (-0.6 * x).exp() * (1.0 + (2.0 * x).sin().powi(2))).collect();
    let zf: f64 = f_raw.iter().sum();
    let f: Vec<f64> = f_raw.iter().map(|v| v / zf).collect();
    let g_raw: Vec<f64> = xs.iter().zip(&f).map(|(x, p)| x * p).collect();
    let zg: f64 = g_raw.iter().sum();
    let g: Vec<f64> = g_raw.iter().map(|v| v / zg).collect();
    let n = xs.len();
    let mut p = vec![vec![0.0; n]; n];
    for i in 0..n {
        let mut stay = 1.0;
        for j in 0..n {
            if i != j {
                p[i][j] = g[j] * accept_probability(xs[i], xs[j], &WeightFn::Length).unwrap();
                stay -= p[i][j];
            }
        }
        p[i][i] = stay;
    }
    for i in 0..n {
        for j in 0..n {
            assert!((f[i] * p[i][j] - f[j] * p[j][i]).abs() < 1e-15);
        }
    }
    // power iteration from a point mass
    let mut pi = vec![0.0; n];
    pi[n - 1] = 1.0;
    for _ in 0..5000 {
        let mut next = vec![0.0; n];
        for i in 0..n {
            for j in 0..n {
                next[j] += pi[i] * p[i][j];
            }
        }
        pi = next;
    }
    let tv: f64 = 0.5 * pi.iter().zip(&f).map(|(a, b)| (a - b).abs()).sum::<f64>();
    assert!(tv < 1e-3, "{tv}");
}

#[test]
fn normalizer_examples() {
    let mut single = ChainState::from_weights(&[1.0], vec![0.0], 1.0, 0.5).unwrap();
    single.recompute_weights();
    assert_relative_eq!(debias_normalizer(&single), 1.648_721_3, epsilon = 1e-7);
    assert_relative_eq!(exact_debias_density(&single, 1.0).unwrap(), 0.241_970_7, epsilon = 1e-7);
    let two = ChainState::from_weights(&[0.5, 0.5], vec![0.0, 1.0], 1.0, 0.5).unwrap();
    assert_relative_eq!(debias_normalizer(&two), 1.127_626_0, epsilon = 1e-7);
    assert!(exact_debias_density(&two, 0.0).is_err());
}

#[test]
fn normalizer_matches_quadrature_on_random_states() {
    for seed in 0..40 {
        let state = random_state(seed);
        let q = integrate_positive_log(|y| mixture_density(&state, y).unwrap() / y, 1e-11);
        let c = debias_normalizer(&state);
        assert!((c - q).abs() < 1e-6 * c.max(1.0), "state {seed}: {c} vs {q}");
    }
}

#[test]
fn exact_density_integrates_to_one_and_matches_cdf() {
    for seed in 0..40 {
        let state = random_state(seed);
        let total = integrate_positive_log(|y| exact_debias_density(&state, y).unwrap(), 1e-11);
        assert!((total - 1.0).abs() < 1e-6, "state {seed}: {total}");
        for y in [0.2, 1.0, 3.0] {
            let q = integrate(|t| exact_debias_density(&state, t).unwrap(), 1e-300, y, 1e-12);
            let c = exact_debias_cdf(&state, y);
            assert!((c - q).abs() < 1e-6, "state {seed} at {y}: {c} vs {q}");
        }
        let mix = debiased_mixture(&state, &WeightFn::Length).unwrap();
        assert_relative_eq!(mix.pdf(1.3).unwrap(), exact_debias_density(&state, 1.3).unwrap(), max_relative = 1e-10);
    }
}

#[test]
fn fixed_state_chain_matches_exact_density() {
    let state = ChainState::from_weights(&[0.45, 0.35, 0.12], vec![-0.3, 0.8, 1.9], 3.0, 0.5).unwrap();
    let mut rng = stream_rng(12, 2);
    let mut chain = DebiasChain::with_history(1.0).unwrap();
    for _ in 0..100_000 {
        let y = sample_predictive(&state, &mut rng).y;
        chain.step(y, &WeightFn::Length, &mut rng).unwrap();
    }
    // every 50th state: the independence sampler sticks at small y, so
    // autocorrelation decays slowly and needs this much thinning
    let thinned: Vec<f64> = chain.history.unwrap().into_iter().step_by(50).collect();
    let d = ks_statistic(&thinned, |y| exact_debias_cdf(&state, y)).unwrap();
    assert!(d < ks_critical_001(thinned.len()), "{d}");
}

#[test]
fn power_weight_targets_tilted_gamma() {
    // Ga(3, 1) under w(y) = y^2 debiases to Ga(1, 1)
    let proposals = gamma_proposals(3.0, 1.0, 100_000, 13);
    let run = run_debias(proposals, 1.0, &WeightFn::Power { p: 2.0 }, &mut stream_rng(13, 2)).unwrap();
    let z = (mean(&run.samples) - 1.0) / batch_means_se(&run.samples);
    assert!(z.abs() < 3.5, "{z}");
}

#[test]
fn tabulated_weight_reproduces_linear_weight_inside_range() {
    let tab = WeightFn::Tabulated { x: vec![0.0, 100.0], w: vec![0.0 + 1e-300, 100.0] };
    tab.validate().unwrap();
    for (x, y) in [(0.5, 2.0), (3.0, 1.0), (7.5, 7.6)] {
        assert_relative_eq!(
            accept_probability(x, y, &tab).unwrap(),
            accept_probability(x, y, &WeightFn::Length).unwrap(),
            max_relative = 1e-12
        );
    }
}

#[test]
fn invalid_inputs_are_rejected() {
    assert!(DebiasChain::new(0.0).is_err());
    assert!(DebiasChain::new(f64::NAN).is_err());
    assert!(run_debias(vec![1.0, -1.0], 1.0, &WeightFn::Length, &mut stream_rng(0, 2)).is_err());
    assert!(WeightFn::Power { p: f64::INFINITY }.validate().is_err());
    assert!(WeightFn::Tabulated { x: vec![1.0, 1.0], w: vec![1.0, 2.0] }.validate().is_err());
}

proptest! {
    #[test]
    fn acceptance_is_a_probability(x in 1e-6f64..1e6, y in 1e-6f64..1e6, p in -3.0f64..3.0) {
        let w = WeightFn::Power { p };
        let a = accept_probability(x, y, &w).unwrap();
        prop_assert!((0.0..=1.0).contains(&a));
        if w.eval(x).unwrap() >= w.eval(y).unwrap() {
            prop_assert_eq!(a, 1.0);
        }
    }
}
