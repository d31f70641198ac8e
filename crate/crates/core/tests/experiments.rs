use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::Rng;
use swlab::estimation::{estimate, EstimateConfig};
use swlab::experiments::*;
use swlab::lre_solver::SolverConfig;
use swlab::seed;
use swlab::state_space::{entropy_rate, simulate, TimeSeriesPanel};
use swlab::sw_model::{self, EstimatedVector, Param};

fn random_matrix(seed_: u64, rows: usize) -> DMatrix<f64> {
    let mut rng = seed::rng(seed_);
    DMatrix::from_fn(rows, 7, |_, _| rng.random_range(-3.0..3.0))
}

#[test]
fn pct_improvement_reference_cases() {
    let actual = random_matrix(1, 51);
    let base = random_matrix(2, 51);
    assert_eq!(pct_improvement(&base, &base, &actual).unwrap(), 0.0);
    // Scaling every error by 1/sqrt(2) halves every SSE.
    let err = &base - &actual;
    let half = &actual + &err / 2f64.sqrt();
    let double = &actual + &err * 2f64.sqrt();
    assert!((pct_improvement(&half, &base, &actual).unwrap() - 0.5f64.ln()).abs() < 1e-12);
    assert!((pct_improvement(&double, &base, &actual).unwrap() - 2f64.ln()).abs() < 1e-12);
    assert!(matches!(pct_improvement(&base, &actual, &actual), Err(swlab::Error::ZeroSse { .. })));
}

#[test]
fn scaled_mse_reference_cases() {
    let actual = random_matrix(3, 51);
    assert_eq!(scaled_mse(&actual, &actual).unwrap(), 0.0);
    let means = actual.row_mean();
    let flat = DMatrix::from_fn(51, 7, |_, j| means[j]);
    assert!((scaled_mse(&flat, &actual).unwrap() - 1.0).abs() < 1e-12);
    let mut constant = actual.clone();
    constant.column_mut(2).fill(1.5);
    assert!(matches!(scaled_mse(&flat, &constant), Err(swlab::Error::ZeroVariance { series: 2 })));
}

proptest! {
    #[test]
    fn pct_improvement_is_antisymmetric(a in any::<u64>(), b in any::<u64>(), c in any::<u64>()) {
        let (p, q, x) = (random_matrix(a, 20), random_matrix(b, 20), random_matrix(c, 20));
        let fwd = pct_improvement(&p, &q, &x).unwrap();
        let back = pct_improvement(&q, &p, &x).unwrap();
        prop_assert!((fwd + back).abs() < 1e-12);
    }

    #[test]
    fn permuting_then_unpermuting_is_identity(rank in 0usize..N_PERMUTATIONS, s in any::<u64>()) {
        let p = Permutation::from_rank(rank).unwrap();
        let m = random_matrix(s, 5);
        prop_assert_eq!(p.unapply_matrix(&p.apply_matrix(&m)), m.clone());
        let inv = p.inverse();
        prop_assert_eq!(Permutation::from_mapping(inv.inverse().mapping).unwrap(), p);
    }

    #[test]
    fn pearson_is_antisymmetric_under_negation(s in any::<u64>()) {
        let mut rng = seed::rng(s);
        let x: Vec<f64> = (0..12).map(|_| rng.random()).collect();
        let y: Vec<f64> = (0..12).map(|_| rng.random()).collect();
        let neg: Vec<f64> = y.iter().map(|v| -v).collect();
        prop_assert!((pearson(&x, &y).unwrap() + pearson(&x, &neg).unwrap()).abs() < 1e-12);
        prop_assert!((pearson(&x, &x).unwrap() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn identity_rank_leaves_panel_unchanged() {
    let ss = sw_model::state_space(&EstimatedVector::posterior_mode(), &SolverConfig::default()).unwrap();
    let panel = simulate(&ss, 10, 10, 1).unwrap();
    assert_eq!(Permutation::identity().apply(&panel).unwrap(), panel);
    let rev = Permutation::from_rank(5039).unwrap();
    let swapped = rev.apply(&panel).unwrap();
    assert_eq!(swapped.names, panel.names);
    assert_eq!(swapped.values.column(0), panel.values.column(6));
}

#[test]
fn param_sq_err_is_zero_at_truth() {
    let t = EstimatedVector::posterior_mode();
    assert_eq!(param_sq_err(&t, &t), (0.0, 0.0));
}

fn record(rep: usize, theta: EstimatedVector) -> SimEstimateRecord {
    SimEstimateRecord {
        replication: rep,
        train_size: 100,
        error: String::new(),
        theta_hat: theta.into_values(),
        penalized_nll: 0.0,
        n_evals: 0,
        train_mse_avg: 0.0,
        test_mse_avg: 0.0,
        test_mse_per_series: vec![0.0; 7],
        param_sq_err: 0.0,
        param_sq_err_raw: 0.0,
        nll_per_obs_train: 0.0,
        penalized_nll_per_obs_train: 0.0,
        nll_per_obs_test: 0.0,
        truth_test_mse_avg: 0.0,
        truth_test_mse_per_series: vec![0.0; 7],
        truth_nll_per_obs_test: 0.0,
    }
}

#[test]
fn taylor_table_diagonal_and_degenerate_input() {
    let mut rng = seed::rng(8);
    let records: Vec<_> = (0..6)
        .map(|i| {
            let mut t = EstimatedVector::posterior_mode();
            for v in t.values_mut() {
                *v *= 1.0 + 0.05 * rng.random::<f64>();
            }
            record(i, t)
        })
        .collect();
    let c = taylor_correlations(&records).unwrap();
    assert_eq!(c.shape(), (20, 4));
    for (j, p) in TAYLOR_PARAMS.iter().enumerate() {
        let i = DEEP_PARAMS.iter().position(|d| d == p).unwrap();
        assert!((c[(i, j)] - 1.0).abs() < 1e-12);
    }
    let same: Vec<_> = (0..4).map(|i| record(i, EstimatedVector::posterior_mode())).collect();
    assert!(matches!(taylor_correlations(&same), Err(swlab::Error::Degenerate(_))));
    assert!(matches!(taylor_correlations(&records[..2]), Err(swlab::Error::Degenerate(_))));
}

#[test]
fn truth_predictive_nll_approaches_entropy_rate() {
    let truth = EstimatedVector::posterior_mode();
    let ss = sw_model::state_space(&truth, &SolverConfig::default()).unwrap();
    let h = entropy_rate(&ss).unwrap();
    let panel = simulate(&ss, 40_000, 1000, 99).unwrap();
    let out = one_step(&truth, &panel, &SolverConfig::default()).unwrap();
    let test = &out.per_step[20_000..];
    let avg = test.iter().sum::<f64>() / test.len() as f64;
    assert!((avg - h).abs() < 0.05, "{avg} vs {h}");
}

fn tiny_sim_config() -> SimEstimateConfig {
    let mut cfg = SimEstimateConfig::desk();
    cfg.n_reps = 2;
    cfg.train_sizes = vec![40, 60];
    cfg.test_len = 50;
    cfg.burn_in = 100;
    cfg.estimate.optimizer.budget = 25;
    cfg.estimate.optimizer.t0_samples = 5;
    cfg.seed = 17;
    cfg
}

#[test]
fn sim_estimate_is_deterministic_and_round_trips() {
    let truth = EstimatedVector::posterior_mode();
    let cfg = tiny_sim_config();
    let a = run_sim_estimate(&truth, &cfg).unwrap();
    assert_eq!(a.len(), 4);
    assert_eq!(a.iter().map(|r| (r.replication, r.train_size)).collect::<Vec<_>>(), [(0, 40), (0, 60), (1, 40), (1, 60)]);
    for r in &a {
        assert!(r.error.is_empty(), "{}", r.error);
        assert!(r.test_mse_avg.is_finite() && r.truth_test_mse_avg.is_finite());
        let theta = EstimatedVector::new(r.theta_hat.clone()).unwrap();
        assert_eq!(param_sq_err(&theta, &truth).0, r.param_sq_err);
        assert!(r.n_evals <= 5 + 25);
    }
    // Replications draw different samples.
    assert_ne!(a[0].truth_test_mse_avg, a[2].truth_test_mse_avg);

    let dir = tempfile::tempdir().unwrap();
    let (p1, p2) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    write_sim_estimate_csv(&p1, &a).unwrap();
    write_sim_estimate_csv(&p2, &run_sim_estimate(&truth, &cfg).unwrap()).unwrap();
    assert_eq!(std::fs::read(&p1).unwrap(), std::fs::read(&p2).unwrap());
    assert_eq!(read_sim_estimate_csv(&p1).unwrap(), a);
    let files = report_sim_estimate(&a, dir.path()).unwrap();
    for f in files {
        assert!(dir.path().join(f).exists());
    }
}

fn perm_panel() -> TimeSeriesPanel {
    let ss = sw_model::state_space(&EstimatedVector::posterior_mode(), &SolverConfig::default()).unwrap();
    simulate(&ss, 251, 500, 23).unwrap()
}

fn tiny_estimate_config() -> EstimateConfig {
    let mut cfg = EstimateConfig::desk().with_seed(4);
    cfg.optimizer.n_starts = 1;
    cfg.optimizer.budget = 30;
    cfg.optimizer.t0_samples = 5;
    cfg
}

#[test]
fn permutation_study_contract() {
    let panel = perm_panel();
    let cfg = tiny_estimate_config();
    let recs = run_permutation(&panel, &[0, 5039, 1], &cfg, None).unwrap();
    assert_eq!(recs.iter().map(|r| r.rank).collect::<Vec<_>>(), [0, 5039, 1]);
    let base = &recs[0];
    assert!(base.error.is_empty());
    assert_eq!(base.avg_pct_improvement, 0.0);
    assert_eq!(base.mapping, "dy|dc|di|dw|pi|l|r");
    assert_eq!(recs[1].mapping, "r|l|pi|dw|di|dc|dy");

    // Rank 0 is exactly the plain estimate with the same seed.
    let fit = estimate(&panel, &cfg, None).unwrap();
    assert_eq!(base.theta_hat, fit.theta_hat.values());
    assert_eq!(base.penalized_nll_train, fit.penalized_nll);

    // A supplied baseline gives the same records; reruns are byte-identical.
    let again = run_permutation(&panel, &[0, 5039, 1], &cfg, Some(&fit)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let (p1, p2) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    write_permutation_csv(&p1, &recs).unwrap();
    write_permutation_csv(&p2, &again).unwrap();
    assert_eq!(std::fs::read(&p1).unwrap(), std::fs::read(&p2).unwrap());
    assert_eq!(read_permutation_csv(&p1).unwrap(), recs);
    report_permutation(&recs, dir.path()).unwrap();
}

#[test]
fn permutation_study_needs_251_rows() {
    let panel = perm_panel().slice(0, 250).unwrap();
    let err = run_permutation(&panel, &[0], &tiny_estimate_config(), None).unwrap_err();
    assert!(matches!(err, swlab::Error::WindowShort(_)));
    assert!(run_permutation(&perm_panel(), &[5040], &tiny_estimate_config(), None).is_err());
}

#[test]
fn deep_parameter_rows() {
    assert_eq!(DEEP_PARAMS.len(), 20);
    assert_eq!(DEEP_PARAMS[0], Param::Phi);
    assert_eq!(TAYLOR_PARAMS.map(|p| p.name()), ["r_pi", "rho", "r_y", "r_dy"]);
}
