use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::Rng;
use swlab::lre_solver::SolverConfig;
use swlab::seed;
use swlab::state_space::*;
use swlab::sw_model::{self, EstimatedVector};

/// vec(P) = (I − T⊗T)⁻¹ vec(W), independent of the doubling solver.
fn kron_lyapunov(t: &DMatrix<f64>, w: &DMatrix<f64>) -> DMatrix<f64> {
    let n = t.nrows();
    let big = DMatrix::<f64>::identity(n * n, n * n) - t.kronecker(t);
    let v = DVector::from_column_slice(w.as_slice());
    let p = big.lu().solve(&v).unwrap();
    DMatrix::from_column_slice(n, n, p.as_slice())
}

/// −log density of all observations stacked into one Gaussian vector.
fn joint_nll(ss: &StateSpace, data: &DMatrix<f64>) -> f64 {
    let n = ss.n_states();
    let p = ss.n_obs();
    let len = data.nrows();
    let w = ss.state_noise();
    let p0 = kron_lyapunov(&ss.t, &w);
    let mean_state = (DMatrix::<f64>::identity(n, n) - &ss.t).lu().solve(&ss.d).unwrap();
    let mean_obs = &ss.z * mean_state + &ss.mu;
    let mut cov = DMatrix::zeros(len * p, len * p);
    let mut tpow = DMatrix::<f64>::identity(n, n);
    for lag in 0..len {
        let block = &ss.z * &tpow * &p0 * ss.z.transpose();
        for s in 0..len - lag {
            let t = s + lag;
            cov.view_mut((t * p, s * p), (p, p)).copy_from(&block);
            cov.view_mut((s * p, t * p), (p, p)).copy_from(&block.transpose());
        }
        tpow = &ss.t * tpow;
    }
    let mut x = DVector::zeros(len * p);
    for t in 0..len {
        for i in 0..p {
            x[t * p + i] = data[(t, i)] - mean_obs[i];
        }
    }
    let chol = cov.cholesky().unwrap();
    let logdet = 2.0 * chol.l().diagonal().iter().map(|v| v.ln()).sum::<f64>();
    0.5 * ((len * p) as f64 * (2.0 * PI).ln() + logdet + x.dot(&chol.solve(&x)))
}

fn panel(data: DMatrix<f64>) -> TimeSeriesPanel {
    let names = (0..data.ncols()).map(|i| format!("x{i}")).collect();
    let dates = (0..data.nrows() as i64).map(|k| SIM_START.offset(k)).collect();
    TimeSeriesPanel::new(names, dates, data).unwrap()
}

/// Random stable system with n states, n shocks and p observables.
fn random_system(seed_: u64, n: usize, p: usize) -> StateSpace {
    let mut rng = seed::rng(seed_);
    let mut t = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    let radius = spectral_radius(&t);
    let target = rng.random_range(0.1..0.95);
    t *= target / radius.max(1e-12);
    StateSpace::new(
        DVector::from_fn(n, |_, _| rng.random_range(-0.5..0.5)),
        t,
        DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0)),
        DVector::from_fn(n, |_, _| rng.random_range(0.2..2.0)),
        DMatrix::from_fn(p, n, |_, _| rng.random_range(-1.0..1.0)),
        DVector::from_fn(p, |_, _| rng.random_range(-1.0..1.0)),
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn kalman_matches_joint_gaussian(s in any::<u64>(), n in 1usize..=4, p_frac in 0.0f64..1.0, len in 1usize..=20) {
        let p = 1 + ((n as f64) * p_frac) as usize % n;
        let ss = random_system(s, n, p);
        let mut rng = seed::rng(s ^ 0xabc);
        let data = DMatrix::from_fn(len, p, |_, _| rng.random_range(-2.0..2.0));
        let (total, steps) = kalman_nll(&ss, &panel(data.clone())).unwrap();
        let oracle = joint_nll(&ss, &data);
        prop_assert!((total - oracle).abs() <= 1e-8 * oracle.abs().max(1.0), "{total} vs {oracle}");
        prop_assert!((steps.iter().sum::<f64>() - total).abs() < 1e-12 * total.abs().max(1.0));
        prop_assert_eq!(steps.len(), len);
    }

    #[test]
    fn lyapunov_matches_kronecker(s in any::<u64>(), n in 1usize..=5) {
        let ss = random_system(s, n, 1);
        let (_, cov) = stationary_moments(&ss).unwrap();
        let oracle = kron_lyapunov(&ss.t, &ss.state_noise());
        prop_assert!((&cov - &oracle).amax() <= 1e-10 * oracle.amax());
        let resid = &cov - &ss.t * &cov * ss.t.transpose() - ss.state_noise();
        prop_assert!(resid.amax() <= 1e-10 * cov.amax());
    }

    #[test]
    fn iterated_one_step_forecasts_equal_multi_step(s in any::<u64>(), h in 1usize..30) {
        let ss = random_system(s, 3, 2);
        let (m, c) = stationary_moments(&ss).unwrap();
        let start = &m + DVector::from_element(3, 1.0);
        let full = forecast(&ss, (&start, &c), h).unwrap();
        let mut state = start.clone();
        let mut cov = c.clone();
        for k in 0..h {
            let one = forecast(&ss, (&state, &cov), 1).unwrap();
            prop_assert!((one.mean.row(0) - full.mean.row(k)).amax() < 1e-10);
            prop_assert!((&one.cov[0] - &full.cov[k]).amax() < 1e-10);
            state = &ss.d + &ss.t * &state;
            cov = &ss.t * &cov * ss.t.transpose() + ss.state_noise();
        }
    }
}

#[test]
fn kalman_standard_normal_case() {
    let ss = StateSpace::new(
        DVector::zeros(1),
        DMatrix::zeros(1, 1),
        DMatrix::identity(1, 1),
        DVector::from_element(1, 1.0),
        DMatrix::identity(1, 1),
        DVector::zeros(1),
    )
    .unwrap();
    let (nll, _) = kalman_nll(&ss, &panel(DMatrix::zeros(1, 1))).unwrap();
    assert!((nll - 0.918_938_533_204_672_7).abs() < 1e-12);
}

#[test]
fn stationary_covariance_matches_long_simulation() {
    let ss = random_system(99, 4, 4);
    let (mean, cov) = stationary_moments(&ss).unwrap();
    let states = simulate_states(&ss, 1_000_000, 100, 5).unwrap();
    let n = states.nrows() as f64;
    let sample_mean = states.row_mean();
    let mut centered = states.clone();
    for mut row in centered.row_iter_mut() {
        row -= &sample_mean;
    }
    let sample_cov = centered.transpose() * &centered / n;
    assert!((sample_mean.transpose() - &mean).amax() < 0.02 * cov.diagonal().max().sqrt());
    assert!((&sample_cov - &cov).amax() < 0.02 * cov.amax(), "{sample_cov} vs {cov}");
}

#[test]
fn simulated_observable_covariance_within_three_standard_errors() {
    let ss = random_system(7, 3, 2);
    let (_, cov) = stationary_moments(&ss).unwrap();
    let target = &ss.z * cov * ss.z.transpose();
    let sim = simulate(&ss, 1_000_000, 1000, 21).unwrap();
    // Batch means give standard errors that account for serial correlation.
    let batches = 100;
    let size = sim.len() / batches;
    let mean = sim.values.row_mean();
    let mut estimates = Vec::new();
    for b in 0..batches {
        let block = sim.values.rows(b * size, size);
        let mut c = DMatrix::zeros(2, 2);
        for row in block.row_iter() {
            let v = row - &mean;
            c += v.transpose() * &v;
        }
        estimates.push(c / size as f64);
    }
    let avg = estimates.iter().fold(DMatrix::zeros(2, 2), |a, b| a + b) / batches as f64;
    for i in 0..2 {
        for j in 0..2 {
            let var = estimates.iter().map(|e| (e[(i, j)] - avg[(i, j)]).powi(2)).sum::<f64>()
                / (batches - 1) as f64;
            let se = (var / batches as f64).sqrt();
            assert!((avg[(i, j)] - target[(i, j)]).abs() <= 3.0 * se, "({i},{j})");
        }
    }
}

#[test]
fn zero_noise_simulation_is_constant_at_observable_mean() {
    let mut ss = random_system(3, 3, 2);
    ss.q.fill(0.0);
    let (mean, _) = stationary_moments(&ss).unwrap();
    let want = &ss.z * mean + &ss.mu;
    let sim = simulate(&ss, 10, 50, 1).unwrap();
    for row in sim.values.row_iter() {
        assert!((row.transpose() - &want).amax() < 1e-12);
    }
}

#[test]
fn long_forecast_converges_to_unconditional_mean() {
    let ss = random_system(11, 3, 2);
    let (mean, cov) = stationary_moments(&ss).unwrap();
    let start = &mean + DVector::from_element(3, 5.0);
    let f = forecast(&ss, (&start, &DMatrix::zeros(3, 3)), 400).unwrap();
    let want = &ss.z * &mean + &ss.mu;
    assert!((f.mean.row(399).transpose() - want).amax() < 1e-8);
    let limit = &ss.z * cov * ss.z.transpose();
    assert!((&f.cov[399] - limit).amax() < 1e-8);
}

fn baseline() -> StateSpace {
    sw_model::state_space(&EstimatedVector::posterior_mode(), &SolverConfig::default()).unwrap()
}

#[test]
fn entropy_shifts_by_seven_log_c_under_shock_scaling() {
    let ss = baseline();
    let h = entropy_rate(&ss).unwrap();
    for c in [0.5, 2.0, 3.7] {
        let mut scaled = ss.clone();
        scaled.q *= c * c;
        let hc = entropy_rate(&scaled).unwrap();
        assert!((hc - h - 7.0 * f64::ln(c)).abs() < 1e-8, "c = {c}");
    }
}

#[test]
fn filter_covariances_stay_positive_semidefinite() {
    let ss = baseline();
    let data = simulate(&ss, 200, 500, 3).unwrap();
    let opts = FilterOptions {
        check_psd: true,
        ..Default::default()
    };
    let out = kalman_filter_with(&ss, &data, &opts).unwrap();
    assert!(out.min_eigenvalue.unwrap() >= -1e-10);
}

#[test]
fn per_step_nll_converges_to_entropy_rate() {
    let ss = baseline();
    let h = entropy_rate(&ss).unwrap();
    let n = 100_000;
    let data = simulate(&ss, n, 1000, 17).unwrap();
    let (total, _) = kalman_nll(&ss, &data).unwrap();
    let avg = total / n as f64;
    assert!((avg - h).abs() <= 0.02, "average {avg}, entropy rate {h}");
}

#[test]
fn misspecified_parameters_do_worse_in_the_long_run() {
    // Small system: AR(1) observed with a moving-average component.
    let truth = StateSpace::new(
        DVector::zeros(2),
        DMatrix::from_row_slice(2, 2, &[0.8, 0.0, 1.0, 0.0]),
        DMatrix::from_row_slice(2, 1, &[1.0, 0.0]),
        DVector::from_element(1, 1.0),
        DMatrix::from_row_slice(1, 2, &[1.0, 0.5]),
        DVector::zeros(1),
    )
    .unwrap();
    let h = entropy_rate(&truth).unwrap();
    let n = 100_000;
    let data = simulate(&truth, n, 100, 8).unwrap();
    let at_truth = kalman_nll(&truth, &data).unwrap().0 / n as f64;
    assert!((at_truth - h).abs() <= 0.02);
    let mut other = truth.clone();
    other.t[(0, 0)] = 0.6;
    other.q[0] = 1.3;
    let at_other = kalman_nll(&other, &data).unwrap().0 / n as f64;
    assert!(at_other > h, "{at_other} <= {h}");
    assert!(at_other > at_truth);
}

#[test]
fn gain_freeze_does_not_move_the_likelihood() {
    // Large innovations amplify any gap between the frozen and exact covariances.
    let exact = FilterOptions {
        steady_state_tol: 0.0,
        ..Default::default()
    };
    for s in 0..40u64 {
        let ss = random_system(s, 3, 2);
        let mut rng = seed::rng(s ^ 0x5eed);
        let data = panel(DMatrix::from_fn(60, 2, |_, _| rng.random_range(-20.0..20.0)));
        let fast = kalman_filter(&ss, &data).unwrap().total_nll;
        let slow = kalman_filter_with(&ss, &data, &exact).unwrap().total_nll;
        assert!((fast - slow).abs() <= 1e-12 * slow.abs(), "seed {s}: {fast} vs {slow}");
    }
}
