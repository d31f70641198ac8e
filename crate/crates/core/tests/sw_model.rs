use nalgebra::DMatrix;
use statrs::distribution::{Beta, Continuous, Gamma, Normal};
use swlab::lre_solver::SolverConfig;
use swlab::state_space::{kalman_nll, Quarter, TimeSeriesPanel};
use swlab::sw_model::{
    self, estimated_specs, expand_params, prior_log_density, EstimatedVector, Param, Prior,
    PriorFamily,
};

const FIXTURE: &str = include_str!("fixtures/sw_1966q1_2004q4.txt");

/// The fixture stores columns as dy dc di dw l pi r.
fn fixture_panel() -> TimeSeriesPanel {
    let rows: Vec<Vec<f64>> = FIXTURE
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| l.split_whitespace().map(|v| v.parse().unwrap()).collect())
        .collect();
    let order = [0, 1, 2, 3, 5, 4, 6];
    let m = DMatrix::from_fn(rows.len(), 7, |i, j| rows[i][order[j]]);
    TimeSeriesPanel::canonical(Quarter::new(1966, 1).unwrap(), m).unwrap()
}

fn reference_theta() -> EstimatedVector {
    let pairs = [
        ("beta_const", 0.1657), ("pi_bar", 0.7869), ("l_bar", 0.5509), ("gamma_bar", 0.4312),
        ("alpha", 0.1901), ("sigma_c", 1.3333), ("phi_p", 1.6064), ("phi", 5.7606),
        ("h", 0.72), ("xi_w", 0.7), ("sigma_l", 1.9), ("xi_p", 0.65), ("iota_w", 0.57),
        ("iota_p", 0.3), ("psi", 0.5462), ("r_pi", 2.0443), ("rho", 0.8103), ("r_y", 0.0882),
        ("r_dy", 0.2247), ("rho_a", 0.9577), ("rho_b", 0.2194), ("rho_g", 0.9767),
        ("rho_i", 0.7113), ("rho_r", 0.1479), ("rho_p", 0.8895), ("rho_w", 0.9688),
        ("rho_ga", 0.5), ("mu_p", 0.72), ("mu_w", 0.85), ("sigma_a", 0.4582), ("sigma_b", 0.24),
        ("sigma_g", 0.5291), ("sigma_i", 0.4526), ("sigma_r", 0.2449), ("sigma_p", 0.141),
        ("sigma_w", 0.2446),
    ];
    EstimatedVector::from_named(pairs.iter().copied()).unwrap()
}

#[test]
fn likelihood_matches_independent_implementation() {
    let panel = fixture_panel();
    assert_eq!(panel.len(), 156);
    let ss = sw_model::state_space(&reference_theta(), &SolverConfig::default()).unwrap();
    let (nll, _) = kalman_nll(&ss, &panel).unwrap();
    assert!((nll - 829.741_261_550_087_9).abs() < 1e-6, "nll = {nll}");
}

#[test]
fn every_estimated_parameter_moves_the_likelihood() {
    let panel = fixture_panel();
    let cfg = SolverConfig::default();
    let theta = EstimatedVector::posterior_mode();
    let base = kalman_nll(&sw_model::state_space(&theta, &cfg).unwrap(), &panel).unwrap().0;
    for p in Param::ALL {
        let (x, spec) = (theta.get(p), p.spec());
        let mid = 0.5 * (spec.lower + spec.upper);
        let bumped = theta.clone().with(p, x + 0.01 * (mid - x).signum() * (x.abs() + 0.1));
        let nll = kalman_nll(&sw_model::state_space(&bumped, &cfg).unwrap(), &panel).unwrap().0;
        assert!((nll - base).abs() > 1e-6, "{} has no effect", p.name());
    }
}

#[test]
fn derived_discount_and_growth_factors() {
    let full = expand_params(&EstimatedVector::posterior_mode());
    let ss = &full.steady;
    let gamma_bar = full.get(Param::GammaBar);
    assert!((ss.gamma - (1.0 + gamma_bar / 100.0)).abs() < 1e-15);
    let beta = 1.0 / (1.0 + full.get(Param::BetaConst) / 100.0);
    assert!((ss.beta - beta).abs() < 1e-15);
    let sigma_c = full.get(Param::SigmaC);
    assert!((ss.beta_bar - beta * ss.gamma.powf(-sigma_c)).abs() < 1e-15);
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

#[test]
fn prior_densities_match_reference_distributions() {
    for spec in estimated_specs() {
        let prior = Prior::from_spec(spec).unwrap();
        let (m, s) = (spec.prior_mean, spec.prior_stdev);
        let x = spec.posterior_mode;
        let oracle = match spec.prior_family {
            PriorFamily::Gaussian => Normal::new(m, s).unwrap().ln_pdf(x),
            PriorFamily::Beta => {
                let k = m * (1.0 - m) / (s * s) - 1.0;
                Beta::new(m * k, (1.0 - m) * k).unwrap().ln_pdf(x)
            }
            PriorFamily::Gamma => Gamma::new((m / s).powi(2), m / (s * s)).unwrap().ln_pdf(x),
            PriorFamily::InverseGamma => continue,
            PriorFamily::None => unreachable!(),
        };
        assert!((prior.log_density(x) - oracle).abs() < 1e-10, "{}", spec.name);
    }
}

#[test]
fn inverse_gamma_priors_integrate_to_one_with_table_moments() {
    for spec in estimated_specs().iter().filter(|s| s.prior_family == PriorFamily::InverseGamma) {
        let prior = Prior::from_spec(spec).unwrap();
        let pdf = |x: f64| if x <= 0.0 { 0.0 } else { prior.log_density(x).exp() };
        // Substitute x = exp(u) so the heavy right tail is covered.
        let integrate = |g: &dyn Fn(f64) -> f64| {
            simpson(|u| g(u.exp()) * u.exp(), -12.0, 12.0, 200_000)
        };
        let mass = integrate(&|x| pdf(x));
        let mean = integrate(&|x| x * pdf(x));
        assert!((mass - 1.0).abs() < 1e-6, "{} mass {mass}", spec.name);
        assert!((mean - spec.prior_mean).abs() < 1e-4, "{} mean {mean}", spec.name);
    }
}

#[test]
fn prior_log_density_sums_coordinates() {
    let theta = EstimatedVector::posterior_mode();
    let total: f64 = Param::ALL
        .iter()
        .map(|&p| Prior::from_spec(p.spec()).unwrap().log_density(theta.get(p)))
        .sum();
    assert!((prior_log_density(&theta) - total).abs() < 1e-12);
}
