//! The log-linear Smets-Wouters system in `Γ0 z_t = Γ1 z_{t-1} + A + B ε_t + C η_t` form.
//!
//! State ordering (n = 50):
//!
//! | block              | states                                                        |
//! |--------------------|---------------------------------------------------------------|
//! | sticky economy     | y c i q ks k z rk mu_p pi mu_w w l r                          |
//! | flexible economy   | yf cf if qf ksf kf zf rkf wf lf rrf                           |
//! | shock processes    | e_a e_b e_g e_i e_r e_p e_w                                   |
//! | MA states          | ma_p ma_w (current mark-up innovations)                       |
//! | expectations       | E[c] E[l] E[pi] E[i] E[q] E[rk] E[w] E[cf] E[lf] E[if] E[qf] E[rkf] |
//! | observation lags   | y(-1) c(-1) i(-1) w(-1)                                       |
//!
//! `ε_t` are standard-normal innovations ordered (a, b, g, i, r, p, w), so the
//! shock standard deviations sit inside `B`. Each expectation state `E[x]_t`
//! carries one expectational error through `x_t = E[x]_{t-1} + η_t`.

use nalgebra::{DMatrix, DVector};

use super::params::{FullParams, Param};
use crate::lre_solver::LinearREModel;

macro_rules! states {
    ($($variant:ident => $label:literal),* $(,)?) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq)]
        #[repr(usize)]
        pub enum State { $($variant),* }

        impl State {
            pub const ALL: &'static [State] = &[$(State::$variant),*];
            pub fn label(self) -> &'static str {
                match self { $(State::$variant => $label),* }
            }
        }
    };
}

states! {
    Y => "y", C => "c", I => "i", Q => "q", Ks => "ks", K => "k", Z => "z", Rk => "rk",
    MuP => "mu_p", Pi => "pi", MuW => "mu_w", W => "w", L => "l", R => "r",
    Yf => "yf", Cf => "cf", If => "if", Qf => "qf", Ksf => "ksf", Kf => "kf", Zf => "zf",
    Rkf => "rkf", Wf => "wf", Lf => "lf", Rrf => "rrf",
    Ea => "e_a", Eb => "e_b", Eg => "e_g", Ei => "e_i", Er => "e_r", Ep => "e_p", Ew => "e_w",
    MaP => "ma_p", MaW => "ma_w",
    ExC => "E[c]", ExL => "E[l]", ExPi => "E[pi]", ExI => "E[i]", ExQ => "E[q]",
    ExRk => "E[rk]", ExW => "E[w]", ExCf => "E[cf]", ExLf => "E[lf]", ExIf => "E[if]",
    ExQf => "E[qf]", ExRkf => "E[rkf]",
    YLag => "y(-1)", CLag => "c(-1)", ILag => "i(-1)", WLag => "w(-1)",
}

/// Number of model states.
pub const N_STATES: usize = 50;
/// Number of expectational errors.
pub const N_EXPECTATIONS: usize = 12;
pub const N_SHOCKS: usize = 7;
pub const N_OBS: usize = 7;

pub const SHOCK_LABELS: [&str; N_SHOCKS] = ["a", "b", "g", "i", "r", "p", "w"];

/// Expectation states paired with the variable they forecast.
const EXPECTATIONS: [(State, State); N_EXPECTATIONS] = [
    (State::ExC, State::C),
    (State::ExL, State::L),
    (State::ExPi, State::Pi),
    (State::ExI, State::I),
    (State::ExQ, State::Q),
    (State::ExRk, State::Rk),
    (State::ExW, State::W),
    (State::ExCf, State::Cf),
    (State::ExLf, State::Lf),
    (State::ExIf, State::If),
    (State::ExQf, State::Qf),
    (State::ExRkf, State::Rkf),
];

#[derive(Debug, Clone, Copy)]
enum Shock {
    A,
    B,
    G,
    I,
    R,
    P,
    W,
}

/// Observation equation `x_t = Z z_t + mu`.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationMap {
    pub z: DMatrix<f64>,
    pub mu: DVector<f64>,
}

struct Builder {
    g0: DMatrix<f64>,
    g1: DMatrix<f64>,
    b: DMatrix<f64>,
    c: DMatrix<f64>,
    row: usize,
    sd: [f64; N_SHOCKS],
}

impl Builder {
    fn next(&mut self) -> usize {
        let r = self.row;
        self.row += 1;
        r
    }
    /// Coefficient on a current-period state, left-hand side.
    fn cur(&mut self, row: usize, s: State, coef: f64) {
        self.g0[(row, s as usize)] += coef;
    }
    /// Coefficient on a lagged state, right-hand side.
    fn lag(&mut self, row: usize, s: State, coef: f64) {
        self.g1[(row, s as usize)] += coef;
    }
    /// Loading on a standardized innovation, right-hand side.
    fn shock(&mut self, row: usize, k: Shock, coef: f64) {
        self.b[(row, k as usize)] += coef * self.sd[k as usize];
    }
}

/// Assemble the linear rational-expectations system and the observation map.
pub fn build_system(p: &FullParams) -> (LinearREModel, ObservationMap) {
    use State::*;
    let n = N_STATES;
    let mut m = Builder {
        g0: DMatrix::zeros(n, n),
        g1: DMatrix::zeros(n, n),
        b: DMatrix::zeros(n, N_SHOCKS),
        c: DMatrix::zeros(n, N_EXPECTATIONS),
        row: 0,
        sd: p.shock_sds(),
    };
    let k = &p.coef;
    let ss = &p.steady;
    let alpha = p.get(Param::Alpha);
    let phi_p = p.get(Param::PhiP);
    let sigma_l = p.get(Param::SigmaL);
    let hg = p.get(Param::Habit) / ss.gamma;
    let mrs_c = 1.0 / (1.0 - hg);

    // Sticky-price, sticky-wage economy.

    // Resource constraint.
    let r = m.next();
    m.cur(r, Y, 1.0);
    m.cur(r, C, -ss.c_y);
    m.cur(r, I, -ss.i_y);
    m.cur(r, Z, -ss.z_y);
    m.cur(r, Eg, -1.0);

    // Consumption Euler equation. The risk-premium disturbance enters with a
    // unit loading here and 1/c3 in the value of capital.
    let r = m.next();
    m.cur(r, C, 1.0);
    m.lag(r, C, k.c1);
    m.cur(r, ExC, -(1.0 - k.c1));
    m.cur(r, L, -k.c2);
    m.cur(r, ExL, k.c2);
    m.cur(r, R, k.c3);
    m.cur(r, ExPi, -k.c3);
    m.cur(r, Eb, -1.0);

    // Investment Euler equation.
    let r = m.next();
    m.cur(r, I, 1.0);
    m.lag(r, I, k.i1);
    m.cur(r, ExI, -(1.0 - k.i1));
    m.cur(r, Q, -k.i2);
    m.cur(r, Ei, -1.0);

    // Value of capital.
    let r = m.next();
    m.cur(r, Q, 1.0);
    m.cur(r, ExQ, -k.q1);
    m.cur(r, ExRk, -(1.0 - k.q1));
    m.cur(r, R, 1.0);
    m.cur(r, ExPi, -1.0);
    m.cur(r, Eb, -1.0 / k.c3);

    // Production function.
    let r = m.next();
    m.cur(r, Y, 1.0);
    m.cur(r, Ks, -phi_p * alpha);
    m.cur(r, L, -phi_p * (1.0 - alpha));
    m.cur(r, Ea, -phi_p);

    // Capital services.
    let r = m.next();
    m.cur(r, Ks, 1.0);
    m.lag(r, K, 1.0);
    m.cur(r, Z, -1.0);

    // Capital utilization.
    let r = m.next();
    m.cur(r, Z, 1.0);
    m.cur(r, Rk, -k.z1);

    // Installed capital accumulation.
    let r = m.next();
    m.cur(r, K, 1.0);
    m.lag(r, K, k.k1);
    m.cur(r, I, -(1.0 - k.k1));
    m.cur(r, Ei, -k.k2);

    // Price mark-up.
    let r = m.next();
    m.cur(r, MuP, 1.0);
    m.cur(r, Ks, -alpha);
    m.cur(r, L, alpha);
    m.cur(r, Ea, -1.0);
    m.cur(r, W, 1.0);

    // Phillips curve.
    let r = m.next();
    m.cur(r, Pi, 1.0);
    m.lag(r, Pi, k.pi1);
    m.cur(r, ExPi, -k.pi2);
    m.cur(r, MuP, k.pi3);
    m.cur(r, Ep, -1.0);

    // Rental rate of capital.
    let r = m.next();
    m.cur(r, Rk, 1.0);
    m.cur(r, Ks, 1.0);
    m.cur(r, L, -1.0);
    m.cur(r, W, -1.0);

    // Wage mark-up.
    let r = m.next();
    m.cur(r, MuW, 1.0);
    m.cur(r, W, -1.0);
    m.cur(r, L, sigma_l);
    m.cur(r, C, mrs_c);
    m.lag(r, C, mrs_c * hg);

    // Real wage.
    let r = m.next();
    m.cur(r, W, 1.0);
    m.lag(r, W, k.w1);
    m.cur(r, ExW, -(1.0 - k.w1));
    m.cur(r, ExPi, -(1.0 - k.w1));
    m.cur(r, Pi, k.w2);
    m.lag(r, Pi, k.w3);
    m.cur(r, MuW, k.w4);
    m.cur(r, Ew, -1.0);

    // Monetary policy rule.
    let r = m.next();
    let rho = p.get(Param::Rho);
    let r_pi = p.get(Param::RPi);
    let r_y = p.get(Param::RY);
    let r_dy = p.get(Param::RDy);
    m.cur(r, R, 1.0);
    m.lag(r, R, rho);
    m.cur(r, Pi, -(1.0 - rho) * r_pi);
    m.cur(r, Y, -((1.0 - rho) * r_y + r_dy));
    m.cur(r, Yf, (1.0 - rho) * r_y + r_dy);
    m.lag(r, Y, -r_dy);
    m.lag(r, Yf, r_dy);
    m.cur(r, Er, -1.0);

    // Flexible-price, flexible-wage economy (no mark-up disturbances).

    // Constant price mark-up.
    let r = m.next();
    m.cur(r, Ksf, alpha);
    m.cur(r, Lf, -alpha);
    m.cur(r, Ea, 1.0);
    m.cur(r, Wf, -1.0);

    let r = m.next();
    m.cur(r, Zf, 1.0);
    m.cur(r, Rkf, -k.z1);

    let r = m.next();
    m.cur(r, Rkf, 1.0);
    m.cur(r, Ksf, 1.0);
    m.cur(r, Lf, -1.0);
    m.cur(r, Wf, -1.0);

    let r = m.next();
    m.cur(r, Ksf, 1.0);
    m.lag(r, Kf, 1.0);
    m.cur(r, Zf, -1.0);

    let r = m.next();
    m.cur(r, If, 1.0);
    m.lag(r, If, k.i1);
    m.cur(r, ExIf, -(1.0 - k.i1));
    m.cur(r, Qf, -k.i2);
    m.cur(r, Ei, -1.0);

    let r = m.next();
    m.cur(r, Qf, 1.0);
    m.cur(r, ExQf, -k.q1);
    m.cur(r, ExRkf, -(1.0 - k.q1));
    m.cur(r, Rrf, 1.0);
    m.cur(r, Eb, -1.0 / k.c3);

    let r = m.next();
    m.cur(r, Cf, 1.0);
    m.lag(r, Cf, k.c1);
    m.cur(r, ExCf, -(1.0 - k.c1));
    m.cur(r, Lf, -k.c2);
    m.cur(r, ExLf, k.c2);
    m.cur(r, Rrf, k.c3);
    m.cur(r, Eb, -1.0);

    let r = m.next();
    m.cur(r, Yf, 1.0);
    m.cur(r, Cf, -ss.c_y);
    m.cur(r, If, -ss.i_y);
    m.cur(r, Zf, -ss.z_y);
    m.cur(r, Eg, -1.0);

    let r = m.next();
    m.cur(r, Yf, 1.0);
    m.cur(r, Ksf, -phi_p * alpha);
    m.cur(r, Lf, -phi_p * (1.0 - alpha));
    m.cur(r, Ea, -phi_p);

    // Constant wage mark-up.
    let r = m.next();
    m.cur(r, Wf, 1.0);
    m.cur(r, Lf, -sigma_l);
    m.cur(r, Cf, -mrs_c);
    m.lag(r, Cf, -mrs_c * hg);

    let r = m.next();
    m.cur(r, Kf, 1.0);
    m.lag(r, Kf, k.k1);
    m.cur(r, If, -(1.0 - k.k1));
    m.cur(r, Ei, -k.k2);

    // Shock processes.
    let ar1 = |m: &mut Builder, s: State, rho: f64, shock: Shock| {
        let r = m.next();
        m.cur(r, s, 1.0);
        m.lag(r, s, rho);
        m.shock(r, shock, 1.0);
        r
    };
    ar1(&mut m, Ea, p.get(Param::RhoA), Shock::A);
    ar1(&mut m, Eb, p.get(Param::RhoB), Shock::B);
    let r = ar1(&mut m, Eg, p.get(Param::RhoG), Shock::G);
    m.shock(r, Shock::A, p.get(Param::RhoGa));
    ar1(&mut m, Ei, p.get(Param::RhoI), Shock::I);
    ar1(&mut m, Er, p.get(Param::RhoR), Shock::R);
    let r = ar1(&mut m, Ep, p.get(Param::RhoP), Shock::P);
    m.lag(r, MaP, -p.get(Param::MuP));
    let r = ar1(&mut m, Ew, p.get(Param::RhoW), Shock::W);
    m.lag(r, MaW, -p.get(Param::MuW));

    let r = m.next();
    m.cur(r, MaP, 1.0);
    m.shock(r, Shock::P, 1.0);
    let r = m.next();
    m.cur(r, MaW, 1.0);
    m.shock(r, Shock::W, 1.0);

    // Expectational errors: x_t = E[x]_{t-1} + η_t.
    for (j, (ex, x)) in EXPECTATIONS.iter().enumerate() {
        let r = m.next();
        m.cur(r, *x, 1.0);
        m.lag(r, *ex, 1.0);
        m.c[(r, j)] = 1.0;
    }

    // Lags needed by the observation equation.
    for (lagged, x) in [(YLag, Y), (CLag, C), (ILag, I), (WLag, W)] {
        let r = m.next();
        m.cur(r, lagged, 1.0);
        m.lag(r, x, 1.0);
    }
    debug_assert_eq!(m.row, n);

    let mut z = DMatrix::zeros(N_OBS, n);
    for (row, (x, lagged)) in [(Y, YLag), (C, CLag), (I, ILag), (W, WLag)]
        .into_iter()
        .enumerate()
    {
        z[(row, x as usize)] = 1.0;
        z[(row, lagged as usize)] = -1.0;
    }
    z[(4, Pi as usize)] = 1.0;
    z[(5, L as usize)] = 1.0;
    z[(6, R as usize)] = 1.0;
    let gamma_bar = p.get(Param::GammaBar);
    let mu = DVector::from_vec(vec![
        gamma_bar,
        gamma_bar,
        gamma_bar,
        gamma_bar,
        p.get(Param::PiBar),
        p.get(Param::LBar),
        ss.r_bar,
    ]);

    let model = LinearREModel {
        gamma0: m.g0,
        gamma1: m.g1,
        constant: DVector::zeros(n),
        shock_loading: m.b,
        expectation_loading: m.c,
        state_labels: State::ALL.iter().map(|s| s.label().to_string()).collect(),
        shock_labels: SHOCK_LABELS.iter().map(|s| s.to_string()).collect(),
    };
    (model, ObservationMap { z, mu })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sw_model::params::{expand_params, EstimatedVector};

    fn build(theta: &EstimatedVector) -> (LinearREModel, ObservationMap) {
        build_system(&expand_params(theta))
    }

    #[test]
    fn dimensions_and_labels() {
        let (m, obs) = build(&EstimatedVector::posterior_mode());
        assert_eq!(State::ALL.len(), N_STATES);
        assert_eq!(m.gamma0.shape(), (N_STATES, N_STATES));
        assert_eq!(m.gamma1.shape(), (N_STATES, N_STATES));
        assert_eq!(m.shock_loading.shape(), (N_STATES, N_SHOCKS));
        assert_eq!(m.expectation_loading.shape(), (N_STATES, N_EXPECTATIONS));
        assert_eq!(obs.z.shape(), (N_OBS, N_STATES));
        assert_eq!(m.state_labels.len(), N_STATES);
    }

    #[test]
    fn observation_rows_touch_only_their_states() {
        let (_, obs) = build(&EstimatedVector::posterior_mode());
        let touched: Vec<Vec<usize>> = (0..N_OBS)
            .map(|i| (0..N_STATES).filter(|&j| obs.z[(i, j)] != 0.0).collect())
            .collect();
        use State::*;
        let expected = [
            vec![Y as usize, YLag as usize],
            vec![C as usize, CLag as usize],
            vec![I as usize, ILag as usize],
            vec![W as usize, WLag as usize],
            vec![Pi as usize],
            vec![L as usize],
            vec![R as usize],
        ];
        for (got, want) in touched.iter().zip(expected.iter()) {
            let mut want = want.clone();
            want.sort();
            assert_eq!(got, &want);
        }
    }

    #[test]
    fn phillips_curve_without_indexation_is_forward_looking() {
        let theta = EstimatedVector::posterior_mode().with(Param::IotaP, 0.0);
        let (m, _) = build(&theta);
        // Phillips curve is the tenth equation.
        assert_eq!(m.gamma1[(9, State::Pi as usize)], 0.0);
        let theta = EstimatedVector::posterior_mode();
        let (m, _) = build(&theta);
        assert!(m.gamma1[(9, State::Pi as usize)] > 0.0);
    }

    #[test]
    fn rigid_utilization_pins_z() {
        let theta = EstimatedVector::posterior_mode().with(Param::Psi, 1.0);
        let full = expand_params(&theta);
        assert_eq!(full.coef.z1, 0.0);
        let (m, _) = build_system(&full);
        // Utilization row reads z_t = 0.
        let row = m.gamma0.row(6);
        assert_eq!(row[State::Z as usize], 1.0);
        assert_eq!(row.iter().filter(|v| **v != 0.0).count(), 1);
        assert!(m.shock_loading.row(6).iter().all(|v| *v == 0.0));
    }

    #[test]
    fn zero_shock_sds_zero_b() {
        let mut theta = EstimatedVector::posterior_mode();
        for p in Param::SHOCK_SDS {
            theta.set(p, 0.0);
        }
        let (m, _) = build(&theta);
        assert!(m.shock_loading.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn euler_row_without_habit_and_log_utility() {
        let theta = EstimatedVector::posterior_mode()
            .with(Param::Habit, 0.0)
            .with(Param::SigmaC, 1.0);
        let (m, _) = build(&theta);
        assert_eq!(m.gamma1[(1, State::C as usize)], 0.0);
        assert_eq!(m.gamma0[(1, State::L as usize)], 0.0);
        assert_eq!(m.gamma0[(1, State::ExL as usize)], 0.0);
    }

    #[test]
    fn rebuild_is_bit_identical() {
        let full = expand_params(&EstimatedVector::sw_posterior_mode());
        let (a, oa) = build_system(&full);
        let (b, ob) = build_system(&full);
        assert_eq!(a, b);
        assert_eq!(oa, ob);
    }

    #[test]
    fn every_estimated_parameter_moves_the_system() {
        let base_theta = EstimatedVector::posterior_mode();
        let (base, base_obs) = build(&base_theta);
        for p in Param::ALL {
            let v = base_theta.get(p);
            let s = p.spec();
            let bumped = if v + 0.01 <= s.upper { v + 0.01 } else { v - 0.01 };
            let (m, obs) = build(&base_theta.clone().with(p, bumped));
            let changed = m.gamma0 != base.gamma0
                || m.gamma1 != base.gamma1
                || m.constant != base.constant
                || m.shock_loading != base.shock_loading
                || m.expectation_loading != base.expectation_loading
                || obs.z != base_obs.z
                || obs.mu != base_obs.mu;
            assert!(changed, "parameter {} is dead", p.name());
        }
    }
}
