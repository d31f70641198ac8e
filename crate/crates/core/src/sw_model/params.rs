//! Parameter table, estimated vector and the expansion to the full
//! 59-entry parameter set.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::prior::PriorFamily;
use crate::error::{Error, Result};

/// The parameter table shipped with the crate.
pub const PARAMETER_TABLE_CSV: &str = include_str!("../../resources/sw_parameters.csv");

pub const N_ESTIMATED: usize = 36;
pub const N_FIXED: usize = 5;
pub const N_DERIVED: usize = 18;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Estimated,
    Fixed,
    Derived,
}

/// One row of the parameter table.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamSpec {
    pub name: String,
    pub role: Role,
    pub prior_family: PriorFamily,
    pub prior_mean: f64,
    pub prior_stdev: f64,
    pub lower: f64,
    pub upper: f64,
    /// Posterior mode reported alongside the priors (fixed value for fixed rows).
    pub posterior_mode: f64,
    /// Smets and Wouters' published posterior mode.
    pub sw_posterior_mode: f64,
}

#[derive(Debug, Deserialize)]
struct Row {
    name: String,
    role: Role,
    prior_family: String,
    prior_mean: Option<f64>,
    prior_stdev: Option<f64>,
    lower: Option<f64>,
    upper: Option<f64>,
    posterior_mode: Option<f64>,
    sw_posterior_mode: Option<f64>,
}

fn parse_table(text: &str) -> Result<Vec<ParamSpec>> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let mut specs = Vec::new();
    for row in reader.deserialize::<Row>() {
        let row = row?;
        let family = PriorFamily::parse(&row.prior_family).ok_or_else(|| Error::Parse {
            path: "sw_parameters.csv".into(),
            message: format!("unknown prior family {:?}", row.prior_family),
        })?;
        specs.push(ParamSpec {
            name: row.name,
            role: row.role,
            prior_family: family,
            prior_mean: row.prior_mean.unwrap_or(f64::NAN),
            prior_stdev: row.prior_stdev.unwrap_or(f64::NAN),
            lower: row.lower.unwrap_or(f64::NAN),
            upper: row.upper.unwrap_or(f64::NAN),
            posterior_mode: row.posterior_mode.unwrap_or(f64::NAN),
            sw_posterior_mode: row.sw_posterior_mode.unwrap_or(f64::NAN),
        });
    }
    Ok(specs)
}

/// All 59 parameter specs in table order (estimated, fixed, derived).
pub fn param_table() -> &'static [ParamSpec] {
    static TABLE: OnceLock<Vec<ParamSpec>> = OnceLock::new();
    TABLE.get_or_init(|| parse_table(PARAMETER_TABLE_CSV).expect("shipped parameter table parses"))
}

/// The 36 estimated specs, in `Param` order.
pub fn estimated_specs() -> &'static [ParamSpec] {
    &param_table()[..N_ESTIMATED]
}

macro_rules! params {
    ($($variant:ident => $name:literal),* $(,)?) => {
        /// Estimated parameters, in the order of the parameter table.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        #[repr(usize)]
        pub enum Param { $($variant),* }

        impl Param {
            pub const ALL: [Param; N_ESTIMATED] = [$(Param::$variant),*];

            pub fn name(self) -> &'static str {
                match self { $(Param::$variant => $name),* }
            }
        }
    };
}

params! {
    SigmaA => "sigma_a",
    SigmaB => "sigma_b",
    SigmaG => "sigma_g",
    SigmaI => "sigma_i",
    SigmaR => "sigma_r",
    SigmaP => "sigma_p",
    SigmaW => "sigma_w",
    RhoA => "rho_a",
    RhoB => "rho_b",
    RhoG => "rho_g",
    RhoI => "rho_i",
    RhoR => "rho_r",
    RhoP => "rho_p",
    RhoW => "rho_w",
    MuP => "mu_p",
    MuW => "mu_w",
    Phi => "phi",
    SigmaC => "sigma_c",
    Habit => "h",
    XiW => "xi_w",
    SigmaL => "sigma_l",
    XiP => "xi_p",
    IotaW => "iota_w",
    IotaP => "iota_p",
    Psi => "psi",
    PhiP => "phi_p",
    RPi => "r_pi",
    Rho => "rho",
    RY => "r_y",
    RDy => "r_dy",
    PiBar => "pi_bar",
    BetaConst => "beta_const",
    LBar => "l_bar",
    GammaBar => "gamma_bar",
    RhoGa => "rho_ga",
    Alpha => "alpha",
}

impl Param {
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_name(name: &str) -> Option<Param> {
        Param::ALL.iter().copied().find(|p| p.name() == name)
    }

    pub fn spec(self) -> &'static ParamSpec {
        &estimated_specs()[self.index()]
    }

    /// The seven shock standard deviations, in shock order (a, b, g, i, r, p, w).
    pub const SHOCK_SDS: [Param; 7] = [
        Param::SigmaA,
        Param::SigmaB,
        Param::SigmaG,
        Param::SigmaI,
        Param::SigmaR,
        Param::SigmaP,
        Param::SigmaW,
    ];
}

/// The 36 estimated parameters, ordered as in the parameter table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatedVector {
    values: Vec<f64>,
}

impl EstimatedVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() != N_ESTIMATED {
            return Err(Error::Dimension(format!(
                "expected {N_ESTIMATED} estimated parameters, got {}",
                values.len()
            )));
        }
        Ok(Self { values })
    }

    /// The posterior mode column of the parameter table.
    pub fn posterior_mode() -> Self {
        Self {
            values: estimated_specs().iter().map(|s| s.posterior_mode).collect(),
        }
    }

    /// Smets and Wouters' published posterior mode.
    pub fn sw_posterior_mode() -> Self {
        Self {
            values: estimated_specs().iter().map(|s| s.sw_posterior_mode).collect(),
        }
    }

    pub fn prior_means() -> Self {
        Self {
            values: estimated_specs().iter().map(|s| s.prior_mean).collect(),
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn get(&self, p: Param) -> f64 {
        self.values[p.index()]
    }

    pub fn set(&mut self, p: Param, value: f64) {
        self.values[p.index()] = value;
    }

    pub fn with(mut self, p: Param, value: f64) -> Self {
        self.set(p, value);
        self
    }

    /// Parameters whose value lies outside `[lower, upper]` (or is not finite).
    pub fn out_of_support(&self) -> Vec<Param> {
        Param::ALL
            .iter()
            .copied()
            .filter(|&p| {
                let v = self.get(p);
                let s = p.spec();
                !(v.is_finite() && v >= s.lower && v <= s.upper)
            })
            .collect()
    }

    pub fn in_support(&self) -> bool {
        self.out_of_support().is_empty()
    }

    /// Sum of squared distances to the box, in bound-width units.
    pub fn bound_violation(&self) -> f64 {
        Param::ALL
            .iter()
            .map(|&p| {
                let s = p.spec();
                let v = self.get(p);
                if !v.is_finite() {
                    return 1.0e6;
                }
                let width = s.upper - s.lower;
                let excess = if v < s.lower {
                    s.lower - v
                } else if v > s.upper {
                    v - s.upper
                } else {
                    0.0
                };
                (excess / width).powi(2)
            })
            .sum()
    }

    /// Coordinates rescaled to `[0, 1]` by the parameter bounds.
    pub fn normalized(&self) -> Vec<f64> {
        Param::ALL
            .iter()
            .map(|&p| {
                let s = p.spec();
                (self.get(p) - s.lower) / (s.upper - s.lower)
            })
            .collect()
    }

    /// Name/value pairs in table order.
    pub fn named(&self) -> Vec<(&'static str, f64)> {
        Param::ALL.iter().map(|&p| (p.name(), self.get(p))).collect()
    }

    /// Build from name/value pairs; every estimated name must be present.
    pub fn from_named<'a, I>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (&'a str, f64)>,
    {
        let mut values = vec![f64::NAN; N_ESTIMATED];
        for (name, value) in pairs {
            match Param::from_name(name) {
                Some(p) => values[p.index()] = value,
                None => return Err(Error::Invalid(format!("unknown parameter {name:?}"))),
            }
        }
        if let Some(p) = Param::ALL.iter().find(|p| values[p.index()].is_nan()) {
            return Err(Error::Invalid(format!("parameter {:?} is missing", p.name())));
        }
        Ok(Self { values })
    }
}

/// Parameters fixed a priori.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FixedParams {
    /// Depreciation rate.
    pub delta: f64,
    /// Steady-state exogenous spending share of output.
    pub g_y: f64,
    /// Steady-state wage mark-up.
    pub lambda_w: f64,
    /// Kimball curvature in the goods market.
    pub eps_p: f64,
    /// Kimball curvature in the labor market.
    pub eps_w: f64,
}

impl FixedParams {
    pub fn from_table() -> Self {
        let get = |name: &str| {
            param_table()
                .iter()
                .find(|s| s.name == name && s.role == Role::Fixed)
                .map(|s| s.posterior_mode)
                .expect("fixed parameter present in table")
        };
        Self {
            delta: get("delta"),
            g_y: get("g_y"),
            lambda_w: get("lambda_w"),
            eps_p: get("eps_p"),
            eps_w: get("eps_w"),
        }
    }
}

/// The 18 steady-state quantities derived from the primitives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SteadyState {
    pub pi_star: f64,
    pub gamma: f64,
    pub beta: f64,
    pub lambda_p: f64,
    pub beta_bar: f64,
    pub r_star: f64,
    pub rk_star: f64,
    pub w_star: f64,
    pub ik_bar: f64,
    pub ik: f64,
    pub l_k: f64,
    pub k_y: f64,
    pub i_y: f64,
    pub c_y: f64,
    pub z_y: f64,
    pub whl_c: f64,
    pub wl_y: f64,
    /// Steady-state quarterly net nominal rate, in percent.
    pub r_bar: f64,
}

impl SteadyState {
    pub fn named(&self) -> [(&'static str, f64); N_DERIVED] {
        [
            ("pi_star", self.pi_star),
            ("gamma", self.gamma),
            ("beta", self.beta),
            ("lambda_p", self.lambda_p),
            ("beta_bar", self.beta_bar),
            ("r_star", self.r_star),
            ("rk_star", self.rk_star),
            ("w_star", self.w_star),
            ("ik_bar", self.ik_bar),
            ("ik", self.ik),
            ("l_k", self.l_k),
            ("k_y", self.k_y),
            ("i_y", self.i_y),
            ("c_y", self.c_y),
            ("z_y", self.z_y),
            ("whl_c", self.whl_c),
            ("wl_y", self.wl_y),
            ("r_bar", self.r_bar),
        ]
    }
}

/// Reduced-form coefficients of the log-linear equations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Coefficients {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub i1: f64,
    pub i2: f64,
    pub q1: f64,
    pub k1: f64,
    pub k2: f64,
    pub z1: f64,
    pub pi1: f64,
    pub pi2: f64,
    pub pi3: f64,
    pub w1: f64,
    pub w2: f64,
    pub w3: f64,
    pub w4: f64,
}

/// Estimated, fixed and derived parameters together with the reduced-form
/// coefficients they imply.
#[derive(Debug, Clone, PartialEq)]
pub struct FullParams {
    pub theta: EstimatedVector,
    pub fixed: FixedParams,
    pub steady: SteadyState,
    pub coef: Coefficients,
    /// Estimated parameters outside their bounds. Non-empty results are
    /// still expanded; the estimator turns them into a penalty.
    pub out_of_support: Vec<Param>,
}

impl FullParams {
    pub fn get(&self, p: Param) -> f64 {
        self.theta.get(p)
    }

    /// All 59 named values: estimated, fixed, then derived.
    pub fn named(&self) -> Vec<(&'static str, f64)> {
        let f = &self.fixed;
        let mut out = self.theta.named();
        out.extend([
            ("delta", f.delta),
            ("g_y", f.g_y),
            ("lambda_w", f.lambda_w),
            ("eps_p", f.eps_p),
            ("eps_w", f.eps_w),
        ]);
        out.extend(self.steady.named());
        out
    }

    pub fn shock_sds(&self) -> [f64; 7] {
        Param::SHOCK_SDS.map(|p| self.get(p))
    }
}

/// Expand the 36 estimated parameters into the full parameter set.
pub fn expand_params(theta: &EstimatedVector) -> FullParams {
    expand_with_fixed(theta, FixedParams::from_table())
}

pub fn expand_with_fixed(theta: &EstimatedVector, fixed: FixedParams) -> FullParams {
    use Param::*;
    let t = |p: Param| theta.get(p);
    let FixedParams {
        delta,
        g_y,
        lambda_w,
        eps_p,
        eps_w,
    } = fixed;

    let alpha = t(Alpha);
    let sigma_c = t(SigmaC);
    let phi_p = t(PhiP);

    let pi_star = 1.0 + t(PiBar) / 100.0;
    let gamma = 1.0 + t(GammaBar) / 100.0;
    let beta = 1.0 / (1.0 + t(BetaConst) / 100.0);
    let lambda_p = phi_p;
    let beta_bar = beta * gamma.powf(-sigma_c);
    let r_star = pi_star / beta_bar;
    let rk_star = 1.0 / beta_bar - (1.0 - delta);
    let w_star = (alpha.powf(alpha) * (1.0 - alpha).powf(1.0 - alpha)
        / (lambda_p * rk_star.powf(alpha)))
    .powf(1.0 / (1.0 - alpha));
    let ik_bar = 1.0 - (1.0 - delta) / gamma;
    let ik = ik_bar * gamma;
    let l_k = ((1.0 - alpha) / alpha) * (rk_star / w_star);
    let k_y = phi_p * l_k.powf(alpha - 1.0);
    let i_y = ik * k_y;
    let c_y = 1.0 - g_y - i_y;
    let z_y = rk_star * k_y;
    let whl_c = (1.0 / lambda_w) * (1.0 - alpha) / alpha * rk_star * k_y / c_y;
    let wl_y = 1.0 - rk_star * k_y;
    let r_bar = (r_star - 1.0) * 100.0;

    let steady = SteadyState {
        pi_star,
        gamma,
        beta,
        lambda_p,
        beta_bar,
        r_star,
        rk_star,
        w_star,
        ik_bar,
        ik,
        l_k,
        k_y,
        i_y,
        c_y,
        z_y,
        whl_c,
        wl_y,
        r_bar,
    };

    let habit = t(Habit) / gamma;
    // beta * gamma^(1 - sigma_c)
    let bg = beta_bar * gamma;
    let phi = t(Phi);
    let xi_p = t(XiP);
    let xi_w = t(XiW);
    let iota_p = t(IotaP);
    let iota_w = t(IotaW);
    let psi = t(Psi);

    let coef = Coefficients {
        c1: habit / (1.0 + habit),
        c2: (sigma_c - 1.0) * whl_c / (sigma_c * (1.0 + habit)),
        c3: (1.0 - habit) / (sigma_c * (1.0 + habit)),
        i1: 1.0 / (1.0 + bg),
        i2: 1.0 / ((1.0 + bg) * gamma * gamma * phi),
        q1: beta_bar * (1.0 - delta),
        k1: (1.0 - delta) / gamma,
        k2: (1.0 - (1.0 - delta) / gamma) * (1.0 + bg) * gamma * gamma * phi,
        z1: (1.0 - psi) / psi,
        pi1: iota_p / (1.0 + bg * iota_p),
        pi2: bg / (1.0 + bg * iota_p),
        pi3: 1.0 / (1.0 + bg * iota_p) * ((1.0 - bg * xi_p) * (1.0 - xi_p)
            / (xi_p * ((phi_p - 1.0) * eps_p + 1.0))),
        w1: 1.0 / (1.0 + bg),
        w2: (1.0 + bg * iota_w) / (1.0 + bg),
        w3: iota_w / (1.0 + bg),
        w4: 1.0 / (1.0 + bg) * ((1.0 - bg * xi_w) * (1.0 - xi_w)
            / (xi_w * ((lambda_w - 1.0) * eps_w + 1.0))),
    };

    FullParams {
        theta: theta.clone(),
        fixed,
        steady,
        coef,
        out_of_support: theta.out_of_support(),
    }
}
