//! Prior families and the prior log-density of the estimated vector.
//!
//! Moment matching: gaussian uses (mean, stdev) directly; beta and gamma
//! are matched to the first two moments. The inverse gamma follows the
//! (s, nu) convention of Smets and Wouters' estimation code, with density
//!
//! ```text
//! f(x; s, nu) = 2 / Gamma(nu/2) * (s/2)^(nu/2) * x^-(nu+1) * exp(-s / (2 x^2))
//! ```
//!
//! where (s, nu) are chosen so that E[x] and sd[x] equal the table's
//! "mean" and "stdev" entries.

use rand::Rng;
use rand_distr::{Beta as BetaDist, Distribution, Gamma as GammaDist, Normal};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use super::params::{estimated_specs, EstimatedVector, Param, ParamSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PriorFamily {
    Gaussian,
    Beta,
    Gamma,
    InverseGamma,
    None,
}

impl PriorFamily {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "gaussian" => PriorFamily::Gaussian,
            "beta" => PriorFamily::Beta,
            "gamma" => PriorFamily::Gamma,
            "inverse-gamma" => PriorFamily::InverseGamma,
            "none" => PriorFamily::None,
            _ => return None,
        })
    }
}

/// A prior with its shape parameters resolved.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Prior {
    Gaussian { mean: f64, sd: f64 },
    Beta { a: f64, b: f64 },
    Gamma { shape: f64, scale: f64 },
    InverseGamma { s: f64, nu: f64 },
}

impl Prior {
    pub fn from_moments(family: PriorFamily, mean: f64, sd: f64) -> Option<Self> {
        Some(match family {
            PriorFamily::Gaussian => Prior::Gaussian { mean, sd },
            PriorFamily::Beta => {
                let k = mean * (1.0 - mean) / (sd * sd) - 1.0;
                Prior::Beta {
                    a: mean * k,
                    b: (1.0 - mean) * k,
                }
            }
            PriorFamily::Gamma => Prior::Gamma {
                shape: (mean / sd).powi(2),
                scale: sd * sd / mean,
            },
            PriorFamily::InverseGamma => {
                let (s, nu) = inverse_gamma_spec(mean, sd);
                Prior::InverseGamma { s, nu }
            }
            PriorFamily::None => return None,
        })
    }

    pub fn from_spec(spec: &ParamSpec) -> Option<Self> {
        Self::from_moments(spec.prior_family, spec.prior_mean, spec.prior_stdev)
    }

    /// Untruncated log-density. `-inf` outside the family's support.
    pub fn log_density(&self, x: f64) -> f64 {
        match *self {
            Prior::Gaussian { mean, sd } => {
                let z = (x - mean) / sd;
                -0.5 * (2.0 * std::f64::consts::PI * sd * sd).ln() - 0.5 * z * z
            }
            Prior::Beta { a, b } => {
                if x <= 0.0 || x >= 1.0 {
                    return f64::NEG_INFINITY;
                }
                (a - 1.0) * x.ln() + (b - 1.0) * (1.0 - x).ln()
                    - (ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b))
            }
            Prior::Gamma { shape, scale } => {
                if x <= 0.0 {
                    return f64::NEG_INFINITY;
                }
                (shape - 1.0) * x.ln() - x / scale - ln_gamma(shape) - shape * scale.ln()
            }
            Prior::InverseGamma { s, nu } => {
                if x <= 0.0 {
                    return f64::NEG_INFINITY;
                }
                std::f64::consts::LN_2 - ln_gamma(nu / 2.0) - (nu / 2.0) * (2.0 / s).ln()
                    - (nu + 1.0) * x.ln()
                    - s / (2.0 * x * x)
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Prior::Gaussian { mean, sd } => Normal::new(mean, sd).expect("sd > 0").sample(rng),
            Prior::Beta { a, b } => BetaDist::new(a, b).expect("a, b > 0").sample(rng),
            Prior::Gamma { shape, scale } => {
                GammaDist::new(shape, scale).expect("shape, scale > 0").sample(rng)
            }
            Prior::InverseGamma { s, nu } => {
                // 1/x^2 ~ Gamma(nu/2, scale 2/s)
                let g = GammaDist::new(nu / 2.0, 2.0 / s)
                    .expect("nu, s > 0")
                    .sample(rng);
                1.0 / g.sqrt()
            }
        }
    }
}

/// Solve for (s, nu) of the inverse gamma on the standard deviation so that
/// its mean and standard deviation match `(mean, sd)`, by bisection on nu.
pub fn inverse_gamma_spec(mean: f64, sd: f64) -> (f64, f64) {
    let mu2 = mean * mean;
    let sigma2 = sd * sd;
    let err = |nu: f64| {
        2.0 * mu2 * (2.0 * ln_gamma(nu / 2.0)).exp()
            - (sigma2 + mu2) * (nu - 2.0) * (2.0 * ln_gamma((nu - 1.0) / 2.0)).exp()
    };
    let mut nu = (2.0 * (2.0 + mu2 / sigma2)).sqrt();
    let mut nu2 = 2.0 * nu;
    let mut nu1 = 2.0;
    let mut e = err(nu);
    while (nu2 - nu1).abs() > 1e-12 {
        if e > 0.0 {
            nu1 = nu;
            if nu >= nu2 {
                nu2 = 2.0 * nu;
            }
        } else {
            nu2 = nu;
        }
        nu = 0.5 * (nu1 + nu2);
        e = err(nu);
    }
    let s = (sigma2 + mu2) * (nu - 2.0);
    (s, nu)
}

/// Resolved priors for the 36 estimated parameters.
pub fn estimated_priors() -> &'static [Prior] {
    static PRIORS: std::sync::OnceLock<Vec<Prior>> = std::sync::OnceLock::new();
    PRIORS.get_or_init(|| {
        estimated_specs()
            .iter()
            .map(|s| Prior::from_spec(s).expect("estimated parameters carry a prior"))
            .collect()
    })
}

/// Sum of the 36 prior log-densities; `-inf` if any value lies outside its
/// `[lower, upper]` box. Densities are not renormalized for truncation.
pub fn prior_log_density(theta: &EstimatedVector) -> f64 {
    let mut total = 0.0;
    for (&p, prior) in Param::ALL.iter().zip(estimated_priors()) {
        let x = theta.get(p);
        let spec = p.spec();
        if !(x.is_finite() && x >= spec.lower && x <= spec.upper) {
            return f64::NEG_INFINITY;
        }
        total += prior.log_density(x);
    }
    total
}

/// Draw from the prior, rejecting draws outside the bounds. Falls back to
/// the prior mean for a coordinate after `max_tries` rejections.
pub fn sample_prior<R: Rng + ?Sized>(rng: &mut R, max_tries: usize) -> EstimatedVector {
    let values = Param::ALL
        .iter()
        .zip(estimated_priors())
        .map(|(&p, prior)| {
            let spec = p.spec();
            (0..max_tries)
                .map(|_| prior.sample(rng))
                .find(|x| x.is_finite() && *x > spec.lower && *x < spec.upper)
                .unwrap_or(spec.prior_mean)
        })
        .collect();
    EstimatedVector::new(values).expect("36 values")
}
