//! Solution of linear rational-expectations systems
//! `Γ0 z_t = Γ1 z_{t-1} + A + B ε_t + C η_t` by the generalized Schur method.

mod dump;
mod qz;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::state_space::eig_iter_cap;

pub use dump::{read_labeled_csv, write_labeled_csv};
pub use qz::{qz, reorder, Qz};

type CMat = DMatrix<Complex64>;

/// The structural system handed to [`gensys`].
#[derive(Debug, Clone, PartialEq)]
pub struct LinearREModel {
    pub gamma0: DMatrix<f64>,
    pub gamma1: DMatrix<f64>,
    /// Constant `A`.
    pub constant: DVector<f64>,
    /// Loading `B` on exogenous innovations.
    pub shock_loading: DMatrix<f64>,
    /// Loading `C` on expectational errors.
    pub expectation_loading: DMatrix<f64>,
    pub state_labels: Vec<String>,
    pub shock_labels: Vec<String>,
}

impl LinearREModel {
    pub fn n_states(&self) -> usize {
        self.gamma0.nrows()
    }

    fn check(&self) -> Result<()> {
        let n = self.gamma0.nrows();
        let ok = self.gamma0.ncols() == n
            && self.gamma1.shape() == (n, n)
            && self.constant.len() == n
            && self.shock_loading.nrows() == n
            && self.expectation_loading.nrows() == n;
        if ok {
            Ok(())
        } else {
            Err(Error::Dimension(format!(
                "inconsistent system: Γ0 {:?}, Γ1 {:?}, A {}, B {:?}, C {:?}",
                self.gamma0.shape(),
                self.gamma1.shape(),
                self.constant.len(),
                self.shock_loading.shape(),
                self.expectation_loading.shape()
            )))
        }
    }
}

/// Outcome of an existence or uniqueness test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EuFlag {
    Yes,
    No,
    /// The rank decision fell too close to the tolerance to call.
    Indeterminate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    /// Generalized eigenvalues with modulus below `div` count as stable.
    pub div: f64,
    /// Relative singular-value tolerance for rank decisions.
    pub rank_tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            div: 1.01,
            rank_tol: 1e-6,
        }
    }
}

/// `z_t = d + T z_{t-1} + H ε_t`.
#[derive(Debug, Clone, PartialEq)]
pub struct SolvedTransition {
    pub d: DVector<f64>,
    pub t: DMatrix<f64>,
    pub h: DMatrix<f64>,
    pub existence: EuFlag,
    pub uniqueness: EuFlag,
    pub n_unstable: usize,
    /// Moduli of the generalized eigenvalues in the order of the reordered Schur form.
    pub roots: Vec<f64>,
}

impl SolvedTransition {
    pub fn is_determinate(&self) -> bool {
        self.existence == EuFlag::Yes && self.uniqueness == EuFlag::Yes
    }

    /// Error describing a non-(yes, yes) outcome, `None` when determinate.
    pub fn eu_error(&self) -> Option<Error> {
        (!self.is_determinate()).then(|| Error::NoUniqueSolution {
            existence: format!("{:?}", self.existence).to_lowercase(),
            uniqueness: format!("{:?}", self.uniqueness).to_lowercase(),
        })
    }
}

fn complex(m: &DMatrix<f64>) -> CMat {
    m.map(|v| Complex64::new(v, 0.0))
}

struct Svd {
    u: CMat,
    sv: Vec<f64>,
    v: CMat,
    all: Vec<f64>,
}

/// Thin SVD restricted to singular values above `rel_tol · σ_max`.
fn truncated_svd(m: &CMat, rel_tol: f64) -> Result<Svd> {
    let (r, c) = m.shape();
    if r == 0 || c == 0 {
        return Ok(Svd {
            u: CMat::zeros(r, 0),
            sv: vec![],
            v: CMat::zeros(c, 0),
            all: vec![],
        });
    }
    let svd = m
        .clone()
        .try_svd(true, true, f64::EPSILON, eig_iter_cap(r.max(c)))
        .ok_or_else(|| Error::DecompFail("singular value decomposition did not converge".into()))?;
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested Vᴴ");
    let all: Vec<f64> = svd.singular_values.iter().copied().collect();
    let smax = all.iter().cloned().fold(0.0, f64::max);
    let cutoff = (rel_tol * smax).max(f64::MIN_POSITIVE);
    let keep: Vec<usize> = (0..all.len()).filter(|&i| all[i] > cutoff).collect();
    let u = u.select_columns(&keep);
    let v = v_t.select_rows(&keep).adjoint();
    let sv = keep.iter().map(|&i| all[i]).collect();
    Ok(Svd { u, sv, v, all })
}

fn in_band(x: f64, threshold: f64) -> bool {
    x > threshold / 100.0 && x < threshold * 100.0
}

/// Singular values that sit near the relative rank cutoff.
fn rank_ambiguous(s: &Svd, rel_tol: f64) -> bool {
    let smax = s.all.iter().cloned().fold(0.0, f64::max);
    smax > 0.0 && s.all.iter().any(|&x| in_band(x, rel_tol * smax))
}

fn diag(v: &[f64]) -> CMat {
    CMat::from_diagonal(&DVector::from_iterator(
        v.len(),
        v.iter().map(|&x| Complex64::new(x, 0.0)),
    ))
}

/// Scale each equation so its largest structural coefficient is a power of
/// two near one. Rank decisions then do not depend on how rows were written.
fn equilibrate(model: &LinearREModel) -> LinearREModel {
    let mut m = model.clone();
    for i in 0..m.n_states() {
        let big = m
            .gamma0
            .row(i)
            .amax()
            .max(m.gamma1.row(i).amax())
            .max(m.expectation_loading.row(i).amax());
        if big == 0.0 || !big.is_finite() {
            continue;
        }
        let k = 2f64.powi(-big.log2().round() as i32);
        m.gamma0.row_mut(i).scale_mut(k);
        m.gamma1.row_mut(i).scale_mut(k);
        m.constant[i] *= k;
        m.shock_loading.row_mut(i).scale_mut(k);
        m.expectation_loading.row_mut(i).scale_mut(k);
    }
    m
}

/// Solve `model` with the default rank tolerance and the given `div`.
pub fn gensys(model: &LinearREModel, div: f64) -> Result<SolvedTransition> {
    gensys_with(
        model,
        &SolverConfig {
            div,
            ..SolverConfig::default()
        },
    )
}

pub fn gensys_with(model: &LinearREModel, cfg: &SolverConfig) -> Result<SolvedTransition> {
    model.check()?;
    if !(cfg.div > 1.0) {
        return Err(Error::Invalid(format!("div must exceed 1, got {}", cfg.div)));
    }
    let equilibrated = equilibrate(model);
    let model = &equilibrated;
    let n = model.n_states();
    let k = model.shock_loading.ncols();
    let tol = cfg.rank_tol;
    let scale = model.gamma0.norm() + model.gamma1.norm();
    let realsmall = 1e-10 * scale.max(f64::MIN_POSITIVE);

    let mut f = qz(&model.gamma0, &model.gamma1)?;
    let mut stable = vec![false; n];
    for i in 0..n {
        let a = f.s[(i, i)].norm();
        let b = f.t[(i, i)].norm();
        if a < realsmall && b < realsmall {
            return Err(Error::SingularPencil { index: i });
        }
        stable[i] = b < cfg.div * a;
    }
    let n_stable = stable.iter().filter(|&&s| s).count();
    let nu = n - n_stable;
    reorder(&mut f, &stable)?;
    let roots: Vec<f64> = (0..n)
        .map(|i| {
            let a = f.s[(i, i)].norm();
            let b = f.t[(i, i)].norm();
            if a == 0.0 {
                f64::INFINITY
            } else {
                b / a
            }
        })
        .collect();
    for (i, r) in roots.iter().enumerate() {
        if (i < n_stable) != (*r < cfg.div) {
            return Err(Error::DecompFail(format!(
                "reordering left root {r} at position {i} on the wrong side of div"
            )));
        }
    }

    // Sims' q is the conjugate transpose of the LAPACK left factor.
    let q = f.q.adjoint();
    let q1 = q.rows(0, n_stable).into_owned();
    let q2 = q.rows(n_stable, nu).into_owned();
    let pi = complex(&model.expectation_loading);
    let psi = complex(&model.shock_loading);
    let c = complex(&DMatrix::from_column_slice(n, 1, model.constant.as_slice()));

    let eta = truncated_svd(&(&q2 * &pi), tol)?;
    let mut forcing = CMat::zeros(nu, k + 1);
    forcing.columns_mut(0, k).copy_from(&(&q2 * &psi));
    forcing.columns_mut(k, 1).copy_from(&(&q2 * &c));
    let zwt = truncated_svd(&forcing, tol)?;

    let threshold = tol * n as f64;
    let existence = if zwt.sv.is_empty() {
        if rank_ambiguous(&zwt, tol) {
            EuFlag::Indeterminate
        } else {
            EuFlag::Yes
        }
    } else {
        let resid = (&zwt.u - &eta.u * (eta.u.adjoint() * &zwt.u)).norm();
        if in_band(resid, threshold) || rank_ambiguous(&eta, tol) || rank_ambiguous(&zwt, tol) {
            EuFlag::Indeterminate
        } else if resid < threshold {
            EuFlag::Yes
        } else {
            EuFlag::No
        }
    };

    let eta1 = truncated_svd(&(&q1 * &pi), tol)?;
    let uniqueness = if eta1.sv.is_empty() {
        if rank_ambiguous(&eta1, tol) {
            EuFlag::Indeterminate
        } else {
            EuFlag::Yes
        }
    } else {
        let loose = &eta1.v - &eta.v * (eta.v.adjoint() * &eta1.v);
        let sv = loose.singular_values();
        if sv.iter().any(|&x| in_band(x, threshold)) || rank_ambiguous(&eta1, tol) {
            EuFlag::Indeterminate
        } else if sv.iter().any(|&x| x > threshold) {
            EuFlag::No
        } else {
            EuFlag::Yes
        }
    };

    // tmat = [I, -(ueta·deta⁻¹·vetaᴴ·veta1·deta1·ueta1ᴴ)ᴴ]
    let inv_deta: Vec<f64> = eta.sv.iter().map(|s| 1.0 / s).collect();
    let coupling = if eta.sv.is_empty() || eta1.sv.is_empty() {
        CMat::zeros(nu, n_stable)
    } else {
        &eta.u * diag(&inv_deta) * eta.v.adjoint() * &eta1.v * diag(&eta1.sv) * eta1.u.adjoint()
    };
    let mut tmat = CMat::zeros(n_stable, n);
    tmat.columns_mut(0, n_stable)
        .copy_from(&CMat::identity(n_stable, n_stable));
    tmat.columns_mut(n_stable, nu).copy_from(&(-coupling.adjoint()));

    let mut g0 = CMat::zeros(n, n);
    g0.rows_mut(0, n_stable).copy_from(&(&tmat * &f.s));
    g0.view_mut((n_stable, n_stable), (nu, nu))
        .copy_from(&CMat::identity(nu, nu));
    let mut g1 = CMat::zeros(n, n);
    g1.rows_mut(0, n_stable).copy_from(&(&tmat * &f.t));

    let lu = g0.lu();
    let singular = |what: &str| {
        Error::DecompFail(format!("{what} is singular in the solved system"))
    };
    let g1 = lu.solve(&g1).ok_or_else(|| singular("G0"))?;
    let mut rhs = CMat::zeros(n, k);
    rhs.rows_mut(0, n_stable).copy_from(&(&tmat * &q * &psi));
    let impact = lu.solve(&rhs).ok_or_else(|| singular("G0"))?;

    let d = if model.constant.iter().all(|&v| v == 0.0) {
        DVector::zeros(n)
    } else {
        let mut rhs = CMat::zeros(n, 1);
        rhs.rows_mut(0, n_stable).copy_from(&(&tmat * &q * &c));
        if nu > 0 {
            let a22 = f.s.view((n_stable, n_stable), (nu, nu));
            let b22 = f.t.view((n_stable, n_stable), (nu, nu));
            let w = (a22 - b22)
                .lu()
                .solve(&(&q2 * &c))
                .ok_or_else(|| singular("unstable block of (Γ0 - Γ1)"))?;
            rhs.rows_mut(n_stable, nu).copy_from(&w);
        }
        let cc = lu.solve(&rhs).ok_or_else(|| singular("G0"))?;
        (&f.z * cc).column(0).map(|v| v.re)
    };

    let t = (&f.z * g1 * f.z.adjoint()).map(|v| v.re);
    let h = (&f.z * impact).map(|v| v.re);

    Ok(SolvedTransition {
        d,
        t,
        h,
        existence,
        uniqueness,
        n_unstable: nu,
        roots,
    })
}
