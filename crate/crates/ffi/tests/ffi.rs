use std::ffi::CStr;
use std::path::Path;
use std::ptr;

use swlab::state_space::{entropy_rate, kalman_nll, simulate};
use swlab::sw_model::{state_space, EstimatedVector, Param};
use swlab_ffi::*;

fn mode() -> Vec<f64> {
    let mut theta = vec![0.0; swlab_param_count()];
    assert_eq!(unsafe { swlab_posterior_mode(theta.as_mut_ptr(), theta.len()) }, SwlabStatus::Ok);
    theta
}

fn new_model(theta: &[f64]) -> (SwlabStatus, *mut SwlabModel) {
    let mut m = ptr::null_mut();
    let st = unsafe { swlab_model_new(theta.as_ptr(), theta.len(), &mut m) };
    (st, m)
}

fn last_error() -> String {
    let p = swlab_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn parameter_names_match_library() {
    assert_eq!(swlab_param_count(), 36);
    for (i, p) in Param::ALL.iter().enumerate() {
        let name = unsafe { CStr::from_ptr(swlab_param_name(i)) };
        assert_eq!(name.to_str().unwrap(), p.name());
    }
    assert!(swlab_param_name(36).is_null());
    assert_eq!(mode(), EstimatedVector::posterior_mode().values());
    let v = unsafe { CStr::from_ptr(swlab_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn model_calls_match_library() {
    let theta = mode();
    let (st, m) = new_model(&theta);
    assert_eq!(st, SwlabStatus::Ok);
    assert!(!m.is_null());

    let ss = state_space(&EstimatedVector::posterior_mode(), &Default::default()).unwrap();
    assert_eq!(unsafe { swlab_model_n_states(m) }, ss.n_states());

    let mut h = 0.0;
    assert_eq!(unsafe { swlab_model_entropy_rate(m, &mut h) }, SwlabStatus::Ok);
    assert_eq!(h, entropy_rate(&ss).unwrap());

    let n = 40;
    let k = swlab_n_obs();
    let mut data = vec![0.0; n * k];
    assert_eq!(unsafe { swlab_model_simulate(m, n, 100, 5, data.as_mut_ptr()) }, SwlabStatus::Ok);
    let panel = simulate(&ss, n, 100, 5).unwrap();
    for i in 0..n {
        for j in 0..k {
            assert_eq!(data[i * k + j], panel.values[(i, j)]);
        }
    }

    let mut nll = 0.0;
    assert_eq!(unsafe { swlab_model_nll(m, data.as_ptr(), n, &mut nll) }, SwlabStatus::Ok);
    assert_eq!(nll, kalman_nll(&ss, &panel).unwrap().0);

    let mut pen = 0.0;
    let st = unsafe { swlab_penalized_nll(theta.as_ptr(), theta.len(), data.as_ptr(), n, &mut pen) };
    assert_eq!(st, SwlabStatus::Ok);
    let prior = swlab::sw_model::prior_log_density(&EstimatedVector::posterior_mode());
    approx::assert_relative_eq!(pen, nll - prior, max_relative = 1e-12);

    let mut back = vec![0.0; theta.len()];
    assert_eq!(unsafe { swlab_model_theta(m, back.as_mut_ptr(), back.len()) }, SwlabStatus::Ok);
    assert_eq!(back, theta);

    unsafe { swlab_model_free(m) };
}

#[test]
fn error_codes() {
    let (st, m) = new_model(&[0.5; 3]);
    assert_eq!(st, SwlabStatus::DataError);
    assert!(m.is_null());
    assert!(last_error().contains("36"));

    let mut theta = EstimatedVector::posterior_mode();
    theta.set(Param::RPi, 1.0);
    theta.set(Param::RY, 0.0);
    theta.set(Param::RDy, 0.0);
    let (st, m) = new_model(theta.values());
    assert_eq!(st, SwlabStatus::NumericalError);
    assert!(m.is_null());
    assert!(!last_error().is_empty());

    let mut pen = 0.0;
    let data = vec![0.0; 7 * 3];
    let st = unsafe { swlab_penalized_nll(theta.values().as_ptr(), 36, data.as_ptr(), 3, &mut pen) };
    assert_eq!(st, SwlabStatus::Ok);
    assert!(pen >= 1e10);

    let mut h = 0.0;
    assert_eq!(unsafe { swlab_model_entropy_rate(ptr::null(), &mut h) }, SwlabStatus::NullPointer);
    assert_eq!(unsafe { swlab_posterior_mode(ptr::null_mut(), 36) }, SwlabStatus::NullPointer);
    let mut short = [0.0; 4];
    assert_eq!(unsafe { swlab_posterior_mode(short.as_mut_ptr(), 4) }, SwlabStatus::InvalidArgument);
    let nan = vec![f64::NAN; 7];
    let good = mode();
    let (_, m) = new_model(&good);
    assert_eq!(unsafe { swlab_model_nll(m, nan.as_ptr(), 1, &mut h) }, SwlabStatus::InvalidArgument);
    unsafe { swlab_model_free(m) };
    unsafe { swlab_model_free(ptr::null_mut()) };

    let name = unsafe { CStr::from_ptr(swlab_status_name(SwlabStatus::NumericalError)) };
    assert_eq!(name.to_str().unwrap(), "numerical error");
}

#[test]
fn header_is_valid_c() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/swlab.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for f in [
        "swlab_model_new", "swlab_model_free", "swlab_model_entropy_rate", "swlab_model_nll",
        "swlab_model_simulate", "swlab_penalized_nll", "swlab_last_error", "SWLAB_STATUS_NUMERICAL_ERROR",
    ] {
        assert!(text.contains(f), "{f} missing from header");
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("use.c");
    std::fs::write(
        &src,
        "#include \"swlab.h\"\nint main(void) { SwlabModel *m = 0; double h; return swlab_model_entropy_rate(m, &h) == SWLAB_STATUS_NULL_POINTER ? 0 : 1; }\n",
    )
    .unwrap();
    let out = std::process::Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(header.parent().unwrap())
        .arg(&src)
        .output()
        .expect("run cc");
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
