//! Complex generalized Schur decomposition via LAPACK `zgges` and `ztgsen`.

use std::os::raw::{c_char, c_int};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

type Select = extern "C" fn(*const Complex64, *const Complex64) -> c_int;

extern "C" {
    fn zgges_(
        jobvsl: *const c_char,
        jobvsr: *const c_char,
        sort: *const c_char,
        selctg: Option<Select>,
        n: *const c_int,
        a: *mut Complex64,
        lda: *const c_int,
        b: *mut Complex64,
        ldb: *const c_int,
        sdim: *mut c_int,
        alpha: *mut Complex64,
        beta: *mut Complex64,
        vsl: *mut Complex64,
        ldvsl: *const c_int,
        vsr: *mut Complex64,
        ldvsr: *const c_int,
        work: *mut Complex64,
        lwork: *const c_int,
        rwork: *mut f64,
        bwork: *mut c_int,
        info: *mut c_int,
        len_jobvsl: usize,
        len_jobvsr: usize,
        len_sort: usize,
    );

    fn ztgsen_(
        ijob: *const c_int,
        wantq: *const c_int,
        wantz: *const c_int,
        select: *const c_int,
        n: *const c_int,
        a: *mut Complex64,
        lda: *const c_int,
        b: *mut Complex64,
        ldb: *const c_int,
        alpha: *mut Complex64,
        beta: *mut Complex64,
        q: *mut Complex64,
        ldq: *const c_int,
        z: *mut Complex64,
        ldz: *const c_int,
        m: *mut c_int,
        pl: *mut f64,
        pr: *mut f64,
        dif: *mut f64,
        work: *mut Complex64,
        lwork: *const c_int,
        iwork: *mut c_int,
        liwork: *const c_int,
        info: *mut c_int,
    );
}

/// Factors with `Q·S·Zᴴ = A` and `Q·T·Zᴴ = B`, `S` and `T` upper triangular.
#[derive(Debug, Clone)]
pub struct Qz {
    pub s: DMatrix<Complex64>,
    pub t: DMatrix<Complex64>,
    pub q: DMatrix<Complex64>,
    pub z: DMatrix<Complex64>,
}

fn dim(n: usize) -> Result<c_int> {
    c_int::try_from(n).map_err(|_| Error::Dimension(format!("matrix order {n} too large")))
}

/// Complex QZ factorization of the pencil `(a, b)`.
pub fn qz(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<Qz> {
    let n = a.nrows();
    if a.ncols() != n || b.shape() != (n, n) {
        return Err(Error::Dimension(format!(
            "qz needs square matrices of equal order, got {:?} and {:?}",
            a.shape(),
            b.shape()
        )));
    }
    let mut s = a.map(|v| Complex64::new(v, 0.0));
    let mut t = b.map(|v| Complex64::new(v, 0.0));
    let mut q = DMatrix::zeros(n, n);
    let mut z = DMatrix::zeros(n, n);
    if n == 0 {
        return Ok(Qz { s, t, q, z });
    }
    let nn = dim(n)?;
    let ld = nn.max(1);
    let mut alpha = vec![Complex64::default(); n];
    let mut beta = vec![Complex64::default(); n];
    let mut rwork = vec![0.0; 8 * n];
    let mut bwork = vec![0 as c_int; n];
    let mut sdim = 0;
    let mut info = 0;
    let v = b'V' as c_char;
    let no = b'N' as c_char;

    let call = |s: &mut DMatrix<Complex64>,
                t: &mut DMatrix<Complex64>,
                q: &mut DMatrix<Complex64>,
                z: &mut DMatrix<Complex64>,
                alpha: &mut [Complex64],
                beta: &mut [Complex64],
                rwork: &mut [f64],
                bwork: &mut [c_int],
                sdim: &mut c_int,
                info: &mut c_int,
                work: &mut [Complex64],
                lwork: c_int| unsafe {
        zgges_(
            &v,
            &v,
            &no,
            None,
            &nn,
            s.as_mut_ptr(),
            &ld,
            t.as_mut_ptr(),
            &ld,
            sdim,
            alpha.as_mut_ptr(),
            beta.as_mut_ptr(),
            q.as_mut_ptr(),
            &ld,
            z.as_mut_ptr(),
            &ld,
            work.as_mut_ptr(),
            &lwork,
            rwork.as_mut_ptr(),
            bwork.as_mut_ptr(),
            info,
            1,
            1,
            1,
        )
    };

    let mut query = [Complex64::default()];
    call(
        &mut s, &mut t, &mut q, &mut z, &mut alpha, &mut beta, &mut rwork, &mut bwork,
        &mut sdim, &mut info, &mut query, -1,
    );
    if info != 0 {
        return Err(Error::DecompFail(format!("zgges workspace query, info = {info}")));
    }
    let lwork = (query[0].re as usize).max(2 * n).max(1);
    let mut work = vec![Complex64::default(); lwork];
    call(
        &mut s, &mut t, &mut q, &mut z, &mut alpha, &mut beta, &mut rwork, &mut bwork,
        &mut sdim, &mut info, &mut work, dim(lwork)?,
    );
    if info != 0 {
        return Err(Error::DecompFail(format!("zgges failed, info = {info}")));
    }
    Ok(Qz { s, t, q, z })
}

/// Reorder so that the diagonal pairs flagged in `select` lead.
pub fn reorder(f: &mut Qz, select: &[bool]) -> Result<()> {
    let n = f.s.nrows();
    if select.len() != n {
        return Err(Error::Dimension(format!(
            "selection has {} entries for order {n}",
            select.len()
        )));
    }
    if n == 0 {
        return Ok(());
    }
    let nn = dim(n)?;
    let ld = nn.max(1);
    let sel: Vec<c_int> = select.iter().map(|&b| b as c_int).collect();
    let mut alpha = vec![Complex64::default(); n];
    let mut beta = vec![Complex64::default(); n];
    let mut m = 0;
    let (mut pl, mut pr) = (0.0, 0.0);
    let mut dif = [0.0; 2];
    let lwork = dim(n.max(1))?;
    let mut work = vec![Complex64::default(); n.max(1)];
    let liwork = dim(n.max(1) + 2)?;
    let mut iwork = vec![0 as c_int; n.max(1) + 2];
    let mut info = 0;
    let ijob = 0;
    let yes = 1;
    unsafe {
        ztgsen_(
            &ijob,
            &yes,
            &yes,
            sel.as_ptr(),
            &nn,
            f.s.as_mut_ptr(),
            &ld,
            f.t.as_mut_ptr(),
            &ld,
            alpha.as_mut_ptr(),
            beta.as_mut_ptr(),
            f.q.as_mut_ptr(),
            &ld,
            f.z.as_mut_ptr(),
            &ld,
            &mut m,
            &mut pl,
            &mut pr,
            dif.as_mut_ptr(),
            work.as_mut_ptr(),
            &lwork,
            iwork.as_mut_ptr(),
            &liwork,
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::DecompFail(format!("ztgsen reordering failed, info = {info}")));
    }
    let wanted = select.iter().filter(|&&b| b).count();
    if m as usize != wanted {
        return Err(Error::DecompFail(format!(
            "ztgsen moved {m} eigenvalues, expected {wanted}"
        )));
    }
    Ok(())
}
