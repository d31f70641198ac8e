fn main() {
    // OpenBLAS ships the LAPACK routines used by the QZ solver.
    println!("cargo:rustc-link-lib=openblas");
}
