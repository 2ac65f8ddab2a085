//! Small dense linear-algebra helpers.

use nalgebra::{DMatrix, DVector};

/// Safety factor applied to power-iteration norm estimates.
pub const NORM_INFLATION: f64 = 1.001;

/// Spectral norm `|A|` by power iteration on `A'A`: at most 200 iterations
/// or until the relative change drops below 1e-12. Not inflated.
pub fn spectral_norm(a: &DMatrix<f64>) -> f64 {
    let n = a.ncols();
    if n == 0 || a.nrows() == 0 {
        return 0.0;
    }
    // fixed, non-degenerate start vector
    let mut v = DVector::from_fn(n, |i, _| 1.0 + ((i * 7919 + 13) % 101) as f64 / 101.0);
    v /= v.norm();
    let mut est = 0.0;
    for _ in 0..200 {
        let w = a.tr_mul(&(a * &v));
        let nw = w.norm();
        if nw == 0.0 {
            return 0.0;
        }
        let next = nw.sqrt();
        v = w / nw;
        let done = (next - est).abs() <= 1e-12 * next;
        est = next;
        if done {
            break;
        }
    }
    est
}

/// Power-iteration norm inflated by [`NORM_INFLATION`], a safe Lipschitz constant.
pub fn lipschitz_norm(a: &DMatrix<f64>) -> f64 {
    NORM_INFLATION * spectral_norm(a)
}

/// `[x]_+` componentwise.
pub fn positive_part(x: &DVector<f64>) -> DVector<f64> {
    x.map(|v| v.max(0.0))
}
