//! Thomas algorithm for tridiagonal systems.

use crate::error::{Error, Result};

/// Solve the tridiagonal system with sub-diagonal `a`, diagonal `b`,
/// super-diagonal `c` (a[0] and c[n-1] are ignored). Overwrites `d` with the
/// solution.
pub fn solve_in_place(a: &[f64], b: &[f64], c: &[f64], d: &mut [f64], work: &mut Vec<f64>) -> Result<()> {
    let n = d.len();
    assert!(a.len() == n && b.len() == n && c.len() == n);
    work.clear();
    work.resize(n, 0.0);
    if b[0] == 0.0 {
        return Err(Error::Numerical("tridiagonal solve: zero pivot at row 0".into()));
    }
    work[0] = c[0] / b[0];
    d[0] /= b[0];
    for i in 1..n {
        let m = b[i] - a[i] * work[i - 1];
        if m == 0.0 || !m.is_finite() {
            return Err(Error::Numerical(format!("tridiagonal solve: bad pivot at row {i}")));
        }
        work[i] = c[i] / m;
        d[i] = (d[i] - a[i] * d[i - 1]) / m;
    }
    for i in (0..n - 1).rev() {
        d[i] -= work[i] * d[i + 1];
    }
    Ok(())
}
