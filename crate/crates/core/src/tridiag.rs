//! Smallest eigenvalue of a symmetric tridiagonal matrix by Sturm-sequence
//! bisection.

/// Number of eigenvalues of the symmetric tridiagonal matrix (`diag`,
/// `off`) strictly below `x`, counted from the signs of the LDLᵀ pivots.
fn count_below(diag: &[f64], off: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut d = diag[0] - x;
    if d < 0.0 {
        count += 1;
    }
    for i in 1..diag.len() {
        let piv = if d == 0.0 { f64::EPSILON * (off[i - 1].abs() + 1.0) } else { d };
        d = diag[i] - x - off[i - 1] * off[i - 1] / piv;
        if d < 0.0 {
            count += 1;
        }
    }
    count
}

/// Smallest eigenvalue, to a relative tolerance near machine precision.
pub fn smallest_eigenvalue(diag: &[f64], off: &[f64]) -> f64 {
    assert!(!diag.is_empty() && off.len() + 1 == diag.len());
    // Gershgorin bounds
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..diag.len() {
        let left = if i > 0 { off[i - 1].abs() } else { 0.0 };
        let right = off.get(i).map_or(0.0, |v| v.abs());
        lo = lo.min(diag[i] - left - right);
        hi = hi.max(diag[i] + left + right);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if count_below(diag, off, mid) >= 1 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 4.0 * f64::EPSILON * lo.abs().max(hi.abs()) {
            break;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn discrete_laplacian_spectrum() {
        // tridiag(-1, 2, -1) of size n has eigenvalues 2 - 2cos(kπ/(n+1))
        let n = 50;
        let diag = vec![2.0; n];
        let off = vec![-1.0; n - 1];
        let exact = 2.0 - 2.0 * (std::f64::consts::PI / (n as f64 + 1.0)).cos();
        let got = smallest_eigenvalue(&diag, &off);
        assert!((got - exact).abs() < 1e-14, "{got} vs {exact}");
    }

    #[test]
    fn diagonal_matrix() {
        assert!((smallest_eigenvalue(&[3.0, -1.5, 7.0], &[0.0, 0.0]) + 1.5).abs() < 1e-14);
    }
}
