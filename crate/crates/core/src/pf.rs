//! Perron-Frobenius eigenpairs of positive matrices by power iteration.

use crate::error::{Error, Result};

/// Relative residual at which power iteration stops.
pub const PF_TOL: f64 = 1e-13;

/// Iteration cap for power iteration.
pub const PF_MAX_ITER: usize = 100_000;

/// Perron-Frobenius data of a positive square matrix `A`.
///
/// `left` has unit sum, `right` is scaled so that `⟨left, right⟩ = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct PfPair {
    /// Perron-Frobenius eigenvalue.
    pub value: f64,
    /// Left eigenvector `ℓ A = value ℓ`, with `Σ ℓ = 1`.
    pub left: Vec<f64>,
    /// Right eigenvector `A θ = value θ`, with `⟨ℓ, θ⟩ = 1`.
    pub right: Vec<f64>,
}

/// Row vector times matrix.
pub fn vec_mat(v: &[f64], a: &[Vec<f64>]) -> Vec<f64> {
    let d = v.len();
    let mut out = vec![0.0; a.first().map_or(0, |r| r.len())];
    for i in 0..d {
        for (o, x) in out.iter_mut().zip(&a[i]) {
            *o += v[i] * x;
        }
    }
    out
}

/// Matrix times column vector.
pub fn mat_vec(a: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    a.iter().map(|row| dot(row, v)).collect()
}

/// Euclidean inner product.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Transpose of a square matrix.
pub fn transpose(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let d = a.len();
    (0..d).map(|j| (0..d).map(|i| a[i][j]).collect()).collect()
}

/// Relative residual `‖vA − rv‖∞ / (r‖v‖∞)`.
pub fn left_residual(a: &[Vec<f64>], v: &[f64], r: f64) -> f64 {
    let w = vec_mat(v, a);
    let norm = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let err = w.iter().zip(v).fold(0.0f64, |m, (x, y)| m.max((x - r * y).abs()));
    err / (r * norm)
}

/// Dominant left eigenvector of a positive matrix, normalized to unit sum.
pub fn left_pf(a: &[Vec<f64>]) -> Result<(f64, Vec<f64>)> {
    let d = a.len();
    if a.iter().flatten().any(|x| !x.is_finite() || *x < 0.0) {
        return Err(Error::NonFinite("Perron-Frobenius input matrix".into()));
    }
    let mut v = vec![1.0 / d as f64; d];
    let mut best = f64::INFINITY;
    for _ in 0..PF_MAX_ITER {
        let w = vec_mat(&v, a);
        let r: f64 = w.iter().sum();
        if !(r.is_finite() && r > 0.0) {
            return Err(Error::NonFinite("power iteration".into()));
        }
        let next: Vec<f64> = w.iter().map(|x| x / r).collect();
        let res = left_residual(a, &next, r);
        v = next;
        best = best.min(res);
        if res < PF_TOL {
            let r = vec_mat(&v, a).iter().sum::<f64>();
            return Ok((r, v));
        }
    }
    Err(Error::NoConvergence(format!(
        "power iteration stalled at residual {best:e} after {PF_MAX_ITER} iterations"
    )))
}

/// Full Perron-Frobenius pair with the pairing normalization `⟨ℓ, θ⟩ = 1`.
pub fn pf_pair(a: &[Vec<f64>]) -> Result<PfPair> {
    let (value, left) = left_pf(a)?;
    let (_, right) = left_pf(&transpose(a))?;
    let s = dot(&left, &right);
    let right = right.iter().map(|x| x / s).collect();
    Ok(PfPair { value, left, right })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_pair() {
        let a = vec![vec![1.0, 1.0], vec![1.0, 2.0]];
        let p = pf_pair(&a).unwrap();
        let phi2 = (3.0 + 5f64.sqrt()) / 2.0;
        assert!((p.value - phi2).abs() < 1e-12);
        assert!((p.left[0] - (3.0 - 5f64.sqrt()) / 2.0).abs() < 1e-12);
        assert!((dot(&p.left, &p.right) - 1.0).abs() < 1e-14);
        assert!(left_residual(&a, &p.left, p.value) < 1e-13);
    }

    #[test]
    fn rank_one_matrix_converges_immediately() {
        let a = vec![vec![2.0, 4.0], vec![1.0, 2.0]];
        let (r, v) = left_pf(&a).unwrap();
        assert!((r - 4.0).abs() < 1e-12);
        assert!((v[0] - 1.0 / 3.0).abs() < 1e-12);
    }
}
