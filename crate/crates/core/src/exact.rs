//! Exact integer and rational linear algebra on small dense matrices.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

/// Dense matrix of arbitrary-precision integers, stored row by row.
pub type IntMatrix = Vec<Vec<BigInt>>;

/// Dense matrix of arbitrary-precision rationals, stored row by row.
pub type RatMatrix = Vec<Vec<BigRational>>;

/// Converts a matrix of machine integers to big integers.
pub fn to_big(m: &[Vec<i64>]) -> IntMatrix {
    m.iter()
        .map(|row| row.iter().map(|&x| BigInt::from(x)).collect())
        .collect()
}

/// Rank of an integer matrix by fraction-free (Bareiss) elimination.
pub fn rank(m: &IntMatrix) -> usize {
    let rows = m.len();
    if rows == 0 {
        return 0;
    }
    let cols = m[0].len();
    let mut a = m.clone();
    let mut prev = BigInt::one();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        for i in (r + 1)..rows {
            for j in (c + 1)..cols {
                let v = (&a[r][c] * &a[i][j] - &a[i][c] * &a[r][j]) / &prev;
                a[i][j] = v;
            }
            a[i][c] = BigInt::zero();
        }
        prev = a[r][c].clone();
        r += 1;
    }
    r
}

/// Integer matrix product.
pub fn mul(a: &IntMatrix, b: &IntMatrix) -> IntMatrix {
    let n = a.len();
    let k = b.len();
    let m = if k == 0 { 0 } else { b[0].len() };
    let mut out = vec![vec![BigInt::zero(); m]; n];
    for i in 0..n {
        for l in 0..k {
            if a[i][l].is_zero() {
                continue;
            }
            for j in 0..m {
                out[i][j] += &a[i][l] * &b[l][j];
            }
        }
    }
    out
}

/// Characteristic polynomial `det(xI - M)` with coefficients from the constant term upward.
///
/// Uses the Faddeev-LeVerrier recursion; every division is exact over the integers.
pub fn char_poly(m: &IntMatrix) -> Vec<BigInt> {
    let d = m.len();
    let mut coeffs = vec![BigInt::zero(); d + 1];
    coeffs[d] = BigInt::one();
    let mut aux: IntMatrix = vec![vec![BigInt::zero(); d]; d];
    for k in 1..=d {
        let mut next = mul(m, &aux);
        for (i, row) in next.iter_mut().enumerate() {
            row[i] += &coeffs[d - k + 1];
        }
        aux = next;
        let am = mul(m, &aux);
        let trace: BigInt = (0..d).map(|i| am[i][i].clone()).sum();
        coeffs[d - k] = -trace / BigInt::from(k);
    }
    coeffs
}

/// Evaluates an integer polynomial (constant term first) at an integer point.
pub fn poly_eval(p: &[BigInt], x: &BigInt) -> BigInt {
    p.iter().rev().fold(BigInt::zero(), |acc, c| acc * x + c)
}

/// Divides by `(x - 1)` if the division is exact.
pub fn div_x_minus_one(p: &[BigInt]) -> Option<Vec<BigInt>> {
    if p.len() < 2 || !poly_eval(p, &BigInt::one()).is_zero() {
        return None;
    }
    let n = p.len() - 1;
    let mut q = vec![BigInt::zero(); n];
    let mut carry = BigInt::zero();
    for k in (0..n).rev() {
        carry += &p[k + 1];
        q[k] = carry.clone();
    }
    Some(q)
}

/// Largest `k` such that `(x - 1)^k` divides `p`, together with the quotient.
pub fn unit_multiplicity(p: &[BigInt]) -> (usize, Vec<BigInt>) {
    let mut k = 0;
    let mut q = p.to_vec();
    while let Some(next) = div_x_minus_one(&q) {
        q = next;
        k += 1;
    }
    (k, q)
}

/// Reduced row echelon form in place; returns the pivot columns.
pub fn rref(a: &mut RatMatrix) -> Vec<usize> {
    let rows = a.len();
    if rows == 0 {
        return Vec::new();
    }
    let cols = a[0].len();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        let inv = a[r][c].recip();
        for j in c..cols {
            a[r][j] = &a[r][j] * &inv;
        }
        for i in 0..rows {
            if i != r && !a[i][c].is_zero() {
                let f = a[i][c].clone();
                for j in c..cols {
                    let v = &a[r][j] * &f;
                    a[i][j] -= v;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Basis of the right kernel `{x : A x = 0}` of a rational matrix.
pub fn kernel(a: &RatMatrix) -> Vec<Vec<BigRational>> {
    let cols = if a.is_empty() { 0 } else { a[0].len() };
    let mut red = a.clone();
    let pivots = rref(&mut red);
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![BigRational::zero(); cols];
            v[f] = BigRational::one();
            for (r, &pc) in pivots.iter().enumerate() {
                v[pc] = -red[r][f].clone();
            }
            v
        })
        .collect()
}

/// Solves the square system `A x = b` exactly; `None` if `A` is singular.
pub fn solve(a: &RatMatrix, b: &[BigRational]) -> Option<Vec<BigRational>> {
    let n = a.len();
    let mut aug: RatMatrix = a
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut r = row.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    let pivots = rref(&mut aug);
    if pivots.len() != n || pivots.iter().any(|&p| p >= n) {
        return None;
    }
    Some((0..n).map(|i| aug[i][n].clone()).collect())
}

/// Exact rational value of a finite double.
pub fn rational_from_f64(x: f64) -> BigRational {
    BigRational::from_float(x).unwrap_or_else(BigRational::zero)
}

/// Nearest double to a rational.
pub fn rational_to_f64(x: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    x.to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn golden_characteristic_polynomial() {
        let m = to_big(&[vec![1, 1], vec![1, 2]]);
        assert_eq!(char_poly(&m), big(&[1, -3, 1]));
    }

    #[test]
    fn unit_multiplicity_counts_exact_factor() {
        // (x-1)^2 (x-2) = x^3 - 4x^2 + 5x - 2
        let (k, q) = unit_multiplicity(&big(&[-2, 5, -4, 1]));
        assert_eq!(k, 2);
        assert_eq!(q, big(&[-2, 1]));
    }

    #[test]
    fn identity_has_full_unit_multiplicity() {
        let m = to_big(&[vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]]);
        assert_eq!(unit_multiplicity(&char_poly(&m)).0, 3);
    }

    #[test]
    fn rank_of_singular_matrix() {
        let m = to_big(&[vec![1, 2, 3], vec![2, 4, 6], vec![1, 0, 1]]);
        assert_eq!(rank(&m), 2);
    }

    #[test]
    fn kernel_vectors_are_annihilated() {
        let m: RatMatrix = [[1i64, 2, 3], [2, 4, 6]]
            .iter()
            .map(|r| r.iter().map(|&x| BigRational::from_integer(x.into())).collect())
            .collect();
        let k = kernel(&m);
        assert_eq!(k.len(), 2);
        for v in &k {
            for row in &m {
                let s: BigRational = row.iter().zip(v).map(|(a, b)| a * b).sum();
                assert!(s.is_zero());
            }
        }
    }

    #[test]
    fn rational_round_trip() {
        for &x in &[0.1, -3.75, 1e-30, 123456.789, 0.0] {
            assert_eq!(rational_to_f64(&rational_from_f64(x)), x);
        }
    }
}
