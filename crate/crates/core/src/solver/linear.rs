//! Sparse solves with a rank-one correction: `(A − a bᵀ) x = rhs`.
//!
//! The sparse part is factored once by LU with partial pivoting and the
//! rank-one term is handled by the Sherman–Morrison formula. When the result
//! still fails a backward-error check after iterative refinement (the
//! denominator `1 − bᵀA⁻¹a` is tiny or A itself is nearly singular), the
//! bordered system `[[A, a], [bᵀ, 1]]` is factored
//! instead, which stays regular whenever `A − a bᵀ` is.

use faer::prelude::*;
use faer::sparse::{SparseColMat, Triplet};
use faer::Mat;

/// Componentwise backward error accepted from a linear solve.
const ACCEPT: f64 = 1e-10;

/// Iterative refinement steps tried before giving up on Sherman–Morrison.
const REFINEMENTS: usize = 4;

#[derive(Clone, Debug, Default)]
pub(crate) struct SparseRankOne {
    pub n: usize,
    pub entries: Vec<(usize, usize, f64)>,
    /// Rank-one factors; empty when there is no correction.
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct Singular;

impl SparseRankOne {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            entries: Vec::with_capacity(5 * n),
            a: Vec::new(),
            b: Vec::new(),
        }
    }

    pub fn push(&mut self, i: usize, j: usize, v: f64) {
        self.entries.push((i, j, v));
    }

    fn has_rank_one(&self) -> bool {
        !self.a.is_empty()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for &(i, j, v) in &self.entries {
            y[i] += v * x[j];
        }
        if self.has_rank_one() {
            let bx: f64 = self.b.iter().zip(x).map(|(b, x)| b * x).sum();
            for (yi, ai) in y.iter_mut().zip(&self.a) {
                *yi -= ai * bx;
            }
        }
        y
    }

    /// Componentwise backward error `max_i |Jx − rhs|_i / (|J||x| + |rhs|)_i`.
    fn backward_error(&self, x: &[f64], rhs: &[f64]) -> f64 {
        if x.iter().any(|v| !v.is_finite()) {
            return f64::INFINITY;
        }
        let mut scale: Vec<f64> = rhs.iter().map(|v| v.abs()).collect();
        for &(i, j, v) in &self.entries {
            scale[i] += (v * x[j]).abs();
        }
        if self.has_rank_one() {
            let bx: f64 = self.b.iter().zip(x).map(|(b, x)| (b * x).abs()).sum();
            for (s, a) in scale.iter_mut().zip(&self.a) {
                *s += a.abs() * bx;
            }
        }
        let ax = self.apply(x);
        ax.iter()
            .zip(rhs)
            .zip(&scale)
            .map(|((p, q), s)| if *s > 0.0 { (p - q).abs() / s } else { 0.0 })
            .fold(0.0, f64::max)
    }

    /// Solve `(A − a bᵀ) x = rhs`.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>, Singular> {
        if let Some(x) = self.sherman_morrison(rhs) {
            return Ok(x);
        }
        if self.has_rank_one() {
            if let Some(x) = self.bordered(rhs) {
                if self.backward_error(&x, rhs) <= ACCEPT {
                    return Ok(x);
                }
            }
        }
        Err(Singular)
    }

    /// Sherman–Morrison on one LU of `A`, with a few steps of iterative
    /// refinement that reuse the factorisation.
    fn sherman_morrison(&self, rhs: &[f64]) -> Option<Vec<f64>> {
        let n = self.n;
        let trip: Vec<_> = self.entries.iter().map(|&(i, j, v)| Triplet::new(i, j, v)).collect();
        let mat = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &trip).ok()?;
        let lu = mat.sp_lu().ok()?;
        let lu_solve = |v: &[f64]| -> Vec<f64> {
            let mut m = Mat::<f64>::from_fn(n, 1, |i, _| v[i]);
            lu.solve_in_place(m.as_mut());
            (0..n).map(|i| m[(i, 0)]).collect()
        };
        let (z, denom) = if self.has_rank_one() {
            let z = lu_solve(&self.a);
            let bz: f64 = self.b.iter().zip(&z).map(|(b, z)| b * z).sum();
            (z, 1.0 - bz)
        } else {
            (Vec::new(), 1.0)
        };
        if denom == 0.0 || !denom.is_finite() {
            return None;
        }
        let correct = |v: &[f64]| -> Vec<f64> {
            let mut y = lu_solve(v);
            if !z.is_empty() {
                let s = self.b.iter().zip(&y).map(|(b, y)| b * y).sum::<f64>() / denom;
                for (yi, zi) in y.iter_mut().zip(&z) {
                    *yi += s * zi;
                }
            }
            y
        };
        let mut x = correct(rhs);
        for _ in 0..REFINEMENTS {
            if self.backward_error(&x, rhs) <= ACCEPT {
                return Some(x);
            }
            let jx = self.apply(&x);
            let r: Vec<f64> = rhs.iter().zip(&jx).map(|(b, p)| b - p).collect();
            for (xi, di) in x.iter_mut().zip(correct(&r)) {
                *xi += di;
            }
        }
        (self.backward_error(&x, rhs) <= ACCEPT).then_some(x)
    }

    fn bordered(&self, rhs: &[f64]) -> Option<Vec<f64>> {
        let n = self.n;
        let mut trip: Vec<_> = self.entries.iter().map(|&(i, j, v)| Triplet::new(i, j, v)).collect();
        for i in 0..n {
            if self.a[i] != 0.0 {
                trip.push(Triplet::new(i, n, self.a[i]));
            }
            if self.b[i] != 0.0 {
                trip.push(Triplet::new(n, i, self.b[i]));
            }
        }
        trip.push(Triplet::new(n, n, 1.0));
        let mat = SparseColMat::<usize, f64>::try_new_from_triplets(n + 1, n + 1, &trip).ok()?;
        let lu = mat.sp_lu().ok()?;
        let mut m = Mat::<f64>::zeros(n + 1, 1);
        for i in 0..n {
            m[(i, 0)] = rhs[i];
        }
        lu.solve_in_place(m.as_mut());
        Some((0..n).map(|i| m[(i, 0)]).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian_1d(n: usize) -> SparseRankOne {
        let mut s = SparseRankOne::new(n);
        for i in 0..n {
            s.push(i, i, -2.0);
            if i > 0 {
                s.push(i, i - 1, 1.0);
            }
            if i + 1 < n {
                s.push(i, i + 1, 1.0);
            }
        }
        s
    }

    #[test]
    fn plain_sparse_solve() {
        let s = laplacian_1d(50);
        let x_true: Vec<f64> = (0..50).map(|i| (i as f64 * 0.3).sin()).collect();
        let rhs = s.apply(&x_true);
        let x = s.solve(&rhs).unwrap();
        for (a, b) in x.iter().zip(&x_true) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn rank_one_correction_matches_dense_product() {
        let mut s = laplacian_1d(40);
        s.a = (0..40).map(|i| 0.1 + 0.01 * i as f64).collect();
        s.b = (0..40).map(|i| (i as f64).cos()).collect();
        let x_true: Vec<f64> = (0..40).map(|i| 1.0 + i as f64 * 0.05).collect();
        let rhs = s.apply(&x_true);
        let x = s.solve(&rhs).unwrap();
        for (a, b) in x.iter().zip(&x_true) {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn singular_sparse_part_uses_bordered_system() {
        // A = diag(0, 1, 1) is singular while A − a bᵀ = I for a = e₀, b = −e₀
        let mut s = SparseRankOne::new(3);
        s.push(0, 0, 0.0);
        s.push(1, 1, 1.0);
        s.push(2, 2, 1.0);
        s.a = vec![1.0, 0.0, 0.0];
        s.b = vec![-1.0, 0.0, 0.0];
        let x = s.solve(&[2.0, 3.0, 4.0]).unwrap();
        assert!((x[0] - 2.0).abs() < 1e-12 && (x[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn genuinely_singular_system_is_reported() {
        let mut s = SparseRankOne::new(2);
        s.push(0, 0, 1.0);
        s.push(1, 1, 0.0);
        assert_eq!(s.solve(&[1.0, 1.0]), Err(Singular));
    }
}
