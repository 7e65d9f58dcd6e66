//! Dense LU factorisation with partial pivoting for the small systems used here.

use nalgebra::DMatrix;

use crate::error::{ParmaError, Result};

/// `P A = L U`, stored compactly: unit-lower `L` below the diagonal, `U` on and above.
#[derive(Debug, Clone)]
pub struct LuFactors {
    lu: DMatrix<f64>,
    // perm[i] = original row now at position i
    perm: Vec<usize>,
}

impl LuFactors {
    /// Factors a square matrix. A pivot smaller than `rel_threshold` times the
    /// largest absolute entry of `a` is reported as [`ParmaError::SingularSystem`].
    pub fn factor(a: &DMatrix<f64>, rel_threshold: f64) -> Result<Self> {
        let n = a.nrows();
        assert_eq!(n, a.ncols(), "LU needs a square matrix");
        let scale = a.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let threshold = rel_threshold * scale;
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();

        for col in 0..n {
            let (pivot_row, pivot_abs) =
                (col..n)
                    .map(|r| (r, lu[(r, col)].abs()))
                    .fold(
                        (col, -1.0),
                        |best, cur| if cur.1 > best.1 { cur } else { best },
                    );
            if pivot_abs.is_nan() || pivot_abs < threshold || pivot_abs == 0.0 {
                return Err(ParmaError::SingularSystem {
                    column: col,
                    pivot: pivot_abs,
                    threshold,
                });
            }
            if pivot_row != col {
                lu.swap_rows(pivot_row, col);
                perm.swap(pivot_row, col);
            }
            let pivot = lu[(col, col)];
            for r in col + 1..n {
                let factor = lu[(r, col)] / pivot;
                lu[(r, col)] = factor;
                if factor != 0.0 {
                    for c in col + 1..n {
                        let u = lu[(col, c)];
                        lu[(r, c)] -= factor * u;
                    }
                }
            }
        }
        Ok(Self { lu, perm })
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim();
        assert_eq!(b.len(), n, "right-hand side length");
        let mut x: Vec<f64> = self.perm.iter().map(|&i| b[i]).collect();
        for r in 0..n {
            let mut acc = x[r];
            for (c, xc) in x.iter().enumerate().take(r) {
                acc -= self.lu[(r, c)] * xc;
            }
            x[r] = acc;
        }
        for r in (0..n).rev() {
            let mut acc = x[r];
            for (c, xc) in x.iter().enumerate().skip(r + 1) {
                acc -= self.lu[(r, c)] * xc;
            }
            x[r] = acc / self.lu[(r, r)];
        }
        x
    }
}

/// `||A x - b||_inf / max(1, ||b||_inf)`.
pub fn relative_residual(a: &DMatrix<f64>, x: &[f64], b: &[f64]) -> f64 {
    let b_norm = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let r = (0..a.nrows())
        .map(|i| {
            let ax: f64 = (0..a.ncols()).map(|j| a[(i, j)] * x[j]).sum();
            (ax - b[i]).abs()
        })
        .fold(0.0f64, f64::max);
    r / b_norm.max(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn solves_with_pivoting() {
        // zero leading entry forces a row swap
        let a = DMatrix::from_row_slice(3, 3, &[0.0, 2.0, 1.0, 1.0, 1.0, 0.0, 3.0, 0.0, 1.0]);
        let b = [5.0, 3.0, 4.0];
        let lu = LuFactors::factor(&a, 1e-12).unwrap();
        let x = lu.solve(&b);
        assert!(relative_residual(&a, &x, &b) < 1e-15);
        for (got, want) in x.iter().zip([1.0, 2.0, 1.0]) {
            assert!((got - want).abs() < 1e-14);
        }
    }

    #[test]
    fn detects_singular_matrix() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        assert!(matches!(
            LuFactors::factor(&a, 1e-12),
            Err(ParmaError::SingularSystem { column: 1, .. })
        ));
    }

    #[test]
    fn identity_is_exact() {
        let a = DMatrix::<f64>::identity(5, 5);
        let b = [1.5, -2.0, 0.0, 3.25, 7.0];
        assert_eq!(LuFactors::factor(&a, 1e-12).unwrap().solve(&b), b.to_vec());
    }

    proptest! {
        #[test]
        fn agrees_with_nalgebra(n in 1usize..8, seed in proptest::collection::vec(-1.0f64..1.0, 64 + 8)) {
            // diagonally dominant so the system is well conditioned
            let mut a = DMatrix::from_fn(n, n, |i, j| seed[i * 8 + j]);
            for i in 0..n {
                a[(i, i)] += 10.0;
            }
            let b: Vec<f64> = seed[64..64 + n].to_vec();
            let ours = LuFactors::factor(&a, 1e-12).unwrap().solve(&b);
            let theirs = a.clone().lu().solve(&nalgebra::DVector::from_vec(b.clone())).unwrap();
            for i in 0..n {
                prop_assert!((ours[i] - theirs[i]).abs() < 1e-12);
            }
            prop_assert!(relative_residual(&a, &ours, &b) < 1e-14);
        }
    }
}
