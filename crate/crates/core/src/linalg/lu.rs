use num_complex::Complex;
use num_traits::Zero;

use super::Matrix;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// LU factorization with partial pivoting, `P A = L U`.
#[derive(Clone, Debug)]
pub struct Lu<T> {
    lu: Matrix<T>,
    perm: Vec<usize>,
}

impl<T: Real> Lu<T> {
    /// Fails with [`Error::SingularSystem`] when a pivot falls below
    /// `n * eps * max|A|`.
    pub fn factor(matrix: &Matrix<T>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::InvalidArgument("LU needs a square matrix".into()));
        }
        let n = matrix.rows();
        let mut lu = matrix.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let tiny = T::of(n.max(1) as f64) * T::epsilon() * matrix.max_abs();

        for k in 0..n {
            let (pivot_row, pivot_mag) = (k..n)
                .map(|r| (r, lu[(r, k)].norm()))
                .fold((k, T::zero()), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pivot_mag <= tiny || pivot_mag.is_zero() {
                return Err(Error::SingularSystem(format!("pivot {k} of {n} vanishes")));
            }
            if pivot_row != k {
                perm.swap(k, pivot_row);
                for c in 0..n {
                    let tmp = lu[(k, c)];
                    lu[(k, c)] = lu[(pivot_row, c)];
                    lu[(pivot_row, c)] = tmp;
                }
            }
            let pivot = lu[(k, k)];
            for r in (k + 1)..n {
                let factor = lu[(r, k)] / pivot;
                if factor.is_zero() {
                    continue;
                }
                lu[(r, k)] = factor;
                for c in (k + 1)..n {
                    let u = lu[(k, c)];
                    lu[(r, c)] -= factor * u;
                }
            }
        }
        Ok(Lu { lu, perm })
    }

    pub fn solve(&self, rhs: &[Complex<T>]) -> Vec<Complex<T>> {
        let n = self.perm.len();
        assert_eq!(rhs.len(), n, "rhs length mismatch");
        let mut x: Vec<Complex<T>> = self.perm.iter().map(|&p| rhs[p]).collect();
        for r in 0..n {
            let mut acc = x[r];
            for c in 0..r {
                acc -= self.lu[(r, c)] * x[c];
            }
            x[r] = acc;
        }
        for r in (0..n).rev() {
            let mut acc = x[r];
            for c in (r + 1)..n {
                acc -= self.lu[(r, c)] * x[c];
            }
            x[r] = acc / self.lu[(r, r)];
        }
        x
    }
}
