//! Banded matrices with an in-place LU factorization without pivoting.
//!
//! Newton matrices of the scheme are column diagonally dominant, for which
//! elimination without pivoting is stable and preserves the band.

#![allow(clippy::needless_range_loop)]

use crate::error::{invalid, Result};

#[derive(Debug, Clone)]
pub(crate) struct BandMatrix {
    n: usize,
    bw: usize,
    /// Row-major, `2·bw + 1` entries per row; entry `(i, j)` sits at
    /// `i·(2bw+1) + (j + bw - i)`.
    data: Vec<f64>,
}

impl BandMatrix {
    pub(crate) fn zeros(n: usize, bw: usize) -> Self {
        BandMatrix { n, bw, data: vec![0.0; n * (2 * bw + 1)] }
    }

    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(j + self.bw >= i && j <= i + self.bw);
        i * (2 * self.bw + 1) + (j + self.bw - i)
    }

    pub(crate) fn add(&mut self, i: usize, j: usize, v: f64) {
        let k = self.idx(i, j);
        self.data[k] += v;
    }

    #[cfg(test)]
    pub(crate) fn get(&self, i: usize, j: usize) -> f64 {
        if j + self.bw < i || j > i + self.bw {
            0.0
        } else {
            self.data[self.idx(i, j)]
        }
    }

    /// Overwrites `self` with its LU factors and solves `A x = rhs` in place.
    pub(crate) fn solve_in_place(&mut self, rhs: &mut [f64]) -> Result<()> {
        let (n, bw) = (self.n, self.bw);
        for k in 0..n {
            let pivot = self.data[self.idx(k, k)];
            if pivot == 0.0 || !pivot.is_finite() {
                return Err(invalid(format!("singular band matrix at row {k}")));
            }
            let end = (k + bw + 1).min(n);
            for i in k + 1..end {
                let ik = self.idx(i, k);
                let factor = self.data[ik] / pivot;
                if factor == 0.0 {
                    continue;
                }
                self.data[ik] = factor;
                for j in k + 1..end {
                    let kj = self.data[self.idx(k, j)];
                    let ij = self.idx(i, j);
                    self.data[ij] -= factor * kj;
                }
                rhs[i] -= factor * rhs[k];
            }
        }
        for k in (0..n).rev() {
            let end = (k + bw + 1).min(n);
            let mut s = rhs[k];
            for j in k + 1..end {
                s -= self.data[self.idx(k, j)] * rhs[j];
            }
            rhs[k] = s / self.data[self.idx(k, k)];
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn matvec(a: &BandMatrix, x: &[f64]) -> Vec<f64> {
        (0..a.n).map(|i| (0..a.n).map(|j| a.get(i, j) * x[j]).sum()).collect()
    }

    #[test]
    fn solves_tridiagonal() {
        let mut a = BandMatrix::zeros(2, 1);
        a.add(0, 0, 4.0);
        a.add(0, 1, -2.0);
        a.add(1, 0, -2.0);
        a.add(1, 1, 4.0);
        let mut b = vec![2.0, 0.0];
        a.solve_in_place(&mut b).unwrap();
        assert!((b[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((b[1] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn zero_pivot_is_an_error() {
        let mut a = BandMatrix::zeros(2, 1);
        let mut b = vec![1.0, 1.0];
        assert!(a.solve_in_place(&mut b).is_err());
    }

    proptest! {
        #[test]
        fn diagonally_dominant_solve(
            n in 1usize..30,
            bw in 0usize..5,
            seed in proptest::collection::vec(-1.0f64..1.0, 30 * 11 + 30),
        ) {
            let mut a = BandMatrix::zeros(n, bw);
            let mut s = seed.iter().copied().cycle();
            let mut col = vec![0.0; n];
            for i in 0..n {
                for j in i.saturating_sub(bw)..(i + bw + 1).min(n) {
                    if i != j {
                        let v = -s.next().unwrap().abs();
                        a.add(i, j, v);
                        col[j] += v.abs();
                    }
                }
            }
            for (j, c) in col.iter().enumerate() {
                a.add(j, j, c + 1.0);
            }
            let x: Vec<f64> = (0..n).map(|_| s.next().unwrap()).collect();
            let mut b = matvec(&a, &x);
            a.solve_in_place(&mut b).unwrap();
            for (u, v) in b.iter().zip(&x) {
                prop_assert!((u - v).abs() < 1e-12);
            }
        }
    }
}
