//! Banded LU factorization with partial pivoting and a tridiagonal solver.

use crate::real::Real;

/// Square matrix with `kl` sub- and `ku` super-diagonals, factorized in place.
#[derive(Debug, Clone)]
pub struct Banded<T> {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<T>,
    pivots: Vec<usize>,
    factored: bool,
}

impl<T: Real> Banded<T> {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        Self {
            n,
            kl,
            ku,
            width,
            data: vec![T::zero(); n * width],
            pivots: vec![0; n],
            factored: false,
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(j + self.kl >= i && j < i + self.width - self.kl);
        i * self.width + (j + self.kl - i)
    }

    /// Adds `x` to entry `(i, j)`; `j − i` must lie in `[−kl, ku]`.
    pub fn add(&mut self, i: usize, j: usize, x: T) {
        assert!(!self.factored);
        assert!(j + self.kl >= i && j <= i + self.ku, "entry outside band");
        let k = self.idx(i, j);
        self.data[k] += x;
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        if j + self.kl < i || j >= i + self.width - self.kl {
            return T::zero();
        }
        self.data[self.idx(i, j)]
    }

    /// Factorizes; returns false on an exactly singular pivot.
    pub fn factor(&mut self) -> bool {
        let n = self.n;
        let span = self.ku + self.kl;
        for k in 0..n {
            let last_row = (k + self.kl).min(n - 1);
            let mut p = k;
            let mut best = self.data[self.idx(k, k)].abs();
            for i in (k + 1)..=last_row {
                let v = self.data[self.idx(i, k)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            self.pivots[k] = p;
            if best == T::zero() {
                return false;
            }
            let last_col = (k + span).min(n - 1);
            if p != k {
                for j in k..=last_col {
                    let a = self.idx(k, j);
                    let b = self.idx(p, j);
                    self.data.swap(a, b);
                }
            }
            let pivot = self.data[self.idx(k, k)];
            for i in (k + 1)..=last_row {
                let ik = self.idx(i, k);
                let l = self.data[ik] / pivot;
                self.data[ik] = l;
                if l == T::zero() {
                    continue;
                }
                for j in (k + 1)..=last_col {
                    let kj = self.data[self.idx(k, j)];
                    let ij = self.idx(i, j);
                    self.data[ij] -= l * kj;
                }
            }
        }
        self.factored = true;
        true
    }

    /// Solves `A x = b` in place after [`factor`](Self::factor).
    pub fn solve(&self, b: &mut [T]) {
        assert!(self.factored);
        let n = self.n;
        let span = self.ku + self.kl;
        for k in 0..n {
            let p = self.pivots[k];
            if p != k {
                b.swap(k, p);
            }
            let last_row = (k + self.kl).min(n - 1);
            for i in (k + 1)..=last_row {
                let l = self.data[self.idx(i, k)];
                b[i] = b[i] - l * b[k];
            }
        }
        for k in (0..n).rev() {
            let last_col = (k + span).min(n - 1);
            let mut acc = b[k];
            for j in (k + 1)..=last_col {
                acc -= self.data[self.idx(k, j)] * b[j];
            }
            b[k] = acc / self.data[self.idx(k, k)];
        }
    }
}

/// Solves a tridiagonal system (`lower[0]` and `upper[n−1]` unused) without pivoting.
pub fn solve_tridiagonal<T: Real>(lower: &[T], diag: &[T], upper: &[T], rhs: &mut [T], scratch: &mut Vec<T>) {
    let n = diag.len();
    scratch.clear();
    scratch.resize(n, T::zero());
    let mut denom = diag[0];
    scratch[0] = upper[0] / denom;
    rhs[0] = rhs[0] / denom;
    for i in 1..n {
        denom = diag[i] - lower[i] * scratch[i - 1];
        if i + 1 < n {
            scratch[i] = upper[i] / denom;
        }
        rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / denom;
    }
    for i in (0..n - 1).rev() {
        rhs[i] = rhs[i] - scratch[i] * rhs[i + 1];
    }
}
