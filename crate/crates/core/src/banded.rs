//! Banded direct solvers for the Newton systems of the relaxation solver.

use alloc::vec;
use alloc::vec::Vec;

use crate::math::Real;

/// Square matrix with `kl` sub- and `ku` super-diagonals, stored by rows
/// with room for the fill-in of partial pivoting.
#[derive(Debug, Clone)]
pub(crate) struct Band {
    n: usize,
    kl: usize,
    ku: usize,
    w: usize,
    data: Vec<f64>,
}

impl Band {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let w = 2 * kl + ku + 1;
        Self { n, kl, ku, w, data: vec![0.0; n * w] }
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> usize {
        debug_assert!(j + self.kl >= i && j <= i + self.kl + self.ku);
        i * self.w + (j + self.kl - i)
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let s = self.slot(i, j);
        self.data[s] = v;
    }

    /// Symmetric case: Cholesky of `-A`, valid when `A` is negative definite.
    pub fn into_neg_cholesky(self) -> Option<NegCholesky> {
        let (n, p) = (self.n, self.kl);
        debug_assert_eq!(self.kl, self.ku);
        // l[i * (p + 1) + (i - j)] = L[i][j] for i - p <= j <= i.
        let mut l = vec![0.0; n * (p + 1)];
        for i in 0..n {
            let lo = i.saturating_sub(p);
            for j in lo..=i {
                let mut s = -self.data[self.slot(i, j)];
                let klo = lo.max(j.saturating_sub(p));
                for k in klo..j {
                    s -= l[i * (p + 1) + (i - k)] * l[j * (p + 1) + (j - k)];
                }
                if j == i {
                    if !(s > 0.0) {
                        return None;
                    }
                    l[i * (p + 1)] = s.sqrt();
                } else {
                    l[i * (p + 1) + (i - j)] = s / l[j * (p + 1)];
                }
            }
        }
        Some(NegCholesky { n, p, l })
    }

    /// LU factorization with partial pivoting.
    pub fn into_lu(mut self) -> Option<BandLu> {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        let mut piv = vec![0usize; n];
        let mut mult = vec![0.0; n * kl.max(1)];
        for k in 0..n {
            let last = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = self.data[self.slot(k, k)].abs();
            for r in k + 1..=last {
                let v = self.data[self.slot(r, k)].abs();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            if best == 0.0 {
                return None;
            }
            piv[k] = p;
            let cmax = (k + kl + ku).min(n - 1);
            if p != k {
                for j in k..=cmax {
                    let (a, b) = (self.slot(k, j), self.slot(p, j));
                    self.data.swap(a, b);
                }
            }
            let pivot = self.data[self.slot(k, k)];
            for r in k + 1..=last {
                let sr = self.slot(r, k);
                let m = self.data[sr] / pivot;
                mult[k * kl + (r - k - 1)] = m;
                self.data[sr] = 0.0;
                if m != 0.0 {
                    for j in k + 1..=cmax {
                        let v = self.data[self.slot(k, j)];
                        let s = self.slot(r, j);
                        self.data[s] -= m * v;
                    }
                }
            }
        }
        Some(BandLu { band: self, piv, mult })
    }
}

pub(crate) struct NegCholesky {
    n: usize,
    p: usize,
    l: Vec<f64>,
}

impl NegCholesky {
    /// Solves `A x = b` given `-A = L L^T`.
    pub fn solve(&self, b: &mut [f64]) {
        let (n, p) = (self.n, self.p);
        for i in 0..n {
            let mut s = -b[i];
            for k in i.saturating_sub(p)..i {
                s -= self.l[i * (p + 1) + (i - k)] * b[k];
            }
            b[i] = s / self.l[i * (p + 1)];
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            for k in i + 1..(i + p + 1).min(n) {
                s -= self.l[k * (p + 1) + (k - i)] * b[k];
            }
            b[i] = s / self.l[i * (p + 1)];
        }
    }
}

pub(crate) struct BandLu {
    band: Band,
    piv: Vec<usize>,
    mult: Vec<f64>,
}

impl BandLu {
    pub fn solve(&self, b: &mut [f64]) {
        let Band { n, kl, ku, .. } = self.band;
        for k in 0..n {
            b.swap(k, self.piv[k]);
            let bk = b[k];
            for r in k + 1..=(k + kl).min(n - 1) {
                b[r] -= self.mult[k * kl + (r - k - 1)] * bk;
            }
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            for j in i + 1..=(i + kl + ku).min(n - 1) {
                s -= self.band.data[self.band.slot(i, j)] * b[j];
            }
            b[i] = s / self.band.data[self.band.slot(i, i)];
        }
    }
}
