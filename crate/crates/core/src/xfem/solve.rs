//! Symmetric banded storage with an in-place Cholesky factorization.

use super::XfemError;

/// Lower-banded symmetric matrix: row i stores columns i−bw..=i.
#[derive(Debug, Clone)]
pub struct BandedSpd {
    pub n: usize,
    pub bw: usize,
    data: Vec<f64>,
}

impl BandedSpd {
    pub fn new(n: usize, bw: usize) -> Self {
        BandedSpd {
            n,
            bw,
            data: vec![0.0; n * (bw + 1)],
        }
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(j <= i && i - j <= self.bw);
        i * (self.bw + 1) + (j + self.bw - i)
    }

    /// Accumulate into the (i, j) entry; only the lower triangle is kept.
    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let (r, c) = if i >= j { (i, j) } else { (j, i) };
        let k = self.idx(r, c);
        self.data[k] += v;
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (r, c) = if i >= j { (i, j) } else { (j, i) };
        if r - c > self.bw {
            return 0.0;
        }
        self.data[self.idx(r, c)]
    }

    pub fn diag_add(&mut self, i: usize, v: f64) {
        let k = self.idx(i, i);
        self.data[k] += v;
    }

    pub fn max_diag(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).fold(0.0, f64::max)
    }

    /// In-place LLᵀ factorization.
    pub fn cholesky(&mut self) -> Result<(), XfemError> {
        let bw = self.bw;
        for i in 0..self.n {
            let lo = i.saturating_sub(bw);
            for j in lo..=i {
                let mut sum = self.data[self.idx(i, j)];
                let klo = lo.max(j.saturating_sub(bw));
                for k in klo..j {
                    sum -= self.data[self.idx(i, k)] * self.data[self.idx(j, k)];
                }
                if i == j {
                    if sum <= 0.0 {
                        return Err(XfemError::NotSpd(sum, i));
                    }
                    let k = self.idx(i, i);
                    self.data[k] = sum.sqrt();
                } else {
                    let d = self.data[self.idx(j, j)];
                    let k = self.idx(i, j);
                    self.data[k] = sum / d;
                }
            }
        }
        Ok(())
    }

    /// Forward/back substitution after [`Self::cholesky`].
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        assert_eq!(rhs.len(), self.n);
        let bw = self.bw;
        let mut y = rhs.to_vec();
        for i in 0..self.n {
            let lo = i.saturating_sub(bw);
            let mut sum = y[i];
            for k in lo..i {
                sum -= self.data[self.idx(i, k)] * y[k];
            }
            y[i] = sum / self.data[self.idx(i, i)];
        }
        for i in (0..self.n).rev() {
            let hi = (i + bw).min(self.n - 1);
            let mut sum = y[i];
            for k in i + 1..=hi {
                sum -= self.data[self.idx(k, i)] * y[k];
            }
            y[i] = sum / self.data[self.idx(i, i)];
        }
        y
    }
}
