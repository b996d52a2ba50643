//! Gram matrices, factorization and Gaussian path sampling.

use crate::error::{Error, Result};
use crate::kernels::Kernel;
use crate::linalg::{cholesky_lower, symmetric_eigenvalues};
use crate::rng::stream_rng;
use alloc::vec;
use alloc::vec::Vec;
use libm::sqrt;
use rand::Rng;
use rand_distr::StandardNormal;

/// Strictly increasing, non-negative, finite times.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TimeGrid {
    times: Vec<f64>,
}

impl TimeGrid {
    pub fn new(times: Vec<f64>) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::Grid("grid is empty"));
        }
        if times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
            return Err(Error::Grid("times must be finite and non-negative"));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Grid("times must be strictly increasing"));
        }
        Ok(TimeGrid { times })
    }

    /// `n` equally spaced times `end/n, 2 end/n, ..., end`.
    pub fn uniform(end: f64, n: usize) -> Result<Self> {
        if n == 0 || !(end > 0.0) {
            return Err(Error::Grid("uniform grid needs n > 0 and end > 0"));
        }
        Self::new((1..=n).map(|k| end * k as f64 / n as f64).collect())
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::param("c", c, "0 < c < inf"));
        }
        Self::new(self.times.iter().map(|t| t * c).collect())
    }
}

/// Outcome of factorizing a Gram matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum FactorState {
    Unfactored,
    /// Factorized after adding `jitter * max_diagonal` to the diagonal.
    Cholesky { jitter: f64 },
    Indefinite { min_eigenvalue: f64 },
}

/// Gram matrix of a kernel on a grid, plus its factor once computed.
#[derive(Debug, Clone)]
pub struct CovMatrix {
    grid: TimeGrid,
    entries: Vec<f64>,
    state: FactorState,
    // rows with a non-zero diagonal, and the lower factor restricted to them
    active: Vec<usize>,
    lower: Vec<f64>,
}

/// Evaluates `kernel` on every pair of grid times.
pub fn build_gram<K: Kernel + ?Sized>(kernel: &K, grid: &TimeGrid) -> Result<CovMatrix> {
    let n = grid.len();
    let t = grid.times();
    let mut entries = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let v = kernel.covariance(t[i], t[j])?;
            entries[i * n + j] = v;
            entries[j * n + i] = v;
        }
    }
    Ok(CovMatrix {
        grid: grid.clone(),
        entries,
        state: FactorState::Unfactored,
        active: Vec::new(),
        lower: Vec::new(),
    })
}

impl CovMatrix {
    /// Wraps explicit entries (row-major, symmetric).
    pub fn from_entries(grid: TimeGrid, entries: Vec<f64>) -> Result<Self> {
        let n = grid.len();
        if entries.len() != n * n {
            return Err(Error::Grid("entry count does not match grid"));
        }
        Ok(CovMatrix {
            grid,
            entries,
            state: FactorState::Unfactored,
            active: Vec::new(),
            lower: Vec::new(),
        })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.len() + j]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn state(&self) -> FactorState {
        self.state
    }

    pub fn max_diagonal(&self) -> f64 {
        (0..self.len())
            .map(|i| self.entry(i, i))
            .fold(0.0, f64::max)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        symmetric_eigenvalues(&self.entries, self.len())
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }

    /// Cholesky factorization with jitter escalation `0, 1e-12, 1e-11, ...` times the
    /// largest diagonal entry, stopping at `max_jitter`. Rows that are identically
    /// zero (such as time 0) are kept out of the factor and sample as exact zeros.
    pub fn factorize(mut self, max_jitter: f64) -> Self {
        let n = self.len();
        let active: Vec<usize> = (0..n)
            .filter(|&i| (0..n).any(|j| self.entry(i, j) != 0.0))
            .collect();
        let m = active.len();
        let mut sub = vec![0.0; m * m];
        for (r, &i) in active.iter().enumerate() {
            for (c, &j) in active.iter().enumerate() {
                sub[r * m + c] = self.entry(i, j);
            }
        }
        let scale = self.max_diagonal();
        let mut jitter = 0.0;
        loop {
            let mut trial = sub.clone();
            for r in 0..m {
                trial[r * m + r] += jitter * scale;
            }
            if let Some(l) = cholesky_lower(&trial, m) {
                self.active = active;
                self.lower = l;
                self.state = FactorState::Cholesky { jitter };
                return self;
            }
            jitter = if jitter == 0.0 { 1e-12 } else { jitter * 10.0 };
            if jitter > max_jitter * (1.0 + 1e-9) {
                break;
            }
        }
        self.state = FactorState::Indefinite {
            min_eigenvalue: self.min_eigenvalue(),
        };
        self
    }

    /// One path: `L ξ` with `ξ` standard normal.
    pub fn sample_path<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Vec<f64>> {
        match self.state {
            FactorState::Cholesky { .. } => {}
            FactorState::Unfactored => return Err(Error::NotFactored),
            FactorState::Indefinite { min_eigenvalue } => {
                return Err(Error::Indefinite { min_eigenvalue })
            }
        }
        let m = self.active.len();
        let xi: Vec<f64> = (0..m).map(|_| rng.sample(StandardNormal)).collect();
        let mut path = vec![0.0; self.len()];
        for (r, &i) in self.active.iter().enumerate() {
            let row = &self.lower[r * m..r * m + r + 1];
            path[i] = row.iter().zip(&xi).map(|(l, x)| l * x).sum();
        }
        Ok(path)
    }

    /// Path number `index` of the ensemble seeded by `seed`.
    pub fn sample_indexed_path(&self, seed: u64, index: u64) -> Result<Vec<f64>> {
        let mut rng = stream_rng(seed, index);
        self.sample_path(&mut rng)
    }
}

/// Sampled paths on a common grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PathEnsemble {
    pub grid: TimeGrid,
    pub paths: Vec<Vec<f64>>,
}

impl PathEnsemble {
    pub fn stats(&self) -> Result<EnsembleStats> {
        empirical_cov(self.grid.times(), &self.paths)
    }
}

/// Draws `n_paths` paths; path `i` uses stream `i` of `seed`.
pub fn sample_paths(m: &CovMatrix, n_paths: usize, seed: u64) -> Result<PathEnsemble> {
    let paths = (0..n_paths as u64)
        .map(|i| m.sample_indexed_path(seed, i))
        .collect::<Result<Vec<_>>>()?;
    Ok(PathEnsemble {
        grid: m.grid.clone(),
        paths,
    })
}

/// Means and covariances of replicate vectors with standard errors.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EnsembleStats {
    /// Label of each coordinate, usually a time.
    pub points: Vec<f64>,
    pub n_samples: usize,
    pub mean: Vec<f64>,
    pub mean_standard_error: Vec<f64>,
    /// Row-major, unbiased.
    pub cov: Vec<f64>,
    pub cov_standard_error: Vec<f64>,
}

impl EnsembleStats {
    pub fn dim(&self) -> usize {
        self.points.len()
    }

    pub fn cov(&self, i: usize, j: usize) -> f64 {
        self.cov[i * self.dim() + j]
    }

    pub fn cov_se(&self, i: usize, j: usize) -> f64 {
        self.cov_standard_error[i * self.dim() + j]
    }
}

/// Sample means and covariances of `rows`, each of length `points.len()`.
pub fn empirical_cov(points: &[f64], rows: &[Vec<f64>]) -> Result<EnsembleStats> {
    let k = points.len();
    let n = rows.len();
    if n < 2 {
        return Err(Error::param("n_samples", n as f64, "at least 2 samples"));
    }
    if rows.iter().any(|r| r.len() != k) {
        return Err(Error::Grid("replicate length differs from point count"));
    }
    let nf = n as f64;
    let mut mean = vec![0.0; k];
    for r in rows {
        for (m, v) in mean.iter_mut().zip(r) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= nf);

    let mut cov = vec![0.0; k * k];
    let mut prod_sq = vec![0.0; k * k];
    for r in rows {
        for i in 0..k {
            let di = r[i] - mean[i];
            for j in i..k {
                let p = di * (r[j] - mean[j]);
                cov[i * k + j] += p;
                prod_sq[i * k + j] += p * p;
            }
        }
    }
    let mut cov_se = vec![0.0; k * k];
    for i in 0..k {
        for j in i..k {
            let s = cov[i * k + j];
            let biased = s / nf;
            let second = prod_sq[i * k + j] / nf;
            let var_prod = (second - biased * biased).max(0.0) * nf / (nf - 1.0);
            let c = s / (nf - 1.0);
            let se = sqrt(var_prod / nf);
            cov[i * k + j] = c;
            cov[j * k + i] = c;
            cov_se[i * k + j] = se;
            cov_se[j * k + i] = se;
        }
    }
    let mean_standard_error = (0..k).map(|i| sqrt(cov[i * k + i] / nf)).collect();
    Ok(EnsembleStats {
        points: points.to_vec(),
        n_samples: n,
        mean,
        mean_standard_error,
        cov,
        cov_standard_error: cov_se,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{Qab, SubFbm};

    #[test]
    fn grid_validation() {
        assert!(TimeGrid::new(vec![]).is_err());
        assert!(TimeGrid::new(vec![0.0, 1.0, 1.0]).is_err());
        assert!(TimeGrid::new(vec![-1.0, 1.0]).is_err());
        let g = TimeGrid::uniform(2.0, 8).unwrap();
        assert_eq!(g.times()[7], 2.0);
        assert_eq!(g.scaled(0.5).unwrap().times()[7], 1.0);
    }

    #[test]
    fn unfactored_sampling_fails() {
        let g = TimeGrid::uniform(1.0, 4).unwrap();
        let m = build_gram(&SubFbm::new(1.0).unwrap(), &g).unwrap();
        assert_eq!(m.sample_indexed_path(1, 0), Err(Error::NotFactored));
    }

    #[test]
    fn zero_time_is_exact_zero() {
        let g = TimeGrid::new(vec![0.0, 0.5, 1.0]).unwrap();
        let m = build_gram(&Qab::new(0.0, 0.5).unwrap(), &g)
            .unwrap()
            .factorize(1e-6);
        assert_eq!(m.state(), FactorState::Cholesky { jitter: 0.0 });
        for i in 0..20 {
            assert_eq!(m.sample_indexed_path(3, i).unwrap()[0], 0.0);
        }
    }

    #[test]
    fn indefinite_is_reported() {
        let g = TimeGrid::new(vec![1.0, 2.0]).unwrap();
        let m = CovMatrix::from_entries(g, vec![1.0, 2.0, 2.0, 1.0])
            .unwrap()
            .factorize(1e-6);
        match m.state() {
            FactorState::Indefinite { min_eigenvalue } => {
                assert!((min_eigenvalue + 1.0).abs() < 1e-12)
            }
            s => panic!("unexpected {s:?}"),
        }
        assert!(matches!(
            m.sample_indexed_path(0, 0),
            Err(Error::Indefinite { .. })
        ));
    }

    #[test]
    fn singular_matrix_needs_jitter() {
        let g = TimeGrid::new(vec![1.0, 2.0]).unwrap();
        let m = CovMatrix::from_entries(g, vec![1.0, 1.0, 1.0, 1.0])
            .unwrap()
            .factorize(1e-6);
        match m.state() {
            FactorState::Cholesky { jitter } => assert!(jitter > 0.0 && jitter <= 1e-6),
            s => panic!("unexpected {s:?}"),
        }
    }

    #[test]
    fn empirical_cov_of_known_rows() {
        let rows = vec![vec![1.0, 2.0], vec![3.0, 6.0], vec![5.0, 10.0]];
        let s = empirical_cov(&[0.0, 1.0], &rows).unwrap();
        assert_eq!(s.mean, vec![3.0, 6.0]);
        assert!((s.cov(0, 0) - 4.0).abs() < 1e-14);
        assert!((s.cov(0, 1) - 8.0).abs() < 1e-14);
        assert!((s.cov(1, 1) - 16.0).abs() < 1e-14);
    }
}
