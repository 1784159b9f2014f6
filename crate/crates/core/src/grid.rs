use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Square periodic Fourier lattice: n modes per axis on a box of side
/// `period`, with wavenumber spacing dxi = 2*pi/period.
///
/// Index j in 0..n maps to the signed integer frequency j' in [-n/2, n/2)
/// in standard FFT order, and the physical wavenumber of the mode (j, k)
/// is dxi * (j', k').
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    n: usize,
    period: f64,
}

impl Grid {
    pub fn new(n: usize, period: f64) -> Result<Self> {
        if n < 4 {
            return Err(Error::Grid(format!("n must be at least 4, got {n}")));
        }
        if n % 2 != 0 {
            return Err(Error::Grid(format!("n must be even, got {n}")));
        }
        if !(period > 0.0) || !period.is_finite() {
            return Err(Error::Grid(format!(
                "period must be positive, got {period}"
            )));
        }
        Ok(Grid { n, period })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    /// Wavenumber spacing 2*pi/period; the quadrature weight per mode is dxi^2.
    pub fn dxi(&self) -> f64 {
        std::f64::consts::TAU / self.period
    }

    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Signed frequency of a raw index along one axis.
    pub fn signed_freq(&self, idx: usize) -> i64 {
        debug_assert!(idx < self.n);
        let half = (self.n / 2) as i64;
        let idx = idx as i64;
        if idx < half {
            idx
        } else {
            idx - self.n as i64
        }
    }

    /// Raw index of a signed frequency (wraps modulo n).
    pub fn index_of(&self, freq: i64) -> usize {
        let n = self.n as i64;
        (freq.rem_euclid(n)) as usize
    }

    /// Flat index of the mode with signed frequencies (fj, fk).
    pub fn flat(&self, fj: i64, fk: i64) -> usize {
        self.index_of(fj) * self.n + self.index_of(fk)
    }

    /// Signed frequencies of a flat index.
    pub fn freqs_of_flat(&self, idx: usize) -> (i64, i64) {
        (
            self.signed_freq(idx / self.n),
            self.signed_freq(idx % self.n),
        )
    }

    /// Physical wavenumber magnitude of the mode (fj, fk).
    pub fn mode_radius(&self, fj: i64, fk: i64) -> f64 {
        self.dxi() * (((fj * fj + fk * fk) as f64).sqrt())
    }

    /// Two-thirds rule: a mode survives the dealias truncation when
    /// max(|fj|, |fk|) <= n/3.
    pub fn dealias_keep(&self, fj: i64, fk: i64) -> bool {
        let m = fj.unsigned_abs().max(fk.unsigned_abs()) as f64;
        m <= self.n as f64 / 3.0
    }

    /// Largest integer frequency magnitude that survives dealiasing.
    pub fn dealias_band(&self) -> i64 {
        (self.n / 3) as i64
    }

    /// Physical radius of the dealiased band corner (diagnostic scale only).
    pub fn dealias_radius(&self) -> f64 {
        self.dxi() * self.dealias_band() as f64
    }

    /// All distinct wavenumber magnitudes on the lattice, ascending,
    /// including 0. These are the only thresholds a radial cutoff can
    /// distinguish.
    pub fn shell_radii(&self) -> Vec<f64> {
        let half = (self.n / 2) as i64;
        let mut sq: Vec<i64> = Vec::new();
        for fj in 0..=half {
            for fk in 0..=fj {
                sq.push(fj * fj + fk * fk);
            }
        }
        sq.sort_unstable();
        sq.dedup();
        sq.into_iter()
            .map(|s| self.dxi() * (s as f64).sqrt())
            .collect()
    }

    /// Iterate all modes as (flat index, fj, fk).
    pub fn modes(&self) -> impl Iterator<Item = (usize, i64, i64)> + '_ {
        let n = self.n;
        (0..n * n).map(move |idx| {
            let (fj, fk) = self.freqs_of_flat(idx);
            (idx, fj, fk)
        })
    }
}
