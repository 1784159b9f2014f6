use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft;
use crate::grid::Grid;

/// Scalar field stored by its Fourier coefficients on a [`Grid`].
///
/// Real-valued fields are Hermitian: c(-xi) = conj(c(xi)), where the
/// opposite mode is taken modulo the lattice. Fields produced by the
/// solvers additionally have zero mean, c(0) = 0.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: Grid,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(grid: Grid) -> Self {
        SpectralField {
            grid,
            coeffs: vec![Complex64::default(); grid.len()],
        }
    }

    pub fn from_coeffs(grid: Grid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::Grid(format!(
                "coefficient buffer has {} entries, grid needs {}",
                coeffs.len(),
                grid.len()
            )));
        }
        Ok(SpectralField { grid, coeffs })
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub(crate) fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn mode(&self, fj: i64, fk: i64) -> Complex64 {
        self.coeffs[self.grid.flat(fj, fk)]
    }

    /// Set c(xi) = value and c(-xi) = conj(value), keeping the field Hermitian.
    /// The zero mode is forced real.
    pub fn set_mode_pair(&mut self, fj: i64, fk: i64, value: Complex64) {
        let idx = self.grid.flat(fj, fk);
        let conj_idx = self.grid.flat(-fj, -fk);
        self.coeffs[idx] = value;
        if conj_idx == idx {
            self.coeffs[idx] = Complex64::new(value.re, 0.0);
        } else {
            self.coeffs[conj_idx] = value.conj();
        }
    }

    pub fn mean(&self) -> Complex64 {
        self.coeffs[0]
    }

    pub fn is_zero_mean(&self) -> bool {
        self.coeffs[0] == Complex64::default()
    }

    /// Largest violation of c(-xi) = conj(c(xi)) over the lattice.
    pub fn hermitian_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for (idx, fj, fk) in self.grid.modes() {
            let opp = self.coeffs[self.grid.flat(-fj, -fk)];
            worst = worst.max((opp - self.coeffs[idx].conj()).norm());
        }
        worst
    }

    /// Average each mode with the conjugate of its opposite, making the
    /// Hermitian symmetry exact. Self-paired modes are forced real.
    pub(crate) fn symmetrize(&mut self) {
        let grid = self.grid;
        for (idx, fj, fk) in grid.modes() {
            let opp = grid.flat(-fj, -fk);
            if opp < idx {
                continue;
            }
            if opp == idx {
                self.coeffs[idx] = Complex64::new(self.coeffs[idx].re, 0.0);
            } else {
                let avg = 0.5 * (self.coeffs[idx] + self.coeffs[opp].conj());
                self.coeffs[idx] = avg;
                self.coeffs[opp] = avg.conj();
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs
            .iter()
            .all(|c| c.re.is_finite() && c.im.is_finite())
    }

    pub fn linf(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Largest max(|fj|, |fk|) over nonzero modes; 0 for the zero field.
    pub fn band_limit(&self) -> i64 {
        let mut band = 0;
        for (idx, fj, fk) in self.grid.modes() {
            if self.coeffs[idx] != Complex64::default() {
                band = band.max(fj.abs().max(fk.abs()));
            }
        }
        band
    }

    pub fn scaled(&self, factor: f64) -> SpectralField {
        let coeffs = self.coeffs.iter().map(|c| c * factor).collect();
        SpectralField {
            grid: self.grid,
            coeffs,
        }
    }

    pub fn add(&self, other: &SpectralField) -> Result<SpectralField> {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &SpectralField) -> Result<SpectralField> {
        self.zip(other, |a, b| a - b)
    }

    fn zip(
        &self,
        other: &SpectralField,
        op: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> Result<SpectralField> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch {
                expected: self.grid.n(),
                found: other.grid.n(),
            });
        }
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| op(*a, *b))
            .collect();
        Ok(SpectralField {
            grid: self.grid,
            coeffs,
        })
    }

    /// Multiply every mode by m(kx, ky) where (kx, ky) is the physical
    /// wavenumber. Real multipliers preserve Hermitian symmetry.
    pub fn apply_multiplier(&self, m: impl Fn(f64, f64) -> Complex64) -> SpectralField {
        let dxi = self.grid.dxi();
        let mut out = self.clone();
        for (idx, fj, fk) in self.grid.modes() {
            out.coeffs[idx] *= m(dxi * fj as f64, dxi * fk as f64);
        }
        out
    }

    /// Zero-pad into a finer lattice with the same period. The embedded
    /// field represents the same function, so every norm is preserved.
    pub fn embed(&self, target: Grid) -> Result<SpectralField> {
        if target.period() != self.grid.period() {
            return Err(Error::Grid(format!(
                "embedding requires equal periods, got {} and {}",
                self.grid.period(),
                target.period()
            )));
        }
        if target.n() < self.grid.n() {
            return Err(Error::Grid(format!(
                "embedding target must be at least as fine, got {} < {}",
                target.n(),
                self.grid.n()
            )));
        }
        let mut out = SpectralField::zeros(target);
        for (idx, fj, fk) in self.grid.modes() {
            out.coeffs[target.flat(fj, fk)] = self.coeffs[idx];
        }
        Ok(out)
    }

    /// Collocation values of the field (synthesis over all stored modes).
    pub fn grid_values(&self) -> Vec<Complex64> {
        fft::synthesize(&self.coeffs, self.grid.n())
    }

    /// Build a field from collocation values (exact inverse of `grid_values`).
    pub fn from_grid_values(grid: Grid, values: &[Complex64]) -> Result<SpectralField> {
        if values.len() != grid.len() {
            return Err(Error::Grid(format!(
                "value buffer has {} entries, grid needs {}",
                values.len(),
                grid.len()
            )));
        }
        Ok(SpectralField {
            grid,
            coeffs: fft::analyze(values, grid.n()),
        })
    }
}

/// Velocity field obtained from a scalar by the perpendicular Riesz
/// transform pair. Incompressible by construction: xi . u_hat(xi) = 0
/// mode by mode, and |u_hat(xi)| = |theta_hat(xi)|.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityField {
    pub u1: SpectralField,
    pub u2: SpectralField,
}

impl VelocityField {
    pub fn grid(&self) -> Grid {
        self.u1.grid()
    }

    /// Largest |xi . u_hat(xi)| over the lattice; zero up to roundoff.
    pub fn divergence_defect(&self) -> f64 {
        let grid = self.u1.grid();
        let dxi = grid.dxi();
        let mut worst = 0.0f64;
        for (idx, fj, fk) in grid.modes() {
            let div =
                dxi * fj as f64 * self.u1.coeffs()[idx] + dxi * fk as f64 * self.u2.coeffs()[idx];
            worst = worst.max(div.norm());
        }
        worst
    }
}
