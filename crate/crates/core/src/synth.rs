//! Initial-data constructors. Every generator returns a Hermitian,
//! zero-mean field supported inside the dealiased band, and draws any
//! randomness from a seeded stream so runs are reproducible.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::grid::Grid;
use crate::norms::xnorm;

/// Real plane-wave pair: amplitude at the mode and its conjugate, so the
/// norm of exponent sigma is 2 * amplitude * |xi|^sigma.
pub fn single_mode(grid: Grid, freq: (i64, i64), amplitude: f64) -> Result<SpectralField> {
    let (fj, fk) = freq;
    if fj == 0 && fk == 0 {
        return Err(Error::Param(
            "single_mode wavevector must be nonzero".into(),
        ));
    }
    if !grid.dealias_keep(fj, fk) {
        return Err(Error::BandLimit {
            freq,
            cutoff: grid.n() as f64 / 3.0,
        });
    }
    let mut f = SpectralField::zeros(grid);
    f.set_mode_pair(fj, fk, Complex64::new(amplitude, 0.0));
    Ok(f)
}

/// Random field supported on the shell lo <= |xi| <= hi (physical radius),
/// intersected with the dealiased band. Magnitudes are log-uniform over
/// four decades and phases uniform; conjugate modes are paired exactly.
pub fn random_band(grid: Grid, lo: f64, hi: f64, seed: u64) -> SpectralField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut f = SpectralField::zeros(grid);
    let band = grid.dealias_band();
    for fj in 0..=band {
        for fk in -band..=band {
            // One representative per conjugate pair.
            let canonical = fj > 0 || (fj == 0 && fk > 0);
            if !canonical {
                continue;
            }
            let radius = grid.mode_radius(fj, fk);
            if radius < lo || radius > hi {
                continue;
            }
            let magnitude = 10f64.powf(rng.gen_range(-4.0..0.0));
            let phase = rng.gen_range(0.0..std::f64::consts::TAU);
            f.set_mode_pair(fj, fk, Complex64::from_polar(magnitude, phase));
        }
    }
    f
}

/// Random field over the whole dealiased band.
pub fn random_below_cutoff(grid: Grid, seed: u64) -> SpectralField {
    random_band(grid, 0.0, f64::INFINITY, seed)
}

/// Two opposite-signed Gaussian blobs a quarter period apart, built on the
/// collocation grid and then band-limited. The antisymmetry makes the mean
/// zero up to roundoff; it is then zeroed exactly.
pub fn gaussian_vortex_pair(grid: Grid, amplitude: f64) -> SpectralField {
    let n = grid.n();
    let period = grid.period();
    let h = period / n as f64;
    let width = period / 16.0;
    let c1 = (0.375 * period, 0.5 * period);
    let c2 = (0.625 * period, 0.5 * period);
    // Nearest periodic image keeps the blobs smooth across the boundary.
    let wrap = |d: f64| {
        let d = d.rem_euclid(period);
        d.min(period - d)
    };
    let blob = |x: f64, y: f64, c: (f64, f64)| {
        let dx = wrap(x - c.0);
        let dy = wrap(y - c.1);
        (-(dx * dx + dy * dy) / (2.0 * width * width)).exp()
    };
    let mut values = vec![Complex64::default(); n * n];
    for m1 in 0..n {
        let x = m1 as f64 * h;
        for m2 in 0..n {
            let y = m2 as f64 * h;
            let v = amplitude * (blob(x, y, c1) - blob(x, y, c2));
            values[m1 * n + m2] = Complex64::new(v, 0.0);
        }
    }
    let mut f =
        SpectralField::from_grid_values(grid, &values).expect("value buffer sized from the grid");
    for (idx, fj, fk) in grid.modes() {
        if !grid.dealias_keep(fj, fk) {
            f.coeffs_mut()[idx] = Complex64::default();
        }
    }
    f.coeffs_mut()[0] = Complex64::default();
    f.symmetrize();
    f
}

/// Horizontal shear profile: a cosine band in x2 plus a small oblique
/// perturbation that breaks the translation symmetry.
pub fn shear_layer(grid: Grid, amplitude: f64) -> SpectralField {
    let mut f = SpectralField::zeros(grid);
    f.set_mode_pair(0, 1, Complex64::new(amplitude, 0.0));
    f.set_mode_pair(1, 1, Complex64::new(0.05 * amplitude, 0.0));
    f.set_mode_pair(1, -1, Complex64::new(0.05 * amplitude, 0.0));
    f
}

/// Scale the field so its norm of exponent sigma equals `target` exactly
/// (one real multiplication per mode).
pub fn rescale_to_xnorm(f: &SpectralField, sigma: f64, target: f64) -> Result<SpectralField> {
    if !(target >= 0.0) || !target.is_finite() {
        return Err(Error::Param(format!(
            "target norm must be nonnegative, got {target}"
        )));
    }
    let current = xnorm(f, sigma)?.value;
    if current == 0.0 {
        return Err(Error::Param(
            "cannot rescale a zero field to a nonzero norm".into(),
        ));
    }
    Ok(f.scaled(target / current))
}
