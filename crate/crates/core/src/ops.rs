//! Mode-diagonal multipliers, dealiased products, and the advective
//! nonlinearity.
//!
//! Products are quadrature-weighted lattice convolutions,
//! (f g)^(xi) = dxi^2 * sum_eta f^(eta) g^(xi - eta),
//! the discrete form of the convolution integral. With this weighting the
//! bilinear norm estimates used by the solvers hold with the same constants
//! on every grid, independent of the period.

use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{SpectralField, VelocityField};
use crate::grid::Grid;

fn require_same_grid(f: &SpectralField, g: &SpectralField) -> Result<()> {
    if f.grid() != g.grid() {
        return Err(Error::GridMismatch {
            expected: f.grid().n(),
            found: g.grid().n(),
        });
    }
    Ok(())
}

fn require_zero_mean(f: &SpectralField, context: &'static str) -> Result<()> {
    if !f.is_zero_mean() {
        return Err(Error::NonzeroMean {
            context,
            magnitude: f.mean().norm(),
        });
    }
    Ok(())
}

/// Multiply every mode by |xi|^exponent. The zero mode is left at zero for
/// nonnegative exponents; negative exponents additionally require a
/// zero-mean input.
pub fn fractional_laplacian_apply(f: &SpectralField, exponent: f64) -> Result<SpectralField> {
    if exponent < 0.0 {
        require_zero_mean(f, "fractional_laplacian_apply with negative exponent")?;
    }
    let grid = f.grid();
    let mut out = f.clone();
    for (idx, fj, fk) in grid.modes() {
        if fj == 0 && fk == 0 {
            out.coeffs_mut()[idx] = Complex64::default();
        } else {
            out.coeffs_mut()[idx] *= grid.mode_radius(fj, fk).powf(exponent);
        }
    }
    Ok(out)
}

/// Perpendicular Riesz transform pair:
/// u1^ = (i xi_2 / |xi|) theta^, u2^ = (-i xi_1 / |xi|) theta^.
///
/// The resulting velocity is incompressible mode by mode and satisfies
/// |u^(xi)| = |theta^(xi)| exactly.
pub fn riesz_velocity(theta: &SpectralField) -> Result<VelocityField> {
    require_zero_mean(theta, "riesz_velocity")?;
    let grid = theta.grid();
    let mut u1 = theta.clone();
    let mut u2 = theta.clone();
    for (idx, fj, fk) in grid.modes() {
        if fj == 0 && fk == 0 {
            continue;
        }
        let norm = ((fj * fj + fk * fk) as f64).sqrt();
        let m1 = Complex64::new(0.0, fk as f64 / norm);
        let m2 = Complex64::new(0.0, -(fj as f64) / norm);
        u1.coeffs_mut()[idx] *= m1;
        u2.coeffs_mut()[idx] *= m2;
    }
    Ok(VelocityField { u1, u2 })
}

fn truncated(f: &SpectralField) -> SpectralField {
    let grid = f.grid();
    let mut out = f.clone();
    for (idx, fj, fk) in grid.modes() {
        if !grid.dealias_keep(fj, fk) {
            out.coeffs_mut()[idx] = Complex64::default();
        }
    }
    out
}

/// Weighted convolution of two coefficient sets via the collocation grid,
/// with the 2/3-rule truncation applied to inputs and output.
///
/// For inputs supported inside the dealiased band the surviving modes carry
/// no aliasing error and match the direct convolution sum.
pub fn dealiased_product(f: &SpectralField, g: &SpectralField) -> Result<SpectralField> {
    require_same_grid(f, g)?;
    let pf = truncated(f).grid_values();
    let pg = truncated(g).grid_values();
    product_from_values(f.grid(), &pf, &pg)
}

/// Shared tail of the product path: pointwise multiply collocation values,
/// analyze, rescale to the weighted convolution, truncate, re-symmetrize.
fn product_from_values(grid: Grid, pf: &[Complex64], pg: &[Complex64]) -> Result<SpectralField> {
    let values: Vec<Complex64> = pf.iter().zip(pg).map(|(a, b)| a * b).collect();
    let mut out = SpectralField::from_grid_values(grid, &values)?;
    // Collocation analysis returns the plain cyclic convolution of the
    // coefficients; only the quadrature weight remains.
    let weight = grid.dxi() * grid.dxi();
    for (idx, fj, fk) in grid.modes() {
        if grid.dealias_keep(fj, fk) {
            out.coeffs_mut()[idx] *= weight;
        } else {
            out.coeffs_mut()[idx] = Complex64::default();
        }
    }
    out.symmetrize();
    Ok(out)
}

/// Weighted convolution without truncation, computed on a 2x-padded grid
/// with the same period so the full product support is represented.
///
/// Errors when the combined band limit of the inputs cannot fit even on the
/// padded lattice.
pub fn convolve_padded(f: &SpectralField, g: &SpectralField) -> Result<SpectralField> {
    require_same_grid(f, g)?;
    let grid = f.grid();
    let padded = Grid::new(2 * grid.n(), grid.period())?;
    let support = f.band_limit() + g.band_limit();
    let capacity = padded.n() as i64 / 2 - 1;
    if support > capacity {
        return Err(Error::ConvolutionOverflow { support, capacity });
    }
    let pf = f.embed(padded)?.grid_values();
    let pg = g.embed(padded)?.grid_values();
    let values: Vec<Complex64> = pf.iter().zip(&pg).map(|(a, b)| a * b).collect();
    let mut out = SpectralField::from_grid_values(padded, &values)?;
    let weight = grid.dxi() * grid.dxi();
    for c in out.coeffs_mut() {
        *c *= weight;
    }
    out.symmetrize();
    Ok(out)
}

/// Divergence-form advective nonlinearity div(u_theta theta), where u_theta
/// is the Riesz velocity of theta and the products are dealiased.
///
/// Vanishes identically (up to roundoff) on a single plane-wave pair, and
/// agrees with the non-conservative form u . grad(theta) because the
/// velocity is incompressible mode by mode.
pub fn nonlinear_term(theta: &SpectralField) -> Result<SpectralField> {
    let grid = theta.grid();
    let u = riesz_velocity(&truncated(theta))?;
    let p_theta = truncated(theta).grid_values();
    let p1 = product_from_values(grid, &u.u1.grid_values(), &p_theta)?;
    let p2 = product_from_values(grid, &u.u2.grid_values(), &p_theta)?;
    let dxi = grid.dxi();
    let mut out = SpectralField::zeros(grid);
    for (idx, fj, fk) in grid.modes() {
        let div = Complex64::new(0.0, dxi * fj as f64) * p1.coeffs()[idx]
            + Complex64::new(0.0, dxi * fk as f64) * p2.coeffs()[idx];
        out.coeffs_mut()[idx] = div;
    }
    out.coeffs_mut()[0] = Complex64::default();
    Ok(out)
}
