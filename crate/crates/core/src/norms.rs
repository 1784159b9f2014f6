//! Weighted-l1 spectral norms and the inequality checkers built on them.
//!
//! The norm of exponent sigma is dxi^2 * sum_xi |xi|^sigma |f^(xi)|, the
//! lattice quadrature of the integral it discretizes. The zero mode
//! contributes only at sigma = 0 (weight 1); negative exponents require a
//! zero-mean field.

use rustfft::num_complex::Complex64;
use serde::Serialize;

use crate::alpha::Alpha;
use crate::error::{Error, Result};
use crate::field::{SpectralField, VelocityField};
use crate::ops::convolve_padded;
use crate::parallel::parallel_enabled;

/// A computed norm value tagged with its exponent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct XNorm {
    pub sigma: f64,
    pub value: f64,
}

/// Outcome of a single two-sided bound: passed when lhs <= rhs up to the
/// fixed relative slack 1e-10 * max(1, rhs).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InequalityVerdict {
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub passed: bool,
}

impl InequalityVerdict {
    pub fn new(lhs: f64, rhs: f64) -> Self {
        let slack = rhs - lhs;
        let tol = 1e-10 * rhs.max(1.0);
        InequalityVerdict {
            lhs,
            rhs,
            slack,
            passed: slack >= -tol,
        }
    }
}

fn mode_weight(radius: f64, sigma: f64) -> f64 {
    if radius == 0.0 {
        // Origin carries weight only in the unweighted sum.
        if sigma == 0.0 {
            1.0
        } else {
            0.0
        }
    } else {
        radius.powf(sigma)
    }
}

fn weighted_sum(f: &SpectralField, sigma: f64, magnitude: impl Fn(usize) -> f64 + Sync) -> f64 {
    let grid = f.grid();
    let dxi = grid.dxi();
    let quad = dxi * dxi;
    let term = |idx: usize| {
        let (fj, fk) = grid.freqs_of_flat(idx);
        let radius = dxi * (((fj * fj + fk * fk) as f64).sqrt());
        mode_weight(radius, sigma) * magnitude(idx)
    };
    if parallel_enabled() && grid.len() >= 4096 {
        use rayon::prelude::*;
        quad * (0..grid.len()).into_par_iter().map(term).sum::<f64>()
    } else {
        quad * (0..grid.len()).map(term).sum::<f64>()
    }
}

pub(crate) fn xnorm_value(f: &SpectralField, sigma: f64) -> f64 {
    debug_assert!(sigma >= 0.0 || f.is_zero_mean());
    let coeffs = f.coeffs();
    weighted_sum(f, sigma, |idx| coeffs[idx].norm())
}

/// Weighted-l1 norm of exponent sigma.
pub fn xnorm(f: &SpectralField, sigma: f64) -> Result<XNorm> {
    if sigma < 0.0 && !f.is_zero_mean() {
        return Err(Error::NonzeroMean {
            context: "xnorm with negative exponent",
            magnitude: f.mean().norm(),
        });
    }
    Ok(XNorm {
        sigma,
        value: xnorm_value(f, sigma),
    })
}

/// Weighted-l1 norm of a velocity field, using the Euclidean magnitude
/// sqrt(|u1^|^2 + |u2^|^2) per mode. For a Riesz velocity this equals the
/// norm of the generating scalar exactly.
pub fn velocity_xnorm(u: &VelocityField, sigma: f64) -> Result<XNorm> {
    let zero = Complex64::default();
    if sigma < 0.0 && (u.u1.mean() != zero || u.u2.mean() != zero) {
        return Err(Error::NonzeroMean {
            context: "velocity_xnorm with negative exponent",
            magnitude: u.u1.mean().norm().max(u.u2.mean().norm()),
        });
    }
    let c1 = u.u1.coeffs();
    let c2 = u.u2.coeffs();
    let value = weighted_sum(&u.u1, sigma, |idx| {
        (c1[idx].norm_sqr() + c2[idx].norm_sqr()).sqrt()
    });
    Ok(XNorm { sigma, value })
}

/// Both interpolation bounds between the critical exponent 1 - 2*alpha and
/// exponent 1:
///
///   ||f||_{2-2a} <= ||f||_{1-2a}^(1-1/2a) ||f||_1^(1/2a)
///   ||f||_0     <= ||f||_{1-2a}^(1/2a)    ||f||_1^(1-1/2a)
///
/// Single-mode fields meet both with equality to roundoff.
pub fn check_interpolation(f: &SpectralField, alpha: Alpha) -> Result<[InequalityVerdict; 2]> {
    let sig_c = alpha.sigma_critical();
    let beta = alpha.inv_two_alpha();
    let n_crit = xnorm(f, sig_c)?.value;
    let n_one = xnorm(f, 1.0)?.value;
    let high = InequalityVerdict::new(
        xnorm(f, 2.0 - alpha.two_alpha())?.value,
        n_crit.powf(1.0 - beta) * n_one.powf(beta),
    );
    let zero = InequalityVerdict::new(
        xnorm(f, 0.0)?.value,
        n_crit.powf(beta) * n_one.powf(1.0 - beta),
    );
    Ok([high, zero])
}

/// The three product bounds at exponent 2 - 2*alpha, evaluated on the exact
/// (padded, untruncated) convolution so the constants are not polluted by
/// dealiasing:
///
///   sum form:    ||fg|| <= 2 ||f||_{2-2a} ||g||_0 + 2 ||f||_0 ||g||_{2-2a}
///   mixed form:  the sum form with each factor interpolated
///   square form: ||f f|| <= 4 ||f||_{1-2a} ||f||_1
pub fn check_product_bounds(
    f: &SpectralField,
    g: &SpectralField,
    alpha: Alpha,
) -> Result<[InequalityVerdict; 3]> {
    let sig_high = 2.0 - alpha.two_alpha();
    let sig_c = alpha.sigma_critical();
    let beta = alpha.inv_two_alpha();

    let fg = convolve_padded(f, g)?;
    let lhs_fg = xnorm(&fg, sig_high)?.value;

    let f_high = xnorm(f, sig_high)?.value;
    let g_high = xnorm(g, sig_high)?.value;
    let f_zero = xnorm(f, 0.0)?.value;
    let g_zero = xnorm(g, 0.0)?.value;
    let sum_form = InequalityVerdict::new(lhs_fg, 2.0 * f_high * g_zero + 2.0 * f_zero * g_high);

    let f_c = xnorm(f, sig_c)?.value;
    let g_c = xnorm(g, sig_c)?.value;
    let f_one = xnorm(f, 1.0)?.value;
    let g_one = xnorm(g, 1.0)?.value;
    let mixed_rhs = 2.0
        * f_c.powf(1.0 - beta)
        * f_one.powf(beta)
        * g_c.powf(beta)
        * g_one.powf(1.0 - beta)
        + 2.0 * f_c.powf(beta) * f_one.powf(1.0 - beta) * g_c.powf(1.0 - beta) * g_one.powf(beta);
    let mixed_form = InequalityVerdict::new(lhs_fg, mixed_rhs);

    let ff = convolve_padded(f, f)?;
    let square_form = InequalityVerdict::new(xnorm(&ff, sig_high)?.value, 4.0 * f_c * f_one);

    Ok([sum_form, mixed_form, square_form])
}
