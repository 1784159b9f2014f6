//! Internal 2D transforms between mode coefficients and collocation values.
//!
//! Coefficients are interpreted as samples of the continuous Fourier
//! transform, so the synthesis onto the collocation grid carries no
//! prefactor and the analysis divides by n^2. Quadrature weights (dxi^2)
//! live in the norm and product definitions, not here.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

use crate::parallel::parallel_enabled;

fn plan(n: usize, direction: FftDirection) -> Arc<dyn Fft<f64>> {
    static PLANS: OnceLock<Mutex<HashMap<(usize, bool), Arc<dyn Fft<f64>>>>> = OnceLock::new();
    let cache = PLANS.get_or_init(|| Mutex::new(HashMap::new()));
    let key = (n, direction == FftDirection::Forward);
    let mut map = cache.lock().expect("fft plan cache poisoned");
    map.entry(key)
        .or_insert_with(|| FftPlanner::new().plan_fft(n, direction))
        .clone()
}

fn transpose(data: &mut [Complex64], n: usize) {
    for i in 0..n {
        for j in 0..i {
            data.swap(i * n + j, j * n + i);
        }
    }
}

fn fft_rows(data: &mut [Complex64], n: usize, fft: &Arc<dyn Fft<f64>>) {
    if parallel_enabled() && n >= 64 {
        data.par_chunks_exact_mut(n).for_each_init(
            || vec![Complex64::default(); fft.get_inplace_scratch_len()],
            |scratch, row| fft.process_with_scratch(row, scratch),
        );
    } else {
        let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
        for row in data.chunks_exact_mut(n) {
            fft.process_with_scratch(row, &mut scratch);
        }
    }
}

/// In-place unnormalized 2D DFT of a row-major n-by-n buffer.
fn fft2(data: &mut [Complex64], n: usize, direction: FftDirection) {
    debug_assert_eq!(data.len(), n * n);
    let fft = plan(n, direction);
    fft_rows(data, n, &fft);
    transpose(data, n);
    fft_rows(data, n, &fft);
    transpose(data, n);
}

/// Coefficients -> collocation values: p(x_m) = sum_xi c(xi) e^{i x_m . xi}.
pub(crate) fn synthesize(coeffs: &[Complex64], n: usize) -> Vec<Complex64> {
    let mut data = coeffs.to_vec();
    fft2(&mut data, n, FftDirection::Inverse);
    data
}

/// Collocation values -> coefficients, inverse of `synthesize` (carries 1/n^2).
pub(crate) fn analyze(values: &[Complex64], n: usize) -> Vec<Complex64> {
    let mut data = values.to_vec();
    fft2(&mut data, n, FftDirection::Forward);
    let scale = 1.0 / (n * n) as f64;
    for c in &mut data {
        *c *= scale;
    }
    data
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_identity() {
        let n = 8;
        let mut coeffs = vec![Complex64::default(); n * n];
        for (i, c) in coeffs.iter_mut().enumerate() {
            *c = Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos());
        }
        let back = analyze(&synthesize(&coeffs, n), n);
        let err = coeffs
            .iter()
            .zip(&back)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-12, "round trip error {err:e}");
    }

    #[test]
    fn single_mode_synthesis_is_plane_wave() {
        let n = 8;
        let mut coeffs = vec![Complex64::default(); n * n];
        // c = 1/2 at (1, 0) and (-1, 0) synthesizes cos(x1) on the grid.
        coeffs[1 * n] = Complex64::new(0.5, 0.0);
        coeffs[(n - 1) * n] = Complex64::new(0.5, 0.0);
        let values = synthesize(&coeffs, n);
        for m1 in 0..n {
            let x = std::f64::consts::TAU * m1 as f64 / n as f64;
            for m2 in 0..n {
                let v = values[m1 * n + m2];
                assert!((v.re - x.cos()).abs() < 1e-12);
                assert!(v.im.abs() < 1e-12);
            }
        }
    }
}
