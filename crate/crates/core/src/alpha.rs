use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dissipation exponent of the fractional Laplacian, restricted to the
/// sub-critical range (1/2, 1].
///
/// All norm exponents used by the solvers derive from it: the scaling-critical
/// regularity is 1 - 2*alpha and the smoothing gain per unit time lives at
/// regularity 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Alpha(f64);

impl Alpha {
    pub fn new(value: f64) -> Result<Self> {
        if value > 0.5 && value <= 1.0 && value.is_finite() {
            Ok(Alpha(value))
        } else {
            Err(Error::AlphaRange(value))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }

    /// Exponent of the scaling-critical space, 1 - 2*alpha. Always in [-1, 0).
    pub fn sigma_critical(self) -> f64 {
        1.0 - 2.0 * self.0
    }

    /// Order of the dissipative symbol |xi|^(2*alpha).
    pub fn two_alpha(self) -> f64 {
        2.0 * self.0
    }

    /// Interpolation weight 1/(2*alpha), in [1/2, 1).
    pub fn inv_two_alpha(self) -> f64 {
        1.0 / (2.0 * self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accepts_subcritical_range() {
        assert!(Alpha::new(0.51).is_ok());
        assert!(Alpha::new(0.75).is_ok());
        assert!(Alpha::new(1.0).is_ok());
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(Alpha::new(0.5).is_err());
        assert!(Alpha::new(1.0000001).is_err());
        assert!(Alpha::new(0.0).is_err());
        assert!(Alpha::new(f64::NAN).is_err());
    }

    #[test]
    fn derived_exponents() {
        let a = Alpha::new(0.75).unwrap();
        assert_eq!(a.sigma_critical(), -0.5);
        assert_eq!(a.two_alpha(), 1.5);
        assert!((a.inv_two_alpha() - 2.0 / 3.0).abs() < 1e-15);
    }
}
