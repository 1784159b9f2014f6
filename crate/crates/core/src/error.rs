use std::fmt;

/// Failure modes of the spectral kernels and solvers.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Grid construction rejected the requested shape.
    Grid(String),
    /// Two fields that must share a grid do not.
    GridMismatch { expected: usize, found: usize },
    /// An operation that needs a zero-mean field got one with mass at the origin.
    NonzeroMean {
        context: &'static str,
        magnitude: f64,
    },
    /// Dissipation exponent outside (1/2, 1].
    AlphaRange(f64),
    /// Invariant-ball radius outside (0, 1/20).
    RadiusRange(f64),
    /// Negative evolution time passed to a propagator.
    NegativeTime(f64),
    /// Convolution support does not fit the padded grid.
    ConvolutionOverflow { support: i64, capacity: i64 },
    /// A requested mode lies outside the dealiased band.
    BandLimit { freq: (i64, i64), cutoff: f64 },
    /// Scalar root search failed to bracket or converge.
    RootSearch(String),
    /// Fixed-point iteration hit the iteration cap.
    MaxIter { iterations: usize, residual: f64 },
    /// A fixed-point iterate left the invariant ball even after shrinking the horizon.
    BallEscape {
        which: &'static str,
        value: f64,
        radius: f64,
        restarts: usize,
    },
    /// Invalid solver or simulation parameter.
    Param(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Grid(msg) => write!(f, "invalid grid: {msg}"),
            Error::GridMismatch { expected, found } => {
                write!(f, "grid mismatch: expected n={expected}, found n={found}")
            }
            Error::NonzeroMean { context, magnitude } => {
                write!(
                    f,
                    "{context} requires a zero-mean field (|mean| = {magnitude:e})"
                )
            }
            Error::AlphaRange(a) => write!(f, "alpha must satisfy 1/2 < alpha <= 1, got {a}"),
            Error::RadiusRange(r) => write!(f, "r must satisfy 0 < r < 1/20, got {r}"),
            Error::NegativeTime(t) => write!(f, "evolution time must be nonnegative, got {t}"),
            Error::ConvolutionOverflow { support, capacity } => write!(
                f,
                "convolution support {support} exceeds padded grid capacity {capacity}"
            ),
            Error::BandLimit { freq, cutoff } => write!(
                f,
                "mode ({}, {}) lies beyond the dealias cutoff {cutoff}",
                freq.0, freq.1
            ),
            Error::RootSearch(msg) => write!(f, "root search failed: {msg}"),
            Error::MaxIter {
                iterations,
                residual,
            } => write!(
                f,
                "no convergence after {iterations} iterations (residual {residual:e})"
            ),
            Error::BallEscape {
                which,
                value,
                radius,
                restarts,
            } => write!(
                f,
                "iterate escaped the invariant ball: {which} = {value:e} > r = {radius:e} \
                 after {restarts} horizon restarts"
            ),
            Error::Param(msg) => write!(f, "invalid parameter: {msg}"),
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;
