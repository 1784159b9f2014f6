//! Integral-form solution machinery: the fractional heat semigroup, Duhamel
//! quadrature, low/high frequency splitting of the data, and the contraction
//! scheme that builds the local solution. Every time integral here (the
//! Duhamel z-integral and the L1-in-time norms) is the trapezoidal rule over
//! the stored nodes, so checked bounds use the same quadrature on both sides.

use rustfft::num_complex::Complex64;
use serde::Serialize;

use crate::alpha::Alpha;
use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::grid::Grid;
use crate::norms::{xnorm, InequalityVerdict};
use crate::ops::nonlinear_term;

/// Ball radii must stay below 1/20 for the contraction argument to close.
fn validate_radius(r: f64) -> Result<()> {
    if r > 0.0 && r < 0.05 {
        Ok(())
    } else {
        Err(Error::RadiusRange(r))
    }
}

/// Uniform partition of a closed time interval into `steps` equal steps,
/// hence `steps + 1` nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimeGrid {
    t0: f64,
    t1: f64,
    steps: usize,
}

impl TimeGrid {
    pub fn new(t0: f64, t1: f64, steps: usize) -> Result<Self> {
        if !t0.is_finite() || !t1.is_finite() || t1 <= t0 {
            return Err(Error::Param(format!(
                "time interval must satisfy t0 < t1, got [{t0}, {t1}]"
            )));
        }
        if steps == 0 {
            return Err(Error::Param("time grid needs at least one step".into()));
        }
        Ok(TimeGrid { t0, t1, steps })
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn t1(&self) -> f64 {
        self.t1
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn dt(&self) -> f64 {
        (self.t1 - self.t0) / self.steps as f64
    }

    /// Node count, one more than the step count.
    pub fn nodes(&self) -> usize {
        self.steps + 1
    }

    pub fn node(&self, i: usize) -> f64 {
        debug_assert!(i < self.nodes(), "node index out of range");
        self.t0 + self.dt() * i as f64
    }

    /// Trapezoidal weight of node i for integrals over the whole interval.
    pub fn quad_weight(&self, i: usize) -> f64 {
        if i == 0 || i == self.steps {
            0.5 * self.dt()
        } else {
            self.dt()
        }
    }
}

/// Time-ordered snapshots of a spectral field, one per node of a TimeGrid.
/// Snapshots share a single spatial grid and stay zero-mean Hermitian.
#[derive(Debug, Clone)]
pub struct FieldHistory {
    timegrid: TimeGrid,
    snapshots: Vec<SpectralField>,
}

impl FieldHistory {
    pub fn new(timegrid: TimeGrid, snapshots: Vec<SpectralField>) -> Result<Self> {
        if snapshots.len() != timegrid.nodes() {
            return Err(Error::Param(format!(
                "history needs one snapshot per node: {} nodes, {} snapshots",
                timegrid.nodes(),
                snapshots.len()
            )));
        }
        let first = snapshots[0].grid();
        for snap in &snapshots {
            if snap.grid() != first {
                return Err(Error::GridMismatch {
                    expected: first.n(),
                    found: snap.grid().n(),
                });
            }
            debug_assert!(
                snap.is_zero_mean(),
                "history snapshot has mass at the origin"
            );
            debug_assert!(
                snap.hermitian_defect() <= 1e-9 * (1.0 + snap.linf()),
                "history snapshot lost Hermitian symmetry"
            );
        }
        Ok(FieldHistory {
            timegrid,
            snapshots,
        })
    }

    pub fn zeros(grid: Grid, timegrid: TimeGrid) -> Self {
        let snapshots = (0..timegrid.nodes())
            .map(|_| SpectralField::zeros(grid))
            .collect();
        FieldHistory {
            timegrid,
            snapshots,
        }
    }

    pub fn timegrid(&self) -> TimeGrid {
        self.timegrid
    }

    pub fn grid(&self) -> Grid {
        self.snapshots[0].grid()
    }

    pub fn snapshot(&self, i: usize) -> &SpectralField {
        &self.snapshots[i]
    }

    pub fn snapshots(&self) -> &[SpectralField] {
        &self.snapshots
    }

    /// Largest X^sigma norm over the nodes.
    pub fn sup_xnorm(&self, sigma: f64) -> Result<f64> {
        let mut sup = 0.0f64;
        for snap in &self.snapshots {
            sup = sup.max(xnorm(snap, sigma)?.value);
        }
        Ok(sup)
    }

    /// Trapezoidal time integral of the X^sigma norm.
    pub fn integrated_xnorm(&self, sigma: f64) -> Result<f64> {
        let mut total = 0.0;
        for (i, snap) in self.snapshots.iter().enumerate() {
            total += self.timegrid.quad_weight(i) * xnorm(snap, sigma)?.value;
        }
        Ok(total)
    }
}

/// Apply the fractional heat semigroup: each coefficient decays by
/// e^{-t |xi|^{2 alpha}}.
pub fn heat_propagate(f: &SpectralField, t: f64, alpha: Alpha) -> Result<SpectralField> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::NegativeTime(t));
    }
    let two_alpha = alpha.two_alpha();
    Ok(f.apply_multiplier(|kx, ky| {
        let mu = (kx * kx + ky * ky).sqrt().powf(two_alpha);
        Complex64::new((-t * mu).exp(), 0.0)
    }))
}

/// L^1([0, T], X^1) norm of the heat evolution of f0, evaluated in closed
/// form: dxi^2 sum (1 - e^{-T |xi|^{2 alpha}}) |xi|^{1 - 2 alpha} |f0^(xi)|.
/// No time quadrature is involved.
pub fn linear_l1x1_norm(f0: &SpectralField, horizon: f64, alpha: Alpha) -> Result<f64> {
    if !(horizon >= 0.0) || !horizon.is_finite() {
        return Err(Error::NegativeTime(horizon));
    }
    let grid = f0.grid();
    let two_alpha = alpha.two_alpha();
    let mut sum = 0.0;
    for (idx, fj, fk) in grid.modes() {
        let radius = grid.mode_radius(fj, fk);
        if radius == 0.0 {
            // The X^1 weight kills the origin.
            continue;
        }
        let mu = radius.powf(two_alpha);
        sum +=
            (1.0 - (-horizon * mu).exp()) * radius.powf(1.0 - two_alpha) * f0.coeffs()[idx].norm();
    }
    Ok(grid.dxi() * grid.dxi() * sum)
}

/// Split the data at the smallest shell radius whose exterior tail has
/// critical norm below r/5. Returns (low part, high part, cutoff radius);
/// the parts have disjoint supports and sum to theta0. The cutoff always
/// exists because the tail beyond the largest shell is empty.
pub fn split_initial_data(
    theta0: &SpectralField,
    r: f64,
    alpha: Alpha,
) -> Result<(SpectralField, SpectralField, f64)> {
    validate_radius(r)?;
    if !theta0.is_zero_mean() {
        return Err(Error::NonzeroMean {
            context: "frequency splitting",
            magnitude: theta0.mean().norm(),
        });
    }
    let grid = theta0.grid();
    let sigma = alpha.sigma_critical();
    let radii = grid.shell_radii();
    // Critical-norm mass per shell. mode_radius and shell_radii share one
    // expression, so the binary search hits exactly.
    let mut shell_mass = vec![0.0f64; radii.len()];
    for (idx, fj, fk) in grid.modes() {
        let radius = grid.mode_radius(fj, fk);
        if radius == 0.0 {
            continue;
        }
        let pos = radii
            .binary_search_by(|p| p.partial_cmp(&radius).expect("shell radii are finite"))
            .expect("every mode radius is a shell radius");
        shell_mass[pos] += radius.powf(sigma) * theta0.coeffs()[idx].norm();
    }
    let quad = grid.dxi() * grid.dxi();
    let mut beyond = vec![0.0f64; radii.len()];
    for i in (0..radii.len() - 1).rev() {
        beyond[i] = beyond[i + 1] + shell_mass[i + 1];
    }
    let threshold = r / 5.0;
    let chosen = (0..radii.len())
        .find(|&i| quad * beyond[i] < threshold)
        .expect("tail beyond the largest shell is empty");
    let cutoff = radii[chosen];

    let mut low = vec![Complex64::default(); grid.len()];
    let mut high = vec![Complex64::default(); grid.len()];
    for (idx, fj, fk) in grid.modes() {
        let c = theta0.coeffs()[idx];
        if grid.mode_radius(fj, fk) <= cutoff {
            low[idx] = c;
        } else {
            high[idx] = c;
        }
    }
    let a0 = SpectralField::from_coeffs(grid, low)?;
    let b0 = SpectralField::from_coeffs(grid, high)?;
    Ok((a0, b0, cutoff))
}

/// Parameters of one data splitting together with the measured quantities
/// behind the four construction conditions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SplitConfig {
    /// Invariant-ball radius, in (0, 1/20).
    pub radius: f64,
    /// Shell radius separating low from high frequencies.
    pub cutoff: f64,
    /// Smallness parameter governing the high-frequency fixed point.
    pub eps: f64,
    /// Local time horizon.
    pub horizon: f64,
    /// Critical norm of the full data.
    pub data_norm: f64,
    /// Critical norm of the high part; must stay below radius/5.
    pub tail_norm: f64,
    /// 4 * eps * data_norm; must stay below radius/5.
    pub coupling_lhs: f64,
    /// Interpolation smallness functional at eps; must stay below 1/5.
    pub smallness_lhs: f64,
    /// L^1-in-time X^1 mass of the heat-evolved low part over the horizon;
    /// must stay below eps.
    pub low_l1x1: f64,
}

impl SplitConfig {
    /// The four construction conditions as (label, lhs, strict upper bound).
    pub fn conditions(&self) -> [(&'static str, f64, f64); 4] {
        [
            ("tail norm < r/5", self.tail_norm, self.radius / 5.0),
            ("4 eps |data| < r/5", self.coupling_lhs, self.radius / 5.0),
            ("smallness < 1/5", self.smallness_lhs, 0.2),
            ("low-part L1 X^1 mass < eps", self.low_l1x1, self.eps),
        ]
    }

    pub fn conditions_hold(&self) -> bool {
        self.conditions().iter().all(|(_, lhs, bound)| lhs < bound)
    }
}

/// 2 (A^{1-1/2a} e^{1/2a} + A^{1/2a} e^{1-1/2a}), the product-bound
/// functional whose smallness the contraction needs. Strictly increasing
/// in e for A > 0.
fn smallness_functional(data_norm: f64, eps: f64, alpha: Alpha) -> f64 {
    let beta = alpha.inv_two_alpha();
    2.0 * (data_norm.powf(1.0 - beta) * eps.powf(beta)
        + data_norm.powf(beta) * eps.powf(1.0 - beta))
}

/// Bisection for a root of f on [lo, hi], assuming f(lo) < 0 <= f(hi).
/// Returns the largest known-negative abscissa.
fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, iters: usize) -> Result<f64> {
    if !(f(lo) < 0.0 && f(hi) >= 0.0) {
        return Err(Error::RootSearch(format!(
            "bracket [{lo}, {hi}] does not straddle a sign change"
        )));
    }
    for _ in 0..iters {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// Horizon search bounds. The doubling cap keeps the time grid resolvable
/// when the low-frequency mass never reaches eps (degenerate splits); the
/// construction only needs some positive horizon.
const HORIZON_CAP: f64 = 64.0;
const HORIZON_FLOOR: f64 = 8.673617379884035e-19; // 2^-60

/// Pick the smallness parameter (0.99 of the tightest admissible value) and
/// a horizon that is factor-2 maximal for the low-frequency mass condition:
/// doubling the returned horizon would break it, unless the cap was hit.
pub fn select_epsilon_and_horizon(
    theta0: &SpectralField,
    a0: &SpectralField,
    cutoff: f64,
    r: f64,
    alpha: Alpha,
) -> Result<SplitConfig> {
    validate_radius(r)?;
    let sigma = alpha.sigma_critical();
    let data_norm = xnorm(theta0, sigma)?.value;
    let tail_norm = xnorm(&theta0.sub(a0)?, sigma)?.value;
    if data_norm == 0.0 {
        // Nothing to solve for; any positive eps and horizon qualify.
        return Ok(SplitConfig {
            radius: r,
            cutoff,
            eps: r / 20.0,
            horizon: 1.0,
            data_norm,
            tail_norm,
            coupling_lhs: 0.0,
            smallness_lhs: 0.0,
            low_l1x1: 0.0,
        });
    }

    let eps_coupling = r / (20.0 * data_norm);
    let gap = |e: f64| smallness_functional(data_norm, e, alpha) - 0.2;
    let eps_limit = if gap(eps_coupling) < 0.0 {
        // The coupling condition binds first.
        eps_coupling
    } else {
        bisect(gap, 0.0, eps_coupling, 200)?
    };
    let eps = 0.99 * eps_limit;

    let mut horizon = 1.0f64;
    if linear_l1x1_norm(a0, horizon, alpha)? < eps {
        while horizon < HORIZON_CAP && linear_l1x1_norm(a0, 2.0 * horizon, alpha)? < eps {
            horizon *= 2.0;
        }
    } else {
        while horizon > HORIZON_FLOOR && linear_l1x1_norm(a0, horizon, alpha)? >= eps {
            horizon *= 0.5;
        }
        if linear_l1x1_norm(a0, horizon, alpha)? >= eps {
            return Err(Error::RootSearch(format!(
                "no horizon above {HORIZON_FLOOR:e} meets the low-frequency mass bound {eps:e}"
            )));
        }
    }

    let config = SplitConfig {
        radius: r,
        cutoff,
        eps,
        horizon,
        data_norm,
        tail_norm,
        coupling_lhs: 4.0 * eps * data_norm,
        smallness_lhs: smallness_functional(data_norm, eps, alpha),
        low_l1x1: linear_l1x1_norm(a0, horizon, alpha)?,
    };
    // Met by construction; verified rather than assumed.
    if !config.conditions_hold() {
        return Err(Error::RootSearch(format!(
            "selected parameters violate a construction condition: {config:?}"
        )));
    }
    Ok(config)
}

/// Trapezoidal Duhamel integral of a stored forcing history at one node:
/// sum over z-nodes up to t_index of w_j e^{-(t_i - z_j)|xi|^{2 alpha}}
/// forcing_j(xi), with trapezoid weights over [t_0, t_i].
pub fn duhamel_quadrature(
    forcing: &FieldHistory,
    t_index: usize,
    alpha: Alpha,
) -> Result<SpectralField> {
    let tg = forcing.timegrid();
    if t_index >= tg.nodes() {
        return Err(Error::Param(format!(
            "node index {t_index} outside a history with {} nodes",
            tg.nodes()
        )));
    }
    let grid = forcing.grid();
    let mut out = SpectralField::zeros(grid);
    if t_index == 0 {
        return Ok(out);
    }
    let dt = tg.dt();
    let two_alpha = alpha.two_alpha();
    let mu: Vec<f64> = grid
        .modes()
        .map(|(_, fj, fk)| grid.mode_radius(fj, fk).powf(two_alpha))
        .collect();
    for j in 0..=t_index {
        let w = if j == 0 || j == t_index { 0.5 * dt } else { dt };
        let gap = dt * (t_index - j) as f64;
        let snap = forcing.snapshot(j).coeffs().to_vec();
        let dst = out.coeffs_mut();
        for (m, c) in snap.iter().enumerate() {
            dst[m] += w * (-gap * mu[m]).exp() * c;
        }
    }
    Ok(out)
}

/// Map the advective nonlinearity over every snapshot.
pub fn nonlinear_history(history: &FieldHistory) -> Result<FieldHistory> {
    let mut snaps = Vec::with_capacity(history.snapshots().len());
    for snap in history.snapshots() {
        snaps.push(nonlinear_term(snap)?);
    }
    FieldHistory::new(history.timegrid(), snaps)
}

/// Duhamel integral driven by the advective nonlinearity of the state
/// history, evaluated at one node. When sweeping all nodes, compute the
/// forcing once with nonlinear_history and call duhamel_quadrature instead.
pub fn duhamel_integral(
    history: &FieldHistory,
    t_index: usize,
    alpha: Alpha,
) -> Result<SpectralField> {
    duhamel_quadrature(&nonlinear_history(history)?, t_index, alpha)
}

/// One application of the fixed-point map: heat-evolve the high part of the
/// data and subtract the Duhamel integral of the full nonlinearity of a + b.
/// The node-0 output is b0 exactly, the integral term being empty there.
pub fn psi_apply(
    b: &FieldHistory,
    a: &FieldHistory,
    b0: &SpectralField,
    alpha: Alpha,
) -> Result<FieldHistory> {
    if a.timegrid() != b.timegrid() {
        return Err(Error::Param(
            "low and high histories use different time grids".into(),
        ));
    }
    if a.grid() != b.grid() || a.grid() != b0.grid() {
        return Err(Error::GridMismatch {
            expected: a.grid().n(),
            found: b.grid().n(),
        });
    }
    if !b0.is_zero_mean() {
        return Err(Error::NonzeroMean {
            context: "fixed-point map",
            magnitude: b0.mean().norm(),
        });
    }
    let tg = a.timegrid();
    let mut theta_snaps = Vec::with_capacity(tg.nodes());
    for i in 0..tg.nodes() {
        theta_snaps.push(a.snapshot(i).add(b.snapshot(i))?);
    }
    let forcing = nonlinear_history(&FieldHistory::new(tg, theta_snaps)?)?;
    let mut out = Vec::with_capacity(tg.nodes());
    for i in 0..tg.nodes() {
        let linear = heat_propagate(b0, tg.node(i) - tg.t0(), alpha)?;
        let integral = duhamel_quadrature(&forcing, i, alpha)?;
        out.push(linear.sub(&integral)?);
    }
    FieldHistory::new(tg, out)
}

/// Record of one fixed-point construction run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PicardReport {
    pub split: SplitConfig,
    /// Applications of the map until the residual fell below tolerance.
    pub iterations: usize,
    /// Horizon halvings forced by ball escapes.
    pub restarts: usize,
    /// Per-iteration X_T distance between consecutive iterates.
    pub residuals: Vec<f64>,
    /// residual[k+1] / residual[k]; settles near or below 1/2 inside the ball.
    pub contraction_ratios: Vec<f64>,
    /// Components of the converged high part in X_T; both stay <= radius.
    pub final_sup_norm: f64,
    pub final_l1_norm: f64,
}

/// X_T distance between histories on one time grid: sup critical norm plus
/// integrated X^1 norm of the difference.
fn history_distance(x: &FieldHistory, y: &FieldHistory, sigma: f64) -> Result<f64> {
    let tg = x.timegrid();
    let mut sup = 0.0f64;
    let mut integ = 0.0;
    for i in 0..tg.nodes() {
        let diff = x.snapshot(i).sub(y.snapshot(i))?;
        sup = sup.max(xnorm(&diff, sigma)?.value);
        integ += tg.quad_weight(i) * xnorm(&diff, 1.0)?.value;
    }
    Ok(sup + integ)
}

/// Full local construction: split the data, choose smallness and horizon,
/// then iterate the fixed-point map from zero until the X_T residual drops
/// below tol. Returns the combined state history and a report.
///
/// Iterates must stay inside the ball of radius r in both X_T components.
/// If one escapes (possible through quadrature error), the horizon is halved
/// and the iteration restarts, at most five times.
pub fn picard_solve(
    theta0: &SpectralField,
    r: f64,
    alpha: Alpha,
    steps: usize,
    max_iter: usize,
    tol: f64,
) -> Result<(FieldHistory, PicardReport)> {
    if max_iter == 0 {
        return Err(Error::Param("max_iter must be positive".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::Param(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let (a0, b0, cutoff) = split_initial_data(theta0, r, alpha)?;
    let mut config = select_epsilon_and_horizon(theta0, &a0, cutoff, r, alpha)?;
    let sigma = alpha.sigma_critical();
    let grid = theta0.grid();
    let mut restarts = 0usize;
    loop {
        let tg = TimeGrid::new(0.0, config.horizon, steps)?;
        let mut a_snaps = Vec::with_capacity(tg.nodes());
        for i in 0..tg.nodes() {
            a_snaps.push(heat_propagate(&a0, tg.node(i), alpha)?);
        }
        let a_hist = FieldHistory::new(tg, a_snaps)?;
        let mut b = FieldHistory::zeros(grid, tg);
        let mut residuals: Vec<f64> = Vec::new();
        let mut escaped: Option<(&'static str, f64)> = None;
        for _ in 0..max_iter {
            let next = psi_apply(&b, &a_hist, &b0, alpha)?;
            let sup = next.sup_xnorm(sigma)?;
            let l1 = next.integrated_xnorm(1.0)?;
            if sup > r || l1 > r {
                escaped = Some(if sup > r {
                    ("time-sup critical norm", sup)
                } else {
                    ("time-integrated X^1 norm", l1)
                });
                break;
            }
            let res = history_distance(&next, &b, sigma)?;
            residuals.push(res);
            b = next;
            if res < tol {
                let mut theta_snaps = Vec::with_capacity(tg.nodes());
                for i in 0..tg.nodes() {
                    theta_snaps.push(a_hist.snapshot(i).add(b.snapshot(i))?);
                }
                let theta = FieldHistory::new(tg, theta_snaps)?;
                let contraction_ratios = residuals
                    .windows(2)
                    .filter(|w| w[0] > 0.0)
                    .map(|w| w[1] / w[0])
                    .collect();
                let report = PicardReport {
                    split: config,
                    iterations: residuals.len(),
                    restarts,
                    final_sup_norm: b.sup_xnorm(sigma)?,
                    final_l1_norm: b.integrated_xnorm(1.0)?,
                    residuals,
                    contraction_ratios,
                };
                return Ok((theta, report));
            }
        }
        if let Some((which, value)) = escaped {
            if restarts == 5 {
                return Err(Error::BallEscape {
                    which,
                    value,
                    radius: r,
                    restarts,
                });
            }
            restarts += 1;
            config.horizon *= 0.5;
            config.low_l1x1 = linear_l1x1_norm(&a0, config.horizon, alpha)?;
            continue;
        }
        return Err(Error::MaxIter {
            iterations: max_iter,
            residual: residuals.last().copied().unwrap_or(f64::INFINITY),
        });
    }
}

/// Duhamel sup-bound: the time-sup critical norm of the Duhamel integral of
/// a state history is at most 4 x (sup critical norm) x (integrated X^1
/// norm) of that history.
pub fn check_duhamel_sup_bound(history: &FieldHistory, alpha: Alpha) -> Result<InequalityVerdict> {
    let sigma = alpha.sigma_critical();
    let forcing = nonlinear_history(history)?;
    let mut lhs = 0.0f64;
    for i in 0..history.timegrid().nodes() {
        let integral = duhamel_quadrature(&forcing, i, alpha)?;
        lhs = lhs.max(xnorm(&integral, sigma)?.value);
    }
    let rhs = 4.0 * history.sup_xnorm(sigma)? * history.integrated_xnorm(1.0)?;
    Ok(InequalityVerdict::new(lhs, rhs))
}

/// Duhamel L^1-bound: the integrated X^1 norm of the Duhamel integral obeys
/// the same 4 x sup x integral bound.
pub fn check_duhamel_l1_bound(history: &FieldHistory, alpha: Alpha) -> Result<InequalityVerdict> {
    let sigma = alpha.sigma_critical();
    let forcing = nonlinear_history(history)?;
    let tg = history.timegrid();
    let mut lhs = 0.0;
    for i in 0..tg.nodes() {
        let integral = duhamel_quadrature(&forcing, i, alpha)?;
        lhs += tg.quad_weight(i) * xnorm(&integral, 1.0)?.value;
    }
    let rhs = 4.0 * history.sup_xnorm(sigma)? * history.integrated_xnorm(1.0)?;
    Ok(InequalityVerdict::new(lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{random_below_cutoff, rescale_to_xnorm, single_mode};
    use std::f64::consts::TAU;

    fn alpha(v: f64) -> Alpha {
        Alpha::new(v).expect("test exponent is admissible")
    }

    fn unit_grid(n: usize) -> Grid {
        Grid::new(n, TAU).expect("test grid is valid")
    }

    fn heat_history(f0: &SpectralField, tg: TimeGrid, a: Alpha) -> FieldHistory {
        let snaps = (0..tg.nodes())
            .map(|i| heat_propagate(f0, tg.node(i), a).expect("nonnegative time"))
            .collect();
        FieldHistory::new(tg, snaps).expect("snapshots match the grid")
    }

    #[test]
    fn heat_identity_at_time_zero() {
        let grid = unit_grid(8);
        let f = random_below_cutoff(grid, 3);
        let out = heat_propagate(&f, 0.0, alpha(0.75)).unwrap();
        assert_eq!(
            out.coeffs(),
            f.coeffs(),
            "zero-time propagation must be the identity"
        );
    }

    #[test]
    fn heat_decays_unit_mode_exactly() {
        let grid = unit_grid(8);
        let f = single_mode(grid, (2, 0), 1.0).unwrap();
        let out = heat_propagate(&f, 0.5, alpha(1.0)).unwrap();
        let expected = 0.1353352832366127; // e^{-0.5 * 2^2}
        assert!(
            (out.mode(2, 0).re - expected).abs() < 1e-15,
            "decay factor {} departs from e^-2",
            out.mode(2, 0).re
        );
    }

    #[test]
    fn heat_rejects_negative_time() {
        let grid = unit_grid(8);
        let f = single_mode(grid, (1, 0), 1.0).unwrap();
        assert!(matches!(
            heat_propagate(&f, -0.1, alpha(0.75)),
            Err(Error::NegativeTime(_))
        ));
    }

    #[test]
    fn heat_satisfies_semigroup_law() {
        let grid = unit_grid(8);
        let f = random_below_cutoff(grid, 11);
        let a = alpha(0.8);
        let two_step = heat_propagate(&heat_propagate(&f, 0.3, a).unwrap(), 0.45, a).unwrap();
        let one_step = heat_propagate(&f, 0.75, a).unwrap();
        let defect = two_step.sub(&one_step).unwrap().linf();
        assert!(
            defect <= 1e-13 * (1.0 + f.linf()),
            "semigroup defect {defect}"
        );
    }

    #[test]
    fn linear_mass_vanishes_at_zero_horizon() {
        let grid = unit_grid(8);
        let f = random_below_cutoff(grid, 5);
        let mass = linear_l1x1_norm(&f, 0.0, alpha(0.75)).unwrap();
        assert_eq!(mass, 0.0);
    }

    #[test]
    fn linear_mass_matches_time_quadrature() {
        let grid = unit_grid(8);
        let f = random_below_cutoff(grid, 9);
        let a = alpha(0.75);
        let horizon = 0.7;
        let closed = linear_l1x1_norm(&f, horizon, a).unwrap();
        let substeps = 10_000usize;
        let dt = horizon / substeps as f64;
        let mut quad = 0.0;
        for i in 0..=substeps {
            let w = if i == 0 || i == substeps {
                0.5 * dt
            } else {
                dt
            };
            let decayed = heat_propagate(&f, dt * i as f64, a).unwrap();
            quad += w * xnorm(&decayed, 1.0).unwrap().value;
        }
        assert!(
            (closed - quad).abs() <= 1e-6 * (1.0 + closed),
            "closed form {closed} vs quadrature {quad}"
        );
    }

    #[test]
    fn linear_mass_saturates_for_single_mode() {
        let grid = unit_grid(8);
        let f = single_mode(grid, (1, 0), 1.0).unwrap();
        // The infinite-horizon limit for an amplitude-1 pair at radius 1 is
        // 2 * 1^{1-2a} * 1 = 2.
        let mass = linear_l1x1_norm(&f, 60.0, alpha(0.75)).unwrap();
        assert!((mass - 2.0).abs() <= 1e-12, "limit mass {mass}");
    }

    #[test]
    fn split_keeps_single_mode_low() {
        let grid = unit_grid(8);
        let f = single_mode(grid, (1, 0), 1.0).unwrap();
        let (a0, b0, cutoff) = split_initial_data(&f, 0.01, alpha(0.75)).unwrap();
        assert_eq!(
            b0.linf(),
            0.0,
            "tail beyond the only occupied shell is empty"
        );
        assert_eq!(a0.coeffs(), f.coeffs());
        assert!(cutoff >= 1.0);
    }

    #[test]
    fn split_sends_tiny_data_entirely_high() {
        let grid = unit_grid(8);
        let sigma = alpha(0.75).sigma_critical();
        let f = rescale_to_xnorm(&random_below_cutoff(grid, 2), sigma, 1e-4).unwrap();
        // Total critical norm 1e-4 < r/5 = 2e-3, so even the full field
        // qualifies as tail.
        let (a0, b0, cutoff) = split_initial_data(&f, 0.01, alpha(0.75)).unwrap();
        assert_eq!(cutoff, 0.0);
        assert_eq!(a0.linf(), 0.0);
        assert_eq!(b0.coeffs(), f.coeffs());
    }

    #[test]
    fn split_two_shell_tail_arithmetic() {
        let grid = unit_grid(16);
        let a = alpha(0.75); // critical exponent -1/2
        let mut f = SpectralField::zeros(grid);
        f.set_mode_pair(1, 0, Complex64::new(0.01, 0.0));
        f.set_mode_pair(3, 0, Complex64::new(0.005, 0.0));
        // Shell masses: 2*0.01 = 0.02 at radius 1, 2*0.005*3^{-1/2} at
        // radius 3. With r = 0.04 the full tail 0.02577.. fails r/5 = 0.008
        // but the outer shell alone 0.00577.. passes, so the cutoff is 1.
        let (a0, b0, cutoff) = split_initial_data(&f, 0.04, a).unwrap();
        assert_eq!(cutoff, 1.0);
        assert_eq!(a0.mode(1, 0).re, 0.01);
        assert_eq!(b0.mode(3, 0).re, 0.005);
        let tail = xnorm(&b0, a.sigma_critical()).unwrap().value;
        let expected = 2.0 * 0.005 / 3.0f64.sqrt();
        assert!(
            (tail - expected).abs() <= 1e-15,
            "tail norm {tail} vs {expected}"
        );
        let sum = a0.add(&b0).unwrap();
        assert_eq!(sum.coeffs(), f.coeffs(), "split parts must sum to the data");
    }

    #[test]
    fn split_rejects_radius_out_of_range() {
        let grid = unit_grid(8);
        let f = single_mode(grid, (1, 0), 1.0).unwrap();
        assert!(matches!(
            split_initial_data(&f, 0.05, alpha(0.75)),
            Err(Error::RadiusRange(_))
        ));
        assert!(matches!(
            split_initial_data(&f, 0.0, alpha(0.75)),
            Err(Error::RadiusRange(_))
        ));
    }

    #[test]
    fn selected_parameters_satisfy_all_conditions() {
        let grid = unit_grid(16);
        let a = alpha(0.6);
        let sigma = a.sigma_critical();
        let f = rescale_to_xnorm(&random_below_cutoff(grid, 17), sigma, 1.0).unwrap();
        let r = 0.04;
        let (a0, _, cutoff) = split_initial_data(&f, r, a).unwrap();
        let config = select_epsilon_and_horizon(&f, &a0, cutoff, r, a).unwrap();
        for (label, lhs, bound) in config.conditions() {
            assert!(lhs < bound, "{label}: {lhs} !< {bound}");
        }
        assert!(config.eps > 0.0 && config.horizon > 0.0);
    }

    #[test]
    fn horizon_is_factor_two_maximal_for_single_mode() {
        let grid = unit_grid(8);
        let a = alpha(1.0);
        let f = single_mode(grid, (1, 0), 1.0).unwrap();
        let (a0, _, cutoff) = split_initial_data(&f, 0.04, a).unwrap();
        let config = select_epsilon_and_horizon(&f, &a0, cutoff, 0.04, a).unwrap();
        // Mass 2(1 - e^{-T}) hits eps at T* = -log(1 - eps/2).
        let t_star = -(1.0 - config.eps / 2.0).ln();
        assert!(
            config.horizon < t_star,
            "horizon must leave the mass below eps"
        );
        assert!(
            2.0 * config.horizon >= t_star * (1.0 - 1e-12),
            "horizon {} is more than a factor 2 below {}",
            config.horizon,
            t_star
        );
    }

    #[test]
    fn zero_data_yields_trivial_config() {
        let grid = unit_grid(8);
        let f = SpectralField::zeros(grid);
        let (a0, _, cutoff) = split_initial_data(&f, 0.01, alpha(0.75)).unwrap();
        let config = select_epsilon_and_horizon(&f, &a0, cutoff, 0.01, alpha(0.75)).unwrap();
        assert_eq!(config.data_norm, 0.0);
        assert!(config.eps > 0.0 && config.horizon > 0.0);
        assert!(config.conditions_hold());
    }

    #[test]
    fn duhamel_of_zero_forcing_vanishes() {
        let grid = unit_grid(8);
        let tg = TimeGrid::new(0.0, 1.0, 4).unwrap();
        let forcing = FieldHistory::zeros(grid, tg);
        for i in 0..tg.nodes() {
            let out = duhamel_quadrature(&forcing, i, alpha(0.75)).unwrap();
            assert_eq!(out.linf(), 0.0);
        }
    }

    #[test]
    fn duhamel_matches_constant_forcing_closed_form() {
        let grid = unit_grid(8);
        let a = alpha(0.75);
        let g = single_mode(grid, (2, 1), 0.7).unwrap();
        let mu = grid.mode_radius(2, 1).powf(a.two_alpha());
        let horizon = 1.2;
        let err_at = |steps: usize| -> f64 {
            let tg = TimeGrid::new(0.0, horizon, steps).unwrap();
            let snaps = (0..tg.nodes()).map(|_| g.clone()).collect();
            let forcing = FieldHistory::new(tg, snaps).unwrap();
            let out = duhamel_quadrature(&forcing, steps, a).unwrap();
            let exact = 0.7 * (1.0 - (-horizon * mu).exp()) / mu;
            (out.mode(2, 1).re - exact).abs() / exact
        };
        let coarse = err_at(64);
        let fine = err_at(128);
        assert!(
            coarse <= 1e-3,
            "trapezoid error {coarse} too large at 64 steps"
        );
        let ratio = coarse / fine;
        assert!(
            (3.5..=4.5).contains(&ratio),
            "halving dt gave error ratio {ratio}, expected near 4"
        );
    }

    #[test]
    fn fixed_point_map_starts_at_high_part() {
        let grid = unit_grid(8);
        let a_exp = alpha(0.75);
        let tg = TimeGrid::new(0.0, 0.5, 4).unwrap();
        let low0 = random_below_cutoff(grid, 21);
        let a_hist = heat_history(&low0, tg, a_exp);
        let b_hist = FieldHistory::zeros(grid, tg);
        let b0 = random_below_cutoff(grid, 22).scaled(0.01);
        let psi = psi_apply(&b_hist, &a_hist, &b0, a_exp).unwrap();
        assert_eq!(
            psi.snapshot(0).coeffs(),
            b0.coeffs(),
            "the integral term is empty at the first node"
        );
    }

    #[test]
    fn fixed_point_map_annihilates_plane_wave_low_part() {
        let grid = unit_grid(8);
        let a_exp = alpha(0.75);
        let tg = TimeGrid::new(0.0, 0.5, 4).unwrap();
        let wave = single_mode(grid, (1, 0), 1.0).unwrap();
        let a_hist = heat_history(&wave, tg, a_exp);
        let b_hist = FieldHistory::zeros(grid, tg);
        let b0 = SpectralField::zeros(grid);
        let psi = psi_apply(&b_hist, &a_hist, &b0, a_exp).unwrap();
        for i in 0..tg.nodes() {
            assert!(
                psi.snapshot(i).linf() <= 1e-12,
                "plane-wave self-advection must vanish, got {}",
                psi.snapshot(i).linf()
            );
        }
    }

    #[test]
    fn picard_single_mode_reduces_to_heat_decay() {
        let grid = unit_grid(16);
        let a = alpha(0.75);
        let f = single_mode(grid, (1, 0), 0.3).unwrap();
        let (theta, report) = picard_solve(&f, 0.04, a, 16, 20, 1e-10).unwrap();
        assert!(report.iterations <= 2, "one effective iteration expected");
        assert_eq!(report.restarts, 0);
        let tg = theta.timegrid();
        for i in 0..tg.nodes() {
            let exact = heat_propagate(&f, tg.node(i), a).unwrap();
            let defect = theta.snapshot(i).sub(&exact).unwrap().linf();
            assert!(
                defect <= 1e-12,
                "node {i} departs from pure decay by {defect}"
            );
        }
    }

    #[test]
    fn picard_contracts_on_random_small_data() {
        let grid = unit_grid(16);
        let a = alpha(0.75);
        let sigma = a.sigma_critical();
        let f = rescale_to_xnorm(&random_below_cutoff(grid, 40), sigma, 0.2).unwrap();
        let tol = 1e-9;
        let (theta, report) = picard_solve(&f, 0.04, a, 32, 40, tol).unwrap();
        assert!(report.split.conditions_hold());
        assert!(
            report.final_sup_norm <= 0.04,
            "sup {}",
            report.final_sup_norm
        );
        assert!(report.final_l1_norm <= 0.04, "l1 {}", report.final_l1_norm);
        for ratio in &report.contraction_ratios {
            assert!(*ratio <= 0.55, "contraction ratio {ratio} above 0.55");
        }
        // Converged history obeys the discrete mild-solution identity up to
        // the iteration tolerance amplified by one more contraction factor.
        let forcing = nonlinear_history(&theta).unwrap();
        let tg = theta.timegrid();
        let mut worst = 0.0f64;
        for i in 0..tg.nodes() {
            let linear = heat_propagate(&f, tg.node(i), a).unwrap();
            let integral = duhamel_quadrature(&forcing, i, a).unwrap();
            let defect = theta
                .snapshot(i)
                .sub(&linear.sub(&integral).unwrap())
                .unwrap();
            worst = worst.max(xnorm(&defect, sigma).unwrap().value);
        }
        assert!(worst <= 10.0 * tol, "mild-solution identity defect {worst}");
    }

    #[test]
    fn duhamel_bounds_hold_on_evolving_histories() {
        let grid = unit_grid(8);
        for (seed, av) in [(1u64, 0.6), (2, 0.75), (3, 1.0), (4, 0.9)] {
            let a = alpha(av);
            let sigma = a.sigma_critical();
            let f = rescale_to_xnorm(&random_below_cutoff(grid, seed), sigma, 0.3).unwrap();
            let tg = TimeGrid::new(0.0, 0.5, 64).unwrap();
            let history = heat_history(&f, tg, a);
            let sup = check_duhamel_sup_bound(&history, a).unwrap();
            assert!(
                sup.passed,
                "sup bound failed: lhs {} rhs {}",
                sup.lhs, sup.rhs
            );
            let l1 = check_duhamel_l1_bound(&history, a).unwrap();
            assert!(
                l1.passed,
                "integrated bound failed: lhs {} rhs {}",
                l1.lhs, l1.rhs
            );
        }
    }

    #[test]
    fn time_grid_validates_interval_and_steps() {
        assert!(TimeGrid::new(0.0, 0.0, 4).is_err());
        assert!(TimeGrid::new(0.5, 0.4, 4).is_err());
        assert!(TimeGrid::new(0.0, 1.0, 0).is_err());
        let tg = TimeGrid::new(0.0, 1.0, 4).unwrap();
        assert_eq!(tg.nodes(), 5);
        assert_eq!(tg.dt(), 0.25);
        assert_eq!(tg.node(4), 1.0);
        assert_eq!(tg.quad_weight(0), 0.125);
        assert_eq!(tg.quad_weight(2), 0.25);
    }
}
