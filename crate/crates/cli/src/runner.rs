//! Experiment orchestration: initial-data generation, dispatch to the core
//! solvers and certificate machinery, and persistence of the run artifacts
//! (trace.csv, report.json, config_echo.toml).

use std::fs;
use std::path::Path;

use anyhow::Context;
use serde::Serialize;
use sqg_core::{
    blowup_monitor, check_interpolation, check_product_bounds, default_dt, gaussian_vortex_pair,
    parallel_enabled, perturbation_decay, picard_solve, random_band, random_below_cutoff,
    rescale_to_xnorm, scaling_check, self_convergent, shear_layer, simulate, single_mode,
    small_data_certificate, xnorm, Alpha, CertStatus, Certificate, Error, FieldHistory, Grid,
    InequalityVerdict, NormTrace, PicardReport, SimConfig, SpectralField, TraceRow,
};

use crate::config::{Command, InitKind, InitSpec, RunConfig};

pub const TRACE_HEADER: &str = "t,n_low,n_high,cum_x1\n";

/// Second seed stream for fields that must be independent of the data seed.
const SEED_SPLIT: u64 = 0x9e37_79b9_7f4a_7c15;

/// Build the configured initial data. Deterministic in the seed; when
/// target_norm is set the result's critical norm hits it exactly.
pub fn generate_initial(
    spec: &InitSpec,
    grid: Grid,
    seed: u64,
    sigma: f64,
) -> sqg_core::Result<SpectralField> {
    let f = match spec.kind {
        InitKind::SingleMode => single_mode(grid, spec.wavevector, spec.amplitude)?,
        InitKind::RandomBand => {
            random_band(grid, spec.band_lo, spec.band_hi, seed).scaled(spec.amplitude)
        }
        InitKind::GaussianVortexPair => gaussian_vortex_pair(grid, spec.amplitude),
        InitKind::Shear => shear_layer(grid, spec.amplitude),
    };
    match spec.target_norm {
        Some(target) => rescale_to_xnorm(&f, sigma, target),
        None => Ok(f),
    }
}

/// Certified quantities of the coarse and refined runs compared by the
/// resolution gate.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GateReport {
    pub coarse_final_n_low: f64,
    pub coarse_final_cum: f64,
    pub fine_final_n_low: f64,
    pub fine_final_cum: f64,
    pub rel_tol: f64,
    pub convergent: bool,
}

/// Aggregate over one fuzzed inequality.
#[derive(Debug, Clone, Serialize)]
pub struct LemmaBucket {
    pub name: &'static str,
    pub cases: usize,
    /// Most adverse slack/rhs seen; negative would be a violation.
    pub worst_rel_slack: f64,
    pub violations: Vec<LemmaViolation>,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct LemmaViolation {
    pub seed: u64,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
}

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub command: Command,
    pub alpha: f64,
    pub n: usize,
    pub dt: f64,
    pub seed: u64,
    pub status: CertStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificates: Option<Vec<Certificate>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub picard: Option<PicardReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solver_error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lemmas: Option<Vec<LemmaBucket>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub resolution_gate: Option<GateReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diverged_at: Option<f64>,
}

fn exit_code(status: CertStatus) -> i32 {
    match status {
        CertStatus::Certified => 0,
        CertStatus::Violated => 2,
        CertStatus::Inconclusive => 3,
    }
}

/// Rerun at halved dt on a twice-refined grid and compare the certified
/// quantities. Sampling times coincide because record_every is doubled.
fn resolution_gate(
    theta0: &SpectralField,
    cfg: &SimConfig,
    coarse: &NormTrace,
) -> anyhow::Result<GateReport> {
    let fine_grid = Grid::new(cfg.grid.n() * 2, cfg.grid.period())?;
    let fine0 = theta0.embed(fine_grid)?;
    let fine_cfg = SimConfig::new(
        cfg.alpha,
        cfg.dt / 2.0,
        cfg.t_end,
        fine_grid,
        cfg.record_every * 2,
        cfg.linear_only,
    )?;
    let (_, fine) = simulate(&fine0, &fine_cfg)?;
    let rel_tol = 0.1;
    let last = |t: &NormTrace| t.rows.last().map_or((0.0, 0.0), |r| (r.n_low, r.cum_x1));
    let (cn, cc) = last(coarse);
    let (fn_, fc) = last(&fine);
    Ok(GateReport {
        coarse_final_n_low: cn,
        coarse_final_cum: cc,
        fine_final_n_low: fn_,
        fine_final_cum: fc,
        rel_tol,
        convergent: self_convergent(coarse, &fine, rel_tol),
    })
}

/// A certificate whose run failed the resolution gate cannot be trusted in
/// either direction.
fn gate_demote(cert: &mut Certificate, gate: &GateReport) {
    if !gate.convergent && cert.status != CertStatus::Inconclusive {
        cert.status = CertStatus::Inconclusive;
        cert.reason = format!(
            "resolution gate failed: the refined run moves a certified quantity by more \
             than {:.0}% (original verdict: {})",
            gate.rel_tol * 100.0,
            cert.reason
        );
    }
}

/// Norm trace over the nodes of a contraction-solve history.
fn trace_from_history(history: &FieldHistory, sigma: f64) -> sqg_core::Result<NormTrace> {
    let tg = history.timegrid();
    let mut rows = Vec::with_capacity(tg.nodes());
    let mut cum = 0.0;
    let mut prev: Option<f64> = None;
    for (i, snap) in history.snapshots().iter().enumerate() {
        let n_low = xnorm(snap, sigma)?.value;
        let n_high = xnorm(snap, 1.0)?.value;
        if let Some(p) = prev {
            cum += 0.5 * tg.dt() * (p + n_high);
        }
        prev = Some(n_high);
        rows.push(TraceRow {
            t: tg.node(i),
            n_low,
            n_high,
            cum_x1: cum,
        });
    }
    Ok(NormTrace {
        rows,
        step_dt: tg.dt(),
        diverged_at: None,
    })
}

fn csv_bytes(trace: &NormTrace) -> Vec<u8> {
    let mut buf = Vec::new();
    trace
        .write_csv(&mut buf)
        .expect("writing to a Vec cannot fail");
    buf
}

struct Outcome {
    status: CertStatus,
    trace_csv: Vec<u8>,
    certificates: Option<Vec<Certificate>>,
    picard: Option<PicardReport>,
    solver_error: Option<String>,
    lemmas: Option<Vec<LemmaBucket>>,
    resolution_gate: Option<GateReport>,
    diverged_at: Option<f64>,
}

impl Outcome {
    fn new(status: CertStatus, trace_csv: Vec<u8>) -> Self {
        Outcome {
            status,
            trace_csv,
            certificates: None,
            picard: None,
            solver_error: None,
            lemmas: None,
            resolution_gate: None,
            diverged_at: None,
        }
    }
}

fn run_simulate(theta0: &SpectralField, cfg: &SimConfig, gated: bool) -> anyhow::Result<Outcome> {
    let (_, trace) = simulate(theta0, cfg)?;
    let mut cert = blowup_monitor(&trace, cfg.t_end);
    let gate = if gated {
        Some(resolution_gate(theta0, cfg, &trace)?)
    } else {
        None
    };
    if let Some(g) = &gate {
        gate_demote(&mut cert, g);
    }
    let mut out = Outcome::new(cert.status, csv_bytes(&trace));
    out.diverged_at = trace.diverged_at;
    out.certificates = Some(vec![cert]);
    out.resolution_gate = gate;
    Ok(out)
}

fn run_certify(theta0: &SpectralField, cfg: &SimConfig, sigma: f64) -> anyhow::Result<Outcome> {
    let norm0 = xnorm(theta0, sigma)?.value;
    let (_, trace) = simulate(theta0, cfg)?;
    let gate = resolution_gate(theta0, cfg, &trace)?;
    let mut cert = small_data_certificate(&trace, norm0);
    gate_demote(&mut cert, &gate);
    let mut out = Outcome::new(cert.status, csv_bytes(&trace));
    out.diverged_at = trace.diverged_at;
    out.certificates = Some(vec![cert]);
    out.resolution_gate = Some(gate);
    Ok(out)
}

fn run_picard(
    theta0: &SpectralField,
    config: &RunConfig,
    alpha: Alpha,
    sigma: f64,
) -> anyhow::Result<Outcome> {
    match picard_solve(
        theta0,
        config.r,
        alpha,
        config.steps,
        config.max_iter,
        config.tol,
    ) {
        Ok((history, report)) => {
            let trace = trace_from_history(&history, sigma)?;
            let mut out = Outcome::new(CertStatus::Certified, csv_bytes(&trace));
            out.picard = Some(report);
            Ok(out)
        }
        Err(e @ (Error::BallEscape { .. } | Error::MaxIter { .. })) => {
            let mut out = Outcome::new(CertStatus::Violated, TRACE_HEADER.as_bytes().to_vec());
            out.solver_error = Some(e.to_string());
            Ok(out)
        }
        Err(e) => Err(e.into()),
    }
}

fn run_verify_lemmas(config: &RunConfig, grid: Grid, alpha: Alpha) -> anyhow::Result<Outcome> {
    let per_seed = |i: usize| -> sqg_core::Result<(u64, [InequalityVerdict; 5])> {
        let s = config.seed.wrapping_add(i as u64);
        let f = random_below_cutoff(grid, s);
        let g = random_below_cutoff(grid, s ^ SEED_SPLIT);
        let [interp_mid, interp_zero] = check_interpolation(&f, alpha)?;
        let [sum, mixed, square] = check_product_bounds(&f, &g, alpha)?;
        Ok((s, [interp_mid, interp_zero, sum, mixed, square]))
    };
    let results: Vec<(u64, [InequalityVerdict; 5])> = if parallel_enabled() {
        use rayon::prelude::*;
        (0..config.trials)
            .into_par_iter()
            .map(per_seed)
            .collect::<sqg_core::Result<_>>()?
    } else {
        (0..config.trials)
            .map(per_seed)
            .collect::<sqg_core::Result<_>>()?
    };

    let names = [
        "interpolation_intermediate",
        "interpolation_zero",
        "product_sum",
        "product_mixed",
        "product_square",
    ];
    let mut buckets: Vec<LemmaBucket> = names
        .into_iter()
        .map(|name| LemmaBucket {
            name,
            cases: config.trials,
            worst_rel_slack: f64::INFINITY,
            violations: Vec::new(),
        })
        .collect();
    for (seed, verdicts) in &results {
        for (k, v) in verdicts.iter().enumerate() {
            let rel = v.slack / v.rhs.max(f64::MIN_POSITIVE);
            if rel < buckets[k].worst_rel_slack {
                buckets[k].worst_rel_slack = rel;
            }
            if !v.passed {
                buckets[k].violations.push(LemmaViolation {
                    seed: *seed,
                    lhs: v.lhs,
                    rhs: v.rhs,
                    slack: v.slack,
                });
            }
        }
    }
    let clean = buckets.iter().all(|b| b.violations.is_empty());
    let status = if clean {
        CertStatus::Certified
    } else {
        CertStatus::Violated
    };
    let mut out = Outcome::new(status, TRACE_HEADER.as_bytes().to_vec());
    out.lemmas = Some(buckets);
    Ok(out)
}

fn run_scaling(
    theta0: &SpectralField,
    config: &RunConfig,
    grid: Grid,
    alpha: Alpha,
) -> anyhow::Result<Outcome> {
    let coarse = scaling_check(theta0, config.lambda, alpha)?;
    // The identity is pure lattice arithmetic; the gate repeats it after a
    // spectral embedding instead of a time refinement.
    let fine_grid = Grid::new(grid.n() * 2, grid.period())?;
    let fine = scaling_check(&theta0.embed(fine_grid)?, config.lambda, alpha)?;
    let status = if coarse.status == fine.status {
        coarse.status
    } else {
        CertStatus::Inconclusive
    };
    let mut out = Outcome::new(status, TRACE_HEADER.as_bytes().to_vec());
    out.certificates = Some(vec![coarse, fine]);
    Ok(out)
}

fn run_perturb(
    theta0: &SpectralField,
    config: &RunConfig,
    cfg: &SimConfig,
    grid: Grid,
    sigma: f64,
) -> anyhow::Result<Outcome> {
    let delta0 = if config.delta_ratio == 0.0 {
        SpectralField::zeros(grid)
    } else {
        let norm0 = xnorm(theta0, sigma)?.value;
        rescale_to_xnorm(
            &random_below_cutoff(grid, config.seed ^ SEED_SPLIT),
            sigma,
            config.delta_ratio * norm0,
        )?
    };
    let (_, trace) = simulate(theta0, cfg)?;
    let mut cert = perturbation_decay(theta0, &delta0, cfg)?;
    // The bitwise-identity claim is resolution-independent; only the
    // envelope verdict needs the gate.
    let gate = if config.delta_ratio == 0.0 {
        None
    } else {
        let g = resolution_gate(theta0, cfg, &trace)?;
        gate_demote(&mut cert, &g);
        Some(g)
    };
    let mut out = Outcome::new(cert.status, csv_bytes(&trace));
    out.diverged_at = trace.diverged_at;
    out.certificates = Some(vec![cert]);
    out.resolution_gate = gate;
    Ok(out)
}

fn persist(
    out_dir: &Path,
    report: &RunReport,
    trace_csv: &[u8],
    echo: &RunConfig,
) -> anyhow::Result<()> {
    fs::create_dir_all(out_dir)
        .with_context(|| format!("cannot create output directory {}", out_dir.display()))?;
    fs::write(out_dir.join("trace.csv"), trace_csv).context("write trace.csv")?;
    let mut json = serde_json::to_vec_pretty(report).context("serialize report")?;
    json.push(b'\n');
    fs::write(out_dir.join("report.json"), json).context("write report.json")?;
    let toml_text = toml::to_string(echo).context("serialize config echo")?;
    fs::write(out_dir.join("config_echo.toml"), toml_text).context("write config_echo.toml")?;
    Ok(())
}

/// Execute an experiment and persist its artifacts. The returned code is
/// the process exit status: 0 certified/success, 2 violated, 3
/// inconclusive (usage and environment failures surface as errors and are
/// mapped to 1 by the caller).
pub fn execute(config: &RunConfig) -> anyhow::Result<i32> {
    config.validate()?;
    let alpha = Alpha::new(config.alpha)?;
    let grid = Grid::new(config.n, config.period)?;
    let sigma = alpha.sigma_critical();
    let dt = config.dt.unwrap_or_else(|| default_dt(grid, alpha));
    let mut resolved = config.clone();
    resolved.dt = Some(dt);

    let theta0 = generate_initial(&config.init, grid, config.seed, sigma)?;
    let sim_cfg = SimConfig::new(
        alpha,
        dt,
        config.t_end,
        grid,
        config.record_every,
        config.linear_only,
    )?;

    let outcome = match config.command {
        Command::Simulate => run_simulate(&theta0, &sim_cfg, true)?,
        Command::Picard => run_picard(&theta0, config, alpha, sigma)?,
        Command::CertifySmallData => run_certify(&theta0, &sim_cfg, sigma)?,
        Command::VerifyLemmas => run_verify_lemmas(config, grid, alpha)?,
        Command::ScalingCheck => run_scaling(&theta0, config, grid, alpha)?,
        Command::Perturb => run_perturb(&theta0, config, &sim_cfg, grid, sigma)?,
    };

    let report = RunReport {
        command: config.command,
        alpha: config.alpha,
        n: config.n,
        dt,
        seed: config.seed,
        status: outcome.status,
        certificates: outcome.certificates,
        picard: outcome.picard,
        solver_error: outcome.solver_error,
        lemmas: outcome.lemmas,
        resolution_gate: outcome.resolution_gate,
        diverged_at: outcome.diverged_at,
    };
    persist(&config.out_dir, &report, &outcome.trace_csv, &resolved)?;
    Ok(exit_code(outcome.status))
}

/// Like execute, but reports failures on stderr and folds them into the
/// usage exit code.
pub fn run(config: &RunConfig) -> i32 {
    match execute(config) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}
