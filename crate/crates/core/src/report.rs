//! Experiment orchestration and bit-stable report envelopes.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::background::{
    admissible_backpressure_interval, exit_pressure_only, find_shock_position, BackgroundSolution,
};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::gas::{GasState, ShockJump};
use crate::linearize::{coefficient_profiles, compute_mu, e4_sign_threshold, MuCoefficients};
use crate::scondition::{check_s_condition, ModePolicy, OverallVerdict, SConditionReport};

/// Tool version recorded in every envelope.
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JumpTable {
    pub upstream: GasState,
    pub downstream: GasState,
    pub residuals: [f64; 3],
    pub mach_product_gap: f64,
    pub entropy_upstream: f64,
    pub entropy_downstream: f64,
}

impl JumpTable {
    fn from_jump(jump: &ShockJump) -> Self {
        Self {
            upstream: jump.upstream,
            downstream: jump.downstream,
            residuals: jump.residuals,
            mach_product_gap: jump.mach_product_gap(),
            entropy_upstream: jump.upstream.entropy(),
            entropy_downstream: jump.downstream.entropy(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackgroundSummary {
    pub r_b: f64,
    pub p_exit: f64,
    pub admissible_interval: (f64, f64),
    /// Recorded direction of the exit-pressure map in `r_b`.
    pub exit_pressure_decreasing: bool,
    pub jump: JumpTable,
    pub supersonic_drift: f64,
    pub subsonic_drift: f64,
    pub extension_h: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MuSummary {
    pub mu0: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub mu3: f64,
    pub mu4: f64,
    pub mu5: f64,
    pub mu6: f64,
    pub mu7: f64,
    pub mu8: f64,
    pub mu9: f64,
    pub mu0_dual: f64,
    pub mu0_dual_rel_diff: f64,
    pub mu0_squared_form: f64,
    pub mu0_squared_form_ratio: f64,
    pub discrepancy_note: String,
}

impl MuSummary {
    fn from_mu(mu: &MuCoefficients) -> Self {
        Self {
            mu0: mu.mu0,
            mu1: mu.mu1,
            mu2: mu.mu2,
            mu3: mu.mu3,
            mu4: mu.mu4,
            mu5: mu.mu5,
            mu6: mu.mu6,
            mu7: mu.mu7,
            mu8: mu.mu8,
            mu9: mu.mu9,
            mu0_dual: mu.mu0_dual,
            mu0_dual_rel_diff: mu.mu0_dual_rel_diff,
            mu0_squared_form: mu.mu0_squared_form,
            mu0_squared_form_ratio: mu.mu0_squared_form_ratio(),
            discrepancy_note: format!(
                "mu0 dual expression uses the first power of u0+: the squared form \
                 differs from the defining ratio by the factor u0+ = {:.12} \
                 (ratio {:.12}), so only the first-power identity is asserted",
                mu.mu0_squared_form_ratio(),
                mu.mu0_squared_form_ratio()
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileSummary {
    pub kappa: f64,
    pub t_s: f64,
    pub t_star: f64,
    pub sup_e3: f64,
    pub max_e4: f64,
    pub e4_sign_change_y0: Option<f64>,
    pub n_samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool_version: String,
    pub ode_rel: f64,
    pub ode_abs: f64,
    pub margin_tol: f64,
    pub shock_tol: f64,
    pub n_max: u32,
    pub seed: u64,
}

/// Full, JSON-stable experiment record. Field order is fixed by the struct;
/// numbers round-trip losslessly through `serde_json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportEnvelope {
    pub config: RunConfig,
    pub background: BackgroundSummary,
    pub mu: MuSummary,
    pub profiles: ProfileSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s_condition: Option<SConditionReport>,
    pub provenance: Provenance,
    /// Wall-clock seconds; the only field allowed to differ between
    /// otherwise identical runs.
    pub timing_seconds: f64,
}

impl ReportEnvelope {
    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("envelope serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::InvalidConfig {
            reason: format!("envelope parse error: {e}"),
        })
    }

    /// Copy with the timing zeroed, for determinism comparisons.
    pub fn without_timing(&self) -> Self {
        let mut c = self.clone();
        c.timing_seconds = 0.0;
        c
    }
}

/// Exit code classes: 2 = back pressure out of range, 3 = sonic approach,
/// 4 = invariant violation, 1 = configuration or other failure.
pub fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::BackPressureOutOfRange { .. } => 2,
        Error::SonicApproach { .. } | Error::StepFailure { .. } => 3,
        Error::SignViolation { .. }
        | Error::FirstIntegralDrift { .. }
        | Error::NonMonotoneResidual { .. }
        | Error::ShockSearchStalled { .. }
        | Error::RegimeMismatch { .. }
        | Error::NotSupersonic { .. }
        | Error::InvalidState { .. } => 4,
        Error::InvalidConfig { .. } | Error::NotTransverse { .. } => 1,
    }
}

fn background_pipeline(
    config: &RunConfig,
) -> Result<(
    BackgroundSolution,
    BackgroundSummary,
    MuSummary,
    ProfileSummary,
)> {
    config.validate()?;
    let inflow = config.inflow_state()?;
    let opts = config.solver_options();
    let (p_lo, p_hi) = admissible_backpressure_interval(&inflow, config.r0, config.r1, &opts)?;
    let bg = find_shock_position(&inflow, config.back_pressure, config.r0, config.r1, &opts)?;
    let exit_at_r0 = exit_pressure_only(&inflow, config.r0, config.r0, config.r1, &opts)?;
    let exit_at_r1 = exit_pressure_only(&inflow, config.r0, config.r1, config.r1, &opts)?;

    let mu = compute_mu(&bg)?;
    let profiles = coefficient_profiles(&bg, opts.n_samples)?;

    let background = BackgroundSummary {
        r_b: bg.r_b,
        p_exit: bg.p_exit,
        admissible_interval: (p_lo, p_hi),
        exit_pressure_decreasing: exit_at_r1 < exit_at_r0,
        jump: JumpTable::from_jump(&bg.jump),
        supersonic_drift: bg.supersonic.max_drift,
        subsonic_drift: bg.subsonic.max_drift,
        extension_h: bg.extension_h,
    };
    let mu_summary = MuSummary::from_mu(&mu);
    let profile_summary = ProfileSummary {
        kappa: profiles.kappa,
        t_s: profiles.t_s,
        t_star: e4_sign_threshold(config.gamma),
        sup_e3: profiles.sup_e3(),
        max_e4: profiles.max_e4(),
        e4_sign_change_y0: profiles.e4_sign_change_y0(),
        n_samples: profiles.grid.len(),
    };
    Ok((bg, background, mu_summary, profile_summary))
}

fn provenance(config: &RunConfig) -> Provenance {
    Provenance {
        tool_version: TOOL_VERSION.to_string(),
        ode_rel: config.tolerances.ode_rel,
        ode_abs: config.tolerances.ode_abs,
        margin_tol: config.tolerances.margin_tol,
        shock_tol: config.tolerances.shock_tol,
        n_max: config.n_max,
        seed: config.seed,
    }
}

/// Build the background, coefficient, and profile sections.
pub fn run_background(config: &RunConfig) -> Result<ReportEnvelope> {
    let start = std::time::Instant::now();
    let (_bg, background, mu, profiles) = background_pipeline(config)?;
    Ok(ReportEnvelope {
        config: config.clone(),
        background,
        mu,
        profiles,
        s_condition: None,
        provenance: provenance(config),
        timing_seconds: start.elapsed().as_secs_f64(),
    })
}

/// Full run including the per-mode decision report.
pub fn run_scondition(config: &RunConfig) -> Result<ReportEnvelope> {
    let start = std::time::Instant::now();
    let (bg, background, mu, profiles) = background_pipeline(config)?;
    let policy = ModePolicy {
        n_max: config.n_max,
    };
    let s_condition =
        check_s_condition(&bg, config.margin_tol(), &policy, &config.solver_options())?;
    Ok(ReportEnvelope {
        config: config.clone(),
        background,
        mu,
        profiles,
        s_condition: Some(s_condition),
        provenance: provenance(config),
        timing_seconds: start.elapsed().as_secs_f64(),
    })
}

/// One row of a scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub idx: (usize, usize, usize),
    pub pressure_multiplier: f64,
    pub mach: f64,
    pub back_pressure: f64,
    pub r_b: Option<f64>,
    pub t_s: Option<f64>,
    pub kappa: Option<f64>,
    pub verdict: Option<String>,
    pub min_abs_margin: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanOutput {
    pub rows: Vec<ScanRow>,
    pub envelopes: Vec<Option<ReportEnvelope>>,
}

impl ScanOutput {
    /// Rows as CSV with a fixed header, errors recorded in-row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "i,j,k,pressure_multiplier,mach,back_pressure,r_b,t_s,kappa,verdict,min_abs_margin,error\n",
        );
        let num = |v: Option<f64>| v.map(|x| format!("{x:.12e}")).unwrap_or_default();
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{:.12e},{:.12e},{:.12e},{},{},{},{},{},{}\n",
                r.idx.0,
                r.idx.1,
                r.idx.2,
                r.pressure_multiplier,
                r.mach,
                r.back_pressure,
                num(r.r_b),
                num(r.t_s),
                num(r.kappa),
                r.verdict.clone().unwrap_or_default(),
                num(r.min_abs_margin),
                r.error
                    .clone()
                    .map(|e| e.replace(',', ";"))
                    .unwrap_or_default(),
            ));
        }
        out
    }

    pub fn without_timing(&self) -> Self {
        Self {
            rows: self.rows.clone(),
            envelopes: self
                .envelopes
                .iter()
                .map(|e| e.as_ref().map(|e| e.without_timing()))
                .collect(),
        }
    }
}

fn verdict_label(overall: &OverallVerdict) -> String {
    match overall {
        OverallVerdict::Holds => "Holds".to_string(),
        OverallVerdict::Fails { n } => format!("Fails({n})"),
        OverallVerdict::Inconclusive { modes } => {
            if modes.is_empty() {
                "Inconclusive".to_string()
            } else {
                format!(
                    "Inconclusive({})",
                    modes
                        .iter()
                        .map(|n| n.to_string())
                        .collect::<Vec<_>>()
                        .join(" ")
                )
            }
        }
    }
}

fn scan_cell(
    config: &RunConfig,
    idx: (usize, usize, usize),
    pm: f64,
    mach: f64,
    pb: f64,
) -> (ScanRow, Option<ReportEnvelope>) {
    let mut cell_config = config.clone();
    cell_config.inflow.p *= pm;
    cell_config.inflow.mach = mach;
    cell_config.back_pressure = pb;
    cell_config.scan = None;

    let mut row = ScanRow {
        idx,
        pressure_multiplier: pm,
        mach,
        back_pressure: pb,
        r_b: None,
        t_s: None,
        kappa: None,
        verdict: None,
        min_abs_margin: None,
        error: None,
    };
    match run_scondition(&cell_config) {
        Ok(envelope) => {
            row.r_b = Some(envelope.background.r_b);
            row.t_s = Some(envelope.profiles.t_s);
            row.kappa = Some(envelope.profiles.kappa);
            let sc = envelope.s_condition.as_ref().expect("scondition section");
            row.verdict = Some(verdict_label(&sc.overall));
            row.min_abs_margin = sc
                .verdicts
                .iter()
                .filter_map(|v| v.margin)
                .map(f64::abs)
                .fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.min(v))));
            (row, Some(envelope))
        }
        Err(e) => {
            row.error = Some(e.to_string());
            (row, None)
        }
    }
}

/// Run every cell of the scan grid. Rows come back in lexicographic index
/// order regardless of scheduling; per-cell failures are recorded in-row.
pub fn run_scan(config: &RunConfig) -> Result<ScanOutput> {
    run_scan_impl(config, true)
}

/// Serial variant, for determinism comparisons against the parallel path.
pub fn run_scan_serial(config: &RunConfig) -> Result<ScanOutput> {
    run_scan_impl(config, false)
}

fn run_scan_impl(config: &RunConfig, parallel: bool) -> Result<ScanOutput> {
    config.validate()?;
    let scan = config.scan.as_ref().ok_or_else(|| Error::InvalidConfig {
        reason: "scan grid missing".into(),
    })?;
    if scan.is_empty() {
        return Err(Error::InvalidConfig {
            reason: "scan grid empty".into(),
        });
    }
    let mut cells = Vec::with_capacity(scan.len());
    for (i, &pm) in scan.pressure_multipliers.iter().enumerate() {
        for (j, &mach) in scan.machs.iter().enumerate() {
            for (k, &pb) in scan.back_pressures.iter().enumerate() {
                cells.push(((i, j, k), pm, mach, pb));
            }
        }
    }
    let results: Vec<(ScanRow, Option<ReportEnvelope>)> = if parallel {
        cells
            .par_iter()
            .map(|&(idx, pm, mach, pb)| scan_cell(config, idx, pm, mach, pb))
            .collect()
    } else {
        cells
            .iter()
            .map(|&(idx, pm, mach, pb)| scan_cell(config, idx, pm, mach, pb))
            .collect()
    };
    let (rows, envelopes) = results.into_iter().unzip();
    Ok(ScanOutput { rows, envelopes })
}
