//! Run configuration: TOML ingestion plus programmatic construction.

use serde::{Deserialize, Serialize};

use crate::background::SolverOptions;
use crate::error::{Error, Result};
use crate::gas::GasState;

/// Supersonic inflow data at the entry radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InflowConfig {
    pub p: f64,
    pub rho: f64,
    pub mach: f64,
}

/// Numerical tolerances. `margin_tol = 0` selects the automatic per-mode
/// rule `1e-6 * max(1, sup |v|)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    pub ode_rel: f64,
    pub ode_abs: f64,
    pub margin_tol: f64,
    pub shock_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            ode_rel: 1e-10,
            ode_abs: 1e-12,
            margin_tol: 0.0,
            shock_tol: 1e-10,
        }
    }
}

/// Scan grid over inflow pressure multipliers, inflow Mach numbers, and
/// absolute back pressures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct ScanGrid {
    pub pressure_multipliers: Vec<f64>,
    pub machs: Vec<f64>,
    pub back_pressures: Vec<f64>,
}

impl ScanGrid {
    pub fn is_empty(&self) -> bool {
        self.pressure_multipliers.is_empty()
            || self.machs.is_empty()
            || self.back_pressures.is_empty()
    }

    pub fn len(&self) -> usize {
        self.pressure_multipliers.len() * self.machs.len() * self.back_pressures.len()
    }
}

/// One experiment description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub gamma: f64,
    pub r0: f64,
    pub r1: f64,
    pub inflow: InflowConfig,
    pub back_pressure: f64,
    #[serde(default = "default_n_max")]
    pub n_max: u32,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scan: Option<ScanGrid>,
}

fn default_n_max() -> u32 {
    64
}

impl RunConfig {
    /// The built-in reference configuration: unit supersonic inflow at Mach 2
    /// in the shell `[1, 2]`, back pressure in the middle of its admissible
    /// interval.
    pub fn reference() -> Self {
        Self {
            gamma: 1.4,
            r0: 1.0,
            r1: 2.0,
            inflow: InflowConfig {
                p: 1.0,
                rho: 1.0,
                mach: 2.0,
            },
            back_pressure: 3.5,
            n_max: 64,
            seed: 0,
            tolerances: Tolerances::default(),
            scan: None,
        }
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(s).map_err(|e| Error::InvalidConfig {
            reason: format!("TOML parse error: {e}"),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("gamma - 1", self.gamma - 1.0),
            ("r0", self.r0),
            ("r1 - r0", self.r1 - self.r0),
            ("inflow.p", self.inflow.p),
            ("inflow.rho", self.inflow.rho),
            ("inflow.mach - 1", self.inflow.mach - 1.0),
            ("back_pressure", self.back_pressure),
            ("tolerances.ode_rel", self.tolerances.ode_rel),
            ("tolerances.ode_abs", self.tolerances.ode_abs),
            ("tolerances.shock_tol", self.tolerances.shock_tol),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidConfig {
                    reason: format!("{name} must be positive, got {v}"),
                });
            }
        }
        if self.tolerances.margin_tol < 0.0 {
            return Err(Error::InvalidConfig {
                reason: "margin_tol must be >= 0 (0 selects the automatic rule)".into(),
            });
        }
        if let Some(scan) = &self.scan {
            if scan.is_empty() {
                return Err(Error::InvalidConfig {
                    reason: "scan grid present but empty along some axis".into(),
                });
            }
            for v in scan
                .pressure_multipliers
                .iter()
                .chain(&scan.machs)
                .chain(&scan.back_pressures)
            {
                if !(*v > 0.0) || !v.is_finite() {
                    return Err(Error::InvalidConfig {
                        reason: format!("scan values must be positive, got {v}"),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn inflow_state(&self) -> Result<GasState> {
        GasState::from_mach(self.inflow.p, self.inflow.rho, self.inflow.mach, self.gamma)
    }

    pub fn solver_options(&self) -> SolverOptions {
        SolverOptions {
            ode_rel: self.tolerances.ode_rel,
            ode_abs: self.tolerances.ode_abs,
            shock_tol: self.tolerances.shock_tol,
            ..SolverOptions::default()
        }
    }

    /// Margin tolerance as an `Option` (0 selects the automatic rule).
    pub fn margin_tol(&self) -> Option<f64> {
        (self.tolerances.margin_tol > 0.0).then_some(self.tolerances.margin_tol)
    }
}
