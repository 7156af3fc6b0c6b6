//! Scenario files: a flat JSON object describing the array, the sources and
//! the Monte Carlo run parameters.
//!
//! ```json
//! { "m": 32, "d_over_lambda": 0.5, "doas_deg": [90, 37.5, 55], "source_powers": [1, 1, 1],
//!   "snr_db": 10, "presumed_doa_deg": 90, "n_snapshots": 1000, "n_runs": 100,
//!   "master_seed": 1 }
//! ```
//!
//! `doas_deg` may be replaced by `n_sources` (plus an optional `soi_doa_deg`,
//! default 90°), in which case interferers are placed by
//! [`default_interferer_doas`]. Step sizes, rank, Gram-Schmidt period and the
//! steering scale (`"raw"` or `"unit-norm"`) are optional keys.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::array::{default_interferer_doas, ArrayConfig, SteeringScale};
use crate::error::{BeamformError, Result};
use crate::metrics::RunParams;

/// Array description plus run parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub array: ArrayConfig,
    pub run: RunParams,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub m: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_over_lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub doas_deg: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_sources: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub soi_doa_deg: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_powers: Option<Vec<f64>>,
    pub snr_db: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub presumed_doa_deg: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_snapshots: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_runs: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub master_seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu_t: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu_w: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu_t_gs: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu_w_gs: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu_ccm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu_cmv: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gs_period: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steering: Option<SteeringScale>,
}

impl ScenarioFile {
    pub fn into_scenario(self) -> Result<Scenario> {
        let doas_deg = match (self.doas_deg, self.n_sources) {
            (Some(doas), None) => doas,
            (Some(doas), Some(n)) if n == doas.len() => doas,
            (Some(doas), Some(n)) => {
                return Err(BeamformError::InvalidConfig(format!(
                    "n_sources = {n} but {} DOAs listed",
                    doas.len()
                )))
            }
            (None, Some(n)) if n >= 1 => {
                let soi = self.soi_doa_deg.unwrap_or(90.0);
                let mut doas = vec![soi];
                doas.extend(default_interferer_doas(soi, n - 1));
                doas
            }
            _ => {
                return Err(BeamformError::InvalidConfig(
                    "scenario needs doas_deg or n_sources".into(),
                ))
            }
        };
        let q = doas_deg.len();
        let array = ArrayConfig {
            m: self.m,
            d_over_lambda: self.d_over_lambda.unwrap_or(0.5),
            presumed_doa_deg: self.presumed_doa_deg.unwrap_or(doas_deg[0]),
            source_powers: self.source_powers.unwrap_or_else(|| vec![1.0; q]),
            doas_deg,
            snr_db: self.snr_db,
            steering: self.steering.unwrap_or_default(),
        };
        array.validate()?;

        let d = RunParams::default();
        let run = RunParams {
            n_snapshots: self.n_snapshots.unwrap_or(d.n_snapshots),
            n_runs: self.n_runs.unwrap_or(d.n_runs),
            master_seed: self.master_seed.unwrap_or(d.master_seed),
            rank: self.rank.unwrap_or(d.rank),
            mu_t: self.mu_t.unwrap_or(d.mu_t),
            mu_w: self.mu_w.unwrap_or(d.mu_w),
            mu_t_gs: self.mu_t_gs.unwrap_or(d.mu_t_gs),
            mu_w_gs: self.mu_w_gs.unwrap_or(d.mu_w_gs),
            mu_ccm: self.mu_ccm.unwrap_or(d.mu_ccm),
            mu_cmv: self.mu_cmv.unwrap_or(d.mu_cmv),
            gs_period: self.gs_period.unwrap_or(d.gs_period),
            threads: None,
        };
        let scenario = Scenario { array, run };
        scenario.validate()?;
        Ok(scenario)
    }
}

/// Bundled scenario: m = 32, q = 7 sources, 10 dB SNR, rank 5.
pub const DEFAULT_SCENARIO_JSON: &str = include_str!("../scenarios/default.json");

/// Bundled mismatch scenario: as the default but with q = 10 sources.
pub const MISMATCH_SCENARIO_JSON: &str = include_str!("../scenarios/mismatch.json");

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str::<ScenarioFile>(text)?.into_scenario()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn bundled_default() -> Self {
        Self::from_json(DEFAULT_SCENARIO_JSON).expect("bundled default scenario is valid")
    }

    pub fn bundled_mismatch() -> Self {
        Self::from_json(MISMATCH_SCENARIO_JSON).expect("bundled mismatch scenario is valid")
    }

    pub fn validate(&self) -> Result<()> {
        self.array.validate()?;
        let run = &self.run;
        if run.n_snapshots == 0 || run.n_runs == 0 {
            return Err(BeamformError::InvalidConfig(
                "n_snapshots and n_runs must be positive".into(),
            ));
        }
        if run.rank == 0 || run.rank >= self.array.m {
            return Err(BeamformError::InvalidRank {
                rank: run.rank,
                m: self.array.m,
            });
        }
        if run.gs_period == 0 {
            return Err(BeamformError::InvalidConfig("gs_period must be positive".into()));
        }
        let steps = [
            run.mu_t, run.mu_w, run.mu_t_gs, run.mu_w_gs, run.mu_ccm, run.mu_cmv,
        ];
        if steps.iter().any(|mu| !(mu.is_finite() && *mu >= 0.0)) {
            return Err(BeamformError::InvalidConfig(
                "step sizes must be finite and non-negative".into(),
            ));
        }
        Ok(())
    }
}
