//! Output SINR, the Monte Carlo ensemble runner and the experiments built on
//! it (SINR vs. snapshots, rank sweep, steering mismatch).

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::array::{array_response, generate_block, ArrayConfig};
use crate::error::{BeamformError, Result};
use crate::fullrank::FullRankState;
use crate::jio::JioState;
use crate::linalg::CVector;
use crate::rng::derive_seed;
use crate::scenario::Scenario;

/// Reported in place of −∞ dB.
pub const SINR_FLOOR_DB: f64 = -300.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Algorithm {
    #[serde(rename = "fullrank-cmv-sg")]
    FullRankCmvSg,
    #[serde(rename = "fullrank-ccm-sg")]
    FullRankCcmSg,
    #[serde(rename = "jio-ccm")]
    JioCcm,
    #[serde(rename = "jio-ccm-gs")]
    JioCcmGs,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [
        Algorithm::FullRankCmvSg,
        Algorithm::FullRankCcmSg,
        Algorithm::JioCcm,
        Algorithm::JioCcmGs,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Algorithm::FullRankCmvSg => "fullrank-cmv-sg",
            Algorithm::FullRankCcmSg => "fullrank-ccm-sg",
            Algorithm::JioCcm => "jio-ccm",
            Algorithm::JioCcmGs => "jio-ccm-gs",
        }
    }

    pub fn is_reduced_rank(self) -> bool {
        matches!(self, Algorithm::JioCcm | Algorithm::JioCcmGs)
    }

    /// `(μ_T, μ_w)` used by this algorithm; full-rank filters report
    /// `μ_T = 0`.
    pub fn step_sizes(self, params: &RunParams) -> (f64, f64) {
        match self {
            Algorithm::FullRankCmvSg => (0.0, params.mu_cmv),
            Algorithm::FullRankCcmSg => (0.0, params.mu_ccm),
            Algorithm::JioCcm => (params.mu_t, params.mu_w),
            Algorithm::JioCcmGs => (params.mu_t_gs, params.mu_w_gs),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Algorithm {
    type Err = BeamformError;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.id() == s)
            .ok_or_else(|| BeamformError::UnknownAlgorithm(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunParams {
    pub n_snapshots: usize,
    pub n_runs: usize,
    pub master_seed: u64,
    pub rank: usize,
    pub mu_t: f64,
    pub mu_w: f64,
    pub mu_t_gs: f64,
    pub mu_w_gs: f64,
    pub mu_ccm: f64,
    pub mu_cmv: f64,
    pub gs_period: usize,
    /// Worker-thread cap for the ensemble; `None` uses the global pool.
    #[serde(skip)]
    pub threads: Option<usize>,
}

impl Default for RunParams {
    fn default() -> Self {
        Self {
            n_snapshots: 1000,
            n_runs: 100,
            master_seed: 1,
            rank: 5,
            mu_t: 0.002,
            mu_w: 0.001,
            mu_t_gs: 0.003,
            mu_w_gs: 0.0007,
            mu_ccm: 0.001,
            mu_cmv: 0.001,
            gs_period: 1,
            threads: None,
        }
    }
}

/// Parameters recorded alongside a curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveParams {
    pub rank: usize,
    pub mu_t: f64,
    pub mu_w: f64,
    pub seed: u64,
    pub mismatch_deg: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SinrCurve {
    pub algorithm: Algorithm,
    /// 1-based snapshot indices.
    pub snapshots: Vec<usize>,
    /// Ensemble-mean output SINR (dB) after each snapshot.
    pub sinr_db: Vec<f64>,
    pub n_runs: usize,
    /// Runs that broke down numerically; they contribute zero SINR from the
    /// failing snapshot onwards.
    pub n_diverged: usize,
    pub params: CurveParams,
}

impl SinrCurve {
    pub fn len(&self) -> usize {
        self.sinr_db.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sinr_db.is_empty()
    }

    pub fn last(&self) -> f64 {
        self.sinr_db.last().copied().unwrap_or(f64::NAN)
    }
}

/// Analytic SINR of a weight vector against the true scenario:
/// `σ₀²|wᴴa₀|² / (Σ_{k≥1} σ_k²|wᴴa_k|² + σ_n²‖w‖²)`, built from the array
/// responses at the true DOAs.
#[derive(Debug, Clone)]
pub struct SinrEvaluator {
    steering: Vec<CVector>,
    powers: Vec<f64>,
    noise: f64,
}

impl SinrEvaluator {
    pub fn new(cfg: &ArrayConfig) -> Result<Self> {
        cfg.validate()?;
        let steering = cfg
            .doas_deg
            .iter()
            .map(|&theta| array_response(cfg, theta))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            steering,
            powers: cfg.source_powers.clone(),
            noise: cfg.noise_power(),
        })
    }

    /// Linear-scale SINR; zero when `w` nulls the SOI.
    pub fn linear(&self, w: &CVector) -> Result<f64> {
        crate::linalg::check_len(w, self.steering[0].len())?;
        let norm2 = w.norm_squared();
        if norm2 == 0.0 {
            return Err(BeamformError::InvalidArgument("zero weight vector".into()));
        }
        let signal = self.powers[0] * w.dotc(&self.steering[0]).norm_sqr();
        let interference: f64 = self
            .steering
            .iter()
            .zip(&self.powers)
            .skip(1)
            .map(|(a, p)| p * w.dotc(a).norm_sqr())
            .sum();
        Ok(signal / (interference + self.noise * norm2))
    }

    pub fn db(&self, w: &CVector) -> Result<f64> {
        Ok(to_db(self.linear(w)?))
    }
}

/// Linear power ratio to dB, floored at [`SINR_FLOOR_DB`].
pub fn to_db(linear: f64) -> f64 {
    if linear > 0.0 {
        (10.0 * linear.log10()).max(SINR_FLOOR_DB)
    } else {
        SINR_FLOOR_DB
    }
}

/// Output SINR in dB of the equivalent filter `w_eq`; invariant to nonzero
/// complex scaling of `w_eq`.
pub fn output_sinr(w_eq: &CVector, cfg: &ArrayConfig) -> Result<f64> {
    SinrEvaluator::new(cfg)?.db(w_eq)
}

/// The constraint vector the receiver forms from its presumed SOI DOA, at
/// the same scale as the synthesized array response.
pub fn constraint_vector(cfg: &ArrayConfig) -> Result<CVector> {
    array_response(cfg, cfg.presumed_doa_deg)
}

/// A running adaptive filter of any of the four kinds.
#[derive(Debug, Clone)]
pub enum AdaptiveFilter {
    Cmv(FullRankState),
    Ccm(FullRankState),
    Jio(JioState),
}

impl AdaptiveFilter {
    pub fn new(algo: Algorithm, a0: CVector, params: &RunParams) -> Result<Self> {
        let (mu_t, mu_w) = algo.step_sizes(params);
        Ok(match algo {
            Algorithm::FullRankCmvSg => AdaptiveFilter::Cmv(FullRankState::new(a0, mu_w)?),
            Algorithm::FullRankCcmSg => AdaptiveFilter::Ccm(FullRankState::new(a0, mu_w)?),
            Algorithm::JioCcm | Algorithm::JioCcmGs => AdaptiveFilter::Jio(
                JioState::new(a0, params.rank, mu_t, mu_w, algo == Algorithm::JioCcmGs)?
                    .with_gs_period(params.gs_period),
            ),
        })
    }

    pub fn step(&mut self, x: &CVector) -> Result<()> {
        match self {
            AdaptiveFilter::Cmv(st) => st.cmv_update(x).map(|_| ()),
            AdaptiveFilter::Ccm(st) => st.ccm_update(x).map(|_| ()),
            AdaptiveFilter::Jio(st) => st.step_mut(x).map(|_| ()),
        }
    }

    /// Full-length equivalent weight vector.
    pub fn weights(&self) -> CVector {
        match self {
            AdaptiveFilter::Cmv(st) | AdaptiveFilter::Ccm(st) => st.w.clone(),
            AdaptiveFilter::Jio(st) => st.equivalent_filter(),
        }
    }
}

/// Outcome of one Monte Carlo run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    /// Linear output SINR after every snapshot.
    pub sinr: Vec<f64>,
    /// 1-based snapshot at which the filter broke down numerically, if it did.
    pub diverged_at: Option<usize>,
}

/// A numerical breakdown of the adaptive recursion (as opposed to a caller
/// error such as a bad dimension).
fn is_breakdown(err: &BeamformError) -> bool {
    matches!(
        err,
        BeamformError::Degenerate { .. } | BeamformError::Numerical(_) | BeamformError::Singular(_)
    )
}

/// One Monte Carlo run: fresh block, fresh filter, linear SINR after every
/// snapshot. If the recursion breaks down (non-finite weights, a degenerate
/// Gram-Schmidt basis, a vanished reduced constraint vector) the filter is
/// treated as useless: the remaining snapshots score zero SINR.
pub fn simulate_run(
    cfg: &ArrayConfig,
    params: &RunParams,
    algo: Algorithm,
    run_index: u64,
) -> Result<RunTrace> {
    let evaluator = SinrEvaluator::new(cfg)?;
    let seed = derive_seed(params.master_seed, run_index);
    let block = generate_block(cfg, params.n_snapshots, seed)?;
    let a0 = constraint_vector(cfg)?;
    let mut filter = AdaptiveFilter::new(algo, a0, params)?;
    let mut sinr = Vec::with_capacity(block.len());
    let mut diverged_at = None;
    for x in block.snapshots() {
        let value = match filter.step(&x) {
            Ok(()) => {
                let w = filter.weights();
                if w.iter().all(|v| v.re.is_finite() && v.im.is_finite()) && w.norm_squared() > 0.0 {
                    Some(evaluator.linear(&w)?)
                } else {
                    None
                }
            }
            Err(err) if is_breakdown(&err) => None,
            Err(err) => return Err(err),
        };
        match value {
            Some(v) if v.is_finite() => sinr.push(v),
            _ => {
                diverged_at = Some(sinr.len() + 1);
                break;
            }
        }
    }
    sinr.resize(block.len(), 0.0);
    Ok(RunTrace { sinr, diverged_at })
}

fn with_pool<T: Send>(threads: Option<usize>, job: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| BeamformError::InvalidArgument(format!("thread pool: {e}")))?;
            Ok(pool.install(job))
        }
        None => Ok(job()),
    }
}

/// Ensemble-averaged SINR curve. Runs execute in parallel; the reduction is a
/// fixed-order sum over run indices, so curves are bit-identical for a given
/// master seed regardless of scheduling.
pub fn run_ensemble(scenario: &Scenario, algo: Algorithm) -> Result<SinrCurve> {
    let cfg = &scenario.array;
    let params = &scenario.run;
    cfg.validate()?;
    if params.n_runs == 0 || params.n_snapshots == 0 {
        return Err(BeamformError::InvalidArgument(
            "n_runs and n_snapshots must be positive".into(),
        ));
    }
    if algo.is_reduced_rank() && (params.rank == 0 || params.rank >= cfg.m) {
        return Err(BeamformError::InvalidRank {
            rank: params.rank,
            m: cfg.m,
        });
    }
    let runs: Vec<RunTrace> = with_pool(params.threads, || {
        (0..params.n_runs as u64)
            .into_par_iter()
            .map(|run| simulate_run(cfg, params, algo, run))
            .collect::<Result<Vec<_>>>()
    })??;

    let mut mean = vec![0.0; params.n_snapshots];
    for run in &runs {
        for (acc, v) in mean.iter_mut().zip(&run.sinr) {
            *acc += v;
        }
    }
    let k = params.n_runs as f64;
    let sinr_db = mean.into_iter().map(|v| to_db(v / k)).collect();
    let (mu_t, mu_w) = algo.step_sizes(params);
    Ok(SinrCurve {
        algorithm: algo,
        snapshots: (1..=params.n_snapshots).collect(),
        sinr_db,
        n_runs: params.n_runs,
        n_diverged: runs.iter().filter(|r| r.diverged_at.is_some()).count(),
        params: CurveParams {
            rank: if algo.is_reduced_rank() { params.rank } else { cfg.m },
            mu_t,
            mu_w,
            seed: params.master_seed,
            mismatch_deg: cfg.presumed_doa_deg - cfg.doas_deg[0],
        },
    })
}

/// Ensemble SINR at snapshot `n_fixed` for each rank.
pub fn rank_sweep(
    scenario: &Scenario,
    algo: Algorithm,
    ranks: &[usize],
    n_fixed: usize,
) -> Result<Vec<(usize, f64)>> {
    let m = scenario.array.m;
    if let Some(&bad) = ranks.iter().find(|&&r| r == 0 || r >= m) {
        return Err(BeamformError::InvalidRank { rank: bad, m });
    }
    ranks
        .iter()
        .map(|&rank| {
            let mut sc = scenario.clone();
            sc.run.rank = rank;
            sc.run.n_snapshots = n_fixed;
            run_ensemble(&sc, algo).map(|curve| (rank, curve.last()))
        })
        .collect()
}

/// Runs each algorithm with the receiver's SOI estimate offset by
/// `mismatch_deg`; signals are still synthesized at the true DOAs.
pub fn mismatch_experiment(
    scenario: &Scenario,
    algos: &[Algorithm],
    mismatch_deg: f64,
) -> Result<Vec<SinrCurve>> {
    if !(mismatch_deg.abs() < 90.0) {
        return Err(BeamformError::InvalidArgument(format!(
            "mismatch {mismatch_deg}° must be below 90° in magnitude"
        )));
    }
    let mut sc = scenario.clone();
    sc.array = scenario.array.with_mismatch(mismatch_deg)?;
    algos.iter().map(|&algo| run_ensemble(&sc, algo)).collect()
}

/// Mean and population standard deviation of the last `window` points.
pub fn steady_state_stats(curve: &SinrCurve, window: usize) -> Result<(f64, f64)> {
    if window == 0 || window > curve.len() {
        return Err(BeamformError::InvalidArgument(format!(
            "window {window} does not fit a curve of length {}",
            curve.len()
        )));
    }
    let tail = &curve.sinr_db[curve.len() - window..];
    let mean = tail.iter().sum::<f64>() / window as f64;
    let var = tail.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / window as f64;
    Ok((mean, var.sqrt()))
}

/// Default steady-state window: the last 10% of the curve (at least one point).
pub fn default_steady_window(len: usize) -> usize {
    (len / 10).max(1)
}

/// First 1-based snapshot at which the curve comes within `margin_db` of its
/// own steady-state mean over the last `window` points.
pub fn snapshots_to_converge(curve: &SinrCurve, margin_db: f64, window: usize) -> Result<usize> {
    let (steady, _) = steady_state_stats(curve, window)?;
    let target = steady - margin_db;
    Ok(curve
        .sinr_db
        .iter()
        .position(|&v| v >= target)
        .map(|i| curve.snapshots[i])
        .unwrap_or(curve.len()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::array::steering_vector;
    use crate::linalg::C64;

    fn curve(values: Vec<f64>) -> SinrCurve {
        SinrCurve {
            algorithm: Algorithm::JioCcm,
            snapshots: (1..=values.len()).collect(),
            sinr_db: values,
            n_runs: 1,
            n_diverged: 0,
            params: CurveParams {
                rank: 5,
                mu_t: 0.0,
                mu_w: 0.0,
                seed: 0,
                mismatch_deg: 0.0,
            },
        }
    }

    #[test]
    fn algorithm_ids_round_trip() {
        for a in Algorithm::ALL {
            assert_eq!(a.id().parse::<Algorithm>().unwrap(), a);
        }
        assert!(matches!(
            "mswf-ccm".parse::<Algorithm>(),
            Err(BeamformError::UnknownAlgorithm(_))
        ));
    }

    #[test]
    fn matched_filter_sinr_without_interference() {
        let cfg = ArrayConfig::new(32, vec![90.0], 10.0).unwrap();
        let a = steering_vector(&cfg, 90.0).unwrap().entries;
        let sinr = output_sinr(&a, &cfg).unwrap();
        // σ_s² m / σ_n² = 320
        assert!((sinr - 10.0 * 320f64.log10()).abs() < 1e-12);
        assert!((sinr - 25.051).abs() < 5e-4);
    }

    #[test]
    fn orthogonal_weights_hit_the_floor() {
        let cfg = ArrayConfig::new(4, vec![90.0, 30.0], 10.0).unwrap();
        let w = CVector::from_vec(vec![
            C64::new(1.0, 0.0),
            C64::new(-1.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
        ]);
        assert_eq!(output_sinr(&w, &cfg).unwrap(), SINR_FLOOR_DB);
        assert!(output_sinr(&CVector::zeros(4), &cfg).is_err());
    }

    #[test]
    fn steady_state_examples() {
        let (m, s) = steady_state_stats(&curve(vec![3.5; 20]), 5).unwrap();
        assert_eq!((m, s), (3.5, 0.0));

        let ramp = curve((0..10).map(f64::from).collect());
        let (m, s) = steady_state_stats(&ramp, 5).unwrap();
        assert!((m - 7.0).abs() < 1e-12);
        assert!((s - 2f64.sqrt()).abs() < 1e-12);
        let (m, _) = steady_state_stats(&ramp, 10).unwrap();
        assert!((m - 4.5).abs() < 1e-12);
        assert!(steady_state_stats(&ramp, 11).is_err());
        assert!(steady_state_stats(&ramp, 0).is_err());
    }

    #[test]
    fn convergence_index() {
        let ramp = curve((0..10).map(f64::from).collect());
        // steady mean 8.5, target 6.5, first reached by the value 7 at snapshot 8
        assert_eq!(snapshots_to_converge(&ramp, 2.0, 2).unwrap(), 8);
    }

    #[test]
    fn default_window_is_ten_percent() {
        assert_eq!(default_steady_window(1000), 100);
        assert_eq!(default_steady_window(5), 1);
    }
}
