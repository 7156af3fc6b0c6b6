//! Uniform linear array model: steering vectors, BPSK sources and received
//! snapshots `x(i) = A(θ) s(i) + n(i)`.
//!
//! Angles follow the `cos θ` convention, so broadside is 90° and the valid
//! DOA range is the open interval (0°, 180°).

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{BeamformError, Result};
use crate::linalg::{CMatrix, CVector, C64};
use crate::rng::rng_from_seed;

/// Scale of the array response used for synthesis, for the receiver's
/// constraint vector and for the SINR metric.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SteeringScale {
    /// Unit-modulus entries, first entry 1.
    #[default]
    Raw,
    /// Unit Euclidean norm: each source contributes power σ_k² summed over
    /// the whole array.
    UnitNorm,
}

/// Array geometry plus the source constellation. `doas_deg[0]` is the signal
/// of interest (SOI).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArrayConfig {
    pub m: usize,
    pub d_over_lambda: f64,
    pub doas_deg: Vec<f64>,
    pub source_powers: Vec<f64>,
    pub snr_db: f64,
    /// DOA the receiver assumes for the SOI when forming its constraint.
    pub presumed_doa_deg: f64,
    #[serde(default)]
    pub steering: SteeringScale,
}

impl ArrayConfig {
    /// Half-wavelength array with unit-power sources and no mismatch.
    pub fn new(m: usize, doas_deg: Vec<f64>, snr_db: f64) -> Result<Self> {
        let q = doas_deg.len();
        let presumed = doas_deg.first().copied().unwrap_or(90.0);
        let cfg = Self {
            m,
            d_over_lambda: 0.5,
            doas_deg,
            source_powers: vec![1.0; q],
            snr_db,
            presumed_doa_deg: presumed,
            steering: SteeringScale::Raw,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn q(&self) -> usize {
        self.doas_deg.len()
    }

    pub fn validate(&self) -> Result<()> {
        let q = self.q();
        if q == 0 {
            return Err(BeamformError::InvalidConfig("at least one source is required".into()));
        }
        if self.m < q {
            return Err(BeamformError::InvalidConfig(format!(
                "{} sensors cannot resolve {} sources",
                self.m, q
            )));
        }
        if self.source_powers.len() != q {
            return Err(BeamformError::InvalidConfig(format!(
                "{} DOAs but {} source powers",
                q,
                self.source_powers.len()
            )));
        }
        if !(self.d_over_lambda.is_finite() && self.d_over_lambda > 0.0) {
            return Err(BeamformError::InvalidConfig("d_over_lambda must be positive".into()));
        }
        if !self.snr_db.is_finite() {
            return Err(BeamformError::InvalidConfig("snr_db must be finite".into()));
        }
        for &theta in self.doas_deg.iter().chain(std::iter::once(&self.presumed_doa_deg)) {
            check_angle(theta)?;
        }
        for (i, a) in self.doas_deg.iter().enumerate() {
            for b in &self.doas_deg[i + 1..] {
                if a == b {
                    return Err(BeamformError::InvalidConfig(format!("duplicate DOA {a}°")));
                }
            }
        }
        if self.source_powers.iter().any(|&p| !(p.is_finite() && p > 0.0)) {
            return Err(BeamformError::InvalidConfig("source powers must be positive".into()));
        }
        Ok(())
    }

    /// Per-sensor noise variance σ_n² = σ_s² / 10^(SNR/10).
    pub fn noise_power(&self) -> f64 {
        noise_power(self)
    }

    /// Same scenario with the receiver's SOI estimate offset by `mismatch_deg`.
    pub fn with_mismatch(&self, mismatch_deg: f64) -> Result<Self> {
        let mut cfg = self.clone();
        cfg.presumed_doa_deg = self.doas_deg[0] + mismatch_deg;
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Free-function form of [`ArrayConfig::noise_power`].
pub fn noise_power(cfg: &ArrayConfig) -> f64 {
    cfg.source_powers[0] / 10f64.powf(cfg.snr_db / 10.0)
}

fn check_angle(theta_deg: f64) -> Result<()> {
    if theta_deg.is_finite() && theta_deg > 0.0 && theta_deg < 180.0 {
        Ok(())
    } else {
        Err(BeamformError::AngleOutOfRange(theta_deg))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SteeringVector {
    pub entries: CVector,
    pub normalized: bool,
}

impl SteeringVector {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn into_inner(self) -> CVector {
        self.entries
    }
}

/// Raw ULA response `a(θ)`: entry `k` has phase `−2π k (d/λ) cos θ`.
pub fn steering_vector(cfg: &ArrayConfig, theta_deg: f64) -> Result<SteeringVector> {
    check_angle(theta_deg)?;
    let phase_step = -2.0 * PI * cfg.d_over_lambda * theta_deg.to_radians().cos();
    let entries = CVector::from_fn(cfg.m, |k, _| C64::from_polar(1.0, phase_step * k as f64));
    Ok(SteeringVector {
        entries,
        normalized: false,
    })
}

/// Rescales to unit Euclidean norm.
pub fn normalize_steering(v: SteeringVector) -> SteeringVector {
    if v.normalized {
        return v;
    }
    let norm = v.entries.norm();
    SteeringVector {
        entries: v.entries.unscale(norm),
        normalized: true,
    }
}

/// Steering vector at `theta_deg` scaled per `cfg.steering`.
pub fn array_response(cfg: &ArrayConfig, theta_deg: f64) -> Result<CVector> {
    let raw = steering_vector(cfg, theta_deg)?;
    Ok(match cfg.steering {
        SteeringScale::Raw => raw.into_inner(),
        SteeringScale::UnitNorm => normalize_steering(raw).into_inner(),
    })
}

/// `m × q` matrix `A(θ)` of array responses, one column per source.
pub fn steering_matrix(cfg: &ArrayConfig) -> Result<CMatrix> {
    let columns = cfg
        .doas_deg
        .iter()
        .map(|&theta| array_response(cfg, theta))
        .collect::<Result<Vec<_>>>()?;
    Ok(CMatrix::from_columns(&columns))
}

/// A block of received snapshots. Column `i` of `x` is the snapshot `x(i)`;
/// row `i` of `s` holds the source symbols that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotBlock {
    pub x: CMatrix,
    pub s: DMatrix<f64>,
    pub seed: u64,
}

impl SnapshotBlock {
    pub fn len(&self) -> usize {
        self.x.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.x.ncols() == 0
    }

    pub fn m(&self) -> usize {
        self.x.nrows()
    }

    pub fn snapshot(&self, i: usize) -> CVector {
        self.x.column(i).into_owned()
    }

    pub fn snapshots(&self) -> impl Iterator<Item = CVector> + '_ {
        self.x.column_iter().map(|c| c.into_owned())
    }
}

/// Synthesizes `n_snapshots` received vectors: independent BPSK symbols
/// `±√σ_k²` per source and circular complex Gaussian noise with total
/// per-sensor variance σ_n² (σ_n²/2 on each of the real and imaginary parts).
pub fn generate_block(cfg: &ArrayConfig, n_snapshots: usize, seed: u64) -> Result<SnapshotBlock> {
    cfg.validate()?;
    if n_snapshots == 0 {
        return Err(BeamformError::InvalidArgument("n_snapshots must be at least 1".into()));
    }
    let a = steering_matrix(cfg)?;
    let q = cfg.q();
    let amplitudes: Vec<f64> = cfg.source_powers.iter().map(|p| p.sqrt()).collect();
    let noise_sigma = (noise_power(cfg) / 2.0).sqrt();

    let mut rng = rng_from_seed(seed);
    let mut x = CMatrix::zeros(cfg.m, n_snapshots);
    let mut s = DMatrix::<f64>::zeros(n_snapshots, q);
    for i in 0..n_snapshots {
        for k in 0..q {
            let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
            s[(i, k)] = sign * amplitudes[k];
        }
        let mut col = x.column_mut(i);
        for j in 0..cfg.m {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            col[j] = C64::new(noise_sigma * re, noise_sigma * im);
        }
        for k in 0..q {
            col.axpy(C64::new(s[(i, k)], 0.0), &a.column(k), C64::new(1.0, 0.0));
        }
    }
    Ok(SnapshotBlock { x, s, seed })
}

/// Interferer DOAs used when a scenario lists only the SOI: `n + 1` points
/// evenly spaced inside (20°, 160°), dropping the one nearest the SOI.
pub fn default_interferer_doas(soi_deg: f64, n_interferers: usize) -> Vec<f64> {
    if n_interferers == 0 {
        return Vec::new();
    }
    let slots = n_interferers + 1;
    let spacing = 140.0 / (slots + 1) as f64;
    let mut grid: Vec<f64> = (1..=slots).map(|k| 20.0 + spacing * k as f64).collect();
    let nearest = grid
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 - soi_deg).abs().total_cmp(&(b.1 - soi_deg).abs()))
        .map(|(i, _)| i)
        .unwrap_or(0);
    grid.remove(nearest);
    grid
}
