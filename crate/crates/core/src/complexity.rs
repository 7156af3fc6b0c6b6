//! Per-snapshot operation counts (complex additions and multiplications) for
//! the full-rank, MSWF, AVF and JIO families of constrained beamformers.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{BeamformError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ComplexityRow {
    FullRankCmv,
    FullRankCcm,
    MswfCmv,
    MswfCcm,
    Avf,
    JioCmv,
    JioCmvGs,
    JioCcm,
    JioCcmGs,
}

impl ComplexityRow {
    pub const ALL: [ComplexityRow; 9] = [
        ComplexityRow::FullRankCmv,
        ComplexityRow::FullRankCcm,
        ComplexityRow::MswfCmv,
        ComplexityRow::MswfCcm,
        ComplexityRow::Avf,
        ComplexityRow::JioCmv,
        ComplexityRow::JioCmvGs,
        ComplexityRow::JioCcm,
        ComplexityRow::JioCcmGs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ComplexityRow::FullRankCmv => "Full-Rank-CMV",
            ComplexityRow::FullRankCcm => "Full-Rank-CCM",
            ComplexityRow::MswfCmv => "MSWF-CMV",
            ComplexityRow::MswfCcm => "MSWF-CCM",
            ComplexityRow::Avf => "AVF",
            ComplexityRow::JioCmv => "JIO-CMV",
            ComplexityRow::JioCmvGs => "JIO-CMV-GS",
            ComplexityRow::JioCcm => "JIO-CCM",
            ComplexityRow::JioCcmGs => "JIO-CCM-GS",
        }
    }

    pub fn uses_rank(self) -> bool {
        !matches!(self, ComplexityRow::FullRankCmv | ComplexityRow::FullRankCcm)
    }

    /// `(additions, multiplications)` as signed polynomials in `m` and `r`.
    fn polynomials(self, m: i128, r: i128) -> (i128, i128) {
        match self {
            ComplexityRow::FullRankCmv => (3 * m - 1, 4 * m + 1),
            ComplexityRow::FullRankCcm => (3 * m, 4 * m + 3),
            ComplexityRow::MswfCmv => (
                r * m * m + r * m + m + 2 * r - 2,
                r * m * m + m * m + 2 * r * m + 5 * r + 2,
            ),
            ComplexityRow::MswfCcm => (
                r * m * m + r * m + m + 2 * r - 1,
                r * m * m + m * m + 2 * r * m + 5 * r + 4,
            ),
            ComplexityRow::Avf => (
                r * (4 * m * m + m - 2) + 5 * m * m - m - 1,
                r * (5 * m * m + 3 * m) + 8 * m * m + 2 * m,
            ),
            ComplexityRow::JioCmv => (4 * r * m + m + 2 * r - 3, 4 * r * m + m + 7 * r + 3),
            ComplexityRow::JioCmvGs => (7 * r * m - m - 1, 7 * r * m - 2 * m + 8 * r + 2),
            ComplexityRow::JioCcm => (4 * r * m + m + 2 * r - 2, 4 * r * m + m + 7 * r + 6),
            ComplexityRow::JioCcmGs => (7 * r * m - m, 7 * r * m - 2 * m + 8 * r + 5),
        }
    }
}

impl fmt::Display for ComplexityRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ComplexityRow {
    type Err = BeamformError;

    fn from_str(s: &str) -> Result<Self> {
        ComplexityRow::ALL
            .into_iter()
            .find(|row| row.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| BeamformError::UnknownAlgorithm(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ComplexityCount {
    pub algorithm: ComplexityRow,
    pub additions: u64,
    pub multiplications: u64,
}

pub fn complexity_counts(row: ComplexityRow, m: usize, r: usize) -> Result<ComplexityCount> {
    if m == 0 {
        return Err(BeamformError::InvalidArgument("m must be at least 1".into()));
    }
    if row.uses_rank() && r == 0 {
        return Err(BeamformError::InvalidArgument(format!("{row} needs r ≥ 1")));
    }
    let (adds, mults) = row.polynomials(m as i128, r as i128);
    let to_count = |v: i128| {
        u64::try_from(v).map_err(|_| {
            BeamformError::InvalidArgument(format!("{row} count out of range at m={m}, r={r}"))
        })
    };
    Ok(ComplexityCount {
        algorithm: row,
        additions: to_count(adds)?,
        multiplications: to_count(mults)?,
    })
}

/// Counts for every row at the same `(m, r)`.
pub fn complexity_table(m: usize, r: usize) -> Result<Vec<ComplexityCount>> {
    ComplexityRow::ALL
        .into_iter()
        .map(|row| complexity_counts(row, m, r))
        .collect()
}
