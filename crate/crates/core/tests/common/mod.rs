//! Shared fixtures and straight-line scalar reference implementations used by
//! the integration tests. The oracles deliberately avoid the matrix library:
//! every product is an explicit loop over `Vec<Complex64>` entries.

#![allow(dead_code)]

use ccm_beamform::{CMatrix, CVector, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn random_c(rng: &mut ChaCha8Rng) -> C64 {
    c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

pub fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> CVector {
    CVector::from_fn(n, |_, _| random_c(rng))
}

pub fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| random_c(rng))
}

pub fn max_abs_diff_v(a: &CVector, b: &CVector) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn max_abs_diff_m(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Row-major copy of a matrix as plain nested vectors.
pub fn to_rows(t: &CMatrix) -> Vec<Vec<C64>> {
    (0..t.nrows())
        .map(|i| (0..t.ncols()).map(|j| t[(i, j)]).collect())
        .collect()
}

pub fn to_vec(v: &CVector) -> Vec<C64> {
    v.iter().copied().collect()
}

/// `Σ conj(a_k) b_k`.
pub fn oracle_dot(a: &[C64], b: &[C64]) -> C64 {
    let mut acc = c(0.0, 0.0);
    for k in 0..a.len() {
        acc += a[k].conj() * b[k];
    }
    acc
}

/// `x̄_j = Σ_k conj(T_kj) x_k`.
pub fn oracle_project(t: &[Vec<C64>], x: &[C64]) -> Vec<C64> {
    let m = t.len();
    let r = t[0].len();
    let mut out = vec![c(0.0, 0.0); r];
    for j in 0..r {
        for k in 0..m {
            out[j] += t[k][j].conj() * x[k];
        }
    }
    out
}

/// `(x̄, y, e)` for the reduced-rank filter.
pub fn oracle_forward(t: &[Vec<C64>], w: &[C64], x: &[C64]) -> (Vec<C64>, C64, f64) {
    let x_bar = oracle_project(t, x);
    let y = oracle_dot(w, &x_bar);
    let e = y.norm_sqr() - 1.0;
    (x_bar, y, e)
}

/// `T − μ e y* (x − a₀ (a₀ᴴx)/(a₀ᴴa₀)) w̄ᴴ`, entry by entry.
pub fn oracle_update_t(
    t: &[Vec<C64>],
    w: &[C64],
    a0: &[C64],
    x: &[C64],
    y: C64,
    e: f64,
    mu: f64,
) -> Vec<Vec<C64>> {
    let m = t.len();
    let r = t[0].len();
    let a_energy: f64 = a0.iter().map(|v| v.norm_sqr()).sum();
    let coeff = oracle_dot(a0, x) / a_energy;
    let mut out = t.to_vec();
    for k in 0..m {
        let dir = x[k] - a0[k] * coeff;
        for j in 0..r {
            out[k][j] -= c(mu * e, 0.0) * y.conj() * dir * w[j].conj();
        }
    }
    out
}

/// `w̄ − μ e y* (x̄ − ā (āᴴx̄)/(āᴴā))`.
pub fn oracle_update_w(w: &[C64], a_bar: &[C64], x_bar: &[C64], y: C64, e: f64, mu: f64) -> Vec<C64> {
    let energy: f64 = a_bar.iter().map(|v| v.norm_sqr()).sum();
    let coeff = oracle_dot(a_bar, x_bar) / energy;
    (0..w.len())
        .map(|j| w[j] - c(mu * e, 0.0) * y.conj() * (x_bar[j] - a_bar[j] * coeff))
        .collect()
}

/// Instantaneous CM cost `(|w̄ᴴTᴴx|² − 1)²`.
pub fn cm_cost_at(t: &CMatrix, w: &CVector, x: &CVector) -> f64 {
    let y = w.dotc(&t.ad_mul(x));
    (y.norm_sqr() - 1.0).powi(2)
}

/// Relative error with a small absolute floor.
pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-12)
}

/// Operation-count table re-typed by hand, evaluated at `(16, 3)`, `(32, 5)` and `(64, 8)`:
/// `(m, r, [(row name, additions, multiplications); 9])`.
pub const GOLDEN_TABLE: [(usize, usize, [(&str, u64, u64); 9]); 3] = [
    (
        16,
        3,
        [
            ("Full-Rank-CMV", 47, 65),
            ("Full-Rank-CCM", 48, 67),
            ("MSWF-CMV", 836, 1137),
            ("MSWF-CCM", 837, 1139),
            ("AVF", 4377, 6064),
            ("JIO-CMV", 211, 232),
            ("JIO-CMV-GS", 319, 330),
            ("JIO-CCM", 212, 235),
            ("JIO-CCM-GS", 320, 333),
        ],
    ),
    (
        32,
        5,
        [
            ("Full-Rank-CMV", 95, 129),
            ("Full-Rank-CCM", 96, 131),
            ("MSWF-CMV", 5320, 6491),
            ("MSWF-CCM", 5321, 6493),
            ("AVF", 25717, 34336),
            ("JIO-CMV", 679, 710),
            ("JIO-CMV-GS", 1087, 1098),
            ("JIO-CCM", 680, 713),
            ("JIO-CCM-GS", 1088, 1101),
        ],
    ),
    (
        64,
        8,
        [
            ("Full-Rank-CMV", 191, 257),
            ("Full-Rank-CCM", 192, 259),
            ("MSWF-CMV", 33358, 37930),
            ("MSWF-CCM", 33359, 37932),
            ("AVF", 151983, 198272),
            ("JIO-CMV", 2125, 2171),
            ("JIO-CMV-GS", 3519, 3522),
            ("JIO-CCM", 2126, 2174),
            ("JIO-CCM-GS", 3520, 3525),
        ],
    ),
];
