//! Joint iterative optimization (JIO) of a transformation matrix `T` (m × r)
//! and a reduced-rank filter `w̄` (r) under the constrained constant modulus
//! criterion.
//!
//! Per snapshot `x`:
//!
//! ```text
//! x̄ = Tᴴx,   y = w̄ᴴx̄,   e = |y|² − 1
//! T  ← T − μ_T e y* [x − a₀(a₀ᴴx)/(a₀ᴴa₀)] w̄ᴴ
//! (GS variant: orthonormalize the columns of T, refresh ā = Tᴴa₀,
//!  rescale w̄ so that w̄ᴴā = 1, and re-project x̄ = Tᴴx)
//! w̄ ← w̄ − μ_w e y* [I − āāᴴ/(āᴴā)] x̄
//! ```
//!
//! `y` and `e` are evaluated once per snapshot and shared by both updates.
//! Neither update moves `w̄ᴴTᴴa₀`: the `T` step is orthogonal to `a₀` and the
//! `w̄` step is orthogonal to `ā`.

use std::collections::VecDeque;

use crate::array::SnapshotBlock;
use crate::error::{BeamformError, Result};
use crate::fullrank::constrained_solve;
use crate::linalg::{check_len, hpd_factor, load_diagonal, re, CMatrix, CVector, C64};

const ONE: C64 = C64::new(1.0, 0.0);

/// Relative column-norm threshold below which Gram-Schmidt reports the
/// columns as linearly dependent.
pub const GS_DEGENERACY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct JioState {
    /// Transformation matrix, m × r.
    pub t: CMatrix,
    /// Reduced-rank weights, length r.
    pub w_bar: CVector,
    pub mu_t: f64,
    pub mu_w: f64,
    /// SOI constraint vector, length m.
    pub a0: CVector,
    /// Cached `Tᴴa₀`.
    pub a_bar: CVector,
    pub gs_enabled: bool,
    /// Orthonormalize every `gs_period` snapshots when `gs_enabled`.
    pub gs_period: usize,
    steps: u64,
}

/// One processed snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct CmSample {
    pub x: CVector,
    pub x_bar: CVector,
    pub y: C64,
    pub e: f64,
}

impl JioState {
    /// Canonical start: `T(0) = [I_r; 0]`, `w̄(0) = ā/‖ā‖²`.
    pub fn new(a0: CVector, r: usize, mu_t: f64, mu_w: f64, gs: bool) -> Result<Self> {
        let m = a0.len();
        if r == 0 || r >= m {
            return Err(BeamformError::InvalidRank { rank: r, m });
        }
        let t = CMatrix::identity(m, r);
        let a_bar = t.ad_mul(&a0);
        let energy = a_bar.norm_squared();
        if !(energy > 0.0 && energy.is_finite()) {
            return Err(BeamformError::Initialization(format!(
                "leading {r} entries of the constraint vector are zero"
            )));
        }
        let w_bar = a_bar.unscale(energy);
        Ok(Self {
            t,
            w_bar,
            mu_t,
            mu_w,
            a0,
            a_bar,
            gs_enabled: gs,
            gs_period: 1,
            steps: 0,
        })
    }

    /// Arbitrary `(T, w̄)`; `r ≤ m` is allowed so that `T = I` reproduces the
    /// full-rank filter. The constraint is not enforced.
    pub fn from_parts(
        t: CMatrix,
        w_bar: CVector,
        a0: CVector,
        mu_t: f64,
        mu_w: f64,
        gs: bool,
    ) -> Result<Self> {
        let (m, r) = t.shape();
        check_len(&a0, m)?;
        check_len(&w_bar, r)?;
        if r == 0 || r > m {
            return Err(BeamformError::InvalidRank { rank: r, m });
        }
        let a_bar = t.ad_mul(&a0);
        Ok(Self {
            t,
            w_bar,
            mu_t,
            mu_w,
            a0,
            a_bar,
            gs_enabled: gs,
            gs_period: 1,
            steps: 0,
        })
    }

    pub fn with_gs_period(mut self, period: usize) -> Self {
        self.gs_period = period.max(1);
        self
    }

    pub fn m(&self) -> usize {
        self.t.nrows()
    }

    pub fn rank(&self) -> usize {
        self.t.ncols()
    }

    /// Snapshots processed so far.
    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// `w̄ᴴā`; equals one while the constraint holds.
    pub fn constraint(&self) -> C64 {
        self.w_bar.dotc(&self.a_bar)
    }

    /// Full-length equivalent filter `T w̄`, so that `y = (Tw̄)ᴴx`.
    pub fn equivalent_filter(&self) -> CVector {
        &self.t * &self.w_bar
    }

    /// `x̄ = Tᴴx`.
    pub fn project(&self, x: &CVector) -> Result<CVector> {
        check_len(x, self.m())?;
        Ok(self.t.ad_mul(x))
    }

    pub fn forward(&self, x: &CVector) -> Result<CmSample> {
        let x_bar = self.project(x)?;
        let y = self.w_bar.dotc(&x_bar);
        Ok(CmSample {
            x: x.clone(),
            x_bar,
            y,
            e: y.norm_sqr() - 1.0,
        })
    }

    /// Conjugate-Wirtinger gradient of the instantaneous CM cost with respect
    /// to `T`: `2 e y* x w̄ᴴ`.
    pub fn grad_t(&self, s: &CmSample) -> CMatrix {
        let mut g = CMatrix::zeros(self.m(), self.rank());
        g.gerc(re(2.0 * s.e) * s.y.conj(), &s.x, &self.w_bar, ONE);
        g
    }

    /// Conjugate-Wirtinger gradient with respect to `w̄`: `2 e y* x̄`.
    pub fn grad_w(&self, s: &CmSample) -> CVector {
        s.x_bar.scale(2.0 * s.e) * s.y.conj()
    }

    fn apply_update_t(&mut self, s: &CmSample) {
        let coeff = self.a0.dotc(&s.x) / self.a0.norm_squared();
        let mut direction = s.x.clone();
        direction.axpy(-coeff, &self.a0, ONE);
        let gain = -re(self.mu_t * s.e) * s.y.conj();
        self.t.gerc(gain, &direction, &self.w_bar, ONE);
        self.a_bar = self.t.ad_mul(&self.a0);
    }

    fn apply_update_w(&mut self, s: &CmSample) -> Result<()> {
        let energy = self.a_bar.norm_squared();
        if !(energy > 0.0 && energy.is_finite()) {
            return Err(BeamformError::Numerical(
                "projected constraint vector ā vanished".into(),
            ));
        }
        let coeff = self.a_bar.dotc(&s.x_bar) / energy;
        let mut direction = s.x_bar.clone();
        direction.axpy(-coeff, &self.a_bar, ONE);
        self.w_bar
            .axpy(-re(self.mu_w * s.e) * s.y.conj(), &direction, ONE);
        Ok(())
    }

    /// Orthonormalizes `T`, refreshes `ā` and rescales `w̄` by `1/(w̄ᴴā)*` so
    /// the constraint holds again.
    fn reorthonormalize(&mut self) -> Result<()> {
        self.t = gram_schmidt(&self.t)?;
        self.a_bar = self.t.ad_mul(&self.a0);
        let c = self.constraint();
        if c.norm() == 0.0 || !c.is_finite() {
            return Err(BeamformError::Numerical(
                "constraint cannot be restored after orthonormalization".into(),
            ));
        }
        self.w_bar *= ONE / c.conj();
        Ok(())
    }

    /// Processes one snapshot in place and returns the sample it produced.
    pub fn step_mut(&mut self, x: &CVector) -> Result<CmSample> {
        let mut s = self.forward(x)?;
        self.apply_update_t(&s);
        self.steps += 1;
        if self.gs_enabled && self.steps % self.gs_period as u64 == 0 {
            self.reorthonormalize()?;
            let sample_x_bar = std::mem::replace(&mut s.x_bar, self.t.ad_mul(x));
            self.apply_update_w(&s)?;
            s.x_bar = sample_x_bar;
        } else {
            self.apply_update_w(&s)?;
        }
        Ok(s)
    }
}

/// Canonical initialization; see [`JioState::new`].
pub fn init_state(a0: CVector, r: usize, mu_t: f64, mu_w: f64, gs: bool) -> Result<JioState> {
    JioState::new(a0, r, mu_t, mu_w, gs)
}

pub fn project(st: &JioState, x: &CVector) -> Result<CVector> {
    st.project(x)
}

pub fn forward(st: &JioState, x: &CVector) -> Result<CmSample> {
    st.forward(x)
}

/// Mean of `e²` over the samples.
pub fn cm_cost(samples: &[CmSample]) -> Result<f64> {
    if samples.is_empty() {
        return Err(BeamformError::InvalidArgument("cm_cost of an empty sample list".into()));
    }
    Ok(samples.iter().map(|s| s.e * s.e).sum::<f64>() / samples.len() as f64)
}

pub fn grad_t(s: &CmSample, st: &JioState) -> CMatrix {
    st.grad_t(s)
}

pub fn grad_w(s: &CmSample, st: &JioState) -> CVector {
    st.grad_w(s)
}

/// `T ← T − μ_T e y* [x w̄ᴴ − a₀ w̄ᴴ (a₀ᴴx)/(a₀ᴴa₀)]`.
pub fn update_t(st: &JioState, s: &CmSample) -> JioState {
    let mut next = st.clone();
    next.apply_update_t(s);
    next
}

/// `w̄ ← w̄ − μ_w e y* [I − āāᴴ/(āᴴā)] x̄`.
pub fn update_w(st: &JioState, s: &CmSample) -> Result<JioState> {
    let mut next = st.clone();
    next.apply_update_w(s)?;
    Ok(next)
}

/// Classical Gram-Schmidt: each column has its projections onto the already
/// orthonormalized columns removed, then is scaled to unit length.
pub fn gram_schmidt(t: &CMatrix) -> Result<CMatrix> {
    let mut q = t.clone();
    for l in 0..t.ncols() {
        let original = t.column(l);
        let scale = original.norm();
        let mut v = original.into_owned();
        for j in 0..l {
            let qj = q.column(j);
            let coeff = qj.dotc(&original);
            v.axpy(-coeff, &qj, ONE);
        }
        let norm = v.norm();
        if !(norm > GS_DEGENERACY_TOL * scale) || !norm.is_finite() {
            return Err(BeamformError::Degenerate { column: l });
        }
        q.set_column(l, &v.unscale(norm));
    }
    Ok(q)
}

/// One snapshot of JIO-CCM (or JIO-CCM-GS when enabled on the state).
pub fn jio_step(st: &JioState, x: &CVector) -> Result<(JioState, CmSample)> {
    let mut next = st.clone();
    let s = next.step_mut(x)?;
    Ok((next, s))
}

/// Reduced-rank constrained CM weights for fixed `T`: with
/// `R̄ = (1/N) Σ |y|² x̄x̄ᴴ + δI` and `p̄ = (1/N) Σ y* x̄` estimated over the
/// block using the current `(T, w̄)`,
/// `w̄ = R̄⁻¹(p̄ − λā)` with `λ = (āᴴR̄⁻¹p̄ − 1)/(āᴴR̄⁻¹ā)`. `loading` is relative
/// to the mean diagonal of `R̄`.
pub fn closed_form_w(block: &SnapshotBlock, st: &JioState, loading: f64) -> Result<CVector> {
    if block.m() != st.m() {
        return Err(BeamformError::DimensionMismatch {
            expected: st.m(),
            got: block.m(),
        });
    }
    if block.len() < st.rank() {
        return Err(BeamformError::InvalidArgument(format!(
            "block of {} snapshots is shorter than rank {}",
            block.len(),
            st.rank()
        )));
    }
    let r = st.rank();
    let mut r_bar = CMatrix::zeros(r, r);
    let mut p_bar = CVector::zeros(r);
    for x in block.x.column_iter() {
        let x_bar = st.t.ad_mul(&x);
        let y = st.w_bar.dotc(&x_bar);
        r_bar.gerc(re(y.norm_sqr()), &x_bar, &x_bar, ONE);
        p_bar.axpy(y.conj(), &x_bar, ONE);
    }
    let scale = 1.0 / block.len() as f64;
    r_bar.scale_mut(scale);
    p_bar.scale_mut(scale);
    load_diagonal(&mut r_bar, loading);
    constrained_solve(r_bar, &p_bar, &st.a_bar)
}

/// Transformation matrix minimizing the constrained CM cost for the current
/// `w̄`:
///
/// ```text
/// β = w̄ᴴ R̄_w⁻¹ w̄
/// λ = (β a₀ᴴR⁻¹p − 1) / (β a₀ᴴR⁻¹a₀)
/// T = R⁻¹ (p − λ a₀) w̄ᴴ R̄_w⁻¹
/// ```
///
/// `R` and `p` are the block averages of `|y|² x xᴴ` and `y* x` under the
/// current filter. `R̄_w` is the average of `w̄w̄ᴴ` over the last `window`
/// stochastic-gradient iterates, obtained by running JIO steps from `st`
/// over the final `window` snapshots of the block. Both matrices get
/// relative diagonal loading.
pub fn closed_form_t(
    block: &SnapshotBlock,
    st: &JioState,
    window: usize,
    loading: f64,
) -> Result<CMatrix> {
    let m = st.m();
    let r = st.rank();
    if block.m() != m {
        return Err(BeamformError::DimensionMismatch {
            expected: m,
            got: block.m(),
        });
    }
    if window < r || window > block.len() {
        return Err(BeamformError::InvalidArgument(format!(
            "window {window} must lie in [{r}, {}]",
            block.len()
        )));
    }

    let w_cov = sg_weight_covariance(block, st, window)?;
    let mut w_cov = w_cov;
    load_diagonal(&mut w_cov, loading);
    let w_chol = hpd_factor(w_cov, "reduced-rank weight covariance")?;
    let w_solved = w_chol.solve(&st.w_bar);
    let beta = st.w_bar.dotc(&w_solved).re;

    let (mut r_full, p) = crate::fullrank::cm_statistics(block, &st.equivalent_filter());
    load_diagonal(&mut r_full, loading);
    let chol = hpd_factor(r_full, "CM correlation matrix")?;
    let rp = chol.solve(&p);
    let ra = chol.solve(&st.a0);
    let denom = beta * st.a0.dotc(&ra).re;
    if !(denom.is_finite() && denom > 0.0) {
        return Err(BeamformError::Singular("transformation-matrix solve"));
    }
    let lambda = (re(beta) * st.a0.dotc(&rp) - ONE) / denom;
    let mut left = rp;
    left.axpy(-lambda, &ra, ONE);
    // R̄_w is Hermitian, so w̄ᴴR̄_w⁻¹ = (R̄_w⁻¹w̄)ᴴ.
    let mut t = CMatrix::zeros(m, r);
    t.gerc(ONE, &left, &w_solved, C64::new(0.0, 0.0));
    Ok(t)
}

fn sg_weight_covariance(block: &SnapshotBlock, st: &JioState, window: usize) -> Result<CMatrix> {
    let r = st.rank();
    let mut sg = st.clone();
    let mut iterates: VecDeque<CVector> = VecDeque::with_capacity(window);
    iterates.push_back(sg.w_bar.clone());
    for x in block.x.column_iter().skip(block.len() - window) {
        sg.step_mut(&x.into_owned())?;
        if iterates.len() == window {
            iterates.pop_front();
        }
        iterates.push_back(sg.w_bar.clone());
    }
    let mut cov = CMatrix::zeros(r, r);
    for w in &iterates {
        cov.gerc(ONE, w, &w, ONE);
    }
    cov.scale_mut(1.0 / iterates.len() as f64);
    Ok(cov)
}
