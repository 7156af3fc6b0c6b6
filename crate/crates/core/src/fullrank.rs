//! Full-rank constrained beamformers: CMV-SG, CCM-SG and the iterated
//! closed-form CCM solution.
//!
//! All three keep the array-response constraint `wᴴa₀ = 1`. The constraint
//! vector `a₀` is whatever the caller hands in (unit-norm or raw steering
//! vector); projectors are formed as `I − a₀a₀ᴴ/(a₀ᴴa₀)` so either works.

use crate::array::SnapshotBlock;
use crate::error::{BeamformError, Result};
use crate::linalg::{check_len, hpd_factor, load_diagonal, re, CMatrix, CVector, C64};

#[derive(Debug, Clone, PartialEq)]
pub struct FullRankState {
    pub w: CVector,
    pub mu: f64,
    pub a0: CVector,
}

impl FullRankState {
    /// Starts from `w = a₀/(a₀ᴴa₀)`, which satisfies the constraint.
    pub fn new(a0: CVector, mu: f64) -> Result<Self> {
        let energy = a0.norm_squared();
        if energy == 0.0 || !energy.is_finite() {
            return Err(BeamformError::Initialization(
                "constraint vector must be nonzero and finite".into(),
            ));
        }
        let w = a0.unscale(energy);
        Ok(Self { w, mu, a0 })
    }

    pub fn with_weights(w: CVector, a0: CVector, mu: f64) -> Result<Self> {
        check_len(&w, a0.len())?;
        Ok(Self { w, mu, a0 })
    }

    pub fn m(&self) -> usize {
        self.w.len()
    }

    /// Current value of `wᴴa₀`.
    pub fn constraint(&self) -> C64 {
        self.w.dotc(&self.a0)
    }

    pub fn output(&self, x: &CVector) -> Result<C64> {
        check_len(x, self.m())?;
        Ok(self.w.dotc(x))
    }

    /// `x − a₀(a₀ᴴx)/(a₀ᴴa₀)`.
    fn project_out_constraint(&self, x: &CVector) -> CVector {
        let coeff = self.a0.dotc(x) / self.a0.norm_squared();
        let mut px = x.clone();
        px.axpy(-coeff, &self.a0, C64::new(1.0, 0.0));
        px
    }

    /// In-place CCM stochastic-gradient update; returns the pre-update output.
    pub fn ccm_update(&mut self, x: &CVector) -> Result<C64> {
        let y = self.output(x)?;
        let e = y.norm_sqr() - 1.0;
        let px = self.project_out_constraint(x);
        self.w.axpy(-re(self.mu * e) * y.conj(), &px, C64::new(1.0, 0.0));
        Ok(y)
    }

    /// In-place CMV stochastic-gradient update with affine re-projection onto
    /// the constraint plane; returns the pre-update output.
    pub fn cmv_update(&mut self, x: &CVector) -> Result<C64> {
        let y = self.output(x)?;
        let energy = self.a0.norm_squared();
        let mut w = self.w.clone();
        w.axpy(-re(self.mu) * y.conj(), x, C64::new(1.0, 0.0));
        let coeff = self.a0.dotc(&w) / energy;
        w.axpy(-coeff, &self.a0, C64::new(1.0, 0.0));
        w.axpy(re(1.0 / energy), &self.a0, C64::new(1.0, 0.0));
        self.w = w;
        Ok(y)
    }
}

/// `y = wᴴx`.
pub fn fullrank_output(st: &FullRankState, x: &CVector) -> Result<C64> {
    st.output(x)
}

/// `w ← w − μ e y* [I − a₀a₀ᴴ/(a₀ᴴa₀)] x` with `e = |y|² − 1`.
pub fn ccm_sg_step(st: &FullRankState, x: &CVector) -> Result<FullRankState> {
    let mut next = st.clone();
    next.ccm_update(x)?;
    Ok(next)
}

/// `w ← P(w − μ y* x) + a₀/(a₀ᴴa₀)` with `P = I − a₀a₀ᴴ/(a₀ᴴa₀)`.
pub fn cmv_sg_step(st: &FullRankState, x: &CVector) -> Result<FullRankState> {
    let mut next = st.clone();
    next.cmv_update(x)?;
    Ok(next)
}

/// Sample estimates `R̂ = (1/N) Σ |y|² x xᴴ` and `p̂ = (1/N) Σ y* x` for the
/// filter `w` over a block.
pub(crate) fn cm_statistics(block: &SnapshotBlock, w: &CVector) -> (CMatrix, CVector) {
    let m = block.m();
    let mut r = CMatrix::zeros(m, m);
    let mut p = CVector::zeros(m);
    for x in block.x.column_iter() {
        let y = w.dotc(&x);
        r.gerc(re(y.norm_sqr()), &x, &x, C64::new(1.0, 0.0));
        p.axpy(y.conj(), &x, C64::new(1.0, 0.0));
    }
    let scale = 1.0 / block.len() as f64;
    (r.scale(scale), p.scale(scale))
}

/// Minimizer of `wᴴRw − 2Re(wᴴp)` subject to `wᴴa = 1`:
/// `w = R⁻¹(p − λa)`, `λ = (aᴴR⁻¹p − 1)/(aᴴR⁻¹a)`.
pub(crate) fn constrained_solve(r: CMatrix, p: &CVector, a: &CVector) -> Result<CVector> {
    let chol = hpd_factor(r, "constrained CM solve")?;
    let rp = chol.solve(p);
    let ra = chol.solve(a);
    let denom = a.dotc(&ra).re;
    if !(denom.is_finite() && denom > 0.0) {
        return Err(BeamformError::Singular("constrained CM solve"));
    }
    let lambda = (a.dotc(&rp) - C64::new(1.0, 0.0)) / denom;
    let mut w = rp;
    w.axpy(-lambda, &ra, C64::new(1.0, 0.0));
    Ok(w)
}

/// Iterated closed-form CCM weights. Each iteration re-estimates `R̂` and `p̂`
/// with the current weights, loads the diagonal of `R̂` by
/// `loading · trace(R̂)/m`, and solves the constrained problem.
pub fn ccm_closed_form(
    block: &SnapshotBlock,
    a0: &CVector,
    init_w: &CVector,
    n_iters: usize,
    loading: f64,
) -> Result<FullRankState> {
    check_len(a0, block.m())?;
    check_len(init_w, block.m())?;
    let mut w = init_w.clone();
    for _ in 0..n_iters {
        let (mut r, p) = cm_statistics(block, &w);
        load_diagonal(&mut r, loading);
        w = constrained_solve(r, &p, a0)?;
    }
    FullRankState::with_weights(w, a0.clone(), 0.0)
}
