//! Quick invariant checks runnable from the command line (`ccm-beamform
//! selftest`). Each check is small enough to finish in well under a second.

use std::fmt;

use crate::array::{generate_block, steering_vector, ArrayConfig};
use crate::complexity::{complexity_counts, ComplexityRow};
use crate::error::Result;
use crate::fullrank::{ccm_sg_step, FullRankState};
use crate::jio::{gram_schmidt, jio_step, JioState};
use crate::linalg::{orthonormality_error, CMatrix, CVector, C64};
use crate::metrics::{constraint_vector, run_ensemble};
use crate::scenario::Scenario;

/// Outcome of one self-test check.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{verdict} {}: {}", self.name, self.detail)
    }
}

fn check(name: &'static str, outcome: Result<(bool, String)>) -> CheckResult {
    match outcome {
        Ok((passed, detail)) => CheckResult { name, passed, detail },
        Err(err) => CheckResult {
            name,
            passed: false,
            detail: format!("error: {err}"),
        },
    }
}

fn steering_broadside() -> Result<(bool, String)> {
    let cfg = ArrayConfig::new(8, vec![90.0], 10.0)?;
    let a = steering_vector(&cfg, 90.0)?.into_inner();
    let dev = a.iter().map(|v| (v - C64::new(1.0, 0.0)).norm()).fold(0.0, f64::max);
    Ok((dev < 1e-12, format!("max |a_k(90°) − 1| = {dev:.2e}")))
}

fn complexity_rows() -> Result<(bool, String)> {
    let jio = complexity_counts(ComplexityRow::JioCcm, 32, 5)?;
    let fr = complexity_counts(ComplexityRow::FullRankCcm, 32, 5)?;
    let got = (jio.additions, jio.multiplications, fr.additions, fr.multiplications);
    Ok((
        got == (680, 713, 96, 131),
        format!("JIO-CCM {}/{}, full-rank CCM {}/{} at (32, 5)", got.0, got.1, got.2, got.3),
    ))
}

fn jio_constraint(gs: bool) -> Result<(bool, String)> {
    let sc = Scenario::bundled_default();
    let block = generate_block(&sc.array, 500, 11)?;
    let a0 = constraint_vector(&sc.array)?;
    let (mu_t, mu_w) = if gs {
        (sc.run.mu_t_gs, sc.run.mu_w_gs)
    } else {
        (sc.run.mu_t, sc.run.mu_w)
    };
    let mut st = JioState::new(a0, sc.run.rank, mu_t, mu_w, gs)?;
    let (mut worst_c, mut worst_o) = (0.0f64, 0.0f64);
    for x in block.snapshots() {
        st.step_mut(&x)?;
        worst_c = worst_c.max((st.constraint() - C64::new(1.0, 0.0)).norm());
        if gs {
            worst_o = worst_o.max(orthonormality_error(&st.t));
        }
    }
    let passed = worst_c <= 1e-6 && (!gs || worst_o <= 1e-8);
    let detail = if gs {
        format!("500 steps: max |w̄ᴴā − 1| = {worst_c:.2e}, max ‖TᴴT − I‖ = {worst_o:.2e}")
    } else {
        format!("500 steps: max |w̄ᴴā − 1| = {worst_c:.2e}")
    };
    Ok((passed, detail))
}

fn fullrank_specialization() -> Result<(bool, String)> {
    let cfg = ArrayConfig::new(6, vec![90.0, 40.0, 125.0], 10.0)?;
    let block = generate_block(&cfg, 200, 3)?;
    let a0 = constraint_vector(&cfg)?;
    let mu = 1e-3;
    let mut fr = FullRankState::new(a0.clone(), mu)?;
    let mut jio = JioState::from_parts(CMatrix::identity(6, 6), fr.w.clone(), a0, 0.0, mu, false)?;
    let mut worst = 0.0f64;
    for x in block.snapshots() {
        fr = ccm_sg_step(&fr, &x)?;
        jio = jio_step(&jio, &x)?.0;
        worst = (&fr.w - &jio.w_bar).iter().fold(worst, |acc, v| acc.max(v.norm()));
    }
    Ok((worst <= 1e-12, format!("200 steps, max component gap {worst:.2e}")))
}

fn gradient_fd() -> Result<(bool, String)> {
    let m = 5;
    let t = CMatrix::from_fn(m, 2, |i, j| C64::new((1.0 + i as f64 * 0.7 + j as f64).sin(), (0.3 * i as f64 - j as f64).cos()));
    let w = CVector::from_fn(2, |i, _| C64::new(0.4 + 0.1 * i as f64, -0.2));
    let a0 = CVector::from_element(m, C64::new(1.0, 0.0));
    let x = CVector::from_fn(m, |i, _| C64::new((2.0 * i as f64).cos(), (i as f64 + 0.5).sin()));
    let st = JioState::from_parts(t, w, a0, 0.0, 0.0, false)?;
    let cost = |t: &CMatrix, w: &CVector| {
        let y = w.dotc(&t.ad_mul(&x));
        (y.norm_sqr() - 1.0).powi(2)
    };
    let s = st.forward(&x)?;
    let g = st.grad_w(&s);
    // Directional derivative along a fixed complex direction: dJ = 2 Re⟨g, d⟩.
    let d = CVector::from_fn(2, |i, _| C64::new(0.3 - 0.2 * i as f64, 0.5));
    let h = 1e-6;
    let fd = (cost(&st.t, &(&st.w_bar + d.scale(h))) - cost(&st.t, &(&st.w_bar - d.scale(h)))) / (2.0 * h);
    let analytic = 2.0 * g.dotc(&d).re;
    let gt = st.grad_t(&s);
    let dt = CMatrix::from_fn(m, 2, |i, j| C64::new(0.1 * (i + j) as f64, 0.2 - 0.05 * i as f64));
    let fd_t = (cost(&(&st.t + dt.scale(h)), &st.w_bar) - cost(&(&st.t - dt.scale(h)), &st.w_bar)) / (2.0 * h);
    let analytic_t = 2.0 * gt.dotc(&dt).re;
    let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(b.abs()).max(1e-12);
    let worst = rel(fd, analytic).max(rel(fd_t, analytic_t));
    Ok((worst < 1e-4, format!("max relative error {worst:.2e}")))
}

fn gram_schmidt_orthonormal() -> Result<(bool, String)> {
    let t = CMatrix::from_fn(8, 3, |i, j| C64::new(((i * 3 + j) as f64).sin(), ((i + 2 * j) as f64).cos()));
    let q = gram_schmidt(&t)?;
    let err = orthonormality_error(&q);
    Ok((err < 1e-12, format!("‖QᴴQ − I‖ = {err:.2e}")))
}

fn ensemble_determinism() -> Result<(bool, String)> {
    let mut sc = Scenario::bundled_default();
    sc.run.n_runs = 4;
    sc.run.n_snapshots = 50;
    let a = run_ensemble(&sc, crate::metrics::Algorithm::JioCcmGs)?;
    sc.run.threads = Some(1);
    let b = run_ensemble(&sc, crate::metrics::Algorithm::JioCcmGs)?;
    let same = a.sinr_db.iter().zip(&b.sinr_db).all(|(x, y)| x.to_bits() == y.to_bits());
    Ok((same, "parallel and single-threaded curves bit-identical".into()))
}

/// Runs every check in a fixed order.
pub fn run_checks() -> Vec<CheckResult> {
    vec![
        check("steering-broadside", steering_broadside()),
        check("complexity-table", complexity_rows()),
        check("jio-constraint", jio_constraint(false)),
        check("jio-gs-constraint", jio_constraint(true)),
        check("fullrank-specialization", fullrank_specialization()),
        check("gradients", gradient_fd()),
        check("gram-schmidt", gram_schmidt_orthonormal()),
        check("ensemble-determinism", ensemble_determinism()),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_checks_pass() {
        for result in run_checks() {
            assert!(result.passed, "{result}");
        }
    }
}
