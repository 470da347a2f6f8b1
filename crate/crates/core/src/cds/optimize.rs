use crate::error::{invalid, Result};
use crate::mathkit::{norm, norm_sqr, principal_eigenvector, vdot, CMatrix, RngStream, C64};
use crate::ncds::{decide_psk, Decision};

/// Combiner and RIS configuration from the alternating optimization.
#[derive(Debug, Clone)]
pub struct CdsSolution {
    /// Unit-norm combiner.
    pub w: Vec<C64>,
    pub psi: Vec<f64>,
    /// Objective after each completed iteration.
    pub objective_trace: Vec<f64>,
    pub iterations_used: usize,
    /// Relative objective change dropped below `tol` before `max_iters`.
    pub converged: bool,
}

/// `(Px / sigma_v^2) |w^H C e^{j psi}|^2 / |w|^2`.
pub fn coherent_snr(w: &[C64], c: &CMatrix, psi: &[f64], px: f64, noise_var: f64) -> Result<f64> {
    let wn = norm_sqr(w);
    if wn == 0.0 {
        return Err(invalid("w", "combiner must be non-zero"));
    }
    crate::error::check_len("combiner", c.rows(), w.len())?;
    crate::error::check_len("ris phases", c.cols(), psi.len())?;
    let phasors: Vec<C64> = psi.iter().map(|&p| C64::from_polar(1.0, p)).collect();
    let eff = c.mul_vec(&phasors)?;
    Ok(px / noise_var * vdot(w, &eff).norm_sqr() / wn)
}

/// Alternates `psi = arg(C^H w)` and `w = v_max(C psi psi^H C^H)` from a
/// random unit-norm start. The objective is the post-combining gain
/// `|w^H C e^{j psi}|^2` scaled by `snr_scale` (use `Px / sigma_v^2`).
pub fn optimize_w_psi(
    c: &CMatrix,
    max_iters: usize,
    tol: f64,
    snr_scale: f64,
    rng: &mut RngStream,
) -> Result<CdsSolution> {
    let (b, m) = (c.rows(), c.cols());
    if b == 0 || m == 0 {
        return Err(invalid("cascaded matrix", "empty"));
    }
    let mut w: Vec<C64> = if b == 1 {
        vec![C64::new(1.0, 0.0)]
    } else {
        let v: Vec<C64> = (0..b).map(|_| rng.complex_normal(1.0)).collect();
        let n = norm(&v);
        v.into_iter().map(|z| z / n).collect()
    };
    let mut trace = Vec::with_capacity(max_iters);
    let mut best: Option<(f64, Vec<C64>, Vec<f64>)> = None;
    let mut converged = false;
    for _ in 0..max_iters.max(1) {
        let proj = c.adjoint_mul_vec(&w)?;
        let psi: Vec<f64> = proj.iter().map(|z| z.arg()).collect();
        let phasors: Vec<C64> = psi.iter().map(|&p| C64::from_polar(1.0, p)).collect();
        let eff = c.mul_vec(&phasors)?;
        if b > 1 {
            w = principal_eigenvector(&CMatrix::outer(&eff, &eff))?;
        }
        let objective = snr_scale * vdot(&w, &eff).norm_sqr();
        let prev = trace.last().copied();
        trace.push(objective);
        if best.as_ref().is_none_or(|(o, _, _)| objective >= *o) {
            best = Some((objective, w.clone(), psi));
        }
        if let Some(p) = prev {
            if (objective - p).abs() <= tol * objective.abs() {
                converged = true;
                break;
            }
        }
    }
    let (_, w, psi) = best.expect("at least one iteration");
    Ok(CdsSolution {
        w,
        psi,
        iterations_used: trace.len(),
        objective_trace: trace,
        converged,
    })
}

/// Maximum-ratio combiner for an effective channel `h`: `h / |h|`.
pub fn mrc(h: &[C64]) -> Vec<C64> {
    let n = norm(h);
    if n == 0.0 {
        let mut e = vec![C64::new(0.0, 0.0); h.len()];
        if let Some(first) = e.first_mut() {
            *first = C64::new(1.0, 0.0);
        }
        return e;
    }
    h.iter().map(|z| z / n).collect()
}

/// Combines, equalizes by the estimated post-combining channel `q_hat`
/// and decides the nearest PSK point. A zero combiner output reference
/// (`q_hat = 0`) or zero `w` is flagged degenerate.
pub fn coherent_demodulate(y: &[C64], w: &[C64], q_hat: C64, order: usize) -> Decision {
    if q_hat == C64::new(0.0, 0.0) || norm_sqr(w) == 0.0 {
        return Decision {
            index: 0,
            degenerate: true,
        };
    }
    decide_psk(vdot(w, y) / q_hat, order)
}
