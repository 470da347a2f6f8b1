//! Dominant eigenvector of a Hermitian positive semidefinite matrix.

use num_complex::Complex64;

use super::linalg::{norm, vdot, CMatrix};
use crate::error::{invalid, Error, Result};

const MAX_ITERS: usize = 10_000;
const LAMBDA_RTOL: f64 = 1e-12;
const RESIDUAL_RTOL: f64 = 1e-9;
/// Number of squarings applied to the update operator. Iterating with
/// `A^(2^SQUARINGS)` raises the eigenvalue ratio per step to that power,
/// which matters when the top two eigenvalues are close.
const SQUARINGS: usize = 4;

#[derive(Debug, Clone)]
pub struct Eigenpair {
    pub vector: Vec<Complex64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Unit-norm dominant eigenvector (see [`dominant_eigenpair`]).
pub fn principal_eigenvector(a: &CMatrix) -> Result<Vec<Complex64>> {
    dominant_eigenpair(a).map(|p| p.vector)
}

/// Power iteration from a fixed, generic start vector.
///
/// Stops once the Rayleigh quotient changes by less than `1e-12` relative
/// and the residual `|Av - lambda v|` is at most `1e-9 lambda`. A zero
/// matrix yields the first standard basis vector with eigenvalue 0.
pub fn dominant_eigenpair(a: &CMatrix) -> Result<Eigenpair> {
    if !a.is_square() {
        return Err(invalid(
            "matrix",
            format!("must be square, got {}x{}", a.rows(), a.cols()),
        ));
    }
    let n = a.rows();
    if n == 0 {
        return Err(invalid("matrix", "empty"));
    }
    if a.as_slice().iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite("matrix"));
    }
    let scale = a.max_abs();
    if scale == 0.0 {
        let mut e1 = vec![Complex64::new(0.0, 0.0); n];
        e1[0] = Complex64::new(1.0, 0.0);
        return Ok(Eigenpair {
            vector: e1,
            value: 0.0,
            iterations: 0,
            converged: true,
        });
    }
    if a.hermitian_defect() > 1e-10 * scale.max(1.0) {
        return Err(invalid("matrix", "not Hermitian within 1e-10"));
    }

    let mut update = a.clone();
    for _ in 0..SQUARINGS {
        update = update.matmul(&update)?;
        let s = update.max_abs();
        if s == 0.0 || !s.is_finite() {
            update = a.clone();
            break;
        }
        update = CMatrix::from_fn(n, n, |r, c| update[(r, c)] / s);
    }

    // Golden-angle phases: not orthogonal to any eigenvector of practical
    // interest and identical on every call.
    let golden = std::f64::consts::PI * (3.0 - 5.0_f64.sqrt());
    let mut w: Vec<Complex64> = (0..n)
        .map(|i| Complex64::from_polar(1.0 + 0.1 * (i as f64).sin(), golden * i as f64))
        .collect();
    normalize(&mut w);

    let mut lambda_prev = f64::NAN;
    let mut best = w.clone();
    let mut best_res = f64::INFINITY;
    let mut best_lambda = 0.0;
    for it in 1..=MAX_ITERS {
        let aw = a.mul_vec(&w)?;
        let lambda = vdot(&w, &aw).re;
        let res = norm(
            &aw.iter()
                .zip(&w)
                .map(|(y, x)| y - x * lambda)
                .collect::<Vec<_>>(),
        );
        if lambda > 0.0 && res / lambda < best_res {
            best_res = res / lambda;
            best = w.clone();
            best_lambda = lambda;
        }
        let settled = (lambda - lambda_prev).abs() <= LAMBDA_RTOL * lambda.abs();
        if lambda > 0.0 && settled && res <= RESIDUAL_RTOL * lambda {
            return Ok(Eigenpair {
                vector: w,
                value: lambda,
                iterations: it,
                converged: true,
            });
        }
        lambda_prev = lambda;
        let mut next = update.mul_vec(&w)?;
        if norm(&next) == 0.0 {
            // Start vector landed in the null space of the update operator.
            next = (0..n)
                .map(|i| Complex64::new(if i == it % n { 1.0 } else { 0.0 }, 0.0))
                .collect();
        }
        normalize(&mut next);
        w = next;
    }
    Ok(Eigenpair {
        vector: best,
        value: best_lambda,
        iterations: MAX_ITERS,
        converged: false,
    })
}

fn normalize(w: &mut [Complex64]) {
    let n = norm(w);
    for z in w.iter_mut() {
        *z /= n;
    }
}
