//! Zeroth-order Bessel function of the first kind.

use crate::error::{Error, Result};

/// `J0(x)`.
///
/// Uses the power series for `|x| < 1` and Miller's backward recurrence
/// (normalized by `J0 + 2*sum(J_2k) = 1`) otherwise, which keeps the
/// absolute error near machine precision well past `|x| = 50`.
pub fn bessel_j0(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::NonFinite("x"));
    }
    let x = x.abs();
    if x < 1.0 {
        return Ok(series(x));
    }
    Ok(miller(x))
}

fn series(x: f64) -> f64 {
    let q = -0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..40 {
        term *= q / ((k * k) as f64);
        sum += term;
        if term.abs() < 1e-18 {
            break;
        }
    }
    sum
}

fn miller(x: f64) -> f64 {
    // Start order well above x so that J_start is negligible.
    let start = 2 * ((x as usize + 60) / 2 + 10);
    let mut j_next = 0.0_f64;
    let mut j_cur = 1e-300_f64;
    let mut even_sum = 0.0;
    let mut j0 = 0.0;
    let two_over_x = 2.0 / x;
    for n in (1..=start).rev() {
        let j_prev = (n as f64) * two_over_x * j_cur - j_next;
        j_next = j_cur;
        j_cur = j_prev;
        if j_cur.abs() > 1e250 {
            j_next *= 1e-250;
            j_cur *= 1e-250;
            even_sum *= 1e-250;
        }
        // j_cur now holds J_{n-1}
        let order = n - 1;
        if order == 0 {
            j0 = j_cur;
        } else if order % 2 == 0 {
            even_sum += j_cur;
        }
    }
    j0 / (j0 + 2.0 * even_sum)
}
