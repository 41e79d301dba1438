use super::logscaled::{LogScaled, ScaledSum};
use crate::error::{Error, Result};
use crate::multiprec::{big_f64, to_logscaled};

/// Cancellation beyond which the series is summed again in extended precision.
const EXTENDED_LOSS: f64 = 1e3;

/// Terminating Gauss series `2F1(-N, b; c; z)` summed term by term (`N+1` terms).
///
/// `neg_int` must be a nonpositive integer and `c` must not be one.
pub fn gauss_2f1_terminating(neg_int: i64, b: f64, c: f64, z: f64) -> Result<LogScaled> {
    if neg_int > 0 {
        return Err(Error::Domain(format!(
            "first parameter {neg_int} is positive; series does not terminate"
        )));
    }
    if c <= 0.0 && c == c.trunc() {
        return Err(Error::Domain(format!("c = {c} is a nonpositive integer")));
    }
    let n = neg_int.unsigned_abs();
    let mut sum = ScaledSum::new();
    let mut term = LogScaled::ONE;
    sum.push(term);
    for k in 0..n {
        let kf = k as f64;
        let ratio = (kf + neg_int as f64) * (b + kf) / ((kf + 1.0) * (c + kf)) * z;
        if ratio == 0.0 {
            break;
        }
        term = term * ratio;
        sum.push(term);
    }
    let (value, bound) = sum.finish();
    let loss = if value.is_zero() { f64::INFINITY } else { (bound / value.abs()).to_f64() };
    if loss <= EXTENDED_LOSS {
        return Ok(value);
    }
    // An exact zero sum would need unbounded precision; the cap keeps the result at 2^-1000 of the terms.
    let lost_bits = if loss.is_finite() { loss.log2().ceil() as usize } else { 1000 };
    Ok(extended_sum(n, b, c, z, 96 + lost_bits.min(1000)))
}

fn extended_sum(n: u64, b: f64, c: f64, z: f64, prec: usize) -> LogScaled {
    let (b, c, z) = (big_f64(b, prec), big_f64(c, prec), big_f64(z, prec));
    let int = |k: i64| big_f64(k as f64, prec);
    let mut term = int(1);
    let mut sum = int(0);
    for k in 0..n as i64 {
        sum += &term;
        term = term * int(k - n as i64) * (&b + int(k)) * &z / (int(k + 1) * (&c + int(k)));
    }
    sum += term;
    to_logscaled(&sum)
}

/// `2F1(n+alpha+1, k+1; k+2; z)` for `0 <= k <= n+alpha-1`, `z < 1`.
///
/// Euler's transformation turns it into
/// `(1-z)^{-(n+alpha)} 2F1(k+1-n-alpha, 1; k+2; z)`, whose series is finite.
pub fn omega_2f1(n: u32, alpha: u32, k: u32, z: f64) -> Result<f64> {
    omega_2f1_scaled(n, alpha, k, z, 1.0 - z).map(LogScaled::to_f64)
}

/// As [`omega_2f1`], with `1 - z` supplied by the caller for accuracy.
pub(crate) fn omega_2f1_scaled(
    n: u32,
    alpha: u32,
    k: u32,
    z: f64,
    one_minus_z: f64,
) -> Result<LogScaled> {
    if !(z < 1.0) || !(one_minus_z > 0.0) {
        return Err(Error::Domain(format!("omega_2f1 requires z < 1, got {z}")));
    }
    if n == 0 || k + 1 > n + alpha {
        return Err(Error::Domain(format!(
            "omega_2f1 requires 0 <= k <= n+alpha-1 (n={n}, alpha={alpha}, k={k})"
        )));
    }
    let na = i64::from(n + alpha);
    let k = i64::from(k);
    let poly = gauss_2f1_terminating(k + 1 - na, 1.0, (k + 2) as f64, z)?;
    Ok(poly * LogScaled::from_f64(one_minus_z).powi(-na))
}
