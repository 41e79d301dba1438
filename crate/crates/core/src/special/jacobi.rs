//! Jacobi polynomials `P_n^{(a,b)}`.
//!
//! Outside `(-1, 1)` the terminating hypergeometric series has terms of one
//! sign and is evaluated directly (in scaled form, since the values grow like
//! `x^n`). Inside the interval that series cancels badly, so the three-term
//! recurrence is used there instead.

use super::logscaled::{LogScaled, ScaledSum};
use super::pochhammer::pochhammer;

/// `P_n^{(a,b)}(x)` in scaled form. Requires `a, b > -1`.
pub fn jacobi_p_scaled(n: u64, a: f64, b: f64, x: f64) -> LogScaled {
    debug_assert!(a > -1.0 && b > -1.0);
    if n == 0 {
        return LogScaled::ONE;
    }
    if x >= 1.0 {
        series(n, a, b, x)
    } else if x <= -1.0 {
        let v = series(n, b, a, -x);
        if n % 2 == 1 {
            -v
        } else {
            v
        }
    } else {
        LogScaled::from_f64(recurrence(n, a, b, x))
    }
}

/// `P_n^{(a,b)}(x)`.
pub fn jacobi_p(n: u64, a: f64, b: f64, x: f64) -> f64 {
    jacobi_p_scaled(n, a, b, x).to_f64()
}

/// `d^k/dx^k P_n^{(a,b)}(x) = 2^{-k} (n+a+b+1)_k P_{n-k}^{(a+k,b+k)}(x)`.
pub fn jacobi_p_deriv(n: u64, a: f64, b: f64, k: u64, x: f64) -> f64 {
    if k > n {
        return 0.0;
    }
    let kf = k as f64;
    let scale = pochhammer(n as f64 + a + b + 1.0, k) * LogScaled::from_f64(0.5).powi(k as i64);
    (scale * jacobi_p_scaled(n - k, a + kf, b + kf, x)).to_f64()
}

// (a+1)_n/n! * sum_k (-n)_k (n+a+b+1)_k / (k! (a+1)_k) w^k,  w = (1-x)/2 <= 0
fn series(n: u64, a: f64, b: f64, x: f64) -> LogScaled {
    let nf = n as f64;
    let w = (1.0 - x) / 2.0;
    let lead = binomial_exact(n, a).unwrap_or_else(|| pochhammer(a + 1.0, n) / super::logscaled::factorial(n));
    if w == 0.0 {
        return lead;
    }
    let mut sum = ScaledSum::new();
    let mut term = LogScaled::ONE;
    sum.push(term);
    for k in 0..n {
        let kf = k as f64;
        let ratio = (kf - nf) * (nf + a + b + 1.0 + kf) / ((kf + 1.0) * (a + 1.0 + kf)) * w;
        term = term * ratio;
        sum.push(term);
    }
    lead * sum.sum()
}

// C(n+a, n) in integers for integer a >= 0, when it fits.
fn binomial_exact(n: u64, a: f64) -> Option<LogScaled> {
    if a < 0.0 || a != a.trunc() || a > 1e6 {
        return None;
    }
    let a = a as u128;
    let mut r: u128 = 1;
    for j in 1..=u128::from(n) {
        r = r.checked_mul(a + j)? / j;
    }
    Some(LogScaled::from_f64(r as f64))
}

pub(crate) fn recurrence(n: u64, a: f64, b: f64, x: f64) -> f64 {
    let mut p0 = 1.0;
    if n == 0 {
        return p0;
    }
    let mut p1 = (a + 1.0) + (a + b + 2.0) * (x - 1.0) / 2.0;
    for k in 1..n {
        let k = k as f64;
        let s = 2.0 * k + a + b;
        let c0 = 2.0 * (k + 1.0) * (k + a + b + 1.0) * s;
        let c1 = (s + 1.0) * ((s + 2.0) * s * x + a * a - b * b);
        let c2 = 2.0 * (k + a) * (k + b) * (s + 2.0);
        let p2 = (c1 * p1 - c2 * p0) / c0;
        p0 = p1;
        p1 = p2;
    }
    p1
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_examples() {
        assert_eq!(jacobi_p(0, 0.0, 3.0, 0.7), 1.0);
        assert!((jacobi_p(4, 2.0, 1.0, 1.0) - 15.0).abs() < 1e-13);
        assert_eq!(jacobi_p_deriv(2, 0.3, 0.1, 3, 0.2), 0.0);
        assert!((jacobi_p_deriv(1, 0.0, 0.0, 1, 0.4) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn legendre_closed_forms() {
        let x: f64 = 0.3;
        assert!((jacobi_p(2, 0.0, 0.0, x) - (3.0 * x * x - 1.0) / 2.0).abs() < 1e-15);
        let x: f64 = 3.0;
        assert!((jacobi_p(3, 0.0, 0.0, x) - (5.0 * x.powi(3) - 3.0 * x) / 2.0).abs() < 1e-12);
        let x: f64 = -2.5;
        assert!((jacobi_p(3, 0.0, 0.0, x) - (5.0 * x.powi(3) - 3.0 * x) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn series_and_recurrence_agree_outside_interval() {
        for n in 0..25 {
            for &x in &[1.0, 1.3, 3.0, 17.0, -1.7] {
                let s = jacobi_p(n, 2.0, 5.0, x);
                let r = recurrence(n, 2.0, 5.0, x);
                assert!((s - r).abs() <= 1e-12 * r.abs().max(1.0), "n={n} x={x} {s} {r}");
            }
        }
    }

    #[test]
    fn huge_arguments_stay_finite_in_scaled_form() {
        let v = jacobi_p_scaled(300, 10.0, 40.0, 1e6);
        assert_eq!(v.sign(), 1);
        assert!(v.ln_abs() > 3000.0);
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let (n, a, b, x, h) = (5, 1.0, 2.0, 0.3, 1e-5);
        let d2 = jacobi_p_deriv(n, a, b, 2, x);
        let fd = (jacobi_p(n, a, b, x + h) - 2.0 * jacobi_p(n, a, b, x) + jacobi_p(n, a, b, x - h)) / (h * h);
        assert!((d2 - fd).abs() <= 1e-4 * d2.abs());
    }
}
