use super::logscaled::{factorial, LogScaled};

/// Rising factorial `(a)_k = a (a+1) ... (a+k-1)`.
///
/// For a nonpositive integer `a = -n` the product truncates: it is
/// `(-1)^k n!/(n-k)!` for `k <= n` and exactly zero beyond.
pub fn pochhammer(a: f64, k: u64) -> LogScaled {
    if k == 0 {
        return LogScaled::ONE;
    }
    if a == a.trunc() && a.abs() < 1e15 {
        let ai = a as i64;
        if ai <= 0 {
            let n = ai.unsigned_abs();
            if k > n {
                return LogScaled::ZERO;
            }
            let v = factorial(n) / factorial(n - k);
            return if k % 2 == 1 { -v } else { v };
        }
        return factorial(ai as u64 + k - 1) / factorial(ai as u64 - 1);
    }
    let mut acc = LogScaled::ONE;
    for j in 0..k {
        acc = acc * (a + j as f64);
    }
    acc
}

/// `(a)_k` as a plain float; overflows to infinity for large results.
pub fn pochhammer_f64(a: f64, k: u64) -> f64 {
    pochhammer(a, k).to_f64()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert_eq!(pochhammer(5.0, 0).to_f64(), 1.0);
        assert_eq!(pochhammer(-3.0, 2).to_f64(), 6.0);
        assert!(pochhammer(-3.0, 4).is_zero());
        assert_eq!(pochhammer(-3.0, 3).to_f64(), -6.0);
        assert_eq!(pochhammer(3.0, 4).to_f64(), 360.0);
        assert!((pochhammer(0.5, 3).to_f64() - 0.5 * 1.5 * 2.5).abs() < 1e-15);
    }

    #[test]
    fn zero_rule_is_exact() {
        for n in 0..40u64 {
            for k in n + 1..n + 10 {
                assert_eq!(pochhammer(-(n as f64), k).sign(), 0);
            }
        }
    }
}
