use super::psi_block::null_determinant;
use super::{check_x, Probability, SpikedFConfig, YPoint};
use crate::error::Result;
use crate::special::{factorial, LogScaled};

/// `Pr(lambda_max <= x)` with no spike; the `eta` field of `cfg` is ignored.
///
/// `prod_{k=1}^{alpha} (m+n+k-1)!/(m+n+2k-2)! * y^{n(m+alpha)} * det[Psi_{i+1,j+1}(y)]`
/// with `y = x/(1+x)`; at `alpha = 0` this is `y^{mn}`.
pub fn cdf_max_null(x: f64, cfg: &SpikedFConfig) -> Result<Probability> {
    check_x(x)?;
    if x == 0.0 {
        return Probability::new(0.0);
    }
    if x.is_infinite() {
        return Probability::new(1.0);
    }
    let pt = YPoint::from_x(x);
    let (m, n, a) = (u64::from(cfg.m()), u64::from(cfg.n()), cfg.alpha());
    let mut c = LogScaled::ONE;
    for k in 1..=u64::from(a) {
        c = c * factorial(m + n + k - 1) / factorial(m + n + 2 * k - 2);
    }
    let det = null_determinant(pt.y, cfg)?;
    let v = c * LogScaled::from_f64(pt.y).powi((n * (m + u64::from(a))) as i64) * det;
    Probability::from_cdf(v.to_f64(), x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_zero_is_power() {
        let cfg = SpikedFConfig::new(3, 2, 3, 0.0).unwrap();
        assert_eq!(cdf_max_null(1.0, &cfg).unwrap().value(), 0.015625);
        assert_eq!(cdf_max_null(0.0, &cfg).unwrap().value(), 0.0);
    }

    #[test]
    fn single_sample_is_beta() {
        // n = 1: y ~ Beta(m, p - m + 1), so F = I_y(m, alpha+1)
        let cfg = SpikedFConfig::new(3, 1, 5, 0.0).unwrap();
        let x: f64 = 0.7;
        let y = x / (1.0 + x);
        // I_y(3, 3) = sum_{j=3}^{5} C(5,j) y^j (1-y)^{5-j}
        let want = 10.0 * y.powi(3) * (1.0 - y).powi(2) + 5.0 * y.powi(4) * (1.0 - y) + y.powi(5);
        assert!((cdf_max_null(x, &cfg).unwrap().value() - want).abs() < 1e-14);
    }

    #[test]
    fn large_x_limit() {
        for &(m, n, p) in &[(4u32, 2u32, 5u32), (10, 7, 15), (30, 12, 50)] {
            let cfg = SpikedFConfig::new(m, n, p, 0.0).unwrap();
            assert!((cdf_max_null(1e8, &cfg).unwrap().value() - 1.0).abs() < 1e-6);
        }
    }
}
