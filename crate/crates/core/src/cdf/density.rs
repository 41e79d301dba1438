use super::{SpikedFConfig, YPoint};
use crate::error::{Error, Result};
use crate::special::{factorial, pochhammer, LogScaled, ScaledSum};

/// Minimum spacing of the transformed eigenvalues `x = lambda/(1+lambda)`.
const MIN_GAP: f64 = 1e-8;

fn validate(lambdas: &[f64], cfg: &SpikedFConfig) -> Result<Vec<YPoint>> {
    if lambdas.len() != cfg.n() as usize {
        return Err(Error::Domain(format!("expected {} eigenvalues, got {}", cfg.n(), lambdas.len())));
    }
    let pts: Vec<YPoint> = lambdas.iter().map(|&l| YPoint::from_x(l)).collect();
    for (k, &l) in lambdas.iter().enumerate() {
        if !(l > 0.0) || !l.is_finite() {
            return Err(Error::Domain(format!("eigenvalues must be positive and finite, got {l}")));
        }
        if k > 0 && !(pts[k].y - pts[k - 1].y >= MIN_GAP) {
            return Err(Error::Domain(format!(
                "eigenvalues must be strictly ascending with spacing >= {MIN_GAP} on the x/(1+x) scale"
            )));
        }
    }
    Ok(pts)
}

// Gamma(m)/Gamma(n+p) prod_j (n+p-j)!/(p-j)! / prod_j (n-j)!(m-j)!
fn k2(cfg: &SpikedFConfig) -> LogScaled {
    let (m, n, p) = (u64::from(cfg.m()), u64::from(cfg.n()), u64::from(cfg.p()));
    let mut k = factorial(m - 1) / factorial(n + p - 1);
    for j in 1..=m {
        k = k * factorial(n + p - j) / factorial(p - j);
    }
    for j in 1..=n {
        k = k / (factorial(n - j) * factorial(m - j));
    }
    k
}

// prod lambda^{m-n} (1+lambda)^{-(p+n)} * Vandermonde^2
fn common_factor(lambdas: &[f64], cfg: &SpikedFConfig) -> LogScaled {
    let beta = i64::from(cfg.beta());
    let pn = i64::from(cfg.p() + cfg.n());
    let mut v = LogScaled::ONE;
    for (k, &l) in lambdas.iter().enumerate() {
        v = v * LogScaled::from_f64(l).powi(beta) * LogScaled::from_f64(1.0 + l).powi(-pn);
        for &lj in &lambdas[k + 1..] {
            let d = LogScaled::from_f64(lj - l);
            v = v * d * d;
        }
    }
    v
}

/// Joint density of the ordered nonzero eigenvalues when `eta > 0`.
pub fn joint_density_spiked(lambdas: &[f64], cfg: &SpikedFConfig) -> Result<f64> {
    if !(cfg.eta() > 0.0) {
        return Err(Error::InvalidConfig("eta = 0: use joint_density_null".into()));
    }
    let pts = validate(lambdas, cfg)?;
    let g = if cfg.c_eta() * pts.last().map_or(0.0, |p| p.y) <= 0.9 {
        g_series(&pts, cfg)?
    } else {
        g_direct(&pts, cfg)
    };
    let v = k2(cfg) * LogScaled::from_f64(1.0 + cfg.eta()).powi(-i64::from(cfg.n())) * common_factor(lambdas, cfg) * g;
    Ok(v.to_f64().max(0.0))
}

/// Joint density of the ordered nonzero eigenvalues when `eta = 0`.
pub fn joint_density_null(lambdas: &[f64], cfg: &SpikedFConfig) -> Result<f64> {
    validate(lambdas, cfg)?;
    let (m, n, p) = (u64::from(cfg.m()), u64::from(cfg.n()), u64::from(cfg.p()));
    let k3 = k2(cfg) * factorial(n + p - 1) / factorial(m - 1);
    Ok((k3 * common_factor(lambdas, cfg)).to_f64())
}

// g as a sum of divided differences, straight from its definition.
fn g_direct(pts: &[YPoint], cfg: &SpikedFConfig) -> LogScaled {
    let (m, n, p, a) = (cfg.m(), cfg.n(), cfg.p(), cfg.alpha());
    let c = LogScaled::from_f64(cfg.c_eta());
    let mut total = ScaledSum::new();
    for (k, pk) in pts.iter().enumerate() {
        let xk = LogScaled::from_f64(pk.y);
        let mut br = ScaledSum::new();
        br.push(
            factorial(u64::from(n + a))
                / (c.powi(i64::from(m - 1))
                    * xk.powi(i64::from(m - n))
                    * LogScaled::from_f64(pk.one_minus_cy(cfg.eta())).powi(i64::from(n + a + 1))),
        );
        for j in 0..(m - n) {
            let t = factorial(u64::from(p - j - 1))
                / (factorial(u64::from(m - n - j - 1)) * c.powi(i64::from(n + j)) * xk.powi(i64::from(j + 1)));
            br.push(-t);
        }
        let mut den = LogScaled::ONE;
        for (l, pl) in pts.iter().enumerate() {
            if l != k {
                den = den * (pk.y - pl.y);
            }
        }
        total.push(br.sum() / den);
    }
    total.sum()
}

// g = Gamma(n+alpha+1) sum_q (n+alpha+1)_{q+m-1}/(q+m-1)! c^q h_q(x), with h_q the
// complete homogeneous symmetric polynomials; every term is positive.
fn g_series(pts: &[YPoint], cfg: &SpikedFConfig) -> Result<LogScaled> {
    let (m, n, a) = (cfg.m(), cfg.n(), cfg.alpha());
    let c = cfg.c_eta();
    let big = f64::from(n + a + m);
    let mf = f64::from(m);
    let xs: Vec<f64> = pts.iter().map(|p| p.y).collect();
    let nv = xs.len();
    let mut h = vec![1.0; nv]; // h_q over the first k+1 variables, current q
    let mut coef = 1.0; // (n+a+m)_q/(m)_q c^q
    let mut sum = 0.0;
    for q in 0..1_000_000u32 {
        if q > 0 {
            let qf = f64::from(q - 1);
            coef *= (big + qf) / (mf + qf) * c;
            let mut prev = 0.0;
            for k in 0..nv {
                h[k] = prev + xs[k] * h[k];
                prev = h[k];
            }
        }
        let term = coef * h[nv - 1];
        sum += term;
        if !sum.is_finite() {
            return Err(Error::NumericalInstability { x: xs[nv - 1], detail: "density series overflow".into() });
        }
        let ratio = (big + f64::from(q)) / (mf + f64::from(q)) * c * xs[nv - 1];
        if q as usize > nv && ratio < 1.0 && term <= 1e-18 * sum {
            let lead = factorial(u64::from(n + a)) * pochhammer(f64::from(n + a + 1), u64::from(m - 1))
                / factorial(u64::from(m - 1));
            return Ok(lead * sum);
        }
    }
    Err(Error::NoConvergence { what: "density series", iterations: 1_000_000 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn series_matches_direct_formula() {
        let cfg = SpikedFConfig::new(6, 3, 8, 2.0).unwrap();
        let pts: Vec<YPoint> = [0.3, 0.9, 2.5].iter().map(|&l| YPoint::from_x(l)).collect();
        let a = g_series(&pts, &cfg).unwrap().to_f64();
        let b = g_direct(&pts, &cfg).to_f64();
        assert!((a - b).abs() < 1e-9 * a.abs(), "{a} {b}");
    }

    #[test]
    fn rejects_bad_inputs() {
        let cfg = SpikedFConfig::new(4, 2, 5, 2.0).unwrap();
        assert!(joint_density_spiked(&[1.0, 0.5], &cfg).is_err());
        assert!(joint_density_spiked(&[1.0, 1.0], &cfg).is_err());
        assert!(joint_density_spiked(&[1.0], &cfg).is_err());
        assert!(joint_density_spiked(&[0.5, 1.0], &cfg.with_eta(0.0).unwrap()).is_err());
        assert!(joint_density_spiked(&[0.5, 1.0], &cfg).unwrap() > 0.0);
    }

    #[test]
    fn null_is_the_small_eta_limit() {
        let cfg = SpikedFConfig::new(4, 2, 5, 1e-8).unwrap();
        let l = [0.4, 1.7];
        let a = joint_density_spiked(&l, &cfg).unwrap();
        let b = joint_density_null(&l, &cfg).unwrap();
        assert!((a - b).abs() <= 1e-4 * b, "{a} {b}");
    }
}
