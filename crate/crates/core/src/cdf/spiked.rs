//! Leading-eigenvalue c.d.f. under the spiked alternative (`eta > 0`).
//!
//! Two algebraically equivalent routes are implemented. The direct route
//! combines the `Omega` and `Phi` determinant terms; those cancel roughly
//! like `(c_eta y)^{-(m-1)}`, so a running error bound is kept. When that
//! bound reports more than three digits lost and `c_eta y` is moderate, the
//! regularized route is used: the negative powers of `c_eta` are cancelled
//! analytically and each first-column entry becomes an integral of a Jacobi
//! polynomial against a power series, which reduces to a series of positive
//! closed-form moments.

use super::{check_x, Probability, SpikedFConfig, YPoint};
use crate::error::{Error, Result};
use super::psi_block::first_column_cofactors;
use crate::special::hypergeometric::omega_2f1_scaled;
use crate::special::{factorial, jacobi_p_scaled, pochhammer, LogScaled, ScaledSum};

/// Loss factor above which the regularized route is preferred.
const PREFER_REGULARIZED_LOSS: f64 = 1e3;
/// Loss factor beyond which a result is refused (twelve decimal digits).
const MAX_LOSS: f64 = 1e12;
/// Cofactor accuracy accepted from double-precision elimination on the first attempt.
const FAST_COFACTOR_ERROR: f64 = 1e-6;
/// If cancellation times cofactor error exceeds this, cofactors are recomputed in extended precision.
const TARGET_REL_ERROR: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvaluationRoute {
    /// `x = 0` or `x = inf`.
    Boundary,
    Direct,
    Regularized,
}

/// Breakdown of one spiked c.d.f. evaluation.
#[derive(Debug, Clone)]
pub struct SpikedCdfTerms {
    /// Contribution of the `Omega` determinant (direct route), normalization included.
    pub first: LogScaled,
    /// Contribution of the `Phi` determinant (direct route), normalization included.
    pub second: LogScaled,
    /// Value returned.
    pub value: f64,
    /// Estimated decimal digits lost on the route taken.
    pub lost_digits: f64,
    /// Estimated decimal digits lost on the direct route.
    pub direct_lost_digits: f64,
    /// Order of the determinants formed (always `alpha + 1`).
    pub determinant_order: usize,
    pub route: EvaluationRoute,
}

fn require_spiked(cfg: &SpikedFConfig) -> Result<()> {
    if !(cfg.eta() > 0.0) {
        return Err(Error::InvalidConfig(
            "eta = 0 has no spike; use the null c.d.f. instead".into(),
        ));
    }
    Ok(())
}

// Polynomials of negative degree are identically zero.
pub(crate) fn psi_raw(i: u32, j: u32, y: f64, cfg: &SpikedFConfig) -> LogScaled {
    let (m, n, beta) = (cfg.m(), cfg.n(), cfg.beta());
    if n + i < j {
        return LogScaled::ZERO;
    }
    let a = f64::from(j - 2);
    pochhammer(f64::from(m + i - 1), u64::from(j - 2))
        * jacobi_p_scaled(u64::from(n + i - j), a, f64::from(beta) + a, 2.0 / y - 1.0)
}

/// `Psi_{i,j}(y) = (m+i-1)_{j-2} P_{n+i-j}^{(j-2, m-n+j-2)}(2/y - 1)`.
pub fn psi_entry(i: u32, j: u32, y: f64, cfg: &SpikedFConfig) -> Result<LogScaled> {
    let top = cfg.alpha() + 1;
    if !(1..=top).contains(&i) || !(2..=top).contains(&j) {
        return Err(Error::Domain(format!("psi index ({i}, {j}) outside 1..={top} x 2..={top}")));
    }
    if j > cfg.n() + i {
        return Err(Error::Domain(format!("psi degree n+i-j is negative for (i, j) = ({i}, {j})")));
    }
    if !(y > 0.0 && y <= 1.0) {
        return Err(Error::Domain(format!("psi requires y in (0, 1], got {y}")));
    }
    Ok(psi_raw(i, j, y, cfg))
}

fn phi_raw(i: u32, cy: f64, cfg: &SpikedFConfig) -> LogScaled {
    let (m, n, a) = (u64::from(cfg.m()), u64::from(cfg.n()), u64::from(cfg.alpha()));
    let i = u64::from(i);
    let inv_cy = LogScaled::from_f64(cy).recip();
    let mut sum = ScaledSum::new();
    for k in 0..(m - n) {
        let t = factorial(m + a - k - 1) * factorial(n + k + i - 2)
            / (factorial(k) * factorial(m + i - k - 2))
            * inv_cy.powi(k as i64);
        sum.push(t);
    }
    sum.sum()
}

/// `Phi_i(y) = sum_{k<m-n} (m+alpha-k-1)!(n+k+i-2)! / (k!(m+i-k-2)! (c_eta y)^k)`.
pub fn phi_entry(i: u32, y: f64, cfg: &SpikedFConfig) -> Result<LogScaled> {
    require_spiked(cfg)?;
    if !(1..=cfg.alpha() + 1).contains(&i) {
        return Err(Error::Domain(format!("phi index {i} outside 1..={}", cfg.alpha() + 1)));
    }
    if !(y > 0.0 && y <= 1.0) {
        return Err(Error::Domain(format!("phi requires y in (0, 1], got {y}")));
    }
    Ok(phi_raw(i, cfg.c_eta() * y, cfg))
}

// Returns (Omega_i, sum of |terms|).
fn omega_raw(i: u32, pt: YPoint, cfg: &SpikedFConfig) -> Result<(LogScaled, LogScaled)> {
    let (m, n, a) = (cfg.m(), cfg.n(), cfg.alpha());
    let omc = pt.one_minus_cy(cfg.eta());
    let cy = cfg.c_eta() * pt.y;
    let z = -cy / omc;
    let one_minus_z = 1.0 / omc;
    let (mu, nu, iu) = (u64::from(m), u64::from(n), u64::from(i));
    let mut sum = ScaledSum::new();
    for k in 0..=(n + i - 2) {
        let ku = u64::from(k);
        let coef = factorial(mu + iu + ku - 2) / (factorial(nu + iu - 2 - ku) * factorial(ku) * factorial(ku + 1));
        let f = omega_2f1_scaled(n, a, k, z, one_minus_z)?;
        let t = coef * f;
        sum.push(if k % 2 == 1 { -t } else { t });
    }
    let lead = factorial(nu + iu - 2) / factorial(mu + iu - 2);
    let (s, abs) = sum.finish();
    Ok((lead * s, lead * abs))
}

/// `Omega_i(y)`: the alternating sum of terminating `2F1` values.
pub fn omega_entry(i: u32, y: f64, cfg: &SpikedFConfig) -> Result<f64> {
    require_spiked(cfg)?;
    if !(1..=cfg.alpha() + 1).contains(&i) {
        return Err(Error::Domain(format!("omega index {i} outside 1..={}", cfg.alpha() + 1)));
    }
    if !(0.0..1.0).contains(&y) {
        return Err(Error::Domain(format!("omega requires y in [0, 1), got {y}")));
    }
    Ok(omega_raw(i, YPoint::from_y(y), cfg)?.0.to_f64())
}

/// `(1/(n-1)!) prod_{j=1}^{alpha} (m+n+j-2)!/(m+n+2j-2)!`.
pub(crate) fn spiked_constant(cfg: &SpikedFConfig) -> LogScaled {
    let (m, n) = (u64::from(cfg.m()), u64::from(cfg.n()));
    let mut k = factorial(n - 1).recip();
    for j in 1..=u64::from(cfg.alpha()) {
        k = k * factorial(m + n + j - 2) / factorial(m + n + 2 * j - 2);
    }
    k
}

fn loss_of(value: LogScaled, bound: LogScaled) -> f64 {
    if bound.is_zero() {
        return 1.0;
    }
    if value.is_zero() {
        return f64::INFINITY;
    }
    (bound / value.abs()).to_f64().max(1.0)
}

struct Direct {
    first: LogScaled,
    second: LogScaled,
    total: LogScaled,
    loss: f64,
}

/// Direct-route first-column entries: `(A Omega_r, |A| sum |Omega_r terms|, B (-1)^(r-1) Phi_r)`.
fn direct_column(pt: YPoint, cfg: &SpikedFConfig) -> Result<Vec<(LogScaled, LogScaled, LogScaled)>> {
    let (m, n, a) = (i64::from(cfg.m()), i64::from(cfg.n()), i64::from(cfg.alpha()));
    let y = LogScaled::from_f64(pt.y);
    let c = LogScaled::from_f64(cfg.c_eta());
    let omc = LogScaled::from_f64(pt.one_minus_cy(cfg.eta()));
    let pre = spiked_constant(cfg) * LogScaled::from_f64(1.0 + cfg.eta()).powi(-n);
    let pa = pre * factorial((n + a) as u64) * y.powi(n * (a + m) - m + 1) * c.powi(-(m - 1)) * omc.powi(-(n + a + 1));
    let pb_mag = pre * c.powi(-n) * y.powi(n * (m + a - 1));
    let pb = if n % 2 == 1 { -pb_mag } else { pb_mag };
    let cy = cfg.c_eta() * pt.y;
    (0..=cfg.alpha())
        .map(|r| {
            let (om, om_abs) = omega_raw(r + 1, pt, cfg)?;
            let ph = pb * phi_raw(r + 1, cy, cfg);
            Ok((pa * om, (pa * om_abs).abs(), if r % 2 == 1 { -ph } else { ph }))
        })
        .collect()
}

fn direct(column: &[(LogScaled, LogScaled, LogScaled)], cof: &[LogScaled]) -> Direct {
    let mut first = ScaledSum::new();
    let mut second = ScaledSum::new();
    let mut all = ScaledSum::new();
    let mut bound = ScaledSum::new();
    for (&(om, om_abs, ph), &cf) in column.iter().zip(cof) {
        let t1 = om * cf;
        let t2 = ph * cf;
        first.push(t1);
        second.push(t2);
        all.push(t1);
        all.push(t2);
        bound.push((om_abs * cf).abs());
        bound.push(t2.abs());
    }
    let total = all.sum();
    let loss = loss_of(total, bound.sum());
    Direct { first: first.sum(), second: second.sum(), total, loss }
}

// Cap on series terms per row of the regularized route.
const MAX_SERIES_TERMS: usize = 4_000_000;

fn regularized_feasible(cy: f64, cfg: &SpikedFConfig) -> bool {
    let len = f64::from(cfg.n() + cfg.alpha() + cfg.m()) / (1.0 - cy);
    len < MAX_SERIES_TERMS as f64 / 4.0
}

// I_i = int_0^1 s^{m-1} P_N^{(0,beta)}(2s-1) sum_q (A)_q/(m)_q (cy s)^q ds with N = n+i-2.
// Moments below degree N vanish, and for k >= N
//   int_0^1 s^{beta+k} P_N^{(0,beta)}(2s-1) ds = k!/(k-N)! (beta+k)!/(N+beta+k+1)!,
// so every surviving term is positive.
fn moment_series(i: u32, cy: f64, cfg: &SpikedFConfig) -> Option<LogScaled> {
    let (m, n, beta) = (u64::from(cfg.m()), u64::from(cfg.n()), u64::from(cfg.beta()));
    let big_a = m + n + u64::from(cfg.alpha());
    let q0 = u64::from(i) - 1;
    let nn = n + q0 - 1;
    let term = pochhammer(big_a as f64, q0) / pochhammer(m as f64, q0)
        * LogScaled::from_f64(cy).powi(q0 as i64)
        * factorial(nn)
        * factorial(beta + nn)
        / factorial(2 * nn + beta + 1);
    // Terms relative to the first one, rescaled by 2^-960 whenever the sum nears overflow.
    let (mut t, mut sum, mut scale) = (1.0f64, 1.0f64, 0i64);
    let mut k = nn as f64;
    let (nf, bf) = (nn as f64, beta as f64);
    let (af, mf) = (big_a as f64, m as f64);
    for q in q0..q0 + MAX_SERIES_TERMS as u64 {
        let qf = q as f64;
        let ratio = (af + qf) * cy * (k + 1.0) * (bf + k + 1.0) / ((mf + qf) * (k + 1.0 - nf) * (nf + bf + k + 2.0));
        t *= ratio;
        sum += t;
        k += 1.0;
        if sum > 1e280 {
            t *= 2f64.powi(-960);
            sum *= 2f64.powi(-960);
            scale += 960;
        }
        if ratio < 1.0 && t * ratio / (1.0 - ratio) <= 1e-17 * sum {
            return Some((term * sum).mul_pow2(scale));
        }
    }
    None
}

/// Prefactor and first-column entries of the regularized route.
fn regularized_column(pt: YPoint, cfg: &SpikedFConfig) -> Option<(LogScaled, Vec<LogScaled>)> {
    let (m, n, a) = (cfg.m(), cfg.n(), cfg.alpha());
    let cy = cfg.c_eta() * pt.y;
    if !regularized_feasible(cy, cfg) {
        return None;
    }
    let pre = spiked_constant(cfg)
        * LogScaled::from_f64(1.0 + cfg.eta()).powi(-i64::from(n))
        * factorial(u64::from(n + a))
        * LogScaled::from_f64(pt.y).powi(i64::from(n) * i64::from(a + m))
        * pochhammer(f64::from(n + a + 1), u64::from(m - 1))
        / factorial(u64::from(m - 1));
    let column = (1..=a + 1).map(|i| moment_series(i, cy, cfg)).collect::<Option<Vec<_>>>()?;
    Some((pre, column))
}

fn regularized(pre: LogScaled, column: &[LogScaled], cof: &[LogScaled]) -> (LogScaled, f64) {
    let all: ScaledSum = column.iter().zip(cof).map(|(&v, &cf)| v * cf).collect();
    let (total, bound) = all.finish();
    (pre * total, loss_of(total, bound))
}

// Entries of both routes do not depend on the cofactors, so they are kept
// while the cofactors are refined.
struct Evaluator<'a> {
    pt: YPoint,
    cfg: &'a SpikedFConfig,
    direct: Vec<(LogScaled, LogScaled, LogScaled)>,
    regularized: Option<Option<(LogScaled, Vec<LogScaled>)>>,
}

impl Evaluator<'_> {
    fn evaluate(&mut self, cof: &[LogScaled]) -> SpikedCdfTerms {
        let d = direct(&self.direct, cof);
        let direct_digits = d.loss.log10();
        let mut out = SpikedCdfTerms {
            first: d.first,
            second: d.second,
            value: d.total.to_f64(),
            lost_digits: direct_digits,
            direct_lost_digits: direct_digits,
            determinant_order: cof.len(),
            route: EvaluationRoute::Direct,
        };
        if d.loss > PREFER_REGULARIZED_LOSS {
            let (pt, cfg) = (self.pt, self.cfg);
            if let Some((pre, column)) = self.regularized.get_or_insert_with(|| regularized_column(pt, cfg)) {
                let (v, loss) = regularized(*pre, column, cof);
                if loss < d.loss {
                    out.value = v.to_f64();
                    out.lost_digits = loss.log10();
                    out.route = EvaluationRoute::Regularized;
                }
            }
        }
        out
    }
}

/// Full evaluation record for `F(x)` under the spiked alternative.
pub fn cdf_max_spiked_terms(x: f64, cfg: &SpikedFConfig) -> Result<SpikedCdfTerms> {
    require_spiked(cfg)?;
    check_x(x)?;
    let order = (cfg.alpha() + 1) as usize;
    if x == 0.0 || x.is_infinite() {
        return Ok(SpikedCdfTerms {
            first: LogScaled::ZERO,
            second: LogScaled::ZERO,
            value: if x == 0.0 { 0.0 } else { 1.0 },
            lost_digits: 0.0,
            direct_lost_digits: 0.0,
            determinant_order: order,
            route: EvaluationRoute::Boundary,
        });
    }
    let pt = YPoint::from_x(x);
    let cof = first_column_cofactors(pt.y, cfg, FAST_COFACTOR_ERROR)?;
    let mut ev = Evaluator { pt, cfg, direct: direct_column(pt, cfg)?, regularized: None };
    let mut out = ev.evaluate(&cof.values);
    if 10f64.powf(out.lost_digits) * cof.rel_err > TARGET_REL_ERROR {
        out = ev.evaluate(&first_column_cofactors(pt.y, cfg, 0.0)?.values);
    }
    if !(out.lost_digits <= MAX_LOSS.log10()) {
        return Err(Error::NumericalInstability {
            x,
            detail: format!(
                "about {:.1} decimal digits lost to cancellation (m={}, n={}, p={}, eta={})",
                out.lost_digits,
                cfg.m(),
                cfg.n(),
                cfg.p(),
                cfg.eta()
            ),
        });
    }
    Ok(out)
}

/// `Pr(lambda_max <= x)` for `eta > 0`.
pub fn cdf_max_spiked(x: f64, cfg: &SpikedFConfig) -> Result<Probability> {
    let t = cdf_max_spiked_terms(x, cfg)?;
    Probability::from_cdf(t.value, x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn psi_examples() {
        let cfg = SpikedFConfig::new(4, 2, 5, 1.0).unwrap();
        assert!((psi_entry(1, 2, 1.0, &cfg).unwrap().to_f64() - 1.0).abs() < 1e-15);
        let cfg = SpikedFConfig::new(3, 1, 4, 1.0).unwrap();
        // P_1^{(0,2)}(3) = (a+1) + (a+b+2)(x-1)/2 = 1 + 4 = 5
        assert!((psi_entry(2, 2, 0.5, &cfg).unwrap().to_f64() - 5.0).abs() < 1e-14);
        let cfg = SpikedFConfig::new(5, 1, 8, 1.0).unwrap();
        assert!(psi_entry(1, 3, 0.5, &cfg).is_err());
        assert!(psi_entry(0, 2, 0.5, &cfg).is_err());
    }

    #[test]
    fn phi_single_term() {
        // m - n = 1: (m+alpha-1)!(n+i-2)!/(m+i-2)!
        let cfg = SpikedFConfig::new(4, 3, 6, 2.0).unwrap();
        let want = 5.0 * 4.0 * 3.0 * 2.0 * 2.0 / 6.0; // 5! * 2! / 3!  for i = 1
        assert!((phi_entry(1, 0.3, &cfg).unwrap().to_f64() - want).abs() < 1e-12);
        assert!(phi_entry(1, 0.3, &cfg.with_eta(0.0).unwrap()).is_err());
    }

    #[test]
    fn omega_at_zero_is_rational() {
        // y = 0: Omega_1 = (n-1)!/(m-1)! sum_k (-1)^k (m+k-1)!/((n-1-k)! k! (k+1)!)
        let cfg = SpikedFConfig::new(5, 3, 5, 1.0).unwrap();
        let f = |k: u64| factorial(k).to_f64();
        let mut s = 0.0;
        for k in 0..3u64 {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            s += sign * f(4 + k) / (f(2 - k) * f(k) * f(k + 1));
        }
        let want = f(2) / f(4) * s;
        assert!((omega_entry(1, 0.0, &cfg).unwrap() - want).abs() < 1e-13 * want.abs());
        assert!(omega_entry(1, 1.0, &cfg).is_err());
    }

    #[test]
    fn boundaries_and_limits() {
        let cfg = SpikedFConfig::new(6, 3, 8, 2.0).unwrap();
        assert_eq!(cdf_max_spiked(0.0, &cfg).unwrap().value(), 0.0);
        assert!((cdf_max_spiked(1e6, &cfg).unwrap().value() - 1.0).abs() < 1e-6);
        assert!(cdf_max_spiked(1.0, &cfg.with_eta(0.0).unwrap()).is_err());
        assert!(cdf_max_spiked(-1.0, &cfg).is_err());
    }

    #[test]
    fn determinant_order_is_alpha_plus_one() {
        for &(m, n, p) in &[(4u32, 2u32, 4u32), (4, 2, 9), (40, 2, 43), (200, 150, 203)] {
            let cfg = SpikedFConfig::new(m, n, p, 3.0).unwrap();
            let t = cdf_max_spiked_terms(2.0, &cfg).unwrap();
            assert_eq!(t.determinant_order, (p - m + 1) as usize);
        }
    }
}
