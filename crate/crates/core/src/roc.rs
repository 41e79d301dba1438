//! False-alarm and detection probabilities of the largest-eigenvalue test,
//! threshold inversion and ROC curves.
//!
//! Thresholds live on the scale of the normalized statistic
//! `lambda_hat = (p/n) lambda`, so every c.d.f. call is made at `kappa * lambda_th`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cdf::{cdf_alpha0_spiked, check_alpha0_dims, cdf_max_null, cdf_max_spiked, Probability, SpikedFConfig};
use crate::error::{Error, Result};

const MAX_BISECTIONS: usize = 200;
const MAX_BRACKET_DOUBLINGS: usize = 2000;
/// Target accuracy of `threshold_for_pfa` on the false-alarm scale.
pub const PFA_TOLERANCE: f64 = 1e-10;

/// Dimensions plus SNR `gamma`, stored in the `eta` slot of `base`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorConfig {
    base: SpikedFConfig,
    kappa: f64,
}

impl DetectorConfig {
    pub fn new(base: SpikedFConfig) -> Self {
        DetectorConfig { base, kappa: f64::from(base.n()) / f64::from(base.p()) }
    }

    pub fn from_dims(m: u32, n: u32, p: u32, gamma: f64) -> Result<Self> {
        Ok(Self::new(SpikedFConfig::new(m, n, p, gamma)?))
    }

    pub fn base(&self) -> &SpikedFConfig {
        &self.base
    }

    /// `n / p`.
    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn gamma(&self) -> f64 {
        self.base.eta()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Exact,
    ClosedFormAlpha0,
    ClosedFormN1,
    Asymptotic,
    UpperBound,
    Empirical,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub pf: Probability,
    pub pd: Probability,
    pub provenance: Provenance,
}

/// Limit `gamma/m -> c` with `n` fixed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticRegime {
    c: f64,
    n: u32,
}

impl AsymptoticRegime {
    pub fn new(c: f64, n: u32) -> Result<Self> {
        if !(c >= 0.0) || !c.is_finite() {
            return Err(Error::InvalidConfig(format!("c must be finite and nonnegative, got {c}")));
        }
        if n == 0 {
            return Err(Error::InvalidConfig("n must be at least 1".into()));
        }
        Ok(AsymptoticRegime { c, n })
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn n(&self) -> u32 {
        self.n
    }
}

fn check_threshold(lambda_th: f64) -> Result<()> {
    if !(lambda_th >= 0.0) {
        return Err(Error::Domain(format!("threshold must be nonnegative, got {lambda_th}")));
    }
    Ok(())
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(Error::InvalidConfig(format!("gamma must be finite and positive, got {gamma}")));
    }
    Ok(())
}

fn check_open(pf: Probability) -> Result<f64> {
    let v = pf.value();
    if !(v > 0.0 && v < 1.0) {
        return Err(Error::Domain(format!("false-alarm target must lie in (0, 1), got {v}")));
    }
    Ok(v)
}

/// `Pr(lambda_hat_max > lambda_th | H0)`.
pub fn p_false_alarm(lambda_th: f64, cfg: &DetectorConfig) -> Result<Probability> {
    check_threshold(lambda_th)?;
    Ok(cdf_max_null(cfg.kappa * lambda_th, &cfg.base)?.complement())
}

/// `Pr(lambda_hat_max > lambda_th | H1)` at SNR `gamma`.
pub fn p_detect(gamma: f64, lambda_th: f64, cfg: &DetectorConfig) -> Result<Probability> {
    check_gamma(gamma)?;
    check_threshold(lambda_th)?;
    let h1 = cfg.base.with_eta(gamma)?;
    Ok(cdf_max_spiked(cfg.kappa * lambda_th, &h1)?.complement())
}

/// Threshold whose false-alarm probability is `alpha`, to `PFA_TOLERANCE`.
///
/// The bracket starts at `[0, 1]` and doubles its upper end until it
/// straddles the target; bisection follows.
pub fn threshold_for_pfa(alpha: Probability, cfg: &DetectorConfig) -> Result<f64> {
    let target = check_open(alpha)?;
    let pfa = |l: f64| p_false_alarm(l, cfg).map(f64::from);
    let (mut lo, mut hi) = (0.0, 1.0);
    let mut at_hi = pfa(hi)?;
    let mut doublings = 0;
    while at_hi > target {
        lo = hi;
        hi *= 2.0;
        at_hi = pfa(hi)?;
        doublings += 1;
        if doublings > MAX_BRACKET_DOUBLINGS {
            return Err(Error::NoConvergence { what: "threshold bracketing", iterations: doublings });
        }
    }
    if (at_hi - target).abs() <= PFA_TOLERANCE {
        return Ok(hi);
    }
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        let v = pfa(mid)?;
        if (v - target).abs() <= PFA_TOLERANCE {
            return Ok(mid);
        }
        if mid <= lo || mid >= hi {
            break;
        }
        if v > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::NoConvergence { what: "threshold bisection", iterations: MAX_BISECTIONS })
}

/// ROC by threshold inversion and the exact spiked c.d.f.
pub fn roc_exact(gamma: f64, cfg: &DetectorConfig, pf_grid: &[Probability]) -> Result<Vec<RocPoint>> {
    check_gamma(gamma)?;
    pf_grid
        .par_iter()
        .map(|&pf| {
            let th = threshold_for_pfa(pf, cfg)?;
            Ok(RocPoint { pf, pd: p_detect(gamma, th, cfg)?, provenance: Provenance::Exact })
        })
        .collect()
}

/// `(1 - pf)^{1/k}` and `1 - (1 - pf)^{1/k}`, both to full relative accuracy.
fn root_of_complement(pf: f64, k: f64) -> (f64, f64) {
    let l = (-pf).ln_1p() / k;
    (l.exp(), -l.exp_m1())
}

/// ROC at `p = m` without root finding: `pd = 1 - F0(u/(1-u); gamma)`, `u = (1-pf)^{1/(nm)}`.
pub fn roc_alpha0_closed_form(gamma: f64, m: u32, n: u32, pf: Probability) -> Result<Probability> {
    check_gamma(gamma)?;
    check_alpha0_dims(m, n, gamma)?;
    let v = pf.value();
    if v == 0.0 {
        return Probability::new(0.0);
    }
    if v == 1.0 {
        return Probability::new(1.0);
    }
    let (u, one_minus_u) = root_of_complement(v, f64::from(n) * f64::from(m));
    Ok(cdf_alpha0_spiked(u / one_minus_u, m, n, gamma)?.complement())
}

/// ROC for a single signal-bearing sample at `p = m`:
/// `pd = 1 - (1 - pf) / (1 + gamma - gamma (1 - pf)^{1/m})`.
pub fn roc_n1_closed_form(gamma: f64, m: u32, pf: Probability) -> Result<Probability> {
    if !(gamma >= 0.0) || !gamma.is_finite() {
        return Err(Error::InvalidConfig(format!("gamma must be finite and nonnegative, got {gamma}")));
    }
    if m < 2 {
        return Err(Error::InvalidConfig(format!("requires m >= 2, got m = {m}")));
    }
    let v = pf.value();
    let (_, one_minus_u) = root_of_complement(v, f64::from(m));
    Probability::new(1.0 - (1.0 - v) / (1.0 + gamma * one_minus_u))
}

/// Limit of the `p = m` ROC when `gamma/m -> c`:
/// `1 - (1 - pf) / [1 - (c/n) ln(1 - pf)]^n`.
pub fn roc_asymptotic(regime: &AsymptoticRegime, pf: Probability) -> Probability {
    let v = pf.value();
    if regime.c == 0.0 {
        return pf;
    }
    let n = f64::from(regime.n);
    let base = 1.0 - regime.c / n * (-v).ln_1p();
    let pd = if v == 1.0 { 1.0 } else { 1.0 - (1.0 - v) / base.powf(n) };
    Probability::new(pd).expect("asymptotic ROC lies in [0, 1]")
}

/// `1 - (1 - pf)^{c+1}`, the `n -> inf` envelope of `roc_asymptotic`.
pub fn roc_asymptotic_upper_bound(c: f64, pf: Probability) -> Result<Probability> {
    if !(c >= 0.0) || !c.is_finite() {
        return Err(Error::InvalidConfig(format!("c must be finite and nonnegative, got {c}")));
    }
    if c == 0.0 {
        return Ok(pf);
    }
    Probability::new(1.0 - (1.0 - pf.value()).powf(c + 1.0))
}

/// `count` log-spaced false-alarm levels from `lo` to `hi`, both inside `(0, 1)`.
pub fn log_pf_grid(lo: f64, hi: f64, count: usize) -> Result<Vec<Probability>> {
    if !(lo > 0.0 && hi < 1.0 && lo <= hi) || count == 0 {
        return Err(Error::Domain(format!("bad false-alarm grid [{lo}, {hi}] with {count} points")));
    }
    if count == 1 {
        return Ok(vec![Probability::new(lo)?]);
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| {
            let t = i as f64 / (count - 1) as f64;
            let v = match i {
                0 => lo,
                _ if i + 1 == count => hi,
                _ => (a + t * (b - a)).exp(),
            };
            Probability::new(v.clamp(lo, hi))
        })
        .collect()
}

/// 101 log-spaced levels in `[1e-4, 1 - 1e-4]`.
pub fn default_pf_grid() -> Vec<Probability> {
    log_pf_grid(1e-4, 1.0 - 1e-4, 101).expect("valid default grid")
}
