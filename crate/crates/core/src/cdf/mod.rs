//! Exact c.d.f. of the leading eigenvalue and joint eigenvalue densities.

mod alpha0;
mod density;
mod null;
mod psi_block;
mod spiked;

pub use alpha0::{cdf_alpha0_spiked, MAX_M_CLOSED_FORM};
pub(crate) use alpha0::check_alpha0_dims;
pub use density::{joint_density_null, joint_density_spiked};
pub use null::cdf_max_null;
pub use spiked::{
    cdf_max_spiked, cdf_max_spiked_terms, omega_entry, phi_entry, psi_entry, EvaluationRoute, SpikedCdfTerms,
};

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Largest system dimension accepted.
pub const MAX_M: u32 = 256;
/// Largest excess `p - m` accepted.
pub const MAX_ALPHA: u32 = 48;

/// Dimensions `(m, n, p)` and spike strength `eta`.
///
/// `m` is the system dimension, `n` the number of signal-bearing samples and
/// `p` the number of noise-only samples; `p >= m > n >= 1` always holds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpikedFConfig {
    m: u32,
    n: u32,
    p: u32,
    eta: f64,
}

impl SpikedFConfig {
    pub fn new(m: u32, n: u32, p: u32, eta: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidConfig("n must be at least 1".into()));
        }
        if n >= m {
            return Err(Error::InvalidConfig(format!(
                "sample-deficient setting requires m > n (got m = {m}, n = {n})"
            )));
        }
        if p < m {
            return Err(Error::InvalidConfig(format!(
                "noise covariance estimate must be nonsingular: requires p >= m (got p = {p}, m = {m})"
            )));
        }
        if m > MAX_M {
            return Err(Error::InvalidConfig(format!("m = {m} exceeds the supported maximum {MAX_M}")));
        }
        if p - m > MAX_ALPHA {
            return Err(Error::InvalidConfig(format!(
                "p - m = {} exceeds the supported maximum {MAX_ALPHA}",
                p - m
            )));
        }
        if !(eta >= 0.0) || !eta.is_finite() {
            return Err(Error::InvalidConfig(format!("eta must be finite and nonnegative, got {eta}")));
        }
        Ok(SpikedFConfig { m, n, p, eta })
    }

    /// Same dimensions with a different spike strength.
    pub fn with_eta(&self, eta: f64) -> Result<Self> {
        Self::new(self.m, self.n, self.p, eta)
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// `p - m`.
    pub fn alpha(&self) -> u32 {
        self.p - self.m
    }

    /// `m - n`.
    pub fn beta(&self) -> u32 {
        self.m - self.n
    }

    /// `eta / (1 + eta)`.
    pub fn c_eta(&self) -> f64 {
        self.eta / (1.0 + self.eta)
    }
}

/// A value in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Probability(f64);

const CLAMP_SLACK: f64 = 1e-9;

impl Probability {
    /// Clamps overshoot up to `1e-9`; rejects anything further out.
    pub fn new(v: f64) -> Result<Self> {
        if !(-CLAMP_SLACK..=1.0 + CLAMP_SLACK).contains(&v) {
            return Err(Error::Domain(format!("{v} is not a probability")));
        }
        Ok(Probability(v.clamp(0.0, 1.0)))
    }

    pub(crate) fn from_cdf(v: f64, x: f64) -> Result<Self> {
        Probability::new(v).map_err(|_| Error::NumericalInstability {
            x,
            detail: format!("c.d.f. evaluated to {v}, outside [0, 1]"),
        })
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// `1 - p`.
    pub fn complement(self) -> Self {
        Probability(1.0 - self.0)
    }
}

impl From<Probability> for f64 {
    fn from(p: Probability) -> f64 {
        p.0
    }
}

/// `y = x/(1+x)` together with `1 - y = 1/(1+x)`, both without cancellation.
#[derive(Debug, Clone, Copy)]
pub(crate) struct YPoint {
    pub y: f64,
    pub one_minus_y: f64,
}

impl YPoint {
    pub fn from_x(x: f64) -> Self {
        if x.is_infinite() {
            return YPoint { y: 1.0, one_minus_y: 0.0 };
        }
        YPoint { y: x / (1.0 + x), one_minus_y: 1.0 / (1.0 + x) }
    }

    pub fn from_y(y: f64) -> Self {
        YPoint { y, one_minus_y: 1.0 - y }
    }

    /// `1 - c_eta y = (1 + eta (1-y)) / (1 + eta)`.
    pub fn one_minus_cy(&self, eta: f64) -> f64 {
        (1.0 + eta * self.one_minus_y) / (1.0 + eta)
    }
}

pub(crate) fn check_x(x: f64) -> Result<()> {
    if !(x >= 0.0) {
        return Err(Error::Domain(format!("x must be nonnegative, got {x}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_invariants() {
        let c = SpikedFConfig::new(10, 5, 15, 10.0).unwrap();
        assert_eq!((c.alpha(), c.beta()), (5, 5));
        assert!((c.c_eta() - 10.0 / 11.0).abs() < 1e-16);
        assert_eq!(SpikedFConfig::new(4, 2, 5, 0.0).unwrap().c_eta(), 0.0);
        let e = SpikedFConfig::new(5, 5, 6, 1.0).unwrap_err();
        assert!(e.to_string().contains("requires m > n"));
        assert!(SpikedFConfig::new(5, 3, 4, 1.0).is_err());
        assert!(SpikedFConfig::new(5, 0, 5, 1.0).is_err());
        assert!(SpikedFConfig::new(5, 3, 5, -1.0).is_err());
        assert!(SpikedFConfig::new(257, 3, 257, 1.0).is_err());
        assert!(SpikedFConfig::new(10, 3, 59, 1.0).is_err());
        assert!(SpikedFConfig::new(10, 3, 58, 1.0).is_ok());
    }

    #[test]
    fn probability_clamps_small_overshoot_only() {
        assert_eq!(Probability::new(1.0 + 5e-10).unwrap().value(), 1.0);
        assert_eq!(Probability::new(-5e-10).unwrap().value(), 0.0);
        assert!(Probability::new(1.0 + 1e-8).is_err());
        assert!(Probability::new(f64::NAN).is_err());
    }
}
