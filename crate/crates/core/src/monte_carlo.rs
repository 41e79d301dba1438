//! Monte Carlo simulation of the detector statistic.
//!
//! Every trial draws from its own ChaCha8 substream (`stream_id` selects the
//! stream, the trial index the block offset), so results do not depend on how
//! trials are scheduled across threads.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cdf::{Probability, SpikedFConfig};
use crate::error::{Error, Result};
use crate::linalg::{max_generalized_eig, ComplexMatrix};
use crate::roc::{Provenance, RocPoint};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Hypothesis {
    /// Noise only.
    H0,
    /// Rank-one spike of strength `eta` along the signal direction.
    H1,
}

/// Seed plus stream identifier; trial `t` uses words `t * 2^32 ..` of the stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        RngStream { seed, stream_id }
    }

    /// Generator for one trial.
    pub fn trial(&self, t: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng.set_word_pos(u128::from(t) << 32);
        rng
    }

    /// Same seed, another stream.
    pub fn with_stream(&self, stream_id: u64) -> Self {
        RngStream { seed: self.seed, stream_id }
    }
}

fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Draws `lambda_hat_max`, the leading eigenvalue of `S_n^{-1} S_s` with
/// `S_s = (1/n) sum x x^H` and `S_n = (1/p) sum w w^H`.
#[derive(Debug, Clone)]
pub struct Sampler {
    cfg: SpikedFConfig,
    hypothesis: Hypothesis,
    direction: Vec<Complex64>,
    sigma: f64,
}

impl Sampler {
    pub fn new(cfg: SpikedFConfig, hypothesis: Hypothesis) -> Self {
        let mut direction = vec![Complex64::new(0.0, 0.0); cfg.m() as usize];
        direction[0] = Complex64::new(1.0, 0.0);
        Sampler { cfg, hypothesis, direction, sigma: 1.0 }
    }

    /// Signal direction; normalized here.
    pub fn with_direction(mut self, s: Vec<Complex64>) -> Result<Self> {
        if s.len() != self.cfg.m() as usize {
            return Err(Error::Domain(format!("direction has length {}, expected {}", s.len(), self.cfg.m())));
        }
        let norm = s.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::Domain("direction must be a finite nonzero vector".into()));
        }
        self.direction = s.into_iter().map(|v| v / norm).collect();
        Ok(self)
    }

    /// Common noise scale applied to every drawn vector.
    pub fn with_sigma(mut self, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::Domain(format!("sigma must be finite and positive, got {sigma}")));
        }
        self.sigma = sigma;
        Ok(self)
    }

    fn covariance<R: Rng + ?Sized>(&self, count: u32, spiked: bool, rng: &mut R) -> ComplexMatrix {
        let m = self.cfg.m() as usize;
        let gain = (1.0 + self.cfg.eta()).sqrt() - 1.0;
        let mut acc = ComplexMatrix::zeros(m, m);
        let mut v = vec![Complex64::new(0.0, 0.0); m];
        for _ in 0..count {
            for e in v.iter_mut() {
                *e = complex_normal(rng);
            }
            if spiked {
                let proj: Complex64 = self.direction.iter().zip(&v).map(|(s, z)| s.conj() * z).sum();
                for (e, s) in v.iter_mut().zip(&self.direction) {
                    *e += gain * proj * s;
                }
            }
            for e in v.iter_mut() {
                *e *= self.sigma;
            }
            for i in 0..m {
                for j in 0..=i {
                    acc[(i, j)] += v[i] * v[j].conj();
                }
            }
        }
        for i in 0..m {
            for j in 0..i {
                acc[(j, i)] = acc[(i, j)].conj();
            }
        }
        acc.scale(1.0 / f64::from(count))
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<f64> {
        let noise = self.covariance(self.cfg.p(), false, rng);
        let signal = self.covariance(self.cfg.n(), self.hypothesis == Hypothesis::H1, rng);
        max_generalized_eig(&signal, &noise)
    }

    /// One draw; a singular noise estimate is redrawn once before giving up.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<f64> {
        match self.draw(rng) {
            Err(Error::NotPositiveDefinite { .. }) => self.draw(rng),
            other => other,
        }
    }
}

/// One draw of `lambda_hat_max` with the spike along the first coordinate.
pub fn sample_lambda_max<R: Rng + ?Sized>(cfg: &SpikedFConfig, hypothesis: Hypothesis, rng: &mut R) -> Result<f64> {
    Sampler::new(*cfg, hypothesis).sample(rng)
}

/// Right-continuous empirical distribution function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalCdf {
    samples: Vec<f64>,
}

impl EmpiricalCdf {
    /// Sorts `samples`; rejects an empty or non-finite sample.
    pub fn new(mut samples: Vec<f64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Domain("empirical c.d.f. needs at least one sample".into()));
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("samples must be finite".into()));
        }
        samples.sort_by(f64::total_cmp);
        Ok(EmpiricalCdf { samples })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn count(&self) -> usize {
        self.samples.len()
    }

    /// Fraction of samples `<= x`.
    pub fn eval(&self, x: f64) -> f64 {
        self.samples.partition_point(|&s| s <= x) as f64 / self.count() as f64
    }

    /// Fraction of samples `< x`.
    pub fn eval_left(&self, x: f64) -> f64 {
        self.samples.partition_point(|&s| s < x) as f64 / self.count() as f64
    }

    /// Smallest sample `t` with at most a fraction `q` of the sample above it.
    pub fn upper_quantile(&self, q: f64) -> f64 {
        let n = self.count();
        let keep = ((1.0 - q) * n as f64).ceil() as usize;
        self.samples[keep.clamp(1, n) - 1]
    }
}

/// `trials` independent draws, one substream block per trial.
pub fn empirical_cdf_with(sampler: &Sampler, trials: usize, stream: &RngStream) -> Result<EmpiricalCdf> {
    if trials == 0 {
        return Err(Error::Domain("trials must be at least 1".into()));
    }
    let draws: Vec<f64> = (0..trials as u64)
        .into_par_iter()
        .map(|t| sampler.sample(&mut stream.trial(t)))
        .collect::<Result<_>>()?;
    EmpiricalCdf::new(draws)
}

pub fn empirical_cdf(
    cfg: &SpikedFConfig,
    hypothesis: Hypothesis,
    trials: usize,
    stream: &RngStream,
) -> Result<EmpiricalCdf> {
    empirical_cdf_with(&Sampler::new(*cfg, hypothesis), trials, stream)
}

/// Empirical ROC: thresholds are upper quantiles of an H0 run on `stream`,
/// detection rates come from an H1 run at SNR `gamma` on the next stream.
pub fn empirical_roc(
    cfg: &SpikedFConfig,
    gamma: f64,
    trials: usize,
    pf_grid: &[Probability],
    stream: &RngStream,
) -> Result<Vec<RocPoint>> {
    let h1_cfg = cfg.with_eta(gamma)?;
    let null = empirical_cdf(cfg, Hypothesis::H0, trials, stream)?;
    let alt = empirical_cdf(&h1_cfg, Hypothesis::H1, trials, &stream.with_stream(stream.stream_id.wrapping_add(1)))?;
    pf_grid
        .iter()
        .map(|&pf| {
            let th = null.upper_quantile(pf.value());
            Ok(RocPoint { pf, pd: Probability::new(1.0 - alt.eval(th))?, provenance: Provenance::Empirical })
        })
        .collect()
}

/// Two-sided Kolmogorov–Smirnov distance, comparing both one-sided limits of
/// the step function at every sample point with the corresponding limits of `f`.
pub fn ks_distance<F: Fn(f64) -> f64>(e: &EmpiricalCdf, f: F) -> f64 {
    ks_impl(e, &f, |x| f(x.next_down()))
}

/// As [`ks_distance`] for continuous `f`, which is then evaluated once per distinct sample.
pub fn ks_distance_continuous<F: Fn(f64) -> f64>(e: &EmpiricalCdf, f: F) -> f64 {
    ks_impl(e, &f, &f)
}

fn ks_impl(e: &EmpiricalCdf, f: &dyn Fn(f64) -> f64, f_left: impl Fn(f64) -> f64) -> f64 {
    let s = e.samples();
    let n = s.len() as f64;
    let mut d: f64 = 0.0;
    let mut i = 0;
    while i < s.len() {
        let x = s[i];
        let mut j = i;
        while j < s.len() && s[j] == x {
            j += 1;
        }
        let below = i as f64 / n;
        let upto = j as f64 / n;
        d = d.max((upto - f(x)).abs()).max((below - f_left(x)).abs());
        i = j;
    }
    d
}
