//! The `validate` suite: cross-checks between independent evaluation routes.

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use super::ValidateArgs;
use crate::cdf::{cdf_alpha0_spiked, cdf_max_null, cdf_max_spiked, joint_density_spiked, Probability, SpikedFConfig};
use crate::error::Result;
use crate::monte_carlo::{empirical_cdf, ks_distance_continuous, Hypothesis, RngStream};
use crate::roc::{log_pf_grid, roc_alpha0_closed_form, roc_exact, roc_n1_closed_form, DetectorConfig};
use crate::special::quadrature::integrate;

/// Kolmogorov–Smirnov critical coefficient at the 1% level.
const KS_COEFF_1PCT: f64 = 1.63;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl CheckResult {
    fn below(name: impl Into<String>, value: f64, tolerance: f64, detail: impl Into<String>) -> Self {
        CheckResult { name: name.into(), passed: value <= tolerance, value, tolerance, detail: detail.into() }
    }

    fn error(name: impl Into<String>, tolerance: f64, e: impl std::fmt::Display) -> Self {
        CheckResult { name: name.into(), passed: false, value: f64::NAN, tolerance, detail: format!("error: {e}") }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<CheckResult>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> usize {
        self.checks.iter().filter(|c| !c.passed).count()
    }

    pub fn len(&self) -> usize {
        self.checks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.checks.is_empty()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("check,status,value,tolerance,detail\n");
        for c in &self.checks {
            out.push_str(&format!(
                "{},{},{},{},\"{}\"\n",
                c.name,
                if c.passed { "PASS" } else { "FAIL" },
                super::format_number(c.value),
                super::format_number(c.tolerance),
                c.detail.replace('"', "'")
            ));
        }
        out
    }

    pub fn to_json(&self, metadata: Value) -> String {
        let doc = json!({
            "metadata": metadata,
            "passed": self.passed(),
            "checks": self.checks.iter().map(|c| json!({
                "name": c.name,
                "passed": c.passed,
                "value": if c.value.is_finite() { json!(c.value) } else { Value::Null },
                "tolerance": c.tolerance,
                "detail": c.detail,
            })).collect::<Vec<_>>(),
        });
        let mut s = serde_json::to_string_pretty(&doc).expect("serializable");
        s.push('\n');
        s
    }
}

fn record(name: String, tolerance: f64, detail: String, r: Result<f64>) -> CheckResult {
    match r {
        Ok(v) => CheckResult::below(name, v, tolerance, detail),
        Err(e) => CheckResult::error(name, tolerance, e),
    }
}

fn max_gap<I: Iterator<Item = Result<f64>>>(mut gaps: I) -> Result<f64> {
    gaps.try_fold(0.0f64, |acc, g| Ok(acc.max(g?)))
}

// The general c.d.f. at p = m against the dedicated closed form.
fn alpha0_consistency(quick: bool, fault: f64) -> Vec<CheckResult> {
    let dims: &[(u32, u32)] = if quick { &[(4, 2), (8, 5)] } else { &[(4, 2), (8, 5), (12, 7)] };
    let etas: &[f64] = if quick { &[0.5, 10.0] } else { &[0.5, 10.0, 100.0] };
    let points = if quick { 20 } else { 50 };
    let mut cases = Vec::new();
    for &(m, n) in dims {
        for &eta in etas {
            cases.push((m, n, eta));
        }
    }
    cases
        .par_iter()
        .enumerate()
        .map(|(k, &(m, n, eta))| {
            let r = SpikedFConfig::new(m, n, m, eta).and_then(|cfg| {
                let hi = 20.0 * (1.0 + eta);
                max_gap((1..=points).map(|i| {
                    let x = hi * f64::from(i) / f64::from(points);
                    let general = cdf_max_spiked(x, &cfg)?.value() * if k == 0 && i == 1 { 1.0 + fault } else { 1.0 };
                    let closed = cdf_alpha0_spiked(x, m, n, eta)?.value();
                    Ok((general - closed).abs() / closed)
                }))
            });
            record(format!("cdf_vs_alpha0_closed_form m={m} n={n} eta={eta}"), 1e-9, format!("relative, {points} points"), r)
        })
        .collect()
}

// Integrating the one-eigenvalue density recovers the c.d.f.
fn density_consistency(quick: bool) -> Vec<CheckResult> {
    let dims: &[(u32, u32)] = &[(4, 5), (6, 6)];
    let xs: &[f64] = if quick { &[1.0] } else { &[0.5, 1.0, 2.0, 5.0] };
    let eta = 2.0;
    dims.iter()
        .map(|&(m, p)| {
            let r = SpikedFConfig::new(m, 1, p, eta).and_then(|cfg| {
                max_gap(xs.iter().map(|&x| {
                    let mass = integrate(|l| joint_density_spiked(&[l], &cfg).unwrap_or(f64::NAN), 0.0, x, 1e-13, 1e-12)?;
                    Ok((mass - cdf_max_spiked(x, &cfg)?.value()).abs())
                }))
            });
            record(format!("density_integral m={m} n=1 p={p} eta={eta}"), 1e-8, format!("x in {xs:?}"), r)
        })
        .collect()
}

// Threshold inversion plus exact c.d.f. against the closed-form ROCs.
fn roc_consistency(quick: bool) -> Vec<CheckResult> {
    let pf = log_pf_grid(1e-3, 0.9, if quick { 8 } else { 20 }).expect("valid grid");
    let mut out = Vec::new();
    let cases: &[(u32, u32, f64)] = if quick { &[(6, 3, 4.0)] } else { &[(6, 3, 4.0), (10, 5, 10.0)] };
    for &(m, n, gamma) in cases {
        let r = DetectorConfig::from_dims(m, n, m, gamma).and_then(|det| {
            let exact = roc_exact(gamma, &det, &pf)?;
            max_gap(exact.iter().map(|pt| {
                Ok((pt.pd.value() - roc_alpha0_closed_form(gamma, m, n, pt.pf)?.value()).abs())
            }))
        });
        out.push(record(format!("roc_exact_vs_closed_form m={m} n={n} gamma={gamma}"), 1e-9, String::new(), r));
    }
    let (m, gamma) = (6, 3.0);
    let r = DetectorConfig::from_dims(m, 1, m, gamma).and_then(|det| {
        let exact = roc_exact(gamma, &det, &pf)?;
        max_gap(exact.iter().map(|pt| Ok((pt.pd.value() - roc_n1_closed_form(gamma, m, pt.pf)?.value()).abs())))
    });
    out.push(record(format!("roc_exact_vs_single_sample m={m} gamma={gamma}"), 1e-9, String::new(), r));
    out
}

// Simulated kappa * lambda_hat against the analytic c.d.f.
fn ks_checks(quick: bool, seed: u64) -> Vec<CheckResult> {
    let trials = if quick { 2_000 } else { 20_000 };
    let crit = KS_COEFF_1PCT / (trials as f64).sqrt();
    let cases: &[(u32, u32, u32, f64)] =
        if quick { &[(6, 3, 8, 0.0), (6, 3, 8, 10.0)] } else { &[(10, 3, 15, 0.0), (8, 5, 8, 0.0), (10, 5, 15, 10.0), (8, 5, 8, 10.0)] };
    cases
        .iter()
        .enumerate()
        .map(|(k, &(m, n, p, eta))| {
            let r = SpikedFConfig::new(m, n, p, eta).and_then(|cfg| {
                let hyp = if eta > 0.0 { Hypothesis::H1 } else { Hypothesis::H0 };
                let e = empirical_cdf(&cfg, hyp, trials, &RngStream::new(seed, 2 * k as u64))?;
                let kappa = f64::from(n) / f64::from(p);
                let failure = std::cell::RefCell::new(None);
                let f = |l: f64| {
                    let x = kappa * l;
                    let v = if eta > 0.0 { cdf_max_spiked(x, &cfg) } else { cdf_max_null(x, &cfg) };
                    v.map(Probability::value).unwrap_or_else(|err| {
                        failure.borrow_mut().get_or_insert(err);
                        f64::NAN
                    })
                };
                let d = ks_distance_continuous(&e, f);
                match failure.into_inner() {
                    Some(err) => Err(err),
                    None => Ok(d),
                }
            });
            record(format!("ks m={m} n={n} p={p} eta={eta}"), crit, format!("{trials} trials"), r)
        })
        .collect()
}

// Monotone in x and bounded; monotone decreasing in eta.
fn invariants() -> Vec<CheckResult> {
    let xs: Vec<f64> = (0..=60).map(|i| 0.25 * f64::from(i) * f64::from(i)).collect();
    let r = (|| -> Result<f64> {
        let mut worst: f64 = 0.0;
        for eta in [0.0, 1.0, 10.0] {
            let cfg = SpikedFConfig::new(8, 4, 11, eta)?;
            let mut prev = 0.0;
            for &x in &xs {
                let v = if eta == 0.0 { cdf_max_null(x, &cfg)? } else { cdf_max_spiked(x, &cfg)? }.value();
                worst = worst.max(prev - v).max(v - 1.0).max(-v);
                prev = v;
            }
        }
        Ok(worst + 0.0)
    })();
    let mono_x = record("cdf_monotone_in_x".into(), 1e-12, "m=8 n=4 p=11".into(), r);
    let r = (|| -> Result<f64> {
        let mut worst: f64 = 0.0;
        for &x in &[2.0, 10.0, 40.0] {
            let mut prev = cdf_max_null(x, &SpikedFConfig::new(8, 4, 11, 0.0)?)?.value();
            for eta in [0.5, 2.0, 8.0, 32.0] {
                let v = cdf_max_spiked(x, &SpikedFConfig::new(8, 4, 11, eta)?)?.value();
                worst = worst.max(v - prev);
                prev = v;
            }
        }
        Ok(worst + 0.0)
    })();
    vec![mono_x, record("cdf_decreasing_in_eta".into(), 1e-12, "m=8 n=4 p=11".into(), r)]
}

pub fn cmd_validate(args: &ValidateArgs) -> ValidationReport {
    let fault = if args.inject_fault { 1e-3 } else { 0.0 };
    let mut checks = alpha0_consistency(args.quick, fault);
    checks.extend(density_consistency(args.quick));
    checks.extend(roc_consistency(args.quick));
    checks.extend(invariants());
    checks.extend(ks_checks(args.quick, args.seed));
    ValidationReport { checks }
}
