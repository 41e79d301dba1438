//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::process::Command;
use std::time::Instant;

use lgev::cdf::{cdf_alpha0_spiked, cdf_max_null, cdf_max_spiked, joint_density_spiked, Probability, SpikedFConfig};
use lgev::error::Result;
use lgev::monte_carlo::{empirical_cdf, empirical_roc, ks_distance_continuous, Hypothesis, RngStream};
use lgev::roc::{
    default_pf_grid, log_pf_grid, roc_alpha0_closed_form, roc_asymptotic, roc_asymptotic_upper_bound, roc_exact,
    roc_n1_closed_form, AsymptoticRegime, DetectorConfig,
};
use lgev::special::quadrature::{integrate, integrate_to_infinity};
use lgev::special::{gauss_2f1_terminating, jacobi_p, pochhammer};

mod common;
use common::{binomial_f64, hyp_exact, jacobi_exact};

const SEED: u64 = 20_251_016;
const KS_TRIALS: usize = 100_000;

fn db(v: f64) -> f64 {
    10f64.powf(v / 10.0)
}

fn prob(v: f64) -> Probability {
    Probability::new(v).unwrap()
}

struct Outcome {
    passed: bool,
    summary: String,
}

fn outcome(passed: bool, summary: String) -> Outcome {
    Outcome { passed, summary }
}

fn ks_run(cases: &[(u32, u32, u32, f64)], stream_base: u64) -> Result<Outcome> {
    let crit = 1.63 / (KS_TRIALS as f64).sqrt();
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for (k, &(m, n, p, eta)) in cases.iter().enumerate() {
        let cfg = SpikedFConfig::new(m, n, p, eta)?;
        let hyp = if eta > 0.0 { Hypothesis::H1 } else { Hypothesis::H0 };
        let e = empirical_cdf(&cfg, hyp, KS_TRIALS, &RngStream::new(SEED, stream_base + k as u64))?;
        let kappa = f64::from(n) / f64::from(p);
        let failure = std::cell::RefCell::new(None);
        let d = ks_distance_continuous(&e, |l| {
            let v = if eta > 0.0 { cdf_max_spiked(kappa * l, &cfg) } else { cdf_max_null(kappa * l, &cfg) };
            v.map(Probability::value).unwrap_or_else(|err| {
                failure.borrow_mut().get_or_insert(err);
                f64::NAN
            })
        });
        if let Some(err) = failure.into_inner() {
            return Err(err);
        }
        worst = worst.max(d);
        parts.push(format!("({m},{n},{p},eta={eta:.4}) D={d:.5}"));
    }
    Ok(outcome(worst < crit, format!("{}; critical {crit:.5}", parts.join(", "))))
}

fn c1_null_ks() -> Result<Outcome> {
    ks_run(&[(10, 3, 15, 0.0), (10, 7, 15, 0.0), (8, 5, 8, 0.0), (8, 5, 10, 0.0)], 0)
}

fn c2_spiked_ks() -> Result<Outcome> {
    ks_run(
        &[(10, 5, 15, db(10.0)), (10, 7, 15, db(0.0)), (10, 7, 15, db(10.0)), (10, 7, 15, db(20.0)), (8, 5, 8, db(10.0))],
        100,
    )
}

fn c3_alpha0_chain() -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    for (m, n) in [(4u32, 2u32), (8, 5), (12, 7)] {
        for eta in [0.5, 10.0, 100.0] {
            let cfg = SpikedFConfig::new(m, n, m, eta)?;
            let hi = 20.0 * (1.0 + eta);
            for i in 1..=50 {
                let x = hi * f64::from(i) / 50.0;
                let general = cdf_max_spiked(x, &cfg)?.value();
                let closed = cdf_alpha0_spiked(x, m, n, eta)?.value();
                worst = worst.max((general - closed).abs() / closed);
            }
        }
    }
    Ok(outcome(worst <= 1e-9, format!("max relative gap {worst:.3e} (tolerance 1e-9)")))
}

fn c4_density_quadrature() -> Result<Outcome> {
    let mut worst_cdf: f64 = 0.0;
    for (m, p) in [(4u32, 5u32), (6, 6)] {
        for eta in [2.0, 10.0] {
            let cfg = SpikedFConfig::new(m, 1, p, eta)?;
            for x in [0.5, 1.0, 2.0, 5.0] {
                let mass = integrate(|l| joint_density_spiked(&[l], &cfg).unwrap_or(f64::NAN), 0.0, x, 1e-14, 1e-12)?;
                worst_cdf = worst_cdf.max((mass - cdf_max_spiked(x, &cfg)?.value()).abs());
            }
        }
    }
    let cfg = SpikedFConfig::new(4, 2, 5, 2.0)?;
    let mass = integrate_to_infinity(
        |u| {
            integrate_to_infinity(|t| if t > 0.0 { joint_density_spiked(&[u, u + t], &cfg).unwrap_or(0.0) } else { 0.0 }, 0.0, 1e-12, 1e-10)
                .unwrap_or(f64::NAN)
        },
        0.0,
        1e-11,
        1e-9,
    )?;
    let norm = (mass - 1.0).abs();
    Ok(outcome(
        worst_cdf <= 1e-8 && norm <= 1e-6,
        format!("n=1 max |integral - cdf| {worst_cdf:.3e} (1e-8); n=2 |mass - 1| {norm:.3e} (1e-6)"),
    ))
}

fn c5_roc_consistency() -> Result<Outcome> {
    let grid = default_pf_grid();
    let mut chain: f64 = 0.0;
    for (m, n, gamma) in [(6u32, 3u32, 4.0), (10, 5, 10.0), (15, 10, db(10.0)), (6, 1, 3.0), (15, 1, 10.0)] {
        let det = DetectorConfig::from_dims(m, n, m, gamma)?;
        for pt in roc_exact(gamma, &det, &grid)? {
            let cf = roc_alpha0_closed_form(gamma, m, n, pt.pf)?.value();
            chain = chain.max((pt.pd.value() - cf).abs());
            if n == 1 {
                let n1 = roc_n1_closed_form(gamma, m, pt.pf)?.value();
                chain = chain.max((pt.pd.value() - n1).abs()).max((cf - n1).abs());
            }
        }
    }
    let gamma = db(10.0);
    let det = DetectorConfig::from_dims(15, 10, 16, gamma)?;
    let pf = log_pf_grid(0.01, 0.99, 25)?;
    let exact = roc_exact(gamma, &det, &pf)?;
    let emp = empirical_roc(det.base(), gamma, KS_TRIALS, &pf, &RngStream::new(SEED, 200))?;
    let mc = exact.iter().zip(&emp).map(|(a, b)| (a.pd.value() - b.pd.value()).abs()).fold(0.0, f64::max);
    Ok(outcome(
        chain <= 1e-9 && mc <= 1e-2,
        format!("closed-form chain {chain:.3e} (1e-9); empirical vs exact {mc:.3e} (1e-2)"),
    ))
}

fn c6_sample_degradation() -> Result<Outcome> {
    let gamma = db(20.0);
    let grid = default_pf_grid();
    let curves: Vec<Vec<f64>> = [14u32, 10, 5]
        .iter()
        .map(|&n| {
            let det = DetectorConfig::from_dims(15, n, 16, gamma)?;
            Ok(roc_exact(gamma, &det, &grid)?.iter().map(|p| p.pd.value()).collect())
        })
        .collect::<Result<_>>()?;
    let mut worst = f64::NEG_INFINITY;
    for i in 0..grid.len() {
        worst = worst.max(curves[1][i] - curves[0][i]).max(curves[2][i] - curves[1][i]);
    }
    Ok(outcome(worst <= 1e-9, format!("largest increase as n drops {worst:.3e} (1e-9)")))
}

fn c7_asymptotics() -> Result<Outcome> {
    let mut grid = vec![prob(0.0)];
    grid.extend(default_pf_grid());
    grid.push(prob(1.0));
    let n = 5;
    let limit = AsymptoticRegime::new(1.0, n)?;
    let gaps: Vec<f64> = [6u32, 20, 60]
        .iter()
        .map(|&m| {
            grid.iter().try_fold(0.0f64, |acc, &pf| {
                let finite = roc_alpha0_closed_form(f64::from(m), m, n, pf)?.value();
                Ok(acc.max((finite - roc_asymptotic(&limit, pf).value()).abs()))
            })
        })
        .collect::<Result<_>>()?;
    let decreasing = gaps.windows(2).all(|w| w[1] < w[0]);
    let mut bound_violation = f64::NEG_INFINITY;
    for c in [0.0, 0.5, 1.0, 5.0] {
        for n in 1..=10 {
            let r = AsymptoticRegime::new(c, n)?;
            for i in 0..=100 {
                let pf = prob(f64::from(i) / 100.0);
                let excess = roc_asymptotic(&r, pf).value() - roc_asymptotic_upper_bound(c, pf)?.value();
                bound_violation = bound_violation.max(excess);
            }
        }
    }
    Ok(outcome(
        decreasing && gaps[2] <= 2e-2 && bound_violation <= 0.0,
        format!(
            "gaps m=6,20,60: {:.4e}, {:.4e}, {:.4e} (decreasing, last <= 2e-2); max(asym - bound) {bound_violation:.3e}",
            gaps[0], gaps[1], gaps[2]
        ),
    ))
}

fn c8_power_collapse() -> Result<Outcome> {
    let (gamma, pf) = (10.0, 0.3);
    let slope = -(1.0 - pf) * (1.0f64 - pf).ln() * gamma;
    let ms = [10u32, 100, 1_000, 10_000];
    let pds: Vec<f64> = ms.iter().map(|&m| Ok(roc_n1_closed_form(gamma, m, prob(pf))?.value())).collect::<Result<_>>()?;
    let decreasing = pds.windows(2).all(|w| w[1] < w[0]) && pds.iter().all(|&v| v > pf);
    let rel = (f64::from(ms[3]) * (pds[3] - pf) / slope - 1.0).abs();
    Ok(outcome(
        decreasing && rel <= 0.05,
        format!("pd(m) = {pds:.5?}; m(pd - pf) at m=1e4 off by {:.3}% from the limit (5%)", 100.0 * rel),
    ))
}

fn c9_special_functions() -> Result<Outcome> {
    // Outside [-1, 1] and at the endpoints the error is taken relative to the
    // value; inside, relative to the sup norm of the polynomial on [-1, 1].
    let mut jacobi: f64 = 0.0;
    for n in 0..=30u64 {
        for (a, b) in [(0i64, 0i64), (0, 3), (2, 1), (5, 9), (12, 20)] {
            let sup = binomial_f64(n + a as u64, n).max(binomial_f64(n + b as u64, n));
            for x in [-4.5, -1.3, -1.0, -0.7, -0.2, 0.0, 0.35, 0.9, 1.0, 1.001, 3.0, 41.0] {
                let want = jacobi_exact(n, a, b, x);
                let got = jacobi_p(n, a as f64, b as f64, x);
                let scale = if x.abs() >= 1.0 { want.abs() } else { sup };
                jacobi = jacobi.max((got - want).abs() / scale);
            }
        }
    }
    let mut hyp: f64 = 0.0;
    for nn in [1i64, 4, 9, 17, 30] {
        for (b, c, z) in [(2.0, 4.0, -0.5), (0.5, 1.5, 0.9), (7.0, 3.0, -3.0), (1.0, 12.0, 0.25)] {
            let want = hyp_exact(nn, b, c, z);
            let got = gauss_2f1_terminating(-nn, b, c, z)?.to_f64();
            hyp = hyp.max((got - want).abs() / want.abs());
        }
    }
    let zero_rule = (0..40u64).all(|n| (n + 1..n + 20).all(|k| pochhammer(-(n as f64), k).is_zero()));
    Ok(outcome(
        jacobi <= 1e-12 && hyp <= 1e-11 && zero_rule,
        format!("Jacobi {jacobi:.3e} (1e-12); 2F1 {hyp:.3e} (1e-11); Pochhammer zero rule {zero_rule}"),
    ))
}

fn c10_determinism() -> Result<Outcome> {
    let run = |threads: &str, args: &[&str]| {
        let out = Command::new(env!("CARGO_BIN_EXE_lgev")).args(["--threads", threads]).args(args).output().unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        out.stdout
    };
    let cdf = ["cdf", "--m", "10", "--n", "5", "--p", "15", "--snr-db", "10", "--grid", "0:40:81", "--trials", "4000", "--seed", "3"];
    let roc = [
        "roc", "--m", "8", "--p", "9", "--n", "5", "--snr-db", "10", "--upper-bound", "--with-asym", "--trials", "4000",
        "--seed", "3", "--pf-grid", "0.01:0.99:25",
    ];
    let mut same = true;
    for args in [&cdf[..], &roc[..]] {
        let a = run("1", args);
        same &= a == run("1", args) && a == run("8", args) && !a.is_empty();
    }
    Ok(outcome(same, "cdf and roc: two runs and --threads 1 vs 8 byte-identical".into()))
}

fn main() {
    let criteria: [(&str, fn() -> Result<Outcome>); 10] = [
        ("1 null c.d.f. vs simulation", c1_null_ks),
        ("2 spiked c.d.f. vs simulation", c2_spiked_ks),
        ("3 general vs p = m closed form", c3_alpha0_chain),
        ("4 density quadrature", c4_density_quadrature),
        ("5 ROC consistency", c5_roc_consistency),
        ("6 ROC degrades with fewer samples", c6_sample_degradation),
        ("7 asymptotic ROC convergence", c7_asymptotics),
        ("8 fixed-SNR power collapse", c8_power_collapse),
        ("9 special functions", c9_special_functions),
        ("10 determinism", c10_determinism),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let (passed, summary) = match check() {
            Ok(o) => (o.passed, o.summary),
            Err(e) => (false, format!("error: {e}")),
        };
        failed += usize::from(!passed);
        println!("{} criterion {name}: {summary} [{:.1}s]", if passed { "PASS" } else { "FAIL" }, start.elapsed().as_secs_f64());
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
