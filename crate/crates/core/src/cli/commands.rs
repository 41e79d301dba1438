use rayon::prelude::*;

use super::{AsymArgs, CdfArgs, CliError, CliResult, DensityArgs, Dims, HypothesisArg, McArgs, RocArgs, Snr, Table};
use crate::cdf::{cdf_max_null, cdf_max_spiked, joint_density_null, joint_density_spiked, Probability, SpikedFConfig};
use crate::error::Result;
use crate::monte_carlo::{empirical_cdf, empirical_roc, EmpiricalCdf, Hypothesis, RngStream};
use crate::roc::{
    default_pf_grid, roc_alpha0_closed_form, roc_asymptotic, roc_asymptotic_upper_bound, roc_exact,
    AsymptoticRegime, DetectorConfig,
};

fn config(dims: &Dims, snr: &Snr) -> CliResult<SpikedFConfig> {
    let eta = snr.linear().ok_or_else(|| CliError::Usage("one of --eta or --snr-db is required".into()))?;
    Ok(SpikedFConfig::new(dims.m, dims.n, dims.p, eta)?)
}

/// `Pr(lambda_max <= x)`; the null formula when `eta = 0`.
fn analytic_cdf(x: f64, cfg: &SpikedFConfig) -> Result<Probability> {
    if cfg.eta() == 0.0 {
        cdf_max_null(x, cfg)
    } else {
        cdf_max_spiked(x, cfg)
    }
}

fn hypothesis_for(cfg: &SpikedFConfig) -> Hypothesis {
    if cfg.eta() > 0.0 {
        Hypothesis::H1
    } else {
        Hypothesis::H0
    }
}

fn kappa(cfg: &SpikedFConfig) -> f64 {
    f64::from(cfg.n()) / f64::from(cfg.p())
}

// Empirical c.d.f. of kappa * lambda_hat, i.e. on the unnormalized scale.
fn empirical_on_grid(e: &EmpiricalCdf, k: f64, xs: &[f64]) -> Vec<f64> {
    xs.iter().map(|&x| e.eval(x / k)).collect()
}

pub fn cmd_cdf(args: &CdfArgs) -> CliResult<Table> {
    let cfg = config(&args.dims, &args.snr)?;
    let xs = args.grid.points();
    let values: Vec<f64> =
        xs.par_iter().map(|&x| analytic_cdf(x, &cfg).map(f64::from)).collect::<Result<_>>()?;
    let mut t = Table::new();
    t.push_column("x", xs.clone());
    t.push_column("cdf_analytic", values);
    if args.trials > 0 {
        let e = empirical_cdf(&cfg, hypothesis_for(&cfg), args.trials, &RngStream::new(args.seed, 0))?;
        t.push_column("cdf_empirical", empirical_on_grid(&e, kappa(&cfg), &xs));
    }
    Ok(t)
}

pub fn cmd_density(args: &DensityArgs) -> CliResult<Table> {
    let cfg = config(&args.dims, &args.snr)?;
    let v = if cfg.eta() == 0.0 { joint_density_null(&args.at, &cfg)? } else { joint_density_spiked(&args.at, &cfg)? };
    let mut t = Table::new();
    for (i, &l) in args.at.iter().enumerate() {
        t.push_column(&format!("lambda_{}", i + 1), vec![l]);
    }
    t.push_column("density", vec![v]);
    Ok(t)
}

fn probabilities(values: &[f64]) -> CliResult<Vec<Probability>> {
    Ok(values.iter().map(|&v| Probability::new(v)).collect::<Result<_>>()?)
}

fn values(points: &[Probability]) -> Vec<f64> {
    points.iter().map(|p| p.value()).collect()
}

fn asym_table(c: f64, n: u32, pf: &[Probability], upper: bool) -> CliResult<Table> {
    let regime = AsymptoticRegime::new(c, n)?;
    let mut t = Table::new();
    t.push_column("pf", values(pf));
    t.push_column("pd_asymptotic", pf.iter().map(|&p| roc_asymptotic(&regime, p).value()).collect());
    if upper {
        let ub: Vec<f64> =
            pf.iter().map(|&p| roc_asymptotic_upper_bound(c, p).map(f64::from)).collect::<Result<_>>()?;
        t.push_column("pd_upper_bound", ub);
    }
    Ok(t)
}

pub fn cmd_roc(args: &RocArgs) -> CliResult<Table> {
    if args.asym {
        let c = args.c.ok_or_else(|| CliError::Usage("--asym needs --c".into()))?;
        let grid = args.pf_grid.map_or_else(|| (0..=100).map(|i| f64::from(i) / 100.0).collect(), |g| g.points());
        return asym_table(c, args.n, &probabilities(&grid)?, args.upper_bound);
    }
    let (m, p) = match (args.m, args.p) {
        (Some(m), Some(p)) => (m, p),
        _ => return Err(CliError::Usage("--m and --p are required unless --asym is given".into())),
    };
    let gamma = if args.gamma_eq_m {
        f64::from(m)
    } else {
        args.snr.linear().ok_or_else(|| CliError::Usage("one of --eta, --snr-db or --gamma-eq-m is required".into()))?
    };
    let det = DetectorConfig::from_dims(m, args.n, p, gamma)?;
    let pf = match args.pf_grid {
        Some(g) => probabilities(&g.points())?,
        None => default_pf_grid(),
    };
    let exact: Vec<f64> = roc_exact(gamma, &det, &pf)?.iter().map(|r| r.pd.value()).collect();
    let mut t = Table::new();
    t.push_column("pf", values(&pf));
    t.push_column("pd_exact", exact.clone());
    if args.closed_form {
        if m != p {
            return Err(CliError::Usage(format!("--closed-form requires p = m (got m = {m}, p = {p})")));
        }
        let cf: Vec<f64> = pf
            .par_iter()
            .map(|&v| roc_alpha0_closed_form(gamma, m, args.n, v).map(f64::from))
            .collect::<Result<_>>()?;
        t.push_column("pd_closed_form", cf);
    }
    let c = gamma / f64::from(m);
    if args.with_asym {
        let regime = AsymptoticRegime::new(c, args.n)?;
        let asym: Vec<f64> = pf.iter().map(|&v| roc_asymptotic(&regime, v).value()).collect();
        let gap = exact.iter().zip(&asym).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        t.push_column("pd_asymptotic", asym);
        t.push_footer("max_abs_gap_exact_vs_asymptotic", gap);
    }
    if args.upper_bound {
        let ub: Vec<f64> =
            pf.iter().map(|&v| roc_asymptotic_upper_bound(c, v).map(f64::from)).collect::<Result<_>>()?;
        t.push_column("pd_upper_bound", ub);
    }
    if args.trials > 0 {
        let emp = empirical_roc(det.base(), gamma, args.trials, &pf, &RngStream::new(args.seed, 0))?;
        t.push_column("pd_empirical", emp.iter().map(|r| r.pd.value()).collect());
    }
    Ok(t)
}

pub fn cmd_asym(args: &AsymArgs) -> CliResult<Table> {
    asym_table(args.c, args.n, &probabilities(&args.pf_grid.points())?, true)
}

pub fn cmd_mc(args: &McArgs) -> CliResult<Table> {
    let cfg = config(&args.dims, &args.snr)?;
    let hyp = match args.hypothesis {
        Some(HypothesisArg::H0) => Hypothesis::H0,
        Some(HypothesisArg::H1) => Hypothesis::H1,
        None => hypothesis_for(&cfg),
    };
    let e = empirical_cdf(&cfg, hyp, args.trials, &RngStream::new(args.seed, 0))?;
    let mut t = Table::new();
    match args.grid {
        Some(g) => {
            let xs = g.points();
            let values = empirical_on_grid(&e, kappa(&cfg), &xs);
            t.push_column("x", xs);
            t.push_column("cdf_empirical", values);
        }
        None => t.push_column("lambda_hat", e.samples().to_vec()),
    }
    Ok(t)
}
