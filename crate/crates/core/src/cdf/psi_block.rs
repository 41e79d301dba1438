//! Determinants built from the `Psi` block.
//!
//! These matrices are increasingly ill-conditioned as `alpha` grows (their
//! equilibrated condition number is around `1e12` at `alpha = 10`). Each is
//! first solved in double precision with a condition estimate; if the
//! estimate allows more than `1e-10` relative error the block is rebuilt and
//! eliminated in extended precision, raising the precision until two
//! successive results agree.

use super::spiked::psi_raw;
use super::SpikedFConfig;
use crate::error::{Error, Result};
use crate::multiprec::{big_f64, big_u64, big_uint, det_and_first_inverse_row, rising_factorial, to_logscaled, Big};
use crate::special::LogScaled;

const TARGET_REL_ERROR: f64 = 1e-10;
const MAX_PRECISION: usize = 8192;

/// Which determinant is wanted.
#[derive(Clone, Copy)]
enum Block {
    /// `det[Psi_{i+1,j+1}]_{alpha x alpha}`.
    Null,
    /// Cofactors of the first column of `[*, Psi_{i,j}]_{(alpha+1) x (alpha+1)}`.
    FirstColumn,
}

/// Relative error claimed for extended-precision results.
const EXTENDED_REL_ERROR: f64 = 1e-15;

/// `det[Psi_{i+1,j+1}(y)]_{i,j=1..alpha}`.
pub(crate) fn null_determinant(y: f64, cfg: &SpikedFConfig) -> Result<LogScaled> {
    Ok(solve(Block::Null, y, cfg, TARGET_REL_ERROR)?.0)
}

/// First-column cofactors and a bound on their relative error.
pub(crate) struct Cofactors {
    pub values: Vec<LogScaled>,
    pub rel_err: f64,
}

/// Cofactors `C_r` with `det[v, Psi] = sum_r v_r C_r`, accurate to `tolerance`
/// relative error (or to `1e-15` once extended precision is needed).
pub(crate) fn first_column_cofactors(y: f64, cfg: &SpikedFConfig, tolerance: f64) -> Result<Cofactors> {
    let (_, values, rel_err) = solve(Block::FirstColumn, y, cfg, tolerance)?;
    Ok(Cofactors { values, rel_err })
}

fn solve(block: Block, y: f64, cfg: &SpikedFConfig, tolerance: f64) -> Result<(LogScaled, Vec<LogScaled>, f64)> {
    let a = cfg.alpha() as usize;
    let (d, entries) = match block {
        Block::Null => {
            let mut e = Vec::with_capacity(a * a);
            for i in 1..=a as u32 {
                for j in 1..=a as u32 {
                    e.push(psi_raw(i + 1, j + 1, y, cfg));
                }
            }
            (a, e)
        }
        Block::FirstColumn => {
            let d = a + 1;
            let mut e = vec![LogScaled::ZERO; d * d];
            for i in 1..=d as u32 {
                for j in 2..=d as u32 {
                    e[(i as usize - 1) * d + j as usize - 1] = psi_raw(i, j, y, cfg);
                }
            }
            let r = free_row(d, &e);
            e[r * d] = LogScaled::ONE;
            (d, e)
        }
    };
    if d == 0 {
        return Ok((LogScaled::ONE, Vec::new(), f64::EPSILON));
    }
    if d == 1 {
        return Ok((entries[0], vec![LogScaled::ONE], f64::EPSILON));
    }
    let want_row = matches!(block, Block::FirstColumn);
    let mut known_kappa = None;
    if let Some((det, row, kappa)) = solve_f64(d, &entries, want_row) {
        let err = d as f64 * kappa * f64::EPSILON;
        if err <= tolerance {
            return Ok((det, cofactors(det, &row), err));
        }
        // the estimate itself is only trustworthy while kappa * eps is small
        if err <= 1e-3 {
            known_kappa = Some(d as f64 * kappa);
        }
    }
    let (det, cof) = solve_extended(block, d, y, cfg, &entries, known_kappa)?;
    Ok((det, cof, EXTENDED_REL_ERROR))
}

fn cofactors(det: LogScaled, row: &[LogScaled]) -> Vec<LogScaled> {
    row.iter().map(|&w| det * w).collect()
}

// Power-of-two row and column scalings bringing every row and column to unit size.
fn equilibrate(d: usize, e: &[LogScaled]) -> (Vec<i64>, Vec<i64>) {
    let col: Vec<i64> = (0..d)
        .map(|j| (0..d).filter(|&i| !e[i * d + j].is_zero()).map(|i| e[i * d + j].exponent()).max().unwrap_or(0))
        .collect();
    let row: Vec<i64> = (0..d)
        .map(|i| {
            (0..d)
                .filter(|&j| !e[i * d + j].is_zero())
                .map(|j| e[i * d + j].exponent() - col[j])
                .max()
                .unwrap_or(0)
        })
        .collect();
    (row, col)
}

// The row left over after partial pivoting of the Psi columns: putting a unit
// entry there makes the bordered matrix as well conditioned as the block allows.
fn free_row(d: usize, e: &[LogScaled]) -> usize {
    let (row, col) = equilibrate(d, e);
    let mut rows: Vec<usize> = (0..d).collect();
    let mut m: Vec<f64> =
        (0..d * d).map(|k| e[k].mantissa_at(col[k % d] + row[k / d])).collect();
    for (step, j) in (1..d).enumerate() {
        let piv = (step..d)
            .max_by(|&a, &b| m[a * d + j].abs().total_cmp(&m[b * d + j].abs()))
            .unwrap_or(step);
        for k in 0..d {
            m.swap(step * d + k, piv * d + k);
        }
        rows.swap(step, piv);
        let pv = m[step * d + j];
        if pv == 0.0 {
            continue;
        }
        for i in step + 1..d {
            let f = m[i * d + j] / pv;
            for k in j..d {
                m[i * d + k] -= f * m[step * d + k];
            }
        }
    }
    rows[d - 1]
}

// Gauss–Jordan in double precision on the equilibrated matrix. Returns the
// determinant, the first row of the inverse (empty unless requested) and the
// infinity-norm condition number of the equilibrated matrix.
fn solve_f64(d: usize, e: &[LogScaled], want_row: bool) -> Option<(LogScaled, Vec<LogScaled>, f64)> {
    let (row, col) = equilibrate(d, e);
    let mut a: Vec<f64> = (0..d * d).map(|k| e[k].mantissa_at(col[k % d] + row[k / d])).collect();
    let norm = (0..d).map(|i| (0..d).map(|j| a[i * d + j].abs()).sum::<f64>()).fold(0.0, f64::max);
    let mut inv: Vec<f64> = (0..d * d).map(|k| if k % d == k / d { 1.0 } else { 0.0 }).collect();
    let mut det = LogScaled::ONE;
    for k in 0..d {
        let piv = (k..d).max_by(|&i, &j| a[i * d + k].abs().total_cmp(&a[j * d + k].abs()))?;
        let pv = a[piv * d + k];
        if pv == 0.0 || !pv.is_finite() {
            return None;
        }
        if piv != k {
            for j in 0..d {
                a.swap(k * d + j, piv * d + j);
                inv.swap(k * d + j, piv * d + j);
            }
            det = -det;
        }
        det = det * pv;
        for j in 0..d {
            a[k * d + j] /= pv;
            inv[k * d + j] /= pv;
        }
        for i in 0..d {
            if i == k {
                continue;
            }
            let f = a[i * d + k];
            if f == 0.0 {
                continue;
            }
            for j in 0..d {
                a[i * d + j] -= f * a[k * d + j];
                inv[i * d + j] -= f * inv[k * d + j];
            }
        }
    }
    let inv_norm = (0..d).map(|i| (0..d).map(|j| inv[i * d + j].abs()).sum::<f64>()).fold(0.0, f64::max);

    let total: i64 = row.iter().sum::<i64>() + col.iter().sum::<i64>();
    let det = det.mul_pow2(total);
    let first = if want_row {
        (0..d).map(|r| LogScaled::from_f64(inv[r]).mul_pow2(-col[0] - row[r])).collect()
    } else {
        Vec::new()
    };
    Some((det, first, norm * inv_norm))
}

// P_0..=P_top of P^{(a,b)} at x by the forward recurrence (stable for x >= 1).
fn jacobi_column(top: usize, a: u64, b: u64, x: &Big, prec: usize) -> Vec<Big> {
    let c = |v: u64| big_u64(v, prec);
    let mut out = Vec::with_capacity(top + 1);
    out.push(c(1));
    if top == 0 {
        return out;
    }
    // P_1 = (a+1) + (a+b+2)(x-1)/2
    let p1 = c(a + 1) + &(c(a + b + 2) * &(x - &c(1))) / &c(2);
    out.push(p1);
    for k in 1..top as u64 {
        let s = 2 * k + a + b;
        let c0 = c(2 * (k + 1) * (k + a + b + 1) * s);
        let lin = c((s + 2) * s) * x;
        let c1 = if a >= b { c(s + 1) * &(lin + c(a * a - b * b)) } else { c(s + 1) * &(lin - c(b * b - a * a)) };
        let c2 = c(2 * (k + a) * (k + b) * (s + 2));
        let k = k as usize;
        let next = &(&(&c1 * &out[k]) - &(&c2 * &out[k - 1])) / &c0;
        out.push(next);
    }
    out
}

fn build_extended(block: Block, d: usize, y: f64, cfg: &SpikedFConfig, free: Option<usize>, prec: usize) -> Vec<Big> {
    let (m, n, beta) = (u64::from(cfg.m()), u64::from(cfg.n()), u64::from(cfg.beta()));
    let x = &(big_u64(2, prec) / &big_f64(y, prec)) - &big_u64(1, prec);
    let zero = big_u64(0, prec);
    let mut e = vec![zero.clone(); d * d];
    // Psi_{i,j} = (m+i-1)_{j-2} P_{n+i-j}^{(j-2, beta+j-2)}
    let (shift, first_col) = match block {
        Block::Null => (1u64, 0usize),
        Block::FirstColumn => (0u64, 1usize),
    };
    for col in first_col..d {
        let j = col as u64 + 2 - first_col as u64;
        let a = j - 2;
        let top = (n + d as u64 + shift).saturating_sub(j) as usize;
        let polys = jacobi_column(top, a, beta + a, &x, prec);
        for r in 0..d {
            let i = r as u64 + 1 + shift;
            if n + i < j {
                continue;
            }
            let deg = (n + i - j) as usize;
            e[r * d + col] = &big_uint(rising_factorial(m + i - 1, j - 2), prec) * &polys[deg];
        }
    }
    if let Some(r) = free {
        e[r * d] = big_u64(1, prec);
    }
    e
}

fn solve_extended(
    block: Block,
    d: usize,
    y: f64,
    cfg: &SpikedFConfig,
    entries: &[LogScaled],
    kappa: Option<f64>,
) -> Result<(LogScaled, Vec<LogScaled>)> {
    let free = match block {
        Block::Null => None,
        Block::FirstColumn => (0..d).find(|&r| entries[r * d] == LogScaled::ONE),
    };
    let want_row = matches!(block, Block::FirstColumn);
    let run = |prec: usize| -> (LogScaled, Vec<LogScaled>) {
        let e = build_extended(block, d, y, cfg, free, prec);
        let (det, row) = det_and_first_inverse_row(d, &e, want_row);
        let det_l = to_logscaled(&det);
        let cof = row.map(|r| r.iter().map(|w| to_logscaled(&(&det * w))).collect()).unwrap_or_default();
        (det_l, cof)
    };
    if let Some(k) = kappa {
        // error ~ d kappa 2^-prec; leave 64 bits to spare
        return Ok(run(128 + k.log2().ceil() as usize));
    }
    let mut prec = 128 + 8 * d;
    let mut prev = run(prec);
    while prec <= MAX_PRECISION {
        prec += 64.max(prec / 2);
        let next = run(prec);
        let close = |a: LogScaled, b: LogScaled| {
            if b.is_zero() {
                return a.is_zero();
            }
            ((a - b).abs() / b.abs()).to_f64() <= EXTENDED_REL_ERROR
        };
        if close(prev.0, next.0) && prev.1.iter().zip(&next.1).all(|(&a, &b)| close(a, b)) {
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::NumericalInstability {
        x: y / (1.0 - y),
        detail: format!("determinant block did not stabilize below {MAX_PRECISION} bits"),
    })
}
