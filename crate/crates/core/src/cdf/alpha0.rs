use dashu_int::UBig;

use super::{check_x, Probability, SpikedFConfig, YPoint, MAX_M};
use crate::error::{Error, Result};
use crate::multiprec::{big_f64, big_uint, rising_factorial, to_logscaled, Big};
use crate::special::{factorial, pochhammer, LogScaled, ScaledSum};

/// Cancellation beyond which the series is summed again in extended precision.
const EXTENDED_LOSS: f64 = 1e4;
const MAX_EXTENDED_BITS: usize = 16_384;

/// Largest `m` accepted by the closed form. Its cost is `O(n^2 + m)`, so it
/// reaches further than the determinant routes.
pub const MAX_M_CLOSED_FORM: u32 = 4096;

/// Checks dimensions and spike strength for the `p = m` closed forms.
pub(crate) fn check_alpha0_dims(m: u32, n: u32, eta: f64) -> Result<()> {
    if m <= MAX_M || n == 0 || n >= m {
        return SpikedFConfig::new(m, n, m, eta).map(|_| ());
    }
    if m > MAX_M_CLOSED_FORM || n > MAX_M {
        return Err(Error::InvalidConfig(format!(
            "closed form supports m <= {MAX_M_CLOSED_FORM} and n <= {MAX_M} (got m = {m}, n = {n})"
        )));
    }
    if !(eta >= 0.0) || !eta.is_finite() {
        return Err(Error::InvalidConfig(format!("eta must be finite and nonnegative, got {eta}")));
    }
    Ok(())
}

/// Closed-form spiked c.d.f. for `p = m`, with no determinant.
///
/// The `2F1(n+1, k+1; k+2; -eta x/(1+eta+x))` factors are expanded into their
/// finite Euler-transformed series.
pub fn cdf_alpha0_spiked(x: f64, m: u32, n: u32, eta: f64) -> Result<Probability> {
    check_alpha0_dims(m, n, eta)?;
    if !(eta > 0.0) {
        return Err(Error::InvalidConfig("closed form requires eta > 0".into()));
    }
    check_x(x)?;
    if x == 0.0 {
        return Probability::new(0.0);
    }
    if x.is_infinite() {
        return Probability::new(1.0);
    }
    let (mi, ni) = (i64::from(m), i64::from(n));
    let (mu, nu) = (u64::from(m), u64::from(n));
    let pt = YPoint::from_x(x);
    let lx = LogScaled::from_f64(x);
    let l1x = LogScaled::from_f64(1.0 + x);
    let le = LogScaled::from_f64(eta);
    let l1e = LogScaled::from_f64(1.0 + eta);
    let l1ex = LogScaled::from_f64(1.0 + eta + x);
    let w = eta * x / (1.0 + eta + x);
    // (1+eta+x) / ((1+eta)(1+x)) = 1 - c_eta y
    let euler = LogScaled::from_f64(pt.one_minus_cy(eta)).powi(ni);

    let mut s1 = ScaledSum::new();
    for k in 0..nu {
        let top = nu - k - 1;
        let mut inner = ScaledSum::new();
        let mut wl = LogScaled::ONE;
        for l in 0..=top {
            inner.push(factorial(top) / factorial(top - l) * wl / pochhammer((k + 2) as f64, l));
            wl = wl * w;
        }
        let f = euler * inner.sum();
        let t = factorial(mu + k - 1) / (factorial(k) * factorial(k + 1) * factorial(top)) * f;
        s1.push(if k % 2 == 1 { -t } else { t });
    }
    let (s1v, s1abs) = s1.finish();
    let p1 = factorial(nu) * l1e.powi(mi) * lx.powi(mi * (ni - 1) + 1)
        / (factorial(mu - 1) * le.powi(mi - 1) * l1x.powi(mi * ni - mi - ni) * l1ex.powi(ni + 1));

    let c = LogScaled::from_f64(eta / (1.0 + eta));
    let y = LogScaled::from_f64(pt.y);
    let mut s2 = ScaledSum::new();
    for k in 0..(mu - nu) {
        let ki = k as i64;
        s2.push(factorial(nu + k - 1) / (factorial(k) * c.powi(ki)) * y.powi(ni * (mi - 1) - ki));
    }
    let p2 = factorial(nu - 1).recip() * le.powi(-ni);
    let t2 = if n % 2 == 1 { -(p2 * s2.sum()) } else { p2 * s2.sum() };
    let t1 = p1 * s1v;

    let total = t1 + t2;
    let bound = (p1 * s1abs).abs() + t2.abs();
    let loss = if total.is_zero() { f64::INFINITY } else { (bound / total.abs()).to_f64() };
    if loss <= EXTENDED_LOSS {
        return Probability::from_cdf(total.to_f64(), x);
    }
    // Start from the observed loss; raise precision until the digits lost stay well inside it.
    let mut lost_bits = if loss.is_finite() { loss.log2().ceil() as usize } else { 128 };
    loop {
        let prec = 96 + lost_bits;
        if prec > MAX_EXTENDED_BITS {
            return Err(Error::NumericalInstability {
                x,
                detail: format!("more than {MAX_EXTENDED_BITS} bits of cancellation"),
            });
        }
        let (total, bound) = extended(x, m, n, eta, prec);
        let ratio = to_logscaled(&bound) / to_logscaled(&total).abs();
        let needed = if total.repr().significand().is_zero() {
            usize::MAX
        } else {
            (ratio.ln_abs().max(0.0) / std::f64::consts::LN_2).ceil() as usize
        };
        if needed.saturating_add(64) <= prec {
            return Probability::from_cdf(to_logscaled(&total).to_f64(), x);
        }
        lost_bits = needed.min(2 * MAX_EXTENDED_BITS).max(2 * lost_bits);
    }
}

fn powi(b: &Big, e: i64) -> Big {
    let mut base = b.clone();
    let mut acc = Big::ONE.with_precision(b.precision()).value();
    let mut k = e.unsigned_abs();
    while k > 0 {
        if k & 1 == 1 {
            acc = &acc * &base;
        }
        base = &base * &base;
        k >>= 1;
    }
    if e < 0 {
        Big::ONE.with_precision(b.precision()).value() / acc
    } else {
        acc
    }
}

/// The same series at `prec` bits: returns the value and the sum of absolute terms.
fn extended(x: f64, m: u32, n: u32, eta: f64, prec: usize) -> (Big, Big) {
    let (mi, ni) = (i64::from(m), i64::from(n));
    let (mu, nu) = (u64::from(m), u64::from(n));
    let fact = |k: u64| big_uint(rising_factorial(1, k), prec);
    let int = |k: u64| big_uint(UBig::from(k), prec);
    let one = int(1);
    let bx = big_f64(x, prec);
    let be = big_f64(eta, prec);
    let b1x = &one + &bx;
    let b1e = &one + &be;
    let b1ex = &b1e + &bx;
    let w = &be * &bx / &b1ex;
    let euler = powi(&(&b1ex / (&b1e * &b1x)), ni);
    let mut s1 = int(0);
    let mut s1abs = int(0);
    for k in 0..nu {
        let top = nu - k - 1;
        let mut inner = int(0);
        let mut term = one.clone();
        for l in 0..=top {
            inner += &term;
            term = term * &w * int(top - l) / int(k + 2 + l);
        }
        let t = fact(mu + k - 1) / (fact(k) * fact(k + 1) * fact(top)) * &euler * inner;
        s1abs += &t;
        if k % 2 == 1 {
            s1 -= t;
        } else {
            s1 += t;
        }
    }
    let p1 = fact(nu) * powi(&b1e, mi) * powi(&bx, mi * (ni - 1) + 1)
        / (fact(mu - 1) * powi(&be, mi - 1) * powi(&b1x, mi * ni - mi - ni) * powi(&b1ex, ni + 1));
    let c = &be / &b1e;
    let y = &bx / &b1x;
    let mut s2 = int(0);
    for k in 0..(mu - nu) {
        s2 += fact(nu + k - 1) / fact(k) * powi(&c, -(k as i64)) * powi(&y, ni * (mi - 1) - k as i64);
    }
    let t2 = s2 / (fact(nu - 1) * powi(&be, ni));
    let t1 = &p1 * s1;
    let bound = &p1 * s1abs + &t2;
    let total = if n % 2 == 1 { t1 - t2 } else { t1 + t2 };
    (total, bound)
}
