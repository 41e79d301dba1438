//! Overflow-free signed scalars.
//!
//! A [`LogScaled`] holds `mantissa * 2^exponent` with `|mantissa|` in `[0.5, 1)`.
//! Products and quotients only touch the mantissa once, so factorial ratios
//! spanning thousands of decades keep full double precision. The natural log
//! of the magnitude is available through [`LogScaled::ln_abs`].

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::OnceLock;

#[derive(Clone, Copy, PartialEq)]
pub struct LogScaled {
    mant: f64,
    exp: i64,
}

/// Splits a finite nonzero `x` into `(m, e)` with `x = m * 2^e`, `0.5 <= |m| < 1`.
fn frexp(x: f64) -> (f64, i64) {
    if x == 0.0 || !x.is_finite() {
        return (x, 0);
    }
    let bits = x.to_bits();
    let raw_exp = ((bits >> 52) & 0x7ff) as i64;
    if raw_exp == 0 {
        // subnormal: renormalize first
        let (m, e) = frexp(x * f64::from_bits(0x4350_0000_0000_0000)); // 2^54
        return (m, e - 54);
    }
    let m = f64::from_bits((bits & !(0x7ff << 52)) | (1022 << 52));
    (m, raw_exp - 1022)
}

/// `m * 2^e` without intermediate overflow; saturates to 0 or infinity.
fn ldexp(m: f64, e: i64) -> f64 {
    let mut x = m;
    let mut e = e;
    while e > 1000 {
        x *= f64::from_bits(((1000 + 1023) as u64) << 52);
        e -= 1000;
        if x.is_infinite() {
            return x;
        }
    }
    while e < -1000 {
        x *= f64::from_bits(((-1000 + 1023) as u64) << 52);
        e += 1000;
        if x == 0.0 {
            return x;
        }
    }
    x * f64::from_bits(((e + 1023) as u64) << 52)
}

impl LogScaled {
    pub const ZERO: LogScaled = LogScaled { mant: 0.0, exp: 0 };
    pub const ONE: LogScaled = LogScaled { mant: 0.5, exp: 1 };

    /// Panics on NaN or infinite input.
    pub fn from_f64(x: f64) -> Self {
        assert!(x.is_finite(), "LogScaled::from_f64 on non-finite {x}");
        let (mant, exp) = frexp(x);
        LogScaled { mant, exp }
    }

    /// Builds `sign * exp(ln_abs)`.
    pub fn from_ln(sign: i32, ln_abs: f64) -> Self {
        if sign == 0 || ln_abs == f64::NEG_INFINITY {
            return Self::ZERO;
        }
        let log2 = ln_abs / std::f64::consts::LN_2;
        let e = log2.floor();
        let frac = (ln_abs - e * std::f64::consts::LN_2).exp();
        let v = LogScaled::from_f64(frac * f64::from(sign.signum()));
        LogScaled { mant: v.mant, exp: v.exp + e as i64 }
    }

    pub fn to_f64(self) -> f64 {
        ldexp(self.mant, self.exp)
    }

    /// `-1`, `0` or `+1`.
    pub fn sign(self) -> i32 {
        if self.mant > 0.0 {
            1
        } else if self.mant < 0.0 {
            -1
        } else {
            0
        }
    }

    /// Natural log of the magnitude; `-inf` for zero.
    pub fn ln_abs(self) -> f64 {
        if self.mant == 0.0 {
            return f64::NEG_INFINITY;
        }
        self.mant.abs().ln() + self.exp as f64 * std::f64::consts::LN_2
    }

    /// Base-2 exponent of the magnitude (`|x|` lies in `[2^(e-1), 2^e)`).
    pub fn exponent(self) -> i64 {
        self.exp
    }

    pub fn is_zero(self) -> bool {
        self.mant == 0.0
    }

    pub fn abs(self) -> Self {
        LogScaled { mant: self.mant.abs(), exp: self.exp }
    }

    /// `self * 2^e`, exact.
    pub fn mul_pow2(self, e: i64) -> Self {
        if self.is_zero() {
            return self;
        }
        LogScaled { mant: self.mant, exp: self.exp + e }
    }

    pub fn recip(self) -> Self {
        Self::ONE / self
    }

    pub fn powi(self, k: i64) -> Self {
        if k == 0 {
            return Self::ONE;
        }
        if self.is_zero() {
            assert!(k > 0, "zero raised to negative power");
            return Self::ZERO;
        }
        let mut base = if k < 0 { self.recip() } else { self };
        let mut k = k.unsigned_abs();
        let mut acc = Self::ONE;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            k >>= 1;
        }
        acc
    }

    /// Mantissa rescaled to a caller-chosen common exponent.
    pub(crate) fn mantissa_at(self, exp: i64) -> f64 {
        ldexp(self.mant, self.exp - exp)
    }

    fn normalize(mant: f64, exp: i64) -> Self {
        if mant == 0.0 {
            return Self::ZERO;
        }
        let (m, e) = frexp(mant);
        LogScaled { mant: m, exp: exp + e }
    }

    /// Compares magnitudes.
    pub fn cmp_abs(self, other: Self) -> Ordering {
        match (self.is_zero(), other.is_zero()) {
            (true, true) => Ordering::Equal,
            (true, false) => Ordering::Less,
            (false, true) => Ordering::Greater,
            _ => self
                .exp
                .cmp(&other.exp)
                .then(self.mant.abs().total_cmp(&other.mant.abs())),
        }
    }
}

impl Default for LogScaled {
    fn default() -> Self {
        Self::ZERO
    }
}

impl fmt::Debug for LogScaled {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LogScaled({} * 2^{})", self.mant, self.exp)
    }
}

impl fmt::Display for LogScaled {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = self.to_f64();
        if v.is_finite() && (v == 0.0 || v.abs() > 1e-300) {
            write!(f, "{v}")
        } else {
            let sign = if self.sign() < 0 { "-" } else { "" };
            write!(f, "{sign}exp({})", self.ln_abs())
        }
    }
}

impl From<f64> for LogScaled {
    fn from(x: f64) -> Self {
        LogScaled::from_f64(x)
    }
}

impl Mul for LogScaled {
    type Output = LogScaled;
    fn mul(self, rhs: Self) -> Self {
        if self.is_zero() || rhs.is_zero() {
            return Self::ZERO;
        }
        Self::normalize(self.mant * rhs.mant, self.exp + rhs.exp)
    }
}

impl Mul<f64> for LogScaled {
    type Output = LogScaled;
    fn mul(self, rhs: f64) -> Self {
        self * LogScaled::from_f64(rhs)
    }
}

impl Div for LogScaled {
    type Output = LogScaled;
    fn div(self, rhs: Self) -> Self {
        assert!(!rhs.is_zero(), "LogScaled division by zero");
        if self.is_zero() {
            return Self::ZERO;
        }
        Self::normalize(self.mant / rhs.mant, self.exp - rhs.exp)
    }
}

impl Div<f64> for LogScaled {
    type Output = LogScaled;
    fn div(self, rhs: f64) -> Self {
        self / LogScaled::from_f64(rhs)
    }
}

impl Neg for LogScaled {
    type Output = LogScaled;
    fn neg(self) -> Self {
        LogScaled { mant: -self.mant, exp: self.exp }
    }
}

impl Add for LogScaled {
    type Output = LogScaled;
    fn add(self, rhs: Self) -> Self {
        if self.is_zero() {
            return rhs;
        }
        if rhs.is_zero() {
            return self;
        }
        let e = self.exp.max(rhs.exp);
        Self::normalize(self.mantissa_at(e) + rhs.mantissa_at(e), e)
    }
}

impl Sub for LogScaled {
    type Output = LogScaled;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

/// Compensated sum of scaled terms, tracking the magnitude of what was added.
///
/// All terms are brought to the largest exponent seen and accumulated with
/// Neumaier's variant of Kahan summation.
#[derive(Debug, Clone, Default)]
pub struct ScaledSum {
    terms: Vec<LogScaled>,
}

impl ScaledSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, t: LogScaled) {
        if !t.is_zero() {
            self.terms.push(t);
        }
    }

    /// Returns `(sum, sum of magnitudes)`.
    pub fn finish(&self) -> (LogScaled, LogScaled) {
        let Some(e) = self.terms.iter().map(|t| t.exp).max() else {
            return (LogScaled::ZERO, LogScaled::ZERO);
        };
        let mut sum = 0.0;
        let mut comp = 0.0;
        let mut abs = 0.0;
        for t in &self.terms {
            let v = t.mantissa_at(e);
            abs += v.abs();
            let s = sum + v;
            if sum.abs() >= v.abs() {
                comp += (sum - s) + v;
            } else {
                comp += (v - s) + sum;
            }
            sum = s;
        }
        (
            LogScaled::normalize(sum + comp, e),
            LogScaled::normalize(abs, e),
        )
    }

    pub fn sum(&self) -> LogScaled {
        self.finish().0
    }
}

impl FromIterator<LogScaled> for ScaledSum {
    fn from_iter<I: IntoIterator<Item = LogScaled>>(iter: I) -> Self {
        let mut s = ScaledSum::new();
        for t in iter {
            s.push(t);
        }
        s
    }
}

/// Plain compensated (Neumaier) summation of `f64` terms.
pub fn neumaier_sum<I: IntoIterator<Item = f64>>(terms: I) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for v in terms {
        let s = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - s) + v;
        } else {
            comp += (v - s) + sum;
        }
        sum = s;
    }
    sum + comp
}

const FACTORIAL_TABLE: usize = 4096;

fn factorial_table() -> &'static [LogScaled] {
    static TABLE: OnceLock<Vec<LogScaled>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = Vec::with_capacity(FACTORIAL_TABLE);
        let mut acc = LogScaled::ONE;
        t.push(acc);
        for k in 1..FACTORIAL_TABLE {
            acc = acc * k as f64;
            t.push(acc);
        }
        t
    })
}

/// `n!` in scaled form.
pub fn factorial(n: u64) -> LogScaled {
    let table = factorial_table();
    if (n as usize) < table.len() {
        return table[n as usize];
    }
    let mut acc = table[table.len() - 1];
    for k in table.len() as u64..=n {
        acc = acc * k as f64;
    }
    acc
}
