//! Extended-precision elimination for badly conditioned determinant blocks.

use dashu_float::round::mode::HalfEven;
use dashu_float::FBig;
use dashu_int::ops::{Abs, BitTest, UnsignedAbs};
use dashu_int::UBig;

use crate::special::LogScaled;

pub(crate) type Big = FBig<HalfEven, 2>;

pub(crate) fn big_f64(x: f64, prec: usize) -> Big {
    Big::try_from(x).expect("finite").with_precision(prec).value()
}

pub(crate) fn big_uint(v: UBig, prec: usize) -> Big {
    Big::from(v).with_precision(prec).value()
}

pub(crate) fn big_u64(v: u64, prec: usize) -> Big {
    big_uint(UBig::from(v), prec)
}

/// `(a)_k` for a positive integer `a`, exactly.
pub(crate) fn rising_factorial(a: u64, k: u64) -> UBig {
    (0..k).fold(UBig::ONE, |acc, j| acc * UBig::from(a + j))
}

pub(crate) fn to_logscaled(x: &Big) -> LogScaled {
    let repr = x.repr();
    let sig = repr.significand();
    if sig.is_zero() {
        return LogScaled::ZERO;
    }
    let bits = sig.clone().unsigned_abs().bit_len();
    let shift = bits.saturating_sub(62);
    let top: i64 = i64::try_from(sig >> shift).expect("62-bit significand");
    LogScaled::from_f64(top as f64).mul_pow2(repr.exponent() as i64 + shift as i64)
}

fn is_zero(x: &Big) -> bool {
    x.repr().significand().is_zero()
}

fn abs_gt(a: &Big, b: &Big) -> bool {
    a.clone().abs() > b.clone().abs()
}

/// Determinant of `m` (row-major) and, optionally, the first row of `m^{-1}`.
///
/// Gaussian elimination with partial pivoting on `m^T`, carrying the right
/// hand side `e_0` so that the solution is the first row of the inverse.
pub(crate) fn det_and_first_inverse_row(dim: usize, m: &[Big], want_row: bool) -> (Big, Option<Vec<Big>>) {
    let prec = m.iter().map(|v| v.precision()).max().unwrap_or(64);
    let zero = Big::ZERO.with_precision(prec).value();
    let one = Big::ONE.with_precision(prec).value();
    // a = m^T
    let mut a: Vec<Big> = (0..dim * dim).map(|k| m[(k % dim) * dim + k / dim].clone()).collect();
    let mut rhs: Vec<Big> = (0..dim).map(|i| if i == 0 { one.clone() } else { zero.clone() }).collect();
    let mut det = one.clone();
    for k in 0..dim {
        let mut piv = k;
        for i in k + 1..dim {
            if abs_gt(&a[i * dim + k], &a[piv * dim + k]) {
                piv = i;
            }
        }
        if is_zero(&a[piv * dim + k]) {
            return (zero, None);
        }
        if piv != k {
            for j in 0..dim {
                a.swap(k * dim + j, piv * dim + j);
            }
            rhs.swap(k, piv);
            det = -det;
        }
        let pv = a[k * dim + k].clone();
        det = &det * &pv;
        for i in k + 1..dim {
            if is_zero(&a[i * dim + k]) {
                continue;
            }
            let f = &a[i * dim + k] / &pv;
            for j in k + 1..dim {
                let t = &f * &a[k * dim + j];
                a[i * dim + j] = &a[i * dim + j] - &t;
            }
            let t = &f * &rhs[k];
            rhs[i] = &rhs[i] - &t;
        }
    }
    if !want_row {
        return (det, None);
    }
    let mut w = vec![zero; dim];
    for i in (0..dim).rev() {
        let mut s = rhs[i].clone();
        for j in i + 1..dim {
            let t = &a[i * dim + j] * &w[j];
            s = &s - &t;
        }
        w[i] = &s / &a[i * dim + i];
    }
    (det, Some(w))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conversion_round_trips() {
        for &x in &[1.0, -0.3, 6.02e23, 1e-200] {
            assert_eq!(to_logscaled(&big_f64(x, 128)).to_f64(), x);
        }
        let big = big_u64(10, 256).powi(1000.into());
        assert!((to_logscaled(&big).ln_abs() - 1000.0 * 10f64.ln()).abs() < 1e-9);
        assert!(to_logscaled(&Big::ZERO).is_zero());
    }

    #[test]
    fn small_determinant_and_inverse_row() {
        let p = 128;
        let m: Vec<Big> = [2.0, 1.0, 1.0, 3.0].iter().map(|&v| big_f64(v, p)).collect();
        let (d, row) = det_and_first_inverse_row(2, &m, true);
        assert!((to_logscaled(&d).to_f64() - 5.0).abs() < 1e-15);
        let row: Vec<f64> = row.unwrap().iter().map(|v| to_logscaled(v).to_f64()).collect();
        assert!((row[0] - 0.6).abs() < 1e-15 && (row[1] + 0.2).abs() < 1e-15);
        assert_eq!(rising_factorial(3, 4), UBig::from(360u32));
    }
}
