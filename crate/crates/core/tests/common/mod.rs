//! Exact rational oracles shared by the integration test targets.
#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

pub fn q(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite")
}

pub fn qi(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

/// Exact three-term recurrence for integer `a`, `b`.
pub fn jacobi_exact(n: u64, a: i64, b: i64, x: f64) -> f64 {
    let x = q(x);
    let mut prev = BigRational::one();
    if n == 0 {
        return 1.0;
    }
    let mut cur = qi(a + 1) + qi(a + b + 2) * (&x - qi(1)) / qi(2);
    for k in 2..=n as i64 {
        let s = 2 * k + a + b;
        let c1 = qi(2 * k * (k + a + b) * (s - 2));
        let c2 = qi(s - 1) * (qi(s * (s - 2)) * &x + qi(a * a - b * b));
        let c3 = qi(2 * (k + a - 1) * (k + b - 1) * s);
        let next = (c2 * &cur - c3 * &prev) / c1;
        prev = cur;
        cur = next;
    }
    cur.to_f64().unwrap()
}

pub fn binomial_f64(n: u64, k: u64) -> f64 {
    let b = (0..k).fold(BigInt::one(), |acc, j| acc * BigInt::from(n - j) / BigInt::from(j + 1));
    b.to_f64().unwrap()
}

/// Terminating `2F1(-nn, b; c; z)` summed exactly in rationals.
pub fn hyp_exact(nn: i64, b: f64, c: f64, z: f64) -> f64 {
    let (b, c, z) = (q(b), q(c), q(z));
    let mut term = BigRational::one();
    let mut sum = BigRational::zero();
    for k in 0..=nn {
        sum += &term;
        let kk = qi(k);
        term = term * (qi(-nn) + &kk) * (&b + &kk) * &z / ((&kk + qi(1)) * (&c + &kk));
    }
    sum.to_f64().unwrap()
}
