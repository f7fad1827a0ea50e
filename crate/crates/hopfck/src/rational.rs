//! Exact rational scalars.
//!
//! Every coefficient in the crate is a `Q` (arbitrary-precision rational);
//! no floating point is used anywhere.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// The scalar field: arbitrary-precision rationals.
pub type Q = num_rational::BigRational;

/// Integer as a rational.
pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

/// The fraction `num / den`.
pub fn qr(num: i64, den: i64) -> Q {
    Q::new(BigInt::from(num), BigInt::from(den))
}

/// Renders `p/q`, or just `p` for integers.
pub fn format_q(x: &Q) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Parses `p`, `-p/q`, with optional surrounding whitespace.
pub fn parse_q(s: &str) -> Result<Q> {
    let t = s.trim();
    let bad = |msg: String| Error::Parse { pos: 0, msg };
    match t.split_once('/') {
        Some((num, den)) => {
            let n: BigInt = num
                .trim()
                .parse()
                .map_err(|e| bad(format!("bad numerator {num:?}: {e}")))?;
            let d: BigInt = den
                .trim()
                .parse()
                .map_err(|e| bad(format!("bad denominator {den:?}: {e}")))?;
            if d.is_zero() {
                return Err(bad(format!("zero denominator in {t:?}")));
            }
            Ok(Q::new(n, d))
        }
        None => {
            let n: BigInt = t.parse().map_err(|e| bad(format!("bad rational {t:?}: {e}")))?;
            Ok(Q::from_integer(n))
        }
    }
}

/// `n!` as a big integer.
pub fn factorial(n: usize) -> BigInt {
    let mut acc = BigInt::one();
    for k in 2..=n {
        acc *= BigInt::from(k);
    }
    acc
}

/// Integer binomial coefficient `C(n, k)`.
pub fn binomial(n: usize, k: usize) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let mut acc = BigInt::one();
    for j in 0..k {
        acc = acc * BigInt::from(n - j) / BigInt::from(j + 1);
    }
    acc
}

/// Generalized binomial coefficient `C(e, k)` for a rational exponent.
pub fn binomial_q(e: &Q, k: usize) -> Q {
    let mut acc = Q::one();
    for j in 0..k {
        acc *= e - q(j as i64);
        acc /= q((j + 1) as i64);
    }
    acc
}

/// Falling factorial `x (x-1) ... (x-k+1)` of an integer argument.
pub fn falling(x: i64, k: usize) -> Q {
    let mut acc = Q::one();
    for j in 0..k {
        acc *= q(x - j as i64);
    }
    acc
}

/// The first rational `p/q` primes, used for "generic" character values.
pub fn nth_prime(k: usize) -> i64 {
    const SMALL: [i64; 25] = [
        2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83,
        89, 97,
    ];
    if k < SMALL.len() {
        return SMALL[k];
    }
    let mut candidate = SMALL[SMALL.len() - 1];
    let mut count = SMALL.len() - 1;
    while count < k {
        candidate += 2;
        let mut is_prime = true;
        let mut d = 3;
        while d * d <= candidate {
            if candidate % d == 0 {
                is_prime = false;
                break;
            }
            d += 2;
        }
        if is_prime {
            count += 1;
        }
    }
    candidate
}

/// True if `x` is a non-negative integer power of two; returns the exponent.
pub fn exact_log2(x: &Q) -> Option<u32> {
    if !x.denom().is_one() || !x.numer().is_positive() {
        return None;
    }
    let n = x.numer();
    let bits = n.bits();
    let mut probe = BigInt::one();
    probe <<= (bits - 1) as usize;
    if &probe == n {
        Some((bits - 1) as u32)
    } else {
        None
    }
}
