//! Exact integer combinatorics on arbitrary-precision integers.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

pub fn binomial(n: u64, r: u64) -> BigUint {
    if r > n {
        return BigUint::zero();
    }
    let r = r.min(n - r);
    let mut acc = BigUint::one();
    for i in 0..r {
        // acc * (n - i) is always divisible by (i + 1) at this point.
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

/// Number of sequences in `T^t` whose range is all of `T`, for `|T| = s`,
/// by inclusion-exclusion: `sum_j (-1)^j C(s, j) (s - j)^t`.
pub fn surjection_count(s: u64, t: u32) -> BigUint {
    let mut total = BigInt::zero();
    for j in 0..=s {
        let term = BigInt::from(binomial(s, j)) * BigInt::from(s - j).pow(t);
        if j % 2 == 0 {
            total += term;
        } else {
            total -= term;
        }
    }
    total.to_biguint().expect("surjection count is non-negative")
}

pub fn pow_u(base: u64, exp: u32) -> BigUint {
    BigUint::from(base).pow(exp)
}

pub fn ratio(num: BigUint, den: BigUint) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}
