//! Exact rational helpers shared by the dual engine and the oracle.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Exact rational number used for profits, heights and dual variables.
pub type Q = BigRational;

pub fn q(num: i64, den: i64) -> Q {
    Q::new(BigInt::from(num), BigInt::from(den))
}

pub fn q_int(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

/// Bits needed to write the numerator and denominator in binary.
pub fn bit_len(x: &Q) -> u64 {
    x.numer().bits().max(1) + x.denom().bits().max(1)
}

pub fn min_q<'a>(a: &'a Q, b: &'a Q) -> &'a Q {
    if a <= b {
        a
    } else {
        b
    }
}

/// Least common multiple of the denominators, as an `i128` when it fits.
pub fn lcm_of_denominators<'a>(values: impl IntoIterator<Item = &'a Q>) -> Option<i128> {
    let mut acc = BigInt::one();
    for v in values {
        acc = acc.lcm(v.denom());
    }
    acc.to_i128()
}

/// `x * scale` as an integer; `None` when `scale` does not clear the denominator.
pub fn scaled_integer(x: &Q, scale: i128) -> Option<i128> {
    let scaled = x * Q::from_integer(BigInt::from(scale));
    if !scaled.is_integer() {
        return None;
    }
    scaled.to_integer().to_i128()
}

/// Largest `k` with `2^k <= x`, for `x >= 1`.
pub fn floor_log2(x: &Q) -> u32 {
    assert!(x >= &Q::one(), "floor_log2 needs x >= 1");
    let int = x.to_integer();
    (int.bits() - 1) as u32
}

/// Smallest `k` with `2^k >= x`, for `x >= 1`.
pub fn ceil_log2(x: &Q) -> u32 {
    let f = floor_log2(x);
    if Q::from_integer(BigInt::one() << f) == *x {
        f
    } else {
        f + 1
    }
}

pub fn is_positive(x: &Q) -> bool {
    x.is_positive()
}

pub fn is_zero(x: &Q) -> bool {
    x.is_zero()
}

/// Decimal rendering used by the trace format.
pub fn to_parts(x: &Q) -> (String, String) {
    (x.numer().to_string(), x.denom().to_string())
}

pub fn from_parts(num: &str, den: &str) -> Option<Q> {
    let n: BigInt = num.parse().ok()?;
    let d: BigInt = den.parse().ok()?;
    if d.is_zero() {
        return None;
    }
    Some(Q::new(n, d))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn logs() {
        assert_eq!(floor_log2(&q_int(1)), 0);
        assert_eq!(ceil_log2(&q_int(1)), 0);
        assert_eq!(floor_log2(&q_int(8)), 3);
        assert_eq!(ceil_log2(&q_int(8)), 3);
        assert_eq!(floor_log2(&q(17, 2)), 3);
        assert_eq!(ceil_log2(&q(17, 2)), 4);
    }

    #[test]
    fn scaling() {
        assert_eq!(lcm_of_denominators([&q(1, 4), &q(2, 6)]), Some(12));
        assert_eq!(scaled_integer(&q(1, 4), 12), Some(3));
        assert_eq!(scaled_integer(&q(1, 5), 12), None);
    }

    #[test]
    fn parts_round_trip() {
        let x = q(-7, 12);
        let (n, d) = to_parts(&x);
        assert_eq!(from_parts(&n, &d), Some(x));
    }
}
