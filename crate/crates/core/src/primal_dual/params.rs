use std::collections::HashMap;

use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::rational::{q_int, Q};

/// Which dual constraint form and raise rule an instance set uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RaiseRule {
    /// `α(a) + Σβ ≥ p`; raise `α` and each critical `β` by `s / (|π| + 1)`.
    Unit,
    /// `α(a) + h·Σβ ≥ p`; raise `α` by `δ = s / (1 + 2h|π|²)` and each
    /// critical `β` by `2|π|δ`. Only for heights at most 1/2.
    Narrow,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParamError {
    #[error("epsilon must lie strictly between 0 and 1")]
    EpsOutOfRange,
    #[error("critical set bound must be positive")]
    ZeroDelta,
    #[error("minimum height must lie in (0, 1/2]")]
    HminOutOfRange,
    #[error("narrow constant must be positive")]
    NonPositiveC,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlgoParams {
    pub eps: Q,
    pub rule: RaiseRule,
    /// Nominal critical set bound the satisfaction schedule is tuned for.
    pub delta: usize,
    pub xi: Q,
    pub h_min: Option<Q>,
    pub c: Option<Q>,
    /// Stages per epoch: smallest `b` with `ξ^b ≤ ε`.
    pub stages: u32,
}

impl AlgoParams {
    /// `ξ = 2(Δ+1) / (2(Δ+1) + 1)`.
    pub fn unit(delta: usize, eps: Q) -> Result<Self, ParamError> {
        check_eps(&eps)?;
        if delta == 0 {
            return Err(ParamError::ZeroDelta);
        }
        let two_d = 2 * (delta as i64 + 1);
        let xi = Q::new(two_d.into(), (two_d + 1).into());
        let stages = stage_count(&xi, &eps);
        Ok(AlgoParams {
            eps,
            rule: RaiseRule::Unit,
            delta,
            xi,
            h_min: None,
            c: None,
            stages,
        })
    }

    /// `ξ = c / (c + h_min)`, with `c` defaulting to `2(1 + 2Δ²)`.
    pub fn narrow(delta: usize, eps: Q, h_min: Q, c: Option<Q>) -> Result<Self, ParamError> {
        check_eps(&eps)?;
        if delta == 0 {
            return Err(ParamError::ZeroDelta);
        }
        if h_min <= Q::zero() || h_min > Q::new(1.into(), 2.into()) {
            return Err(ParamError::HminOutOfRange);
        }
        let c = c.unwrap_or_else(|| default_narrow_c(delta));
        if c <= Q::zero() {
            return Err(ParamError::NonPositiveC);
        }
        let xi = &c / (&c + &h_min);
        let stages = stage_count(&xi, &eps);
        Ok(AlgoParams {
            eps,
            rule: RaiseRule::Narrow,
            delta,
            xi,
            h_min: Some(h_min),
            c: Some(c),
            stages,
        })
    }

    /// Guaranteed satisfaction level `1 - ε` at the end of the first phase.
    pub fn lambda(&self) -> Q {
        Q::one() - &self.eps
    }
}

pub fn default_narrow_c(delta: usize) -> Q {
    let d = delta as i64;
    q_int(2 * (1 + 2 * d * d))
}

fn check_eps(eps: &Q) -> Result<(), ParamError> {
    if *eps <= Q::zero() || *eps >= Q::one() {
        return Err(ParamError::EpsOutOfRange);
    }
    Ok(())
}

/// Smallest `b >= 1` with `ξ^b ≤ ε`, for `0 < ξ < 1` and `0 < ε < 1`.
pub fn stage_count(xi: &Q, eps: &Q) -> u32 {
    let guess = match (xi.to_f64(), eps.to_f64()) {
        (Some(x), Some(e)) if x > 0.0 && x < 1.0 && e > 0.0 => (e.ln() / x.ln()).ceil(),
        _ => 1.0,
    };
    let mut b = if guess.is_finite() && guess >= 1.0 {
        guess as u32
    } else {
        1
    };
    while xi.pow(b as i32) > *eps {
        b += 1;
    }
    while b > 1 && xi.pow(b as i32 - 1) <= *eps {
        b -= 1;
    }
    b
}

/// Memoized powers of `ξ`; stage thresholds are `1 - ξ^j`.
#[derive(Clone, Debug)]
pub struct XiPowers {
    xi: Q,
    cache: HashMap<u32, Q>,
}

impl XiPowers {
    pub fn new(xi: Q) -> Self {
        XiPowers {
            xi,
            cache: HashMap::new(),
        }
    }

    pub fn get(&mut self, j: u32) -> &Q {
        let xi = &self.xi;
        self.cache.entry(j).or_insert_with(|| xi.pow(j as i32))
    }

    /// Smallest `j` in `lo..=hi` with `ξ^j < ratio`, if any.
    pub fn first_below(&mut self, ratio: &Q, lo: u32, hi: u32) -> Option<u32> {
        if lo > hi || self.get(hi) >= ratio {
            return None;
        }
        let (mut a, mut b) = (lo, hi);
        while a < b {
            let mid = a + (b - a) / 2;
            if self.get(mid) < ratio {
                b = mid;
            } else {
                a = mid + 1;
            }
        }
        Some(a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    #[test]
    fn unit_tree_and_line_xi() {
        let tree = AlgoParams::unit(6, q(1, 10)).unwrap();
        assert_eq!(tree.xi, q(14, 15));
        assert_eq!(tree.stages, 34);
        assert_eq!(tree.lambda(), q(9, 10));
        let line = AlgoParams::unit(3, q(1, 10)).unwrap();
        assert_eq!(line.xi, q(8, 9));
    }

    #[test]
    fn stage_count_is_minimal() {
        for (xi, eps) in [
            (q(14, 15), q(1, 10)),
            (q(8, 9), q(1, 10)),
            (q(1, 2), q(1, 4)),
            (q(1, 2), q(3, 10)),
            (q(99, 100), q(1, 2)),
        ] {
            let b = stage_count(&xi, &eps);
            assert!(xi.pow(b as i32) <= eps);
            assert!(b == 1 || xi.pow(b as i32 - 1) > eps);
        }
        // direct evaluation: (14/15)^33 > 1/10 >= (14/15)^34
        assert!(q(14, 15).pow(33) > q(1, 10));
        assert!(q(14, 15).pow(34) <= q(1, 10));
    }

    #[test]
    fn narrow_defaults() {
        let p = AlgoParams::narrow(6, q(1, 10), q(1, 20), None).unwrap();
        assert_eq!(p.c, Some(q_int(146)));
        assert_eq!(p.xi, q(146, 1) / (q(146, 1) + q(1, 20)));
        assert!(p.xi.pow(p.stages as i32) <= q(1, 10));
        assert!(AlgoParams::narrow(6, q(1, 10), q(3, 5), None).is_err());
        assert!(AlgoParams::unit(6, q(1, 1)).is_err());
        assert!(AlgoParams::unit(0, q(1, 2)).is_err());
    }

    #[test]
    fn first_below_matches_scan() {
        let mut powers = XiPowers::new(q(14, 15));
        for (num, den) in [(1, 2), (1, 30), (9, 10), (1, 1), (1, 1000)] {
            let r = q(num, den);
            let scan = (3..=34).find(|&j| q(14, 15).pow(j as i32) < r);
            assert_eq!(powers.first_below(&r, 3, 34), scan);
        }
    }
}
