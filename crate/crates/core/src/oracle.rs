//! Exact optima for small instance sets, used to certify approximation ratios
//! and weak duality.

use std::collections::HashMap;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::model::{
    check_feasible, DemandInstance, FeasibilityTracker, HeightMode, InstanceId, Problem, Solution,
};
use crate::rational::Q;

/// Largest instance count the branch and bound accepts by default.
pub const ORACLE_CAP: usize = 24;
/// Largest instance count for full subset enumeration.
pub const ENUMERATION_CAP: usize = 16;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("{count} instances exceed the oracle cap of {cap}")]
    TooLarge { count: usize, cap: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleResult {
    pub optimum: Q,
    pub solution: Solution,
    /// Search nodes visited (subsets, for enumeration).
    pub nodes: u64,
}

struct Search<'a> {
    order: Vec<InstanceId>,
    units: Vec<i128>,
    demand_bit: Vec<u32>,
    tracker: FeasibilityTracker<'a>,
    current: Vec<InstanceId>,
    best: i128,
    best_set: Vec<InstanceId>,
    nodes: u64,
}

impl Search<'_> {
    /// Current profit plus, for every demand not yet used, its best
    /// remaining instance.
    fn bound(&self, i: usize, used: u32, profit: i128) -> i128 {
        let mut seen = used;
        let mut total = profit;
        for j in i..self.order.len() {
            let bit = self.demand_bit[j];
            if seen & bit == 0 {
                seen |= bit;
                total += self.units[j];
            }
        }
        total
    }

    fn go(&mut self, i: usize, used: u32, profit: i128) {
        self.nodes += 1;
        if profit > self.best {
            self.best = profit;
            self.best_set = self.current.clone();
        }
        if i == self.order.len() || self.bound(i, used, profit) <= self.best {
            return;
        }
        let id = self.order[i];
        if used & self.demand_bit[i] == 0 && self.tracker.can_add(id) {
            self.tracker.add(id);
            self.current.push(id);
            self.go(i + 1, used | self.demand_bit[i], profit + self.units[i]);
            self.current.pop();
            self.tracker.remove(id);
        }
        self.go(i + 1, used, profit);
    }
}

/// Branch and bound over `ids`, most profitable first, including before
/// excluding. Feasibility follows `mode`.
pub fn exact_optimum(
    problem: &Problem,
    instances: &[DemandInstance],
    ids: &[InstanceId],
    mode: HeightMode,
    cap: usize,
) -> Result<OracleResult, OracleError> {
    if ids.len() > cap {
        return Err(OracleError::TooLarge {
            count: ids.len(),
            cap,
        });
    }
    let mut order = ids.to_vec();
    order.sort_by(|&a, &b| {
        instances[b]
            .profit_units
            .cmp(&instances[a].profit_units)
            .then(a.cmp(&b))
    });
    let mut demand_slot: HashMap<usize, u32> = HashMap::new();
    let demand_bit = order
        .iter()
        .map(|&id| {
            let next = demand_slot.len() as u32;
            1u32 << *demand_slot.entry(instances[id].demand).or_insert(next)
        })
        .collect();
    let mut search = Search {
        units: order.iter().map(|&id| instances[id].profit_units).collect(),
        order,
        demand_bit,
        tracker: FeasibilityTracker::new(problem, instances, mode),
        current: Vec::new(),
        best: 0,
        best_set: Vec::new(),
        nodes: 0,
    };
    search.go(0, 0, 0);
    let solution = Solution::from_ids(instances, search.best_set);
    Ok(OracleResult {
        optimum: solution.profit.clone(),
        solution,
        nodes: search.nodes,
    })
}

/// Checks every subset of `ids` with the full feasibility checker.
pub fn enumerate_optimum(
    problem: &Problem,
    instances: &[DemandInstance],
    ids: &[InstanceId],
    mode: HeightMode,
) -> Result<OracleResult, OracleError> {
    if ids.len() > ENUMERATION_CAP {
        return Err(OracleError::TooLarge {
            count: ids.len(),
            cap: ENUMERATION_CAP,
        });
    }
    let mut best = Solution::empty();
    let total = 1u64 << ids.len();
    for mask in 0..total {
        let chosen = ids
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, &id)| id);
        let sol = Solution::from_ids(instances, chosen);
        if sol.profit > best.profit && check_feasible(problem, instances, &sol, mode).is_ok() {
            best = sol;
        }
    }
    Ok(OracleResult {
        optimum: best.profit.clone(),
        solution: best,
        nodes: total,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatioCheck {
    /// `Opt / p(S)`; `None` when `p(S) = 0 < Opt`.
    pub ratio: Option<Q>,
    pub bound: Q,
    pub holds: bool,
}

/// Holds when `p(S) · bound ≥ Opt`.
pub fn certify_ratio(profit: &Q, optimum: &Q, bound: &Q) -> RatioCheck {
    let ratio = if profit.is_zero() {
        optimum.is_zero().then(Q::one)
    } else {
        Some(optimum / profit)
    };
    RatioCheck {
        ratio,
        bound: bound.clone(),
        holds: profit * bound >= *optimum,
    }
}

/// Weak duality: a feasible dual objective never falls below the optimum.
pub fn verify_weak_duality(scaled_objective: &Q, optimum: &Q) -> bool {
    scaled_objective >= optimum
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{generate, GenParams, HeightProfile};
    use crate::model::{expand_demand_instances, fixtures, Mode};
    use crate::rational::q;
    use proptest::prelude::*;

    #[test]
    fn bottleneck_optimum_and_witness() {
        let (p, inst) = fixtures::bottleneck_problem([q(2, 5), q(7, 10), q(3, 10)]);
        let ids = [0, 1, 2];
        let r = exact_optimum(&p, &inst, &ids, HeightMode::Height, ORACLE_CAP).unwrap();
        assert_eq!(r.optimum, q(2, 1));
        assert_eq!(r.solution.selected.iter().copied().collect::<Vec<_>>(), vec![0, 2]);
        let unit = exact_optimum(&p, &inst, &ids, HeightMode::Unit, ORACLE_CAP).unwrap();
        assert_eq!(unit.optimum, q(1, 1));
    }

    #[test]
    fn cap_is_enforced() {
        let (p, inst) = fixtures::bottleneck_problem([q(1, 1), q(1, 1), q(1, 1)]);
        assert_eq!(
            exact_optimum(&p, &inst, &[0, 1, 2], HeightMode::Unit, 2),
            Err(OracleError::TooLarge { count: 3, cap: 2 })
        );
    }

    #[test]
    fn ratio_and_duality_checks() {
        assert!(certify_ratio(&q(1, 1), &q(7, 1), &q(7, 1)).holds);
        assert!(!certify_ratio(&q(1, 1), &q(8, 1), &q(7, 1)).holds);
        assert_eq!(certify_ratio(&q(0, 1), &q(0, 1), &q(3, 1)).ratio, Some(q(1, 1)));
        assert!(!certify_ratio(&q(0, 1), &q(1, 1), &q(3, 1)).holds);
        assert!(verify_weak_duality(&q(5, 2), &q(2, 1)));
        assert!(!verify_weak_duality(&q(3, 2), &q(2, 1)));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn branch_and_bound_matches_enumeration(
            seed in any::<u64>(),
            line in any::<bool>(),
            heights in 0usize..4,
        ) {
            let profile = [HeightProfile::Unit, HeightProfile::Narrow, HeightProfile::Wide, HeightProfile::Mixed][heights];
            let p = generate(&GenParams {
                mode: if line { Mode::Line } else { Mode::Tree },
                n: 10,
                m: 6,
                r: 2,
                seed,
                heights: profile,
                profit_range: (1, 9),
                max_slack: 1,
                max_processing: 4,
            }).unwrap();
            let inst = expand_demand_instances(&p);
            let ids: Vec<_> = (0..inst.len().min(ENUMERATION_CAP)).collect();
            for mode in [HeightMode::Unit, HeightMode::Height] {
                let bb = exact_optimum(&p, &inst, &ids, mode, ORACLE_CAP).unwrap();
                let en = enumerate_optimum(&p, &inst, &ids, mode).unwrap();
                prop_assert_eq!(&bb.optimum, &en.optimum);
                prop_assert!(check_feasible(&p, &inst, &bb.solution, mode).is_ok());
            }
        }
    }
}
