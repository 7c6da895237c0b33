use std::collections::HashMap;

use super::{RaiseRecord, Tuple};
use crate::model::{
    conflicting, DemandInstance, FeasibilityTracker, HeightMode, InstanceId, Problem, Solution,
};

/// One first-phase step: the independent set raised under `tuple`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StackEntry {
    pub tuple: Tuple,
    /// Ascending ids.
    pub members: Vec<InstanceId>,
}

/// Groups consecutive records with equal tuples into stack entries.
pub fn stack_from_records(records: &[RaiseRecord]) -> Vec<StackEntry> {
    let mut out: Vec<StackEntry> = Vec::new();
    for r in records {
        match out.last_mut() {
            Some(top) if top.tuple == r.tuple => top.members.push(r.instance),
            _ => out.push(StackEntry {
                tuple: r.tuple,
                members: vec![r.instance],
            }),
        }
    }
    for e in out.iter_mut() {
        e.members.sort_unstable();
    }
    out
}

/// Pops the stack top-down and keeps every instance that still fits:
/// edge-disjointness in unit mode, edge capacity in height mode, and at most
/// one instance per demand in both.
pub fn second_phase(
    problem: &Problem,
    instances: &[DemandInstance],
    stack: &[StackEntry],
    mode: HeightMode,
) -> Solution {
    let mut tracker = FeasibilityTracker::new(problem, instances, mode);
    let mut chosen = Vec::new();
    for entry in stack.iter().rev() {
        for &id in &entry.members {
            if tracker.can_add(id) {
                tracker.add(id);
                chosen.push(id);
            }
        }
    }
    Solution::from_ids(instances, chosen)
}

/// Every raised instance is selected or conflicts with a selected instance
/// raised strictly later. Returns the first uncovered instance.
pub fn check_successor_coverage(
    instances: &[DemandInstance],
    stack: &[StackEntry],
    solution: &Solution,
) -> Result<(), InstanceId> {
    let position: HashMap<InstanceId, usize> = stack
        .iter()
        .enumerate()
        .flat_map(|(i, e)| e.members.iter().map(move |&id| (id, i)))
        .collect();
    for (i, entry) in stack.iter().enumerate() {
        for &d in &entry.members {
            if solution.selected.contains(&d) {
                continue;
            }
            let covered = solution.selected.iter().any(|&s| {
                position.get(&s).is_some_and(|&j| j > i)
                    && conflicting(&instances[s], &instances[d])
            });
            if !covered {
                return Err(d);
            }
        }
    }
    Ok(())
}
