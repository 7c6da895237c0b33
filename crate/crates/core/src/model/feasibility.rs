use std::collections::HashMap;

use thiserror::Error;

use super::{DemandIdx, DemandInstance, EdgeRef, HeightMode, InstanceId, Problem, Solution};
use crate::rational::Q;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Violation {
    #[error("instance {0} does not exist")]
    UnknownInstance(InstanceId),
    #[error("demand {demand} selected twice (instances {first} and {second})")]
    DuplicateDemand {
        demand: DemandIdx,
        first: InstanceId,
        second: InstanceId,
    },
    #[error("instance {instance} lives on a network its owner cannot access")]
    Inaccessible { instance: InstanceId },
    #[error("instances {first} and {second} share edge {edge:?}")]
    EdgeConflict {
        edge: EdgeRef,
        first: InstanceId,
        second: InstanceId,
    },
    #[error("edge {edge:?} carries {load} height units over capacity")]
    CapacityExceeded { edge: EdgeRef, load: i128 },
    #[error("reported profit {reported} differs from selected profit {actual}")]
    ProfitMismatch { reported: Q, actual: Q },
}

/// Incremental edge loads and demand usage for a growing selection.
///
/// Loads are integer height units (`height * height_scale`). In unit mode
/// every instance weighs one unit against a capacity of one.
#[derive(Clone, Debug)]
pub struct FeasibilityTracker<'a> {
    instances: &'a [DemandInstance],
    mode: HeightMode,
    capacity: i128,
    load: HashMap<EdgeRef, (i128, InstanceId)>,
    demand_used: HashMap<DemandIdx, InstanceId>,
}

impl<'a> FeasibilityTracker<'a> {
    pub fn new(problem: &Problem, instances: &'a [DemandInstance], mode: HeightMode) -> Self {
        let capacity = match mode {
            HeightMode::Unit => 1,
            HeightMode::Height => problem.height_scale(),
        };
        FeasibilityTracker {
            instances,
            mode,
            capacity,
            load: HashMap::new(),
            demand_used: HashMap::new(),
        }
    }

    fn weight(&self, d: &DemandInstance) -> i128 {
        match self.mode {
            HeightMode::Unit => 1,
            HeightMode::Height => d.height_units,
        }
    }

    /// The first reason `id` cannot join the current selection, if any.
    pub fn blocker(&self, id: InstanceId) -> Option<Violation> {
        let d = self.instances.get(id)?;
        if let Some(&other) = self.demand_used.get(&d.demand) {
            return Some(Violation::DuplicateDemand {
                demand: d.demand,
                first: other,
                second: id,
            });
        }
        let w = self.weight(d);
        for e in d.sorted_edges() {
            if let Some(&(load, other)) = self.load.get(e) {
                if load + w > self.capacity {
                    return Some(match self.mode {
                        HeightMode::Unit => Violation::EdgeConflict {
                            edge: *e,
                            first: other,
                            second: id,
                        },
                        HeightMode::Height => Violation::CapacityExceeded {
                            edge: *e,
                            load: load + w - self.capacity,
                        },
                    });
                }
            }
        }
        None
    }

    pub fn can_add(&self, id: InstanceId) -> bool {
        id < self.instances.len() && self.blocker(id).is_none()
    }

    /// Adds `id` without checking; pair with [`Self::can_add`].
    pub fn add(&mut self, id: InstanceId) {
        let d = &self.instances[id];
        let w = self.weight(d);
        self.demand_used.insert(d.demand, id);
        for e in d.sorted_edges() {
            self.load.entry(*e).or_insert((0, id)).0 += w;
        }
    }

    pub fn remove(&mut self, id: InstanceId) {
        let d = &self.instances[id];
        let w = self.weight(d);
        self.demand_used.remove(&d.demand);
        for e in d.sorted_edges() {
            if let Some(slot) = self.load.get_mut(e) {
                slot.0 -= w;
                if slot.0 == 0 {
                    self.load.remove(e);
                }
            }
        }
    }
}

/// Checks every feasibility condition of `solution` and its reported profit.
pub fn check_feasible(
    problem: &Problem,
    instances: &[DemandInstance],
    solution: &Solution,
    mode: HeightMode,
) -> Result<(), Violation> {
    let mut tracker = FeasibilityTracker::new(problem, instances, mode);
    let mut profit = Q::default();
    for &id in &solution.selected {
        let d = instances.get(id).ok_or(Violation::UnknownInstance(id))?;
        if !problem.processors()[d.owner].access.contains(&d.net) {
            return Err(Violation::Inaccessible { instance: id });
        }
        if let Some(v) = tracker.blocker(id) {
            return Err(v);
        }
        tracker.add(id);
        profit += &d.profit;
    }
    if profit != solution.profit {
        return Err(Violation::ProfitMismatch {
            reported: solution.profit.clone(),
            actual: profit,
        });
    }
    Ok(())
}
