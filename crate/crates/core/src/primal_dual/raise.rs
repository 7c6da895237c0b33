use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{slackness, DualState, RaiseRule};
use crate::model::{DemandInstance, EdgeRef, InstanceId};
use crate::rational::{q_int, Q};

/// Position of a raise in the first-phase schedule.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Tuple {
    pub epoch: u32,
    pub stage: u32,
    pub step: u32,
}

impl Tuple {
    pub fn new(epoch: u32, stage: u32, step: u32) -> Self {
        Tuple { epoch, stage, step }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RaiseRecord {
    pub instance: InstanceId,
    pub delta: Q,
    pub pi: Vec<EdgeRef>,
    pub tuple: Tuple,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RaiseError {
    #[error("instance {instance} is already satisfied (slack {slack})")]
    NotUnsatisfied { instance: InstanceId, slack: Q },
    #[error("instance {instance} is wide and cannot use the narrow rule")]
    WideInNarrow { instance: InstanceId },
    #[error("critical edge {edge:?} is not on the path of instance {instance}")]
    CriticalOffPath { instance: InstanceId, edge: EdgeRef },
    #[error("instance {instance} has no critical edges")]
    EmptyCritical { instance: InstanceId },
}

/// `δ` that makes the constraint tight under `rule`.
pub fn raise_amount(inst: &DemandInstance, pi_len: usize, slack: &Q, rule: RaiseRule) -> Q {
    let k = pi_len as i64;
    match rule {
        RaiseRule::Unit => slack / q_int(k + 1),
        RaiseRule::Narrow => slack / (Q::one() + q_int(2 * k * k) * &inst.height),
    }
}

/// Amount each critical `β` grows by for a raise of `δ`.
pub fn beta_increment(delta: &Q, pi_len: usize, rule: RaiseRule) -> Q {
    match rule {
        RaiseRule::Unit => delta.clone(),
        RaiseRule::Narrow => delta * q_int(2 * pi_len as i64),
    }
}

/// Adds a raise of `delta` to `duals` without any checks.
pub fn apply_raise(
    duals: &mut DualState,
    inst: &DemandInstance,
    pi: &[EdgeRef],
    delta: &Q,
    rule: RaiseRule,
) {
    duals.add_alpha(inst.demand, delta);
    let step = beta_increment(delta, pi.len(), rule);
    for e in pi {
        duals.add_beta(*e, &step);
    }
}

fn checked_raise(
    inst: &DemandInstance,
    pi: &[EdgeRef],
    duals: &mut DualState,
    tuple: Tuple,
    rule: RaiseRule,
) -> Result<RaiseRecord, RaiseError> {
    if let Some(edge) = pi.iter().find(|e| !inst.uses(e)) {
        return Err(RaiseError::CriticalOffPath {
            instance: inst.id,
            edge: *edge,
        });
    }
    let slack = slackness(inst, duals, rule);
    if slack <= Q::zero() {
        return Err(RaiseError::NotUnsatisfied {
            instance: inst.id,
            slack,
        });
    }
    let delta = raise_amount(inst, pi.len(), &slack, rule);
    apply_raise(duals, inst, pi, &delta, rule);
    Ok(RaiseRecord {
        instance: inst.id,
        delta,
        pi: pi.to_vec(),
        tuple,
    })
}

/// Unit-height raise: `δ = s / (|π| + 1)` on `α(a_d)` and every `β(e)`, `e ∈ π`.
pub fn raise_unit(
    inst: &DemandInstance,
    pi: &[EdgeRef],
    duals: &mut DualState,
    tuple: Tuple,
) -> Result<RaiseRecord, RaiseError> {
    checked_raise(inst, pi, duals, tuple, RaiseRule::Unit)
}

/// Narrow raise: `δ = s / (1 + 2h|π|²)` on `α(a_d)`, `2|π|δ` on each critical `β`.
pub fn raise_height(
    inst: &DemandInstance,
    pi: &[EdgeRef],
    duals: &mut DualState,
    tuple: Tuple,
) -> Result<RaiseRecord, RaiseError> {
    if inst.is_wide() {
        return Err(RaiseError::WideInNarrow { instance: inst.id });
    }
    checked_raise(inst, pi, duals, tuple, RaiseRule::Narrow)
}

pub fn raise(
    inst: &DemandInstance,
    pi: &[EdgeRef],
    duals: &mut DualState,
    tuple: Tuple,
    rule: RaiseRule,
) -> Result<RaiseRecord, RaiseError> {
    match rule {
        RaiseRule::Unit => raise_unit(inst, pi, duals, tuple),
        RaiseRule::Narrow => raise_height(inst, pi, duals, tuple),
    }
}

/// Left-hand side at least `level · p(d)`.
pub fn xi_satisfied(inst: &DemandInstance, duals: &DualState, level: &Q, rule: RaiseRule) -> bool {
    duals.lhs(inst, rule) >= level * &inst.profit
}
