use num_traits::{One, Zero};
use thiserror::Error;

use super::{
    raise_unit, scale_and_check_dual, second_phase, slackness, stack_from_records,
    DualCertificate, DualState, RaiseError, RaiseRecord, RaiseRule, StackEntry, Tuple,
};
use crate::decomposition::build_root_fixing;
use crate::layering::{layer_from_decomposition, LayeringError};
use crate::model::{DemandInstance, HeightMode, InstanceId, Problem, Solution};
use crate::rational::{q_int, Q};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SolveError {
    #[error("the sequential solver handles unit heights only")]
    NonUnitHeight,
    #[error("the single-tree variant needs exactly one network, found {networks}")]
    SingleTreeNeedsOneNetwork { networks: usize },
    #[error(transparent)]
    Layering(#[from] LayeringError),
    #[error(transparent)]
    Raise(#[from] RaiseError),
}

#[derive(Clone, Debug)]
pub struct SequentialRun {
    pub solution: Solution,
    pub duals: DualState,
    pub records: Vec<RaiseRecord>,
    pub stack: Vec<StackEntry>,
    /// Largest critical set used.
    pub delta: usize,
    pub certificate: DualCertificate,
}

/// Sequential primal-dual over root-fixing decompositions rooted at vertex 1.
///
/// Trees are handled in id order. Within a tree, instances are visited by
/// capture depth (deepest first, then id) and each still-unsatisfied one is
/// raised on the wings at its capture vertex, which makes it tight. Since
/// raises never lower a left-hand side, one pass leaves every constraint
/// satisfied. With `single_tree_variant`, only `β` is raised
/// (`δ = s / |π|`), which requires a single network.
pub fn sequential_tree_solve(
    problem: &Problem,
    instances: &[DemandInstance],
    single_tree_variant: bool,
) -> Result<SequentialRun, SolveError> {
    if !problem.is_unit_height() {
        return Err(SolveError::NonUnitHeight);
    }
    let networks = problem.networks().len();
    if single_tree_variant && networks != 1 {
        return Err(SolveError::SingleTreeNeedsOneNetwork { networks });
    }
    let mut order: Vec<usize> = (0..networks).collect();
    order.sort_by_key(|&i| problem.network(i).id());

    let mut duals = DualState::new();
    let mut records = Vec::new();
    let mut delta = 0;
    for (ordinal, &net_idx) in order.iter().enumerate() {
        let net = problem.network(net_idx);
        let ids: Vec<InstanceId> = instances
            .iter()
            .filter(|d| d.net == net_idx)
            .map(|d| d.id)
            .collect();
        if ids.is_empty() {
            continue;
        }
        let dec = build_root_fixing(net, 1).expect("vertex 1 exists");
        let layered = layer_from_decomposition(&dec, net, net_idx, instances, &ids)?;
        delta = delta.max(layered.delta);
        let mut step = 0;
        for &id in layered.groups.iter().flatten() {
            let d = &instances[id];
            if slackness(d, &duals, RaiseRule::Unit) <= Q::zero() {
                continue;
            }
            step += 1;
            let tuple = Tuple::new(ordinal as u32 + 1, 1, step);
            let pi = layered.critical_of(id);
            let rec = if single_tree_variant {
                raise_beta_only(d, pi, &mut duals, tuple)
            } else {
                raise_unit(d, pi, &mut duals, tuple)?
            };
            records.push(rec);
        }
    }

    let stack = stack_from_records(&records);
    let solution = second_phase(problem, instances, &stack, HeightMode::Unit);
    let all: Vec<InstanceId> = (0..instances.len()).collect();
    let certificate = scale_and_check_dual(&duals, &Q::one(), instances, &all, RaiseRule::Unit)
        .expect("every constraint is tight or satisfied after the pass");
    Ok(SequentialRun {
        solution,
        duals,
        records,
        stack,
        delta,
        certificate,
    })
}

fn raise_beta_only(
    inst: &DemandInstance,
    pi: &[crate::model::EdgeRef],
    duals: &mut DualState,
    tuple: Tuple,
) -> RaiseRecord {
    let s = slackness(inst, duals, RaiseRule::Unit);
    let delta = s / q_int(pi.len() as i64);
    for e in pi {
        duals.add_beta(*e, &delta);
    }
    RaiseRecord {
        instance: inst.id,
        delta,
        pi: pi.to_vec(),
        tuple,
    }
}
