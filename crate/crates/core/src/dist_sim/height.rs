use std::collections::BTreeMap;

use num_traits::Zero;
use thiserror::Error;

use super::{run_distributed, DistRun, SimConfig, SimError};
use crate::decomposition::DecompositionKind;
use crate::layering::{layer_instances, LayeringError};
use crate::model::{DemandInstance, InstanceId, Mode, NetIdx, Problem, Solution};
use crate::primal_dual::{AlgoParams, ParamError};
use crate::rational::{q, Q};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RunError {
    #[error(transparent)]
    Layering(#[from] LayeringError),
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("minimum height {given} exceeds the smallest narrow height {actual}")]
    HminTooLarge { given: Q, actual: Q },
}

/// Critical set bound the schedule is tuned for: six on trees (ideal
/// decompositions), three on lines.
pub fn nominal_delta(mode: Mode) -> usize {
    match mode {
        Mode::Tree => 6,
        Mode::Line => 3,
    }
}

/// Unit-height run over every instance, layered with `kind` on trees.
pub fn run_unit(
    problem: &Problem,
    instances: &[DemandInstance],
    kind: DecompositionKind,
    eps: Q,
    sim: &SimConfig,
) -> Result<DistRun, RunError> {
    let ids: Vec<InstanceId> = (0..instances.len()).collect();
    let params = AlgoParams::unit(nominal_delta(problem.mode()), eps)?;
    let layerings = layer_instances(problem, instances, &ids, kind)?;
    Ok(run_distributed(problem, instances, &layerings, &params, sim)?)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HeightConfig {
    pub eps: Q,
    /// Narrow constant; defaults to `2(1 + 2Δ²)`.
    pub c: Option<Q>,
    /// Defaults to the smallest narrow height present.
    pub h_min: Option<Q>,
    pub kind: DecompositionKind,
}

#[derive(Clone, Debug)]
pub struct HeightRun {
    pub solution: Solution,
    pub wide: DistRun,
    pub narrow: DistRun,
    /// Networks where the wide selection was kept.
    pub wide_networks: Vec<NetIdx>,
}

/// Solves wide (`h > 1/2`) and narrow instances separately, then keeps,
/// per network, whichever side earns more there (wide on ties).
pub fn run_overall_height(
    problem: &Problem,
    instances: &[DemandInstance],
    config: &HeightConfig,
    sim: &SimConfig,
) -> Result<HeightRun, RunError> {
    let (wide_ids, narrow_ids): (Vec<InstanceId>, Vec<InstanceId>) =
        (0..instances.len()).partition(|&id| instances[id].is_wide());
    let actual = narrow_ids.iter().map(|&id| &instances[id].height).min().cloned();
    let h_min = match (&config.h_min, actual) {
        (Some(given), Some(actual)) if *given > actual => {
            return Err(RunError::HminTooLarge {
                given: given.clone(),
                actual,
            })
        }
        (Some(given), _) => given.clone(),
        (None, Some(actual)) => actual,
        (None, None) => q(1, 2),
    };
    let delta = nominal_delta(problem.mode());

    let wide_params = AlgoParams::unit(delta, config.eps.clone())?;
    let wide_layers = layer_instances(problem, instances, &wide_ids, config.kind)?;
    let wide = run_distributed(problem, instances, &wide_layers, &wide_params, sim)?;

    let narrow_params = AlgoParams::narrow(delta, config.eps.clone(), h_min, config.c.clone())?;
    let narrow_layers = layer_instances(problem, instances, &narrow_ids, config.kind)?;
    let narrow = run_distributed(problem, instances, &narrow_layers, &narrow_params, sim)?;

    let mut per_net: BTreeMap<NetIdx, (Q, Q)> = BTreeMap::new();
    for net in 0..problem.networks().len() {
        per_net.insert(net, (Q::zero(), Q::zero()));
    }
    for &id in &wide.solution.selected {
        per_net.get_mut(&instances[id].net).expect("known network").0 += &instances[id].profit;
    }
    for &id in &narrow.solution.selected {
        per_net.get_mut(&instances[id].net).expect("known network").1 += &instances[id].profit;
    }
    let wide_networks: Vec<NetIdx> = per_net
        .iter()
        .filter(|(_, (w, n))| w >= n)
        .map(|(&net, _)| net)
        .collect();
    let keep = |id: &&InstanceId| wide_networks.binary_search(&instances[**id].net).is_ok();
    let chosen = wide
        .solution
        .selected
        .iter()
        .filter(keep)
        .chain(narrow.solution.selected.iter().filter(|id| !keep(id)))
        .copied();
    let solution = Solution::from_ids(instances, chosen);
    Ok(HeightRun {
        solution,
        wide,
        narrow,
        wide_networks,
    })
}
