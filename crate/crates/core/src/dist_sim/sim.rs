use std::collections::{BTreeMap, HashMap};

use num_traits::Zero;
use serde::Serialize;
use thiserror::Error;

use super::{conflict_graph, luby_mis};
use crate::layering::LayeredDecomposition;
use crate::model::{DemandInstance, EdgeRef, InstanceId, Problem, ProcIdx, Solution};
use crate::primal_dual::{
    beta_increment, min_satisfaction, raise_amount, AlgoParams, DualState, RaiseError,
    RaiseRecord, RaiseRule, StackEntry, Tuple, XiPowers,
};
use crate::rational::{bit_len, ceil_log2, Q};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimConfig {
    pub seed: u64,
    /// Steps allowed per stage are `c_steps * (1 + ceil(log2(pmax/pmin)))`.
    pub c_steps: u32,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            seed: 0,
            c_steps: 2,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct StageSteps {
    pub epoch: u32,
    pub stage: u32,
    pub steps: u32,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct RoundStats {
    /// MIS rounds plus one exchange round per step plus one round per popped stack entry.
    pub rounds: u64,
    pub mis_calls: u64,
    pub mis_rounds: u64,
    pub mis_messages: u64,
    /// Raise and selection messages between processors.
    pub messages: u64,
    /// Largest message without its `δ` payload.
    pub max_msg_bits: u64,
    pub max_delta_bits: u64,
    /// Bits to write down one demand; the yardstick for message sizes.
    pub demand_bits: u64,
    pub epochs: u32,
    pub stages_per_epoch: u32,
    pub step_cap: u32,
    /// Stages with at least one step; all other stages have empty `U`.
    pub steps: Vec<StageSteps>,
    pub total_steps: u64,
    pub max_steps_per_stage: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum KillFailure {
    /// Still unsatisfied yet no conflicting instance was raised.
    NoRaisedNeighbor,
    /// A conflicting raised instance has more than half the survivor's profit.
    ProfitRatio,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct KillViolation {
    pub tuple: Tuple,
    pub survivor: InstanceId,
    pub raised: Option<InstanceId>,
    pub failure: KillFailure,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SimError {
    #[error("stage ({epoch}, {stage}) exceeded its step cap of {cap}")]
    StepCapExceeded { epoch: u32, stage: u32, cap: u32 },
    #[error("step {tuple:?} produced a set that is not a maximal independent set")]
    InvalidMis { tuple: Tuple },
    #[error("instance {instance} appears in more than one layering")]
    DuplicateInstance { instance: InstanceId },
    #[error("instance {instance} is below the exit level after epoch {epoch}")]
    EpochNotSatisfied { epoch: u32, instance: InstanceId },
    #[error("local views disagree on {edge:?}")]
    InconsistentViews { edge: EdgeRef },
    #[error(transparent)]
    Raise(#[from] RaiseError),
}

#[derive(Clone, Debug)]
pub struct DistRun {
    pub params: AlgoParams,
    pub ids: Vec<InstanceId>,
    pub solution: Solution,
    pub duals: DualState,
    pub records: Vec<RaiseRecord>,
    pub stack: Vec<StackEntry>,
    pub stats: RoundStats,
    pub kill_violations: Vec<KillViolation>,
    /// Smallest `lhs / p` over the run's instances.
    pub lambda_achieved: Q,
    /// Largest `|π(d)|` in the layerings.
    pub delta: usize,
}

/// What one processor knows: its own `α`, `β` on the edges its instances
/// use, edge loads of announced selections, and its raise stack.
struct Node {
    alpha: Q,
    beta: HashMap<EdgeRef, Q>,
    load: HashMap<EdgeRef, i128>,
    taken: bool,
    stack: Vec<StackEntry>,
}

impl Node {
    fn lhs(&self, d: &DemandInstance, rule: RaiseRule) -> Q {
        let mut sum = Q::zero();
        for e in &d.edges {
            sum += &self.beta[e];
        }
        match rule {
            RaiseRule::Unit => &self.alpha + sum,
            RaiseRule::Narrow => &self.alpha + &d.height * sum,
        }
    }

    fn slack(&self, d: &DemandInstance, rule: RaiseRule) -> Q {
        &d.profit - self.lhs(d, rule)
    }
}

fn bits(x: usize) -> u64 {
    u64::from(usize::BITS - x.max(1).leading_zeros())
}

fn demand_bits(problem: &Problem) -> u64 {
    let numbers = problem
        .demands()
        .iter()
        .map(|d| bit_len(&d.profit) + bit_len(&d.height))
        .max()
        .unwrap_or(0);
    2 * bits(problem.n()) + bits(problem.processors().len()) + bits(problem.networks().len()) + numbers
}

/// Runs both phases as synchronous message passing between processors.
///
/// Every processor owns the instances of its demand and decides from its
/// local view only. A raise is announced to every processor that can reach
/// the raised instance's network, which is exactly the set whose views
/// contain the touched edges. Stages whose `U` would be empty are skipped
/// without rounds; each instance is raised at most once since a raise leaves
/// it tight.
pub fn run_distributed(
    problem: &Problem,
    instances: &[DemandInstance],
    layerings: &[LayeredDecomposition],
    params: &AlgoParams,
    config: &SimConfig,
) -> Result<DistRun, SimError> {
    let rule = params.rule;
    let length = layerings.iter().map(|l| l.length).max().unwrap_or(0);
    let mut critical: HashMap<InstanceId, &[EdgeRef]> = HashMap::new();
    let mut groups: Vec<Vec<InstanceId>> = vec![Vec::new(); length];
    for l in layerings {
        for (k, g) in l.groups.iter().enumerate() {
            for &id in g {
                if critical.insert(id, l.critical_of(id)).is_some() {
                    return Err(SimError::DuplicateInstance { instance: id });
                }
                if rule == RaiseRule::Narrow && instances[id].is_wide() {
                    return Err(RaiseError::WideInNarrow { instance: id }.into());
                }
                groups[k].push(id);
            }
        }
    }
    for g in groups.iter_mut() {
        g.sort_unstable();
    }
    let mut ids: Vec<InstanceId> = critical.keys().copied().collect();
    ids.sort_unstable();

    let procs = problem.processors().len();
    let mut nodes: Vec<Node> = (0..procs)
        .map(|_| Node {
            alpha: Q::zero(),
            beta: HashMap::new(),
            load: HashMap::new(),
            taken: false,
            stack: Vec::new(),
        })
        .collect();
    for &id in &ids {
        let d = &instances[id];
        for e in &d.edges {
            nodes[d.owner].beta.entry(*e).or_insert_with(Q::zero);
            nodes[d.owner].load.entry(*e).or_insert(0);
        }
    }
    let mut reach: Vec<Vec<ProcIdx>> = vec![Vec::new(); problem.networks().len()];
    for (p, proc) in problem.processors().iter().enumerate() {
        for &net in &proc.access {
            reach[net].push(p);
        }
    }

    let step_cap = {
        let profits = ids.iter().map(|&id| &instances[id].profit);
        let (pmin, pmax) = profits.fold((None::<&Q>, None::<&Q>), |(lo, hi), p| {
            (
                Some(lo.map_or(p, |x| x.min(p))),
                Some(hi.map_or(p, |x| x.max(p))),
            )
        });
        let spread = match (pmin, pmax) {
            (Some(lo), Some(hi)) => ceil_log2(&(hi / lo)),
            _ => 0,
        };
        config.c_steps * (1 + spread)
    };
    let mut stats = RoundStats {
        demand_bits: demand_bits(problem),
        epochs: length as u32,
        stages_per_epoch: params.stages,
        step_cap,
        ..RoundStats::default()
    };
    let tuple_bits = |t: &Tuple| {
        bits(t.epoch as usize) + bits(t.stage as usize) + bits(t.step as usize)
    };
    let b = params.stages;
    let mut powers = XiPowers::new(params.xi.clone());
    let mut records = Vec::new();
    let mut stack: Vec<StackEntry> = Vec::new();
    let mut kills = Vec::new();

    for (k, group) in groups.iter().enumerate() {
        let epoch = k as u32 + 1;
        let mut pending: Vec<InstanceId> = group.clone();
        let mut j = 1;
        while j <= b {
            // next stage whose U is non-empty
            let mut next: Option<u32> = None;
            pending.retain(|&id| {
                let d = &instances[id];
                let s = nodes[d.owner].slack(d, rule);
                if s <= Q::zero() {
                    return false;
                }
                if let Some(x) = powers.first_below(&(s / &d.profit), j, b) {
                    next = Some(next.map_or(x, |y| y.min(x)));
                }
                true
            });
            let Some(stage) = next else { break };
            j = stage;
            let threshold = powers.get(j).clone();
            let mut step = 0;
            loop {
                let u: Vec<InstanceId> = pending
                    .iter()
                    .copied()
                    .filter(|&id| {
                        let d = &instances[id];
                        nodes[d.owner].slack(d, rule) > &threshold * &d.profit
                    })
                    .collect();
                if u.is_empty() {
                    break;
                }
                step += 1;
                if step > step_cap {
                    return Err(SimError::StepCapExceeded {
                        epoch,
                        stage: j,
                        cap: step_cap,
                    });
                }
                let tuple = Tuple::new(epoch, j, step);
                let graph = conflict_graph(instances, &u);
                let owner = |v: usize| instances[graph.labels[v]].owner;
                let mis = luby_mis(&graph, config.seed, tuple, |v, w| owner(v) != owner(w));
                if !graph.is_maximal_independent(&mis.members) {
                    return Err(SimError::InvalidMis { tuple });
                }
                stats.mis_calls += 1;
                stats.mis_rounds += u64::from(mis.rounds);
                stats.mis_messages += mis.messages;
                stats.rounds += u64::from(mis.rounds) + 1;

                // every raiser computes δ from the same pre-step view
                let raised: Vec<(InstanceId, Q)> = mis
                    .members
                    .iter()
                    .map(|&v| {
                        let d = &instances[graph.labels[v]];
                        let pi = critical[&d.id];
                        let s = nodes[d.owner].slack(d, rule);
                        (d.id, raise_amount(d, pi.len(), &s, rule))
                    })
                    .collect();
                for (id, delta) in &raised {
                    let d = &instances[*id];
                    let pi = critical[id];
                    let inc = beta_increment(delta, pi.len(), rule);
                    nodes[d.owner].alpha += delta;
                    for &p in &reach[d.net] {
                        let node = &mut nodes[p];
                        for e in pi {
                            if let Some(x) = node.beta.get_mut(e) {
                                *x += &inc;
                            }
                        }
                        if p != d.owner {
                            stats.messages += 1;
                        }
                    }
                    let msg = bits(d.owner)
                        + tuple_bits(&tuple)
                        + bits(*id)
                        + pi.len() as u64
                            * (bits(problem.networks().len()) + 2 * bits(problem.n()));
                    stats.max_msg_bits = stats.max_msg_bits.max(msg);
                    stats.max_delta_bits = stats.max_delta_bits.max(bit_len(delta));
                    records.push(RaiseRecord {
                        instance: *id,
                        delta: delta.clone(),
                        pi: pi.to_vec(),
                        tuple,
                    });
                }
                let mut members: Vec<InstanceId> = raised.iter().map(|(id, _)| *id).collect();
                members.sort_unstable();
                let mut per_owner: BTreeMap<ProcIdx, Vec<InstanceId>> = BTreeMap::new();
                for &id in &members {
                    per_owner.entry(instances[id].owner).or_default().push(id);
                }
                for (p, own) in per_owner {
                    nodes[p].stack.push(StackEntry { tuple, members: own });
                }
                stack.push(StackEntry { tuple, members });

                // raised neighbors of anything still unsatisfied must be much cheaper
                let mut in_mis = vec![false; graph.len()];
                for &v in &mis.members {
                    in_mis[v] = true;
                }
                for v in 0..graph.len() {
                    if in_mis[v] {
                        continue;
                    }
                    let d2 = &instances[graph.labels[v]];
                    if nodes[d2.owner].slack(d2, rule) <= &threshold * &d2.profit {
                        continue;
                    }
                    let mut any = false;
                    for &w in graph.adj[v].iter().filter(|&&w| in_mis[w]) {
                        any = true;
                        let d1 = &instances[graph.labels[w]];
                        if d2.profit < Q::from_integer(2.into()) * &d1.profit {
                            kills.push(KillViolation {
                                tuple,
                                survivor: d2.id,
                                raised: Some(d1.id),
                                failure: KillFailure::ProfitRatio,
                            });
                        }
                    }
                    if !any {
                        kills.push(KillViolation {
                            tuple,
                            survivor: d2.id,
                            raised: None,
                            failure: KillFailure::NoRaisedNeighbor,
                        });
                    }
                }
                pending.retain(|id| raised.iter().all(|(r, _)| r != id));
            }
            if step > 0 {
                stats.steps.push(StageSteps {
                    epoch,
                    stage: j,
                    steps: step,
                });
                stats.total_steps += u64::from(step);
                stats.max_steps_per_stage = stats.max_steps_per_stage.max(step);
            }
            j += 1;
        }
        let lambda = params.lambda();
        for &id in group {
            let d = &instances[id];
            if nodes[d.owner].lhs(d, rule) < &lambda * &d.profit {
                return Err(SimError::EpochNotSatisfied { epoch, instance: id });
            }
        }
    }

    // Second phase: walk the schedule backwards; an instance joins when the
    // owner's view has room on every edge and its demand is still free.
    let capacity = match rule.feasibility() {
        crate::model::HeightMode::Unit => 1,
        crate::model::HeightMode::Height => problem.height_scale(),
    };
    let weight = |d: &DemandInstance| match rule {
        RaiseRule::Unit => 1,
        RaiseRule::Narrow => d.height_units,
    };
    let mut chosen = Vec::new();
    for entry in stack.iter().rev() {
        stats.rounds += 1;
        for &id in &entry.members {
            let d = &instances[id];
            let node = &nodes[d.owner];
            debug_assert!(node.stack.iter().any(|s| s.tuple == entry.tuple));
            let w = weight(d);
            let fits = !node.taken && d.edges.iter().all(|e| node.load[e] + w <= capacity);
            if !fits {
                continue;
            }
            nodes[d.owner].taken = true;
            chosen.push(id);
            for &p in &reach[d.net] {
                let node = &mut nodes[p];
                for e in &d.edges {
                    if let Some(x) = node.load.get_mut(e) {
                        *x += w;
                    }
                }
                if p != d.owner {
                    stats.messages += 1;
                }
            }
            let msg = bits(d.owner) + tuple_bits(&entry.tuple) + bits(id);
            stats.max_msg_bits = stats.max_msg_bits.max(msg);
        }
    }
    let solution = Solution::from_ids(instances, chosen);

    let mut duals = DualState::new();
    for &id in &ids {
        let d = &instances[id];
        let a = &nodes[d.owner].alpha;
        if !a.is_zero() {
            duals.alpha.insert(d.demand, a.clone());
        }
    }
    for node in &nodes {
        for (e, x) in &node.beta {
            if x.is_zero() {
                continue;
            }
            match duals.beta.get(e) {
                Some(y) if y != x => return Err(SimError::InconsistentViews { edge: *e }),
                Some(_) => {}
                None => {
                    duals.beta.insert(*e, x.clone());
                }
            }
        }
    }
    let lambda_achieved = min_satisfaction(&duals, instances, &ids, rule);
    Ok(DistRun {
        params: params.clone(),
        delta: layerings.iter().map(|l| l.delta).max().unwrap_or(0),
        ids,
        solution,
        duals,
        records,
        stack,
        stats,
        kill_violations: kills,
        lambda_achieved,
    })
}
