use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{conflicting, DemandInstance, EdgeRef, Problem, Solution};
use crate::primal_dual::{
    raise, second_phase, stack_from_records, DualState, RaiseError, RaiseRecord, RaiseRule, Tuple,
};
use crate::rational::{from_parts, to_parts};

/// One raise per line; `δ` is kept exact as decimal numerator and denominator.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceLine {
    pub epoch: u32,
    pub stage: u32,
    pub step: u32,
    pub instance: usize,
    pub delta_num: String,
    pub delta_den: String,
    pub pi: Vec<[usize; 3]>,
}

impl From<&RaiseRecord> for TraceLine {
    fn from(r: &RaiseRecord) -> Self {
        let (delta_num, delta_den) = to_parts(&r.delta);
        TraceLine {
            epoch: r.tuple.epoch,
            stage: r.tuple.stage,
            step: r.tuple.step,
            instance: r.instance,
            delta_num,
            delta_den,
            pi: r.pi.iter().map(|e| [e.net, e.u, e.v]).collect(),
        }
    }
}

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("trace line {line}: {source}")]
    Json {
        line: usize,
        source: serde_json::Error,
    },
    #[error("trace line {line}: bad rational")]
    Rational { line: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub fn write_trace(records: &[RaiseRecord], mut out: impl Write) -> std::io::Result<()> {
    for r in records {
        let line = serde_json::to_string(&TraceLine::from(r)).map_err(std::io::Error::other)?;
        writeln!(out, "{line}")?;
    }
    Ok(())
}

pub fn read_trace(input: impl BufRead) -> Result<Vec<RaiseRecord>, TraceError> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let t: TraceLine =
            serde_json::from_str(&line).map_err(|source| TraceError::Json { line: i + 1, source })?;
        let delta =
            from_parts(&t.delta_num, &t.delta_den).ok_or(TraceError::Rational { line: i + 1 })?;
        out.push(RaiseRecord {
            instance: t.instance,
            delta,
            pi: t.pi.iter().map(|&[net, u, v]| EdgeRef::new(net, u, v)).collect(),
            tuple: Tuple::new(t.epoch, t.stage, t.step),
        });
    }
    Ok(out)
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ReplayError {
    #[error("raised set {tuple:?} holds conflicting instances {first} and {second}")]
    NotIndependent {
        tuple: Tuple,
        first: usize,
        second: usize,
    },
    #[error("record {index} carries a different δ than the replay computes")]
    DeltaMismatch { index: usize },
    #[error("record {index}: {source}")]
    Raise { index: usize, source: RaiseError },
    #[error("record {index} names unknown instance {instance}")]
    UnknownInstance { index: usize, instance: usize },
}

/// Re-executes recorded raises on one global dual state, recomputing every
/// `δ`, then runs the pruning phase on the recorded schedule.
pub fn replay_centralized(
    problem: &Problem,
    instances: &[DemandInstance],
    records: &[RaiseRecord],
    rule: RaiseRule,
) -> Result<(DualState, Solution), ReplayError> {
    for (index, r) in records.iter().enumerate() {
        if r.instance >= instances.len() {
            return Err(ReplayError::UnknownInstance {
                index,
                instance: r.instance,
            });
        }
    }
    let stack = stack_from_records(records);
    for entry in &stack {
        for (a, &x) in entry.members.iter().enumerate() {
            for &y in &entry.members[a + 1..] {
                if conflicting(&instances[x], &instances[y]) {
                    return Err(ReplayError::NotIndependent {
                        tuple: entry.tuple,
                        first: x,
                        second: y,
                    });
                }
            }
        }
    }
    let mut duals = DualState::new();
    for (index, r) in records.iter().enumerate() {
        let rec = raise(&instances[r.instance], &r.pi, &mut duals, r.tuple, rule)
            .map_err(|source| ReplayError::Raise { index, source })?;
        if rec.delta != r.delta {
            return Err(ReplayError::DeltaMismatch { index });
        }
    }
    let solution = second_phase(problem, instances, &stack, rule.feasibility());
    Ok((duals.normalized(), solution))
}
