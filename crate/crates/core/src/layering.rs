//! Layered decompositions: an ordering of demand instances into groups plus a
//! small critical edge set `π(d)` per instance, such that any instance in the
//! same or a later group that overlaps `d` crosses one of `d`'s critical edges.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::decomposition::{
    build, validate_decomposition, DecompositionKind, DecompositionViolation, RootedDecomposition,
};
use crate::model::{
    instances_by_network, overlapping, DemandInstance, EdgeRef, InstanceId, Mode, NetIdx, Problem,
    TreeNetwork, Vertex,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LayeringError {
    #[error("decomposition of network {decomposition} used for network {network}")]
    NetworkMismatch { decomposition: u32, network: u32 },
    #[error("instance {instance} lives on another network")]
    ForeignInstance { instance: InstanceId },
    #[error(transparent)]
    InvalidDecomposition(#[from] DecompositionViolation),
    #[error("instance {instance} has two shallowest path vertices {first} and {second}")]
    NonUniqueCapture {
        instance: InstanceId,
        first: Vertex,
        second: Vertex,
    },
    #[error("vertex {vertex} is not on the path of instance {instance}")]
    NotOnPath { instance: InstanceId, vertex: Vertex },
    #[error("no instances to layer")]
    Empty,
    #[error("instance {instance} has no timeslot interval")]
    NotWindowed { instance: InstanceId },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LayeredDecomposition {
    /// Network index for tree layerings; `None` for line layerings, which
    /// span every resource at once.
    pub net: Option<NetIdx>,
    /// `groups[i]` is `G_{i+1}`, ascending ids. Empty groups are kept.
    pub groups: Vec<Vec<InstanceId>>,
    /// `π(d)`, ascending and deduplicated.
    pub critical: BTreeMap<InstanceId, Vec<EdgeRef>>,
    /// `μ(d)` for tree layerings.
    pub capture: BTreeMap<InstanceId, Vertex>,
    /// Largest `|π(d)|`.
    pub delta: usize,
    /// Number of groups.
    pub length: usize,
}

impl LayeredDecomposition {
    pub fn critical_of(&self, id: InstanceId) -> &[EdgeRef] {
        self.critical.get(&id).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn group(&self, k: usize) -> &[InstanceId] {
        self.groups.get(k).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn instance_count(&self) -> usize {
        self.groups.iter().map(Vec::len).sum()
    }
}

/// `μ(d)`: the unique shallowest vertex of the instance's path in `dec`.
pub fn capture_node(
    dec: &RootedDecomposition,
    inst: &DemandInstance,
) -> Result<Vertex, LayeringError> {
    let mut best = inst.vertices[0];
    let mut tie = None;
    for &v in &inst.vertices[1..] {
        match dec.depth(v).cmp(&dec.depth(best)) {
            std::cmp::Ordering::Less => {
                best = v;
                tie = None;
            }
            std::cmp::Ordering::Equal => tie = Some(v),
            std::cmp::Ordering::Greater => {}
        }
    }
    match tie {
        Some(other) => Err(LayeringError::NonUniqueCapture {
            instance: inst.id,
            first: best.min(other),
            second: best.max(other),
        }),
        None => Ok(best),
    }
}

/// The path vertex of `inst` closest to `u`.
pub fn bending_point(net: &TreeNetwork, inst: &DemandInstance, u: Vertex) -> Vertex {
    let (a, b) = inst.endpoints();
    net.median(a, b, u)
}

/// Path edges of `inst` incident to `y`: one at an endpoint, two inside.
pub fn wings(inst: &DemandInstance, y: Vertex) -> Result<Vec<EdgeRef>, LayeringError> {
    let p = inst.position(y).ok_or(LayeringError::NotOnPath {
        instance: inst.id,
        vertex: y,
    })?;
    let mut out = Vec::with_capacity(2);
    if p > 0 {
        out.push(inst.edges[p - 1]);
    }
    if p < inst.edges.len() {
        out.push(inst.edges[p]);
    }
    Ok(out)
}

/// Groups instances by capture depth, deepest first, with critical edges made
/// of the wings at `μ(d)` and at the bending points toward each pivot of `μ(d)`.
pub fn layer_from_decomposition(
    dec: &RootedDecomposition,
    net: &TreeNetwork,
    net_idx: NetIdx,
    instances: &[DemandInstance],
    ids: &[InstanceId],
) -> Result<LayeredDecomposition, LayeringError> {
    if dec.net() != net.id() {
        return Err(LayeringError::NetworkMismatch {
            decomposition: dec.net(),
            network: net.id(),
        });
    }
    let report = validate_decomposition(dec, net)?;
    let length = dec.max_depth() as usize;
    let mut groups = vec![Vec::new(); length];
    let mut critical = BTreeMap::new();
    let mut capture = BTreeMap::new();
    for &id in ids {
        let d = &instances[id];
        if d.net != net_idx {
            return Err(LayeringError::ForeignInstance { instance: id });
        }
        let mu = capture_node(dec, d)?;
        let mut pi = wings(d, mu)?;
        for &u in &report.pivots[mu] {
            pi.extend(wings(d, bending_point(net, d, u))?);
        }
        pi.sort_unstable();
        pi.dedup();
        groups[length - dec.depth(mu) as usize].push(id);
        critical.insert(id, pi);
        capture.insert(id, mu);
    }
    for g in groups.iter_mut() {
        g.sort_unstable();
    }
    Ok(LayeredDecomposition {
        net: Some(net_idx),
        delta: critical.values().map(Vec::len).max().unwrap_or(0),
        groups,
        critical,
        capture,
        length,
    })
}

/// Line layering by length: `G_i` holds lengths in `[2^{i-1} L_min, 2^i L_min)`
/// and `π(d)` is the first, middle and last timeslot.
pub fn layer_line_by_length(
    instances: &[DemandInstance],
    ids: &[InstanceId],
) -> Result<LayeredDecomposition, LayeringError> {
    let mut spans = Vec::with_capacity(ids.len());
    for &id in ids {
        let span = instances[id]
            .span
            .ok_or(LayeringError::NotWindowed { instance: id })?;
        spans.push((id, span));
    }
    let len = |(s, e): (usize, usize)| e - s + 1;
    let lmin = spans.iter().map(|&(_, sp)| len(sp)).min().ok_or(LayeringError::Empty)?;
    let lmax = spans.iter().map(|&(_, sp)| len(sp)).max().expect("non-empty");
    // smallest k with lmin * 2^k >= lmax
    let mut k = 0;
    while lmin << k < lmax {
        k += 1;
    }
    let length = k + 1;
    let mut groups = vec![Vec::new(); length];
    let mut critical = BTreeMap::new();
    for (id, (s, e)) in spans {
        let mut i = 0;
        while lmin << (i + 1) <= e - s + 1 {
            i += 1;
        }
        groups[i].push(id);
        let net = instances[id].net;
        let mid = (s + e) / 2;
        let mut pi = vec![
            EdgeRef::timeslot(net, s),
            EdgeRef::timeslot(net, mid),
            EdgeRef::timeslot(net, e),
        ];
        pi.dedup();
        critical.insert(id, pi);
    }
    for g in groups.iter_mut() {
        g.sort_unstable();
    }
    Ok(LayeredDecomposition {
        net: None,
        delta: critical.values().map(Vec::len).max().unwrap_or(0),
        groups,
        critical,
        capture: BTreeMap::new(),
        length,
    })
}

/// Exhaustive check over ordered pairs `(d1 ∈ G_i, d2 ∈ G_j)`, `i <= j`:
/// overlapping pairs must have `path(d2)` meet `π(d1)`. Returns the first
/// violating pair.
pub fn check_interference(
    layered: &LayeredDecomposition,
    instances: &[DemandInstance],
) -> Result<(), (InstanceId, InstanceId)> {
    for (i, gi) in layered.groups.iter().enumerate() {
        for &d1 in gi {
            let pi = layered.critical_of(d1);
            for gj in &layered.groups[i..] {
                for &d2 in gj {
                    if d1 == d2 || !overlapping(&instances[d1], &instances[d2]) {
                        continue;
                    }
                    if !pi.iter().any(|e| instances[d2].uses(e)) {
                        return Err((d1, d2));
                    }
                }
            }
        }
    }
    Ok(())
}

/// Layers a subset of instances. Tree problems get one layering per network
/// that carries any of them, built on a decomposition of `kind`; line problems
/// get a single length-class layering. No ids gives no layerings.
pub fn layer_instances(
    problem: &Problem,
    instances: &[DemandInstance],
    ids: &[InstanceId],
    kind: DecompositionKind,
) -> Result<Vec<LayeredDecomposition>, LayeringError> {
    if ids.is_empty() {
        return Ok(Vec::new());
    }
    if problem.mode() == Mode::Line {
        return Ok(vec![layer_line_by_length(instances, ids)?]);
    }
    let mut by_net: Vec<_> = instances_by_network(instances, ids.iter().copied())
        .into_iter()
        .collect();
    by_net.sort_unstable_by_key(|(net, _)| *net);
    let mut out = Vec::new();
    for (net_idx, on_net) in by_net {
        let net = problem.network(net_idx);
        let dec = build(net, kind);
        out.push(layer_from_decomposition(&dec, net, net_idx, instances, &on_net)?);
    }
    Ok(out)
}
