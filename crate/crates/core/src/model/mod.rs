//! Problem representation: tree/line networks, processors with access sets,
//! demands, and their expansion into schedulable demand instances.

mod feasibility;
pub mod fixtures;
mod format;
mod network;

use std::collections::{BTreeSet, HashMap};

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rational::{lcm_of_denominators, scaled_integer, Q};

pub use feasibility::{check_feasible, FeasibilityTracker, Violation};
pub use format::{DemandEntry, InstanceFile, NetworkEntry, ProcessorEntry};
pub use network::{EdgeRef, TreeNetwork};

/// 1-based vertex label.
pub type Vertex = usize;
/// Dense index into [`Problem::networks`].
pub type NetIdx = usize;
/// Dense index into [`Problem::demands`].
pub type DemandIdx = usize;
/// Dense index into [`Problem::processors`].
pub type ProcIdx = usize;
/// Dense index into the expanded instance list; equals the position in it.
pub type InstanceId = usize;

/// Largest scale accepted for the common profit/height denominators.
const MAX_SCALE: i128 = 1 << 62;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Tree,
    Line,
}

/// Which capacity rule a selection has to respect.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HeightMode {
    /// Every demand occupies a whole edge: selections on a network are edge-disjoint.
    Unit,
    /// Heights on an edge sum to at most one.
    Height,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("vertex set is empty")]
    EmptyVertexSet,
    #[error("vertex {vertex} outside 1..={n}")]
    VertexOutOfRange { vertex: Vertex, n: usize },
    #[error("network {network}: expected {expected} edges, found {found}")]
    EdgeCount {
        network: u32,
        expected: usize,
        found: usize,
    },
    #[error("network {network}: self loop at {vertex}")]
    SelfLoop { network: u32, vertex: Vertex },
    #[error("network {network}: duplicate edge at vertex {vertex}")]
    DuplicateEdge { network: u32, vertex: Vertex },
    #[error("network {network} is not connected")]
    Disconnected { network: u32 },
    #[error("line network {network} must be the path 1..n")]
    NotALine { network: u32 },
    #[error("path from {vertex} to itself is empty")]
    EmptyPath { vertex: Vertex },
    #[error("duplicate {what} id {id}")]
    DuplicateId { what: &'static str, id: u32 },
    #[error("unknown {what} id {id}")]
    UnknownId { what: &'static str, id: u32 },
    #[error("processor {processor} has an empty access set")]
    EmptyAccess { processor: u32 },
    #[error("processor {processor} owns {count} demands, expected exactly one")]
    Ownership { processor: u32, count: usize },
    #[error("demand {demand} has identical endpoints {vertex}")]
    DegenerateDemand { demand: u32, vertex: Vertex },
    #[error("demand {demand}: invalid window [{release}, {deadline}] for processing time {processing}")]
    BadWindow {
        demand: u32,
        release: usize,
        deadline: usize,
        processing: usize,
    },
    #[error("demand {demand} does not match the instance mode")]
    ShapeMismatch { demand: u32 },
    #[error("demand {demand}: profit must be positive")]
    NonPositiveProfit { demand: u32 },
    #[error("demand {demand}: height must lie in (0, 1]")]
    HeightOutOfRange { demand: u32 },
    #[error("demand {demand}: denominator must be positive")]
    BadDenominator { demand: u32 },
    #[error("common {what} denominator does not fit in 62 bits")]
    ScaleOverflow { what: &'static str },
    #[error("unknown mode {0:?}")]
    UnknownMode(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DemandShape {
    /// Tree mode: route between two distinct vertices.
    Pair { u: Vertex, v: Vertex },
    /// Line mode: `processing` consecutive timeslots inside `[release, deadline]`.
    Window {
        release: usize,
        deadline: usize,
        processing: usize,
    },
}

#[derive(Clone, Debug)]
pub struct Demand {
    pub id: u32,
    pub owner: ProcIdx,
    pub shape: DemandShape,
    pub profit: Q,
    pub height: Q,
}

#[derive(Clone, Debug)]
pub struct Processor {
    pub id: u32,
    /// Accessible networks, ascending.
    pub access: Vec<NetIdx>,
    pub demand: DemandIdx,
}

/// A validated problem instance.
#[derive(Clone, Debug)]
pub struct Problem {
    mode: Mode,
    n: usize,
    networks: Vec<TreeNetwork>,
    processors: Vec<Processor>,
    demands: Vec<Demand>,
    profit_scale: i128,
    height_scale: i128,
}

impl Problem {
    /// Assembles a problem. `demands[i].owner` must name the processor index
    /// and `processors[p].demand` the demand it owns.
    pub fn new(
        mode: Mode,
        n: usize,
        networks: Vec<TreeNetwork>,
        processors: Vec<Processor>,
        demands: Vec<Demand>,
    ) -> Result<Self, ModelError> {
        if n == 0 {
            return Err(ModelError::EmptyVertexSet);
        }
        let mut seen = BTreeSet::new();
        for net in &networks {
            if !seen.insert(net.id()) {
                return Err(ModelError::DuplicateId {
                    what: "network",
                    id: net.id(),
                });
            }
            if net.n() != n {
                return Err(ModelError::EdgeCount {
                    network: net.id(),
                    expected: n - 1,
                    found: net.edges().len(),
                });
            }
            if mode == Mode::Line && (1..n).any(|t| !net.has_edge(t, t + 1)) {
                return Err(ModelError::NotALine { network: net.id() });
            }
        }
        let mut seen = BTreeSet::new();
        for p in &processors {
            if !seen.insert(p.id) {
                return Err(ModelError::DuplicateId {
                    what: "processor",
                    id: p.id,
                });
            }
            if p.access.is_empty() {
                return Err(ModelError::EmptyAccess { processor: p.id });
            }
            if let Some(&bad) = p.access.iter().find(|&&t| t >= networks.len()) {
                return Err(ModelError::UnknownId {
                    what: "network",
                    id: bad as u32,
                });
            }
        }
        let mut owned = vec![0usize; processors.len()];
        let mut seen = BTreeSet::new();
        for (idx, d) in demands.iter().enumerate() {
            if !seen.insert(d.id) {
                return Err(ModelError::DuplicateId {
                    what: "demand",
                    id: d.id,
                });
            }
            if d.owner >= processors.len() {
                return Err(ModelError::UnknownId {
                    what: "processor",
                    id: d.owner as u32,
                });
            }
            owned[d.owner] += 1;
            if processors[d.owner].demand != idx {
                return Err(ModelError::Ownership {
                    processor: processors[d.owner].id,
                    count: 0,
                });
            }
            validate_demand(mode, n, d)?;
        }
        if let Some((p, &count)) = owned.iter().enumerate().find(|(_, &c)| c != 1) {
            return Err(ModelError::Ownership {
                processor: processors[p].id,
                count,
            });
        }

        let profit_scale = lcm_of_denominators(demands.iter().map(|d| &d.profit))
            .filter(|&s| s <= MAX_SCALE)
            .ok_or(ModelError::ScaleOverflow { what: "profit" })?;
        let height_scale = lcm_of_denominators(demands.iter().map(|d| &d.height))
            .filter(|&s| s <= MAX_SCALE)
            .ok_or(ModelError::ScaleOverflow { what: "height" })?;
        for d in &demands {
            if scaled_integer(&d.profit, profit_scale).is_none() {
                return Err(ModelError::ScaleOverflow { what: "profit" });
            }
        }

        Ok(Problem {
            mode,
            n,
            networks,
            processors,
            demands,
            profit_scale,
            height_scale,
        })
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn networks(&self) -> &[TreeNetwork] {
        &self.networks
    }

    pub fn network(&self, idx: NetIdx) -> &TreeNetwork {
        &self.networks[idx]
    }

    pub fn processors(&self) -> &[Processor] {
        &self.processors
    }

    pub fn demands(&self) -> &[Demand] {
        &self.demands
    }

    /// Common denominator of every profit.
    pub fn profit_scale(&self) -> i128 {
        self.profit_scale
    }

    /// Common denominator of every height; an edge holds `height_scale` units.
    pub fn height_scale(&self) -> i128 {
        self.height_scale
    }

    pub fn is_unit_height(&self) -> bool {
        self.demands.iter().all(|d| d.height.is_one())
    }

    pub fn min_height(&self) -> Option<Q> {
        self.demands.iter().map(|d| d.height.clone()).min()
    }
}

fn validate_demand(mode: Mode, n: usize, d: &Demand) -> Result<(), ModelError> {
    if !d.profit.is_positive() {
        return Err(ModelError::NonPositiveProfit { demand: d.id });
    }
    if !d.height.is_positive() || d.height > Q::one() {
        return Err(ModelError::HeightOutOfRange { demand: d.id });
    }
    match (&d.shape, mode) {
        (&DemandShape::Pair { u, v }, Mode::Tree) => {
            for x in [u, v] {
                if x == 0 || x > n {
                    return Err(ModelError::VertexOutOfRange { vertex: x, n });
                }
            }
            if u == v {
                return Err(ModelError::DegenerateDemand {
                    demand: d.id,
                    vertex: u,
                });
            }
        }
        (
            &DemandShape::Window {
                release,
                deadline,
                processing,
            },
            Mode::Line,
        ) => {
            let ok = release >= 1
                && processing >= 1
                && release + processing - 1 <= deadline
                && deadline < n;
            if !ok {
                return Err(ModelError::BadWindow {
                    demand: d.id,
                    release,
                    deadline,
                    processing,
                });
            }
        }
        _ => return Err(ModelError::ShapeMismatch { demand: d.id }),
    }
    Ok(())
}

/// One schedulable copy of a demand on one network (and start slot, in line mode).
#[derive(Clone, Debug)]
pub struct DemandInstance {
    pub id: InstanceId,
    pub demand: DemandIdx,
    pub owner: ProcIdx,
    pub net: NetIdx,
    /// Path vertices from the first endpoint to the second.
    pub vertices: Vec<Vertex>,
    /// Path edges in path order.
    pub edges: Vec<EdgeRef>,
    sorted_edges: Vec<EdgeRef>,
    /// Line mode: first and last occupied timeslot.
    pub span: Option<(usize, usize)>,
    pub profit: Q,
    pub height: Q,
    /// `profit * profit_scale`.
    pub profit_units: i128,
    /// `height * height_scale`.
    pub height_units: i128,
}

impl DemandInstance {
    fn build(
        id: InstanceId,
        demand: DemandIdx,
        d: &Demand,
        problem: &Problem,
        net: NetIdx,
        vertices: Vec<Vertex>,
        span: Option<(usize, usize)>,
    ) -> Self {
        let edges: Vec<EdgeRef> = vertices
            .windows(2)
            .map(|w| EdgeRef::new(net, w[0], w[1]))
            .collect();
        let mut sorted_edges = edges.clone();
        sorted_edges.sort_unstable();
        DemandInstance {
            id,
            demand,
            owner: d.owner,
            net,
            vertices,
            edges,
            sorted_edges,
            span,
            profit: d.profit.clone(),
            height: d.height.clone(),
            profit_units: scaled_integer(&d.profit, problem.profit_scale)
                .expect("profit scale validated"),
            height_units: scaled_integer(&d.height, problem.height_scale)
                .expect("height scale validated"),
        }
    }

    pub fn endpoints(&self) -> (Vertex, Vertex) {
        (self.vertices[0], *self.vertices.last().expect("non-empty path"))
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// True when the instance is active on `e`.
    pub fn uses(&self, e: &EdgeRef) -> bool {
        self.sorted_edges.binary_search(e).is_ok()
    }

    pub fn sorted_edges(&self) -> &[EdgeRef] {
        &self.sorted_edges
    }

    /// Position of `v` along the path, if the path visits it.
    pub fn position(&self, v: Vertex) -> Option<usize> {
        self.vertices.iter().position(|&x| x == v)
    }

    pub fn is_wide(&self) -> bool {
        self.height > Q::new(1.into(), 2.into())
    }
}

/// Same network and at least one shared edge (timeslot).
pub fn overlapping(a: &DemandInstance, b: &DemandInstance) -> bool {
    if a.net != b.net {
        return false;
    }
    if let (Some((s1, e1)), Some((s2, e2))) = (a.span, b.span) {
        return s1 <= e2 && s2 <= e1;
    }
    let (mut i, mut j) = (0, 0);
    let (x, y) = (&a.sorted_edges, &b.sorted_edges);
    while i < x.len() && j < y.len() {
        match x[i].cmp(&y[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => return true,
        }
    }
    false
}

/// Same demand, or overlapping.
pub fn conflicting(a: &DemandInstance, b: &DemandInstance) -> bool {
    a.demand == b.demand || overlapping(a, b)
}

/// One instance per (demand, accessible network) in tree mode, and one per
/// (demand, accessible resource, feasible start slot) in line mode.
/// Ids are assigned in demand order, then network order, then start slot.
pub fn expand_demand_instances(problem: &Problem) -> Vec<DemandInstance> {
    let mut out = Vec::new();
    for (di, d) in problem.demands.iter().enumerate() {
        let proc = &problem.processors[d.owner];
        for &net in &proc.access {
            match d.shape {
                DemandShape::Pair { u, v } => {
                    let verts = problem.networks[net].path_vertices(u, v);
                    let inst = DemandInstance::build(out.len(), di, d, problem, net, verts, None);
                    out.push(inst);
                }
                DemandShape::Window {
                    release,
                    deadline,
                    processing,
                } => {
                    for s in release..=deadline + 1 - processing {
                        let e = s + processing - 1;
                        let verts: Vec<Vertex> = (s..=e + 1).collect();
                        let inst = DemandInstance::build(
                            out.len(),
                            di,
                            d,
                            problem,
                            net,
                            verts,
                            Some((s, e)),
                        );
                        out.push(inst);
                    }
                }
            }
        }
    }
    out
}

/// A set of selected instances and its total profit.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Solution {
    pub selected: BTreeSet<InstanceId>,
    pub profit: Q,
}

impl Solution {
    pub fn empty() -> Self {
        Solution {
            selected: BTreeSet::new(),
            profit: Q::zero(),
        }
    }

    pub fn from_ids(
        instances: &[DemandInstance],
        ids: impl IntoIterator<Item = InstanceId>,
    ) -> Self {
        let selected: BTreeSet<_> = ids.into_iter().collect();
        let profit = selected
            .iter()
            .filter_map(|&i| instances.get(i))
            .fold(Q::zero(), |acc, d| acc + &d.profit);
        Solution { selected, profit }
    }

    pub fn len(&self) -> usize {
        self.selected.len()
    }

    pub fn is_empty(&self) -> bool {
        self.selected.is_empty()
    }
}

/// Instances grouped by the network they live on.
pub fn instances_by_network(
    instances: &[DemandInstance],
    ids: impl IntoIterator<Item = InstanceId>,
) -> HashMap<NetIdx, Vec<InstanceId>> {
    let mut map: HashMap<NetIdx, Vec<InstanceId>> = HashMap::new();
    for id in ids {
        map.entry(instances[id].net).or_default().push(id);
    }
    map
}
