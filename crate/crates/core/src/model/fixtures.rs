//! Small hand-built networks with known decomposition and routing behavior.
//! Used by unit tests, the acceptance suite and the CLI smoke tests.

use super::{
    expand_demand_instances, Demand, DemandInstance, DemandShape, Mode, Problem, Processor,
    TreeNetwork, Vertex,
};
use crate::rational::{q_int, Q};

const BRANCHING_EDGES: [(Vertex, Vertex); 13] = [
    (1, 2),
    (2, 4),
    (2, 5),
    (5, 9),
    (5, 8),
    (8, 13),
    (8, 12),
    (1, 3),
    (3, 6),
    (3, 7),
    (1, 10),
    (10, 11),
    (10, 14),
];

/// Fourteen vertices; the route 4 -> 13 bends through 2, 5 and 8.
pub fn branching_tree() -> TreeNetwork {
    branching_tree_with_id(0)
}

pub fn branching_tree_with_id(id: u32) -> TreeNetwork {
    TreeNetwork::new(id, 14, &BRANCHING_EDGES).expect("fixture is a tree")
}

const BOTTLENECK_EDGES: [(Vertex, Vertex); 12] = [
    (1, 4),
    (2, 4),
    (12, 4),
    (4, 5),
    (5, 10),
    (5, 3),
    (5, 13),
    (4, 6),
    (5, 7),
    (6, 8),
    (7, 9),
    (9, 11),
];

/// Thirteen vertices where the routes 1-10, 2-3 and 12-13 share only edge 4-5.
pub fn bottleneck_tree() -> TreeNetwork {
    TreeNetwork::new(0, 13, &BOTTLENECK_EDGES).expect("fixture is a tree")
}

/// Three unit-profit demands across [`bottleneck_tree`] with the given heights,
/// one processor each, all on the single network.
pub fn bottleneck_problem(heights: [Q; 3]) -> (Problem, Vec<DemandInstance>) {
    let pairs = [(1, 10), (2, 3), (12, 13)];
    let processors = (0..3)
        .map(|i| Processor {
            id: i as u32,
            access: vec![0],
            demand: i,
        })
        .collect();
    let demands = pairs
        .iter()
        .zip(heights)
        .enumerate()
        .map(|(i, (&(u, v), height))| Demand {
            id: i as u32,
            owner: i,
            shape: DemandShape::Pair { u, v },
            profit: q_int(1),
            height,
        })
        .collect();
    let problem = Problem::new(Mode::Tree, 13, vec![bottleneck_tree()], processors, demands)
        .expect("fixture problem is valid");
    let inst = expand_demand_instances(&problem);
    (problem, inst)
}

/// A component `10..=16` hanging off two outside vertices 1 and 2 through
/// different branches of its balancer 10.
pub fn split_neighbors_tree() -> TreeNetwork {
    let edges = [
        (10, 11),
        (11, 12),
        (10, 13),
        (13, 14),
        (10, 15),
        (15, 16),
        (1, 12),
        (2, 14),
        (1, 3),
        (3, 4),
        (4, 5),
        (2, 6),
        (6, 7),
        (7, 8),
        (8, 9),
    ];
    TreeNetwork::new(0, 16, &edges).expect("fixture is a tree")
}

/// Component members of [`split_neighbors_tree`].
pub const SPLIT_NEIGHBORS_COMPONENT: [Vertex; 7] = [10, 11, 12, 13, 14, 15, 16];

/// A component `{10..=14, 20..=26}` whose two outside neighbors 1 and 2 attach
/// in the same part below balancer 20, meeting at junction 10.
pub fn junction_tree() -> TreeNetwork {
    let mut edges = vec![
        (11, 10),
        (10, 12),
        (10, 13),
        (13, 20),
        (10, 14),
        (20, 21),
        (21, 22),
        (20, 23),
        (23, 24),
        (20, 25),
        (25, 26),
        (1, 11),
        (2, 12),
    ];
    for a in 3..9 {
        edges.push((a, a + 1));
    }
    edges.push((1, 3));
    edges.push((2, 15));
    for a in 15..19 {
        edges.push((a, a + 1));
    }
    TreeNetwork::new(0, 26, &edges).expect("fixture is a tree")
}

pub const JUNCTION_COMPONENT: [Vertex; 12] = [10, 11, 12, 13, 14, 20, 21, 22, 23, 24, 25, 26];
