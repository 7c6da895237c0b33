use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::RootedDecomposition;
use crate::model::{TreeNetwork, Vertex};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecompositionReport {
    /// Largest vertex depth, root counted as 1.
    pub depth: u32,
    /// Largest pivot set.
    pub theta: usize,
    /// `pivots[z]` is `χ(z)` ascending; index 0 is unused.
    pub pivots: Vec<Vec<Vertex>>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DecompositionViolation {
    #[error("decomposition of network {decomposition} checked against network {network}")]
    NetworkMismatch { decomposition: u32, network: u32 },
    #[error("decomposition has {decomposition} vertices, network has {network}")]
    SizeMismatch { decomposition: usize, network: usize },
    #[error("path {x}-{y} avoids their common ancestor {lca}")]
    LcaOffPath { x: Vertex, y: Vertex, lca: Vertex },
    #[error("component below {z} is not connected")]
    ComponentDisconnected { z: Vertex },
}

fn check_shape(dec: &RootedDecomposition, net: &TreeNetwork) -> Result<(), DecompositionViolation> {
    if dec.net() != net.id() {
        return Err(DecompositionViolation::NetworkMismatch {
            decomposition: dec.net(),
            network: net.id(),
        });
    }
    if dec.n() != net.n() {
        return Err(DecompositionViolation::SizeMismatch {
            decomposition: dec.n(),
            network: net.n(),
        });
    }
    Ok(())
}

/// Checks both decomposition properties in near-linear time and reports depth
/// and pivot sets.
///
/// Given connected components, the path property reduces to every network
/// edge joining an ancestor to a descendant; a component `C(z)` is connected
/// exactly when it contains `|C(z)| - 1` network edges.
pub fn validate_decomposition(
    dec: &RootedDecomposition,
    net: &TreeNetwork,
) -> Result<DecompositionReport, DecompositionViolation> {
    check_shape(dec, net)?;
    let n = net.n();
    let mut inner = vec![0usize; n + 1];
    let mut nested = Vec::with_capacity(n.saturating_sub(1));
    for (a, b) in net.edges() {
        let (upper, lower) = if dec.is_ancestor(a, b) {
            (a, b)
        } else if dec.is_ancestor(b, a) {
            (b, a)
        } else {
            return Err(DecompositionViolation::LcaOffPath {
                x: a,
                y: b,
                lca: dec.lca(a, b),
            });
        };
        inner[upper] += 1;
        nested.push((upper, lower));
    }

    let mut order = vec![0; n];
    for v in 1..=n {
        order[dec.tin[v] as usize] = v;
    }
    for &v in order.iter().rev() {
        if let Some(p) = dec.parent(v) {
            inner[p] += inner[v];
        }
    }
    for z in 1..=n {
        if inner[z] + 1 != dec.component_size(z) {
            return Err(DecompositionViolation::ComponentDisconnected { z });
        }
    }

    let mut pivots = vec![Vec::new(); n + 1];
    for (upper, lower) in nested {
        let mut z = lower;
        while z != upper {
            pivots[z].push(upper);
            z = dec.parent[z];
        }
    }
    for p in pivots.iter_mut() {
        p.sort_unstable();
        p.dedup();
    }
    Ok(DecompositionReport {
        depth: dec.max_depth(),
        theta: pivots.iter().map(Vec::len).max().unwrap_or(0),
        pivots,
    })
}

/// Quadratic cross-check: tests the path property for every vertex pair,
/// connectivity of every component by search, and pivots by enumeration.
pub fn validate_exhaustive(
    dec: &RootedDecomposition,
    net: &TreeNetwork,
) -> Result<DecompositionReport, DecompositionViolation> {
    check_shape(dec, net)?;
    let n = net.n();
    for x in 1..=n {
        for y in x + 1..=n {
            let w = dec.lca(x, y);
            if !net.on_path(x, y, w) {
                return Err(DecompositionViolation::LcaOffPath { x, y, lca: w });
            }
        }
    }
    let mut pivots = vec![Vec::new(); n + 1];
    for z in 1..=n {
        let comp = dec.component(z);
        let mut inside = vec![false; n + 1];
        for &v in &comp {
            inside[v] = true;
        }
        let mut seen = vec![false; n + 1];
        seen[z] = true;
        let mut queue = VecDeque::from([z]);
        let mut reached = 0;
        while let Some(x) = queue.pop_front() {
            reached += 1;
            for &y in net.neighbors(x) {
                if inside[y] && !seen[y] {
                    seen[y] = true;
                    queue.push_back(y);
                }
            }
        }
        if reached != comp.len() {
            return Err(DecompositionViolation::ComponentDisconnected { z });
        }
        pivots[z] = pivot_set(dec, net, z);
    }
    Ok(DecompositionReport {
        depth: (1..=n).map(|v| dec.depth(v)).max().unwrap_or(0),
        theta: pivots.iter().map(Vec::len).max().unwrap_or(0),
        pivots,
    })
}

/// `χ(z)`: network neighbors of `C(z)` outside it, ascending.
pub fn pivot_set(dec: &RootedDecomposition, net: &TreeNetwork, z: Vertex) -> Vec<Vertex> {
    let comp = dec.component(z);
    let mut inside = vec![false; net.n() + 1];
    for &v in &comp {
        inside[v] = true;
    }
    let mut out: Vec<Vertex> = comp
        .iter()
        .flat_map(|&v| net.neighbors(v).iter().copied())
        .filter(|&y| !inside[y])
        .collect();
    out.sort_unstable();
    out.dedup();
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DumpReport {
    pub depth: u32,
    pub theta: usize,
}

/// JSON form of a decomposition for golden files.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecompositionDump {
    pub net: u32,
    pub kind: String,
    pub root: Vertex,
    /// Non-root vertices to their parent.
    pub parent: BTreeMap<Vertex, Vertex>,
    pub report: DumpReport,
}

impl DecompositionDump {
    pub fn new(dec: &RootedDecomposition, report: &DecompositionReport) -> Self {
        DecompositionDump {
            net: dec.net(),
            kind: dec.kind().name().to_string(),
            root: dec.root(),
            parent: (1..=dec.n())
                .filter_map(|v| dec.parent(v).map(|p| (v, p)))
                .collect(),
            report: DumpReport {
                depth: report.depth,
                theta: report.theta,
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomposition::{build, build_balancing, build_root_fixing, DecompositionKind};
    use crate::generate::random_tree;
    use crate::model::fixtures;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const KINDS: [DecompositionKind; 3] = [
        DecompositionKind::RootFixing,
        DecompositionKind::Balancing,
        DecompositionKind::Ideal,
    ];

    #[test]
    fn balancing_pivots_on_branching_tree() {
        let net = fixtures::branching_tree();
        let d = build_balancing(&net);
        let report = validate_decomposition(&d, &net).unwrap();
        assert_eq!(report.pivots[5], vec![1]);
        assert_eq!(report.pivots[2], vec![1, 5]);
        assert_eq!(pivot_set(&d, &net, 2), vec![1, 5]);
        assert_eq!(report.theta, 2);
        assert!(report.theta as u32 <= report.depth - 1);
    }

    #[test]
    fn root_has_no_pivots() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let net = random_tree(0, 50, &mut rng);
        for kind in KINDS {
            let d = build(&net, kind);
            assert!(pivot_set(&d, &net, d.root()).is_empty());
        }
    }

    #[test]
    fn pivots_match_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..60 {
            let n = rng.gen_range(2..60);
            let net = random_tree(0, n, &mut rng);
            for kind in KINDS {
                let d = build(&net, kind);
                let report = validate_decomposition(&d, &net).unwrap();
                for z in 1..=n {
                    assert_eq!(report.pivots[z], pivot_set(&d, &net, z));
                }
                if kind == DecompositionKind::RootFixing {
                    assert_eq!(report.theta, 1);
                }
                if kind == DecompositionKind::Balancing {
                    assert!(report.theta as u32 <= report.depth - 1);
                }
            }
        }
    }

    #[test]
    fn two_vertices_either_root() {
        let net = TreeNetwork::line(0, 2).unwrap();
        for root in [1, 2] {
            let d = build_root_fixing(&net, root).unwrap();
            assert!(validate_decomposition(&d, &net).is_ok());
            assert!(validate_exhaustive(&d, &net).is_ok());
        }
    }

    #[test]
    fn detects_hand_made_violations() {
        // path 1-2-3 rooted at 1 but with 3 hung directly under 1
        let net = TreeNetwork::line(0, 3).unwrap();
        let d = RootedDecomposition::from_parents(0, DecompositionKind::RootFixing, vec![0, 0, 1, 1])
            .unwrap();
        assert!(matches!(
            validate_decomposition(&d, &net),
            Err(DecompositionViolation::LcaOffPath { .. })
        ));
        assert!(validate_exhaustive(&d, &net).is_err());
        // centre 1 and leaf 3 both hang under leaf 2, so edge 1-3 joins siblings
        let star = TreeNetwork::new(0, 3, &[(1, 2), (1, 3)]).unwrap();
        let d = RootedDecomposition::from_parents(0, DecompositionKind::Ideal, vec![0, 2, 0, 2])
            .unwrap();
        assert!(validate_decomposition(&d, &star).is_err());
        assert!(validate_exhaustive(&d, &star).is_err());
        let other = TreeNetwork::line(5, 3).unwrap();
        assert!(matches!(
            validate_decomposition(&d, &other),
            Err(DecompositionViolation::NetworkMismatch { .. })
        ));
    }

    /// Re-hangs one random non-root vertex under a random vertex outside its subtree.
    fn mutate(d: &RootedDecomposition, rng: &mut ChaCha8Rng) -> Option<RootedDecomposition> {
        let n = d.n();
        let v = rng.gen_range(1..=n);
        let old = d.parent(v)?;
        let x = rng.gen_range(1..=n);
        if x == old || d.is_ancestor(v, x) {
            return None;
        }
        let mut parent = d.parents().to_vec();
        parent[v] = x;
        RootedDecomposition::from_parents(d.net(), d.kind(), parent).ok()
    }

    #[test]
    fn mutations_are_detected() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let (mut tried, mut caught) = (0usize, 0usize);
        while tried < 3000 {
            let n = rng.gen_range(4..48);
            let net = random_tree(0, n, &mut rng);
            let kind = KINDS[rng.gen_range(0..3)];
            let d = build(&net, kind);
            let Some(m) = mutate(&d, &mut rng) else {
                continue;
            };
            tried += 1;
            let fast = validate_decomposition(&m, &net);
            let slow = validate_exhaustive(&m, &net);
            assert_eq!(fast.is_ok(), slow.is_ok());
            if let (Ok(a), Ok(b)) = (&fast, &slow) {
                assert_eq!(a, b);
            }
            if fast.is_err() {
                caught += 1;
            }
        }
        assert!(caught * 100 >= tried * 99, "caught {caught} of {tried}");
    }

    #[test]
    fn dump_round_trips() {
        let net = fixtures::branching_tree();
        let d = build_balancing(&net);
        let report = validate_decomposition(&d, &net).unwrap();
        let dump = DecompositionDump::new(&d, &report);
        assert_eq!(dump.parent.len(), 13);
        assert!(!dump.parent.contains_key(&d.root()));
        let text = serde_json::to_string(&dump).unwrap();
        let back: DecompositionDump = serde_json::from_str(&text).unwrap();
        assert_eq!(back, dump);
        assert!(text.contains("\"kind\":\"balancing\""));
    }
}
