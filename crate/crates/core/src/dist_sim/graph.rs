use std::collections::HashMap;

use crate::model::{DemandInstance, EdgeRef, InstanceId, Problem};

/// Undirected graph over labelled vertices; `adj` lists are ascending.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Graph {
    pub labels: Vec<usize>,
    pub adj: Vec<Vec<usize>>,
}

impl Graph {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    fn from_pairs(labels: Vec<usize>, pairs: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut adj = vec![Vec::new(); labels.len()];
        for (a, b) in pairs {
            if a != b {
                adj[a].push(b);
                adj[b].push(a);
            }
        }
        for list in adj.iter_mut() {
            list.sort_unstable();
            list.dedup();
        }
        Graph { labels, adj }
    }

    /// No edge inside `set` (local indices).
    pub fn is_independent(&self, set: &[usize]) -> bool {
        let mut inside = vec![false; self.len()];
        for &v in set {
            inside[v] = true;
        }
        set.iter().all(|&v| self.adj[v].iter().all(|&w| !inside[w]))
    }

    /// Independent, and every vertex outside has a neighbor inside.
    pub fn is_maximal_independent(&self, set: &[usize]) -> bool {
        if !self.is_independent(set) {
            return false;
        }
        let mut inside = vec![false; self.len()];
        for &v in set {
            inside[v] = true;
        }
        (0..self.len()).all(|v| inside[v] || self.adj[v].iter().any(|&w| inside[w]))
    }
}

/// Conflict graph over `ids`: same demand or a shared edge.
pub fn conflict_graph(instances: &[DemandInstance], ids: &[InstanceId]) -> Graph {
    let mut pairs = Vec::new();
    let mut by_demand: HashMap<usize, Vec<usize>> = HashMap::new();
    for (i, &id) in ids.iter().enumerate() {
        by_demand.entry(instances[id].demand).or_default().push(i);
    }
    for group in by_demand.values() {
        push_clique(group, &mut pairs);
    }

    // Intervals: sweep by start. Paths: bucket by edge.
    let (spanned, routed): (Vec<usize>, Vec<usize>) =
        (0..ids.len()).partition(|&i| instances[ids[i]].span.is_some());
    let mut order: Vec<(usize, usize, usize, usize)> = spanned
        .iter()
        .map(|&i| {
            let d = &instances[ids[i]];
            let (s, e) = d.span.expect("partitioned on span");
            (d.net, s, e, i)
        })
        .collect();
    order.sort_unstable();
    for (a, &(net, _, end, i)) in order.iter().enumerate() {
        for &(net2, s2, _, j) in &order[a + 1..] {
            if net2 != net || s2 > end {
                break;
            }
            pairs.push((i, j));
        }
    }
    let mut by_edge: HashMap<EdgeRef, Vec<usize>> = HashMap::new();
    for &i in &routed {
        for e in instances[ids[i]].sorted_edges() {
            by_edge.entry(*e).or_default().push(i);
        }
    }
    for group in by_edge.values() {
        push_clique(group, &mut pairs);
    }
    Graph::from_pairs(ids.to_vec(), pairs)
}

fn push_clique(group: &[usize], pairs: &mut Vec<(usize, usize)>) {
    for (a, &x) in group.iter().enumerate() {
        for &y in &group[a + 1..] {
            pairs.push((x, y));
        }
    }
}

/// Processors are adjacent when their access sets share a network.
pub fn communication_graph(problem: &Problem) -> Graph {
    let mut by_net: HashMap<usize, Vec<usize>> = HashMap::new();
    for (p, proc) in problem.processors().iter().enumerate() {
        for &net in &proc.access {
            by_net.entry(net).or_default().push(p);
        }
    }
    let mut pairs = Vec::new();
    for group in by_net.values() {
        push_clique(group, &mut pairs);
    }
    Graph::from_pairs((0..problem.processors().len()).collect(), pairs)
}
