//! Rooted tree decompositions of a network: root-fixing, balancing and ideal.
//!
//! A decomposition `H` of a tree `T` is a rooted tree on the same vertices in
//! which (i) the `T`-path between any two vertices passes through their
//! `H`-lowest common ancestor and (ii) every `H`-subtree `C(z)` induces a
//! connected piece of `T`. The neighbors of `C(z)` in `T` form the pivot set
//! `χ(z)`.

mod build;
mod validate;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::Vertex;

pub use build::{
    build, build_balancing, build_ideal, build_root_fixing, find_balancer, find_junction,
    ideal_step, split_component, IdealCase, IdealPart, IdealStep,
};
pub use validate::{
    pivot_set, validate_decomposition, validate_exhaustive, DecompositionDump,
    DecompositionReport, DecompositionViolation,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecompositionKind {
    RootFixing,
    Balancing,
    Ideal,
}

impl DecompositionKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::RootFixing => "root_fixing",
            Self::Balancing => "balancing",
            Self::Ideal => "ideal",
        }
    }
}

impl std::str::FromStr for DecompositionKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "root_fixing" | "root-fixing" => Ok(Self::RootFixing),
            "balancing" => Ok(Self::Balancing),
            "ideal" => Ok(Self::Ideal),
            _ => Err(format!("unknown decomposition kind {s:?}")),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DecompositionError {
    #[error("component is empty")]
    EmptyComponent,
    #[error("vertex {0} is not part of the network")]
    VertexOutOfRange(Vertex),
    #[error("vertex {0} is not in the component")]
    NotInComponent(Vertex),
    #[error("component does not induce a connected subtree")]
    ComponentDisconnected,
    #[error("component has {0} outside neighbors, at most two allowed")]
    TooManyNeighbors(usize),
    #[error("junction preconditions fail: {0}")]
    NoJunction(&'static str),
    #[error("parent array does not describe a rooted tree: {0}")]
    NotATree(&'static str),
    #[error("decomposition of network {decomposition} used with network {network}")]
    NetworkMismatch { decomposition: u32, network: u32 },
}

/// A rooted tree `H` over the vertices `1..=n` of one network.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootedDecomposition {
    net: u32,
    kind: DecompositionKind,
    root: Vertex,
    parent: Vec<Vertex>,
    depth: Vec<u32>,
    children: Vec<Vec<Vertex>>,
    tin: Vec<u32>,
    tout: Vec<u32>,
}

impl RootedDecomposition {
    /// Builds from a parent array of length `n + 1`; `parent[root] == 0` and
    /// `parent[0]` is ignored.
    pub fn from_parents(
        net: u32,
        kind: DecompositionKind,
        parent: Vec<Vertex>,
    ) -> Result<Self, DecompositionError> {
        let n = parent.len().saturating_sub(1);
        if n == 0 {
            return Err(DecompositionError::NotATree("no vertices"));
        }
        let mut root = 0;
        let mut children = vec![Vec::new(); n + 1];
        for v in 1..=n {
            let p = parent[v];
            if p == 0 {
                if root != 0 {
                    return Err(DecompositionError::NotATree("several roots"));
                }
                root = v;
            } else if p > n || p == v {
                return Err(DecompositionError::NotATree("parent out of range"));
            } else {
                children[p].push(v);
            }
        }
        if root == 0 {
            return Err(DecompositionError::NotATree("no root"));
        }

        // preorder from the root; unreached vertices sit on a cycle
        let mut order = Vec::with_capacity(n);
        let mut depth = vec![0u32; n + 1];
        depth[root] = 1;
        let mut stack = vec![root];
        while let Some(x) = stack.pop() {
            order.push(x);
            for &c in &children[x] {
                depth[c] = depth[x] + 1;
                stack.push(c);
            }
        }
        if order.len() != n {
            return Err(DecompositionError::NotATree("cycle"));
        }

        let mut min_below: Vec<Vertex> = (0..=n).collect();
        for &x in order.iter().rev() {
            let p = parent[x];
            if p != 0 && min_below[x] < min_below[p] {
                min_below[p] = min_below[x];
            }
        }
        for list in children.iter_mut() {
            list.sort_unstable_by_key(|&c| min_below[c]);
        }

        let mut tin = vec![0u32; n + 1];
        let mut tout = vec![0u32; n + 1];
        let mut clock = 0u32;
        let mut stack = vec![(root, 0usize)];
        tin[root] = clock;
        while let Some(top) = stack.last_mut() {
            let (x, next) = *top;
            if let Some(&c) = children[x].get(next) {
                top.1 += 1;
                clock += 1;
                tin[c] = clock;
                stack.push((c, 0));
            } else {
                tout[x] = clock;
                stack.pop();
            }
        }

        Ok(RootedDecomposition {
            net,
            kind,
            root,
            parent,
            depth,
            children,
            tin,
            tout,
        })
    }

    /// Id of the network this decomposes.
    pub fn net(&self) -> u32 {
        self.net
    }

    pub fn kind(&self) -> DecompositionKind {
        self.kind
    }

    pub fn root(&self) -> Vertex {
        self.root
    }

    pub fn n(&self) -> usize {
        self.parent.len() - 1
    }

    /// `None` for the root.
    pub fn parent(&self, v: Vertex) -> Option<Vertex> {
        match self.parent[v] {
            0 => None,
            p => Some(p),
        }
    }

    pub fn parents(&self) -> &[Vertex] {
        &self.parent
    }

    /// Root has depth 1.
    pub fn depth(&self, v: Vertex) -> u32 {
        self.depth[v]
    }

    pub fn max_depth(&self) -> u32 {
        self.depth.iter().copied().max().unwrap_or(0)
    }

    /// Children ordered by the smallest vertex in their subtree.
    pub fn children(&self, v: Vertex) -> &[Vertex] {
        &self.children[v]
    }

    /// True when `a` is `b` or an ancestor of `b`.
    pub fn is_ancestor(&self, a: Vertex, b: Vertex) -> bool {
        self.tin[a] <= self.tin[b] && self.tout[b] <= self.tout[a]
    }

    pub fn lca(&self, mut a: Vertex, mut b: Vertex) -> Vertex {
        while self.depth[a] > self.depth[b] {
            a = self.parent[a];
        }
        while self.depth[b] > self.depth[a] {
            b = self.parent[b];
        }
        while a != b {
            a = self.parent[a];
            b = self.parent[b];
        }
        a
    }

    /// `C(z)`: `z` and all of its descendants, ascending.
    pub fn component(&self, z: Vertex) -> Vec<Vertex> {
        let mut out = Vec::new();
        let mut stack = vec![z];
        while let Some(x) = stack.pop() {
            out.push(x);
            stack.extend_from_slice(&self.children[x]);
        }
        out.sort_unstable();
        out
    }

    /// Size of `C(z)`.
    pub fn component_size(&self, z: Vertex) -> usize {
        // preorder numbering is contiguous per subtree
        (self.tout[z] - self.tin[z]) as usize + 1
    }
}
