use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::{ModelError, NetIdx, Vertex};

/// Canonical identity of an edge: the network index plus sorted endpoints.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EdgeRef {
    pub net: NetIdx,
    pub u: Vertex,
    pub v: Vertex,
}

impl EdgeRef {
    pub fn new(net: NetIdx, a: Vertex, b: Vertex) -> Self {
        let (u, v) = if a < b { (a, b) } else { (b, a) };
        EdgeRef { net, u, v }
    }

    /// Line mode: timeslot `t` is the edge `(t, t + 1)` of the resource path.
    pub fn timeslot(net: NetIdx, t: Vertex) -> Self {
        EdgeRef { net, u: t, v: t + 1 }
    }
}

/// A tree over vertices `1..=n`. Vertex 0 is never used.
///
/// The tree is rooted internally at vertex 1 so that paths, lowest common
/// ancestors and medians can be answered with binary lifting.
#[derive(Clone, Debug)]
pub struct TreeNetwork {
    id: u32,
    n: usize,
    adj: Vec<Vec<Vertex>>,
    parent: Vec<Vertex>,
    depth: Vec<u32>,
    up: Vec<Vec<Vertex>>,
}

impl TreeNetwork {
    pub fn new(id: u32, n: usize, edges: &[(Vertex, Vertex)]) -> Result<Self, ModelError> {
        if n == 0 {
            return Err(ModelError::EmptyVertexSet);
        }
        if edges.len() != n - 1 {
            return Err(ModelError::EdgeCount {
                network: id,
                expected: n - 1,
                found: edges.len(),
            });
        }
        let mut adj = vec![Vec::new(); n + 1];
        for &(a, b) in edges {
            for x in [a, b] {
                if x == 0 || x > n {
                    return Err(ModelError::VertexOutOfRange { vertex: x, n });
                }
            }
            if a == b {
                return Err(ModelError::SelfLoop { network: id, vertex: a });
            }
            adj[a].push(b);
            adj[b].push(a);
        }
        for (v, list) in adj.iter_mut().enumerate() {
            list.sort_unstable();
            if list.windows(2).any(|w| w[0] == w[1]) {
                return Err(ModelError::DuplicateEdge { network: id, vertex: v });
            }
        }

        let mut parent = vec![0; n + 1];
        let mut depth = vec![0u32; n + 1];
        let mut seen = vec![false; n + 1];
        let mut queue = VecDeque::from([1]);
        seen[1] = true;
        let mut reached = 1;
        while let Some(x) = queue.pop_front() {
            for &y in &adj[x] {
                if !seen[y] {
                    seen[y] = true;
                    parent[y] = x;
                    depth[y] = depth[x] + 1;
                    reached += 1;
                    queue.push_back(y);
                }
            }
        }
        if reached != n {
            return Err(ModelError::Disconnected { network: id });
        }

        let levels = (usize::BITS - n.leading_zeros()).max(1) as usize;
        let mut up = Vec::with_capacity(levels);
        let mut base = parent.clone();
        base[1] = 1;
        base[0] = 0;
        up.push(base);
        for k in 1..levels {
            let prev = &up[k - 1];
            let next: Vec<Vertex> = (0..=n).map(|v| prev[prev[v]]).collect();
            up.push(next);
        }

        Ok(TreeNetwork {
            id,
            n,
            adj,
            parent,
            depth,
            up,
        })
    }

    /// The path network `1 - 2 - ... - n` used for line resources.
    pub fn line(id: u32, n: usize) -> Result<Self, ModelError> {
        let edges: Vec<_> = (1..n).map(|t| (t, t + 1)).collect();
        Self::new(id, n, &edges)
    }

    pub fn id(&self) -> u32 {
        self.id
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn contains_vertex(&self, v: Vertex) -> bool {
        v >= 1 && v <= self.n
    }

    pub fn neighbors(&self, v: Vertex) -> &[Vertex] {
        &self.adj[v]
    }

    pub fn has_edge(&self, a: Vertex, b: Vertex) -> bool {
        self.contains_vertex(a) && self.adj[a].binary_search(&b).is_ok()
    }

    /// All edges as sorted `(u, v)` pairs with `u < v`, in ascending order.
    pub fn edges(&self) -> Vec<(Vertex, Vertex)> {
        let mut out = Vec::with_capacity(self.n.saturating_sub(1));
        for u in 1..=self.n {
            for &v in &self.adj[u] {
                if u < v {
                    out.push((u, v));
                }
            }
        }
        out
    }

    pub fn lca(&self, mut a: Vertex, mut b: Vertex) -> Vertex {
        if self.depth[a] < self.depth[b] {
            std::mem::swap(&mut a, &mut b);
        }
        let mut diff = self.depth[a] - self.depth[b];
        let mut k = 0;
        while diff > 0 {
            if diff & 1 == 1 {
                a = self.up[k][a];
            }
            diff >>= 1;
            k += 1;
        }
        if a == b {
            return a;
        }
        for k in (0..self.up.len()).rev() {
            if self.up[k][a] != self.up[k][b] {
                a = self.up[k][a];
                b = self.up[k][b];
            }
        }
        self.parent[a]
    }

    pub fn distance(&self, a: Vertex, b: Vertex) -> usize {
        let w = self.lca(a, b);
        (self.depth[a] + self.depth[b] - 2 * self.depth[w]) as usize
    }

    /// The unique vertex lying on all three pairwise paths between `a`, `b`, `c`.
    pub fn median(&self, a: Vertex, b: Vertex, c: Vertex) -> Vertex {
        let x = self.lca(a, b);
        let y = self.lca(a, c);
        let z = self.lca(b, c);
        [x, y, z]
            .into_iter()
            .max_by_key(|&w| self.depth[w])
            .expect("three candidates")
    }

    /// True when `x` lies on the path between `a` and `b`.
    pub fn on_path(&self, a: Vertex, b: Vertex, x: Vertex) -> bool {
        self.distance(a, x) + self.distance(x, b) == self.distance(a, b)
    }

    /// Vertices of the unique `u`-`v` path, starting at `u`.
    pub fn path_vertices(&self, u: Vertex, v: Vertex) -> Vec<Vertex> {
        let w = self.lca(u, v);
        let mut head = Vec::new();
        let mut x = u;
        while x != w {
            head.push(x);
            x = self.parent[x];
        }
        head.push(w);
        let mut tail = Vec::new();
        let mut y = v;
        while y != w {
            tail.push(y);
            y = self.parent[y];
        }
        head.extend(tail.into_iter().rev());
        head
    }

    /// Ordered edge list of the `u`-`v` path, each edge oriented away from `u`.
    pub fn tree_path(&self, u: Vertex, v: Vertex) -> Result<Vec<(Vertex, Vertex)>, ModelError> {
        for x in [u, v] {
            if !self.contains_vertex(x) {
                return Err(ModelError::VertexOutOfRange { vertex: x, n: self.n });
            }
        }
        if u == v {
            return Err(ModelError::EmptyPath { vertex: u });
        }
        let verts = self.path_vertices(u, v);
        Ok(verts.windows(2).map(|w| (w[0], w[1])).collect())
    }
}
