use super::{DecompositionError, DecompositionKind, RootedDecomposition};
use crate::model::{TreeNetwork, Vertex};

/// Stamp-based membership and per-vertex buffers reused across components so
/// building never allocates `O(n)` per recursive call.
struct Scratch {
    member: Vec<u32>,
    seen: Vec<u32>,
    stamp: u32,
    size: Vec<usize>,
    big: Vec<usize>,
    par: Vec<Vertex>,
}

impl Scratch {
    fn new(n: usize) -> Self {
        Scratch {
            member: vec![0; n + 1],
            seen: vec![0; n + 1],
            stamp: 0,
            size: vec![0; n + 1],
            big: vec![0; n + 1],
            par: vec![0; n + 1],
        }
    }

    fn mark(&mut self, net: &TreeNetwork, comp: &[Vertex]) -> Result<u32, DecompositionError> {
        if comp.is_empty() {
            return Err(DecompositionError::EmptyComponent);
        }
        self.stamp += 1;
        for &v in comp {
            if !net.contains_vertex(v) {
                return Err(DecompositionError::VertexOutOfRange(v));
            }
            self.member[v] = self.stamp;
        }
        Ok(self.stamp)
    }

    fn balancer(&mut self, net: &TreeNetwork, comp: &[Vertex]) -> Result<Vertex, DecompositionError> {
        let st = self.mark(net, comp)?;
        let start = comp[0];
        let mut order = Vec::with_capacity(comp.len());
        self.par[start] = 0;
        self.seen[start] = st;
        let mut stack = vec![start];
        while let Some(x) = stack.pop() {
            order.push(x);
            self.size[x] = 1;
            self.big[x] = 0;
            for &y in net.neighbors(x) {
                if self.member[y] == st && self.seen[y] != st {
                    self.seen[y] = st;
                    self.par[y] = x;
                    stack.push(y);
                }
            }
        }
        if order.len() != comp.len() {
            return Err(DecompositionError::ComponentDisconnected);
        }
        for &x in order.iter().rev() {
            let p = self.par[x];
            if p != 0 {
                self.size[p] += self.size[x];
                self.big[p] = self.big[p].max(self.size[x]);
            }
        }
        let total = comp.len();
        let half = total / 2;
        order
            .iter()
            .copied()
            .filter(|&x| self.big[x].max(total - self.size[x]) <= half)
            .min()
            .ok_or(DecompositionError::ComponentDisconnected)
    }

    fn split(
        &mut self,
        net: &TreeNetwork,
        comp: &[Vertex],
        z: Vertex,
    ) -> Result<Vec<Vec<Vertex>>, DecompositionError> {
        let st = self.mark(net, comp)?;
        if !net.contains_vertex(z) || self.member[z] != st {
            return Err(DecompositionError::NotInComponent(z));
        }
        self.seen[z] = st;
        let mut parts = Vec::new();
        let mut covered = 0;
        for &y in net.neighbors(z) {
            if self.member[y] != st || self.seen[y] == st {
                continue;
            }
            self.seen[y] = st;
            let mut part = vec![y];
            let mut i = 0;
            while i < part.len() {
                let x = part[i];
                i += 1;
                for &w in net.neighbors(x) {
                    if self.member[w] == st && self.seen[w] != st {
                        self.seen[w] = st;
                        part.push(w);
                    }
                }
            }
            part.sort_unstable();
            covered += part.len();
            parts.push(part);
        }
        if covered + 1 != comp.len() {
            return Err(DecompositionError::ComponentDisconnected);
        }
        parts.sort_unstable_by_key(|p| p[0]);
        Ok(parts)
    }

    /// `Γ(part)`: vertices outside `part` adjacent to it, ascending.
    fn boundary(&mut self, net: &TreeNetwork, part: &[Vertex]) -> Result<Vec<Vertex>, DecompositionError> {
        let st = self.mark(net, part)?;
        let mut out = Vec::new();
        for &x in part {
            for &y in net.neighbors(x) {
                if self.member[y] != st {
                    out.push(y);
                }
            }
        }
        out.sort_unstable();
        out.dedup();
        Ok(out)
    }

    fn ideal_step(&mut self, net: &TreeNetwork, comp: &[Vertex]) -> Result<IdealStep, DecompositionError> {
        let gamma = self.boundary(net, comp)?;
        if gamma.len() > 2 {
            return Err(DecompositionError::TooManyNeighbors(gamma.len()));
        }
        // where each outside neighbor enters the component
        let mut entry = vec![0; gamma.len()];
        for &x in comp {
            for &y in net.neighbors(x) {
                if let Some(k) = gamma.iter().position(|&g| g == y) {
                    entry[k] = x;
                }
            }
        }
        if comp.len() == 1 {
            return Ok(IdealStep {
                root: comp[0],
                balancer: comp[0],
                junction: None,
                case: IdealCase::Leaf,
                parts: Vec::new(),
            });
        }
        let z = self.balancer(net, comp)?;
        let parts = self.split(net, comp, z)?;
        let mut attached: Vec<(Vec<Vertex>, Vertex)> = Vec::with_capacity(parts.len() + 2);
        let (root, junction, case) = if gamma.len() <= 1 {
            attached.extend(parts.into_iter().map(|p| (p, z)));
            (z, None, IdealCase::OneNeighbor)
        } else {
            let (u1p, u2p) = (entry[0], entry[1]);
            let part_of = |x: Vertex| parts.iter().position(|p| p.binary_search(&x).is_ok());
            match (part_of(u1p), part_of(u2p)) {
                (Some(a), Some(b)) if a == b => {
                    let c1 = &parts[a];
                    let j = net.median(u1p, u2p, z);
                    let zp = *net
                        .neighbors(z)
                        .iter()
                        .find(|&&w| c1.binary_search(&w).is_ok())
                        .expect("balancer touches each of its parts");
                    for sub in self.split(net, c1, j)? {
                        let attach = if sub.binary_search(&zp).is_ok() { z } else { j };
                        attached.push((sub, attach));
                    }
                    for (i, p) in parts.into_iter().enumerate() {
                        if i != a {
                            attached.push((p, z));
                        }
                    }
                    (j, Some(j), IdealCase::Junction)
                }
                _ => {
                    attached.extend(parts.into_iter().map(|p| (p, z)));
                    (z, None, IdealCase::Separate)
                }
            }
        };
        attached.sort_unstable_by_key(|(p, _)| p[0]);
        let mut out = Vec::with_capacity(attached.len());
        for (vertices, attach) in attached {
            let boundary = self.boundary(net, &vertices)?;
            out.push(IdealPart {
                vertices,
                boundary,
                attach,
            });
        }
        Ok(IdealStep {
            root,
            balancer: z,
            junction,
            case,
            parts: out,
        })
    }
}

/// Lowest-id vertex whose removal leaves parts of size at most `⌊|C|/2⌋`.
pub fn find_balancer(net: &TreeNetwork, comp: &[Vertex]) -> Result<Vertex, DecompositionError> {
    Scratch::new(net.n()).balancer(net, comp)
}

/// Connected pieces of `comp \ {z}`, each ascending, ordered by smallest vertex.
pub fn split_component(
    net: &TreeNetwork,
    comp: &[Vertex],
    z: Vertex,
) -> Result<Vec<Vec<Vertex>>, DecompositionError> {
    Scratch::new(net.n()).split(net, comp, z)
}

/// The vertex where the paths between `u1p`, `u2p` and `z` meet; it must lie
/// in `comp`. `u1p` and `u2p` belong to `comp`, `z` to `comp` or its boundary.
pub fn find_junction(
    net: &TreeNetwork,
    comp: &[Vertex],
    u1p: Vertex,
    u2p: Vertex,
    z: Vertex,
) -> Result<Vertex, DecompositionError> {
    let mut s = Scratch::new(net.n());
    let st = s.mark(net, comp)?;
    for x in [u1p, u2p, z] {
        if !net.contains_vertex(x) {
            return Err(DecompositionError::VertexOutOfRange(x));
        }
    }
    let inside = |x: Vertex| s.member[x] == st;
    if !inside(u1p) || !inside(u2p) {
        return Err(DecompositionError::NoJunction("endpoints outside the component"));
    }
    if !inside(z) && !net.neighbors(z).iter().any(|&w| inside(w)) {
        return Err(DecompositionError::NoJunction("third vertex not adjacent to the component"));
    }
    let j = net.median(u1p, u2p, z);
    if !inside(j) {
        return Err(DecompositionError::NoJunction("paths meet outside the component"));
    }
    Ok(j)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IdealCase {
    /// Single-vertex component.
    Leaf,
    /// At most one outside neighbor: balancer on top, parts below it.
    OneNeighbor,
    /// Two outside neighbors entering through different parts (or the balancer).
    Separate,
    /// Two outside neighbors entering through the same part: its junction goes
    /// on top, the balancer below it.
    Junction,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdealPart {
    pub vertices: Vec<Vertex>,
    /// `Γ(part)` in the network.
    pub boundary: Vec<Vertex>,
    /// Vertex the part's sub-decomposition hangs under.
    pub attach: Vertex,
}

/// One level of the ideal construction on a component with at most two
/// outside neighbors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdealStep {
    /// Top vertex of this component's sub-decomposition.
    pub root: Vertex,
    pub balancer: Vertex,
    /// Set in the junction case, where the balancer hangs under it.
    pub junction: Option<Vertex>,
    pub case: IdealCase,
    pub parts: Vec<IdealPart>,
}

pub fn ideal_step(net: &TreeNetwork, comp: &[Vertex]) -> Result<IdealStep, DecompositionError> {
    Scratch::new(net.n()).ideal_step(net, comp)
}

pub fn build_root_fixing(
    net: &TreeNetwork,
    root: Vertex,
) -> Result<RootedDecomposition, DecompositionError> {
    if !net.contains_vertex(root) {
        return Err(DecompositionError::VertexOutOfRange(root));
    }
    let n = net.n();
    let mut parent = vec![0; n + 1];
    let mut seen = vec![false; n + 1];
    seen[root] = true;
    let mut stack = vec![root];
    while let Some(x) = stack.pop() {
        for &y in net.neighbors(x) {
            if !seen[y] {
                seen[y] = true;
                parent[y] = x;
                stack.push(y);
            }
        }
    }
    RootedDecomposition::from_parents(net.id(), DecompositionKind::RootFixing, parent)
}

pub fn build_balancing(net: &TreeNetwork) -> RootedDecomposition {
    let n = net.n();
    let mut s = Scratch::new(n);
    let mut parent = vec![0; n + 1];
    let mut work: Vec<(Vec<Vertex>, Vertex)> = vec![((1..=n).collect(), 0)];
    while let Some((comp, attach)) = work.pop() {
        let z = s.balancer(net, &comp).expect("components stay connected");
        parent[z] = attach;
        for part in s.split(net, &comp, z).expect("balancer is in its component") {
            work.push((part, z));
        }
    }
    RootedDecomposition::from_parents(net.id(), DecompositionKind::Balancing, parent)
        .expect("balancing yields a rooted tree")
}

pub fn build_ideal(net: &TreeNetwork) -> RootedDecomposition {
    let n = net.n();
    let mut s = Scratch::new(n);
    let mut parent = vec![0; n + 1];
    let mut work: Vec<(Vec<Vertex>, Vertex)> = vec![((1..=n).collect(), 0)];
    while let Some((comp, attach)) = work.pop() {
        let step = s
            .ideal_step(net, &comp)
            .expect("every component keeps at most two outside neighbors");
        parent[step.root] = attach;
        if let Some(j) = step.junction {
            parent[step.balancer] = j;
        }
        for part in step.parts {
            work.push((part.vertices, part.attach));
        }
    }
    RootedDecomposition::from_parents(net.id(), DecompositionKind::Ideal, parent)
        .expect("ideal construction yields a rooted tree")
}

/// Builds the requested kind; root-fixing uses vertex 1 as the root.
pub fn build(net: &TreeNetwork, kind: DecompositionKind) -> RootedDecomposition {
    match kind {
        DecompositionKind::RootFixing => build_root_fixing(net, 1).expect("vertex 1 exists"),
        DecompositionKind::Balancing => build_balancing(net),
        DecompositionKind::Ideal => build_ideal(net),
    }
}
