//! Cycle bases over GF(2): fundamental, minimum (de Pina witness method) and
//! the hyperbolic basis of `F−1` plaquettes plus `2h` non-contractible cycles.

use std::collections::VecDeque;
use std::fmt::Write as _;

use crate::error::CycleError;
use crate::gf2::{EdgeVector, Gf2Basis};
use crate::lattice::PeriodicGraph;

/// Decides whether a closed walk (vertices, edges) bounds a face.
pub type FaceFilter<'a> = &'a dyn Fn(&[usize], &[usize]) -> bool;

/// BFS spanning forest; returns the tree edges and the number of components.
fn spanning_forest(g: &PeriodicGraph) -> (Vec<usize>, usize) {
    let adj = g.adjacency();
    let mut seen = vec![false; g.num_vertices];
    let mut tree = Vec::with_capacity(g.num_vertices);
    let mut components = 0;
    for root in 0..g.num_vertices {
        if seen[root] {
            continue;
        }
        components += 1;
        seen[root] = true;
        let mut queue = VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            for &(u, e) in &adj[v] {
                if !seen[u] {
                    seen[u] = true;
                    tree.push(e);
                    queue.push_back(u);
                }
            }
        }
    }
    tree.sort_unstable();
    (tree, components)
}

/// Edge ids of a BFS spanning tree rooted at vertex 0, sorted.
pub fn spanning_tree(g: &PeriodicGraph) -> Result<Vec<usize>, CycleError> {
    let (tree, components) = spanning_forest(g);
    if components > 1 {
        return Err(CycleError::Disconnected);
    }
    Ok(tree)
}

fn non_tree_edges(num_edges: usize, tree: &[usize]) -> Vec<usize> {
    let mut in_tree = vec![false; num_edges];
    for &e in tree {
        in_tree[e] = true;
    }
    (0..num_edges).filter(|&e| !in_tree[e]).collect()
}

/// One cycle per non-tree edge: the edge plus the tree path joining its ends.
pub fn fundamental_cycle_basis(g: &PeriodicGraph, tree: &[usize]) -> Vec<EdgeVector> {
    let n = g.num_vertices;
    let mut tree_adj = vec![Vec::new(); n];
    for &e in tree {
        let (a, b) = g.edges[e];
        tree_adj[a].push((b, e));
        tree_adj[b].push((a, e));
    }
    // parent pointers and depths per component
    let mut parent: Vec<Option<(usize, usize)>> = vec![None; n];
    let mut depth = vec![usize::MAX; n];
    for root in 0..n {
        if depth[root] != usize::MAX {
            continue;
        }
        depth[root] = 0;
        let mut queue = VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            for &(u, e) in &tree_adj[v] {
                if depth[u] == usize::MAX {
                    depth[u] = depth[v] + 1;
                    parent[u] = Some((v, e));
                    queue.push_back(u);
                }
            }
        }
    }
    non_tree_edges(g.num_edges(), tree)
        .into_iter()
        .map(|e| {
            let mut c = EdgeVector::zeros(g.num_edges());
            c.flip(e);
            let (mut a, mut b) = g.edges[e];
            while a != b {
                if depth[a] < depth[b] {
                    std::mem::swap(&mut a, &mut b);
                }
                let (pa, ea) = parent[a].expect("non-root vertices have parents");
                c.flip(ea);
                a = pa;
            }
            c
        })
        .collect()
}

/// Shortest closed walk with an odd number of edges in `witness`, found by
/// breadth-first search in the two-sheeted cover where witness edges switch
/// sheets. Returned as its edge set (repeated edges cancel). `mask` restricts
/// the usable edges. Only walks shorter than `bound` are considered.
pub fn shortest_odd_cycle(
    g: &PeriodicGraph,
    adj: &[Vec<(usize, usize)>],
    witness: &EdgeVector,
    mask: Option<&EdgeVector>,
    bound: usize,
) -> Option<EdgeVector> {
    let mut starts: Vec<usize> = witness
        .iter_ones()
        .filter(|&e| mask.is_none_or(|m| m.get(e)))
        .flat_map(|e| [g.edges[e].0, g.edges[e].1])
        .collect();
    starts.sort_unstable();
    starts.dedup();

    let n = g.num_vertices;
    let mut best: Option<(usize, EdgeVector)> = None;
    let mut dist = vec![usize::MAX; 2 * n];
    let mut parent = vec![(usize::MAX, usize::MAX); 2 * n];
    let mut touched = Vec::new();
    for s in starts {
        let limit = best.as_ref().map_or(bound, |b| b.0);
        for &t in &touched {
            dist[t] = usize::MAX;
        }
        touched.clear();
        let src = 2 * s;
        let dst = 2 * s + 1;
        dist[src] = 0;
        touched.push(src);
        let mut queue = VecDeque::from([src]);
        'bfs: while let Some(x) = queue.pop_front() {
            let d = dist[x];
            if d + 1 >= limit {
                break;
            }
            let (v, sheet) = (x / 2, x % 2);
            for &(u, e) in &adj[v] {
                if mask.is_some_and(|m| !m.get(e)) {
                    continue;
                }
                let y = 2 * u + (sheet ^ witness.get(e) as usize);
                if dist[y] == usize::MAX {
                    dist[y] = d + 1;
                    parent[y] = (x, e);
                    touched.push(y);
                    if y == dst {
                        break 'bfs;
                    }
                    queue.push_back(y);
                }
            }
        }
        if dist[dst] != usize::MAX && dist[dst] < limit {
            let mut c = EdgeVector::zeros(g.num_edges());
            let mut y = dst;
            while y != src {
                let (x, e) = parent[y];
                c.flip(e);
                y = x;
            }
            best = Some((dist[dst], c));
        }
    }
    best.map(|(_, c)| c)
}

/// Witness vectors of the de Pina method. Invariant: the witnesses from the
/// cursor on are orthogonal to every accepted cycle.
#[derive(Clone, Debug)]
struct Witnesses {
    s: Vec<EdgeVector>,
    origin: Vec<usize>,
    k: usize,
}

impl Witnesses {
    fn new(num_edges: usize, non_tree: &[usize]) -> Self {
        Witnesses {
            s: non_tree
                .iter()
                .map(|&e| EdgeVector::from_support(num_edges, [e]))
                .collect(),
            origin: (0..non_tree.len()).collect(),
            k: 0,
        }
    }

    fn remaining(&self) -> usize {
        self.s.len() - self.k
    }

    fn current(&self) -> &EdgeVector {
        &self.s[self.k]
    }

    /// Accepts `c` if it is independent of the cycles accepted so far: swaps
    /// an odd witness to the cursor, then updates the later witnesses.
    /// Returns the original slot of the consumed witness.
    fn accept(&mut self, c: &EdgeVector) -> Option<usize> {
        let i = (self.k..self.s.len()).find(|&i| c.dot(&self.s[i]))?;
        self.s.swap(self.k, i);
        self.origin.swap(self.k, i);
        let sk = self.s[self.k].clone();
        for i in self.k + 1..self.s.len() {
            if c.dot(&self.s[i]) {
                self.s[i].xor_assign(&sk);
            }
        }
        self.k += 1;
        Some(self.origin[self.k - 1])
    }
}

fn mcb_forest(g: &PeriodicGraph) -> Vec<EdgeVector> {
    let (tree, _) = spanning_forest(g);
    let non_tree = non_tree_edges(g.num_edges(), &tree);
    let adj = g.adjacency();
    let mut w = Witnesses::new(g.num_edges(), &non_tree);
    let mut basis = Vec::with_capacity(non_tree.len());
    while w.remaining() > 0 {
        let c = shortest_odd_cycle(g, &adj, w.current(), None, usize::MAX)
            .expect("every witness has an odd cycle in its component");
        let accepted = w.accept(&c);
        debug_assert!(accepted.is_some());
        basis.push(c);
    }
    basis
}

/// Exact minimum cycle basis for unit edge weights, in extraction order
/// (non-decreasing weight is not guaranteed, total weight is minimal).
pub fn minimum_cycle_basis(g: &PeriodicGraph) -> Result<Vec<EdgeVector>, CycleError> {
    if !g.is_connected() {
        return Err(CycleError::Disconnected);
    }
    Ok(mcb_forest(g))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BasisStep {
    /// Plaquette found by the minimum cycle basis of the open graph.
    OpenGraph,
    /// Plaquette found by depth-first search through boundary edges.
    Boundary,
    /// Minimum-length non-contractible cycle.
    Logical,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WitnessRecord {
    pub step: BasisStep,
    /// Non-tree edge slot of the witness that certified the cycle.
    pub witness: usize,
    pub weight: usize,
}

#[derive(Clone, Debug)]
pub struct HyperbolicCycleBasis {
    pub face_size: usize,
    /// `F−1` independent plaquettes.
    pub faces: Vec<EdgeVector>,
    /// `2h` non-contractible cycles.
    pub logicals: Vec<EdgeVector>,
    pub history: Vec<WitnessRecord>,
    /// The witness each logical was certified against.
    pub logical_witnesses: Vec<EdgeVector>,
}

impl HyperbolicCycleBasis {
    /// The last plaquette, the sum of the stored ones.
    pub fn derived_face(&self) -> EdgeVector {
        let mut f = self.faces[0].clone();
        for x in &self.faces[1..] {
            f.xor_assign(x);
        }
        f
    }

    /// All `F` plaquettes.
    pub fn all_faces(&self) -> Vec<EdgeVector> {
        let mut v = self.faces.clone();
        v.push(self.derived_face());
        v
    }

    pub fn dimension(&self) -> usize {
        self.faces.len() + self.logicals.len()
    }

    /// One line per element: `F` or `L`, then the sorted 1-indexed edge ids.
    pub fn export(&self) -> String {
        let mut s = String::new();
        for (tag, list) in [("F", &self.faces), ("L", &self.logicals)] {
            for c in list.iter() {
                s.push_str(tag);
                for e in c.iter_ones() {
                    let _ = write!(s, " {}", e + 1);
                }
                s.push('\n');
            }
        }
        s
    }

    /// Verifies the structural invariants against `g`.
    pub fn check(&self, g: &PeriodicGraph) -> Result<(), CycleError> {
        let violation = |m: String| Err(CycleError::InvariantViolation(m));
        let dim = g.num_edges() + 1 - g.num_vertices;
        if self.dimension() != dim {
            return violation(format!("basis has {} elements, cycle space {}", self.dimension(), dim));
        }
        let faces = self.all_faces();
        let mut count = vec![0usize; g.num_edges()];
        for (i, f) in faces.iter().enumerate() {
            if f.weight() != self.face_size {
                return violation(format!("face {i} has weight {}", f.weight()));
            }
            for e in f.iter_ones() {
                count[e] += 1;
            }
        }
        if let Some(e) = count.iter().position(|&c| c != 2) {
            return violation(format!("edge {e} lies in {} faces", count[e]));
        }
        let adj = g.adjacency();
        let mut span = Gf2Basis::new(g.num_edges());
        for f in &self.faces {
            if !is_cycle(&adj, f) || !span.insert(f) {
                return violation("plaquettes are not independent cycles".into());
            }
        }
        for (i, l) in self.logicals.iter().enumerate() {
            if !is_cycle(&adj, l) {
                return violation(format!("logical {i} is not a cycle"));
            }
            if span.contains(l) {
                return violation(format!("logical {i} is in the span of the faces"));
            }
        }
        for l in &self.logicals {
            if !span.insert(l) {
                return violation("logicals are dependent".into());
            }
        }
        Ok(())
    }
}

/// Every vertex has even degree in the support.
pub fn is_cycle(adj: &[Vec<(usize, usize)>], c: &EdgeVector) -> bool {
    adj.iter()
        .all(|l| l.iter().filter(|&&(_, e)| c.get(e)).count() % 2 == 0)
}

/// Orders the edges of a simple cycle into a closed walk, as (vertex walk,
/// edge walk) with `edges[i]` leaving `verts[i]`.
pub fn cycle_walk(g: &PeriodicGraph, c: &EdgeVector) -> Option<(Vec<usize>, Vec<usize>)> {
    let ids: Vec<usize> = c.iter_ones().collect();
    let first = *ids.first()?;
    let mut verts = vec![g.edges[first].0];
    let mut edges = vec![first];
    let mut used = vec![false; ids.len()];
    used[0] = true;
    let mut at = g.edges[first].1;
    while edges.len() < ids.len() {
        let (i, &e) = ids
            .iter()
            .enumerate()
            .find(|&(i, &e)| !used[i] && (g.edges[e].0 == at || g.edges[e].1 == at))?;
        used[i] = true;
        verts.push(at);
        edges.push(e);
        let (a, b) = g.edges[e];
        at = if a == at { b } else { a };
    }
    (at == verts[0]).then_some((verts, edges))
}

/// Depth-first enumeration of simple cycles of length `len` through edge
/// `seed`, as (vertex walk, edge walk) starting with the seed.
fn cycles_through(
    g: &PeriodicGraph,
    adj: &[Vec<(usize, usize)>],
    seed: usize,
    len: usize,
    visit: &mut dyn FnMut(&[usize], &[usize]) -> bool,
) -> bool {
    let (a, b) = g.edges[seed];
    if a == b {
        return false;
    }
    let mut on_path = vec![false; g.num_vertices];
    let mut verts = vec![a, b];
    let mut edges = vec![seed];
    on_path[a] = true;
    on_path[b] = true;

    fn go(
        adj: &[Vec<(usize, usize)>],
        target: usize,
        len: usize,
        on_path: &mut [bool],
        verts: &mut Vec<usize>,
        edges: &mut Vec<usize>,
        visit: &mut dyn FnMut(&[usize], &[usize]) -> bool,
    ) -> bool {
        let v = *verts.last().expect("non-empty path");
        let remaining = len - edges.len();
        for &(u, e) in &adj[v] {
            if edges.contains(&e) {
                continue;
            }
            if remaining == 1 {
                if u == target {
                    edges.push(e);
                    let stop = visit(&verts[..], &edges[..]);
                    edges.pop();
                    if stop {
                        return true;
                    }
                }
                continue;
            }
            if on_path[u] {
                continue;
            }
            on_path[u] = true;
            verts.push(u);
            edges.push(e);
            let stop = go(adj, target, len, on_path, verts, edges, visit);
            edges.pop();
            verts.pop();
            on_path[u] = false;
            if stop {
                return true;
            }
        }
        false
    }
    go(adj, a, len, &mut on_path, &mut verts, &mut edges, visit)
}

/// Hyperbolic cycle basis of a closed lattice.
///
/// 1. minimum cycle basis of the open graph (edges not in `g.pbc_edges`),
///    keeping its `p`-cycles;
/// 2. further `p`-cycles through PBC edges (then any edge, if needed) that
///    keep every edge in at most two faces, pass `is_face` (or, without it,
///    share at most one edge with every known face), and are independent (odd against a remaining witness),
///    until `F−1` faces;
/// 3. for each of the `2h` remaining witnesses, a shortest cycle odd against it.
///
/// `is_face` rejects candidate `p`-cycles that are not contractible. Without
/// it the overlap rule is used, which fails on small surfaces where two faces
/// share several edges or non-contractible `p`-cycles exist.
pub fn hyperbolic_cycle_basis(
    g: &PeriodicGraph,
    is_face: Option<FaceFilter<'_>>,
) -> Result<HyperbolicCycleBasis, CycleError> {
    let p = g.p;
    let ne = g.num_edges();
    let tree = spanning_tree(g)?;
    let non_tree = non_tree_edges(ne, &tree);
    let dim = non_tree.len();
    let num_faces = g.face_count_hint();
    if 2 * ne != p * num_faces || num_faces == 0 || num_faces > dim + 1 {
        return Err(CycleError::InvariantViolation(format!(
            "{ne} edges cannot carry faces of size {p} in a cycle space of dimension {dim}"
        )));
    }
    let mut w = Witnesses::new(ne, &non_tree);
    let mut faces: Vec<EdgeVector> = Vec::with_capacity(num_faces - 1);
    let mut faces_of_edge: Vec<Vec<usize>> = vec![Vec::new(); ne];
    let mut history = Vec::with_capacity(dim);

    fn add_face(
        c: EdgeVector,
        step: BasisStep,
        slot: usize,
        faces: &mut Vec<EdgeVector>,
        faces_of_edge: &mut [Vec<usize>],
        history: &mut Vec<WitnessRecord>,
    ) {
        for e in c.iter_ones() {
            faces_of_edge[e].push(faces.len());
        }
        history.push(WitnessRecord {
            step,
            witness: slot,
            weight: c.weight(),
        });
        faces.push(c);
    }

    // step 1
    let open = g.open_subgraph();
    let open_ids: Vec<usize> = g.open_mask().iter_ones().collect();
    for c in mcb_forest(&open) {
        if faces.len() + 1 >= num_faces {
            break;
        }
        if c.weight() != p {
            continue;
        }
        let lifted = EdgeVector::from_support(ne, c.iter_ones().map(|i| open_ids[i]));
        if let Some(filter) = is_face {
            match cycle_walk(g, &lifted) {
                Some((verts, edges)) if filter(&verts, &edges) => {}
                _ => continue,
            }
        }
        if let Some(slot) = w.accept(&lifted) {
            add_face(
                lifted,
                BasisStep::OpenGraph,
                slot,
                &mut faces,
                &mut faces_of_edge,
                &mut history,
            );
        }
    }

    // step 2
    let adj = g.adjacency();
    // boundary edges first; if they do not complete the basis (duals of small
    // quotients, whose open part is not a planar patch) every edge not yet in
    // two faces
    let seeds: Vec<usize> = g.pbc_edges.iter().copied().chain(0..ne).collect();
    for (i, &seed) in seeds.iter().enumerate() {
        if faces.len() + 1 >= num_faces {
            break;
        }
        if i >= g.pbc_edges.len() && faces_of_edge[seed].len() >= 2 {
            continue;
        }
        let mut found: Vec<(EdgeVector, usize)> = Vec::new();
        let known_faces = faces.len();
        let foe = &faces_of_edge;
        let w_ref = &mut w;
        cycles_through(g, &adj, seed, p, &mut |verts, edges| {
            if known_faces + found.len() + 1 >= num_faces {
                return true;
            }
            let c = EdgeVector::from_support(ne, edges.iter().copied());
            if c.weight() != p {
                return false;
            }
            // at most two faces per edge
            let mut shared: Vec<usize> = Vec::new();
            for &e in edges {
                let known = foe[e].len() + found.iter().filter(|(f, _)| f.get(e)).count();
                if known >= 2 {
                    return false;
                }
                shared.extend(&foe[e]);
            }
            match is_face {
                Some(filter) => {
                    if !filter(verts, edges) {
                        return false;
                    }
                }
                None => {
                    // without a contractibility test, require overlap ≤ 1 with every known face
                    shared.sort_unstable();
                    if shared.windows(2).any(|x| x[0] == x[1]) || found.iter().any(|(f, _)| f.overlap(&c) > 1) {
                        return false;
                    }
                }
            }
            if let Some(slot) = w_ref.accept(&c) {
                found.push((c, slot));
            }
            false
        });
        for (c, slot) in found {
            add_face(
                c,
                BasisStep::Boundary,
                slot,
                &mut faces,
                &mut faces_of_edge,
                &mut history,
            );
        }
    }
    if faces.len() + 1 != num_faces {
        return Err(CycleError::BasisIncomplete { slot: faces.len() });
    }

    // step 3
    let mut logicals = Vec::with_capacity(w.remaining());
    let mut logical_witnesses = Vec::with_capacity(w.remaining());
    while w.remaining() > 0 {
        logical_witnesses.push(w.current().clone());
        let slot_index = faces.len() + logicals.len();
        let c = shortest_odd_cycle(g, &adj, w.current(), None, usize::MAX)
            .ok_or(CycleError::BasisIncomplete { slot: slot_index })?;
        let slot = w
            .accept(&c)
            .ok_or_else(|| CycleError::InvariantViolation("logical cycle is dependent".into()))?;
        history.push(WitnessRecord {
            step: BasisStep::Logical,
            witness: slot,
            weight: c.weight(),
        });
        logicals.push(c);
    }

    let hcb = HyperbolicCycleBasis {
        face_size: p,
        faces,
        logicals,
        history,
        logical_witnesses,
    };
    hcb.check(g)?;
    Ok(hcb)
}
