//! Finite `{p,q}` lattices: the unit cell inside a Bravais fundamental domain,
//! open patches of translated cells, and the periodic graph on a closed surface.
//!
//! Vertex ids are `cell * sites + site`. Edges of a periodic graph are sorted
//! by endpoint pair; every bit-vector downstream is indexed by that order.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt::Write as _;

use crate::error::{Error, GeometryError, LatticeError};
use crate::fuchsian::{build_generators, GeneratorSet, QuotientSpec, Word};
use crate::geometry::{
    geodesic_direction, hyperbolic_distance, is_hyperbolic, regular_polygon, DiskPoint, MobiusTransform, GEOM_TOL,
};
use crate::gf2::EdgeVector;

/// Points closer than this (Euclidean) are the same tessellation vertex.
const DEDUP_TOL: f64 = 1e-7;
/// Relative tolerance for nearest-neighbour detection.
const EDGE_REL_TOL: f64 = 1e-6;
/// Hard cap on generated tessellation vertices.
const TESSELLATION_BUDGET: usize = 200_000;

/// How the `{p,q}` tessellation sits relative to the Bravais polygon.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Placement {
    /// A `p`-gon centred at the origin with vertex `k` at angle `2πk/p + phase`.
    FaceCentred { phase: f64 },
    /// A vertex at the origin with one edge leaving at `angle`.
    VertexCentred { angle: f64 },
}

#[derive(Clone, Debug)]
pub struct UnitCell {
    pub p: usize,
    pub q: usize,
    pub generators: GeneratorSet,
    pub placement: Placement,
    pub sites: Vec<DiskPoint>,
    /// Symmetric site adjacency within one cell.
    pub intra: Vec<Vec<bool>>,
    /// `inter[j][u][v]`: site `u` is adjacent to `γ_{j+1}(site v)`.
    pub inter: Vec<Vec<Vec<bool>>>,
    pub edge_length: f64,
}

impl UnitCell {
    pub fn site_count(&self) -> usize {
        self.sites.len()
    }

    /// Edges per cell: intra pairs plus inter-cell slots.
    pub fn edges_per_cell(&self) -> usize {
        let intra: usize = self.intra.iter().map(|r| r.iter().filter(|&&b| b).count()).sum();
        let inter: usize = self
            .inter
            .iter()
            .map(|m| m.iter().map(|r| r.iter().filter(|&&b| b).count()).sum::<usize>())
            .sum();
        intra / 2 + inter
    }

    /// Adjacency matrix of `γ_{j+1}⁻¹`, the transpose of `inter[j]`.
    pub fn inverse_inter(&self, j: usize) -> Vec<Vec<bool>> {
        let n = self.sites.len();
        (0..n).map(|u| (0..n).map(|v| self.inter[j][v][u]).collect()).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EdgeLabel {
    Intra,
    /// Crosses from the cell of `source` into its `γ_{generator+1}` neighbour.
    Inter {
        generator: usize,
        source: usize,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct PeriodicGraph {
    /// Face size and vertex degree of the pattern.
    pub p: usize,
    pub q: usize,
    pub num_vertices: usize,
    pub edges: Vec<(usize, usize)>,
    /// Translation carried by each edge, when known.
    pub labels: Option<Vec<EdgeLabel>>,
    /// Sorted ids of edges added by the periodic boundary conditions.
    pub pbc_edges: Vec<usize>,
    pub coordinates: Option<Vec<DiskPoint>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PredictedCounts {
    pub v: usize,
    pub e: usize,
    pub f: usize,
    pub genus: usize,
    pub n: usize,
    pub k: usize,
}

struct PointIndex {
    points: Vec<DiskPoint>,
    grid: HashMap<(i64, i64), Vec<usize>>,
}

impl PointIndex {
    const CELL: f64 = 1e-5;

    fn new() -> Self {
        PointIndex {
            points: Vec::new(),
            grid: HashMap::new(),
        }
    }

    fn key(z: DiskPoint) -> (i64, i64) {
        (
            (z.re() / Self::CELL).floor() as i64,
            (z.im() / Self::CELL).floor() as i64,
        )
    }

    fn find(&self, z: DiskPoint) -> Option<usize> {
        let (kx, ky) = Self::key(z);
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(ids) = self.grid.get(&(kx + dx, ky + dy)) {
                    for &i in ids {
                        if (self.points[i].as_complex() - z.as_complex()).norm() < DEDUP_TOL {
                            return Some(i);
                        }
                    }
                }
            }
        }
        None
    }

    fn insert(&mut self, z: DiskPoint) -> (usize, bool) {
        if let Some(i) = self.find(z) {
            return (i, false);
        }
        let i = self.points.len();
        self.points.push(z);
        self.grid.entry(Self::key(z)).or_default().push(i);
        (i, true)
    }
}

/// Vertices of the `{p,q}` tessellation through `seed` (with neighbour `toward`)
/// out to hyperbolic radius `max_radius`, by repeated rotation about vertices.
fn tessellate(q: usize, seed: DiskPoint, toward: DiskPoint, max_radius: f64) -> Result<PointIndex, LatticeError> {
    let mut index = PointIndex::new();
    let mut first_neighbour = Vec::new();
    index.insert(seed);
    first_neighbour.push(toward);
    let (t, _) = index.insert(toward);
    if t == first_neighbour.len() {
        first_neighbour.push(seed);
    }
    let mut head = 0;
    while head < index.points.len() {
        let i = head;
        head += 1;
        let z = index.points[i];
        if hyperbolic_distance(DiskPoint::ORIGIN, z) > max_radius {
            continue;
        }
        let w = first_neighbour[i];
        let to = MobiusTransform::to_origin(z);
        let back = to.inverse();
        let w0 = to.apply(w);
        for s in 1..q {
            let r = MobiusTransform::rotation(2.0 * PI * s as f64 / q as f64);
            let u = back.apply(r.apply(w0));
            let (j, fresh) = index.insert(u);
            if fresh {
                first_neighbour.push(z);
            }
            debug_assert!(j < first_neighbour.len());
        }
        if index.points.len() > TESSELLATION_BUDGET {
            return Err(LatticeError::CoverageFailure {
                found: 0,
                expected: 0,
                generated: index.points.len(),
            });
        }
    }
    Ok(index)
}

/// Signed margin of the Dirichlet test: negative strictly inside the
/// fundamental polygon, positive outside.
fn dirichlet_margin(z: DiskPoint, gs: &GeneratorSet) -> f64 {
    let d0 = hyperbolic_distance(DiskPoint::ORIGIN, z);
    gs.generators
        .iter()
        .flat_map(|g| [*g, g.inverse()])
        .map(|g| d0 - hyperbolic_distance(g.apply(DiskPoint::ORIGIN), z))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Vertices per cell predicted by the area ratio of the two tessellations.
fn sites_per_cell(p: usize, q: usize, gs: &GeneratorSet) -> Result<usize, LatticeError> {
    let c = predicted_counts(p, q, gs.signature.genus, 1)?;
    Ok(c.v)
}

fn placement_candidates(p: usize, q: usize) -> [Placement; 4] {
    [
        Placement::FaceCentred { phase: PI / p as f64 },
        Placement::FaceCentred { phase: 0.0 },
        Placement::VertexCentred { angle: 0.0 },
        Placement::VertexCentred { angle: PI / q as f64 },
    ]
}

struct Attempt {
    sites: Vec<DiskPoint>,
    generated: usize,
}

fn try_placement(p: usize, q: usize, gs: &GeneratorSet, placement: Placement) -> Result<Option<Attempt>, LatticeError> {
    let poly = regular_polygon(p, q, 0.0)?;
    let ell = poly.edge_length();
    let (seed, toward) = match placement {
        Placement::FaceCentred { phase } => {
            let poly = regular_polygon(p, q, phase)?;
            (poly.vertices[0], poly.vertices[1])
        }
        Placement::VertexCentred { angle } => (DiskPoint::ORIGIN, DiskPoint::at_distance(ell, angle)?),
    };
    let corner_radius = hyperbolic_distance(DiskPoint::ORIGIN, gs.corner(0));
    let shift = gs.generators[0].translation_length();
    let index = tessellate(q, seed, toward, corner_radius + shift + ell + GEOM_TOL)?;

    // the tessellation must be invariant under the translation group
    for &z in &index.points {
        if hyperbolic_distance(DiskPoint::ORIGIN, z) > corner_radius + ell {
            continue;
        }
        for g in &gs.generators {
            for h in [*g, g.inverse()] {
                if index.find(h.apply(z)).is_none() {
                    return Ok(None);
                }
            }
        }
    }

    let mut sites = Vec::new();
    for &z in &index.points {
        let m = dirichlet_margin(z, gs);
        if m.abs() <= DEDUP_TOL {
            // a vertex on the domain boundary: this placement is ambiguous
            return Ok(None);
        }
        if m < 0.0 {
            sites.push(z);
        }
    }
    Ok(Some(Attempt {
        sites,
        generated: index.points.len(),
    }))
}

/// Builds the `{p,q}` unit cell for the Bravais group `gs`.
///
/// Tries face- and vertex-centred placements in a fixed order and keeps the
/// first whose tessellation is invariant under the translations, has no vertex
/// on the boundary of the fundamental polygon, and yields the predicted number
/// of sites.
pub fn build_unit_cell(p: usize, q: usize, gs: &GeneratorSet) -> Result<UnitCell, LatticeError> {
    if !is_hyperbolic(p, q) {
        return Err(GeometryError::NonHyperbolicPattern { p, q }.into());
    }
    let expected = sites_per_cell(p, q, gs)?;
    let ell = regular_polygon(p, q, 0.0)?.edge_length();
    let mut last = (0, 0);
    for placement in placement_candidates(p, q) {
        let Some(attempt) = try_placement(p, q, gs, placement)? else {
            continue;
        };
        last = (attempt.sites.len(), attempt.generated);
        if attempt.sites.len() != expected {
            continue;
        }
        let mut sites = attempt.sites;
        sites.sort_by(|a, b| {
            let ka = (round9(a.modulus()), round9(a.arg().rem_euclid(2.0 * PI)));
            let kb = (round9(b.modulus()), round9(b.arg().rem_euclid(2.0 * PI)));
            ka.partial_cmp(&kb).expect("finite coordinates")
        });
        let near = |a: DiskPoint, b: DiskPoint| (hyperbolic_distance(a, b) - ell).abs() < EDGE_REL_TOL * ell;
        let n = sites.len();
        let intra: Vec<Vec<bool>> = (0..n)
            .map(|u| (0..n).map(|v| u != v && near(sites[u], sites[v])).collect())
            .collect();
        let inter: Vec<Vec<Vec<bool>>> = gs
            .generators
            .iter()
            .map(|g| {
                (0..n)
                    .map(|u| (0..n).map(|v| near(sites[u], g.apply(sites[v]))).collect())
                    .collect()
            })
            .collect();
        let cell = UnitCell {
            p,
            q,
            generators: gs.clone(),
            placement,
            sites,
            intra,
            inter,
            edge_length: ell,
        };
        let bad: Vec<usize> = (0..n).filter(|&u| site_degree(&cell, u) != q).collect();
        if !bad.is_empty() {
            return Err(LatticeError::DegreeViolation {
                vertices: bad,
                expected: q,
            });
        }
        return Ok(cell);
    }
    Err(LatticeError::CoverageFailure {
        found: last.0,
        expected,
        generated: last.1,
    })
}

fn round9(x: f64) -> f64 {
    (x * 1e9).round() / 1e9
}

fn site_degree(cell: &UnitCell, u: usize) -> usize {
    let n = cell.sites.len();
    let mut d = cell.intra[u].iter().filter(|&&b| b).count();
    for m in &cell.inter {
        d += (0..n).filter(|&v| m[u][v]).count();
        d += (0..n).filter(|&v| m[v][u]).count();
    }
    d
}

/// `(V, E, F, h, n, k)` for `N` cells of `{p,q}` in a genus-`g` Bravais lattice.
pub fn predicted_counts(p: usize, q: usize, g: usize, cells: usize) -> Result<PredictedCounts, LatticeError> {
    if !is_hyperbolic(p, q) {
        return Err(GeometryError::NonHyperbolicPattern { p, q }.into());
    }
    if g < 1 || cells < 1 {
        return Err(LatticeError::NonIntegerCount {
            what: format!("genus {g} and index {cells} must be positive"),
        });
    }
    let genus = cells * (g - 1) + 1;
    let num = 4 * q * (genus - 1);
    let den = p * q - 2 * q - 2 * p;
    let exact = |what: &str, a: usize, b: usize| {
        if b == 0 || !a.is_multiple_of(b) {
            Err(LatticeError::NonIntegerCount {
                what: format!("{what} = {a}/{b}"),
            })
        } else {
            Ok(a / b)
        }
    };
    let f = exact("F", num, den)?;
    let e = exact("E", p * f, 2)?;
    let v = exact("V", p * f, q)?;
    Ok(PredictedCounts {
        v,
        e,
        f,
        genus,
        n: e,
        k: 2 * genus,
    })
}

fn sort_edges(raw: Vec<((usize, usize), EdgeLabel)>) -> (Vec<(usize, usize)>, Vec<EdgeLabel>) {
    let mut raw: Vec<_> = raw.into_iter().map(|((a, b), l)| ((a.min(b), a.max(b)), l)).collect();
    raw.sort_by_key(|&(e, l)| {
        let tie = match l {
            EdgeLabel::Intra => (0, 0),
            EdgeLabel::Inter { generator, source } => (generator + 1, source),
        };
        (e, tie)
    });
    raw.into_iter().unzip()
}

/// Translated copies of the cell, one per word, joined by nearest-neighbour
/// edges. Cells are joined when one is the `γ_j` image of the other.
pub fn build_open_graph(cell: &UnitCell, words: &[Word]) -> PeriodicGraph {
    let gs = &cell.generators;
    let ns = cell.site_count();
    let transforms: Vec<MobiusTransform> = words.iter().map(|w| w.evaluate(gs.independent())).collect();
    let mut raw = Vec::new();
    for (a, ta) in transforms.iter().enumerate() {
        push_intra(cell, a, &mut raw);
        for (j, g) in gs.generators.iter().enumerate() {
            let target = ta.compose(g);
            if let Some(b) = transforms.iter().position(|t| t.approx_eq(&target, GEOM_TOL)) {
                push_inter(cell, j, a, b, &mut raw);
            }
        }
    }
    let (edges, labels) = sort_edges(raw);
    let coordinates = transforms
        .iter()
        .flat_map(|t| cell.sites.iter().map(move |&s| t.apply(s)))
        .collect();
    PeriodicGraph {
        p: cell.p,
        q: cell.q,
        num_vertices: words.len() * ns,
        edges,
        labels: Some(labels),
        pbc_edges: Vec::new(),
        coordinates: Some(coordinates),
    }
}

fn push_intra(cell: &UnitCell, c: usize, raw: &mut Vec<((usize, usize), EdgeLabel)>) {
    let ns = cell.site_count();
    for u in 0..ns {
        for v in u + 1..ns {
            if cell.intra[u][v] {
                raw.push(((c * ns + u, c * ns + v), EdgeLabel::Intra));
            }
        }
    }
}

fn push_inter(cell: &UnitCell, j: usize, a: usize, b: usize, raw: &mut Vec<((usize, usize), EdgeLabel)>) {
    let ns = cell.site_count();
    for u in 0..ns {
        for v in 0..ns {
            if cell.inter[j][u][v] {
                raw.push((
                    (a * ns + u, b * ns + v),
                    EdgeLabel::Inter {
                        generator: j,
                        source: a * ns + u,
                    },
                ));
            }
        }
    }
}

/// The lattice on the closed surface defined by `spec`: cell `n` is joined to
/// cell `perm_j(n)` through `I_j`.
pub fn build_periodic_graph(cell: &UnitCell, spec: &QuotientSpec) -> Result<PeriodicGraph, LatticeError> {
    let gs = &cell.generators;
    let perms = spec.full_perms(gs)?;
    let cells = spec.index();
    let ns = cell.site_count();
    let mut raw = Vec::new();
    for n in 0..cells {
        push_intra(cell, n, &mut raw);
        for (j, perm) in perms.iter().enumerate() {
            push_inter(cell, j, n, perm[n], &mut raw);
        }
    }
    let (edges, labels) = sort_edges(raw);

    let words: Vec<Word> = spec
        .transversal_words()
        .into_iter()
        .map(|w| w.expect("validated specs are transitive"))
        .collect();
    let transforms: Vec<MobiusTransform> = words.iter().map(|w| w.evaluate(gs.independent())).collect();
    let pbc_edges = labels
        .iter()
        .enumerate()
        .filter_map(|(i, l)| match *l {
            EdgeLabel::Intra => None,
            EdgeLabel::Inter { generator, source } => {
                let a = source / ns;
                let b = perms[generator][a];
                let open = transforms[a]
                    .compose(&gs.generators[generator])
                    .approx_eq(&transforms[b], GEOM_TOL);
                (!open).then_some(i)
            }
        })
        .collect();
    let coordinates = transforms
        .iter()
        .flat_map(|t| cell.sites.iter().map(move |&s| t.apply(s)))
        .collect();

    let graph = PeriodicGraph {
        p: cell.p,
        q: cell.q,
        num_vertices: cells * ns,
        edges,
        labels: Some(labels),
        pbc_edges,
        coordinates: Some(coordinates),
    };
    let bad: Vec<usize> = graph
        .degrees()
        .iter()
        .enumerate()
        .filter(|&(_, &d)| d != cell.q)
        .map(|(v, _)| v)
        .collect();
    if !bad.is_empty() {
        return Err(LatticeError::DegreeViolation {
            vertices: bad,
            expected: cell.q,
        });
    }
    Ok(graph)
}

/// The dual lattice: one vertex per face, dual edge `i` crossing primal edge `i`.
pub fn dual_graph(g: &PeriodicGraph, faces: &[EdgeVector]) -> Result<PeriodicGraph, LatticeError> {
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); g.num_edges()];
    for (f, face) in faces.iter().enumerate() {
        for e in face.iter_ones() {
            incident[e].push(f);
        }
    }
    let edges = incident
        .iter()
        .enumerate()
        .map(|(e, fs)| match fs.as_slice() {
            &[a, b] => Ok((a.min(b), a.max(b))),
            _ => Err(LatticeError::NotTwoManifold {
                edge: e,
                count: fs.len(),
            }),
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(PeriodicGraph {
        p: g.q,
        q: g.p,
        num_vertices: faces.len(),
        edges,
        labels: None,
        pbc_edges: g.pbc_edges.clone(),
        coordinates: None,
    })
}

impl PeriodicGraph {
    /// A bare graph without labels, boundary edges or embedding.
    pub fn from_edges(p: usize, q: usize, num_vertices: usize, edges: Vec<(usize, usize)>) -> Self {
        PeriodicGraph {
            p,
            q,
            num_vertices,
            edges,
            labels: None,
            pbc_edges: Vec::new(),
            coordinates: None,
        }
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// `2E/p`, the face count of a closed lattice.
    pub fn face_count_hint(&self) -> usize {
        2 * self.num_edges() / self.p
    }

    /// Incident `(neighbour, edge id)` pairs in edge-id order. A loop appears twice.
    pub fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.num_vertices];
        for (i, &(a, b)) in self.edges.iter().enumerate() {
            adj[a].push((b, i));
            adj[b].push((a, i));
        }
        adj
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.num_vertices];
        for &(a, b) in &self.edges {
            d[a] += 1;
            d[b] += 1;
        }
        d
    }

    pub fn is_connected(&self) -> bool {
        if self.num_vertices == 0 {
            return true;
        }
        let adj = self.adjacency();
        let mut seen = vec![false; self.num_vertices];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for &(u, _) in &adj[v] {
                if !seen[u] {
                    seen[u] = true;
                    count += 1;
                    stack.push(u);
                }
            }
        }
        count == self.num_vertices
    }

    /// Edges that exist before the periodic boundary conditions are imposed.
    pub fn open_mask(&self) -> EdgeVector {
        let mut m = EdgeVector::zeros(self.num_edges());
        for i in 0..self.num_edges() {
            m.set(i, true);
        }
        for &i in &self.pbc_edges {
            m.set(i, false);
        }
        m
    }

    /// The open graph as its own graph (same vertices, PBC edges dropped).
    pub fn open_subgraph(&self) -> PeriodicGraph {
        let keep = self.open_mask();
        let ids: Vec<usize> = keep.iter_ones().collect();
        PeriodicGraph {
            p: self.p,
            q: self.q,
            num_vertices: self.num_vertices,
            edges: ids.iter().map(|&i| self.edges[i]).collect(),
            labels: self.labels.as_ref().map(|l| ids.iter().map(|&i| l[i]).collect()),
            pbc_edges: Vec::new(),
            coordinates: self.coordinates.clone(),
        }
    }

    /// Genus from the Euler characteristic `V − E + F = 2 − 2h`.
    pub fn euler_genus(&self, faces: usize) -> Result<usize, LatticeError> {
        let chi = self.num_vertices as i64 - self.num_edges() as i64 + faces as i64;
        if chi > 2 || (2 - chi) % 2 != 0 {
            return Err(LatticeError::NonIntegerCount {
                what: format!("Euler characteristic {chi}"),
            });
        }
        Ok(((2 - chi) / 2) as usize)
    }

    /// Checks regularity, connectivity, `pF = 2E = qV` and the predicted counts.
    pub fn check_structure(&self, predicted: &PredictedCounts) -> Result<(), LatticeError> {
        let bad: Vec<usize> = self
            .degrees()
            .iter()
            .enumerate()
            .filter(|&(_, &d)| d != self.q)
            .map(|(v, _)| v)
            .collect();
        if !bad.is_empty() {
            return Err(LatticeError::DegreeViolation {
                vertices: bad,
                expected: self.q,
            });
        }
        if !self.is_connected() {
            return Err(LatticeError::Disconnected);
        }
        let (v, e) = (self.num_vertices, self.num_edges());
        if (2 * e) % self.p != 0 || v != predicted.v || e != predicted.e || self.face_count_hint() != predicted.f {
            return Err(LatticeError::CountMismatch(format!(
                "V={v} E={e} F={}, predicted V={} E={} F={}",
                self.face_count_hint(),
                predicted.v,
                predicted.e,
                predicted.f
            )));
        }
        Ok(())
    }

    /// True iff the closed walk lifts to a closed walk in the hyperbolic plane.
    /// `walk[i]` is the vertex before `edges[i]`. Without labels, returns `None`.
    pub fn walk_is_contractible(&self, gs: &GeneratorSet, walk: &[usize], edges: &[usize]) -> Option<bool> {
        let labels = self.labels.as_ref()?;
        let mut acc = MobiusTransform::IDENTITY;
        for (&from, &e) in walk.iter().zip(edges) {
            if let EdgeLabel::Inter { generator, source } = labels[e] {
                let g = gs.generators[generator];
                let (a, b) = self.edges[e];
                // a loop is traversed from its source
                let forward = from == source || (a == b);
                acc = acc.compose(&if forward { g } else { g.inverse() });
            }
        }
        Some(acc.deviation_from_identity() < GEOM_TOL)
    }

    /// A face filter for cycle-basis construction: accepts closed walks whose
    /// lift is closed. `None` without edge labels.
    pub fn contractibility_filter<'a>(
        &'a self,
        gs: &'a GeneratorSet,
    ) -> Option<impl Fn(&[usize], &[usize]) -> bool + 'a> {
        self.labels.as_ref()?;
        Some(move |walk: &[usize], edges: &[usize]| self.walk_is_contractible(gs, walk, edges) == Some(true))
    }

    /// Plain-text edge list, `"u v"` per line, 1-indexed, in edge-id order.
    pub fn edge_list(&self) -> String {
        let mut s = String::new();
        for &(a, b) in &self.edges {
            let _ = writeln!(s, "{} {}", a + 1, b + 1);
        }
        s
    }

    /// Edge labels, `"j s"` per line: generator and source vertex (1-indexed),
    /// or `"0 0"` for edges inside a cell.
    pub fn label_list(&self) -> Option<String> {
        let labels = self.labels.as_ref()?;
        let mut s = String::new();
        for l in labels {
            let _ = match *l {
                EdgeLabel::Intra => writeln!(s, "0 0"),
                EdgeLabel::Inter { generator, source } => writeln!(s, "{} {}", generator + 1, source + 1),
            };
        }
        Some(s)
    }

    /// `"v re im"` per line, 1-indexed.
    pub fn coordinate_list(&self) -> Option<String> {
        let coords = self.coordinates.as_ref()?;
        let mut s = String::new();
        for (v, z) in coords.iter().enumerate() {
            let _ = writeln!(s, "{} {:.15e} {:.15e}", v + 1, z.re(), z.im());
        }
        Some(s)
    }

    pub fn to_dot(&self) -> String {
        let mut s = String::from("graph lattice {\n  node [shape=point];\n");
        if let Some(coords) = &self.coordinates {
            for (v, z) in coords.iter().enumerate() {
                let _ = writeln!(s, "  {} [pos=\"{:.6},{:.6}!\"];", v + 1, 10.0 * z.re(), 10.0 * z.im());
            }
        }
        let pbc: std::collections::HashSet<usize> = self.pbc_edges.iter().copied().collect();
        for (i, &(a, b)) in self.edges.iter().enumerate() {
            let style = if pbc.contains(&i) { " [style=dashed]" } else { "" };
            let _ = writeln!(s, "  {} -- {}{};", a + 1, b + 1, style);
        }
        s.push_str("}\n");
        s
    }

    /// Rebuilds a graph from exported edge, label and PBC lists.
    pub fn from_exports(
        p: usize,
        q: usize,
        num_vertices: usize,
        edge_list: &str,
        label_list: Option<&str>,
        pbc_list: &str,
    ) -> Result<PeriodicGraph, LatticeError> {
        let pairs = |text: &str, what: &str| -> Result<Vec<(usize, usize)>, LatticeError> {
            text.lines()
                .filter(|l| !l.trim().is_empty())
                .enumerate()
                .map(|(n, line)| {
                    let mut it = line.split_whitespace().map(str::parse::<usize>);
                    match (it.next(), it.next(), it.next()) {
                        (Some(Ok(a)), Some(Ok(b)), None) => Ok((a, b)),
                        _ => Err(LatticeError::ParseError(format!("{what} line {}: {line:?}", n + 1))),
                    }
                })
                .collect()
        };
        let raw = pairs(edge_list, "edge list")?;
        let mut edges = Vec::with_capacity(raw.len());
        for (a, b) in raw {
            if a == 0 || b == 0 || a > num_vertices || b > num_vertices {
                return Err(LatticeError::ParseError(format!(
                    "edge {a} {b} outside 1..={num_vertices}"
                )));
            }
            edges.push((a - 1, b - 1));
        }
        let labels = match label_list {
            None => None,
            Some(text) => {
                let raw = pairs(text, "label list")?;
                if raw.len() != edges.len() {
                    return Err(LatticeError::CountMismatch(format!(
                        "{} labels for {} edges",
                        raw.len(),
                        edges.len()
                    )));
                }
                Some(
                    raw.into_iter()
                        .map(|(j, s)| match (j, s) {
                            (0, _) => Ok(EdgeLabel::Intra),
                            (j, s) if s >= 1 && s <= num_vertices => Ok(EdgeLabel::Inter {
                                generator: j - 1,
                                source: s - 1,
                            }),
                            _ => Err(LatticeError::ParseError(format!("bad label {j} {s}"))),
                        })
                        .collect::<Result<Vec<_>, _>>()?,
                )
            }
        };
        let mut pbc_edges = Vec::new();
        for (n, line) in pbc_list.lines().filter(|l| !l.trim().is_empty()).enumerate() {
            let id: usize = line
                .trim()
                .parse()
                .map_err(|_| LatticeError::ParseError(format!("pbc list line {}: {line:?}", n + 1)))?;
            if id == 0 || id > edges.len() {
                return Err(LatticeError::CountMismatch(format!(
                    "pbc edge {id} outside 1..={}",
                    edges.len()
                )));
            }
            pbc_edges.push(id - 1);
        }
        pbc_edges.sort_unstable();
        pbc_edges.dedup();
        Ok(PeriodicGraph {
            p,
            q,
            num_vertices,
            edges,
            labels,
            pbc_edges,
            coordinates: None,
        })
    }

    /// 1-indexed PBC edge ids, one per line.
    pub fn pbc_list(&self) -> String {
        let mut s = String::new();
        for &i in &self.pbc_edges {
            let _ = writeln!(s, "{}", i + 1);
        }
        s
    }

    /// Direction of edge `e` leaving `from`, measured in the frame of `from`'s
    /// cell. Used for rotation systems; needs the unit cell.
    pub fn edge_direction(&self, cell: &UnitCell, from: usize, e: usize) -> Option<f64> {
        let labels = self.labels.as_ref()?;
        let ns = cell.site_count();
        let (a, b) = self.edges[e];
        let to = if a == from { b } else { a };
        let here = cell.sites[from % ns];
        let there = match labels[e] {
            EdgeLabel::Intra => cell.sites[to % ns],
            EdgeLabel::Inter { generator, source } => {
                let g = cell.generators.generators[generator];
                if source == from && (a != b || to == from) {
                    g.apply(cell.sites[to % ns])
                } else {
                    g.inverse().apply(cell.sites[to % ns])
                }
            }
        };
        Some(geodesic_direction(here, there))
    }
}

/// A `{p,q}` lattice on the closed surface of a quotient, with its counts
/// verified.
#[derive(Clone, Debug)]
pub struct Lattice {
    pub cell: UnitCell,
    pub graph: PeriodicGraph,
    pub predicted: PredictedCounts,
    pub cells: usize,
}

/// Generators, unit cell, periodic graph and structure check in one call.
pub fn build_lattice(p: usize, q: usize, spec: &QuotientSpec) -> Result<Lattice, Error> {
    let sig = spec.signature();
    let gs = build_generators(sig)?;
    let cell = build_unit_cell(p, q, &gs)?;
    let graph = build_periodic_graph(&cell, spec)?;
    let predicted = predicted_counts(p, q, sig.genus, spec.index())?;
    graph.check_structure(&predicted)?;
    Ok(Lattice {
        cell,
        graph,
        predicted,
        cells: spec.index(),
    })
}
