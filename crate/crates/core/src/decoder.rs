//! Minimum-weight perfect-matching decoding.
//!
//! For Z errors, defects are vertices whose star has odd overlap with the
//! error; X errors are decoded the same way on the dual lattice, whose
//! vertices are the faces. Defects are paired exactly on the complete defect
//! graph, weighted by graph distance, and each pair is joined by a shortest
//! path.

pub mod blossom;

use std::collections::VecDeque;
use std::fmt::Write as _;

use crate::css::CssCode;
use crate::error::DecodeError;
use crate::gf2::{BitMatrix, EdgeVector, Gf2Basis};
use crate::lattice::PeriodicGraph;

/// Violated checks, sorted.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Syndrome {
    pub defects: Vec<usize>,
}

impl Syndrome {
    pub fn new(mut defects: Vec<usize>) -> Self {
        defects.sort_unstable();
        defects.dedup();
        Syndrome { defects }
    }

    pub fn len(&self) -> usize {
        self.defects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.defects.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matching {
    /// Matched defects, each pair ordered, list sorted.
    pub pairs: Vec<(usize, usize)>,
    /// Edge ids of a shortest path per pair.
    pub paths: Vec<Vec<usize>>,
    pub total_weight: usize,
}

impl Matching {
    /// Sum of the paths over GF(2).
    pub fn correction(&self, num_edges: usize) -> EdgeVector {
        let mut c = EdgeVector::zeros(num_edges);
        for e in self.paths.iter().flatten() {
            c.flip(*e);
        }
        c
    }

    /// Text dump for debugging: one `a b weight: path` line per pair, 1-indexed.
    pub fn dump(&self) -> String {
        let mut s = format!("total {}\n", self.total_weight);
        for (&(a, b), path) in self.pairs.iter().zip(&self.paths) {
            let ids: Vec<String> = path.iter().map(|e| (e + 1).to_string()).collect();
            let _ = writeln!(s, "{} {} {}: {}", a + 1, b + 1, path.len(), ids.join(" "));
        }
        s
    }
}

/// `H_X · error`. Panics if `error` is not of length `n`.
pub fn extract_syndrome(code: &CssCode, error: &EdgeVector) -> Syndrome {
    syndrome_of(&code.h_x, error)
}

/// Rows of `checks` with odd overlap with `error`.
pub fn syndrome_of(checks: &BitMatrix, error: &EdgeVector) -> Syndrome {
    let s = checks.mul_vec(error).expect("error vector has one bit per qubit");
    Syndrome {
        defects: s.iter_ones().collect(),
    }
}

/// Decoder bound to one lattice. Holds only read-only data and can be shared
/// across threads.
#[derive(Clone, Debug)]
pub struct Decoder<'g> {
    graph: &'g PeriodicGraph,
    adj: Vec<Vec<(usize, usize)>>,
}

impl<'g> Decoder<'g> {
    pub fn new(graph: &'g PeriodicGraph) -> Self {
        Decoder {
            graph,
            adj: graph.adjacency(),
        }
    }

    /// Breadth-first search from `src` until all `targets` are reached.
    /// Returns distances and the edge each vertex was reached by.
    fn search(&self, src: usize, targets: &[usize]) -> (Vec<usize>, Vec<usize>) {
        let n = self.graph.num_vertices;
        let mut dist = vec![usize::MAX; n];
        let mut via = vec![usize::MAX; n];
        let mut is_target = vec![false; n];
        for &t in targets {
            is_target[t] = true;
        }
        let mut left = targets.iter().filter(|&&t| t != src).count();
        dist[src] = 0;
        let mut queue = VecDeque::from([src]);
        while let Some(v) = queue.pop_front() {
            if left == 0 {
                break;
            }
            for &(u, e) in &self.adj[v] {
                if dist[u] == usize::MAX {
                    dist[u] = dist[v] + 1;
                    via[u] = e;
                    if is_target[u] {
                        left -= 1;
                    }
                    queue.push_back(u);
                }
            }
        }
        (dist, via)
    }

    /// Graph distance between two vertices.
    pub fn distance(&self, a: usize, b: usize) -> Option<usize> {
        let d = self.search(a, &[b]).0[b];
        (d != usize::MAX).then_some(d)
    }

    /// Exact minimum-weight pairing of the defects.
    pub fn decode(&self, s: &Syndrome) -> Result<Matching, DecodeError> {
        let d = &s.defects;
        if d.len() % 2 == 1 {
            return Err(DecodeError::OddDefectCount(d.len()));
        }
        let searches: Vec<_> = d.iter().map(|&v| self.search(v, d)).collect();
        let mut w = vec![vec![0i64; d.len()]; d.len()];
        for i in 0..d.len() {
            for j in 0..d.len() {
                let x = searches[i].0[d[j]];
                if x == usize::MAX {
                    return Err(DecodeError::Unreachable(d[i]));
                }
                w[i][j] = x as i64;
            }
        }
        let mut pairs = blossom::min_weight_perfect_matching(d.len(), |i, j| w[i][j]);
        pairs.sort_unstable();
        let mut out = Matching {
            pairs: Vec::with_capacity(pairs.len()),
            paths: Vec::with_capacity(pairs.len()),
            total_weight: 0,
        };
        for (i, j) in pairs {
            let via = &searches[i].1;
            let mut path = Vec::new();
            let mut v = d[j];
            while v != d[i] {
                let e = via[v];
                path.push(e);
                let (a, b) = self.graph.edges[e];
                v = if a == v { b } else { a };
            }
            path.reverse();
            out.total_weight += path.len();
            out.pairs.push((d[i], d[j]));
            out.paths.push(path);
        }
        Ok(out)
    }
}

pub fn decode(g: &PeriodicGraph, s: &Syndrome) -> Result<Matching, DecodeError> {
    Decoder::new(g).decode(s)
}

/// Classifies residuals `error ⊕ correction` by two independent routes:
/// parity against the conjugate logicals and membership in the span of the
/// same-type checks.
#[derive(Clone, Debug)]
pub struct Classifier<'c> {
    checks: &'c BitMatrix,
    partners: &'c [EdgeVector],
    stabilizers: Gf2Basis,
}

impl<'c> Classifier<'c> {
    /// For Z errors: detected by the X checks, paired with the X logicals.
    pub fn new(code: &'c CssCode) -> Self {
        Self::build(&code.h_x, &code.x_logicals, &code.h_z, code.n)
    }

    /// For X errors: detected by the Z checks, paired with the Z logicals.
    pub fn for_x_errors(code: &'c CssCode) -> Self {
        Self::build(&code.h_z, &code.z_logicals, &code.h_x, code.n)
    }

    fn build(checks: &'c BitMatrix, partners: &'c [EdgeVector], same: &BitMatrix, n: usize) -> Self {
        let mut stabilizers = Gf2Basis::new(n);
        for r in same.rows() {
            stabilizers.insert(r);
        }
        Classifier {
            checks,
            partners,
            stabilizers,
        }
    }

    /// Whether the residual is a non-trivial logical. Fails if it has a
    /// syndrome or the two routes disagree.
    pub fn is_logical(&self, error: &EdgeVector, correction: &EdgeVector) -> Result<bool, DecodeError> {
        let r = error.xor(correction);
        let s = syndrome_of(self.checks, &r);
        if !s.is_empty() {
            return Err(DecodeError::ResidualHasSyndrome(s.len()));
        }
        let by_parity = self.partners.iter().any(|x| x.dot(&r));
        let by_span = !self.stabilizers.contains(&r);
        if by_parity != by_span {
            return Err(DecodeError::ClassificationMismatch);
        }
        Ok(by_parity)
    }
}

pub fn residual_is_logical(code: &CssCode, error: &EdgeVector, correction: &EdgeVector) -> Result<bool, DecodeError> {
    Classifier::new(code).is_logical(error, correction)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::css::{analyze, Analysis};
    use crate::testutil::{cell, cyclic_graph};
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::sync::OnceLock;

    fn lattice() -> &'static (PeriodicGraph, Analysis) {
        static L: OnceLock<(PeriodicGraph, Analysis)> = OnceLock::new();
        L.get_or_init(|| {
            let g = cyclic_graph(8, 9, &[1, 2, 4, 5]);
            let a = analyze(&g, Some(&cell(8).generators)).unwrap();
            (g, a)
        })
    }

    /// Minimum over all perfect pairings, by recursion on the first defect.
    fn exhaustive(w: &[Vec<usize>], left: &mut Vec<usize>) -> usize {
        let Some(a) = left.pop() else { return 0 };
        let mut best = usize::MAX;
        for i in 0..left.len() {
            let b = left.swap_remove(i);
            best = best.min(w[a][b] + exhaustive(w, left));
            left.push(b);
            let last = left.len() - 1;
            left.swap(i, last);
        }
        left.push(a);
        best
    }

    #[test]
    fn syndromes_of_simple_errors() {
        let (g, a) = lattice();
        let code = &a.code;
        assert!(extract_syndrome(code, &EdgeVector::zeros(code.n)).is_empty());
        let (u, v) = g.edges[17];
        assert_eq!(
            extract_syndrome(code, &EdgeVector::from_support(code.n, [17])).defects,
            {
                let mut d = vec![u, v];
                d.sort();
                d
            }
        );
        assert!(extract_syndrome(code, &a.hcb.faces[3]).is_empty());
    }

    #[test]
    fn two_defects_are_joined_by_a_shortest_path() {
        let (g, a) = lattice();
        let dec = Decoder::new(g);
        let s = Syndrome::new(vec![0, 77]);
        let m = dec.decode(&s).unwrap();
        assert_eq!(m.pairs, vec![(0, 77)]);
        assert_eq!(Some(m.total_weight), dec.distance(0, 77));
        let c = m.correction(g.num_edges());
        assert_eq!(extract_syndrome(&a.code, &c), s);
    }

    #[test]
    fn odd_defect_count_is_rejected() {
        let (g, _) = lattice();
        assert_eq!(
            decode(g, &Syndrome::new(vec![1, 2, 3])),
            Err(DecodeError::OddDefectCount(3))
        );
    }

    #[test]
    fn matches_exhaustive_pairing() {
        let (g, a) = lattice();
        let dec = Decoder::new(g);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let vertices: Vec<usize> = (0..g.num_vertices).collect();
        for _ in 0..25 {
            let k = 2 * rng.gen_range(1..=5);
            let s = Syndrome::new(vertices.choose_multiple(&mut rng, k).copied().collect());
            let m = dec.decode(&s).unwrap();
            let w: Vec<Vec<usize>> = s
                .defects
                .iter()
                .map(|&x| s.defects.iter().map(|&y| dec.distance(x, y).unwrap()).collect())
                .collect();
            assert_eq!(m.total_weight, exhaustive(&w, &mut (0..k).collect()));
            let covered: Vec<usize> = {
                let mut c: Vec<usize> = m.pairs.iter().flat_map(|&(x, y)| [x, y]).collect();
                c.sort();
                c
            };
            assert_eq!(covered, s.defects);
            assert_eq!(extract_syndrome(&a.code, &m.correction(g.num_edges())), s);
        }
    }

    #[test]
    fn distance_is_a_metric_on_samples() {
        let (g, _) = lattice();
        let dec = Decoder::new(g);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let [x, y, z] = [0; 3].map(|_| rng.gen_range(0..g.num_vertices));
            let d = |a, b| dec.distance(a, b).unwrap();
            assert_eq!(d(x, y), d(y, x));
            assert!(d(x, z) <= d(x, y) + d(y, z));
            assert_eq!(d(x, x), 0);
        }
    }

    #[test]
    fn residual_classification() {
        let (_, a) = lattice();
        let code = &a.code;
        let cls = Classifier::new(code);
        let mut e = EdgeVector::zeros(code.n);
        e.flip(3);
        e.flip(40);
        assert_eq!(cls.is_logical(&e, &e), Ok(false));
        let zero = EdgeVector::zeros(code.n);
        assert_eq!(cls.is_logical(&a.hcb.faces[0], &zero), Ok(false));
        for z in &code.z_logicals {
            assert_eq!(cls.is_logical(z, &zero), Ok(true));
            assert_eq!(residual_is_logical(code, &z.xor(&a.hcb.faces[1]), &zero), Ok(true));
        }
        assert_eq!(cls.is_logical(&e, &zero), Err(DecodeError::ResidualHasSyndrome(4)));
    }

    #[test]
    fn x_errors_are_decoded_on_the_dual() {
        let (g, a) = lattice();
        let code = &a.code;
        let dec = Decoder::new(&a.dual);
        let cls = Classifier::for_x_errors(code);
        for e in (0..g.num_edges()).step_by(7) {
            let err = EdgeVector::from_support(code.n, [e]);
            let s = syndrome_of(&code.h_z, &err);
            assert_eq!(s.defects, {
                let (u, v) = a.dual.edges[e];
                vec![u.min(v), u.max(v)]
            });
            let m = dec.decode(&s).unwrap();
            assert_eq!(cls.is_logical(&err, &m.correction(code.n)), Ok(false));
        }
        let zero = EdgeVector::zeros(code.n);
        for x in &code.x_logicals {
            assert_eq!(cls.is_logical(x, &zero), Ok(true));
        }
        assert_eq!(cls.is_logical(&vertex_star(g, 0), &zero), Ok(false));
    }

    fn vertex_star(g: &PeriodicGraph, v: usize) -> EdgeVector {
        EdgeVector::from_support(g.num_edges(), g.adjacency()[v].iter().map(|&(_, e)| e))
    }

    #[test]
    fn single_errors_are_corrected() {
        let (g, a) = lattice();
        let dec = Decoder::new(g);
        let cls = Classifier::new(&a.code);
        for e in 0..g.num_edges() {
            let err = EdgeVector::from_support(g.num_edges(), [e]);
            let m = dec.decode(&extract_syndrome(&a.code, &err)).unwrap();
            assert_eq!(m.total_weight, 1);
            assert_eq!(cls.is_logical(&err, &m.correction(g.num_edges())), Ok(false));
        }
    }
}
