//! The CSS code of a closed lattice: qubits on edges, Z checks on faces,
//! X checks on vertex stars, logicals from the primal and dual cycle bases.

use std::collections::HashSet;
use std::fmt::Write as _;

use crate::cycles::{hyperbolic_cycle_basis, shortest_odd_cycle, HyperbolicCycleBasis};
use crate::error::{CssError, Error};
use crate::fuchsian::GeneratorSet;
use crate::gf2::{gf2_in_span, BitMatrix, EdgeVector};
use crate::lattice::{dual_graph, PeriodicGraph};

#[derive(Clone, Debug)]
pub struct CssCode {
    /// Face boundaries, `F × E`.
    pub h_z: BitMatrix,
    /// Vertex stars, `V × E`.
    pub h_x: BitMatrix,
    /// Non-contractible cycles of the lattice.
    pub z_logicals: Vec<EdgeVector>,
    /// Non-contractible cycles of the dual lattice, on primal edge ids.
    pub x_logicals: Vec<EdgeVector>,
    pub n: usize,
    pub k: usize,
}

/// Vertex stars of `g` as edge vectors.
pub fn vertex_stars(g: &PeriodicGraph) -> Vec<EdgeVector> {
    g.adjacency()
        .iter()
        .map(|l| EdgeVector::from_support(g.num_edges(), l.iter().map(|&(_, e)| e)))
        .collect()
}

/// Assembles the code and checks commutation, check weights, `k = 2h` and the
/// non-degeneracy of the logical pairing.
pub fn assemble(
    g: &PeriodicGraph,
    hcb: &HyperbolicCycleBasis,
    dual_hcb: &HyperbolicCycleBasis,
) -> Result<CssCode, CssError> {
    let n = g.num_edges();
    let h_z = BitMatrix::from_rows(n, hcb.all_faces())?;
    let h_x = BitMatrix::from_rows(n, vertex_stars(g))?;
    let violation = |m: String| Err(CssError::InvariantViolation(m));

    if !h_x.mul_transpose(&h_z)?.is_zero() {
        return violation("X and Z checks do not commute".into());
    }
    if let Some(i) = h_z.rows().iter().position(|r| r.weight() != g.p) {
        return violation(format!("Z check {i} has weight {}", h_z.row(i).weight()));
    }
    if let Some(i) = h_x.rows().iter().position(|r| r.weight() != g.q) {
        return violation(format!("X check {i} has weight {}", h_x.row(i).weight()));
    }
    let (rank_z, rank_x) = (h_z.rank(), h_x.rank());
    let k = n - rank_x - rank_z;
    let h = hcb.logicals.len();
    if k != h || dual_hcb.logicals.len() != h {
        return violation(format!(
            "k = {k} but the cycle bases carry {h} and {} logicals",
            dual_hcb.logicals.len()
        ));
    }
    let z_logicals = hcb.logicals.clone();
    let x_logicals = dual_hcb.logicals.clone();
    for x in &x_logicals {
        if x.len() != n {
            return Err(CssError::DimensionMismatch {
                expected: n,
                found: x.len(),
            });
        }
    }
    let pairing: Vec<EdgeVector> = z_logicals
        .iter()
        .map(|z| EdgeVector::from_support(k, (0..k).filter(|&j| z.dot(&x_logicals[j]))))
        .collect();
    let rank = BitMatrix::from_rows(k, pairing)?.rank();
    if rank != k {
        return Err(CssError::PairingDegenerate { rank, expected: k });
    }
    Ok(CssCode {
        h_z,
        h_x,
        z_logicals,
        x_logicals,
        n,
        k,
    })
}

impl CssCode {
    /// `⟨z_i, x_j⟩` over GF(2).
    pub fn pairing_matrix(&self) -> BitMatrix {
        let rows = self
            .z_logicals
            .iter()
            .map(|z| EdgeVector::from_support(self.k, (0..self.k).filter(|&j| z.dot(&self.x_logicals[j]))))
            .collect();
        BitMatrix::from_rows(self.k, rows).expect("pairing rows have length k")
    }

    /// Checks that no logical lies in the span of the stabilizers of its type.
    pub fn check_logicals(&self) -> Result<(), CssError> {
        for (i, z) in self.z_logicals.iter().enumerate() {
            if gf2_in_span(z, self.h_z.rows())? {
                return Err(CssError::InvariantViolation(format!(
                    "z logical {i} is a product of Z checks"
                )));
            }
        }
        for (i, x) in self.x_logicals.iter().enumerate() {
            if gf2_in_span(x, self.h_x.rows())? {
                return Err(CssError::InvariantViolation(format!(
                    "x logical {i} is a product of X checks"
                )));
            }
        }
        Ok(())
    }

    /// Text export: a `n k dZ dX p q N h` header, then the check matrices and
    /// logicals as sorted 1-indexed edge ids, one row per line.
    pub fn export(&self, d_z: usize, d_x: usize, p: usize, q: usize, cells: usize, genus: usize) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "n k dZ dX p q N h");
        let _ = writeln!(
            s,
            "{} {} {} {} {} {} {} {}",
            self.n, self.k, d_z, d_x, p, q, cells, genus
        );
        let sections: [(&str, &[EdgeVector]); 4] = [
            ("HZ", self.h_z.rows()),
            ("HX", self.h_x.rows()),
            ("ZL", &self.z_logicals),
            ("XL", &self.x_logicals),
        ];
        for (name, rows) in sections {
            let _ = writeln!(s, "{name} {}", rows.len());
            for r in rows {
                let ids: Vec<String> = r.iter_ones().map(|e| (e + 1).to_string()).collect();
                let _ = writeln!(s, "{}", ids.join(" "));
            }
        }
        s
    }
}

/// Minimum weight of a cycle of `g` that pairs oddly with some operator in
/// `against`, by the two-sheeted cover search per operator.
pub fn min_odd_cycle_weight(g: &PeriodicGraph, against: &[EdgeVector]) -> Option<usize> {
    let adj = g.adjacency();
    let mut best: Option<usize> = None;
    for l in against {
        let bound = best.unwrap_or(usize::MAX);
        if let Some(c) = shortest_odd_cycle(g, &adj, l, None, bound) {
            best = Some(best.map_or(c.weight(), |b| b.min(c.weight())));
        }
    }
    best
}

/// `d_Z`: lightest Z-type logical, a cycle of the lattice odd against an X logical.
pub fn distance_z(g: &PeriodicGraph, x_logicals: &[EdgeVector]) -> Option<usize> {
    min_odd_cycle_weight(g, x_logicals)
}

/// `d_X`: the same search on the dual lattice against the Z logicals.
pub fn distance_x(dual: &PeriodicGraph, z_logicals: &[EdgeVector]) -> Option<usize> {
    min_odd_cycle_weight(dual, z_logicals)
}

/// Everything derived from a closed lattice.
#[derive(Clone, Debug)]
pub struct Analysis {
    pub hcb: HyperbolicCycleBasis,
    pub dual: PeriodicGraph,
    pub dual_hcb: HyperbolicCycleBasis,
    pub code: CssCode,
    pub d_z: usize,
    pub d_x: usize,
}

/// Cycle bases, code and distances. With `gs`, plaquettes are certified by
/// their translation holonomy; dual plaquettes are always certified as
/// vertex stars.
pub fn analyze(g: &PeriodicGraph, gs: Option<&GeneratorSet>) -> Result<Analysis, Error> {
    let filter = gs.and_then(|gs| g.contractibility_filter(gs));
    let hcb = match &filter {
        Some(f) => hyperbolic_cycle_basis(g, Some(f))?,
        None => hyperbolic_cycle_basis(g, None)?,
    };
    let dual = dual_graph(g, &hcb.all_faces())?;
    let stars: HashSet<EdgeVector> = vertex_stars(g).into_iter().collect();
    let ne = g.num_edges();
    let is_star = |_: &[usize], edges: &[usize]| stars.contains(&EdgeVector::from_support(ne, edges.iter().copied()));
    let dual_hcb = hyperbolic_cycle_basis(&dual, Some(&is_star))?;
    let code = assemble(g, &hcb, &dual_hcb)?;
    code.check_logicals()?;
    let none = || CssError::InvariantViolation("no logical operators".into());
    let d_z = distance_z(g, &code.x_logicals).ok_or_else(none)?;
    let d_x = distance_x(&dual, &code.z_logicals).ok_or_else(none)?;
    Ok(Analysis {
        hcb,
        dual,
        dual_hcb,
        code,
        d_z,
        d_x,
    })
}
