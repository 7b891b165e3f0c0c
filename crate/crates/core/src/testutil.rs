//! Cached lattices shared by the unit tests.

use std::sync::OnceLock;

use crate::fuchsian::{build_generators, BravaisSignature, QuotientSpec};
use crate::lattice::{build_periodic_graph, build_unit_cell, PeriodicGraph, UnitCell};

pub fn cell_8_3() -> &'static UnitCell {
    static CELL: OnceLock<UnitCell> = OnceLock::new();
    CELL.get_or_init(|| {
        let gs = build_generators(BravaisSignature::four_g(2).unwrap()).unwrap();
        build_unit_cell(8, 3, &gs).unwrap()
    })
}

pub fn cell_10_3() -> &'static UnitCell {
    static CELL: OnceLock<UnitCell> = OnceLock::new();
    CELL.get_or_init(|| {
        let gs = build_generators(BravaisSignature::two_times_odd_g(2).unwrap()).unwrap();
        build_unit_cell(10, 3, &gs).unwrap()
    })
}

pub fn cell(p: usize) -> &'static UnitCell {
    match p {
        8 => cell_8_3(),
        10 => cell_10_3(),
        _ => panic!("no cached cell for p = {p}"),
    }
}

/// `{p,3}` on the cyclic quotient of index `n` with the given exponents.
pub fn cyclic_graph(p: usize, n: usize, exponents: &[usize]) -> PeriodicGraph {
    let c = cell(p);
    let spec = QuotientSpec::cyclic(c.generators.signature, n, exponents).unwrap();
    build_periodic_graph(c, &spec).unwrap()
}

pub fn trivial_graph(p: usize) -> PeriodicGraph {
    let c = cell(p);
    build_periodic_graph(c, &QuotientSpec::trivial(c.generators.signature)).unwrap()
}

/// Contractibility test for closed walks of a graph built from `cell(p)`.
pub fn holonomy_filter(g: &PeriodicGraph) -> impl Fn(&[usize], &[usize]) -> bool + '_ {
    g.contractibility_filter(&cell(g.p).generators).unwrap()
}
