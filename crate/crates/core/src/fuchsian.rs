//! Translation groups of the `{4g,4g}` and `{2(2g+1),2g+1}` Bravais lattices.
//!
//! The fundamental domain is the regular `p_B`-gon centred at the origin with
//! side `m` (0-based) centred on the ray at angle `2πm/p_B`. Generator
//! `γ_{m+1}` pairs side `m + p_B/2` with side `m`; `γ_1` is a boost along the
//! positive real axis and the others are its rotated conjugates.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{FuchsianError, QuotientError};
pub mod quotient;

pub use quotient::{load_quotient, QuotientSpec};

use crate::geometry::{
    geodesic_angle, hyperbolic_distance, isometry_from_point_pairs, regular_polygon, DiskPoint, IsometryKind,
    MobiusTransform, RegularPolygon, GEOM_TOL,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BravaisFamily {
    /// `{4g, 4g}`, minimal cell counts `(1, 2g, 1)`.
    FourG,
    /// `{2(2g+1), 2g+1}`, minimal cell counts `(1, 2g+1, 2)`.
    TwoTimesOddG,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BravaisSignature {
    pub p_b: usize,
    pub q_b: usize,
    pub genus: usize,
    pub family: BravaisFamily,
}

impl BravaisSignature {
    pub fn four_g(genus: usize) -> Result<Self, FuchsianError> {
        Self::new(4 * genus, 4 * genus, genus)
    }

    pub fn two_times_odd_g(genus: usize) -> Result<Self, FuchsianError> {
        Self::new(2 * (2 * genus + 1), 2 * genus + 1, genus)
    }

    /// Recognises the family from `{p_B, q_B}` and checks it against `genus`.
    pub fn new(p_b: usize, q_b: usize, genus: usize) -> Result<Self, FuchsianError> {
        let invalid = |reason: &str| FuchsianError::InvalidSignature {
            p_b,
            q_b,
            genus,
            reason: reason.to_string(),
        };
        if genus < 2 {
            return Err(invalid("genus must be at least 2"));
        }
        let family = if p_b == 4 * genus && q_b == 4 * genus {
            BravaisFamily::FourG
        } else if p_b == 2 * (2 * genus + 1) && q_b == 2 * genus + 1 {
            BravaisFamily::TwoTimesOddG
        } else {
            return Err(invalid("not a {4g,4g} or {2(2g+1),2g+1} lattice"));
        };
        Ok(BravaisSignature {
            p_b,
            q_b,
            genus,
            family,
        })
    }

    /// Infers the genus from `{p_B, q_B}`.
    pub fn from_pattern(p_b: usize, q_b: usize) -> Result<Self, FuchsianError> {
        if p_b == q_b && p_b.is_multiple_of(4) {
            Self::new(p_b, q_b, p_b / 4)
        } else if q_b % 2 == 1 && p_b == 2 * q_b {
            Self::new(p_b, q_b, (q_b - 1) / 2)
        } else {
            Err(FuchsianError::InvalidSignature {
                p_b,
                q_b,
                genus: 0,
                reason: "not a {4g,4g} or {2(2g+1),2g+1} lattice".into(),
            })
        }
    }

    /// `(F_m, E_m, V_m)` for one compactified cell.
    pub fn minimal_counts(&self) -> (usize, usize, usize) {
        match self.family {
            BravaisFamily::FourG => (1, 2 * self.genus, 1),
            BravaisFamily::TwoTimesOddG => (1, 2 * self.genus + 1, 2),
        }
    }

    /// Number of side-pairing generators, `p_B / 2`.
    pub fn pairing_count(&self) -> usize {
        self.p_b / 2
    }

    /// Number of independent generators, `2g`.
    pub fn independent_count(&self) -> usize {
        2 * self.genus
    }

    /// The relator `γ1 γ2⁻¹ … γ_{2g−1} γ_{2g}⁻¹ γ1⁻¹ γ2 … γ_{2g−1}⁻¹ γ_{2g}`.
    pub fn relator(&self) -> Word {
        let n = self.independent_count();
        let mut w = Vec::with_capacity(2 * n);
        for j in 0..n {
            w.push(Letter::new(j, j % 2 == 1));
        }
        for j in 0..n {
            w.push(Letter::new(j, j % 2 == 0));
        }
        Word(w)
    }
}

impl fmt::Display for BravaisSignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{},{}}} (genus {})", self.p_b, self.q_b, self.genus)
    }
}

/// A generator or its inverse. `generator` is 0-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter {
    pub generator: usize,
    pub inverse: bool,
}

impl Letter {
    pub fn new(generator: usize, inverse: bool) -> Self {
        Letter { generator, inverse }
    }

    pub fn inv(self) -> Self {
        Letter {
            generator: self.generator,
            inverse: !self.inverse,
        }
    }

    /// Signed 1-based form: `+j` for `γ_j`, `−j` for `γ_j⁻¹`.
    pub fn signed(self) -> i64 {
        let j = self.generator as i64 + 1;
        if self.inverse {
            -j
        } else {
            j
        }
    }

    pub fn from_signed(s: i64, max: usize) -> Result<Self, QuotientError> {
        let j = s.unsigned_abs() as usize;
        if s == 0 || j > max {
            return Err(QuotientError::IndexOutOfRange { index: s, max });
        }
        Ok(Letter::new(j - 1, s < 0))
    }
}

/// A word in the generators, read left to right.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(pub Vec<Letter>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn from_signed(signed: &[i64], max: usize) -> Result<Self, QuotientError> {
        signed
            .iter()
            .map(|&s| Letter::from_signed(s, max))
            .collect::<Result<Vec<_>, _>>()
            .map(Word)
    }

    pub fn signed(&self) -> Vec<i64> {
        self.0.iter().map(|l| l.signed()).collect()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|l| l.inv()).collect())
    }

    /// Appends `letter`, cancelling against a trailing inverse.
    pub fn push_reduced(&self, letter: Letter) -> Word {
        let mut w = self.0.clone();
        if w.last() == Some(&letter.inv()) {
            w.pop();
        } else {
            w.push(letter);
        }
        Word(w)
    }

    /// Evaluates the word as a product of transforms, left factor first.
    pub fn evaluate(&self, transforms: &[MobiusTransform]) -> MobiusTransform {
        self.0.iter().fold(MobiusTransform::IDENTITY, |acc, l| {
            let g = transforms[l.generator];
            acc.compose(&if l.inverse { g.inverse() } else { g })
        })
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "ε");
        }
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{}", l.signed())?;
        }
        Ok(())
    }
}

/// Side-pairing generators of a Bravais translation group.
#[derive(Clone, Debug)]
pub struct GeneratorSet {
    pub signature: BravaisSignature,
    /// `γ_1 … γ_{p_B/2}`.
    pub generators: Vec<MobiusTransform>,
    /// For every generator beyond the first `2g`, a word in the independent ones.
    pub dependent_words: Vec<(usize, Word)>,
    pub polygon: RegularPolygon,
}

impl GeneratorSet {
    pub fn independent_count(&self) -> usize {
        self.signature.independent_count()
    }

    pub fn independent(&self) -> &[MobiusTransform] {
        &self.generators[..self.independent_count()]
    }

    /// Corner `i` of the fundamental polygon, at angle `(2i+1)π/p_B`.
    pub fn corner(&self, i: usize) -> DiskPoint {
        corner(&self.polygon, i)
    }

    /// Side `m` as `(start, end)` in counter-clockwise order.
    pub fn side(&self, m: usize) -> (DiskPoint, DiskPoint) {
        side(&self.polygon, m)
    }

    /// Every generator written as a word in the independent generators.
    pub fn generator_word(&self, j: usize) -> Word {
        if j < self.independent_count() {
            Word(vec![Letter::new(j, false)])
        } else {
            self.dependent_words
                .iter()
                .find(|(g, _)| *g == j)
                .map(|(_, w)| w.clone())
                .expect("every dependent generator has a word")
        }
    }

    /// Largest endpoint error of the side pairings `γ_{m+1}: side(m+p_B/2) → side(m)`.
    pub fn side_pairing_error(&self) -> Vec<f64> {
        let n = self.signature.pairing_count();
        (0..n)
            .map(|m| {
                let (s0, s1) = self.side(m + n);
                let (d0, d1) = self.side(m);
                let g = self.generators[m];
                hyperbolic_distance(g.apply(s0), d1).max(hyperbolic_distance(g.apply(s1), d0))
            })
            .collect()
    }

    /// Vertex classes under the side pairings, with the sum of interior angles
    /// of each class.
    pub fn vertex_classes(&self) -> Vec<(Vec<usize>, f64)> {
        let p = self.signature.p_b;
        let n = p / 2;
        let mut parent: Vec<usize> = (0..p).collect();
        fn find(parent: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while parent[r] != r {
                r = parent[r];
            }
            let mut y = x;
            while parent[y] != r {
                let next = parent[y];
                parent[y] = r;
                y = next;
            }
            r
        }
        for m in 0..n {
            // side(k) runs from corner(k-1) to corner(k)
            let pairs = [((m + n + p - 1) % p, m % p), ((m + n) % p, (m + p - 1) % p)];
            for (a, b) in pairs {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                if ra != rb {
                    parent[ra.max(rb)] = ra.min(rb);
                }
            }
        }
        let mut classes: Vec<(usize, Vec<usize>)> = Vec::new();
        for i in 0..p {
            let r = find(&mut parent, i);
            match classes.iter_mut().find(|(root, _)| *root == r) {
                Some((_, members)) => members.push(i),
                None => classes.push((r, vec![i])),
            }
        }
        classes
            .into_iter()
            .map(|(_, members)| {
                let sum = members
                    .iter()
                    .map(|&i| geodesic_angle(self.corner(i), self.corner((i + p - 1) % p), self.corner((i + 1) % p)))
                    .sum();
                (members, sum)
            })
            .collect()
    }
}

fn corner(polygon: &RegularPolygon, i: usize) -> DiskPoint {
    let p = polygon.p;
    // regular_polygon with phase π/p puts vertex k (1-based) at (2k+1)π/p
    polygon.vertices[(i + p - 1) % p]
}

fn side(polygon: &RegularPolygon, m: usize) -> (DiskPoint, DiskPoint) {
    let p = polygon.p;
    (corner(polygon, (m + p - 1) % p), corner(polygon, m % p))
}

/// Evaluates the relator; returns the max-entry deviation from `±identity`.
pub fn check_relator(signature: &BravaisSignature, generators: &[MobiusTransform]) -> f64 {
    signature.relator().evaluate(generators).deviation_from_identity()
}

pub fn build_generators(signature: BravaisSignature) -> Result<GeneratorSet, FuchsianError> {
    let p = signature.p_b;
    let n = signature.pairing_count();
    let polygon = regular_polygon(p, signature.q_b, PI / p as f64)?;

    // γ_1 maps side n onto side 0, start to end
    let (s0, s1) = side(&polygon, n);
    let (d0, d1) = side(&polygon, 0);
    let gamma1 = isometry_from_point_pairs(s0, s1, d1, d0)?;
    let alpha = 2.0 * PI / p as f64;
    let generators: Vec<MobiusTransform> = (0..n)
        .map(|m| {
            let r = MobiusTransform::rotation(m as f64 * alpha);
            r.compose(&gamma1).compose(&r.inverse())
        })
        .collect();

    for (j, g) in generators.iter().enumerate() {
        if g.classify() != IsometryKind::Hyperbolic {
            return Err(FuchsianError::NotTranslation { generator: j + 1 });
        }
    }
    let residual = check_relator(&signature, &generators);
    if residual > GEOM_TOL {
        return Err(FuchsianError::RelatorViolation { residual });
    }

    let independent = signature.independent_count();
    let mut dependent_words = Vec::new();
    for j in independent..n {
        let word = find_word(&generators[..independent], &generators[j], independent)
            .ok_or(FuchsianError::DependentWordNotFound { generator: j + 1 })?;
        dependent_words.push((j, word));
    }

    let set = GeneratorSet {
        signature,
        generators,
        dependent_words,
        polygon,
    };
    for (m, err) in set.side_pairing_error().into_iter().enumerate() {
        if err > GEOM_TOL {
            return Err(FuchsianError::SidePairingMismatch {
                generator: m + 1,
                error: err,
            });
        }
    }
    for (class, (_, sum)) in set.vertex_classes().into_iter().enumerate() {
        if (sum - 2.0 * PI).abs() > GEOM_TOL {
            return Err(FuchsianError::AngleCondition { class, sum });
        }
    }
    Ok(set)
}

/// Breadth-first search over reduced words of length `≤ max_len` for one that
/// evaluates to `target` (up to sign).
pub fn find_word(generators: &[MobiusTransform], target: &MobiusTransform, max_len: usize) -> Option<Word> {
    let letters: Vec<Letter> = (0..generators.len())
        .flat_map(|j| [Letter::new(j, false), Letter::new(j, true)])
        .collect();
    let mut frontier = vec![(Word::empty(), MobiusTransform::IDENTITY)];
    for _ in 0..max_len {
        let mut next = Vec::with_capacity(frontier.len() * letters.len());
        for (w, g) in &frontier {
            for &l in &letters {
                if w.0.last() == Some(&l.inv()) {
                    continue;
                }
                let t = generators[l.generator];
                let h = g.compose(&if l.inverse { t.inverse() } else { t });
                let mut word = w.clone();
                word.0.push(l);
                if h.approx_eq(target, GEOM_TOL) {
                    return Some(word);
                }
                next.push((word, h));
            }
        }
        frontier = next;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    /// Relator evaluated by explicit 2×2 complex matrix products, independent
    /// of `MobiusTransform::compose`.
    fn relator_by_matrices(sig: &BravaisSignature, gens: &[MobiusTransform]) -> f64 {
        type M = [[Complex64; 2]; 2];
        let mat = |g: &MobiusTransform, inv: bool| -> M {
            let (a, b) = (g.a(), g.b());
            if inv {
                [[a.conj(), -b], [-b.conj(), a]]
            } else {
                [[a, b], [b.conj(), a.conj()]]
            }
        };
        let mul = |x: M, y: M| -> M {
            let mut r = [[Complex64::new(0.0, 0.0); 2]; 2];
            for i in 0..2 {
                for j in 0..2 {
                    r[i][j] = x[i][0] * y[0][j] + x[i][1] * y[1][j];
                }
            }
            r
        };
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let mut acc: M = [[one, zero], [zero, one]];
        for l in &sig.relator().0 {
            acc = mul(acc, mat(&gens[l.generator], l.inverse));
        }
        let dev = |s: f64| {
            let target = [[one * s, zero], [zero, one * s]];
            let mut m: f64 = 0.0;
            for i in 0..2 {
                for j in 0..2 {
                    m = m.max((acc[i][j] - target[i][j]).norm());
                }
            }
            m
        };
        dev(1.0).min(dev(-1.0))
    }

    #[test]
    fn signature_validation() {
        let s = BravaisSignature::new(8, 8, 2).unwrap();
        assert_eq!(s.family, BravaisFamily::FourG);
        assert_eq!(s.minimal_counts(), (1, 4, 1));
        let s = BravaisSignature::new(10, 5, 2).unwrap();
        assert_eq!(s.family, BravaisFamily::TwoTimesOddG);
        assert_eq!(s.minimal_counts(), (1, 5, 2));
        assert!(BravaisSignature::new(8, 8, 3).is_err());
        assert!(BravaisSignature::new(8, 3, 2).is_err());
        assert!(BravaisSignature::new(4, 4, 1).is_err());
        assert_eq!(BravaisSignature::from_pattern(14, 7).unwrap().genus, 3);
        assert_eq!(BravaisSignature::from_pattern(12, 12).unwrap().genus, 3);
    }

    #[test]
    fn relator_word_shape() {
        let s = BravaisSignature::four_g(2).unwrap();
        assert_eq!(s.relator().signed(), vec![1, -2, 3, -4, -1, 2, -3, 4]);
        // zero exponent sum per generator
        let s3 = BravaisSignature::four_g(3).unwrap();
        for j in 1..=6i64 {
            let sum: i64 = s3
                .relator()
                .signed()
                .iter()
                .filter(|x| x.abs() == j)
                .map(|x| x.signum())
                .sum();
            assert_eq!(sum, 0);
        }
    }

    #[test]
    fn generators_8_8() {
        let sig = BravaisSignature::four_g(2).unwrap();
        let gs = build_generators(sig).unwrap();
        assert_eq!(gs.generators.len(), 4);
        assert!(gs.dependent_words.is_empty());
        assert!(relator_by_matrices(&sig, &gs.generators) < 1e-9);
        assert!(check_relator(&sig, &gs.generators) < 1e-9);
        // γ_1 is an axis-aligned boost
        let g1 = gs.generators[0];
        assert!(g1.a().im.abs() < 1e-12 && g1.b().im.abs() < 1e-12);
        assert!(g1.apply(DiskPoint::ORIGIN).re() > 0.0);
    }

    #[test]
    fn generators_10_5() {
        let sig = BravaisSignature::two_times_odd_g(2).unwrap();
        let gs = build_generators(sig).unwrap();
        assert_eq!(gs.generators.len(), 5);
        assert_eq!(gs.independent_count(), 4);
        assert!(relator_by_matrices(&sig, gs.independent()) < 1e-9);
        let (j, w) = &gs.dependent_words[0];
        assert_eq!(*j, 4);
        assert!(w.evaluate(gs.independent()).approx_eq(&gs.generators[4], 1e-9));
        assert_eq!(w.len(), 4);
    }

    #[test]
    fn conjugates_share_translation_length() {
        for sig in [
            BravaisSignature::four_g(2).unwrap(),
            BravaisSignature::two_times_odd_g(2).unwrap(),
        ] {
            let gs = build_generators(sig).unwrap();
            let t0 = gs.generators[0].trace();
            let alpha = 2.0 * PI / sig.p_b as f64;
            for (m, g) in gs.generators.iter().enumerate() {
                assert!((g.trace() - t0).abs() < 1e-9);
                let r = MobiusTransform::rotation(m as f64 * alpha);
                let expected = r.compose(&gs.generators[0]).compose(&r.inverse());
                assert!(g.approx_eq(&expected, 1e-9));
                assert_eq!(g.classify(), IsometryKind::Hyperbolic);
            }
            // translation length is twice the inradius of the fundamental polygon
            let len = gs.generators[0].translation_length();
            assert!((len - 2.0 * gs.polygon.inradius()).abs() < 1e-9);
        }
    }

    #[test]
    fn side_and_angle_conditions() {
        for sig in [
            BravaisSignature::four_g(2).unwrap(),
            BravaisSignature::two_times_odd_g(2).unwrap(),
            BravaisSignature::four_g(3).unwrap(),
        ] {
            let gs = build_generators(sig).unwrap();
            for e in gs.side_pairing_error() {
                assert!(e < 1e-9);
            }
            let classes = gs.vertex_classes();
            assert_eq!(classes.len(), sig.minimal_counts().2);
            for (_, sum) in classes {
                assert!((sum - 2.0 * PI).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn relator_evaluator_degenerate_and_perturbed() {
        let sig = BravaisSignature::four_g(2).unwrap();
        let ids = vec![MobiusTransform::IDENTITY; 4];
        assert_eq!(check_relator(&sig, &ids), 0.0);

        let gs = build_generators(sig).unwrap();
        let mut gens = gs.generators.clone();
        let g = gens[1];
        gens[1] = MobiusTransform::new(g.a() + Complex64::new(1e-3, 0.0), g.b()).unwrap();
        let residual = check_relator(&sig, &gens);
        assert!(residual > 1e-4, "{residual}");
        assert!((relator_by_matrices(&sig, &gens) - residual).abs() < 1e-9);
    }

    #[test]
    fn word_round_trip_and_bounds() {
        let w = Word::from_signed(&[1, -2, 4], 4).unwrap();
        assert_eq!(w.signed(), vec![1, -2, 4]);
        assert_eq!(w.inverse().signed(), vec![-4, 2, -1]);
        assert!(matches!(
            Word::from_signed(&[5], 4),
            Err(QuotientError::IndexOutOfRange { index: 5, max: 4 })
        ));
        assert!(Word::from_signed(&[0], 4).is_err());
        assert_eq!(w.push_reduced(Letter::new(3, true)).signed(), vec![1, -2]);
    }
}
