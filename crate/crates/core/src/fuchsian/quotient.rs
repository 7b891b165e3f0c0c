//! Finite quotients of a Bravais translation group, given as the right action
//! of the independent generators on `N` cosets.

use std::collections::VecDeque;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{BravaisSignature, GeneratorSet, Letter, Word};
use crate::error::{Error, QuotientError};

/// A permutation of `0..n` as its image array.
pub type Permutation = Vec<usize>;

pub fn identity_permutation(n: usize) -> Permutation {
    (0..n).collect()
}

/// `a` followed by `b`.
pub fn then(a: &[usize], b: &[usize]) -> Permutation {
    a.iter().map(|&x| b[x]).collect()
}

pub fn invert(a: &[usize]) -> Permutation {
    let mut r = vec![0; a.len()];
    for (i, &x) in a.iter().enumerate() {
        r[x] = i;
    }
    r
}

#[derive(Serialize, Deserialize)]
struct BravaisJson {
    p: usize,
    q: usize,
    genus: usize,
}

#[derive(Serialize, Deserialize)]
struct QuotientJson {
    bravais: BravaisJson,
    index: usize,
    generators: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuotientSpec {
    signature: BravaisSignature,
    perms: Vec<Permutation>,
}

impl QuotientSpec {
    /// Validates and wraps 0-based permutations of the `2g` independent generators.
    pub fn new(signature: BravaisSignature, perms: Vec<Permutation>) -> Result<Self, QuotientError> {
        let expected = signature.independent_count();
        if perms.len() != expected {
            return Err(QuotientError::ParseError(format!(
                "expected {expected} generator permutations, found {}",
                perms.len()
            )));
        }
        let n = perms[0].len();
        if n == 0 {
            return Err(QuotientError::ParseError("index must be at least 1".into()));
        }
        for (j, p) in perms.iter().enumerate() {
            if p.len() != n {
                return Err(QuotientError::InvalidPermutation {
                    generator: j + 1,
                    reason: format!("length {} differs from index {n}", p.len()),
                });
            }
            let mut seen = vec![false; n];
            for &x in p {
                if x >= n || seen[x] {
                    return Err(QuotientError::InvalidPermutation {
                        generator: j + 1,
                        reason: format!("not a permutation of 1..={n}"),
                    });
                }
                seen[x] = true;
            }
        }
        let spec = QuotientSpec { signature, perms };
        let r = spec.coset_action(&signature.relator());
        if let Some(moved) = (0..n).find(|&i| r[i] != i) {
            return Err(QuotientError::RelatorNotIdentity { moved: moved + 1 });
        }
        let words = spec.transversal_words();
        let orbit = words.iter().filter(|w| w.is_some()).count();
        if orbit != n {
            return Err(QuotientError::NotTransitive { orbit, index: n });
        }
        spec.check_regular(&words)?;
        Ok(spec)
    }

    /// The index-1 quotient: the unit cell itself.
    pub fn trivial(signature: BravaisSignature) -> Self {
        QuotientSpec {
            signature,
            perms: vec![vec![0]; signature.independent_count()],
        }
    }

    /// Cyclic quotient `γ_j ↦ σ^{exponents[j]}` for an `n`-cycle `σ`.
    pub fn cyclic(signature: BravaisSignature, n: usize, exponents: &[usize]) -> Result<Self, QuotientError> {
        let perms = exponents
            .iter()
            .map(|&a| (0..n).map(|i| (i + a) % n).collect())
            .collect();
        Self::new(signature, perms)
    }

    pub fn from_json(text: &str) -> Result<Self, QuotientError> {
        let raw: QuotientJson = serde_json::from_str(text).map_err(|e| QuotientError::ParseError(e.to_string()))?;
        let signature = BravaisSignature::new(raw.bravais.p, raw.bravais.q, raw.bravais.genus)?;
        for (j, g) in raw.generators.iter().enumerate() {
            if g.len() != raw.index {
                return Err(QuotientError::InvalidPermutation {
                    generator: j + 1,
                    reason: format!("length {} differs from index {}", g.len(), raw.index),
                });
            }
            if g.iter().any(|&x| x == 0 || x > raw.index) {
                return Err(QuotientError::InvalidPermutation {
                    generator: j + 1,
                    reason: format!("image outside 1..={}", raw.index),
                });
            }
        }
        if raw.index == 0 {
            return Err(QuotientError::ParseError("index must be at least 1".into()));
        }
        let perms = raw
            .generators
            .into_iter()
            .map(|g| g.into_iter().map(|x| x - 1).collect())
            .collect();
        Self::new(signature, perms)
    }

    pub fn to_json(&self) -> String {
        let raw = QuotientJson {
            bravais: BravaisJson {
                p: self.signature.p_b,
                q: self.signature.q_b,
                genus: self.signature.genus,
            },
            index: self.index(),
            generators: self.perms.iter().map(|p| p.iter().map(|&x| x + 1).collect()).collect(),
        };
        serde_json::to_string(&raw).expect("quotient spec serialises")
    }

    pub fn signature(&self) -> BravaisSignature {
        self.signature
    }

    pub fn index(&self) -> usize {
        self.perms[0].len()
    }

    pub fn perms(&self) -> &[Permutation] {
        &self.perms
    }

    /// Genus of the compactified surface, `N(g−1)+1`.
    pub fn surface_genus(&self) -> usize {
        self.index() * (self.signature.genus - 1) + 1
    }

    /// Composes the letters of `word` left to right.
    pub fn coset_action(&self, word: &Word) -> Permutation {
        let n = self.index();
        let mut acc = identity_permutation(n);
        for l in &word.0 {
            let p = &self.perms[l.generator];
            acc = if l.inverse {
                then(&acc, &invert(p))
            } else {
                then(&acc, p)
            };
        }
        acc
    }

    /// [`coset_action`](Self::coset_action) for signed 1-based generator indices.
    pub fn coset_action_signed(&self, signed: &[i64]) -> Result<Permutation, QuotientError> {
        let w = Word::from_signed(signed, self.signature.independent_count())?;
        Ok(self.coset_action(&w))
    }

    /// Permutations for all `p_B/2` side-pairing generators, evaluating the
    /// dependent ones through their words.
    pub fn full_perms(&self, gs: &GeneratorSet) -> Result<Vec<Permutation>, QuotientError> {
        if gs.signature != self.signature {
            return Err(QuotientError::SignatureMismatch {
                left: self.signature.to_string(),
                right: gs.signature.to_string(),
            });
        }
        Ok((0..self.signature.pairing_count())
            .map(|j| self.coset_action(&gs.generator_word(j)))
            .collect())
    }

    /// Breadth-first word from coset 0 to every coset (`None` if unreachable).
    /// Letters are tried in the order `γ_1, γ_1⁻¹, γ_2, …`.
    pub fn transversal_words(&self) -> Vec<Option<Word>> {
        let n = self.index();
        let inverses: Vec<Permutation> = self.perms.iter().map(|p| invert(p)).collect();
        let mut words: Vec<Option<Word>> = vec![None; n];
        words[0] = Some(Word::empty());
        let mut queue = VecDeque::from([0usize]);
        while let Some(c) = queue.pop_front() {
            let w = words[c].clone().expect("queued cosets have words");
            for (j, (perm, inv)) in self.perms.iter().zip(&inverses).enumerate() {
                for (inverse, p) in [(false, perm), (true, inv)] {
                    let next = p[c];
                    if words[next].is_none() {
                        words[next] = Some(w.push_reduced(Letter::new(j, inverse)));
                        queue.push_back(next);
                    }
                }
            }
        }
        words
    }

    /// A transitive action is regular iff the transversal elements are closed
    /// under right multiplication by the generators.
    fn check_regular(&self, words: &[Option<Word>]) -> Result<(), QuotientError> {
        let n = self.index();
        let elements: Vec<Permutation> = words
            .iter()
            .map(|w| self.coset_action(w.as_ref().expect("transitive")))
            .collect();
        for t in &elements {
            for p in &self.perms {
                let prod = then(t, p);
                if prod != elements[prod[0]] {
                    let witness = (0..n).find(|&i| prod[i] != elements[prod[0]][i]).unwrap_or(0);
                    return Err(QuotientError::NotRegular {
                        index: n,
                        witness: witness + 1,
                    });
                }
            }
        }
        Ok(())
    }

    /// Quotient by the intersection of both kernels: the product action on the
    /// orbit of `(1, 1)`.
    pub fn intersect(&self, other: &QuotientSpec) -> Result<QuotientSpec, QuotientError> {
        if self.signature != other.signature {
            return Err(QuotientError::SignatureMismatch {
                left: self.signature.to_string(),
                right: other.signature.to_string(),
            });
        }
        let (n1, n2) = (self.index(), other.index());
        let mut label = vec![usize::MAX; n1 * n2];
        let mut order = vec![(0usize, 0usize)];
        label[0] = 0;
        let mut head = 0;
        while head < order.len() {
            let (a, b) = order[head];
            head += 1;
            for j in 0..self.perms.len() {
                let (na, nb) = (self.perms[j][a], other.perms[j][b]);
                if label[na * n2 + nb] == usize::MAX {
                    label[na * n2 + nb] = order.len();
                    order.push((na, nb));
                }
            }
        }
        let perms = (0..self.perms.len())
            .map(|j| {
                order
                    .iter()
                    .map(|&(a, b)| label[self.perms[j][a] * n2 + other.perms[j][b]])
                    .collect()
            })
            .collect();
        QuotientSpec::new(self.signature, perms)
    }
}

pub fn load_quotient(path: &Path) -> Result<QuotientSpec, Error> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(QuotientSpec::from_json(&text)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sig88() -> BravaisSignature {
        BravaisSignature::four_g(2).unwrap()
    }

    /// Group order by brute-force closure of the generated permutation group.
    fn group_order(perms: &[Permutation]) -> usize {
        let n = perms[0].len();
        let mut seen = std::collections::HashSet::new();
        let mut stack = vec![identity_permutation(n)];
        seen.insert(identity_permutation(n));
        while let Some(g) = stack.pop() {
            for p in perms {
                let h = then(&g, p);
                if seen.insert(h.clone()) {
                    stack.push(h);
                }
            }
        }
        seen.len()
    }

    #[test]
    fn trivial_spec_is_valid() {
        let t = QuotientSpec::trivial(sig88());
        assert_eq!(QuotientSpec::new(sig88(), t.perms().to_vec()).unwrap(), t);
        assert_eq!(t.surface_genus(), 2);
        let json = r#"{"bravais":{"p":8,"q":8,"genus":2},"index":1,"generators":[[1],[1],[1],[1]]}"#;
        assert_eq!(QuotientSpec::from_json(json).unwrap(), t);
    }

    #[test]
    fn cyclic_nine() {
        let spec = QuotientSpec::cyclic(sig88(), 9, &[1, 2, 4, 5]).unwrap();
        assert_eq!(group_order(spec.perms()), 9);
        assert_eq!(spec.coset_action(&sig88().relator()), identity_permutation(9));
        assert_eq!(spec.surface_genus(), 10);
        let back = QuotientSpec::from_json(&spec.to_json()).unwrap();
        assert_eq!(back, spec);
    }

    #[test]
    fn rejects_bad_specs() {
        // relator fails: γ1 = (1 2 3), γ2 = (1 2), others identity
        let json = r#"{"bravais":{"p":8,"q":8,"genus":2},"index":3,
            "generators":[[2,3,1],[2,1,3],[1,2,3],[1,2,3]]}"#;
        assert!(matches!(
            QuotientSpec::from_json(json),
            Err(QuotientError::RelatorNotIdentity { .. })
        ));
        // not transitive
        let json = r#"{"bravais":{"p":8,"q":8,"genus":2},"index":2,
            "generators":[[1,2],[1,2],[1,2],[1,2]]}"#;
        assert!(matches!(
            QuotientSpec::from_json(json),
            Err(QuotientError::NotTransitive { orbit: 1, index: 2 })
        ));
        // not a permutation
        let json = r#"{"bravais":{"p":8,"q":8,"genus":2},"index":2,
            "generators":[[1,1],[1,2],[1,2],[1,2]]}"#;
        assert!(matches!(
            QuotientSpec::from_json(json),
            Err(QuotientError::InvalidPermutation { generator: 1, .. })
        ));
        assert!(matches!(
            QuotientSpec::from_json("{"),
            Err(QuotientError::ParseError(_))
        ));
        let json = r#"{"bravais":{"p":8,"q":3,"genus":2},"index":1,"generators":[[1],[1],[1],[1]]}"#;
        assert!(matches!(QuotientSpec::from_json(json), Err(QuotientError::Fuchsian(_))));
    }

    #[test]
    fn rejects_non_regular_action() {
        // S3 acting on 3 points: γ1 = γ3 = (1 2 3)... relator holds for x1=x2=a, x3=x4=b
        // since x1 x2⁻¹ x3 x4⁻¹ x1⁻¹ x2 x3⁻¹ x4 = 1; group S3 has order 6 > 3
        let a = vec![1, 2, 0];
        let b = vec![1, 0, 2];
        let perms = vec![a.clone(), a, b.clone(), b];
        assert!(matches!(
            QuotientSpec::new(sig88(), perms.clone()),
            Err(QuotientError::NotRegular { index: 3, .. })
        ));
        assert_eq!(group_order(&perms), 6);
    }

    #[test]
    fn coset_action_words() {
        let spec = QuotientSpec::cyclic(sig88(), 5, &[1, 2, 3, 4]).unwrap();
        assert_eq!(spec.coset_action_signed(&[]).unwrap(), identity_permutation(5));
        assert_eq!(spec.coset_action_signed(&[2, -2]).unwrap(), identity_permutation(5));
        assert_eq!(spec.coset_action_signed(&[1, 1]).unwrap(), vec![2, 3, 4, 0, 1]);
        assert!(matches!(
            spec.coset_action_signed(&[5]),
            Err(QuotientError::IndexOutOfRange { index: 5, max: 4 })
        ));
        assert!(matches!(
            spec.coset_action_signed(&[-7]),
            Err(QuotientError::IndexOutOfRange { index: -7, max: 4 })
        ));
    }

    #[test]
    fn transversal_words_reach_their_cosets() {
        let spec = QuotientSpec::cyclic(sig88(), 7, &[1, 3, 2, 6]).unwrap();
        for (c, w) in spec.transversal_words().iter().enumerate() {
            let w = w.as_ref().unwrap();
            assert_eq!(spec.coset_action(w)[0], c);
        }
    }

    #[test]
    fn intersections() {
        let s = QuotientSpec::cyclic(sig88(), 4, &[1, 1, 3, 2]).unwrap();
        let t = QuotientSpec::trivial(sig88());
        assert_eq!(s.intersect(&t).unwrap().index(), 4);
        assert_eq!(s.intersect(&s).unwrap().index(), 4);
        let c2 = QuotientSpec::cyclic(sig88(), 2, &[1, 1, 1, 1]).unwrap();
        let c3 = QuotientSpec::cyclic(sig88(), 3, &[1, 1, 1, 1]).unwrap();
        let both = c2.intersect(&c3).unwrap();
        assert_eq!(both.index(), 6);
        assert_eq!(group_order(both.perms()), 6);
        let s105 = QuotientSpec::trivial(BravaisSignature::two_times_odd_g(2).unwrap());
        assert!(matches!(
            s.intersect(&s105),
            Err(QuotientError::SignatureMismatch { .. })
        ));
    }

    fn gcd(a: usize, b: usize) -> usize {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }

    proptest! {
        #[test]
        fn cyclic_intersection_index_bounds(
            n1 in 1usize..12, n2 in 1usize..12,
            e1 in proptest::collection::vec(0usize..12, 4),
            e2 in proptest::collection::vec(0usize..12, 4),
        ) {
            let mut e1 = e1; e1[0] = 1;
            let mut e2 = e2; e2[0] = 1;
            let a = QuotientSpec::cyclic(sig88(), n1, &e1).unwrap();
            let b = QuotientSpec::cyclic(sig88(), n2, &e2).unwrap();
            let l = a.intersect(&b).unwrap().index();
            let lcm = n1 / gcd(n1, n2) * n2;
            prop_assert!(lcm <= l && l <= n1 * n2);
            if gcd(n1, n2) == 1 {
                prop_assert_eq!(l, n1 * n2);
            }
        }

        #[test]
        fn abelian_quotients_satisfy_relator(n in 1usize..20, e in proptest::collection::vec(0usize..20, 4)) {
            let mut e = e; e[0] = 1;
            let spec = QuotientSpec::cyclic(sig88(), n, &e).unwrap();
            prop_assert_eq!(group_order(spec.perms()), n);
        }
    }
}
