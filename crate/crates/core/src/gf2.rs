//! Symbolic GF(2) algebra over subfile identifiers.
//!
//! A [`Gf2Combo`] is the XOR of a set of subfiles. Caches and broadcast
//! symbols are both combos, so every decoding question reduces to span
//! membership, answered here by Gaussian elimination that always pivots on
//! the smallest [`SubfileId`] of a row.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Subfile `W_{file,part}`, both indices 1-based.
///
/// Ordered file-major, part-minor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SubfileId {
    pub file: usize,
    pub part: usize,
}

impl SubfileId {
    pub const fn new(file: usize, part: usize) -> Self {
        SubfileId { file, part }
    }
}

impl fmt::Display for SubfileId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "W[{},{}]", self.file, self.part)
    }
}

impl Serialize for SubfileId {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        (self.file, self.part).serialize(s)
    }
}

impl<'de> Deserialize<'de> for SubfileId {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let (file, part) = <(usize, usize)>::deserialize(d)?;
        Ok(SubfileId { file, part })
    }
}

/// XOR of a set of subfiles, stored as a sorted, duplicate-free term list.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Gf2Combo {
    terms: Vec<SubfileId>,
}

impl Gf2Combo {
    pub fn empty() -> Self {
        Gf2Combo { terms: Vec::new() }
    }

    pub fn singleton(id: SubfileId) -> Self {
        Gf2Combo { terms: vec![id] }
    }

    /// Builds a combo from terms that must be pairwise distinct.
    pub fn from_distinct(terms: impl IntoIterator<Item = SubfileId>) -> crate::Result<Self> {
        let mut terms: Vec<SubfileId> = terms.into_iter().collect();
        terms.sort_unstable();
        if let Some(w) = terms.windows(2).find(|w| w[0] == w[1]) {
            return Err(crate::Error::Malformed(format!(
                "duplicate term {} in combo",
                w[0]
            )));
        }
        Ok(Gf2Combo { terms })
    }

    pub fn terms(&self) -> &[SubfileId] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn contains(&self, id: SubfileId) -> bool {
        self.terms.binary_search(&id).is_ok()
    }

    /// Smallest term, the elimination pivot.
    pub fn leading(&self) -> Option<SubfileId> {
        self.terms.first().copied()
    }

    pub fn xor_assign(&mut self, other: &Gf2Combo) {
        self.terms = sym_diff(&self.terms, &other.terms);
    }
}

/// Collecting XOR-folds the items, so repeated ids cancel in pairs.
impl FromIterator<SubfileId> for Gf2Combo {
    fn from_iter<I: IntoIterator<Item = SubfileId>>(iter: I) -> Self {
        let mut terms: Vec<SubfileId> = iter.into_iter().collect();
        terms.sort_unstable();
        let mut out = Vec::with_capacity(terms.len());
        let mut i = 0;
        while i < terms.len() {
            let mut j = i;
            while j < terms.len() && terms[j] == terms[i] {
                j += 1;
            }
            if (j - i) % 2 == 1 {
                out.push(terms[i]);
            }
            i = j;
        }
        Gf2Combo { terms: out }
    }
}

impl fmt::Display for Gf2Combo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "{t}")?;
        }
        Ok(())
    }
}

impl Serialize for Gf2Combo {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.terms.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Gf2Combo {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let terms = Vec::<SubfileId>::deserialize(d)?;
        Gf2Combo::from_distinct(terms).map_err(serde::de::Error::custom)
    }
}

/// Symmetric difference of two sorted, duplicate-free slices.
fn sym_diff<T: Ord + Copy>(a: &[T], b: &[T]) -> Vec<T> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

pub fn xor_combine(a: &Gf2Combo, b: &Gf2Combo) -> Gf2Combo {
    Gf2Combo {
        terms: sym_diff(&a.terms, &b.terms),
    }
}

#[derive(Debug, Clone)]
struct Row {
    combo: Gf2Combo,
    // sorted indices of the inserted combos that XOR to `combo`
    sources: Vec<usize>,
}

/// Incremental row-echelon basis over GF(2).
///
/// Rows are keyed by their smallest term. When `track_sources` is on, every
/// row remembers which inserted combos sum to it, which is what turns a
/// membership test into a witness.
#[derive(Debug, Clone)]
pub struct Eliminator {
    rows: BTreeMap<SubfileId, Row>,
    track_sources: bool,
    inserted: usize,
}

impl Eliminator {
    pub fn new(track_sources: bool) -> Self {
        Eliminator {
            rows: BTreeMap::new(),
            track_sources,
            inserted: 0,
        }
    }

    pub fn from_basis<'a>(
        basis: impl IntoIterator<Item = &'a Gf2Combo>,
        track_sources: bool,
    ) -> Self {
        let mut elim = Eliminator::new(track_sources);
        for combo in basis {
            elim.insert(combo);
        }
        elim
    }

    /// Adds the next combo (index = number of previous inserts). Returns
    /// whether it raised the rank.
    pub fn insert(&mut self, combo: &Gf2Combo) -> bool {
        let index = self.inserted;
        self.inserted += 1;
        let (residual, mut sources) = self.reduce(combo);
        match residual.leading() {
            None => false,
            Some(pivot) => {
                if self.track_sources {
                    sources = sym_diff(&sources, &[index]);
                }
                self.rows.insert(
                    pivot,
                    Row {
                        combo: residual,
                        sources,
                    },
                );
                true
            }
        }
    }

    /// Reduces `target` against the basis. Returns the residual and, when
    /// tracking, the inserted-combo indices that were XORed in.
    pub fn reduce(&self, target: &Gf2Combo) -> (Gf2Combo, Vec<usize>) {
        let mut current = target.clone();
        let mut sources = Vec::new();
        // XOR with a row whose pivot is p only touches terms >= p, so the
        // first pivot present in `current` is always safe to clear next.
        while let Some(row) = current.terms.iter().find_map(|t| self.rows.get(t)) {
            current.xor_assign(&row.combo);
            if self.track_sources {
                sources = sym_diff(&sources, &row.sources);
            }
        }
        (current, sources)
    }

    pub fn contains(&self, target: &Gf2Combo) -> bool {
        self.reduce(target).0.is_empty()
    }

    /// Indices of inserted combos XOR-summing to `target`, if it is in the span.
    ///
    /// Panics if source tracking was disabled.
    pub fn witness(&self, target: &Gf2Combo) -> Option<Vec<usize>> {
        assert!(self.track_sources, "witness requires source tracking");
        let (residual, sources) = self.reduce(target);
        residual.is_empty().then_some(sources)
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }
}

pub fn span_contains(basis: &[Gf2Combo], target: &Gf2Combo) -> bool {
    Eliminator::from_basis(basis, false).contains(target)
}

/// Like [`span_contains`], but returns the basis indices whose XOR is `target`.
pub fn span_witness(basis: &[Gf2Combo], target: &Gf2Combo) -> Option<Vec<usize>> {
    Eliminator::from_basis(basis, true).witness(target)
}

pub fn rank(combos: &[Gf2Combo]) -> usize {
    Eliminator::from_basis(combos, false).rank()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn id(file: usize, part: usize) -> SubfileId {
        SubfileId::new(file, part)
    }

    fn combo(ids: &[(usize, usize)]) -> Gf2Combo {
        Gf2Combo::from_distinct(ids.iter().map(|&(f, p)| id(f, p))).unwrap()
    }

    // A=1, B=2, C=3, D=4
    #[test]
    fn xor_is_self_inverse() {
        let a1 = combo(&[(1, 1)]);
        assert!(xor_combine(&a1, &a1).is_empty());
    }

    #[test]
    fn cache_minus_two_subfiles_leaves_third() {
        let z1 = combo(&[(1, 1), (2, 1), (3, 1)]);
        let step = xor_combine(&z1, &combo(&[(2, 1)]));
        let step = xor_combine(&step, &combo(&[(3, 1)]));
        assert_eq!(step, combo(&[(1, 1)]));
    }

    #[test]
    fn xor_is_symmetric_difference() {
        let lhs = combo(&[(1, 1), (2, 2)]);
        let rhs = combo(&[(2, 2), (3, 3)]);
        assert_eq!(xor_combine(&lhs, &rhs), combo(&[(1, 1), (3, 3)]));
    }

    #[test]
    fn ordering_is_file_major() {
        assert!(id(1, 9) < id(2, 1));
        assert!(id(2, 1) < id(2, 2));
        let c = combo(&[(3, 1), (1, 2), (2, 1)]);
        assert_eq!(c.terms(), &[id(1, 2), id(2, 1), id(3, 1)]);
    }

    #[test]
    fn from_iterator_cancels_pairs() {
        let c: Gf2Combo = [id(1, 1), id(2, 1), id(1, 1), id(1, 1)]
            .into_iter()
            .collect();
        assert_eq!(c, combo(&[(1, 1), (2, 1)]));
        assert!(Gf2Combo::from_distinct([id(1, 1), id(1, 1)]).is_err());
    }

    #[test]
    fn empty_target_is_always_in_span() {
        assert_eq!(span_witness(&[], &Gf2Combo::empty()), Some(vec![]));
        let basis = [combo(&[(1, 1)])];
        assert_eq!(span_witness(&basis, &Gf2Combo::empty()), Some(vec![]));
    }

    #[test]
    fn decode_a1_uses_all_three() {
        let basis = [
            combo(&[(1, 1), (2, 1), (3, 1)]),
            combo(&[(2, 1)]),
            combo(&[(3, 1)]),
        ];
        let target = combo(&[(1, 1)]);
        assert!(span_contains(&basis, &target));
        assert_eq!(span_witness(&basis, &target), Some(vec![0, 1, 2]));
    }

    #[test]
    fn a1_not_in_span_of_a1_plus_b1() {
        let basis = [combo(&[(1, 1), (2, 1)])];
        let target = combo(&[(1, 1)]);
        // the only subset sums are 0 and A1+B1
        let sums = [Gf2Combo::empty(), basis[0].clone()];
        assert!(!sums.contains(&target));
        assert!(!span_contains(&basis, &target));
        assert_eq!(span_witness(&basis, &target), None);
    }

    #[test]
    fn rank_examples() {
        assert_eq!(rank(&[]), 0);
        let a1 = combo(&[(1, 1)]);
        let b1 = combo(&[(2, 1)]);
        assert_eq!(rank(&[a1.clone(), a1, b1]), 2);
        let caches: Vec<Gf2Combo> = (1..=4)
            .map(|k| combo(&[(1, k), (2, k), (3, k), (4, k)]))
            .collect();
        assert_eq!(rank(&caches), 4);
    }

    #[test]
    fn dependent_insert_does_not_raise_rank() {
        let mut elim = Eliminator::new(true);
        assert!(elim.insert(&combo(&[(1, 1), (1, 2)])));
        assert!(elim.insert(&combo(&[(1, 2), (1, 3)])));
        assert!(!elim.insert(&combo(&[(1, 1), (1, 3)])));
        assert_eq!(elim.rank(), 2);
        assert_eq!(elim.witness(&combo(&[(1, 1), (1, 3)])), Some(vec![0, 1]));
    }

    #[test]
    fn serde_uses_pairs() {
        let c = combo(&[(2, 1), (1, 3)]);
        let json = serde_json::to_string(&c).unwrap();
        assert_eq!(json, "[[1,3],[2,1]]");
        let back: Gf2Combo = serde_json::from_str(&json).unwrap();
        assert_eq!(back, c);
        assert!(serde_json::from_str::<Gf2Combo>("[[1,1],[1,1]]").is_err());
    }
}
