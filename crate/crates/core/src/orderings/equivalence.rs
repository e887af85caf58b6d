//! The relations `∼` (admissible transpositions), `s∼` (shifts) and `w∼`
//! (their transitive closure) on pivot sequences.
//!
//! Two sequences are `∼`-equivalent exactly when they are equal as traces
//! over the dependence relation "pairs share a block index". Every class
//! therefore has a unique lexicographically least member, which serves as a
//! canonical key, and equality of classes can be decided by comparing the
//! projections onto every pair of dependent letters.

use std::collections::{HashMap, HashSet, VecDeque};

use super::sequence::{independent, pair_of_letter};
use super::{OrderingError, PivotSequence};

/// Largest `m` accepted by the exhaustive searches.
pub const MAX_SEARCH_BLOCKS: usize = 6;
/// Largest number of states the exhaustive searches will visit.
pub const MAX_SEARCH_STATES: usize = 4_000_000;

/// Swaps the pairs at positions `r` and `r + 1`, which must have disjoint index sets.
pub fn admissible_transposition(o: &PivotSequence, r: usize) -> Result<PivotSequence, OrderingError> {
    if r + 1 >= o.len() {
        return Err(OrderingError::PositionOutOfRange { position: r, len: o.len() });
    }
    let (a, b) = (o.pairs()[r], o.pairs()[r + 1]);
    if !independent(a, b) {
        return Err(OrderingError::NotAdmissible { position: r });
    }
    let mut pairs = o.pairs().to_vec();
    pairs.swap(r, r + 1);
    Ok(PivotSequence::from_valid(o.m(), pairs))
}

/// Dependence table of the letters of `P_m`.
pub(crate) struct Dependence {
    m: usize,
    dep: Vec<bool>,
    size: usize,
}

impl Dependence {
    pub(crate) fn new(m: usize) -> Self {
        let size = m * (m - 1) / 2;
        let mut dep = vec![false; size * size];
        for a in 0..size {
            for b in 0..size {
                dep[a * size + b] = a == b || !independent(pair_of_letter(a), pair_of_letter(b));
            }
        }
        Self { m, dep, size }
    }

    #[inline]
    pub(crate) fn dependent(&self, a: usize, b: usize) -> bool {
        self.dep[a * self.size + b]
    }

    /// For each position, the bit mask of earlier positions it depends on.
    pub(crate) fn predecessor_masks(&self, word: &[usize]) -> Vec<u64> {
        assert!(word.len() <= 64, "sequence too long for bit-mask search");
        (0..word.len())
            .map(|k| (0..k).filter(|&l| self.dependent(word[l], word[k])).fold(0u64, |acc, l| acc | (1 << l)))
            .collect()
    }

    /// Lexicographically least member of the trace class of `word`.
    pub(crate) fn canonical(&self, word: &[usize]) -> Vec<usize> {
        let pred = self.predecessor_masks(word);
        let mut placed = 0u64;
        let mut out = Vec::with_capacity(word.len());
        for _ in 0..word.len() {
            let mut best: Option<usize> = None;
            for k in 0..word.len() {
                if placed & (1 << k) != 0 || pred[k] & !placed != 0 {
                    continue;
                }
                if best.is_none_or(|b| word[k] < word[b]) {
                    best = Some(k);
                }
            }
            let k = best.expect("a trace always has a minimal element");
            placed |= 1 << k;
            out.push(word[k]);
        }
        out
    }

    /// `true` when the projections onto every dependent letter pair agree.
    pub(crate) fn same_trace(&self, w1: &[usize], w2: &[usize]) -> bool {
        if w1.len() != w2.len() {
            return false;
        }
        for a in 0..self.size {
            for b in a..self.size {
                if !self.dependent(a, b) {
                    continue;
                }
                let p1 = w1.iter().filter(|&&x| x == a || x == b);
                let p2 = w2.iter().filter(|&&x| x == a || x == b);
                if !p1.eq(p2) {
                    return false;
                }
            }
        }
        true
    }

    /// Calls `f` with every nonempty proper downset of the trace poset of `word`.
    pub(crate) fn for_each_proper_downset(&self, word: &[usize], mut f: impl FnMut(u64)) {
        let pred = self.predecessor_masks(word);
        let full = if word.len() == 64 { u64::MAX } else { (1u64 << word.len()) - 1 };
        fn rec(k: usize, set: u64, pred: &[u64], full: u64, f: &mut dyn FnMut(u64)) {
            if k == pred.len() {
                if set != 0 && set != full {
                    f(set);
                }
                return;
            }
            rec(k + 1, set, pred, full, f);
            if pred[k] & !set == 0 {
                rec(k + 1, set | (1 << k), pred, full, f);
            }
        }
        rec(0, 0, &pred, full, &mut f);
    }

    pub(crate) fn m(&self) -> usize {
        self.m
    }
}

/// Splits `word` into the letters inside and outside the position set `mask`.
pub(crate) fn split_by_mask(word: &[usize], mask: u64) -> (Vec<usize>, Vec<usize>) {
    let mut inside = Vec::new();
    let mut outside = Vec::new();
    for (k, &l) in word.iter().enumerate() {
        if mask & (1 << k) != 0 {
            inside.push(l);
        } else {
            outside.push(l);
        }
    }
    (inside, outside)
}

/// The lexicographically least sequence `∼`-equivalent to `o`.
pub fn canonical_form(o: &PivotSequence) -> PivotSequence {
    let dep = Dependence::new(o.m());
    PivotSequence::from_letters(o.m(), &dep.canonical(&o.letters()))
}

/// Decides `o1 ∼ o2`.
///
/// For cyclic sequences this is the relative-order criterion (pairs sharing
/// an index occur in the same relative order); for sequences with repeated
/// pairs the same test runs on projections onto each dependent pair of
/// letters, which decides trace equality for any length.
pub fn are_equivalent(o1: &PivotSequence, o2: &PivotSequence) -> bool {
    if o1.m() != o2.m() || o1.len() != o2.len() {
        return false;
    }
    Dependence::new(o1.m()).same_trace(&o1.letters(), &o2.letters())
}

/// Decides `o1 ∼ o2` by breadth-first search over admissible transpositions.
///
/// This is the slow reference procedure, limited to `m ≤ 6`.
pub fn equivalent_by_search(o1: &PivotSequence, o2: &PivotSequence) -> Result<bool, OrderingError> {
    check_search_size(o1.m())?;
    if o1.m() != o2.m() || o1.len() != o2.len() {
        return Ok(false);
    }
    let target = o2.pairs().to_vec();
    let mut seen: HashSet<Vec<(usize, usize)>> = HashSet::new();
    let mut queue = VecDeque::new();
    seen.insert(o1.pairs().to_vec());
    queue.push_back(o1.pairs().to_vec());
    while let Some(w) = queue.pop_front() {
        if w == target {
            return Ok(true);
        }
        for r in 0..w.len() - 1 {
            if independent(w[r], w[r + 1]) {
                let mut next = w.clone();
                next.swap(r, r + 1);
                if seen.insert(next.clone()) {
                    if seen.len() > MAX_SEARCH_STATES {
                        return Err(OrderingError::UnsupportedSize { m: o1.m(), max: MAX_SEARCH_BLOCKS });
                    }
                    queue.push_back(next);
                }
            }
        }
    }
    Ok(false)
}

/// Smallest `r` with `o2 = rotate(o1, r)`, if any.
pub fn are_shift_equivalent(o1: &PivotSequence, o2: &PivotSequence) -> Option<usize> {
    if o1.m() != o2.m() || o1.len() != o2.len() {
        return None;
    }
    (0..o1.len()).find(|&r| o1.rotate(r).pairs() == o2.pairs())
}

/// Relation between consecutive sequences of a [`WeakChain`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChainRelation {
    /// The previous sequence and this one are `∼`-equivalent.
    Equivalent,
    /// This sequence is the previous one rotated by the given length.
    Shift(usize),
}

/// One link of a [`WeakChain`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainLink {
    pub relation: ChainRelation,
    pub sequence: PivotSequence,
}

/// A witness `O = O_0 ∼ O_1 s∼ O_2 ∼ … ∼ O'` for `O w∼ O'`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeakChain {
    pub start: PivotSequence,
    pub links: Vec<ChainLink>,
}

impl WeakChain {
    /// Number of shift links `d`.
    pub fn shifts(&self) -> usize {
        self.links.iter().filter(|l| matches!(l.relation, ChainRelation::Shift(_))).count()
    }

    /// Last sequence of the chain.
    pub fn end(&self) -> &PivotSequence {
        self.links.last().map_or(&self.start, |l| &l.sequence)
    }

    /// Checks every link.
    pub fn is_valid(&self) -> bool {
        let mut prev = &self.start;
        for link in &self.links {
            let ok = match link.relation {
                ChainRelation::Equivalent => are_equivalent(prev, &link.sequence),
                ChainRelation::Shift(r) => prev.rotate(r) == link.sequence,
            };
            if !ok {
                return false;
            }
            prev = &link.sequence;
        }
        true
    }
}

fn check_search_size(m: usize) -> Result<(), OrderingError> {
    if m > MAX_SEARCH_BLOCKS {
        return Err(OrderingError::UnsupportedSize { m, max: MAX_SEARCH_BLOCKS });
    }
    Ok(())
}

struct ShiftEdge {
    parent: usize,
    before: Vec<usize>,
    after: Vec<usize>,
    shift: usize,
}

/// Breadth-first search over `∼`-classes joined by shifts.
///
/// Neighbours of a class are obtained by moving a nonempty proper downset of
/// its trace poset to the end, which realizes every rotation of every member.
/// `visit` is called on each new class key with its depth; returning `true`
/// stops the search and yields the path to that class.
pub(crate) struct ShiftSearch {
    dep: Dependence,
    keys: Vec<Vec<usize>>,
    depth: Vec<usize>,
    edges: Vec<Option<ShiftEdge>>,
}

impl ShiftSearch {
    pub(crate) fn run(
        start: &PivotSequence,
        mut visit: impl FnMut(&[usize], usize) -> bool,
    ) -> Result<(Self, Option<usize>), OrderingError> {
        check_search_size(start.m())?;
        let dep = Dependence::new(start.m());
        let mut this = Self { keys: Vec::new(), depth: Vec::new(), edges: Vec::new(), dep };
        let mut index: HashMap<Vec<usize>, usize> = HashMap::new();
        let root = this.dep.canonical(&start.letters());
        index.insert(root.clone(), 0);
        this.keys.push(root);
        this.depth.push(0);
        this.edges.push(None);
        if visit(&this.keys[0], 0) {
            return Ok((this, Some(0)));
        }
        let mut head = 0;
        while head < this.keys.len() {
            let word = this.keys[head].clone();
            let d = this.depth[head];
            let mut found = None;
            let mut overflow = false;
            let mut fresh = Vec::new();
            this.dep.for_each_proper_downset(&word, |mask| {
                if found.is_some() || overflow {
                    return;
                }
                let (inside, outside) = split_by_mask(&word, mask);
                let mut rotated = outside.clone();
                rotated.extend_from_slice(&inside);
                let key = this.dep.canonical(&rotated);
                if index.contains_key(&key) {
                    return;
                }
                let id = this.keys.len() + fresh.len();
                index.insert(key.clone(), id);
                if index.len() > MAX_SEARCH_STATES {
                    overflow = true;
                    return;
                }
                let mut before = inside.clone();
                before.extend_from_slice(&outside);
                let shift = inside.len();
                let stop = visit(&key, d + 1);
                fresh.push((key, ShiftEdge { parent: head, before, after: rotated, shift }));
                if stop {
                    found = Some(id);
                }
            });
            for (key, edge) in fresh {
                this.keys.push(key);
                this.depth.push(d + 1);
                this.edges.push(Some(edge));
            }
            if overflow {
                return Err(OrderingError::UnsupportedSize { m: start.m(), max: MAX_SEARCH_BLOCKS });
            }
            if found.is_some() {
                return Ok((this, found));
            }
            head += 1;
        }
        Ok((this, None))
    }

    /// Canonical keys of all visited classes.
    pub(crate) fn keys(&self) -> &[Vec<usize>] {
        &self.keys
    }

    /// Builds the chain from `start` to `end`, which must lie in the class with id `id`.
    pub(crate) fn chain(&self, start: &PivotSequence, id: usize, end: &PivotSequence) -> WeakChain {
        let m = self.dep.m();
        let mut path = Vec::new();
        let mut cur = id;
        while let Some(edge) = &self.edges[cur] {
            path.push(edge);
            cur = edge.parent;
        }
        path.reverse();
        let mut links = Vec::new();
        let mut last = start.clone();
        for edge in path {
            let before = PivotSequence::from_letters(m, &edge.before);
            if before != last {
                links.push(ChainLink { relation: ChainRelation::Equivalent, sequence: before });
            }
            let after = PivotSequence::from_letters(m, &edge.after);
            links.push(ChainLink { relation: ChainRelation::Shift(edge.shift), sequence: after.clone() });
            last = after;
        }
        if &last != end {
            links.push(ChainLink { relation: ChainRelation::Equivalent, sequence: end.clone() });
        }
        WeakChain { start: start.clone(), links }
    }
}

/// Decides `o1 w∼ o2` for `m ≤ 6`, returning a chain with the least number of shifts.
pub fn are_weak_equivalent(o1: &PivotSequence, o2: &PivotSequence) -> Result<Option<WeakChain>, OrderingError> {
    check_search_size(o1.m())?;
    if o1.m() != o2.m() || o1.len() != o2.len() {
        return Ok(None);
    }
    let dep = Dependence::new(o1.m());
    let target = dep.canonical(&o2.letters());
    let (search, found) = ShiftSearch::run(o1, |key, _| key == target.as_slice())?;
    Ok(found.map(|id| search.chain(o1, id, o2)))
}

/// Canonical representatives of all `∼`-classes that are `w∼`-equivalent to `o` (`m ≤ 6`).
pub fn weak_class_representatives(o: &PivotSequence) -> Result<Vec<PivotSequence>, OrderingError> {
    let (search, _) = ShiftSearch::run(o, |_, _| false)?;
    Ok(search.keys().iter().map(|k| PivotSequence::from_letters(o.m(), k)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(m: usize, pairs: &[(usize, usize)]) -> PivotSequence {
        PivotSequence::new(m, pairs.to_vec()).unwrap()
    }

    #[test]
    fn swapping_disjoint_pairs_is_admissible() {
        let o = seq(4, &[(1, 2), (3, 4), (1, 3), (2, 4), (1, 4), (2, 3)]);
        let t = admissible_transposition(&o, 0).unwrap();
        assert_eq!(&t.pairs()[..2], &[(3, 4), (1, 2)]);
        assert!(are_equivalent(&o, &t));
    }

    #[test]
    fn swapping_pairs_with_shared_index_is_rejected() {
        let o = seq(3, &[(1, 2), (1, 3), (2, 3)]);
        assert_eq!(admissible_transposition(&o, 0), Err(OrderingError::NotAdmissible { position: 0 }));
        assert!(matches!(admissible_transposition(&o, 2), Err(OrderingError::PositionOutOfRange { .. })));
    }

    #[test]
    fn shift_recovers_rotation() {
        let o = PivotSequence::row(3);
        assert_eq!(are_shift_equivalent(&o, &o), Some(0));
        assert_eq!(are_shift_equivalent(&o, &o.rotate(1)), Some(1));
        assert_eq!(are_shift_equivalent(&o, &o.reverse()), None);
    }

    #[test]
    fn weak_chain_of_a_rotation_has_one_shift() {
        let o = PivotSequence::column(4);
        let chain = are_weak_equivalent(&o, &o.rotate(2)).unwrap().unwrap();
        assert_eq!(chain.shifts(), 1);
        assert!(chain.is_valid());
        assert_eq!(chain.end(), &o.rotate(2));
        let same = are_weak_equivalent(&o, &o).unwrap().unwrap();
        assert_eq!(same.shifts(), 0);
    }

    #[test]
    fn search_rejects_large_m() {
        let o = PivotSequence::row(7);
        assert!(matches!(are_weak_equivalent(&o, &o), Err(OrderingError::UnsupportedSize { m: 7, .. })));
        assert!(matches!(equivalent_by_search(&o, &o), Err(OrderingError::UnsupportedSize { .. })));
    }

    #[test]
    fn canonical_form_is_class_invariant() {
        let o = seq(4, &[(3, 4), (1, 2), (2, 4), (1, 3), (1, 4), (2, 3)]);
        let t = admissible_transposition(&o, 0).unwrap();
        assert_eq!(canonical_form(&o), canonical_form(&t));
        assert_eq!(canonical_form(&t).pairs()[0], (1, 2));
    }
}
