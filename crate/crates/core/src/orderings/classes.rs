//! Generalized serial strategy classes: generators and recognizers.
//!
//! The column class `B_c` consists of `(1,2)` followed, for `j = 3, …, m`, by
//! the pairs `(τ_j(1), j), …, (τ_j(j−1), j)` for a permutation `τ_j` of
//! `{1, …, j−1}`. The row class is its image under the reversal `ẽ`, and the
//! reverse classes are obtained by reading sequences backwards. Permuted
//! classes close these under admissible transpositions (`∼`), shifts (`w∼`)
//! and block relabeling (`p∼`). Quasi-cyclic ("bar") classes additionally
//! allow a repeat segment drawn from `P_j` after column `j` is complete.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;

use super::equivalence::{Dependence, ShiftSearch, MAX_SEARCH_BLOCKS};
use super::sequence::pair_of_letter;
use super::{admissible_transposition, are_equivalent, BlockPermutation, OrderingError, PivotSequence};

/// Strategy classes understood by [`generate_class`] and [`recognize_class`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ClassKind {
    Bc,
    Br,
    BcRev,
    BrRev,
    Bcp,
    Brp,
    Bsp,
    Bspg,
    Bsg,
    BarBc,
    BarBr,
    BarBcRev,
    BarBrRev,
    BarBsp,
    BarBspg,
    BarBsg,
}

impl ClassKind {
    /// Every class, in display order.
    pub const ALL: [ClassKind; 16] = [
        ClassKind::Bc,
        ClassKind::Br,
        ClassKind::BcRev,
        ClassKind::BrRev,
        ClassKind::Bcp,
        ClassKind::Brp,
        ClassKind::Bsp,
        ClassKind::Bspg,
        ClassKind::Bsg,
        ClassKind::BarBc,
        ClassKind::BarBr,
        ClassKind::BarBcRev,
        ClassKind::BarBrRev,
        ClassKind::BarBsp,
        ClassKind::BarBspg,
        ClassKind::BarBsg,
    ];

    /// Canonical name such as `B_c_rev` or `barB_sg`.
    pub fn name(self) -> &'static str {
        match self {
            ClassKind::Bc => "B_c",
            ClassKind::Br => "B_r",
            ClassKind::BcRev => "B_c_rev",
            ClassKind::BrRev => "B_r_rev",
            ClassKind::Bcp => "B_cp",
            ClassKind::Brp => "B_rp",
            ClassKind::Bsp => "B_sp",
            ClassKind::Bspg => "B_spg",
            ClassKind::Bsg => "B_sg",
            ClassKind::BarBc => "barB_c",
            ClassKind::BarBr => "barB_r",
            ClassKind::BarBcRev => "barB_c_rev",
            ClassKind::BarBrRev => "barB_r_rev",
            ClassKind::BarBsp => "barB_sp",
            ClassKind::BarBspg => "barB_spg",
            ClassKind::BarBsg => "barB_sg",
        }
    }

    /// `true` for the quasi-cyclic classes.
    pub fn is_quasi(self) -> bool {
        matches!(
            self,
            ClassKind::BarBc
                | ClassKind::BarBr
                | ClassKind::BarBcRev
                | ClassKind::BarBrRev
                | ClassKind::BarBsp
                | ClassKind::BarBspg
                | ClassKind::BarBsg
        )
    }

    /// `true` when recognition needs the exhaustive `p∼`/`w∼` searches.
    pub fn needs_search(self) -> bool {
        matches!(self, ClassKind::Bspg | ClassKind::Bsg | ClassKind::BarBspg | ClassKind::BarBsg)
    }

    fn serial_bases(self) -> &'static [SerialBase] {
        use SerialBase::*;
        match self {
            ClassKind::Bc | ClassKind::BarBc => &[Col],
            ClassKind::Br | ClassKind::BarBr => &[Row],
            ClassKind::BcRev | ClassKind::BarBcRev => &[ColRev],
            ClassKind::BrRev | ClassKind::BarBrRev => &[RowRev],
            ClassKind::Bcp => &[Col, ColRev],
            ClassKind::Brp => &[Row, RowRev],
            _ => &[Col, Row, ColRev, RowRev],
        }
    }
}

impl fmt::Display for ClassKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ClassKind {
    type Err = OrderingError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ClassKind::ALL
            .iter()
            .copied()
            .find(|k| k.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| OrderingError::InvalidKind(s.to_string()))
    }
}

/// The four serial families a witness can bottom out in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SerialBase {
    /// `B_c` (or its quasi-cyclic extension).
    Col,
    /// `B_r = B_c(ẽ)`.
    Row,
    /// Reverses of `B_c` members.
    ColRev,
    /// Reverses of `B_r` members.
    RowRev,
}

impl SerialBase {
    /// Maps a sequence of this family to the corresponding column-class sequence.
    pub fn to_column_frame(self, o: &PivotSequence) -> PivotSequence {
        let e = BlockPermutation::reversal(o.m());
        match self {
            SerialBase::Col => o.clone(),
            SerialBase::Row => o.relabel(&e),
            SerialBase::ColRev => o.reverse(),
            SerialBase::RowRev => o.reverse().relabel(&e),
        }
    }

    /// Inverse of [`SerialBase::to_column_frame`].
    pub fn from_column_frame(self, o: &PivotSequence) -> PivotSequence {
        let e = BlockPermutation::reversal(o.m());
        match self {
            SerialBase::Col => o.clone(),
            SerialBase::Row => o.relabel(&e),
            SerialBase::ColRev => o.reverse(),
            SerialBase::RowRev => o.relabel(&e).reverse(),
        }
    }

    /// `true` for the row families, whose bounds use the reversed partition.
    pub fn is_row(self) -> bool {
        matches!(self, SerialBase::Row | SerialBase::RowRev)
    }
}

/// Which of the two chain shapes witnessed membership.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChainShape {
    /// `O(q) w∼ O''`: relabel first, then the weak chain.
    PermThenWeak,
    /// `O w∼ O'` with `O'(q) = O''`: weak chain first, then relabel.
    WeakThenPerm,
}

/// Evidence that a sequence belongs to a generalized serial class.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassWitness {
    /// Serial family of `base`.
    pub base_kind: SerialBase,
    /// `true` when `base` is quasi-cyclic.
    pub quasi: bool,
    /// The serial sequence `O''` at the end of the chain.
    pub base: PivotSequence,
    /// The block relabeling `q`.
    pub permutation: BlockPermutation,
    /// Order of the relabeling and the weak chain.
    pub shape: ChainShape,
    /// Number of shift links `d` in the weak chain.
    pub shifts: usize,
}

impl ClassWitness {
    /// Witness for a member of a serial family itself.
    pub fn serial(base_kind: SerialBase, quasi: bool, base: PivotSequence) -> Self {
        let m = base.m();
        Self {
            base_kind,
            quasi,
            base,
            permutation: BlockPermutation::identity(m),
            shape: ChainShape::PermThenWeak,
            shifts: 0,
        }
    }

    /// Number of consecutive sweeps a bound built from this witness covers.
    pub fn sweeps_covered(&self) -> usize {
        self.shifts + 1
    }
}

/// A generated class member with the witness of its construction.
#[derive(Clone, Debug)]
pub struct ClassMember {
    pub sequence: PivotSequence,
    pub witness: ClassWitness,
}

/// Knobs for [`generate_member`].
#[derive(Clone, Copy, Debug)]
pub struct GenerateOptions {
    /// Shift count for `B_sg`-type classes; random in `0..=2` when `None`.
    pub shifts: Option<usize>,
    /// Number of random admissible transpositions applied per chain segment.
    pub transpositions: usize,
}

impl Default for GenerateOptions {
    fn default() -> Self {
        Self { shifts: None, transpositions: 8 }
    }
}

/// Samples a member of `kind` on `m` blocks.
pub fn generate_class<R: Rng + ?Sized>(kind: ClassKind, m: usize, rng: &mut R) -> Result<PivotSequence, OrderingError> {
    generate_member(kind, m, GenerateOptions::default(), rng).map(|c| c.sequence)
}

/// Samples a member of `kind` on `m` blocks together with its witness.
pub fn generate_member<R: Rng + ?Sized>(
    kind: ClassKind,
    m: usize,
    opts: GenerateOptions,
    rng: &mut R,
) -> Result<ClassMember, OrderingError> {
    if m < 2 {
        return Err(OrderingError::TooFewBlocks(m));
    }
    let quasi = kind.is_quasi();
    let bases = kind.serial_bases();
    let base_kind = bases[rng.random_range(0..bases.len())];
    let column = if quasi { sample_bar_column(m, rng) } else { sample_column(m, rng) };
    let base = base_kind.from_column_frame(&column);
    let witness = ClassWitness::serial(base_kind, quasi, base.clone());
    match kind {
        ClassKind::Bspg | ClassKind::BarBspg => Ok(permuted_member(witness, 0, opts.transpositions, rng)),
        ClassKind::Bsg | ClassKind::BarBsg => {
            let d = opts.shifts.unwrap_or_else(|| rng.random_range(0..=2));
            Ok(permuted_member(witness, d, opts.transpositions, rng))
        }
        _ => Ok(ClassMember { sequence: base, witness }),
    }
}

fn sample_column<R: Rng + ?Sized>(m: usize, rng: &mut R) -> PivotSequence {
    let mut pairs = vec![(1, 2)];
    for j in 3..=m {
        let mut tau: Vec<usize> = (1..j).collect();
        tau.shuffle(rng);
        pairs.extend(tau.into_iter().map(|i| (i, j)));
    }
    PivotSequence::from_valid(m, pairs)
}

fn sample_bar_column<R: Rng + ?Sized>(m: usize, rng: &mut R) -> PivotSequence {
    let big_m = m * (m - 1) / 2;
    let mut extra = vec![0usize; m + 1];
    if m >= 3 {
        let total = rng.random_range(0..big_m);
        for _ in 0..total {
            extra[rng.random_range(3..=m)] += 1;
        }
    }
    let mut pairs = vec![(1, 2)];
    for j in 3..=m {
        let mut tau: Vec<usize> = (1..j).collect();
        tau.shuffle(rng);
        pairs.extend(tau.into_iter().map(|i| (i, j)));
        let letters_in_pj = j * (j - 1) / 2;
        for _ in 0..extra[j] {
            pairs.push(pair_of_letter(rng.random_range(0..letters_in_pj)));
        }
    }
    PivotSequence::from_valid(m, pairs)
}

fn random_transpositions<R: Rng + ?Sized>(o: &PivotSequence, count: usize, rng: &mut R) -> PivotSequence {
    let mut cur = o.clone();
    for _ in 0..count {
        let spots = cur.admissible_positions();
        if spots.is_empty() {
            break;
        }
        let r = spots[rng.random_range(0..spots.len())];
        cur = admissible_transposition(&cur, r).expect("position is admissible");
    }
    cur
}

/// Builds `O'` from `O''` by a chain with `d` shifts, then returns `O = O'(q⁻¹)`.
fn permuted_member<R: Rng + ?Sized>(
    witness: ClassWitness,
    d: usize,
    transpositions: usize,
    rng: &mut R,
) -> ClassMember {
    let m = witness.base.m();
    let mut cur = random_transpositions(&witness.base, transpositions, rng);
    for _ in 0..d {
        let r = rng.random_range(1..cur.len().max(2));
        cur = cur.rotate(r);
        cur = random_transpositions(&cur, transpositions, rng);
    }
    let mut images: Vec<usize> = (1..=m).collect();
    images.shuffle(rng);
    let q = BlockPermutation::new(images).expect("shuffle of 1..=m");
    let sequence = cur.relabel(&q.inverse());
    ClassMember {
        sequence,
        witness: ClassWitness { permutation: q, shape: ChainShape::PermThenWeak, shifts: d, ..witness },
    }
}

/// Structural test for `B_c`.
pub fn is_column_serial(o: &PivotSequence) -> bool {
    o.is_cyclic() && {
        let mut expected = Vec::new();
        for j in 2..=o.m() {
            expected.extend(std::iter::repeat_n(j, j - 1));
        }
        o.pairs().iter().map(|p| p.1).eq(expected)
    }
}

/// Grammar state while reading a quasi-cyclic column sequence.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum BarState {
    Start,
    Column { j: usize, seen: u64 },
    Segment { j: usize },
}

impl BarState {
    fn step(self, (i, j): (usize, usize), m: usize) -> Option<BarState> {
        match self {
            BarState::Start => ((i, j) == (1, 2)).then(|| Self::after_column(2, m)),
            BarState::Column { j: col, seen } => {
                if j != col || seen & (1 << i) != 0 {
                    return None;
                }
                let seen = seen | (1 << i);
                if seen.count_ones() as usize == col - 1 {
                    Some(BarState::Segment { j: col })
                } else {
                    Some(BarState::Column { j: col, seen })
                }
            }
            BarState::Segment { j: col } => {
                if j <= col && col >= 3 {
                    Some(self)
                } else if j == col + 1 {
                    BarState::Column { j: col + 1, seen: 0 }.step((i, j), m)
                } else {
                    None
                }
            }
        }
    }

    fn after_column(col: usize, m: usize) -> BarState {
        if col == 2 && m >= 3 {
            BarState::Column { j: 3, seen: 0 }
        } else {
            BarState::Segment { j: col }
        }
    }

    fn accepting(self, m: usize) -> bool {
        matches!(self, BarState::Segment { j } if j == m)
    }
}

/// Structural test for the quasi-cyclic column class: length below `2M` and
/// each column completed before its repeat segment.
pub fn is_bar_column_serial(o: &PivotSequence) -> bool {
    let m = o.m();
    if o.len() >= 2 * o.num_pairs() && m > 2 {
        return false;
    }
    if m == 2 {
        return o.pairs() == [(1, 2)];
    }
    let mut state = BarState::Start;
    for &p in o.pairs() {
        match state.step(p, m) {
            Some(s) => state = s,
            None => return false,
        }
    }
    state.accepting(m)
}

fn serial_member(o: &PivotSequence, quasi: bool) -> bool {
    if quasi {
        is_bar_column_serial(o)
    } else {
        is_column_serial(o)
    }
}

/// Searches the `∼`-class of `o` for a member of the (quasi-)column class.
fn column_member_in_class(dep: &Dependence, o: &PivotSequence, quasi: bool) -> Option<PivotSequence> {
    if !o.is_covering() {
        return None;
    }
    let m = o.m();
    if !quasi {
        if o.len() != o.num_pairs() {
            return None;
        }
        // A column-sorted linear extension exists iff no dependent pair runs
        // against the column order; the stable sort by column is then one.
        let pairs = o.pairs();
        for a in 0..pairs.len() {
            for b in a + 1..pairs.len() {
                if pairs[a].1 > pairs[b].1 && !super::sequence::independent(pairs[a], pairs[b]) {
                    return None;
                }
            }
        }
        let mut sorted = pairs.to_vec();
        sorted.sort_by_key(|p| p.1);
        return Some(PivotSequence::from_valid(m, sorted));
    }
    if o.len() >= 2 * o.num_pairs() && m > 2 {
        return None;
    }
    let word = o.letters();
    let pred = dep.predecessor_masks(&word);
    let full = if word.len() == 64 { u64::MAX } else { (1u64 << word.len()) - 1 };
    let mut dead: HashSet<(u64, BarState)> = HashSet::new();
    let mut out = Vec::with_capacity(word.len());
    fn dfs(
        placed: u64,
        state: BarState,
        ctx: (&[usize], &[u64], u64, usize),
        dead: &mut HashSet<(u64, BarState)>,
        out: &mut Vec<usize>,
    ) -> bool {
        let (word, pred, full, m) = ctx;
        if placed == full {
            return state.accepting(m);
        }
        if dead.contains(&(placed, state)) {
            return false;
        }
        for k in 0..word.len() {
            if placed & (1 << k) != 0 || pred[k] & !placed != 0 {
                continue;
            }
            if let Some(next) = state.step(pair_of_letter(word[k]), m) {
                out.push(word[k]);
                if dfs(placed | (1 << k), next, ctx, dead, out) {
                    return true;
                }
                out.pop();
            }
        }
        dead.insert((placed, state));
        false
    }
    if m == 2 {
        return (o.pairs() == [(1, 2)]).then(|| o.clone());
    }
    dfs(0, BarState::Start, (&word, &pred, full, m), &mut dead, &mut out).then(|| PivotSequence::from_letters(m, &out))
}

/// Looks for `q` and a serial `O''` with `o(q) ∼ O''`.
fn permuted_serial_witness(
    dep: &Dependence,
    o: &PivotSequence,
    bases: &[SerialBase],
    quasi: bool,
    perms: &[BlockPermutation],
) -> Option<ClassWitness> {
    for q in perms {
        let x = o.relabel(q);
        for &base_kind in bases {
            let framed = base_kind.to_column_frame(&x);
            if let Some(col) = column_member_in_class(dep, &framed, quasi) {
                let base = base_kind.from_column_frame(&col);
                return Some(ClassWitness {
                    base_kind,
                    quasi,
                    base,
                    permutation: q.clone(),
                    shape: ChainShape::PermThenWeak,
                    shifts: 0,
                });
            }
        }
    }
    None
}

/// Decides membership, returning a witness when `o` belongs to `kind`.
///
/// Structural classes are decided for any `m`. The permuted classes search
/// all `m!` relabelings (and, for `B_sg`, all shift-reachable `∼`-classes)
/// and are limited to `m ≤ 6`.
pub fn recognize_with_witness(kind: ClassKind, o: &PivotSequence) -> Result<Option<ClassWitness>, OrderingError> {
    let quasi = kind.is_quasi();
    if kind.needs_search() && o.m() > MAX_SEARCH_BLOCKS {
        return Err(OrderingError::UnsupportedSize { m: o.m(), max: MAX_SEARCH_BLOCKS });
    }
    if !o.is_covering() || (!quasi && !o.is_cyclic()) {
        return Ok(None);
    }
    let bases = kind.serial_bases();
    match kind {
        ClassKind::Bspg | ClassKind::BarBspg => {
            let dep = Dependence::new(o.m());
            let perms = BlockPermutation::all(o.m());
            Ok(permuted_serial_witness(&dep, o, bases, quasi, &perms))
        }
        ClassKind::Bsg | ClassKind::BarBsg => {
            let dep = Dependence::new(o.m());
            let perms = BlockPermutation::all(o.m());
            let mut hit: Option<ClassWitness> = None;
            let (_search, _) = ShiftSearch::run(o, |key, depth| {
                let rep = PivotSequence::from_letters(o.m(), key);
                if let Some(w) = permuted_serial_witness(&dep, &rep, bases, quasi, &perms) {
                    hit = Some(ClassWitness { shifts: depth, ..w });
                    true
                } else {
                    false
                }
            })?;
            Ok(hit)
        }
        _ => {
            for &base_kind in bases {
                if serial_member(&base_kind.to_column_frame(o), quasi) {
                    return Ok(Some(ClassWitness::serial(base_kind, quasi, o.clone())));
                }
            }
            Ok(None)
        }
    }
}

/// Decides membership of `o` in `kind`.
pub fn recognize_class(kind: ClassKind, o: &PivotSequence) -> Result<bool, OrderingError> {
    recognize_with_witness(kind, o).map(|w| w.is_some())
}

/// Checks the parts of a witness that do not need a search: the base is a
/// serial member of the stated family and, for `d = 0`, the relabeled
/// sequence is `∼`-equivalent to it.
pub fn check_witness(o: &PivotSequence, w: &ClassWitness) -> bool {
    if w.permutation.m() != o.m() || w.base.m() != o.m() {
        return false;
    }
    if !serial_member(&w.base_kind.to_column_frame(&w.base), w.quasi) {
        return false;
    }
    if w.shifts > 0 {
        return true;
    }
    match w.shape {
        ChainShape::PermThenWeak => are_equivalent(&o.relabel(&w.permutation), &w.base),
        ChainShape::WeakThenPerm => are_equivalent(o, &w.base.relabel(&w.permutation.inverse())),
    }
}

/// All members of `B_c` on `m` blocks (`2!·3!⋯(m−1)!` sequences).
pub fn enumerate_column_class(m: usize) -> Vec<PivotSequence> {
    let mut acc: Vec<Vec<(usize, usize)>> = vec![vec![(1, 2)]];
    for j in 3..=m {
        let perms = BlockPermutation::all(j - 1);
        let mut next = Vec::with_capacity(acc.len() * perms.len());
        for prefix in &acc {
            for p in &perms {
                let mut v = prefix.clone();
                v.extend(p.images().iter().map(|&i| (i, j)));
                next.push(v);
            }
        }
        acc = next;
    }
    acc.into_iter().map(|pairs| PivotSequence::from_valid(m, pairs)).collect()
}

/// All cyclic orderings on `m` blocks (`M!` sequences; practical for `m ≤ 4`).
pub fn enumerate_cyclic(m: usize) -> Vec<PivotSequence> {
    let mut letters: Vec<usize> = (0..m * (m - 1) / 2).collect();
    let mut out = vec![PivotSequence::from_letters(m, &letters)];
    while super::permutation::next_permutation(&mut letters) {
        out.push(PivotSequence::from_letters(m, &letters));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn column_class_for_three_blocks() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let o = generate_class(ClassKind::Bc, 3, &mut rng).unwrap();
            assert!(o.pairs() == [(1, 2), (1, 3), (2, 3)] || o.pairs() == [(1, 2), (2, 3), (1, 3)]);
        }
        assert_eq!(enumerate_column_class(4).len(), 12);
    }

    #[test]
    fn row_ordering_is_in_reverse_row_class() {
        let row = PivotSequence::row(5);
        assert!(recognize_class(ClassKind::BrRev, &row).unwrap());
        assert!(recognize_class(ClassKind::Br, &row.reverse()).unwrap());
        assert!(recognize_class(ClassKind::Brp, &row).unwrap());
        assert!(!recognize_class(ClassKind::Br, &row).unwrap());
        assert!(recognize_class(ClassKind::Bc, &PivotSequence::column(5)).unwrap());
        assert!(!recognize_class(ClassKind::Bc, &PivotSequence::row(4)).unwrap());
    }

    #[test]
    fn class_names_round_trip() {
        for k in ClassKind::ALL {
            assert_eq!(k.name().parse::<ClassKind>().unwrap(), k);
        }
        assert!("B_x".parse::<ClassKind>().is_err());
    }

    #[test]
    fn bar_grammar_accepts_repeats_after_each_column() {
        let o = PivotSequence::new(4, vec![(1, 2), (2, 3), (1, 3), (1, 2), (3, 4), (1, 4), (2, 4), (1, 3), (2, 4)])
            .unwrap();
        assert!(is_bar_column_serial(&o));
        let early = PivotSequence::new(3, vec![(1, 2), (1, 2), (1, 3), (2, 3)]).unwrap();
        assert!(!is_bar_column_serial(&early));
    }

    #[test]
    fn search_kinds_reject_large_m() {
        let o = PivotSequence::row(7);
        assert!(matches!(recognize_class(ClassKind::Bsg, &o), Err(OrderingError::UnsupportedSize { .. })));
        assert!(recognize_class(ClassKind::BrRev, &o).unwrap());
    }
}
