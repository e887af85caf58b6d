#![allow(clippy::needless_range_loop)]

use std::collections::{HashSet, VecDeque};

use bjlab_core::orderings::{
    admissible_transposition, are_equivalent, are_shift_equivalent, are_weak_equivalent, check_witness,
    enumerate_cyclic, generate_member, is_bar_column_serial, is_column_serial, ordering_matrix, recognize_class,
    recognize_with_witness, weak_class_representatives, GenerateOptions, OrderingMatrix,
};
use bjlab_core::{BlockPermutation, ClassKind, PivotSequence};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn seq(m: usize, pairs: &[(usize, usize)]) -> PivotSequence {
    PivotSequence::new(m, pairs.to_vec()).unwrap()
}

/// Reads an ordering from one triangle of a displayed `M_O`: the pair at step
/// `k` is the position of the entry `k`.
fn from_triangle(rows: &[[i64; 6]], upper: bool) -> PivotSequence {
    let m = rows.len();
    let mut cells = Vec::new();
    for r in 0..m {
        for s in r + 1..m {
            let v = if upper { rows[r][s] } else { rows[s][r] };
            cells.push((v, (r + 1, s + 1)));
        }
    }
    cells.sort();
    assert!(cells.iter().enumerate().all(|(k, &(v, _))| v == k as i64), "entries are not 0..M");
    PivotSequence::new(m, cells.into_iter().map(|(_, p)| p).collect()).unwrap()
}

fn matrix(rows: &[&[i64]]) -> OrderingMatrix {
    OrderingMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
}

/// All sequences reachable from `o` by admissible transpositions and cyclic shifts.
fn weak_component(o: &PivotSequence) -> HashSet<Vec<(usize, usize)>> {
    let mut seen = HashSet::from([o.pairs().to_vec()]);
    let mut queue = VecDeque::from([o.clone()]);
    while let Some(cur) = queue.pop_front() {
        let mut next: Vec<PivotSequence> =
            cur.admissible_positions().into_iter().map(|r| admissible_transposition(&cur, r).unwrap()).collect();
        next.push(cur.rotate(1));
        for n in next {
            if seen.insert(n.pairs().to_vec()) {
                queue.push_back(n);
            }
        }
    }
    seen
}

/// All sequences reachable from `o` by admissible transpositions only.
fn swap_component(o: &PivotSequence) -> HashSet<Vec<(usize, usize)>> {
    let mut seen = HashSet::from([o.pairs().to_vec()]);
    let mut queue = VecDeque::from([o.clone()]);
    while let Some(cur) = queue.pop_front() {
        for r in cur.admissible_positions() {
            let n = admissible_transposition(&cur, r).unwrap();
            if seen.insert(n.pairs().to_vec()) {
                queue.push_back(n);
            }
        }
    }
    seen
}

const BC6: [[i64; 6]; 6] = [
    [-1, 0, 2, 4, 9, 12],
    [0, -1, 1, 5, 8, 10],
    [2, 1, -1, 3, 7, 13],
    [4, 5, 3, -1, 6, 11],
    [9, 8, 7, 6, -1, 14],
    [12, 10, 13, 11, 14, -1],
];
const BC6_TILDE: [[i64; 6]; 6] = [
    [-1, 7, 9, 0, 2, 5],
    [7, -1, 10, 13, 14, 6],
    [9, 10, -1, 11, 12, 8],
    [0, 13, 11, -1, 1, 4],
    [2, 14, 12, 1, -1, 3],
    [5, 6, 8, 4, 3, -1],
];
const BR6: [[i64; 6]; 6] = [
    [-1, 11, 13, 12, 10, 14],
    [10, -1, 9, 7, 6, 8],
    [11, 9, -1, 5, 3, 4],
    [12, 6, 5, -1, 1, 2],
    [13, 7, 3, 1, -1, 0],
    [14, 8, 4, 2, 0, -1],
];
const BR6_TILDE: [[i64; 6]; 6] = [
    [-1, 14, 1, 0, 11, 2],
    [14, -1, 13, 10, 7, 12],
    [1, 13, -1, 9, 6, 8],
    [0, 10, 9, -1, 4, 5],
    [11, 7, 6, 4, -1, 3],
    [2, 12, 8, 5, 3, -1],
];
const BC6_REV: [[i64; 6]; 6] = [
    [-1, 14, 12, 10, 5, 2],
    [14, -1, 13, 9, 6, 4],
    [12, 13, -1, 11, 7, 1],
    [10, 9, 11, -1, 8, 3],
    [5, 6, 7, 8, -1, 0],
    [2, 4, 1, 3, 0, -1],
];
const BR6_REV: [[i64; 6]; 6] = [
    [-1, 4, 3, 2, 1, 0],
    [4, -1, 5, 8, 7, 6],
    [3, 5, -1, 9, 11, 10],
    [2, 8, 9, -1, 13, 12],
    [1, 7, 11, 13, -1, 14],
    [0, 6, 10, 12, 14, -1],
];

#[test]
fn reversed_row_and_column_matrices_at_five_blocks() {
    let row_rev =
        matrix(&[&[-1, 9, 8, 7, 6], &[9, -1, 5, 4, 3], &[8, 5, -1, 2, 1], &[7, 4, 2, -1, 0], &[6, 3, 1, 0, -1]]);
    let col_rev =
        matrix(&[&[-1, 9, 8, 6, 3], &[9, -1, 7, 5, 2], &[8, 7, -1, 4, 1], &[6, 5, 4, -1, 0], &[3, 2, 1, 0, -1]]);
    assert_eq!(ordering_matrix(&PivotSequence::row(5).reverse()).unwrap(), row_rev);
    assert_eq!(ordering_matrix(&PivotSequence::column(5).reverse()).unwrap(), col_rev);
    assert_eq!(PivotSequence::from_ordering_matrix(&col_rev).unwrap(), PivotSequence::column(5).reverse());
}

#[test]
fn relabeling_matches_conjugated_ordering_matrix() {
    let o = seq(4, &[(1, 2), (2, 3), (2, 4), (3, 4), (1, 3), (1, 4)]);
    let q = BlockPermutation::new(vec![2, 4, 3, 1]).unwrap();
    let expected = seq(4, &[(2, 4), (3, 4), (1, 4), (1, 3), (2, 3), (1, 2)]);
    assert_eq!(o.relabel(&q), expected);
    let m = matrix(&[&[-1, 5, 3, 2], &[5, -1, 4, 0], &[3, 4, -1, 1], &[2, 0, 1, -1]]);
    assert_eq!(ordering_matrix(&o).unwrap().permuted(&q), m);
    assert_eq!(ordering_matrix(&expected).unwrap(), m);
}

#[test]
fn displayed_six_block_serial_orderings() {
    let bc = from_triangle(&BC6, true);
    assert!(is_column_serial(&bc));
    assert!(recognize_class(ClassKind::Bc, &bc).unwrap());
    assert!(recognize_class(ClassKind::BcRev, &from_triangle(&BC6_REV, true)).unwrap());
    assert!(recognize_class(ClassKind::BrRev, &from_triangle(&BR6_REV, true)).unwrap());
}

#[test]
fn both_triangles_of_the_asymmetric_row_display_are_row_serial() {
    let upper = from_triangle(&BR6, true);
    let lower = from_triangle(&BR6, false);
    assert_ne!(upper, lower);
    assert!(recognize_class(ClassKind::Br, &upper).unwrap());
    assert!(recognize_class(ClassKind::Br, &lower).unwrap());
}

#[test]
fn displayed_tilde_orderings_are_generalized_serial() {
    for tilde in [&BC6_TILDE, &BR6_TILDE] {
        let t = from_triangle(tilde, true);
        let w = recognize_with_witness(ClassKind::Bsg, &t).unwrap().expect("member of B_sg");
        assert_eq!(w.shifts, 1);
        assert!(check_witness(&t, &w));
        assert!(!recognize_class(ClassKind::Bspg, &t).unwrap());
    }
}

#[test]
fn row_tilde_display_is_one_shift_from_the_upper_reading() {
    let t = from_triangle(&BR6_TILDE, true);
    let upper = from_triangle(&BR6, true);
    let component = weak_component(&upper);
    assert_eq!(component.len(), 555);
    assert!(component.contains(t.pairs()));
    let chain = are_weak_equivalent(&upper, &t).unwrap().expect("weak equivalent");
    assert_eq!(chain.shifts(), 1);
    assert!(chain.is_valid());
    assert!(are_weak_equivalent(&from_triangle(&BR6, false), &t).unwrap().is_none());
}

#[test]
fn column_tilde_display_is_not_weak_equivalent_to_its_base() {
    let o = from_triangle(&BC6, true);
    let t = from_triangle(&BC6_TILDE, true);
    let component = weak_component(&o);
    assert_eq!(component.len(), 585);
    assert!(!component.contains(t.pairs()));
    assert!(BlockPermutation::all(6).iter().all(|q| !component.contains(t.relabel(q).pairs())));
    assert!(are_weak_equivalent(&o, &t).unwrap().is_none());
}

#[test]
fn weak_component_of_the_row_ordering_at_four_blocks() {
    let component = weak_component(&PivotSequence::row(4));
    assert_eq!(component.len(), 24);
    let classes: HashSet<Vec<(usize, usize)>> =
        component.iter().map(|p| bjlab_core::orderings::canonical_form(&seq(4, p)).pairs().to_vec()).collect();
    let reps = weak_class_representatives(&PivotSequence::row(4)).unwrap();
    assert_eq!(reps.len(), classes.len());
    assert!(reps.iter().all(|r| classes.contains(r.pairs())));
}

#[test]
fn generalized_serial_coverage_at_four_blocks() {
    let all = enumerate_cyclic(4);
    assert_eq!(all.len(), 720);
    let sg = all.iter().filter(|o| recognize_class(ClassKind::Bsg, o).unwrap()).count();
    let spg = all.iter().filter(|o| recognize_class(ClassKind::Bspg, o).unwrap()).count();
    assert_eq!(sg, 624);
    assert_eq!(spg, 288);

    let mut reachable = HashSet::new();
    for base in all.iter().filter(|o| {
        [ClassKind::Bc, ClassKind::Br, ClassKind::BcRev, ClassKind::BrRev]
            .iter()
            .any(|&k| recognize_class(k, o).unwrap())
    }) {
        for q in BlockPermutation::all(4) {
            reachable.extend(weak_component(&base.relabel(&q)));
        }
    }
    assert_eq!(reachable.len(), 624);
}

#[test]
fn row_ordering_membership_follows_definitions() {
    let row = PivotSequence::row(5);
    assert!(recognize_class(ClassKind::BrRev, &row).unwrap());
    assert!(recognize_class(ClassKind::Brp, &row).unwrap());
    assert!(!recognize_class(ClassKind::Br, &row).unwrap());
    assert!(recognize_class(ClassKind::Br, &row.reverse()).unwrap());
    assert!(recognize_class(ClassKind::Bc, &PivotSequence::column(5)).unwrap());
}

#[test]
fn admissible_positions_match_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for kind in [ClassKind::Bsg, ClassKind::BarBc, ClassKind::Bcp] {
        let o = generate_member(kind, 5, GenerateOptions::default(), &mut rng).unwrap().sequence;
        let brute: Vec<usize> = (0..o.len() - 1)
            .filter(|&r| {
                let ((a, b), (c, d)) = (o.pairs()[r], o.pairs()[r + 1]);
                a != c && a != d && b != c && b != d
            })
            .collect();
        assert_eq!(o.admissible_positions(), brute);
    }
    let row = PivotSequence::row(4);
    assert!(admissible_transposition(&row, 0).is_err());
}

#[test]
fn quasi_cyclic_column_member_structure() {
    let o = seq(4, &[(1, 2), (1, 3), (2, 3), (1, 3), (1, 4), (2, 4), (3, 4), (2, 4), (1, 2)]);
    assert_eq!(o.len(), 9);
    assert!(o.is_quasi_cyclic());
    assert!(!o.is_cyclic());
    assert!(is_bar_column_serial(&o));
    assert!(recognize_class(ClassKind::BarBc, &o).unwrap());
    assert!(!recognize_class(ClassKind::Bc, &o).unwrap());
    let missing = seq(4, &[(1, 2), (1, 3), (2, 3), (1, 4), (2, 4), (2, 4)]);
    assert!(!missing.is_covering());
    assert!(!is_bar_column_serial(&missing));
}

#[test]
fn parse_and_display_round_trip() {
    let o: PivotSequence = "pairs:(1,2),(3,4),(1,3),(2,4),(1,4),(2,3)".parse().unwrap();
    assert!(o.is_cyclic());
    assert_eq!(o.to_string().parse::<PivotSequence>().unwrap(), o);
    assert!("pairs:(1,1)".parse::<PivotSequence>().is_err());
    let shown = ordering_matrix(&PivotSequence::row(3)).unwrap().to_string();
    assert_eq!(shown, "* 0 1\n0 * 2\n1 2 *\n");
}

#[test]
fn search_rejects_seven_blocks() {
    let o = PivotSequence::row(7);
    assert!(recognize_class(ClassKind::Bsg, &o).is_err());
    assert!(recognize_class(ClassKind::Bc, &PivotSequence::column(7)).unwrap());
}

fn cyclic_and_seed() -> impl Strategy<Value = (usize, u64)> {
    (0usize..720, 0u64..1000)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn shift_is_recovered((idx, _seed) in cyclic_and_seed(), r in 0usize..6) {
        let o = enumerate_cyclic(4)[idx].clone();
        let shifted = o.rotate(r);
        prop_assert_eq!(are_shift_equivalent(&o, &shifted), Some(r));
    }

    #[test]
    fn equivalence_criterion_matches_swap_search((idx, seed) in cyclic_and_seed()) {
        let all = enumerate_cyclic(4);
        let o = &all[idx];
        let other = &all[(seed as usize * 7 + idx) % 720];
        let component = swap_component(o);
        prop_assert_eq!(are_equivalent(o, other), component.contains(other.pairs()));
        for p in component.iter().take(5) {
            prop_assert!(are_equivalent(o, &seq(4, p)));
        }
    }

    #[test]
    fn generated_members_carry_valid_witnesses(seed in 0u64..500, m in 3usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for kind in ClassKind::ALL {
            let member = generate_member(kind, m, GenerateOptions::default(), &mut rng).unwrap();
            prop_assert!(check_witness(&member.sequence, &member.witness), "{kind}");
            prop_assert!(recognize_class(kind, &member.sequence).unwrap(), "{kind}");
        }
    }
}
