// SPDX-License-Identifier: Apache-2.0

use bandslice::layout::*;
use bandslice::linalg::BandedHermitian;
use bandslice::C64;
use nalgebra::DMatrix;
use proptest::prelude::*;

fn tagged(rows: usize, cols: usize) -> DMatrix<C64> {
    DMatrix::from_fn(rows, cols, |i, j| C64::new(i as f64 + 0.25, j as f64 - 0.5))
}

#[test]
fn single_rank_is_relabeling() {
    let a = tagged(7, 5);
    let x = Irregular1DLayout::from_matrix(&a, &[5]).unwrap();
    let g = ProcessGrid::new(1, 1).unwrap();
    let (l, rep) = redistribute_1d_to_2d(&x, g, 3, Execution::Sequential).unwrap();
    assert_eq!(l.gather(), a);
    assert_eq!(rep.total_messages(), 0);
    let (back, rep) = redistribute_2d_to_1d(&l, &[5], Execution::Sequential).unwrap();
    assert_eq!(back, x);
    assert_eq!(rep.total_bytes(), 0);
}

#[test]
fn three_by_one_slabs_hold_their_row_blocks() {
    let nb = 2;
    let a = tagged(6 * nb, 6 * nb);
    let x = Irregular1DLayout::from_matrix(&a, &[2 * nb, 2 * nb, 2 * nb]).unwrap();
    let g = ProcessGrid::new(3, 1).unwrap();
    let slabs = row_slabs(&x, g, nb).unwrap();
    for (r, slab) in slabs.iter().enumerate() {
        let want: Vec<usize> = (0..6 * nb).filter(|i| (i / nb) % 3 == r).collect();
        assert_eq!(slab.rows, want);
        assert_eq!(slab.cols, 0..6 * nb);
        for (li, &i) in slab.rows.iter().enumerate() {
            for j in 0..6 * nb {
                assert_eq!(slab.data[(li, j)], a[(i, j)]);
            }
        }
    }
}

#[test]
fn sparse_owners_on_a_long_grid() {
    let n = 40;
    let mut counts = vec![0; 64];
    for c in counts.iter_mut().take(20) {
        *c = 1;
    }
    let a = tagged(n, 20);
    let x = Irregular1DLayout::from_matrix(&a, &counts).unwrap();
    let g = ProcessGrid::new(64, 1).unwrap();
    let (l, _) = redistribute_1d_to_2d(&x, g, 4, Execution::Sequential).unwrap();
    assert_eq!(l, BlockCyclicLayout::distribute(&a, 4, 4, g).unwrap());
    let (back, _) = redistribute_2d_to_1d(&l, &counts, Execution::Sequential).unwrap();
    assert_eq!(back, x);
}

#[test]
fn balanced_counts_with_one_block() {
    let a = tagged(12, 12);
    let x = Irregular1DLayout::from_matrix(&a, &[3, 3, 3, 3]).unwrap();
    let g = ProcessGrid::new(2, 2).unwrap();
    let (l, _) = redistribute_1d_to_2d(&x, g, 12, Execution::Sequential).unwrap();
    assert_eq!(l.gather(), a);
    assert_eq!(l.tiles[0].shape(), (12, 12));
    let (back, _) = redistribute_2d_to_1d(&l, &[3, 3, 3, 3], Execution::Sequential).unwrap();
    assert_eq!(back, x);
}

#[test]
fn empty_matrix_moves_nothing() {
    let a = tagged(5, 0);
    let x = Irregular1DLayout::from_matrix(&a, &[0, 0, 0, 0]).unwrap();
    let g = ProcessGrid::new(2, 2).unwrap();
    let (l, rep) = redistribute_1d_to_2d(&x, g, 2, Execution::Sequential).unwrap();
    assert_eq!(rep.total_messages(), 0);
    assert_eq!(l.n_cols, 0);
}

#[test]
fn mismatched_counts_are_rejected() {
    let a = tagged(4, 4);
    assert!(Irregular1DLayout::from_matrix(&a, &[1, 1]).is_err());
    let x = Irregular1DLayout::from_matrix(&a, &[2, 2]).unwrap();
    assert!(redistribute_1d_to_2d(
        &x,
        ProcessGrid::new(2, 2).unwrap(),
        2,
        Execution::Sequential
    )
    .is_err());
    let l = BlockCyclicLayout::distribute(&a, 2, 2, ProcessGrid::new(1, 2).unwrap()).unwrap();
    assert!(redistribute_2d_to_1d(&l, &[1, 1], Execution::Sequential).is_err());
}

fn band_matrix(n: usize, bw: usize) -> BandedHermitian {
    let mut d = BandedHermitian::zeros(n, bw);
    for j in 0..n {
        for i in j..(j + bw + 1).min(n) {
            let im = if i == j { 0.0 } else { (i * 3 + j) as f64 };
            d.set(i, j, C64::new((i + 7 * j) as f64, im));
        }
    }
    d
}

#[test]
fn band_gather_on_two_by_two() {
    let d = band_matrix(16, 2);
    let g = ProcessGrid::new(2, 2).unwrap();
    let dist = BlockCyclicLayout::distribute(&d.to_dense(), 4, 4, g).unwrap();
    let (bands, rep) = gather_band_to_compact(&dist, 2, Execution::Sequential).unwrap();
    for b in &bands {
        assert_eq!(b, &d);
    }
    let band_bytes = d.storage().len() * ENTRY_BYTES;
    // two column groups, each sending within itself
    assert!(rep.phase(PHASE_COLUMNS).unwrap().bytes <= 2 * band_bytes);
    for p in &rep.phases {
        assert_eq!(p.bytes, p.received_bytes);
    }
}

#[test]
fn band_gather_single_rank() {
    let d = band_matrix(9, 3);
    let g = ProcessGrid::new(1, 1).unwrap();
    let dist = BlockCyclicLayout::distribute(&d.to_dense(), 4, 4, g).unwrap();
    let (bands, rep) = gather_band_to_compact(&dist, 3, Execution::Threaded).unwrap();
    assert_eq!(bands[0], d);
    assert_eq!(rep.total_messages(), 0);
}

fn config() -> impl Strategy<Value = (usize, usize, usize, usize, Vec<usize>)> {
    (
        1usize..=4,
        1usize..=4,
        prop::sample::select(vec![1usize, 4, 64]),
        1usize..40,
    )
        .prop_flat_map(|(p, q, nb, rows)| {
            let counts = prop::collection::vec(prop_oneof![Just(0usize), 0usize..12], p * q);
            (Just(p), Just(q), Just(nb), Just(rows), counts)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn forward_matches_oracle_and_round_trips((p, q, nb, rows, counts) in config()) {
        let total: usize = counts.iter().sum();
        let a = tagged(rows, total);
        let x = Irregular1DLayout::from_matrix(&a, &counts).unwrap();
        let g = ProcessGrid::new(p, q).unwrap();
        let (l, rep) = redistribute_1d_to_2d(&x, g, nb, Execution::Sequential).unwrap();
        let (oracle, _) = naive_redistribute(&x, g, nb).unwrap();
        prop_assert_eq!(&l, &oracle);
        let (threaded, rep_t) = redistribute_1d_to_2d(&x, g, nb, Execution::Threaded).unwrap();
        prop_assert_eq!(&threaded, &l);
        prop_assert_eq!(&rep_t, &rep);
        for ph in &rep.phases {
            prop_assert_eq!(ph.bytes, ph.received_bytes);
        }
        let (back, _) = redistribute_2d_to_1d(&l, &counts, Execution::Threaded).unwrap();
        prop_assert_eq!(back, x);
    }
}
