use std::collections::BTreeSet;

use foxcolor::coloring::{coloring_matrix, determinant, enumerate_nontrivial, solve_colorings, Coloring};
use foxcolor::diagram::{braid_closure, parse_diagram, BraidWord, Diagram};
use foxcolor::experiments::{brute_force_count, generator_suite};
use foxcolor::linalg::minor_abs_det;
use proptest::prelude::*;

/// Connected closures of random braid words.
fn closure() -> impl Strategy<Value = (BraidWord, Diagram)> {
    (2usize..=4)
        .prop_flat_map(|r| {
            let g = r as i32 - 1;
            (Just(r), prop::collection::vec((1..=g).prop_flat_map(|i| prop::sample::select(vec![i, -i])), 1..=8))
        })
        .prop_filter_map("idle strand or split closure", |(r, letters)| {
            let w = BraidWord::new(r, letters).ok()?;
            let d = braid_closure(&w).ok()?;
            d.is_connected().then_some((w, d))
        })
}

proptest! {
    #[test]
    fn closures_are_well_formed((w, d) in closure()) {
        prop_assert_eq!(d.num_crossings(), w.letters().len());
        prop_assert_eq!(d.num_arcs(), d.num_crossings());
        prop_assert_eq!(d.num_components(), w.closure_components());
        prop_assert_eq!(d.validate_embedding().unwrap(), d.num_crossings() + 2);
        let mut under = vec![0; d.num_arcs()];
        for x in d.crossings() {
            under[x.under_in] += 1;
            under[x.under_out] += 1;
        }
        prop_assert!(under.iter().all(|&u| u == 2));
    }

    #[test]
    fn text_round_trip((_, d) in closure()) {
        let back = parse_diagram(&d.to_text()).unwrap();
        prop_assert_eq!(back, d);
    }

    #[test]
    fn minor_does_not_depend_on_dropped_row_or_column((_, d) in closure()) {
        let m = coloring_matrix(&d);
        let n = d.num_crossings();
        let det = determinant(&d).unwrap();
        for r in 0..n {
            for c in 0..n {
                prop_assert_eq!(minor_abs_det(&m, r, c).unwrap(), det);
            }
        }
    }

    #[test]
    fn nontrivial_prime_colorings_iff_prime_divides_determinant(
        (_, d) in closure(),
        p in prop::sample::select(vec![2u64, 3, 5, 7, 11]),
    ) {
        let det = determinant(&d).unwrap();
        let space = solve_colorings(&d, p).unwrap();
        prop_assert_eq!(space.has_nontrivial(), det.is_multiple_of(p as u128));
    }

    #[test]
    fn solver_matches_brute_force((_, d) in closure(), n in 1u64..=7) {
        prop_assume!(d.num_arcs() <= 6);
        prop_assert_eq!(solve_colorings(&d, n).unwrap().total_count, brute_force_count(&d, n));
    }

    #[test]
    fn enumeration_is_complete_and_valid((_, d) in closure(), n in 2u64..=6) {
        let space = solve_colorings(&d, n).unwrap();
        prop_assume!(space.total_count <= 20_000);
        let all: Vec<Coloring> = space.colorings(20_000).unwrap().collect();
        prop_assert_eq!(all.len() as u128, space.total_count);
        let distinct: BTreeSet<Vec<u64>> = all.iter().map(|c| c.colors().to_vec()).collect();
        prop_assert_eq!(distinct.len(), all.len());
        for c in &all {
            prop_assert!(c.is_valid_on(&d));
        }
        let nontrivial = enumerate_nontrivial(&d, n, 20_000).unwrap().count() as u128;
        prop_assert_eq!(nontrivial, space.total_count - n as u128);
    }

    #[test]
    fn affine_images_and_json((_, d) in closure(), n in 3u64..=9, scale in 0u64..9, shift in 0u64..9) {
        let space = solve_colorings(&d, n).unwrap();
        prop_assume!(space.total_count <= 5_000);
        for c in space.colorings(5_000).unwrap().take(25) {
            prop_assert!(c.affine(scale, shift).is_valid_on(&d));
            prop_assert_eq!(Coloring::from_json(&c.to_json()).unwrap(), c);
        }
    }
}

#[test]
fn generator_suite_minors_are_consistent() {
    for g in generator_suite().iter().filter(|g| g.diagram.num_crossings() <= 8) {
        let m = coloring_matrix(&g.diagram);
        let det = determinant(&g.diagram).unwrap();
        let n = g.diagram.num_crossings();
        for r in 0..n {
            for c in 0..n {
                assert_eq!(minor_abs_det(&m, r, c).unwrap(), det, "{} dropping ({r}, {c})", g.name);
            }
        }
    }
}

#[test]
fn generator_suite_prime_colorability() {
    for g in generator_suite() {
        let det = determinant(&g.diagram).unwrap();
        for p in [2u64, 3, 5, 7] {
            let space = solve_colorings(&g.diagram, p).unwrap();
            assert_eq!(space.has_nontrivial(), det.is_multiple_of(p as u128), "{} mod {p}", g.name);
        }
    }
}
