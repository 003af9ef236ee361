use foxcolor::linalg::{
    abs_det, bareiss_abs_det, gcd, is_prime, minor_abs_det, rref_mod_p, smith_normal_form, solve_homogeneous_mod_n,
    IntMatrix,
};
use proptest::prelude::*;

fn matrix(max_rows: usize, max_cols: usize, bound: i64) -> impl Strategy<Value = IntMatrix> {
    (1..=max_rows, 1..=max_cols).prop_flat_map(move |(r, c)| {
        prop::collection::vec(prop::collection::vec(-bound..=bound, c), r).prop_map(|rows| IntMatrix::from_rows(&rows))
    })
}

/// Number of `x in (Z/n)^cols` with `m x = 0`, by trying all of them.
fn brute_count(m: &IntMatrix, n: u64) -> u128 {
    let cols = m.cols();
    let total = (n as usize).pow(cols as u32);
    let mut count = 0;
    let mut x = vec![0u64; cols];
    for idx in 0..total {
        let mut k = idx;
        for v in x.iter_mut() {
            *v = (k % n as usize) as u64;
            k /= n as usize;
        }
        if m.apply_mod(&x, n).iter().all(|&v| v == 0) {
            count += 1;
        }
    }
    count
}

proptest! {
    #[test]
    fn smith_form_reconstructs(m in matrix(4, 4, 4)) {
        let s = smith_normal_form(&m);
        prop_assert_eq!(s.left.mul(&m).mul(&s.right), s.diagonal());
        prop_assert_eq!(abs_det(&s.left).unwrap(), 1);
        prop_assert_eq!(abs_det(&s.right).unwrap(), 1);
        let nonzero: Vec<i128> = s.invariant_factors.iter().copied().filter(|&d| d != 0).collect();
        prop_assert_eq!(nonzero.len(), s.rank);
        for w in nonzero.windows(2) {
            prop_assert_eq!(w[1] % w[0], 0, "invariant factors divide each other");
        }
    }

    #[test]
    fn solution_count_matches_brute_force(m in matrix(3, 3, 3), n in 1u64..=6) {
        let s = smith_normal_form(&m);
        let expected = brute_count(&m, n);
        prop_assert_eq!(s.solution_count(n).unwrap(), expected);
        let (count, sols) = solve_homogeneous_mod_n(&m, n, 1_000).unwrap();
        prop_assert_eq!(count, expected);
        let mut all: Vec<Vec<u64>> = sols.collect();
        prop_assert_eq!(all.len() as u128, expected);
        for x in &all {
            prop_assert!(m.apply_mod(x, n).iter().all(|&v| v == 0));
        }
        all.sort();
        all.dedup();
        prop_assert_eq!(all.len() as u128, expected, "no solution repeats");
    }

    #[test]
    fn rref_nullity_agrees_with_smith(m in matrix(5, 5, 5), p in prop::sample::select(vec![2u64, 3, 5, 7, 11])) {
        let (rank, kernel) = rref_mod_p(&m, p).unwrap();
        prop_assert_eq!(kernel.len(), m.cols() - rank);
        for v in &kernel {
            prop_assert!(m.apply_mod(v, p).iter().all(|&x| x == 0));
        }
        let count = smith_normal_form(&m).solution_count(p).unwrap();
        prop_assert_eq!(count, (p as u128).pow(kernel.len() as u32));
    }

    #[test]
    fn modular_and_fraction_free_determinants_agree(m in (1usize..=6).prop_flat_map(|n| {
        prop::collection::vec(prop::collection::vec(-6i64..=6, n), n).prop_map(|r| IntMatrix::from_rows(&r))
    })) {
        prop_assert_eq!(abs_det(&m).unwrap(), bareiss_abs_det(&m).unwrap());
    }

    #[test]
    fn minors_of_square_matrices(m in (2usize..=5).prop_flat_map(|n| {
        prop::collection::vec(prop::collection::vec(-3i64..=3, n), n).prop_map(|r| IntMatrix::from_rows(&r))
    }), r in 0usize..5, c in 0usize..5) {
        let n = m.rows();
        let (r, c) = (r % n, c % n);
        prop_assert_eq!(minor_abs_det(&m, r, c).unwrap(), bareiss_abs_det(&m.minor(r, c)).unwrap());
    }
}

#[test]
fn rref_refuses_composite_moduli() {
    assert!(rref_mod_p(&IntMatrix::identity(2), 9).is_err());
    assert!(is_prime(13) && !is_prime(9) && gcd(12, 18) == 6);
}
