use std::collections::BTreeSet;

use proptest::prelude::*;
use toral_core::algebra::LiePosetAlgebra;
use toral_core::poset::close_transitively;
use toral_core::Poset;

/// Random poset on up to `max` elements: pairs `i < j` drawn independently.
fn poset(max: usize) -> impl Strategy<Value = Poset> {
    (2..=max).prop_flat_map(|n| {
        let slots = n * (n - 1) / 2;
        proptest::collection::vec(any::<bool>(), slots).prop_map(move |bits| {
            let mut pairs = Vec::new();
            let mut k = 0;
            for j in 0..n {
                for i in 0..j {
                    if bits[k] {
                        pairs.push((i, j));
                    }
                    k += 1;
                }
            }
            Poset::from_indices(n, &pairs).unwrap()
        })
    })
}

fn poset_and_perm(max: usize) -> impl Strategy<Value = (Poset, Vec<usize>)> {
    poset(max).prop_flat_map(|p| {
        let n = p.len();
        (Just(p), Just((0..n).collect::<Vec<_>>()).prop_shuffle())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn closure_is_idempotent(p in poset(7)) {
        let rel: BTreeSet<(usize, usize)> = p.relations().iter().copied().collect();
        prop_assert_eq!(close_transitively(&rel).unwrap(), rel);
    }

    #[test]
    fn ideals_are_complements_of_filters(p in poset(6), mask in 0u32..64) {
        let n = p.len();
        let set: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        let rest: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 0).collect();
        prop_assert_eq!(p.is_ideal(&set), p.is_filter(&rest));
        prop_assert_eq!(p.is_ideal(&set), p.dual().is_filter(&set));
    }

    #[test]
    fn canonical_form_is_a_relabeling_invariant((p, perm) in poset_and_perm(7)) {
        let q = p.permuted(&perm);
        prop_assert_eq!(p.canonical_form().unwrap(), q.canonical_form().unwrap());
        let back = p.canonical_form().unwrap().to_poset().unwrap();
        prop_assert_eq!(back.canonical_form().unwrap(), p.canonical_form().unwrap());
    }

    #[test]
    fn bracket_is_antisymmetric(p in poset(5)) {
        let g = LiePosetAlgebra::build(&p).unwrap();
        for i in 0..g.dim() {
            for j in 0..g.dim() {
                let (x, y) = (g.basis_element(i), g.basis_element(j));
                prop_assert!(x.bracket(&y).add(&y.bracket(&x)).is_zero());
            }
        }
    }

    #[test]
    fn index_has_the_parity_of_the_dimension(p in poset(6), seed in any::<u64>()) {
        let g = LiePosetAlgebra::build(&p).unwrap();
        let index = g.index(2, seed);
        prop_assert_eq!((g.dim() - index) % 2, 0);
        prop_assert!(index <= g.dim());
    }

    #[test]
    fn ad_is_triangular_in_the_basis(p in poset(5), seed in any::<u64>()) {
        use rand::SeedableRng;
        let g = LiePosetAlgebra::build(&p).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let f = g.random_functional(&mut rng);
        let coords = g.functional_values(&f);
        let x = g.element_from_coordinates(&coords);
        let ad = toral_core::spectral::ad_matrix(&g, &x);
        for (i, row) in ad.iter().enumerate() {
            for v in &row[..i] {
                prop_assert!(num_traits::Zero::is_zero(v));
            }
        }
    }
}
