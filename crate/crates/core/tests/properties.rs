use proptest::prelude::*;

use mixaudit_core::ciphersim::{random_sbox_set, SpnModCipher};
use mixaudit_core::classifier::{
    canonical_image_type, classify, fast_path, materialized_image_type, VerdictKind,
};
use mixaudit_core::gf::{is_mds, lift_gf_matrix, GfField, GfMatrix};
use mixaudit_core::gf2::{mat_vec_mul, BitMatrix, BitVector, BlockView};
use mixaudit_core::groupan::{coset_partition, partition_invariant_under, spnmod_primitivity};
use mixaudit_core::layers::{random_mds, rotation_layer};
use mixaudit_core::typesys::{
    boxplus, subgroup_elements, subgroup_type, translate_set, type_of_set, CanonicalSet, StateSet,
};

fn bit_matrix(rows: usize, cols: usize) -> impl Strategy<Value = BitMatrix> {
    prop::collection::vec(prop::collection::vec(any::<bool>(), cols), rows).prop_map(|rows| {
        BitMatrix::from_rows(rows.iter().map(|r| BitVector::from_bits(r)).collect()).unwrap()
    })
}

fn invertible(n: usize) -> impl Strategy<Value = BitMatrix> {
    bit_matrix(n, n).prop_filter("invertible", |m| m.is_invertible().unwrap())
}

fn field_matrix(m: u32, order: usize) -> impl Strategy<Value = GfMatrix> {
    let f = GfField::default_for(m).unwrap();
    prop::collection::vec(0..f.order(), order * order)
        .prop_map(move |e| GfMatrix::new(f, order, order, e).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn action_is_associative(
        v in prop::collection::vec(any::<bool>(), 7),
        a in bit_matrix(7, 5),
        b in bit_matrix(5, 9),
    ) {
        let v = BitVector::from_bits(&v);
        let left = mat_vec_mul(&mat_vec_mul(&v, &a).unwrap(), &b).unwrap();
        prop_assert_eq!(left, mat_vec_mul(&v, &a.mul(&b).unwrap()).unwrap());
    }

    #[test]
    fn rank_nullity(m in bit_matrix(9, 6)) {
        let kernel = m.kernel_basis();
        prop_assert_eq!(m.rank() + kernel.len(), 9);
        for k in kernel {
            prop_assert!(mat_vec_mul(&k, &m).unwrap().is_zero());
        }
    }

    #[test]
    fn permutation_matrices(perm in Just((0..12).collect::<Vec<usize>>()).prop_shuffle()) {
        let p = BitMatrix::from_permutation(&perm).unwrap();
        prop_assert!(p.is_invertible().unwrap());
        let t = p.transpose();
        for i in 0..12 {
            prop_assert_eq!(p.row(i).count_ones(), 1);
            prop_assert_eq!(t.row(i).count_ones(), 1);
        }
    }

    #[test]
    fn lift_is_multiplicative(m in 2u32..=4, seed in any::<u64>()) {
        let f = GfField::default_for(m).unwrap();
        let mut rng = seed;
        let mut next = || { rng = rng.wrapping_mul(6364136223846793005).wrapping_add(1); (rng >> 33) as u32 % f.order() };
        let a = GfMatrix::new(f, 2, 2, (0..4).map(|_| next()).collect()).unwrap();
        let b = GfMatrix::new(f, 2, 2, (0..4).map(|_| next()).collect()).unwrap();
        let la = lift_gf_matrix(&a).unwrap().into_matrix();
        let lb = lift_gf_matrix(&b).unwrap().into_matrix();
        let lab = lift_gf_matrix(&a.mul(&b).unwrap()).unwrap().into_matrix();
        prop_assert_eq!(la.mul(&lb).unwrap(), lab);
    }

    #[test]
    fn mds_blocks_are_nonzero(a in field_matrix(3, 3)) {
        if is_mds(&a).unwrap() {
            let view = lift_gf_matrix(&a).unwrap();
            prop_assert!(view.matrix().is_invertible().unwrap());
            for i in 1..=3 {
                for j in 1..=3 {
                    prop_assert!(!view.block(i, j).unwrap().is_zero());
                }
            }
        }
    }

    #[test]
    fn translation_keeps_subgroup_type(q in 0usize..=12, v in 0u64..1 << 12, m in prop::sample::select(vec![2usize, 3, 4])) {
        let delta = 12 / m;
        let s = subgroup_elements(q, 12).unwrap();
        let t = translate_set(&s, v).unwrap();
        prop_assert_eq!(type_of_set(&t, m, delta).unwrap(), type_of_set(&s, m, delta).unwrap());
        prop_assert!(s.as_slice().iter().all(|&x| t.contains(boxplus(x, v, 12))));
    }

    #[test]
    fn canonical_sets_have_canonical_types(
        n_w in 0usize..=3,
        ruled in prop::option::of(prop::collection::btree_set(0u64..8, 2..8)),
        whites in prop::collection::vec(0u64..8, 3),
    ) {
        let n_r = usize::from(ruled.is_some());
        prop_assume!(n_w + n_r <= 4);
        let set = CanonicalSet::new(
            3, 4, whites[..n_w.min(3)].to_vec(), ruled.map(|r| r.into_iter().collect()),
        ).unwrap();
        let ty = type_of_set(&mixaudit_core::typesys::materialize(&set).unwrap(), 3, 4).unwrap();
        prop_assert!(ty.is_canonical());
        prop_assert_eq!(ty, set.triple().to_vector());
    }

    #[test]
    fn witnesses_are_sound(mat in invertible(8)) {
        let view = BlockView::new(mat, 2, 4).unwrap();
        let v = classify(&view).unwrap();
        for r in &v.evidence {
            prop_assert_eq!(r.preserved, r.witness.is_some());
            if let Some(w) = &r.witness {
                let expected = w.triple().to_vector();
                prop_assert_eq!(&materialized_image_type(&view, w).unwrap(), &expected);
            }
        }
        prop_assert_eq!(v.kind == VerdictKind::TypePreserving, v.witness().is_some());
    }

    #[test]
    fn direct_and_materialized_image_types_agree(
        mat in invertible(9),
        n_w in 0usize..=2,
        ruled in prop::option::of(prop::collection::btree_set(0u64..8, 2..8)),
        whites in prop::collection::vec(0u64..8, 2),
    ) {
        prop_assume!(n_w + usize::from(ruled.is_some()) <= 3);
        let view = BlockView::new(mat, 3, 3).unwrap();
        let set = CanonicalSet::new(3, 3, whites[..n_w.min(2)].to_vec(), ruled.map(|r| r.into_iter().collect())).unwrap();
        prop_assert_eq!(
            canonical_image_type(&view, &set).unwrap(),
            materialized_image_type(&view, &set).unwrap()
        );
    }

    #[test]
    fn fast_path_is_consistent(mat in invertible(12), m in prop::sample::select(vec![2usize, 3])) {
        let view = BlockView::new(mat, m, 12 / m).unwrap();
        if let Some(fast) = fast_path(&view).unwrap() {
            prop_assert_eq!(fast.kind, classify(&view).unwrap().kind);
        }
    }

    #[test]
    fn mds_layers_are_not_type_preserving(m in 2u32..=3, delta in 3usize..=4, seed in any::<u64>()) {
        let f = GfField::default_for(m).unwrap();
        prop_assume!((m, delta) != (2, 4));
        let a = random_mds(delta, f, seed).unwrap();
        let view = lift_gf_matrix(&a).unwrap();
        prop_assert_eq!(classify(&view).unwrap().kind, VerdictKind::NonTypePreserving);
    }

    #[test]
    fn sboxes_preserve_subgroup_types(seed in any::<u64>(), q in 0usize..=12, m in prop::sample::select(vec![2usize, 3, 4])) {
        let s = random_sbox_set(m, 12 / m, seed, false).unwrap();
        let image = subgroup_elements(q, 12).unwrap().map(|x| s.apply(x)).unwrap();
        prop_assert_eq!(
            type_of_set(&image, m, 12 / m).unwrap().triple(),
            subgroup_type(q, 12, m).unwrap()
        );
    }

    #[test]
    fn coset_partitions_respect_translations(q in 1usize..12, v in 0u64..1 << 12) {
        let shift: Vec<u64> = (0..1u64 << 12).map(|x| boxplus(x, v, 12)).collect();
        prop_assert!(partition_invariant_under(&shift, &coset_partition(q, 12).unwrap()).unwrap());
    }

    #[test]
    fn invariance_implies_zero_coset_condition(seed in any::<u64>(), s in 0usize..8, zero in any::<bool>()) {
        let c = SpnModCipher::new(
            random_sbox_set(2, 4, seed, zero).unwrap(),
            rotation_layer(8, 2, s).unwrap().matrix,
        ).unwrap();
        let r = spnmod_primitivity(&c);
        r.validate().unwrap();
        for w in &r.witnesses {
            prop_assert!(!w.invariant || w.theorem_condition);
        }
    }
}

#[test]
fn subgroup_lattice_is_a_chain() {
    for q in 0..12 {
        let big = subgroup_elements(q, 12).unwrap();
        let small = subgroup_elements(q + 1, 12).unwrap();
        assert!(small.is_subset(&big));
    }
}

#[test]
fn subgroup_types_match_enumeration() {
    for n in [8usize, 12, 16] {
        for m in [2usize, 4] {
            for q in 0..=n {
                let counted = type_of_set(&subgroup_elements(q, n).unwrap(), m, n / m).unwrap();
                assert_eq!(counted.triple(), subgroup_type(q, n, m).unwrap(), "q={q} n={n} m={m}");
            }
        }
    }
}

#[test]
fn sboxes_preserve_types_of_arbitrary_sets() {
    let s = random_sbox_set(3, 2, 5, false).unwrap();
    for mask in [0b1u64, 0b1011, 0xFF00, 0x8001_0010, 0xDEAD_BEEF] {
        let elems: Vec<u64> = (0..64).filter(|x| mask >> (x % 32) & 1 == 1).collect();
        let set = StateSet::new(6, elems).unwrap();
        let image = set.map(|x| s.apply(x)).unwrap();
        assert_eq!(type_of_set(&image, 3, 2).unwrap(), type_of_set(&set, 3, 2).unwrap());
    }
}
