//! Property tests for the algebraic layers.

use proptest::prelude::*;
use tnmoments::densealg::{haar_unitary, RngStream, C64};
use tnmoments::mps_moments::{avg_moment_d2, t_matrix};
use tnmoments::operators::Operator;
use tnmoments::peps::{column_transfer, PepsUnit};
use tnmoments::permgroup::{factorial, rep_matrix, Permutation, SymmetricGroup};
use tnmoments::weingarten::{twirl, WeingartenTable};

fn group_and_pair() -> impl Strategy<Value = (usize, usize, usize)> {
    (1usize..=6).prop_flat_map(|k| {
        let n = factorial(k);
        (Just(k), 0..n, 0..n)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn group_operations_are_consistent((k, i, j) in group_and_pair()) {
        let g = SymmetricGroup::new(k).unwrap();
        prop_assert_eq!(g.div(g.mul(i, j), j), i);
        prop_assert_eq!(g.mul(i, g.inv(i)), 0);
        let (a, b) = (g.element(i), g.element(j));
        prop_assert_eq!(g.element(g.mul(i, j)), &a.compose(b).unwrap());
        prop_assert_eq!(Permutation::unrank(k, i).unwrap().rank(), i);
        let c = g.conjugate(i, j);
        prop_assert_eq!(g.class_of(c), g.class_of(i));
        prop_assert_eq!(g.cycle_count(c), g.cycle_count(i));
        prop_assert_eq!(g.cycle_count(g.inv(i)), g.cycle_count(i));
    }

    #[test]
    fn weingarten_is_a_class_function((k, i, j) in group_and_pair(), q in 1u64..10) {
        prop_assume!(k <= 4);
        let g = SymmetricGroup::new(k).unwrap();
        let table = WeingartenTable::new(k, q).unwrap();
        let w = table.value(g.element(i)).unwrap();
        prop_assert_eq!(w, table.value(g.element(g.conjugate(i, j))).unwrap());
        prop_assert_eq!(w, table.value(g.element(g.inv(i))).unwrap());
    }

    #[test]
    fn permutation_operators_are_twirl_fixed_points((k, i, _j) in group_and_pair(), q in 2usize..4) {
        prop_assume!(k <= 3);
        let g = SymmetricGroup::new(k).unwrap();
        let p = rep_matrix(g.element(i), q).unwrap();
        let t = twirl(&p, k, q).unwrap();
        prop_assert!(t.max_abs_diff(&p).unwrap() < 1e-12);
    }

    #[test]
    fn twirl_commutes_with_haar_conjugation(k in 1usize..=2, q in 2usize..=3, seed in any::<u64>()) {
        let mut rng = RngStream::new(seed, 0);
        let dim = q.pow(k as u32);
        let x: Vec<C64> = (0..dim * dim).map(|_| C64::new(rng.standard_normal(), rng.standard_normal())).collect();
        let x = tnmoments::densealg::ComplexTensor::new(vec![("row", dim), ("col", dim)], x).unwrap();
        let u = tnmoments::mc_oracle::tensor_power(haar_unitary(q, &mut rng).matrix(), k);
        let xm = x.to_matrix(&["row"], &["col"]).unwrap();
        let rotated = &u * &xm * u.adjoint();
        let rotated = tnmoments::densealg::ComplexTensor::from_matrix(&rotated, "row", "col").unwrap();
        let (a, b) = (twirl(&x, k, q).unwrap(), twirl(&rotated, k, q).unwrap());
        prop_assert!(a.max_abs_diff(&b).unwrap() < 1e-10 * x.frobenius_norm());
    }

    #[test]
    fn transfer_block_is_conjugation_invariant(k in 1usize..=3, d in 1usize..=3, bond in 1usize..=3, rho in 0usize..6) {
        let g = SymmetricGroup::new(k).unwrap();
        let rho = rho % g.order();
        let t = t_matrix(k, d, bond).unwrap();
        for a in 0..g.order() {
            for b in 0..g.order() {
                prop_assert_eq!(t.get(a, b), t.get(g.conjugate(a, rho), g.conjugate(b, rho)));
            }
        }
    }

    #[test]
    fn moments_of_scaled_operators_scale(k in 1usize..=3, s in 0usize..=2, c in -3i64..=3) {
        let z = Operator::pauli_z();
        let scaled = Operator::parse(&format!("[[[{c},0],[0,0]],[[0,0],[{},0]]]", -c), 2).unwrap();
        let base = avg_moment_d2(k, 2, 2, s, &z, &z).unwrap().exact().cloned().unwrap();
        let got = avg_moment_d2(k, 2, 2, s, &scaled, &z).unwrap().exact().cloned().unwrap();
        let factor = tnmoments::exact::q_int(c.pow(k as u32));
        prop_assert_eq!(got, base * factor);
    }

    #[test]
    fn column_transfer_fixes_the_identity(seed in any::<u64>()) {
        let mut rng = RngStream::new(seed, 0);
        let units = vec![PepsUnit::sample(2, 4, &mut rng).unwrap(), PepsUnit::sample(2, 4, &mut rng).unwrap()];
        let f = column_transfer(&units).unwrap();
        let (l, r) = tnmoments::mps::fixed_points(16);
        let (l, r) = (nalgebra::DVector::from_vec(l), nalgebra::DVector::from_vec(r));
        prop_assert!((&f * &r - &r).camax() < 1e-12);
        prop_assert!((f.transpose() * &l - &l).camax() < 1e-12);
    }
}
