//! Statistical behaviour of the sampling oracle.

use tnmoments::densealg::{ComplexTensor, RngStream, C64};
use tnmoments::mc_oracle::{
    compare, mc_block, mc_mps_moment, mc_peps_moment, mc_t_matrix, mc_twirl, mps_samples, peps_samples, McEstimate, DEFAULT_THRESHOLD,
};
use tnmoments::mps::{MpsEnsembleSpec, MpsGeometry};
use tnmoments::mps_moments::t_matrix;
use tnmoments::operators::Operator;
use tnmoments::peps::{PepsEnsembleSpec, PepsGeometry};
use tnmoments::peps_moments::{avg_moment_d1_peps, block, BlockKind};
use tnmoments::permgroup::{rep_matrix, SymmetricGroup};

fn chain(d: usize, bond: usize, s: usize) -> MpsEnsembleSpec {
    MpsEnsembleSpec { d, bond, v: s + 2, geometry: MpsGeometry::for_chain(s, 1) }
}

fn peps(bond: usize, r1: i64) -> PepsEnsembleSpec {
    PepsEnsembleSpec { d: 2, bond, v: 3, m: 3, geometry: PepsGeometry { x1: 1, x2: 0, r1, r2: 0, t: 1 } }
}

#[test]
fn traceless_first_moment_vanishes() {
    let z = Operator::pauli_z();
    let est = mc_mps_moment(&chain(2, 2, 1), 1, &z, &z, 10_000, 31).unwrap();
    assert!(est.z_score(C64::new(0.0, 0.0)) <= DEFAULT_THRESHOLD, "{est:?}");
}

#[test]
fn peps_identity_samples_are_one() {
    let id = Operator::identity(2);
    let est = mc_peps_moment(&peps(4, 9), 2, &id, &id, 100, 5).unwrap();
    assert!((est.mean - 1.0).norm() < 1e-12 && est.stderr[0] < 1e-12, "{est:?}");
}

#[test]
fn peps_column_with_traceless_operator_vanishes() {
    let a = Operator::parse("[[[1,0],[2,0]],[[0,0],[3,0]]]", 2).unwrap();
    let x = Operator::pauli_x();
    let est = mc_peps_moment(&peps(4, 5), 1, &a, &x, 5_000, 8).unwrap();
    let exact = avg_moment_d1_peps(1, 2, 4, &a, &x).unwrap();
    assert_eq!(exact.to_c64(), C64::new(0.0, 0.0));
    assert!(compare(&exact, &est, DEFAULT_THRESHOLD).unwrap().pass, "{est:?}");
}

#[test]
fn trivial_bond_peps_samples_match_mps_samples() {
    let a = Operator::parse("[[[1,0],[2,0]],[[0,0],[3,0]]]", 2).unwrap();
    let b = Operator::parse("[[[2,0],[0,0]],[[5,0],[-1,0]]]", 2).unwrap();
    let p = peps_samples(&peps(1, 9), a.matrix(), b.matrix(), 200, 4).unwrap();
    let m = mps_samples(&chain(2, 1, 1), a.matrix(), b.matrix(), 200, 4).unwrap();
    for (x, y) in p.iter().zip(&m) {
        assert!((x - y).norm() < 1e-12, "{x} vs {y}");
    }
}

#[test]
fn estimates_do_not_depend_on_worker_count() {
    let z = Operator::pauli_z();
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| mc_mps_moment(&chain(2, 2, 1), 2, &z, &z, 1_000, 77).unwrap())
    };
    let (one, many) = (run(1), run(4));
    assert_eq!(one.mean, many.mean);
    assert_eq!(one.stderr, many.stderr);
    let again = run(1);
    assert_eq!(serde_json::to_string(&one.mean).unwrap(), serde_json::to_string(&again.mean).unwrap());
}

#[test]
fn standard_error_scales_as_inverse_root_n() {
    let z = Operator::pauli_z();
    let small = mc_mps_moment(&chain(2, 2, 1), 1, &z, &z, 1_000, 90).unwrap();
    let large = mc_mps_moment(&chain(2, 2, 1), 1, &z, &z, 10_000, 91).unwrap();
    let ratio = small.stderr[0] / large.stderr[0];
    assert!((ratio / 10f64.sqrt() - 1.0).abs() < 0.2, "ratio {ratio}");
}

#[test]
fn estimate_serializes_mean_as_pair() {
    let est = McEstimate::from_samples(&[C64::new(1.0, 2.0), C64::new(3.0, 0.0)], 9, 0.5).unwrap();
    let v: serde_json::Value = serde_json::to_value(&est).unwrap();
    assert_eq!(v["mean"], serde_json::json!([2.0, 1.0]));
    assert_eq!(v["n_samples"], 2);
    let back: McEstimate = serde_json::from_value(v).unwrap();
    assert_eq!(back, est);
    assert!(McEstimate::from_samples(&[C64::new(1.0, 0.0)], 0, 0.0).is_err());
}

#[test]
fn sampled_twirl_of_single_copy_is_the_trace() {
    let mut rng = RngStream::new(12, 0);
    let q = 3;
    let data: Vec<C64> = (0..q * q).map(|_| C64::new(rng.standard_normal(), rng.standard_normal())).collect();
    let x = ComplexTensor::new(vec![("row", q), ("col", q)], data).unwrap();
    let n = 4_000;
    let est = mc_twirl(&x, 1, q, n, 3).unwrap();
    let trace: C64 = (0..q).map(|i| x.data()[i * q + i]).sum::<C64>() / q as f64;
    let want = ComplexTensor::new(vec![("row", q), ("col", q)], (0..q * q).map(|i| if i % (q + 1) == 0 { trace } else { C64::new(0.0, 0.0) }).collect()).unwrap();
    let dist: f64 = est.data().iter().zip(want.data()).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
    assert!(dist < 5.0 * x.frobenius_norm() / (n as f64).sqrt());

    let swap = rep_matrix(SymmetricGroup::new(2).unwrap().element(1), 3).unwrap();
    let est = mc_twirl(&swap, 2, 3, 50, 4).unwrap();
    assert!(est.max_abs_diff(&swap).unwrap() < 1e-12);
}

/// Entries whose estimates sit more than four standard errors away.
fn outliers(estimates: &[McEstimate], exact: &[f64]) -> Vec<String> {
    estimates
        .iter()
        .zip(exact)
        .enumerate()
        .filter(|(_, (e, &x))| e.z_score(C64::new(x, 0.0)) > DEFAULT_THRESHOLD)
        .map(|(i, (e, x))| format!("entry {i}: exact {x:.6e}, mc {:.6e} ± {:.1e}", e.mean.re, e.stderr[0]))
        .collect()
}

#[test]
fn transfer_block_entries_match_sampling() {
    let t = t_matrix(3, 2, 2).unwrap();
    let exact: Vec<f64> = t.data.iter().map(tnmoments::exact::q_to_f64).collect();
    let est = mc_t_matrix(3, 2, 2, 20_000, 13).unwrap();
    assert_eq!(est.len(), 36);
    let bad = outliers(&est, &exact);
    assert!(bad.is_empty(), "{bad:#?}");
}

#[test]
fn peps_site_tensors_match_sampling() {
    for kind in [BlockKind::Bulk, BlockKind::Top, BlockKind::BottomLeft] {
        let b = block(kind, 2, 2, 4).unwrap();
        let exact: Vec<f64> = b.entries.iter().map(|e| e.constant().unwrap().to_f64()).collect();
        let est = mc_block(kind, 2, 2, 4, 20_000, 17).unwrap();
        assert_eq!(est.len(), exact.len());
        let bad = outliers(&est, &exact);
        assert!(bad.is_empty(), "{kind:?}: {bad:#?}");
    }
    assert!(mc_block(BlockKind::Left, 2, 2, 4, 200, 0).is_err());
}
