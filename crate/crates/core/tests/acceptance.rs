//! Acceptance suite: one test per criterion, each printing a single
//! `criterion NN ... PASS|FAIL` line. Run with `--nocapture` to see them.

use std::time::Instant;

use num_traits::{One, Zero};
use tnmoments::cli::{default_campaign, run_campaign};
use tnmoments::densealg::{unitarity_residual, ComplexTensor, RngStream, C64};
use tnmoments::dualunitary::{build_d2, check_dual, cnot_matrix, DualGateParams};
use tnmoments::exact::{q_frac, q_int, RatMatrix, Q};
use tnmoments::mc_oracle::mc_twirl;
use tnmoments::mps::{block_transfer_mat, convergence, fixed_points, leading_pair, DisorderedMps};
use tnmoments::mps_moments::{avg_moment_d1, avg_moment_d2, moment_blocks, t_matrix, MomentResult};
use tnmoments::operators::Operator;
use tnmoments::peps::{check_simplicity, column_matrix, PepsUnit};
use tnmoments::peps_moments::{avg_moment_d1_peps, avg_moment_d2_peps};
use tnmoments::permgroup::SymmetricGroup;
use tnmoments::weingarten::{gram, twirl, weingarten_matrix, WeingartenTable};

/// Tolerances pinned by the criteria.
const TWIRL_SIGMAS: f64 = 5.0;
const TWIRL_SAMPLES: usize = 10_000;
const ROUNDOFF: f64 = 1e-12;
const RATIO_SLACK: f64 = 0.10;

fn verdict(n: usize, name: &str, start: Instant, failures: &[String]) {
    let status = if failures.is_empty() { "PASS" } else { "FAIL" };
    println!("criterion {n:02} {name}: {status} ({:.2} s)", start.elapsed().as_secs_f64());
    for f in failures.iter().take(10) {
        println!("    {f}");
    }
    assert!(failures.is_empty(), "criterion {n:02} failed: {} problems", failures.len());
}

fn exact_of(r: &MomentResult) -> Option<Q> {
    r.exact().cloned()
}

fn fraction(f: &tnmoments::exact::Fraction) -> Q {
    f.to_q().expect("well-formed fraction")
}

/// Integer matrix as an operator with an exact copy.
fn integer_op(rows: &[&[i64]]) -> Operator {
    let pairs: Vec<Vec<[f64; 2]>> = rows.iter().map(|r| r.iter().map(|&x| [x as f64, 0.0]).collect()).collect();
    Operator::parse(&serde_json::to_string(&pairs).unwrap(), rows.len()).unwrap()
}

fn integer_trace(rows: &[&[i64]]) -> i64 {
    (0..rows.len()).map(|i| rows[i][i]).sum()
}

#[test]
fn criterion_01_degree_two_closed_form() {
    let start = Instant::now();
    let mut failures = Vec::new();
    for (d, bond) in [(2i64, 2i64), (2, 3), (3, 2), (3, 3)] {
        let den = d * d * bond * bond - 1;
        let t = t_matrix(2, d as usize, bond as usize).unwrap();
        let scale = q_int(d * d);
        let want_t = [[Q::one(), q_frac(d * d * bond - bond, den)], [Q::zero(), q_frac(bond * bond - 1, den)]];
        for (i, row) in want_t.iter().enumerate() {
            for (j, want) in row.iter().enumerate() {
                if &(t.get(i, j) / &scale) != want {
                    failures.push(format!("d={d} D={bond}: T[{i}][{j}] = {}, want {want}", t.get(i, j) / &scale));
                }
            }
        }

        // Coefficients on tr(A)² and tr(A²) for the identity and the swap.
        let blocks = moment_blocks(2, d as usize, bond as usize).unwrap();
        let pos = |parts: &[usize]| blocks.classes.iter().position(|c| c.parts == parts).unwrap();
        let (sq, sw) = (pos(&[1, 1]), pos(&[2]));
        let left = [
            (q_int(bond * bond), Q::zero()),
            (q_frac((d * d - 1) * bond.pow(3), den), q_frac(d * bond * (bond * bond - 1), den)),
        ];
        let right = [(q_frac(d * d * bond * bond, den), q_frac(-d, den)), (q_frac(-bond, den), q_frac(d * bond, den))];
        for perm in 0..2 {
            for (name, got, want) in [("left", &blocks.t_left[perm], &left[perm]), ("right", &blocks.t_right[perm], &right[perm])] {
                let got = (fraction(&got[sq]), fraction(&got[sw]));
                if got != *want {
                    failures.push(format!("d={d} D={bond}: T^{name}[{perm}] = {got:?}, want {want:?}"));
                }
            }
        }

        // Substituted moments: the assembled closed form against the library.
        // σ_z on the first two levels when d = 3.
        let z = if d == 2 { Operator::pauli_z() } else { Operator::gell_mann(3, 1, 1).unwrap() };
        for (label, op) in [("σz", z), ("I", Operator::identity(d as usize))] {
            let tr = |m: &nalgebra::DMatrix<C64>| q_int(m.trace().re.round() as i64);
            let (p11, p2) = (tr(op.matrix()) * tr(op.matrix()), tr(&(op.matrix() * op.matrix())));
            let tl = [&left[0].0 * &p11 + &left[0].1 * &p2, &left[1].0 * &p11 + &left[1].1 * &p2];
            let tr_ = [&right[0].0 * &p11 + &right[0].1 * &p2, &right[1].0 * &p11 + &right[1].1 * &p2];
            for s in 0..=3 {
                let mut v = tr_.clone();
                for _ in 0..s {
                    v = [&want_t[0][0] * &v[0] + &want_t[0][1] * &v[1], &want_t[1][0] * &v[0] + &want_t[1][1] * &v[1]];
                }
                let want = (&tl[0] * &v[0] + &tl[1] * &v[1]) / q_int(d.pow(4) * bond * bond);
                let got = exact_of(&avg_moment_d2(2, d as usize, bond as usize, s, &op, &op).unwrap());
                if got.as_ref() != Some(&want) {
                    failures.push(format!("d={d} D={bond} s={s} A=B={label}: {got:?}, want {want}"));
                }
            }
        }
    }
    verdict(1, "k=2 closed form", start, &failures);
}

#[test]
fn criterion_02_degree_one_factorizes() {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mats2: [&[&[i64]]; 2] = [&[&[1, 2], &[0, 3]], &[&[2, 0], &[5, -1]]];
    let mats3: [&[&[i64]]; 2] = [&[&[1, 0, 2], &[0, 3, 0], &[1, 1, -2]], &[&[4, 1, 0], &[0, 0, 0], &[2, 0, 1]]];
    for d in [2usize, 3] {
        let mats = if d == 2 { mats2 } else { mats3 };
        let (a, b) = (integer_op(mats[0]), integer_op(mats[1]));
        let want = q_frac(integer_trace(mats[0]) * integer_trace(mats[1]), (d * d) as i64);
        let traceless: Vec<Operator> = if d == 2 {
            vec![Operator::pauli_x(), Operator::pauli_y(), Operator::pauli_z()]
        } else {
            vec![Operator::gell_mann(3, 1, 2).unwrap(), Operator::gell_mann(3, 3, 1).unwrap(), Operator::parse("gellmann-1-1", 3).unwrap()]
        };
        for bond in 1..=4 {
            let mut cases: Vec<(String, MomentResult, Q)> = Vec::new();
            for s in 0..=3 {
                cases.push((format!("mps-d2 s={s}"), avg_moment_d2(1, d, bond, s, &a, &b).unwrap(), want.clone()));
                for t in &traceless {
                    cases.push((format!("mps-d2 s={s} {}", t.label()), avg_moment_d2(1, d, bond, s, t, &b).unwrap(), Q::zero()));
                    cases.push((format!("mps-d2 s={s} B={}", t.label()), avg_moment_d2(1, d, bond, s, &a, t).unwrap(), Q::zero()));
                }
            }
            for s in 1..=3 {
                cases.push((format!("peps-d2 s={s}"), avg_moment_d2_peps(1, d, bond, s, &a, &b).unwrap(), want.clone()));
                for t in &traceless {
                    cases.push((format!("peps-d2 s={s} {}", t.label()), avg_moment_d2_peps(1, d, bond, s, &a, t).unwrap(), Q::zero()));
                }
            }
            cases.push(("mps-d1".into(), avg_moment_d1(1, d, bond, &a, &b).unwrap(), want.clone()));
            cases.push(("peps-d1".into(), avg_moment_d1_peps(1, d, bond, &a, &b).unwrap(), want.clone()));
            for t in &traceless {
                cases.push((format!("mps-d1 {}", t.label()), avg_moment_d1(1, d, bond, t, &b).unwrap(), Q::zero()));
                cases.push((format!("peps-d1 {}", t.label()), avg_moment_d1_peps(1, d, bond, &a, t).unwrap(), Q::zero()));
            }
            for (name, r, want) in cases {
                if exact_of(&r).as_ref() != Some(&want) {
                    failures.push(format!("d={d} D={bond} {name}: {:?}, want {want}", r.value));
                }
            }
        }
    }
    verdict(2, "k=1 factorization", start, &failures);
}

#[test]
fn criterion_03_identity_normalization() {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut check = |name: String, r: MomentResult| {
        if exact_of(&r) != Some(Q::one()) {
            failures.push(format!("{name}: {:?}", r.value));
        }
    };
    for d in [2usize, 3] {
        let id = Operator::identity(d);
        for bond in 1..=4 {
            for k in 1..=4 {
                for s in 0..=3 {
                    check(format!("mps-d2 k={k} d={d} D={bond} s={s}"), avg_moment_d2(k, d, bond, s, &id, &id).unwrap());
                }
                check(format!("mps-d1 k={k} d={d} D={bond}"), avg_moment_d1(k, d, bond, &id, &id).unwrap());
            }
            for k in 1..=3 {
                check(format!("peps-d1 k={k} d={d} D={bond}"), avg_moment_d1_peps(k, d, bond, &id, &id).unwrap());
            }
        }
        for bond in [1, 2, 4] {
            for k in 1..=2 {
                for s in 1..=2 {
                    check(format!("peps-d2 k={k} d={d} D={bond} s={s}"), avg_moment_d2_peps(k, d, bond, s, &id, &id).unwrap());
                }
            }
        }
    }
    verdict(3, "identity normalization", start, &failures);
}

#[test]
fn criterion_04_analytic_matches_sampling() {
    let start = Instant::now();
    let campaign = default_campaign();
    let reports = run_campaign(&campaign).unwrap();
    let mut failures = Vec::new();
    for r in &reports {
        let a = &r.analytic;
        let line = format!(
            "{} k={} d={} D={} s={:?} {}: exact {:.6e}, mc {:.6e} ± {:.1e} (n={}), z = {:.2}",
            a.kind.name(),
            a.k,
            a.d,
            a.bond,
            a.s,
            a.op_a,
            a.to_c64().re,
            r.mc.mean.re,
            r.mc.stderr[0],
            r.mc.n_samples,
            r.z_score
        );
        println!("    {line}");
        if !r.pass || r.mc.n_samples != 20_000 || r.threshold != 4.0 {
            failures.push(line);
        }
    }
    if reports.len() != 14 {
        failures.push(format!("campaign has {} points, want 14", reports.len()));
    }
    verdict(4, "analytic vs Monte Carlo", start, &failures);
}

fn frobenius(a: &ComplexTensor, b: &ComplexTensor) -> f64 {
    a.data().iter().zip(b.data()).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

#[test]
fn criterion_05_twirl_channel() {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut rng = RngStream::new(505, 0);
    for k in 1..=3 {
        for q in [2usize, 3] {
            let dim = q.pow(k as u32);
            for trial in 0..5 {
                let data: Vec<C64> = (0..dim * dim).map(|_| C64::new(rng.standard_normal(), rng.standard_normal())).collect();
                let x = ComplexTensor::new(vec![("row", dim), ("col", dim)], data).unwrap();
                let norm = x.frobenius_norm();
                let exact = twirl(&x, k, q).unwrap();
                let sampled = mc_twirl(&x, k, q, TWIRL_SAMPLES, 1000 * k as u64 + 10 * q as u64 + trial).unwrap();
                let dist = frobenius(&exact, &sampled);
                let bound = TWIRL_SIGMAS * norm / (TWIRL_SAMPLES as f64).sqrt();
                if dist >= bound {
                    failures.push(format!("k={k} q={q} #{trial}: distance {dist:.3e} ≥ {bound:.3e}"));
                }
                let idem = frobenius(&twirl(&exact, k, q).unwrap(), &exact);
                let trace = |t: &ComplexTensor| (0..dim).map(|i| t.data()[i * dim + i]).sum::<C64>();
                let drift = (trace(&exact) - trace(&x)).norm();
                if idem > ROUNDOFF * norm || drift > ROUNDOFF * norm {
                    failures.push(format!("k={k} q={q} #{trial}: idempotence {idem:.1e}, trace drift {drift:.1e}"));
                }
            }
        }
    }
    verdict(5, "twirl channel", start, &failures);
}

#[test]
fn criterion_06_fixed_points_and_spectra() {
    let start = Instant::now();
    let mut failures = Vec::new();
    for (d, bond) in [(2usize, 2usize), (2, 3)] {
        let basis = tnmoments::dualunitary::operator_basis(d);
        let (l, r) = fixed_points(bond);
        let (l, r) = (nalgebra::DVector::from_vec(l), nalgebra::DVector::from_vec(r));
        for draw in 0..100 {
            let mps = DisorderedMps::sample(d, bond, 3, &mut RngStream::new(606, (bond * 1000 + draw) as u64));
            let f = block_transfer_mat(&mps);
            let (right, left) = ((&f * &r - &r).camax(), (f.transpose() * &l - &l).camax());
            if right > ROUNDOFF || left > ROUNDOFF {
                failures.push(format!("d={d} D={bond} #{draw}: fixed-point residuals {right:.1e}, {left:.1e}"));
            }
            let (l1, l2) = leading_pair(&mps).unwrap();
            if (l1 - 1.0).norm() > ROUNDOFF || l2.norm() >= 1.0 {
                failures.push(format!("d={d} D={bond} #{draw}: λ₁ = {l1}, |λ₂| = {}", l2.norm()));
            }
            let conv = convergence(&mps, &basis, 1).unwrap();
            if (conv.ratio - conv.lambda2).abs() > RATIO_SLACK * conv.lambda2 {
                failures.push(format!("d={d} D={bond} #{draw}: ratio {:.4} vs |λ₂| {:.4}", conv.ratio, conv.lambda2));
            }
        }
    }
    verdict(6, "fixed points and spectra", start, &failures);
}

#[test]
fn criterion_07_dual_unitarity() {
    let start = Instant::now();
    let mut failures = Vec::new();
    for i in 0..100 {
        let gate = build_d2(&DualGateParams::random(&mut RngStream::new(707, i))).unwrap();
        let r = gate.residuals();
        if !r.passes(ROUNDOFF) {
            failures.push(format!("gate #{i}: {r:?}"));
        }
    }
    let cnot = check_dual(&cnot_matrix(), 2).unwrap();
    if cnot.temporal > ROUNDOFF || cnot.spatial_left.max(cnot.spatial_right) < 0.5 {
        failures.push(format!("CNOT: {cnot:?}"));
    }
    verdict(7, "dual-unitarity", start, &failures);
}

#[test]
fn criterion_08_peps_structure() {
    let start = Instant::now();
    let mut failures = Vec::new();
    for i in 0..50 {
        let unit = PepsUnit::sample(2, 4, &mut RngStream::new(808, i)).unwrap();
        let r = unit.residuals();
        let (s_in, s_out) = check_simplicity(&unit);
        if r.max() > ROUNDOFF || s_in > ROUNDOFF || s_out > ROUNDOFF {
            failures.push(format!("unit #{i}: {r:?}, simplicity {s_in:.1e}/{s_out:.1e}"));
        }
    }
    for i in 0..10 {
        let mut rng = RngStream::new(809, i);
        let column = vec![PepsUnit::sample(2, 4, &mut rng).unwrap(), PepsUnit::sample(2, 4, &mut rng).unwrap()];
        let res = unitarity_residual(&column_matrix(&column).unwrap());
        if res > ROUNDOFF {
            failures.push(format!("column #{i}: unitarity residual {res:.1e}"));
        }
    }
    verdict(8, "PEPS structural identities", start, &failures);
}

#[test]
fn criterion_09_trivial_bond_degeneration() {
    let start = Instant::now();
    let mut failures = Vec::new();
    let ops2 = [integer_op(&[&[1, 2], &[0, 3]]), integer_op(&[&[2, 0], &[5, -1]]), Operator::pauli_z()];
    let ops3 = [integer_op(&[&[1, 0, 2], &[0, 3, 0], &[1, 1, -2]]), integer_op(&[&[1, 0, 0], &[0, 0, 0], &[0, 0, 0]])];
    for d in [2usize, 3] {
        let ops: &[Operator] = if d == 2 { &ops2 } else { &ops3 };
        for a in ops {
            for b in ops {
                for k in 1..=2 {
                    let mut pairs = vec![("d1".to_string(), avg_moment_d1_peps(k, d, 1, a, b).unwrap(), avg_moment_d1(k, d, 1, a, b).unwrap())];
                    for s in 1..=3 {
                        pairs.push((format!("d2 s={s}"), avg_moment_d2_peps(k, d, 1, s, a, b).unwrap(), avg_moment_d2(k, d, 1, s, a, b).unwrap()));
                    }
                    for (name, peps, mps) in pairs {
                        if exact_of(&peps).is_none() || exact_of(&peps) != exact_of(&mps) {
                            failures.push(format!("d={d} k={k} {name} {}/{}: PEPS {:?} vs MPS {:?}", a.label(), b.label(), peps.value, mps.value));
                        }
                    }
                }
            }
        }
    }
    verdict(9, "D=1 degeneration", start, &failures);
}

#[test]
fn criterion_10_weingarten_exactness() {
    let start = Instant::now();
    let mut failures = Vec::new();
    for q in [6u64, 8] {
        for k in 1..=5 {
            let table = WeingartenTable::new(k, q).unwrap();
            let g = gram(k, q).unwrap();
            let n = g.n;
            let mut gm = RatMatrix::zeros(n, n);
            for i in 0..n {
                for j in 0..n {
                    gm.set(i, j, Q::from_integer(g.get(i, j).clone()));
                }
            }
            if gm.mul(&weingarten_matrix(&table).unwrap()) != RatMatrix::identity(n) {
                failures.push(format!("k={k} q={q}: G·W ≠ I"));
            }
            // Independent inverse, checked for class constancy against the table.
            let inv = gm.inverse().expect("G invertible for k ≤ q");
            let group = SymmetricGroup::new(k).unwrap();
            'entries: for s in 0..n {
                for t in 0..n {
                    let want = table.value(group.element(group.div(s, t))).unwrap();
                    if inv.get(s, t) != want {
                        failures.push(format!("k={k} q={q}: G⁻¹[{s}][{t}] = {} is not Wg of its class ({want})", inv.get(s, t)));
                        break 'entries;
                    }
                }
            }
        }
    }
    verdict(10, "Weingarten exactness", start, &failures);
}
