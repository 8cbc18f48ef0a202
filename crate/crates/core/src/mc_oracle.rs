//! Monte Carlo estimates over Haar-random ensembles.
//!
//! Sample `i` draws all of its unitaries from the stream `(seed, i)`, so
//! estimates do not depend on how samples are spread over threads. Sums run
//! pairwise in sample order.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::densealg::{haar_unitary, kron, pairwise_sum, pairwise_sum_f64, CMat, ComplexTensor, RngStream, C64};
use crate::mps::{correlation_d1, correlation_d2, CorrelationCase, DisorderedMps, MpsEnsembleSpec};
use crate::mps_moments::{MomentKind, MomentResult};
use crate::operators::Operator;
use crate::peps::{correlation_d1_peps, correlation_d2_peps, PepsEnsembleSpec, PepsGrid};
use crate::peps_moments::{BlockKind, PepsBlockSet};
use crate::permgroup::SymmetricGroup;
use crate::weingarten::TWIRL_BUDGET;
use crate::{Error, Result};

/// Pass threshold on the z-score.
pub const DEFAULT_THRESHOLD: f64 = 4.0;
/// Relative roundoff floor added in quadrature to the standard error.
pub const ROUNDOFF_FLOOR: f64 = 1e-10;
/// Smallest accepted sample count for ensemble moments.
pub const MIN_SAMPLES: usize = 100;
/// Samples summed sequentially before the pairwise reduction of operator
/// estimates.
const CHUNK: usize = 64;

/// What an estimate is an estimate of.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub kind: MomentKind,
    pub k: usize,
    pub d: usize,
    #[serde(rename = "D")]
    pub bond: usize,
    pub s: Option<usize>,
    pub op_a: String,
    pub op_b: String,
}

impl Provenance {
    pub fn new(kind: MomentKind, s: Option<usize>, k: usize, d: usize, bond: usize, a: &Operator, b: &Operator) -> Self {
        Self {
            kind,
            k,
            d,
            bond,
            s,
            op_a: a.label().to_string(),
            op_b: b.label().to_string(),
        }
    }

    fn of(result: &MomentResult) -> Self {
        Self {
            kind: result.kind,
            k: result.k,
            d: result.d,
            bond: result.bond,
            s: result.s,
            op_a: result.op_a.clone(),
            op_b: result.op_b.clone(),
        }
    }
}

mod pair {
    use super::C64;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(z: &C64, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq([z.re, z.im])
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<C64, D::Error> {
        let [re, im] = <[f64; 2]>::deserialize(d)?;
        Ok(C64::new(re, im))
    }
}

/// Sample mean with per-component standard errors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    #[serde(with = "pair")]
    pub mean: C64,
    /// Standard errors of the real and imaginary parts.
    pub stderr: [f64; 2],
    pub n_samples: usize,
    pub seed: u64,
    pub wall_time: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
}

impl McEstimate {
    /// Mean and `std / √n` of `samples`, which must hold at least two values.
    pub fn from_samples(samples: &[C64], seed: u64, wall_time: f64) -> Result<Self> {
        let n = samples.len();
        if n < 2 {
            return Err(Error::Invalid(format!("an estimate needs at least 2 samples, got {n}")));
        }
        let mean = pairwise_sum(samples) / n as f64;
        let var = |f: &dyn Fn(&C64) -> f64, m: f64| {
            let dev: Vec<f64> = samples.iter().map(|z| (f(z) - m).powi(2)).collect();
            pairwise_sum_f64(&dev) / (n - 1) as f64
        };
        let stderr = [(var(&|z| z.re, mean.re) / n as f64).sqrt(), (var(&|z| z.im, mean.im) / n as f64).sqrt()];
        Ok(Self {
            mean,
            stderr,
            n_samples: n,
            seed,
            wall_time,
            provenance: None,
        })
    }

    /// Largest component z-score of `value`, with a roundoff floor on the
    /// standard errors.
    pub fn z_score(&self, value: C64) -> f64 {
        let floor = ROUNDOFF_FLOOR * value.norm().max(1.0);
        let z = |diff: f64, se: f64| diff.abs() / se.hypot(floor);
        z(value.re - self.mean.re, self.stderr[0]).max(z(value.im - self.mean.im, self.stderr[1]))
    }
}

/// Analytic value against an estimate.
#[derive(Clone, Debug, Serialize)]
pub struct ComparisonReport {
    pub analytic: MomentResult,
    pub mc: McEstimate,
    pub z_score: f64,
    pub threshold: f64,
    pub pass: bool,
}

/// `z = |analytic − mean| / stderr` (largest component) and the verdict
/// `z ≤ threshold`.
pub fn compare(analytic: &MomentResult, mc: &McEstimate, threshold: f64) -> Result<ComparisonReport> {
    if let Some(p) = &mc.provenance {
        let want = Provenance::of(analytic);
        if *p != want {
            return Err(Error::Provenance(format!("estimate of {p:?} compared with analytic {want:?}")));
        }
    }
    let z_score = mc.z_score(analytic.to_c64());
    Ok(ComparisonReport {
        analytic: analytic.clone(),
        mc: mc.clone(),
        z_score,
        threshold,
        pass: z_score <= threshold,
    })
}

/// Evaluates `kernel` on the stream of every sample index, in index order.
fn collect_samples<T: Send>(n: usize, seed: u64, kernel: impl Fn(&mut RngStream) -> Result<T> + Sync) -> Result<Vec<T>> {
    (0..n).into_par_iter().map(|i| kernel(&mut RngStream::new(seed, i as u64))).collect()
}

fn check_count(n: usize) -> Result<()> {
    if n < MIN_SAMPLES {
        return Err(Error::Invalid(format!("at least {MIN_SAMPLES} samples are required, got {n}")));
    }
    Ok(())
}

/// `k`-th powers of `samples` for every requested `k`, sharing the samples.
pub fn moment_estimates(samples: &[C64], ks: &[usize], seed: u64, wall_time: f64) -> Result<Vec<McEstimate>> {
    ks.iter()
        .map(|&k| {
            let powered: Vec<C64> = samples.iter().map(|z| z.powu(k as u32)).collect();
            McEstimate::from_samples(&powered, seed, wall_time)
        })
        .collect()
}

fn ops(d: usize, a: &Operator, b: &Operator) -> Result<()> {
    if a.dim() != d || b.dim() != d {
        return Err(Error::DimensionMismatch(format!("operators of dimension {} and {} for d={d}", a.dim(), b.dim())));
    }
    Ok(())
}

/// One correlation value per sample of a disordered MPS.
pub fn mps_samples(spec: &MpsEnsembleSpec, a: &CMat, b: &CMat, n: usize, seed: u64) -> Result<Vec<C64>> {
    spec.validate()?;
    let (d, bond) = (spec.d, spec.bond);
    match spec.geometry.case() {
        CorrelationCase::GenericD2 { s } => collect_samples(n, seed, |rng| correlation_d2(&DisorderedMps::sample(d, bond, s + 2, rng), a, b, s)),
        CorrelationCase::BoundaryD1 => collect_samples(n, seed, |rng| correlation_d1(&haar_unitary(d * bond, rng), a, b, d, bond)),
        other => Err(Error::Invalid(format!("geometry vanishes identically ({other:?})"))),
    }
}

fn mps_kind(spec: &MpsEnsembleSpec) -> (MomentKind, Option<usize>) {
    match spec.geometry.case() {
        CorrelationCase::GenericD2 { s } => (MomentKind::MpsD2, Some(s)),
        _ => (MomentKind::MpsD1, None),
    }
}


/// Estimates of `E[D^k]` for every `k` in `ks` from one set of MPS samples.
pub fn mc_mps_moments(spec: &MpsEnsembleSpec, ks: &[usize], a: &Operator, b: &Operator, n: usize, seed: u64) -> Result<Vec<McEstimate>> {
    check_count(n)?;
    ops(spec.d, a, b)?;
    let start = Instant::now();
    let samples = mps_samples(spec, a.matrix(), b.matrix(), n, seed)?;
    let (kind, s) = mps_kind(spec);
    let mut out = moment_estimates(&samples, ks, seed, start.elapsed().as_secs_f64())?;
    for (est, &k) in out.iter_mut().zip(ks) {
        est.provenance = Some(Provenance::new(kind, s, k, spec.d, spec.bond, a, b));
    }
    Ok(out)
}

/// Estimate of `E[D^k]` over disordered MPS.
pub fn mc_mps_moment(spec: &MpsEnsembleSpec, k: usize, a: &Operator, b: &Operator, n: usize, seed: u64) -> Result<McEstimate> {
    Ok(mc_mps_moments(spec, &[k], a, b, n, seed)?.remove(0))
}

/// One correlation value per sample of a disordered PEPS.
pub fn peps_samples(spec: &PepsEnsembleSpec, a: &CMat, b: &CMat, n: usize, seed: u64) -> Result<Vec<C64>> {
    let (rows, cols) = spec.template()?;
    let (d, bond) = (spec.d, spec.bond);
    collect_samples(n, seed, |rng| {
        let grid = PepsGrid::sample(d, bond, rows, cols, rng)?;
        if cols == 1 {
            correlation_d1_peps(&grid, a, b)
        } else {
            correlation_d2_peps(&grid, a, b)
        }
    })
}

/// Estimates of `E[D^k]` for every `k` in `ks` from one set of PEPS samples.
pub fn mc_peps_moments(spec: &PepsEnsembleSpec, ks: &[usize], a: &Operator, b: &Operator, n: usize, seed: u64) -> Result<Vec<McEstimate>> {
    check_count(n)?;
    ops(spec.d, a, b)?;
    let start = Instant::now();
    let samples = peps_samples(spec, a.matrix(), b.matrix(), n, seed)?;
    let (_, cols) = spec.template()?;
    let (kind, s) = if cols == 1 { (MomentKind::PepsD1, None) } else { (MomentKind::PepsD2, Some(cols - 2)) };
    let mut out = moment_estimates(&samples, ks, seed, start.elapsed().as_secs_f64())?;
    for (est, &k) in out.iter_mut().zip(ks) {
        est.provenance = Some(Provenance::new(kind, s, k, spec.d, spec.bond, a, b));
    }
    Ok(out)
}

/// Estimate of `E[D^k]` over disordered PEPS.
pub fn mc_peps_moment(spec: &PepsEnsembleSpec, k: usize, a: &Operator, b: &Operator, n: usize, seed: u64) -> Result<McEstimate> {
    Ok(mc_peps_moments(spec, &[k], a, b, n, seed)?.remove(0))
}

/// `U^{⊗k}`.
pub fn tensor_power(u: &CMat, k: usize) -> CMat {
    let mut out = u.clone();
    for _ in 1..k {
        out = kron(&out, u);
    }
    out
}

/// Sample average of `U^{⊗k} X U^{†⊗k}` for Haar `U` on `C^q`.
pub fn mc_twirl(x: &ComplexTensor, k: usize, q: usize, n: usize, seed: u64) -> Result<ComplexTensor> {
    let dim = q.checked_pow(k as u32).filter(|&m| m * m <= TWIRL_BUDGET).ok_or_else(|| Error::Budget(format!("q^k = {q}^{k} exceeds the twirl budget")))?;
    if x.legs().len() != 2 || x.dims() != [dim, dim] {
        return Err(Error::DimensionMismatch(format!("expected a {dim}x{dim} operator, got {:?}", x.dims())));
    }
    if n == 0 {
        return Err(Error::Invalid("no samples requested".into()));
    }
    let xm = CMat::from_row_slice(dim, dim, x.data());
    let chunks: Vec<CMat> = (0..n.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut acc = CMat::zeros(dim, dim);
            for i in c * CHUNK..((c + 1) * CHUNK).min(n) {
                let u = tensor_power(haar_unitary(q, &mut RngStream::new(seed, i as u64)).matrix(), k);
                acc += &u * &xm * u.adjoint();
            }
            acc
        })
        .collect();
    let mean = pairwise_matrix_sum(&chunks) / C64::new(n as f64, 0.0);
    let data: Vec<C64> = (0..dim).flat_map(|i| (0..dim).map(move |j| (i, j))).map(|(i, j)| mean[(i, j)]).collect();
    ComplexTensor::new(vec![("row", dim), ("col", dim)], data)
}

fn pairwise_matrix_sum(ms: &[CMat]) -> CMat {
    match ms.len() {
        1 => ms[0].clone(),
        len => {
            let (a, b) = ms.split_at(len / 2);
            pairwise_matrix_sum(a) + pairwise_matrix_sum(b)
        }
    }
}

/// Unbiased single-sample estimates of `Wg(π, q)` for every `π ∈ S_k`:
/// `∏_m U[m][m] conj(U[m][π(m)])`, valid for `k ≤ q`.
pub fn weingarten_sample(u: &CMat, g: &SymmetricGroup) -> Vec<C64> {
    g.elements()
        .iter()
        .map(|p| (0..g.degree()).map(|m| u[(m, m)] * u[(m, p.apply(m))].conj()).product())
        .collect()
}

fn check_estimator(k: usize, q: usize) -> Result<()> {
    if k > q {
        return Err(Error::Unsupported(format!("the entry estimator needs k ≤ q, got k={k}, q={q}")));
    }
    Ok(())
}

/// Per-entry estimates of a family of block entries from samples of
/// `entries`, row-major.
fn estimate_entries(n: usize, seed: u64, entries: impl Fn(&mut RngStream) -> Vec<C64> + Sync) -> Result<Vec<McEstimate>> {
    check_count(n)?;
    let start = Instant::now();
    let samples = collect_samples(n, seed, |rng| Ok(entries(rng)))?;
    let wall = start.elapsed().as_secs_f64();
    let m = samples[0].len();
    (0..m)
        .map(|j| {
            let column: Vec<C64> = samples.iter().map(|s| s[j]).collect();
            McEstimate::from_samples(&column, seed, wall)
        })
        .collect()
}

/// Estimates of the MPS building block `T[τ][θ]`, row-major, with `Wg`
/// replaced by its single-sample estimator on one Haar unit.
pub fn mc_t_matrix(k: usize, d: usize, bond: usize, n: usize, seed: u64) -> Result<Vec<McEstimate>> {
    check_estimator(k, d * bond)?;
    let g = SymmetricGroup::new(k)?;
    let order = g.order();
    let pw = |base: usize, e: usize| base.pow(e as u32) as f64;
    estimate_entries(n, seed, |rng| {
        let w = weingarten_sample(haar_unitary(d * bond, rng).matrix(), &g);
        let mut out = Vec::with_capacity(order * order);
        for tau in 0..order {
            for theta in 0..order {
                let sum: C64 = (0..order).map(|sigma| w[g.div(sigma, tau)] * pw(d, g.cycle_count(sigma)) * pw(bond, g.cycle_count(g.div(sigma, theta)))).sum();
                out.push(sum * pw(d, g.cycle_count(tau)));
            }
        }
        out
    })
}

/// Estimates of every entry of a slot-free PEPS site tensor, row-major over
/// its legs, from independent Haar `Û` and `Ũ`.
pub fn mc_block(kind: BlockKind, k: usize, d: usize, bond: usize, n: usize, seed: u64) -> Result<Vec<McEstimate>> {
    if kind.has_slot() {
        return Err(Error::Unsupported(format!("{kind:?} carries an operator slot")));
    }
    check_estimator(k, d * bond)?;
    let set = PepsBlockSet::new(k, d, bond)?;
    let legs = PepsBlockSet::legs(kind).len();
    let order = set.group().order();
    let size = order.pow(legs as u32);
    estimate_entries(n, seed, |rng| {
        let w_hat = weingarten_sample(haar_unitary(d * bond, rng).matrix(), set.group());
        let w_tilde = weingarten_sample(haar_unitary(d * bond, rng).matrix(), set.group());
        (0..size)
            .map(|flat| {
                let free: Vec<usize> = (0..legs).map(|i| (flat / order.pow((legs - 1 - i) as u32)) % order).collect();
                set.entry_with(kind, &free, &w_hat, &w_tilde)
            })
            .collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::q_frac;
    use crate::mps::MpsGeometry;
    use crate::mps_moments::{avg_moment_d2, MomentValue};

    fn chain(s: usize) -> MpsEnsembleSpec {
        MpsEnsembleSpec {
            d: 2,
            bond: 2,
            v: s + 2,
            geometry: MpsGeometry::for_chain(s, 1),
        }
    }

    #[test]
    fn identity_samples_are_one() {
        let id = Operator::identity(2);
        let est = mc_mps_moment(&chain(1), 2, &id, &id, 200, 3).unwrap();
        assert!((est.mean - 1.0).norm() < 1e-12);
        assert!(est.z_score(C64::new(1.0, 0.0)) < 1.0);
    }

    #[test]
    fn estimates_are_seed_deterministic() {
        let z = Operator::pauli_z();
        let a = mc_mps_moment(&chain(1), 2, &z, &z, 300, 9).unwrap();
        let b = mc_mps_moment(&chain(1), 2, &z, &z, 300, 9).unwrap();
        assert_eq!(a.mean, b.mean);
        assert_eq!(a.stderr, b.stderr);
    }

    #[test]
    fn compare_thresholds() {
        let z = Operator::pauli_z();
        let analytic = MomentResult::new(MomentKind::MpsD2, 1, 2, 2, Some(1), z.label(), z.label(), MomentValue::Exact(q_frac(0, 1)));
        let mut est = McEstimate::from_samples(&[C64::new(1.0, 0.0), C64::new(-1.0, 0.0)], 0, 0.0).unwrap();
        est.mean = C64::new(4.1 * est.stderr[0], 0.0);
        assert!(!compare(&analytic, &est, 4.0).unwrap().pass);
        est.mean = C64::new(0.0, 0.0);
        let r = compare(&analytic, &est, 4.0).unwrap();
        assert!(r.pass && r.z_score == 0.0);
        est.provenance = Some(Provenance::new(MomentKind::MpsD1, None, 1, 2, 2, &z, &z));
        assert!(compare(&analytic, &est, 4.0).is_err());
    }

    #[test]
    fn chain_moment_agrees_with_analytic() {
        let z = Operator::pauli_z();
        let est = mc_mps_moment(&chain(1), 2, &z, &z, 4000, 21).unwrap();
        let analytic = avg_moment_d2(2, 2, 2, 1, &z, &z).unwrap();
        let report = compare(&analytic, &est, DEFAULT_THRESHOLD).unwrap();
        assert!(report.pass, "{report:?}");
    }

    #[test]
    fn weingarten_estimator_is_unbiased() {
        let g = SymmetricGroup::new(2).unwrap();
        let samples = collect_samples(20000, 5, |rng| Ok(weingarten_sample(haar_unitary(3, rng).matrix(), &g))).unwrap();
        for (p, want) in [(0, 1.0 / 8.0), (1, -1.0 / 24.0)] {
            let col: Vec<C64> = samples.iter().map(|s| s[p]).collect();
            let est = McEstimate::from_samples(&col, 5, 0.0).unwrap();
            assert!(est.z_score(C64::new(want, 0.0)) < DEFAULT_THRESHOLD, "{p}: {est:?}");
        }
    }
}
