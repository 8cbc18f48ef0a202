//! Haar-averaged moments `E[D^k]` for disordered solvable MPS.
//!
//! The building blocks are indexed by `S_k` in [`crate::permgroup`] order:
//!
//! * `T[τ][θ] = d^{#τ} Σ_σ Wg(στ⁻¹, dD) d^{#σ} D^{#(σθ⁻¹)}`, rows are a unit's
//!   input permutation and columns the next unit's;
//! * `T^ℓ[θ] = Σ_{σ,τ} Wg(στ⁻¹, dD) tr[P_τᵀ A^{⊗k}] d^{#σ} D^{#τ} D^{#(σθ⁻¹)}`;
//! * `T^r[τ] = Σ_σ Wg(στ⁻¹, dD) tr[P_σ B^{⊗k}] d^{#τ} D^{#σ}`;
//!
//! and `E[D₂^k] = ⟨T^ℓ|T^s|T^r⟩ / (d^{s+2} D)^k`. The textbook `k = 2`
//! matrix is `T / d^k`.
//!
//! All blocks are invariant under simultaneous conjugation of their indices,
//! so the averages are evaluated on class functions: `T` acts on a class
//! vector through a `p(k) × p(k)` matrix. The full `k! × k!` blocks are still
//! available for inspection and cross-checks.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Serialize, Serializer};

use crate::densealg::C64;
use crate::exact::{q_pow, Fraction, RatMatrix, Scalar, Q};
use crate::operators::{Operator, TraceData};
use crate::permgroup::{CycleType, SymmetricGroup};
use crate::weingarten::{WeingartenTable, MAX_WEINGARTEN_DEGREE};
use crate::{Error, Result};

/// Which averaged diagram a result belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MomentKind {
    MpsD1,
    MpsD2,
    PepsD1,
    PepsD2,
}

impl MomentKind {
    pub fn name(&self) -> &'static str {
        match self {
            MomentKind::MpsD1 => "mps-d1",
            MomentKind::MpsD2 => "mps-d2",
            MomentKind::PepsD1 => "peps-d1",
            MomentKind::PepsD2 => "peps-d2",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "mps-d1" => Ok(MomentKind::MpsD1),
            "mps-d2" => Ok(MomentKind::MpsD2),
            "peps-d1" => Ok(MomentKind::PepsD1),
            "peps-d2" => Ok(MomentKind::PepsD2),
            other => Err(Error::Invalid(format!("unknown moment kind {other}"))),
        }
    }

    pub fn is_chain(&self) -> bool {
        matches!(self, MomentKind::MpsD2 | MomentKind::PepsD2)
    }
}

/// Exact when every input was exact, floating otherwise.
#[derive(Clone, Debug, PartialEq)]
pub enum MomentValue {
    Exact(Q),
    Float(C64),
}

impl MomentValue {
    pub fn to_c64(&self) -> C64 {
        match self {
            MomentValue::Exact(q) => q.to_c64(),
            MomentValue::Float(z) => *z,
        }
    }

    pub fn exact(&self) -> Option<&Q> {
        match self {
            MomentValue::Exact(q) => Some(q),
            MomentValue::Float(_) => None,
        }
    }
}

fn ser_exact<S: Serializer>(v: &MomentValue, s: S) -> std::result::Result<S::Ok, S::Error> {
    v.exact().map(Fraction::from).serialize(s)
}

fn ser_float<S: Serializer>(v: &MomentValue, s: S) -> std::result::Result<S::Ok, S::Error> {
    let z = v.to_c64();
    [z.re, z.im].serialize(s)
}

/// An averaged moment with the parameters that produced it.
#[derive(Clone, Debug, Serialize)]
pub struct MomentResult {
    pub kind: MomentKind,
    pub k: usize,
    pub d: usize,
    #[serde(rename = "D")]
    pub bond: usize,
    pub s: Option<usize>,
    pub op_a: String,
    pub op_b: String,
    #[serde(rename = "exact", serialize_with = "ser_exact")]
    pub value: MomentValue,
    #[serde(rename = "float", serialize_with = "ser_float")]
    float: MomentValue,
}

impl MomentResult {
    pub fn new(kind: MomentKind, k: usize, d: usize, bond: usize, s: Option<usize>, op_a: &str, op_b: &str, value: MomentValue) -> Self {
        Self {
            kind,
            k,
            d,
            bond,
            s,
            op_a: op_a.to_string(),
            op_b: op_b.to_string(),
            float: value.clone(),
            value,
        }
    }

    pub fn to_c64(&self) -> C64 {
        self.value.to_c64()
    }

    pub fn exact(&self) -> Option<&Q> {
        self.value.exact()
    }
}

/// Linear combination `Σ_λ c_λ p_λ` of trace products `p_λ = ∏_i tr(X^{λ_i})`,
/// with `λ` running over cycle types in [`crate::permgroup::partitions`] order.
#[derive(Clone, Debug, PartialEq)]
pub struct TracePoly {
    pub coeffs: Vec<Q>,
}

impl TracePoly {
    pub fn eval<S: Scalar>(&self, p: &[S]) -> S {
        dot(&self.coeffs, p)
    }
}

fn dot<S: Scalar>(coeffs: &[Q], p: &[S]) -> S {
    let mut acc = S::s_zero();
    for (c, x) in coeffs.iter().zip(p) {
        if !c.is_zero() {
            acc = acc.s_add(&S::from_q(c).s_mul(x));
        }
    }
    acc
}

/// `p_λ` for every class, exactly when the trace data is exact.
pub fn class_traces(td: &TraceData, classes: &[CycleType]) -> (Option<Vec<Q>>, Vec<C64>) {
    let exact = classes.iter().map(|c| td.power_sum_exact(c)).collect::<Option<Vec<_>>>();
    let float = classes.iter().map(|c| td.power_sum(c)).collect();
    (exact, float)
}

pub(crate) fn check_degree(k: usize) -> Result<()> {
    if k == 0 || k > MAX_WEINGARTEN_DEGREE {
        return Err(Error::DegreeOutOfRange {
            degree: k,
            max: MAX_WEINGARTEN_DEGREE,
        });
    }
    Ok(())
}

/// Group tables, Weingarten values and powers shared by every block.
pub(crate) struct Setup {
    pub k: usize,
    pub g: SymmetricGroup,
    pub w: Vec<Q>,
    pub dp: Vec<Q>,
    pub bp: Vec<Q>,
}

impl Setup {
    pub fn new(k: usize, d: usize, bond: usize) -> Result<Self> {
        check_degree(k)?;
        if d == 0 || bond == 0 {
            return Err(Error::Invalid("dimensions must be positive".into()));
        }
        let g = SymmetricGroup::new(k)?;
        let w = WeingartenTable::new(k, (d * bond) as u64)?.values().to_vec();
        let dp = (0..=2 * k).map(|j| q_pow(d as u64, j)).collect();
        let bp = (0..=2 * k).map(|j| q_pow(bond as u64, j)).collect();
        Ok(Self { k, g, w, dp, bp })
    }

    fn p(&self) -> usize {
        self.g.class_count()
    }

    fn parts(&self, class: usize) -> usize {
        self.g.classes()[class].len()
    }

    /// `Σ counts[ν][a][b] w_ν d^a D^b`.
    fn weigh(&self, counts: &[u32], stride: usize) -> Q {
        let mut acc = Q::zero();
        for (idx, &c) in counts.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let nu = idx / (stride * stride);
            let a = (idx / stride) % stride;
            let b = idx % stride;
            acc += &self.w[nu] * &self.dp[a] * &self.bp[b] * Q::from_integer(BigInt::from(c));
        }
        acc
    }

    /// `T[τ][θ]` for ordinals.
    fn t_entry(&self, tau: usize, theta: usize) -> Q {
        let stride = self.k + 1;
        let mut counts = vec![0u32; self.p() * stride * stride];
        for sigma in 0..self.g.order() {
            let nu = self.g.class_of(self.g.div(sigma, tau));
            let a = self.g.cycle_count(sigma);
            let b = self.g.cycle_count(self.g.div(sigma, theta));
            counts[(nu * stride + a) * stride + b] += 1;
        }
        &self.dp[self.g.cycle_count(tau)] * self.weigh(&counts, stride)
    }
}

/// Class-level blocks that drive every MPS average.
pub(crate) struct ClassBlocks {
    pub setup: Setup,
    /// `T^ℓ` at a representative of each class, as trace polynomials.
    pub left: Vec<TracePoly>,
    /// `T^r` at a representative of each class.
    pub right: Vec<TracePoly>,
    /// Action of `T` on class vectors.
    pub reduced: RatMatrix,
    /// `K[λ][μ] = Σ_{τ∈λ, σ∈μ} Wg(στ⁻¹) D^{#τ} D^{#σ}` for the boundary case.
    pub boundary: RatMatrix,
}

impl ClassBlocks {
    pub fn new(k: usize, d: usize, bond: usize) -> Result<Self> {
        let setup = Setup::new(k, d, bond)?;
        let g = &setup.g;
        let p = g.class_count();
        let n = g.order();
        let stride = k + 1;

        let mut left = Vec::with_capacity(p);
        for kappa in 0..p {
            let theta = g.class_rep(kappa);
            let mut counts = vec![vec![0u32; p * stride * stride]; p];
            for tau in 0..n {
                let row = &mut counts[g.class_of(tau)];
                for sigma in 0..n {
                    let nu = g.class_of(g.div(sigma, tau));
                    let a = g.cycle_count(sigma);
                    let b = g.cycle_count(g.div(sigma, theta));
                    row[(nu * stride + a) * stride + b] += 1;
                }
            }
            let coeffs = counts
                .iter()
                .enumerate()
                .map(|(lambda, c)| &setup.bp[setup.parts(lambda)] * setup.weigh(c, stride))
                .collect();
            left.push(TracePoly { coeffs });
        }

        let mut right = Vec::with_capacity(p);
        for kappa in 0..p {
            let tau = g.class_rep(kappa);
            let mut counts = vec![vec![0u32; p]; p];
            for sigma in 0..n {
                counts[g.class_of(sigma)][g.class_of(g.div(sigma, tau))] += 1;
            }
            let coeffs = counts
                .iter()
                .enumerate()
                .map(|(mu, c)| {
                    let s: Q = c.iter().zip(&setup.w).filter(|(&c, _)| c != 0).map(|(&c, w)| w * Q::from_integer(BigInt::from(c))).sum();
                    s * &setup.dp[setup.parts(kappa)] * &setup.bp[setup.parts(mu)]
                })
                .collect();
            right.push(TracePoly { coeffs });
        }

        // c_λ(μ) = Σ_{θ∈λ} D^{#(σ_μ θ⁻¹)}
        let mut c_lambda = vec![vec![Q::zero(); p]; p];
        for (mu, row) in c_lambda.iter_mut().enumerate() {
            let sigma = g.class_rep(mu);
            let mut counts = vec![vec![0u32; stride]; p];
            for theta in 0..n {
                counts[g.class_of(theta)][g.cycle_count(g.div(sigma, theta))] += 1;
            }
            for (lambda, cnt) in counts.iter().enumerate() {
                row[lambda] = cnt.iter().enumerate().filter(|(_, &c)| c != 0).map(|(j, &c)| &setup.bp[j] * Q::from_integer(BigInt::from(c))).sum();
            }
        }
        let mut reduced = RatMatrix::zeros(p, p);
        for kappa in 0..p {
            let tau = g.class_rep(kappa);
            // N[ν][μ] = #{σ ∈ μ : στ⁻¹ ∈ ν}
            let mut counts = vec![vec![0u32; p]; p];
            for sigma in 0..n {
                counts[g.class_of(g.div(sigma, tau))][g.class_of(sigma)] += 1;
            }
            for lambda in 0..p {
                let mut acc = Q::zero();
                for (nu, row) in counts.iter().enumerate() {
                    for (mu, &c) in row.iter().enumerate() {
                        if c != 0 {
                            acc += &setup.w[nu] * &setup.dp[setup.parts(mu)] * &c_lambda[mu][lambda] * Q::from_integer(BigInt::from(c));
                        }
                    }
                }
                reduced.set(kappa, lambda, acc * &setup.dp[setup.parts(kappa)]);
            }
        }

        let mut pair_counts = vec![vec![vec![0u32; p]; p]; p];
        for tau in 0..n {
            for sigma in 0..n {
                pair_counts[g.class_of(tau)][g.class_of(sigma)][g.class_of(g.div(sigma, tau))] += 1;
            }
        }
        let mut boundary = RatMatrix::zeros(p, p);
        for lambda in 0..p {
            for mu in 0..p {
                let s: Q = pair_counts[lambda][mu]
                    .iter()
                    .zip(&setup.w)
                    .filter(|(&c, _)| c != 0)
                    .map(|(&c, w)| w * Q::from_integer(BigInt::from(c)))
                    .sum();
                boundary.set(lambda, mu, s * &setup.bp[setup.parts(lambda)] * &setup.bp[setup.parts(mu)]);
            }
        }

        Ok(Self {
            setup,
            left,
            right,
            reduced,
            boundary,
        })
    }

    pub fn classes(&self) -> &[CycleType] {
        self.setup.g.classes()
    }

    /// `⟨T^ℓ|T^s|T^r⟩` without normalization.
    pub fn chain<S: Scalar>(&self, pa: &[S], pb: &[S], s: usize) -> S {
        let g = &self.setup.g;
        let p = g.class_count();
        let mut u: Vec<S> = self.right.iter().map(|r| r.eval(pb)).collect();
        for _ in 0..s {
            u = (0..p)
                .map(|kappa| {
                    let row: Vec<Q> = (0..p).map(|l| self.reduced.get(kappa, l).clone()).collect();
                    dot(&row, &u)
                })
                .collect();
        }
        let mut acc = S::s_zero();
        for kappa in 0..p {
            let size = Q::from_integer(BigInt::from(g.class_size(kappa)));
            let tl = self.left[kappa].eval(pa);
            acc = acc.s_add(&S::from_q(&size).s_mul(&tl).s_mul(&u[kappa]));
        }
        acc
    }

    /// `Σ_{λ,μ} K[λ][μ] p_A(λ) p_B(μ)` without normalization.
    pub fn boundary<S: Scalar>(&self, pa: &[S], pb: &[S]) -> S {
        let p = self.setup.g.class_count();
        let mut acc = S::s_zero();
        for lambda in 0..p {
            let row: Vec<Q> = (0..p).map(|m| self.boundary.get(lambda, m).clone()).collect();
            acc = acc.s_add(&pa[lambda].s_mul(&dot(&row, pb)));
        }
        acc
    }
}

/// The full `k! × k!` matrix `T`, filled one conjugation orbit of index pairs
/// at a time.
pub fn t_matrix(k: usize, d: usize, bond: usize) -> Result<RatMatrix> {
    let setup = Setup::new(k, d, bond)?;
    let g = &setup.g;
    let n = g.order();
    let mut t = RatMatrix::zeros(n, n);
    let mut done = vec![false; n * n];
    for tau in 0..n {
        for theta in 0..n {
            if done[tau * n + theta] {
                continue;
            }
            let value = setup.t_entry(tau, theta);
            for rho in 0..n {
                let (a, b) = (g.conjugate(tau, rho), g.conjugate(theta, rho));
                if !done[a * n + b] {
                    done[a * n + b] = true;
                    t.set(a, b, value.clone());
                }
            }
        }
    }
    Ok(t)
}

/// `T^ℓ` for every permutation, as polynomials in the traces of `A`.
pub fn t_left(k: usize, d: usize, bond: usize) -> Result<Vec<TracePoly>> {
    let blocks = ClassBlocks::new(k, d, bond)?;
    let g = &blocks.setup.g;
    Ok((0..g.order()).map(|i| blocks.left[g.class_of(i)].clone()).collect())
}

/// `T^r` for every permutation, as polynomials in the traces of `B`.
pub fn t_right(k: usize, d: usize, bond: usize) -> Result<Vec<TracePoly>> {
    let blocks = ClassBlocks::new(k, d, bond)?;
    let g = &blocks.setup.g;
    Ok((0..g.order()).map(|i| blocks.right[g.class_of(i)].clone()).collect())
}

/// All three blocks in exchange form: fractions, with trace-polynomial
/// coefficients listed over `classes`.
#[derive(Clone, Debug, Serialize)]
pub struct MomentBlocks {
    pub k: usize,
    pub d: usize,
    #[serde(rename = "D")]
    pub bond: usize,
    pub classes: Vec<CycleType>,
    pub t: Vec<Vec<Fraction>>,
    pub t_left: Vec<Vec<Fraction>>,
    pub t_right: Vec<Vec<Fraction>>,
}

pub fn moment_blocks(k: usize, d: usize, bond: usize) -> Result<MomentBlocks> {
    let t = t_matrix(k, d, bond)?;
    let blocks = ClassBlocks::new(k, d, bond)?;
    let g = &blocks.setup.g;
    let n = g.order();
    let poly = |tp: &TracePoly| tp.coeffs.iter().map(Fraction::from).collect::<Vec<_>>();
    Ok(MomentBlocks {
        k,
        d,
        bond,
        classes: blocks.classes().to_vec(),
        t: (0..n).map(|i| (0..n).map(|j| Fraction::from(t.get(i, j))).collect()).collect(),
        t_left: (0..n).map(|i| poly(&blocks.left[g.class_of(i)])).collect(),
        t_right: (0..n).map(|i| poly(&blocks.right[g.class_of(i)])).collect(),
    })
}

/// `⟨T^ℓ|T^s|T^r⟩ / (d^{s+2} D)^k` for given trace data.
pub fn avg_moment_d2_traces(k: usize, d: usize, bond: usize, s: usize, a: &TraceData, b: &TraceData) -> Result<MomentValue> {
    let blocks = ClassBlocks::new(k, d, bond)?;
    let norm = q_pow(d as u64, (s + 2) * k) * q_pow(bond as u64, k);
    Ok(evaluate(&blocks, a, b, &norm, |bl, pa, pb| bl.chain(pa, pb, s), |bl, pa, pb| bl.chain(pa, pb, s)))
}

/// `(1/(dD)^k) Σ_{σ,τ} Wg(στ⁻¹, dD) tr[P_τᵀ A^{⊗k}] tr[P_σ B^{⊗k}] D^{#τ} D^{#σ}`.
pub fn avg_moment_d1_traces(k: usize, d: usize, bond: usize, a: &TraceData, b: &TraceData) -> Result<MomentValue> {
    let blocks = ClassBlocks::new(k, d, bond)?;
    let norm = q_pow((d * bond) as u64, k);
    Ok(evaluate(&blocks, a, b, &norm, |bl, pa, pb| bl.boundary(pa, pb), |bl, pa, pb| bl.boundary(pa, pb)))
}

fn evaluate(
    blocks: &ClassBlocks,
    a: &TraceData,
    b: &TraceData,
    norm: &Q,
    exact: impl Fn(&ClassBlocks, &[Q], &[Q]) -> Q,
    float: impl Fn(&ClassBlocks, &[C64], &[C64]) -> C64,
) -> MomentValue {
    let (ea, fa) = class_traces(a, blocks.classes());
    let (eb, fb) = class_traces(b, blocks.classes());
    match (ea, eb) {
        (Some(pa), Some(pb)) => MomentValue::Exact(exact(blocks, &pa, &pb) / norm),
        _ => MomentValue::Float(float(blocks, &fa, &fb) / norm.to_c64()),
    }
}

fn check_ops(d: usize, a: &Operator, b: &Operator) -> Result<()> {
    if a.dim() != d || b.dim() != d {
        return Err(Error::DimensionMismatch(format!("operators of dimension {} and {} for d={d}", a.dim(), b.dim())));
    }
    Ok(())
}

/// Averaged `k`-th moment of the chain correlation with `s` middle units.
pub fn avg_moment_d2(k: usize, d: usize, bond: usize, s: usize, a: &Operator, b: &Operator) -> Result<MomentResult> {
    check_ops(d, a, b)?;
    let v = avg_moment_d2_traces(k, d, bond, s, &a.trace_powers(k), &b.trace_powers(k))?;
    Ok(MomentResult::new(MomentKind::MpsD2, k, d, bond, Some(s), a.label(), b.label(), v))
}

/// Averaged `k`-th moment of the boundary correlation.
pub fn avg_moment_d1(k: usize, d: usize, bond: usize, a: &Operator, b: &Operator) -> Result<MomentResult> {
    check_ops(d, a, b)?;
    let v = avg_moment_d1_traces(k, d, bond, &a.trace_powers(k), &b.trace_powers(k))?;
    Ok(MomentResult::new(MomentKind::MpsD1, k, d, bond, None, a.label(), b.label(), v))
}

/// `⟨T^ℓ|T^s|T^r⟩` through the full permutation-indexed blocks. Slow; used
/// to cross-check the class-reduced route.
pub fn chain_full(k: usize, d: usize, bond: usize, s: usize, a: &TraceData, b: &TraceData) -> Result<Q> {
    let t = t_matrix(k, d, bond)?;
    let blocks = ClassBlocks::new(k, d, bond)?;
    let (Some(pa), Some(pb)) = (class_traces(a, blocks.classes()).0, class_traces(b, blocks.classes()).0) else {
        return Err(Error::Unsupported("full route needs exact trace data".into()));
    };
    let g = &blocks.setup.g;
    let n = g.order();
    let mut u: Vec<Q> = (0..n).map(|i| blocks.right[g.class_of(i)].eval(&pb)).collect();
    for _ in 0..s {
        u = t.mul_vec(&u);
    }
    Ok((0..n).map(|i| blocks.left[g.class_of(i)].eval(&pa) * &u[i]).sum())
}

/// `1/(d^{s+2} D)^k`, the chain normalization.
pub fn chain_norm(k: usize, d: usize, bond: usize, s: usize) -> Q {
    Q::one() / (q_pow(d as u64, (s + 2) * k) * q_pow(bond as u64, k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::q_frac;

    #[test]
    fn degree_one_blocks() {
        let t = t_matrix(1, 3, 2).unwrap();
        assert_eq!(t.get(0, 0), &Q::from_integer(3.into()));
        let l = t_left(1, 3, 2).unwrap();
        assert_eq!(l[0].coeffs, vec![Q::from_integer(2.into())]);
        let r = t_right(1, 3, 2).unwrap();
        assert_eq!(r[0].coeffs, vec![Q::one()]);
    }

    #[test]
    fn degree_two_matrix_matches_closed_form() {
        let (d, bond) = (2i64, 3i64);
        let t = t_matrix(2, d as usize, bond as usize).unwrap();
        let den = d * d * bond * bond - 1;
        let scale = Q::from_integer((d * d).into());
        assert_eq!(t.get(0, 0) / &scale, Q::one());
        assert_eq!(t.get(0, 1) / &scale, q_frac(d * d * bond - bond, den));
        assert_eq!(t.get(1, 0) / &scale, Q::zero());
        assert_eq!(t.get(1, 1) / &scale, q_frac(bond * bond - 1, den));
    }

    #[test]
    fn identity_moments_are_one() {
        for k in 1..=3 {
            let id = TraceData::identity(2, k);
            for s in 0..=2 {
                assert_eq!(avg_moment_d2_traces(k, 2, 3, s, &id, &id).unwrap(), MomentValue::Exact(Q::one()));
            }
            assert_eq!(avg_moment_d1_traces(k, 2, 3, &id, &id).unwrap(), MomentValue::Exact(Q::one()));
        }
    }

    #[test]
    fn reduced_route_matches_full_route() {
        let z = Operator::pauli_z().trace_powers(3);
        let x = Operator::pauli_x().trace_powers(3);
        for s in 0..=2 {
            let full = chain_full(3, 2, 2, s, &z, &x).unwrap();
            let blocks = ClassBlocks::new(3, 2, 2).unwrap();
            let (pa, pb) = (class_traces(&z, blocks.classes()).0.unwrap(), class_traces(&x, blocks.classes()).0.unwrap());
            assert_eq!(blocks.chain(&pa, &pb, s), full);
        }
    }
}
