//! Disordered solvable MPS: transfer matrices, fixed points, the correlation
//! case split and direct evaluation of the `D₁`/`D₂` diagrams for concrete
//! unitaries.
//!
//! A unit is a unitary on `C^d ⊗ C^D` indexed `U[(i₁,a),(i₂,b)]`, physical
//! index first. Reduced bond matrices flow from a unit's input bond to its
//! output bond.

use serde::{Deserialize, Serialize};

use crate::densealg::{haar_unitary, kron, leading_eigs_matrix, partial_trace_first, CMat, ComplexTensor, RngStream, UnitaryMatrix, C64};
use crate::{Error, Result};

/// Which expression of the light-cone case analysis applies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CorrelationCase {
    ZeroEvenX,
    ZeroEvenR,
    ZeroInsideLightcone,
    /// Outside the two-dimensional light cone (PEPS only).
    ZeroVerticalCone,
    BoundaryD1,
    GenericD2 { s: usize },
}

impl CorrelationCase {
    pub fn is_zero(&self) -> bool {
        !matches!(self, CorrelationCase::BoundaryD1 | CorrelationCase::GenericD2 { .. })
    }
}

/// Case split for sites `x`, separation `r` and time `t`. `s = (r − 4t − 3)/2`
/// is the number of middle units in the generic chain.
pub fn classify(x: i64, r: i64, t: usize) -> CorrelationCase {
    let edge = 4 * t as i64 + 1;
    if x.rem_euclid(2) == 0 {
        CorrelationCase::ZeroEvenX
    } else if r.rem_euclid(2) == 0 {
        CorrelationCase::ZeroEvenR
    } else if r < edge {
        CorrelationCase::ZeroInsideLightcone
    } else if r == edge {
        CorrelationCase::BoundaryD1
    } else {
        CorrelationCase::GenericD2 { s: ((r - edge - 2) / 2) as usize }
    }
}

/// Sites and time of a two-point correlation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MpsGeometry {
    pub x: i64,
    pub r: i64,
    pub t: usize,
}

impl MpsGeometry {
    /// A geometry realizing the generic chain with `s` middle units.
    pub fn for_chain(s: usize, t: usize) -> Self {
        Self {
            x: 1,
            r: 4 * t as i64 + 3 + 2 * s as i64,
            t,
        }
    }

    pub fn case(&self) -> CorrelationCase {
        classify(self.x, self.r, self.t)
    }
}

/// Parameters of a random disordered solvable MPS.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MpsEnsembleSpec {
    pub d: usize,
    #[serde(rename = "D")]
    pub bond: usize,
    pub v: usize,
    pub geometry: MpsGeometry,
}

impl MpsEnsembleSpec {
    /// Units needed per sample: `s + 2` for the chain, one for the boundary case.
    pub fn units_needed(&self) -> Option<usize> {
        match self.geometry.case() {
            CorrelationCase::GenericD2 { s } => Some(s + 2),
            CorrelationCase::BoundaryD1 => Some(1),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 || self.bond == 0 {
            return Err(Error::Invalid("dimensions must be positive".into()));
        }
        if let Some(n) = self.units_needed() {
            if self.v < n {
                return Err(Error::Invalid(format!("block length v={} is shorter than the {n} units the diagram needs", self.v)));
            }
        }
        Ok(())
    }
}

/// A block of `v` independent units.
#[derive(Clone, Debug)]
pub struct DisorderedMps {
    d: usize,
    bond: usize,
    units: Vec<UnitaryMatrix>,
}

impl DisorderedMps {
    pub fn new(units: Vec<UnitaryMatrix>, d: usize, bond: usize) -> Result<Self> {
        if units.is_empty() {
            return Err(Error::Invalid("an MPS needs at least one unit".into()));
        }
        if let Some(u) = units.iter().find(|u| u.dim() != d * bond) {
            return Err(Error::DimensionMismatch(format!("unit of dimension {} for dD={}", u.dim(), d * bond)));
        }
        Ok(Self { d, bond, units })
    }

    /// `v` Haar units drawn from one stream.
    pub fn sample(d: usize, bond: usize, v: usize, rng: &mut RngStream) -> Self {
        let units = (0..v).map(|_| haar_unitary(d * bond, rng)).collect();
        Self { d, bond, units }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn bond(&self) -> usize {
        self.bond
    }

    pub fn v(&self) -> usize {
        self.units.len()
    }

    pub fn units(&self) -> &[UnitaryMatrix] {
        &self.units
    }
}

fn check_op(a: &CMat, d: usize) -> Result<()> {
    if a.shape() != (d, d) {
        return Err(Error::DimensionMismatch(format!("operator is {:?}, expected {d}x{d}", a.shape())));
    }
    Ok(())
}

/// `tr_phys[U (X ⊗ ρ) U†]`.
fn push(u: &CMat, x: &CMat, rho: &CMat, d: usize, bond: usize) -> CMat {
    partial_trace_first(&(u * kron(x, rho) * u.adjoint()), d, bond)
}

/// `tr[(B ⊗ I) U (I ⊗ ρ) U†]`.
fn close(u: &CMat, b: &CMat, rho: &CMat, d: usize, bond: usize) -> C64 {
    let inner = u * kron(&CMat::identity(d, d), rho) * u.adjoint();
    (kron(b, &CMat::identity(bond, bond)) * inner).trace()
}

/// Chain with `s` middle units: A enters unit 0, B is read off unit `s+1`.
/// Normalized by `d^{s+2} D` so that `A = B = I` gives 1.
pub fn correlation_d2(mps: &DisorderedMps, a: &CMat, b: &CMat, s: usize) -> Result<C64> {
    let (d, bond) = (mps.d, mps.bond);
    check_op(a, d)?;
    check_op(b, d)?;
    if mps.v() < s + 2 {
        return Err(Error::Invalid(format!("chain with s={s} needs {} units, block has {}", s + 2, mps.v())));
    }
    let units = &mps.units;
    let id_d = CMat::identity(d, d);
    let mut rho = push(units[0].matrix(), a, &CMat::identity(bond, bond), d, bond);
    for u in &units[1..=s] {
        rho = push(u.matrix(), &id_d, &rho, d, bond);
    }
    let value = close(units[s + 1].matrix(), b, &rho, d, bond);
    Ok(value / (d.pow(s as u32 + 2) * bond) as f64)
}

/// Both operators on one unit: `tr[(B ⊗ I) U (A ⊗ I) U†] / (dD)`.
pub fn correlation_d1(u: &UnitaryMatrix, a: &CMat, b: &CMat, d: usize, bond: usize) -> Result<C64> {
    check_op(a, d)?;
    check_op(b, d)?;
    if u.dim() != d * bond {
        return Err(Error::DimensionMismatch(format!("unit of dimension {} for dD={}", u.dim(), d * bond)));
    }
    let u = u.matrix();
    let id_b = CMat::identity(bond, bond);
    let value = (kron(b, &id_b) * u * kron(a, &id_b) * u.adjoint()).trace();
    Ok(value / (d * bond) as f64)
}

/// `E[(a,a'),(b,b')] = (1/d) Σ U[(i₁,a),(i₂,b)] conj(U[(i₁,a'),(i₂,b')])`.
pub fn transfer_matrix_mat(u: &CMat, d: usize, bond: usize) -> Result<CMat> {
    if u.nrows() != d * bond || u.ncols() != d * bond {
        return Err(Error::DimensionMismatch(format!("unit of dimension {} for dD={}", u.nrows(), d * bond)));
    }
    let n = bond * bond;
    let mut e = CMat::zeros(n, n);
    for a in 0..bond {
        for ap in 0..bond {
            for b in 0..bond {
                for bp in 0..bond {
                    let mut acc = C64::new(0.0, 0.0);
                    for i1 in 0..d {
                        for i2 in 0..d {
                            acc += u[(i1 * bond + a, i2 * bond + b)] * u[(i1 * bond + ap, i2 * bond + bp)].conj();
                        }
                    }
                    e[(a * bond + ap, b * bond + bp)] = acc / d as f64;
                }
            }
        }
    }
    Ok(e)
}

/// Transfer matrix as a tensor with legs `out` and `in` of dimension `D²`.
pub fn transfer_matrix(u: &UnitaryMatrix, d: usize, bond: usize) -> Result<ComplexTensor> {
    ComplexTensor::from_matrix(&transfer_matrix_mat(u.matrix(), d, bond)?, "out", "in")
}

/// `F = E_{v−1} ⋯ E_0`.
pub fn block_transfer_mat(mps: &DisorderedMps) -> CMat {
    let mut f = CMat::identity(mps.bond * mps.bond, mps.bond * mps.bond);
    for u in &mps.units {
        f = transfer_matrix_mat(u.matrix(), mps.d, mps.bond).expect("checked on construction") * f;
    }
    f
}

pub fn block_transfer(mps: &DisorderedMps) -> ComplexTensor {
    ComplexTensor::from_matrix(&block_transfer_mat(mps), "out", "in").expect("square")
}

/// Left and right fixed points `⟨L| = vec(I)ᵀ`, `|R⟩ = vec(I)`; `⟨L|R⟩ = D`.
pub fn fixed_points(bond: usize) -> (Vec<C64>, Vec<C64>) {
    let v: Vec<C64> = (0..bond * bond)
        .map(|i| if i / bond == i % bond { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) })
        .collect();
    (v.clone(), v)
}

/// Super-operator matrix of `ρ ↦ (1/d) tr_phys[U (X ⊗ ρ) U†]` on row-first
/// vectorized bond matrices.
fn insertion_in(u: &CMat, x: &CMat, d: usize, bond: usize) -> CMat {
    superop(bond, |rho| push(u, x, rho, d, bond) / C64::new(d as f64, 0.0))
}

/// Super-operator matrix of `ρ ↦ (1/d) tr_phys[(X ⊗ I) U (I ⊗ ρ) U†]`.
fn insertion_out(u: &CMat, x: &CMat, d: usize, bond: usize) -> CMat {
    let id_d = CMat::identity(d, d);
    let xi = kron(x, &CMat::identity(bond, bond));
    superop(bond, |rho| partial_trace_first(&(&xi * u * kron(&id_d, rho) * u.adjoint()), d, bond) / C64::new(d as f64, 0.0))
}

fn superop(bond: usize, f: impl Fn(&CMat) -> CMat) -> CMat {
    let n = bond * bond;
    let mut m = CMat::zeros(n, n);
    for col in 0..n {
        let mut e = CMat::zeros(bond, bond);
        e[(col / bond, col % bond)] = C64::new(1.0, 0.0);
        let img = f(&e);
        for row in 0..n {
            m[(row, col)] = img[(row / bond, row % bond)];
        }
    }
    m
}

/// One block with A inserted on unit 0 and B on unit `s+1`.
pub fn insertion_block(mps: &DisorderedMps, a: &CMat, b: &CMat, s: usize) -> Result<CMat> {
    let (d, bond) = (mps.d, mps.bond);
    check_op(a, d)?;
    check_op(b, d)?;
    if mps.v() < s + 2 {
        return Err(Error::Invalid(format!("chain with s={s} needs {} units, block has {}", s + 2, mps.v())));
    }
    let mut g = CMat::identity(bond * bond, bond * bond);
    for (j, u) in mps.units.iter().enumerate() {
        let u = u.matrix();
        let step = if j == 0 {
            insertion_in(u, a, d, bond)
        } else if j == s + 1 {
            insertion_out(u, b, d, bond)
        } else {
            transfer_matrix_mat(u, d, bond)?
        };
        g = step * g;
    }
    Ok(g)
}

/// Periodic chain of `w` blocks: `tr(G F^{w−1}) / tr(F^w)`.
pub fn finite_n_correlation(mps: &DisorderedMps, a: &CMat, b: &CMat, s: usize, w: usize) -> Result<C64> {
    if w == 0 {
        return Err(Error::Invalid("need at least one block".into()));
    }
    let g = insertion_block(mps, a, b, s)?;
    let f = block_transfer_mat(mps);
    let mut p = CMat::identity(f.nrows(), f.ncols());
    for _ in 1..w {
        p = &f * p;
    }
    Ok((&g * &p).trace() / (&f * &p).trace())
}

/// The two largest eigenvalues of `F` by magnitude.
pub fn leading_pair(mps: &DisorderedMps) -> Result<(C64, C64)> {
    let f = block_transfer_mat(mps);
    if f.nrows() == 1 {
        return Ok((f[(0, 0)], C64::new(0.0, 0.0)));
    }
    let eig = leading_eigs_matrix(&f, 2)?;
    Ok((eig[0], eig[1]))
}

/// Finite-chain convergence measured over all operator pairs of a basis.
#[derive(Clone, Debug, Serialize)]
pub struct Convergence {
    pub lambda2: f64,
    /// Fitted geometric ratio of the error.
    pub ratio: f64,
    /// `(w, error)` pairs used by the fit.
    pub errors: Vec<(usize, f64)>,
}

/// Fits the decay of `‖finite_n(w) − D₂‖` with the norm taken over every
/// pair `(A, B)` from `basis`. The error of a single pair oscillates when
/// `λ₂` is complex; the basis-wide norm decays cleanly.
///
/// Splitting `F = P + F'` with `P = |R⟩⟨L|/D` gives
/// `finite_n(w) − ⟨L|G|R⟩/D = (tr(G Qₘ) − tr(GP) tr(Q_w)) / (1 + tr(Q_w))`
/// with `Q_n = F'^n (I − P)` and `m = w − 1`, which keeps full relative
/// precision far below the unit roundoff.
pub fn convergence(mps: &DisorderedMps, basis: &[CMat], s: usize) -> Result<Convergence> {
    let (_, l2) = leading_pair(mps)?;
    let lambda2 = l2.norm();
    let f = block_transfer_mat(mps);
    let n = f.nrows();
    let (l, r) = fixed_points(mps.bond);
    let p = CMat::from_fn(n, n, |i, j| r[i] * l[j] / mps.bond as f64);
    let f_rest = &f - &p;
    let mut gs = Vec::with_capacity(basis.len() * basis.len());
    for a in basis {
        for b in basis {
            let g = insertion_block(mps, a, b, s)?;
            let limit = (&g * &p).trace();
            gs.push((g, limit));
        }
    }
    let w_max = if lambda2 > 0.0 { ((-250.0 * std::f64::consts::LN_10) / lambda2.ln()).ceil() as usize } else { 8 };
    let w_max = w_max.clamp(8, 400);
    let mut errors = Vec::with_capacity(w_max);
    let mut q = CMat::identity(n, n) - &p;
    for w in 1..=w_max {
        let next = &f_rest * &q;
        let tail = next.trace();
        let err2: f64 = gs
            .iter()
            .map(|(g, limit)| (((g * &q).trace() - limit * tail) / (1.0 + tail)).norm_sqr())
            .sum();
        errors.push((w, err2.sqrt()));
        q = next;
    }
    // fit on the asymptotic half of the window that is above underflow
    let usable: Vec<(usize, f64)> = errors.iter().copied().filter(|&(_, e)| e > 1e-280).collect();
    let tail = &usable[usable.len() / 2..];
    let ratio = if tail.len() < 2 {
        0.0
    } else {
        let n = tail.len() as f64;
        let mx = tail.iter().map(|&(w, _)| w as f64).sum::<f64>() / n;
        let my = tail.iter().map(|&(_, e)| e.ln()).sum::<f64>() / n;
        let sxy: f64 = tail.iter().map(|&(w, e)| (w as f64 - mx) * (e.ln() - my)).sum();
        let sxx: f64 = tail.iter().map(|&(w, _)| (w as f64 - mx).powi(2)).sum();
        (sxy / sxx).exp()
    };
    Ok(Convergence { lambda2, ratio, errors })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn case_split_examples() {
        assert_eq!(classify(1, 5, 1), CorrelationCase::BoundaryD1);
        assert_eq!(classify(2, 9, 1), CorrelationCase::ZeroEvenX);
        assert_eq!(classify(1, 9, 1), CorrelationCase::GenericD2 { s: 1 });
        assert_eq!(classify(1, 7, 1), CorrelationCase::GenericD2 { s: 0 });
        assert_eq!(classify(1, 8, 1), CorrelationCase::ZeroEvenR);
        assert_eq!(classify(1, 3, 1), CorrelationCase::ZeroInsideLightcone);
        assert_eq!(MpsGeometry::for_chain(2, 1).case(), CorrelationCase::GenericD2 { s: 2 });
    }

    #[test]
    fn identity_operators_give_one() {
        let mut rng = RngStream::new(1, 0);
        let mps = DisorderedMps::sample(2, 3, 4, &mut rng);
        let id = CMat::identity(2, 2);
        for s in 0..=2 {
            assert!((correlation_d2(&mps, &id, &id, s).unwrap() - 1.0).norm() < 1e-12);
        }
        assert!((correlation_d1(&mps.units()[0], &id, &id, 2, 3).unwrap() - 1.0).norm() < 1e-12);
        for w in 1..4 {
            assert!((finite_n_correlation(&mps, &id, &id, 1, w).unwrap() - 1.0).norm() < 1e-12);
        }
    }

    #[test]
    fn fixed_points_hold() {
        let mut rng = RngStream::new(2, 0);
        let mps = DisorderedMps::sample(2, 2, 3, &mut rng);
        let f = block_transfer_mat(&mps);
        let (l, r) = fixed_points(2);
        let r = nalgebra::DVector::from_vec(r);
        let l = nalgebra::DVector::from_vec(l);
        assert!((&f * &r - &r).norm() < 1e-12);
        assert!((f.transpose() * &l - &l).norm() < 1e-12);
    }

    #[test]
    fn convergence_errors_match_direct_evaluation() {
        let mps = DisorderedMps::sample(2, 2, 3, &mut RngStream::new(8, 0));
        let z = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![C64::new(1.0, 0.0), C64::new(-1.0, 0.0)]));
        let x = CMat::from_fn(2, 2, |i, j| C64::new((i != j) as u8 as f64, 0.0));
        let conv = convergence(&mps, &[z.clone(), x.clone()], 1).unwrap();
        let limit = |a: &CMat, b: &CMat| correlation_d2(&mps, a, b, 1).unwrap();
        for &(w, err) in conv.errors.iter().take(3) {
            let direct: f64 = [(&z, &z), (&z, &x), (&x, &z), (&x, &x)]
                .iter()
                .map(|(a, b)| (finite_n_correlation(&mps, a, b, 1, w).unwrap() - limit(a, b)).norm_sqr())
                .sum::<f64>()
                .sqrt();
            assert!((err - direct).abs() < 1e-12, "w={w}: {err} vs {direct}");
        }
        assert!((conv.ratio - conv.lambda2).abs() < 0.05 * conv.lambda2);
    }
}
