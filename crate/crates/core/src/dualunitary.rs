//! Dual-unitary gates: the qubit parameterization, the space-time reshuffle
//! check that works for any local dimension, and the maps `M±` that evolve a
//! local operator through the light cone.

use serde::{Deserialize, Serialize};

use crate::densealg::{haar_unitary, kron, max_abs, partial_trace_first, partial_trace_second, CMat, RngStream, UnitaryMatrix, C64};
use crate::operators::{matrix_from_pairs, matrix_to_pairs, Operator};
use crate::{Error, Result};

/// Residual bound for accepting a gate as dual-unitary.
pub const DUAL_TOLERANCE: f64 = 1e-10;

/// Max-norm deviations of `U U† = I` and of the reshuffled gate being unitary
/// from either side.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    pub temporal: f64,
    pub spatial_left: f64,
    pub spatial_right: f64,
}

impl Residuals {
    pub fn max(&self) -> f64 {
        self.temporal.max(self.spatial_left).max(self.spatial_right)
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.max() < tol
    }
}

/// Parameters of `exp(iφ) (u₊ ⊗ u₋) V(J) (v₋ ⊗ v₊)` with SU(2) factors.
#[derive(Clone, Debug)]
pub struct DualGateParams {
    pub phi: f64,
    pub j: f64,
    pub u_plus: CMat,
    pub u_minus: CMat,
    pub v_plus: CMat,
    pub v_minus: CMat,
}

fn random_su2(rng: &mut RngStream) -> CMat {
    let u = haar_unitary(2, rng).into_matrix();
    let det = u[(0, 0)] * u[(1, 1)] - u[(0, 1)] * u[(1, 0)];
    u * det.sqrt().inv()
}

impl DualGateParams {
    /// The origin of the family: `V(0)` with identity factors.
    pub fn origin() -> Self {
        let id = CMat::identity(2, 2);
        Self {
            phi: 0.0,
            j: 0.0,
            u_plus: id.clone(),
            u_minus: id.clone(),
            v_plus: id.clone(),
            v_minus: id,
        }
    }

    /// Haar SU(2) factors, `φ` uniform on `[0, 2π)` and `J` uniform on `[0, π/4]`.
    pub fn random(rng: &mut RngStream) -> Self {
        let phi = 2.0 * std::f64::consts::PI * rng.uniform();
        let j = std::f64::consts::FRAC_PI_4 * rng.uniform();
        Self {
            phi,
            j,
            u_plus: random_su2(rng),
            u_minus: random_su2(rng),
            v_plus: random_su2(rng),
            v_minus: random_su2(rng),
        }
    }

    fn validate(&self) -> Result<()> {
        for (name, m) in [("u+", &self.u_plus), ("u-", &self.u_minus), ("v+", &self.v_plus), ("v-", &self.v_minus)] {
            if m.shape() != (2, 2) {
                return Err(Error::DimensionMismatch(format!("{name} must be 2x2")));
            }
            let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
            let res = max_abs(&(m * m.adjoint() - CMat::identity(2, 2)));
            if res > 1e-12 || (det - C64::new(1.0, 0.0)).norm() > 1e-12 {
                return Err(Error::Invalid(format!("{name} is not in SU(2)")));
            }
        }
        Ok(())
    }
}

/// `V(J) = exp[−i(π/4 σx⊗σx + π/4 σy⊗σy + J σz⊗σz)]` in closed form:
/// `e^{−iJ}(|00⟩⟨00| + |11⟩⟨11|) − i e^{iJ}(|01⟩⟨10| + |10⟩⟨01|)`.
pub fn v_kernel(j: f64) -> CMat {
    let mut v = CMat::zeros(4, 4);
    let diag = C64::from_polar(1.0, -j);
    let off = C64::new(0.0, -1.0) * C64::from_polar(1.0, j);
    v[(0, 0)] = diag;
    v[(3, 3)] = diag;
    v[(1, 2)] = off;
    v[(2, 1)] = off;
    v
}

/// A gate on `C^d ⊗ C^d` together with its measured residuals.
#[derive(Clone, Debug)]
pub struct DualGate {
    d: usize,
    matrix: UnitaryMatrix,
    residuals: Residuals,
}

impl DualGate {
    /// Accepts a `d² × d²` matrix if all residuals are below [`DUAL_TOLERANCE`].
    pub fn new(matrix: CMat, d: usize) -> Result<Self> {
        let residuals = check_dual(&matrix, d)?;
        if !residuals.passes(DUAL_TOLERANCE) {
            return Err(Error::Invalid(format!("gate is not dual-unitary: {residuals:?}")));
        }
        Ok(Self {
            d,
            matrix: UnitaryMatrix::new(matrix)?,
            residuals,
        })
    }

    pub fn swap(d: usize) -> Self {
        Self::new(swap_matrix(d), d).expect("SWAP is dual-unitary")
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn matrix(&self) -> &CMat {
        self.matrix.matrix()
    }

    pub fn residuals(&self) -> Residuals {
        self.residuals
    }

    pub fn to_json(&self) -> GateJson {
        GateJson {
            d: self.d,
            matrix: matrix_to_pairs(self.matrix()),
            residuals: Some(self.residuals),
        }
    }

    pub fn from_json(json: &GateJson) -> Result<Self> {
        Self::new(matrix_from_pairs(&json.matrix)?, json.d)
    }
}

/// Gate exchange format: row-major `[re, im]` pairs plus the recorded residuals.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GateJson {
    pub d: usize,
    pub matrix: Vec<Vec<[f64; 2]>>,
    #[serde(default)]
    pub residuals: Option<Residuals>,
}

/// `exp(iφ) (u₊ ⊗ u₋) V(J) (v₋ ⊗ v₊)`.
pub fn build_d2(params: &DualGateParams) -> Result<DualGate> {
    params.validate()?;
    let m = kron(&params.u_plus, &params.u_minus) * v_kernel(params.j) * kron(&params.v_minus, &params.v_plus);
    DualGate::new(m * C64::from_polar(1.0, params.phi), 2)
}

pub fn swap_matrix(d: usize) -> CMat {
    CMat::from_fn(d * d, d * d, |r, c| {
        if r / d == c % d && r % d == c / d {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

pub fn cnot_matrix() -> CMat {
    let mut m = CMat::zeros(4, 4);
    for (r, c) in [(0, 0), (1, 1), (2, 3), (3, 2)] {
        m[(r, c)] = C64::new(1.0, 0.0);
    }
    m
}

/// Exchanges the roles of space and time: `Ũ[(k,l),(i,j)] = U[(j,l),(i,k)]`.
pub fn reshuffle(u: &CMat, d: usize) -> CMat {
    CMat::from_fn(d * d, d * d, |r, c| {
        let (k, l) = (r / d, r % d);
        let (i, j) = (c / d, c % d);
        u[(j * d + l, i * d + k)]
    })
}

/// Residuals of temporal and spatial unitarity for a `d² × d²` matrix.
pub fn check_dual(u: &CMat, d: usize) -> Result<Residuals> {
    if u.nrows() != d * d || u.ncols() != d * d {
        return Err(Error::DimensionMismatch(format!("gate is {}x{}, expected {0}x{0} for d={d}", u.nrows(), u.ncols())));
    }
    let id = CMat::identity(d * d, d * d);
    let r = reshuffle(u, d);
    Ok(Residuals {
        temporal: max_abs(&(u * u.adjoint() - &id)).max(max_abs(&(u.adjoint() * u - &id))),
        spatial_left: max_abs(&(&r * r.adjoint() - &id)),
        spatial_right: max_abs(&(r.adjoint() * &r - &id)),
    })
}

/// Infers `d` from a `d² × d²` matrix.
pub fn local_dimension(u: &CMat) -> Result<usize> {
    let n = u.nrows();
    let d = (n as f64).sqrt().round() as usize;
    if d * d != n || u.ncols() != n {
        return Err(Error::DimensionMismatch(format!("{}x{} is not d^2 x d^2", u.nrows(), u.ncols())));
    }
    Ok(d)
}

fn check_operator(a: &CMat, d: usize) -> Result<()> {
    if a.shape() != (d, d) {
        return Err(Error::DimensionMismatch(format!("operator is {:?}, gate acts on d={d}", a.shape())));
    }
    Ok(())
}

/// `M₊(a) = (1/d) tr₁[U† (a ⊗ I) U]`.
pub fn m_plus(a: &CMat, gate: &DualGate) -> Result<CMat> {
    let d = gate.d;
    check_operator(a, d)?;
    let u = gate.matrix();
    let inner = u.adjoint() * kron(a, &CMat::identity(d, d)) * u;
    Ok(partial_trace_first(&inner, d, d) / C64::new(d as f64, 0.0))
}

/// `M₋(a) = (1/d) tr₂[U† (I ⊗ a) U]`.
pub fn m_minus(a: &CMat, gate: &DualGate) -> Result<CMat> {
    let d = gate.d;
    check_operator(a, d)?;
    let u = gate.matrix();
    let inner = u.adjoint() * kron(&CMat::identity(d, d), a) * u;
    Ok(partial_trace_second(&inner, d, d) / C64::new(d as f64, 0.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    Plus,
    Minus,
}

/// Applies `M₊` or `M₋` `steps` times.
pub fn evolve_operator(a: &CMat, gate: &DualGate, steps: usize, direction: Direction) -> Result<CMat> {
    let mut out = a.clone();
    for _ in 0..steps {
        out = match direction {
            Direction::Plus => m_plus(&out, gate)?,
            Direction::Minus => m_minus(&out, gate)?,
        };
    }
    Ok(out)
}

/// Generalized Gell-Mann basis scaled so that `(1/d) tr(a^α† a^β) = δ_{αβ}`,
/// with `a⁰ = I`.
pub fn operator_basis(d: usize) -> Vec<CMat> {
    let scale = C64::new((d as f64 / 2.0).sqrt(), 0.0);
    let mut basis = vec![CMat::identity(d, d)];
    for i in 1..=d {
        for j in 1..=d {
            if i == j && i == d {
                continue;
            }
            let g = Operator::gell_mann(d, i, j).expect("label in range");
            basis.push(g.matrix() * scale);
        }
    }
    basis
}

/// Choi matrix `Σ_{ij} |i⟩⟨j| ⊗ M(|i⟩⟨j|)` of `M₊` or `M₋`.
pub fn choi_matrix(gate: &DualGate, direction: Direction) -> Result<CMat> {
    let d = gate.d;
    let mut choi = CMat::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            let mut e = CMat::zeros(d, d);
            e[(i, j)] = C64::new(1.0, 0.0);
            let img = evolve_operator(&e, gate, 1, direction)?;
            for a in 0..d {
                for b in 0..d {
                    choi[(i * d + a, j * d + b)] = img[(a, b)];
                }
            }
        }
    }
    Ok(choi)
}

/// Smallest eigenvalue of the (Hermitian part of the) Choi matrix.
pub fn choi_min_eigenvalue(gate: &DualGate, direction: Direction) -> Result<f64> {
    let c = choi_matrix(gate, direction)?;
    let h = (&c + c.adjoint()) * C64::new(0.5, 0.0);
    let eig = nalgebra::SymmetricEigen::new(h);
    Ok(eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn swap_passes_and_cnot_fails() {
        let r = check_dual(&swap_matrix(2), 2).unwrap();
        assert!(r.passes(1e-12));
        let c = check_dual(&cnot_matrix(), 2).unwrap();
        assert!(c.temporal < 1e-12);
        assert!(c.spatial_left > 0.5);
    }

    #[test]
    fn origin_gate_is_v0() {
        let g = build_d2(&DualGateParams::origin()).unwrap();
        assert!(max_abs(&(g.matrix() - v_kernel(0.0))) < 1e-15);
    }

    #[test]
    fn swap_map_is_identity() {
        let g = DualGate::swap(3);
        let mut rng = RngStream::new(3, 0);
        let a = CMat::from_fn(3, 3, |_, _| C64::new(rng.standard_normal(), rng.standard_normal()));
        assert!(max_abs(&(m_plus(&a, &g).unwrap() - &a)) < 1e-14);
        assert!(max_abs(&(m_minus(&a, &g).unwrap() - &a)) < 1e-14);
    }

    #[test]
    fn basis_is_orthonormal() {
        for d in 2..=4 {
            let b = operator_basis(d);
            assert_eq!(b.len(), d * d);
            for (x, a) in b.iter().enumerate() {
                for (y, c) in b.iter().enumerate() {
                    let ip = (a.adjoint() * c).trace() / C64::new(d as f64, 0.0);
                    let want = if x == y { 1.0 } else { 0.0 };
                    assert!((ip - C64::new(want, 0.0)).norm() < 1e-12);
                }
            }
        }
    }
}
