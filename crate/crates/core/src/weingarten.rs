//! Exact Weingarten calculus for the unitary group.
//!
//! `Wg(·, q)` is obtained by inverting the Gram element
//! `g = Σ_π q^{#(π)} π` inside the centre of the group algebra, written in the
//! basis of class sums. That system has one unknown per cycle type (11 at
//! `k = 6`) instead of one per permutation.
//!
//! For `k > q` the Gram matrix is singular. We then return the Moore–Penrose
//! inverse, which for this central self-adjoint element coincides with its
//! group inverse: invert `g` on the irreducible blocks where it is nonzero
//! and set the rest to zero. Other extensions exist; this is the one used
//! throughout the crate.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::densealg::{ComplexTensor, C64};
use crate::exact::{q_pow, q_to_f64, Fraction, RatMatrix, Q};
use crate::permgroup::{permuted_index, CycleType, Permutation, SymmetricGroup, MAX_DEGREE};
use crate::{Error, Result};

/// Largest degree with exact Weingarten values.
pub const MAX_WEINGARTEN_DEGREE: usize = 6;
/// Largest degree for which [`gram`] materializes the `k! × k!` matrix.
pub const MAX_GRAM_DEGREE: usize = 6;
const TWIRL_MAX_DEGREE: usize = 4;
/// Largest twirled operator, in entries.
pub const TWIRL_BUDGET: usize = 1 << 20;

/// `G[σ][τ] = q^{#(στ⁻¹)}`, indexed in enumeration order.
#[derive(Clone, Debug, PartialEq)]
pub struct GramMatrix {
    pub k: usize,
    pub q: u64,
    pub n: usize,
    pub entries: Vec<BigInt>,
}

impl GramMatrix {
    pub fn get(&self, sigma: usize, tau: usize) -> &BigInt {
        &self.entries[sigma * self.n + tau]
    }
}

pub fn gram(k: usize, q: u64) -> Result<GramMatrix> {
    if k == 0 || k > MAX_GRAM_DEGREE {
        return Err(Error::DegreeOutOfRange {
            degree: k,
            max: MAX_GRAM_DEGREE,
        });
    }
    let g = SymmetricGroup::new(k)?;
    let n = g.order();
    let powers: Vec<BigInt> = (0..=k).map(|c| num_traits::pow(BigInt::from(q), c)).collect();
    let mut entries = Vec::with_capacity(n * n);
    for s in 0..n {
        for t in 0..n {
            entries.push(powers[g.cycle_count(g.div(s, t))].clone());
        }
    }
    Ok(GramMatrix { k, q, n, entries })
}

/// Exact `Wg(·, q)` for one degree, one value per conjugacy class.
#[derive(Clone, Debug, PartialEq)]
pub struct WeingartenTable {
    k: usize,
    q: u64,
    classes: Vec<CycleType>,
    values: Vec<Q>,
    singular: bool,
}

/// Structure constants of the class-sum basis:
/// `C_μ C_ν = Σ_λ c[λ][μ][ν] C_λ`.
fn class_structure_constants(g: &SymmetricGroup) -> Vec<Vec<Vec<u64>>> {
    let p = g.class_count();
    let mut c = vec![vec![vec![0u64; p]; p]; p];
    for (lambda, row) in c.iter_mut().enumerate() {
        let z = g.class_rep(lambda);
        for x in 0..g.order() {
            let y = g.mul(g.inv(x), z);
            row[g.class_of(x)][g.class_of(y)] += 1;
        }
    }
    c
}

impl WeingartenTable {
    pub fn new(k: usize, q: u64) -> Result<Self> {
        if k == 0 || k > MAX_WEINGARTEN_DEGREE {
            return Err(Error::DegreeOutOfRange {
                degree: k,
                max: MAX_WEINGARTEN_DEGREE,
            });
        }
        if q == 0 {
            return Err(Error::Invalid("dimension q must be positive".into()));
        }
        let g = SymmetricGroup::new(k)?;
        let classes = g.classes().to_vec();
        let p = classes.len();
        let c = class_structure_constants(&g);
        // multiplication by the Gram element in the class-sum basis
        let mut m = RatMatrix::zeros(p, p);
        for lambda in 0..p {
            for nu in 0..p {
                let mut acc = Q::zero();
                for (mu, class) in classes.iter().enumerate() {
                    let count = c[lambda][mu][nu];
                    if count != 0 {
                        acc += q_pow(q, class.len()) * Q::from_integer(BigInt::from(count));
                    }
                }
                m.set(lambda, nu, acc);
            }
        }
        let mut unit = vec![Q::zero(); p];
        unit[0] = Q::one();
        if let Some(values) = m.solve(&unit) {
            return Ok(Self {
                k,
                q,
                classes,
                values,
                singular: false,
            });
        }
        let values = group_inverse_solve(&m, &unit)?;
        Ok(Self {
            k,
            q,
            classes,
            values,
            singular: true,
        })
    }

    pub fn degree(&self) -> usize {
        self.k
    }

    pub fn dimension(&self) -> u64 {
        self.q
    }

    /// True when `k > q` and the values come from the pseudo-inverse.
    pub fn is_pseudo_inverse(&self) -> bool {
        self.singular
    }

    pub fn classes(&self) -> &[CycleType] {
        &self.classes
    }

    /// Value on the class with the given ordinal (see [`crate::permgroup::partitions`]).
    pub fn class_value(&self, class: usize) -> &Q {
        &self.values[class]
    }

    pub fn values(&self) -> &[Q] {
        &self.values
    }

    pub fn value_of_type(&self, ct: &CycleType) -> Option<&Q> {
        self.classes.iter().position(|c| c == ct).map(|i| &self.values[i])
    }

    pub fn value(&self, pi: &Permutation) -> Result<&Q> {
        if pi.degree() != self.k {
            return Err(Error::DegreeMismatch(pi.degree(), self.k));
        }
        Ok(self.value_of_type(&pi.cycle_type()).expect("all cycle types present"))
    }

    pub fn to_json(&self) -> WeingartenJson {
        WeingartenJson {
            k: self.k,
            q: self.q,
            pseudo_inverse: self.singular,
            entries: self
                .classes
                .iter()
                .zip(&self.values)
                .map(|(c, v)| WeingartenEntry {
                    cycle_type: c.clone(),
                    value: Fraction::from(v),
                    float: q_to_f64(v),
                })
                .collect(),
        }
    }
}

/// Serialized table: `{k, q, entries: [{cycle_type, numerator, denominator}]}`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct WeingartenJson {
    pub k: usize,
    pub q: u64,
    pub pseudo_inverse: bool,
    pub entries: Vec<WeingartenEntry>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct WeingartenEntry {
    pub cycle_type: CycleType,
    #[serde(flatten)]
    pub value: Fraction,
    pub float: f64,
}

/// Solves `L w = u` with the group inverse of a diagonalizable `L`:
/// with `P₀` the projector onto `ker L` along `range L`, the system
/// `(L + P₀) w = u − P₀u` is regular and its solution is `L^# u`.
fn group_inverse_solve(l: &RatMatrix, u: &[Q]) -> Result<Vec<Q>> {
    let p = l.rows;
    let range = l.column_space();
    let kernel = l.null_space();
    if range.len() + kernel.len() != p {
        return Err(Error::Invalid("Gram operator is not diagonalizable".into()));
    }
    let mut basis = RatMatrix::zeros(p, p);
    for (j, v) in range.iter().chain(kernel.iter()).enumerate() {
        for (i, x) in v.iter().enumerate() {
            basis.set(i, j, x.clone());
        }
    }
    let inv = basis
        .inverse()
        .ok_or_else(|| Error::Invalid("range and kernel of the Gram operator overlap".into()))?;
    let mut select = RatMatrix::zeros(p, p);
    for j in range.len()..p {
        select.set(j, j, Q::one());
    }
    let p0 = basis.mul(&select).mul(&inv);
    let p0u = p0.mul_vec(u);
    let rhs: Vec<Q> = u.iter().zip(&p0u).map(|(a, b)| a - b).collect();
    let mut shifted = l.clone();
    for (x, y) in shifted.data.iter_mut().zip(&p0.data) {
        *x += y;
    }
    shifted
        .solve(&rhs)
        .ok_or_else(|| Error::Invalid("shifted Gram operator is singular".into()))
}

/// Exact `Wg(π, q)` for a permutation of degree `k`.
pub fn weingarten(pi: &Permutation, q: u64) -> Result<Q> {
    let table = WeingartenTable::new(pi.degree(), q)?;
    Ok(table.value(pi)?.clone())
}

/// Exact `Wg` on a cycle type.
pub fn weingarten_of_type(ct: &CycleType, q: u64) -> Result<Q> {
    let table = WeingartenTable::new(ct.degree(), q)?;
    Ok(table.value_of_type(ct).expect("valid cycle type").clone())
}

/// The full `k! × k!` matrix `W[σ][τ] = Wg(στ⁻¹, q)`.
pub fn weingarten_matrix(table: &WeingartenTable) -> Result<RatMatrix> {
    let g = SymmetricGroup::new(table.degree())?;
    let n = g.order();
    let mut w = RatMatrix::zeros(n, n);
    for s in 0..n {
        for t in 0..n {
            w.set(s, t, table.class_value(g.class_of(g.div(s, t))).clone());
        }
    }
    Ok(w)
}

/// The `k`-fold twirl `Σ_{σ,τ} Wg(στ⁻¹, q) P_σ tr[X P_τᵀ]` of an operator
/// on `(C^q)^{⊗k}` given as a two-leg tensor `(row, col)`.
pub fn twirl(x: &ComplexTensor, k: usize, q: usize) -> Result<ComplexTensor> {
    if k == 0 || k > TWIRL_MAX_DEGREE {
        return Err(Error::DegreeOutOfRange {
            degree: k,
            max: TWIRL_MAX_DEGREE,
        });
    }
    let dim = q.pow(k as u32);
    if dim * dim > TWIRL_BUDGET {
        return Err(Error::Budget(format!("twirl on dimension {dim} exceeds budget")));
    }
    if x.legs().len() != 2 || x.dims() != [dim, dim] {
        return Err(Error::DimensionMismatch(format!("expected a {dim}x{dim} operator, got {:?}", x.dims())));
    }
    let g = SymmetricGroup::new(k)?;
    let table = WeingartenTable::new(k, q as u64)?;
    let wg: Vec<f64> = table.values().iter().map(q_to_f64).collect();
    let data = x.data();
    let mut scratch = [0usize; MAX_DEGREE];
    let perm_rows: Vec<Vec<usize>> = g
        .elements()
        .iter()
        .map(|p| (0..dim).map(|col| permuted_index(p, col, q, &mut scratch)).collect())
        .collect();
    // c_τ = tr[X P_τᵀ] = Σ_col X[P_τ(col)][col]
    let c: Vec<C64> = perm_rows
        .iter()
        .map(|rows| rows.iter().enumerate().map(|(col, &row)| data[row * dim + col]).sum())
        .collect();
    let mut out = vec![C64::new(0.0, 0.0); dim * dim];
    for s in 0..g.order() {
        let a: C64 = (0..g.order()).map(|t| c[t] * wg[g.class_of(g.div(s, t))]).sum();
        for (col, &row) in perm_rows[s].iter().enumerate() {
            out[row * dim + col] += a;
        }
    }
    ComplexTensor::new(vec![("row", dim), ("col", dim)], out)
}
