//! Dense complex tensors with named legs, network contraction, Haar-random
//! unitaries and leading eigenvalues.
//!
//! Data is stored row-major over the leg list. Operators are vectorized row
//! index first: `vec(|i⟩⟨j|) = |i⟩ ⊗ |j⟩`.

use std::collections::HashMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::{Error, Result};

pub type C64 = Complex64;
/// Dense complex matrix used for operators and unitaries.
pub type CMat = DMatrix<C64>;

const ZERO: C64 = C64::new(0.0, 0.0);
const UNITARY_TOL: f64 = 1e-12;
const MAX_EIG_DIM: usize = 4096;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Leg {
    pub name: String,
    pub dim: usize,
}

/// Dense multi-leg complex array with unique leg names.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexTensor {
    legs: Vec<Leg>,
    data: Vec<C64>,
}

impl ComplexTensor {
    pub fn new<S: Into<String>>(legs: Vec<(S, usize)>, data: Vec<C64>) -> Result<Self> {
        let legs: Vec<Leg> = legs.into_iter().map(|(n, dim)| Leg { name: n.into(), dim }).collect();
        for (i, leg) in legs.iter().enumerate() {
            if legs[..i].iter().any(|l| l.name == leg.name) {
                return Err(Error::Invalid(format!("duplicate leg name {}", leg.name)));
            }
        }
        let size: usize = legs.iter().map(|l| l.dim).product();
        if size != data.len() {
            return Err(Error::DimensionMismatch(format!(
                "legs describe {size} entries, data has {}",
                data.len()
            )));
        }
        Ok(Self { legs, data })
    }

    pub fn zeros<S: Into<String>>(legs: Vec<(S, usize)>) -> Result<Self> {
        let size = legs.iter().map(|l| l.1).product();
        Self::new(legs, vec![ZERO; size])
    }

    /// Wraps a matrix as a two-leg tensor `(row, col)`.
    pub fn from_matrix(m: &CMat, row: &str, col: &str) -> Result<Self> {
        let (r, c) = m.shape();
        let mut data = Vec::with_capacity(r * c);
        for i in 0..r {
            for j in 0..c {
                data.push(m[(i, j)]);
            }
        }
        Self::new(vec![(row, r), (col, c)], data)
    }

    /// Wraps a matrix whose row and column spaces are tensor products of the
    /// given legs (slowest leg first).
    pub fn from_grouped_matrix(m: &CMat, rows: &[(&str, usize)], cols: &[(&str, usize)]) -> Result<Self> {
        let r: usize = rows.iter().map(|l| l.1).product();
        let c: usize = cols.iter().map(|l| l.1).product();
        if m.shape() != (r, c) {
            return Err(Error::DimensionMismatch(format!("matrix {:?} vs legs {r}x{c}", m.shape())));
        }
        let mut data = Vec::with_capacity(r * c);
        for i in 0..r {
            for j in 0..c {
                data.push(m[(i, j)]);
            }
        }
        let legs = rows.iter().chain(cols.iter()).map(|&(n, d)| (n, d)).collect();
        Self::new(legs, data)
    }

    pub fn legs(&self) -> &[Leg] {
        &self.legs
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<C64> {
        self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.legs.iter().map(|l| l.dim).collect()
    }

    pub fn leg_index(&self, name: &str) -> Result<usize> {
        self.legs
            .iter()
            .position(|l| l.name == name)
            .ok_or_else(|| Error::Invalid(format!("no leg named {name}")))
    }

    /// Reorders the legs to `order` (every leg named exactly once).
    pub fn permuted(&self, order: &[&str]) -> Result<Self> {
        if order.len() != self.legs.len() {
            return Err(Error::Invalid(format!("permutation lists {} of {} legs", order.len(), self.legs.len())));
        }
        let perm: Vec<usize> = order.iter().map(|n| self.leg_index(n)).collect::<Result<_>>()?;
        let data = permute_axes(&self.data, &self.dims(), &perm);
        let legs = perm.iter().map(|&i| self.legs[i].clone()).collect();
        Ok(Self { legs, data })
    }

    pub fn renamed(mut self, from: &str, to: &str) -> Result<Self> {
        let i = self.leg_index(from)?;
        if from != to && self.legs.iter().any(|l| l.name == to) {
            return Err(Error::Invalid(format!("leg {to} already exists")));
        }
        self.legs[i].name = to.to_string();
        Ok(self)
    }

    /// Flattens into a matrix with the given row legs and column legs.
    pub fn to_matrix(&self, rows: &[&str], cols: &[&str]) -> Result<CMat> {
        let order: Vec<&str> = rows.iter().chain(cols.iter()).copied().collect();
        let t = self.permuted(&order)?;
        let r: usize = t.legs[..rows.len()].iter().map(|l| l.dim).product();
        let c: usize = t.legs[rows.len()..].iter().map(|l| l.dim).product();
        Ok(CMat::from_row_slice(r, c, &t.data))
    }

    pub fn scaled(mut self, c: C64) -> Self {
        self.data.iter_mut().for_each(|x| *x *= c);
        self
    }

    pub fn frobenius_norm(&self) -> f64 {
        pairwise_sum_f64(&self.data.iter().map(|x| x.norm_sqr()).collect::<Vec<_>>()).sqrt()
    }

    /// Largest entrywise deviation after aligning `other` to this leg order.
    pub fn max_abs_diff(&self, other: &ComplexTensor) -> Result<f64> {
        let names: Vec<&str> = self.legs.iter().map(|l| l.name.as_str()).collect();
        let aligned = other.permuted(&names)?;
        if aligned.dims() != self.dims() {
            return Err(Error::DimensionMismatch("tensors have different shapes".into()));
        }
        Ok(self.data.iter().zip(&aligned.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
    }
}

/// Row-major strides for `dims`.
pub(crate) fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * dims[i + 1];
    }
    s
}

/// Transposes row-major data so that new axis `i` is old axis `perm[i]`.
pub(crate) fn permute_axes(data: &[C64], dims: &[usize], perm: &[usize]) -> Vec<C64> {
    if perm.iter().enumerate().all(|(i, &p)| i == p) || dims.is_empty() {
        return data.to_vec();
    }
    // fuse runs of axes that stay adjacent and in order
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for &p in perm {
        match groups.last_mut() {
            Some(g) if *g.last().unwrap() + 1 == p => g.push(p),
            _ => groups.push(vec![p]),
        }
    }
    if groups.len() < perm.len() {
        let mut order: Vec<usize> = (0..groups.len()).collect();
        order.sort_by_key(|&g| groups[g][0]);
        let fused_dims: Vec<usize> = order.iter().map(|&g| groups[g].iter().map(|&a| dims[a]).product()).collect();
        let mut rank = vec![0; groups.len()];
        for (r, &g) in order.iter().enumerate() {
            rank[g] = r;
        }
        return permute_fused(data, &fused_dims, &rank);
    }
    permute_fused(data, dims, perm)
}

fn permute_fused(data: &[C64], dims: &[usize], perm: &[usize]) -> Vec<C64> {
    let n = dims.len();
    let old = strides(dims);
    let new_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
    let src_stride: Vec<usize> = perm.iter().map(|&p| old[p]).collect();
    let mut out = Vec::with_capacity(data.len());
    let inner = new_dims[n - 1];
    let inner_stride = src_stride[n - 1];
    let mut idx = vec![0usize; n - 1];
    let mut base = 0usize;
    loop {
        let mut pos = base;
        for _ in 0..inner {
            out.push(data[pos]);
            pos += inner_stride;
        }
        // odometer over the outer axes
        let mut ax = n - 1;
        loop {
            if ax == 0 {
                return out;
            }
            ax -= 1;
            idx[ax] += 1;
            base += src_stride[ax];
            if idx[ax] < new_dims[ax] {
                break;
            }
            base -= src_stride[ax] * new_dims[ax];
            idx[ax] = 0;
        }
    }
}

/// `C (m×n) = A (m×s) · B (s×n)`, row-major.
pub(crate) fn matmul(a: &[C64], b: &[C64], m: usize, s: usize, n: usize) -> Vec<C64> {
    let mut c = vec![ZERO; m * n];
    for i in 0..m {
        let row = &mut c[i * n..(i + 1) * n];
        for l in 0..s {
            let x = a[i * s + l];
            if x == ZERO {
                continue;
            }
            let brow = &b[l * n..(l + 1) * n];
            for (cj, bj) in row.iter_mut().zip(brow) {
                *cj += x * bj;
            }
        }
    }
    c
}

/// Sums with pairwise (cascade) accumulation.
pub fn pairwise_sum(xs: &[C64]) -> C64 {
    if xs.len() <= 32 {
        return xs.iter().fold(ZERO, |acc, x| acc + x);
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

pub fn pairwise_sum_f64(xs: &[f64]) -> f64 {
    if xs.len() <= 32 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum_f64(&xs[..mid]) + pairwise_sum_f64(&xs[mid..])
}

/// Labelled working tensor used inside [`contract`].
struct Work {
    labels: Vec<usize>,
    dims: Vec<usize>,
    data: Vec<C64>,
}

impl Work {
    fn size(&self) -> usize {
        self.dims.iter().product()
    }

    fn permute(self, order: &[usize]) -> Work {
        let perm: Vec<usize> = order
            .iter()
            .map(|l| self.labels.iter().position(|x| x == l).expect("label present"))
            .collect();
        let data = permute_axes(&self.data, &self.dims, &perm);
        Work {
            labels: order.to_vec(),
            dims: perm.iter().map(|&p| self.dims[p]).collect(),
            data,
        }
    }

    /// Sums over every label that appears twice.
    fn self_trace(self) -> Work {
        let mut repeated = Vec::new();
        for (i, l) in self.labels.iter().enumerate() {
            if self.labels[i + 1..].contains(l) {
                repeated.push(*l);
            }
        }
        if repeated.is_empty() {
            return self;
        }
        let free: Vec<usize> = self.labels.iter().copied().filter(|l| !repeated.contains(l)).collect();
        // order: free labels, then each repeated label twice in a row
        let mut axes: Vec<usize> = Vec::new();
        let mut used = vec![false; self.labels.len()];
        for l in &free {
            let p = self.labels.iter().position(|x| x == l).unwrap();
            axes.push(p);
            used[p] = true;
        }
        for l in &repeated {
            for (p, x) in self.labels.iter().enumerate() {
                if x == l && !used[p] {
                    axes.push(p);
                    used[p] = true;
                }
            }
        }
        let data = permute_axes(&self.data, &self.dims, &axes);
        let free_dims: Vec<usize> = free
            .iter()
            .map(|l| self.dims[self.labels.iter().position(|x| x == l).unwrap()])
            .collect();
        let traced_dims: Vec<usize> = repeated
            .iter()
            .map(|l| self.dims[self.labels.iter().position(|x| x == l).unwrap()])
            .collect();
        let block: usize = traced_dims.iter().map(|d| d * d).product();
        let nfree: usize = free_dims.iter().product();
        // diagonal offsets inside one block
        let mut diag = vec![0usize];
        let mut stride = block;
        for &d in &traced_dims {
            stride /= d * d;
            let step = stride * (d + 1);
            diag = diag.iter().flat_map(|&o| (0..d).map(move |i| o + i * step)).collect();
        }
        let out = (0..nfree)
            .map(|f| pairwise_sum(&diag.iter().map(|&o| data[f * block + o]).collect::<Vec<_>>()))
            .collect();
        Work {
            labels: free,
            dims: free_dims,
            data: out,
        }
    }
}

fn contract_pair(a: Work, b: Work) -> Work {
    let shared: Vec<usize> = a.labels.iter().copied().filter(|l| b.labels.contains(l)).collect();
    let free_a: Vec<usize> = a.labels.iter().copied().filter(|l| !shared.contains(l)).collect();
    let free_b: Vec<usize> = b.labels.iter().copied().filter(|l| !shared.contains(l)).collect();
    let order_a: Vec<usize> = free_a.iter().chain(&shared).copied().collect();
    let order_b: Vec<usize> = shared.iter().chain(&free_b).copied().collect();
    let a = a.permute(&order_a);
    let b = b.permute(&order_b);
    let m: usize = a.dims[..free_a.len()].iter().product();
    let s: usize = a.dims[free_a.len()..].iter().product();
    let n: usize = b.dims[shared.len()..].iter().product();
    let data = matmul(&a.data, &b.data, m, s, n);
    let dims = a.dims[..free_a.len()].iter().chain(&b.dims[shared.len()..]).copied().collect();
    Work {
        labels: free_a.into_iter().chain(free_b).collect(),
        dims,
        data,
    }
}

/// A leg of one tensor in a network: `(tensor position, leg name)`.
pub type LegRef<'a> = (usize, &'a str);

/// Contracts a tensor network.
///
/// `pairings` joins legs (a leg may be paired with another leg of the same
/// tensor, which takes a partial trace). `open` lists every unpaired leg once,
/// with the name it gets in the result; the result legs follow that order.
/// The pairwise order is chosen greedily by smallest intermediate.
pub fn contract(tensors: &[&ComplexTensor], pairings: &[(LegRef, LegRef)], open: &[(LegRef, &str)]) -> Result<ComplexTensor> {
    if tensors.is_empty() {
        return Err(Error::Invalid("empty network".into()));
    }
    let mut label_of: HashMap<(usize, &str), usize> = HashMap::new();
    let mut next = 0usize;
    let find_dim = |(t, leg): LegRef| -> Result<usize> {
        let tensor = tensors.get(t).ok_or_else(|| Error::Invalid(format!("no tensor {t}")))?;
        Ok(tensor.legs[tensor.leg_index(leg)?].dim)
    };
    for &(x, y) in pairings {
        let (dx, dy) = (find_dim(x)?, find_dim(y)?);
        if dx != dy {
            return Err(Error::DimensionMismatch(format!("{x:?} has dim {dx}, {y:?} has dim {dy}")));
        }
        if x == y || label_of.contains_key(&x) || label_of.contains_key(&y) {
            return Err(Error::Invalid(format!("leg paired twice in {x:?}/{y:?}")));
        }
        label_of.insert(x, next);
        label_of.insert(y, next);
        next += 1;
    }
    let mut open_labels = Vec::with_capacity(open.len());
    for &(r, _) in open {
        find_dim(r)?;
        if label_of.contains_key(&r) {
            return Err(Error::Invalid(format!("open leg {r:?} is also paired or listed twice")));
        }
        label_of.insert(r, next);
        open_labels.push(next);
        next += 1;
    }
    let mut work: Vec<Option<Work>> = Vec::with_capacity(tensors.len());
    for (t, tensor) in tensors.iter().enumerate() {
        let mut labels = Vec::with_capacity(tensor.legs.len());
        for leg in &tensor.legs {
            let label = label_of
                .get(&(t, leg.name.as_str()))
                .ok_or_else(|| Error::Invalid(format!("leg ({t}, {}) is neither paired nor declared open", leg.name)))?;
            labels.push(*label);
        }
        let w = Work {
            labels,
            dims: tensor.dims(),
            data: tensor.data.clone(),
        };
        work.push(Some(w.self_trace()));
    }
    while work.iter().filter(|w| w.is_some()).count() > 1 {
        let live: Vec<usize> = (0..work.len()).filter(|&i| work[i].is_some()).collect();
        let mut best: Option<(bool, usize, usize, usize)> = None;
        for (x, &i) in live.iter().enumerate() {
            for &j in &live[x + 1..] {
                let (a, b) = (work[i].as_ref().unwrap(), work[j].as_ref().unwrap());
                let shares = a.labels.iter().any(|l| b.labels.contains(l));
                let mut size = 1usize;
                for (l, d) in a.labels.iter().zip(&a.dims).chain(b.labels.iter().zip(&b.dims)) {
                    if !(a.labels.contains(l) && b.labels.contains(l)) {
                        size = size.saturating_mul(*d);
                    }
                }
                let key = (!shares, size, i, j);
                if best.is_none_or(|b| (key.0, key.1) < (b.0, b.1)) {
                    best = Some(key);
                }
            }
        }
        let (_, _, i, j) = best.expect("at least two live tensors");
        let a = work[i].take().unwrap();
        let b = work[j].take().unwrap();
        work[i] = Some(contract_pair(a, b));
    }
    let last = work.into_iter().flatten().next().unwrap();
    let last = if last.labels.is_empty() { last } else { last.permute(&open_labels) };
    let legs = open
        .iter()
        .zip(&last.dims)
        .map(|(&(_, name), &d)| (name.to_string(), d))
        .collect();
    debug_assert_eq!(last.size(), last.data.len());
    ComplexTensor::new(legs, last.data)
}

/// Seeded ChaCha stream; `(seed, stream)` fixes every draw.
#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    stream: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { seed, stream, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    pub fn standard_normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.rng)
    }

    /// Uniform in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

/// A square matrix checked to be unitary on construction.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryMatrix {
    m: CMat,
}

impl UnitaryMatrix {
    pub fn new(m: CMat) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch(format!("unitary must be square, got {:?}", m.shape())));
        }
        let r = unitarity_residual(&m);
        if r >= UNITARY_TOL * (m.nrows().max(1) as f64).sqrt().max(1.0) {
            return Err(Error::Invalid(format!("matrix is not unitary (residual {r:.3e})")));
        }
        Ok(Self { m })
    }

    pub fn identity(q: usize) -> Self {
        Self { m: CMat::identity(q, q) }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.m
    }

    pub fn into_matrix(self) -> CMat {
        self.m
    }
}

/// `max |U U† − I|` and `max |U† U − I|`, whichever is larger.
pub fn unitarity_residual(m: &CMat) -> f64 {
    let n = m.nrows();
    let id = CMat::identity(n, n);
    let a = max_abs(&(m * m.adjoint() - &id));
    let b = max_abs(&(m.adjoint() * m - id));
    a.max(b)
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

/// Haar-random unitary: complex Ginibre matrix, QR, then the phases of the
/// triangular factor's diagonal are moved into `Q`.
pub fn haar_unitary(q: usize, rng: &mut RngStream) -> UnitaryMatrix {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let g = CMat::from_fn(q, q, |_, _| {
        let re = rng.standard_normal();
        let im = rng.standard_normal();
        C64::new(re * scale, im * scale)
    });
    let qr = g.qr();
    let r = qr.r();
    let mut u = qr.q();
    for j in 0..q {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..q {
            u[(i, j)] *= phase;
        }
    }
    UnitaryMatrix { m: u }
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    CMat::from_fn(ar * br, ac * bc, |i, j| a[(i / br, j / bc)] * b[(i % br, j % bc)])
}

/// `tr_1` of a matrix on `C^{d1} ⊗ C^{d2}`.
pub fn partial_trace_first(m: &CMat, d1: usize, d2: usize) -> CMat {
    CMat::from_fn(d2, d2, |i, j| (0..d1).map(|a| m[(a * d2 + i, a * d2 + j)]).sum())
}

/// `tr_2` of a matrix on `C^{d1} ⊗ C^{d2}`.
pub fn partial_trace_second(m: &CMat, d1: usize, d2: usize) -> CMat {
    CMat::from_fn(d1, d1, |i, j| (0..d2).map(|b| m[(i * d2 + b, j * d2 + b)]).sum())
}

/// Row-major vectorization.
pub fn vectorize(m: &CMat) -> Vec<C64> {
    let (r, c) = m.shape();
    (0..r).flat_map(|i| (0..c).map(move |j| (i, j))).map(|(i, j)| m[(i, j)]).collect()
}

/// Inverse of [`vectorize`] for a square matrix.
pub fn unvectorize(v: &[C64], n: usize) -> CMat {
    CMat::from_row_slice(n, n, v)
}

/// The `count` eigenvalues of largest magnitude, sorted by decreasing
/// magnitude; eigenvalues of equal magnitude (to 1e-12) are ordered by phase.
pub fn leading_eigs_matrix(m: &CMat, count: usize) -> Result<Vec<C64>> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch("eigenvalues need a square matrix".into()));
    }
    if m.nrows() > MAX_EIG_DIM {
        return Err(Error::Budget(format!("dense eigensolve limited to dimension {MAX_EIG_DIM}")));
    }
    let n = m.nrows();
    let schur = nalgebra::Schur::try_new(m.clone(), 1e-15, 100_000)
        .ok_or_else(|| Error::Invalid("Schur iteration did not converge".into()))?;
    let (_, t) = schur.unpack();
    let mut eigs: Vec<C64> = (0..n).map(|i| t[(i, i)]).collect();
    eigs.sort_by(|a, b| b.norm().total_cmp(&a.norm()));
    let mut start = 0;
    while start < eigs.len() {
        let mut end = start + 1;
        while end < eigs.len() && (eigs[start].norm() - eigs[end].norm()).abs() <= 1e-12 {
            end += 1;
        }
        eigs[start..end].sort_by(|a, b| a.arg().total_cmp(&b.arg()));
        start = end;
    }
    eigs.truncate(count);
    Ok(eigs)
}

/// [`leading_eigs_matrix`] for a two-leg square tensor.
pub fn leading_eigs(m: &ComplexTensor, count: usize) -> Result<Vec<C64>> {
    if m.legs().len() != 2 || m.legs()[0].dim != m.legs()[1].dim {
        return Err(Error::DimensionMismatch("expected a square two-leg tensor".into()));
    }
    let n = m.legs()[0].dim;
    leading_eigs_matrix(&CMat::from_row_slice(n, n, m.data()), count)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn permute_axes_matches_index_arithmetic() {
        let dims = [2, 3, 4];
        let data: Vec<C64> = (0..24).map(|x| C64::new(x as f64, 0.0)).collect();
        let out = permute_axes(&data, &dims, &[2, 0, 1]);
        // new[c][a][b] = old[a][b][c]
        for a in 0..2 {
            for b in 0..3 {
                for c in 0..4 {
                    assert_eq!(out[c * 6 + a * 3 + b], data[a * 12 + b * 4 + c]);
                }
            }
        }
    }

    #[test]
    fn kron_and_partial_traces_agree() {
        let a = CMat::from_fn(2, 2, |i, j| C64::new((i + 2 * j) as f64, 1.0));
        let b = CMat::from_fn(3, 3, |i, j| C64::new(1.0, (i * j) as f64));
        let ab = kron(&a, &b);
        let ta = a.trace();
        let tb = b.trace();
        assert!(max_abs(&(partial_trace_first(&ab, 2, 3) - &b * ta)) < 1e-12);
        assert!(max_abs(&(partial_trace_second(&ab, 2, 3) - &a * tb)) < 1e-12);
    }
}
