//! Operator on a growing set of wires, evolved gate by gate.
//!
//! Wires that were never touched carry the identity and are not stored. A
//! gate whose inputs are all implicit identities maps them to implicit
//! identities on its outputs, which keeps most of a correlation diagram free.

use crate::densealg::{matmul, permute_axes, CMat, C64};

pub(crate) type WireId = u32;

/// `factor · X`, where `X` acts on `wires` (row axes then column axes, both in
/// wire order) tensored with the identity on every other wire.
#[derive(Clone, Debug)]
pub(crate) struct Register {
    wires: Vec<(WireId, usize)>,
    data: Vec<C64>,
    factor: C64,
}

fn flat(m: &CMat) -> Vec<C64> {
    let (r, c) = m.shape();
    let mut out = Vec::with_capacity(r * c);
    for i in 0..r {
        for j in 0..c {
            out.push(m[(i, j)]);
        }
    }
    out
}

impl Register {
    pub fn new() -> Self {
        Self {
            wires: Vec::new(),
            data: vec![C64::new(1.0, 0.0)],
            factor: C64::new(1.0, 0.0),
        }
    }

    fn size(&self) -> usize {
        self.wires.iter().map(|w| w.1).product()
    }

    fn position(&self, id: WireId) -> Option<usize> {
        self.wires.iter().position(|w| w.0 == id)
    }

    pub fn has(&self, id: WireId) -> bool {
        self.position(id).is_some()
    }

    /// Tensors in a new wire carrying `op` (identity when `None`) as the last wire.
    pub fn add(&mut self, id: WireId, dim: usize, op: Option<&CMat>) {
        debug_assert!(!self.has(id));
        let n = self.size();
        let x = match op {
            Some(m) => flat(m),
            None => {
                let mut v = vec![C64::new(0.0, 0.0); dim * dim];
                for i in 0..dim {
                    v[i * dim + i] = C64::new(1.0, 0.0);
                }
                v
            }
        };
        // old[(r),(c)] ⊗ x[i][j] → new[(r,i),(c,j)]
        let mut out = vec![C64::new(0.0, 0.0); n * n * dim * dim];
        let row = n * dim;
        for r in 0..n {
            for c in 0..n {
                let v = self.data[r * n + c];
                if v == C64::new(0.0, 0.0) {
                    continue;
                }
                for i in 0..dim {
                    for j in 0..dim {
                        out[(r * dim + i) * row + c * dim + j] = v * x[i * dim + j];
                    }
                }
            }
        }
        self.data = out;
        self.wires.push((id, dim));
    }

    fn axis_dims(&self) -> Vec<usize> {
        let d: Vec<usize> = self.wires.iter().map(|w| w.1).collect();
        [d.clone(), d].concat()
    }

    /// `X ↦ G X G†` with `G` mapping the joint index of `inputs` (row-major in
    /// the given order) to the joint index of `outputs`.
    pub fn apply(&mut self, gate: &CMat, inputs: &[(WireId, usize)], outputs: &[(WireId, usize)]) {
        if inputs.iter().all(|w| !self.has(w.0)) {
            return;
        }
        for &(id, dim) in inputs {
            if !self.has(id) {
                self.add(id, dim, None);
            }
        }
        let w = self.wires.len();
        let pos: Vec<usize> = inputs.iter().map(|x| self.position(x.0).expect("materialized")).collect();
        let others: Vec<usize> = (0..w).filter(|i| !pos.contains(i)).collect();
        let mut perm = pos.clone();
        perm.extend(&others);
        perm.extend(others.iter().map(|&i| w + i));
        perm.extend(pos.iter().map(|&i| w + i));
        let data = permute_axes(&self.data, &self.axis_dims(), &perm);

        let g_in: usize = inputs.iter().map(|x| x.1).product();
        let g_out: usize = outputs.iter().map(|x| x.1).product();
        let rest: usize = others.iter().map(|&i| self.wires[i].1).product();
        let g = flat(gate);
        let gh = flat(&gate.adjoint());
        let left = matmul(&g, &data, g_out, g_in, rest * rest * g_in);
        let both = matmul(&left, &gh, g_out * rest * rest, g_in, g_out);
        // [out, rows_other, cols_other, out'] → [out, rows_other, out', cols_other]
        self.data = permute_axes(&both, &[g_out, rest, rest, g_out], &[0, 1, 3, 2]);
        let mut wires: Vec<(WireId, usize)> = outputs.to_vec();
        wires.extend(others.iter().map(|&i| self.wires[i]));
        self.wires = wires;
    }

    /// `tr_wire[op · X]`; the plain partial trace when `op` is `None`.
    pub fn trace(&mut self, id: WireId, dim: usize, op: Option<&CMat>) {
        let Some(p) = self.position(id) else {
            self.factor *= match op {
                Some(m) => m.trace(),
                None => C64::new(dim as f64, 0.0),
            };
            return;
        };
        let w = self.wires.len();
        let mut perm = vec![p];
        perm.extend((0..w).filter(|&i| i != p));
        perm.push(w + p);
        perm.extend((0..w).filter(|&i| i != p).map(|i| w + i));
        let data = permute_axes(&self.data, &self.axis_dims(), &perm);
        let rest = self.size() / dim;
        let mut out = vec![C64::new(0.0, 0.0); rest * rest];
        // data[i][r][j][c]; result[r][c] = Σ_{ij} op[j][i] data[i][r][j][c]
        for i in 0..dim {
            for j in 0..dim {
                let coef = match op {
                    Some(m) => m[(j, i)],
                    None if i == j => C64::new(1.0, 0.0),
                    None => continue,
                };
                if coef == C64::new(0.0, 0.0) {
                    continue;
                }
                for r in 0..rest {
                    let src = ((i * rest + r) * dim + j) * rest;
                    let dst = r * rest;
                    for c in 0..rest {
                        out[dst + c] += coef * data[src + c];
                    }
                }
            }
        }
        self.data = out;
        self.wires.remove(p);
    }

    /// Full trace, once every wire has been closed.
    pub fn scalar(&self) -> C64 {
        assert!(self.wires.is_empty(), "open wires remain");
        self.factor * self.data[0]
    }

    /// `tr(X Y)` for two registers over the same physical wires.
    pub fn overlap(mut self, mut other: Register) -> C64 {
        for &(id, dim) in &other.wires.clone() {
            if !self.has(id) {
                self.add(id, dim, None);
            }
        }
        for &(id, dim) in &self.wires.clone() {
            if !other.has(id) {
                other.add(id, dim, None);
            }
        }
        let w = self.wires.len();
        let perm_wires: Vec<usize> = self.wires.iter().map(|x| other.position(x.0).expect("shared")).collect();
        let mut perm = perm_wires.clone();
        perm.extend(perm_wires.iter().map(|&i| w + i));
        let y = permute_axes(&other.data, &other.axis_dims(), &perm);
        let n = self.size();
        // tr(X Y) = Σ_{rc} X[r][c] Y[c][r]
        let mut acc = C64::new(0.0, 0.0);
        for r in 0..n {
            for c in 0..n {
                acc += self.data[r * n + c] * y[c * n + r];
            }
        }
        acc * self.factor * other.factor
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::densealg::{haar_unitary, kron, RngStream};

    #[test]
    fn gate_then_trace_matches_dense() {
        let mut rng = RngStream::new(5, 0);
        let u = haar_unitary(4, &mut rng).into_matrix();
        let a = CMat::from_fn(2, 2, |i, j| C64::new((i + 2 * j) as f64, i as f64 - j as f64));
        let b = CMat::from_fn(2, 2, |i, j| C64::new(1.0 + i as f64, j as f64));
        // dense: tr[(B ⊗ I) U (I ⊗ A) U†]
        let id = CMat::identity(2, 2);
        let dense = (kron(&b, &id) * &u * kron(&id, &a) * u.adjoint()).trace();
        let mut reg = Register::new();
        reg.add(2, 2, Some(&a));
        reg.apply(&u, &[(1, 2), (2, 2)], &[(3, 2), (4, 2)]);
        reg.trace(3, 2, Some(&b));
        reg.trace(4, 2, None);
        assert!((reg.scalar() - dense).norm() < 1e-12);
    }

    #[test]
    fn implicit_identity_passes_through() {
        let mut rng = RngStream::new(6, 0);
        let u = haar_unitary(4, &mut rng).into_matrix();
        let mut reg = Register::new();
        reg.apply(&u, &[(1, 2), (2, 2)], &[(3, 2), (4, 2)]);
        reg.trace(3, 2, None);
        reg.trace(4, 2, None);
        assert!((reg.scalar() - 4.0).norm() < 1e-12);
    }

    #[test]
    fn overlap_aligns_wire_order() {
        let a = CMat::from_fn(2, 2, |i, j| C64::new((i * 2 + j) as f64, 0.0));
        let b = CMat::from_fn(3, 3, |i, j| C64::new(i as f64, j as f64));
        let mut x = Register::new();
        x.add(1, 2, Some(&a));
        x.add(2, 3, Some(&b));
        let mut y = Register::new();
        y.add(2, 3, Some(&b));
        y.add(1, 2, Some(&a));
        let want = (&a * &a).trace() * (&b * &b).trace();
        assert!((x.overlap(y) - want).norm() < 1e-12);
    }
}
