//! Local operators and the trace data the analytic moments consume.
//!
//! An operator keeps its floating matrix and, when every entry is a Gaussian
//! rational, an exact copy. Exact copies feed the exact moment path.

use num_integer::Roots;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::densealg::{CMat, C64};
use crate::exact::{q_from_f64, q_int, q_to_f64, Q};
use crate::permgroup::CycleType;
use crate::{Error, Result};

/// Largest denominator accepted when reading float entries as exact values.
const EXACT_DENOMINATOR: i64 = 1 << 20;

/// Gaussian rational `re + i·im`.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussQ {
    pub re: Q,
    pub im: Q,
}

impl GaussQ {
    fn zero() -> Self {
        Self {
            re: Q::zero(),
            im: Q::zero(),
        }
    }

    fn mul(&self, o: &GaussQ) -> GaussQ {
        GaussQ {
            re: &self.re * &o.re - &self.im * &o.im,
            im: &self.re * &o.im + &self.im * &o.re,
        }
    }

    fn add(&self, o: &GaussQ) -> GaussQ {
        GaussQ {
            re: &self.re + &o.re,
            im: &self.im + &o.im,
        }
    }
}

/// A `d × d` operator with an optional exact copy.
#[derive(Clone, Debug)]
pub struct Operator {
    label: String,
    matrix: CMat,
    exact: Option<Vec<GaussQ>>,
}

fn small_dyadic(x: f64) -> Option<Q> {
    let scaled = x * EXACT_DENOMINATOR as f64;
    (scaled.fract() == 0.0 && scaled.abs() < 1e15).then(|| q_from_f64(x)).flatten()
}

impl Operator {
    /// Wraps a float matrix. The exact copy is kept when every entry is a
    /// dyadic rational with denominator at most 2^20.
    pub fn from_matrix(label: impl Into<String>, matrix: CMat) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() == 0 {
            return Err(Error::DimensionMismatch(format!("operator must be square, got {:?}", matrix.shape())));
        }
        let exact = matrix
            .iter()
            .map(|z| Some(GaussQ { re: small_dyadic(z.re)?, im: small_dyadic(z.im)? }))
            .collect::<Option<Vec<_>>>();
        // nalgebra iterates column-major; store the exact copy row-major
        let exact = exact.map(|col_major| {
            let n = matrix.nrows();
            (0..n * n).map(|idx| col_major[(idx % n) * n + idx / n].clone()).collect()
        });
        Ok(Self {
            label: label.into(),
            matrix,
            exact,
        })
    }

    fn from_exact(label: impl Into<String>, d: usize, entries: Vec<GaussQ>) -> Self {
        let matrix = CMat::from_fn(d, d, |i, j| {
            let z = &entries[i * d + j];
            C64::new(q_to_f64(&z.re), q_to_f64(&z.im))
        });
        Self {
            label: label.into(),
            matrix,
            exact: Some(entries),
        }
    }

    fn float_only(label: impl Into<String>, matrix: CMat) -> Self {
        Self {
            label: label.into(),
            matrix,
            exact: None,
        }
    }

    pub fn identity(d: usize) -> Self {
        let entries = (0..d * d)
            .map(|idx| GaussQ {
                re: if idx / d == idx % d { Q::one() } else { Q::zero() },
                im: Q::zero(),
            })
            .collect();
        Self::from_exact("identity", d, entries)
    }

    fn from_int_entries(label: &str, d: usize, entries: &[(usize, usize, i64, i64)]) -> Self {
        let mut e = vec![GaussQ::zero(); d * d];
        for &(i, j, re, im) in entries {
            e[i * d + j] = GaussQ { re: q_int(re), im: q_int(im) };
        }
        Self::from_exact(label, d, e)
    }

    pub fn pauli_x() -> Self {
        Self::from_int_entries("pauli-x", 2, &[(0, 1, 1, 0), (1, 0, 1, 0)])
    }

    pub fn pauli_y() -> Self {
        Self::from_int_entries("pauli-y", 2, &[(0, 1, 0, -1), (1, 0, 0, 1)])
    }

    pub fn pauli_z() -> Self {
        Self::from_int_entries("pauli-z", 2, &[(0, 0, 1, 0), (1, 1, -1, 0)])
    }

    /// Generalized Gell-Mann matrix with 1-based labels: `i < j` symmetric
    /// `|i⟩⟨j| + |j⟩⟨i|`, `i > j` antisymmetric `−i|j⟩⟨i| + i|i⟩⟨j|`, and
    /// `i = j = l < d` the diagonal `√(2/(l(l+1))) (Σ_{m≤l} |m⟩⟨m| − l|l+1⟩⟨l+1|)`.
    pub fn gell_mann(d: usize, i: usize, j: usize) -> Result<Self> {
        if i == 0 || j == 0 || i > d || j > d || (i == j && i >= d) {
            return Err(Error::Invalid(format!("no Gell-Mann matrix ({i},{j}) in dimension {d}")));
        }
        let label = format!("gellmann-{i}-{j}");
        let (a, b) = (i - 1, j - 1);
        if a < b {
            return Ok(Self::from_int_entries(&label, d, &[(a, b, 1, 0), (b, a, 1, 0)]));
        }
        if a > b {
            return Ok(Self::from_int_entries(&label, d, &[(b, a, 0, -1), (a, b, 0, 1)]));
        }
        let l = i as i64;
        let mut diag: Vec<(usize, usize, i64, i64)> = (0..i).map(|m| (m, m, 1, 0)).collect();
        diag.push((i, i, -l, 0));
        let base = Self::from_int_entries(&label, d, &diag);
        // the prefactor 2/(l(l+1)) is a rational square only for some l
        let den = l * (l + 1) / 2;
        let root = (den as u64).sqrt() as i64;
        if root * root == den {
            let scale = Q::new(1.into(), root.into());
            let entries = base
                .exact
                .unwrap()
                .into_iter()
                .map(|z| GaussQ { re: z.re * &scale, im: z.im * &scale })
                .collect();
            return Ok(Self::from_exact(label, d, entries));
        }
        let f = (2.0 / (l * (l + 1)) as f64).sqrt();
        Ok(Self::float_only(label, base.matrix * C64::new(f, 0.0)))
    }

    /// Parses a preset name (`identity`, `pauli-x|y|z`, `gellmann-i-j`) or an
    /// inline JSON matrix of `[re, im]` pairs.
    pub fn parse(spec: &str, d: usize) -> Result<Self> {
        let spec = spec.trim();
        let op = match spec {
            "identity" | "id" | "I" => Self::identity(d),
            "pauli-x" | "sigma-x" => Self::pauli_x(),
            "pauli-y" | "sigma-y" => Self::pauli_y(),
            "pauli-z" | "sigma-z" => Self::pauli_z(),
            s if s.starts_with("gellmann-") => {
                let parts: Vec<&str> = s["gellmann-".len()..].split('-').collect();
                let nums: Vec<usize> = parts
                    .iter()
                    .map(|p| p.parse::<usize>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| Error::Invalid(format!("bad Gell-Mann label {s}")))?;
                if nums.len() != 2 {
                    return Err(Error::Invalid(format!("bad Gell-Mann label {s}")));
                }
                Self::gell_mann(d, nums[0], nums[1])?
            }
            s if s.starts_with('[') => {
                let m = parse_matrix_json(s)?;
                Self::from_matrix("inline", m)?
            }
            other => return Err(Error::Invalid(format!("unknown operator {other}"))),
        };
        if op.dim() != d {
            return Err(Error::DimensionMismatch(format!("operator {spec} has dimension {}, expected {d}", op.dim())));
        }
        Ok(op)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn is_exact(&self) -> bool {
        self.exact.is_some()
    }

    /// `tr(A^m)` for `m = 1..=k`, exactly when possible.
    pub fn trace_powers(&self, k: usize) -> TraceData {
        let mut float = Vec::with_capacity(k);
        let mut p = self.matrix.clone();
        for m in 1..=k {
            if m > 1 {
                p = &p * &self.matrix;
            }
            float.push(p.trace());
        }
        let exact = self.exact.as_ref().and_then(|e| {
            let d = self.dim();
            let mut out = Vec::with_capacity(k);
            let mut p = e.clone();
            for m in 1..=k {
                if m > 1 {
                    let mut next = vec![GaussQ::zero(); d * d];
                    for i in 0..d {
                        for l in 0..d {
                            if p[i * d + l].re.is_zero() && p[i * d + l].im.is_zero() {
                                continue;
                            }
                            for j in 0..d {
                                next[i * d + j] = next[i * d + j].add(&p[i * d + l].mul(&e[l * d + j]));
                            }
                        }
                    }
                    p = next;
                }
                let tr = (0..d).fold(GaussQ::zero(), |acc, i| acc.add(&p[i * d + i]));
                if !tr.im.is_zero() {
                    return None;
                }
                out.push(tr.re);
            }
            Some(out)
        });
        TraceData { exact, float }
    }
}

/// Parses `[[[re, im], …], …]` (rows of complex pairs).
pub fn parse_matrix_json(s: &str) -> Result<CMat> {
    let rows: Vec<Vec<[f64; 2]>> = serde_json::from_str(s)?;
    matrix_from_pairs(&rows)
}

pub fn matrix_from_pairs(rows: &[Vec<[f64; 2]>]) -> Result<CMat> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(Error::DimensionMismatch("matrix must be square and non-empty".into()));
    }
    Ok(CMat::from_fn(n, n, |i, j| C64::new(rows[i][j][0], rows[i][j][1])))
}

pub fn matrix_to_pairs(m: &CMat) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

/// `tr(A^m)` for `m = 1..=k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceData {
    #[serde(skip)]
    pub exact: Option<Vec<Q>>,
    pub float: Vec<C64>,
}

impl TraceData {
    /// Trace data of the identity on `C^d`.
    pub fn identity(d: usize, k: usize) -> Self {
        Operator::identity(d).trace_powers(k)
    }

    pub fn max_power(&self) -> usize {
        self.float.len()
    }

    /// `∏_i tr(A^{λ_i})`, which equals `tr[P_π A^{⊗k}]` (and `tr[P_πᵀ A^{⊗k}]`)
    /// for `π` of cycle type `λ`.
    pub fn power_sum(&self, ct: &CycleType) -> C64 {
        ct.parts.iter().map(|&p| self.float[p - 1]).product()
    }

    pub fn power_sum_exact(&self, ct: &CycleType) -> Option<Q> {
        let e = self.exact.as_ref()?;
        Some(ct.parts.iter().fold(Q::one(), |acc, &p| acc * &e[p - 1]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pauli_traces_are_exact() {
        let t = Operator::pauli_y().trace_powers(4);
        let e = t.exact.unwrap();
        assert_eq!(e, vec![q_int(0), q_int(2), q_int(0), q_int(2)]);
    }

    #[test]
    fn gell_mann_diagonal_exactness() {
        assert!(Operator::gell_mann(3, 1, 1).unwrap().is_exact());
        assert!(!Operator::gell_mann(3, 2, 2).unwrap().is_exact());
        let g = Operator::gell_mann(3, 2, 2).unwrap();
        assert!((g.matrix().map(|z| z * z.conj()).trace().re - 2.0).abs() < 1e-12);
    }

    #[test]
    fn inline_matrix_keeps_row_major_exact_copy() {
        let op = Operator::parse("[[[0,0],[1,0]],[[0,0],[0,0]]]", 2).unwrap();
        let ex = op.exact.as_ref().unwrap();
        assert_eq!(ex[1].re, q_int(1));
        assert_eq!(op.matrix()[(0, 1)], C64::new(1.0, 0.0));
        let sq = op.trace_powers(2).exact.unwrap();
        assert_eq!(sq, vec![q_int(0), q_int(0)]);
    }
}
