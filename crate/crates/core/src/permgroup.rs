//! Symmetric-group combinatorics.
//!
//! Permutations are stored in one-line form. Enumeration is lexicographic on
//! the image sequence, so the identity always has ordinal 0 and `(1 2)` has
//! ordinal 1 in `S_2`. Composition follows `(σ∘τ)(i) = σ(τ(i))`.

use std::fmt;

use num_complex::Complex64;

use crate::densealg::ComplexTensor;
use crate::{Error, Result};

/// Largest supported degree.
pub const MAX_DEGREE: usize = 20;
/// Largest degree for which `S_k` is materialized as a list.
pub const MAX_MATERIALIZED_DEGREE: usize = 8;
/// Largest degree for which [`SymmetricGroup`] keeps a full multiplication table.
const MULT_TABLE_DEGREE: usize = 6;
/// Largest number of entries `rep_matrix` will allocate.
const REP_BUDGET: usize = 1 << 22;

/// Ordinal of a permutation in the lexicographic enumeration of `S_k`.
pub type PermIndex = usize;

/// A permutation of `{1..k}` in one-line form.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    // zero-based images
    images: Vec<u8>,
}

fn check_degree(k: usize, max: usize) -> Result<()> {
    if k == 0 || k > max {
        return Err(Error::DegreeOutOfRange { degree: k, max });
    }
    Ok(())
}

impl Permutation {
    pub fn identity(k: usize) -> Self {
        Self {
            images: (0..k as u8).collect(),
        }
    }

    /// Builds a permutation from one-line images in `1..=k`.
    pub fn from_images(images: &[usize]) -> Result<Self> {
        let k = images.len();
        check_degree(k, MAX_DEGREE)?;
        let mut seen = vec![false; k];
        for &x in images {
            if x == 0 || x > k || seen[x - 1] {
                return Err(Error::Invalid(format!("{images:?} is not a bijection on 1..={k}")));
            }
            seen[x - 1] = true;
        }
        Ok(Self {
            images: images.iter().map(|&x| (x - 1) as u8).collect(),
        })
    }

    /// Builds a permutation of degree `k` from disjoint cycles written with
    /// 1-based points, e.g. `from_cycles(3, &[&[1, 2, 3]])`.
    pub fn from_cycles(k: usize, cycles: &[&[usize]]) -> Result<Self> {
        check_degree(k, MAX_DEGREE)?;
        let mut images: Vec<usize> = (1..=k).collect();
        let mut touched = vec![false; k];
        for cycle in cycles {
            for (pos, &p) in cycle.iter().enumerate() {
                if p == 0 || p > k || touched[p - 1] {
                    return Err(Error::Invalid(format!("bad cycle list {cycles:?} for degree {k}")));
                }
                touched[p - 1] = true;
                images[p - 1] = cycle[(pos + 1) % cycle.len()];
            }
        }
        Self::from_images(&images)
    }

    pub fn degree(&self) -> usize {
        self.images.len()
    }

    /// One-line images, 1-based.
    pub fn images(&self) -> Vec<usize> {
        self.images.iter().map(|&x| x as usize + 1).collect()
    }

    /// Image of the zero-based point `i`, zero-based.
    #[inline]
    pub fn apply(&self, i: usize) -> usize {
        self.images[i] as usize
    }

    /// `(self∘other)(i) = self(other(i))`.
    pub fn compose(&self, other: &Permutation) -> Result<Permutation> {
        if self.degree() != other.degree() {
            return Err(Error::DegreeMismatch(self.degree(), other.degree()));
        }
        Ok(self.compose_unchecked(other))
    }

    pub(crate) fn compose_unchecked(&self, other: &Permutation) -> Permutation {
        Permutation {
            images: other.images.iter().map(|&j| self.images[j as usize]).collect(),
        }
    }

    pub fn inverse(&self) -> Permutation {
        let mut images = vec![0u8; self.degree()];
        for (i, &j) in self.images.iter().enumerate() {
            images[j as usize] = i as u8;
        }
        Permutation { images }
    }

    /// `ρ σ ρ⁻¹`.
    pub fn conjugate_by(&self, rho: &Permutation) -> Result<Permutation> {
        Ok(rho.compose(self)?.compose_unchecked(&rho.inverse()))
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &j)| i == j as usize)
    }

    /// Disjoint cycles (including fixed points) as 1-based point lists, each
    /// starting at its smallest point.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let k = self.degree();
        let mut seen = vec![false; k];
        let mut out = Vec::new();
        for start in 0..k {
            if seen[start] {
                continue;
            }
            let mut cycle = Vec::new();
            let mut i = start;
            while !seen[i] {
                seen[i] = true;
                cycle.push(i + 1);
                i = self.images[i] as usize;
            }
            out.push(cycle);
        }
        out
    }

    /// `#(σ)`: number of disjoint cycles, fixed points included.
    pub fn cycle_count(&self) -> usize {
        let k = self.degree();
        let mut seen = [false; MAX_DEGREE];
        let mut count = 0;
        for start in 0..k {
            if seen[start] {
                continue;
            }
            count += 1;
            let mut i = start;
            while !seen[i] {
                seen[i] = true;
                i = self.images[i] as usize;
            }
        }
        count
    }

    pub fn cycle_type(&self) -> CycleType {
        let mut parts: Vec<usize> = self.cycles().iter().map(Vec::len).collect();
        parts.sort_unstable_by(|a, b| b.cmp(a));
        CycleType { parts }
    }

    /// Lexicographic ordinal (Lehmer code).
    pub fn rank(&self) -> PermIndex {
        let k = self.degree();
        let mut used = 0u32;
        let mut rank = 0usize;
        for (pos, &x) in self.images.iter().enumerate() {
            let smaller_unused = (0..x).filter(|&y| used & (1 << y) == 0).count();
            rank += smaller_unused * factorial(k - 1 - pos);
            used |= 1 << x;
        }
        rank
    }

    /// Inverse of [`Permutation::rank`].
    pub fn unrank(k: usize, mut index: PermIndex) -> Result<Permutation> {
        check_degree(k, MAX_DEGREE)?;
        if index >= factorial(k) {
            return Err(Error::Invalid(format!("ordinal {index} out of range for S_{k}")));
        }
        let mut pool: Vec<u8> = (0..k as u8).collect();
        let mut images = Vec::with_capacity(k);
        for pos in 0..k {
            let f = factorial(k - 1 - pos);
            images.push(pool.remove(index / f));
            index %= f;
        }
        Ok(Permutation { images })
    }

    /// Advances to the lexicographically next permutation; false after the last.
    fn advance(&mut self) -> bool {
        let a = &mut self.images;
        let n = a.len();
        if n < 2 {
            return false;
        }
        let mut i = n - 1;
        while i > 0 && a[i - 1] >= a[i] {
            i -= 1;
        }
        if i == 0 {
            return false;
        }
        let mut j = n - 1;
        while a[j] <= a[i - 1] {
            j -= 1;
        }
        a.swap(i - 1, j);
        a[i..].reverse();
        true
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Permutation {
    /// Cycle notation without fixed points; the identity prints as `e`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_identity() {
            return write!(f, "e");
        }
        for cycle in self.cycles().iter().filter(|c| c.len() > 1) {
            let body: Vec<String> = cycle.iter().map(ToString::to_string).collect();
            write!(f, "({})", body.join(" "))?;
        }
        Ok(())
    }
}

pub fn factorial(n: usize) -> usize {
    (1..=n).product()
}

/// A partition of `k`, parts in weakly decreasing order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
#[serde(transparent)]
pub struct CycleType {
    pub parts: Vec<usize>,
}

impl CycleType {
    pub fn new(mut parts: Vec<usize>) -> Result<Self> {
        if parts.contains(&0) || parts.is_empty() {
            return Err(Error::Invalid(format!("{parts:?} is not a partition")));
        }
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Ok(Self { parts })
    }

    pub fn degree(&self) -> usize {
        self.parts.iter().sum()
    }

    /// Number of cycles.
    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// Order of the centralizer, `z_λ = ∏ i^{m_i} m_i!`.
    pub fn centralizer_order(&self) -> usize {
        let mut z = 1;
        let mut i = 0;
        while i < self.parts.len() {
            let part = self.parts[i];
            let mut mult = 0;
            while i < self.parts.len() && self.parts[i] == part {
                mult += 1;
                i += 1;
            }
            z *= part.pow(mult as u32) * factorial(mult);
        }
        z
    }

    /// Number of permutations with this cycle type.
    pub fn class_size(&self) -> usize {
        factorial(self.degree()) / self.centralizer_order()
    }

    /// A representative: consecutive cycles `(1 .. λ₁)(λ₁+1 ..)…`.
    pub fn representative(&self) -> Permutation {
        let k = self.degree();
        let mut images: Vec<u8> = (0..k as u8).collect();
        let mut start = 0;
        for &p in &self.parts {
            for i in 0..p {
                images[start + i] = (start + (i + 1) % p) as u8;
            }
            start += p;
        }
        Permutation { images }
    }
}

impl fmt::Display for CycleType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let body: Vec<String> = self.parts.iter().map(ToString::to_string).collect();
        write!(f, "[{}]", body.join(","))
    }
}

/// All partitions of `k`, ordered so that the identity type `[1,…,1]` comes
/// first and the single cycle `[k]` last.
pub fn partitions(k: usize) -> Vec<CycleType> {
    fn rec(remaining: usize, max: usize, prefix: &mut Vec<usize>, out: &mut Vec<CycleType>) {
        if remaining == 0 {
            out.push(CycleType { parts: prefix.clone() });
            return;
        }
        for p in (1..=remaining.min(max)).rev() {
            prefix.push(p);
            rec(remaining - p, p, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(k, k, &mut Vec::new(), &mut out);
    out.reverse();
    out
}

/// Lazy lexicographic iterator over `S_k`.
pub struct PermIter {
    next: Option<Permutation>,
}

impl Iterator for PermIter {
    type Item = Permutation;

    fn next(&mut self) -> Option<Permutation> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        if succ.advance() {
            self.next = Some(succ);
        }
        Some(current)
    }
}

/// Lazy enumeration, valid for every supported degree.
pub fn iter(k: usize) -> Result<PermIter> {
    check_degree(k, MAX_DEGREE)?;
    Ok(PermIter {
        next: Some(Permutation::identity(k)),
    })
}

/// All `k!` permutations in lexicographic order; identity first.
pub fn enumerate(k: usize) -> Result<Vec<Permutation>> {
    check_degree(k, MAX_MATERIALIZED_DEGREE)?;
    Ok(iter(k)?.collect())
}

/// `#(σ)`.
pub fn cycle_count(sigma: &Permutation) -> usize {
    sigma.cycle_count()
}

/// `(σ∘τ)`.
pub fn compose(sigma: &Permutation, tau: &Permutation) -> Result<Permutation> {
    sigma.compose(tau)
}

/// Row-major index of a multi-index over `k` slots of dimension `q`.
fn multi_index_rank(digits: &[usize], q: usize) -> usize {
    digits.iter().fold(0, |acc, &x| acc * q + x)
}

/// Index of `P_σ e_i`, where `P_σ` sends `v₁⊗…⊗v_k` to
/// `v_{σ⁻¹(1)}⊗…⊗v_{σ⁻¹(k)}`: output slot `σ(n)` carries input slot `n`.
pub(crate) fn permuted_index(sigma: &Permutation, index: usize, q: usize, scratch: &mut [usize]) -> usize {
    let k = sigma.degree();
    let mut rest = index;
    let mut input = [0usize; MAX_DEGREE];
    for n in (0..k).rev() {
        input[n] = rest % q;
        rest /= q;
    }
    for n in 0..k {
        scratch[sigma.apply(n)] = input[n];
    }
    multi_index_rank(&scratch[..k], q)
}

/// The permutation matrix `P_σ^{(q)}` on `(C^q)^{⊗k}`, legs `row` and `col`.
pub fn rep_matrix(sigma: &Permutation, q: usize) -> Result<ComplexTensor> {
    if q == 0 {
        return Err(Error::Invalid("local dimension must be positive".into()));
    }
    let dim = q
        .checked_pow(sigma.degree() as u32)
        .filter(|&n| n.checked_mul(n).is_some_and(|m| m <= REP_BUDGET))
        .ok_or_else(|| Error::Budget(format!("P_σ with q={q}, k={} exceeds {REP_BUDGET} entries", sigma.degree())))?;
    let mut data = vec![Complex64::new(0.0, 0.0); dim * dim];
    let mut scratch = [0usize; MAX_DEGREE];
    for col in 0..dim {
        let row = permuted_index(sigma, col, q, &mut scratch);
        data[row * dim + col] = Complex64::new(1.0, 0.0);
    }
    ComplexTensor::new(vec![("row", dim), ("col", dim)], data)
}

/// `tr(P_σ P_τ) = q^{#(στ)}`, computed without matrices.
pub fn trace_pair(sigma: &Permutation, tau: &Permutation, q: u64) -> Result<u128> {
    let cycles = sigma.compose(tau)?.cycle_count();
    (q as u128)
        .checked_pow(cycles as u32)
        .ok_or_else(|| Error::Budget(format!("{q}^{cycles} overflows")))
}

/// A materialized `S_k` with class data and fast multiplication.
#[derive(Clone, Debug)]
pub struct SymmetricGroup {
    k: usize,
    elements: Vec<Permutation>,
    inverse: Vec<PermIndex>,
    cycles: Vec<usize>,
    class_of: Vec<usize>,
    classes: Vec<CycleType>,
    class_reps: Vec<PermIndex>,
    mult: Option<Vec<u16>>,
}

impl SymmetricGroup {
    pub fn new(k: usize) -> Result<Self> {
        let elements = enumerate(k)?;
        let n = elements.len();
        let classes = partitions(k);
        let class_reps = classes.iter().map(|c| c.representative().rank()).collect();
        let class_of = elements
            .iter()
            .map(|p| {
                let ct = p.cycle_type();
                classes.iter().position(|c| *c == ct).expect("every cycle type is a partition")
            })
            .collect();
        let inverse = elements.iter().map(|p| p.inverse().rank()).collect();
        let cycles = elements.iter().map(Permutation::cycle_count).collect();
        let mult = (k <= MULT_TABLE_DEGREE).then(|| {
            let mut table = vec![0u16; n * n];
            for (i, a) in elements.iter().enumerate() {
                for (j, b) in elements.iter().enumerate() {
                    table[i * n + j] = a.compose_unchecked(b).rank() as u16;
                }
            }
            table
        });
        Ok(Self {
            k,
            elements,
            inverse,
            cycles,
            class_of,
            classes,
            class_reps,
            mult,
        })
    }

    pub fn degree(&self) -> usize {
        self.k
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn element(&self, i: PermIndex) -> &Permutation {
        &self.elements[i]
    }

    pub fn elements(&self) -> &[Permutation] {
        &self.elements
    }

    /// Ordinal of `elements[i] ∘ elements[j]`.
    #[inline]
    pub fn mul(&self, i: PermIndex, j: PermIndex) -> PermIndex {
        match &self.mult {
            Some(t) => t[i * self.elements.len() + j] as usize,
            None => self.elements[i].compose_unchecked(&self.elements[j]).rank(),
        }
    }

    #[inline]
    pub fn inv(&self, i: PermIndex) -> PermIndex {
        self.inverse[i]
    }

    /// Ordinal of `σ τ⁻¹`.
    #[inline]
    pub fn div(&self, sigma: PermIndex, tau: PermIndex) -> PermIndex {
        self.mul(sigma, self.inverse[tau])
    }

    #[inline]
    pub fn cycle_count(&self, i: PermIndex) -> usize {
        self.cycles[i]
    }

    /// Class ordinal of `elements[i]` in [`partitions`] order.
    #[inline]
    pub fn class_of(&self, i: PermIndex) -> usize {
        self.class_of[i]
    }

    pub fn classes(&self) -> &[CycleType] {
        &self.classes
    }

    pub fn class_count(&self) -> usize {
        self.classes.len()
    }

    pub fn class_rep(&self, c: usize) -> PermIndex {
        self.class_reps[c]
    }

    pub fn class_size(&self, c: usize) -> usize {
        self.classes[c].class_size()
    }

    /// `ρ σ ρ⁻¹` by ordinals.
    #[inline]
    pub fn conjugate(&self, sigma: PermIndex, rho: PermIndex) -> PermIndex {
        self.mul(self.mul(rho, sigma), self.inverse[rho])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_roundtrip_matches_enumeration() {
        for k in 1..=5 {
            for (i, p) in enumerate(k).unwrap().iter().enumerate() {
                assert_eq!(p.rank(), i);
                assert_eq!(&Permutation::unrank(k, i).unwrap(), p);
            }
        }
    }

    #[test]
    fn partitions_are_ordered_identity_first() {
        let p4 = partitions(4);
        assert_eq!(p4.len(), 5);
        assert_eq!(p4[0].parts, vec![1, 1, 1, 1]);
        assert_eq!(p4[4].parts, vec![4]);
        assert_eq!(partitions(6).len(), 11);
        let total: usize = partitions(5).iter().map(CycleType::class_size).sum();
        assert_eq!(total, 120);
    }

    #[test]
    fn display_uses_cycle_notation() {
        let p = Permutation::from_cycles(4, &[&[1, 3], &[2, 4]]).unwrap();
        assert_eq!(p.to_string(), "(1 3)(2 4)");
        assert_eq!(Permutation::identity(3).to_string(), "e");
    }
}
