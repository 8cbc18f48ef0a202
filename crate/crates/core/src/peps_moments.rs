//! Haar-averaged moments `E[D^k]` for disordered solvable PEPS.
//!
//! Averaging `Û` and `Ũ` of every site replaces the site by a sum over four
//! permutations: `α` on the input of `Û`, `β` on its output, `γ` on the input
//! of `Ũ` and `σ` on its output. A site then contributes
//!
//! `Wg(βα⁻¹, dD) Wg(σγ⁻¹, dD) · a(α) · b(σ) · d^{#(βγ⁻¹)}`
//!
//! with `a(α) = tr[P_αᵀ A^{⊗k}]` where `A` enters and `d^{#α}` elsewhere, and
//! `b(σ) = tr[P_σ B^{⊗k}]` where `B` is read off and `d^{#σ}` elsewhere. Bonds
//! pair permutations of neighbours: `D^{#(σδ⁻¹)}` horizontally with `δ` the
//! right neighbour's `α`, and `e^{#(βζ⁻¹)} e^{#(εγ⁻¹)}` vertically with
//! `(ε, ζ)` the upper neighbour's `(β, γ)` and `e = √D`. Caps close the
//! boundary: `D^{#α}` on the left, `D^{#σ}` on the right, and `e^{#β} e^{#γ}`
//! on the top and bottom rows.
//!
//! [`block`] exposes these site tensors literally. The averages themselves are
//! computed by sweeping the grid column by column over states indexed by one
//! permutation per row.

use std::fmt;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::densealg::C64;
use crate::exact::{q_pow, Scalar, Surd, Q};
use crate::mps_moments::{class_traces, MomentKind, MomentResult, MomentValue};
use crate::operators::{Operator, TraceData};
use crate::permgroup::{factorial, CycleType, PermIndex, SymmetricGroup};
use crate::weingarten::WeingartenTable;
use crate::{Error, Result};

/// Largest degree of the full averaged grid.
pub const MAX_GRID_DEGREE: usize = 3;
/// Largest degree of the single averaged column.
pub const MAX_COLUMN_DEGREE: usize = 4;
/// Rows of both implemented templates.
pub const TEMPLATE_ROWS: usize = 3;

/// Site of the generic grid, by its position.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockKind {
    Bulk,
    Left,
    BottomLeft,
    Bottom,
    BottomRight,
    Right,
    TopRight,
    Top,
    TopLeft,
}

impl BlockKind {
    /// Whether the site carries an operator slot.
    pub fn has_slot(self) -> bool {
        matches!(self, BlockKind::Left | BlockKind::Right)
    }

    pub const ALL: [BlockKind; 9] = [
        BlockKind::Bulk,
        BlockKind::Left,
        BlockKind::BottomLeft,
        BlockKind::Bottom,
        BlockKind::BottomRight,
        BlockKind::Right,
        BlockKind::TopRight,
        BlockKind::Top,
        BlockKind::TopLeft,
    ];

    fn role(self) -> SiteRole {
        use BlockKind::*;
        let (top, bottom) = match self {
            TopLeft | Top | TopRight => (true, false),
            BottomLeft | Bottom | BottomRight => (false, true),
            _ => (false, false),
        };
        let (left, right) = match self {
            TopLeft | Left | BottomLeft => (true, false),
            TopRight | Right | BottomRight => (false, true),
            _ => (false, false),
        };
        SiteRole {
            left,
            right,
            top,
            bottom,
            a_slot: self == Left,
            b_slot: self == Right,
        }
    }
}

/// Site of the single boundary column, top to bottom. The top site carries
/// both operators.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpecialKind {
    Top,
    Bulk,
    Bottom,
}

impl SpecialKind {
    pub const ALL: [SpecialKind; 3] = [SpecialKind::Top, SpecialKind::Bulk, SpecialKind::Bottom];

    fn role(self) -> SiteRole {
        SiteRole {
            left: true,
            right: true,
            top: self == SpecialKind::Top,
            bottom: self == SpecialKind::Bottom,
            a_slot: self == SpecialKind::Top,
            b_slot: self == SpecialKind::Top,
        }
    }
}

/// Row of the operators in the boundary column.
pub const SPECIAL_OPERATOR_ROW: usize = 0;
/// Row of the operators in the generic grid.
pub const GENERIC_OPERATOR_ROW: usize = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct SiteRole {
    left: bool,
    right: bool,
    top: bool,
    bottom: bool,
    a_slot: bool,
    b_slot: bool,
}

/// Permutation-valued leg of a site tensor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BlockLeg {
    /// Input of `Û`.
    Alpha,
    /// Output of `Û`.
    Beta,
    /// Input of `Ũ`.
    Gamma,
    /// Right neighbour's `Alpha`.
    Delta,
    /// Upper neighbour's `Beta`.
    Epsilon,
    /// Upper neighbour's `Gamma`.
    Zeta,
}

impl SiteRole {
    fn legs(&self) -> Vec<BlockLeg> {
        let mut legs = Vec::new();
        if !self.left {
            legs.push(BlockLeg::Alpha);
        }
        if !self.bottom {
            legs.push(BlockLeg::Beta);
            legs.push(BlockLeg::Gamma);
        }
        if !self.right {
            legs.push(BlockLeg::Delta);
        }
        if !self.top {
            legs.push(BlockLeg::Epsilon);
            legs.push(BlockLeg::Zeta);
        }
        legs
    }
}

/// Entry of a site tensor: `Σ_{λ,μ} c[λ][μ] p_λ(A) p_μ(B)`. A missing slot
/// contributes a single class and no trace factor.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SlotPoly {
    pub a_slot: bool,
    pub b_slot: bool,
    pub a_classes: usize,
    pub b_classes: usize,
    pub coeffs: Vec<Surd>,
}

impl SlotPoly {
    fn zero(classes: usize, a_slot: bool, b_slot: bool) -> Self {
        let a_classes = if a_slot { classes } else { 1 };
        let b_classes = if b_slot { classes } else { 1 };
        Self {
            a_slot,
            b_slot,
            a_classes,
            b_classes,
            coeffs: vec![Surd::rational(Q::zero()); a_classes * b_classes],
        }
    }

    /// Value for trace products `pa`, `pb` (ignored for missing slots).
    pub fn eval<S: Scalar>(&self, pa: &[S], pb: &[S]) -> S {
        let mut acc = S::s_zero();
        for i in 0..self.a_classes {
            for j in 0..self.b_classes {
                let c = &self.coeffs[i * self.b_classes + j];
                if c.s_is_zero() {
                    continue;
                }
                let mut term = S::from_surd(c);
                if self.a_slot {
                    term = term.s_mul(&pa[i]);
                }
                if self.b_slot {
                    term = term.s_mul(&pb[j]);
                }
                acc = acc.s_add(&term);
            }
        }
        acc
    }

    /// The constant when no slot is present.
    pub fn constant(&self) -> Option<&Surd> {
        (!self.a_slot && !self.b_slot).then(|| &self.coeffs[0])
    }
}

impl fmt::Display for SlotPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coeffs.iter().map(|c| c.to_string()).collect();
        write!(f, "[{}]", parts.join(", "))
    }
}

/// Group tables and weights for one `(k, d, D)`.
pub struct PepsBlockSet {
    k: usize,
    d: usize,
    bond: usize,
    g: SymmetricGroup,
    w: Vec<Q>,
    d_pow: Vec<Q>,
    bond_pow: Vec<Q>,
    e_pow: Vec<Surd>,
}

impl PepsBlockSet {
    pub fn new(k: usize, d: usize, bond: usize) -> Result<Self> {
        if k == 0 || k > MAX_COLUMN_DEGREE {
            return Err(Error::DegreeOutOfRange {
                degree: k,
                max: MAX_COLUMN_DEGREE,
            });
        }
        if d == 0 || bond == 0 {
            return Err(Error::Invalid("dimensions must be positive".into()));
        }
        let g = SymmetricGroup::new(k)?;
        let w = WeingartenTable::new(k, (d * bond) as u64)?.values().to_vec();
        Ok(Self {
            k,
            d,
            bond,
            g,
            w,
            d_pow: (0..=k).map(|j| q_pow(d as u64, j)).collect(),
            bond_pow: (0..=k).map(|j| q_pow(bond as u64, j)).collect(),
            e_pow: (0..=4 * k).map(|j| Surd::sqrt_power(bond as u64, j)).collect(),
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn classes(&self) -> &[CycleType] {
        self.g.classes()
    }

    fn wg(&self, sigma: PermIndex, tau: PermIndex) -> &Q {
        &self.w[self.g.class_of(self.g.div(sigma, tau))]
    }

    fn cyc(&self, x: PermIndex) -> usize {
        self.g.cycle_count(x)
    }

    fn cyc_div(&self, x: PermIndex, y: PermIndex) -> usize {
        self.g.cycle_count(self.g.div(x, y))
    }

    /// Everything but the two Weingarten factors of one site for fixed
    /// permutations; `None` for absent legs. Slot factors are left out.
    #[allow(clippy::too_many_arguments)]
    fn site_rest(&self, role: SiteRole, alpha: PermIndex, beta: PermIndex, gamma: PermIndex, sigma: PermIndex, delta: Option<PermIndex>, upper: Option<(PermIndex, PermIndex)>) -> Surd {
        let mut q = self.d_pow[self.cyc_div(beta, gamma)].clone();
        if !role.a_slot {
            q *= &self.d_pow[self.cyc(alpha)];
        }
        if !role.b_slot {
            q *= &self.d_pow[self.cyc(sigma)];
        }
        if role.left {
            q *= &self.bond_pow[self.cyc(alpha)];
        }
        match delta {
            Some(delta) => q *= &self.bond_pow[self.cyc_div(sigma, delta)],
            None => q *= &self.bond_pow[self.cyc(sigma)],
        }
        let mut e_exp = 0;
        match upper {
            Some((eps, zeta)) => e_exp += self.cyc_div(beta, zeta) + self.cyc_div(eps, gamma),
            None => e_exp += self.cyc(beta) + self.cyc(gamma),
        }
        if role.bottom {
            e_exp += self.cyc(beta) + self.cyc(gamma);
        }
        &Surd::rational(q) * &self.e_pow[e_exp]
    }

    /// Calls `f(α, β, γ, σ, rest)` for every term of the entry at `free`.
    fn for_terms(&self, role: SiteRole, free: &[PermIndex], mut f: impl FnMut(PermIndex, PermIndex, PermIndex, PermIndex, Surd)) {
        let legs = role.legs();
        let n = self.g.order();
        let get = |leg: BlockLeg| legs.iter().position(|&l| l == leg).map(|i| free[i]);
        let delta = get(BlockLeg::Delta);
        let upper = get(BlockLeg::Epsilon).zip(get(BlockLeg::Zeta));
        let all = |x: Option<PermIndex>| -> Vec<PermIndex> { x.map_or((0..n).collect(), |a| vec![a]) };
        let (alphas, betas, gammas) = (all(get(BlockLeg::Alpha)), all(get(BlockLeg::Beta)), all(get(BlockLeg::Gamma)));
        for &alpha in &alphas {
            for &beta in &betas {
                for &gamma in &gammas {
                    for sigma in 0..n {
                        f(alpha, beta, gamma, sigma, self.site_rest(role, alpha, beta, gamma, sigma, delta, upper));
                    }
                }
            }
        }
    }

    /// Literal entry of a site tensor at `free` (in [`PermBlock::legs`] order).
    fn entry(&self, role: SiteRole, free: &[PermIndex]) -> SlotPoly {
        let mut out = SlotPoly::zero(self.g.class_count(), role.a_slot, role.b_slot);
        let bc = out.b_classes;
        self.for_terms(role, free, |alpha, beta, gamma, sigma, rest| {
            let w = Surd::rational(self.wg(beta, alpha) * self.wg(sigma, gamma));
            let i = if role.a_slot { self.g.class_of(alpha) } else { 0 };
            let j = if role.b_slot { self.g.class_of(sigma) } else { 0 };
            out.coeffs[i * bc + j] += &(&w * &rest);
        });
        out
    }

    /// Entry of a slot-free site tensor with `Wg(·)` of `Û` and `Ũ` replaced
    /// by per-permutation values `w_hat`, `w_tilde`.
    pub(crate) fn entry_with(&self, kind: BlockKind, free: &[PermIndex], w_hat: &[C64], w_tilde: &[C64]) -> C64 {
        let role = kind.role();
        let mut acc = C64::new(0.0, 0.0);
        self.for_terms(role, free, |alpha, beta, gamma, sigma, rest| {
            acc += w_hat[self.g.div(beta, alpha)] * w_tilde[self.g.div(sigma, gamma)] * Scalar::to_c64(&rest);
        });
        acc
    }

    pub(crate) fn group(&self) -> &SymmetricGroup {
        &self.g
    }

    /// Free legs of a site tensor.
    pub fn legs(kind: BlockKind) -> Vec<BlockLeg> {
        kind.role().legs()
    }

    fn materialize(&self, role: SiteRole) -> Result<PermBlock> {
        let legs = role.legs();
        let n = self.g.order();
        let size = n.checked_pow(legs.len() as u32).filter(|&s| s <= 1 << 20).ok_or_else(|| Error::Budget(format!("{} entries of {} legs at k={}", n, legs.len(), self.k)))?;
        let mut entries = Vec::with_capacity(size);
        let mut idx = vec![0; legs.len()];
        for _ in 0..size {
            entries.push(self.entry(role, &idx));
            for slot in idx.iter_mut().rev() {
                *slot += 1;
                if *slot < n {
                    break;
                }
                *slot = 0;
            }
        }
        Ok(PermBlock {
            k: self.k,
            legs,
            a_slot: role.a_slot,
            b_slot: role.b_slot,
            entries,
        })
    }
}

/// A site tensor over permutation-valued legs, row-major over [`Self::legs`].
#[derive(Clone, Debug)]
pub struct PermBlock {
    pub k: usize,
    pub legs: Vec<BlockLeg>,
    pub a_slot: bool,
    pub b_slot: bool,
    pub entries: Vec<SlotPoly>,
}

impl PermBlock {
    pub fn get(&self, idx: &[PermIndex]) -> &SlotPoly {
        let n = factorial(self.k);
        let flat = idx.iter().fold(0, |acc, &i| acc * n + i);
        &self.entries[flat]
    }
}

/// Site tensor of the generic grid. Fails with a budget error when it would
/// exceed 2²⁰ entries.
pub fn block(kind: BlockKind, k: usize, d: usize, bond: usize) -> Result<PermBlock> {
    PepsBlockSet::new(k, d, bond)?.materialize(kind.role())
}

/// Site tensor of the boundary column.
pub fn special_block(kind: SpecialKind, k: usize, d: usize, bond: usize) -> Result<PermBlock> {
    PepsBlockSet::new(k, d, bond)?.materialize(kind.role())
}

/// Lazily evaluated entry of a generic site tensor.
pub fn block_entry(kind: BlockKind, k: usize, d: usize, bond: usize, free: &[PermIndex]) -> Result<SlotPoly> {
    let set = PepsBlockSet::new(k, d, bond)?;
    let role = kind.role();
    if free.len() != role.legs().len() || free.iter().any(|&i| i >= set.g.order()) {
        return Err(Error::Invalid(format!("{kind:?} takes {} permutation indices below {}", role.legs().len(), set.g.order())));
    }
    Ok(set.entry(role, free))
}

/// Dense tensor over labelled permutation axes, each of size `n`.
struct State<S> {
    n: usize,
    axes: Vec<u32>,
    data: Vec<S>,
}

impl<S: Scalar> State<S> {
    fn scalar(n: usize) -> Self {
        Self {
            n,
            axes: Vec::new(),
            data: vec![S::s_one()],
        }
    }

    fn pos(&self, label: u32) -> usize {
        self.axes.iter().position(|&a| a == label).expect("axis present")
    }

    fn split(&self, p: usize) -> (usize, usize) {
        (self.n.pow(p as u32), self.n.pow((self.axes.len() - p - 1) as u32))
    }

    /// Appends an axis carrying `v`.
    fn push(&mut self, label: u32, v: &[S]) {
        let mut out = Vec::with_capacity(self.data.len() * self.n);
        for x in &self.data {
            for y in v {
                out.push(x.s_mul(y));
            }
        }
        self.data = out;
        self.axes.push(label);
    }

    /// Multiplies entrywise by `v[axis]`.
    fn scale(&mut self, label: u32, v: &[S]) {
        let (outer, inner) = self.split(self.pos(label));
        let n = self.n;
        for o in 0..outer {
            for (x, vx) in v.iter().enumerate() {
                let base = (o * n + x) * inner;
                for val in &mut self.data[base..base + inner] {
                    *val = val.s_mul(vx);
                }
            }
        }
    }

    /// Multiplies entrywise by `m[a][b]`.
    fn couple(&mut self, a: u32, b: u32, m: &[S]) {
        let n = self.n;
        let w = self.axes.len();
        let (pa, pb) = (self.pos(a), self.pos(b));
        let (sa, sb) = (n.pow((w - pa - 1) as u32), n.pow((w - pb - 1) as u32));
        for (idx, val) in self.data.iter_mut().enumerate() {
            let (x, y) = ((idx / sa) % n, (idx / sb) % n);
            *val = val.s_mul(&m[x * n + y]);
        }
    }

    /// Appends axis `new` with `m[axis][new]`, keeping `axis`.
    fn branch(&mut self, label: u32, m: &[S], new: u32) {
        let n = self.n;
        let s = n.pow((self.axes.len() - self.pos(label) - 1) as u32);
        let mut out = Vec::with_capacity(self.data.len() * n);
        for (idx, val) in self.data.iter().enumerate() {
            let x = (idx / s) % n;
            for y in 0..n {
                out.push(val.s_mul(&m[x * n + y]));
            }
        }
        self.data = out;
        self.axes.push(new);
    }

    /// Replaces `axis` by `new` through `Σ_x state[x] m[x][new]`.
    fn contract(&mut self, label: u32, m: &[S], new: u32) {
        let p = self.pos(label);
        let (outer, inner) = self.split(p);
        let n = self.n;
        let mut out = vec![S::s_zero(); self.data.len()];
        for o in 0..outer {
            for x in 0..n {
                let src = (o * n + x) * inner;
                for y in 0..n {
                    let c = &m[x * n + y];
                    if c.s_is_zero() {
                        continue;
                    }
                    let dst = (o * n + y) * inner;
                    for i in 0..inner {
                        out[dst + i].add_assign_prod(&self.data[src + i], c);
                    }
                }
            }
        }
        self.data = out;
        self.axes[p] = new;
    }

    /// Removes `axis` through `Σ_x state[x] v[x]`.
    fn close(&mut self, label: u32, v: &[S]) {
        let p = self.pos(label);
        let (outer, inner) = self.split(p);
        let n = self.n;
        let mut out = vec![S::s_zero(); outer * inner];
        for o in 0..outer {
            for (x, vx) in v.iter().enumerate() {
                let src = (o * n + x) * inner;
                for i in 0..inner {
                    out[o * inner + i].add_assign_prod(&self.data[src + i], vx);
                }
            }
        }
        self.data = out;
        self.axes.remove(p);
    }
}

const ALPHA: u32 = 0;
const BETA: u32 = 100;
const GAMMA: u32 = 200;
const SIGMA: u32 = 300;

/// Weight tables in a scalar type, row-major `n × n`.
struct Tables<S> {
    n: usize,
    /// `Wg(yx⁻¹)`.
    wg: Vec<S>,
    /// `d^{#(xy⁻¹)}`.
    d_link: Vec<S>,
    /// `D^{#(xy⁻¹)}`.
    bond_link: Vec<S>,
    /// `e^{#(xy⁻¹)}`.
    e_link: Vec<S>,
    d_cap: Vec<S>,
    bond_cap: Vec<S>,
    e_cap: Vec<S>,
    ones: Vec<S>,
    /// `tr[P_xᵀ A^{⊗k}]` and `tr[P_x B^{⊗k}]`.
    a_cap: Vec<S>,
    b_cap: Vec<S>,
}

impl<S: Scalar> Tables<S> {
    fn new(set: &PepsBlockSet, pa: &[S], pb: &[S]) -> Self {
        let g = &set.g;
        let n = g.order();
        let pair = |f: &dyn Fn(PermIndex, PermIndex) -> S| -> Vec<S> { (0..n * n).map(|i| f(i / n, i % n)).collect() };
        Self {
            n,
            wg: pair(&|x, y| S::from_q(set.wg(y, x))),
            d_link: pair(&|x, y| S::from_q(&set.d_pow[set.cyc_div(x, y)])),
            bond_link: pair(&|x, y| S::from_q(&set.bond_pow[set.cyc_div(x, y)])),
            e_link: pair(&|x, y| S::from_surd(&set.e_pow[set.cyc_div(x, y)])),
            d_cap: (0..n).map(|x| S::from_q(&set.d_pow[set.cyc(x)])).collect(),
            bond_cap: (0..n).map(|x| S::from_q(&set.bond_pow[set.cyc(x)])).collect(),
            e_cap: (0..n).map(|x| S::from_surd(&set.e_pow[set.cyc(x)])).collect(),
            ones: vec![S::s_one(); n],
            a_cap: (0..n).map(|x| pa[g.class_of(x)].clone()).collect(),
            b_cap: (0..n).map(|x| pb[g.class_of(x)].clone()).collect(),
        }
    }

    /// `m[x][y] · v[x]` (rows) or `m[x][y] · v[y]` (columns).
    fn weighted(&self, m: &[S], v: &[S], rows: bool) -> Vec<S> {
        let n = self.n;
        (0..n * n).map(|i| m[i].s_mul(&v[if rows { i / n } else { i % n }])).collect()
    }
}

/// Unnormalized average of a `rows × cols` grid with `A` entering at
/// `(a_row, 0)` and `B` read off at `(b_row, cols − 1)`.
fn sweep<S: Scalar>(t: &Tables<S>, rows: usize, cols: usize, a_row: usize, b_row: usize) -> S {
    let n = t.n;
    let r_u = rows as u32;
    let mut st = State::<S>::scalar(n);
    for r in 0..r_u {
        st.push(ALPHA + r, &t.bond_cap);
    }
    let plain_in = t.weighted(&t.wg, &t.d_cap, true);
    let a_in = t.weighted(&t.wg, &t.a_cap, true);
    let plain_out = t.weighted(&t.wg, &t.d_cap, false);
    let b_out = t.weighted(&t.wg, &t.b_cap, false);
    for c in 0..cols {
        for r in 0..rows {
            let m = if c == 0 && r == a_row { &a_in } else { &plain_in };
            st.contract(ALPHA + r as u32, m, BETA + r as u32);
        }
        // vertical mixing: β_r couples to γ_r through q and to γ_{r±1} through
        // the split vertical bond
        st.scale(BETA, &t.e_cap);
        st.scale(BETA + r_u - 1, &t.e_cap);
        for r in 0..r_u {
            let b = BETA + r;
            let mut fresh: Vec<(u32, &[S])> = Vec::new();
            if r >= 1 {
                st.couple(b, GAMMA + r - 1, &t.e_link);
            }
            if r == 0 {
                fresh.push((GAMMA, &t.d_link));
            } else {
                st.couple(b, GAMMA + r, &t.d_link);
            }
            if r + 1 < r_u {
                fresh.push((GAMMA + r + 1, &t.e_link));
            }
            match fresh.split_last() {
                None => st.close(b, &t.ones),
                Some((&(last, lm), init)) => {
                    for &(label, m) in init {
                        st.branch(b, m, label);
                    }
                    st.contract(b, lm, last);
                }
            }
        }
        st.scale(GAMMA, &t.e_cap);
        st.scale(GAMMA + r_u - 1, &t.e_cap);
        for r in 0..r_u {
            let last = c + 1 == cols;
            let m = if last && r as usize == b_row { &b_out } else { &plain_out };
            st.contract(GAMMA + r, m, SIGMA + r);
            if last {
                st.close(SIGMA + r, &t.bond_cap);
            } else {
                st.contract(SIGMA + r, &t.bond_link, ALPHA + r);
            }
        }
    }
    debug_assert!(st.axes.is_empty());
    st.data.swap_remove(0)
}

/// `(d^{rows·cols} D^{rows} e^{2·cols})^k`: the diagram with `A = B = I`
/// before averaging.
pub fn grid_norm(k: usize, d: usize, bond: usize, rows: usize, cols: usize) -> Q {
    let base = q_pow(d as u64, rows * cols) * q_pow(bond as u64, rows + cols);
    let mut out = Q::one();
    for _ in 0..k {
        out *= &base;
    }
    out
}

fn average(set: &PepsBlockSet, a: &TraceData, b: &TraceData, cols: usize, a_row: usize, b_row: usize) -> MomentValue {
    let (ea, fa) = class_traces(a, set.classes());
    let (eb, fb) = class_traces(b, set.classes());
    let norm = grid_norm(set.k, set.d, set.bond, TEMPLATE_ROWS, cols);
    if let (Some(pa), Some(pb)) = (ea, eb) {
        let pa: Vec<Surd> = pa.into_iter().map(Surd::rational).collect();
        let pb: Vec<Surd> = pb.into_iter().map(Surd::rational).collect();
        let t = Tables::new(set, &pa, &pb);
        let v = sweep(&t, TEMPLATE_ROWS, cols, a_row, b_row);
        if let Some(q) = v.as_rational() {
            return MomentValue::Exact(q / &norm);
        }
        return MomentValue::Float(v.to_c64() / Scalar::to_c64(&norm));
    }
    let t = Tables::new(set, &fa, &fb);
    MomentValue::Float(sweep(&t, TEMPLATE_ROWS, cols, a_row, b_row) / Scalar::to_c64(&norm))
}

fn check_grid_degree(k: usize, max: usize) -> Result<()> {
    if k == 0 || k > max {
        return Err(Error::DegreeOutOfRange { degree: k, max });
    }
    Ok(())
}

/// Generic grid of three rows and `s + 2` columns, from trace data.
pub fn avg_moment_d2_peps_traces(k: usize, d: usize, bond: usize, s: usize, a: &TraceData, b: &TraceData) -> Result<MomentValue> {
    check_grid_degree(k, MAX_GRID_DEGREE)?;
    let set = PepsBlockSet::new(k, d, bond)?;
    Ok(average(&set, a, b, s + 2, GENERIC_OPERATOR_ROW, GENERIC_OPERATOR_ROW))
}

/// Boundary column of three sites, from trace data.
pub fn avg_moment_d1_peps_traces(k: usize, d: usize, bond: usize, a: &TraceData, b: &TraceData) -> Result<MomentValue> {
    check_grid_degree(k, MAX_COLUMN_DEGREE)?;
    let set = PepsBlockSet::new(k, d, bond)?;
    Ok(average(&set, a, b, 1, SPECIAL_OPERATOR_ROW, SPECIAL_OPERATOR_ROW))
}

fn check_ops(d: usize, a: &Operator, b: &Operator) -> Result<()> {
    if a.dim() != d || b.dim() != d {
        return Err(Error::DimensionMismatch(format!("operators of dimension {} and {} for d={d}", a.dim(), b.dim())));
    }
    Ok(())
}

/// Averaged `k`-th moment of the generic PEPS correlation with `s` bulk
/// columns.
pub fn avg_moment_d2_peps(k: usize, d: usize, bond: usize, s: usize, a: &Operator, b: &Operator) -> Result<MomentResult> {
    check_ops(d, a, b)?;
    let v = avg_moment_d2_peps_traces(k, d, bond, s, &a.trace_powers(k), &b.trace_powers(k))?;
    Ok(MomentResult::new(MomentKind::PepsD2, k, d, bond, Some(s), a.label(), b.label(), v))
}

/// Averaged `k`-th moment of the PEPS boundary correlation.
pub fn avg_moment_d1_peps(k: usize, d: usize, bond: usize, a: &Operator, b: &Operator) -> Result<MomentResult> {
    check_ops(d, a, b)?;
    let v = avg_moment_d1_peps_traces(k, d, bond, &a.trace_powers(k), &b.trace_powers(k))?;
    Ok(MomentResult::new(MomentKind::PepsD1, k, d, bond, None, a.label(), b.label(), v))
}

/// Sum over every free index of the product of literal site tensors on a
/// `3 × cols` grid. Exponential in the grid size; for cross-checks only.
pub fn contract_blocks(k: usize, d: usize, bond: usize, cols: usize, a: &TraceData, b: &TraceData) -> Result<C64> {
    let set = PepsBlockSet::new(k, d, bond)?;
    let n = set.g.order();
    let (_, pa) = class_traces(a, set.classes());
    let (_, pb) = class_traces(b, set.classes());
    let special = cols == 1;
    let roles: Vec<Vec<SiteRole>> = (0..TEMPLATE_ROWS)
        .map(|r| {
            (0..cols)
                .map(|c| {
                    if special {
                        SpecialKind::ALL[r].role()
                    } else {
                        let kind = match (r, c == 0, c + 1 == cols) {
                            (0, true, _) => BlockKind::TopLeft,
                            (0, _, true) => BlockKind::TopRight,
                            (0, _, _) => BlockKind::Top,
                            (2, true, _) => BlockKind::BottomLeft,
                            (2, _, true) => BlockKind::BottomRight,
                            (2, _, _) => BlockKind::Bottom,
                            (_, true, _) => BlockKind::Left,
                            (_, _, true) => BlockKind::Right,
                            _ => BlockKind::Bulk,
                        };
                        kind.role()
                    }
                })
                .collect()
        })
        .collect();
    let blocks: Vec<Vec<PermBlock>> = roles.iter().map(|row| row.iter().map(|&r| set.materialize(r)).collect::<Result<Vec<_>>>()).collect::<Result<_>>()?;
    // shared indices: α for columns ≥ 1, β and γ for rows above the bottom
    let alpha_at = |r: usize, c: usize| r * (cols - 1) + (c - 1);
    let n_alpha = TEMPLATE_ROWS * (cols - 1);
    let bg_at = |r: usize, c: usize| n_alpha + 2 * (r * cols + c);
    let total = n_alpha + 2 * (TEMPLATE_ROWS - 1) * cols;
    let count = n.checked_pow(total as u32).filter(|&c| c <= 1 << 24).ok_or_else(|| Error::Budget(format!("{total} shared indices at k={k}")))?;
    let mut acc = C64::new(0.0, 0.0);
    let mut idx = vec![0; total];
    for _ in 0..count {
        let mut prod = C64::new(1.0, 0.0);
        for r in 0..TEMPLATE_ROWS {
            for c in 0..cols {
                let blk = &blocks[r][c];
                let free: Vec<PermIndex> = blk
                    .legs
                    .iter()
                    .map(|leg| match leg {
                        BlockLeg::Alpha => idx[alpha_at(r, c)],
                        BlockLeg::Delta => idx[alpha_at(r, c + 1)],
                        BlockLeg::Beta => idx[bg_at(r, c)],
                        BlockLeg::Gamma => idx[bg_at(r, c) + 1],
                        BlockLeg::Epsilon => idx[bg_at(r - 1, c)],
                        BlockLeg::Zeta => idx[bg_at(r - 1, c) + 1],
                    })
                    .collect();
                prod *= blk.get(&free).eval(&pa, &pb);
            }
        }
        acc += prod;
        for slot in idx.iter_mut().rev() {
            *slot += 1;
            if *slot < n {
                break;
            }
            *slot = 0;
        }
    }
    Ok(acc / Scalar::to_c64(&grid_norm(k, d, bond, TEMPLATE_ROWS, cols)))
}
