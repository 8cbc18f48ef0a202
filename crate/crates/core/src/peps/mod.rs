//! Disordered solvable PEPS built from pairs of unitaries.
//!
//! A unit is `Û` on `(pa, h)` → `(q, up, dn)` followed by `Ũ` on
//! `(q, fa, fb)` → `(ps, h')`. `pa`/`ps` are the physical input and output,
//! `h`/`h'` the left and right bonds of dimension `D`, and the vertical bond
//! is split into halves of dimension `e = √D`: `up` feeds `fb` of the unit
//! above, `dn` feeds `fa` of the unit below. Joint indices are row-major in
//! the listed order, e.g. `Û` output `q·D + up·e + dn`.
//!
//! In a correlation diagram every unit carries the identity on its physical
//! input and is traced on its physical output, except where `A` enters and
//! `B` is read off. Column 0 has identity caps on its left bonds, the last
//! column is traced on its right bonds, the top row traces `up` and caps `fa`,
//! and the bottom row traces `dn` and caps `fb`.

mod register;

use std::sync::OnceLock;

use num_integer::Roots;
use serde::{Deserialize, Serialize};

use crate::densealg::{contract, haar_unitary, kron, max_abs, partial_trace_first, CMat, ComplexTensor, RngStream, UnitaryMatrix, C64};
use crate::mps::{classify, transfer_matrix_mat, CorrelationCase};
use crate::{Error, Result};
use register::{Register, WireId};

/// Residual bound used for accepting units.
pub const PEPS_TOLERANCE: f64 = 1e-10;

/// `e` with `e² = D`.
pub fn vertical_dim(bond: usize) -> Result<usize> {
    let e = bond.sqrt();
    if e * e != bond || bond == 0 {
        return Err(Error::Invalid(format!("bond dimension D={bond} is not a perfect square")));
    }
    Ok(e)
}

/// Residuals of the unit map `(pa, h, fa, fb) → (ps, h', up, dn)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnitResiduals {
    pub unitarity: f64,
    /// `tr_{ps,h'}[U (I ⊗ ρ_{fa,fb}) U†] = d tr(ρ) I_{up,dn}`.
    pub simplicity_in: f64,
    /// `tr_{pa,h}[U† (I ⊗ ρ_{up,dn}) U] = d tr(ρ) I_{fa,fb}`.
    pub simplicity_out: f64,
}

impl UnitResiduals {
    pub fn max(&self) -> f64 {
        self.unitarity.max(self.simplicity_in).max(self.simplicity_out)
    }
}

/// One site of the PEPS.
#[derive(Clone, Debug)]
pub struct PepsUnit {
    d: usize,
    bond: usize,
    e: usize,
    uhat: UnitaryMatrix,
    utilde: UnitaryMatrix,
    residuals: OnceLock<UnitResiduals>,
}

impl PepsUnit {
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn bond(&self) -> usize {
        self.bond
    }

    pub fn e(&self) -> usize {
        self.e
    }

    pub fn uhat(&self) -> &CMat {
        self.uhat.matrix()
    }

    pub fn utilde(&self) -> &CMat {
        self.utilde.matrix()
    }

    /// Residuals, evaluated on first use for sampled units.
    pub fn residuals(&self) -> UnitResiduals {
        *self.residuals.get_or_init(|| unit_residuals(&self.matrix(), self.d, self.bond).expect("dimensions agree"))
    }

    /// Haar pair, `Û` drawn first. Residuals are deferred.
    pub fn sample(d: usize, bond: usize, rng: &mut RngStream) -> Result<Self> {
        let e = vertical_dim(bond)?;
        let uhat = haar_unitary(d * bond, rng);
        let utilde = haar_unitary(d * bond, rng);
        Ok(PepsUnit {
            d,
            bond,
            e,
            uhat,
            utilde,
            residuals: OnceLock::new(),
        })
    }

    /// The unit map, rows `(ps, h', up, dn)` and columns `(pa, h, fa, fb)`.
    pub fn matrix(&self) -> CMat {
        composite(self.uhat(), self.utilde(), self.d, self.bond, self.e)
    }

    /// The unit as a tensor with legs `phys_out, phys_in, left, right,
    /// up_out, up_in, down_out, down_in` (`up_in` = `fa`, `down_in` = `fb`).
    pub fn tensor(&self) -> ComplexTensor {
        let (d, bond, e) = (self.d, self.bond, self.e);
        let m = self.matrix();
        ComplexTensor::from_grouped_matrix(
            &m,
            &[("phys_out", d), ("right", bond), ("up_out", e), ("down_out", e)],
            &[("phys_in", d), ("left", bond), ("up_in", e), ("down_in", e)],
        )
        .expect("dimensions agree")
        .permuted(&["phys_out", "phys_in", "left", "right", "up_out", "up_in", "down_out", "down_in"])
        .expect("legs exist")
    }
}

fn unit_dims(u: &UnitaryMatrix, d: usize, bond: usize) -> Result<()> {
    if u.dim() != d * bond {
        return Err(Error::DimensionMismatch(format!("unitary of dimension {} for dD={}", u.dim(), d * bond)));
    }
    Ok(())
}

/// Assembles a unit and records its residuals.
pub fn build_unit(utilde: UnitaryMatrix, uhat: UnitaryMatrix, d: usize, bond: usize) -> Result<PepsUnit> {
    let e = vertical_dim(bond)?;
    unit_dims(&utilde, d, bond)?;
    unit_dims(&uhat, d, bond)?;
    let m = composite(uhat.matrix(), utilde.matrix(), d, bond, e);
    let residuals = OnceLock::from(unit_residuals(&m, d, bond)?);
    Ok(PepsUnit {
        d,
        bond,
        e,
        uhat,
        utilde,
        residuals,
    })
}

/// `U[(ps,h',up,dn),(pa,h,fa,fb)] = Σ_q Ũ[(ps,h'),(q,fa,fb)] Û[(q,up,dn),(pa,h)]`.
fn composite(uhat: &CMat, utilde: &CMat, d: usize, bond: usize, e: usize) -> CMat {
    let n = d * bond * bond;
    let mut m = CMat::zeros(n, n);
    for ps in 0..d {
        for hp in 0..bond {
            for up in 0..e {
                for dn in 0..e {
                    let row = (ps * bond + hp) * bond + up * e + dn;
                    for pa in 0..d {
                        for h in 0..bond {
                            for fa in 0..e {
                                for fb in 0..e {
                                    let col = (pa * bond + h) * bond + fa * e + fb;
                                    let mut acc = C64::new(0.0, 0.0);
                                    for q in 0..d {
                                        acc += utilde[(ps * bond + hp, q * bond + fa * e + fb)] * uhat[(q * bond + up * e + dn, pa * bond + h)];
                                    }
                                    m[(row, col)] = acc;
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    m
}

/// Negative control: `Û` on `(pa, fa, fb)` and `Ũ` on `(q, h)`, which is still
/// unitary but no longer simple.
pub fn miswired_matrix(uhat: &CMat, utilde: &CMat, d: usize, bond: usize) -> Result<CMat> {
    let e = vertical_dim(bond)?;
    let n = d * bond * bond;
    let mut m = CMat::zeros(n, n);
    for ps in 0..d {
        for hp in 0..bond {
            for up in 0..e {
                for dn in 0..e {
                    let row = (ps * bond + hp) * bond + up * e + dn;
                    for pa in 0..d {
                        for h in 0..bond {
                            for fa in 0..e {
                                for fb in 0..e {
                                    let col = (pa * bond + h) * bond + fa * e + fb;
                                    let mut acc = C64::new(0.0, 0.0);
                                    for q in 0..d {
                                        acc += utilde[(ps * bond + hp, q * bond + h)] * uhat[(q * bond + up * e + dn, pa * bond + fa * e + fb)];
                                    }
                                    m[(row, col)] = acc;
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(m)
}

/// Unitarity and both simplicity residuals of a unit map given as a matrix
/// with rows `(ps, h', up, dn)` and columns `(pa, h, fa, fb)`.
pub fn unit_residuals(m: &CMat, d: usize, bond: usize) -> Result<UnitResiduals> {
    let n = d * bond * bond;
    if m.shape() != (n, n) {
        return Err(Error::DimensionMismatch(format!("unit map is {:?}, expected {n}x{n}", m.shape())));
    }
    let id = CMat::identity(n, n);
    let unitarity = max_abs(&(m * m.adjoint() - &id)).max(max_abs(&(m.adjoint() * m - &id)));
    let id_outer = CMat::identity(d * bond, d * bond);
    let id_v = CMat::identity(bond, bond);
    let mut simplicity_in: f64 = 0.0;
    let mut simplicity_out: f64 = 0.0;
    for i in 0..bond {
        for j in 0..bond {
            let mut rho = CMat::zeros(bond, bond);
            rho[(i, j)] = C64::new(1.0, 0.0);
            let tr = rho.trace();
            let lifted = kron(&id_outer, &rho);
            let fwd = partial_trace_first(&(m * &lifted * m.adjoint()), d * bond, bond);
            let bwd = partial_trace_first(&(m.adjoint() * &lifted * m), d * bond, bond);
            let want = &id_v * (tr * d as f64);
            simplicity_in = simplicity_in.max(max_abs(&(fwd - &want)));
            simplicity_out = simplicity_out.max(max_abs(&(bwd - &want)));
        }
    }
    Ok(UnitResiduals {
        unitarity,
        simplicity_in,
        simplicity_out,
    })
}

/// Both simplicity residuals of a unit.
pub fn check_simplicity(unit: &PepsUnit) -> (f64, f64) {
    let r = unit.residuals();
    (r.simplicity_in, r.simplicity_out)
}

/// Column of `m` units with periodic vertical wiring, as a matrix with rows
/// `(ps_1..ps_m, h'_1..h'_m)` and columns `(pa_1..pa_m, h_1..h_m)`.
pub fn column_matrix(units: &[PepsUnit]) -> Result<CMat> {
    let m = units.len();
    if m == 0 {
        return Err(Error::Invalid("empty column".into()));
    }
    let (d, bond, e) = (units[0].d, units[0].bond, units[0].e);
    let mut tensors = Vec::with_capacity(2 * m);
    for u in units {
        tensors.push(ComplexTensor::from_grouped_matrix(u.uhat(), &[("q", d), ("up", e), ("dn", e)], &[("pa", d), ("h", bond)])?);
        tensors.push(ComplexTensor::from_grouped_matrix(u.utilde(), &[("ps", d), ("hp", bond)], &[("q", d), ("fa", e), ("fb", e)])?);
    }
    let refs: Vec<&ComplexTensor> = tensors.iter().collect();
    let hat = |r: usize| 2 * r;
    let tilde = |r: usize| 2 * r + 1;
    let mut pairings = Vec::new();
    for r in 0..m {
        pairings.push(((hat(r), "q"), (tilde(r), "q")));
        pairings.push(((hat(r), "up"), (tilde((r + m - 1) % m), "fb")));
        pairings.push(((hat(r), "dn"), (tilde((r + 1) % m), "fa")));
    }
    let names: Vec<String> = (0..m)
        .flat_map(|r| [format!("ps{r}"), format!("hp{r}"), format!("pa{r}"), format!("h{r}")])
        .collect();
    let mut open = Vec::new();
    for r in 0..m {
        open.push(((tilde(r), "ps"), names[4 * r].as_str()));
    }
    for r in 0..m {
        open.push(((tilde(r), "hp"), names[4 * r + 1].as_str()));
    }
    for r in 0..m {
        open.push(((hat(r), "pa"), names[4 * r + 2].as_str()));
    }
    for r in 0..m {
        open.push(((hat(r), "h"), names[4 * r + 3].as_str()));
    }
    let t = contract(&refs, &pairings, &open)?;
    let rows: Vec<&str> = (0..m).map(|r| names[4 * r].as_str()).chain((0..m).map(|r| names[4 * r + 1].as_str())).collect();
    let cols: Vec<&str> = (0..m).map(|r| names[4 * r + 2].as_str()).chain((0..m).map(|r| names[4 * r + 3].as_str())).collect();
    t.to_matrix(&rows, &cols)
}

/// Column transfer matrix on `D^m ⊗ D^m`, normalized by `1/d^m`.
pub fn column_transfer(units: &[PepsUnit]) -> Result<CMat> {
    let w = column_matrix(units)?;
    let m = units.len() as u32;
    transfer_matrix_mat(&w, units[0].d.pow(m), units[0].bond.pow(m))
}

/// Sites, separations and time of a two-point correlation on the lattice.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PepsGeometry {
    pub x1: i64,
    pub x2: i64,
    pub r1: i64,
    pub r2: i64,
    pub t: usize,
}

impl PepsGeometry {
    pub fn case(&self) -> Result<CorrelationCase> {
        classify_peps(self.x1, self.x2, self.r1, self.r2, self.t)
    }
}

/// Case split in the horizontal direction, gated by the vertical light cone
/// `Θ(4t + (x₂ mod 2) + 1 − r₂)` with `Θ(0) = 1`.
pub fn classify_peps(x1: i64, x2: i64, r1: i64, r2: i64, t: usize) -> Result<CorrelationCase> {
    if r2 < 0 {
        return Err(Error::Invalid(format!("vertical separation must be non-negative, got {r2}")));
    }
    let horizontal = classify(x1, r1, t);
    if horizontal.is_zero() {
        return Ok(horizontal);
    }
    if 4 * t as i64 + x2.rem_euclid(2) + 1 - r2 < 0 {
        return Ok(CorrelationCase::ZeroVerticalCone);
    }
    Ok(horizontal)
}

/// Parameters of a random disordered solvable PEPS.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PepsEnsembleSpec {
    pub d: usize,
    #[serde(rename = "D")]
    pub bond: usize,
    pub v: usize,
    pub m: usize,
    pub geometry: PepsGeometry,
}

impl PepsEnsembleSpec {
    /// Grid `(rows, columns)` of the implemented templates (`t = 1`, `r₂ = 0`).
    pub fn template(&self) -> Result<(usize, usize)> {
        vertical_dim(self.bond)?;
        let g = self.geometry;
        if g.t != 1 || g.r2 != 0 {
            return Err(Error::Unsupported(format!("only the t=1, r2=0 templates are implemented (got t={}, r2={})", g.t, g.r2)));
        }
        match g.case()? {
            CorrelationCase::GenericD2 { s } => {
                if self.v < s + 2 {
                    return Err(Error::Invalid(format!("block length v={} is shorter than the {} columns the diagram needs", self.v, s + 2)));
                }
                Ok((3, s + 2))
            }
            CorrelationCase::BoundaryD1 => Ok((3, 1)),
            other => Err(Error::Invalid(format!("geometry vanishes identically ({other:?})"))),
        }
    }
}

/// Units on a `rows × cols` patch, row-major, row 0 at the top.
#[derive(Clone, Debug)]
pub struct PepsGrid {
    rows: usize,
    cols: usize,
    units: Vec<PepsUnit>,
}

impl PepsGrid {
    pub fn new(rows: usize, cols: usize, units: Vec<PepsUnit>) -> Result<Self> {
        if rows == 0 || cols == 0 || units.len() != rows * cols {
            return Err(Error::Invalid(format!("{} units for a {rows}x{cols} grid", units.len())));
        }
        let (d, bond) = (units[0].d, units[0].bond);
        if units.iter().any(|u| u.d != d || u.bond != bond) {
            return Err(Error::DimensionMismatch("units of a grid must share d and D".into()));
        }
        Ok(Self { rows, cols, units })
    }

    /// Haar units drawn from one stream, `Û` before `Ũ` for each site in
    /// row-major order.
    pub fn sample(d: usize, bond: usize, rows: usize, cols: usize, rng: &mut RngStream) -> Result<Self> {
        let units = (0..rows * cols).map(|_| PepsUnit::sample(d, bond, rng)).collect::<Result<Vec<_>>>()?;
        Self::new(rows, cols, units)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn unit(&self, row: usize, col: usize) -> &PepsUnit {
        &self.units[row * self.cols + col]
    }

    pub fn d(&self) -> usize {
        self.units[0].d
    }

    pub fn bond(&self) -> usize {
        self.units[0].bond
    }

    /// Product of all input dimensions: the value of the diagram with
    /// `A = B = I`.
    pub fn norm(&self) -> f64 {
        let (d, bond, e) = (self.d() as f64, self.bond() as f64, self.units[0].e as f64);
        d.powi((self.rows * self.cols) as i32) * bond.powi(self.rows as i32) * e.powi(2 * self.cols as i32)
    }
}

/// Position of an operator on the grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Site {
    pub row: usize,
    pub col: usize,
}

enum Step<'a> {
    /// An input wire; `Some` carries an operator, `None` the identity.
    Input(WireId, usize, Option<&'a CMat>),
    Gate(&'a CMat, Vec<(WireId, usize)>, Vec<(WireId, usize)>),
    /// An output wire, traced against the operator or plainly.
    Output(WireId, usize, Option<&'a CMat>),
}

struct Wiring {
    rows: usize,
    cols: usize,
    next: WireId,
}

impl Wiring {
    fn bond(&self, row: usize, boundary: usize) -> WireId {
        (row * (self.cols + 1) + boundary) as WireId
    }

    fn fresh(&mut self) -> WireId {
        self.next += 1;
        self.next
    }
}

/// Steps of one column. Left bonds are inputs only for column 0 and right
/// bonds are outputs only for the last column; otherwise they stay open.
fn column_steps<'a>(grid: &'a PepsGrid, wiring: &mut Wiring, col: usize, a: Option<(Site, &'a CMat)>, b: Option<(Site, &'a CMat)>) -> Vec<Step<'a>> {
    let (d, bond, e) = (grid.d(), grid.bond(), grid.units[0].e);
    let rows = wiring.rows;
    let last = wiring.cols - 1;
    let op_at = |slot: Option<(Site, &'a CMat)>, row: usize| slot.filter(|(s, _)| s.row == row && s.col == col).map(|(_, m)| m);
    let mut steps = Vec::new();
    let mut q = vec![0; rows];
    let mut up = vec![0; rows];
    let mut dn = vec![0; rows];
    let tilde = |steps: &mut Vec<Step<'a>>, wiring: &mut Wiring, r: usize, q: WireId, fa: WireId, fb: WireId| {
        let ps = wiring.fresh();
        let right = wiring.bond(r, col + 1);
        steps.push(Step::Gate(grid.unit(r, col).utilde(), vec![(q, d), (fa, e), (fb, e)], vec![(ps, d), (right, bond)]));
        steps.push(Step::Output(ps, d, op_at(b, r)));
        if col == last {
            steps.push(Step::Output(right, bond, None));
        }
    };
    for r in 0..rows {
        let pa = wiring.fresh();
        let left = wiring.bond(r, col);
        steps.push(Step::Input(pa, d, op_at(a, r)));
        if col == 0 {
            steps.push(Step::Input(left, bond, None));
        }
        q[r] = wiring.fresh();
        up[r] = wiring.fresh();
        dn[r] = wiring.fresh();
        steps.push(Step::Gate(grid.unit(r, col).uhat(), vec![(pa, d), (left, bond)], vec![(q[r], d), (up[r], e), (dn[r], e)]));
        if r == 0 {
            steps.push(Step::Output(up[0], e, None));
        } else {
            let fa = if r == 1 {
                let cap = wiring.fresh();
                steps.push(Step::Input(cap, e, None));
                cap
            } else {
                dn[r - 2]
            };
            tilde(&mut steps, wiring, r - 1, q[r - 1], fa, up[r]);
        }
    }
    let r = rows - 1;
    steps.push(Step::Output(dn[r], e, None));
    let fa = if rows == 1 {
        let cap = wiring.fresh();
        steps.push(Step::Input(cap, e, None));
        cap
    } else {
        dn[r - 1]
    };
    let fb = wiring.fresh();
    steps.push(Step::Input(fb, e, None));
    tilde(&mut steps, wiring, r, q[r], fa, fb);
    steps
}

fn run_forward(reg: &mut Register, steps: &[Step]) {
    for step in steps {
        match step {
            Step::Input(id, dim, op) => {
                if let Some(m) = op {
                    reg.add(*id, *dim, Some(m));
                }
            }
            Step::Gate(g, ins, outs) => reg.apply(g, ins, outs),
            Step::Output(id, dim, op) => reg.trace(*id, *dim, *op),
        }
    }
}

/// Heisenberg picture: outputs become sources and inputs are closed.
fn run_backward(reg: &mut Register, steps: &[Step]) {
    for step in steps.iter().rev() {
        match step {
            Step::Output(id, dim, op) => {
                if let Some(m) = op {
                    reg.add(*id, *dim, Some(m));
                }
            }
            Step::Gate(g, ins, outs) => reg.apply(&g.adjoint(), outs, ins),
            Step::Input(id, dim, op) => reg.trace(*id, *dim, *op),
        }
    }
}

fn check_ops(grid: &PepsGrid, a: &CMat, b: &CMat) -> Result<()> {
    let d = grid.d();
    if a.shape() != (d, d) || b.shape() != (d, d) {
        return Err(Error::DimensionMismatch(format!("operators must be {d}x{d}")));
    }
    Ok(())
}

/// Normalized correlation with `A` entering at `a_at` and `B` read off at
/// `b_at`, evaluated column by column from the left.
pub fn grid_correlation(grid: &PepsGrid, a_at: Site, b_at: Site, a: &CMat, b: &CMat) -> Result<C64> {
    check_ops(grid, a, b)?;
    for s in [a_at, b_at] {
        if s.row >= grid.rows || s.col >= grid.cols {
            return Err(Error::Invalid(format!("site {s:?} outside the {}x{} grid", grid.rows, grid.cols)));
        }
    }
    let mut wiring = Wiring {
        rows: grid.rows,
        cols: grid.cols,
        next: ((grid.rows + 1) * (grid.cols + 1)) as WireId,
    };
    let mut reg = Register::new();
    for col in 0..grid.cols {
        let steps = column_steps(grid, &mut wiring, col, Some((a_at, a)), Some((b_at, b)));
        run_forward(&mut reg, &steps);
    }
    Ok(reg.scalar() / grid.norm())
}

/// The generic diagram: three rows, `A` in the middle of column 0 and `B` in
/// the middle of the last column. The last column is evaluated in the
/// Heisenberg picture and met with the forward state on the shared bonds.
pub fn correlation_d2_peps(grid: &PepsGrid, a: &CMat, b: &CMat) -> Result<C64> {
    check_ops(grid, a, b)?;
    if grid.rows != 3 || grid.cols < 2 {
        return Err(Error::Invalid(format!("the generic diagram needs 3 rows and at least 2 columns, got {}x{}", grid.rows, grid.cols)));
    }
    let last = grid.cols - 1;
    let a_at = Site { row: 1, col: 0 };
    let b_at = Site { row: 1, col: last };
    let mut wiring = Wiring {
        rows: grid.rows,
        cols: grid.cols,
        next: ((grid.rows + 1) * (grid.cols + 1)) as WireId,
    };
    let mut fwd = Register::new();
    for col in 0..last {
        let steps = column_steps(grid, &mut wiring, col, Some((a_at, a)), None);
        run_forward(&mut fwd, &steps);
    }
    let mut bwd = Register::new();
    let steps = column_steps(grid, &mut wiring, last, None, Some((b_at, b)));
    run_backward(&mut bwd, &steps);
    Ok(fwd.overlap(bwd) / grid.norm())
}

/// The boundary diagram: one column of three units with `A` and `B` on the
/// top unit.
pub fn correlation_d1_peps(grid: &PepsGrid, a: &CMat, b: &CMat) -> Result<C64> {
    if grid.rows != 3 || grid.cols != 1 {
        return Err(Error::Invalid(format!("the boundary diagram needs a 3x1 grid, got {}x{}", grid.rows, grid.cols)));
    }
    let top = Site { row: 0, col: 0 };
    grid_correlation(grid, top, top, a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::densealg::{unitarity_residual, LegRef};

    #[test]
    fn sampled_unit_passes_residuals() {
        let mut rng = RngStream::new(11, 0);
        let u = PepsUnit::sample(2, 4, &mut rng).unwrap();
        assert!(u.residuals().max() < 1e-12, "{:?}", u.residuals());
        assert_eq!(u.tensor().len(), 2 * 2 * 4 * 4 * 2 * 2 * 2 * 2);
    }

    #[test]
    fn miswired_unit_fails_simplicity() {
        let mut rng = RngStream::new(12, 0);
        let u = PepsUnit::sample(2, 4, &mut rng).unwrap();
        let m = miswired_matrix(u.uhat(), u.utilde(), 2, 4).unwrap();
        let r = unit_residuals(&m, 2, 4).unwrap();
        assert!(r.unitarity < 1e-12);
        assert!(r.simplicity_in > 1e-3);
    }

    #[test]
    fn identity_operators_give_one() {
        let mut rng = RngStream::new(13, 0);
        let id = CMat::identity(2, 2);
        let g = PepsGrid::sample(2, 4, 3, 3, &mut rng).unwrap();
        assert!((correlation_d2_peps(&g, &id, &id).unwrap() - 1.0).norm() < 1e-10);
        let g1 = PepsGrid::sample(2, 4, 3, 1, &mut rng).unwrap();
        assert!((correlation_d1_peps(&g1, &id, &id).unwrap() - 1.0).norm() < 1e-10);
    }

    #[test]
    fn heisenberg_meeting_matches_forward_sweep() {
        let mut rng = RngStream::new(14, 0);
        let g = PepsGrid::sample(2, 4, 3, 2, &mut rng).unwrap();
        let a = CMat::from_fn(2, 2, |i, j| C64::new((i + j) as f64, i as f64 - j as f64));
        let b = CMat::from_fn(2, 2, |i, j| C64::new(1.0 - i as f64, (i * j) as f64));
        let fwd = grid_correlation(&g, Site { row: 1, col: 0 }, Site { row: 1, col: 1 }, &a, &b).unwrap();
        let met = correlation_d2_peps(&g, &a, &b).unwrap();
        assert!((fwd - met).norm() < 1e-12);
    }

    /// Whole patch as one unitary, rows `(ps at b, other outputs)` and columns
    /// `(pa at a, other inputs)`.
    fn patch_unitary(g: &PepsGrid, a_at: Site, b_at: Site) -> CMat {
        let (rows, cols) = (g.rows(), g.cols());
        let (d, bond, e) = (g.d(), g.bond(), g.unit(0, 0).e());
        let mut tensors = Vec::new();
        let idx = |r: usize, c: usize| 2 * (r * cols + c);
        for r in 0..rows {
            for c in 0..cols {
                let u = g.unit(r, c);
                tensors.push(ComplexTensor::from_grouped_matrix(u.uhat(), &[("q", d), ("up", e), ("dn", e)], &[("pa", d), ("h", bond)]).unwrap());
                tensors.push(ComplexTensor::from_grouped_matrix(u.utilde(), &[("ps", d), ("hp", bond)], &[("q", d), ("fa", e), ("fb", e)]).unwrap());
            }
        }
        let refs: Vec<&ComplexTensor> = tensors.iter().collect();
        let mut pairings = Vec::new();
        let mut outs: Vec<(LegRefOwned, usize)> = Vec::new();
        let mut ins: Vec<(LegRefOwned, usize)> = Vec::new();
        for r in 0..rows {
            for c in 0..cols {
                let (h, t) = (idx(r, c), idx(r, c) + 1);
                pairings.push(((h, "q"), (t, "q")));
                if r > 0 {
                    pairings.push(((h, "up"), (idx(r - 1, c) + 1, "fb")));
                } else {
                    outs.push(((h, "up"), e));
                    ins.push(((t, "fa"), e));
                }
                if r + 1 < rows {
                    pairings.push(((h, "dn"), (idx(r + 1, c) + 1, "fa")));
                } else {
                    outs.push(((h, "dn"), e));
                    ins.push(((t, "fb"), e));
                }
                if c + 1 < cols {
                    pairings.push(((t, "hp"), (idx(r, c + 1), "h")));
                } else {
                    outs.push(((t, "hp"), bond));
                }
                if c == 0 {
                    ins.push(((h, "h"), bond));
                }
                let ps = ((t, "ps"), d);
                let pa = ((h, "pa"), d);
                if (Site { row: r, col: c }) == b_at {
                    outs.insert(0, ps);
                } else {
                    outs.push(ps);
                }
                if (Site { row: r, col: c }) == a_at {
                    ins.insert(0, pa);
                } else {
                    ins.push(pa);
                }
            }
        }
        let names: Vec<String> = (0..outs.len() + ins.len()).map(|i| format!("x{i}")).collect();
        let open: Vec<(LegRef, &str)> = outs.iter().chain(&ins).zip(&names).map(|(x, n)| (x.0, n.as_str())).collect();
        let t = contract(&refs, &pairings, &open).unwrap();
        let rn: Vec<&str> = names[..outs.len()].iter().map(|s| s.as_str()).collect();
        let cn: Vec<&str> = names[outs.len()..].iter().map(|s| s.as_str()).collect();
        t.to_matrix(&rn, &cn).unwrap()
    }

    type LegRefOwned = (usize, &'static str);

    #[test]
    fn grid_matches_dense_patch() {
        let mut rng = RngStream::new(15, 0);
        let a = CMat::from_fn(2, 2, |i, j| C64::new((i + 2 * j) as f64 - 1.0, i as f64 * 0.5));
        let b = CMat::from_fn(2, 2, |i, j| C64::new(1.0 - (i * j) as f64, j as f64 - i as f64));
        for (rows, cols, a_at, b_at) in [
            (1, 1, Site { row: 0, col: 0 }, Site { row: 0, col: 0 }),
            (2, 1, Site { row: 0, col: 0 }, Site { row: 1, col: 0 }),
            (2, 1, Site { row: 1, col: 0 }, Site { row: 0, col: 0 }),
            (1, 2, Site { row: 0, col: 0 }, Site { row: 0, col: 1 }),
            (1, 2, Site { row: 0, col: 1 }, Site { row: 0, col: 0 }),
        ] {
            let g = PepsGrid::sample(2, 4, rows, cols, &mut rng).unwrap();
            let w = patch_unitary(&g, a_at, b_at);
            let n = w.nrows();
            assert!(unitarity_residual(&w) < 1e-10);
            let lift = |m: &CMat| kron(m, &CMat::identity(n / 2, n / 2));
            let dense = (lift(&b) * &w * lift(&a) * w.adjoint()).trace() / g.norm();
            let got = grid_correlation(&g, a_at, b_at, &a, &b).unwrap();
            assert!((got - dense).norm() < 1e-10, "{rows}x{cols}: {got} vs {dense}");
        }
    }

    #[test]
    fn vertical_cone_gate() {
        assert_eq!(classify_peps(1, 0, 9, 0, 1).unwrap(), CorrelationCase::GenericD2 { s: 1 });
        assert_eq!(classify_peps(1, 0, 9, 6, 1).unwrap(), CorrelationCase::ZeroVerticalCone);
        assert_eq!(classify_peps(1, 1, 9, 6, 1).unwrap(), CorrelationCase::GenericD2 { s: 1 });
        assert_eq!(classify_peps(1, 1, 9, 7, 1).unwrap(), CorrelationCase::ZeroVerticalCone);
        assert_eq!(classify_peps(2, 0, 9, 0, 1).unwrap(), CorrelationCase::ZeroEvenX);
    }
}
