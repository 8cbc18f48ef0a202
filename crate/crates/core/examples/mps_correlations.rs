//! Correlations of one disordered solvable MPS: fixed points of the transfer
//! matrix, the thermodynamic-limit value, and finite-chain convergence.
//!
//! ```bash
//! cargo run --release --example mps_correlations
//! ```

use tnmoments::densealg::RngStream;
use tnmoments::dualunitary::operator_basis;
use tnmoments::mps::{convergence, correlation_d2, leading_pair, DisorderedMps};
use tnmoments::operators::Operator;

fn main() -> tnmoments::Result<()> {
    let (d, bond, s) = (2, 2, 1);
    let mps = DisorderedMps::sample(d, bond, s + 2, &mut RngStream::new(17, 0));
    let (l1, l2) = leading_pair(&mps)?;
    println!("block transfer matrix: λ₁ = {:.6}, |λ₂| = {:.4}", l1, l2.norm());

    let z = Operator::pauli_z();
    let x = Operator::pauli_x();
    for (name, a, b) in [("zz", &z, &z), ("xx", &x, &x), ("zx", &z, &x)] {
        let c = correlation_d2(&mps, a.matrix(), b.matrix(), s)?;
        println!("  D₂[{name}] = {:+.6} {:+.6}i", c.re, c.im);
    }

    let conv = convergence(&mps, &operator_basis(d), s)?;
    println!("finite chains converge with ratio {:.4} (|λ₂| = {:.4})", conv.ratio, conv.lambda2);
    for (w, e) in conv.errors.iter().step_by(4).take(6) {
        println!("  w = {w:>3}: error {e:.2e}");
    }
    Ok(())
}
