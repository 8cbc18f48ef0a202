//! Random dual-unitary gates, their residuals, and operator evolution along
//! the light cone.
//!
//! ```bash
//! cargo run --example dual_unitary_gates
//! ```

use tnmoments::densealg::RngStream;
use tnmoments::dualunitary::{build_d2, check_dual, cnot_matrix, evolve_operator, DualGateParams, Direction, DUAL_TOLERANCE};
use tnmoments::operators::Operator;

fn main() -> tnmoments::Result<()> {
    let mut rng = RngStream::new(3, 0);
    let params = DualGateParams::random(&mut rng);
    let gate = build_d2(&params)?;
    let r = gate.residuals();
    println!("random gate (J = {:.3}): temporal {:.1e}, spatial {:.1e}/{:.1e}", params.j, r.temporal, r.spatial_left, r.spatial_right);

    let cnot = check_dual(&cnot_matrix(), 2)?;
    println!("CNOT: temporal {:.1e}, spatial {:.2}, passes {}", cnot.temporal, cnot.spatial_left, cnot.passes(DUAL_TOLERANCE));

    // σ_z travelling along the light cone: the Hilbert-Schmidt weight can only shrink.
    let z = Operator::pauli_z();
    for steps in [0, 1, 2, 4, 8] {
        let a = evolve_operator(z.matrix(), &gate, steps, Direction::Plus)?;
        println!("  M₊^{steps} σ_z: ‖·‖_F = {:.4}", a.norm());
    }
    Ok(())
}
