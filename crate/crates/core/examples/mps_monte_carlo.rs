//! Exact MPS moments against Monte Carlo, with the k values sharing samples.
//!
//! ```bash
//! cargo run --release --example mps_monte_carlo -- 20000
//! ```

use tnmoments::mc_oracle::{compare, mc_mps_moments, DEFAULT_THRESHOLD};
use tnmoments::mps::{MpsEnsembleSpec, MpsGeometry};
use tnmoments::mps_moments::avg_moment_d2;
use tnmoments::operators::Operator;

fn main() -> tnmoments::Result<()> {
    let n: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(20_000);
    let ks = [1, 2, 3];
    for s in 1..=2 {
        let spec = MpsEnsembleSpec { d: 2, bond: 2, v: s + 2, geometry: MpsGeometry::for_chain(s, 1) };
        for op in [Operator::pauli_x(), Operator::pauli_z()] {
            let estimates = mc_mps_moments(&spec, &ks, &op, &op, n, 100 + s as u64)?;
            for (k, est) in ks.iter().zip(&estimates) {
                let exact = avg_moment_d2(*k, 2, 2, s, &op, &op)?;
                let r = compare(&exact, est, DEFAULT_THRESHOLD)?;
                println!(
                    "s={s} {:<8} k={k}: exact {:+.4e}  mc {:+.4e} ± {:.1e}  z = {:.2} {}",
                    op.label(),
                    exact.to_c64().re,
                    est.mean.re,
                    est.stderr[0],
                    r.z_score,
                    if r.pass { "pass" } else { "FAIL" }
                );
            }
        }
    }
    Ok(())
}
