//! Exact PEPS moments against a Monte Carlo estimate on the same ensemble.
//!
//! ```bash
//! cargo run --release --example peps_monte_carlo -- 2000
//! ```

use tnmoments::mc_oracle::{compare, mc_peps_moments, DEFAULT_THRESHOLD};
use tnmoments::operators::Operator;
use tnmoments::peps::{PepsEnsembleSpec, PepsGeometry};
use tnmoments::peps_moments::{avg_moment_d1_peps, avg_moment_d2_peps};

fn main() -> tnmoments::Result<()> {
    let n: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(2000);
    let spec = PepsEnsembleSpec {
        d: 2,
        bond: 4,
        v: 3,
        m: 3,
        geometry: PepsGeometry { x1: 1, x2: 0, r1: 9, r2: 0, t: 1 },
    };
    let z = Operator::pauli_z();
    let ks = [1, 2];
    let estimates = mc_peps_moments(&spec, &ks, &z, &z, n, 2024)?;
    for (k, est) in ks.iter().zip(&estimates) {
        let exact = avg_moment_d2_peps(*k, 2, 4, 1, &z, &z)?;
        let report = compare(&exact, est, DEFAULT_THRESHOLD)?;
        println!(
            "k={k}  exact={:.6e}  mc={:.6e} ± {:.1e}  z={:.2}  {}",
            exact.to_c64().re,
            est.mean.re,
            est.stderr[0],
            report.z_score,
            if report.pass { "pass" } else { "FAIL" }
        );
    }
    println!("{} samples in {:.1} s", n, estimates[0].wall_time);

    // Boundary case: a single column with both operators on the top unit.
    let column = PepsEnsembleSpec {
        geometry: PepsGeometry { r1: 5, ..spec.geometry },
        ..spec
    };
    let x = Operator::pauli_x();
    let estimates = mc_peps_moments(&column, &ks, &x, &x, n, 2025)?;
    for (k, est) in ks.iter().zip(&estimates) {
        let exact = avg_moment_d1_peps(*k, 2, 4, &x, &x)?;
        let report = compare(&exact, est, DEFAULT_THRESHOLD)?;
        println!(
            "column k={k}  exact={:.6e}  mc={:.6e} ± {:.1e}  z={:.2}  {}",
            exact.to_c64().re,
            est.mean.re,
            est.stderr[0],
            report.z_score,
            if report.pass { "pass" } else { "FAIL" }
        );
    }
    Ok(())
}
