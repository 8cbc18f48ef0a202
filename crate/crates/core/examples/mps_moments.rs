//! Exact Haar-averaged moments of MPS correlations, as rationals.
//!
//! ```bash
//! cargo run --example mps_moments
//! ```

use tnmoments::mps_moments::{avg_moment_d1, avg_moment_d2, t_matrix};
use tnmoments::operators::Operator;

fn main() -> tnmoments::Result<()> {
    let (d, bond) = (2, 2);
    let z = Operator::pauli_z();
    let id = Operator::identity(d);

    let t = t_matrix(2, d, bond)?;
    println!("k = 2 transfer block T (d = D = 2):");
    for i in 0..t.rows {
        let row: Vec<String> = (0..t.cols).map(|j| t.get(i, j).to_string()).collect();
        println!("  [{}]", row.join(", "));
    }

    for k in 1..=4 {
        let chain: Vec<String> = (0..=3).map(|s| avg_moment_d2(k, d, bond, s, &z, &z).map(|r| show(&r))).collect::<Result<_, _>>()?;
        let boundary = avg_moment_d1(k, d, bond, &z, &z)?;
        let norm = avg_moment_d2(k, d, bond, 1, &id, &id)?;
        println!("k = {k}: E[D₂^k] for s = 0..3: {}; E[D₁^k] = {}; identity gives {}", chain.join(", "), show(&boundary), show(&norm));
    }
    Ok(())
}

fn show(r: &tnmoments::mps_moments::MomentResult) -> String {
    match r.exact() {
        Some(q) => q.to_string(),
        None => format!("{:.6e}", r.to_c64().re),
    }
}
