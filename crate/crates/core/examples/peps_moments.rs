//! Exact Haar-averaged PEPS moments from the permutation-sum grid.
//!
//! ```bash
//! cargo run --release --example peps_moments
//! ```

use tnmoments::mps_moments::avg_moment_d2;
use tnmoments::operators::Operator;
use tnmoments::peps_moments::{avg_moment_d1_peps, avg_moment_d2_peps, block, BlockKind};

fn main() -> tnmoments::Result<()> {
    let z = Operator::pauli_z();
    let bulk = block(BlockKind::Bulk, 1, 2, 4)?;
    println!("k = 1 bulk block has {} entries, value {}", bulk.entries.len(), bulk.entries[0].constant().unwrap());

    for k in 1..=3 {
        let grid = avg_moment_d2_peps(k, 2, 4, 1, &z, &z)?;
        let column = avg_moment_d1_peps(k, 2, 4, &z, &z)?;
        println!("k = {k}: 3×3 grid {:.6e}, single column {:.6e}", grid.to_c64().re, column.to_c64().re);
    }

    // With trivial bonds the PEPS collapses onto the MPS with the same d.
    let p = Operator::parse("[[[1,0],[0,0]],[[0,0],[0,0]]]", 2)?;
    for k in 1..=2 {
        let peps = avg_moment_d2_peps(k, 2, 1, 1, &p, &p)?;
        let mps = avg_moment_d2(k, 2, 1, 1, &p, &p)?;
        println!("D = 1, k = {k}: PEPS {} vs MPS {}", peps.exact().unwrap(), mps.exact().unwrap());
    }
    Ok(())
}
