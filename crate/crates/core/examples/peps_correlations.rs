//! Sampled PEPS units, their structural checks, and correlations on the two
//! grid templates.
//!
//! ```bash
//! cargo run --release --example peps_correlations
//! ```

use tnmoments::densealg::{unitarity_residual, RngStream};
use tnmoments::operators::Operator;
use tnmoments::peps::{column_matrix, correlation_d1_peps, correlation_d2_peps, PepsGrid, PepsUnit};

fn main() -> tnmoments::Result<()> {
    let (d, bond) = (2, 4);
    let mut rng = RngStream::new(41, 0);

    let unit = PepsUnit::sample(d, bond, &mut rng)?;
    let r = unit.residuals();
    println!("unit: unitarity {:.1e}, simplicity {:.1e} / {:.1e}", r.unitarity, r.simplicity_in, r.simplicity_out);

    let column = vec![PepsUnit::sample(d, bond, &mut rng)?, PepsUnit::sample(d, bond, &mut rng)?];
    println!("periodic column of two units is unitary to {:.1e}", unitarity_residual(&column_matrix(&column)?));

    let z = Operator::pauli_z();
    let x = Operator::pauli_x();
    let grid = PepsGrid::sample(d, bond, 3, 3, &mut rng)?;
    let column = PepsGrid::sample(d, bond, 3, 1, &mut rng)?;
    for (name, a) in [("z", &z), ("x", &x)] {
        let d2 = correlation_d2_peps(&grid, a.matrix(), a.matrix())?;
        let d1 = correlation_d1_peps(&column, a.matrix(), a.matrix())?;
        println!("  {name}{name}: 3×3 grid {:+.3e} {:+.3e}i, single column {:+.3e} {:+.3e}i", d2.re, d2.im, d1.re, d1.im);
    }
    Ok(())
}
