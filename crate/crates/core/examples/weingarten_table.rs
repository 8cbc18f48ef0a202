//! Exact Weingarten values per cycle type, checked against the Gram matrix.
//!
//! ```bash
//! cargo run --example weingarten_table -- 3 4
//! ```

use tnmoments::exact::RatMatrix;
use tnmoments::weingarten::{gram, weingarten_matrix, WeingartenTable};

fn main() -> tnmoments::Result<()> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<u64>().expect("integer argument"));
    let k = args.next().unwrap_or(3) as usize;
    let q = args.next().unwrap_or(4);

    let table = WeingartenTable::new(k, q)?;
    println!("Wg on S_{k} at q = {q}");
    for (class, value) in table.classes().iter().zip(table.values()) {
        println!("  {class:<12} {value}");
    }

    // G · W = I on the regular representation when k ≤ q.
    let g = gram(k, q)?;
    let w = weingarten_matrix(&table)?;
    let n = w.rows;
    let mut gm = RatMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            gm.set(i, j, g.get(i, j).clone().into());
        }
    }
    let product = gm.mul(&w);
    println!("G·W = I exactly: {}", product == RatMatrix::identity(n));
    Ok(())
}
