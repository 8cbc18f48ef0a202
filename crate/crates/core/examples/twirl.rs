//! The k-fold twirl from Weingarten calculus against a sampled average.
//!
//! ```bash
//! cargo run --release --example twirl
//! ```

use tnmoments::densealg::{ComplexTensor, RngStream, C64};
use tnmoments::mc_oracle::mc_twirl;
use tnmoments::weingarten::twirl;

fn main() -> tnmoments::Result<()> {
    let mut rng = RngStream::new(7, 0);
    let n = 10_000;
    for (k, q) in [(1, 3), (2, 2), (3, 2)] {
        let dim = q * q_pow(q, k - 1);
        let data: Vec<C64> = (0..dim * dim).map(|_| C64::new(rng.standard_normal(), rng.standard_normal())).collect();
        let x = ComplexTensor::new(vec![("row", dim), ("col", dim)], data)?;
        let exact = twirl(&x, k, q)?;
        let sampled = mc_twirl(&x, k, q, n, 11)?;
        let distance = exact.max_abs_diff(&sampled)?;
        let again = twirl(&exact, k, q)?.max_abs_diff(&exact)?;
        let trace = |t: &ComplexTensor| (0..dim).map(|i| t.data()[i * dim + i]).sum::<C64>();
        println!(
            "k={k} q={q}: |exact − sampled|_max = {distance:.2e} (bound {:.2e}), idempotence {again:.1e}, trace drift {:.1e}",
            5.0 * x.frobenius_norm() / (n as f64).sqrt(),
            (trace(&exact) - trace(&x)).norm()
        );
    }
    Ok(())
}

fn q_pow(q: usize, e: usize) -> usize {
    q.pow(e as u32)
}
