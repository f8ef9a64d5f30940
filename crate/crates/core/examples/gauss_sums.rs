//! Quadratic Gauss sums `G_k(n)`: closed form against the definition.
//!
//!     cargo run --release --example gauss_sums -- 105

use qtml::gauss::{gauss_sum, gauss_sum_brute};

fn main() -> qtml::Result<()> {
    let n: u64 = std::env::args().nth(1).map_or(45, |s| s.parse().expect("odd modulus"));
    println!("G_k({n})");
    println!("{:>5} {:>24} {:>24} {:>10}", "k", "closed form", "definition", "defect");
    for k in -6..=6i64 {
        let c = gauss_sum(k, n)?;
        let b = gauss_sum_brute(k, n)?;
        println!(
            "{k:>5} {:>11.6}{:>+11.6}i {:>11.6}{:>+11.6}i {:>10.1e}",
            c.value.re,
            c.value.im,
            b.re,
            b.im,
            (c.value - b).norm()
        );
    }
    Ok(())
}
