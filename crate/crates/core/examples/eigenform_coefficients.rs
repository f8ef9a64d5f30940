//! Hecke eigenvalues of the level-one cusp form of a given weight.
//! Prints `a(n)` recovered from `lambda(n) n^{(k-1)/2}` and checks both
//! construction routes against each other.
//!
//!     cargo run --release --example eigenform_coefficients -- 12

use qtml::arith::divisor_count_table;
use qtml::eigenform::{EigenformTable, Route};

fn main() -> qtml::Result<()> {
    let weight: u32 = std::env::args().nth(1).map_or(12, |s| s.parse().expect("weight"));
    let t = EigenformTable::build(weight, 100_000)?;
    let half = (weight as f64 - 1.0) / 2.0;
    println!("weight {weight}, N_max {}, checksum {:#018x}", t.n_max(), t.checksum());
    for n in 1..=12usize {
        let a = t.lambda(n) * (n as f64).powf(half);
        println!("  a({n:>2}) = {a:>22.0}   lambda = {:+.12}", t.lambda(n));
    }

    let tau = divisor_count_table(t.n_max());
    let (n, r) = (1..=t.n_max())
        .map(|n| (n, t.lambda(n).abs() / tau[n] as f64))
        .skip(1)
        .fold((1, 0.0), |acc, x| if x.1 > acc.1 { x } else { acc });
    println!("largest |lambda(n)|/tau(n) past n = 1: {r:.6} at n = {n}");
    t.check_invariants()?;
    println!("Deligne, Hecke and multiplicativity checks: ok");

    let a = EigenformTable::build_with(weight, 1000, Route::Crt)?;
    let b = EigenformTable::build_with(weight, 1000, Route::BigInt)?;
    println!("CRT {:#018x}  bigint {:#018x}", a.checksum(), b.checksum());
    Ok(())
}
