//! Euler-product constants of the main terms: `L(1, sym^2 f)`, `Z(1/2, l)`
//! and how fast the accelerated products `Z^N` settle.
//!
//!     cargo run --release --example euler_constants -- 12 45

use num_complex::Complex64 as C;
use qtml::eigenform::EigenformTable;
use qtml::euler::{convergence_profile, needed_cutoff, sym_square_afe, zn_accelerated, EulerContext};

fn main() -> qtml::Result<()> {
    let mut args = std::env::args().skip(1);
    let weight: u32 = args.next().map_or(12, |s| s.parse().expect("weight"));
    let ell: u64 = args.next().map_or(1, |s| s.parse().expect("odd l"));
    let cutoff = 100_000u64;
    let table = EigenformTable::build(weight, cutoff as usize)?;
    let one = C::new(1.0, 0.0);
    let l = sym_square_afe(&table, one)?;
    println!("L(1, sym^2 f) = {:.12} (bound {:.1e}, {} terms)", l.value.re, l.bound, l.terms);

    let ctx = EulerContext::new(&table, ell, cutoff, 2)?;
    let zero = C::new(0.0, 0.0);
    let reference = zn_accelerated(&ctx, zero, 2)?;
    println!("Z(1/2, {ell}) = {:.12} (tail bound {:.1e})", reference.value.re, reference.tail_bound);

    let grid: Vec<u64> = ctx.primes().to_vec();
    println!("{:>3} {:>16} {:>12}", "N", "Z at P = 1e3", "P for 1e-6");
    for n in 0..=2 {
        let prof = convergence_profile(&ctx, zero, n, &grid)?;
        let at = prof.iter().rev().find(|v| v.0 <= 1000).map_or(f64::NAN, |v| v.1.re);
        let need = needed_cutoff(&prof, reference.value, 1e-6).map_or("-".into(), |p| p.to_string());
        println!("{n:>3} {at:>16.12} {need:>12}");
    }
    Ok(())
}
