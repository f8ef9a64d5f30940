//! The AFE weight `omega(xi)` for each admissible `G`. The unit kernel
//! decays exponentially; the other two only like `exp(-c (log xi)^2)`.

use num_complex::Complex64 as C;
use qtml::analysis::{omega_kernel, GVariant};

fn main() -> qtml::Result<()> {
    let alpha = C::new(0.01, 0.0);
    let variants = [GVariant::Unit, GVariant::Simple, GVariant::ZetaDamped];
    print!("{:>8}", "xi");
    for v in variants {
        print!(" {:>14}", v.name());
    }
    println!();
    for xi in [1e-3, 0.1, 1.0, 3.0, 10.0, 100.0, 1e4] {
        print!("{xi:>8.0e}");
        for v in variants {
            print!(" {:>14.6e}", omega_kernel(12, alpha, v, xi)?.re);
        }
        println!();
    }
    Ok(())
}
