//! Poisson summation over `d` with a quadratic character, both sides.

use qtml::analysis::default_window;
use qtml::gauss::poisson_check;

fn main() -> qtml::Result<()> {
    let w = default_window();
    println!("{:>5} {:>6} {:>20} {:>20} {:>9} {:>6}", "n", "Z", "lhs", "rhs", "defect", "|k|<=");
    for n in [1u64, 3, 15, 105] {
        for z in [50.0, 200.0] {
            let c = poisson_check(&w, n, z, None)?;
            println!("{n:>5} {z:>6} {:>20.12} {:>20.12} {:>9.1e} {:>6}", c.lhs, c.rhs, c.defect, c.k_max);
        }
    }
    Ok(())
}
