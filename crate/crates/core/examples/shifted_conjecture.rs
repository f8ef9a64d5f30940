//! Both terms of the shifted main term at `alpha = 1/log X`, the window
//! shift that swaps them, and the limit `alpha -> 0`.

use num_complex::Complex64 as C;
use qtml::analysis::default_window;
use qtml::eigenform::EigenformTable;
use qtml::moment::{alpha_zero_limit, window_shift_check, MainTermConstants};

fn main() -> qtml::Result<()> {
    let x: f64 = std::env::args().nth(1).map_or(1000.0, |s| s.parse().expect("X"));
    let table = EigenformTable::build(12, 100_000)?;
    let w = default_window();
    let alpha = C::new(1.0 / x.ln(), 0.0);
    let c = MainTermConstants::new(&table, 1, alpha, w, 100_000, 2)?;
    println!("X = {x}, alpha = {:.6}, gamma_alpha = {:.10}", alpha.re, c.gamma_alpha.re);
    println!("first term   {:.12}", c.first_term(x).re);
    println!("second term  {:.12}", c.second_term(x).re);
    println!("total        {:.12}", c.total(x).re);

    let s = window_shift_check(&table, 1, alpha, w, x, 100_000, 2)?;
    println!("second term via shifted window {:.12} (relative {:.1e})", s.via_shift.re, s.relative);

    let lim = alpha_zero_limit(&table, 1, w, x, &[1e-2, 1e-3, 1e-4], 100_000, 2)?;
    for (a, v) in &lim.samples {
        println!("  alpha = {a:.0e}: {:.12}", v.re);
    }
    println!("limit {:.12}, at alpha = 0 {:.12} (relative {:.1e})", lim.limit.re, lim.direct.re, lim.relative);
    Ok(())
}
