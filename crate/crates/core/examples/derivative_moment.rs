//! Derivative moment at weight 18, where every central value vanishes,
//! against the bracket main term.
//!
//!     cargo run --release --example derivative_moment -- 250,1000

use std::time::Instant;

use qtml::analysis::default_window;
use qtml::eigenform::EigenformTable;
use qtml::moment::{run_moment, DerivativeConstants, MomentRequest};

fn main() -> qtml::Result<()> {
    let grid: Vec<f64> = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "250,1000".into())
        .split(',')
        .map(|s| s.trim().parse().expect("X grid is a comma list of numbers"))
        .collect();
    let mut req = MomentRequest::new(18, grid);
    req.derivative = true;
    let t0 = Instant::now();
    let table = EigenformTable::build(18, req.required_table()?.max(req.prime_cutoff as usize))?;

    let c = DerivativeConstants::new(&table, default_window(), req.prime_cutoff, req.depth)?;
    println!("2 L'/L(1, sym^2)  {:.10}", 2.0 * c.l_sym2_log_derivative);
    println!("Z*'/Z*(0)         {:.10}", c.z_star_log_derivative);
    println!("psi(9)            {:.10}", c.digamma);
    println!("Phi~'/Phi~(1)     {:.10}", c.phi_log_derivative);
    println!("bracket - log X   {:.10}", c.bracket_constant());

    let report = run_moment(&req, &table, 1)?;
    println!("{:>8} {:>16} {:>16} {:>12} {:>8}", "X", "M'", "MT'", "R", "|R|/MT");
    for r in &report.rows {
        println!(
            "{:>8} {:>16.8} {:>16.8} {:>12.5} {:>8.4}",
            r.x,
            r.measured,
            r.predicted,
            r.residual,
            r.relative_deviation()
        );
    }
    println!("elapsed {:.1?}", t0.elapsed());
    Ok(())
}
