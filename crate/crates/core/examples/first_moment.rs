//! Smoothed first moment at weight 12 against its predicted main term.
//!
//!     cargo run --release --example first_moment -- 250,500,1000,2000

use std::time::Instant;

use qtml::eigenform::EigenformTable;
use qtml::moment::{run_moment, MomentRequest};

fn main() -> qtml::Result<()> {
    let grid: Vec<f64> = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "250,500,1000".into())
        .split(',')
        .map(|s| s.trim().parse().expect("X grid is a comma list of numbers"))
        .collect();
    let req = MomentRequest::new(12, grid);
    let t0 = Instant::now();
    let table = EigenformTable::build(12, req.required_table()?.max(req.prime_cutoff as usize))?;
    println!("table: N_max = {} ({:.1?})", table.n_max(), t0.elapsed());

    let report = run_moment(&req, &table, 1)?;
    println!("{:>8} {:>16} {:>16} {:>12} {:>10} {:>8}", "X", "M", "MT", "R", "R/sqrtX", "|R|/MT");
    for r in &report.rows {
        println!(
            "{:>8} {:>16.8} {:>16.8} {:>12.5} {:>10.5} {:>8.4}",
            r.x,
            r.measured,
            r.predicted,
            r.residual,
            r.residual_norm,
            r.relative_deviation()
        );
    }
    if let Some(s) = &report.residual {
        match (s.slope, s.band) {
            (Some(k), Some((lo, hi))) => println!("slope {k:.4}, 95% band [{lo:.4}, {hi:.4}], spread {:.3}", s.spread),
            _ => println!("residual: {}", s.note),
        }
    }
    println!("elapsed {:.1?}", t0.elapsed());
    Ok(())
}
