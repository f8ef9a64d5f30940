//! Central values `L(1/2, f x chi_8d)` through the smoothed functional
//! equation. Weight 18 forces every value to vanish.
//!
//!     cargo run --release --example central_values -- 12 1,5,13,21,33

use num_complex::Complex64 as C;
use qtml::analysis::GVariant;
use qtml::eigenform::EigenformTable;
use qtml::lfun::{root_factor, twisted_value, AfeKernels, DirichletData, DEFAULT_TAIL_TOL};

fn main() -> qtml::Result<()> {
    let mut args = std::env::args().skip(1);
    let weight: u32 = args.next().map_or(12, |s| s.parse().expect("weight"));
    let ds: Vec<u64> = args
        .next()
        .unwrap_or_else(|| "1,3,5,7,11,13,15,17,19,21".into())
        .split(',')
        .map(|s| s.parse().expect("odd squarefree d"))
        .collect();
    let table = EigenformTable::build(weight, 200_000)?;
    let data = DirichletData::new(&table);
    let kernels = AfeKernels::new(weight, C::new(0.0, 0.0), GVariant::Unit)?;
    println!("{:>6} {:>8} {:>20} {:>8} {:>9} {:>9}", "d", "sign", "L(1/2)", "terms", "tail", "kernel");
    for d in ds {
        let disc = 8 * d as i64;
        let v = twisted_value(&data, &kernels, disc, DEFAULT_TAIL_TOL)?;
        let sign = root_factor(weight, C::new(0.0, 0.0), disc)?.re;
        println!(
            "{d:>6} {sign:>+8.0} {:>20.14} {:>8} {:>9.1e} {:>9.1e}",
            v.value.re, v.terms_used, v.tail_bound, v.kernel_bound
        );
    }
    Ok(())
}
