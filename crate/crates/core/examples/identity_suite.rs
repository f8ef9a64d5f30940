//! The Euler-product identity checks, summarized per family.

use qtml::cli::{max_defect, suite_complic, suite_local, suite_z1, suite_z2};
use qtml::eigenform::EigenformTable;

fn main() -> qtml::Result<()> {
    let t = EigenformTable::build(12, 1_000_000)?;
    let local = suite_local(&t, 7, 100)?;
    println!("local inversion      max defect {:.2e}", max_defect(&local));
    let (z1, skipped) = suite_z1(&t, 1_000_000)?;
    for c in &z1 {
        println!("Z1 series/product    {:<12} {:.2e}", c.label, c.defect);
    }
    for s in skipped {
        println!("Z1 skipped           {s}");
    }
    for c in suite_z2(&t, 1_000_000)? {
        println!("Z2 = L Z3            {:<22} {:.2e}", c.label, c.defect);
    }
    println!("per-prime identity   max defect {:.2e}", max_defect(&suite_complic(&t)?));
    Ok(())
}
