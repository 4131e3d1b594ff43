//! Tracy-Widom GUE distribution from the Airy-kernel Fredholm determinant.

use qhahn::airy::{airy_pair, fredholm_f2, tw_mean, TWGrid};
use qhahn::Result;

fn main() -> Result<()> {
    let (ai, aip) = airy_pair(0.0)?;
    println!("Ai(0) = {ai:.16}, Ai'(0) = {aip:.16}");

    let grid = TWGrid::uniform(-5.0, 3.0, 17, 60)?;
    println!("{:>6} {:>22} {:>22}", "u", "F2(u)", "F2'(u)");
    for (u, f, d) in &grid.grid {
        println!("{u:>6.2} {f:>22.16} {d:>22.16}");
    }
    println!("monotone: {}", grid.is_monotone());

    // quadrature convergence at a single point
    for m in [10, 20, 40, 80] {
        println!("order {m:>3}: F2(-2) = {:.16}", fredholm_f2(-2.0, m)?);
    }
    println!("mean = {:.10}", tw_mean(60)?);
    Ok(())
}
