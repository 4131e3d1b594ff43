//! Gap probabilities `D_k(s)` by three independent routes: Fredholm
//! determinant of the restricted kernel, ratio of partition functions, and
//! direct summation over all k-subsets.

use qhahn::ensemble::{gap_bruteforce_all, gap_direct_all, gap_partition_all, EnsembleSpec};
use qhahn::{Ctx, Result};

fn main() -> Result<()> {
    let ctx = Ctx::new(256)?;
    let p = EnsembleSpec::new("0.5", 8, 3, "0.5", "0.5").at(ctx)?;
    let direct = gap_direct_all(&p)?;
    let part = gap_partition_all(&p)?;
    let brute = gap_bruteforce_all(&p)?;

    println!(
        "{:>3}  {:<28} {:>12} {:>12}",
        "s", "D_k(s) (fredholm)", "vs part.", "vs brute"
    );
    for s in 0..direct.len() {
        println!(
            "{s:>3}  {:<28} {:>12} {:>12}",
            direct[s].to_sig(24),
            direct[s].rel_diff(&part[s]).to_sig(2),
            direct[s].rel_diff(&brute[s]).to_sig(2)
        );
    }
    // D_k(s) = 0 until all k particles fit below s, and D_k(N+1) = 1.
    Ok(())
}
