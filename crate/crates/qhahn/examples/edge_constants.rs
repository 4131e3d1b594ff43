//! Edge constants of the scaled ensemble: `c1` (edge location in units of N)
//! and `c2` (fluctuation scale in units of N^{1/3}), plus the finite-N edge
//! read off the spectral curve.

use qhahn::scaling::{compute_c1, compute_c2, edge_roots, finite_edge, Branch, ScalingParams};
use qhahn::{Ctx, Result};

fn main() -> Result<()> {
    let ctx = Ctx::new(256)?;
    for (q0, k0) in [(0.99, 0.3), (0.5, 0.2), (0.9, 0.5)] {
        let sp = ScalingParams::new(q0, k0, -1.1, -1.3, 100)?;
        let roots = edge_roots(&sp, ctx)?;
        println!(
            "q0={q0} k0={k0}: edges at xi = {}",
            roots
                .iter()
                .map(|r| r.to_sig(8))
                .collect::<Vec<_>>()
                .join(", ")
        );
        for br in [Branch::Rightmost, Branch::Leftmost] {
            let c1 = compute_c1(&sp, br, ctx)?;
            let c2 = compute_c2(&sp, br, ctx)?;
            println!("  {br:?}: c1 = {}, c2 = {}", c1.to_sig(12), c2.to_sig(12));
        }
        for n in [50, 200, 800] {
            let (c1n, c2n) = finite_edge(&sp.with_n(n), ctx)?;
            println!(
                "  N={n:>4}: finite-size edge ({}, {})",
                c1n.to_sig(8),
                c2n.to_sig(8)
            );
        }
    }
    Ok(())
}
