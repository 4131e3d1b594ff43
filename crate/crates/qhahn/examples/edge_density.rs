//! The rescaled law of the rightmost particle at finite N next to the
//! Tracy-Widom density.

use qhahn::scaling::{scaled_density, scaled_gaps, EdgeLaw, ScalingParams};
use qhahn::{Ctx, Result};

fn main() -> Result<()> {
    let n = std::env::args()
        .nth(1)
        .and_then(|a| a.parse().ok())
        .unwrap_or(120);
    let ctx = Ctx::new(256)?;
    let sp = ScalingParams::new(0.99, 0.3, -1.1, -1.3, n)?;
    let (p, gaps) = scaled_gaps(&sp, ctx)?;
    println!("N = {n}, k = {}, precision {} bits", p.k, p.ctx().bits());
    let law = EdgeLaw::new(&sp, &gaps, ctx)?;
    println!(
        "total mass {:.15}, mean {:.6}",
        law.total_mass(),
        law.mean()
    );

    let us: Vec<f64> = (0..=20).map(|i| -5.0 + 0.4 * i as f64).collect();
    let mut sup: f64 = 0.0;
    for d in scaled_density(&law, &us, 60)? {
        let bar = "#".repeat((d.value * 60.0).round().max(0.0) as usize);
        println!(
            "{:>5.1} s={:>4} {:.4} tw {:.4} {bar}",
            d.u, d.s, d.value, d.tw
        );
        sup = sup.max((d.value - d.tw).abs());
    }
    println!("sup distance on grid: {sup:.4}");
    Ok(())
}
