//! Convergence of the mean of the rescaled rightmost particle to the
//! Tracy-Widom mean, with a least-squares log-log slope.

use qhahn::airy::tw_mean;
use qhahn::scaling::{convergence_experiment, ScalingParams};
use qhahn::{Ctx, Result};

fn main() -> Result<()> {
    let ctx = Ctx::new(256)?;
    let sp = ScalingParams::new(0.99, 0.3, -1.1, -1.3, 10)?;
    let ns: Vec<usize> = (1..=12).map(|i| 20 * i).collect();
    let mean = tw_mean(60)?;
    let c = convergence_experiment(&sp, &ns, mean, ctx)?;
    println!("{:>5} {:>10} {:>12}", "N", "log N", "log |err|");
    for (n, ln, le) in &c.points {
        println!("{n:>5} {ln:>10.5} {le:>12.6}");
    }
    println!("fitted slope {:.4}", c.slope);
    Ok(())
}
