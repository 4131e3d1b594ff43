//! Reconstructing the whole gap sequence from two seed values and the
//! discrete Painleve trajectory `(t_s, r_s)`.

use qhahn::ensemble::{gap_direct_all, EnsembleSpec};
use qhahn::painleve::{
    qhahn_residuals, recommended_bits, reconstruct_gaps_checked, seeds, trajectory,
};
use qhahn::{Ctx, Result};

fn main() -> Result<()> {
    let spec = EnsembleSpec::new("0.9", 20, 4, "0.6", "0.4");
    let probe = spec.at(Ctx::new(256)?)?;
    // the recurrence loses bits as q -> 1, so ask the library how many to use
    let bits = recommended_bits(probe.ctx(), &probe);
    let p = spec.at(Ctx::new(bits)?)?;
    println!("working precision: {bits} bits");

    let (d0, d1) = seeds(&p)?;
    println!(
        "seeds: D(k) = {}, D(k+1) = {}",
        d0.to_sig(20),
        d1.to_sig(20)
    );

    let (states, _) = trajectory(&p)?;
    for w in states.windows(2) {
        let (e1, e2) = qhahn_residuals(&w[0], &w[1], &p)?;
        println!(
            "s={:>2}  t={:<24} r={:<24} residuals {} {}",
            w[0].s,
            w[0].t.to_sig(18),
            w[0].r.to_sig(18),
            e1.abs().to_sig(2),
            e2.abs().to_sig(2)
        );
    }

    let rec = reconstruct_gaps_checked(&p)?;
    let direct = gap_direct_all(&p)?;
    let worst = (p.k..=p.n + 1)
        .map(|s| rec.get(s).rel_diff(&direct[s]).to_f64())
        .fold(0.0, f64::max);
    println!("max relative gap vs fredholm over s = k..N+1: {worst:.3e}");
    Ok(())
}
