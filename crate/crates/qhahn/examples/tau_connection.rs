//! The q-connection attached to the ensemble, its determinant, and the tau
//! ratios along the chain of sections `A_k, A_{k+1}, ..., A_{N+1}`.

use qhahn::connection::{
    build_ak, connection_at_section, extract_coordinates, tau_closed_form_section, tau_gaps,
    TauPath,
};
use qhahn::ensemble::{gap_direct_all, EnsembleSpec};
use qhahn::{Ctx, Result};

fn main() -> Result<()> {
    let ctx = Ctx::new(512)?;
    let p = EnsembleSpec::new("0.7", 12, 3, "0.5", "0.5").at(ctx)?;

    let ak = build_ak(&p)?;
    let z = ctx.parse("0.37")?;
    println!("det A_k(z) at z = 0.37: {}", ak.eval(&z)?.det().to_sig(20));
    println!(
        "closed form:            {}",
        ak.det_closed_form(&z).to_sig(20)
    );

    // the chain starts from the explicit A_k; a later section agrees with the
    // matrix built from the orthogonal polynomials up to gauge, so compare
    // the gauge-invariant coordinates
    let path = TauPath::new(&p)?;
    let s = 7;
    let (tc, rc) = extract_coordinates(path.state(s))?;
    let (td, rd) = extract_coordinates(&connection_at_section(&p, s)?)?;
    println!(
        "A_{s}: t = {} (off by {}), r = {} (off by {})",
        tc.to_sig(16),
        tc.rel_diff(&td).to_sig(2),
        rc.to_sig(16),
        rc.rel_diff(&rd).to_sig(2)
    );

    let d = gap_direct_all(&p)?;
    println!(
        "{:>3} {:<26} {:>10} {:>10}",
        "s", "D(s+1)D(s-1)/D(s)^2", "mu ratio", "closed"
    );
    for s in p.k + 1..=p.n {
        let ratio = &d[s + 1] * &d[s - 1] / d[s].square();
        let closed = tau_closed_form_section(&path, &p, s)?;
        println!(
            "{s:>3} {:<26} {:>10} {:>10}",
            ratio.to_sig(20),
            path.tau_ratio(s).rel_diff(&ratio).to_sig(2),
            closed.rel_diff(&ratio).to_sig(2)
        );
    }

    let g = tau_gaps(&p)?;
    println!("D(N+1) from tau ratios: {}", g.get(p.n + 1).to_sig(30));
    Ok(())
}
