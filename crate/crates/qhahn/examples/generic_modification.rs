//! Elementary modification of a generic connection with three zeros and three
//! poles: the coordinates `(t, r)` before and after one step satisfy the
//! generic discrete Painleve equation, and the pairing gives the tau ratio.

use qhahn::connection::{
    extract_coordinates, fresh_bases, modification_step, synthetic_connection, tau_closed_form,
    tau_second_derivative,
};
use qhahn::painleve::{generic_residuals, qpv_step_generic};
use qhahn::{Ctx, Result};

fn main() -> Result<()> {
    let ctx = Ctx::new(256)?;
    let (u, v, w, q) = (
        ctx.parse("1.3")?,
        ctx.parse("0.6")?,
        ctx.parse("-0.8")?,
        ctx.parse("0.7")?,
    );
    let mut a = synthetic_connection(ctx, 7, &u, &v, &w, &q)?;
    let (kv, rv) = fresh_bases(&a)?;
    a.kernel_vec = Some(kv);
    a.residue_vec = Some(rv);

    for step in 0..4 {
        let b = modification_step(&a)?;
        let (t, r) = extract_coordinates(&a)?;
        let (th, rh) = extract_coordinates(&b)?;
        let gp = a.qpv_params();
        let (pt, pr) = qpv_step_generic(&t, &r, &gp)?;
        let (e1, e2) = generic_residuals(&t, &r, &th, &rh, &gp);
        println!("step {step}: t = {}, r = {}", t.to_sig(16), r.to_sig(16));
        println!(
            "  predicted (t^, r^) off by {} / {}",
            pt.rel_diff(&th).to_sig(2),
            pr.rel_diff(&rh).to_sig(2)
        );
        println!("  residuals {} {}", e1.abs().to_sig(2), e2.abs().to_sig(2));
        let tau = tau_second_derivative(&a, &b)?;
        let cf = tau_closed_form(&a, &b)?;
        println!(
            "  tau ratio {} (closed form off by {})",
            tau.to_sig(16),
            tau.rel_diff(&cf).to_sig(2)
        );
        a = b;
    }
    Ok(())
}
