//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any FAIL.
//!
//! Built with `harness = false` so the lines come out in order and unbuffered.

use std::fs;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qhahn::airy::{fredholm_f2, tw_mean};
use qhahn::connection::{
    build_ak, extract_coordinates, fresh_bases, modification_step, synthetic_connection,
    tau_closed_form_section, TauPath,
};
use qhahn::ensemble::{gap_bruteforce_all, gap_direct_all, EnsembleSpec};
use qhahn::painleve::{generic_residuals, reconstruct_gaps, seeds};
use qhahn::scaling::{
    compute_c1, compute_c2, convergence_experiment, scaled_density, scaled_gaps, Branch,
    DifferenceOperator, EdgeLaw, ScalingParams,
};
use qhahn::selftest::run_selftest;
use qhahn::{Ctx, Real, Result};

const DESK: [(&str, usize, usize, &str, &str); 2] =
    [("0.7", 12, 3, "0.5", "0.5"), ("0.9", 20, 4, "0.6", "0.4")];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn max_of(ctx: Ctx, xs: impl IntoIterator<Item = Real>) -> Real {
    xs.into_iter().fold(ctx.zero(), |a, b| a.max(b))
}

fn small_sweep() -> impl Iterator<Item = (&'static str, usize, usize)> {
    ["0.3", "0.5", "0.7"]
        .into_iter()
        .flat_map(|q| (1..=8usize).flat_map(move |n| (1..=3usize.min(n)).map(move |k| (q, n, k))))
}

fn oracle_small() -> Result<Outcome> {
    let ctx = Ctx::new(256)?;
    let t0 = Instant::now();
    let mut worst = ctx.zero();
    let mut cases = 0;
    for (q, n, k) in small_sweep() {
        let p = EnsembleSpec::new(q, n, k, "0.5", "0.5").at(ctx)?;
        let d = gap_direct_all(&p)?;
        let b = gap_bruteforce_all(&p)?;
        worst = worst.max(max_of(ctx, (0..=n + 1).map(|s| d[s].rel_diff(&b[s]))));
        cases += 1;
    }
    let secs = t0.elapsed().as_secs_f64();
    Ok(outcome(
        worst.to_f64() < 1e-30 && secs < 60.0,
        format!(
            "{cases} instances, max rel {} (< 1e-30), {secs:.2}s (< 60s)",
            worst.to_sig(3)
        ),
    ))
}

fn seeds_small() -> Result<Outcome> {
    let ctx = Ctx::new(256)?;
    let mut worst = ctx.zero();
    for (q, n, k) in small_sweep() {
        let p = EnsembleSpec::new(q, n, k, "0.5", "0.5").at(ctx)?;
        let b = gap_bruteforce_all(&p)?;
        let (d0, d1) = seeds(&p)?;
        worst = worst.max(d0.rel_diff(&b[k])).max(d1.rel_diff(&b[k + 1]));
    }
    Ok(outcome(
        worst.to_f64() < 1e-30,
        format!("max rel {} (< 1e-30)", worst.to_sig(3)),
    ))
}

fn recurrence_desk() -> Result<Outcome> {
    let ctx = Ctx::new(512)?;
    let t0 = Instant::now();
    let mut parts = Vec::new();
    let mut pass = true;
    for (q, n, k, a, b) in DESK {
        let p = EnsembleSpec::new(q, n, k, a, b).at(ctx)?;
        let d = gap_direct_all(&p)?;
        let r = reconstruct_gaps(&p)?;
        let w = max_of(ctx, (k..=n + 1).map(|s| d[s].rel_diff(r.get(s))));
        pass &= w.to_f64() < 1e-20;
        parts.push(format!("q={q} N={n}: {}", w.to_sig(3)));
    }
    let secs = t0.elapsed().as_secs_f64();
    pass &= secs < 300.0;
    Ok(outcome(
        pass,
        format!("{} (< 1e-20), {secs:.2}s", parts.join(", ")),
    ))
}

fn tau_desk() -> Result<Outcome> {
    let ctx = Ctx::new(512)?;
    let mut parts = Vec::new();
    let mut pass = true;
    for (q, n, k, a, b) in DESK {
        let p = EnsembleSpec::new(q, n, k, a, b).at(ctx)?;
        let d = gap_direct_all(&p)?;
        let path = TauPath::new(&p)?;
        let mut w = ctx.zero();
        for s in k + 1..=n {
            let direct = &d[s + 1] * &d[s - 1] / d[s].square();
            let ratio = path.tau_ratio(s);
            let closed = tau_closed_form_section(&path, &p, s)?;
            w = w
                .max(ratio.rel_diff(&direct))
                .max(closed.rel_diff(&direct))
                .max(ratio.rel_diff(&closed));
        }
        pass &= w.to_f64() < 1e-20;
        parts.push(format!("q={q} N={n}: {}", w.to_sig(3)));
    }
    Ok(outcome(pass, format!("{} (< 1e-20)", parts.join(", "))))
}

fn lax_consistency() -> Result<Outcome> {
    let ctx = Ctx::new(256)?;
    let mut worst = 0.0f64;
    for seed in [3u64, 5, 8] {
        let (u, v, w, q) = (
            ctx.parse("1.3")?,
            ctx.parse("0.6")?,
            ctx.parse("-0.8")?,
            ctx.parse("0.7")?,
        );
        let mut a = synthetic_connection(ctx, seed, &u, &v, &w, &q)?;
        let (kv, rv) = fresh_bases(&a)?;
        a.kernel_vec = Some(kv);
        a.residue_vec = Some(rv);
        for _ in 0..4 {
            let b = modification_step(&a)?;
            let (t, r) = extract_coordinates(&a)?;
            let (th, rh) = extract_coordinates(&b)?;
            let scale = max_of(ctx, [ctx.one(), t.abs(), r.abs(), th.abs(), rh.abs()]);
            let (e1, e2) = generic_residuals(&t, &r, &th, &rh, &a.qpv_params());
            worst = worst.max((e1.abs().max(e2.abs()) / scale).to_f64());
            a = b;
        }
    }
    Ok(outcome(
        worst < 1e-20,
        format!("3 connections x 4 steps, residual/scale {worst:.3e} (< 1e-20)"),
    ))
}

fn determinant_identity() -> Result<Outcome> {
    let ctx = Ctx::new(256)?;
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = ctx.zero();
    let mut at_zero = true;
    for (q, n, k, a, b) in DESK {
        let p = EnsembleSpec::new(q, n, k, a, b).at(ctx)?;
        let ak = build_ak(&p)?;
        for _ in 0..10 {
            let z = ctx.from_f64(rng.gen_range(-3.0..3.0));
            worst = worst.max(ak.eval(&z)?.det().rel_diff(&ak.det_closed_form(&z)));
        }
        let m = ak.matrix.numerator_at(&ctx.zero());
        let eps = ctx.eps();
        at_zero &= m.m[0][0].rel_diff(&ak.w) <= eps && m.m[1][1].rel_diff(&ak.w) <= eps;
        at_zero &= m.m[0][1].abs() / ak.w.abs() <= eps && m.m[1][0].abs() / ak.w.abs() <= eps;
    }
    Ok(outcome(
        worst.to_f64() < 1e-25 && at_zero,
        format!(
            "max rel {} (< 1e-25) at 20 points; A_k(0) = diag(w, w): {at_zero}",
            worst.to_sig(3)
        ),
    ))
}

fn eigen_relation() -> Result<Outcome> {
    let ctx = Ctx::new(256)?;
    let mut worst = ctx.zero();
    for n in 3..=12 {
        let p = EnsembleSpec::new("0.7", n, 3, "0.5", "0.5").at(ctx)?;
        let op = DifferenceOperator::new(&p);
        for deg in 0..=p.k {
            worst = worst.max(op.eigen_residual(deg)?);
        }
    }
    Ok(outcome(
        worst.to_f64() < 1e-20,
        format!("N=3..12, n<=k: max rel {} (< 1e-20)", worst.to_sig(3)),
    ))
}

fn scaling_constants() -> Result<Outcome> {
    let ctx = Ctx::new(256)?;
    let t0 = Instant::now();
    let mut pass = true;
    let mut parts = Vec::new();
    for (q0, k0, c1_ref, c2_ref) in [(0.99, 0.3, 0.84839, 0.38999), (0.5, 0.2, 0.69758, 0.47101)] {
        let sp = ScalingParams::new(q0, k0, -1.1, -1.3, 100)?;
        let c1 = compute_c1(&sp, Branch::Rightmost, ctx)?.to_f64();
        let c2 = compute_c2(&sp, Branch::Rightmost, ctx)?.to_f64();
        pass &= (c1 - c1_ref).abs() < 1e-4 && (c2 - c2_ref).abs() < 1e-3;
        parts.push(format!("q0={q0} k0={k0}: ({c1:.5}, {c2:.5})"));
    }
    let secs = t0.elapsed().as_secs_f64();
    pass &= secs < 1.0;
    Ok(outcome(
        pass,
        format!("{}, {secs:.3}s (< 1s)", parts.join(", ")),
    ))
}

fn tracy_widom() -> Result<Outcome> {
    let mut gap = 0.0f64;
    let mut mono = true;
    let mut prev = f64::NEG_INFINITY;
    for i in 0..=40 {
        let u = -6.0 + 0.25 * i as f64;
        let lo = fredholm_f2(u, 60)?;
        let hi = fredholm_f2(u, 120)?;
        gap = gap.max((lo - hi).abs());
        mono &= hi > prev;
        prev = hi;
    }
    let mean = tw_mean(60)?;
    Ok(outcome(
        gap < 1e-10 && mono && (mean + 1.7711).abs() < 1e-3,
        format!("order 60 vs 120 gap {gap:.2e} (< 1e-10), monotone {mono}, mean {mean:.6} (-1.7711 +- 1e-3)"),
    ))
}

fn convergence_slope() -> Result<Outcome> {
    let ctx = Ctx::new(256)?;
    let t0 = Instant::now();
    let sp = ScalingParams::new(0.99, 0.3, -1.1, -1.3, 10)?;
    let ns: Vec<usize> = (1..=40).map(|i| 10 * i).collect();
    let c = convergence_experiment(&sp, &ns, tw_mean(60)?, ctx)?;
    Ok(outcome(
        c.slope > -0.40 && c.slope < -0.26,
        format!(
            "N=10..400: slope {:.4} in (-0.40, -0.26), {:.1}s",
            c.slope,
            t0.elapsed().as_secs_f64()
        ),
    ))
}

fn density_shape() -> Result<Outcome> {
    let ctx = Ctx::new(256)?;
    let sp = ScalingParams::new(0.99, 0.3, -1.1, -1.3, 200)?;
    let (_, gaps) = scaled_gaps(&sp, ctx)?;
    let law = EdgeLaw::new(&sp, &gaps, ctx)?;
    let nonneg = law.atoms.iter().all(|a| a.2 >= 0.0);
    let mass = law.total_mass();
    let us: Vec<f64> = (0..=100).map(|i| -6.0 + 0.1 * i as f64).collect();
    let dens = scaled_density(&law, &us, 60)?;
    let sup = dens
        .iter()
        .map(|d| (d.value - d.tw).abs())
        .fold(0.0, f64::max);
    Ok(outcome(
        nonneg && (mass - 1.0).abs() < 1e-12 && sup < 0.15,
        format!("N=200: nonnegative {nonneg}, mass {mass:.15}, sup distance {sup:.4} (< 0.15)"),
    ))
}

fn determinism() -> Result<Outcome> {
    let a = tempfile::tempdir()?;
    let b = tempfile::tempdir()?;
    let ra = run_selftest(a.path(), 256)?;
    let rb = run_selftest(b.path(), 256)?;
    let mut names: Vec<_> = fs::read_dir(a.path())?
        .map(|e| e.map(|e| e.file_name()))
        .collect::<std::io::Result<_>>()?;
    names.sort();
    let mut identical = !names.is_empty();
    for n in &names {
        identical &= fs::read(a.path().join(n))? == fs::read(b.path().join(n))?;
    }
    let passed = ra.all_passed() && rb.all_passed();
    Ok(outcome(
        passed && identical,
        format!(
            "both runs green {passed}, {} CSV artifacts byte-identical {identical}",
            names.len()
        ),
    ))
}

fn main() {
    let criteria: [(&str, fn() -> Result<Outcome>); 12] = [
        (
            "fredholm equals brute force on small ensembles",
            oracle_small,
        ),
        ("seed values equal brute force", seeds_small),
        ("painleve reconstruction equals fredholm", recurrence_desk),
        ("tau ratios equal closed form and direct ratio", tau_desk),
        (
            "modified connections satisfy the generic recurrence",
            lax_consistency,
        ),
        ("determinant identity and A_k(0)", determinant_identity),
        ("difference-operator eigen relation", eigen_relation),
        ("edge constants c1, c2", scaling_constants),
        ("tracy-widom self-consistency", tracy_widom),
        ("mean convergence slope", convergence_slope),
        ("scaled density shape", density_shape),
        ("selftest determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let o = f().unwrap_or_else(|e| outcome(false, format!("error {}: {e}", e.name())));
        failed += usize::from(!o.pass);
        println!(
            "{} [{:>2}] {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            i + 1,
            o.detail
        );
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
