//! Invariant suite behind `qhahn selftest`.
//!
//! Each check prints one PASS/FAIL line; the tables it computes are also
//! written as CSV artifacts so two runs can be compared byte for byte.

use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::airy::{fredholm_f2, tw_mean};
use crate::cli::{compute, render, CommandKind, GridSpec, Method, RunConfig};
use crate::connection::{
    build_ak, extract_coordinates, fresh_bases, modification_step, synthetic_connection,
    tau_closed_form_section, TauPath,
};
use crate::ensemble::{gap_bruteforce_all, gap_direct_all, EnsembleSpec};
use crate::error::Result;
use crate::painleve::{generic_residuals, reconstruct_gaps, seeds};
use crate::precision::{Ctx, Real};
use crate::scaling::{
    compute_c1, compute_c2, scaled_gaps, Branch, DifferenceOperator, EdgeLaw, ScalingParams,
};

#[derive(Clone, Debug)]
pub struct Check {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Default)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    fn push(&mut self, name: &'static str, r: Result<(bool, String)>) {
        let (pass, detail) = r.unwrap_or_else(|e| (false, format!("{}: {e}", e.name())));
        self.checks.push(Check { name, pass, detail });
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for c in &self.checks {
            s += &format!(
                "{} {}: {}\n",
                if c.pass { "PASS" } else { "FAIL" },
                c.name,
                c.detail
            );
        }
        s
    }
}

fn below(x: &Real, tol: f64) -> (bool, String) {
    (x.to_f64() < tol, format!("{} < {tol:e}", x.to_sig(4)))
}

fn worst<I: IntoIterator<Item = Real>>(ctx: Ctx, it: I) -> Real {
    it.into_iter().fold(ctx.zero(), |a, b| a.max(b))
}

fn check_bruteforce() -> Result<(bool, String)> {
    let ctx = Ctx::new(256)?;
    let mut w = ctx.zero();
    for q in ["0.3", "0.5", "0.7"] {
        let p = EnsembleSpec::new(q, 7, 3, "0.5", "0.5").at(ctx)?;
        let d = gap_direct_all(&p)?;
        let b = gap_bruteforce_all(&p)?;
        w = w.max(worst(ctx, (0..d.len()).map(|s| d[s].rel_diff(&b[s]))));
    }
    Ok(below(&w, 1e-30))
}

fn check_seeds() -> Result<(bool, String)> {
    let ctx = Ctx::new(256)?;
    let p = EnsembleSpec::new("0.5", 8, 3, "0.5", "0.5").at(ctx)?;
    let b = gap_bruteforce_all(&p)?;
    let (d0, d1) = seeds(&p)?;
    Ok(below(&d0.rel_diff(&b[3]).max(d1.rel_diff(&b[4])), 1e-30))
}

fn check_recurrence() -> Result<(bool, String)> {
    let ctx = Ctx::new(512)?;
    let p = EnsembleSpec::new("0.7", 12, 3, "0.5", "0.5").at(ctx)?;
    let d = gap_direct_all(&p)?;
    let r = reconstruct_gaps(&p)?;
    Ok(below(
        &worst(ctx, (p.k..=p.n + 1).map(|s| d[s].rel_diff(r.get(s)))),
        1e-20,
    ))
}

fn check_tau() -> Result<(bool, String)> {
    let ctx = Ctx::new(512)?;
    let p = EnsembleSpec::new("0.7", 12, 3, "0.5", "0.5").at(ctx)?;
    let d = gap_direct_all(&p)?;
    let path = TauPath::new(&p)?;
    let mut w = ctx.zero();
    for s in p.k + 1..=p.n {
        let direct = &d[s + 1] * &d[s - 1] / d[s].square();
        w = w.max(path.tau_ratio(s).rel_diff(&direct));
        w = w.max(tau_closed_form_section(&path, &p, s)?.rel_diff(&direct));
    }
    Ok(below(&w, 1e-20))
}

fn check_lax() -> Result<(bool, String)> {
    let ctx = Ctx::new(256)?;
    let (u, v, w, q) = (
        ctx.parse("1.3")?,
        ctx.parse("0.6")?,
        ctx.parse("-0.8")?,
        ctx.parse("0.7")?,
    );
    let mut a = synthetic_connection(ctx, 11, &u, &v, &w, &q)?;
    let (k, r) = fresh_bases(&a)?;
    a.kernel_vec = Some(k);
    a.residue_vec = Some(r);
    let mut res = ctx.zero();
    for _ in 0..3 {
        let b = modification_step(&a)?;
        let (t, r) = extract_coordinates(&a)?;
        let (th, rh) = extract_coordinates(&b)?;
        let (e1, e2) = generic_residuals(&t, &r, &th, &rh, &a.qpv_params());
        res = res.max(e1.abs()).max(e2.abs());
        a = b;
    }
    Ok(below(&res, 1e-20))
}

fn check_det(seed: u64) -> Result<(bool, String)> {
    let ctx = Ctx::new(256)?;
    let p = EnsembleSpec::new("0.7", 12, 3, "0.5", "0.5").at(ctx)?;
    let ak = build_ak(&p)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut w = ctx.zero();
    for _ in 0..10 {
        let z = ctx.from_f64(rng.gen_range(-3.0..3.0));
        w = w.max(ak.eval(&z)?.det().rel_diff(&ak.det_closed_form(&z)));
    }
    let n0 = ak.matrix.numerator_at(&ctx.zero());
    let diag = n0.m[0][0].rel_diff(&ak.w).max(n0.m[1][1].rel_diff(&ak.w));
    let off = n0.m[0][1].abs().max(n0.m[1][0].abs()) / ak.w.abs();
    let (pass, detail) = below(&w, 1e-25);
    let ok0 = diag < ctx.eps() && off < ctx.eps();
    Ok((
        pass && ok0,
        format!("{detail}; A_k(0) numerator = diag(w, w): {ok0}"),
    ))
}

fn check_eigen() -> Result<(bool, String)> {
    let ctx = Ctx::new(256)?;
    let p = EnsembleSpec::new("0.7", 12, 3, "0.5", "0.5").at(ctx)?;
    let op = DifferenceOperator::new(&p);
    let w = worst(
        ctx,
        (0..=p.k)
            .map(|n| op.eigen_residual(n))
            .collect::<Result<Vec<_>>>()?,
    );
    Ok(below(&w, 1e-20))
}

fn check_scaling() -> Result<(bool, String)> {
    let ctx = Ctx::new(256)?;
    let mut ok = true;
    let mut detail = Vec::new();
    for (q0, k0, e1, e2) in [(0.99, 0.3, 0.84839, 0.38999), (0.5, 0.2, 0.69758, 0.47101)] {
        let sp = ScalingParams::new(q0, k0, -1.1, -1.3, 100)?;
        let c1 = compute_c1(&sp, Branch::Rightmost, ctx)?.to_f64();
        let c2 = compute_c2(&sp, Branch::Rightmost, ctx)?.to_f64();
        ok &= (c1 - e1).abs() < 1e-4 && (c2 - e2).abs() < 1e-3;
        detail.push(format!("({c1:.5}, {c2:.5})"));
    }
    Ok((ok, detail.join(" ")))
}

fn check_tw() -> Result<(bool, String)> {
    let mut gap: f64 = 0.0;
    let mut prev = -1.0;
    let mut mono = true;
    for i in 0..=20 {
        let u = -6.0 + 0.5 * i as f64;
        let a = fredholm_f2(u, 60)?;
        let b = fredholm_f2(u, 120)?;
        gap = gap.max((a - b).abs());
        mono &= b > prev;
        prev = b;
    }
    let mean = tw_mean(60)?;
    let ok = gap < 1e-10 && mono && (mean + 1.7711).abs() < 1e-3;
    Ok((
        ok,
        format!("order gap {gap:.1e}, monotone {mono}, mean {mean:.6}"),
    ))
}

fn check_doubling() -> Result<(bool, String)> {
    let spec = EnsembleSpec::new("0.9", 20, 4, "0.6", "0.4");
    let lo = reconstruct_gaps(&spec.at(Ctx::new(256)?)?)?;
    let hi = reconstruct_gaps(&spec.at(Ctx::new(512)?)?)?;
    let ctx = Ctx::new(256)?;
    let w = worst(ctx, (4..=21).map(|s| lo.get(s).rel_diff(hi.get(s))));
    // leading 128 bits must agree
    Ok(below(&w, 2f64.powi(-128)))
}

fn check_density() -> Result<(bool, String)> {
    let ctx = Ctx::new(256)?;
    let sp = ScalingParams::new(0.99, 0.3, -1.1, -1.3, 60)?;
    let (_, g) = scaled_gaps(&sp, ctx)?;
    let law = EdgeLaw::new(&sp, &g, ctx)?;
    let nonneg = law.atoms.iter().all(|a| a.2 >= 0.0);
    let mass = law.total_mass();
    Ok((
        nonneg && (mass - 1.0).abs() < 1e-12,
        format!("nonnegative {nonneg}, mass {mass:.15}"),
    ))
}

fn artifact(dir: &Path, name: &str, cfg: &RunConfig) -> Result<()> {
    let (t, bits) = compute(cfg)?;
    fs::write(dir.join(name), render(&t, cfg, bits)?)?;
    Ok(())
}

/// Writes the CSV artifacts into `dir`.
pub fn write_artifacts(dir: &Path, bits: u32) -> Result<()> {
    fs::create_dir_all(dir)?;
    let ens = EnsembleSpec::new("0.7", 12, 3, "0.5", "0.5");
    let mut gp = RunConfig::new(CommandKind::GapProbs, bits.max(512));
    gp.ensemble = Some(ens.clone());
    gp.methods = vec![Method::Direct, Method::Recurrence, Method::Tau];
    artifact(dir, "gap_probs.csv", &gp)?;
    let mut tc = RunConfig::new(CommandKind::TauCheck, bits.max(512));
    tc.ensemble = Some(ens);
    tc.methods = vec![Method::Direct, Method::Tau];
    artifact(dir, "tau_check.csv", &tc)?;
    let mut sc = RunConfig::new(CommandKind::Scaling, bits);
    sc.scaling = Some(ScalingParams::new(0.99, 0.3, -1.1, -1.3, 100)?);
    artifact(dir, "scaling.csv", &sc)?;
    let mut tw = RunConfig::new(CommandKind::TwTable, bits);
    tw.grid = Some(GridSpec {
        u_min: -6.0,
        u_max: 4.0,
        points: 21,
        order: 60,
    });
    artifact(dir, "tw_table.csv", &tw)?;
    Ok(())
}

/// Runs every check and writes the artifacts.
pub fn run_selftest(dir: &Path, bits: u32) -> Result<Report> {
    let mut r = Report::default();
    r.push("fredholm-vs-bruteforce", check_bruteforce());
    r.push("seeds-vs-bruteforce", check_seeds());
    r.push("recurrence-vs-fredholm", check_recurrence());
    r.push("tau-path", check_tau());
    r.push("lax-consistency", check_lax());
    r.push("determinant-identity", check_det(1));
    r.push("eigen-relation", check_eigen());
    r.push("edge-constants", check_scaling());
    r.push("tracy-widom", check_tw());
    r.push("precision-doubling", check_doubling());
    r.push("edge-law-mass", check_density());
    r.push(
        "artifacts",
        write_artifacts(dir, bits).map(|_| (true, format!("written to {}", dir.display()))),
    );
    Ok(r)
}
