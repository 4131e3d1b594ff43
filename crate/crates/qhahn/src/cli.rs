//! Command-line front end: argument parsing, run configuration, and
//! CSV / JSON / table output.
//!
//! Every CSV starts with a `#` comment line carrying the run configuration
//! as JSON, the working precision and the crate version, followed by a
//! header row. Numbers are written as decimal strings with `bits/3`
//! significant digits.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::airy::{tw_mean, TWGrid};
use crate::connection::{build_ak, tau_closed_form_section, tau_gaps, TauPath};
use crate::ensemble::{
    gap_bruteforce_all, gap_direct_all, gap_partition_all, EnsembleParams, EnsembleSpec,
};
use crate::error::{Error, Result};
use crate::painleve::{recommended_bits, reconstruct_gaps};
use crate::precision::{Ctx, Real};
use crate::scaling::{compute_c1, compute_c2, convergence_experiment, Branch, ScalingParams};
use crate::selftest;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    GapProbs,
    VerifyRecurrence,
    TauCheck,
    Scaling,
    TwTable,
    Convergence,
    Selftest,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Direct,
    Recurrence,
    Tau,
    Partition,
    Bruteforce,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum, Default)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
    Table,
}

/// Tabulation grid for `tw-table`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub u_min: f64,
    pub u_max: f64,
    pub points: usize,
    pub order: usize,
}

/// Everything needed to reproduce a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: CommandKind,
    #[serde(default)]
    pub ensemble: Option<EnsembleSpec>,
    #[serde(default)]
    pub scaling: Option<ScalingParams>,
    #[serde(default)]
    pub methods: Vec<Method>,
    pub precision_bits: u32,
    #[serde(default)]
    pub output_format: OutputFormat,
    #[serde(default)]
    pub output_path: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub grid: Option<GridSpec>,
    #[serde(default)]
    pub n_list: Option<Vec<usize>>,
    #[serde(default)]
    pub artifact_dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(command: CommandKind, precision_bits: u32) -> RunConfig {
        RunConfig {
            command,
            ensemble: None,
            scaling: None,
            methods: Vec::new(),
            precision_bits,
            output_format: OutputFormat::Csv,
            output_path: None,
            seed: 1,
            grid: None,
            n_list: None,
            artifact_dir: None,
        }
    }

    fn ensemble_spec(&self) -> Result<&EnsembleSpec> {
        self.ensemble
            .as_ref()
            .ok_or_else(|| Error::Usage("ensemble parameters --q --N --k are required".into()))
    }

    fn scaling_params(&self) -> Result<&ScalingParams> {
        self.scaling
            .as_ref()
            .ok_or_else(|| Error::Usage("scaling parameters --q0 --k0 --a --b are required".into()))
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "qhahn",
    version,
    about = "Gap probabilities of the q-Hahn ensemble"
)]
pub struct Cli {
    /// Working precision in bits.
    #[arg(long, global = true, env = "QHAHN_PREC_BITS", default_value_t = 256)]
    pub prec_bits: u32,
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Csv)]
    pub format: OutputFormat,
    /// Write the result here instead of stdout.
    #[arg(long, short = 'o', global = true)]
    pub output: Option<PathBuf>,
    /// Seed for random spot checks.
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    /// Replay a serialized run configuration (JSON file).
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Option<Commands>,
}

#[derive(Args, Debug, Clone)]
pub struct EnsembleArgs {
    #[arg(long)]
    pub q: String,
    #[arg(long = "N")]
    pub n: usize,
    #[arg(long)]
    pub k: usize,
    #[arg(long, default_value = "0.5")]
    pub alpha: String,
    #[arg(long, default_value = "0.5")]
    pub beta: String,
}

impl EnsembleArgs {
    fn spec(&self) -> EnsembleSpec {
        EnsembleSpec::new(&self.q, self.n, self.k, &self.alpha, &self.beta)
    }
}

#[derive(Args, Debug, Clone)]
pub struct ScalingArgs {
    #[arg(long)]
    pub q0: f64,
    #[arg(long)]
    pub k0: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub a: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub b: f64,
    #[arg(long = "N", default_value_t = 100)]
    pub n: usize,
}

impl ScalingArgs {
    fn params(&self) -> ScalingParams {
        ScalingParams {
            q0: self.q0,
            k0: self.k0,
            a: self.a,
            b: self.b,
            n: self.n,
        }
    }
}

#[derive(Subcommand, Debug)]
pub enum Commands {
    /// D_k(s) by one or more methods, with their largest relative discrepancy.
    GapProbs {
        #[command(flatten)]
        ens: EnsembleArgs,
        #[arg(
            long,
            value_enum,
            value_delimiter = ',',
            default_value = "direct,recurrence"
        )]
        method: Vec<Method>,
    },
    /// Recurrence against Fredholm determinants, per s.
    VerifyRecurrence {
        #[command(flatten)]
        ens: EnsembleArgs,
    },
    /// Tau ratios along the connection path against the direct double ratio.
    TauCheck {
        #[command(flatten)]
        ens: EnsembleArgs,
    },
    /// Edge constants c1, c2 for both branches.
    Scaling {
        #[command(flatten)]
        sc: ScalingArgs,
    },
    /// Tracy-Widom F2 and density on a grid.
    TwTable {
        #[arg(long, default_value_t = -6.0, allow_negative_numbers = true)]
        u_min: f64,
        #[arg(long, default_value_t = 4.0, allow_negative_numbers = true)]
        u_max: f64,
        #[arg(long, default_value_t = 101)]
        points: usize,
        #[arg(long, default_value_t = 60)]
        order: usize,
    },
    /// log N against log |E[TW] - E[qH_N]|, with the fitted slope.
    Convergence {
        #[command(flatten)]
        sc: ScalingArgs,
        #[arg(long, default_value_t = 10)]
        n_min: usize,
        #[arg(long, default_value_t = 400)]
        n_max: usize,
        #[arg(long, default_value_t = 10)]
        n_step: usize,
    },
    /// Runs the invariant suite, writing CSV artifacts.
    Selftest {
        #[arg(long, default_value = "selftest-artifacts")]
        artifacts: PathBuf,
    },
}

impl Cli {
    pub fn into_config(self) -> Result<RunConfig> {
        if let Some(path) = &self.config {
            let text = fs::read_to_string(path)?;
            return serde_json::from_str(&text)
                .map_err(|e| Error::Usage(format!("bad config {}: {e}", path.display())));
        }
        let command = self
            .command
            .ok_or_else(|| Error::Usage("a subcommand is required".into()))?;
        let mut cfg = RunConfig::new(CommandKind::Selftest, self.prec_bits);
        cfg.output_format = self.format;
        cfg.output_path = self.output;
        cfg.seed = self.seed;
        match command {
            Commands::GapProbs { ens, method } => {
                cfg.command = CommandKind::GapProbs;
                cfg.ensemble = Some(ens.spec());
                cfg.methods = method;
            }
            Commands::VerifyRecurrence { ens } => {
                cfg.command = CommandKind::VerifyRecurrence;
                cfg.ensemble = Some(ens.spec());
                cfg.methods = vec![Method::Direct, Method::Recurrence];
            }
            Commands::TauCheck { ens } => {
                cfg.command = CommandKind::TauCheck;
                cfg.ensemble = Some(ens.spec());
                cfg.methods = vec![Method::Direct, Method::Tau];
            }
            Commands::Scaling { sc } => {
                cfg.command = CommandKind::Scaling;
                cfg.scaling = Some(sc.params());
            }
            Commands::TwTable {
                u_min,
                u_max,
                points,
                order,
            } => {
                cfg.command = CommandKind::TwTable;
                cfg.grid = Some(GridSpec {
                    u_min,
                    u_max,
                    points,
                    order,
                });
            }
            Commands::Convergence {
                sc,
                n_min,
                n_max,
                n_step,
            } => {
                cfg.command = CommandKind::Convergence;
                cfg.scaling = Some(sc.params());
                if n_step == 0 || n_min > n_max {
                    return Err(Error::Usage("need n_min <= n_max and n_step > 0".into()));
                }
                cfg.n_list = Some((n_min..=n_max).step_by(n_step).collect());
            }
            Commands::Selftest { artifacts } => {
                cfg.command = CommandKind::Selftest;
                cfg.artifact_dir = Some(artifacts);
            }
        }
        Ok(cfg)
    }
}

/// Column-oriented result of a command.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
    /// Summary lines (fitted slope, maxima) appended as trailing comments.
    pub notes: Vec<String>,
}

impl Table {
    fn new(columns: &[&str]) -> Table {
        Table {
            columns: columns.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
            notes: Vec::new(),
        }
    }
}

/// Decimal rendering with `bits/3` significant digits.
pub fn fmt_real(x: &Real, bits: u32) -> String {
    x.to_sig((bits / 3).max(1) as usize)
}

/// `f64` values carry at most 17 significant digits.
pub fn fmt_f64(x: f64, bits: u32) -> String {
    let ctx = Ctx::new(64).expect("64 bits is valid");
    ctx.from_f64(x).to_sig((bits / 3).clamp(1, 17) as usize)
}

#[derive(Serialize)]
struct Meta<'a> {
    config: &'a RunConfig,
    precision_bits: u32,
    version: &'a str,
}

/// Renders `t` in the configured format.
pub fn render(t: &Table, cfg: &RunConfig, bits: u32) -> Result<String> {
    let meta = Meta {
        config: cfg,
        precision_bits: bits,
        version: VERSION,
    };
    let meta_json = serde_json::to_string(&meta).map_err(|e| Error::Io(e.to_string()))?;
    match cfg.output_format {
        OutputFormat::Csv => {
            let mut out = Vec::new();
            writeln!(out, "# {meta_json}")?;
            {
                let mut w = csv::WriterBuilder::new()
                    .terminator(csv::Terminator::Any(b'\n'))
                    .from_writer(&mut out);
                w.write_record(&t.columns)
                    .map_err(|e| Error::Io(e.to_string()))?;
                for r in &t.rows {
                    w.write_record(r).map_err(|e| Error::Io(e.to_string()))?;
                }
                w.flush()?;
            }
            for n in &t.notes {
                writeln!(out, "# {n}")?;
            }
            String::from_utf8(out).map_err(|e| Error::Io(e.to_string()))
        }
        OutputFormat::Json => {
            let v = serde_json::json!({ "meta": meta, "columns": t.columns, "rows": t.rows, "notes": t.notes });
            let mut s = serde_json::to_string_pretty(&v).map_err(|e| Error::Io(e.to_string()))?;
            s.push('\n');
            Ok(s)
        }
        OutputFormat::Table => {
            let mut widths: Vec<usize> = t.columns.iter().map(|c| c.len()).collect();
            for r in &t.rows {
                for (w, c) in widths.iter_mut().zip(r) {
                    *w = (*w).max(c.len());
                }
            }
            let line = |cells: &[String]| -> String {
                let v: Vec<String> = cells
                    .iter()
                    .zip(&widths)
                    .map(|(c, w)| format!("{c:>w$}"))
                    .collect();
                v.join("  ").trim_end().to_string() + "\n"
            };
            let mut s = line(&t.columns);
            s += &(widths
                .iter()
                .map(|w| "-".repeat(*w))
                .collect::<Vec<_>>()
                .join("  ")
                + "\n");
            for r in &t.rows {
                s += &line(r);
            }
            for n in &t.notes {
                s += &format!("{n}\n");
            }
            Ok(s)
        }
    }
}

/// `D_k(s)`, `s = 0..=N+1`, by one method.
pub fn gaps_by(method: Method, p: &EnsembleParams) -> Result<Vec<Real>> {
    match method {
        Method::Direct => gap_direct_all(p),
        Method::Recurrence => Ok(reconstruct_gaps(p)?.as_slice()),
        Method::Tau => Ok(tau_gaps(p)?.as_slice()),
        Method::Partition => gap_partition_all(p),
        Method::Bruteforce => gap_bruteforce_all(p),
    }
}

/// Precision actually used for an ensemble run; escalations are announced
/// on stderr.
pub fn effective_bits(cfg: &RunConfig, spec: &EnsembleSpec) -> Result<u32> {
    let req = cfg.precision_bits;
    let p = spec.at(Ctx::new(req)?)?;
    let iterative = cfg
        .methods
        .iter()
        .any(|m| matches!(m, Method::Recurrence | Method::Tau));
    let bits = if iterative {
        recommended_bits(p.ctx(), &p)
    } else {
        Ctx::escalated_for(req, p.q.to_f64(), p.n)
    };
    if bits > req {
        eprintln!(
            "note: precision raised from {req} to {bits} bits for N = {}, q = {}",
            p.n, spec.q
        );
    }
    Ok(bits)
}

fn max_rel(vals: &[&Real]) -> Real {
    let ctx = vals[0].ctx();
    let mut worst = ctx.zero();
    for a in vals {
        for b in vals {
            worst = worst.max(a.rel_diff(b));
        }
    }
    worst
}

fn cmd_gap_probs(cfg: &RunConfig) -> Result<(Table, u32)> {
    let spec = cfg.ensemble_spec()?;
    if cfg.methods.is_empty() {
        return Err(Error::Usage("at least one --method is required".into()));
    }
    let bits = effective_bits(cfg, spec)?;
    let p = spec.at(Ctx::new(bits)?)?;
    let seqs = cfg
        .methods
        .iter()
        .map(|m| gaps_by(*m, &p))
        .collect::<Result<Vec<_>>>()?;
    let mut cols = vec!["s".to_string()];
    for m in &cfg.methods {
        cols.push(format!("D_{}", method_label(*m)));
    }
    if seqs.len() > 1 {
        cols.push("max_rel_discrepancy".into());
    }
    let mut t = Table {
        columns: cols,
        rows: Vec::new(),
        notes: Vec::new(),
    };
    let mut overall = p.ctx().zero();
    for s in p.k..=p.n + 1 {
        let mut row = vec![s.to_string()];
        let vals: Vec<&Real> = seqs.iter().map(|v| &v[s]).collect();
        for v in &vals {
            row.push(fmt_real(v, bits));
        }
        if seqs.len() > 1 {
            let d = max_rel(&vals);
            row.push(fmt_real(&d, bits));
            overall = overall.max(d);
        }
        t.rows.push(row);
    }
    if seqs.len() > 1 {
        t.notes
            .push(format!("max relative discrepancy: {}", overall.to_sig(6)));
    }
    Ok((t, bits))
}

fn method_label(m: Method) -> &'static str {
    match m {
        Method::Direct => "direct",
        Method::Recurrence => "recurrence",
        Method::Tau => "tau",
        Method::Partition => "partition",
        Method::Bruteforce => "bruteforce",
    }
}

fn cmd_verify_recurrence(cfg: &RunConfig) -> Result<(Table, u32)> {
    let spec = cfg.ensemble_spec()?;
    let bits = effective_bits(cfg, spec)?;
    let p = spec.at(Ctx::new(bits)?)?;
    let d = gap_direct_all(&p)?;
    let r = reconstruct_gaps(&p)?.as_slice();
    let mut t = Table::new(&["s", "D_direct", "D_recurrence", "rel_discrepancy"]);
    let mut worst = p.ctx().zero();
    for s in p.k..=p.n + 1 {
        let e = d[s].rel_diff(&r[s]);
        t.rows.push(vec![
            s.to_string(),
            fmt_real(&d[s], bits),
            fmt_real(&r[s], bits),
            fmt_real(&e, bits),
        ]);
        worst = worst.max(e);
    }
    t.notes
        .push(format!("max relative discrepancy: {}", worst.to_sig(6)));
    Ok((t, bits))
}

fn cmd_tau_check(cfg: &RunConfig) -> Result<(Table, u32)> {
    let spec = cfg.ensemble_spec()?;
    let bits = effective_bits(cfg, spec)?;
    let p = spec.at(Ctx::new(bits)?)?;
    let ctx = p.ctx();
    let d = gap_direct_all(&p)?;
    let path = TauPath::new(&p)?;
    let mut t = Table::new(&[
        "s",
        "direct_ratio",
        "tau_ratio",
        "closed_form",
        "rel_tau",
        "rel_closed_form",
    ]);
    let mut worst = ctx.zero();
    for s in p.k + 1..=p.n {
        let direct = &d[s + 1] * &d[s - 1] / d[s].square();
        let tau = path.tau_ratio(s);
        let cf = tau_closed_form_section(&path, &p, s)?;
        let (e1, e2) = (tau.rel_diff(&direct), cf.rel_diff(&direct));
        worst = worst.max(e1.clone()).max(e2.clone());
        t.rows.push(vec![
            s.to_string(),
            fmt_real(&direct, bits),
            fmt_real(&tau, bits),
            fmt_real(&cf, bits),
            fmt_real(&e1, bits),
            fmt_real(&e2, bits),
        ]);
    }
    // determinant spot check of A_k at seeded random points
    let ak = build_ak(&p)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut det_err = ctx.zero();
    for _ in 0..10 {
        let z = ctx.from_f64(rng.gen_range(-3.0..3.0));
        let m = ak.eval(&z)?;
        det_err = det_err.max(m.det().rel_diff(&ak.det_closed_form(&z)));
    }
    t.notes
        .push(format!("max relative tau discrepancy: {}", worst.to_sig(6)));
    t.notes.push(format!(
        "max relative det A_k discrepancy at 10 seeded points: {}",
        det_err.to_sig(6)
    ));
    Ok((t, bits))
}

fn cmd_scaling(cfg: &RunConfig) -> Result<(Table, u32)> {
    let sp = cfg.scaling_params()?;
    sp.validate().map_err(|e| Error::Usage(e.to_string()))?;
    let bits = cfg.precision_bits;
    let ctx = Ctx::new(bits)?;
    let mut t = Table::new(&["branch", "c1", "c2"]);
    for (name, br) in [
        ("rightmost", Branch::Rightmost),
        ("leftmost", Branch::Leftmost),
    ] {
        let c1 = compute_c1(sp, br, ctx)?;
        let c2 = compute_c2(sp, br, ctx)?;
        t.rows
            .push(vec![name.into(), fmt_real(&c1, bits), fmt_real(&c2, bits)]);
    }
    Ok((t, bits))
}

fn cmd_tw_table(cfg: &RunConfig) -> Result<(Table, u32)> {
    let g = cfg.grid.clone().unwrap_or(GridSpec {
        u_min: -6.0,
        u_max: 4.0,
        points: 101,
        order: 60,
    });
    if g.points < 2 || !(g.u_max > g.u_min) {
        return Err(Error::Usage(
            "tw-table needs points >= 2 and u_max > u_min".into(),
        ));
    }
    let bits = cfg.precision_bits;
    let grid = TWGrid::uniform(g.u_min, g.u_max, g.points, g.order)?;
    let mut t = Table::new(&["u", "F2", "density"]);
    for (u, f, d) in &grid.grid {
        t.rows.push(vec![
            fmt_f64(*u, bits),
            fmt_f64(*f, bits),
            fmt_f64(*d, bits),
        ]);
    }
    t.notes
        .push(format!("mean: {}", fmt_f64(tw_mean(g.order)?, bits)));
    Ok((t, bits))
}

fn cmd_convergence(cfg: &RunConfig) -> Result<(Table, u32)> {
    let sp = cfg.scaling_params()?;
    sp.validate().map_err(|e| Error::Usage(e.to_string()))?;
    let ns = cfg
        .n_list
        .clone()
        .unwrap_or_else(|| (10..=400).step_by(10).collect());
    if ns.len() < 2 || ns.iter().any(|&n| n < 2) {
        return Err(Error::Usage(
            "convergence needs at least two sizes N >= 2".into(),
        ));
    }
    let bits = cfg.precision_bits;
    let ctx = Ctx::new(bits)?;
    let mean = tw_mean(60)?;
    let c = convergence_experiment(sp, &ns, mean, ctx)?;
    let mut t = Table::new(&["N", "log_N", "log_err"]);
    for (n, x, y) in &c.points {
        t.rows
            .push(vec![n.to_string(), fmt_f64(*x, bits), fmt_f64(*y, bits)]);
    }
    t.notes
        .push(format!("fitted slope: {}", fmt_f64(c.slope, bits)));
    Ok((t, bits))
}

/// Computes the table for a non-selftest command.
pub fn compute(cfg: &RunConfig) -> Result<(Table, u32)> {
    match cfg.command {
        CommandKind::GapProbs => cmd_gap_probs(cfg),
        CommandKind::VerifyRecurrence => cmd_verify_recurrence(cfg),
        CommandKind::TauCheck => cmd_tau_check(cfg),
        CommandKind::Scaling => cmd_scaling(cfg),
        CommandKind::TwTable => cmd_tw_table(cfg),
        CommandKind::Convergence => cmd_convergence(cfg),
        CommandKind::Selftest => Err(Error::Usage("selftest has no table".into())),
    }
}

/// Runs a configuration, writing to the configured destination. Returns the
/// text written (for selftest: the PASS/FAIL report) and whether all checks
/// passed.
pub fn run(cfg: &RunConfig) -> Result<(String, bool)> {
    if cfg.command == CommandKind::Selftest {
        let dir = cfg
            .artifact_dir
            .clone()
            .unwrap_or_else(|| PathBuf::from("selftest-artifacts"));
        let report = selftest::run_selftest(&dir, cfg.precision_bits)?;
        return Ok((report.render(), report.all_passed()));
    }
    let (t, bits) = compute(cfg)?;
    let text = render(&t, cfg, bits)?;
    if let Some(path) = &cfg.output_path {
        fs::write(path, &text)?;
    }
    Ok((text, true))
}

/// Entry point used by the binary; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let cfg = match cli.into_config() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {}: {e}", e.name());
            return 2;
        }
    };
    match run(&cfg) {
        Ok((text, ok)) => {
            if cfg.output_path.is_none() || cfg.command == CommandKind::Selftest {
                print!("{text}");
            }
            if ok {
                0
            } else {
                1
            }
        }
        Err(e) => {
            eprintln!("error: {}: {e}", e.name());
            if let Some(spec) = &cfg.ensemble {
                eprintln!(
                    "parameters: {}",
                    serde_json::to_string(spec).unwrap_or_default()
                );
            }
            if let Some(sp) = &cfg.scaling {
                eprintln!(
                    "parameters: {}",
                    serde_json::to_string(sp).unwrap_or_default()
                );
            }
            match e {
                Error::Usage(_)
                | Error::InadmissibleParams(_)
                | Error::Parse(_)
                | Error::PrecisionTooLow(_) => 2,
                _ => 1,
            }
        }
    }
}
