//! A run is fully described by its `RunConfig`: serialize it, read it back,
//! and the output is byte-identical.

use std::error::Error;

use qhahn::cli::{run, CommandKind, Method, OutputFormat, RunConfig};
use qhahn::ensemble::EnsembleSpec;

fn main() -> Result<(), Box<dyn Error>> {
    let mut cfg = RunConfig::new(CommandKind::VerifyRecurrence, 96);
    cfg.ensemble = Some(EnsembleSpec::new("0.7", 12, 3, "0.5", "0.5"));
    cfg.methods = vec![Method::Direct, Method::Recurrence];
    cfg.output_format = OutputFormat::Table;

    let json = serde_json::to_string_pretty(&cfg)?;
    println!("{json}");
    let back: RunConfig = serde_json::from_str(&json)?;

    let (first, ok) = run(&cfg)?;
    let (second, _) = run(&back)?;
    print!("{first}");
    println!("checks ok: {ok}; replay identical: {}", first == second);
    Ok(())
}
