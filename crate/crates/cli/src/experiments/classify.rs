use std::fs::OpenOptions;
use std::io::Write;

use cqnls_core::io::write_json;
use cqnls_core::variational::{classify, Classification, Thresholds};

use super::{to_json, Context, Experiment, Report};
use crate::error::CliError;
use crate::families::build_initial;

pub const LEDGER: &str = "classification.csv";

/// Appends one row to the classification ledger, writing the header first
/// if the file is new.
pub fn append_ledger(path: &std::path::Path, c: &Classification, input: &str) -> std::io::Result<()> {
    let fresh = !path.exists();
    let mut f = OpenOptions::new().create(true).append(true).open(path)?;
    if fresh {
        writeln!(f, "{}", Classification::CSV_HEADER)?;
    }
    writeln!(f, "{}", c.csv_row(input))
}

pub struct Classify;

impl Experiment for Classify {
    fn name(&self) -> &'static str {
        "classify"
    }

    fn run(&self, ctx: &Context) -> Result<Report, CliError> {
        let cfg = ctx.config;
        let u = build_initial(cfg.grid.build()?, &cfg.initial)?;
        let c = classify(&u, &Thresholds::reference());
        let descriptor = cfg.initial.descriptor();
        append_ledger(&ctx.path(LEDGER), &c, &descriptor)?;
        write_json(&ctx.path("classification.json"), &c)?;
        println!("{} {}", c.tag, descriptor);
        Ok(Report {
            summary: to_json(&c),
            checks: vec![],
            artifacts: vec![LEDGER.into(), "classification.json".into()],
        })
    }
}
