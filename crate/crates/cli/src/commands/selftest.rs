//! The `selftest` subcommand: runs the library's named check suites and
//! reports one PASS/FAIL line each.

use std::path::Path;

use clap::Args;
use overcomp::selftest::{self, PropertyOutcome, SelftestOptions};
use overcomp::Result;

use crate::output::{self, Cell, Format, Table};

#[derive(Debug, Args)]
pub struct SelftestArgs {
    /// Run a single suite by name instead of all of them.
    #[arg(long)]
    pub property: Option<String>,
    /// Subset size for the overlap suite (prints that pmf).
    #[arg(long)]
    pub n: Option<usize>,
    /// Overlap count parameter for the overlap suite.
    #[arg(long)]
    pub k: Option<usize>,
}

/// Returns true when every suite passed. Lines go to stdout as they
/// finish; the table goes to --out when given.
pub fn run(args: &SelftestArgs, seed: u64, out: Option<&Path>, format: Format) -> Result<bool> {
    let opts = SelftestOptions { seed, n: args.n, k: args.k };
    let outcomes: Vec<PropertyOutcome> = match &args.property {
        Some(name) => vec![selftest::run_named(name, &opts)?],
        None => selftest::run_all(&opts),
    };

    for o in &outcomes {
        let status = if o.passed { "PASS" } else { "FAIL" };
        println!("{status} {name}: {detail}", name = o.name, detail = o.detail);
    }

    if out.is_some() {
        let mut table = Table::new(&["property", "passed", "detail"]);
        for o in &outcomes {
            table.push(vec![
                Cell::from(o.name),
                Cell::B(o.passed),
                Cell::from(o.detail.clone()),
            ]);
        }
        output::emit(&table, out, format)?;
    }

    let failed: Vec<&str> = outcomes.iter().filter(|o| !o.passed).map(|o| o.name).collect();
    if !failed.is_empty() {
        eprintln!("selftest failed: {}", failed.join(", "));
    }
    Ok(failed.is_empty())
}
