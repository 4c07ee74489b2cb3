//! Batch front-end for the dirreg toolkit: instance files in, CSV reports out.

pub mod commands;
pub mod instance;
pub mod report;

use std::path::Path;

use anyhow::Result;

pub use commands::{run, Command, Options};
pub use instance::{parse_instance, parse_instance_str, Instance, InstanceFile};
pub use report::{Outcome, Report};

/// Parses `instance`, runs `command` and writes the CSV to `out`. Nothing is
/// written when the command fails.
pub fn execute(command: Command, instance: &Path, out: &Path, opts: &Options) -> Result<Outcome> {
    let inst = parse_instance(instance)?;
    let report = run(command, &inst, opts)?;
    report::write_atomic(out, &report.to_csv()?)?;
    Ok(report.outcome)
}
