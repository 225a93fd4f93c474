use std::io::Write;

use cycleguard::conditions::full_report_with;
use cycleguard::par::Execution;

use crate::error::CliError;
use crate::load::load;
use crate::output::write_json;

#[derive(clap::Args)]
pub struct Args {
    /// System file or gallery name.
    pub system: String,
}

pub fn run(args: &Args, exec: Execution, out: &mut dyn Write) -> Result<(), CliError> {
    let loaded = load(&args.system)?;
    write_json(out, &full_report_with(loaded.structured()?, exec))
}
