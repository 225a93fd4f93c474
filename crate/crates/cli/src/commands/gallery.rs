use std::io::Write;

use clap::Subcommand;
use cycleguard::gallery::{self, FactCheck, GalleryEntry};
use cycleguard::par::Execution;
use serde::Serialize;

use crate::error::CliError;
use crate::output::write_json;

#[derive(clap::Args)]
pub struct Args {
    #[command(subcommand)]
    pub action: Action,
}

#[derive(Subcommand)]
pub enum Action {
    /// Names and descriptions.
    List,
    /// One entry: its system file, default grid and expected facts.
    Show { name: String },
    /// Re-derive the expected facts of the named entries, or of all.
    Verify { names: Vec<String> },
}

#[derive(Serialize)]
struct Listed {
    name: String,
    description: String,
}

#[derive(Serialize)]
struct Verified {
    name: String,
    checks: Vec<FactCheck>,
}

fn entry(name: &str) -> Result<GalleryEntry, CliError> {
    gallery::get(name).ok_or_else(|| {
        CliError::Parse(format!(
            "no gallery entry {name:?} (known: {})",
            gallery::names().join(", ")
        ))
    })
}

pub fn run(args: &Args, exec: Execution, out: &mut dyn Write) -> Result<(), CliError> {
    match &args.action {
        Action::List => {
            let list: Vec<Listed> = gallery::all()
                .into_iter()
                .map(|e| Listed {
                    name: e.name,
                    description: e.description,
                })
                .collect();
            write_json(out, &list)
        }
        Action::Show { name } => write_json(out, &entry(name)?),
        Action::Verify { names } => {
            let entries = if names.is_empty() {
                gallery::all()
            } else {
                names.iter().map(|n| entry(n)).collect::<Result<_, _>>()?
            };
            let results: Vec<Verified> = entries
                .iter()
                .map(|e| Verified {
                    name: e.name.clone(),
                    checks: gallery::verify(e, exec),
                })
                .collect();
            write_json(out, &results)?;
            let failed = results
                .iter()
                .flat_map(|r| &r.checks)
                .filter(|c| !c.holds)
                .count();
            if failed > 0 {
                return Err(CliError::FactsNotReproduced(failed));
            }
            Ok(())
        }
    }
}
