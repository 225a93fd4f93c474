use std::io::Write;
use std::path::PathBuf;

use cycleguard::dynamics::{integrate, Direction, DynamicsError, Termination};
use serde::Serialize;

use crate::error::CliError;
use crate::load::{load, parse_floats};
use crate::output::{fmt12, write_json};

#[derive(clap::Args)]
pub struct Args {
    /// System file or gallery name.
    pub system: String,
    /// Starting points `x,y;x,y;...`.
    #[arg(long, default_value = "0.1,0;2.5,0", allow_hyphen_values = true)]
    pub starts: String,
    /// Integration time per start.
    #[arg(long, default_value_t = 50.0)]
    pub horizon: f64,
    /// Integration tolerance.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    /// Samples per orbit, evenly spaced in time.
    #[arg(long, default_value_t = 2000)]
    pub samples: usize,
    /// Integrate backward in time.
    #[arg(long)]
    pub backward: bool,
    /// Write one `orbit-K.csv` per start into this directory and print a
    /// JSON summary; otherwise all orbits go to stdout as one CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Serialize)]
struct OrbitSummary {
    start: [f64; 2],
    file: String,
    termination: Termination,
    duration: f64,
    last_state: [f64; 2],
}

fn parse_starts(spec: &str) -> Result<Vec<[f64; 2]>, CliError> {
    spec.split(';')
        .filter(|p| !p.trim().is_empty())
        .map(|p| match parse_floats(p, ',')?[..] {
            [x, y] => Ok([x, y]),
            _ => Err(CliError::Parse(format!("start {p:?} must be x,y"))),
        })
        .collect()
}

pub fn run(args: &Args, out: &mut dyn Write) -> Result<(), CliError> {
    let loaded = load(&args.system)?;
    let starts = parse_starts(&args.starts)?;
    if starts.is_empty() || args.samples < 2 || args.horizon.is_nan() || args.horizon <= 0.0 {
        return Err(CliError::Parse(
            "need at least one start, --samples >= 2 and --horizon > 0".into(),
        ));
    }
    let direction = if args.backward {
        Direction::Backward
    } else {
        Direction::Forward
    };
    let mut orbits = Vec::with_capacity(starts.len());
    for (k, &start) in starts.iter().enumerate() {
        let orbit = integrate(&loaded.system, start, args.horizon, args.tol, direction).map_err(
            |e| match e {
                DynamicsError::InvalidTolerance(_) | DynamicsError::StartOutsideDomain { .. } => {
                    CliError::Parse(e.to_string())
                }
                _ => CliError::Internal(e.to_string()),
            },
        )?;
        if orbit.termination != Termination::Horizon {
            eprintln!(
                "start {k}: stopped early ({}) at t = {}",
                orbit.termination.name(),
                fmt12(orbit.duration())
            );
        }
        orbits.push(orbit);
    }
    let Some(dir) = &args.out else {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["start", "t", "x", "y"])?;
        for (k, orbit) in orbits.iter().enumerate() {
            for [t, x, y] in orbit.sample(args.samples - 1) {
                w.write_record([k.to_string(), fmt12(t), fmt12(x), fmt12(y)])?;
            }
        }
        w.flush()?;
        return Ok(());
    };
    std::fs::create_dir_all(dir)?;
    let mut summaries = Vec::with_capacity(orbits.len());
    for (k, orbit) in orbits.iter().enumerate() {
        let name = format!("orbit-{k}.csv");
        let mut w = csv::Writer::from_path(dir.join(&name))?;
        w.write_record(["t", "x", "y"])?;
        for [t, x, y] in orbit.sample(args.samples - 1) {
            w.write_record([fmt12(t), fmt12(x), fmt12(y)])?;
        }
        w.flush()?;
        summaries.push(OrbitSummary {
            start: orbit.start,
            file: name,
            termination: orbit.termination,
            duration: orbit.duration(),
            last_state: orbit.last_state(),
        });
    }
    write_json(out, &summaries)
}
