use std::io::Write;

use cycleguard::dynamics::{
    find_cycles, Cycle, CycleOptions, DegenerateRun, DynamicsError, Exponents, Rotation, Stability,
};
use cycleguard::gallery::grid_points;
use cycleguard::par::Execution;
use serde::Serialize;

use crate::error::CliError;
use crate::load::{load, parse_grid};
use crate::output::write_json;

const DEFAULT_GRID: (f64, f64, f64) = (0.1, 3.0, 0.1);

#[derive(clap::Args)]
pub struct Args {
    /// System file or gallery name.
    pub system: String,
    /// Section points `a:b:step` on the positive x-axis; defaults to the
    /// gallery entry's grid, else 0.1:3:0.1.
    #[arg(long)]
    pub grid: Option<String>,
    /// Integration and root-finding tolerance.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Skip the characteristic-exponent integrals.
    #[arg(long)]
    pub no_exponents: bool,
    /// Include each cycle's sampled polyline.
    #[arg(long)]
    pub polyline: bool,
}

#[derive(Serialize)]
struct GridOut {
    from: f64,
    to: f64,
    step: f64,
    points: usize,
}

#[derive(Serialize)]
struct CycleOut<'a> {
    x_star: f64,
    period: f64,
    stability: Stability,
    rotation: Rotation,
    closure_error: f64,
    min_abs_angular: f64,
    max_radius: f64,
    min_radius: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    exponents: Option<Exponents>,
    #[serde(skip_serializing_if = "Option::is_none")]
    polyline: Option<&'a [[f64; 2]]>,
}

impl<'a> CycleOut<'a> {
    fn new(c: &'a Cycle, with_polyline: bool) -> Self {
        CycleOut {
            x_star: c.x_star,
            period: c.period,
            stability: c.stability,
            rotation: c.rotation,
            closure_error: c.closure_error,
            min_abs_angular: c.min_abs_angular,
            max_radius: c.max_radius(),
            min_radius: c.min_radius(),
            exponents: c.exponents,
            polyline: with_polyline.then_some(c.polyline.as_slice()),
        }
    }
}

#[derive(Serialize)]
struct CyclesOut<'a> {
    system: &'a str,
    grid: GridOut,
    tol: f64,
    count: usize,
    cycles: Vec<CycleOut<'a>>,
    degenerate: &'a [DegenerateRun],
    notes: &'a [String],
}

pub fn run(args: &Args, exec: Execution, out: &mut dyn Write) -> Result<(), CliError> {
    let loaded = load(&args.system)?;
    let (from, to, step) = match (&args.grid, &loaded.entry) {
        (Some(g), _) => parse_grid(g)?,
        (None, Some(e)) => e.grid,
        (None, None) => DEFAULT_GRID,
    };
    let grid = grid_points(from, to, step);
    let opts = CycleOptions {
        tol: args.tol,
        exec,
        with_exponents: !args.no_exponents,
        ..CycleOptions::default()
    };
    let search = find_cycles(&loaded.system, &grid, &opts).map_err(|e| match e {
        DynamicsError::InvalidTolerance(_) => CliError::Parse(e.to_string()),
        _ => CliError::Internal(e.to_string()),
    })?;
    write_json(
        out,
        &CyclesOut {
            system: &loaded.name,
            grid: GridOut {
                from,
                to,
                step,
                points: grid.len(),
            },
            tol: args.tol,
            count: search.cycles.len(),
            cycles: search
                .cycles
                .iter()
                .map(|c| CycleOut::new(c, args.polyline))
                .collect(),
            degenerate: &search.degenerate,
            notes: &search.notes,
        },
    )
}
