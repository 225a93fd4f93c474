use std::io::Write;
use std::path::PathBuf;

use cycleguard::par::Execution;
use cycleguard::scan::{sign_grid, zero_curve_components, ScalarField, ScanError, Window};
use serde::Serialize;

use crate::error::CliError;
use crate::load::{load, parse_floats};
use crate::output::{fmt12, write_json};

#[derive(clap::Args)]
pub struct Args {
    /// System file or gallery name.
    pub system: String,
    /// One of A, starshape, edot, phi. For edot the zero set traced is
    /// that of phi, since the energy rate is -y^2 phi.
    #[arg(long, default_value = "A")]
    pub field: String,
    /// `x0:x1:y0:y1`, or a single `r` for the square `[-r, r]^2`.
    #[arg(long, default_value = "3", allow_hyphen_values = true)]
    pub window: String,
    /// Cells per axis, `n` or `nx x ny` written `NXxNY`.
    #[arg(long, default_value = "120")]
    pub res: String,
    /// Values with `|v| <= atol` count as zero in the sign matrix; the
    /// default scales with the window. The zero-set tracer uses exactly
    /// zero unless this is given.
    #[arg(long)]
    pub atol: Option<f64>,
    /// Write the sign matrix as CSV here (`-` for stdout, which moves the
    /// summary to stderr).
    #[arg(long)]
    pub matrix: Option<PathBuf>,
    /// Write the zero-curve segments as CSV here, one row
    /// `component,x0,y0,x1,y1` per segment.
    #[arg(long)]
    pub zero_curves: Option<PathBuf>,
}

#[derive(Serialize)]
struct ComponentOut {
    cells: usize,
    touches_boundary: bool,
    unbounded: bool,
    bbox: [f64; 4],
}

#[derive(Serialize)]
struct Counts {
    negative: usize,
    zero: usize,
    positive: usize,
}

#[derive(Serialize)]
struct ScanOut<'a> {
    system: &'a str,
    field: &'static str,
    window: Window,
    nx: usize,
    ny: usize,
    atol: f64,
    counts: Counts,
    min: f64,
    min_at: [f64; 2],
    max: f64,
    max_at: [f64; 2],
    zero_set_field: &'static str,
    component_count: usize,
    unbounded_count: usize,
    components: Vec<ComponentOut>,
}

fn parse_window(spec: &str) -> Result<Window, CliError> {
    let v = parse_floats(spec, ':')?;
    let w = match v[..] {
        [r] => Window::square(r),
        [x0, x1, y0, y1] => Window::new(x0, x1, y0, y1),
        _ => {
            return Err(CliError::Parse(format!(
                "window {spec:?} must be r or x0:x1:y0:y1"
            )))
        }
    };
    w.map_err(|e| CliError::Parse(e.to_string()))
}

fn parse_res(spec: &str) -> Result<(usize, usize), CliError> {
    let bad = || CliError::Parse(format!("resolution {spec:?} must be n or NXxNY"));
    let parts: Vec<usize> = spec
        .split('x')
        .map(|p| p.trim().parse().map_err(|_| bad()))
        .collect::<Result<_, _>>()?;
    match parts[..] {
        [n] if n > 0 => Ok((n, n)),
        [nx, ny] if nx > 0 && ny > 0 => Ok((nx, ny)),
        _ => Err(bad()),
    }
}

fn scan_error(e: ScanError) -> CliError {
    match e {
        ScanError::OutOfDomain { .. } | ScanError::NotStructured(_) => {
            CliError::InvalidSystem(e.to_string())
        }
        ScanError::InvalidWindow(_) | ScanError::InvalidResolution | ScanError::UnknownField(_) => {
            CliError::Parse(e.to_string())
        }
        _ => CliError::Internal(e.to_string()),
    }
}

pub fn run(args: &Args, exec: Execution, out: &mut dyn Write) -> Result<(), CliError> {
    let loaded = load(&args.system)?;
    let field: ScalarField = args.field.parse().map_err(scan_error)?;
    let window = parse_window(&args.window)?;
    let (nx, ny) = parse_res(&args.res)?;
    let grid =
        sign_grid(&loaded.system, field, window, nx, ny, args.atol, exec).map_err(scan_error)?;
    let zeros = zero_curve_components(
        &loaded.system,
        field,
        window,
        nx,
        ny,
        args.atol.unwrap_or(0.0),
        exec,
    )
    .map_err(scan_error)?;
    let (negative, zero, positive) = grid.counts();
    let summary = ScanOut {
        system: &loaded.name,
        field: field.name(),
        window,
        nx,
        ny,
        atol: grid.atol,
        counts: Counts {
            negative,
            zero,
            positive,
        },
        min: grid.min,
        min_at: grid.min_at,
        max: grid.max,
        max_at: grid.max_at,
        zero_set_field: field.zero_set_field().name(),
        component_count: zeros.count,
        unbounded_count: zeros.unbounded_count(),
        components: zeros
            .components
            .iter()
            .map(|c| ComponentOut {
                cells: c.cells,
                touches_boundary: c.touches_boundary,
                unbounded: c.unbounded,
                bbox: c.bbox,
            })
            .collect(),
    };
    let write_matrix = |w: &mut dyn Write| -> Result<(), CliError> {
        let mut csv = csv::Writer::from_writer(w);
        let mut header = vec!["y\\x".to_string()];
        header.extend((0..nx).map(|i| fmt12(grid.center(i, 0)[0])));
        csv.write_record(&header)?;
        for (k, row) in grid.to_rows().iter().enumerate() {
            let j = ny - 1 - k;
            let mut rec = vec![fmt12(grid.center(0, j)[1])];
            rec.extend(row.iter().map(|s| s.to_string()));
            csv.write_record(&rec)?;
        }
        csv.flush()?;
        Ok(())
    };
    if let Some(p) = &args.zero_curves {
        let mut csv = csv::Writer::from_path(p)?;
        csv.write_record(["component", "x0", "y0", "x1", "y1"])?;
        for (k, c) in zeros.components.iter().enumerate() {
            for [[x0, y0], [x1, y1]] in &c.segments {
                csv.write_record([
                    k.to_string(),
                    fmt12(*x0),
                    fmt12(*y0),
                    fmt12(*x1),
                    fmt12(*y1),
                ])?;
            }
        }
        csv.flush()?;
    }
    match &args.matrix {
        Some(p) if p.as_os_str() == "-" => {
            write_matrix(out)?;
            write_json(&mut std::io::stderr(), &summary)
        }
        Some(p) => {
            let mut f = std::fs::File::create(p)?;
            write_matrix(&mut f)?;
            write_json(out, &summary)
        }
        None => write_json(out, &summary),
    }
}
