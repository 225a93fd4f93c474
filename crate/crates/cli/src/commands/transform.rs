use std::io::Write;
use std::sync::Arc;

use clap::ValueEnum;
use cycleguard::system_file::{Bound, SystemFile};
use cycleguard::transform::ContiFilippov;

use crate::error::CliError;
use crate::load::load;
use crate::output::{fmt12, write_json};

#[derive(Clone, Copy, ValueEnum)]
pub enum Emit {
    /// CSV of `u`, `x = beta(u)`, `u/g(x)` and each transformed coefficient.
    Table,
    /// The transformed system as a system file.
    USystem,
}

#[derive(clap::Args)]
pub struct Args {
    /// System file or gallery name.
    pub system: String,
    #[arg(long, value_enum, default_value_t = Emit::Table)]
    pub emit: Emit,
    /// Number of table rows.
    #[arg(long, default_value_t = 101)]
    pub points: usize,
    /// The table covers `|u| <= u_max`, clipped to the image of the strip.
    #[arg(long, default_value_t = 3.0)]
    pub u_max: f64,
}

pub fn run(args: &Args, out: &mut dyn Write) -> Result<(), CliError> {
    let loaded = load(&args.system)?;
    let s = loaded.structured()?;
    let cf = Arc::new(ContiFilippov::for_system(s)?);
    let pushed = cf.pushforward(s)?;
    let (lo, hi) = cf.u_range();
    eprintln!("u range: [{}, {}]", fmt12(lo), fmt12(hi));
    match args.emit {
        Emit::Table => {
            if args.points < 2 || args.u_max.is_nan() || args.u_max <= 0.0 {
                return Err(CliError::Parse("need --points >= 2 and --u-max > 0".into()));
            }
            // Stay strictly inside a finite image, where beta is singular.
            let inset = |e: f64| {
                if e.is_finite() {
                    e - 1e-9 * e.abs().max(1.0) * e.signum()
                } else {
                    e
                }
            };
            let (a, b) = (inset(lo).max(-args.u_max), inset(hi).min(args.u_max));
            let mut w = csv::Writer::from_writer(out);
            let mut header = vec!["u".to_string(), "x".to_string(), "ratio".to_string()];
            header.extend(pushed.terms().iter().map(|(j, _)| format!("f{j}")));
            w.write_record(&header)?;
            for i in 0..args.points {
                let u = a + (b - a) * i as f64 / (args.points - 1) as f64;
                let mut row = vec![fmt12(u), fmt12(cf.beta(u)?), fmt12(cf.ratio(u)?)];
                for (_, c) in pushed.terms() {
                    row.push(fmt12(
                        c.eval(u).map_err(|e| CliError::Internal(e.to_string()))?,
                    ));
                }
                w.write_record(&row)?;
            }
            w.flush()?;
            Ok(())
        }
        Emit::USystem => {
            let identity = s.is_linear_g() && cf.gprime0() == 1.0 && loaded.file.shift == 0.0;
            let mut file = SystemFile::structured("x", &[]);
            file.domain = Some([Bound::from_f64(lo), Bound::from_f64(hi)]);
            if identity {
                file.f = loaded.file.f.clone();
            } else {
                file.f = pushed
                    .terms()
                    .iter()
                    .map(|(j, c)| (j.to_string(), c.describe()))
                    .collect();
                file.black_box = true;
            }
            write_json(out, &file)
        }
    }
}
