use std::path::Path;

use cycleguard::gallery::{self, GalleryEntry};
use cycleguard::system::{PlanarSystem, StructuredSystem};
use cycleguard::system_file::SystemFile;

use crate::error::CliError;

/// A system named on the command line, by file path or gallery name.
pub struct Loaded {
    pub name: String,
    pub file: SystemFile,
    pub system: PlanarSystem,
    /// Present when the argument named a gallery entry.
    pub entry: Option<GalleryEntry>,
}

impl Loaded {
    pub fn structured(&self) -> Result<&StructuredSystem, CliError> {
        self.system.as_structured().ok_or_else(|| {
            CliError::InvalidSystem(format!(
                "{} is a general system; this command needs g and f_j",
                self.name
            ))
        })
    }
}

/// Read `arg` as a path if it exists, otherwise as a gallery name.
pub fn load(arg: &str) -> Result<Loaded, CliError> {
    let path = Path::new(arg);
    if path.exists() {
        let src = std::fs::read_to_string(path)
            .map_err(|e| CliError::Parse(format!("cannot read {arg}: {e}")))?;
        let file = SystemFile::from_json(&src)?;
        let system = file.to_system()?;
        let name = path
            .file_stem()
            .map_or_else(|| arg.to_string(), |s| s.to_string_lossy().into_owned());
        return Ok(Loaded {
            name,
            file,
            system,
            entry: None,
        });
    }
    match gallery::get(arg) {
        Some(entry) => {
            let file = entry.system.clone();
            let system = file.to_system()?;
            Ok(Loaded {
                name: entry.name.clone(),
                file,
                system,
                entry: Some(entry),
            })
        }
        None => Err(CliError::Parse(format!(
            "{arg:?} is neither a file nor a gallery entry (known: {})",
            gallery::names().join(", ")
        ))),
    }
}

/// `a:b:step` as grid points from `a` to `b` inclusive.
pub fn parse_grid(spec: &str) -> Result<(f64, f64, f64), CliError> {
    let parts = parse_floats(spec, ':')?;
    let [a, b, step] = parts[..] else {
        return Err(CliError::Parse(format!("grid {spec:?} must be a:b:step")));
    };
    if !(a > 0.0 && b > a && step > 0.0) {
        return Err(CliError::Parse(format!(
            "grid {spec:?} needs 0 < a < b and step > 0"
        )));
    }
    Ok((a, b, step))
}

pub fn parse_floats(spec: &str, sep: char) -> Result<Vec<f64>, CliError> {
    spec.split(sep)
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Parse(format!("{p:?} in {spec:?} is not a number")))
        })
        .collect()
}
