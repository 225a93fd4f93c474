//! Grid scans of scalar fields: sign maps, zero-curve components and the
//! positivity of `A` between two cycles.

mod annulus;
mod contour;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::par::{self, Execution};
use crate::system::{FieldError, PlanarField, PlanarSystem};

pub use annulus::{annulus_positive_check, AnnulusCheck};
pub use contour::{zero_curve_components, ZeroComponent, ZeroComponents};

/// Scalar fields that can be scanned.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalarField {
    /// `A = yẋ − xẏ`.
    Angular,
    /// `xφ_x + yφ_y`.
    Starshape,
    /// `Ė = −y²φ`.
    EnergyRate,
    Phi,
}

impl ScalarField {
    pub fn name(self) -> &'static str {
        match self {
            ScalarField::Angular => "A",
            ScalarField::Starshape => "starshape",
            ScalarField::EnergyRate => "edot",
            ScalarField::Phi => "phi",
        }
    }

    /// The field whose zero set is traced: `Ė` drops its `y²` factor so the
    /// x-axis is not counted as a curve.
    pub fn zero_set_field(self) -> ScalarField {
        match self {
            ScalarField::EnergyRate => ScalarField::Phi,
            f => f,
        }
    }

    pub fn eval(self, s: &PlanarSystem, x: f64, y: f64) -> Result<f64, ScanError> {
        let st = || {
            s.as_structured()
                .ok_or(ScanError::NotStructured(self.name()))
        };
        Ok(match self {
            ScalarField::Angular => s.angular(x, y)?,
            ScalarField::Starshape => st()?.starshape(x, y)?,
            ScalarField::EnergyRate => st()?.energy_rate(x, y)?,
            ScalarField::Phi => st()?.phi(x, y)?,
        })
    }
}

impl std::str::FromStr for ScalarField {
    type Err = ScanError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "A" | "a" | "angular" => Ok(ScalarField::Angular),
            "starshape" => Ok(ScalarField::Starshape),
            "edot" => Ok(ScalarField::EnergyRate),
            "phi" => Ok(ScalarField::Phi),
            other => Err(ScanError::UnknownField(other.to_string())),
        }
    }
}

/// Closed rectangle `[x0, x1] × [y0, y1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub x: (f64, f64),
    pub y: (f64, f64),
}

impl Window {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Result<Self, ScanError> {
        let ok = [x0, x1, y0, y1].iter().all(|v| v.is_finite()) && x0 < x1 && y0 < y1;
        if !ok {
            return Err(ScanError::InvalidWindow(format!(
                "[{x0}, {x1}] x [{y0}, {y1}]"
            )));
        }
        Ok(Window {
            x: (x0, x1),
            y: (y0, y1),
        })
    }

    /// Square `[−r, r]²`.
    pub fn square(r: f64) -> Result<Self, ScanError> {
        Self::new(-r, r, -r, r)
    }

    /// Same center, twice the extent.
    pub fn doubled(&self) -> Window {
        let (cx, cy) = (0.5 * (self.x.0 + self.x.1), 0.5 * (self.y.0 + self.y.1));
        let (hx, hy) = (self.x.1 - self.x.0, self.y.1 - self.y.0);
        Window {
            x: (cx - hx, cx + hx),
            y: (cy - hy, cy + hy),
        }
    }

    /// Largest `|coordinate|` in the window.
    pub fn reach(&self) -> f64 {
        [self.x.0, self.x.1, self.y.0, self.y.1]
            .iter()
            .fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Default zero tolerance `1e−9·(1 + reach²)`.
    pub fn default_atol(&self) -> f64 {
        1e-9 * (1.0 + self.reach().powi(2))
    }

    fn check_domain(&self, s: &PlanarSystem) -> Result<(), ScanError> {
        for x in [self.x.0, self.x.1] {
            if !s.in_domain(x, 0.0) {
                return Err(ScanError::OutOfDomain { x });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScanError {
    #[error("x = {x} is outside the domain strip")]
    OutOfDomain { x: f64 },
    #[error("invalid window {0}")]
    InvalidWindow(String),
    #[error("resolution must be at least 1 x 1")]
    InvalidResolution,
    #[error("field {0} needs a structured system")]
    NotStructured(&'static str),
    #[error("unknown field {0:?} (expected A, starshape, edot or phi)")]
    UnknownField(String),
    #[error("cycles are not nested: {0}")]
    CyclesNotNested(String),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// Signs of a field at the cell centers of a grid; `0` means
/// `|value| ≤ atol`. Row `j` holds the cells with the `j`-th smallest `y`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignGrid {
    pub field: ScalarField,
    pub window: Window,
    pub nx: usize,
    pub ny: usize,
    pub atol: f64,
    pub signs: Vec<i8>,
    pub min: f64,
    pub min_at: [f64; 2],
    pub max: f64,
    pub max_at: [f64; 2],
}

impl SignGrid {
    pub fn sign(&self, i: usize, j: usize) -> i8 {
        self.signs[j * self.nx + i]
    }

    pub fn center(&self, i: usize, j: usize) -> [f64; 2] {
        cell_center(&self.window, self.nx, self.ny, i, j)
    }

    /// Counts of `(−, 0, +)` cells.
    pub fn counts(&self) -> (usize, usize, usize) {
        let c = |v: i8| self.signs.iter().filter(|&&s| s == v).count();
        (c(-1), c(0), c(1))
    }

    pub fn has_negative(&self) -> bool {
        self.signs.contains(&-1)
    }

    pub fn has_positive(&self) -> bool {
        self.signs.contains(&1)
    }

    /// Sign matrix as rows of `-1/0/1`, highest `y` first.
    pub fn to_rows(&self) -> Vec<Vec<i8>> {
        (0..self.ny)
            .rev()
            .map(|j| self.signs[j * self.nx..(j + 1) * self.nx].to_vec())
            .collect()
    }
}

fn cell_center(w: &Window, nx: usize, ny: usize, i: usize, j: usize) -> [f64; 2] {
    let dx = (w.x.1 - w.x.0) / nx as f64;
    let dy = (w.y.1 - w.y.0) / ny as f64;
    [w.x.0 + (i as f64 + 0.5) * dx, w.y.0 + (j as f64 + 0.5) * dy]
}

fn sign_with(v: f64, atol: f64) -> i8 {
    if v.abs() <= atol {
        0
    } else if v > 0.0 {
        1
    } else {
        -1
    }
}

/// Evaluate `field` at the cell centers of an `nx × ny` grid over
/// `window`. `atol` defaults to [`Window::default_atol`].
pub fn sign_grid(
    s: &PlanarSystem,
    field: ScalarField,
    window: Window,
    nx: usize,
    ny: usize,
    atol: Option<f64>,
    exec: Execution,
) -> Result<SignGrid, ScanError> {
    if nx == 0 || ny == 0 {
        return Err(ScanError::InvalidResolution);
    }
    window.check_domain(s)?;
    let atol = atol.unwrap_or_else(|| window.default_atol());
    let rows = par::map_range(exec, ny, |j| {
        (0..nx)
            .map(|i| {
                let [x, y] = cell_center(&window, nx, ny, i, j);
                field.eval(s, x, y)
            })
            .collect::<Result<Vec<f64>, ScanError>>()
    });
    let mut signs = Vec::with_capacity(nx * ny);
    let (mut min, mut max) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut min_at, mut max_at) = ([0.0; 2], [0.0; 2]);
    for (j, row) in rows.into_iter().enumerate() {
        for (i, v) in row?.into_iter().enumerate() {
            signs.push(sign_with(v, atol));
            if v < min {
                min = v;
                min_at = cell_center(&window, nx, ny, i, j);
            }
            if v > max {
                max = v;
                max_at = cell_center(&window, nx, ny, i, j);
            }
        }
    }
    Ok(SignGrid {
        field,
        window,
        nx,
        ny,
        atol,
        signs,
        min,
        min_at,
        max,
        max_at,
    })
}
