use serde::{Deserialize, Serialize};

use crate::dynamics::Cycle;
use crate::par::{self, Execution};
use crate::system::PlanarField;

use super::ScanError;

/// Smallest `A` found on a polar grid between two nested cycles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnulusCheck {
    pub min: f64,
    pub min_at: [f64; 2],
    pub positive: bool,
    pub samples: usize,
}

/// Radii at which the ray at angle `theta` meets a closed polyline.
fn ray_hits(poly: &[[f64; 2]], theta: f64) -> Vec<f64> {
    let (c, s) = (theta.cos(), theta.sin());
    let mut out = Vec::new();
    for w in poly.windows(2) {
        let (p, q) = (w[0], w[1]);
        let e = [q[0] - p[0], q[1] - p[1]];
        // Solve p + t e = r (c, s).
        let det = e[0] * (-s) - e[1] * (-c);
        if det.abs() < 1e-300 {
            continue;
        }
        let t = (-p[0] * (-s) - (-p[1]) * (-c)) / det;
        let r = (e[0] * (-p[1]) - e[1] * (-p[0])) / det;
        if (0.0..=1.0).contains(&t) && r > 0.0 {
            out.push(r);
        }
    }
    out
}

/// Sample `A` on `n_theta` rays and `n_r` radii per ray across the closed
/// annulus between `inner` and `outer`.
pub fn annulus_positive_check(
    s: &dyn PlanarField,
    inner: &Cycle,
    outer: &Cycle,
    n_r: usize,
    n_theta: usize,
    exec: Execution,
) -> Result<AnnulusCheck, ScanError> {
    if n_r < 2 || n_theta < 1 {
        return Err(ScanError::InvalidResolution);
    }
    let mut bounds = Vec::with_capacity(n_theta);
    for k in 0..n_theta {
        let theta = std::f64::consts::TAU * k as f64 / n_theta as f64;
        let r_in = ray_hits(&inner.polyline, theta)
            .into_iter()
            .fold(f64::NAN, f64::max);
        let r_out = ray_hits(&outer.polyline, theta)
            .into_iter()
            .fold(f64::NAN, f64::min);
        if r_in.is_nan() || r_out.is_nan() {
            return Err(ScanError::CyclesNotNested(format!(
                "a cycle misses the ray at angle {theta}"
            )));
        }
        if r_in >= r_out {
            return Err(ScanError::CyclesNotNested(format!(
                "at angle {theta} the inner cycle reaches r = {r_in}, the outer only r = {r_out}"
            )));
        }
        bounds.push((theta, r_in, r_out));
    }
    let rows = par::map(exec, &bounds, |&(theta, r_in, r_out)| {
        let mut best = (f64::INFINITY, [0.0; 2]);
        for i in 0..n_r {
            let r = r_in + (r_out - r_in) * i as f64 / (n_r - 1) as f64;
            let p = [r * theta.cos(), r * theta.sin()];
            let a = s.angular(p[0], p[1])?;
            if a < best.0 {
                best = (a, p);
            }
        }
        Ok::<_, ScanError>(best)
    });
    let mut min = (f64::INFINITY, [0.0; 2]);
    for r in rows {
        let r = r?;
        if r.0 < min.0 {
            min = r;
        }
    }
    Ok(AnnulusCheck {
        min: min.0,
        min_at: min.1,
        positive: min.0 > 0.0,
        samples: n_r * n_theta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{find_cycles, CycleOptions};
    use crate::system::{Domain, GeneralSystem, StructuredSystem};

    #[test]
    fn two_circles_annulus() {
        let s = GeneralSystem::parse(
            "y*((x^2+y^2) - (x^2+y^2)^2) + x*(1 - 3*(x^2+y^2) + (x^2+y^2)^2)",
            "-x*((x^2+y^2) - (x^2+y^2)^2) + y*(1 - 3*(x^2+y^2) + (x^2+y^2)^2)",
        )
        .unwrap();
        let grid: Vec<f64> = (1..=30).map(|i| 0.1 * i as f64).collect();
        let opts = CycleOptions {
            with_exponents: false,
            ..Default::default()
        };
        let c = find_cycles(&s, &grid, &opts).unwrap().cycles;
        let check = annulus_positive_check(&s, &c[0], &c[1], 40, 90, Execution::default()).unwrap();
        // A = s²(1 − s) changes sign on the unit circle between the cycles.
        assert!(!check.positive);
        assert!(check.min < 0.0);
        let r = check.min_at[0].hypot(check.min_at[1]);
        assert!(r > 1.0);
    }

    #[test]
    fn identical_cycles_are_not_nested() {
        let s = StructuredSystem::parse("x", &[(1, "x^2 - 1")], Domain::whole()).unwrap();
        let grid: Vec<f64> = (1..=30).map(|i| 0.1 * i as f64).collect();
        let opts = CycleOptions {
            with_exponents: false,
            ..Default::default()
        };
        let c = find_cycles(&s, &grid, &opts).unwrap().cycles;
        let err =
            annulus_positive_check(&s, &c[0], &c[0], 10, 36, Execution::Sequential).unwrap_err();
        assert!(matches!(err, ScanError::CyclesNotNested(_)));
    }
}
