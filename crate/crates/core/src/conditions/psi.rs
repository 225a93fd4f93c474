use crate::par::{map, Execution};
use crate::poly::{SignVerdict, Witness};
use crate::sampling::{finite_window, line_points};
use crate::system::{StructuredSystem, TABLE_REACH};
use crate::transform::ContiFilippov;

/// Grid points per axis for the sampled sign of `Ψ`.
pub const PSI_GRID: usize = 100;

/// Sampled verdicts for `Ψ ≥ 0` and `Ψ ≤ 0` on a `PSI_GRID²` grid over the
/// strip (arctangent-spaced along infinite directions). When the primitive
/// of `g` is tabulated, `x` is restricted to the table's reach.
pub fn check_psi_sign(
    s: &StructuredSystem,
    cf: &ContiFilippov,
    exec: Execution,
) -> (SignVerdict, SignVerdict) {
    let d = s.domain();
    let (a, b) = if cf.potential().polynomial().is_some() {
        (d.a, d.b)
    } else {
        finite_window(d.a, d.b, TABLE_REACH)
    };
    let xs = line_points(a, b, PSI_GRID);
    let ys = line_points(f64::NEG_INFINITY, f64::INFINITY, PSI_GRID);
    let points: Vec<(f64, f64)> = xs
        .iter()
        .flat_map(|&x| ys.iter().map(move |&y| (x, y)))
        .collect();
    let degree = s.max_degree() as i32 + 2;
    let values = map(exec, &points, |&(x, y)| {
        cf.psi(s, x, y)
            .map(|v| (v, (1.0 + x * x + y * y).powi(degree).sqrt() * 1e-10))
    });
    let mut nonneg: Option<SignVerdict> = None;
    let mut nonpos: Option<SignVerdict> = None;
    let mut count = 0;
    for (&(x, y), v) in points.iter().zip(values) {
        let (v, tol) = match v {
            Ok(v) => v,
            Err(e) => {
                let r = SignVerdict::Inconclusive {
                    reason: format!("evaluation failed at ({x}, {y}): {e}"),
                };
                return (r.clone(), r);
            }
        };
        if !v.is_finite() {
            continue;
        }
        count += 1;
        if nonneg.is_none() && v < -tol {
            nonneg = Some(SignVerdict::Refuted {
                witness: Witness::at_point(x, y, v),
            });
        }
        if nonpos.is_none() && v > tol {
            nonpos = Some(SignVerdict::Refuted {
                witness: Witness::at_point(x, y, v),
            });
        }
    }
    let pass = SignVerdict::SampledPass { samples: count };
    (nonneg.unwrap_or(pass.clone()), nonpos.unwrap_or(pass))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::Domain;

    #[test]
    fn psi_sign_for_cubic_g() {
        let s = StructuredSystem::parse(
            "x + x^3",
            &[(1, "x^2 - 1"), (3, "x^2 + 1")],
            Domain::whole(),
        )
        .unwrap();
        let cf = ContiFilippov::for_system(&s).unwrap();
        let (pos, neg) = check_psi_sign(&s, &cf, Execution::Sequential);
        assert!(neg.is_refuted());
        let (pos2, _) = check_psi_sign(&s, &cf, Execution::Parallel);
        assert_eq!(pos, pos2);
    }
}
