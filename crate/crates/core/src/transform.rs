//! The Conti-Filippov change of variables `u = α(x) = σ(x)√(2G(x))`,
//! `v = y`, which turns `ẍ + … + g(x) = 0` into a system with linear
//! restoring term and the same orbits.

use std::sync::Arc;

use num_rational::BigRational;
use thiserror::Error;

use crate::expr::EvalError;
use crate::poly::{sign_on_interval, Bound, Polynomial, RealInterval, RequiredSign};
use crate::quad;
use crate::sampling::line_points;
use crate::system::{
    Coefficient, Domain, FieldError, Potential, StructuredSystem, SystemError,
    TrinomialDecomposition, TrinomialPiece, UnivariateFn,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TransformError {
    #[error("g is not admissible: {0}")]
    GNotAdmissible(String),
    #[error("x = {0} is outside the domain")]
    OutOfDomain(f64),
    #[error("u = {0} is outside the image of the domain")]
    OutOfRange(f64),
    #[error("evaluation failed: {0}")]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    System(#[from] SystemError),
}

/// Below this |u| the ratio `u/g(β(u))` is taken from its two-term expansion.
pub const SERIES_RADIUS: f64 = 1e-6;

/// Conti-Filippov map for a fixed admissible `g` on a strip.
#[derive(Debug, Clone)]
pub struct ContiFilippov {
    g: Coefficient,
    domain: Domain,
    potential: Arc<Potential>,
    gprime0: f64,
    half_gsecond0: f64,
    u_range: (f64, f64),
}

impl ContiFilippov {
    /// Requires `g(0) = 0`, `g′(0) > 0` and `x g(x) > 0` on the strip minus
    /// the origin (certified exactly for polynomial `g`, sampled otherwise).
    pub fn new(g: &Coefficient, domain: Domain) -> Result<Self, TransformError> {
        let potential =
            Potential::new(g, domain).map_err(|e| TransformError::GNotAdmissible(e.to_string()))?;
        Self::build(g, domain, Arc::new(potential))
    }

    pub fn for_system(s: &StructuredSystem) -> Result<Self, TransformError> {
        Self::new(s.g(), s.domain())
    }

    fn build(
        g: &Coefficient,
        domain: Domain,
        potential: Arc<Potential>,
    ) -> Result<Self, TransformError> {
        check_admissible(g, domain)?;
        let gprime0 = g.derivative(0.0)?;
        let half_gsecond0 = 0.5 * g.second_derivative(0.0)?;
        let mut cf = ContiFilippov {
            g: g.clone(),
            domain,
            potential,
            gprime0,
            half_gsecond0,
            u_range: (0.0, 0.0),
        };
        let up = cf.potential_limit(1.0)?;
        let down = cf.potential_limit(-1.0)?;
        cf.u_range = (-(2.0 * down).sqrt(), (2.0 * up).sqrt());
        Ok(cf)
    }

    pub fn g(&self) -> &Coefficient {
        &self.g
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    pub fn gprime0(&self) -> f64 {
        self.gprime0
    }

    /// `(u⁻, u⁺)`, the image of the strip; ends may be infinite.
    pub fn u_range(&self) -> (f64, f64) {
        self.u_range
    }

    /// `G(x) = ∫₀ˣ g`.
    pub fn potential_at(&self, x: f64) -> Result<f64, TransformError> {
        if !self.domain.contains(x) {
            return Err(TransformError::OutOfDomain(x));
        }
        Ok(self.potential.eval(x)?)
    }

    pub fn alpha(&self, x: f64) -> Result<f64, TransformError> {
        let big_g = self.potential_at(x)?.max(0.0);
        if x == 0.0 {
            return Ok(0.0);
        }
        Ok(x.signum() * (2.0 * big_g).sqrt())
    }

    /// Inverse of [`alpha`](Self::alpha), by safeguarded Newton iteration on
    /// `G(x) = u²/2` inside a monotone bracket.
    pub fn beta(&self, u: f64) -> Result<f64, TransformError> {
        if u == 0.0 {
            return Ok(0.0);
        }
        if !(self.u_range.0 < u && u < self.u_range.1) {
            return Err(TransformError::OutOfRange(u));
        }
        let sign = u.signum();
        let target = 0.5 * u * u;
        let edge = if sign > 0.0 {
            self.domain.b
        } else {
            self.domain.a
        };
        let gpot = |x: f64| self.potential.eval(x);

        // Bracket [lo, hi] (in |x|) with G(lo) ≤ target < G(hi).
        let mut lo = 0.0f64;
        let mut hi = (u.abs() / self.gprime0.sqrt()).min(1.0);
        let mut k = 0;
        loop {
            let x = sign * hi;
            if !self.domain.contains(x) {
                return Err(TransformError::OutOfRange(u));
            }
            if gpot(x)? >= target {
                break;
            }
            lo = hi;
            hi = if edge.is_finite() {
                0.5 * (hi + edge.abs())
            } else {
                2.0 * hi
            };
            k += 1;
            if k > 2000 || lo == hi {
                return Err(TransformError::OutOfRange(u));
            }
        }

        let tol = 1e-12 * (1.0 + u.abs());
        let mut x = (u.abs() / self.gprime0.sqrt()).clamp(lo, hi);
        if !(x > lo && x < hi) {
            x = 0.5 * (lo + hi);
        }
        for _ in 0..300 {
            let gx = gpot(sign * x)?;
            let a = (2.0 * gx.max(0.0)).sqrt();
            if (a - u.abs()).abs() <= tol {
                return Ok(sign * x);
            }
            if gx < target {
                lo = x;
            } else {
                hi = x;
            }
            let slope = sign * self.g.eval(sign * x)?;
            let mut next = x - (gx - target) / slope;
            if !(next > lo && next < hi) || !next.is_finite() {
                next = 0.5 * (lo + hi);
            }
            if next == x || hi - lo <= 4.0 * f64::EPSILON * hi {
                return Ok(sign * next);
            }
            x = next;
        }
        Ok(sign * x)
    }

    /// `Λ(x, y) = (α(x), y)`.
    pub fn forward(&self, x: f64, y: f64) -> Result<(f64, f64), TransformError> {
        Ok((self.alpha(x)?, y))
    }

    /// `Λ⁻¹(u, v) = (β(u), v)`.
    pub fn inverse(&self, u: f64, v: f64) -> Result<(f64, f64), TransformError> {
        Ok((self.beta(u)?, v))
    }

    /// `u / g(β(u))`, continuous through `u = 0` with value `1/√g′(0)`.
    pub fn ratio(&self, u: f64) -> Result<f64, TransformError> {
        if u.abs() < SERIES_RADIUS {
            let g1 = self.gprime0;
            return Ok(1.0 / g1.sqrt() - 2.0 * self.half_gsecond0 * u / (3.0 * g1 * g1));
        }
        let x = self.beta(u)?;
        Ok(u / self.g.eval(x)?)
    }

    /// `d/du [u / g(β(u))] = (1 − R² g′(β)) / g(β)` with `R` the ratio.
    pub fn ratio_derivative(&self, u: f64) -> Result<f64, TransformError> {
        if u.abs() < 10.0 * SERIES_RADIUS {
            let g1 = self.gprime0;
            return Ok(-2.0 * self.half_gsecond0 / (3.0 * g1 * g1));
        }
        let x = self.beta(u)?;
        let gx = self.g.eval(x)?;
        let r = u / gx;
        Ok((1.0 - r * r * self.g.derivative(x)?) / gx)
    }

    /// The system in `(u, v)`: `u̇ = v, v̇ = −u − Σ f̃_j(u) vʲ` with
    /// `f̃_j(u) = u f_j(β(u)) / g(β(u))`.
    pub fn pushforward(
        self: &Arc<Self>,
        s: &StructuredSystem,
    ) -> Result<StructuredSystem, TransformError> {
        let push = |c: &Coefficient| -> Coefficient {
            if c.is_exactly_zero() {
                return Coefficient::zero();
            }
            Coefficient::black_box(Arc::new(Pushed {
                cf: Arc::clone(self),
                inner: c.clone(),
            }))
        };
        let terms: Vec<(u32, Coefficient)> = s.terms().iter().map(|(j, c)| (*j, push(c))).collect();
        let domain = Domain {
            a: self.u_range.0,
            b: self.u_range.1,
        };
        let mut out = StructuredSystem::new(Coefficient::poly(Polynomial::x()), terms, domain)?;
        if let Some(d) = s.supplied_trinomials() {
            let pieces = d
                .pieces
                .iter()
                .map(|p| TrinomialPiece {
                    kappa: push(&p.kappa),
                    tau: push(&p.tau),
                    eta: push(&p.eta),
                    h: p.h,
                    r: p.r,
                })
                .collect();
            out = out.with_trinomials(TrinomialDecomposition::new(pieces))?;
        }
        Ok(out)
    }

    /// `Ψ = R [2G(Φ_x g − Φ g′)/g² + Φ + yΦ_y]` with `R = σ√(2G)/g`, the
    /// original-coordinates expression of the pushforward's star-shape form
    /// `uφ̃_u + vφ̃_v`. On `x = 0` the continuous extension `yΦ_y/√g′(0)` is
    /// used.
    pub fn psi(&self, s: &StructuredSystem, x: f64, y: f64) -> Result<f64, TransformError> {
        let (phi, phi_x, phi_y) = s.phi_partials(x, y)?;
        if x.abs() < 1e-9 {
            return Ok(y * phi_y / self.gprime0.sqrt());
        }
        let big_g = self.potential_at(x)?;
        let gx = self.g.eval(x)?;
        let dg = self.g.derivative(x)?;
        let r = self.alpha(x)? / gx;
        Ok(r * (2.0 * big_g * (phi_x * gx - phi * dg) / (gx * gx) + phi + y * phi_y))
    }

    /// `lim G` toward the end of the strip in direction `sign`; infinite when
    /// the integral diverges.
    fn potential_limit(&self, sign: f64) -> Result<f64, TransformError> {
        let edge = if sign > 0.0 {
            self.domain.b
        } else {
            self.domain.a
        };
        if let Some(p) = self.potential.polynomial() {
            if edge.is_infinite() {
                return Ok(f64::INFINITY);
            }
            return Ok(crate::expr::rational_to_f64(
                &p.eval(&BigRational::from_float(edge).unwrap()),
            ));
        }
        // Integrate over successive pieces approaching the edge and watch
        // how fast the increments shrink.
        let points: Vec<f64> = if edge.is_finite() {
            (0..=60).map(|k| edge * (1.0 - 0.5f64.powi(k))).collect()
        } else {
            std::iter::once(0.0)
                .chain((0..=62).map(|k| sign * 2f64.powi(k)))
                .collect()
        };
        let mut total = 0.0;
        let mut last_inc: Option<f64> = None;
        let mut shrinking = 0;
        let mut steady = 0;
        for w in points.windows(2) {
            let inc = quad::integrate(|s| self.g.eval(s), w[0], w[1], 1e-13 * (1.0 + total))?;
            let inc = inc.abs();
            total += inc;
            if let Some(prev) = last_inc {
                if inc < 0.9 * prev {
                    shrinking += 1;
                    steady = 0;
                } else {
                    shrinking = 0;
                    steady += 1;
                }
                if steady >= 4 {
                    return Ok(f64::INFINITY);
                }
                if shrinking >= 3 && inc <= 1e-15 * total.max(1e-300) {
                    return Ok(total);
                }
            }
            last_inc = Some(inc);
        }
        if shrinking >= 3 {
            Ok(total)
        } else {
            Ok(f64::INFINITY)
        }
    }
}

fn check_admissible(g: &Coefficient, domain: Domain) -> Result<(), TransformError> {
    let g0 = g.eval(0.0)?;
    if g0.abs() > 1e-14 {
        return Err(TransformError::GNotAdmissible(format!(
            "g(0) = {g0} is not zero"
        )));
    }
    let d0 = g.derivative(0.0)?;
    if d0 <= 0.0 {
        return Err(TransformError::GNotAdmissible(format!(
            "g'(0) = {d0} is not positive"
        )));
    }
    if let Some(p) = g.as_polynomial() {
        let xg = &Polynomial::x() * p;
        let zero = BigRational::default();
        let to_bound = |v: f64| {
            if v.is_finite() {
                Bound::Open(BigRational::from_float(v).unwrap())
            } else {
                Bound::Unbounded
            }
        };
        for iv in [
            RealInterval {
                lo: to_bound(domain.a),
                hi: Bound::Open(zero.clone()),
            },
            RealInterval {
                lo: Bound::Open(zero.clone()),
                hi: to_bound(domain.b),
            },
        ] {
            let v = sign_on_interval(&xg, &iv, RequiredSign::Positive);
            if let Some(w) = v.witness() {
                return Err(TransformError::GNotAdmissible(format!(
                    "x g(x) = {} at x = {}",
                    w.value, w.x
                )));
            }
        }
        return Ok(());
    }
    for (a, b) in [(domain.a, 0.0), (0.0, domain.b)] {
        for x in line_points(a, b, 5000) {
            // Exact zeros far out are usually underflow, so only a negative
            // product counts against g.
            let v = x * g.eval(x)?;
            if v < 0.0 {
                return Err(TransformError::GNotAdmissible(format!(
                    "x g(x) = {v} at x = {x}"
                )));
            }
        }
    }
    Ok(())
}

/// `u ↦ u f(β(u)) / g(β(u))`.
#[derive(Debug)]
struct Pushed {
    cf: Arc<ContiFilippov>,
    inner: Coefficient,
}

impl Pushed {
    fn to_eval_error(e: TransformError) -> EvalError {
        match e {
            TransformError::Eval(e) => e,
            _ => EvalError::NonFinite,
        }
    }
}

impl UnivariateFn for Pushed {
    fn eval(&self, u: f64) -> Result<f64, EvalError> {
        let r = self.cf.ratio(u).map_err(Self::to_eval_error)?;
        let x = self.cf.beta(u).map_err(Self::to_eval_error)?;
        Ok(r * self.inner.eval(x)?)
    }

    fn derivative(&self, u: f64) -> Result<f64, EvalError> {
        let r = self.cf.ratio(u).map_err(Self::to_eval_error)?;
        let dr = self.cf.ratio_derivative(u).map_err(Self::to_eval_error)?;
        let x = self.cf.beta(u).map_err(Self::to_eval_error)?;
        Ok(dr * self.inner.eval(x)? + r * r * self.inner.derivative(x)?)
    }

    fn describe(&self) -> String {
        format!("pushforward of {}", self.inner.describe())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::PlanarField;

    fn cf(g: &str) -> Arc<ContiFilippov> {
        Arc::new(ContiFilippov::new(&Coefficient::parse(g).unwrap(), Domain::whole()).unwrap())
    }

    #[test]
    fn identity_for_linear_g() {
        let c = cf("x");
        for x in [-3.0, -0.1, 0.0, 0.5, 7.0] {
            assert!((c.alpha(x).unwrap() - x).abs() < 1e-15);
            assert!((c.beta(x).unwrap() - x).abs() < 1e-12);
        }
        assert_eq!(c.potential_at(2.0).unwrap(), 2.0);
        assert_eq!(c.potential_at(-2.0).unwrap(), 2.0);
        assert_eq!(c.u_range(), (f64::NEG_INFINITY, f64::INFINITY));
    }

    #[test]
    fn cubic_restoring_force() {
        let c = cf("x + x^3");
        assert_eq!(c.potential_at(1.0).unwrap(), 0.75);
        assert!((c.alpha(1.0).unwrap() - 1.5f64.sqrt()).abs() < 1e-15);
        assert!((c.beta(1.224745).unwrap() - 1.0).abs() < 1e-6);
        for x in [-4.0, -0.3, 1e-7, 2.0] {
            let back = c.beta(c.alpha(x).unwrap()).unwrap();
            assert!((back - x).abs() < 1e-12 * (1.0 + x.abs()), "{x} -> {back}");
        }
    }

    #[test]
    fn pushforward_coefficients() {
        let c = cf("x + x^3");
        let s = StructuredSystem::parse("x + x^3", &[(1, "x^2-1")], Domain::whole()).unwrap();
        let p = c.pushforward(&s).unwrap();
        assert!((p.f(1).unwrap().eval(0.0).unwrap() + 1.0).abs() < 1e-15);
        // Same orbits: the fields are parallel at corresponding points.
        let (x, y) = (0.8, -0.4);
        let u = c.alpha(x).unwrap();
        let a = s.field(x, y).unwrap();
        let b = p.field(u, y).unwrap();
        let scale = c.ratio(u).unwrap();
        // u̇ = α′(x) ẋ = (g/u) y and v̇ = ẏ·(u/g): both pushforward components
        // equal the originals times u/g.
        assert!((b[0] - a[0]).abs() < 1e-12);
        assert!((b[1] - scale * a[1]).abs() < 1e-10);

        let k2 = cf("2*x");
        let s = StructuredSystem::parse("2*x", &[(1, "3")], Domain::whole()).unwrap();
        let p = k2.pushforward(&s).unwrap();
        assert!((p.f(1).unwrap().eval(0.0).unwrap() - 3.0 / 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn root_limit() {
        let c = cf("x + x^2/2 + x^3");
        let mut errs = Vec::new();
        for u in [1e-3, 1e-4, 1e-5] {
            let x = c.beta(u).unwrap();
            let g = c.g().eval(x).unwrap();
            errs.push((g / u - 1.0).abs());
        }
        assert!(
            errs[0] < 1e-2 && errs[1] < errs[0] / 5.0 && errs[2] < errs[1] / 5.0,
            "{errs:?}"
        );
    }

    #[test]
    fn psi_matches_pushforward_star_shape() {
        let c = cf("x + x^3");
        let s = StructuredSystem::parse("x + x^3", &[(1, "x^2-1"), (3, "x^2+2")], Domain::whole())
            .unwrap();
        let p = c.pushforward(&s).unwrap();
        for (x, y) in [(1.0, 1.0), (-0.7, 0.3), (2.0, -1.5)] {
            let direct = c.psi(&s, x, y).unwrap();
            let u = c.alpha(x).unwrap();
            let h = 1e-5 * (1.0 + u.abs());
            let phi_u = (p.phi(u + h, y).unwrap() - p.phi(u - h, y).unwrap()) / (2.0 * h);
            let (_, _, phi_v) = p.phi_partials(u, y).unwrap();
            let other = u * phi_u + y * phi_v;
            assert!(
                (direct - other).abs() < 1e-6 * (1.0 + direct.abs()),
                "{direct} vs {other}"
            );
        }
        let lin = cf("x");
        let s =
            StructuredSystem::parse("x", &[(1, "x^2-1"), (3, "x^2+2")], Domain::whole()).unwrap();
        for (x, y) in [(1.0, 1.0), (-0.7, 0.3)] {
            assert!((lin.psi(&s, x, y).unwrap() - s.starshape(x, y).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn finite_image() {
        let c = cf("x*exp(-x^2)");
        let (lo, hi) = c.u_range();
        assert!(
            (hi - 1.0).abs() < 1e-9 && (lo + 1.0).abs() < 1e-9,
            "{lo} {hi}"
        );
        let c = cf("x/(1+x^2)");
        assert!(c.u_range().1.is_infinite());
        let bounded = ContiFilippov::new(
            &Coefficient::parse("x").unwrap(),
            Domain::new(-1.0, 2.0).unwrap(),
        )
        .unwrap();
        assert_eq!(bounded.u_range(), (-1.0, 2.0));
    }

    #[test]
    fn admissibility() {
        let err = ContiFilippov::new(&Coefficient::parse("x - x^3").unwrap(), Domain::whole())
            .unwrap_err();
        assert!(matches!(err, TransformError::GNotAdmissible(_)));
        let err =
            ContiFilippov::new(&Coefficient::parse("x^2").unwrap(), Domain::whole()).unwrap_err();
        assert!(matches!(err, TransformError::GNotAdmissible(_)));
        let ok = ContiFilippov::new(
            &Coefficient::parse("x - x^3").unwrap(),
            Domain::new(-1.0, 1.0).unwrap(),
        );
        assert!(ok.is_ok());
        let err = ContiFilippov::new(&Coefficient::parse("sin(x)").unwrap(), Domain::whole())
            .unwrap_err();
        assert!(matches!(err, TransformError::GNotAdmissible(_)));
    }
}
