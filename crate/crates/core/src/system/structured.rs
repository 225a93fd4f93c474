use std::sync::Arc;

use num_rational::BigRational;
use num_traits::Signed;

use crate::expr::Expression;
use crate::poly::Polynomial;

use super::{
    angular_tolerance, Coefficient, Domain, FieldError, GeneralSystem, PlanarField, Potential,
    SystemError, TrinomialDecomposition,
};

/// `ẋ = y, ẏ = −g(x) − Σ_j f_j(x) yʲ` on the strip `a < x < b`.
#[derive(Debug, Clone)]
pub struct StructuredSystem {
    g: Coefficient,
    f: Vec<(u32, Coefficient)>,
    domain: Domain,
    trinomials: Option<TrinomialDecomposition>,
    potential: Arc<Potential>,
}

impl StructuredSystem {
    /// Terms with an exactly-zero coefficient are dropped.
    pub fn new(
        g: Coefficient,
        f: impl IntoIterator<Item = (u32, Coefficient)>,
        domain: Domain,
    ) -> Result<Self, SystemError> {
        let mut terms: Vec<(u32, Coefficient)> = Vec::new();
        for (j, c) in f {
            if j == 0 {
                return Err(SystemError::InvalidDegree(j));
            }
            if terms.iter().any(|(k, _)| *k == j) {
                return Err(SystemError::DuplicateDegree(j));
            }
            if !c.is_exactly_zero() {
                terms.push((j, c));
            }
        }
        terms.sort_by_key(|(j, _)| *j);
        let domain = Domain::new(domain.a, domain.b)?;
        let potential = Arc::new(Potential::new(&g, domain).map_err(SystemError::Potential)?);
        Ok(StructuredSystem {
            g,
            f: terms,
            domain,
            trinomials: None,
            potential,
        })
    }

    /// Convenience constructor from expression strings.
    pub fn parse(g: &str, f: &[(u32, &str)], domain: Domain) -> Result<Self, SystemError> {
        let g = Coefficient::parse(g)?;
        let f = f
            .iter()
            .map(|(j, s)| Ok((*j, Coefficient::parse(s)?)))
            .collect::<Result<Vec<_>, SystemError>>()?;
        Self::new(g, f, domain)
    }

    /// Attach a trinomial decomposition after checking that it reproduces
    /// `Σ f_j y^{j−1}`.
    pub fn with_trinomials(mut self, d: TrinomialDecomposition) -> Result<Self, SystemError> {
        d.verify(&self.f, (self.domain.a, self.domain.b))?;
        self.trinomials = Some(d);
        Ok(self)
    }

    pub fn g(&self) -> &Coefficient {
        &self.g
    }

    pub fn terms(&self) -> &[(u32, Coefficient)] {
        &self.f
    }

    /// `f_j`, if present.
    pub fn f(&self, j: u32) -> Option<&Coefficient> {
        self.f.iter().find(|(k, _)| *k == j).map(|(_, c)| c)
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    /// Supplied decomposition, if any.
    pub fn supplied_trinomials(&self) -> Option<&TrinomialDecomposition> {
        self.trinomials.as_ref()
    }

    /// Supplied decomposition, or the default one built from odd terms.
    pub fn trinomials(&self) -> Result<TrinomialDecomposition, SystemError> {
        match &self.trinomials {
            Some(d) => Ok(d.clone()),
            None => TrinomialDecomposition::default_for(&self.f),
        }
    }

    /// `k` when `g(x) = kx` with `k > 0`.
    pub fn linear_g_slope(&self) -> Option<BigRational> {
        let p = self.g.as_polynomial()?;
        let k = p.coeff(1);
        (p.degree() == Some(1) && p.coeff(0) == BigRational::default() && k.is_positive())
            .then_some(k)
    }

    pub fn is_linear_g(&self) -> bool {
        self.linear_g_slope().is_some()
    }

    /// True when no `f_j` of even degree is present.
    pub fn is_odd(&self) -> bool {
        self.f.iter().all(|(j, _)| j % 2 == 1)
    }

    pub fn max_degree(&self) -> u32 {
        self.f.last().map(|(j, _)| *j).unwrap_or(0)
    }

    fn check(&self, x: f64) -> Result<(), FieldError> {
        if self.domain.contains(x) {
            Ok(())
        } else {
            Err(FieldError::OutOfDomain { x })
        }
    }

    /// `Φ(x, y) = Σ f_j(x) y^{j−1}`.
    pub fn phi(&self, x: f64, y: f64) -> Result<f64, FieldError> {
        self.check(x)?;
        let mut s = 0.0;
        for (j, c) in &self.f {
            s += c.eval(x)? * y.powi(*j as i32 - 1);
        }
        Ok(s)
    }

    /// `(Φ, Φ_x, Φ_y)`.
    pub fn phi_partials(&self, x: f64, y: f64) -> Result<(f64, f64, f64), FieldError> {
        self.check(x)?;
        let (mut p, mut px, mut py) = (0.0, 0.0, 0.0);
        for (j, c) in &self.f {
            let j = *j as i32;
            let f = c.eval(x)?;
            let yj1 = y.powi(j - 1);
            p += f * yj1;
            px += c.derivative(x)? * yj1;
            if j >= 2 {
                py += (j - 1) as f64 * f * y.powi(j - 2);
            }
        }
        Ok((p, px, py))
    }

    /// `xΦ_x + yΦ_y = Σ (x f_j′ + (j−1) f_j) y^{j−1}`.
    pub fn starshape(&self, x: f64, y: f64) -> Result<f64, FieldError> {
        self.check(x)?;
        let mut s = 0.0;
        for (j, c) in &self.f {
            let h = x * c.derivative(x)? + (*j as f64 - 1.0) * c.eval(x)?;
            s += h * y.powi(*j as i32 - 1);
        }
        Ok(s)
    }

    /// `−y² (xΦ_x + yΦ_y) / A`, equal to [`PlanarField::nu`] whenever `g` is
    /// linear.
    pub fn nu_from_starshape(&self, x: f64, y: f64) -> Result<f64, FieldError> {
        let a = self.angular(x, y)?;
        if a.abs() < angular_tolerance(x, y) {
            return Err(FieldError::AngularSpeedZero { x, y });
        }
        Ok(-y * y * self.starshape(x, y)? / a)
    }

    /// `E = G(x) + y²/2`.
    pub fn energy(&self, x: f64, y: f64) -> Result<f64, FieldError> {
        self.check(x)?;
        Ok(self.potential.eval(x)? + 0.5 * y * y)
    }

    /// `Ė = −y² Φ(x, y)` along solutions.
    pub fn energy_rate(&self, x: f64, y: f64) -> Result<f64, FieldError> {
        Ok(-y * y * self.phi(x, y)?)
    }

    /// The same system as a general field `P = y`, `Q = −g − Σ f_j yʲ`, when
    /// every coefficient has a closed form.
    pub fn to_general(&self) -> Option<GeneralSystem> {
        let mut q = Expression::neg(self.g.expression()?);
        for (j, c) in &self.f {
            let term =
                Expression::mul(c.expression()?, Expression::pow(Expression::y(), *j as i32));
            q = Expression::sub(q, term);
        }
        Some(GeneralSystem::new(Expression::y(), q))
    }

    /// The polynomial `Σ f_j`-data as exact polynomials, if all are.
    pub fn polynomial_terms(&self) -> Option<Vec<(u32, Polynomial)>> {
        self.f
            .iter()
            .map(|(j, c)| c.as_polynomial().map(|p| (*j, p.clone())))
            .collect()
    }
}

impl PlanarField for StructuredSystem {
    fn field(&self, x: f64, y: f64) -> Result<[f64; 2], FieldError> {
        self.check(x)?;
        let mut s = self.g.eval(x)?;
        for (j, c) in &self.f {
            s += c.eval(x)? * y.powi(*j as i32);
        }
        Ok([y, -s])
    }

    fn divergence(&self, x: f64, y: f64) -> Result<f64, FieldError> {
        self.check(x)?;
        let mut s = 0.0;
        for (j, c) in &self.f {
            s -= *j as f64 * c.eval(x)? * y.powi(*j as i32 - 1);
        }
        Ok(s)
    }

    fn angular(&self, x: f64, y: f64) -> Result<f64, FieldError> {
        let [p, q] = self.field(x, y)?;
        Ok(y * p - x * q)
    }

    fn nu(&self, x: f64, y: f64) -> Result<f64, FieldError> {
        let [p, q] = self.field(x, y)?;
        let a = y * p - x * q;
        if a.abs() < angular_tolerance(x, y) {
            return Err(FieldError::AngularSpeedZero { x, y });
        }
        // P = y, so P_x = 0 and P_y = 1.
        let mut qx = -self.g.derivative(x)?;
        let mut qy = 0.0;
        for (j, c) in &self.f {
            let j = *j as i32;
            qx -= c.derivative(x)? * y.powi(j);
            qy -= j as f64 * c.eval(x)? * y.powi(j - 1);
        }
        Ok((p * (x * qx + y * qy) - q * y) / a)
    }

    fn in_domain(&self, x: f64, _y: f64) -> bool {
        self.domain.contains(x)
    }
}
