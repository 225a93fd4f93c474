use crate::expr::{Compiled, Expression, Var};

use super::{angular_tolerance, FieldError, PlanarField, SystemError};

/// Planar field `ẋ = P(x, y), ẏ = Q(x, y)` given by expressions.
#[derive(Debug, Clone)]
pub struct GeneralSystem {
    p: Expression,
    q: Expression,
    cp: Compiled,
    cq: Compiled,
    px: Compiled,
    py: Compiled,
    qx: Compiled,
    qy: Compiled,
}

impl GeneralSystem {
    pub fn new(p: Expression, q: Expression) -> Self {
        GeneralSystem {
            cp: p.compile(),
            cq: q.compile(),
            px: p.differentiate(Var::X).compile(),
            py: p.differentiate(Var::Y).compile(),
            qx: q.differentiate(Var::X).compile(),
            qy: q.differentiate(Var::Y).compile(),
            p,
            q,
        }
    }

    pub fn parse(p: &str, q: &str) -> Result<Self, SystemError> {
        let pe = crate::expr::parse(p).map_err(|e| SystemError::Parse(p.to_string(), e))?;
        let qe = crate::expr::parse(q).map_err(|e| SystemError::Parse(q.to_string(), e))?;
        Ok(Self::new(pe, qe))
    }

    pub fn p(&self) -> &Expression {
        &self.p
    }

    pub fn q(&self) -> &Expression {
        &self.q
    }

    /// Symbolic partials `(P_x, P_y, Q_x, Q_y)`.
    pub fn jacobian(&self, x: f64, y: f64) -> Result<[f64; 4], FieldError> {
        Ok([
            self.px.eval(x, y)?,
            self.py.eval(x, y)?,
            self.qx.eval(x, y)?,
            self.qy.eval(x, y)?,
        ])
    }
}

impl PlanarField for GeneralSystem {
    fn field(&self, x: f64, y: f64) -> Result<[f64; 2], FieldError> {
        Ok([self.cp.eval(x, y)?, self.cq.eval(x, y)?])
    }

    fn divergence(&self, x: f64, y: f64) -> Result<f64, FieldError> {
        Ok(self.px.eval(x, y)? + self.qy.eval(x, y)?)
    }

    fn nu(&self, x: f64, y: f64) -> Result<f64, FieldError> {
        let [p, q] = self.field(x, y)?;
        let a = y * p - x * q;
        if a.abs() < angular_tolerance(x, y) {
            return Err(FieldError::AngularSpeedZero { x, y });
        }
        let [px, py, qx, qy] = self.jacobian(x, y)?;
        Ok((p * (x * qx + y * qy) - q * (x * px + y * py)) / a)
    }

    fn in_domain(&self, _x: f64, _y: f64) -> bool {
        true
    }
}
