use std::collections::BTreeMap;

use crate::poly::Polynomial;
use crate::sampling::{finite_window, halton};

use super::{Coefficient, SystemError};

/// One y-trinomial `κ(x)y^{2h+2r} + τ(x)y^{h+2r} + η(x)y^{2r}`.
#[derive(Debug, Clone)]
pub struct TrinomialPiece {
    pub kappa: Coefficient,
    pub tau: Coefficient,
    pub eta: Coefficient,
    pub h: u32,
    pub r: u32,
}

impl TrinomialPiece {
    pub fn new(
        kappa: Coefficient,
        tau: Coefficient,
        eta: Coefficient,
        h: u32,
        r: u32,
    ) -> Result<Self, SystemError> {
        if h == 0 {
            return Err(SystemError::InvalidTrinomial("h must be positive".into()));
        }
        Ok(TrinomialPiece {
            kappa,
            tau,
            eta,
            h,
            r,
        })
    }

    /// The degenerate piece `η(x)y^{2r}` with `κ = τ = 0`.
    pub fn pure(eta: Coefficient, r: u32) -> Self {
        TrinomialPiece {
            kappa: Coefficient::zero(),
            tau: Coefficient::zero(),
            eta,
            h: 1,
            r,
        }
    }

    /// The three y-exponents, highest first.
    pub fn exponents(&self) -> [u32; 3] {
        [2 * self.h + 2 * self.r, self.h + 2 * self.r, 2 * self.r]
    }

    pub fn eval(&self, x: f64, y: f64) -> Result<f64, crate::expr::EvalError> {
        let [e0, e1, e2] = self.exponents();
        Ok(self.kappa.eval(x)? * y.powi(e0 as i32)
            + self.tau.eval(x)? * y.powi(e1 as i32)
            + self.eta.eval(x)? * y.powi(e2 as i32))
    }

    pub fn is_polynomial(&self) -> bool {
        self.kappa.as_polynomial().is_some()
            && self.tau.as_polynomial().is_some()
            && self.eta.as_polynomial().is_some()
    }

    fn coefficients(&self) -> [&Coefficient; 3] {
        [&self.kappa, &self.tau, &self.eta]
    }
}

/// Grouping of `Σ f_j(x)y^{j−1}` into y-trinomials.
#[derive(Debug, Clone, Default)]
pub struct TrinomialDecomposition {
    pub pieces: Vec<TrinomialPiece>,
}

impl TrinomialDecomposition {
    pub fn new(pieces: Vec<TrinomialPiece>) -> Self {
        TrinomialDecomposition { pieces }
    }

    /// Each odd term `f_{2k+1}y^{2k}` as a degenerate piece with `r = k`.
    /// With an even term present, a system of degree at most 3 is taken as
    /// the single piece `f₃y² + f₂y + f₁`; higher degrees need a supplied
    /// decomposition.
    pub fn default_for(f: &[(u32, Coefficient)]) -> Result<Self, SystemError> {
        if f.iter().any(|(j, _)| j % 2 == 0) && f.iter().all(|(j, _)| *j <= 3) {
            let get = |k: u32| {
                f.iter()
                    .find(|(j, _)| *j == k)
                    .map(|(_, c)| c.clone())
                    .unwrap_or_else(Coefficient::zero)
            };
            return Ok(TrinomialDecomposition {
                pieces: vec![TrinomialPiece::new(get(3), get(2), get(1), 1, 0)?],
            });
        }
        let mut pieces = Vec::new();
        for (j, c) in f {
            if j % 2 == 0 {
                return Err(SystemError::DecompositionRequired { even_degree: *j });
            }
            pieces.push(TrinomialPiece::pure(c.clone(), (j - 1) / 2));
        }
        Ok(TrinomialDecomposition { pieces })
    }

    pub fn eval(&self, x: f64, y: f64) -> Result<f64, crate::expr::EvalError> {
        let mut s = 0.0;
        for p in &self.pieces {
            s += p.eval(x, y)?;
        }
        Ok(s)
    }

    /// Check that the pieces add up to `Σ f_j y^{j−1}`: coefficient by
    /// coefficient when everything is polynomial, otherwise at 200 sample
    /// points with relative tolerance 1e−9.
    pub fn verify(&self, f: &[(u32, Coefficient)], domain: (f64, f64)) -> Result<(), SystemError> {
        let all_poly = self.pieces.iter().all(TrinomialPiece::is_polynomial)
            && f.iter().all(|(_, c)| c.as_polynomial().is_some());
        if all_poly {
            let mut lhs: BTreeMap<u32, Polynomial> = BTreeMap::new();
            for p in &self.pieces {
                for (e, c) in p.exponents().into_iter().zip(p.coefficients()) {
                    let slot = lhs.entry(e).or_default();
                    *slot = &*slot + c.as_polynomial().unwrap();
                }
            }
            let mut rhs: BTreeMap<u32, Polynomial> = BTreeMap::new();
            for (j, c) in f {
                let slot = rhs.entry(j - 1).or_default();
                *slot = &*slot + c.as_polynomial().unwrap();
            }
            lhs.retain(|_, p| !p.is_zero());
            rhs.retain(|_, p| !p.is_zero());
            if lhs != rhs {
                let power = lhs
                    .keys()
                    .chain(rhs.keys())
                    .find(|k| lhs.get(k) != rhs.get(k))
                    .copied()
                    .unwrap_or(0);
                return Err(SystemError::DecompositionMismatch(format!(
                    "coefficient of y^{power}: pieces give {}, system has {}",
                    lhs.get(&power).cloned().unwrap_or_default(),
                    rhs.get(&power).cloned().unwrap_or_default()
                )));
            }
            return Ok(());
        }
        let (a, b) = finite_window(domain.0, domain.1, 5.0);
        for i in 1..=200u64 {
            let x = a + (b - a) * halton(i, 2);
            let y = -3.0 + 6.0 * halton(i, 3);
            if x <= a || x >= b {
                continue;
            }
            let mut want = 0.0;
            let mut scale = 0.0;
            for (j, c) in f {
                let term = c
                    .eval(x)
                    .map_err(|e| SystemError::DecompositionMismatch(e.to_string()))?
                    * y.powi(*j as i32 - 1);
                want += term;
                scale += term.abs();
            }
            let got = self
                .eval(x, y)
                .map_err(|e| SystemError::DecompositionMismatch(e.to_string()))?;
            if (got - want).abs() > 1e-9 * (1.0 + scale) {
                return Err(SystemError::DecompositionMismatch(format!(
                    "at (x, y) = ({x}, {y}) pieces give {got}, system has {want}"
                )));
            }
        }
        Ok(())
    }
}
