use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::sign::{sign_on_interval, RealInterval, RequiredSign, SignVerdict};
use super::Polynomial;
use crate::expr::rational_to_f64;

/// Closed floating-point interval with outward rounding.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Iv {
    pub lo: f64,
    pub hi: f64,
}

impl Iv {
    pub fn new(lo: f64, hi: f64) -> Self {
        Iv { lo, hi }
    }

    fn of_rational(c: &BigRational) -> Self {
        let v = rational_to_f64(c);
        Iv {
            lo: v.next_down(),
            hi: v.next_up(),
        }
    }

    fn add(self, o: Iv) -> Iv {
        Iv {
            lo: (self.lo + o.lo).next_down(),
            hi: (self.hi + o.hi).next_up(),
        }
    }

    fn mul(self, o: Iv) -> Iv {
        let p = [
            self.lo * o.lo,
            self.lo * o.hi,
            self.hi * o.lo,
            self.hi * o.hi,
        ];
        let lo = p.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = p.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Iv {
            lo: lo.next_down(),
            hi: hi.next_up(),
        }
    }

    pub fn abs_hi(self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }
}

/// Enclosure of `p` over the interval `x`.
pub(crate) fn eval_interval(coeffs: &[Iv], x: Iv) -> Iv {
    let mut acc = Iv::new(0.0, 0.0);
    for c in coeffs.iter().rev() {
        acc = acc.mul(x).add(*c);
    }
    acc
}

pub(crate) fn interval_coeffs(p: &Polynomial) -> Vec<Iv> {
    p.coeffs().iter().map(Iv::of_rational).collect()
}

/// Result of the root-radius computation for a family of quadratics
/// `κ(x)z² + τ(x)z + η(x)` over `x ∈ [−ε, ε]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CauchyBound {
    /// Certified upper bound of `1 + max(|τ|, |η|)/κ` over the interval.
    pub z_bar: f64,
    /// Plain maximum over the evaluation grid, for comparison.
    pub grid_max: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CauchyError {
    #[error("kappa is not certified positive on [-eps, eps]: {0:?}")]
    KappaNotPositive(SignVerdict),
    #[error("eps must be positive and finite")]
    BadEpsilon,
}

const PIECES: usize = 1024;
const MAX_DEPTH: u32 = 24;

/// Bound `Z̄` such that every root `z` of `κ(x)z² + τ(x)z + η(x)` satisfies
/// `|z| ≤ Z̄` for all `x ∈ [−ε, ε]`.
pub fn cauchy_bound(
    kappa: &Polynomial,
    tau: &Polynomial,
    eta: &Polynomial,
    eps: f64,
) -> Result<CauchyBound, CauchyError> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(CauchyError::BadEpsilon);
    }
    let e = BigRational::from_float(eps).expect("finite");
    let verdict = sign_on_interval(
        kappa,
        &RealInterval::closed(-e.clone(), e),
        RequiredSign::Positive,
    );
    if !verdict.is_proved() {
        return Err(CauchyError::KappaNotPositive(verdict));
    }
    let (k, t, n) = (
        interval_coeffs(kappa),
        interval_coeffs(tau),
        interval_coeffs(eta),
    );
    let mut z_bar: f64 = 1.0;
    let mut grid_max: f64 = 1.0;
    let h = 2.0 * eps / PIECES as f64;
    for i in 0..PIECES {
        let lo = -eps + i as f64 * h;
        let hi = if i + 1 == PIECES {
            eps
        } else {
            -eps + (i + 1) as f64 * h
        };
        z_bar = z_bar.max(piece_bound(
            &k,
            &t,
            &n,
            Iv::new(lo.next_down(), hi.next_up()),
            0,
        ));
        let (kv, tv, nv) = (kappa.eval_f64(lo), tau.eval_f64(lo), eta.eval_f64(lo));
        grid_max = grid_max.max(1.0 + tv.abs().max(nv.abs()) / kv);
    }
    let (kv, tv, nv) = (kappa.eval_f64(eps), tau.eval_f64(eps), eta.eval_f64(eps));
    grid_max = grid_max.max(1.0 + tv.abs().max(nv.abs()) / kv);
    Ok(CauchyBound { z_bar, grid_max })
}

fn piece_bound(k: &[Iv], t: &[Iv], n: &[Iv], x: Iv, depth: u32) -> f64 {
    let kv = eval_interval(k, x);
    if kv.lo <= 0.0 {
        if depth >= MAX_DEPTH {
            return f64::INFINITY;
        }
        let m = 0.5 * (x.lo + x.hi);
        return piece_bound(k, t, n, Iv::new(x.lo, m.next_up()), depth + 1).max(piece_bound(
            k,
            t,
            n,
            Iv::new(m.next_down(), x.hi),
            depth + 1,
        ));
    }
    let num = eval_interval(t, x)
        .abs_hi()
        .max(eval_interval(n, x).abs_hi());
    (1.0 + (num / kv.lo).next_up()).next_up()
}
