//! Dormand–Prince 5(4) with the free fourth-order dense output. Systems
//! here are autonomous, so the stage times are not needed.

use crate::system::FieldError;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Interpolant over one accepted step `[t0, t0 + h]` (`h` may be negative).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DenseStep<const N: usize> {
    pub t0: f64,
    pub h: f64,
    r: [[f64; N]; 5],
}

impl<const N: usize> DenseStep<N> {
    pub fn t1(&self) -> f64 {
        self.t0 + self.h
    }

    pub fn start(&self) -> [f64; N] {
        self.r[0]
    }

    pub fn end(&self) -> [f64; N] {
        std::array::from_fn(|i| self.r[0][i] + self.r[1][i])
    }

    /// State at time `t` inside the step.
    pub fn eval(&self, t: f64) -> [f64; N] {
        let s = (t - self.t0) / self.h;
        let s1 = 1.0 - s;
        let r = &self.r;
        std::array::from_fn(|i| {
            r[0][i] + s * (r[1][i] + s1 * (r[2][i] + s * (r[3][i] + s1 * r[4][i])))
        })
    }
}

/// Why no step could be taken.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepFailure {
    /// The step size collapsed while stages kept failing to evaluate.
    Stuck(FieldError),
    /// The step size collapsed with finite values, e.g. near a singularity.
    Underflow,
}

/// Adaptive integrator for an autonomous system `z′ = f(z)` in the
/// direction `sign` (±1).
pub struct Integrator<const N: usize, F> {
    f: F,
    tol: f64,
    pub t: f64,
    pub z: [f64; N],
    k1: [f64; N],
    h: f64,
    sign: f64,
    pub h_max: f64,
}

fn axpy<const N: usize>(z: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    std::array::from_fn(|i| z[i] + h * terms.iter().map(|(c, k)| c * k[i]).sum::<f64>())
}

impl<const N: usize, F> Integrator<N, F>
where
    F: FnMut(&[f64; N]) -> Result<[f64; N], FieldError>,
{
    pub fn new(mut f: F, z0: [f64; N], sign: f64, tol: f64) -> Result<Self, FieldError> {
        let k1 = f(&z0)?;
        let sc: Vec<f64> = z0.iter().map(|v| tol + tol * v.abs()).collect();
        let d0 = (z0
            .iter()
            .zip(&sc)
            .map(|(v, s)| (v / s).powi(2))
            .sum::<f64>()
            / N as f64)
            .sqrt();
        let d1 = (k1
            .iter()
            .zip(&sc)
            .map(|(v, s)| (v / s).powi(2))
            .sum::<f64>()
            / N as f64)
            .sqrt();
        let h = if d0 < 1e-5 || d1 < 1e-5 {
            1e-6
        } else {
            (0.01 * d0 / d1).clamp(1e-6, 0.1)
        };
        Ok(Integrator {
            f,
            tol,
            t: 0.0,
            z: z0,
            k1,
            h,
            sign: sign.signum(),
            h_max: f64::INFINITY,
        })
    }

    /// Take one accepted step, never longer than `limit` in absolute time.
    pub fn step(&mut self, limit: Option<f64>) -> Result<DenseStep<N>, StepFailure> {
        let mut h = self.h.min(self.h_max);
        if let Some(l) = limit {
            h = h.min(l);
        }
        let floor = 1e-14 * (1.0 + self.t.abs());
        let mut last_err: Option<FieldError> = None;
        loop {
            if h < floor {
                return Err(match last_err {
                    Some(e) => StepFailure::Stuck(e),
                    None => StepFailure::Underflow,
                });
            }
            let hs = self.sign * h;
            match self.attempt(hs) {
                Ok((z1, k7, err, k)) => {
                    if err <= 1.0 {
                        let dense = self.dense(hs, &z1, &k, &k7);
                        self.t += hs;
                        self.z = z1;
                        self.k1 = k7;
                        let fac = if err == 0.0 {
                            5.0
                        } else {
                            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
                        };
                        self.h = h * fac;
                        return Ok(dense);
                    }
                    h *= (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
                }
                Err(e) => {
                    last_err = Some(e);
                    h *= 0.5;
                }
            }
        }
    }

    #[allow(clippy::type_complexity)]
    fn attempt(&mut self, h: f64) -> Result<([f64; N], [f64; N], f64, [[f64; N]; 6]), FieldError> {
        let z = self.z;
        let k1 = self.k1;
        let k2 = (self.f)(&axpy(&z, h, &[(A21, &k1)]))?;
        let k3 = (self.f)(&axpy(&z, h, &[(A31, &k1), (A32, &k2)]))?;
        let k4 = (self.f)(&axpy(&z, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]))?;
        let k5 = (self.f)(&axpy(
            &z,
            h,
            &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)],
        ))?;
        let k6 = (self.f)(&axpy(
            &z,
            h,
            &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
        ))?;
        let z1 = axpy(
            &z,
            h,
            &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
        );
        if z1.iter().any(|v| !v.is_finite()) {
            return Ok((z1, k1, f64::INFINITY, [k1, k2, k3, k4, k5, k6]));
        }
        let k7 = (self.f)(&z1)?;
        let mut acc = 0.0;
        for i in 0..N {
            let e =
                h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = self.tol + self.tol * z[i].abs().max(z1[i].abs());
            acc += (e / sc).powi(2);
        }
        let err = (acc / N as f64).sqrt();
        Ok((z1, k7, err, [k1, k2, k3, k4, k5, k6]))
    }

    fn dense(&self, h: f64, z1: &[f64; N], k: &[[f64; N]; 6], k7: &[f64; N]) -> DenseStep<N> {
        let z0 = self.z;
        let [k1, _, k3, k4, k5, k6] = k;
        let mut r = [[0.0; N]; 5];
        for i in 0..N {
            let diff = z1[i] - z0[i];
            let bspl = h * k1[i] - diff;
            r[0][i] = z0[i];
            r[1][i] = diff;
            r[2][i] = bspl;
            r[3][i] = diff - h * k7[i] - bspl;
            r[4][i] =
                h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
        }
        DenseStep { t0: self.t, h, r }
    }
}
