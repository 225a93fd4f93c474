use serde::{Deserialize, Serialize};

use crate::par::{self, Execution};
use crate::system::PlanarField;

use super::exponents::{cycle_integral, log_return_derivative, CycleField};
use super::orbit::integrate;
use super::section::{return_map_with, ReturnOptions};
use super::{Direction, DynamicsError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stability {
    Attracting,
    Repelling,
    /// Attracting on one side, repelling on the other.
    SemiStable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rotation {
    Clockwise,
    CounterClockwise,
}

/// Characteristic integrals of a cycle, all in forward time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Exponents {
    pub div_integral: f64,
    /// `None` when the angular speed vanishes on the cycle.
    pub nu_integral: Option<f64>,
    pub log_return_derivative: Option<f64>,
}

/// Isolated periodic orbit through `(x_star, 0)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cycle {
    pub x_star: f64,
    pub period: f64,
    pub stability: Stability,
    pub rotation: Rotation,
    /// Closed polyline in forward-time order; the last point repeats the
    /// first.
    pub polyline: Vec<[f64; 2]>,
    /// `|state(T) − state(0)|` of the integrated orbit.
    pub closure_error: f64,
    /// Smallest `|A|` along the polyline.
    pub min_abs_angular: f64,
    pub exponents: Option<Exponents>,
}

impl Cycle {
    /// Largest distance from the origin along the polyline.
    pub fn max_radius(&self) -> f64 {
        self.polyline
            .iter()
            .map(|p| p[0].hypot(p[1]))
            .fold(0.0, f64::max)
    }

    pub fn min_radius(&self) -> f64 {
        self.polyline
            .iter()
            .map(|p| p[0].hypot(p[1]))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Run of grid points where the return map is the identity to tolerance,
/// such as a center.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DegenerateRun {
    pub from: f64,
    pub to: f64,
    pub direction: Direction,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CycleSearch {
    pub cycles: Vec<Cycle>,
    pub degenerate: Vec<DegenerateRun>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CycleOptions {
    pub tol: f64,
    pub exec: Execution,
    pub with_exponents: bool,
    pub limits: ReturnOptions,
    /// Points on each polyline.
    pub polyline_points: usize,
}

impl Default for CycleOptions {
    fn default() -> Self {
        CycleOptions {
            tol: 1e-10,
            exec: Execution::default(),
            with_exponents: true,
            limits: ReturnOptions::default(),
            polyline_points: 512,
        }
    }
}

/// Target `|d|` at a refined fixed point.
const FIXED_POINT_TOL: f64 = 1e-10;
/// Fixed points closer than this are the same cycle.
const DEDUPE: f64 = 1e-6;
/// Consecutive near-zero displacements that make a degenerate run.
const DEGENERATE_RUN: usize = 5;

fn zero_threshold(x: f64, tol: f64) -> f64 {
    (100.0 * tol * (1.0 + x)).max(1e-12)
}

#[derive(Debug, Clone, Copy)]
enum Candidate {
    /// Sign change of `d` between `a` and `b` in `direction`.
    Bracket {
        a: f64,
        b: f64,
        da: f64,
        db: f64,
        direction: Direction,
    },
    /// Grid point with `|d|` below the fixed-point tolerance.
    Point {
        x: f64,
        direction: Direction,
        stability: Stability,
    },
}

/// Locate limit cycles crossing `{y = 0, x > 0}` at the grid points' scale.
///
/// The displacement `d(x) = P(x) − x` is sampled in forward and backward
/// time. Sign changes are refined in the direction in which the fixed
/// point attracts. Runs of at least five near-zero displacements are
/// reported as degenerate rather than as cycles.
pub fn find_cycles(
    s: &dyn PlanarField,
    grid: &[f64],
    opts: &CycleOptions,
) -> Result<CycleSearch, DynamicsError> {
    super::check_tol(opts.tol)?;
    let mut search = CycleSearch::default();
    let mut xs: Vec<f64> = Vec::with_capacity(grid.len());
    for &x in grid {
        if x > 0.0 && x.is_finite() && s.in_domain(x, 0.0) {
            xs.push(x);
        } else {
            search.notes.push(format!(
                "grid point {x} skipped: not a positive point of the domain"
            ));
        }
    }
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let dirs = [Direction::Forward, Direction::Backward];
    let n = xs.len();
    let flat = par::map_range(opts.exec, 2 * n, |k| {
        let (dir, x) = (dirs[k / n], xs[k % n]);
        return_map_with(s, x, opts.tol, dir, &opts.limits)
            .ok()
            .map(|r| r.displacement())
    });
    let table: [&[Option<f64>]; 2] = [&flat[..n], &flat[n..]];

    let mut candidates = Vec::new();
    for (di, &dir) in dirs.iter().enumerate() {
        scan_direction(
            &xs,
            table[di],
            table[1 - di],
            dir,
            opts.tol,
            &mut candidates,
            &mut search.degenerate,
        );
    }
    if !search.degenerate.is_empty() {
        search.notes.push(format!(
            "return map is the identity to tolerance on {} run(s) of grid points; no isolated cycle there",
            search.degenerate.len()
        ));
    }

    let results = par::map(opts.exec, &candidates, |c| build_cycle(s, c, opts));
    let mut cycles: Vec<Cycle> = Vec::new();
    for r in results {
        match r {
            Ok(c) => {
                if !cycles.iter().any(|o| (o.x_star - c.x_star).abs() < DEDUPE) {
                    cycles.push(c);
                }
            }
            Err(e) => search.notes.push(format!("candidate dropped: {e}")),
        }
    }
    cycles.sort_by(|a, b| a.x_star.total_cmp(&b.x_star));
    search.cycles = cycles;
    Ok(search)
}

fn sign_of(d: f64, x: f64, tol: f64) -> i8 {
    if d.abs() <= zero_threshold(x, tol) {
        0
    } else if d > 0.0 {
        1
    } else {
        -1
    }
}

fn scan_direction(
    xs: &[f64],
    d: &[Option<f64>],
    other: &[Option<f64>],
    dir: Direction,
    tol: f64,
    out: &mut Vec<Candidate>,
    degenerate: &mut Vec<DegenerateRun>,
) {
    let n = xs.len();
    let mut i = 0;
    while i < n {
        if d[i].is_none() {
            i += 1;
            continue;
        }
        let start = i;
        while i < n && d[i].is_some() {
            i += 1;
        }
        scan_segment(xs, d, other, start, i, dir, tol, out, degenerate);
    }
}

/// Scan the defined stretch `lo..hi` of one direction.
#[allow(clippy::too_many_arguments)]
fn scan_segment(
    xs: &[f64],
    d: &[Option<f64>],
    other: &[Option<f64>],
    lo: usize,
    hi: usize,
    dir: Direction,
    tol: f64,
    out: &mut Vec<Candidate>,
    degenerate: &mut Vec<DegenerateRun>,
) {
    let val = |k: usize| d[k].unwrap();
    let sign = |k: usize| sign_of(val(k), xs[k], tol);
    let mut prev_nonzero: Option<usize> = None;
    let mut k = lo;
    while k < hi {
        if sign(k) != 0 {
            if let Some(p) = prev_nonzero {
                if p + 1 == k && sign(p) != sign(k) {
                    push_bracket(xs, d, other, p, k, dir, out);
                }
            }
            prev_nonzero = Some(k);
            k += 1;
            continue;
        }
        let run_start = k;
        while k < hi && sign(k) == 0 {
            k += 1;
        }
        let run_end = k;
        if run_end - run_start >= DEGENERATE_RUN {
            degenerate.push(DegenerateRun {
                from: xs[run_start],
                to: xs[run_end - 1],
                direction: dir,
            });
            prev_nonzero = None;
            continue;
        }
        let left = prev_nonzero.map(sign);
        let right = (run_end < hi).then(|| sign(run_end));
        match (left, right) {
            (Some(l), Some(r)) if l != r => {
                push_bracket(xs, d, other, prev_nonzero.unwrap(), run_end, dir, out)
            }
            _ => {
                let best = (run_start..run_end)
                    .min_by(|&a, &b| val(a).abs().total_cmp(&val(b).abs()))
                    .unwrap();
                if val(best).abs() <= FIXED_POINT_TOL {
                    let stability = match (left, right) {
                        (Some(l), Some(r)) if l == r => Stability::SemiStable,
                        (Some(l), _) => attracting_if(l > 0, dir),
                        (_, Some(r)) => attracting_if(r < 0, dir),
                        _ => Stability::SemiStable,
                    };
                    out.push(Candidate::Point {
                        x: xs[best],
                        direction: dir,
                        stability,
                    });
                }
            }
        }
        // A nonzero point right after the run starts a fresh comparison.
        prev_nonzero = None;
    }
}

fn attracting_if(attracts_in_dir: bool, dir: Direction) -> Stability {
    match (attracts_in_dir, dir) {
        (true, Direction::Forward) | (false, Direction::Backward) => Stability::Attracting,
        _ => Stability::Repelling,
    }
}

fn push_bracket(
    xs: &[f64],
    d: &[Option<f64>],
    other: &[Option<f64>],
    p: usize,
    k: usize,
    dir: Direction,
    out: &mut Vec<Candidate>,
) {
    let (da, db) = (d[p].unwrap(), d[k].unwrap());
    if da < db {
        // Repelling in this direction: leave it to the reverse direction
        // when that brackets the same interval.
        if let (Some(oa), Some(ob)) = (other[p], other[k]) {
            if oa > 0.0 && ob < 0.0 {
                return;
            }
        }
    }
    out.push(Candidate::Bracket {
        a: xs[p],
        b: xs[k],
        da,
        db,
        direction: dir,
    });
}

/// Illinois false position on `d`, falling back to bisection when the
/// secant stalls.
fn refine(
    s: &dyn PlanarField,
    mut a: f64,
    mut b: f64,
    mut da: f64,
    mut db: f64,
    dir: Direction,
    opts: &CycleOptions,
) -> Result<f64, DynamicsError> {
    let eval =
        |x: f64| return_map_with(s, x, opts.tol, dir, &opts.limits).map(|r| r.displacement());
    let mut side = 0i8;
    for iter in 0..200 {
        let mut x = if iter % 4 == 3 {
            0.5 * (a + b)
        } else {
            (a * db - b * da) / (db - da)
        };
        if !(x > a.min(b) && x < a.max(b)) {
            x = 0.5 * (a + b);
        }
        let dx = eval(x)?;
        if dx.abs() <= FIXED_POINT_TOL || (b - a).abs() <= 1e-14 * (1.0 + x) {
            return Ok(x);
        }
        if (dx > 0.0) == (da > 0.0) {
            a = x;
            da = dx;
            if side == -1 {
                db *= 0.5;
            }
            side = -1;
        } else {
            b = x;
            db = dx;
            if side == 1 {
                da *= 0.5;
            }
            side = 1;
        }
    }
    Ok(0.5 * (a + b))
}

fn build_cycle(
    s: &dyn PlanarField,
    c: &Candidate,
    opts: &CycleOptions,
) -> Result<Cycle, DynamicsError> {
    let (x_star, dir, stability) = match *c {
        Candidate::Bracket {
            a,
            b,
            da,
            db,
            direction,
        } => {
            let x = refine(s, a, b, da, db, direction, opts)?;
            let attracts = da > db;
            (x, direction, attracting_if(attracts, direction))
        }
        Candidate::Point {
            x,
            direction,
            stability,
        } => (x, direction, stability),
    };
    // Follow the cycle in the direction in which it attracts.
    let follow = match stability {
        Stability::Attracting => Direction::Forward,
        Stability::Repelling => Direction::Backward,
        Stability::SemiStable => dir,
    };
    let ret = return_map_with(s, x_star, opts.tol, follow, &opts.limits)?;
    let period = ret.period;
    let orbit = integrate(s, [x_star, 0.0], period, opts.tol, follow)?.into_result()?;
    let m = opts.polyline_points.max(8);
    let mut polyline: Vec<[f64; 2]> = orbit.sample(m).into_iter().map(|p| [p[1], p[2]]).collect();
    let end = orbit.last_state();
    let closure_error = (end[0] - x_star).hypot(end[1]);
    if follow == Direction::Backward {
        polyline.reverse();
    }
    let mut min_abs_angular = f64::INFINITY;
    for p in &polyline {
        min_abs_angular = min_abs_angular.min(s.angular(p[0], p[1])?.abs());
    }
    let [_, q] = s.field(x_star, 0.0)?;
    let rotation = if q < 0.0 {
        Rotation::Clockwise
    } else {
        Rotation::CounterClockwise
    };
    let exponents = if opts.with_exponents {
        let div =
            cycle_integral(s, x_star, period, follow, CycleField::Divergence, opts.tol)?.value;
        let nu = cycle_integral(s, x_star, period, follow, CycleField::Nu, opts.tol)
            .ok()
            .map(|c| c.value);
        let lr = log_return_derivative(s, x_star, period, follow, opts.tol).ok();
        Some(Exponents {
            div_integral: div,
            nu_integral: nu,
            log_return_derivative: lr,
        })
    } else {
        None
    };
    Ok(Cycle {
        x_star,
        period,
        stability,
        rotation,
        polyline,
        closure_error,
        min_abs_angular,
        exponents,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::{Domain, GeneralSystem, StructuredSystem};

    fn grid(a: f64, b: f64, step: f64) -> Vec<f64> {
        let n = ((b - a) / step).round() as usize;
        (0..=n).map(|i| a + step * i as f64).collect()
    }

    #[test]
    fn two_circles() {
        let s = GeneralSystem::parse(
            "y*((x^2+y^2) - (x^2+y^2)^2) + x*(1 - 3*(x^2+y^2) + (x^2+y^2)^2)",
            "-x*((x^2+y^2) - (x^2+y^2)^2) + y*(1 - 3*(x^2+y^2) + (x^2+y^2)^2)",
        )
        .unwrap();
        let out = find_cycles(&s, &grid(0.1, 3.0, 0.1), &CycleOptions::default()).unwrap();
        assert_eq!(out.cycles.len(), 2, "{:?}", out.notes);
        let (c0, c1) = (&out.cycles[0], &out.cycles[1]);
        assert!((c0.x_star - ((3.0 - 5f64.sqrt()) / 2.0).sqrt()).abs() < 1e-6);
        assert!((c1.x_star - ((3.0 + 5f64.sqrt()) / 2.0).sqrt()).abs() < 1e-6);
        assert_eq!(c0.stability, Stability::Attracting);
        assert_eq!(c1.stability, Stability::Repelling);
        assert_ne!(c0.rotation, c1.rotation);
        let e0 = c0.exponents.unwrap();
        let e1 = c1.exponents.unwrap();
        assert!((e0.div_integral + 45.47).abs() < 0.05, "{e0:?}");
        assert!((e1.div_integral - 17.37).abs() < 0.05, "{e1:?}");
        assert!(
            (e0.log_return_derivative.unwrap() - e0.div_integral).abs()
                < 0.01 * e0.div_integral.abs()
        );
        assert!((e1.nu_integral.unwrap() - e1.div_integral).abs() < 0.01 * e1.div_integral.abs());
        assert!(c0.closure_error < 1e-8);
    }

    #[test]
    fn trig_circles_alternate() {
        let s = GeneralSystem::parse(
            "y*cos(x^2+y^2) - x*sin(x^2+y^2)",
            "-x*cos(x^2+y^2) - y*sin(x^2+y^2)",
        )
        .unwrap();
        let out = find_cycles(&s, &grid(0.5, 4.0, 0.05), &CycleOptions::default()).unwrap();
        // √(5π) ≈ 3.963 is inside the grid too.
        assert_eq!(out.cycles.len(), 5, "{:?}", out.notes);
        let pi = std::f64::consts::PI;
        for (k, c) in out.cycles.iter().enumerate() {
            let kk = (k + 1) as f64;
            assert!((c.x_star - (kk * pi).sqrt()).abs() < 1e-6, "{}", c.x_star);
            let e = c.exponents.unwrap();
            let want = 2.0 * pi * 2.0 * kk * pi * if k % 2 == 0 { 1.0 } else { -1.0 };
            assert!(
                (e.div_integral - want).abs() < 1e-3 * want.abs(),
                "{e:?} vs {want}"
            );
            assert!(
                (e.log_return_derivative.unwrap() - want).abs() < 1e-2 * want.abs(),
                "{e:?}"
            );
        }
        for w in out.cycles.windows(2) {
            assert_ne!(w[0].stability, w[1].stability);
            assert_ne!(w[0].rotation, w[1].rotation);
        }
        assert_eq!(out.cycles[0].stability, Stability::Repelling);
    }

    #[test]
    fn van_der_pol_single_cycle() {
        let s = StructuredSystem::parse("x", &[(1, "x^2 - 1")], Domain::whole()).unwrap();
        let out = find_cycles(&s, &grid(0.1, 3.0, 0.1), &CycleOptions::default()).unwrap();
        assert_eq!(out.cycles.len(), 1, "{:?}", out.notes);
        let c = &out.cycles[0];
        assert!((c.x_star - 2.00861986).abs() < 1e-6, "{}", c.x_star);
        assert_eq!(c.stability, Stability::Attracting);
        assert_eq!(c.rotation, Rotation::Clockwise);
        assert!(c.exponents.unwrap().div_integral < 0.0);
    }

    #[test]
    fn linear_center_is_degenerate() {
        let s = StructuredSystem::parse("x", &[], Domain::whole()).unwrap();
        let out = find_cycles(&s, &grid(0.1, 3.0, 0.1), &CycleOptions::default()).unwrap();
        assert!(out.cycles.is_empty());
        assert!(!out.degenerate.is_empty());
        assert!(!out.notes.is_empty());
    }

    #[test]
    fn sequential_matches_parallel() {
        let s = StructuredSystem::parse("x", &[(1, "x^2 - 1")], Domain::whole()).unwrap();
        let g = grid(0.5, 3.0, 0.5);
        let opts = CycleOptions {
            with_exponents: false,
            ..Default::default()
        };
        let a = find_cycles(&s, &g, &opts).unwrap();
        let b = find_cycles(
            &s,
            &g,
            &CycleOptions {
                exec: Execution::Sequential,
                ..opts
            },
        )
        .unwrap();
        assert_eq!(a, b);
    }
}
