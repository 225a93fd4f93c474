//! Acceptance checks. Each criterion prints one PASS/FAIL line with its
//! wall time and limit; the binary exits nonzero if any fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;
use std::time::{Duration, Instant};

use cycleguard::conditions::{
    boundedness_construction, check_l2l3, check_tplus, full_report, transformed_piece, Claim,
    TheoremStatus,
};
use cycleguard::dynamics::{
    boundedness_probe, find_cycles, Cycle, CycleOptions, Rotation, Stability,
};
use cycleguard::gallery;
use cycleguard::par::Execution;
use cycleguard::poly::{sign_on_interval, Polynomial, RealInterval, RequiredSign};
use cycleguard::scan::{zero_curve_components, ScalarField, Window};
use cycleguard::system::{PlanarField, PlanarSystem, StructuredSystem};
use cycleguard::transform::ContiFilippov;
use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn rel_close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * b.abs()
}

fn cycles(name: &str) -> Result<(PlanarSystem, Vec<Cycle>), String> {
    let e = gallery::get(name).ok_or("missing gallery entry")?;
    let s = e.load();
    let found =
        find_cycles(&s, &e.grid_points(), &CycleOptions::default()).map_err(|e| e.to_string())?;
    Ok((s, found.cycles))
}

fn div(c: &Cycle) -> f64 {
    c.exponents.as_ref().map_or(f64::NAN, |e| e.div_integral)
}

fn two_cycles() -> Outcome {
    let (_, c) = cycles("two-cycles")?;
    ensure(c.len() == 2, format!("found {} cycles", c.len()))?;
    let r = [
        ((3.0 - 5f64.sqrt()) / 2.0).sqrt(),
        ((3.0 + 5f64.sqrt()) / 2.0).sqrt(),
    ];
    for (cy, r) in c.iter().zip(r) {
        ensure(
            (cy.x_star - r).abs() <= 1e-6,
            format!("x* = {} vs {r}", cy.x_star),
        )?;
    }
    ensure(
        rel_close(div(&c[0]), -45.47, 1e-2),
        format!("inner exponent {}", div(&c[0])),
    )?;
    ensure(
        rel_close(div(&c[1]), 17.37, 1e-2),
        format!("outer exponent {}", div(&c[1])),
    )?;
    Ok(format!(
        "x* = {:.9}, {:.9}; exponents {:.4}, {:.4}",
        c[0].x_star,
        c[1].x_star,
        div(&c[0]),
        div(&c[1])
    ))
}

fn trig_circles() -> Outcome {
    let (_, c) = cycles("trig")?;
    let pi = std::f64::consts::PI;
    ensure(c.len() >= 4, format!("found {} cycles", c.len()))?;
    for (k, cy) in (1..=4).zip(&c) {
        let r = (k as f64 * pi).sqrt();
        ensure(
            (cy.x_star - r).abs() <= 1e-6,
            format!("k = {k}: x* = {} vs {r}", cy.x_star),
        )?;
    }
    for w in c[..4].windows(2) {
        ensure(
            w[0].stability != w[1].stability,
            "stability does not alternate",
        )?;
        ensure(
            w[0].rotation != w[1].rotation,
            "rotation does not alternate",
        )?;
    }
    ensure(
        c[0].rotation == Rotation::CounterClockwise,
        "k = 1 is not counter-clockwise",
    )?;
    let want = -8.0 * pi * pi;
    ensure(
        rel_close(div(&c[1]), want, 1e-2),
        format!("k = 2 exponent {} vs {want}", div(&c[1])),
    )?;
    Ok(format!(
        "k = 1..4 on their circles; k = 2 exponent {:.6}",
        div(&c[1])
    ))
}

fn fig2() -> Outcome {
    let e = gallery::get("fig2").unwrap();
    let sys = e.load();
    let s = sys.as_structured().unwrap();
    let report = full_report(s);
    let t = report
        .theorem("uniqueness_trinomial")
        .ok_or("no trinomial uniqueness entry")?;
    ensure(
        t.status == TheoremStatus::Applicable,
        format!("trinomial uniqueness is {:?}", t.status),
    )?;
    let dec = s.trinomials().map_err(|e| e.to_string())?;
    let checks = check_tplus(&dec, s.domain());
    ensure(
        checks.len() == 1 && checks[0].verdict.is_proved(),
        "trinomial condition not proved",
    )?;
    ensure(
        checks[0].discriminant.is_proved(),
        "discriminant not certified",
    )?;
    let (k, t, eta, d) = transformed_piece(&dec.pieces[0]).ok_or("piece is not polynomial")?;
    let q = |n: i64, m: i64| BigRational::new(BigInt::from(n), BigInt::from(m));
    let z = || q(0, 1);
    ensure(
        k == Polynomial::from_coeffs(vec![q(2, 1), z(), q(4, 1)]),
        format!("kappa~ = {k}"),
    )?;
    ensure(
        t == Polynomial::from_coeffs(vec![z(), z(), q(3, 10)]),
        format!("tau~ = {t}"),
    )?;
    ensure(
        eta == Polynomial::from_coeffs(vec![z(), z(), q(2, 1)]),
        format!("eta~ = {eta}"),
    )?;
    ensure(
        d == Polynomial::from_coeffs(vec![z(), z(), q(-16, 1), z(), q(-3191, 100)]),
        format!("discriminant = {d}"),
    )?;

    let found =
        find_cycles(&sys, &e.grid_points(), &CycleOptions::default()).map_err(|e| e.to_string())?;
    ensure(
        found.cycles.len() == 1,
        format!("found {} cycles", found.cycles.len()),
    )?;
    let ex = found.cycles[0].exponents.ok_or("no exponents")?;
    ensure(ex.div_integral < 0.0, "exponent is not negative")?;
    let nu = ex.nu_integral.ok_or("nu integral unavailable")?;
    let lr = ex
        .log_return_derivative
        .ok_or("log return derivative unavailable")?;
    let agree = |a: f64, b: f64| (a - b).abs() <= 1e-3f64.max(0.01 * a.abs().max(b.abs()));
    ensure(
        agree(ex.div_integral, nu) && agree(ex.div_integral, lr) && agree(nu, lr),
        format!("{} / {nu} / {lr}", ex.div_integral),
    )?;
    Ok(format!(
        "discriminant {d} <= 0 proved; exponents {:.8} / {nu:.8} / {lr:.8}",
        ex.div_integral
    ))
}

fn quartic() -> Outcome {
    for k in 1..=3i64 {
        let p = Polynomial::from_i64s(&[2 * k, 0, -(2 + 2 * k), 0, 4 + 2 * k]);
        let v = sign_on_interval(&p, &RealInterval::whole(), RequiredSign::Positive);
        ensure(v.is_proved(), format!("k = {k}: {v:?}"))?;
        ensure(
            4 - 24 * k - 12 * k * k < 0,
            format!("k = {k}: discriminant is not negative"),
        )?;
        let f = Polynomial::from_i64s(&[1, 0, -1, 0, 1]);
        ensure(
            f.euler_combination(2 * k) == p,
            format!("k = {k}: Euler combination differs"),
        )?;
    }
    let s = gallery::get("quartic-f3").unwrap().load();
    let l = check_l2l3(s.as_structured().unwrap());
    let w = l.l3.witness().ok_or("monotonicity not refuted")?;
    let d = Polynomial::from_i64s(&[0, -2, 0, 4]).eval_f64(w.x);
    ensure(
        if w.x > 0.0 { d < 0.0 } else { d > 0.0 },
        format!("witness x = {} does not violate monotonicity", w.x),
    )?;
    Ok(format!(
        "positivity proved for k = 1, 2, 3; monotonicity refuted at x = {}",
        w.x
    ))
}

fn gauss() -> Outcome {
    let sys = gallery::get("gauss").unwrap().load();
    let w = Window::new(-6.0, 6.0, -4.0, 4.0).map_err(|e| e.to_string())?;
    let mut counts = Vec::new();
    for (nx, ny) in [(120, 80), (240, 160)] {
        let z = zero_curve_components(
            &sys,
            ScalarField::EnergyRate,
            w,
            nx,
            ny,
            0.0,
            Execution::Parallel,
        )
        .map_err(|e| e.to_string())?;
        ensure(
            z.unbounded_count() == 4,
            format!("{nx}x{ny}: {} unbounded components", z.unbounded_count()),
        )?;
        counts.push(z.count);
    }
    let s = sys.as_structured().unwrap();
    let fail = match boundedness_construction(s, None) {
        Ok(_) => return Err("boundedness construction succeeded".into()),
        Err(f) => f,
    };
    let wit = fail.witness.ok_or("no witness")?;
    let phi = s.phi(wit.x, 0.0).map_err(|e| e.to_string())?;
    ensure(
        wit.y == 0.0 && phi < 0.0,
        format!("witness ({}, {}) has phi(x, 0) = {phi}", wit.x, wit.y),
    )?;
    Ok(format!(
        "4 unbounded components at both resolutions ({counts:?} total); phi({}, 0) = {phi:.3e}",
        wit.x
    ))
}

fn hausdorff(a: &[[f64; 2]], b: &[[f64; 2]]) -> f64 {
    let seg = |p: [f64; 2], a: [f64; 2], b: [f64; 2]| {
        let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
        let l2 = dx * dx + dy * dy;
        let t = if l2 == 0.0 {
            0.0
        } else {
            (((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / l2).clamp(0.0, 1.0)
        };
        (p[0] - a[0] - t * dx).hypot(p[1] - a[1] - t * dy)
    };
    let one = |p: &[[f64; 2]], q: &[[f64; 2]]| {
        p.iter()
            .map(|u| {
                q.windows(2)
                    .map(|w| seg(*u, w[0], w[1]))
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
    };
    one(a, b).max(one(b, a))
}

fn conti_filippov() -> Outcome {
    let e = gallery::get("duffing-vdp").unwrap();
    let sys = e.load();
    let s = sys.as_structured().unwrap();
    let cf = Arc::new(ContiFilippov::for_system(s).map_err(|e| e.to_string())?);
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let x: f64 = rng.random_range(-6.0..6.0);
        let back = cf
            .beta(cf.alpha(x).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
        worst = worst.max((back - x).abs());
    }
    ensure(worst <= 1e-9, format!("round trip error {worst}"))?;

    let root = cf.gprime0().sqrt();
    for u in [1e-4, -1e-5, 1e-6] {
        let x = cf.beta(u).map_err(|e| e.to_string())?;
        let lim = cf.g().eval(x).map_err(|e| e.to_string())? / u;
        ensure(
            (lim - root).abs() <= 10.0 * u.abs(),
            format!("g(beta({u}))/{u} = {lim}"),
        )?;
    }

    let p = cf.pushforward(s).map_err(|e| e.to_string())?;
    let mut psi_err = 0.0f64;
    for _ in 0..200 {
        let (x, y): (f64, f64) = (rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
        let direct = cf.psi(s, x, y).map_err(|e| e.to_string())?;
        let u = cf.alpha(x).map_err(|e| e.to_string())?;
        let h = 1e-5 * (1.0 + u.abs());
        let phi_u = (p.phi(u + h, y).map_err(|e| e.to_string())?
            - p.phi(u - h, y).map_err(|e| e.to_string())?)
            / (2.0 * h);
        let (_, _, phi_v) = p.phi_partials(u, y).map_err(|e| e.to_string())?;
        psi_err = psi_err.max((direct - (u * phi_u + y * phi_v)).abs() / (1.0 + direct.abs()));
    }
    ensure(
        psi_err <= 1e-6,
        format!("Psi dual evaluation error {psi_err}"),
    )?;

    let opts = CycleOptions {
        polyline_points: 4096,
        ..CycleOptions::default()
    };
    let original = find_cycles(s, &e.grid_points(), &opts)
        .map_err(|e| e.to_string())?
        .cycles;
    let u_grid: Vec<f64> = e
        .grid_points()
        .iter()
        .map(|&x| cf.alpha(x).unwrap())
        .collect();
    let pushed = find_cycles(&p, &u_grid, &opts)
        .map_err(|e| e.to_string())?
        .cycles;
    ensure(
        original.len() == 1 && pushed.len() == 1,
        format!("{} vs {} cycles", original.len(), pushed.len()),
    )?;
    let back: Vec<[f64; 2]> = pushed[0]
        .polyline
        .iter()
        .map(|&[u, v]| [cf.beta(u).unwrap(), v])
        .collect();
    let h = hausdorff(&original[0].polyline, &back);
    ensure(h <= 1e-4, format!("Hausdorff distance {h}"))?;
    Ok(format!(
        "round trip {worst:.2e}; Psi {psi_err:.2e}; Hausdorff {h:.2e}"
    ))
}

fn field_identities() -> Outcome {
    let systems: Vec<(String, StructuredSystem)> = gallery::all()
        .into_iter()
        .filter_map(|e| match e.load() {
            PlanarSystem::Structured(s) if s.is_linear_g() => Some((e.name, s)),
            _ => None,
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let h = 1e-4;
    let mut n = 0;
    for (name, s) in &systems {
        for _ in 0..1000 {
            let (x, y): (f64, f64) = (rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
            let a = s.angular(x, y).map_err(|e| e.to_string())?;
            let star = s.starshape(x, y).map_err(|e| e.to_string())?;
            let ar = |t: f64| s.angular(x * t, y * t).unwrap();
            let lhs = (ar(1.0 + h) - ar(1.0 - h)) / (2.0 * h);
            let rhs = 2.0 * a + x * y * star;
            ensure(
                (lhs - rhs).abs() <= 1e-5 * (1.0 + lhs.abs().max(rhs.abs())),
                format!("{name}: radial identity at ({x}, {y})"),
            )?;
            if a.abs() > 1e-6 {
                let nu = s.nu(x, y).map_err(|e| e.to_string())?;
                let want = -y * y * star;
                let scale = 1.0 + want.abs() + a.abs() * (1.0 + x * x + y * y);
                ensure(
                    (nu * a - want).abs() <= 1e-10 * scale,
                    format!("{name}: nu identity at ({x}, {y})"),
                )?;
            }
            n += 1;
        }
    }
    Ok(format!("{n} points over {} systems", systems.len()))
}

fn existence_bundle() -> Outcome {
    let e = gallery::get("quartic-demo").unwrap();
    let sys = e.load();
    let s = sys.as_structured().unwrap();
    let report = full_report(s);
    ensure(
        report.claim == Claim::ExactlyOne && report.certified,
        format!("claim {:?}", report.claim),
    )?;
    ensure(
        report.basis.as_deref() == Some("existence_odd"),
        format!("basis {:?}", report.basis),
    )?;
    let m = report
        .boundedness
        .as_ref()
        .ok_or("no boundedness construction")?
        .m;
    let found =
        find_cycles(&sys, &e.grid_points(), &CycleOptions::default()).map_err(|e| e.to_string())?;
    ensure(
        found.cycles.len() == 1,
        format!("found {} cycles", found.cycles.len()),
    )?;
    ensure(
        found.cycles[0].stability == Stability::Attracting,
        "cycle is not attracting",
    )?;
    let mut starts: Vec<[f64; 2]> = (0..16)
        .map(|k| {
            let th = std::f64::consts::TAU * k as f64 / 16.0;
            [1.5 * m * th.cos(), 1.5 * m * th.sin()]
        })
        .collect();
    starts.extend([[0.1, 0.0], [0.0, 0.5], [5.0, 5.0], [-4.0, 2.0]]);
    let out = boundedness_probe(&sys, &starts, m, 200.0, Execution::Parallel);
    let bad: Vec<_> = starts
        .iter()
        .zip(&out)
        .filter(|(_, o)| !o.enters_and_stays())
        .collect();
    ensure(
        bad.is_empty(),
        format!("{} starts fail: {:?}", bad.len(), bad.first()),
    )?;
    Ok(format!(
        "exactly one cycle at x* = {:.9}; M = {m:.6}; {} starts enter D_M",
        found.cycles[0].x_star,
        starts.len()
    ))
}

type Criterion = (&'static str, u64, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 8] = [
        ("two-cycle circles", 30, two_cycles),
        ("trig circles k = 1..4", 60, trig_circles),
        ("single cycle with certified trinomial", 30, fig2),
        ("quartic Euler family", 1, quartic),
        ("Gauss energy-rate branches", 10, gauss),
        ("Conti-Filippov suite", 60, conti_filippov),
        ("field identities", 5, field_identities),
        ("existence bundle", 30, existence_bundle),
    ];
    let mut failed = 0;
    for (i, (name, limit, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome =
            catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let outcome = outcome.and_then(|d| {
            if elapsed <= Duration::from_secs(*limit) {
                Ok(d)
            } else {
                Err(format!(
                    "took {:.2} s, limit {limit} s",
                    elapsed.as_secs_f64()
                ))
            }
        });
        let (tag, detail) = match &outcome {
            Ok(d) => ("PASS", d.as_str()),
            Err(d) => {
                failed += 1;
                ("FAIL", d.as_str())
            }
        };
        println!(
            "{tag} {} {name} [{:.3} s / {limit} s]: {detail}",
            i + 1,
            elapsed.as_secs_f64()
        );
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
