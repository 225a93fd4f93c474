//! Deterministic sample sets used by the sampled checks.

/// Radical inverse of `i` in the given base (Halton coordinate).
pub fn halton(mut i: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    let b = base as f64;
    while i > 0 {
        f /= b;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

/// `n` interior points of `(a, b)`; infinite ends are reached through an
/// arctangent map, so points spread out to `|x|` of order `n`.
pub fn line_points(a: f64, b: f64, n: usize) -> Vec<f64> {
    if a.is_finite() && b.is_finite() {
        let h = (b - a) / n as f64;
        return (0..n).map(|i| a + (i as f64 + 0.5) * h).collect();
    }
    let ta = if a.is_finite() {
        a.atan()
    } else {
        -std::f64::consts::FRAC_PI_2
    };
    let tb = if b.is_finite() {
        b.atan()
    } else {
        std::f64::consts::FRAC_PI_2
    };
    let h = (tb - ta) / n as f64;
    (0..n).map(|i| (ta + (i as f64 + 0.5) * h).tan()).collect()
}

/// Clip a possibly infinite interval to a finite window of half-width `w`.
pub fn finite_window(a: f64, b: f64, w: f64) -> (f64, f64) {
    (a.max(-w), b.min(w))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn halton_values() {
        assert_eq!(halton(1, 2), 0.5);
        assert_eq!(halton(3, 2), 0.75);
        assert!((halton(2, 3) - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn line_points_stay_inside() {
        let p = line_points(f64::NEG_INFINITY, 2.0, 1000);
        assert!(p.iter().all(|&x| x < 2.0 && x.is_finite()));
        assert!(p[0] < -100.0);
        let p = line_points(-1.0, 1.0, 4);
        assert_eq!(p, vec![-0.75, -0.25, 0.25, 0.75]);
    }
}
