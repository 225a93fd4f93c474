use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::{rat, Polynomial};

/// Location of one real root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RootLocation {
    /// The root is exactly this rational.
    Exact(BigRational),
    /// Exactly one root lies in the open interval; the polynomial is
    /// nonzero, with opposite signs, at both endpoints.
    Isolated(BigRational, BigRational),
}

impl RootLocation {
    pub fn lo(&self) -> &BigRational {
        match self {
            RootLocation::Exact(r) => r,
            RootLocation::Isolated(l, _) => l,
        }
    }

    pub fn hi(&self) -> &BigRational {
        match self {
            RootLocation::Exact(r) => r,
            RootLocation::Isolated(_, h) => h,
        }
    }

    pub fn midpoint(&self) -> BigRational {
        (self.lo() + self.hi()) / rat(2)
    }
}

/// Standard Sturm chain p, p′, −rem(p, p′), …
pub fn sturm_chain(p: &Polynomial) -> Vec<Polynomial> {
    let mut chain = vec![p.clone()];
    if p.is_zero() {
        return chain;
    }
    let mut next = p.derivative();
    while !next.is_zero() {
        let r = -chain.last().unwrap().div_rem(&next).1;
        chain.push(next);
        next = r;
    }
    chain
}

fn sign(q: &BigRational) -> i8 {
    if q.is_positive() {
        1
    } else if q.is_negative() {
        -1
    } else {
        0
    }
}

fn variations(signs: impl Iterator<Item = i8>) -> usize {
    let mut last = 0i8;
    let mut count = 0;
    for s in signs {
        if s == 0 {
            continue;
        }
        if last != 0 && s != last {
            count += 1;
        }
        last = s;
    }
    count
}

fn variations_at(chain: &[Polynomial], x: &BigRational) -> usize {
    variations(chain.iter().map(|p| sign(&p.eval(x))))
}

fn variations_at_infinity(chain: &[Polynomial], positive: bool) -> usize {
    variations(chain.iter().map(|p| {
        let s = p.leading().map(sign).unwrap_or(0);
        let odd = p.degree().unwrap_or(0) % 2 == 1;
        if !positive && odd {
            -s
        } else {
            s
        }
    }))
}

/// Number of distinct real roots in `(a, b]`; `None` stands for an infinite
/// endpoint.
pub fn count_roots_in(p: &Polynomial, a: Option<&BigRational>, b: Option<&BigRational>) -> usize {
    assert!(!p.is_zero(), "root count of the zero polynomial");
    let chain = sturm_chain(p);
    let va = match a {
        Some(a) => variations_at(&chain, a),
        None => variations_at_infinity(&chain, false),
    };
    let vb = match b {
        Some(b) => variations_at(&chain, b),
        None => variations_at_infinity(&chain, true),
    };
    va.saturating_sub(vb)
}

/// Strict bound on the absolute value of every root: 1 + max |c_i / c_n|.
pub(crate) fn root_radius(p: &Polynomial) -> BigRational {
    let lead = p.leading().expect("nonzero polynomial").abs();
    let n = p.coeffs().len() - 1;
    let mut m = BigRational::zero();
    for c in &p.coeffs()[..n] {
        let r = c.abs() / &lead;
        if r > m {
            m = r;
        }
    }
    m + BigRational::one()
}

/// Isolate every distinct real root of a nonzero polynomial, in increasing
/// order. Isolating intervals may share endpoints but never contain a root
/// at an endpoint.
pub fn isolate_real_roots(p: &Polynomial) -> Vec<RootLocation> {
    assert!(!p.is_zero(), "roots of the zero polynomial");
    let q = p.squarefree();
    if q.is_constant() {
        return Vec::new();
    }
    let chain = sturm_chain(&q);
    let b = root_radius(&q);
    let lo = -b.clone();
    let vlo = variations_at(&chain, &lo);
    let vhi = variations_at(&chain, &b);
    let mut out = Vec::new();
    isolate(&q, &chain, lo, b, vlo, vhi, &mut out);
    out
}

fn isolate(
    q: &Polynomial,
    chain: &[Polynomial],
    lo: BigRational,
    hi: BigRational,
    vlo: usize,
    vhi: usize,
    out: &mut Vec<RootLocation>,
) {
    let count = vlo.saturating_sub(vhi);
    if count == 0 {
        return;
    }
    if count == 1 {
        out.push(RootLocation::Isolated(lo, hi));
        return;
    }
    // Split near the middle, nudging off any root so endpoints stay nonzero.
    let width = &hi - &lo;
    let mut frac = BigRational::new(1.into(), 2.into());
    let mut nudge = BigRational::new(1.into(), 8.into());
    let mut mid = &lo + &width * &frac;
    while q.eval(&mid).is_zero() {
        frac = BigRational::new(1.into(), 2.into()) + &nudge;
        nudge /= rat(2);
        mid = &lo + &width * &frac;
    }
    let vmid = variations_at(chain, &mid);
    isolate(q, chain, lo, mid.clone(), vlo, vmid, out);
    isolate(q, chain, mid, hi, vmid, vhi, out);
}

/// Bisect an isolating interval of the squarefree `q` until it no longer
/// contains `point` (which must not itself be a root).
pub(crate) fn refine_away(q: &Polynomial, loc: RootLocation, point: &BigRational) -> RootLocation {
    let mut loc = loc;
    loop {
        match &loc {
            RootLocation::Exact(_) => return loc,
            RootLocation::Isolated(l, h) => {
                if point < l || point > h {
                    return loc;
                }
                loc = bisect_once(q, l, h);
            }
        }
    }
}

/// Shrink an isolating interval until its width is below `width`.
pub(crate) fn refine_to_width(
    q: &Polynomial,
    loc: RootLocation,
    width: &BigRational,
) -> RootLocation {
    let mut loc = loc;
    loop {
        match &loc {
            RootLocation::Exact(_) => return loc,
            RootLocation::Isolated(l, h) => {
                if &(h - l) < width {
                    return loc;
                }
                loc = bisect_once(q, l, h);
            }
        }
    }
}

fn bisect_once(q: &Polynomial, l: &BigRational, h: &BigRational) -> RootLocation {
    let m = (l + h) / rat(2);
    let qm = q.eval(&m);
    if qm.is_zero() {
        return RootLocation::Exact(m);
    }
    if sign(&q.eval(l)) != sign(&qm) {
        RootLocation::Isolated(l.clone(), m)
    } else {
        RootLocation::Isolated(m, h.clone())
    }
}
