use serde::{Deserialize, Serialize};

use crate::par::{self, Execution};
use crate::system::PlanarSystem;

use super::{sign_with, ScalarField, ScanError, Window};

/// One connected piece of a zero curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroComponent {
    /// Number of grid cells the curve passes through.
    pub cells: usize,
    pub touches_boundary: bool,
    /// Touches the boundary of both the window and the doubled window.
    pub unbounded: bool,
    /// `[x_min, x_max, y_min, y_max]` of the crossed cells.
    pub bbox: [f64; 4],
    /// Marching-squares segments, for plotting.
    pub segments: Vec<[[f64; 2]; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroComponents {
    pub field: ScalarField,
    pub window: Window,
    pub nx: usize,
    pub ny: usize,
    pub count: usize,
    pub unbounded_flags: Vec<bool>,
    pub components: Vec<ZeroComponent>,
}

impl ZeroComponents {
    pub fn unbounded_count(&self) -> usize {
        self.unbounded_flags.iter().filter(|&&u| u).count()
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut i: usize) -> usize {
        while self.parent[i] != i {
            self.parent[i] = self.parent[self.parent[i]];
            i = self.parent[i];
        }
        i
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Zero-set cells of one grid, grouped into connected components.
struct Traced {
    window: Window,
    nx: usize,
    ny: usize,
    values: Vec<f64>,
    signs: Vec<i8>,
    /// Component label per cell (`usize::MAX` when no crossing).
    label: Vec<usize>,
    n_labels: usize,
}

impl Traced {
    fn node(&self, i: usize, j: usize) -> [f64; 2] {
        let dx = (self.window.x.1 - self.window.x.0) / self.nx as f64;
        let dy = (self.window.y.1 - self.window.y.0) / self.ny as f64;
        [
            self.window.x.0 + i as f64 * dx,
            self.window.y.0 + j as f64 * dy,
        ]
    }

    fn idx(&self, i: usize, j: usize) -> usize {
        j * (self.nx + 1) + i
    }

    fn sign(&self, i: usize, j: usize) -> i8 {
        self.signs[self.idx(i, j)]
    }

    fn edge_crosses(&self, a: (usize, usize), b: (usize, usize)) -> bool {
        let (sa, sb) = (self.sign(a.0, a.1), self.sign(b.0, b.1));
        sa == 0 || sb == 0 || sa != sb
    }

    /// Corners of cell `(i, j)` counter-clockwise from the lower left.
    fn corners(i: usize, j: usize) -> [(usize, usize); 4] {
        [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)]
    }

    fn cell_crosses(&self, i: usize, j: usize) -> bool {
        let c = Self::corners(i, j);
        (0..4).any(|k| self.edge_crosses(c[k], c[(k + 1) % 4]))
    }

    fn component_at(&self, p: [f64; 2]) -> Option<usize> {
        let dx = (self.window.x.1 - self.window.x.0) / self.nx as f64;
        let dy = (self.window.y.1 - self.window.y.0) / self.ny as f64;
        let ci = ((p[0] - self.window.x.0) / dx).floor() as isize;
        let cj = ((p[1] - self.window.y.0) / dy).floor() as isize;
        let mut best: Option<(f64, usize)> = None;
        for dj in -1..=1 {
            for di in -1..=1 {
                let (i, j) = (ci + di, cj + dj);
                if i < 0 || j < 0 || i >= self.nx as isize || j >= self.ny as isize {
                    continue;
                }
                let l = self.label[j as usize * self.nx + i as usize];
                if l == usize::MAX {
                    continue;
                }
                let c = self.node(i as usize, j as usize);
                let d = (c[0] + 0.5 * dx - p[0]).hypot(c[1] + 0.5 * dy - p[1]);
                if best.is_none_or(|(bd, _)| d < bd) {
                    best = Some((d, l));
                }
            }
        }
        best.map(|(_, l)| l)
    }

    /// Crossing points on the edges of cell `(i, j)` joined into segments.
    fn segments(&self, i: usize, j: usize) -> Vec<[[f64; 2]; 2]> {
        let c = Self::corners(i, j);
        let mut pts: Vec<[f64; 2]> = Vec::new();
        for k in 0..4 {
            let (a, b) = (c[k], c[(k + 1) % 4]);
            let (va, vb) = (
                self.values[self.idx(a.0, a.1)],
                self.values[self.idx(b.0, b.1)],
            );
            let (sa, sb) = (self.sign(a.0, a.1), self.sign(b.0, b.1));
            let (pa, pb) = (self.node(a.0, a.1), self.node(b.0, b.1));
            let p = if sa == 0 {
                Some(pa)
            } else if sb != 0 && sa != sb {
                let t = va / (va - vb);
                Some([pa[0] + t * (pb[0] - pa[0]), pa[1] + t * (pb[1] - pa[1])])
            } else {
                None
            };
            if let Some(p) = p {
                if !pts.contains(&p) {
                    pts.push(p);
                }
            }
        }
        match pts.len() {
            0 | 1 => Vec::new(),
            2 => vec![[pts[0], pts[1]]],
            _ => pts.windows(2).step_by(2).map(|w| [w[0], w[1]]).collect(),
        }
    }
}

fn trace(
    s: &PlanarSystem,
    field: ScalarField,
    window: Window,
    nx: usize,
    ny: usize,
    atol: f64,
    exec: Execution,
) -> Result<Traced, ScanError> {
    window.check_domain(s)?;
    let dx = (window.x.1 - window.x.0) / nx as f64;
    let dy = (window.y.1 - window.y.0) / ny as f64;
    let rows = par::map_range(exec, ny + 1, |j| {
        (0..=nx)
            .map(|i| field.eval(s, window.x.0 + i as f64 * dx, window.y.0 + j as f64 * dy))
            .collect::<Result<Vec<f64>, ScanError>>()
    });
    let mut values = Vec::with_capacity((nx + 1) * (ny + 1));
    for row in rows {
        values.extend(row?);
    }
    let signs = values.iter().map(|&v| sign_with(v, atol)).collect();
    let mut t = Traced {
        window,
        nx,
        ny,
        values,
        signs,
        label: vec![usize::MAX; nx * ny],
        n_labels: 0,
    };
    let mut uf = UnionFind::new(nx * ny);
    let crossing: Vec<bool> = (0..nx * ny)
        .map(|k| t.cell_crosses(k % nx, k / nx))
        .collect();
    for j in 0..ny {
        for i in 0..nx {
            if !crossing[j * nx + i] {
                continue;
            }
            if i + 1 < nx && crossing[j * nx + i + 1] && t.edge_crosses((i + 1, j), (i + 1, j + 1))
            {
                uf.union(j * nx + i, j * nx + i + 1);
            }
            if j + 1 < ny
                && crossing[(j + 1) * nx + i]
                && t.edge_crosses((i, j + 1), (i + 1, j + 1))
            {
                uf.union(j * nx + i, (j + 1) * nx + i);
            }
        }
    }
    let mut roots: Vec<usize> = Vec::new();
    for (k, &crosses) in crossing.iter().enumerate() {
        if crosses {
            let r = uf.find(k);
            let l = match roots.iter().position(|&x| x == r) {
                Some(l) => l,
                None => {
                    roots.push(r);
                    roots.len() - 1
                }
            };
            t.label[k] = l;
        }
    }
    t.n_labels = roots.len();
    Ok(t)
}

/// Connected components of the zero set of `field.zero_set_field()`,
/// traced by marching squares on the `(nx + 1) × (ny + 1)` grid nodes.
///
/// A node counts as zero when `|value| ≤ atol`. A component is unbounded
/// when it reaches the window boundary and the component containing it in
/// the doubled window (same cell size) reaches that boundary too.
pub fn zero_curve_components(
    s: &PlanarSystem,
    field: ScalarField,
    window: Window,
    nx: usize,
    ny: usize,
    atol: f64,
    exec: Execution,
) -> Result<ZeroComponents, ScanError> {
    if nx == 0 || ny == 0 {
        return Err(ScanError::InvalidResolution);
    }
    let traced_field = field.zero_set_field();
    let inner = trace(s, traced_field, window, nx, ny, atol, exec)?;
    let touches = |t: &Traced| -> Vec<bool> {
        let mut out = vec![false; t.n_labels];
        for j in 0..t.ny {
            for i in 0..t.nx {
                let l = t.label[j * t.nx + i];
                if l != usize::MAX && (i == 0 || j == 0 || i + 1 == t.nx || j + 1 == t.ny) {
                    out[l] = true;
                }
            }
        }
        out
    };
    let inner_touch = touches(&inner);
    let needs_outer = inner_touch.iter().any(|&b| b);
    let outer = if needs_outer {
        Some(trace(
            s,
            traced_field,
            window.doubled(),
            2 * nx,
            2 * ny,
            atol,
            exec,
        )?)
    } else {
        None
    };
    let outer_touch = outer.as_ref().map(touches).unwrap_or_default();

    let mut components: Vec<ZeroComponent> = (0..inner.n_labels)
        .map(|_| ZeroComponent {
            cells: 0,
            touches_boundary: false,
            unbounded: false,
            bbox: [
                f64::INFINITY,
                f64::NEG_INFINITY,
                f64::INFINITY,
                f64::NEG_INFINITY,
            ],
            segments: Vec::new(),
        })
        .collect();
    let mut witness: Vec<Option<[f64; 2]>> = vec![None; inner.n_labels];
    let (dx, dy) = (
        (window.x.1 - window.x.0) / nx as f64,
        (window.y.1 - window.y.0) / ny as f64,
    );
    for j in 0..ny {
        for i in 0..nx {
            let l = inner.label[j * nx + i];
            if l == usize::MAX {
                continue;
            }
            let c = &mut components[l];
            c.cells += 1;
            let p = inner.node(i, j);
            c.bbox = [
                c.bbox[0].min(p[0]),
                c.bbox[1].max(p[0] + dx),
                c.bbox[2].min(p[1]),
                c.bbox[3].max(p[1] + dy),
            ];
            c.segments.extend(inner.segments(i, j));
            let center = [p[0] + 0.5 * dx, p[1] + 0.5 * dy];
            if witness[l].is_none() {
                witness[l] = Some(center);
            }
        }
    }
    for (l, c) in components.iter_mut().enumerate() {
        c.touches_boundary = inner_touch[l];
        if c.touches_boundary {
            if let (Some(o), Some(w)) = (outer.as_ref(), witness[l]) {
                c.unbounded = o.component_at(w).is_some_and(|ol| outer_touch[ol]);
            }
        }
    }
    let unbounded_flags = components.iter().map(|c| c.unbounded).collect();
    Ok(ZeroComponents {
        field,
        window,
        nx,
        ny,
        count: components.len(),
        unbounded_flags,
        components,
    })
}
