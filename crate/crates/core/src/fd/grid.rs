//! Node-centred uniform grids, body rasterization and boundary cuts.

use serde::{Deserialize, Serialize};

use crate::error::{CasimirError, Result};
use crate::materials::MaterialModel;

/// Smallest admissible extent per active axis.
pub const MIN_EXTENT: usize = 8;

/// Fractional link lengths below this are clamped (the node sits on the wall).
const THETA_MIN: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    /// Field vanishes one cell beyond the last node.
    #[default]
    Dirichlet,
    Periodic,
}

/// How Dirichlet bodies close the stencil.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryScheme {
    /// Links into a body end at the exact surface crossing.
    #[default]
    CutCell,
    /// Nodes inside a body are pinned; links end at the pinned node.
    Staircase,
}

/// Real coordinate stretch s = 1 + sigma(x)/xi over the outer `cells` nodes
/// of an axis, sigma quadratic in depth with Int sigma dx = `strength`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stretch {
    pub cells: usize,
    pub strength: f64,
}

impl Default for Stretch {
    fn default() -> Self {
        Stretch { cells: 20, strength: 8.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum Shape {
    /// Zero-thickness mirror (1d only).
    Point { x: f64 },
    /// Slab [x0, x1] (1d only).
    Interval { x0: f64, x1: f64 },
    Circle { center: [f64; 2], radius: f64 },
    Rect { min: [f64; 2], max: [f64; 2] },
}

impl Shape {
    pub fn dim(&self) -> usize {
        match self {
            Shape::Point { .. } | Shape::Interval { .. } => 1,
            _ => 2,
        }
    }

    /// Axis-aligned bounding box (y ignored in 1d).
    pub fn bbox(&self) -> ([f64; 2], [f64; 2]) {
        match *self {
            Shape::Point { x } => ([x, 0.0], [x, 0.0]),
            Shape::Interval { x0, x1 } => ([x0, 0.0], [x1, 0.0]),
            Shape::Circle { center: c, radius: r } => ([c[0] - r, c[1] - r], [c[0] + r, c[1] + r]),
            Shape::Rect { min, max } => (min, max),
        }
    }

    /// Distance from a point to the shape (0 inside).
    pub fn distance(&self, p: [f64; 2]) -> f64 {
        match *self {
            Shape::Point { x } => (p[0] - x).abs(),
            Shape::Interval { x0, x1 } => (x0 - p[0]).max(p[0] - x1).max(0.0),
            Shape::Circle { center: c, radius: r } => ((p[0] - c[0]).hypot(p[1] - c[1]) - r).max(0.0),
            Shape::Rect { min, max } => {
                let dx = (min[0] - p[0]).max(p[0] - max[0]).max(0.0);
                let dy = (min[1] - p[1]).max(p[1] - max[1]).max(0.0);
                dx.hypot(dy)
            }
        }
    }

    /// Lower bound on the gap between two shapes (exact for the pairs used here).
    pub fn gap(&self, other: &Shape) -> f64 {
        match (*self, *other) {
            (Shape::Circle { center: a, radius: ra }, Shape::Circle { center: b, radius: rb }) => {
                (a[0] - b[0]).hypot(a[1] - b[1]) - ra - rb
            }
            (Shape::Circle { center, radius }, s) | (s, Shape::Circle { center, radius }) => {
                s.distance(center) - radius
            }
            _ => {
                let (amin, amax) = self.bbox();
                let (bmin, bmax) = other.bbox();
                let dx = (bmin[0] - amax[0]).max(amin[0] - bmax[0]).max(0.0);
                let dy = (bmin[1] - amax[1]).max(amin[1] - bmax[1]).max(0.0);
                dx.hypot(dy)
            }
        }
    }

    fn contains(&self, p: [f64; 2], tol: f64) -> bool {
        match *self {
            Shape::Point { x } => (p[0] - x).abs() <= tol,
            _ => self.distance(p) <= tol,
        }
    }

    /// First parameter t in (0, 1] at which the segment p -> q enters the
    /// shape, for p outside it.
    fn entry(&self, p: [f64; 2], q: [f64; 2]) -> Option<f64> {
        let dir = [q[0] - p[0], q[1] - p[1]];
        let hit = |t: f64| (t > 0.0 && t <= 1.0 + 1e-12).then_some(t.min(1.0));
        match *self {
            Shape::Point { x } => hit((x - p[0]) / dir[0]),
            Shape::Interval { x0, x1 } => hit(if dir[0] > 0.0 { (x0 - p[0]) / dir[0] } else { (x1 - p[0]) / dir[0] }),
            Shape::Circle { center: c, radius: r } => {
                let f = [p[0] - c[0], p[1] - c[1]];
                let a = dir[0] * dir[0] + dir[1] * dir[1];
                let b = f[0] * dir[0] + f[1] * dir[1];
                let cc = f[0] * f[0] + f[1] * f[1] - r * r;
                let disc = b * b - a * cc;
                if disc <= 0.0 {
                    return None;
                }
                hit((-b - disc.sqrt()) / a)
            }
            Shape::Rect { min, max } => {
                // links are axis aligned
                let (ax, other) = if dir[0] != 0.0 { (0, 1) } else { (1, 0) };
                if p[other] < min[other] || p[other] > max[other] {
                    return None;
                }
                let t = if dir[ax] > 0.0 { (min[ax] - p[ax]) / dir[ax] } else { (max[ax] - p[ax]) / dir[ax] };
                hit(t)
            }
        }
    }
}

/// A body: perfect-metal bodies pin the field, others set the permittivity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Body {
    pub shape: Shape,
    pub material: MaterialModel,
}

impl Body {
    pub fn mirror(shape: Shape) -> Self {
        Body { shape, material: MaterialModel::PerfectMetal }
    }

    pub fn is_dirichlet(&self) -> bool {
        self.material.is_perfect_metal()
    }
}

/// Layout of a grid independent of its contents.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// 1 or 2.
    pub dim: usize,
    pub dx: f64,
    /// Node counts (extents[1] = 1 in 1d).
    pub extents: [usize; 2],
    /// Coordinates of node (0, 0).
    pub origin: [f64; 2],
    pub boundary: [Boundary; 2],
    pub stretch: [Option<Stretch>; 2],
    pub scheme: BoundaryScheme,
}

impl GridSpec {
    /// Grid covering [lo, hi] per axis (plus stretch layers outside it).
    pub fn covering(dim: usize, dx: f64, lo: [f64; 2], hi: [f64; 2], stretch: Option<Stretch>) -> Result<Self> {
        if !(dx > 0.0) || !dx.is_finite() {
            return Err(CasimirError::config(format!("grid spacing must be positive (got {dx})")));
        }
        let mut extents = [1usize; 2];
        let mut origin = [0.0; 2];
        let mut st = [None; 2];
        for ax in 0..dim {
            if !(hi[ax] > lo[ax]) {
                return Err(CasimirError::config(format!("empty domain along axis {ax}")));
            }
            let pad = stretch.map_or(0, |s| s.cells);
            let n = ((hi[ax] - lo[ax]) / dx).round() as usize + 1;
            extents[ax] = n + 2 * pad;
            origin[ax] = lo[ax] - pad as f64 * dx;
            st[ax] = stretch;
        }
        let spec = GridSpec {
            dim,
            dx,
            extents,
            origin,
            boundary: [Boundary::Dirichlet; 2],
            stretch: st,
            scheme: BoundaryScheme::CutCell,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// As [`covering`](Self::covering), with [lo, hi] widened to multiples
    /// of dx so that nodes sit at integer multiples of dx.
    pub fn lattice(dim: usize, dx: f64, lo: [f64; 2], hi: [f64; 2], stretch: Option<Stretch>) -> Result<Self> {
        let snap = |v: f64, up: bool| {
            let k = v / dx;
            let k = if (k - k.round()).abs() < 1e-9 { k.round() } else if up { k.ceil() } else { k.floor() };
            k * dx
        };
        let lo = [snap(lo[0], false), snap(lo[1], false)];
        let hi = [snap(hi[0], true), snap(hi[1], true)];
        Self::covering(dim, dx, lo, hi, stretch)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim != 1 && self.dim != 2 {
            return Err(CasimirError::config(format!("grid dimension must be 1 or 2 (got {})", self.dim)));
        }
        if !(self.dx > 0.0) || !self.dx.is_finite() {
            return Err(CasimirError::config(format!("grid spacing must be positive (got {})", self.dx)));
        }
        for ax in 0..self.dim {
            if self.extents[ax] < MIN_EXTENT {
                return Err(CasimirError::config(format!(
                    "grid extent along axis {ax} is {} (minimum {MIN_EXTENT})",
                    self.extents[ax]
                )));
            }
            if let Some(s) = self.stretch[ax] {
                if self.boundary[ax] == Boundary::Periodic {
                    return Err(CasimirError::config(format!("axis {ax}: stretch layers need a non-periodic axis")));
                }
                if s.cells == 0 || 2 * s.cells >= self.extents[ax] || !(s.strength >= 0.0) {
                    return Err(CasimirError::config(format!("axis {ax}: invalid stretch layer {s:?}")));
                }
            }
        }
        if self.dim == 1 && self.extents[1] != 1 {
            return Err(CasimirError::config("1d grids have extents[1] = 1"));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.extents[0] * self.extents[1]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.extents[1] + j
    }

    pub fn coords(&self, i: usize, j: usize) -> [f64; 2] {
        [self.coord(0, i), self.coord(1, j)]
    }

    /// Node position along an axis; on a lattice origin (integer multiple
    /// of dx) this is k dx exactly, so mirror-image nodes are exact negatives.
    fn coord(&self, axis: usize, i: usize) -> f64 {
        let k = self.origin[axis] / self.dx;
        if (k - k.round()).abs() < 1e-9 {
            (k.round() + i as f64) * self.dx
        } else {
            self.origin[axis] + i as f64 * self.dx
        }
    }

    /// sigma at fractional node position `pos` along `axis`.
    pub fn sigma(&self, axis: usize, pos: f64) -> f64 {
        let Some(s) = self.stretch[axis] else { return 0.0 };
        let n = self.extents[axis] as f64;
        let c = s.cells as f64;
        let depth = if pos < c {
            (c - pos) / c
        } else if pos > n - 1.0 - c {
            (pos - (n - 1.0 - c)) / c
        } else {
            return 0.0;
        };
        let sigma_max = 3.0 * s.strength / (c * self.dx);
        sigma_max * depth * depth
    }

    /// Stretch factor 1 + sigma/xi at fractional position along an axis.
    pub fn stretch_factor(&self, axis: usize, pos: f64, xi: f64) -> f64 {
        let sg = self.sigma(axis, pos);
        if sg == 0.0 {
            1.0
        } else {
            1.0 + sg / xi
        }
    }

    pub fn has_stretch(&self) -> bool {
        self.stretch.iter().any(Option::is_some)
    }

    /// Nodes inside stretch layers along some axis.
    pub fn in_stretch_layer(&self, i: usize, j: usize) -> bool {
        self.sigma(0, i as f64) > 0.0 || (self.dim == 2 && self.sigma(1, j as f64) > 0.0)
    }
}

/// A grid with bodies rasterized onto it.
#[derive(Debug, Clone, PartialEq)]
pub struct FdGrid {
    pub spec: GridSpec,
    pub bodies: Vec<Body>,
    /// Distinct materials; index 0 is the vacuum background.
    pub materials: Vec<MaterialModel>,
    pub material_id: Vec<u16>,
    /// Dirichlet body (1-based) pinning each node, 0 for free nodes.
    pub body_mask: Vec<u16>,
    /// Per node, fractional length of the link toward +x, -x, +y, -y when a
    /// Dirichlet surface cuts it; `None` for open links.
    pub cuts: Vec<[Option<f64>; 4]>,
}

/// Neighbour offsets in the order used by [`FdGrid::cuts`].
pub const DIRECTIONS: [(i64, i64); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];

impl FdGrid {
    pub fn new(spec: GridSpec, bodies: Vec<Body>) -> Result<Self> {
        spec.validate()?;
        if bodies.len() >= u16::MAX as usize {
            return Err(CasimirError::config("too many bodies"));
        }
        let mut materials = vec![MaterialModel::Vacuum];
        for (k, b) in bodies.iter().enumerate() {
            if b.shape.dim() != spec.dim {
                return Err(CasimirError::config(format!("body {k}: {:?} does not fit a {}d grid", b.shape, spec.dim)));
            }
            if let Shape::Circle { radius, .. } = b.shape {
                if !(radius > 0.0) {
                    return Err(CasimirError::config(format!("body {k}: radius must be positive")));
                }
            }
            if matches!(b.shape, Shape::Point { .. }) && !b.is_dirichlet() {
                return Err(CasimirError::config(format!("body {k}: a zero-thickness body must be perfect_metal")));
            }
            if !b.is_dirichlet() {
                let diag = b.material.validate();
                if let Some(msg) = diag.first() {
                    return Err(CasimirError::config(format!("body {k}: {msg}")));
                }
                if !materials.contains(&b.material) {
                    materials.push(b.material.clone());
                }
            }
        }

        let n = spec.len();
        let (nx, ny) = (spec.extents[0], spec.extents[1]);
        let mut material_id = vec![0u16; n];
        let mut body_mask = vec![0u16; n];
        let pin_tol = match spec.scheme {
            BoundaryScheme::CutCell => 1e-9 * spec.dx,
            BoundaryScheme::Staircase => 0.5 * spec.dx,
        };
        for i in 0..nx {
            for j in 0..ny {
                let p = spec.coords(i, j);
                let idx = spec.index(i, j);
                for (k, b) in bodies.iter().enumerate() {
                    if b.is_dirichlet() {
                        if b.shape.contains(p, pin_tol) {
                            body_mask[idx] = (k + 1) as u16;
                        }
                    } else if b.shape.contains(p, 1e-9 * spec.dx) {
                        material_id[idx] = materials.iter().position(|m| *m == b.material).unwrap_or(0) as u16;
                    }
                }
            }
        }

        let mut cuts = vec![[None; 4]; n];
        if spec.scheme == BoundaryScheme::CutCell {
            for i in 0..nx {
                for j in 0..ny {
                    let idx = spec.index(i, j);
                    if body_mask[idx] != 0 {
                        continue;
                    }
                    let p = spec.coords(i, j);
                    for (dir, &(di, dj)) in DIRECTIONS.iter().enumerate() {
                        if spec.dim == 1 && dj != 0 {
                            continue;
                        }
                        let q = [p[0] + di as f64 * spec.dx, p[1] + dj as f64 * spec.dx];
                        let theta = bodies
                            .iter()
                            .filter(|b| b.is_dirichlet())
                            .filter_map(|b| b.shape.entry(p, q))
                            .fold(None, |acc: Option<f64>, t| Some(acc.map_or(t, |a| a.min(t))));
                        cuts[idx][dir] = theta.map(|t| t.max(THETA_MIN));
                    }
                }
            }
        }

        Ok(FdGrid { spec, bodies, materials, material_id, body_mask, cuts })
    }

    /// The same layout with no bodies.
    pub fn empty_like(&self) -> Result<Self> {
        FdGrid::new(self.spec, Vec::new())
    }

    /// The same layout keeping only the listed bodies.
    pub fn with_bodies(&self, keep: &[usize]) -> Result<Self> {
        FdGrid::new(self.spec, keep.iter().map(|&k| self.bodies[k].clone()).collect())
    }

    pub fn is_pinned(&self, idx: usize) -> bool {
        self.body_mask[idx] != 0
    }

    pub fn material(&self, idx: usize) -> &MaterialModel {
        &self.materials[self.material_id[idx] as usize]
    }
}
