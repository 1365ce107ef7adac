//! Stress-tensor forces on 2d grids.
//!
//! For the scalar field at imaginary frequency the traction on a face with
//! normal n is T.n, T_ij = <d_i phi d_j phi> - delta_ij (|grad phi|^2 +
//! xi^2 phi^2)/2, with the correlators read off the Green function. Faces are
//! the grid links crossing the boundary of a block of nodes; every needed
//! G(p, q) lies within one diagonal step, so it comes out of the selected
//! inverse of one factorization per frequency.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Mutex;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{CasimirError, Result};
use crate::fd::banded::BandInverse;
use crate::fd::grid::{Body, Boundary, FdGrid, GridSpec, Shape, Stretch};
use crate::fd::operator::build_operator;
use crate::fd::richardson::richardson_extrapolate;
use crate::quadrature::{FrequencyRule, RuleSpec};

/// Default clearance between a stress surface and its body, in cells.
pub const DEFAULT_CLEARANCE_CELLS: f64 = 2.0;

/// Boundary of the node block lo..=hi. The faces lie half a cell outside
/// the outermost nodes. A block spanning a whole periodic y axis is a band
/// closed by periodicity and has x faces only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct StressSurface {
    pub lo: [usize; 2],
    pub hi: [usize; 2],
}

/// Midpoint and outward normal of one face.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Face {
    pub point: [f64; 2],
    pub normal: [f64; 2],
}

impl StressSurface {
    pub fn new(lo: [usize; 2], hi: [usize; 2]) -> Self {
        StressSurface { lo, hi }
    }

    /// Smallest block whose faces keep `clearance` from the bounding box of
    /// `body`.
    pub fn enclosing(grid: &FdGrid, body: usize, clearance: f64) -> Result<Self> {
        let spec = &grid.spec;
        let b = grid
            .bodies
            .get(body)
            .ok_or_else(|| CasimirError::config(format!("no body {body} to enclose")))?;
        let (bmin, bmax) = b.shape.bbox();
        let mut lo = [0usize; 2];
        let mut hi = [0usize; 2];
        for ax in 0..2 {
            let n = spec.extents[ax] as f64;
            if spec.boundary[ax] == Boundary::Periodic {
                let top = spec.origin[ax] + (n - 1.0) * spec.dx;
                if bmin[ax] <= spec.origin[ax] && bmax[ax] >= top {
                    lo[ax] = 0;
                    hi[ax] = spec.extents[ax] - 1;
                    continue;
                }
            }
            // face at node - dx/2 must sit at or below bmin - clearance
            let l = ((bmin[ax] - clearance - spec.origin[ax]) / spec.dx + 0.5 + 1e-9).floor();
            let h = ((bmax[ax] + clearance - spec.origin[ax]) / spec.dx - 0.5 - 1e-9).ceil();
            if l < 1.0 || h > n - 2.0 {
                return Err(CasimirError::config(format!(
                    "stress surface around body {body} with clearance {clearance} does not fit the grid"
                )));
            }
            lo[ax] = l as usize;
            hi[ax] = h as usize;
        }
        let s = StressSurface { lo, hi };
        match s.validate(grid)? {
            Some(k) if k == body => Ok(s),
            _ => Err(CasimirError::config(format!("stress surface around body {body} encloses other bodies"))),
        }
    }

    pub fn is_band(&self, spec: &GridSpec) -> bool {
        spec.boundary[1] == Boundary::Periodic && self.lo[1] == 0 && self.hi[1] == spec.extents[1] - 1
    }

    /// Rectangle traced by the faces (y unbounded for a periodic band).
    pub fn rect(&self, spec: &GridSpec) -> ([f64; 2], [f64; 2]) {
        let h = 0.5 * spec.dx;
        let lo = spec.coords(self.lo[0], self.lo[1]);
        let hi = spec.coords(self.hi[0], self.hi[1]);
        if self.is_band(spec) {
            ([lo[0] - h, f64::NEG_INFINITY], [hi[0] + h, f64::INFINITY])
        } else {
            ([lo[0] - h, lo[1] - h], [hi[0] + h, hi[1] + h])
        }
    }

    pub fn faces(&self, spec: &GridSpec) -> Vec<Face> {
        let h = 0.5 * spec.dx;
        let mut faces = Vec::new();
        for j in self.lo[1]..=self.hi[1] {
            for (i, sign) in [(self.lo[0] - 1, -1.0), (self.hi[0], 1.0)] {
                let p = spec.coords(i, j);
                faces.push(Face { point: [p[0] + h, p[1]], normal: [sign, 0.0] });
            }
        }
        if !self.is_band(spec) {
            for i in self.lo[0]..=self.hi[0] {
                for (j, sign) in [(self.lo[1] - 1, -1.0), (self.hi[1], 1.0)] {
                    let p = spec.coords(i, j);
                    faces.push(Face { point: [p[0], p[1] + h], normal: [0.0, sign] });
                }
            }
        }
        faces
    }

    /// Check the surface against the bodies on `grid`; returns the enclosed
    /// body, if any.
    pub fn validate(&self, grid: &FdGrid) -> Result<Option<usize>> {
        let spec = &grid.spec;
        if spec.dim != 2 {
            return Err(CasimirError::config("stress surfaces need a 2d grid"));
        }
        let band = self.is_band(spec);
        for ax in 0..2 {
            if self.lo[ax] > self.hi[ax] {
                return Err(CasimirError::config(format!("stress surface {self:?} is empty")));
            }
            if !(ax == 1 && band) && (self.lo[ax] < 1 || self.hi[ax] + 2 > spec.extents[ax]) {
                return Err(CasimirError::config(format!("stress surface {self:?} touches the grid edge")));
            }
        }
        if spec.boundary[0] == Boundary::Periodic {
            return Err(CasimirError::config("stress surfaces need a non-periodic x axis"));
        }
        // every node and link touched by the face stencils must be plain vacuum
        let lo = [self.lo[0] - 1, if band { 0 } else { self.lo[1] - 1 }];
        let hi = [self.hi[0] + 1, if band { self.hi[1] } else { self.hi[1] + 1 }];
        let ring = |i: usize, j: usize| {
            let near = |v: usize, l: usize, h: usize| v <= l + 1 || v + 1 >= h;
            near(i, lo[0], hi[0]) || (!band && near(j, lo[1], hi[1]))
        };
        for i in lo[0]..=hi[0] {
            for j in lo[1]..=hi[1] {
                if !ring(i, j) {
                    continue;
                }
                let idx = spec.index(i, j);
                let bad = if grid.is_pinned(idx) {
                    Some("crosses a perfect-metal body")
                } else if grid.material_id[idx] != 0 {
                    Some("crosses a dielectric body")
                } else if grid.cuts[idx].iter().any(Option::is_some) {
                    Some("comes within one cell of a body surface")
                } else if spec.in_stretch_layer(i, j) {
                    Some("enters a stretch layer")
                } else {
                    None
                };
                if let Some(why) = bad {
                    let p = spec.coords(i, j);
                    return Err(CasimirError::config(format!(
                        "stress surface {self:?} {why} near ({:.4}, {:.4})",
                        p[0], p[1]
                    )));
                }
            }
        }
        let (rlo, rhi) = self.rect(spec);
        let mut inside = None;
        for (k, b) in grid.bodies.iter().enumerate() {
            let (bmin, bmax) = b.shape.bbox();
            let axes = if band { 1 } else { 2 };
            let within = (0..axes).all(|ax| bmin[ax] > rlo[ax] && bmax[ax] < rhi[ax]);
            let outside = (0..axes).any(|ax| bmax[ax] < rlo[ax] || bmin[ax] > rhi[ax]);
            if within {
                if let Some(prev) = inside {
                    return Err(CasimirError::config(format!("stress surface encloses bodies {prev} and {k}")));
                }
                inside = Some(k);
            } else if !outside {
                return Err(CasimirError::config(format!("stress surface {self:?} intersects body {k}")));
            }
        }
        Ok(inside)
    }
}

/// Sum of T.n dl over the surface.
///
/// The sum is written in the form that telescopes exactly under the
/// five-point stencil: it equals -dx^2 sum_R D_e phi (L phi) over the
/// enclosed nodes, L the vacuum operator and D_e the central difference.
/// The xi^2 term pairs phi across each face, and the transverse gradient
/// term pairs the links on either side of it. An empty vacuum region
/// therefore carries exactly zero net force, and nested surfaces agree
/// whenever only vacuum lies between them.
fn traction<G: Fn(usize, usize) -> f64>(spec: &GridSpec, s: &StressSurface, xi: f64, g: G) -> [f64; 2] {
    let h = spec.dx;
    let h2 = h * h;
    let band = s.is_band(spec);
    let wrap = |v: i64, ax: usize| {
        let n = spec.extents[ax] as i64;
        if spec.boundary[ax] == Boundary::Periodic {
            v.rem_euclid(n) as usize
        } else {
            debug_assert!((0..n).contains(&v));
            v as usize
        }
    };
    let mut f = [0.0; 2];
    for ax in 0..2 {
        let o = 1 - ax;
        // node at position a along ax, b along the other axis
        let node = |a: i64, b: i64| if ax == 0 { spec.index(wrap(a, 0), wrap(b, 1)) } else { spec.index(wrap(b, 0), wrap(a, 1)) };
        let (a0, a1) = (s.lo[ax] as i64, s.hi[ax] as i64);
        let (b0, b1) = (s.lo[o] as i64, s.hi[o] as i64);
        let along_periodic = band && ax == 1;
        let across_periodic = band && o == 1;
        let mut sum = 0.0;
        if !along_periodic {
            for b in b0..=b1 {
                for (p, q, sign) in [(node(a1, b), node(a1 + 1, b), 1.0), (node(a0 - 1, b), node(a0, b), -1.0)] {
                    let grad2 = (g(p, p) - 2.0 * g(p, q) + g(q, q)) / h2;
                    sum += sign * 0.5 * h * (grad2 - xi * xi * g(p, q));
                }
            }
            let b_end = if across_periodic { b1 } else { b1 - 1 };
            for b in b0..=b_end {
                for (a, sign) in [(a1, 1.0), (a0 - 1, -1.0)] {
                    let uu = (g(node(a, b + 1), node(a + 1, b + 1)) - g(node(a, b + 1), node(a + 1, b))
                        - g(node(a, b), node(a + 1, b + 1))
                        + g(node(a, b), node(a + 1, b)))
                        / h2;
                    sum -= sign * 0.5 * h * uu;
                }
            }
        }
        if !across_periodic {
            // <D_e phi(a, b) (phi(a, up) - phi(a, down))/dx>
            let cross = |a: i64, b: i64, up: i64, down: i64| {
                (g(node(a + 1, b), node(a, up)) - g(node(a + 1, b), node(a, down)) - g(node(a - 1, b), node(a, up))
                    + g(node(a - 1, b), node(a, down)))
                    / (2.0 * h2)
            };
            for a in a0..=a1 {
                sum += h * (cross(a, b1, b1 + 1, b1) - cross(a, b0, b0, b0 - 1));
            }
        }
        f[ax] = sum;
    }
    f
}

fn traction_from_inverse(spec: &GridSpec, s: &StressSurface, xi: f64, z: &BandInverse, cell_volume: f64) -> [f64; 2] {
    traction(spec, s, xi, |p, q| z.get(p, q) / cell_volume)
}

/// Per-surface tractions of the empty grid, keyed by frequency and layout.
#[derive(Debug, Default)]
pub struct VacuumCache {
    map: Mutex<HashMap<(u64, String), Vec<[f64; 2]>>>,
}

impl VacuumCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.map.lock().expect("vacuum cache poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn tractions(&self, spec: &GridSpec, surfaces: &[StressSurface], xi: f64) -> Result<Vec<[f64; 2]>> {
        let key = (xi.to_bits(), format!("{spec:?}{surfaces:?}"));
        if let Some(v) = self.map.lock().expect("vacuum cache poisoned").get(&key) {
            return Ok(v.clone());
        }
        let empty = FdGrid::new(*spec, Vec::new())?;
        let v = raw_tractions(&empty, surfaces, xi)?;
        self.map.lock().expect("vacuum cache poisoned").insert(key, v.clone());
        Ok(v)
    }
}

fn raw_tractions(grid: &FdGrid, surfaces: &[StressSurface], xi: f64) -> Result<Vec<[f64; 2]>> {
    let op = build_operator(grid, xi)?;
    let z = op.factor()?.selected_inverse();
    Ok(surfaces
        .iter()
        .map(|s| traction_from_inverse(&grid.spec, s, xi, &z, op.cell_volume))
        .collect())
}

/// Vacuum-subtracted sum of T.n dl over each surface at one frequency.
pub fn stress_tractions(
    grid: &FdGrid,
    surfaces: &[StressSurface],
    xi: f64,
    cache: &VacuumCache,
) -> Result<Vec<[f64; 2]>> {
    let raw = raw_tractions(grid, surfaces, xi)?;
    let vac = cache.tractions(&grid.spec, surfaces, xi)?;
    Ok(raw.iter().zip(&vac).map(|(r, v)| [r[0] - v[0], r[1] - v[1]]).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ForceSample {
    pub xi: f64,
    pub weight: f64,
    /// Contribution per unit frequency, -(1/pi) sum T.n dl.
    pub integrand: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ForceMeta {
    pub grid: GridSpec,
    pub rule: RuleSpec,
    pub surface: StressSurface,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Correction {
    VacuumSubtracted,
    IsolatedSubtracted,
    Richardson { order: u32, spacings: Vec<f64> },
}

/// Force on the body inside `meta.surface`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ForceResult {
    pub force: [f64; 2],
    pub samples: Vec<ForceSample>,
    pub meta: ForceMeta,
    pub corrections: Vec<Correction>,
}

impl ForceResult {
    pub fn from_samples(samples: Vec<ForceSample>, meta: ForceMeta, corrections: Vec<Correction>) -> Self {
        let mut force = [0.0; 2];
        for s in &samples {
            force[0] += s.weight * s.integrand[0];
            force[1] += s.weight * s.integrand[1];
        }
        ForceResult { force, samples, meta, corrections }
    }

    pub fn dx(&self) -> f64 {
        self.meta.grid.dx
    }
}

fn check_rule(rule: &FrequencyRule) -> Result<()> {
    if rule.nodes.iter().any(|&x| !(x > 0.0)) {
        return Err(CasimirError::config("finite-difference forces need a zero-temperature rule (all xi > 0)"));
    }
    Ok(())
}

/// Forces on the bodies enclosed by each surface.
pub fn stress_forces_2d(
    grid: &FdGrid,
    surfaces: &[StressSurface],
    rule: &FrequencyRule,
    cache: &VacuumCache,
) -> Result<Vec<ForceResult>> {
    check_rule(rule)?;
    for s in surfaces {
        s.validate(grid)?;
    }
    let per_xi: Vec<Vec<[f64; 2]>> = rule
        .nodes
        .par_iter()
        .map(|&xi| stress_tractions(grid, surfaces, xi, cache))
        .collect::<Result<_>>()?;
    Ok(surfaces
        .iter()
        .enumerate()
        .map(|(k, s)| {
            let samples = rule
                .nodes
                .iter()
                .zip(&rule.weights)
                .zip(&per_xi)
                .map(|((&xi, &weight), t)| ForceSample { xi, weight, integrand: [-t[k][0] / PI, -t[k][1] / PI] })
                .collect();
            let meta = ForceMeta { grid: grid.spec, rule: rule.spec, surface: *s };
            ForceResult::from_samples(samples, meta, vec![Correction::VacuumSubtracted])
        })
        .collect())
}

pub fn stress_force_2d(grid: &FdGrid, surface: StressSurface, rule: &FrequencyRule) -> Result<ForceResult> {
    let mut v = stress_forces_2d(grid, &[surface], rule, &VacuumCache::new())?;
    Ok(v.remove(0))
}

/// AB minus the artifact forces each body produces alone on the same surface.
pub fn subtract_isolated(ab: &ForceResult, a: &ForceResult, b: &ForceResult) -> Result<ForceResult> {
    for other in [a, b] {
        if other.meta != ab.meta {
            return Err(CasimirError::config("isolated-body results were computed on a different grid, rule or surface"));
        }
        if other.samples.len() != ab.samples.len()
            || other.samples.iter().zip(&ab.samples).any(|(x, y)| x.xi != y.xi || x.weight != y.weight)
        {
            return Err(CasimirError::config("isolated-body results use different frequency samples"));
        }
    }
    let samples = ab
        .samples
        .iter()
        .zip(&a.samples)
        .zip(&b.samples)
        .map(|((s, sa), sb)| ForceSample {
            xi: s.xi,
            weight: s.weight,
            integrand: [
                s.integrand[0] - sa.integrand[0] - sb.integrand[0],
                s.integrand[1] - sa.integrand[1] - sb.integrand[1],
            ],
        })
        .collect();
    let mut corrections = ab.corrections.clone();
    corrections.push(Correction::IsolatedSubtracted);
    Ok(ForceResult::from_samples(samples, ab.meta.clone(), corrections))
}

/// Raw and isolated-subtracted forces on one body of a two-body grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairForce {
    pub raw: ForceResult,
    pub alone: [ForceResult; 2],
    pub corrected: ForceResult,
}

/// Force on `body` measured on `surface`, with the isolated-body artifacts
/// of both bodies removed.
pub fn pair_force_2d(
    grid: &FdGrid,
    body: usize,
    surface: StressSurface,
    rule: &FrequencyRule,
    cache: &VacuumCache,
) -> Result<PairForce> {
    if grid.bodies.len() != 2 {
        return Err(CasimirError::config("pair forces need exactly two bodies"));
    }
    if surface.validate(grid)? != Some(body) {
        return Err(CasimirError::config(format!("the stress surface does not enclose body {body}")));
    }
    let raw = stress_forces_2d(grid, &[surface], rule, cache)?.remove(0);
    let a = stress_forces_2d(&grid.with_bodies(&[0])?, &[surface], rule, cache)?.remove(0);
    let b = stress_forces_2d(&grid.with_bodies(&[1])?, &[surface], rule, cache)?.remove(0);
    let corrected = subtract_isolated(&raw, &a, &b)?;
    Ok(PairForce { raw, alone: [a, b], corrected })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtrapolatedForce {
    pub force: [f64; 2],
    pub error: [f64; 2],
    pub correction: Correction,
}

/// Componentwise Richardson extrapolation of forces at different spacings.
pub fn richardson_force(results: &[ForceResult], order: u32) -> Result<ExtrapolatedForce> {
    let mut force = [0.0; 2];
    let mut error = [0.0; 2];
    for c in 0..2 {
        let pts: Vec<(f64, f64)> = results.iter().map(|r| (r.dx(), r.force[c])).collect();
        let e = richardson_extrapolate(&pts, order)?;
        force[c] = e.value;
        error[c] = e.error;
    }
    let spacings = results.iter().map(ForceResult::dx).collect();
    Ok(ExtrapolatedForce { force, error, correction: Correction::Richardson { order, spacings } })
}

/// Two Dirichlet circles centred at (-d/2, 0) and (d/2, 0) on the lattice
/// x, y = k dx, with `margin` of free space around them.
pub fn circle_pair_grid(r1: f64, r2: f64, d: f64, dx: f64, margin: f64, stretch: Option<Stretch>) -> Result<FdGrid> {
    if !(r1 > 0.0 && r2 > 0.0) || !(d > r1 + r2) {
        return Err(CasimirError::config(format!("circles r1 = {r1}, r2 = {r2} at distance {d} overlap")));
    }
    let c1 = [-0.5 * d, 0.0];
    let c2 = [0.5 * d, 0.0];
    let rmax = r1.max(r2);
    let lo = [c1[0] - r1 - margin, -rmax - margin];
    let hi = [c2[0] + r2 + margin, rmax + margin];
    let spec = GridSpec::lattice(2, dx, lo, hi, stretch)?;
    let bodies = vec![
        Body::mirror(Shape::Circle { center: c1, radius: r1 }),
        Body::mirror(Shape::Circle { center: c2, radius: r2 }),
    ];
    FdGrid::new(spec, bodies)
}
