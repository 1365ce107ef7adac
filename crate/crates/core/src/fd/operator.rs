//! Assembly of the imaginary-frequency operator -div(s grad) + xi^2 eps s.

use std::sync::OnceLock;

use crate::error::{CasimirError, Result};
use crate::fd::banded::BandedLdl;
use crate::fd::grid::{Boundary, FdGrid, DIRECTIONS};

/// Grids above this size with a periodic x axis are refused (dense path).
pub const MAX_DENSE_NODES: usize = 2048;

/// Symmetric sparse matrix in row-compressed form, plus a lazily built
/// banded factorization.
#[derive(Debug)]
pub struct SpdOperator {
    pub n: usize,
    pub indptr: Vec<usize>,
    pub indices: Vec<usize>,
    pub values: Vec<f64>,
    /// max |i - j| over stored entries.
    pub bandwidth: usize,
    /// Band of the factorization and selected inverse: covers every pair
    /// of nodes within one step along each axis.
    pub selected_band: usize,
    /// dx^dim: G = A^{-1} / cell_volume.
    pub cell_volume: f64,
    /// s_x s_y dx^dim per node, the stretched volume element.
    pub volume: Vec<f64>,
    pub xi: f64,
    factor: OnceLock<BandedLdl>,
}

impl Clone for SpdOperator {
    fn clone(&self) -> Self {
        SpdOperator {
            n: self.n,
            indptr: self.indptr.clone(),
            indices: self.indices.clone(),
            values: self.values.clone(),
            bandwidth: self.bandwidth,
            selected_band: self.selected_band,
            cell_volume: self.cell_volume,
            volume: self.volume.clone(),
            xi: self.xi,
            factor: OnceLock::new(),
        }
    }
}

impl SpdOperator {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let row = self.indptr[i]..self.indptr[i + 1];
        self.indices[row.clone()]
            .iter()
            .position(|&c| c == j)
            .map_or(0.0, |k| self.values[row.start + k])
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.indptr[i]..self.indptr[i + 1];
        self.indices[r.clone()].iter().copied().zip(self.values[r].iter().copied())
    }

    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self.row(i).map(|(j, v)| v * x[j]).sum();
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    /// Largest |A_ij - A_ji| relative to the largest entry.
    pub fn asymmetry(&self) -> f64 {
        let scale = self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let mut worst = 0.0f64;
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                worst = worst.max((v - self.get(j, i)).abs());
            }
        }
        worst / scale.max(f64::MIN_POSITIVE)
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut a = vec![vec![0.0; self.n]; self.n];
        for (i, row) in a.iter_mut().enumerate() {
            for (j, v) in self.row(i) {
                row[j] = v;
            }
        }
        a
    }

    /// Banded LDL^T factorization over `selected_band`.
    pub fn factor(&self) -> Result<&BandedLdl> {
        if let Some(f) = self.factor.get() {
            return Ok(f);
        }
        if self.selected_band >= self.n - 1 && self.n > MAX_DENSE_NODES {
            return Err(CasimirError::config(format!(
                "dense factorization limited to {MAX_DENSE_NODES} nodes (got {}); avoid a periodic x axis",
                self.n
            )));
        }
        let f = BandedLdl::factor(self, self.selected_band)?;
        Ok(self.factor.get_or_init(|| f))
    }
}

/// Assemble the operator at frequency xi > 0.
pub fn build_operator(grid: &FdGrid, xi: f64) -> Result<SpdOperator> {
    if !(xi > 0.0) || !xi.is_finite() {
        return Err(CasimirError::config(format!("operator frequency must be positive (got {xi})")));
    }
    let op = assemble(grid, xi)?;
    let asym = op.asymmetry();
    if asym > 1e-12 {
        return Err(CasimirError::Consistency(format!("assembled operator not symmetric ({asym:e})")));
    }
    Ok(op)
}

/// The xi = 0 operator (pure Laplacian part); no stretch layers allowed.
pub fn build_static_operator(grid: &FdGrid) -> Result<SpdOperator> {
    if grid.spec.has_stretch() {
        return Err(CasimirError::config("the static operator is undefined with stretch layers (s = 1 + sigma/xi)"));
    }
    assemble(grid, 0.0)
}

fn assemble(grid: &FdGrid, xi: f64) -> Result<SpdOperator> {
    let spec = &grid.spec;
    let (nx, ny) = (spec.extents[0], spec.extents[1]);
    let n = spec.len();
    let dx = spec.dx;
    let inv_h2 = 1.0 / (dx * dx);
    let dims = spec.dim;
    let sf = |axis: usize, pos: f64| if xi > 0.0 { spec.stretch_factor(axis, pos, xi) } else { 1.0 };

    let mut indptr = Vec::with_capacity(n + 1);
    let mut indices = Vec::with_capacity(n * (2 * dims + 1));
    let mut values = Vec::with_capacity(n * (2 * dims + 1));
    let mut volume = Vec::with_capacity(n);
    let mut bandwidth = 0usize;
    indptr.push(0);
    let mut row: Vec<(usize, f64)> = Vec::with_capacity(5);

    for i in 0..nx {
        for j in 0..ny {
            let idx = spec.index(i, j);
            row.clear();
            let sx = sf(0, i as f64);
            let sy = if dims == 2 { sf(1, j as f64) } else { 1.0 };
            volume.push(sx * sy * dx.powi(dims as i32));
            if grid.is_pinned(idx) {
                row.push((idx, 2.0 * dims as f64 * inv_h2));
                push_row(&mut row, &mut indices, &mut values, &mut indptr, idx, &mut bandwidth);
                continue;
            }
            let mut diag = if xi > 0.0 { xi * xi * grid.material(idx).permittivity(xi)? * sx * sy } else { 0.0 };
            for (dir, &(di, dj)) in DIRECTIONS.iter().enumerate() {
                let axis = if di != 0 { 0 } else { 1 };
                if axis >= dims {
                    continue;
                }
                let step = if axis == 0 { di } else { dj };
                let pos = if axis == 0 { i } else { j } as f64 + 0.5 * step as f64;
                // coupling: s_other(node) / s_axis(half node) / dx^2
                let s_other = if axis == 0 { sy } else { sx };
                let c = s_other / sf(axis, pos) * inv_h2;
                if let Some(theta) = grid.cuts[idx][dir] {
                    diag += c / theta;
                    continue;
                }
                let (ni, nj) = (i as i64 + di, j as i64 + dj);
                let len = spec.extents[axis] as i64;
                let coord = if axis == 0 { ni } else { nj };
                let wrapped = if coord < 0 || coord >= len {
                    match spec.boundary[axis] {
                        Boundary::Dirichlet => {
                            diag += c;
                            continue;
                        }
                        Boundary::Periodic => coord.rem_euclid(len),
                    }
                } else {
                    coord
                };
                let (ni, nj) = if axis == 0 { (wrapped as usize, j) } else { (i, wrapped as usize) };
                let nb = spec.index(ni, nj);
                if grid.is_pinned(nb) {
                    // staircase closure: the pinned neighbour holds zero
                    diag += c;
                    continue;
                }
                diag += c;
                row.push((nb, -c));
            }
            row.push((idx, diag));
            push_row(&mut row, &mut indices, &mut values, &mut indptr, idx, &mut bandwidth);
        }
    }

    // diagonal neighbours sit at ny +- 1, or 2 ny - 1 across a periodic y seam
    let mut selected_band = bandwidth + 1;
    if dims == 2 && spec.boundary[1] == Boundary::Periodic {
        selected_band = selected_band.max(2 * ny - 1);
    }
    let op = SpdOperator {
        n,
        indptr,
        indices,
        values,
        bandwidth,
        selected_band: selected_band.min(n.saturating_sub(1)),
        cell_volume: dx.powi(dims as i32),
        volume,
        xi,
        factor: OnceLock::new(),
    };
    if op.values.iter().any(|v| !v.is_finite()) {
        return Err(CasimirError::NonFinite { xi });
    }
    Ok(op)
}

fn push_row(
    row: &mut [(usize, f64)],
    indices: &mut Vec<usize>,
    values: &mut Vec<f64>,
    indptr: &mut Vec<usize>,
    idx: usize,
    bandwidth: &mut usize,
) {
    row.sort_by_key(|e| e.0);
    let mut last: Option<usize> = None;
    for &(c, v) in row.iter() {
        if last == Some(c) {
            *values.last_mut().expect("entry present") += v;
            continue;
        }
        indices.push(c);
        values.push(v);
        *bandwidth = (*bandwidth).max(c.abs_diff(idx));
        last = Some(c);
    }
    indptr.push(indices.len());
}
