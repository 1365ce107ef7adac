//! Interaction energy of two bodies on a 1d grid from the field-energy
//! density of the Green function.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{CasimirError, Result};
use crate::fd::grid::{Body, FdGrid, GridSpec, Stretch};
use crate::fd::operator::build_operator;
use crate::quadrature::{FrequencyRule, IntegrandSample};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyResult {
    pub energy: f64,
    pub dx: f64,
    pub samples: Vec<IntegrandSample>,
}

/// Grid on the lattice x = k dx covering both bodies plus `margin` on each
/// side, with optional stretch layers beyond that.
pub fn two_body_grid_1d(bodies: Vec<Body>, dx: f64, margin: f64, stretch: Option<Stretch>) -> Result<FdGrid> {
    if bodies.len() != 2 {
        return Err(CasimirError::config(format!("a 1d layout needs two bodies (got {})", bodies.len())));
    }
    let lo = bodies.iter().map(|b| b.shape.bbox().0[0]).fold(f64::INFINITY, f64::min);
    let hi = bodies.iter().map(|b| b.shape.bbox().1[0]).fold(f64::NEG_INFINITY, f64::max);
    let spec = GridSpec::lattice(1, dx, [lo - margin, 0.0], [hi + margin, 0.0], stretch)?;
    FdGrid::new(spec, bodies)
}

/// sum_n s_n dx w_n(xi) G_nn over free nodes.
fn weighted_trace(grid: &FdGrid, xi: f64) -> Result<f64> {
    let op = build_operator(grid, xi)?;
    let z = op.factor()?.selected_inverse();
    let mut sum = 0.0;
    for n in 0..op.n {
        if grid.is_pinned(n) {
            continue;
        }
        let w = grid.material(n).energy_weight(xi)?;
        sum += op.volume[n] * w * z.diag(n) / op.cell_volume;
    }
    Ok(sum)
}

/// Integrand of the interaction energy at one frequency:
/// -(xi^2/pi) [tr_AB - tr_A - tr_B + tr_0].
pub fn energy_integrand_1d(grid: &FdGrid, xi: f64) -> Result<f64> {
    let ab = weighted_trace(grid, xi)?;
    let a = weighted_trace(&grid.with_bodies(&[0])?, xi)?;
    let b = weighted_trace(&grid.with_bodies(&[1])?, xi)?;
    let vac = weighted_trace(&grid.empty_like()?, xi)?;
    Ok(-xi * xi / PI * ((ab - a) - (b - vac)))
}

/// Energy of the two bodies on `grid` relative to infinite separation.
pub fn casimir_energy_1d(grid: &FdGrid, rule: &FrequencyRule) -> Result<EnergyResult> {
    if grid.spec.dim != 1 || grid.bodies.len() != 2 {
        return Err(CasimirError::config("casimir_energy_1d needs a 1d grid with exactly two bodies"));
    }
    if rule.nodes.iter().any(|&x| !(x > 0.0)) {
        return Err(CasimirError::config("finite-difference energies need a zero-temperature rule (all xi > 0)"));
    }
    let res = rule.integrate(|xi| energy_integrand_1d(grid, xi))?;
    Ok(EnergyResult { energy: res.value, dx: grid.spec.dx, samples: res.samples })
}
