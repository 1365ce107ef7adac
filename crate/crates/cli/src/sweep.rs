//! One run per parameter value, collected into a table.

use rayon::prelude::*;

use crate::config::{Config, Geometry, Scenario};
use crate::error::CliError;
use crate::report::{ConvergenceRow, Quantity, RunReport};
use crate::run::{quantity_of, run};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Param {
    /// Plate separation, or the gap between the 1d bodies.
    A,
    /// Centre distance of two cylinders or spheres.
    D,
    /// Grid spacing (single level, no Richardson step).
    Dx,
    LMax,
    /// Temperature in kelvin.
    T,
    /// Frequency points.
    N,
}

pub const SWEEPABLE: &str = "a, d, dx, l_max, T, n";

impl Param {
    pub fn parse(name: &str) -> Result<Self, CliError> {
        Ok(match name {
            "a" => Param::A,
            "d" => Param::D,
            "dx" => Param::Dx,
            "l_max" => Param::LMax,
            "T" | "t" => Param::T,
            "n" => Param::N,
            _ => return Err(CliError::Config(format!("unsweepable parameter '{name}' (sweepable: {SWEEPABLE})"))),
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Param::A => "a",
            Param::D => "d",
            Param::Dx => "dx",
            Param::LMax => "l_max",
            Param::T => "T",
            Param::N => "n",
        }
    }

    fn is_count(self) -> bool {
        matches!(self, Param::LMax | Param::N)
    }
}

/// Copy of `config` with the parameter set to `v`.
pub fn apply(config: &Config, p: Param, v: f64) -> Result<Config, CliError> {
    let mut c = config.clone();
    let kind = c.geometry.kind();
    let not_here = || CliError::Config(format!("parameter '{}' cannot be swept for {kind} scenarios", p.name()));
    if p.is_count() && !(v >= 1.0 && v.fract() == 0.0) {
        return Err(CliError::Config(format!("parameter '{}' takes positive integers (got {v})", p.name())));
    }
    match p {
        Param::A => match &mut c.geometry {
            Geometry::Plates { separation, .. } | Geometry::IntegrandMap { separation } => *separation = v,
            Geometry::Mirrors1d { bodies } => {
                let gap = bodies[1].shape.bbox().0[0] - bodies[0].shape.bbox().1[0];
                bodies[1].shape = shifted(bodies[1].shape, v - gap);
            }
            _ => return Err(not_here()),
        },
        Param::D => match &mut c.geometry {
            Geometry::Cylinders2d { d, .. } | Geometry::Cylinders2dSpectral { d, .. } | Geometry::Spheres3d { d, .. } => *d = v,
            _ => return Err(not_here()),
        },
        Param::Dx => match c.geometry {
            Geometry::Mirrors1d { .. } | Geometry::Cylinders2d { .. } => {
                c.method.dx = Some(v);
                c.method.levels = Some(1);
            }
            _ => return Err(not_here()),
        },
        Param::LMax => match c.geometry {
            Geometry::Cylinders2dSpectral { .. } | Geometry::Spheres3d { .. } => c.method.l_max = Some(v as usize),
            _ => return Err(not_here()),
        },
        Param::T => match c.geometry {
            Geometry::Plates { .. } | Geometry::Cylinders2dSpectral { .. } | Geometry::Spheres3d { .. } => {
                c.frequency.temperature = v
            }
            _ => return Err(not_here()),
        },
        Param::N => match c.geometry {
            Geometry::IntegrandMap { .. } => return Err(not_here()),
            _ => c.frequency.points = Some(v as usize),
        },
    }
    Ok(c)
}

fn shifted(shape: casimir_core::fd::Shape, by: f64) -> casimir_core::fd::Shape {
    use casimir_core::fd::Shape;
    match shape {
        Shape::Point { x } => Shape::Point { x: x + by },
        Shape::Interval { x0, x1 } => Shape::Interval { x0: x0 + by, x1: x1 + by },
        other => other,
    }
}

pub struct Sweep {
    pub param: Param,
    pub quantity: Quantity,
    pub rows: Vec<ConvergenceRow>,
    pub reports: Vec<RunReport>,
}

/// Validate every point first, then run them in parallel.
pub fn sweep(base: &Scenario, p: Param, values: &[f64]) -> Result<Sweep, CliError> {
    if values.is_empty() {
        return Err(CliError::Config("sweep needs at least one value".into()));
    }
    if matches!(base.config.geometry, Geometry::IntegrandMap { .. }) {
        return Err(CliError::Config("integrand_map scenarios have no scalar result to sweep".into()));
    }
    let scenarios: Vec<Scenario> = values
        .iter()
        .map(|&v| {
            let c = apply(&base.config, p, v)?;
            Scenario::from_config(c, base.name.clone(), base.base_dir.clone())
                .map_err(|e| CliError::Config(format!("{} = {v}: {e}", p.name())))
        })
        .collect::<Result<_, _>>()?;
    let reports: Vec<RunReport> = scenarios.par_iter().map(run).collect::<Result<_, _>>()?;
    let rows = values
        .iter()
        .zip(&reports)
        .map(|(&v, r)| ConvergenceRow { parameter: p.name(), value: v, result: r.value, error: r.error })
        .collect();
    Ok(Sweep { param: p, quantity: quantity_of(base), rows, reports })
}
