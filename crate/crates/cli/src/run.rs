//! Dispatch a validated scenario to the owning solver.

use std::time::Instant;

use casimir_core::fd::{
    casimir_energy_1d, circle_pair_grid, pair_force_2d, richardson_extrapolate, richardson_force, stress_force_2d,
    two_body_grid_1d, Body, StressSurface, Stretch, VacuumCache,
};
use casimir_core::lifshitz::{self, lifshitz_pressure, perfect_metal_pressure, PerfectMetalOptions, PlateOptions, PlateSystem};
use casimir_core::quadrature::{FrequencyRule, IntegrandSample, RuleKind, RuleSpec};
use casimir_core::scattering::{self, convergence_sweep, Dim, PartialWaveCutoff, TwoBodyGeometry};
use casimir_core::units;

use crate::config::{Geometry, Observable, PressureMethod, Scenario};
use crate::error::CliError;
use crate::report::{ConvergenceRow, Quantity, RunReport, Series};

/// Matsubara ladders for spectral runs reach xi_max * gap = this.
const MATSUBARA_REACH: f64 = 20.0;

struct Outcome {
    quantity: Quantity,
    value: f64,
    error: f64,
    method: String,
    details: Vec<(String, f64)>,
    series: Vec<Series>,
    convergence: Vec<ConvergenceRow>,
    map: Option<lifshitz::ContourGrid>,
    warnings: Vec<String>,
}

impl Outcome {
    fn new(quantity: Quantity, value: f64, error: f64, method: String) -> Self {
        Outcome {
            quantity,
            value,
            error,
            method,
            details: Vec::new(),
            series: Vec::new(),
            convergence: Vec::new(),
            map: None,
            warnings: Vec::new(),
        }
    }
}

/// The quantity a scenario reports, known before running it.
pub fn quantity_of(s: &Scenario) -> Quantity {
    match &s.config.geometry {
        Geometry::Plates { .. } | Geometry::IntegrandMap { .. } => Quantity::Pressure,
        Geometry::Mirrors1d { .. } => Quantity::Energy,
        Geometry::Cylinders2d { .. } => Quantity::Force,
        Geometry::Cylinders2dSpectral { .. } => match s.config.method.observable.unwrap_or(Observable::Force) {
            Observable::Energy => Quantity::Energy,
            Observable::Force => Quantity::Force,
        },
        Geometry::Spheres3d { .. } => match s.config.method.observable.unwrap_or(Observable::Energy) {
            Observable::Energy => Quantity::Energy,
            Observable::Force => Quantity::Force,
        },
    }
}

pub fn run(s: &Scenario) -> Result<RunReport, CliError> {
    let start = Instant::now();
    let ctx = s.kind();
    let out = match &s.config.geometry {
        Geometry::Plates { .. } => plates(s),
        Geometry::Mirrors1d { .. } => mirrors(s),
        Geometry::Cylinders2d { .. } => cylinders_fd(s),
        Geometry::Cylinders2dSpectral { r1, r2, d } => spectral(s, Dim::Two, *r1, *r2, *d),
        Geometry::Spheres3d { r1, r2, d } => spectral(s, Dim::Three, *r1, *r2, *d),
        Geometry::IntegrandMap { separation } => map(s, *separation),
    }
    .map_err(|e| CliError::core(ctx, e))?;
    Ok(RunReport {
        name: s.name.clone(),
        kind: s.kind(),
        echo: s.echo(),
        quantity: out.quantity,
        value: out.value,
        error: out.error,
        method: out.method,
        details: out.details,
        series: out.series,
        convergence: out.convergence,
        map: out.map,
        warnings: out.warnings,
        wall_time: start.elapsed().as_secs_f64(),
    })
}

type Res<T> = casimir_core::error::Result<T>;

/// Zero-temperature rule from the frequency section with per-kind defaults.
fn xi_rule(s: &Scenario, points: usize, scale: f64) -> Res<FrequencyRule> {
    let f = &s.config.frequency;
    FrequencyRule::build(f.rule.unwrap_or(RuleKind::GaussLaguerre), f.points.unwrap_or(points), f.scale.unwrap_or(scale))
}

fn describe(rule: &RuleSpec) -> String {
    match *rule {
        RuleSpec::GaussLaguerre { n, scale } => format!("gauss_laguerre n={n} scale={scale}"),
        RuleSpec::TransformedClenshawCurtis { n, scale } => format!("transformed_clenshaw_curtis n={n} scale={scale}"),
        RuleSpec::Matsubara { kelvin, n_max } => format!("matsubara T={kelvin} K n_max={n_max}"),
    }
}

fn plates(s: &Scenario) -> Res<Outcome> {
    let Geometry::Plates { separation: a, material_1, material_2, gap } = &s.config.geometry else { unreachable!() };
    let a = *a;
    let m = &s.config.method;
    let f = &s.config.frequency;
    if m.pressure == Some(PressureMethod::PerfectMetal) {
        let mut opts = PerfectMetalOptions::default();
        opts.outer_points = f.points.unwrap_or(opts.outer_points);
        opts.inner_points = m.inner_points.unwrap_or(opts.inner_points);
        let r = perfect_metal_pressure(a, opts)?;
        let method = format!(
            "perfect-metal plate integral, gauss_laguerre n={} scale={} x inner transformed_clenshaw_curtis n={}",
            opts.outer_points,
            0.5 / a,
            opts.inner_points
        );
        let mut out = Outcome::new(Quantity::Pressure, r.value, r.error, method);
        out.details.push(("pressure / (pi^2/(240 a^4))".into(), r.value * a.powi(4) / lifshitz::PM_PRESSURE_COEFF));
        out.series.push(Series::new("xi", r.samples));
        return Ok(out);
    }
    let mut sys = PlateSystem::new(s.material(material_1).clone(), s.material(material_2).clone(), a);
    sys.gap = s.material(gap).clone();
    let mut opts = PlateOptions::default();
    opts.inner_points = m.inner_points.unwrap_or(opts.inner_points);
    let rule = if f.temperature > 0.0 {
        sys = sys.with_temperature(f.temperature);
        opts.matsubara_n_max = f.matsubara_terms.unwrap_or(opts.matsubara_n_max);
        // the adaptive Matsubara sum replaces the xi rule
        lifshitz::default_plate_rule(a)?
    } else {
        xi_rule(s, 60, 0.5 / a)?
    };
    let r = lifshitz_pressure(&sys, &rule, opts)?;
    let method = if f.temperature > 0.0 {
        format!("lifshitz, adaptive matsubara sum T={} K ({} terms)", f.temperature, r.samples.len())
    } else {
        format!("lifshitz, {}", describe(&rule.spec))
    };
    let mut out = Outcome::new(Quantity::Pressure, r.value, r.error, method);
    out.details.push(("pressure / (pi^2/(240 a^4))".into(), r.value * a.powi(4) / lifshitz::PM_PRESSURE_COEFF));
    if f.temperature > 0.0 {
        out.details.push(("thermal wavelength [um]".into(), units::thermal_wavelength(f.temperature)));
    }
    out.series.push(Series::new(if f.temperature > 0.0 { "matsubara" } else { "xi" }, r.samples));
    out.warnings = r.warnings;
    Ok(out)
}

/// Spacings dx, dx/2, ... for the requested number of levels.
fn spacings(dx: f64, levels: usize) -> Vec<f64> {
    (0..levels).map(|k| dx / f64::powi(2.0, k as i32)).collect()
}

fn stretch(s: &Scenario, cells: usize) -> Option<Stretch> {
    let m = &s.config.method;
    let strength = m.stretch_strength.unwrap_or(8.0);
    let cells = m.stretch_cells.unwrap_or(cells);
    (strength > 0.0 && cells > 0).then_some(Stretch { cells, strength })
}

/// Richardson value and error from per-level results; a single level is
/// reported as is, without an error estimate.
fn combine(levels: &[(f64, f64)], order: u32) -> Res<(f64, f64)> {
    if levels.len() == 1 {
        return Ok((levels[0].1, f64::NAN));
    }
    let e = richardson_extrapolate(levels, order)?;
    Ok((e.value, e.error))
}

fn mirrors(s: &Scenario) -> Res<Outcome> {
    let Geometry::Mirrors1d { bodies } = &s.config.geometry else { unreachable!() };
    let m = &s.config.method;
    let gap = bodies[1].shape.bbox().0[0] - bodies[0].shape.bbox().1[0];
    let dx = m.dx.unwrap_or(gap / 40.0);
    let levels = spacings(dx, m.levels.unwrap_or(2));
    let order = m.richardson_order.unwrap_or(2);
    let margin = m.margin.unwrap_or(0.5 * gap);
    let rule = xi_rule(s, 40, 0.5 / gap)?;
    let mut out = Outcome::new(Quantity::Energy, 0.0, 0.0, String::new());
    let mut pts = Vec::new();
    for &h in &levels {
        let bodies: Vec<Body> =
            bodies.iter().map(|b| Body { shape: b.shape, material: s.material(&b.material).clone() }).collect();
        let grid = two_body_grid_1d(bodies, h, margin, stretch(s, 20))?;
        let e = casimir_energy_1d(&grid, &rule)?;
        pts.push((h, e.energy));
        out.convergence.push(ConvergenceRow { parameter: "dx", value: h, result: e.energy, error: f64::NAN });
        out.series.push(Series::new(format!("dx={h}"), e.samples));
    }
    let (value, error) = combine(&pts, order)?;
    out.value = value;
    out.error = error;
    if pts.len() > 1 {
        fill_level_errors(&mut out.convergence, value);
    }
    out.method = format!(
        "finite-difference field energy, dx = {}{}, {}",
        join(&levels),
        if levels.len() > 1 { format!(", Richardson order {order}") } else { String::new() },
        describe(&rule.spec)
    );
    out.details.push(("gap [um]".into(), gap));
    Ok(out)
}

fn fill_level_errors(rows: &mut [ConvergenceRow], best: f64) {
    for r in rows {
        r.error = (r.result - best).abs();
    }
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

fn cylinders_fd(s: &Scenario) -> Res<Outcome> {
    let Geometry::Cylinders2d { r1, r2, d } = s.config.geometry else { unreachable!() };
    let m = &s.config.method;
    let gap = d - r1 - r2;
    let dx = m.dx.unwrap_or(r1.min(r2) / 8.0);
    let levels = spacings(dx, m.levels.unwrap_or(2));
    let order = m.richardson_order.unwrap_or(2);
    let margin = m.margin.unwrap_or(0.5 * gap);
    let clearance = m.clearance.unwrap_or(0.25 * gap);
    let isolated = m.subtract_isolated.unwrap_or(true);
    let rule = xi_rule(s, 16, 0.5 / gap)?;
    let cache = VacuumCache::new();
    let mut out = Outcome::new(Quantity::Force, 0.0, 0.0, String::new());
    let mut results = Vec::new();
    for &h in &levels {
        let grid = circle_pair_grid(r1, r2, d, h, margin, stretch(s, 16))?;
        let surface = StressSurface::enclosing(&grid, 1, clearance)?;
        let r = if isolated {
            let pf = pair_force_2d(&grid, 1, surface, &rule, &cache)?;
            out.details.push((format!("raw force at dx={h}"), pf.raw.force[0]));
            pf.corrected
        } else {
            stress_force_2d(&grid, surface, &rule)?
        };
        out.details.push((format!("transverse force at dx={h}"), r.force[1]));
        out.convergence.push(ConvergenceRow { parameter: "dx", value: h, result: r.force[0], error: f64::NAN });
        let samples = r.samples.iter().map(|p| IntegrandSample { xi: p.xi, value: p.integrand[0], weight: p.weight }).collect();
        out.series.push(Series::new(format!("dx={h}"), samples));
        results.push(r);
    }
    if results.len() > 1 {
        let e = richardson_force(&results, order)?;
        out.value = e.force[0];
        out.error = e.error[0];
        fill_level_errors(&mut out.convergence, e.force[0]);
    } else {
        out.value = results[0].force[0];
        out.error = f64::NAN;
    }
    out.method = format!(
        "finite-difference stress tensor{}, dx = {}{}, clearance {clearance}, {}",
        if isolated { " with isolated-body subtraction" } else { "" },
        join(&levels),
        if levels.len() > 1 { format!(", Richardson order {order}") } else { String::new() },
        describe(&rule.spec)
    );
    Ok(out)
}

fn spectral_rule(s: &Scenario, geom: &TwoBodyGeometry) -> Res<FrequencyRule> {
    let f = &s.config.frequency;
    if f.temperature > 0.0 {
        let n_max = f.matsubara_terms.unwrap_or_else(|| {
            (MATSUBARA_REACH / (geom.gap() * units::matsubara_spacing(f.temperature))).ceil().max(4.0) as usize
        });
        return FrequencyRule::matsubara(f.temperature, n_max);
    }
    if f.rule.is_none() && f.points.is_none() && f.scale.is_none() {
        return scattering::default_spectral_rule(geom);
    }
    xi_rule(s, 40, 0.5 / geom.gap())
}

fn spectral(s: &Scenario, dim: Dim, r1: f64, r2: f64, d: f64) -> Res<Outcome> {
    let geom = TwoBodyGeometry::new(dim, r1, r2, d)?;
    let m = &s.config.method;
    let cutoff = match m.l_max {
        Some(l) => PartialWaveCutoff::new(l)?,
        None => PartialWaveCutoff::default_for(&geom),
    };
    let rule = spectral_rule(s, &geom)?;
    let quantity = quantity_of(s);
    let r = match quantity {
        Quantity::Force => scattering::force(&geom, cutoff, &rule)?,
        _ => scattering::energy(&geom, cutoff, &rule)?,
    };
    let basis = match dim {
        Dim::Two => "cylindrical",
        Dim::Three => "spherical",
    };
    let method = format!("scattering log-determinant, {basis} partial waves to order {}, {}", cutoff.max_order, describe(&rule.spec));
    let mut out = Outcome::new(quantity, r.value, f64::NAN, method);
    if let Some(coarse) = rule.coarser() {
        let c = match quantity {
            Quantity::Force => scattering::force(&geom, cutoff, &coarse)?,
            _ => scattering::energy(&geom, cutoff, &coarse)?,
        };
        out.error = (r.value - c.value).abs();
    }
    out.series.push(Series::new(format!("l_max={}", cutoff.max_order), r.samples));
    if let Some(orders) = &m.l_max_sweep {
        for p in convergence_sweep(&geom, orders, &rule)? {
            out.convergence.push(ConvergenceRow { parameter: "l_max", value: p.max_order as f64, result: p.energy, error: p.rel_error });
        }
        if quantity == Quantity::Force {
            out.warnings.push("the l_max_sweep table lists energies, not forces".into());
        }
    }
    out.details.push(("gap [um]".into(), geom.gap()));
    Ok(out)
}

fn map(s: &Scenario, a: f64) -> Res<Outcome> {
    let m = &s.config.method;
    let scale = 1.0 / a;
    let grid = lifshitz::GridSpec {
        re_min: m.re_min.unwrap_or(-10.0 * scale),
        re_max: m.re_max.unwrap_or(10.0 * scale),
        im_min: m.im_min.unwrap_or(0.05 * scale),
        im_max: m.im_max.unwrap_or(10.0 * scale),
        n_re: m.n_re.unwrap_or(121),
        n_im: m.n_im.unwrap_or(81),
    };
    let map = lifshitz::integrand_map(a, grid)?;
    let failed = map.values.iter().filter(|v| v.is_none()).count();
    let method = format!(
        "plate integrand on Re omega in [{}, {}] x Im omega in [{}, {}], {} x {} nodes",
        grid.re_min, grid.re_max, grid.im_min, grid.im_max, grid.n_re, grid.n_im
    );
    let mut out = Outcome::new(Quantity::Pressure, f64::NAN, f64::NAN, method);
    out.details.push(("failed nodes".into(), failed as f64));
    if failed > 0 {
        out.warnings.push(format!("{failed} nodes could not be evaluated and are left blank"));
    }
    out.map = Some(map);
    Ok(out)
}
