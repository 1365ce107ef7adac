//! Acceptance report: one PASS/FAIL line per criterion, non-zero exit if any fails.

mod support;

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use casimir_core::fd::*;
use casimir_core::lifshitz::{
    default_plate_rule, lifshitz_pressure, mode_sum_1d, perfect_metal_pressure, CutoffPolicy, PerfectMetalOptions,
    PlateOptions, PlateSystem,
};
use casimir_core::materials::MaterialModel;
use casimir_core::quadrature::{gauss_legendre, FrequencyRule};
use casimir_core::scattering::{self, convergence_sweep, log_error_slope, Dim, PartialWaveCutoff, TwoBodyGeometry};
use casimir_core::units;
use num_complex::Complex64;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

/// Composite Gauss-Legendre nodes and weights on [lo, hi].
fn composite(lo: f64, hi: f64, panels: usize, order: usize) -> Vec<(f64, f64)> {
    let (x, w) = gauss_legendre(order);
    let h = (hi - lo) / panels as f64;
    (0..panels)
        .flat_map(|k| {
            let mid = lo + (k as f64 + 0.5) * h;
            x.iter().zip(&w).map(move |(&x, &w)| (mid + 0.5 * h * x, 0.5 * h * w)).collect::<Vec<_>>()
        })
        .collect()
}

/// Im of the plate integrand p^2 w^3 / (e^{2 i p w a} - 1) / pi^2 at w = i xi,
/// less its separation-independent bulk part xi^3 p^2 / pi^2.
fn printed_integrand(xi: f64, p: f64, a: f64) -> f64 {
    let w = Complex64::new(0.0, xi);
    let f = p * p * w.powi(3) / ((Complex64::new(0.0, 2.0 * p * a) * w).exp() - 1.0);
    (f.im - xi.powi(3) * p * p) / (PI * PI)
}

/// Brute-force tensor quadrature of the Wick-rotated double integral over
/// xi > 0, p > 1, mapped by xi = k t, p = 1/t (Jacobian 1/t) onto
/// k in [0, 40/a], t in (0, 1].
fn plate_oracle(a: f64) -> f64 {
    let ks = composite(0.0, 40.0 / a, 80, 16);
    let ts = composite(0.0, 1.0, 4, 16);
    let mut sum = 0.0;
    for &(k, wk) in &ks {
        for &(t, wt) in &ts {
            sum += wk * wt * printed_integrand(k * t, 1.0 / t, a) / t;
        }
    }
    sum
}

fn criterion_1() -> Verdict {
    let mut pass = true;
    let mut parts = Vec::new();
    for a in [0.5, 1.0, 2.0] {
        let oracle = plate_oracle(a);
        let code = perfect_metal_pressure(a, PerfectMetalOptions::default()).expect("perfect-metal pressure").value;
        let d = rel(code, oracle);
        let with_pi = oracle * a.powi(4) / (PI * PI / 240.0);
        let printed = oracle * a.powi(4) / (1.0 / 240.0);
        pass &= d <= 1e-6 && (with_pi - 1.0).abs() <= 1e-6;
        parts.push(format!("a = {a}: rel diff {d:.1e}, oracle / (pi^2/240a^4) = {with_pi:.9}, oracle / (1/240a^4) = {printed:.6}"));
    }
    parts.push("the integrand yields pi^2/(240 a^4)".into());
    verdict(pass, parts.join("; "))
}

fn criterion_2() -> Verdict {
    let a = 1.0;
    let rule = default_plate_rule(a).expect("rule");
    let pm = perfect_metal_pressure(a, PerfectMetalOptions::default()).expect("perfect-metal pressure").value;
    let p = |eps: f64| {
        let m = MaterialModel::Constant { eps };
        lifshitz_pressure(&PlateSystem::new(m.clone(), m, a), &rule, PlateOptions::default()).expect("pressure").value
    };
    let zero = p(1.0);
    let chain: Vec<f64> = [1e1, 1e2, 1e3, 1e4].iter().map(|&e| p(e)).collect();
    let monotone = chain.windows(2).all(|w| w[0] < w[1]) && chain[3] < pm;
    let last = chain[3] / pm;
    let within = (last - 1.0).abs() <= 0.05;
    let ratios: Vec<String> = chain.iter().map(|v| format!("{:.4}", v / pm)).collect();
    verdict(
        zero == 0.0 && monotone && within,
        format!(
            "P(eps)/P_pm for eps = 10..1e4: [{}] (monotone: {monotone}); eps = 1e4 within 5%: {within} ({:.2}% short); eps = 1 gives {zero}",
            ratios.join(", "),
            100.0 * (1.0 - last)
        ),
    )
}

fn criterion_3() -> Verdict {
    let a = 1.0;
    let exact = -PI / (24.0 * a);
    let rule = FrequencyRule::gauss_laguerre(40, 0.5 / a).expect("rule");
    let energy = |dx: f64| {
        let bodies = vec![Body::mirror(Shape::Point { x: 0.0 }), Body::mirror(Shape::Point { x: a })];
        let g = two_body_grid_1d(bodies, dx, 0.5 * a, Some(Stretch { cells: 20, strength: 8.0 })).expect("grid");
        casimir_energy_1d(&g, &rule).expect("energy").energy
    };
    let dx = a / 40.0;
    let samples = [(dx, energy(dx)), (dx / 2.0, energy(dx / 2.0))];
    let fd = richardson_extrapolate(&samples, 2).expect("richardson").value;
    let modes = mode_sum_1d(a, CutoffPolicy::Exponential, 4000).expect("mode sum").value;
    let (d_cross, d_fd, d_modes) = (rel(fd, modes), rel(fd, exact), rel(modes, exact));
    verdict(
        d_cross <= 5e-3 && d_fd <= 5e-3 && d_modes <= 5e-3,
        format!(
            "fd {fd:.9} vs mode sum {modes:.9}: {d_cross:.1e}; vs -pi/24a: fd {d_fd:.1e}, mode sum {d_modes:.1e} (tolerance 5e-3)"
        ),
    )
}

fn criterion_4() -> Verdict {
    let (r, d) = (1.0, 3.0);
    let rule = FrequencyRule::gauss_laguerre(16, 0.5).expect("rule");
    let geom = TwoBodyGeometry::new(Dim::Two, r, r, d).expect("geometry");
    let cutoff = PartialWaveCutoff::new(15).expect("cutoff");
    let spectral = scattering::force(&geom, cutoff, &rule).expect("spectral force").value;
    let cache = VacuumCache::new();
    let mut results = Vec::new();
    let mut largest = [0usize; 2];
    for dx in [1.0 / 16.0, 1.0 / 32.0] {
        let g = circle_pair_grid(r, r, d, dx, 0.5, Some(Stretch { cells: 16, strength: 8.0 })).expect("grid");
        largest = [largest[0].max(g.spec.extents[0]), largest[1].max(g.spec.extents[1])];
        let s = StressSurface::enclosing(&g, 1, 0.25).expect("surface");
        results.push(pair_force_2d(&g, 1, s, &rule, &cache).expect("fd force").corrected);
    }
    let fd = richardson_force(&results, 2).expect("richardson").force[0];
    let cross = rel(fd, spectral);

    // trace force against a central difference of the log-det energy
    let fine = FrequencyRule::gauss_laguerre(30, 0.5).expect("rule");
    let trace = scattering::force(&geom, cutoff, &fine).expect("force").value;
    let h = 1e-4 * d;
    let up = scattering::energy(&geom.with_separation(d + h), cutoff, &fine).expect("energy").value;
    let dn = scattering::energy(&geom.with_separation(d - h), cutoff, &fine).expect("energy").value;
    let central = -(up - dn) / (2.0 * h);
    let selfc = rel(trace, central);
    let fits = largest[0] <= 400 && largest[1] <= 400 && cutoff.max_order <= 20;
    verdict(
        cross <= 0.02 && selfc <= 1e-4 && fits,
        format!(
            "fd {fd:.9} vs spectral {spectral:.9}: {cross:.1e} (tolerance 2e-2); trace {trace:.9} vs central difference {central:.9}: {selfc:.1e} (tolerance 1e-4); largest grid {}x{}, m_max {}",
            largest[0], largest[1], cutoff.max_order
        ),
    )
}

fn criterion_5() -> Verdict {
    let r = 1.0;
    let orders: Vec<usize> = (1..=12).chain([30]).collect();
    let mut slopes = Vec::new();
    for a_over_r in [0.25, 1.0, 2.0] {
        let g = TwoBodyGeometry::new(Dim::Three, r, r, 2.0 * r + a_over_r * r).expect("geometry");
        let rule = FrequencyRule::gauss_laguerre(30, 1.0 / (2.0 * g.gap())).expect("rule");
        let pts = convergence_sweep(&g, &orders, &rule).expect("sweep");
        slopes.push(log_error_slope(&pts, 1e-13).unwrap_or(f64::NAN));
    }
    let negative = slopes.iter().all(|&s| s < 0.0);
    let slower = slopes[0].abs() < slopes[2].abs();
    verdict(
        negative && slower,
        format!(
            "ln(rel error) slopes per order at a/R = 0.25, 1, 2: {:.3}, {:.3}, {:.3}; all negative: {negative}; |slope(0.25)| < |slope(2)|: {slower}",
            slopes[0], slopes[1], slopes[2]
        ),
    )
}

fn criterion_6() -> Verdict {
    let p0 = support::drude_plates_at_spacing(0.0);
    let pts: Vec<(f64, f64)> =
        [0.1, 0.05, 0.025, 0.0125].iter().map(|&h| (h, (support::drude_plates_at_spacing(h) - p0).abs())).collect();
    let order = support::log_log_slope(&pts);
    let order_ok = (order - 2.0).abs() <= 0.2;

    let kelvin = 300.0;
    let lambda = units::thermal_wavelength(kelvin);
    let opts = PlateOptions { inner_points: 128, tail_tol: 1e-14, ..PlateOptions::default() };
    let exact = PerfectMetalOptions { tol: 1e-12, ..PerfectMetalOptions::default() };
    let mut corr = Vec::new();
    for a in [0.1, 0.3, 1.0] {
        let sys = PlateSystem::perfect_metals(a).with_temperature(kelvin);
        let rule = FrequencyRule::matsubara(kelvin, 1).expect("rule");
        let pt = lifshitz_pressure(&sys, &rule, opts).expect("thermal pressure").value;
        let p = perfect_metal_pressure(a, exact).expect("pressure").value;
        corr.push((a, ((pt - p) / p).abs()));
    }
    let growing = corr.windows(2).all(|w| w[0].1 < w[1].1);
    let bounded = corr.iter().all(|&(a, c)| c <= (a / lambda).powi(2));
    let exponent = support::log_log_slope(&corr);
    let listed: Vec<String> =
        corr.iter().map(|(a, c)| format!("{a}: {c:.2e} (bound {:.2e})", (a / lambda).powi(2))).collect();
    verdict(
        order_ok && growing && bounded,
        format!(
            "Drude plates: fitted order {order:.3} (2 +- 0.2); perfect metals at 300 K (lambda_T = {lambda:.2} um), |dP/P| at a = {}; growing: {growing}; within (a/lambda_T)^2: {bounded}; fitted exponent {exponent:.2}",
            listed.join(", ")
        ),
    )
}

fn criterion_7() -> Verdict {
    let mut failed = Vec::new();
    let mut notes = Vec::new();
    let start = Instant::now();
    for (name, suite) in support::SUITES {
        let t = Instant::now();
        match suite() {
            Ok(note) => notes.push(format!("{name}: {note} ({:.1} s)", t.elapsed().as_secs_f64())),
            Err(e) => failed.push(format!("{name}: {e}")),
        }
    }
    let total = start.elapsed().as_secs_f64();
    let pass = failed.is_empty() && total < 600.0;
    let detail = if failed.is_empty() {
        format!("{} suites in {total:.1} s; {}", notes.len(), notes.join("; "))
    } else {
        format!("failed: {}", failed.join("; "))
    };
    verdict(pass, detail)
}

fn main() -> ExitCode {
    let criteria: [(&str, f64, fn() -> Verdict); 7] = [
        ("parallel-plate closed form", 5.0, criterion_1),
        ("Lifshitz limit chain", 10.0, criterion_2),
        ("1d cross-method", 30.0, criterion_3),
        ("2d cylinder cross-method", 300.0, criterion_4),
        ("sphere partial-wave convergence", f64::INFINITY, criterion_5),
        ("temperature", f64::INFINITY, criterion_6),
        ("invariant suites", 600.0, criterion_7),
    ];
    let mut failures = 0;
    for (i, (title, budget, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let v = run();
        let secs = t.elapsed().as_secs_f64();
        let in_time = secs < *budget;
        let pass = v.pass && in_time;
        if !pass {
            failures += 1;
        }
        let budget_note = if budget.is_finite() { format!(", budget {budget} s") } else { String::new() };
        println!(
            "criterion {} {}: {title}: {} ({secs:.2} s{budget_note}{})",
            i + 1,
            if pass { "PASS" } else { "FAIL" },
            v.detail,
            if in_time { "" } else { ", over budget" }
        );
    }
    println!("{} of {} criteria pass", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
