//! Parallel plates: the perfect-metal integral, the Lifshitz pressure for
//! dispersive half-spaces, a regularized 1d mode sum and complex-plane
//! integrand maps.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{CasimirError, Result};
use crate::materials::MaterialModel;
use crate::quadrature::{self, FrequencyRule, IntegrandSample};

/// pi^2 / 240: perfect-metal pressure times a^4.
pub const PM_PRESSURE_COEFF: f64 = PI * PI / 240.0;

/// Two half-spaces across a gap.
#[derive(Debug, Clone, PartialEq)]
pub struct PlateSystem {
    pub half_space_1: MaterialModel,
    pub half_space_2: MaterialModel,
    pub gap: MaterialModel,
    pub separation: f64,
    pub kelvin: f64,
}

impl PlateSystem {
    pub fn new(m1: MaterialModel, m2: MaterialModel, separation: f64) -> Self {
        PlateSystem { half_space_1: m1, half_space_2: m2, gap: MaterialModel::Vacuum, separation, kelvin: 0.0 }
    }

    pub fn perfect_metals(separation: f64) -> Self {
        Self::new(MaterialModel::PerfectMetal, MaterialModel::PerfectMetal, separation)
    }

    pub fn with_temperature(mut self, kelvin: f64) -> Self {
        self.kelvin = kelvin;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.separation > 0.0) || !self.separation.is_finite() {
            return Err(CasimirError::config(format!("separation must be positive (got {})", self.separation)));
        }
        if !(self.kelvin >= 0.0) || !self.kelvin.is_finite() {
            return Err(CasimirError::config(format!("temperature must be >= 0 (got {})", self.kelvin)));
        }
        if self.gap.is_perfect_metal() {
            return Err(CasimirError::config("gap material cannot be perfect_metal"));
        }
        Ok(())
    }
}

/// Quadrature controls for plate pressures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlateOptions {
    /// Transformed Clenshaw-Curtis points for the inner momentum integral.
    pub inner_points: usize,
    /// Cap on Matsubara terms when T > 0.
    pub matsubara_n_max: usize,
    /// Relative tail tolerance of the Matsubara sum.
    pub tail_tol: f64,
}

impl Default for PlateOptions {
    fn default() -> Self {
        PlateOptions { inner_points: 64, matsubara_n_max: 200_000, tail_tol: quadrature::MATSUBARA_TAIL_TOL }
    }
}

/// A pressure with its quadrature record. Positive means attractive.
#[derive(Debug, Clone, PartialEq)]
pub struct PressureResult {
    pub value: f64,
    pub error: f64,
    pub samples: Vec<IntegrandSample>,
    pub warnings: Vec<String>,
}

/// Outer and inner node counts for [`perfect_metal_pressure`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerfectMetalOptions {
    pub outer_points: usize,
    pub inner_points: usize,
    /// Relative error above which the result is rejected.
    pub tol: f64,
}

impl Default for PerfectMetalOptions {
    fn default() -> Self {
        PerfectMetalOptions { outer_points: 48, inner_points: 96, tol: 1e-9 }
    }
}

/// xi^3 Int_1^inf p^2 / (e^{2 p xi a} - 1) dp / pi^2, the Wick-rotated
/// plate integrand without its separation-independent bulk term.
pub fn perfect_metal_integrand(xi: f64, a: f64, inner: &FrequencyRule) -> f64 {
    if xi == 0.0 {
        // Limit xi -> 0: Int_0^inf k^2/(e^{2ka}-1) dk / pi^2 = zeta(3)/(4 a^3 pi^2).
        return 1.202_056_903_159_594_2 / (4.0 * a * a * a * PI * PI);
    }
    let rate = 2.0 * xi * a;
    let sum: f64 = inner
        .nodes
        .iter()
        .zip(&inner.weights)
        .map(|(&s, &w)| {
            let p = 1.0 + s / rate;
            w * p * p / (rate * p).exp_m1()
        })
        .sum();
    xi * xi * xi * sum / rate / (PI * PI)
}

/// Attractive pressure between perfect-metal plates at separation a.
///
/// Outer Gauss-Laguerre in xi (scale 1/2a); inner transformed
/// Clenshaw-Curtis in p - 1 (scale 1, rescaled by 1/(2 xi a)).
pub fn perfect_metal_pressure(a: f64, opts: PerfectMetalOptions) -> Result<PressureResult> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(CasimirError::config(format!("separation must be positive (got {a})")));
    }
    let inner = FrequencyRule::clenshaw_curtis(opts.inner_points, 1.0)?;
    let outer = FrequencyRule::gauss_laguerre(opts.outer_points, 1.0 / (2.0 * a))?;
    let res = outer.integrate_with_error(|xi| Ok(perfect_metal_integrand(xi, a, &inner)))?;
    if res.error > opts.tol * res.value.abs() {
        return Err(CasimirError::Truncation {
            what: format!("perfect-metal pressure at a = {a}: outer quadrature"),
            last: res.error,
        });
    }
    Ok(PressureResult { value: res.value, error: res.error, samples: res.samples, warnings: Vec::new() })
}

/// Reflection coefficients (TE, TM) seen from medium 3 at (xi, kappa_3).
fn reflection(m: &Medium, eps3: f64, kappa3: f64, xi: f64) -> Result<(f64, f64)> {
    match *m {
        Medium::Perfect => Ok((-1.0, 1.0)),
        Medium::Eps(eps) => {
            let ki = (kappa3 * kappa3 + (eps - eps3) * xi * xi).sqrt();
            let te = (kappa3 - ki) / (kappa3 + ki);
            let tm = (eps * kappa3 - eps3 * ki) / (eps * kappa3 + eps3 * ki);
            if te.abs() > 1.0 || tm.abs() > 1.0 || !te.is_finite() || !tm.is_finite() {
                return Err(CasimirError::Consistency(format!(
                    "|r| > 1 at xi = {xi}, kappa = {kappa3} (r_TE = {te}, r_TM = {tm})"
                )));
            }
            Ok((te, tm))
        }
    }
}

enum Medium {
    Perfect,
    Eps(f64),
}

fn medium(m: &MaterialModel, xi: f64) -> Result<Medium> {
    if m.is_perfect_metal() {
        Ok(Medium::Perfect)
    } else {
        Ok(Medium::Eps(m.permittivity(xi)?))
    }
}

/// x / (1 - x) for x = r1 r2 e^{-2 kappa a}, accurate as x -> 1.
fn round_trip_term(rr: f64, two_ka: f64) -> f64 {
    let x = rr * (-two_ka).exp();
    let one_minus = if rr == 1.0 { -(-two_ka).exp_m1() } else { 1.0 - x };
    x / one_minus
}

/// Inner integrand of the Lifshitz pressure at fixed xi > 0:
/// (1/2pi^2) Int kappa^2 sum_p x_p/(1 - x_p) dkappa from xi sqrt(eps3).
pub fn lifshitz_integrand(sys: &PlateSystem, xi: f64, inner: &FrequencyRule) -> Result<f64> {
    let m1 = medium(&sys.half_space_1, xi)?;
    let m2 = medium(&sys.half_space_2, xi)?;
    let eps3 = sys.gap.permittivity(xi)?;
    lifshitz_integrand_media(&m1, &m2, eps3, xi, sys.separation, inner)
}

fn lifshitz_integrand_media(
    m1: &Medium,
    m2: &Medium,
    eps3: f64,
    xi: f64,
    a: f64,
    inner: &FrequencyRule,
) -> Result<f64> {
    if let (Medium::Eps(e1), Medium::Eps(e2)) = (m1, m2) {
        if *e1 == eps3 || *e2 == eps3 {
            return Ok(0.0);
        }
    }
    let k0 = xi * eps3.sqrt();
    let scale = 1.0 / (2.0 * a);
    let mut sum = 0.0;
    for (&s, &w) in inner.nodes.iter().zip(&inner.weights) {
        let kappa = k0 + s * scale;
        let (te1, tm1) = reflection(m1, eps3, kappa, xi)?;
        let (te2, tm2) = reflection(m2, eps3, kappa, xi)?;
        let two_ka = 2.0 * kappa * a;
        let terms = round_trip_term(te1 * te2, two_ka) + round_trip_term(tm1 * tm2, two_ka);
        sum += w * kappa * kappa * terms;
    }
    Ok(sum * scale / (2.0 * PI * PI))
}

/// Lifshitz pressure between two half-spaces. Positive means attractive.
///
/// At T = 0 the xi integral uses `rule`; at T > 0 it is replaced by an
/// adaptive Matsubara sum and `rule` is ignored.
pub fn lifshitz_pressure(sys: &PlateSystem, rule: &FrequencyRule, opts: PlateOptions) -> Result<PressureResult> {
    sys.validate()?;
    let inner = FrequencyRule::clenshaw_curtis(opts.inner_points, 1.0)?;
    let a = sys.separation;
    let mut warnings = Vec::new();
    if sys.kelvin > 0.0 {
        let both_pm = sys.half_space_1.is_perfect_metal() && sys.half_space_2.is_perfect_metal();
        let any_pm = sys.half_space_1.is_perfect_metal() || sys.half_space_2.is_perfect_metal();
        if any_pm {
            warnings.push(
                "zero-frequency term uses the Schwinger prescription for perfect metals (r_TE = -1 at xi -> 0+); \
                 the treatment of this term is debated"
                    .to_string(),
            );
        }
        let f = |xi: f64| -> Result<f64> {
            if xi > 0.0 {
                return lifshitz_integrand(sys, xi, &inner);
            }
            if both_pm && sys.gap.is_vacuum() {
                return lifshitz_integrand_media(&Medium::Perfect, &Medium::Perfect, 1.0, 0.0, a, &inner);
            }
            zero_frequency_limit(|x| lifshitz_integrand(sys, x, &inner), a)
        };
        let sum = quadrature::matsubara_sum(sys.kelvin, f, opts.matsubara_n_max, opts.tail_tol)?;
        return Ok(PressureResult { value: sum.value, error: sum.tail, samples: sum.samples, warnings });
    }
    if matches!(rule.spec, quadrature::RuleSpec::Matsubara { .. }) {
        return Err(CasimirError::config("a Matsubara rule needs a plate system with T > 0"));
    }
    let res = rule.integrate_with_error(|xi| lifshitz_integrand(sys, xi, &inner))?;
    Ok(PressureResult { value: res.value, error: res.error, samples: res.samples, warnings })
}

/// f(0+) from samples at xi = 1e-6/a and 2e-6/a, linear Richardson step.
pub fn zero_frequency_limit<F>(f: F, a: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let h = 1e-6 / a;
    Ok(2.0 * f(h)? - f(2.0 * h)?)
}

/// Default zero-temperature rule for plates at separation a.
pub fn default_plate_rule(a: f64) -> Result<FrequencyRule> {
    FrequencyRule::gauss_laguerre(60, 1.0 / (2.0 * a))
}

/// Regularization used by [`mode_sum_1d`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CutoffPolicy {
    /// e^{-omega/Lambda} weights, continuum subtracted, Richardson in 1/Lambda^2.
    Exponential,
    /// Hard cutoff halfway between the last two modes; no extrapolation exists.
    Sharp,
}

/// Regularized mode-sum energy with its extrapolation record.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeSum {
    pub value: f64,
    pub error: f64,
    /// (Lambda, regularized energy) pairs fed to the extrapolation.
    pub levels: Vec<(f64, f64)>,
}

/// sum_{n>=1} (n pi/a)/2 e^{-omega_n/Lambda} minus the continuum a Lambda^2/(2 pi).
pub fn regularized_mode_energy(a: f64, lambda: f64, n_terms: usize) -> f64 {
    let w1 = PI / a;
    let mut s = 0.0;
    for n in (1..=n_terms).rev() {
        let w = n as f64 * w1;
        s += 0.5 * w * (-w / lambda).exp();
    }
    s - a * lambda * lambda / (2.0 * PI)
}

/// sum over modes below omega_c of omega/2, minus the continuum a omega_c^2/(4 pi).
pub fn sharp_partial_sum(a: f64, omega_c: f64) -> f64 {
    let w1 = PI / a;
    let n = (omega_c / w1).floor() as usize;
    let s: f64 = (1..=n).map(|k| 0.5 * k as f64 * w1).sum();
    s - a * omega_c * omega_c / (4.0 * PI)
}

/// Interaction energy of two perfect mirrors in 1d from omega_n = n pi / a.
pub fn mode_sum_1d(a: f64, policy: CutoffPolicy, n_terms: usize) -> Result<ModeSum> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(CasimirError::config(format!("separation must be positive (got {a})")));
    }
    if n_terms < 10 {
        return Err(CasimirError::config(format!("mode sum needs at least 10 terms (got {n_terms})")));
    }
    match policy {
        CutoffPolicy::Sharp => {
            let w1 = PI / a;
            let n = n_terms as f64;
            let v1 = sharp_partial_sum(a, (n - 0.5) * w1);
            let v2 = sharp_partial_sum(a, (n + 0.5) * w1);
            let v3 = sharp_partial_sum(a, n * w1);
            let spread = (v1 - v3).abs().max((v2 - v3).abs());
            if spread > 1e-6 * v3.abs() {
                return Err(CasimirError::Truncation {
                    what: "sharp-cutoff mode sum oscillates with the cutoff; no limit to extrapolate".into(),
                    last: spread,
                });
            }
            Ok(ModeSum { value: v3, error: spread, levels: vec![(n * w1, v3)] })
        }
        CutoffPolicy::Exponential => {
            // Keep the dropped tail below e^-40 at the largest Lambda.
            let lambda_max = n_terms as f64 * PI / (40.0 * a);
            let levels: Vec<(f64, f64)> = (0..4)
                .map(|k| {
                    let lam = lambda_max / f64::powi(2.0, 3 - k);
                    (lam, regularized_mode_energy(a, lam, n_terms))
                })
                .collect();
            // E(Lambda) = E + c1/Lambda^2 + c2/Lambda^4 + ...
            let mut table: Vec<f64> = levels.iter().map(|l| l.1).collect();
            let mut last_correction = f64::INFINITY;
            for order in 1..table.len() {
                let factor = 4f64.powi(order as i32);
                let next: Vec<f64> =
                    table.windows(2).map(|w| w[1] + (w[1] - w[0]) / (factor - 1.0)).collect();
                last_correction = (next[next.len() - 1] - table[table.len() - 1]).abs();
                table = next;
            }
            let value = table[0];
            let tol = 1e-8 * value.abs();
            if last_correction > 1e3 * tol.max(f64::EPSILON) {
                return Err(CasimirError::Truncation {
                    what: format!("mode-sum extrapolation with {n_terms} terms"),
                    last: last_correction,
                });
            }
            Ok(ModeSum { value, error: last_correction, levels })
        }
    }
}

/// Rectangular complex-frequency grid for integrand maps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
    pub n_re: usize,
    pub n_im: usize,
}

/// f(omega) samples, row-major with one row per imaginary-axis value.
#[derive(Debug, Clone, PartialEq)]
pub struct ContourGrid {
    pub re: Vec<f64>,
    pub im: Vec<f64>,
    /// None marks a node where evaluation failed.
    pub values: Vec<Option<Complex64>>,
}

impl ContourGrid {
    pub fn at(&self, i_im: usize, i_re: usize) -> Option<Complex64> {
        self.values[i_im * self.re.len() + i_re]
    }
}

fn axis(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
}

/// -(omega^3/pi^2) Int_1^inf p^2 q/(1-q) dp with q = e^{2 i p omega a}.
///
/// This is the plate integrand with the separation-independent bulk term
/// removed; Im f(i xi) is the perfect-metal pressure integrand.
pub fn plate_integrand_complex(omega: Complex64, a: f64) -> Option<Complex64> {
    if !(omega.im > 0.0) {
        return None;
    }
    let decay = 2.0 * a * omega.im;
    let p_max = 1.0 + 40.0 / decay;
    // Panels short against both the decay length and the oscillation period.
    let width = (0.5 / decay).min(1.0 / (2.0 * a * omega.re.abs()).max(1e-300)).min(1.0);
    let panels = ((p_max - 1.0) / width).ceil().max(1.0) as usize;
    let h = (p_max - 1.0) / panels as f64;
    let (gx, gw) = gl8();
    let two_i_a_omega = Complex64::new(0.0, 2.0 * a) * omega;
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..panels {
        let p0 = 1.0 + k as f64 * h;
        for (x, w) in gx.iter().zip(gw.iter()) {
            let p = p0 + 0.5 * h * (x + 1.0);
            let q = (two_i_a_omega * p).exp();
            acc += q / (1.0 - q) * (0.5 * h * w * p * p);
        }
    }
    let v = -(omega * omega * omega) * acc / (PI * PI);
    if v.re.is_finite() && v.im.is_finite() {
        Some(v)
    } else {
        None
    }
}

fn gl8() -> ([f64; 8], [f64; 8]) {
    let (x, w) = quadrature::gauss_legendre(8);
    let mut gx = [0.0; 8];
    let mut gw = [0.0; 8];
    gx.copy_from_slice(&x);
    gw.copy_from_slice(&w);
    (gx, gw)
}

/// Sample the plate integrand on a complex grid (Fig. 1 style map).
pub fn integrand_map(a: f64, grid: GridSpec) -> Result<ContourGrid> {
    if !(a > 0.0) {
        return Err(CasimirError::config(format!("separation must be positive (got {a})")));
    }
    if grid.n_re == 0 || grid.n_im == 0 {
        return Err(CasimirError::config("integrand map needs at least one point per axis"));
    }
    if !(grid.im_min > 0.0) || grid.im_max < grid.im_min || grid.re_max < grid.re_min {
        return Err(CasimirError::config(
            "integrand map must stay strictly above the real axis (im_min > 0) with ordered ranges",
        ));
    }
    let re = axis(grid.re_min, grid.re_max, grid.n_re);
    let im = axis(grid.im_min, grid.im_max, grid.n_im);
    let values: Vec<Option<Complex64>> = (0..re.len() * im.len())
        .into_par_iter()
        .map(|idx| {
            let omega = Complex64::new(re[idx % re.len()], im[idx / re.len()]);
            plate_integrand_complex(omega, a)
        })
        .collect();
    Ok(ContourGrid { re, im, values })
}
