//! Frequency rules over xi in (0, inf) and Matsubara sums.

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CasimirError, Result};
use crate::units;

/// Largest supported Gauss-Laguerre order.
pub const MAX_LAGUERRE_POINTS: usize = 200;

/// Default relative tail tolerance of adaptive Matsubara sums.
pub const MATSUBARA_TAIL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleKind {
    GaussLaguerre,
    TransformedClenshawCurtis,
}

/// What a rule was built from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum RuleSpec {
    GaussLaguerre { n: usize, scale: f64 },
    TransformedClenshawCurtis { n: usize, scale: f64 },
    /// Fixed-length Matsubara ladder, n = 0..=n_max.
    Matsubara { kelvin: f64, n_max: usize },
}

/// Nodes and weights of a frequency rule; integral = sum of w_i f(xi_i).
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyRule {
    pub spec: RuleSpec,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// One evaluated integrand value, stored as it entered the sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegrandSample {
    pub xi: f64,
    pub value: f64,
    pub weight: f64,
}

/// Value of a quadrature with the samples that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct Integral {
    pub value: f64,
    /// |Q(rule) - Q(coarser nested rule)|; zero when not estimated.
    pub error: f64,
    pub samples: Vec<IntegrandSample>,
}

/// Sum w*f over samples in stored order.
pub fn resum(samples: &[IntegrandSample]) -> f64 {
    samples.iter().map(|s| s.weight * s.value).sum()
}

impl FrequencyRule {
    pub fn build(kind: RuleKind, n: usize, scale: f64) -> Result<Self> {
        if n == 0 {
            return Err(CasimirError::config("frequency rule needs at least one point"));
        }
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(CasimirError::config(format!("frequency scale must be positive (got {scale})")));
        }
        match kind {
            RuleKind::GaussLaguerre => gauss_laguerre(n, scale),
            RuleKind::TransformedClenshawCurtis => Ok(fejer2_semi_infinite(n, scale)),
        }
    }

    pub fn gauss_laguerre(n: usize, scale: f64) -> Result<Self> {
        Self::build(RuleKind::GaussLaguerre, n, scale)
    }

    pub fn clenshaw_curtis(n: usize, scale: f64) -> Result<Self> {
        Self::build(RuleKind::TransformedClenshawCurtis, n, scale)
    }

    /// xi_n = n * 2 pi k_B T / hbar for n = 0..=n_max, first weight halved.
    pub fn matsubara(kelvin: f64, n_max: usize) -> Result<Self> {
        if !(kelvin > 0.0) || !kelvin.is_finite() {
            return Err(CasimirError::config(format!("temperature must be positive (got {kelvin})")));
        }
        let h = units::matsubara_spacing(kelvin);
        let nodes = (0..=n_max).map(|k| k as f64 * h).collect();
        let mut weights = vec![h; n_max + 1];
        weights[0] = 0.5 * h;
        Ok(FrequencyRule { spec: RuleSpec::Matsubara { kelvin, n_max }, nodes, weights })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// The same family with roughly half the nodes, for error estimates.
    pub fn coarser(&self) -> Option<Self> {
        match self.spec {
            RuleSpec::GaussLaguerre { n, scale } if n >= 2 => gauss_laguerre(n / 2, scale).ok(),
            RuleSpec::TransformedClenshawCurtis { n, scale } if n >= 3 => {
                Some(fejer2_semi_infinite((n - 1) / 2, scale))
            }
            _ => None,
        }
    }

    /// Evaluate f at every node (in parallel) and sum in node order.
    pub fn integrate<F>(&self, f: F) -> Result<Integral>
    where
        F: Fn(f64) -> Result<f64> + Sync,
    {
        let values = eval_nodes(&self.nodes, &f)?;
        let samples: Vec<IntegrandSample> = self
            .nodes
            .iter()
            .zip(&self.weights)
            .zip(values)
            .map(|((&xi, &weight), value)| IntegrandSample { xi, value, weight })
            .collect();
        Ok(Integral { value: resum(&samples), error: 0.0, samples })
    }

    /// As [`integrate`](Self::integrate), with an error estimate from the coarser rule.
    pub fn integrate_with_error<F>(&self, f: F) -> Result<Integral>
    where
        F: Fn(f64) -> Result<f64> + Sync,
    {
        let mut fine = self.integrate(&f)?;
        if let Some(coarse) = self.coarser() {
            fine.error = (fine.value - coarse.integrate(&f)?.value).abs();
        }
        Ok(fine)
    }
}

/// Evaluate f at the given nodes on the current rayon pool.
pub fn eval_nodes<F>(nodes: &[f64], f: &F) -> Result<Vec<f64>>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    nodes
        .par_iter()
        .map(|&xi| {
            let v = f(xi)?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(CasimirError::NonFinite { xi })
            }
        })
        .collect()
}

fn gauss_laguerre(n: usize, scale: f64) -> Result<FrequencyRule> {
    if n > MAX_LAGUERRE_POINTS {
        return Err(CasimirError::config(format!(
            "gauss_laguerre supports at most {MAX_LAGUERRE_POINTS} points (got {n})"
        )));
    }
    // Golub-Welsch for the abscissae, then Newton polish and the
    // w = x / ((n+1) L_{n+1}(x))^2 formula evaluated in logs.
    let mut jac = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        jac[(k, k)] = (2 * k + 1) as f64;
        if k + 1 < n {
            jac[(k, k + 1)] = (k + 1) as f64;
            jac[(k + 1, k)] = (k + 1) as f64;
        }
    }
    let mut x: Vec<f64> = SymmetricEigen::new(jac).eigenvalues.iter().copied().collect();
    x.sort_by(|a, b| a.total_cmp(b));
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for &x0 in &x {
        let mut xi = x0;
        for _ in 0..8 {
            let (ln, lnm1) = laguerre_pair(n, xi);
            let dln = n as f64 * (ln - lnm1) / xi;
            let step = ln / dln;
            xi -= step;
            if step.abs() <= 1e-15 * xi {
                break;
            }
        }
        let (lnp1, _) = laguerre_pair(n + 1, xi);
        let ln_w = xi.ln() - 2.0 * ((n + 1) as f64).ln() - 2.0 * lnp1.abs().ln();
        nodes.push(scale * xi);
        weights.push(scale * (ln_w + xi).exp());
    }
    Ok(FrequencyRule { spec: RuleSpec::GaussLaguerre { n, scale }, nodes, weights })
}

/// (L_n(x), L_{n-1}(x)) by the three-term recurrence.
fn laguerre_pair(n: usize, x: f64) -> (f64, f64) {
    let mut prev = 1.0;
    if n == 0 {
        return (1.0, 0.0);
    }
    let mut cur = 1.0 - x;
    for k in 1..n {
        let next = ((2 * k + 1) as f64 - x) * cur / (k + 1) as f64 - k as f64 * prev / (k + 1) as f64;
        prev = cur;
        cur = next;
    }
    (cur, prev)
}

/// Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Fejer's second rule on t in (0,1), mapped by xi = s t / (1 - t).
fn fejer2_semi_infinite(n: usize, scale: f64) -> FrequencyRule {
    let np1 = (n + 1) as f64;
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for k in 1..=n {
        let theta = k as f64 * std::f64::consts::PI / np1;
        let mut acc = 0.0;
        for j in 1..=n.div_ceil(2) {
            let m = (2 * j - 1) as f64;
            acc += (m * theta).sin() / m;
        }
        // Weight on [-1, 1] is 4 sin(theta) acc / (n+1); halve for (0, 1).
        let w = 2.0 * theta.sin() * acc / np1;
        let t = 0.5 * (1.0 - theta.cos());
        let one_minus = 0.5 * (1.0 + theta.cos());
        nodes.push(scale * t / one_minus);
        weights.push(w * scale / (one_minus * one_minus));
    }
    FrequencyRule { spec: RuleSpec::TransformedClenshawCurtis { n, scale }, nodes, weights }
}

/// Result of an adaptive Matsubara sum.
#[derive(Debug, Clone, PartialEq)]
pub struct MatsubaraSum {
    pub value: f64,
    pub samples: Vec<IntegrandSample>,
    /// Geometric estimate of the omitted terms.
    pub tail: f64,
}

/// Delta_xi [f(0)/2 + sum_{n>=1} f(xi_n)], stopping once the geometric
/// tail estimate t r/(1 - r), with r the ratio of the last two terms, falls
/// below `tail_tol` relative to the running sum at two consecutive terms.
///
/// Bounding the tail rather than the last term keeps the truncation error
/// fixed as T -> 0, where many terms share each e-fold of decay.
///
/// f is called with xi = 0 for the zero-frequency term; callers own its
/// limiting procedure.
pub fn matsubara_sum<F>(kelvin: f64, f: F, n_max: usize, tail_tol: f64) -> Result<MatsubaraSum>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    if !(kelvin > 0.0) {
        return Err(CasimirError::config(format!("matsubara sum needs T > 0 (got {kelvin})")));
    }
    let h = units::matsubara_spacing(kelvin);
    let mut samples = Vec::new();
    let mut sum = 0.0;
    let mut quiet = 0;
    let mut prev = 0.0;
    let mut next = 0usize;
    let batch = 32usize.max(rayon::current_num_threads() * 4);
    while next <= n_max {
        let end = (next + batch).min(n_max + 1);
        let xs: Vec<f64> = (next..end).map(|k| k as f64 * h).collect();
        let vals = eval_nodes(&xs, &f)?;
        for (k, (xi, v)) in (next..end).zip(xs.into_iter().zip(vals)) {
            let weight = if k == 0 { 0.5 * h } else { h };
            samples.push(IntegrandSample { xi, value: v, weight });
            sum += weight * v;
            let term = (weight * v).abs();
            let tail = if k == 0 { f64::INFINITY } else { geometric_tail(prev, term) };
            prev = term;
            if tail <= tail_tol * sum.abs() {
                quiet += 1;
                if quiet >= 2 {
                    return Ok(MatsubaraSum { value: resum(&samples), samples, tail });
                }
            } else {
                quiet = 0;
            }
        }
        next = end;
    }
    let last = samples.last().map(|s| (s.weight * s.value).abs()).unwrap_or(0.0);
    Err(CasimirError::Truncation { what: format!("matsubara sum at n_max = {n_max}"), last })
}

fn geometric_tail(prev: f64, term: f64) -> f64 {
    if term == 0.0 {
        0.0
    } else if term >= prev {
        f64::INFINITY
    } else {
        let r = term / prev;
        term * r / (1.0 - r)
    }
}
