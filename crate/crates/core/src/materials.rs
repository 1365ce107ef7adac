//! Dielectric response on the imaginary-frequency axis.

use serde::{Deserialize, Serialize};

use crate::error::{CasimirError, Result};

/// Permittivity model evaluated at imaginary frequency i*xi (xi in 1/um).
///
/// The magnetic permeability is fixed to 1 for every kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MaterialModel {
    Vacuum,
    Constant { eps: f64 },
    Drude { omega_p: f64, gamma: f64 },
    Plasma { omega_p: f64 },
    Tabulated(Tabulated),
    PerfectMetal,
}

/// Sampled eps(i xi), interpolated with a monotone cubic in ln(xi).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TableRows", into = "TableRows")]
pub struct Tabulated {
    ln_xi: Vec<f64>,
    eps: Vec<f64>,
    slopes: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct TableRows {
    xi: Vec<f64>,
    eps: Vec<f64>,
}

impl TryFrom<TableRows> for Tabulated {
    type Error = CasimirError;
    fn try_from(rows: TableRows) -> Result<Self> {
        Tabulated::new(rows.xi, rows.eps)
    }
}

impl From<Tabulated> for TableRows {
    fn from(t: Tabulated) -> Self {
        TableRows { xi: t.xi(), eps: t.eps }
    }
}

impl Tabulated {
    /// Build a table from strictly increasing positive xi samples.
    pub fn new(xi: Vec<f64>, eps: Vec<f64>) -> Result<Self> {
        if xi.len() != eps.len() {
            return Err(CasimirError::config("tabulated material: xi and eps lengths differ"));
        }
        if xi.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
            return Err(CasimirError::config("tabulated material: xi samples must be positive"));
        }
        if xi.windows(2).any(|w| w[1] <= w[0]) {
            return Err(CasimirError::config("tabulated material: xi samples must be strictly increasing"));
        }
        let ln_xi: Vec<f64> = xi.iter().map(|x| x.ln()).collect();
        let slopes = pchip_slopes(&ln_xi, &eps);
        Ok(Tabulated { ln_xi, eps, slopes })
    }

    /// Parse two-column `xi eps` text; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut xi = Vec::new();
        let mut eps = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split(|c: char| c.is_whitespace() || c == ',').filter(|s| !s.is_empty()).collect();
            if cols.len() != 2 {
                return Err(CasimirError::config(format!(
                    "tabulated material line {}: expected two columns, found {}",
                    lineno + 1,
                    cols.len()
                )));
            }
            let parse = |s: &str| {
                s.parse::<f64>().map_err(|_| {
                    CasimirError::config(format!("tabulated material line {}: bad number '{s}'", lineno + 1))
                })
            };
            xi.push(parse(cols[0])?);
            eps.push(parse(cols[1])?);
        }
        Tabulated::new(xi, eps)
    }

    pub fn len(&self) -> usize {
        self.eps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eps.is_empty()
    }

    pub fn xi(&self) -> Vec<f64> {
        self.ln_xi.iter().map(|l| l.exp()).collect()
    }

    pub fn eps(&self) -> &[f64] {
        &self.eps
    }

    fn eval(&self, xi: f64) -> Result<(f64, f64)> {
        let n = self.eps.len();
        match n {
            0 => return Err(CasimirError::config("tabulated material has no samples")),
            1 => return Ok((self.eps[0], 0.0)),
            _ => {}
        }
        let t = xi.ln();
        if t <= self.ln_xi[0] {
            return Ok((self.eps[0], 0.0));
        }
        if t >= self.ln_xi[n - 1] {
            return Ok((self.eps[n - 1], 0.0));
        }
        let k = self.ln_xi.partition_point(|&x| x <= t) - 1;
        let h = self.ln_xi[k + 1] - self.ln_xi[k];
        let s = (t - self.ln_xi[k]) / h;
        let (y0, y1) = (self.eps[k], self.eps[k + 1]);
        let (m0, m1) = (self.slopes[k] * h, self.slopes[k + 1] * h);
        let s2 = s * s;
        let s3 = s2 * s;
        let value = (2.0 * s3 - 3.0 * s2 + 1.0) * y0
            + (s3 - 2.0 * s2 + s) * m0
            + (-2.0 * s3 + 3.0 * s2) * y1
            + (s3 - s2) * m1;
        let dvalue_ds = (6.0 * s2 - 6.0 * s) * y0
            + (3.0 * s2 - 4.0 * s + 1.0) * m0
            + (-6.0 * s2 + 6.0 * s) * y1
            + (3.0 * s2 - 2.0 * s) * m1;
        // d/dxi = (d/ds)(1/h)(1/xi)
        Ok((value, dvalue_ds / (h * xi)))
    }
}

/// Fritsch-Carlson slopes: the interpolant is monotone wherever the data are.
fn pchip_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    if n < 2 {
        return vec![0.0; n];
    }
    let delta: Vec<f64> = (0..n - 1).map(|k| (y[k + 1] - y[k]) / (x[k + 1] - x[k])).collect();
    let mut m = vec![0.0; n];
    m[0] = delta[0];
    m[n - 1] = delta[n - 2];
    for k in 1..n - 1 {
        if delta[k - 1] * delta[k] <= 0.0 {
            m[k] = 0.0;
        } else {
            let h0 = x[k] - x[k - 1];
            let h1 = x[k + 1] - x[k];
            let w0 = 2.0 * h1 + h0;
            let w1 = h1 + 2.0 * h0;
            m[k] = (w0 + w1) / (w0 / delta[k - 1] + w1 / delta[k]);
        }
    }
    // Endpoint slopes must not overshoot a monotone segment.
    for (end, d) in [(0usize, delta[0]), (n - 1, delta[n - 2])] {
        if m[end] * d <= 0.0 {
            m[end] = 0.0;
        } else if m[end].abs() > 3.0 * d.abs() {
            m[end] = 3.0 * d;
        }
    }
    m
}

impl MaterialModel {
    /// eps(i xi). Errors for the perfect-metal sentinel.
    pub fn permittivity(&self, xi: f64) -> Result<f64> {
        Ok(self.permittivity_with_slope(xi)?.0)
    }

    /// (eps, d eps / d xi) at i xi.
    pub fn permittivity_with_slope(&self, xi: f64) -> Result<(f64, f64)> {
        match *self {
            MaterialModel::Vacuum => Ok((1.0, 0.0)),
            MaterialModel::Constant { eps } => Ok((eps, 0.0)),
            MaterialModel::Drude { omega_p, gamma } => {
                let wp2 = omega_p * omega_p;
                let den = xi * (xi + gamma);
                Ok((1.0 + wp2 / den, -wp2 * (2.0 * xi + gamma) / (den * den)))
            }
            MaterialModel::Plasma { omega_p } => {
                let wp2 = omega_p * omega_p;
                Ok((1.0 + wp2 / (xi * xi), -2.0 * wp2 / (xi * xi * xi)))
            }
            MaterialModel::Tabulated(ref t) => t.eval(xi),
            MaterialModel::PerfectMetal => Err(CasimirError::PerfectMetalQueried),
        }
    }

    /// (1/2xi) d(xi^2 eps)/dxi, the energy-density weight of a medium.
    pub fn energy_weight(&self, xi: f64) -> Result<f64> {
        let (eps, deps) = self.permittivity_with_slope(xi)?;
        Ok(eps + 0.5 * xi * deps)
    }

    pub fn is_perfect_metal(&self) -> bool {
        matches!(self, MaterialModel::PerfectMetal)
    }

    pub fn is_vacuum(&self) -> bool {
        match self {
            MaterialModel::Vacuum => true,
            MaterialModel::Constant { eps } => *eps == 1.0,
            _ => false,
        }
    }

    /// Check the eps >= 1 and monotonicity invariants. Empty means valid.
    pub fn validate(&self) -> Vec<String> {
        let mut out = Vec::new();
        match self {
            MaterialModel::Vacuum | MaterialModel::PerfectMetal => {}
            MaterialModel::Constant { eps } => {
                if !(*eps >= 1.0) {
                    out.push(format!("ε<1: constant permittivity {eps}"));
                }
            }
            MaterialModel::Drude { omega_p, gamma } => {
                if !(*omega_p > 0.0) {
                    out.push(format!("drude omega_p must be > 0 (got {omega_p})"));
                }
                if !(*gamma >= 0.0) {
                    out.push(format!("drude gamma must be >= 0 (got {gamma})"));
                }
            }
            MaterialModel::Plasma { omega_p } => {
                if !(*omega_p > 0.0) {
                    out.push(format!("plasma omega_p must be > 0 (got {omega_p})"));
                }
            }
            MaterialModel::Tabulated(t) => {
                if t.is_empty() {
                    out.push("tabulated material has no samples".to_string());
                }
                let xi = t.xi();
                if let Some(k) = t.eps.iter().position(|&e| !(e >= 1.0)) {
                    out.push(format!("ε<1: tabulated sample {} at xi = {}", t.eps[k], xi[k]));
                }
                for k in 1..t.len() {
                    if t.eps[k] > t.eps[k - 1] {
                        out.push(format!(
                            "non-monotone: eps rises from {} to {} between xi = {} and {}",
                            t.eps[k - 1],
                            t.eps[k],
                            xi[k - 1],
                            xi[k]
                        ));
                    }
                }
            }
        }
        if out.is_empty() && !self.is_perfect_metal() {
            out.extend(self.sampled_violations());
        }
        out
    }

    fn sampled_violations(&self) -> Option<String> {
        let mut prev = f64::INFINITY;
        for k in 0..=160 {
            let xi = 10f64.powf(-4.0 + 8.0 * k as f64 / 160.0);
            let eps = match self.permittivity(xi) {
                Ok(e) => e,
                Err(e) => return Some(e.to_string()),
            };
            if !(eps >= 1.0) {
                return Some(format!("ε<1 at xi = {xi}"));
            }
            if eps > prev * (1.0 + 1e-12) {
                return Some(format!("non-monotone near xi = {xi}"));
            }
            prev = eps;
        }
        None
    }
}
