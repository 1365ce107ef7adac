//! Two-body scalar Dirichlet interactions in a partial-wave basis:
//! cylinders (2d, multipole order m) and spheres (3d, (l, m)).
//!
//! Per frequency the round trip is N = U21 T2 U12 T1 with diagonal T-matrices
//! and translation blocks. Everything is assembled as the symmetrized factor
//! B = T1^{1/2} U T2^{1/2}, so that det(I - N) = det(I - B B^T) and
//! I - B B^T is symmetric positive definite for separated bodies. Entries of
//! B are combined from logarithms, which keeps both small-argument (huge K)
//! and large-argument (huge I) corners finite.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{CasimirError, Result};
use crate::lifshitz::zero_frequency_limit;
use crate::quadrature::{FrequencyRule, IntegrandSample, RuleSpec};
use crate::special::{log_cyl_ik, log_sph_ik, three_j_m0, three_j_row};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Dim {
    #[serde(rename = "2d")]
    Two,
    #[serde(rename = "3d")]
    Three,
}

/// Two bodies on a common axis (x in 2d, z in 3d), body 1 at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoBodyGeometry {
    pub dim: Dim,
    pub r1: f64,
    pub r2: f64,
    /// Center-to-center distance.
    pub d: f64,
}

impl TwoBodyGeometry {
    pub fn new(dim: Dim, r1: f64, r2: f64, d: f64) -> Result<Self> {
        let g = TwoBodyGeometry { dim, r1, r2, d };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("r1", self.r1), ("r2", self.r2), ("d", self.d)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(CasimirError::config(format!("{name} must be positive (got {v})")));
            }
        }
        if self.d <= self.r1 + self.r2 {
            return Err(CasimirError::config(format!(
                "bodies overlap: d = {} <= r1 + r2 = {}",
                self.d,
                self.r1 + self.r2
            )));
        }
        Ok(())
    }

    /// Surface-to-surface gap d - r1 - r2.
    pub fn gap(&self) -> f64 {
        self.d - self.r1 - self.r2
    }

    pub fn with_separation(&self, d: f64) -> Self {
        TwoBodyGeometry { d, ..*self }
    }
}

/// Highest multipole kept: m_max in 2d (m = -m_max..=m_max), l_max in 3d.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartialWaveCutoff {
    pub max_order: usize,
}

impl PartialWaveCutoff {
    pub fn new(max_order: usize) -> Result<Self> {
        if max_order < 1 {
            return Err(CasimirError::config("partial-wave cutoff must be at least 1"));
        }
        Ok(PartialWaveCutoff { max_order })
    }

    /// ceil(10 R_max / gap) + 5.
    pub fn default_for(geom: &TwoBodyGeometry) -> Self {
        let r = geom.r1.max(geom.r2);
        PartialWaveCutoff { max_order: (10.0 * r / geom.gap()).ceil() as usize + 5 }
    }

    /// Number of basis functions per body.
    pub fn basis_size(&self, dim: Dim) -> usize {
        let l = self.max_order;
        match dim {
            Dim::Two => 2 * l + 1,
            Dim::Three => (l + 1) * (l + 1),
        }
    }
}

/// ln of the Dirichlet T-matrix element I_m/K_m (2d) or i_l/k_l (3d) at xi R.
pub fn log_tmatrix_element(dim: Dim, index: usize, xi: f64, r: f64) -> Result<f64> {
    let b = match dim {
        Dim::Two => log_cyl_ik(index, xi * r)?,
        Dim::Three => log_sph_ik(index, xi * r)?,
    };
    Ok(b.log_i[index] - b.log_k[index])
}

/// The Dirichlet T-matrix element; see [`log_tmatrix_element`].
pub fn tmatrix_element(dim: Dim, index: usize, xi: f64, r: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(CasimirError::config(format!("radius must be positive (got {r})")));
    }
    Ok(log_tmatrix_element(dim, index, xi, r)?.exp())
}

fn log_tmatrix_row(dim: Dim, l_max: usize, x: f64) -> Result<Vec<f64>> {
    let b = match dim {
        Dim::Two => log_cyl_ik(l_max, x)?,
        Dim::Three => log_sph_ik(l_max, x)?,
    };
    Ok(b.log_i.iter().zip(&b.log_k).map(|(i, k)| i - k).collect())
}

/// Addition-theorem coefficients for spheres, built once per l_max.
///
/// `coef(m, l', l)` lists (lambda, c) with
/// c = (-1)^m sqrt((2l+1)(2l'+1)) (2 lambda + 1) (l l' lambda; 0 0 0)(l l' lambda; m -m 0),
/// so that the translation block is F(m)_{l' l} = sum_lambda c k_lambda(xi d).
#[derive(Debug, Clone)]
pub struct GauntTable {
    l_max: usize,
    /// Indexed [m][(l' - m) * width + (l - m)], width = l_max - m + 1.
    rows: Vec<Vec<Vec<(usize, f64)>>>,
}

impl GauntTable {
    pub fn new(l_max: usize) -> Self {
        let mut rows = Vec::with_capacity(l_max + 1);
        for m in 0..=l_max {
            let width = l_max - m + 1;
            let mut block = vec![Vec::new(); width * width];
            let sign_m = if m % 2 == 0 { 1.0 } else { -1.0 };
            for lp in m..=l_max {
                for l in m..=lp {
                    let (jmin, row) = three_j_row(l, lp, m as i64);
                    let pref = sign_m * (((2 * l + 1) * (2 * lp + 1)) as f64).sqrt();
                    let entry: Vec<(usize, f64)> = row
                        .iter()
                        .enumerate()
                        .filter_map(|(k, &w)| {
                            let lam = jmin + k;
                            let w0 = three_j_m0(l, lp, lam);
                            (w0 != 0.0).then(|| (lam, pref * (2 * lam + 1) as f64 * w0 * w))
                        })
                        .collect();
                    block[(l - m) * width + (lp - m)] = entry.clone();
                    block[(lp - m) * width + (l - m)] = entry;
                }
            }
            rows.push(block);
        }
        GauntTable { l_max, rows }
    }

    pub fn l_max(&self) -> usize {
        self.l_max
    }

    pub fn coef(&self, m: usize, lp: usize, l: usize) -> &[(usize, f64)] {
        let width = self.l_max - m + 1;
        &self.rows[m][(lp - m) * width + (l - m)]
    }
}

/// Translation blocks at one frequency.
///
/// 2d: one matrix over m, m' = -m_max..=m_max with entries K_{m-m'}(xi d).
/// 3d: one matrix per m = 0..=l_max over l, l' = m..=l_max (the -m block is
/// identical), entries F(m)_{l' l}. Values can overflow for tiny xi d at high
/// order; the energy and force paths never form them directly.
#[derive(Debug, Clone, PartialEq)]
pub enum TranslationBlock {
    Cylinders(DMatrix<f64>),
    Spheres(Vec<DMatrix<f64>>),
}

impl TranslationBlock {
    /// U12 with its parity factor: (-1)^{m'} in 2d, (-1)^{l'} in 3d (row index).
    pub fn u12(&self, l_max: usize) -> TranslationBlock {
        self.with_parity(l_max, true)
    }

    /// U21 = transpose of U12 with the parity moved to the column index.
    pub fn u21(&self, l_max: usize) -> TranslationBlock {
        self.with_parity(l_max, false)
    }

    fn with_parity(&self, l_max: usize, rows: bool) -> TranslationBlock {
        let flip = |mut a: DMatrix<f64>, first: i64| {
            for i in 0..a.nrows() {
                for j in 0..a.ncols() {
                    let idx = if rows { i } else { j } as i64 + first;
                    if idx.rem_euclid(2) == 1 {
                        a[(i, j)] = -a[(i, j)];
                    }
                }
            }
            a
        };
        match self {
            TranslationBlock::Cylinders(a) => TranslationBlock::Cylinders(flip(a.clone(), -(l_max as i64))),
            TranslationBlock::Spheres(bs) => TranslationBlock::Spheres(
                bs.iter().enumerate().map(|(m, b)| flip(b.clone(), m as i64)).collect(),
            ),
        }
    }
}

/// Symmetric translation block (no parity factors) at frequency xi and distance d.
pub fn translation_block(dim: Dim, xi: f64, d: f64, cutoff: PartialWaveCutoff) -> Result<TranslationBlock> {
    if !(d > 0.0) {
        return Err(CasimirError::config(format!("translation distance must be positive (got {d})")));
    }
    let l = cutoff.max_order;
    match dim {
        Dim::Two => {
            let kk = log_cyl_ik(2 * l, xi * d)?.log_k;
            let n = 2 * l + 1;
            Ok(TranslationBlock::Cylinders(DMatrix::from_fn(n, n, |i, j| kk[i.abs_diff(j)].exp())))
        }
        Dim::Three => {
            let table = GauntTable::new(l);
            let kk = log_sph_ik(2 * l, xi * d)?.log_k;
            let mut blocks = Vec::with_capacity(l + 1);
            for m in 0..=l {
                let w = l - m + 1;
                let mut a = DMatrix::zeros(w, w);
                for lp in m..=l {
                    for ll in m..=l {
                        let v: f64 = table.coef(m, lp, ll).iter().map(|&(lam, c)| c * kk[lam].exp()).sum();
                        if !v.is_finite() {
                            return Err(CasimirError::Consistency(format!(
                                "translation coefficient (l = {ll}, l' = {lp}, m = {m}) is not finite"
                            )));
                        }
                        a[(lp - m, ll - m)] = v;
                    }
                }
                blocks.push(a);
            }
            Ok(TranslationBlock::Spheres(blocks))
        }
    }
}

/// Symmetrized round trip at one frequency: blocks B with multiplicities,
/// det(I - N) = prod det(I - B B^T)^mult. With `derivative`, dB/dd as well.
#[derive(Debug, Clone)]
pub struct RoundTrip {
    pub blocks: Vec<RoundTripBlock>,
}

#[derive(Debug, Clone)]
pub struct RoundTripBlock {
    pub multiplicity: usize,
    pub b: DMatrix<f64>,
    pub db: Option<DMatrix<f64>>,
}

impl RoundTripBlock {
    /// The symmetric matrix B B^T (similar to N).
    pub fn symmetrized(&self) -> DMatrix<f64> {
        &self.b * self.b.transpose()
    }
}

/// Cached per-geometry data for repeated frequency evaluations.
#[derive(Debug, Clone)]
pub struct PartialWaveSystem {
    pub geom: TwoBodyGeometry,
    pub cutoff: PartialWaveCutoff,
    gaunt: Option<GauntTable>,
}

impl PartialWaveSystem {
    pub fn new(geom: TwoBodyGeometry, cutoff: PartialWaveCutoff) -> Result<Self> {
        geom.validate()?;
        PartialWaveCutoff::new(cutoff.max_order)?;
        let gaunt = (geom.dim == Dim::Three).then(|| GauntTable::new(cutoff.max_order));
        Ok(PartialWaveSystem { geom, cutoff, gaunt })
    }

    pub fn round_trip(&self, xi: f64, derivative: bool) -> Result<RoundTrip> {
        let g = &self.geom;
        let l = self.cutoff.max_order;
        let t1 = log_tmatrix_row(g.dim, l, xi * g.r1)?;
        let t2 = log_tmatrix_row(g.dim, l, xi * g.r2)?;
        let x = xi * g.d;
        match g.dim {
            Dim::Two => {
                let kk = log_cyl_ik(2 * l + 1, x)?.log_k;
                let n = 2 * l + 1;
                let half = |i: usize, j: usize| 0.5 * (t1[i.abs_diff(l)] + t2[j.abs_diff(l)]);
                let b = DMatrix::from_fn(n, n, |i, j| (half(i, j) + kk[i.abs_diff(j)]).exp());
                let db = derivative.then(|| {
                    // d/dd K_nu(xi d) = -xi (K_{nu-1} + K_{nu+1}) / 2, K_{-1} = K_1
                    DMatrix::from_fn(n, n, |i, j| {
                        let nu = i.abs_diff(j);
                        let lo = if nu == 0 { 1 } else { nu - 1 };
                        let h = half(i, j);
                        -0.5 * xi * ((h + kk[lo]).exp() + (h + kk[nu + 1]).exp())
                    })
                });
                Ok(RoundTrip { blocks: vec![RoundTripBlock { multiplicity: 1, b, db }] })
            }
            Dim::Three => {
                let table = self.gaunt.as_ref().expect("3d system carries a Gaunt table");
                let kk = log_sph_ik(2 * l + 1, x)?.log_k;
                // ln|k'_lambda| pieces: k'_0 = -k_1, k'_lam = -k_{lam-1} - (lam+1)/x k_lam
                let mut blocks = Vec::with_capacity(l + 1);
                for m in 0..=l {
                    let w = l - m + 1;
                    let mut b = DMatrix::zeros(w, w);
                    let mut db = derivative.then(|| DMatrix::zeros(w, w));
                    for lp in m..=l {
                        for ll in m..=l {
                            let h = 0.5 * (t1[lp] + t2[ll]);
                            let mut s = 0.0;
                            let mut ds = 0.0;
                            for &(lam, c) in table.coef(m, lp, ll) {
                                s += c * (h + kk[lam]).exp();
                                if derivative {
                                    let dk = if lam == 0 {
                                        -(h + kk[1]).exp()
                                    } else {
                                        -(h + kk[lam - 1]).exp() - (h + ((lam + 1) as f64 / x).ln() + kk[lam]).exp()
                                    };
                                    ds += c * xi * dk;
                                }
                            }
                            if !s.is_finite() || !ds.is_finite() {
                                return Err(CasimirError::Consistency(format!(
                                    "round-trip entry (l = {ll}, l' = {lp}, m = {m}) at xi = {xi} is not finite"
                                )));
                            }
                            b[(lp - m, ll - m)] = s;
                            if let Some(d) = db.as_mut() {
                                d[(lp - m, ll - m)] = ds;
                            }
                        }
                    }
                    blocks.push(RoundTripBlock { multiplicity: if m == 0 { 1 } else { 2 }, b, db });
                }
                Ok(RoundTrip { blocks })
            }
        }
    }

    /// ln det(I - N(xi)), always <= 0.
    pub fn log_det(&self, xi: f64) -> Result<f64> {
        let rt = self.round_trip(xi, false)?;
        let mut total = 0.0;
        for blk in &rt.blocks {
            let chol = factor(blk, xi)?;
            total += blk.multiplicity as f64 * chol.log_det;
        }
        Ok(total)
    }

    /// tr[(I - B B^T)^{-1} dB B^T], the d-derivative integrand with
    /// d/dd ln det(I - N) = -2 * this.
    pub fn force_trace(&self, xi: f64) -> Result<f64> {
        let rt = self.round_trip(xi, true)?;
        let mut total = 0.0;
        for blk in &rt.blocks {
            let chol = factor(blk, xi)?;
            let db = blk.db.as_ref().expect("derivative requested");
            total += blk.multiplicity as f64 * chol.trace_solve(&(db * blk.b.transpose()));
        }
        Ok(total)
    }

    /// Zero-frequency value by extrapolation from xi ~ 1e-6 / gap.
    fn at_zero<F>(&self, f: F) -> Result<f64>
    where
        F: Fn(f64) -> Result<f64>,
    {
        zero_frequency_limit(f, self.geom.gap())
    }
}

/// Cholesky factor of I - S that keeps 1 - L_ii^2 explicit, so ln det stays
/// accurate when S is tiny (ln_1p instead of ln of numbers near 1).
struct UnitMinusFactor {
    l: DMatrix<f64>,
    log_det: f64,
}

impl UnitMinusFactor {
    fn new(s: &DMatrix<f64>) -> Option<Self> {
        let n = s.nrows();
        let mut l = DMatrix::<f64>::zeros(n, n);
        let mut log_det = 0.0;
        for j in 0..n {
            let mut t = s[(j, j)];
            for k in 0..j {
                t += l[(j, k)] * l[(j, k)];
            }
            if !(t < 1.0) {
                return None;
            }
            let ljj = (1.0 - t).sqrt();
            log_det += (-t).ln_1p();
            l[(j, j)] = ljj;
            for i in j + 1..n {
                let mut v = -s[(i, j)];
                for k in 0..j {
                    v -= l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = v / ljj;
            }
        }
        Some(UnitMinusFactor { l, log_det })
    }

    /// tr[(I - S)^{-1} X].
    fn trace_solve(&self, x: &DMatrix<f64>) -> f64 {
        let y = self.l.solve_lower_triangular(x).expect("non-singular factor");
        let z = self.l.transpose().solve_upper_triangular(&y).expect("non-singular factor");
        z.trace()
    }
}

fn factor(blk: &RoundTripBlock, xi: f64) -> Result<UnitMinusFactor> {
    UnitMinusFactor::new(&blk.symmetrized()).ok_or_else(|| {
        CasimirError::Consistency(format!(
            "I - N is not positive definite at xi = {xi}: round-trip spectral radius >= 1 (overlapping bodies or broken assembly)"
        ))
    })
}

/// Integrated value with the per-frequency samples behind it.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralResult {
    pub value: f64,
    pub samples: Vec<IntegrandSample>,
    pub cutoff: PartialWaveCutoff,
}

fn integrate_rule<F>(sys: &PartialWaveSystem, rule: &FrequencyRule, f: F) -> Result<SpectralResult>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    let thermal = matches!(rule.spec, RuleSpec::Matsubara { .. });
    let res = rule.integrate(|xi| if thermal && xi == 0.0 { sys.at_zero(&f) } else { f(xi) })?;
    Ok(SpectralResult { value: res.value, samples: res.samples, cutoff: sys.cutoff })
}

/// U = (1/2 pi) Int_0^inf ln det(I - N(xi)) dxi (or the Matsubara sum).
pub fn energy(geom: &TwoBodyGeometry, cutoff: PartialWaveCutoff, rule: &FrequencyRule) -> Result<SpectralResult> {
    let sys = PartialWaveSystem::new(*geom, cutoff)?;
    integrate_rule(&sys, rule, |xi| Ok(sys.log_det(xi)? / (2.0 * PI)))
}

/// F = -dU/dd = (1/pi) Int tr[(I - B B^T)^{-1} dB B^T] dxi, the force on
/// body 2 along +d. Negative values are attractive.
pub fn force(geom: &TwoBodyGeometry, cutoff: PartialWaveCutoff, rule: &FrequencyRule) -> Result<SpectralResult> {
    let sys = PartialWaveSystem::new(*geom, cutoff)?;
    integrate_rule(&sys, rule, |xi| Ok(sys.force_trace(xi)? / PI))
}

/// Default frequency rule for a pair: Gauss-Laguerre matched to e^{-2 xi gap}.
pub fn default_spectral_rule(geom: &TwoBodyGeometry) -> Result<FrequencyRule> {
    FrequencyRule::gauss_laguerre(40, 1.0 / (2.0 * geom.gap()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub max_order: usize,
    pub energy: f64,
    /// |U - U_richest| / |U_richest|.
    pub rel_error: f64,
}

/// Energies for increasing cutoffs, measured against the last (richest) one.
pub fn convergence_sweep(geom: &TwoBodyGeometry, orders: &[usize], rule: &FrequencyRule) -> Result<Vec<SweepPoint>> {
    if orders.is_empty() || orders.windows(2).any(|w| w[0] >= w[1]) {
        return Err(CasimirError::config("cutoff list must be non-empty and strictly increasing"));
    }
    let mut energies = Vec::with_capacity(orders.len());
    for &l in orders {
        energies.push(energy(geom, PartialWaveCutoff::new(l)?, rule)?.value);
    }
    let best = *energies.last().expect("non-empty");
    Ok(orders
        .iter()
        .zip(&energies)
        .map(|(&max_order, &energy)| SweepPoint { max_order, energy, rel_error: ((energy - best) / best).abs() })
        .collect())
}

/// Least-squares slope of ln(rel_error) against the cutoff, over points whose
/// error is above `floor` (the richest point and round-off plateaus drop out).
pub fn log_error_slope(points: &[SweepPoint], floor: f64) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.rel_error > floor)
        .map(|p| (p.max_order as f64, p.rel_error.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    Some(sxy / sxx)
}

/// Unblocked (l, m) translation matrix for spheres, basis ordered by l then
/// m = -l..=l. Entries with m != m' are never filled.
pub fn translation_dense_3d(xi: f64, d: f64, l_max: usize) -> Result<DMatrix<f64>> {
    let table = GauntTable::new(l_max);
    let kk = log_sph_ik(2 * l_max, xi * d)?.log_k;
    let idx: Vec<(usize, i64)> = (0..=l_max).flat_map(|l| (-(l as i64)..=l as i64).map(move |m| (l, m))).collect();
    let n = idx.len();
    let mut a = DMatrix::zeros(n, n);
    for (i, &(lp, mp)) in idx.iter().enumerate() {
        for (j, &(l, m)) in idx.iter().enumerate() {
            if m == mp {
                let mm = m.unsigned_abs() as usize;
                a[(i, j)] = table.coef(mm, lp, l).iter().map(|&(lam, c)| c * kk[lam].exp()).sum();
            }
        }
    }
    Ok(a)
}

/// Indices (row, col) of nonzero entries coupling different m in an
/// unblocked (l, m) matrix laid out as in [`translation_dense_3d`].
pub fn m_block_violations(a: &DMatrix<f64>, l_max: usize) -> Vec<(usize, usize)> {
    let ms: Vec<i64> = (0..=l_max).flat_map(|l| -(l as i64)..=l as i64).collect();
    let mut bad = Vec::new();
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            if ms[i] != ms[j] && a[(i, j)] != 0.0 {
                bad.push((i, j));
            }
        }
    }
    bad
}
