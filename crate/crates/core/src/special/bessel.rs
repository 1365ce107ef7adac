//! Modified Bessel functions of integer and half-integer order, returned as
//! logarithms so that large arguments and high orders never overflow.
//!
//! K is seeded at the two lowest orders (Temme series below x = 2, Steed's
//! continued fraction above) and recurred upward, which is stable for K.
//! I follows from the ratio continued fraction at the top order, downward
//! ratio recursion and the Wronskian I_v K_{v+1} + I_{v+1} K_v = 1/x.

use std::f64::consts::PI;

use crate::error::{CasimirError, Result};

const EPS: f64 = 1e-16;
const MAX_ITER: usize = 200_000;
const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
/// Rescaling threshold for the upward K recursion.
const BIG: f64 = 1e250;

/// ln I and ln K at orders mu, mu + 1, ..., mu + n_max.
#[derive(Debug, Clone, PartialEq)]
pub struct LogBessel {
    pub log_i: Vec<f64>,
    pub log_k: Vec<f64>,
}

/// ln I_n(x), ln K_n(x) for n = 0..=n_max.
pub fn log_cyl_ik(n_max: usize, x: f64) -> Result<LogBessel> {
    check_arg(x)?;
    let (k0, k1) = if x < 2.0 { temme_k0_k1(x) } else { steed_k(0.0, x) };
    let mut out = ladder(0.0, n_max, x, k0, k1)?;
    // undo the e^x scaling of the seeds
    for v in &mut out.log_k {
        *v -= x;
    }
    Ok(out)
}

/// ln i_l(x), ln k_l(x) for l = 0..=l_max, with
/// i_l = sqrt(pi/2x) I_{l+1/2} and k_l = sqrt(2/(pi x)) K_{l+1/2},
/// so that i_0 = sinh(x)/x and k_0 = e^{-x}/x.
pub fn log_sph_ik(l_max: usize, x: f64) -> Result<LogBessel> {
    check_arg(x)?;
    let k_half = (PI / (2.0 * x)).sqrt();
    let mut out = ladder(0.5, l_max, x, k_half, k_half * (1.0 + 1.0 / x))?;
    let shift_i = 0.5 * (PI / (2.0 * x)).ln();
    let shift_k = 0.5 * (2.0 / (PI * x)).ln() - x;
    for v in &mut out.log_i {
        *v += shift_i;
    }
    for v in &mut out.log_k {
        *v += shift_k;
    }
    Ok(out)
}

fn check_arg(x: f64) -> Result<()> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(CasimirError::config(format!("Bessel argument must be positive and finite (got {x})")));
    }
    Ok(())
}

/// Fill both ladders from the scaled seeds e^x K_mu, e^x K_{mu+1}.
/// The returned ln K still carries the +x scaling.
fn ladder(mu: f64, n_max: usize, x: f64, k_mu: f64, k_mu1: f64) -> Result<LogBessel> {
    let mut log_k = Vec::with_capacity(n_max + 2);
    let (mut a, mut b) = (k_mu, k_mu1);
    let mut offset = 0.0;
    log_k.push(a.ln());
    for n in 1..=n_max {
        log_k.push(b.ln() + offset);
        if n == n_max {
            break;
        }
        let nu = mu + n as f64;
        let c = a + 2.0 * nu / x * b;
        a = b;
        b = c;
        if b > BIG {
            a /= BIG;
            b /= BIG;
            offset += BIG.ln();
        }
    }

    // I_{v+1}/I_v at the top order, then downward.
    let top = mu + n_max as f64;
    let mut ratios = vec![0.0; n_max + 1];
    ratios[n_max] = i_ratio_cf(top, x)?;
    for n in (0..n_max).rev() {
        let nu = mu + (n + 1) as f64;
        ratios[n] = 1.0 / (2.0 * nu / x + ratios[n + 1]);
    }
    // Wronskian at the lowest order, using the scaled seeds.
    let mut log_i = Vec::with_capacity(n_max + 1);
    log_i.push(-x.ln() - (k_mu1 + ratios[0] * k_mu).ln() + x);
    for n in 1..=n_max {
        log_i.push(log_i[n - 1] + ratios[n - 1].ln());
    }
    if log_i.iter().chain(&log_k).any(|v| !v.is_finite()) {
        return Err(CasimirError::NonFinite { xi: x });
    }
    Ok(LogBessel { log_i, log_k })
}

/// I_{nu+1}(x)/I_nu(x) = 1/(b_0 + 1/(b_1 + ...)), b_j = 2(nu + 1 + j)/x,
/// by the modified Lentz algorithm.
fn i_ratio_cf(nu: f64, x: f64) -> Result<f64> {
    const TINY: f64 = 1e-300;
    let b = |j: usize| 2.0 * (nu + 1.0 + j as f64) / x;
    let mut f = b(0);
    let mut c = f;
    let mut d = 0.0;
    for j in 1..MAX_ITER {
        d += b(j);
        if d.abs() < TINY {
            d = TINY;
        }
        c = b(j) + 1.0 / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < EPS {
            return Ok(1.0 / f);
        }
    }
    Err(CasimirError::Truncation { what: format!("I ratio continued fraction at nu = {nu}, x = {x}"), last: f })
}

/// e^x K_0(x), e^x K_1(x) from Temme's series, valid for x < 2.
fn temme_k0_k1(x: f64) -> (f64, f64) {
    let x2 = 0.5 * x;
    let d = -x2.ln();
    // mu = 0: gam1 = -gamma, gam2 = 1, 1/Gamma(1 +- mu) = 1
    let mut ff = -EULER_GAMMA + d;
    let mut sum = ff;
    let mut p = 0.5;
    let mut q = 0.5;
    let mut c = 1.0;
    let dd = x2 * x2;
    let mut sum1 = p;
    for i in 1..MAX_ITER {
        let fi = i as f64;
        ff = (fi * ff + p + q) / (fi * fi);
        c *= dd / fi;
        p /= fi;
        q /= fi;
        let del = c * ff;
        sum += del;
        sum1 += c * (p - fi * ff);
        if del.abs() < sum.abs() * EPS {
            break;
        }
    }
    let scale = x.exp();
    (sum * scale, sum1 * 2.0 / x * scale)
}

/// e^x K_mu(x), e^x K_{mu+1}(x) from Steed's continued fraction, x >= 2.
fn steed_k(mu: f64, x: f64) -> (f64, f64) {
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut h = d;
    let mut delh = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let a1 = 0.25 - mu * mu;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 1..MAX_ITER {
        let fi = i as f64;
        a -= 2.0 * fi;
        c = -a * c / (fi + 1.0);
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh *= b * d - 1.0;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < EPS {
            break;
        }
    }
    h *= a1;
    let kmu = (PI / (2.0 * x)).sqrt() / s;
    let kmu1 = kmu * (mu + x + 0.5 - h) / x;
    (kmu, kmu1)
}
