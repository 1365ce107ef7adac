//! Wigner 3-j symbols (l1 l2 j; m -m 0) as rows over j.
//!
//! m = 0 uses the closed form. Otherwise the three-term recursion in j of
//! Schulten and Gordon is run from both ends and the two solutions are
//! joined inside the region where both are stable.

use std::sync::OnceLock;

const LN_FACT_LEN: usize = 2048;

fn ln_factorial(n: usize) -> f64 {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    let t = TABLE.get_or_init(|| {
        let mut t = vec![0.0; LN_FACT_LEN];
        for k in 1..LN_FACT_LEN {
            t[k] = t[k - 1] + (k as f64).ln();
        }
        t
    });
    t[n]
}

/// (l1 l2 l3; 0 0 0). Zero unless the triangle holds and l1 + l2 + l3 is even.
pub fn three_j_m0(l1: usize, l2: usize, l3: usize) -> f64 {
    let big_j = l1 + l2 + l3;
    if big_j % 2 == 1 || l3 > l1 + l2 || l1 > l2 + l3 || l2 > l1 + l3 {
        return 0.0;
    }
    assert!(big_j + 1 < LN_FACT_LEN, "angular momentum too large for the factorial table");
    let g = big_j / 2;
    let ln = 0.5 * (ln_factorial(big_j - 2 * l1) + ln_factorial(big_j - 2 * l2) + ln_factorial(big_j - 2 * l3)
        - ln_factorial(big_j + 1))
        + ln_factorial(g)
        - ln_factorial(g - l1)
        - ln_factorial(g - l2)
        - ln_factorial(g - l3);
    let sign = if g.is_multiple_of(2) { 1.0 } else { -1.0 };
    sign * ln.exp()
}

/// (l1 l2 j; m -m 0) for j = |l1 - l2| ..= l1 + l2, as (j_min, values).
///
/// Requires |m| <= min(l1, l2).
pub fn three_j_row(l1: usize, l2: usize, m: i64) -> (usize, Vec<f64>) {
    assert!(m.unsigned_abs() as usize <= l1.min(l2), "|m| exceeds l1 or l2");
    let jmin = l1.abs_diff(l2);
    let jmax = l1 + l2;
    let len = jmax - jmin + 1;
    if m == 0 {
        return (jmin, (jmin..=jmax).map(|j| three_j_m0(l1, l2, j)).collect());
    }
    if len == 1 {
        let v = 1.0 / ((2 * jmin + 1) as f64).sqrt();
        return (jmin, vec![if (l1 + l2).is_multiple_of(2) { v } else { -v }]);
    }

    let (a1, a2, mf) = (l1 as f64, l2 as f64, m as f64);
    let coef_a = |j: f64| -> f64 {
        let t = (j * j - (a1 - a2) * (a1 - a2)) * ((a1 + a2 + 1.0) * (a1 + a2 + 1.0) - j * j) * (j * j);
        t.max(0.0).sqrt()
    };
    // m3 = 0, m2 - m1 = -2m
    let coef_b = |j: f64| -2.0 * mf * (2.0 * j + 1.0) * j * (j + 1.0);

    // forward from jmin
    let mut fwd = vec![0.0; len];
    fwd[0] = 1.0;
    if jmin == 0 {
        fwd[1] = mf / (a1 * (a1 + 1.0)).sqrt();
    } else {
        let j = jmin as f64;
        fwd[1] = -coef_b(j) / (j * coef_a(j + 1.0));
    }
    for k in 1..len - 1 {
        let j = (jmin + k) as f64;
        fwd[k + 1] = -(coef_b(j) * fwd[k] + (j + 1.0) * coef_a(j) * fwd[k - 1]) / (j * coef_a(j + 1.0));
        rescale(&mut fwd[..=k + 1]);
    }

    // backward from jmax
    let mut bwd = vec![0.0; len];
    bwd[len - 1] = 1.0;
    {
        let j = jmax as f64;
        bwd[len - 2] = -coef_b(j) / ((j + 1.0) * coef_a(j));
    }
    for k in (1..len - 1).rev() {
        let j = (jmin + k) as f64;
        bwd[k - 1] = -(coef_b(j) * bwd[k] + j * coef_a(j + 1.0) * bwd[k + 1]) / ((j + 1.0) * coef_a(j));
        rescale(&mut bwd[k - 1..]);
    }

    // Forward is trustworthy until its first maximum from above is passed,
    // backward likewise from below; join in between.
    let peak_f = (0..len - 1).find(|&k| fwd[k + 1].abs() < fwd[k].abs()).unwrap_or(len - 1);
    let peak_b = (1..len).rev().find(|&k| bwd[k - 1].abs() < bwd[k].abs()).unwrap_or(0);
    let (lo, hi) = if peak_f <= peak_b { (peak_f, peak_b) } else { (peak_b, peak_f) };
    let join = (lo..=hi).max_by(|&x, &y| bwd[x].abs().total_cmp(&bwd[y].abs())).unwrap_or(lo);
    let scale = fwd[join] / bwd[join];
    let mut row: Vec<f64> = (0..len).map(|k| if k <= join { fwd[k] } else { bwd[k] * scale }).collect();

    let norm: f64 = row.iter().enumerate().map(|(k, v)| (2 * (jmin + k) + 1) as f64 * v * v).sum();
    let want_positive = (l1 + l2).is_multiple_of(2); // sign of (l1 l2 jmax; m -m 0) is (-1)^(l1 - l2)
    let s = if (row[len - 1] > 0.0) == want_positive { 1.0 } else { -1.0 } / norm.sqrt();
    for v in &mut row {
        *v *= s;
    }
    (jmin, row)
}

fn rescale(v: &mut [f64]) {
    let big = v.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    if big > 1e150 {
        for x in v {
            *x /= big;
        }
    }
}
