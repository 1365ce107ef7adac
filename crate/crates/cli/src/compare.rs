//! Cross-method comparison of one observable.

use std::fmt::Write as _;

use crate::error::CliError;
use crate::report::{into_string, num, Quantity, RunReport};

pub struct PairRow {
    pub first: usize,
    pub second: usize,
    /// |v1 - v2| / max(|v1|, |v2|), zero when both vanish.
    pub rel_diff: f64,
    pub tolerance: f64,
    pub pass: bool,
}

pub struct Comparison {
    pub quantity: Quantity,
    pub reports: Vec<RunReport>,
    pub pairs: Vec<PairRow>,
}

pub fn relative_difference(a: f64, b: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    (a - b).abs() / a.abs().max(b.abs())
}

/// Kinds must be checked before the (possibly long) runs, so this takes the
/// planned quantities alongside the finished reports.
pub fn check_quantities(labels: &[(String, &'static str, Quantity)]) -> Result<Quantity, CliError> {
    if labels.len() < 2 {
        return Err(CliError::Config("compare needs at least two scenarios".into()));
    }
    for (name, kind, _) in labels {
        if *kind == "integrand_map" {
            return Err(CliError::Config(format!("{name}: integrand_map scenarios have no scalar result to compare")));
        }
    }
    let (first, _, q) = &labels[0];
    for (name, _, other) in &labels[1..] {
        if other != q {
            return Err(CliError::Config(format!(
                "cannot compare {} ({first}) with {} ({name})",
                q.name(),
                other.name()
            )));
        }
    }
    Ok(*q)
}

pub fn compare(quantity: Quantity, reports: Vec<RunReport>, tolerance: f64) -> Comparison {
    let mut pairs = Vec::new();
    for i in 0..reports.len() {
        for j in i + 1..reports.len() {
            let rel_diff = relative_difference(reports[i].value, reports[j].value);
            pairs.push(PairRow { first: i, second: j, rel_diff, tolerance, pass: rel_diff <= tolerance });
        }
    }
    Comparison { quantity, reports, pairs }
}

impl Comparison {
    pub fn passed(&self) -> bool {
        self.pairs.iter().all(|p| p.pass)
    }

    pub fn table(&self) -> String {
        let q = self.quantity;
        let mut s = String::new();
        let _ = writeln!(s, "{:<28} {:<22} {:>24} {:>12}  SI [{}]", "scenario", "kind", q.name(), "error", q.si_unit());
        for r in &self.reports {
            let err = if r.error.is_nan() { "-".to_string() } else { format!("{:.3e}", r.error) };
            let _ = writeln!(s, "{:<28} {:<22} {:>24} {:>12}  {:.6e}", r.name, r.kind, num(r.value), err, q.to_si(r.value));
        }
        let _ = writeln!(s);
        let _ = writeln!(s, "{:<28} {:<28} {:>12} {:>10}  result", "first", "second", "rel diff", "tolerance");
        for p in &self.pairs {
            let _ = writeln!(
                s,
                "{:<28} {:<28} {:>12.3e} {:>10.1e}  {}",
                self.reports[p.first].name,
                self.reports[p.second].name,
                p.rel_diff,
                p.tolerance,
                if p.pass { "PASS" } else { "FAIL" }
            );
        }
        s
    }

    pub fn csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["first", "second", "quantity", "value_first", "value_second", "rel_diff", "tolerance", "result"])
            .expect("in-memory write");
        for p in &self.pairs {
            let (a, b) = (&self.reports[p.first], &self.reports[p.second]);
            w.write_record([
                a.name.clone(),
                b.name.clone(),
                self.quantity.name().to_string(),
                num(a.value),
                num(b.value),
                num(p.rel_diff),
                num(p.tolerance),
                if p.pass { "PASS" } else { "FAIL" }.to_string(),
            ])
            .expect("in-memory write");
        }
        into_string(w)
    }
}
