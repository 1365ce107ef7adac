//! Run results and the files written from them.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use casimir_core::lifshitz::ContourGrid;
use casimir_core::quadrature::{resum, IntegrandSample};
use casimir_core::units::si_factor;

use crate::error::CliError;
use crate::svg;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// What a run measures, with the power of 1/um it carries in hbar = c = 1 units.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    /// Attractive pressure between plates.
    Pressure,
    /// Interaction energy relative to infinite separation.
    Energy,
    /// Force on body 2 along the line from body 1 to body 2.
    Force,
}

impl Quantity {
    pub fn name(self) -> &'static str {
        match self {
            Quantity::Pressure => "pressure",
            Quantity::Energy => "energy",
            Quantity::Force => "force",
        }
    }

    pub fn length_power(self) -> i32 {
        match self {
            Quantity::Pressure => 4,
            Quantity::Energy => 1,
            Quantity::Force => 2,
        }
    }

    pub fn natural_unit(self) -> String {
        format!("hbar*c/um^{}", self.length_power())
    }

    pub fn si_unit(self) -> &'static str {
        match self {
            Quantity::Pressure => "Pa",
            Quantity::Energy => "J",
            Quantity::Force => "N",
        }
    }

    pub fn to_si(self, v: f64) -> f64 {
        v * si_factor(self.length_power())
    }
}

/// Samples behind one integrated value.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub samples: Vec<IntegrandSample>,
}

impl Series {
    pub fn new(label: impl Into<String>, samples: Vec<IntegrandSample>) -> Self {
        Series { label: label.into(), samples }
    }

    pub fn total(&self) -> f64 {
        resum(&self.samples)
    }
}

/// One line of a convergence table.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub parameter: &'static str,
    pub value: f64,
    pub result: f64,
    /// Error estimate or deviation from the best value; NaN when not known.
    pub error: f64,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub name: String,
    pub kind: &'static str,
    pub echo: String,
    pub quantity: Quantity,
    pub value: f64,
    pub error: f64,
    pub method: String,
    /// Secondary scalars in natural units, in display order.
    pub details: Vec<(String, f64)>,
    pub series: Vec<Series>,
    pub convergence: Vec<ConvergenceRow>,
    pub map: Option<ContourGrid>,
    pub warnings: Vec<String>,
    pub wall_time: f64,
}

/// Shortest round-trip formatting; identical inputs give identical text.
pub fn num(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        format!("{v:e}")
    }
}

/// Plain decimals for moderate magnitudes, exponent form otherwise.
fn short(v: f64) -> String {
    if v == 0.0 || (1e-3..1e6).contains(&v.abs()) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

impl RunReport {
    pub fn summary(&self) -> String {
        let q = self.quantity;
        let mut s = String::new();
        let _ = writeln!(s, "casimir {VERSION}");
        let _ = writeln!(s, "scenario: {} ({})", self.name, self.kind);
        let _ = writeln!(s, "method: {}", self.method);
        if self.map.is_none() {
            let _ = writeln!(s, "{}: {} {} = {} {}", q.name(), num(self.value), q.natural_unit(), num(q.to_si(self.value)), q.si_unit());
            if self.error.is_nan() {
                let _ = writeln!(s, "error estimate: not available");
            } else {
                let _ = writeln!(s, "error estimate: {} {} = {} {}", num(self.error), q.natural_unit(), num(q.to_si(self.error)), q.si_unit());
            }
        }
        for (k, v) in &self.details {
            let _ = writeln!(s, "{k}: {}", short(*v));
        }
        for series in &self.series {
            let _ = writeln!(s, "samples [{}]: {} nodes, sum {}", series.label, series.samples.len(), num(series.total()));
        }
        for w in &self.warnings {
            let _ = writeln!(s, "warning: {w}");
        }
        let _ = writeln!(s, "wall time: {:.3} s", self.wall_time);
        s
    }

    /// Write summary, scenario echo, CSV tables and (optionally) SVG plots.
    /// Returns the paths written.
    pub fn write(&self, dir: &Path, prefix: &str, svg_plots: bool) -> Result<Vec<PathBuf>, CliError> {
        fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
        let mut written = Vec::new();
        let mut put = |name: String, body: String| -> Result<(), CliError> {
            let path = dir.join(name);
            fs::write(&path, body).map_err(|e| io_err(&path, e))?;
            written.push(path);
            Ok(())
        };
        let mut summary = self.summary();
        summary.push_str("\n[scenario]\n");
        summary.push_str(&self.echo);
        put(format!("{prefix}_summary.txt"), summary)?;
        put(format!("{prefix}_scenario.toml"), self.echo.clone())?;
        if !self.series.is_empty() {
            put(format!("{prefix}_samples.csv"), self.samples_csv())?;
            if svg_plots {
                put(format!("{prefix}_samples.svg"), self.samples_svg())?;
            }
        }
        if !self.convergence.is_empty() {
            put(format!("{prefix}_convergence.csv"), self.convergence_csv())?;
            if svg_plots {
                put(format!("{prefix}_convergence.svg"), self.convergence_svg())?;
            }
        }
        if let Some(map) = &self.map {
            put(format!("{prefix}_map.csv"), map_csv(map))?;
            if svg_plots {
                let (mag, phase) = map_svgs(map);
                put(format!("{prefix}_magnitude.svg"), mag)?;
                put(format!("{prefix}_phase.svg"), phase)?;
            }
        }
        Ok(written)
    }

    pub fn samples_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["series", "index", "xi", "weight", "integrand", "contribution"]).expect("in-memory write");
        for s in &self.series {
            for (k, p) in s.samples.iter().enumerate() {
                w.write_record([
                    s.label.clone(),
                    k.to_string(),
                    num(p.xi),
                    num(p.weight),
                    num(p.value),
                    num(p.weight * p.value),
                ])
                .expect("in-memory write");
            }
        }
        into_string(w)
    }

    pub fn convergence_csv(&self) -> String {
        rows_csv(self.quantity, &self.convergence)
    }

    fn samples_svg(&self) -> String {
        let lines: Vec<svg::Line> = self
            .series
            .iter()
            .map(|s| svg::Line { label: s.label.clone(), points: s.samples.iter().map(|p| (p.xi, p.value)).collect() })
            .collect();
        let log_x = self.series.iter().all(|s| s.samples.iter().all(|p| p.xi > 0.0));
        svg::line_plot(&svg::PlotSpec {
            title: format!("{}: {} integrand", self.name, self.quantity.name()),
            x_label: "xi [1/um]".into(),
            y_label: "integrand".into(),
            log_x,
            log_y: false,
            lines,
        })
    }

    fn convergence_svg(&self) -> String {
        let parameter = self.convergence[0].parameter;
        let with_error: Vec<(f64, f64)> =
            self.convergence.iter().filter(|r| r.error > 0.0).map(|r| (r.value, r.error)).collect();
        let (y_label, points) = if with_error.len() >= 2 {
            let label = if parameter == "l_max" { "relative error" } else { "error estimate" };
            (label.to_string(), with_error)
        } else {
            (format!("|{}|", self.quantity.name()), self.convergence.iter().map(|r| (r.value, r.result.abs())).collect())
        };
        svg::line_plot(&svg::PlotSpec {
            title: format!("{}: convergence in {parameter}", self.name),
            x_label: parameter.to_string(),
            y_label,
            log_x: parameter == "dx",
            log_y: true,
            lines: vec![svg::Line { label: self.name.clone(), points }],
        })
    }
}

/// parameter, value, quantity, result, error, result_si, unit_si.
pub fn rows_csv(q: Quantity, rows: &[ConvergenceRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["parameter", "value", "quantity", "result", "error", "result_si", "unit_si"])
        .expect("in-memory write");
    for r in rows {
        w.write_record([
            r.parameter.to_string(),
            num(r.value),
            q.name().to_string(),
            num(r.result),
            num(r.error),
            num(q.to_si(r.result)),
            q.si_unit().to_string(),
        ])
        .expect("in-memory write");
    }
    into_string(w)
}

/// |result| against the parameter on log axes (x linear when it reaches 0).
pub fn rows_svg(title: &str, q: Quantity, rows: &[ConvergenceRow]) -> String {
    let parameter = rows.first().map(|r| r.parameter).unwrap_or("");
    svg::line_plot(&svg::PlotSpec {
        title: title.to_string(),
        x_label: parameter.to_string(),
        y_label: format!("|{}| [{}]", q.name(), q.natural_unit()),
        log_x: rows.iter().all(|r| r.value > 0.0),
        log_y: true,
        lines: vec![svg::Line { label: q.name().to_string(), points: rows.iter().map(|r| (r.value, r.result.abs())).collect() }],
    })
}

fn map_csv(map: &ContourGrid) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["re_omega", "im_omega", "f_re", "f_im", "abs", "arg"]).expect("in-memory write");
    for (i, &im) in map.im.iter().enumerate() {
        for (j, &re) in map.re.iter().enumerate() {
            let cells = match map.at(i, j) {
                Some(f) => [num(f.re), num(f.im), num(f.norm()), num(f.arg())],
                None => Default::default(),
            };
            let mut row = vec![num(re), num(im)];
            row.extend(cells);
            w.write_record(row).expect("in-memory write");
        }
    }
    into_string(w)
}

fn map_svgs(map: &ContourGrid) -> (String, String) {
    let field = |f: &dyn Fn(num_complex::Complex64) -> f64| -> Vec<Option<f64>> {
        map.values.iter().map(|v| v.map(f).filter(|x| x.is_finite())).collect()
    };
    let mag = svg::heatmap(&svg::HeatmapSpec {
        title: "log10 |f(omega)|".into(),
        x: map.re.clone(),
        y: map.im.clone(),
        values: field(&|f| f.norm().log10()),
        palette: svg::Palette::Sequential,
        x_label: "Re omega [1/um]".into(),
        y_label: "Im omega [1/um]".into(),
    });
    let phase = svg::heatmap(&svg::HeatmapSpec {
        title: "arg f(omega) [rad]".into(),
        x: map.re.clone(),
        y: map.im.clone(),
        values: field(&|f| f.arg()),
        palette: svg::Palette::Cyclic,
        x_label: "Re omega [1/um]".into(),
        y_label: "Im omega [1/um]".into(),
    });
    (mag, phase)
}

pub fn into_string(w: csv::Writer<Vec<u8>>) -> String {
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is utf-8")
}

pub fn io_err(path: &Path, source: std::io::Error) -> CliError {
    CliError::Output { path: path.display().to_string(), source }
}
