//! Minimal SVG line plots and heatmaps.

use std::fmt::Write as _;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 30.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;

const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

pub struct Line {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

pub struct PlotSpec {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub log_y: bool,
    pub lines: Vec<Line>,
}

#[derive(Clone, Copy)]
pub enum Palette {
    Sequential,
    /// Wraps around, for phases in [-pi, pi].
    Cyclic,
}

pub struct HeatmapSpec {
    pub title: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// Row-major, one row per y value; None is drawn grey.
    pub values: Vec<Option<f64>>,
    pub palette: Palette,
    pub x_label: String,
    pub y_label: String,
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn header(title: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#, WIDTH / 2.0, esc(title));
    s
}

fn axis_labels(s: &mut String, x_label: &str, y_label: &str) {
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, LEFT + plot_w() / 2.0, HEIGHT - 15.0, esc(x_label));
    let cy = TOP + plot_h() / 2.0;
    let _ = writeln!(s, r#"<text x="18" y="{cy}" text-anchor="middle" transform="rotate(-90 18 {cy})">{}</text>"#, esc(y_label));
}

fn plot_w() -> f64 {
    WIDTH - LEFT - RIGHT
}

fn plot_h() -> f64 {
    HEIGHT - TOP - BOTTOM
}

/// Map a data range onto pixels, optionally in log10.
struct Scale {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Scale {
    fn new(values: impl Iterator<Item = f64>, log: bool) -> Self {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values {
            let t = if log { v.log10() } else { v };
            if t.is_finite() {
                lo = lo.min(t);
                hi = hi.max(t);
            }
        }
        if !lo.is_finite() {
            (lo, hi) = (0.0, 1.0);
        }
        if hi - lo <= 1e-300 {
            let pad = if lo == 0.0 { 1.0 } else { 0.05 * lo.abs() };
            (lo, hi) = (lo - pad, hi + pad);
        }
        Scale { lo, hi, log }
    }

    /// Position in [0, 1], or None for values off a log axis.
    fn unit(&self, v: f64) -> Option<f64> {
        let t = if self.log { v.log10() } else { v };
        t.is_finite().then(|| (t - self.lo) / (self.hi - self.lo))
    }

    fn ticks(&self) -> Vec<(f64, String)> {
        if self.log {
            let (a, b) = (self.lo.ceil() as i64, self.hi.floor() as i64);
            let step = ((b - a) / 6).max(1);
            return (a..=b).step_by(step as usize).map(|k| ((k as f64 - self.lo) / (self.hi - self.lo), format!("1e{k}"))).collect();
        }
        let raw = (self.hi - self.lo) / 5.0;
        let mag = 10f64.powf(raw.log10().floor());
        let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| *s >= raw).unwrap_or(10.0 * mag);
        let mut t = (self.lo / step).ceil() * step;
        let mut out = Vec::new();
        while t <= self.hi + 1e-9 * step {
            let v = if t.abs() < 1e-12 * step { 0.0 } else { t };
            out.push(((v - self.lo) / (self.hi - self.lo), fmt_tick(v)));
            t += step;
        }
        out
    }
}

fn fmt_tick(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v.abs() >= 1e-3 && v.abs() < 1e4 {
        format!("{}", (v * 1e6).round() / 1e6)
    } else {
        format!("{v:.1e}")
    }
}

pub fn line_plot(spec: &PlotSpec) -> String {
    let mut s = header(&spec.title);
    let all = || spec.lines.iter().flat_map(|l| l.points.iter());
    let sx = Scale::new(all().map(|p| p.0), spec.log_x);
    let sy = Scale::new(all().map(|p| p.1), spec.log_y);
    let px = |u: f64| LEFT + u * plot_w();
    let py = |u: f64| TOP + (1.0 - u) * plot_h();
    let _ = writeln!(s, r##"<rect x="{LEFT}" y="{TOP}" width="{}" height="{}" fill="none" stroke="#333"/>"##, plot_w(), plot_h());
    for (u, label) in sx.ticks() {
        let x = px(u);
        let _ = writeln!(s, r##"<line x1="{x:.2}" y1="{}" x2="{x:.2}" y2="{}" stroke="#ddd"/>"##, TOP, TOP + plot_h());
        let _ = writeln!(s, r#"<text x="{x:.2}" y="{}" text-anchor="middle">{label}</text>"#, TOP + plot_h() + 16.0);
    }
    for (u, label) in sy.ticks() {
        let y = py(u);
        let _ = writeln!(s, r##"<line x1="{LEFT}" y1="{y:.2}" x2="{}" y2="{y:.2}" stroke="#ddd"/>"##, LEFT + plot_w());
        let _ = writeln!(s, r#"<text x="{}" y="{:.2}" text-anchor="end">{label}</text>"#, LEFT - 6.0, y + 4.0);
    }
    for (k, line) in spec.lines.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let pts: Vec<String> = line
            .points
            .iter()
            .filter_map(|&(x, y)| Some(format!("{:.2},{:.2}", px(sx.unit(x)?), py(sy.unit(y)?))))
            .collect();
        if pts.is_empty() {
            continue;
        }
        let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#, pts.join(" "));
        for p in &pts {
            let (x, y) = p.split_once(',').expect("formatted pair");
            let _ = writeln!(s, r#"<circle cx="{x}" cy="{y}" r="2.5" fill="{color}"/>"#);
        }
        let ly = TOP + 16.0 + 16.0 * k as f64;
        let _ = writeln!(s, r#"<text x="{}" y="{ly}" text-anchor="end" fill="{color}">{}</text>"#, LEFT + plot_w() - 8.0, esc(&line.label));
    }
    axis_labels(&mut s, &spec.x_label, &spec.y_label);
    s.push_str("</svg>\n");
    s
}

fn color(palette: Palette, t: f64) -> String {
    let t = t.clamp(0.0, 1.0);
    let (r, g, b) = match palette {
        // dark blue -> teal -> yellow
        Palette::Sequential => {
            let stops = [(0.07, 0.04, 0.33), (0.13, 0.57, 0.55), (0.99, 0.91, 0.15)];
            let (i, f) = if t < 0.5 { (0, t * 2.0) } else { (1, (t - 0.5) * 2.0) };
            let (a, b) = (stops[i], stops[i + 1]);
            (a.0 + f * (b.0 - a.0), a.1 + f * (b.1 - a.1), a.2 + f * (b.2 - a.2))
        }
        Palette::Cyclic => {
            let h = 2.0 * std::f64::consts::PI * t;
            (0.5 + 0.45 * h.cos(), 0.5 + 0.45 * (h - 2.094).cos(), 0.5 + 0.45 * (h + 2.094).cos())
        }
    };
    format!("#{:02x}{:02x}{:02x}", (r * 255.0).round() as u8, (g * 255.0).round() as u8, (b * 255.0).round() as u8)
}

pub fn heatmap(spec: &HeatmapSpec) -> String {
    let mut s = header(&spec.title);
    let (nx, ny) = (spec.x.len(), spec.y.len());
    let bar = 50.0;
    let w = plot_w() - bar;
    let (lo, hi) = match spec.palette {
        Palette::Cyclic => (-std::f64::consts::PI, std::f64::consts::PI),
        Palette::Sequential => {
            let sc = Scale::new(spec.values.iter().flatten().copied(), false);
            (sc.lo, sc.hi)
        }
    };
    let cw = w / nx as f64;
    let ch = plot_h() / ny as f64;
    for i in 0..ny {
        for j in 0..nx {
            let fill = match spec.values[i * nx + j] {
                Some(v) => color(spec.palette, (v - lo) / (hi - lo)),
                None => "#bbbbbb".into(),
            };
            let x = LEFT + j as f64 * cw;
            let y = TOP + plot_h() - (i + 1) as f64 * ch;
            let _ = writeln!(s, r#"<rect x="{x:.2}" y="{y:.2}" width="{:.2}" height="{:.2}" fill="{fill}"/>"#, cw + 0.3, ch + 0.3);
        }
    }
    let _ = writeln!(s, r##"<rect x="{LEFT}" y="{TOP}" width="{w:.2}" height="{}" fill="none" stroke="#333"/>"##, plot_h());
    let ends = |v: &[f64]| (v.first().copied().unwrap_or(0.0), v.last().copied().unwrap_or(1.0));
    let (x0, x1) = ends(&spec.x);
    let (y0, y1) = ends(&spec.y);
    let _ = writeln!(s, r#"<text x="{LEFT}" y="{}" text-anchor="start">{}</text>"#, TOP + plot_h() + 16.0, fmt_tick(x0));
    let _ = writeln!(s, r#"<text x="{:.2}" y="{}" text-anchor="end">{}</text>"#, LEFT + w, TOP + plot_h() + 16.0, fmt_tick(x1));
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, LEFT - 6.0, TOP + plot_h(), fmt_tick(y0));
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, LEFT - 6.0, TOP + 10.0, fmt_tick(y1));
    // colour bar
    let bx = LEFT + w + 14.0;
    let steps = 32;
    for k in 0..steps {
        let t = (k as f64 + 0.5) / steps as f64;
        let y = TOP + plot_h() * (1.0 - (k + 1) as f64 / steps as f64);
        let _ = writeln!(s, r#"<rect x="{bx:.2}" y="{y:.2}" width="14" height="{:.2}" fill="{}"/>"#, plot_h() / steps as f64 + 0.3, color(spec.palette, t));
    }
    let _ = writeln!(s, r#"<text x="{:.2}" y="{}" font-size="10">{}</text>"#, bx, TOP - 4.0, fmt_tick(hi));
    let _ = writeln!(s, r#"<text x="{:.2}" y="{}" font-size="10">{}</text>"#, bx, TOP + plot_h() + 12.0, fmt_tick(lo));
    axis_labels(&mut s, &spec.x_label, &spec.y_label);
    s.push_str("</svg>\n");
    s
}
