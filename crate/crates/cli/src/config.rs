//! Scenario files: one TOML document with materials, geometry, method,
//! frequency and output sections.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use casimir_core::fd::Shape;
use casimir_core::materials::{MaterialModel, Tabulated};
use casimir_core::quadrature::RuleKind;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Ids usable without a `[materials]` entry.
pub const BUILTIN_MATERIALS: [&str; 2] = ["vacuum", "perfect_metal"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub materials: BTreeMap<String, MaterialDef>,
    pub geometry: Geometry,
    #[serde(default)]
    pub method: Method,
    #[serde(default)]
    pub frequency: Frequency,
    #[serde(default)]
    pub output: Output,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MaterialDef {
    Vacuum,
    Constant { eps: f64 },
    Drude { omega_p: f64, gamma: f64 },
    Plasma { omega_p: f64 },
    PerfectMetal,
    /// Two-column (xi, eps) text file, relative to the scenario file.
    Tabulated { file: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Geometry {
    Plates {
        separation: f64,
        material_1: String,
        material_2: String,
        #[serde(default = "vacuum_id")]
        gap: String,
    },
    Mirrors1d {
        bodies: Vec<BodyDef>,
    },
    /// Dirichlet circles centred at (-d/2, 0) and (d/2, 0).
    Cylinders2d {
        r1: f64,
        r2: f64,
        d: f64,
    },
    Cylinders2dSpectral {
        r1: f64,
        r2: f64,
        d: f64,
    },
    Spheres3d {
        r1: f64,
        r2: f64,
        d: f64,
    },
    IntegrandMap {
        separation: f64,
    },
}

fn vacuum_id() -> String {
    "vacuum".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BodyDef {
    #[serde(flatten)]
    pub shape: Shape,
    pub material: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    Energy,
    Force,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PressureMethod {
    Lifshitz,
    PerfectMetal,
}

/// Method knobs. Each kind accepts only the ones it uses.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Method {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pressure: Option<PressureMethod>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inner_points: Option<usize>,
    /// Coarsest grid spacing; further levels halve it.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dx: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub levels: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub richardson_order: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub margin: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stretch_cells: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stretch_strength: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub clearance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub subtract_isolated: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub observable: Option<Observable>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l_max: Option<usize>,
    /// Extra cutoffs for a convergence table (spheres3d).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l_max_sweep: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub re_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub re_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub im_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub im_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_re: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_im: Option<usize>,
}

impl Method {
    fn set_fields(&self) -> Vec<&'static str> {
        let mut v = Vec::new();
        let mut mark = |set: bool, name: &'static str| {
            if set {
                v.push(name);
            }
        };
        mark(self.pressure.is_some(), "pressure");
        mark(self.inner_points.is_some(), "inner_points");
        mark(self.dx.is_some(), "dx");
        mark(self.levels.is_some(), "levels");
        mark(self.richardson_order.is_some(), "richardson_order");
        mark(self.margin.is_some(), "margin");
        mark(self.stretch_cells.is_some(), "stretch_cells");
        mark(self.stretch_strength.is_some(), "stretch_strength");
        mark(self.clearance.is_some(), "clearance");
        mark(self.subtract_isolated.is_some(), "subtract_isolated");
        mark(self.observable.is_some(), "observable");
        mark(self.l_max.is_some(), "l_max");
        mark(self.l_max_sweep.is_some(), "l_max_sweep");
        mark(self.re_min.is_some(), "re_min");
        mark(self.re_max.is_some(), "re_max");
        mark(self.im_min.is_some(), "im_min");
        mark(self.im_max.is_some(), "im_max");
        mark(self.n_re.is_some(), "n_re");
        mark(self.n_im.is_some(), "n_im");
        v
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Frequency {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rule: Option<RuleKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
    /// Kelvin; 0 integrates over xi, anything above sums Matsubara terms.
    #[serde(default)]
    pub temperature: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matsubara_terms: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Output {
    /// Output directory, relative to the scenario file.
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prefix: Option<String>,
    #[serde(default = "yes")]
    pub svg: bool,
}

impl Default for Output {
    fn default() -> Self {
        Output { dir: default_dir(), prefix: None, svg: true }
    }
}

fn default_dir() -> PathBuf {
    PathBuf::from("out")
}

fn yes() -> bool {
    true
}

impl Geometry {
    pub fn kind(&self) -> &'static str {
        match self {
            Geometry::Plates { .. } => "plates",
            Geometry::Mirrors1d { .. } => "mirrors1d",
            Geometry::Cylinders2d { .. } => "cylinders2d",
            Geometry::Cylinders2dSpectral { .. } => "cylinders2d_spectral",
            Geometry::Spheres3d { .. } => "spheres3d",
            Geometry::IntegrandMap { .. } => "integrand_map",
        }
    }

    fn allowed_method_fields(&self) -> &'static [&'static str] {
        match self {
            Geometry::Plates { .. } => &["pressure", "inner_points"],
            Geometry::Mirrors1d { .. } => {
                &["dx", "levels", "richardson_order", "margin", "stretch_cells", "stretch_strength"]
            }
            Geometry::Cylinders2d { .. } => &[
                "dx",
                "levels",
                "richardson_order",
                "margin",
                "stretch_cells",
                "stretch_strength",
                "clearance",
                "subtract_isolated",
            ],
            Geometry::Cylinders2dSpectral { .. } => &["observable", "l_max"],
            Geometry::Spheres3d { .. } => &["observable", "l_max", "l_max_sweep"],
            Geometry::IntegrandMap { .. } => &["re_min", "re_max", "im_min", "im_max", "n_re", "n_im"],
        }
    }

    fn uses_frequency(&self) -> bool {
        !matches!(self, Geometry::IntegrandMap { .. })
    }

    fn is_fd(&self) -> bool {
        matches!(self, Geometry::Mirrors1d { .. } | Geometry::Cylinders2d { .. })
    }
}

/// A parsed and validated scenario with its materials resolved.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: Config,
    pub name: String,
    /// Directory relative paths are resolved against.
    pub base_dir: PathBuf,
    pub materials: BTreeMap<String, MaterialModel>,
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let config = parse(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "scenario".into());
        Scenario::from_config(config, name, base_dir)
    }

    pub fn from_config(config: Config, name: String, base_dir: PathBuf) -> Result<Self, CliError> {
        let materials = resolve_materials(&config, &base_dir)?;
        let s = Scenario { config, name, base_dir, materials };
        s.validate()?;
        Ok(s)
    }

    pub fn kind(&self) -> &'static str {
        self.config.geometry.kind()
    }

    pub fn material(&self, id: &str) -> &MaterialModel {
        &self.materials[id]
    }

    /// Canonical TOML of the scenario with paths made absolute and the
    /// output prefix fixed, so it re-runs identically from anywhere.
    pub fn echo(&self) -> String {
        let mut c = self.config.clone();
        for def in c.materials.values_mut() {
            if let MaterialDef::Tabulated { file } = def {
                *file = absolute(&self.base_dir.join(&*file));
            }
        }
        c.output.dir = absolute(&self.output_dir());
        c.output.prefix = Some(self.prefix().to_string());
        toml::to_string(&c).expect("scenario serializes")
    }

    pub fn output_dir(&self) -> PathBuf {
        self.base_dir.join(&self.config.output.dir)
    }

    pub fn prefix(&self) -> &str {
        self.config.output.prefix.as_deref().unwrap_or(&self.name)
    }

    fn validate(&self) -> Result<(), CliError> {
        let c = &self.config;
        let g = &c.geometry;
        let kind = g.kind();
        for field in c.method.set_fields() {
            if !g.allowed_method_fields().contains(&field) {
                return Err(bad(format!("method.{field}"), format!("not used by {kind} scenarios")));
            }
        }
        for id in self.referenced_materials() {
            if !self.materials.contains_key(id) {
                return Err(bad("materials", format!("material id '{id}' is not defined")));
            }
        }
        match g {
            Geometry::Plates { separation, gap, .. } => {
                positive("geometry.separation", *separation)?;
                if self.material(gap).is_perfect_metal() {
                    return Err(bad("geometry.gap", "the gap cannot be perfect_metal"));
                }
                if c.method.pressure == Some(PressureMethod::PerfectMetal) {
                    let Geometry::Plates { material_1, material_2, .. } = g else { unreachable!() };
                    for (field, id) in [("geometry.material_1", material_1), ("geometry.material_2", material_2)] {
                        if !self.material(id).is_perfect_metal() {
                            return Err(bad(field, format!("pressure = \"perfect_metal\" needs perfect_metal plates (got '{id}')")));
                        }
                    }
                    if !self.material(gap).is_vacuum() {
                        return Err(bad("geometry.gap", "pressure = \"perfect_metal\" needs a vacuum gap"));
                    }
                    if c.frequency.temperature > 0.0 {
                        return Err(bad("frequency.temperature", "pressure = \"perfect_metal\" is zero-temperature only"));
                    }
                    if c.frequency.rule.is_some() || c.frequency.scale.is_some() {
                        return Err(bad("frequency.rule", "pressure = \"perfect_metal\" fixes its own Gauss-Laguerre rule; set only frequency.points"));
                    }
                }
            }
            Geometry::Mirrors1d { bodies } => {
                if bodies.len() != 2 {
                    return Err(bad("geometry.bodies", format!("needs exactly two bodies (got {})", bodies.len())));
                }
                for (k, b) in bodies.iter().enumerate() {
                    let field = format!("geometry.bodies[{k}]");
                    match b.shape {
                        Shape::Point { x } => finite(&field, x)?,
                        Shape::Interval { x0, x1 } => {
                            finite(&field, x0)?;
                            finite(&field, x1)?;
                            if !(x1 > x0) {
                                return Err(bad(field, format!("interval needs x1 > x0 (got {x0}, {x1})")));
                            }
                        }
                        _ => return Err(bad(field, "mirrors1d bodies must be shape = \"point\" or \"interval\"")),
                    }
                    if self.material(&b.material).is_vacuum() {
                        return Err(bad(format!("{field}.material"), "a vacuum body does not interact"));
                    }
                }
                let (a, b) = (&bodies[0].shape, &bodies[1].shape);
                if !(a.bbox().1[0] < b.bbox().0[0]) {
                    return Err(bad("geometry.bodies", "bodies must be listed left to right and must not overlap"));
                }
            }
            Geometry::Cylinders2d { r1, r2, d }
            | Geometry::Cylinders2dSpectral { r1, r2, d }
            | Geometry::Spheres3d { r1, r2, d } => {
                positive("geometry.r1", *r1)?;
                positive("geometry.r2", *r2)?;
                positive("geometry.d", *d)?;
                if !(*d > r1 + r2) {
                    return Err(bad("geometry.d", format!("bodies overlap: d = {d} <= r1 + r2 = {}", r1 + r2)));
                }
            }
            Geometry::IntegrandMap { separation } => positive("geometry.separation", *separation)?,
        }
        let m = &c.method;
        if let Some(dx) = m.dx {
            positive("method.dx", dx)?;
        }
        if m.levels == Some(0) {
            return Err(bad("method.levels", "must be at least 1"));
        }
        if m.richardson_order == Some(0) {
            return Err(bad("method.richardson_order", "must be at least 1"));
        }
        for (field, v) in [("method.margin", m.margin), ("method.clearance", m.clearance)] {
            if let Some(v) = v {
                positive(field, v)?;
            }
        }
        if let Some(v) = m.stretch_strength {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(bad("method.stretch_strength", format!("must be >= 0 (got {v})")));
            }
        }
        if m.l_max == Some(0) {
            return Err(bad("method.l_max", "must be at least 1"));
        }
        if let Some(list) = &m.l_max_sweep {
            if list.is_empty() || list.windows(2).any(|w| w[0] >= w[1]) || list[0] == 0 {
                return Err(bad("method.l_max_sweep", "must be a non-empty, strictly increasing list of positive orders"));
            }
        }
        if m.inner_points == Some(0) {
            return Err(bad("method.inner_points", "must be at least 1"));
        }
        let f = &c.frequency;
        if !g.uses_frequency() && *f != Frequency::default() {
            return Err(bad("frequency", format!("{kind} scenarios take no frequency settings")));
        }
        if f.points == Some(0) {
            return Err(bad("frequency.points", "must be at least 1"));
        }
        if let Some(s) = f.scale {
            positive("frequency.scale", s)?;
        }
        if !(f.temperature >= 0.0) || !f.temperature.is_finite() {
            return Err(bad("frequency.temperature", format!("must be >= 0 (got {})", f.temperature)));
        }
        if f.temperature > 0.0 {
            if g.is_fd() {
                return Err(bad("frequency.temperature", "finite-difference scenarios are zero-temperature only"));
            }
            if f.rule.is_some() || f.scale.is_some() || f.points.is_some() {
                return Err(bad("frequency.temperature", "T > 0 replaces the xi rule by a Matsubara sum; drop rule, points and scale"));
            }
        } else if f.matsubara_terms.is_some() {
            return Err(bad("frequency.matsubara_terms", "only used when temperature > 0"));
        }
        if matches!(f.matsubara_terms, Some(0)) {
            return Err(bad("frequency.matsubara_terms", "must be at least 1"));
        }
        if let Some(prefix) = &c.output.prefix {
            if prefix.is_empty() || prefix.contains(['/', '\\']) {
                return Err(bad("output.prefix", "must be a plain, non-empty file name stem"));
            }
        }
        Ok(())
    }

    fn referenced_materials(&self) -> Vec<&str> {
        match &self.config.geometry {
            Geometry::Plates { material_1, material_2, gap, .. } => vec![material_1, material_2, gap],
            Geometry::Mirrors1d { bodies } => bodies.iter().map(|b| b.material.as_str()).collect(),
            _ => Vec::new(),
        }
    }
}

pub fn parse(text: &str) -> Result<Config, toml::de::Error> {
    toml::from_str(text)
}

fn resolve_materials(config: &Config, base_dir: &Path) -> Result<BTreeMap<String, MaterialModel>, CliError> {
    let mut out = BTreeMap::new();
    out.insert("vacuum".to_string(), MaterialModel::Vacuum);
    out.insert("perfect_metal".to_string(), MaterialModel::PerfectMetal);
    for (id, def) in &config.materials {
        let field = format!("materials.{id}");
        if BUILTIN_MATERIALS.contains(&id.as_str()) {
            return Err(bad(field, "this id is built in and cannot be redefined"));
        }
        let model = match def {
            MaterialDef::Vacuum => MaterialModel::Vacuum,
            MaterialDef::Constant { eps } => MaterialModel::Constant { eps: *eps },
            MaterialDef::Drude { omega_p, gamma } => MaterialModel::Drude { omega_p: *omega_p, gamma: *gamma },
            MaterialDef::Plasma { omega_p } => MaterialModel::Plasma { omega_p: *omega_p },
            MaterialDef::PerfectMetal => MaterialModel::PerfectMetal,
            MaterialDef::Tabulated { file } => {
                let path = base_dir.join(file);
                let text = fs::read_to_string(&path)
                    .map_err(|e| bad(format!("{field}.file"), format!("cannot read {}: {e}", path.display())))?;
                let table = Tabulated::parse(&text).map_err(|e| bad(format!("{field}.file"), format!("{}: {e}", path.display())))?;
                MaterialModel::Tabulated(table)
            }
        };
        let problems = model.validate();
        if !problems.is_empty() {
            return Err(bad(field, problems.join("; ")));
        }
        out.insert(id.clone(), model);
    }
    Ok(out)
}

fn absolute(p: &Path) -> PathBuf {
    if p.is_absolute() {
        return p.to_path_buf();
    }
    std::env::current_dir().map(|d| d.join(p)).unwrap_or_else(|_| p.to_path_buf())
}

fn bad(field: impl Into<String>, msg: impl Into<String>) -> CliError {
    CliError::Config(format!("{}: {}", field.into(), msg.into()))
}

fn positive(field: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(bad(field, format!("must be positive (got {v})")))
    }
}

fn finite(field: &str, v: f64) -> Result<(), CliError> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(bad(field, format!("must be finite (got {v})")))
    }
}
