//! Experiment configuration: `key = value` lines under `[section]`
//! headers (TOML). Unknown keys are errors; every error carries the line it
//! was found on.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::discretization::SpaceKind;
use crate::mesh::{DirichletSpec, Geometry};
use crate::operators::{BackendKind, DEFAULT_ALPHA, DEFAULT_ORACLE_DEPTH};
use crate::precond::{BETA_LOCAL, BETA_UNIFORM};
use crate::spectral::{DEFAULT_MAX_ITERS, DEFAULT_SEED, DEFAULT_TOL, DENSE_EIG_MAX_N};
use crate::{Error, Result};

/// Documented defaults, shown by `opprecond run --help`.
pub const DEFAULTS_HELP: &str = "\
config sections and defaults (flags override the file, the file overrides defaults):
  [experiment] geometry = interval | closed-polygon | ellipse | unit-square | cube-surface  (required)
               sides = 4, radius = 0.25, length = 1.0, ellipse_a = 0.25, ellipse_b = 0.15
               initial_elements = 1 (4 for ellipse), levels = 4, refinement = uniform | corner-local (uniform)
               dirichlet = none | boundary  (boundary for interval and unit-square, none otherwise)
  [space]      kind = dg0 | dg<l> | cg1 | cg<l>  (dg0)
  [operator]   backend = identity | sl-curve | order2  (identity)
               s = sobolev index of the backend (0, 1/2, 1), alpha = 0.05,
               oracle_depth = 4, guard = true
  [precond]    variants = [new, jacobi]  (new | jacobi | opp | ssc)
               beta = 1.25 (uniform) or 1.2 (corner-local); a list runs a sweep
  [spectral]   dense_eig_max_n = 2048, tol = 1e-8, max_iters = 300, seed = 20240917
  [output]     csv = <path>, table = <path>, timings = false";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Refinement {
    Uniform,
    CornerLocal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrecondChoice {
    New,
    Jacobi,
    Opp,
    Ssc,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub geometry: Geometry,
    pub initial_elements: usize,
    pub dirichlet: DirichletSpec,
    pub refinement: Refinement,
    pub levels: usize,
    pub space_kind: SpaceKind,
    pub degree: usize,
    pub backend: BackendKind,
    pub s: f64,
    pub alpha: f64,
    pub oracle_depth: usize,
    pub guard: bool,
    pub betas: Vec<f64>,
    pub variants: Vec<PrecondChoice>,
    pub dense_eig_max_n: usize,
    pub tol: f64,
    pub max_iters: usize,
    pub seed: u64,
    pub csv: Option<PathBuf>,
    pub table: Option<PathBuf>,
    pub timings: bool,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum BetaValue {
    One(f64),
    Many(Vec<f64>),
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    pub geometry: Option<String>,
    pub sides: Option<usize>,
    pub radius: Option<f64>,
    pub length: Option<f64>,
    pub ellipse_a: Option<f64>,
    pub ellipse_b: Option<f64>,
    pub initial_elements: Option<usize>,
    pub levels: Option<usize>,
    pub refinement: Option<String>,
    pub dirichlet: Option<String>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceSection {
    pub kind: Option<String>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorSection {
    pub backend: Option<String>,
    pub s: Option<f64>,
    pub alpha: Option<f64>,
    pub oracle_depth: Option<usize>,
    pub guard: Option<bool>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrecondSection {
    pub variants: Option<Vec<String>>,
    pub beta: Option<BetaValue>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectralSection {
    pub dense_eig_max_n: Option<usize>,
    pub tol: Option<f64>,
    pub max_iters: Option<usize>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub csv: Option<PathBuf>,
    pub table: Option<PathBuf>,
    pub timings: Option<bool>,
}

/// The file as written, before defaults are filled in.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default)]
    pub experiment: ExperimentSection,
    #[serde(default)]
    pub space: SpaceSection,
    #[serde(default)]
    pub operator: OperatorSection,
    #[serde(default)]
    pub precond: PrecondSection,
    #[serde(default)]
    pub spectral: SpectralSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(skip)]
    text: String,
}

/// Command-line values; each replaces the file's key of the same name.
#[derive(Debug, Clone, Default)]
pub struct ConfigOverrides {
    pub geometry: Option<String>,
    pub levels: Option<usize>,
    pub space: Option<String>,
    pub backend: Option<String>,
    pub s: Option<f64>,
    pub alpha: Option<f64>,
    pub beta: Option<Vec<f64>>,
    pub precond: Option<Vec<String>>,
    pub refine: Option<String>,
    pub out: Option<PathBuf>,
    pub table: Option<PathBuf>,
    pub timings: Option<bool>,
    pub seed: Option<u64>,
}

fn line_of_offset(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut f: ConfigFile = toml::from_str(text).map_err(|e| Error::Parse {
            line: e.span().map(|s| line_of_offset(text, s.start)).unwrap_or(0),
            msg: e.message().trim().to_string(),
        })?;
        f.text = text.to_string();
        Ok(f)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn apply(&mut self, o: &ConfigOverrides) {
        macro_rules! set {
            ($dst:expr, $src:expr) => {
                if let Some(v) = $src.clone() {
                    $dst = Some(v);
                }
            };
        }
        set!(self.experiment.geometry, o.geometry);
        set!(self.experiment.levels, o.levels);
        set!(self.experiment.refinement, o.refine);
        set!(self.space.kind, o.space);
        set!(self.operator.backend, o.backend);
        set!(self.operator.s, o.s);
        set!(self.operator.alpha, o.alpha);
        set!(self.precond.variants, o.precond);
        set!(self.output.csv, o.out);
        set!(self.output.table, o.table);
        set!(self.output.timings, o.timings);
        set!(self.spectral.seed, o.seed);
        if let Some(b) = &o.beta {
            self.precond.beta = Some(BetaValue::Many(b.clone()));
        }
    }

    /// Line of `key` inside `[section]`, 0 when it came from the command
    /// line or is missing.
    fn line(&self, section: &str, key: &str) -> usize {
        let mut current = String::new();
        for (i, l) in self.text.lines().enumerate() {
            let t = l.trim();
            if t.starts_with('[') {
                current = t.trim_matches(|c| c == '[' || c == ']').trim().to_string();
            } else if current == section
                && t.strip_prefix(key).map(|r| r.trim_start().starts_with('=')).unwrap_or(false)
            {
                return i + 1;
            }
        }
        0
    }

    fn err(&self, section: &str, key: &str, msg: String) -> Error {
        Error::Parse { line: self.line(section, key), msg }
    }

    pub fn resolve(&self) -> Result<ExperimentConfig> {
        let ex = &self.experiment;
        let gname = ex.geometry.as_deref().ok_or_else(|| self.err("experiment", "geometry", "geometry is required".into()))?;
        let geometry = match gname {
            "interval" => Geometry::Interval { length: ex.length.unwrap_or(1.0) },
            "closed-polygon" => {
                Geometry::ClosedPolygon { sides: ex.sides.unwrap_or(4), radius: ex.radius.unwrap_or(0.25) }
            }
            "ellipse" => Geometry::Ellipse { a: ex.ellipse_a.unwrap_or(0.25), b: ex.ellipse_b.unwrap_or(0.15) },
            "unit-square" => Geometry::UnitSquare,
            "cube-surface" => Geometry::CubeSurface,
            g => return Err(self.err("experiment", "geometry", format!("unknown geometry `{g}`"))),
        };
        let dirichlet = match ex.dirichlet.as_deref() {
            None if geometry.is_closed() => DirichletSpec::None,
            None => DirichletSpec::Boundary,
            Some("none") => DirichletSpec::None,
            Some("boundary") => DirichletSpec::Boundary,
            Some(d) => return Err(self.err("experiment", "dirichlet", format!("unknown dirichlet `{d}`"))),
        };
        let refinement = match ex.refinement.as_deref().unwrap_or("uniform") {
            "uniform" => Refinement::Uniform,
            "corner-local" | "corner_local" => Refinement::CornerLocal,
            r => return Err(self.err("experiment", "refinement", format!("unknown refinement `{r}`"))),
        };
        let levels = ex.levels.unwrap_or(4);
        if levels == 0 {
            return Err(self.err("experiment", "levels", "levels must be at least 1".into()));
        }
        // an ellipse is resolved by its panels, so one is not a mesh
        let initial_elements = ex.initial_elements.unwrap_or(if matches!(geometry, Geometry::Ellipse { .. }) { 4 } else { 1 });
        if initial_elements == 0 {
            return Err(self.err("experiment", "initial_elements", "initial_elements must be at least 1".into()));
        }

        let kind = self.space.kind.as_deref().unwrap_or("dg0");
        let (space_kind, degree) = parse_space(kind).ok_or_else(|| self.err("space", "kind", format!("unknown space `{kind}`")))?;

        let backend = match self.operator.backend.as_deref().unwrap_or("identity") {
            "identity" => BackendKind::Identity,
            "sl-curve" | "minus1_curve" => BackendKind::SingleLayerCurve,
            "order2" | "minus2" => BackendKind::Order2,
            b => return Err(self.err("operator", "backend", format!("unknown backend `{b}`"))),
        };
        let s = self.operator.s.unwrap_or(backend.sobolev_index());
        if (s - backend.sobolev_index()).abs() > 1e-12 {
            return Err(self.err(
                "operator",
                "s",
                format!("s = {s} does not match the backend's index {}", backend.sobolev_index()),
            ));
        }
        let alpha = self.operator.alpha.unwrap_or(DEFAULT_ALPHA);
        if alpha <= 0.0 {
            return Err(self.err("operator", "alpha", "alpha must be positive".into()));
        }
        let oracle_depth = self.operator.oracle_depth.unwrap_or(DEFAULT_ORACLE_DEPTH);

        let mut variants = Vec::new();
        let names = self.precond.variants.clone().unwrap_or_else(|| vec!["new".into(), "jacobi".into()]);
        for v in &names {
            let c = match v.as_str() {
                "new" => PrecondChoice::New,
                "jacobi" => PrecondChoice::Jacobi,
                "opp" => PrecondChoice::Opp,
                "ssc" => PrecondChoice::Ssc,
                _ => return Err(self.err("precond", "variants", format!("unknown preconditioner `{v}`"))),
            };
            if !variants.contains(&c) {
                variants.push(c);
            }
        }
        if variants.is_empty() {
            return Err(self.err("precond", "variants", "no preconditioner requested".into()));
        }
        let default_beta = if refinement == Refinement::Uniform { BETA_UNIFORM } else { BETA_LOCAL };
        let betas = match &self.precond.beta {
            None => vec![default_beta],
            Some(BetaValue::One(b)) => vec![*b],
            Some(BetaValue::Many(b)) => b.clone(),
        };
        if betas.is_empty() || betas.iter().any(|b| !(*b > 0.0)) {
            return Err(self.err("precond", "beta", "beta values must be positive".into()));
        }

        let sp = &self.spectral;
        let tol = sp.tol.unwrap_or(DEFAULT_TOL);
        if !(tol > 0.0) {
            return Err(self.err("spectral", "tol", "tol must be positive".into()));
        }
        Ok(ExperimentConfig {
            geometry,
            initial_elements,
            dirichlet,
            refinement,
            levels,
            space_kind,
            degree,
            backend,
            s,
            alpha,
            oracle_depth,
            guard: self.operator.guard.unwrap_or(true),
            betas,
            variants,
            dense_eig_max_n: sp.dense_eig_max_n.unwrap_or(DENSE_EIG_MAX_N),
            tol,
            max_iters: sp.max_iters.unwrap_or(DEFAULT_MAX_ITERS).max(1),
            seed: sp.seed.unwrap_or(DEFAULT_SEED),
            csv: self.output.csv.clone(),
            table: self.output.table.clone(),
            timings: self.output.timings.unwrap_or(false),
        })
    }
}

/// `dg<l>` or `cg<l>`.
pub fn parse_space(s: &str) -> Option<(SpaceKind, usize)> {
    let (prefix, deg) = s.split_at(s.len().min(2));
    let deg: usize = deg.parse().ok()?;
    match (prefix, deg) {
        ("dg", l) => Some((SpaceKind::DiscPoly, l)),
        ("cg", 1) => Some((SpaceKind::ContLinear, 1)),
        ("cg", l) if l >= 2 => Some((SpaceKind::ContPoly, l)),
        _ => None,
    }
}

pub fn parse_config(path: &Path) -> Result<ExperimentConfig> {
    ConfigFile::load(path)?.resolve()
}

pub fn parse_config_str(text: &str) -> Result<ExperimentConfig> {
    ConfigFile::parse(text)?.resolve()
}
