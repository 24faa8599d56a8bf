//! Experiment configuration files (TOML).
//!
//! ```toml
//! name = "equilateral_n16"
//! seed = 24301            # optional
//!
//! [domain]
//! name = "equilateral_triangle"
//! params = []             # optional
//!
//! [problem]
//! refractive_index = "16"
//! h = 0.25
//! refinements = 6
//!
//! [window]
//! k_min = 1.0             # or "auto"
//! k_max = 2.3
//! count = 6
//! sigma = 2.0             # optional, default 1.1·k_min²
//!
//! [analysis]              # optional section
//! features = "auto"       # or a list of feature ids, e.g. ["P1", "P3"]
//! fields = ["u0", "u-u0"]
//! radii = "auto"          # or factors of the feature scale, e.g. [0.5, 0.25]
//! levels = 5
//! modes = 3               # analyse only the leading modes
//!
//! [output]                # optional section
//! dir = "runs/equilateral_n16"
//! vtk = true
//! plots = true
//!
//! [tolerances]            # optional section
//! residual = 1e-8
//! max_restarts = 300
//! ```
//!
//! Unknown keys anywhere are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analysis::FieldSelector;
use crate::problem::{parse_index, Domain, FeatureSpec, TransmissionProblem};
use crate::solver::SolverOptions;
use crate::{Error, Result};

pub const DEFAULT_SEED: u64 = 0x5eed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub name: String,
    #[serde(default = "default_seed")]
    pub seed: u64,
    pub domain: DomainConfig,
    pub problem: ProblemConfig,
    pub window: WindowConfig,
    #[serde(default)]
    pub analysis: AnalysisConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub tolerances: ToleranceConfig,
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    pub name: String,
    #[serde(default)]
    pub params: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub refractive_index: String,
    pub h: f64,
    #[serde(default)]
    pub refinements: usize,
}

/// A number or the keyword `"auto"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AutoOr<T> {
    Value(T),
    Keyword(String),
}

impl<T: Clone> AutoOr<T> {
    /// `None` means automatic.
    pub fn resolve(&self, key: &str) -> Result<Option<T>> {
        match self {
            AutoOr::Value(v) => Ok(Some(v.clone())),
            AutoOr::Keyword(s) if s == "auto" => Ok(None),
            AutoOr::Keyword(s) => Err(Error::Config(format!(
                "`{key}` must be a value or \"auto\", got \"{s}\""
            ))),
        }
    }
}

impl<T> Default for AutoOr<T> {
    fn default() -> Self {
        AutoOr::Keyword("auto".into())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowConfig {
    #[serde(default)]
    pub k_min: AutoOr<f64>,
    pub k_max: f64,
    pub count: usize,
    #[serde(default)]
    pub sigma: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    #[serde(default)]
    pub features: AutoOr<Vec<String>>,
    #[serde(default = "default_fields")]
    pub fields: Vec<String>,
    #[serde(default)]
    pub radii: AutoOr<Vec<f64>>,
    #[serde(default = "default_levels")]
    pub levels: usize,
    #[serde(default)]
    pub modes: Option<usize>,
}

fn default_fields() -> Vec<String> {
    vec!["u0".into(), "u-u0".into()]
}

fn default_levels() -> usize {
    5
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            features: AutoOr::default(),
            fields: default_fields(),
            radii: AutoOr::default(),
            levels: default_levels(),
            modes: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub dir: Option<PathBuf>,
    #[serde(default = "yes")]
    pub vtk: bool,
    #[serde(default = "yes")]
    pub plots: bool,
}

fn yes() -> bool {
    true
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: None,
            vtk: true,
            plots: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceConfig {
    #[serde(default = "default_residual")]
    pub residual: f64,
    #[serde(default = "default_restarts")]
    pub max_restarts: usize,
}

fn default_residual() -> f64 {
    SolverOptions::default().tol
}

fn default_restarts() -> usize {
    SolverOptions::default().max_restarts
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        ToleranceConfig {
            residual: default_residual(),
            max_restarts: default_restarts(),
        }
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.name.trim().is_empty() {
            return bad("`name` must not be empty".into());
        }
        self.problem().map_err(as_config)?;
        let p = &self.problem;
        if p.refinements > 10 {
            return bad(format!("refinements = {} exceeds 10", p.refinements));
        }
        let w = &self.window;
        if let Some(k) = w.k_min.resolve("window.k_min")? {
            if !(k > 0.0 && k < w.k_max) {
                return bad(format!("need 0 < k_min < k_max, got {k} and {}", w.k_max));
            }
        }
        if !(w.k_max > 0.0 && w.k_max.is_finite()) || w.count == 0 {
            return bad("window needs k_max > 0 and count ≥ 1".into());
        }
        if let Some(s) = w.sigma {
            if !(s > 0.0 && s.is_finite()) {
                return bad(format!("sigma must be positive, got {s}"));
            }
        }
        self.fields()?;
        self.features()?;
        if let Some(r) = self.analysis.radii.resolve("analysis.radii")? {
            if r.is_empty() || r.iter().any(|&f| !(f > 0.0 && f <= 1.0)) {
                return bad("radii factors must lie in (0, 1]".into());
            }
        }
        if self.analysis.levels == 0 || self.analysis.levels > 12 {
            return bad("analysis.levels must be in 1..=12".into());
        }
        let t = &self.tolerances;
        if !(t.residual > 0.0 && t.residual < 1e-2) || t.max_restarts == 0 {
            return bad("tolerances need 0 < residual < 1e-2 and max_restarts ≥ 1".into());
        }
        Ok(())
    }

    pub fn problem(&self) -> Result<TransmissionProblem> {
        let domain = Domain::from_name(&self.domain.name, &self.domain.params)?;
        let index = parse_index(&self.problem.refractive_index)?;
        let h = self.problem.h;
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidParameter(format!("h must be positive, got {h}")));
        }
        Ok(TransmissionProblem {
            domain,
            index,
            h,
            refinements: self.problem.refinements,
        })
    }

    pub fn fields(&self) -> Result<Vec<FieldSelector>> {
        if self.analysis.fields.is_empty() {
            return Err(Error::Config("analysis.fields must not be empty".into()));
        }
        self.analysis
            .fields
            .iter()
            .map(|f| FieldSelector::parse(f).map_err(as_config))
            .collect()
    }

    /// Selected features; an empty list means all default features.
    pub fn features(&self) -> Result<Vec<FeatureSpec>> {
        let all = self.problem().map_err(as_config)?.domain.default_features();
        match self.analysis.features.resolve("analysis.features")? {
            None => Ok(all),
            Some(ids) if ids.is_empty() => Ok(all),
            Some(ids) => ids
                .iter()
                .map(|id| {
                    all.iter().find(|f| &f.id == id).cloned().ok_or_else(|| {
                        let known: Vec<&str> = all.iter().map(|f| f.id.as_str()).collect();
                        Error::Config(format!("unknown feature `{id}`; available: {known:?}"))
                    })
                })
                .collect(),
        }
    }

    pub fn solver_options(&self) -> SolverOptions {
        SolverOptions {
            tol: self.tolerances.residual,
            max_restarts: self.tolerances.max_restarts,
            seed: self.seed,
        }
    }

    pub fn output_dir(&self) -> PathBuf {
        self.output
            .dir
            .clone()
            .unwrap_or_else(|| PathBuf::from("runs").join(&self.name))
    }
}

fn as_config(e: Error) -> Error {
    match e {
        Error::Config(_) => e,
        other => Error::Config(other.to_string()),
    }
}
