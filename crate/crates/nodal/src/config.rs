//! Run configuration: per-module tolerance overrides, seed and output
//! defaults. Every field is optional and falls back to the module default.

use std::path::{Path, PathBuf};

use nodal_core::ding::DingConfig;
use nodal_core::numerics::{OdeSpec, QuadratureSpec};
use nodal_core::obstruction::CertifySpec;
use serde::{Deserialize, Serialize};

use crate::document::{check_version, SCHEMA_VERSION};
use crate::error::Result;
use crate::io::read_document;
use crate::schema::SchemaKind;

/// Environment variable naming the default configuration file.
pub const CONFIG_ENV: &str = "NODAL_CONFIG";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
    /// Directory for relative `--out` paths.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Tolerances::is_empty")]
    pub tolerances: Tolerances,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            schema_version: SCHEMA_VERSION,
            seed: None,
            format: None,
            output_dir: None,
            tolerances: Tolerances::default(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quadrature_1d: Option<QuadratureOverride>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quadrature_2d: Option<QuadratureOverride>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub montecarlo: Option<QuadratureOverride>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ode: Option<OdeOverride>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ding: Option<DingOverride>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certify: Option<CertifyOverride>,
}

impl Tolerances {
    fn is_empty(&self) -> bool {
        *self == Tolerances::default()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct QuadratureOverride {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rel_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub abs_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_evals: Option<usize>,
}

impl QuadratureOverride {
    fn apply(o: Option<&Self>, mut spec: QuadratureSpec) -> QuadratureSpec {
        if let Some(o) = o {
            spec.rel_tol = o.rel_tol.unwrap_or(spec.rel_tol);
            spec.abs_tol = o.abs_tol.unwrap_or(spec.abs_tol);
            spec.max_evals = o.max_evals.unwrap_or(spec.max_evals);
        }
        spec
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct OdeOverride {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rel_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub abs_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_steps: Option<usize>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct DingOverride {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scan_points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scan_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scan_max: Option<f64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct CertifyOverride {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fd_step: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gradient_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_ell: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scaling_slack: Option<f64>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let cfg: RunConfig = read_document(path, SchemaKind::RunConfig)?;
        check_version(cfg.schema_version)?;
        Ok(cfg)
    }

    /// `explicit`, else the file named by `NODAL_CONFIG`, else defaults.
    pub fn resolve(explicit: Option<&Path>) -> Result<Self> {
        if let Some(p) = explicit {
            return Self::load(p);
        }
        match std::env::var_os(CONFIG_ENV) {
            Some(p) if !p.is_empty() => Self::load(Path::new(&p)),
            _ => Ok(Self::default()),
        }
    }

    pub fn quadrature_1d(&self) -> QuadratureSpec {
        QuadratureOverride::apply(self.tolerances.quadrature_1d.as_ref(), QuadratureSpec::adaptive_1d())
    }

    pub fn quadrature_2d(&self) -> QuadratureSpec {
        QuadratureOverride::apply(self.tolerances.quadrature_2d.as_ref(), QuadratureSpec::compactified_2d())
    }

    pub fn montecarlo(&self, seed: u64) -> QuadratureSpec {
        QuadratureOverride::apply(self.tolerances.montecarlo.as_ref(), QuadratureSpec::montecarlo(seed))
    }

    /// ODE settings for the mass computation.
    pub fn ode(&self) -> OdeSpec {
        let mut spec = OdeSpec::default().with_tolerances(1e-13, 1e-14);
        if let Some(o) = &self.tolerances.ode {
            spec.rel_tol = o.rel_tol.unwrap_or(spec.rel_tol);
            spec.abs_tol = o.abs_tol.unwrap_or(spec.abs_tol);
            spec.max_steps = o.max_steps.unwrap_or(spec.max_steps);
        }
        spec
    }

    pub fn ding(&self) -> DingConfig {
        let mut cfg = DingConfig::default();
        if let Some(o) = &self.tolerances.ding {
            cfg.residual_tol = o.residual_tol.unwrap_or(cfg.residual_tol);
            cfg.scan_points = o.scan_points.unwrap_or(cfg.scan_points);
            cfg.scan_min = o.scan_min.unwrap_or(cfg.scan_min);
            cfg.scan_max = o.scan_max.unwrap_or(cfg.scan_max);
        }
        cfg
    }

    pub fn certify(&self) -> CertifySpec {
        let mut spec = CertifySpec::default();
        if let Some(o) = &self.tolerances.certify {
            spec.fd_step = o.fd_step.unwrap_or(spec.fd_step);
            spec.gradient_tol = o.gradient_tol.unwrap_or(spec.gradient_tol);
            spec.max_ell = o.max_ell.unwrap_or(spec.max_ell);
            spec.scaling_slack = o.scaling_slack.unwrap_or(spec.scaling_slack);
        }
        spec
    }

    /// `path` relative to `output_dir` when it is relative.
    pub fn output_path(&self, path: &Path) -> PathBuf {
        match &self.output_dir {
            Some(dir) if path.is_relative() => dir.join(path),
            _ => path.to_path_buf(),
        }
    }
}
