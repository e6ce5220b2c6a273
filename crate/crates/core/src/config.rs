//! Strict TOML experiment configuration. Every block is optional; unknown keys are errors.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fv::{Boundary, Perturbation, ReferenceKind, SourceSpec};
use crate::shift::WeightOptions;
use crate::shock::Family;
use crate::system::{Region, SystemConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output")]
    pub output: String,
    #[serde(default)]
    pub system: SystemConfig,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub run: RunConfig,
    #[serde(default)]
    pub shock: ShockConfig,
    #[serde(default)]
    pub perturbation: Perturbation,
    #[serde(default)]
    pub reference: ReferenceConfig,
    #[serde(default)]
    pub source: SourceSpec,
    #[serde(default)]
    pub cone: ConeConfig,
    #[serde(default)]
    pub constants: ConstantsConfig,
    #[serde(default)]
    pub hugoniot: HugoniotConfig,
    #[serde(default)]
    pub hypotheses: HypothesesConfig,
}

fn default_output() -> String {
    "out".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default = "default_x_min")]
    pub x_min: f64,
    #[serde(default = "default_x_max")]
    pub x_max: f64,
    #[serde(default = "default_n_cells")]
    pub n_cells: usize,
}

fn default_x_min() -> f64 {
    -2.0
}
fn default_x_max() -> f64 {
    2.0
}
fn default_n_cells() -> usize {
    400
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    /// Also the evaluation horizon `t0`.
    #[serde(default = "default_t_end")]
    pub t_end: f64,
    #[serde(default)]
    pub boundary: Boundary,
}

fn default_cfl() -> f64 {
    0.45
}
fn default_t_end() -> f64 {
    0.5
}

/// Shock data in primitive variables. `u_r` defaults to the first-family locus point at `s_r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ShockConfig {
    #[serde(default)]
    pub u_l: Option<Vec<f64>>,
    #[serde(default)]
    pub u_r: Option<Vec<f64>>,
    #[serde(default)]
    pub s_r: Option<f64>,
    #[serde(default)]
    pub x0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceConfig {
    #[serde(default)]
    pub kind: ReferenceKind,
    #[serde(default = "default_refine")]
    pub refine: usize,
    /// Cells added on each side of the test grid; default a quarter of its length.
    #[serde(default)]
    pub extra_cells: Option<usize>,
    #[serde(default = "default_trace_offset")]
    pub trace_offset: usize,
    #[serde(default)]
    pub modulation_amplitude: f64,
    #[serde(default = "default_modulation_width")]
    pub modulation_width: f64,
    #[serde(default = "default_one")]
    pub store_stride: usize,
}

fn default_refine() -> usize {
    2
}
fn default_trace_offset() -> usize {
    12
}
fn default_modulation_width() -> f64 {
    0.1
}
fn default_one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConeConfig {
    #[serde(default = "default_radius")]
    pub radius: f64,
    /// Fixed information speed; sampled from the run when absent.
    #[serde(default)]
    pub r: Option<f64>,
}

fn default_radius() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantsConfig {
    /// Largest strength `B`; default `2 s_r`.
    #[serde(default)]
    pub b: Option<f64>,
    /// Smallest strength `rho`; default `s_r / 2`.
    #[serde(default)]
    pub rho: Option<f64>,
    #[serde(default)]
    pub region: Option<Region>,
    #[serde(default)]
    pub mollification_n: Option<usize>,
    #[serde(default = "default_factor")]
    pub dissipation_factor: f64,
    #[serde(default = "default_factor")]
    pub audit_factor: f64,
    #[serde(default)]
    pub fit: WeightOptions,
}

fn default_factor() -> f64 {
    10.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HugoniotConfig {
    /// Primitive base state; defaults to the shock's left state.
    #[serde(default)]
    pub base: Option<Vec<f64>>,
    #[serde(default = "default_s_max")]
    pub s_max: f64,
    #[serde(default = "default_hug_n")]
    pub n: usize,
    #[serde(default = "default_family")]
    pub family: Family,
    #[serde(default = "default_step")]
    pub step: f64,
}

fn default_s_max() -> f64 {
    2.0
}
fn default_hug_n() -> usize {
    200
}
fn default_family() -> Family {
    Family::First
}
fn default_step() -> f64 {
    1e-2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HypothesesConfig {
    #[serde(default = "default_n_bases")]
    pub n_bases: usize,
    #[serde(default = "default_hyp_s_max")]
    pub s_max: f64,
    #[serde(default = "default_hyp_rho")]
    pub rho: f64,
    #[serde(default = "default_hyp_n_s")]
    pub n_s: usize,
    #[serde(default = "default_n_probe")]
    pub n_probe: usize,
    /// Sweep length for the admissibility checks.
    #[serde(default = "default_hyp_b")]
    pub b: f64,
    /// `(s, s0)` grid of the strength-dissipation fit.
    #[serde(default = "default_fit_grid")]
    pub fit_grid: usize,
}

fn default_n_bases() -> usize {
    20
}
fn default_hyp_s_max() -> f64 {
    1.0
}
fn default_hyp_rho() -> f64 {
    0.1
}
fn default_hyp_n_s() -> usize {
    50
}
fn default_n_probe() -> usize {
    10
}
fn default_hyp_b() -> f64 {
    1.0
}
fn default_fit_grid() -> usize {
    50
}

macro_rules! default_via_empty {
    ($($t:ty),*) => {$(
        impl Default for $t {
            fn default() -> Self {
                toml::from_str("").expect("defaults parse")
            }
        }
    )*};
}
default_via_empty!(ExperimentConfig, GridConfig, RunConfig, ReferenceConfig, ConeConfig, ConstantsConfig, HugoniotConfig, HypothesesConfig);

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// Pretty TOML with every default filled in.
    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    /// Same experiment on a grid `factor` times finer.
    pub fn refined(&self, factor: usize) -> Self {
        let mut c = self.clone();
        c.grid.n_cells *= factor.max(1);
        c
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_gives_defaults() {
        let c = ExperimentConfig::from_toml("").unwrap();
        assert_eq!(c.grid.n_cells, 400);
        assert_eq!(c.run.cfl, 0.45);
        assert_eq!(c.source, SourceSpec::Zero);
        assert_eq!(c.constants.fit, WeightOptions::default());
        assert_eq!(c, ExperimentConfig::default());
    }

    #[test]
    fn unknown_keys_fail() {
        assert!(ExperimentConfig::from_toml("bogus = 1").is_err());
        assert!(ExperimentConfig::from_toml("[grid]\nn_cell = 10").is_err());
        assert!(ExperimentConfig::from_toml("[constants.fit]\nfoo = 1").is_err());
        let e = ExperimentConfig::from_toml("[source]\nkind = \"linear\"\nc = -0.1\nd = 1").unwrap_err();
        assert!(e.is_usage());
    }

    #[test]
    fn round_trip() {
        let text = r#"
seed = 7
[system]
name = "isentropic_euler"
gamma = 1.4
[shock]
u_l = [1.0, 0.0]
s_r = 0.5
[source]
kind = "linear"
c = -0.1
[reference]
kind = "simulated"
[constants.fit]
c_star = 0.0
"#;
        let c = ExperimentConfig::from_toml(text).unwrap();
        assert_eq!(c.reference.kind, ReferenceKind::Simulated);
        assert_eq!(c.constants.fit.c_star, Some(0.0));
        assert_eq!(ExperimentConfig::from_toml(&c.to_toml()).unwrap(), c);
        assert_eq!(c.refined(2).grid.n_cells, 800);
    }
}
