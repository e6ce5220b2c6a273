//! Error type shared by every module. Each variant names the module at fault.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("system_model: inadmissible state {state}: {constraint}")]
    Domain { state: String, constraint: String },

    #[error("system_model: hyperbolicity lost at {state}: {detail}")]
    Hyperbolicity { state: String, detail: String },

    #[error("{module}: invalid parameter `{param}`: {reason}")]
    Parameter { module: &'static str, param: &'static str, reason: String },

    #[error("{module}: sampling failed: {detail}")]
    Sampling { module: &'static str, detail: String },

    #[error("shock_curves: continuation failed at s = {last_s} (target {target}): {detail}")]
    Continuation { last_s: f64, target: f64, detail: String },

    #[error("shock_curves: locus left the admissible set, s_u = {s_u}: {detail}")]
    DomainExit { s_u: f64, detail: String },

    #[error("shock_curves: hypothesis fails: {0}")]
    Hypothesis(String),

    #[error("shift_filippov: weight a = {a} too large: {detail}")]
    WeightTooLarge { a: f64, detail: String },

    #[error("fv_solver: inadmissible cell {cell} at t = {t} ({detail}); try a smaller cfl")]
    Positivity { cell: usize, t: f64, detail: String },

    #[error("fv_solver: time step underflow at t = {t}")]
    DtUnderflow { t: f64 },

    #[error("fv_solver: reference solution invalid: {0}")]
    ReferenceInvalid(String),

    #[error("shift_filippov: shift left the grid at t = {t} (h = {h})")]
    ShiftExit { t: f64, h: f64 },

    #[error("contraction_harness: x + X = {x} lies outside the reference grid [{lo}, {hi}]")]
    Extension { x: f64, lo: f64, hi: f64 },

    #[error("config: {0}")]
    Config(String),
}

impl Error {
    pub fn param(module: &'static str, param: &'static str, reason: impl Into<String>) -> Self {
        Error::Parameter { module, param, reason: reason.into() }
    }

    /// True for configuration or parameter mistakes, as opposed to numerical failures.
    pub fn is_usage(&self) -> bool {
        matches!(self, Error::Parameter { .. } | Error::Config(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
