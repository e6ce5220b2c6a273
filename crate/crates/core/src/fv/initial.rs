//! Shock initial data and smooth compactly supported perturbations.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::state::State;

/// `(1 - z^2)^3` on `|z| < 1`.
pub fn bump(z: f64) -> f64 {
    if z.abs() < 1.0 {
        (1.0 - z * z).powi(3)
    } else {
        0.0
    }
}

/// Single discontinuity at `x0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShockData {
    pub u_l: State,
    pub u_r: State,
    pub x0: f64,
}

impl ShockData {
    pub fn eval(&self, x: f64) -> State {
        if x < self.x0 {
            self.u_l
        } else {
            self.u_r
        }
    }
}

fn default_count() -> usize {
    3
}

fn default_span() -> f64 {
    0.25
}

/// Sum of `count` bumps of height `amplitude` and half-width `width`, centered at
/// random points of `[x0 - span, x0 + span]` with random unit directions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Perturbation {
    pub amplitude: f64,
    pub width: f64,
    pub count: usize,
    pub span: f64,
    pub seed: u64,
}

impl Default for Perturbation {
    fn default() -> Self {
        Perturbation { amplitude: 0.0, width: 0.1, count: default_count(), span: default_span(), seed: 0 }
    }
}

/// Placed bumps, ready to evaluate.
#[derive(Debug, Clone, PartialEq)]
pub struct BumpField {
    pub amplitude: f64,
    pub width: f64,
    pub bumps: Vec<(f64, State)>,
}

impl BumpField {
    pub fn eval(&self, x: f64, dim: usize) -> State {
        let mut acc = State::zeros(dim);
        if self.amplitude == 0.0 {
            return acc;
        }
        for (c, d) in &self.bumps {
            acc = acc + *d * (self.amplitude * bump((x - c) / self.width));
        }
        acc
    }

    /// Two bumps along the first component at `x0 -/+ 2 width`.
    pub fn side_modulation(amplitude: f64, width: f64, x0: f64, dim: usize) -> Self {
        let e = State::unit(dim, 0);
        BumpField { amplitude, width, bumps: vec![(x0 - 2.0 * width, e), (x0 + 2.0 * width, e)] }
    }
}

impl Perturbation {
    pub fn validate(&self) -> Result<()> {
        if !self.amplitude.is_finite() || self.amplitude < 0.0 {
            return Err(Error::param("fv_solver", "perturbation.amplitude", "must be finite and nonnegative"));
        }
        if !(self.width > 0.0) || !(self.span >= 0.0) {
            return Err(Error::param("fv_solver", "perturbation.width", "need width > 0 and span >= 0"));
        }
        Ok(())
    }

    pub fn place(&self, x0: f64, dim: usize) -> BumpField {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let bumps = (0..self.count)
            .map(|_| {
                let c = x0 + if self.span > 0.0 { rng.gen_range(-self.span..=self.span) } else { 0.0 };
                let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..=1.0)).collect();
                let mut d = State::new(&v);
                let n = d.norm();
                d = if n > 1e-8 { d * (1.0 / n) } else { State::unit(dim, 0) };
                (c, d)
            })
            .collect();
        BumpField { amplitude: self.amplitude, width: self.width, bumps }
    }
}
