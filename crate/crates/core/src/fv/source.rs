//! Source operators `G` acting on whole cell fields.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::state::State;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum SourceSpec {
    Zero,
    /// `G(u) = c u` componentwise.
    Linear { c: f64 },
    /// `G(u) = scale * (K * u)` with a Gaussian `K` of standard deviation `width`, truncated at 4 widths.
    Convolution { scale: f64, width: f64 },
}

impl Default for SourceSpec {
    fn default() -> Self {
        SourceSpec::Zero
    }
}

/// A source spec discretized on a grid spacing.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceOperator {
    pub spec: SourceSpec,
    /// `K_m dx` for offsets `m = -half..=half`.
    weights: Vec<f64>,
    half: usize,
    pub lipschitz: f64,
}

impl SourceOperator {
    pub fn new(spec: &SourceSpec, dx: f64) -> Result<Self> {
        match *spec {
            SourceSpec::Zero => Ok(SourceOperator { spec: spec.clone(), weights: vec![], half: 0, lipschitz: 0.0 }),
            SourceSpec::Linear { c } => {
                if !c.is_finite() {
                    return Err(Error::param("fv_solver", "source.c", "must be finite"));
                }
                Ok(SourceOperator { spec: spec.clone(), weights: vec![], half: 0, lipschitz: c.abs() })
            }
            SourceSpec::Convolution { scale, width } => {
                if !(width > 0.0) || !scale.is_finite() {
                    return Err(Error::param("fv_solver", "source.width", "need width > 0 and finite scale"));
                }
                let half = (4.0 * width / dx).ceil() as usize;
                let norm = 1.0 / ((2.0 * std::f64::consts::PI).sqrt() * width);
                let weights: Vec<f64> = (0..=2 * half)
                    .map(|i| {
                        let y = (i as f64 - half as f64) * dx;
                        norm * (-0.5 * (y / width).powi(2)).exp() * dx
                    })
                    .collect();
                let lipschitz = scale.abs() * weights.iter().map(|w| w.abs()).sum::<f64>();
                Ok(SourceOperator { spec: spec.clone(), weights, half, lipschitz })
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.spec, SourceSpec::Zero)
    }

    /// `G(u)_j`; convolutions wrap around the grid.
    pub fn apply(&self, cells: &[State]) -> Vec<State> {
        match self.spec {
            SourceSpec::Zero => cells.iter().map(|u| State::zeros(u.dim())).collect(),
            SourceSpec::Linear { c } => cells.iter().map(|u| *u * c).collect(),
            SourceSpec::Convolution { scale, .. } => {
                let n = cells.len() as isize;
                let h = self.half as isize;
                (0..n)
                    .map(|j| {
                        let mut acc = State::zeros(cells[0].dim());
                        for (i, w) in self.weights.iter().enumerate() {
                            let m = i as isize - h;
                            let k = (j - m).rem_euclid(n) as usize;
                            acc = acc + cells[k] * *w;
                        }
                        acc * scale
                    })
                    .collect()
            }
        }
    }
}

/// Sampled evidence for translation invariance and the L2 / L-infinity bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceCertificate {
    pub pairs: usize,
    pub translation_error: f64,
    pub l2_ratio: f64,
    pub linf_ratio: f64,
    pub lipschitz: f64,
    pub pass: bool,
}

fn l2(a: &[State], dx: f64) -> f64 {
    (a.iter().map(|u| u.dot(u)).sum::<f64>() * dx).sqrt()
}

fn linf(a: &[State]) -> f64 {
    a.iter().fold(0.0, |m, u| m.max(u.norm_inf()))
}

/// Checks the operator on `pairs` random periodic fields of `n_cells` cells.
pub fn certify_source(op: &SourceOperator, n_cells: usize, dim: usize, dx: f64, pairs: usize, seed: u64) -> SourceCertificate {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let field = |rng: &mut ChaCha8Rng| -> Vec<State> {
        (0..n_cells)
            .map(|_| {
                let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
                State::new(&v)
            })
            .collect()
    };
    let (mut trans, mut r2, mut rinf) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..pairs {
        let u = field(&mut rng);
        let v = field(&mut rng);
        let shift = rng.gen_range(0..n_cells);
        let gu = op.apply(&u);
        let rolled: Vec<State> = (0..n_cells).map(|j| u[(j + n_cells - shift) % n_cells]).collect();
        let g_rolled = op.apply(&rolled);
        for j in 0..n_cells {
            trans = trans.max((g_rolled[j] - gu[(j + n_cells - shift) % n_cells]).norm_inf());
        }
        let gv = op.apply(&v);
        let dg: Vec<State> = gu.iter().zip(&gv).map(|(a, b)| *a - *b).collect();
        let du: Vec<State> = u.iter().zip(&v).map(|(a, b)| *a - *b).collect();
        r2 = r2.max(l2(&dg, dx) / l2(&du, dx));
        rinf = rinf.max(linf(&gu) / linf(&u));
    }
    let tol = 1e-12 * (1.0 + op.lipschitz);
    let pass = trans <= tol && r2 <= op.lipschitz + tol && rinf <= op.lipschitz + tol;
    SourceCertificate { pairs, translation_error: trans, l2_ratio: r2, linf_ratio: rinf, lipschitz: op.lipschitz, pass }
}
