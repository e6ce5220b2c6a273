//! First-order finite-volume solver, source operators, initial data and reference solutions.

pub mod initial;
pub mod reference;
pub mod scheme;
pub mod source;

pub use initial::{Perturbation, ShockData};
pub use reference::{ReferenceKind, ReferenceSolution};
pub use scheme::{entropy_residual, Boundary, ResidualReport, Scheme};
pub use source::{certify_source, SourceCertificate, SourceOperator, SourceSpec};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::state::State;
use crate::system::System;

/// Uniform grid of `n_cells` cells starting at `x_min`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    pub x_min: f64,
    pub dx: f64,
    pub n_cells: usize,
}

impl Grid1D {
    pub fn new(x_min: f64, x_max: f64, n_cells: usize) -> Result<Self> {
        if n_cells < 8 {
            return Err(Error::param("fv_solver", "n_cells", format!("need at least 8 cells, got {n_cells}")));
        }
        if !(x_max > x_min) || !x_min.is_finite() || !x_max.is_finite() {
            return Err(Error::param("fv_solver", "grid", "need finite x_min < x_max"));
        }
        Ok(Grid1D { x_min, dx: (x_max - x_min) / n_cells as f64, n_cells })
    }

    pub fn x_max(&self) -> f64 {
        self.x_min + self.n_cells as f64 * self.dx
    }

    pub fn center(&self, j: usize) -> f64 {
        self.x_min + (j as f64 + 0.5) * self.dx
    }

    /// Cell containing `x`, if any.
    pub fn cell_of(&self, x: f64) -> Option<usize> {
        let k = ((x - self.x_min) / self.dx).floor();
        if k >= 0.0 && (k as usize) < self.n_cells {
            Some(k as usize)
        } else {
            None
        }
    }

    /// Same spacing, `extra` cells added on each side and every cell split into `refine`.
    pub fn widened(&self, extra: usize, refine: usize) -> Grid1D {
        Grid1D {
            x_min: self.x_min - extra as f64 * self.dx,
            dx: self.dx / refine as f64,
            n_cells: (self.n_cells + 2 * extra) * refine,
        }
    }
}

/// Cell values of `u(., t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSnapshot {
    pub grid: Grid1D,
    pub t: f64,
    pub cells: Vec<State>,
}

impl FieldSnapshot {
    /// Samples `init` at the cell centers.
    pub fn from_fn(sys: &dyn System, grid: Grid1D, init: impl Fn(f64) -> State) -> Result<Self> {
        let cells: Vec<State> = (0..grid.n_cells).map(|j| init(grid.center(j))).collect();
        for (j, u) in cells.iter().enumerate() {
            sys.check(u).map_err(|e| Error::Positivity { cell: j, t: 0.0, detail: format!("initial data: {e}") })?;
        }
        Ok(FieldSnapshot { grid, t: 0.0, cells })
    }

    /// Piecewise-linear interpolation between cell centers, constant beyond the end centers.
    pub fn interpolate(&self, x: f64) -> State {
        let g = &self.grid;
        let p = (x - g.x_min) / g.dx - 0.5;
        if p <= 0.0 {
            return self.cells[0];
        }
        let last = g.n_cells - 1;
        if p >= last as f64 {
            return self.cells[last];
        }
        let i = p.floor() as usize;
        let w = p - i as f64;
        self.cells[i].lerp(&self.cells[i + 1], w)
    }

    /// Value of the cell containing `x`, clamped to the grid.
    pub fn cell_value(&self, x: f64) -> State {
        let j = ((x - self.grid.x_min) / self.grid.dx).floor().clamp(0.0, (self.grid.n_cells - 1) as f64);
        self.cells[j as usize]
    }

    /// `sum u dx`.
    pub fn mass(&self) -> State {
        let mut m = State::zeros(self.cells[0].dim());
        for u in &self.cells {
            m = m + *u;
        }
        m * self.grid.dx
    }

    pub fn sup_norm(&self) -> f64 {
        self.cells.iter().fold(0.0, |m, u| m.max(u.norm_inf()))
    }
}
