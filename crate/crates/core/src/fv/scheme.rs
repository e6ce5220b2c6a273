//! Rusanov scheme with explicit source.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::source::SourceOperator;
use super::FieldSnapshot;
use crate::error::{Error, Result};
use crate::state::State;
use crate::system::System;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    /// Zero-gradient ghost cells.
    #[default]
    Outflow,
    Periodic,
}

pub struct Scheme<'a> {
    pub sys: &'a dyn System,
    pub source: &'a SourceOperator,
    pub cfl: f64,
    pub boundary: Boundary,
}

const PAR_MIN: usize = 512;

impl<'a> Scheme<'a> {
    pub fn new(sys: &'a dyn System, source: &'a SourceOperator, cfl: f64, boundary: Boundary) -> Result<Self> {
        if !(cfl > 0.0 && cfl < 1.0) {
            return Err(Error::param("fv_solver", "cfl", format!("must lie in (0, 1), got {cfl}")));
        }
        Ok(Scheme { sys, source, cfl, boundary })
    }

    /// States on both sides of interface `i` (between cells `i-1` and `i`).
    fn sides(&self, cells: &[State], i: usize) -> (State, State) {
        let n = cells.len();
        match self.boundary {
            Boundary::Outflow => (cells[i.saturating_sub(1)], cells[i.min(n - 1)]),
            Boundary::Periodic => (cells[(i + n - 1) % n], cells[i % n]),
        }
    }

    /// Rusanov flux and its dissipation speed.
    pub fn flux(&self, ul: &State, ur: &State) -> (State, f64) {
        let alpha = self.sys.max_speed(ul).max(self.sys.max_speed(ur));
        let f = (self.sys.flux(ul) + self.sys.flux(ur)) * 0.5 - (*ur - *ul) * (0.5 * alpha);
        (f, alpha)
    }

    /// Matching numerical entropy flux.
    pub fn entropy_flux(&self, ul: &State, ur: &State, alpha: f64) -> f64 {
        0.5 * (self.sys.entropy_flux(ul) + self.sys.entropy_flux(ur))
            - 0.5 * alpha * (self.sys.entropy(ur) - self.sys.entropy(ul))
    }

    fn interface_fluxes(&self, cells: &[State]) -> Vec<(State, f64)> {
        let n = cells.len();
        (0..n + 1)
            .into_par_iter()
            .with_min_len(PAR_MIN)
            .map(|i| {
                let (l, r) = self.sides(cells, i);
                self.flux(&l, &r)
            })
            .collect()
    }

    pub fn max_speed(&self, snap: &FieldSnapshot) -> f64 {
        snap.cells.iter().fold(0.0, |m, u| m.max(self.sys.max_speed(u)))
    }

    /// `cfl dx / max|lambda|`, capped by `dt_max`.
    pub fn stable_dt(&self, snap: &FieldSnapshot, dt_max: f64) -> f64 {
        let s = self.max_speed(snap);
        if s > 0.0 {
            (self.cfl * snap.grid.dx / s).min(dt_max)
        } else {
            dt_max
        }
    }

    /// One conservative update of length `min(stable dt, dt_max)`.
    pub fn step(&self, snap: &FieldSnapshot, dt_max: f64) -> Result<(FieldSnapshot, f64)> {
        let dt = self.stable_dt(snap, dt_max);
        if !(dt > 1e-14 * snap.t.abs().max(1.0)) || !dt.is_finite() {
            return Err(Error::DtUnderflow { t: snap.t });
        }
        let fl = self.interface_fluxes(&snap.cells);
        let g = if self.source.is_zero() { None } else { Some(self.source.apply(&snap.cells)) };
        let lam = dt / snap.grid.dx;
        let t = snap.t + dt;
        let cells: Vec<State> = snap
            .cells
            .iter()
            .enumerate()
            .map(|(j, u)| {
                let mut v = *u - (fl[j + 1].0 - fl[j].0) * lam;
                if let Some(g) = &g {
                    v = v + g[j] * dt;
                }
                v
            })
            .collect();
        for (j, u) in cells.iter().enumerate() {
            if let Err(e) = self.sys.check(u) {
                return Err(Error::Positivity { cell: j, t, detail: e.to_string() });
            }
        }
        Ok((FieldSnapshot { grid: snap.grid, t, cells }, dt))
    }

    /// Steps to `t_end`, calling `observe` on the initial state and after every step.
    pub fn run(&self, initial: &FieldSnapshot, t_end: f64, mut observe: impl FnMut(&FieldSnapshot) -> Result<()>) -> Result<FieldSnapshot> {
        if !(t_end >= initial.t) {
            return Err(Error::param("fv_solver", "t_end", "must not precede the initial time"));
        }
        observe(initial)?;
        let mut cur = initial.clone();
        while cur.t < t_end {
            let remaining = t_end - cur.t;
            let (mut next, _) = self.step(&cur, remaining)?;
            if t_end - next.t <= 1e-12 * t_end.abs().max(1.0) {
                next.t = t_end;
            }
            observe(&next)?;
            cur = next;
        }
        Ok(cur)
    }

    /// Snapshots every `stride` steps; the initial and final states are always kept.
    pub fn simulate(&self, initial: &FieldSnapshot, t_end: f64, stride: usize) -> Result<Vec<FieldSnapshot>> {
        if stride == 0 {
            return Err(Error::param("fv_solver", "snapshot_stride", "must be at least 1"));
        }
        let mut out = Vec::new();
        let mut k = 0usize;
        let last = self.run(initial, t_end, |s| {
            if k % stride == 0 {
                out.push(s.clone());
            }
            k += 1;
            Ok(())
        })?;
        if out.last().map(|s| s.t) != Some(last.t) {
            out.push(last);
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResidualReport {
    /// Per step, per cell.
    pub residuals: Vec<Vec<f64>>,
    pub max_positive: f64,
    pub at: Option<(usize, usize)>,
}

/// Discrete entropy production of consecutive snapshots (stride 1).
pub fn entropy_residual(scheme: &Scheme, trajectory: &[FieldSnapshot]) -> ResidualReport {
    let sys = scheme.sys;
    let mut residuals = Vec::with_capacity(trajectory.len().saturating_sub(1));
    let mut max_positive = 0.0f64;
    let mut at = None;
    for (k, pair) in trajectory.windows(2).enumerate() {
        let (a, b) = (&pair[0], &pair[1]);
        let dt = b.t - a.t;
        let dx = a.grid.dx;
        let n = a.cells.len();
        let q: Vec<f64> = (0..=n)
            .map(|i| {
                let (l, r) = scheme.sides(&a.cells, i);
                let (_, alpha) = scheme.flux(&l, &r);
                scheme.entropy_flux(&l, &r, alpha)
            })
            .collect();
        let g = scheme.source.apply(&a.cells);
        let r: Vec<f64> = (0..n)
            .map(|j| {
                (sys.entropy(&b.cells[j]) - sys.entropy(&a.cells[j])) / dt + (q[j + 1] - q[j]) / dx
                    - sys.entropy_gradient(&a.cells[j]).dot(&g[j])
            })
            .collect();
        for (j, v) in r.iter().enumerate() {
            if *v > max_positive {
                max_positive = *v;
                at = Some((k, j));
            }
        }
        residuals.push(r);
    }
    ResidualReport { residuals, max_positive, at }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fv::source::SourceSpec;
    use crate::fv::Grid1D;
    use crate::system::{Burgers, IsentropicEuler};

    fn zero() -> SourceOperator {
        SourceOperator::new(&SourceSpec::Zero, 1.0).unwrap()
    }

    #[test]
    fn constant_state_is_fixed() {
        let sys = IsentropicEuler::new(1.4, 1.0).unwrap();
        let src = zero();
        let s = Scheme::new(&sys, &src, 0.45, Boundary::Outflow).unwrap();
        let g = Grid1D::new(0.0, 1.0, 16).unwrap();
        let f = FieldSnapshot::from_fn(&sys, g, |_| State::new(&[1.0, 0.3])).unwrap();
        let (next, dt) = s.step(&f, 1.0).unwrap();
        assert!(dt > 0.0);
        assert_eq!(next.cells, f.cells);
    }

    #[test]
    fn burgers_shock_speed() {
        let src = zero();
        let s = Scheme::new(&Burgers, &src, 0.45, Boundary::Outflow).unwrap();
        let g = Grid1D::new(-1.0, 1.0, 400).unwrap();
        let f = FieldSnapshot::from_fn(&Burgers, g, |x| State::scalar(if x < 0.0 { 1.0 } else { 0.0 })).unwrap();
        let end = s.simulate(&f, 1.0, 1000).unwrap().pop().unwrap();
        // midpoint crossing
        let j = end.cells.iter().position(|u| u[0] < 0.5).unwrap();
        let (x0, x1) = (g.center(j - 1), g.center(j));
        let (u0, u1) = (end.cells[j - 1][0], end.cells[j][0]);
        let x = x0 + (u0 - 0.5) / (u0 - u1) * (x1 - x0);
        assert!((x - 0.5).abs() < 3.0 * g.dx, "{x}");
    }

    #[test]
    fn linear_decay_tracks_ode() {
        let src = SourceOperator::new(&SourceSpec::Linear { c: -0.1 }, 0.1).unwrap();
        let s = Scheme::new(&Burgers, &src, 0.45, Boundary::Outflow).unwrap();
        let g = Grid1D::new(0.0, 1.0, 20).unwrap();
        let f = FieldSnapshot::from_fn(&Burgers, g, |_| State::scalar(1.0)).unwrap();
        let end = s.simulate(&f, 1.0, 1).unwrap().pop().unwrap();
        assert!((end.cells[5][0] - (-0.1f64).exp()).abs() < 0.05 * 0.45 * g.dx * 2.0);
    }

    #[test]
    fn periodic_mass_is_conserved() {
        let src = zero();
        let s = Scheme::new(&Burgers, &src, 0.45, Boundary::Periodic).unwrap();
        let g = Grid1D::new(0.0, 1.0, 64).unwrap();
        let f = FieldSnapshot::from_fn(&Burgers, g, |x| State::scalar((2.0 * std::f64::consts::PI * x).sin() + 0.5)).unwrap();
        let snaps = s.simulate(&f, 0.5, 1).unwrap();
        let m0 = f.mass()[0];
        for (k, w) in snaps.iter().enumerate() {
            assert!((w.mass()[0] - m0).abs() <= 1e-12 * (k as f64 + 1.0));
        }
    }

    #[test]
    fn residual_nonpositive_at_shock() {
        let src = zero();
        let s = Scheme::new(&Burgers, &src, 0.45, Boundary::Outflow).unwrap();
        let g = Grid1D::new(-1.0, 1.0, 100).unwrap();
        let f = FieldSnapshot::from_fn(&Burgers, g, |x| State::scalar(if x < 0.0 { 1.0 } else { 0.0 })).unwrap();
        let traj = s.simulate(&f, 0.3, 1).unwrap();
        let rep = entropy_residual(&s, &traj);
        assert!(rep.max_positive <= 1e-10, "{}", rep.max_positive);
        let min = rep.residuals.iter().flatten().fold(0.0f64, |m, v| m.min(*v));
        assert!(min < -1e-3);
    }

    #[test]
    fn bad_cfl() {
        let src = zero();
        assert!(Scheme::new(&Burgers, &src, 1.0, Boundary::Outflow).is_err());
        assert!(Scheme::new(&Burgers, &src, 0.0, Boundary::Outflow).is_err());
    }
}
