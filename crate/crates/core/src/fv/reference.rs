//! Reference solutions `ub` with a single 1-shock along `s(t)`.

use serde::{Deserialize, Serialize};

use super::initial::{BumpField, ShockData};
use super::scheme::{Boundary, Scheme};
use super::source::SourceOperator;
use super::{FieldSnapshot, Grid1D};
use crate::error::{Error, Result};
use crate::state::State;
use crate::system::System;
use crate::shift::filippov::{advance_frozen, offset_traces, FrozenVelocity};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReferenceKind {
    /// Travelling discontinuity, valid for a zero source.
    #[default]
    Exact,
    /// Unperturbed data run on an aligned grid; the path is that grid's own shift.
    Simulated,
}

/// Speed of the jump `(u_l, u_r)` by least squares, with the Rankine-Hugoniot residual.
pub fn rh_speed(sys: &dyn System, u_l: &State, u_r: &State) -> (f64, f64) {
    let du = *u_r - *u_l;
    let df = sys.flux(u_r) - sys.flux(u_l);
    let d2 = du.dot(&du);
    if d2 == 0.0 {
        return (sys.first_eigenvalue(u_l), df.norm());
    }
    let sigma = df.dot(&du) / d2;
    (sigma, (df - du * sigma).norm())
}

#[derive(Debug, Clone)]
struct Simulated {
    /// Stored snapshots and the path position at each.
    snaps: Vec<FieldSnapshot>,
    snap_t: Vec<f64>,
    snap_s: Vec<f64>,
    /// Every solver step.
    times: Vec<f64>,
    path: Vec<f64>,
    sdot: Vec<f64>,
    traces: Vec<(State, State)>,
    /// Half-width of the excluded band around the path.
    band: f64,
}

#[derive(Debug, Clone)]
pub struct ReferenceSolution {
    pub kind: ReferenceKind,
    pub shock: ShockData,
    pub sigma: f64,
    sim: Option<Simulated>,
    /// Smallest `|ub+ - ub-|` over the run.
    pub gap: f64,
    /// Lipschitz constant away from the path.
    pub lipschitz: f64,
    pub rh_residual: f64,
    pub sup_speed: f64,
    pub t_end: f64,
}

/// Settings for [`ReferenceSolution::simulate`].
pub struct SimulationSetup<'a> {
    pub sys: &'a dyn System,
    pub source: &'a SourceOperator,
    pub cfl: f64,
    /// Grid of the compared solution; the reference grid contains it.
    pub grid: Grid1D,
    pub extra_cells: usize,
    pub refine: usize,
    pub shock: ShockData,
    pub modulation: BumpField,
    pub t_end: f64,
    pub a: f64,
    pub c_star: f64,
    pub mollification: usize,
    pub trace_offset: usize,
    /// Snapshots kept every this many steps.
    pub store_stride: usize,
}

impl ReferenceSolution {
    /// Exact travelling shock; errors if `(u_l, u_r)` violates Rankine-Hugoniot.
    pub fn exact(sys: &dyn System, shock: ShockData, t_end: f64) -> Result<Self> {
        sys.check(&shock.u_l)?;
        sys.check(&shock.u_r)?;
        let (sigma, res) = rh_speed(sys, &shock.u_l, &shock.u_r);
        let scale = 1.0 + sys.flux(&shock.u_l).norm() + shock.u_l.norm();
        if res > 1e-8 * scale {
            return Err(Error::ReferenceInvalid(format!("states are not joined by a shock (RH residual {res:.3e})")));
        }
        let gap = (shock.u_r - shock.u_l).norm();
        if gap == 0.0 {
            return Err(Error::ReferenceInvalid("zero shock strength".into()));
        }
        Ok(ReferenceSolution {
            kind: ReferenceKind::Exact,
            shock,
            sigma,
            sim: None,
            gap,
            lipschitz: 0.0,
            rh_residual: res,
            sup_speed: sys.max_speed(&shock.u_l).max(sys.max_speed(&shock.u_r)),
            t_end,
        })
    }

    pub fn simulate(setup: &SimulationSetup) -> Result<Self> {
        let sys = setup.sys;
        if setup.refine == 0 || setup.store_stride == 0 {
            return Err(Error::param("fv_solver", "reference.refine", "must be at least 1"));
        }
        let grid = setup.grid.widened(setup.extra_cells, setup.refine);
        let dim = setup.shock.u_l.dim();
        let init = FieldSnapshot::from_fn(sys, grid, |x| setup.shock.eval(x) + setup.modulation.eval(x, dim))?;
        let scheme = Scheme::new(sys, setup.source, setup.cfl, Boundary::Outflow)?;
        let offset = setup.trace_offset * setup.refine;
        let mut sim = Simulated {
            snaps: vec![],
            snap_t: vec![],
            snap_s: vec![],
            times: vec![],
            path: vec![],
            sdot: vec![],
            traces: vec![],
            band: (offset as f64 + 1.0) * grid.dx,
        };
        let mut cur = init;
        let mut h = setup.shock.x0;
        let mut k = 0usize;
        let mut sup_speed = 0.0f64;
        loop {
            let (um, up) = offset_traces(&cur, h, offset)
                .ok_or_else(|| Error::ReferenceInvalid(format!("shock path {h} reached the reference boundary")))?;
            sup_speed = sup_speed.max(scheme.max_speed(&cur));
            sim.times.push(cur.t);
            sim.path.push(h);
            sim.traces.push((um, up));
            if k % setup.store_stride == 0 {
                sim.snaps.push(cur.clone());
                sim.snap_t.push(cur.t);
                sim.snap_s.push(h);
            }
            if cur.t >= setup.t_end {
                if sim.snaps.last().map(|s| s.t) != Some(cur.t) {
                    sim.snaps.push(cur.clone());
                    sim.snap_t.push(cur.t);
                    sim.snap_s.push(h);
                }
                let last = sim.sdot.last().copied().unwrap_or(0.0);
                sim.sdot.push(last);
                break;
            }
            let (mut next, _) = scheme.step(&cur, setup.t_end - cur.t)?;
            if setup.t_end - next.t <= 1e-12 * setup.t_end.abs().max(1.0) {
                next.t = setup.t_end;
            }
            let dt = next.t - cur.t;
            let vel = FrozenVelocity::new(sys, &cur, um, up, setup.a, setup.c_star, setup.mollification);
            let st = advance_frozen(&vel, h, dt, cur.t)?;
            sim.sdot.push(st.hdot);
            h = st.h;
            cur = next;
            k += 1;
        }
        let mut gap = f64::INFINITY;
        let mut rh = 0.0f64;
        // centered speed over +-w steps, skipping the start-up layer where the profile forms
        let w = (16 * setup.refine).max(1);
        let n = sim.times.len();
        for i in 0..n {
            let (um, up) = sim.traces[i];
            gap = gap.min((up - um).norm());
            let (lo, hi) = (i.saturating_sub(w), (i + w).min(n - 1));
            if hi > lo && (i >= 2 * w || n <= 4 * w) {
                let speed = (sim.path[hi] - sim.path[lo]) / (sim.times[hi] - sim.times[lo]);
                let r = (sys.flux(&up) - sys.flux(&um) - (up - um) * speed).norm();
                rh = rh.max(r);
            }
        }
        // a path that drifts into the smeared tail sees two nearly equal traces
        let jump = (setup.shock.u_r - setup.shock.u_l).norm();
        if !(gap > 0.5 * jump) {
            return Err(Error::ReferenceInvalid(format!(
                "tracked jump fell to {gap:.3e} (initial {jump:.3e}); the path lost the shock, raise reference.trace_offset"
            )));
        }
        let mut lip = 0.0f64;
        for (snap, s) in sim.snaps.iter().zip(&sim.snap_s) {
            for j in 0..snap.cells.len() - 1 {
                let xm = snap.grid.x_min + (j + 1) as f64 * snap.grid.dx;
                if (xm - s).abs() <= sim.band {
                    continue;
                }
                lip = lip.max((snap.cells[j + 1] - snap.cells[j]).norm() / snap.grid.dx);
            }
        }
        let (sigma, _) = rh_speed(sys, &sim.traces[0].0, &sim.traces[0].1);
        Ok(ReferenceSolution {
            kind: ReferenceKind::Simulated,
            shock: setup.shock,
            sigma,
            sim: Some(sim),
            gap,
            lipschitz: lip,
            rh_residual: rh,
            sup_speed,
            t_end: setup.t_end,
        })
    }

    /// Index of the solver step containing `t`.
    fn step_index(times: &[f64], t: f64) -> usize {
        match times.binary_search_by(|x| x.partial_cmp(&t).unwrap()) {
            Ok(i) => i,
            Err(0) => 0,
            Err(i) => i - 1,
        }
    }

    pub fn s(&self, t: f64) -> f64 {
        match &self.sim {
            None => self.shock.x0 + self.sigma * t,
            Some(sim) => {
                let i = Self::step_index(&sim.times, t);
                if i + 1 >= sim.times.len() {
                    return sim.path[i];
                }
                let th = (t - sim.times[i]) / (sim.times[i + 1] - sim.times[i]);
                if th == 0.0 {
                    sim.path[i]
                } else {
                    sim.path[i] + (sim.path[i + 1] - sim.path[i]) * th
                }
            }
        }
    }

    pub fn sdot(&self, t: f64) -> f64 {
        match &self.sim {
            None => self.sigma,
            Some(sim) => sim.sdot[Self::step_index(&sim.times, t)],
        }
    }

    /// `(ub(s-), ub(s+))` at time `t`.
    pub fn traces(&self, t: f64) -> (State, State) {
        match &self.sim {
            None => (self.shock.u_l, self.shock.u_r),
            Some(sim) => sim.traces[Self::step_index(&sim.times, t)],
        }
    }

    /// Spatial extent where `eval` is defined.
    pub fn x_range(&self) -> (f64, f64) {
        match &self.sim {
            None => (f64::NEG_INFINITY, f64::INFINITY),
            Some(sim) => {
                let g = sim.snaps[0].grid;
                (g.x_min, g.x_max())
            }
        }
    }

    /// Grid spacing of the reference (zero for the exact one).
    pub fn dx(&self) -> f64 {
        self.sim.as_ref().map_or(0.0, |s| s.snaps[0].grid.dx)
    }

    /// `ub(x, t)`; the exact reference takes the left state at `x < s(t)`.
    pub fn eval(&self, x: f64, t: f64) -> Result<State> {
        match &self.sim {
            None => Ok(if x < self.s(t) { self.shock.u_l } else { self.shock.u_r }),
            Some(sim) => {
                let (lo, hi) = self.x_range();
                if !(x >= lo && x <= hi) {
                    return Err(Error::Extension { x, lo, hi });
                }
                let k = Self::step_index(&sim.snap_t, t);
                let st = self.s(t);
                let a = &sim.snaps[k];
                if k + 1 >= sim.snaps.len() || a.t == t {
                    return Ok(a.interpolate(x - st + sim.snap_s[k]));
                }
                let b = &sim.snaps[k + 1];
                let th = (t - a.t) / (b.t - a.t);
                let ua = a.interpolate(x - st + sim.snap_s[k]);
                let ub = b.interpolate(x - st + sim.snap_s[k + 1]);
                Ok(ua.lerp(&ub, th))
            }
        }
    }

    /// `d/dx ub(x, t)`, or `None` inside the band around the path.
    pub fn gradient(&self, x: f64, t: f64) -> Result<Option<State>> {
        match &self.sim {
            None => Ok(if x == self.s(t) { None } else { Some(State::zeros(self.shock.u_l.dim())) }),
            Some(sim) => {
                if (x - self.s(t)).abs() <= sim.band {
                    return Ok(None);
                }
                let d = 0.5 * self.dx();
                Ok(Some((self.eval(x + d, t)? - self.eval(x - d, t)?) * (0.5 / d)))
            }
        }
    }
}
