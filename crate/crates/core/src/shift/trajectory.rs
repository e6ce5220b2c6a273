//! Shift trajectories over a stored run and the pointwise dissipation check.

use rayon::prelude::*;

use super::filippov::{adjacent_traces, advance_frozen, FrozenVelocity};
use super::velocity::indicator_on;
use crate::error::{Error, Result};
use crate::fv::{FieldSnapshot, ReferenceSolution};
use crate::relative::{eta_rel, q_rel};
use crate::state::State;
use crate::system::System;

#[derive(Debug, Clone, PartialEq)]
pub struct ShiftTrajectory {
    pub times: Vec<f64>,
    pub h: Vec<f64>,
    /// Slope on `[t_k, t_k+1]`; the last entry repeats the previous one.
    pub hdot: Vec<f64>,
    /// `X = s - h` and its a.e. derivative.
    pub x_shift: Vec<f64>,
    pub xdot: Vec<f64>,
    /// Sampled hull of `V` near the path on each step.
    pub hull: Vec<(f64, f64)>,
    pub v_sup: f64,
    pub mollification_n: usize,
    pub window: f64,
}

impl ShiftTrajectory {
    /// `max |h(t_k+1) - h(t_k)| / (t_k+1 - t_k)`.
    pub fn lipschitz(&self) -> f64 {
        self.h
            .windows(2)
            .zip(self.times.windows(2))
            .map(|(h, t)| (h[1] - h[0]).abs() / (t[1] - t[0]))
            .fold(0.0, f64::max)
    }

    /// Fraction of steps with `hdot` inside the sampled hull.
    pub fn hull_fraction(&self) -> f64 {
        let n = self.times.len().saturating_sub(1);
        if n == 0 {
            return 1.0;
        }
        let tol = 1e-9 * (1.0 + self.v_sup);
        let ok = (0..n).filter(|&k| self.hdot[k] >= self.hull[k].0 - tol && self.hdot[k] <= self.hull[k].1 + tol).count();
        ok as f64 / n as f64
    }
}

/// Integrates the mollified flow from `x0` through every stored snapshot (stride 1).
pub fn integrate_filippov(
    sys: &dyn System,
    field: &[FieldSnapshot],
    reference: &ReferenceSolution,
    a: f64,
    c_star: f64,
    x0: f64,
    n: usize,
) -> Result<ShiftTrajectory> {
    if n == 0 {
        return Err(Error::param("shift_filippov", "mollification_n", "must be at least 1"));
    }
    if field.is_empty() {
        return Err(Error::param("shift_filippov", "field", "no snapshots"));
    }
    if n as f64 * field[0].grid.dx > 1.0 {
        log::warn!("mollification window 1/n = {} is below one cell", 1.0 / n as f64);
    }
    let mut tr = ShiftTrajectory {
        times: Vec::with_capacity(field.len()),
        h: Vec::with_capacity(field.len()),
        hdot: vec![],
        x_shift: vec![],
        xdot: vec![],
        hull: vec![],
        v_sup: 0.0,
        mollification_n: n,
        window: 1.0 / n as f64,
    };
    let mut h = x0;
    for (k, snap) in field.iter().enumerate() {
        tr.times.push(snap.t);
        tr.h.push(h);
        if k + 1 == field.len() {
            break;
        }
        let dt = field[k + 1].t - snap.t;
        let (um, up) = reference.traces(snap.t);
        let vel = FrozenVelocity::new(sys, snap, um, up, a, c_star, n);
        let st = advance_frozen(&vel, h, dt, snap.t)?;
        tr.hdot.push(st.hdot);
        tr.hull.push(st.hull);
        tr.v_sup = tr.v_sup.max(st.v_sup);
        h = st.h;
    }
    let last = tr.hdot.last().copied().unwrap_or(0.0);
    tr.hdot.push(last);
    tr.hull.push(tr.hull.last().copied().unwrap_or((last, last)));
    for (k, &t) in tr.times.iter().enumerate() {
        tr.x_shift.push(reference.s(t) - tr.h[k]);
        tr.xdot.push(reference.sdot(t) - tr.hdot[k]);
    }
    Ok(tr)
}

/// Which of the four indicator cases `(u-, u+)` fall into: 1 both on, 2 only `u-`, 3 only `u+`, 4 neither.
pub fn indicator_case(sys: &dyn System, um: &State, up: &State, ubm: &State, ubp: &State, a: f64) -> u8 {
    match (indicator_on(sys, um, ubm, ubp, a), indicator_on(sys, up, ubm, ubp, a)) {
        (true, true) => 1,
        (true, false) => 2,
        (false, true) => 3,
        (false, false) => 4,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DissipationSample {
    pub t: f64,
    pub lhs: f64,
    /// `-c (s' - h')^2`.
    pub bound: f64,
    pub case: u8,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DissipationReport {
    pub samples: Vec<DissipationSample>,
    pub pass_fraction: f64,
    /// Smallest `bound + tol - lhs`.
    pub worst_margin: f64,
    /// Largest `c` passing at every sample, if any.
    pub c_fit: Option<f64>,
    pub tolerance: f64,
}

/// `a (q(u+; ub+) - h' eta(u+|ub+)) - q(u-; ub-) + h' eta(u-|ub-)`.
pub fn dissipation_lhs(sys: &dyn System, um: &State, up: &State, ubm: &State, ubp: &State, hdot: f64, a: f64) -> f64 {
    a * (q_rel(sys, up, ubp) - hdot * eta_rel(sys, up, ubp)) - q_rel(sys, um, ubm) + hdot * eta_rel(sys, um, ubm)
}

/// Evaluates the dissipation inequality at every step of the run.
pub fn verify_dissipation(
    sys: &dyn System,
    traj: &ShiftTrajectory,
    field: &[FieldSnapshot],
    reference: &ReferenceSolution,
    a: f64,
    c: f64,
    tolerance: f64,
) -> Result<DissipationReport> {
    let n = traj.times.len().saturating_sub(1).max(1).min(traj.times.len());
    let samples: Vec<Result<(DissipationSample, f64)>> = (0..n)
        .into_par_iter()
        .map(|k| {
            let t = traj.times[k];
            let (um, up) = adjacent_traces(&field[k], traj.h[k]).ok_or(Error::ShiftExit { t, h: traj.h[k] })?;
            let (ubm, ubp) = reference.traces(t);
            let lhs = dissipation_lhs(sys, &um, &up, &ubm, &ubp, traj.hdot[k], a);
            let d2 = traj.xdot[k] * traj.xdot[k];
            let bound = -c * d2;
            let case = indicator_case(sys, &um, &up, &ubm, &ubp, a);
            Ok((DissipationSample { t, lhs, bound, case, pass: lhs <= bound + tolerance }, d2))
        })
        .collect();
    let mut out = Vec::with_capacity(n);
    let mut worst = f64::INFINITY;
    let mut c_fit = f64::INFINITY;
    let mut feasible = true;
    for s in samples {
        let (s, d2) = s?;
        worst = worst.min(s.bound + tolerance - s.lhs);
        if s.lhs > tolerance {
            feasible = false;
        } else if d2 > 0.0 {
            c_fit = c_fit.min((tolerance - s.lhs) / d2);
        }
        out.push(s);
    }
    let passed = out.iter().filter(|s| s.pass).count();
    Ok(DissipationReport {
        pass_fraction: passed as f64 / out.len() as f64,
        samples: out,
        worst_margin: worst,
        c_fit: if feasible { Some(c_fit) } else { None },
        tolerance,
    })
}

/// Largest Rankine-Hugoniot residual of `(u(h-k dx), u(h+k dx), h')` over steps where the traces differ by more than `noise`.
pub fn rh_invariant(sys: &dyn System, traj: &ShiftTrajectory, field: &[FieldSnapshot], offset: usize, noise: f64) -> f64 {
    let mut worst = 0.0f64;
    for k in 0..traj.times.len().saturating_sub(1) {
        if let Some((um, up)) = super::filippov::offset_traces(&field[k], traj.h[k], offset) {
            if (up - um).norm() > noise {
                let r = (sys.flux(&up) - sys.flux(&um) - (up - um) * traj.hdot[k]).norm();
                worst = worst.max(r);
            }
        }
    }
    worst
}
