//! Step-by-step bookkeeping of the local dissipation balance on `[h1, h]` and `[h, h2]`.

use rayon::prelude::*;
use serde::Serialize;

use super::{pieces, ConeSpec, EntropySeries};
use crate::error::{Error, Result};
use crate::fv::{FieldSnapshot, ReferenceSolution, SourceOperator};
use crate::relative::{eta_rel, f_rel, q_rel};
use crate::shift::{adjacent_traces, ShiftTrajectory};
use crate::state::{mat_vec, State};
use crate::system::System;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditStep {
    pub t: f64,
    pub dt: f64,
    /// Flux and moving-boundary terms at `h1`, `h`, `h2`.
    pub boundary: f64,
    /// Weighted integral of the interior rate.
    pub interior: f64,
    pub de: f64,
    /// `dt (boundary + interior) - dE`.
    pub margin: f64,
    pub cumulative: f64,
    /// Pieces dropped because the reference has no derivative there.
    pub excluded: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditReport {
    pub steps: Vec<AuditStep>,
    pub worst_step: f64,
    pub worst_cumulative: f64,
    /// Violations are flagged below `-tolerance`.
    pub tolerance: f64,
    pub excluded: usize,
    pub pass: bool,
}

struct Rates {
    boundary: f64,
    interior: f64,
    excluded: usize,
}

/// Interior rate density at one point.
fn interior_density(sys: &dyn System, u: &State, v: &State, vx: &State, xdot: f64, gu: &State, gv: &State) -> f64 {
    let hv = sys.entropy_hessian(v);
    let d = *u - *v;
    let hd = mat_vec(&hv, &d);
    let hf = mat_vec(&hv, &f_rel(sys, u, v));
    let dg = sys.entropy_gradient(u) - sys.entropy_gradient(v);
    -vx.dot(&hf) - xdot * vx.dot(&hd) + dg.dot(gu) - hd.dot(gv)
}

#[allow(clippy::too_many_arguments)]
fn rates(
    sys: &dyn System,
    snap: &FieldSnapshot,
    reference: &ReferenceSolution,
    source: &SourceOperator,
    traj: &ShiftTrajectory,
    k: usize,
    cone: &ConeSpec,
    a: f64,
) -> Result<Rates> {
    let t = snap.t;
    let (x, h, hdot, xdot) = (traj.x_shift[k], traj.h[k], traj.hdot[k], traj.xdot[k]);
    let (h1, h2) = (cone.h1(t), cone.h2(t));
    let (um, up) = adjacent_traces(snap, h).ok_or(Error::ShiftExit { t, h })?;
    let (ubm, ubp) = reference.traces(t);
    let u1 = snap.interpolate(h1);
    let v1 = reference.eval(h1 + x, t)?;
    let u2 = snap.interpolate(h2);
    let v2 = reference.eval(h2 + x, t)?;
    let boundary = (q_rel(sys, &u1, &v1) - cone.r * eta_rel(sys, &u1, &v1)) - q_rel(sys, &um, &ubm) + hdot * eta_rel(sys, &um, &ubm)
        + a * (q_rel(sys, &up, &ubp) - hdot * eta_rel(sys, &up, &ubp))
        - a * (q_rel(sys, &u2, &v2) + cone.r * eta_rel(sys, &u2, &v2));

    // source terms on the cell field and on the shifted reference sampled at the same centers
    let (gu, gv) = if source.is_zero() {
        (None, None)
    } else {
        let shifted: Vec<State> = (0..snap.grid.n_cells)
            .map(|j| reference.eval(snap.grid.center(j) + x, t))
            .collect::<Result<_>>()?;
        let gu = FieldSnapshot { grid: snap.grid, t, cells: source.apply(&snap.cells) };
        let gv = FieldSnapshot { grid: snap.grid, t, cells: source.apply(&shifted) };
        (Some(gu), Some(gv))
    };
    let zero = State::zeros(sys.dim());
    let mut interior = 0.0;
    let mut excluded = 0;
    for (xm, len) in pieces(snap, h1, h2, &[h]) {
        let Some(vx) = reference.gradient(xm + x, t)? else {
            excluded += 1;
            continue;
        };
        let u = snap.interpolate(xm);
        let v = reference.eval(xm + x, t)?;
        let g1 = gu.as_ref().map_or(zero, |g| g.interpolate(xm));
        let g2 = gv.as_ref().map_or(zero, |g| g.interpolate(xm));
        let w = if xm < h { 1.0 } else { a };
        interior += w * interior_density(sys, &u, &v, &vx, xdot, &g1, &g2) * len;
    }
    Ok(Rates { boundary, interior, excluded })
}

/// Compares the measured change of the weighted functional on every step with the
/// rate predicted by the boundary and interior terms at the step start.
#[allow(clippy::too_many_arguments)]
pub fn dissipation_audit(
    sys: &dyn System,
    field: &[FieldSnapshot],
    reference: &ReferenceSolution,
    source: &SourceOperator,
    traj: &ShiftTrajectory,
    series: &EntropySeries,
    cone: &ConeSpec,
    a: f64,
    tolerance: f64,
) -> Result<AuditReport> {
    if field.len() != series.e.len() || field.len() != traj.times.len() {
        return Err(Error::param("contraction_harness", "field", "run, shift and entropy series differ in length"));
    }
    let n = field.len().saturating_sub(1);
    let rows: Vec<Result<Rates>> =
        (0..n).into_par_iter().map(|k| rates(sys, &field[k], reference, source, traj, k, cone, a)).collect();
    let mut steps = Vec::with_capacity(n);
    let mut cumulative = 0.0;
    let (mut worst_step, mut worst_cumulative) = (f64::INFINITY, f64::INFINITY);
    let mut excluded = 0;
    for (k, r) in rows.into_iter().enumerate() {
        let r = r?;
        let dt = field[k + 1].t - field[k].t;
        let de = series.e[k + 1] - series.e[k];
        let margin = dt * (r.boundary + r.interior) - de;
        cumulative += margin;
        worst_step = worst_step.min(margin);
        worst_cumulative = worst_cumulative.min(cumulative);
        excluded += r.excluded;
        steps.push(AuditStep {
            t: field[k].t,
            dt,
            boundary: r.boundary,
            interior: r.interior,
            de,
            margin,
            cumulative,
            excluded: r.excluded,
        });
    }
    if n == 0 {
        worst_step = 0.0;
        worst_cumulative = 0.0;
    }
    Ok(AuditReport { steps, worst_step, worst_cumulative, tolerance, excluded, pass: worst_cumulative >= -tolerance })
}
