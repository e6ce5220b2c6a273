//! The weighted relative entropy inside a shrinking cone, its dissipation budget,
//! and the exponential envelope.

pub mod audit;
pub mod gronwall;

pub use audit::{dissipation_audit, AuditReport, AuditStep};
pub use gronwall::{verify_gronwall, GronwallReport};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fv::{FieldSnapshot, ReferenceSolution};
use crate::relative::{eta_rel, q_rel};
use crate::shift::ShiftTrajectory;
use crate::state::State;
use crate::system::System;

/// `[h1(t), h2(t)] = [s0 - R + r (t - t0), s0 + R - r (t - t0)]`, widest at `t = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConeSpec {
    pub radius: f64,
    pub t0: f64,
    pub r: f64,
    pub s0: f64,
}

impl ConeSpec {
    pub fn new(radius: f64, t0: f64, r: f64, s0: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::param("contraction_harness", "cone.radius", "must be positive"));
        }
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::param("contraction_harness", "cone.r", "must be positive and finite"));
        }
        if !(t0 >= 0.0) {
            return Err(Error::param("contraction_harness", "t0", "must be nonnegative"));
        }
        Ok(ConeSpec { radius, t0, r, s0 })
    }

    pub fn h1(&self, t: f64) -> f64 {
        -self.radius + self.s0 + self.r * (t - self.t0)
    }

    pub fn h2(&self, t: f64) -> f64 {
        self.radius + self.s0 - self.r * (t - self.t0)
    }

    /// `min (h2 - h1)` over `[0, t0]`.
    pub fn delta(&self) -> f64 {
        2.0 * self.radius
    }

    /// Window at `t = 0`.
    pub fn initial_window(&self) -> (f64, f64) {
        (self.h1(0.0), self.h2(0.0))
    }
}

/// Sampled `sup |q(u;ub)| / eta(u|ub)` over every cell and time, inflated 5%.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InformationSpeed {
    pub r: f64,
    pub raw: f64,
    pub pairs: usize,
    /// Set when every pair was degenerate and `2 sup|lambda|` was used instead.
    pub fallback: bool,
}

pub fn compute_r(sys: &dyn System, field: &[FieldSnapshot], reference: &ReferenceSolution, traj: &ShiftTrajectory) -> Result<InformationSpeed> {
    let (lo, hi) = reference.x_range();
    let parts: Vec<(f64, usize, f64)> = field
        .par_iter()
        .enumerate()
        .map(|(k, snap)| {
            let x_shift = traj.x_shift[k];
            let (mut best, mut n, mut speed) = (0.0f64, 0usize, 0.0f64);
            for (j, u) in snap.cells.iter().enumerate() {
                speed = speed.max(sys.max_speed(u));
                let y = snap.grid.center(j) + x_shift;
                if y < lo || y > hi {
                    continue;
                }
                let Ok(ub) = reference.eval(y, snap.t) else { continue };
                let e = eta_rel(sys, u, &ub);
                if e > MIN_PAIR_ENTROPY {
                    best = best.max(q_rel(sys, u, &ub).abs() / e);
                    n += 1;
                }
            }
            (best, n, speed)
        })
        .collect();
    let raw = parts.iter().map(|p| p.0).fold(0.0, f64::max);
    let pairs: usize = parts.iter().map(|p| p.1).sum();
    let speed = parts.iter().map(|p| p.2).fold(reference.sup_speed, f64::max);
    if pairs == 0 {
        log::info!("no informative pairs for r; falling back to 2 sup|lambda|");
        return Ok(InformationSpeed { r: 2.0 * speed.max(1e-12), raw: 0.0, pairs: 0, fallback: true });
    }
    Ok(InformationSpeed { r: 1.05 * raw, raw, pairs, fallback: false })
}

/// Pieces of cells cut by the sorted points `cuts` inside `[x1, x2]`: `(midpoint, length)`.
pub(crate) fn pieces(snap: &FieldSnapshot, x1: f64, x2: f64, cuts: &[f64]) -> Vec<(f64, f64)> {
    let g = &snap.grid;
    let mut out = Vec::new();
    if !(x2 > x1) {
        return out;
    }
    let j0 = (((x1 - g.x_min) / g.dx).floor().max(0.0)) as usize;
    let j1 = ((((x2 - g.x_min) / g.dx).ceil()) as usize).min(g.n_cells);
    for j in j0..j1 {
        let a = (g.x_min + j as f64 * g.dx).max(x1);
        let b = (g.x_min + (j + 1) as f64 * g.dx).min(x2);
        if !(b > a) {
            continue;
        }
        let mut pts = vec![a];
        pts.extend(cuts.iter().copied().filter(|&c| c > a && c < b));
        pts.push(b);
        for w in pts.windows(2) {
            out.push((0.5 * (w[0] + w[1]), w[1] - w[0]));
        }
    }
    out
}

/// `int_{x1}^{h} eta(u|ub(.+X)) + a int_h^{x2} eta(u|ub(.+X))`, midpoint rule on cell pieces,
/// both `u` and `ub` sampled by linear interpolation.
pub fn weighted_relative_entropy(
    sys: &dyn System,
    snap: &FieldSnapshot,
    reference: &ReferenceSolution,
    x_shift: f64,
    h: f64,
    a: f64,
    window: (f64, f64),
) -> Result<f64> {
    let (x1, x2) = window;
    if !(h >= x1 && h <= x2) {
        return Err(Error::param("contraction_harness", "cone.radius", format!("shift h = {h} left the cone [{x1}, {x2}]")));
    }
    let mut e = 0.0;
    for (xm, len) in pieces(snap, x1, x2, &[h]) {
        let u = snap.interpolate(xm);
        let ub = reference.eval(xm + x_shift, snap.t)?;
        let w = if xm < h { 1.0 } else { a };
        e += w * eta_rel(sys, &u, &ub) * len;
    }
    Ok(e)
}

/// `int |u - ub(.+X)|^2` over `window` with the same quadrature.
pub fn l2_window(snap: &FieldSnapshot, reference: &ReferenceSolution, x_shift: f64, window: (f64, f64)) -> Result<f64> {
    let mut m = 0.0;
    for (xm, len) in pieces(snap, window.0, window.1, &[]) {
        let d = snap.interpolate(xm) - reference.eval(xm + x_shift, snap.t)?;
        m += d.dot(&d) * len;
    }
    Ok(m)
}

/// Values of the weighted functional along a run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntropySeries {
    pub times: Vec<f64>,
    pub e: Vec<f64>,
    /// `int_{h1}^{h2} |u - ub(.+X)|^2`.
    pub l2: Vec<f64>,
    pub h1: Vec<f64>,
    pub h2: Vec<f64>,
    /// Initial L2 mass over the widest window.
    pub e0_window: f64,
}

pub fn entropy_series(
    sys: &dyn System,
    field: &[FieldSnapshot],
    reference: &ReferenceSolution,
    traj: &ShiftTrajectory,
    cone: &ConeSpec,
    a: f64,
) -> Result<EntropySeries> {
    let (lo, hi) = (field[0].grid.x_min, field[0].grid.x_max());
    let (w1, w2) = cone.initial_window();
    if w1 < lo || w2 > hi {
        return Err(Error::param(
            "contraction_harness",
            "cone.radius",
            format!("initial cone [{w1:.4}, {w2:.4}] exceeds the grid [{lo}, {hi}]"),
        ));
    }
    let rows: Vec<Result<(f64, f64)>> = field
        .par_iter()
        .enumerate()
        .map(|(k, snap)| {
            let win = (cone.h1(snap.t), cone.h2(snap.t));
            let e = weighted_relative_entropy(sys, snap, reference, traj.x_shift[k], traj.h[k], a, win)?;
            let l2 = l2_window(snap, reference, traj.x_shift[k], win)?;
            Ok((e, l2))
        })
        .collect();
    let mut out = EntropySeries { times: vec![], e: vec![], l2: vec![], h1: vec![], h2: vec![], e0_window: 0.0 };
    for (k, r) in rows.into_iter().enumerate() {
        let (e, l2) = r?;
        let t = field[k].t;
        out.times.push(t);
        out.e.push(e);
        out.l2.push(l2);
        out.h1.push(cone.h1(t));
        out.h2.push(cone.h2(t));
    }
    out.e0_window = l2_window(&field[0], reference, 0.0, (w1, w2))?;
    Ok(out)
}

/// Largest rise `max_{k < l} (E_l - E_k)`.
pub fn max_rise(e: &[f64]) -> f64 {
    let mut low = f64::INFINITY;
    let mut rise = 0.0f64;
    for &v in e {
        rise = rise.max(v - low);
        low = low.min(v);
    }
    rise
}

/// Pairs with less relative entropy than this carry no information about `r`.
pub const MIN_PAIR_ENTROPY: f64 = 1e-14;

/// Number of `(cell, time)` pairs breaking the cone condition for a given `r`,
/// skipping near-identical pairs as `compute_r` does.
pub fn cone_violations(sys: &dyn System, field: &[FieldSnapshot], reference: &ReferenceSolution, traj: &ShiftTrajectory, r: f64) -> usize {
    let (lo, hi) = reference.x_range();
    field
        .par_iter()
        .enumerate()
        .map(|(k, snap)| {
            snap.cells
                .iter()
                .enumerate()
                .filter(|(j, u)| {
                    let y = snap.grid.center(*j) + traj.x_shift[k];
                    y >= lo && y <= hi && reference
                        .eval(y, snap.t)
                        .map_or(false, |ub| eta_rel(sys, u, &ub) > MIN_PAIR_ENTROPY && !cone_condition(sys, u, &ub, r))
                })
                .count()
        })
        .sum()
}

/// The cone condition `|q(u;ub)| <= r eta(u|ub)` at one pair.
pub fn cone_condition(sys: &dyn System, u: &State, ub: &State, r: f64) -> bool {
    q_rel(sys, u, ub).abs() <= r * eta_rel(sys, u, ub) * (1.0 + 1e-12) + 1e-300
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fv::{Grid1D, ShockData};
    use crate::system::Burgers;

    fn shock() -> ShockData {
        ShockData { u_l: State::scalar(1.0), u_r: State::scalar(0.0), x0: 0.0 }
    }

    #[test]
    fn burgers_ratio_bound() {
        // |q(u;v)| / eta(u|v) = |2u + v| / 3 on [-1, 1]^2
        let mut best = 0.0f64;
        for i in 0..200 {
            for j in 0..200 {
                let u = -1.0 + 2.0 * i as f64 / 199.0;
                let v = -1.0 + 2.0 * j as f64 / 199.0;
                if (u - v).abs() > 1e-9 {
                    let (su, sv) = (State::scalar(u), State::scalar(v));
                    best = best.max(q_rel(&Burgers, &su, &sv).abs() / eta_rel(&Burgers, &su, &sv));
                }
            }
        }
        assert!(best <= 1.0 + 1e-12 && best > 0.99);
    }

    #[test]
    fn cone_geometry() {
        let c = ConeSpec::new(0.3, 0.5, 2.0, 0.1).unwrap();
        assert!((c.h1(0.5) - (-0.2)).abs() < 1e-15);
        assert!((c.h2(0.0) - 1.4).abs() < 1e-15);
        assert!(c.h2(0.5) - c.h1(0.5) >= c.delta() - 1e-15);
        assert!(ConeSpec::new(0.0, 0.5, 1.0, 0.0).is_err());
    }

    #[test]
    fn zero_for_identical_data_and_plain_integral_at_a_one() {
        let grid = Grid1D::new(-1.0, 1.0, 40).unwrap();
        let r = ReferenceSolution::exact(&Burgers, shock(), 1.0).unwrap();
        let snap = FieldSnapshot::from_fn(&Burgers, grid, |x| shock().eval(x)).unwrap();
        // the jump sits on an interface, so every piece midpoint is a cell center
        let e = weighted_relative_entropy(&Burgers, &snap, &r, 0.0, 0.0, 0.5, (-0.5, 0.5)).unwrap();
        assert!(e.abs() < 1e-15);
        let bumped = FieldSnapshot::from_fn(&Burgers, grid, |x| shock().eval(x) + State::scalar(0.1)).unwrap();
        let e1 = weighted_relative_entropy(&Burgers, &bumped, &r, 0.0, -0.9, 1.0, (-0.95, 0.95)).unwrap();
        let plain: f64 = pieces(&bumped, -0.95, 0.95, &[])
            .iter()
            .map(|&(xm, l)| eta_rel(&Burgers, &bumped.interpolate(xm), &r.eval(xm, 0.0).unwrap()) * l)
            .sum();
        assert!((e1 - plain).abs() < 1e-14);
        assert!(weighted_relative_entropy(&Burgers, &bumped, &r, 0.0, 0.99, 1.0, (-0.95, 0.95)).is_err());
    }

    #[test]
    fn midpoint_matches_nodal_trapezoid() {
        let grid = Grid1D::new(-1.0, 1.0, 400).unwrap();
        let r = ReferenceSolution::exact(&Burgers, shock(), 1.0).unwrap();
        let bump = |x: f64| 0.01 * crate::fv::initial::bump((x + 0.4) / 0.1);
        let snap = FieldSnapshot::from_fn(&Burgers, grid, |x| shock().eval(x) + State::scalar(bump(x))).unwrap();
        let a = 0.3;
        let e = weighted_relative_entropy(&Burgers, &snap, &r, 0.0, -0.42, a, (-0.7, -0.1)).unwrap();
        // h and the window ends sit on interfaces and the integrand vanishes at the ends,
        // so the nodal trapezoid is an independent evaluation of the same sum
        let nodes: Vec<(f64, f64)> = (0..400)
            .map(|j| grid.center(j))
            .filter(|&x| x > -0.7 && x < -0.1)
            .map(|x| {
                let w = if x < -0.42 { 1.0 } else { a };
                (x, w * eta_rel(&Burgers, &snap.interpolate(x), &State::scalar(1.0)))
            })
            .collect();
        let t: f64 = nodes.windows(2).map(|p| 0.5 * (p[0].1 + p[1].1) * (p[1].0 - p[0].0)).sum();
        assert!((e - t).abs() <= 1e-6 * e, "{e} vs {t}");
    }

    #[test]
    fn rise_of_series() {
        assert_eq!(max_rise(&[3.0, 2.0, 2.5, 1.0, 1.2]), 0.5);
        assert_eq!(max_rise(&[1.0, 0.5, 0.2]), 0.0);
    }
}
