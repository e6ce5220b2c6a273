//! Fitting `E(t) <= mu2 e^{mu1 t} E0` and the matching bound on `int X'^2`.

use serde::Serialize;

use super::EntropySeries;
use crate::error::{Error, Result};
use crate::shift::ShiftTrajectory;

/// Largest `mu1` searched.
pub const MU_MAX: f64 = 1e3;

/// Initial mass below `ZERO_MASS * scale` counts as identical data (round-off in `X` leaves ~1e-30).
pub const ZERO_MASS: f64 = 1e-20;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GronwallReport {
    pub e0_window: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub envelope_ok: bool,
    pub shift_control_ok: bool,
    pub shift_integral: f64,
    pub shift_bound: f64,
    /// `mu2 e^{mu1 t} E0` at every stored time.
    pub envelope: Vec<f64>,
    /// `envelope - E`.
    pub margins: Vec<f64>,
    /// Zero initial mass: only `max E <= 1e-8 scale` is checked.
    pub uniqueness: bool,
    pub max_e: f64,
    pub uniqueness_tol: f64,
}

impl GronwallReport {
    pub fn ok(&self) -> bool {
        self.envelope_ok && self.shift_control_ok
    }
}

/// Trapezoid rule for `int X'^2` over the stored times.
pub fn shift_energy(traj: &ShiftTrajectory) -> f64 {
    traj.times
        .windows(2)
        .enumerate()
        .map(|(k, t)| 0.5 * (traj.xdot[k].powi(2) + traj.xdot[k + 1].powi(2)) * (t[1] - t[0]))
        .sum()
}

fn envelope_holds(series: &EntropySeries, mu1: f64, mu2: f64) -> bool {
    series.times.iter().zip(&series.e).all(|(&t, &e)| e <= mu2 * (mu1 * t).exp() * series.e0_window * (1.0 + 1e-12))
}

/// `mu2` starts at `max(1, E(0) / E0)`; `mu1` is the smallest value in `[0, MU_MAX]` keeping the
/// envelope, found by bisection; `mu2` is then raised just enough for the shift control.
/// `scale` is the domain length used by the zero-mass branch.
pub fn verify_gronwall(series: &EntropySeries, traj: &ShiftTrajectory, scale: f64) -> Result<GronwallReport> {
    if series.e.is_empty() || series.e.len() != traj.times.len() {
        return Err(Error::param("contraction_harness", "t0", "empty or mismatched series"));
    }
    let e0 = series.e0_window;
    let max_e = series.e.iter().copied().fold(0.0, f64::max);
    let integral = shift_energy(traj);
    let t_end = *series.times.last().unwrap();
    let uniqueness_tol = 1e-8 * scale;
    if !(e0 > ZERO_MASS * scale) {
        let ok = max_e <= uniqueness_tol;
        return Ok(GronwallReport {
            e0_window: e0,
            mu1: 0.0,
            mu2: 1.0,
            envelope_ok: ok,
            shift_control_ok: ok,
            shift_integral: integral,
            shift_bound: 0.0,
            envelope: vec![0.0; series.e.len()],
            margins: series.e.iter().map(|e| -e).collect(),
            uniqueness: true,
            max_e,
            uniqueness_tol,
        });
    }
    let mut mu2 = (series.e[0] / e0).max(1.0);
    let envelope_ok = envelope_holds(series, MU_MAX, mu2);
    let mu1 = if !envelope_ok {
        MU_MAX
    } else if envelope_holds(series, 0.0, mu2) {
        0.0
    } else {
        let (mut lo, mut hi) = (0.0, MU_MAX);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if envelope_holds(series, mid, mu2) {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo <= 1e-12 * hi.max(1.0) {
                break;
            }
        }
        hi
    };
    let growth = 1.0 + (mu1 * t_end).exp();
    if integral > mu2 * growth * e0 {
        mu2 = integral / (growth * e0) * (1.0 + 1e-12);
    }
    let shift_bound = mu2 * growth * e0;
    let envelope: Vec<f64> = series.times.iter().map(|&t| mu2 * (mu1 * t).exp() * e0).collect();
    let margins = envelope.iter().zip(&series.e).map(|(v, e)| v - e).collect();
    Ok(GronwallReport {
        e0_window: e0,
        mu1,
        mu2,
        envelope_ok,
        shift_control_ok: envelope_ok && integral <= shift_bound,
        shift_integral: integral,
        shift_bound,
        envelope,
        margins,
        uniqueness: false,
        max_e,
        uniqueness_tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(times: Vec<f64>, e: Vec<f64>, e0: f64) -> (EntropySeries, ShiftTrajectory) {
        let n = times.len();
        let s = EntropySeries { times: times.clone(), e, l2: vec![0.0; n], h1: vec![0.0; n], h2: vec![0.0; n], e0_window: e0 };
        let tr = ShiftTrajectory {
            times,
            h: vec![0.0; n],
            hdot: vec![0.0; n],
            x_shift: vec![0.0; n],
            xdot: vec![0.1; n],
            hull: vec![(0.0, 0.0); n],
            v_sup: 0.0,
            mollification_n: 1,
            window: 1.0,
        };
        (s, tr)
    }

    #[test]
    fn exponential_growth_is_recovered() {
        let times: Vec<f64> = (0..=50).map(|k| k as f64 * 0.01).collect();
        let e: Vec<f64> = times.iter().map(|t| (3.0 * t).exp()).collect();
        let (s, tr) = series(times, e, 1.0);
        let g = verify_gronwall(&s, &tr, 2.0).unwrap();
        assert!((g.mu1 - 3.0).abs() < 1e-9, "{}", g.mu1);
        assert_eq!(g.mu2, 1.0);
        assert!(g.ok());
        assert!((g.shift_integral - 0.01 * 0.5).abs() < 1e-15);
    }

    #[test]
    fn decay_needs_no_growth_and_shift_raises_mu2() {
        let times: Vec<f64> = (0..=10).map(|k| k as f64 * 0.1).collect();
        let e: Vec<f64> = times.iter().map(|t| 1e-6 * (-t).exp()).collect();
        let (s, mut tr) = series(times, e, 1e-6);
        tr.xdot = vec![1.0; 11];
        let g = verify_gronwall(&s, &tr, 2.0).unwrap();
        assert_eq!(g.mu1, 0.0);
        assert!(g.mu2 > 1e5 && g.ok());
        assert!(g.shift_integral <= g.shift_bound);
    }

    #[test]
    fn blow_up_fails_without_error() {
        let (s, tr) = series(vec![0.0, 1e-3], vec![1.0, 1e300], 1.0);
        let g = verify_gronwall(&s, &tr, 2.0).unwrap();
        assert!(!g.envelope_ok);
    }

    #[test]
    fn zero_mass_branch() {
        let (s, tr) = series(vec![0.0, 0.1], vec![0.0, 1e-20], 0.0);
        let g = verify_gronwall(&s, &tr, 2.0).unwrap();
        assert!(g.uniqueness && g.ok());
        let (s, tr) = series(vec![0.0, 0.1], vec![0.0, 1e-3], 0.0);
        assert!(!verify_gronwall(&s, &tr, 2.0).unwrap().ok());
    }
}
