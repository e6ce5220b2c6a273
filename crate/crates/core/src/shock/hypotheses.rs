//! Sampled checks of the Liu, strength and admissibility hypotheses.

use rayon::prelude::*;

use super::continuation::{uniform_nodes, ContinuationOptions, ShockCurvePoint, Tracer};
use crate::error::{Error, Result};
use crate::relative::eta_rel;
use crate::state::State;
use crate::system::System;

/// Second-order derivative of equally spaced samples (one-sided at the ends).
pub fn centered_derivative(y: &[f64], h: f64) -> Vec<f64> {
    let n = y.len();
    assert!(n >= 3, "need at least three samples");
    let mut d = vec![0.0; n];
    d[0] = (-3.0 * y[0] + 4.0 * y[1] - y[2]) / (2.0 * h);
    d[n - 1] = (3.0 * y[n - 1] - 4.0 * y[n - 2] + y[n - 3]) / (2.0 * h);
    for i in 1..n - 1 {
        d[i] = (y[i + 1] - y[i - 1]) / (2.0 * h);
    }
    d
}

/// Fourth-order derivative of equally spaced samples.
pub fn derivative4(y: &[f64], h: f64) -> Vec<f64> {
    let n = y.len();
    assert!(n >= 5, "need at least five samples");
    let mut d = vec![0.0; n];
    for i in 0..n {
        d[i] = if i >= 2 && i + 2 < n {
            (y[i - 2] - 8.0 * y[i - 1] + 8.0 * y[i + 1] - y[i + 2]) / (12.0 * h)
        } else if i < 2 {
            let j = i;
            if j == 0 {
                (-25.0 * y[0] + 48.0 * y[1] - 36.0 * y[2] + 16.0 * y[3] - 3.0 * y[4]) / (12.0 * h)
            } else {
                (-3.0 * y[0] - 10.0 * y[1] + 18.0 * y[2] - 6.0 * y[3] + y[4]) / (12.0 * h)
            }
        } else if i == n - 2 {
            -(-3.0 * y[n - 1] - 10.0 * y[n - 2] + 18.0 * y[n - 3] - 6.0 * y[n - 4] + y[n - 5]) / (12.0 * h)
        } else {
            -(-25.0 * y[n - 1] + 48.0 * y[n - 2] - 36.0 * y[n - 3] + 16.0 * y[n - 4] - 3.0 * y[n - 5]) / (12.0 * h)
        };
    }
    d
}

/// A traced extremal locus on a uniform grid with its derivative data.
#[derive(Debug, Clone)]
pub struct ScannedCurve {
    pub points: Vec<ShockCurvePoint>,
    pub ds: f64,
    pub dsigma: Vec<f64>,
    /// `d/ds eta(u | S(s))`
    pub dstrength: Vec<f64>,
}

pub fn scan_curve(sys: &dyn System, base: &State, s_max: f64, n_s: usize, opts: ContinuationOptions) -> Result<ScannedCurve> {
    let nodes = uniform_nodes(s_max, n_s);
    let points = Tracer::first_family(sys, *base, opts)?.trace(&nodes)?;
    let ds = s_max / n_s as f64;
    let sig: Vec<f64> = points.iter().map(|p| p.speed).collect();
    let str_: Vec<f64> = points.iter().map(|p| eta_rel(sys, base, &p.locus)).collect();
    Ok(ScannedCurve { dsigma: centered_derivative(&sig, ds), dstrength: centered_derivative(&str_, ds), points, ds })
}

#[derive(Debug, Clone)]
pub struct LiuStrengthReport {
    pub liu_ok: bool,
    /// `sup d sigma / ds` over `s` in `(0, s_max]`.
    pub m: f64,
    pub strength_ok: bool,
    /// `inf d/ds eta(u|S(s))` over `s >= rho`.
    pub p: f64,
    /// Worst `|sigma(0+) - lambda_1(u)|` after linear extrapolation.
    pub start_speed_error: f64,
    pub start_ok: bool,
    pub bases: Vec<State>,
    pub s_grid: Vec<f64>,
    pub rho: f64,
    /// Arc-length window on which the curve was explored.
    pub window: (f64, f64),
}

impl LiuStrengthReport {
    pub fn pass(&self) -> bool {
        self.liu_ok && self.strength_ok && self.start_ok
    }
}

pub fn check_liu_strength(sys: &dyn System, bases: &[State], s_max: f64, rho: f64, n_s: usize) -> Result<LiuStrengthReport> {
    if !(rho > 0.0 && rho < s_max) {
        return Err(Error::param("shock_curves", "rho", format!("need 0 < rho < s_max, got rho = {rho}, s_max = {s_max}")));
    }
    if n_s < 4 {
        return Err(Error::param("shock_curves", "n_s", "need at least 4 intervals"));
    }
    let opts = ContinuationOptions::with_step((s_max / n_s as f64).min(1e-2));
    let scans: Vec<Result<ScannedCurve>> =
        bases.par_iter().map(|b| scan_curve(sys, b, s_max, n_s, opts)).collect();
    let mut m = f64::NEG_INFINITY;
    let mut p = f64::INFINITY;
    let mut start_err: f64 = 0.0;
    for (b, scan) in bases.iter().zip(scans) {
        let scan = scan.map_err(|e| Error::Hypothesis(format!("base {b}: {e}")))?;
        for (j, pt) in scan.points.iter().enumerate().skip(1) {
            m = m.max(scan.dsigma[j]);
            if pt.s >= rho - 1e-12 {
                p = p.min(scan.dstrength[j]);
            }
        }
        let extrap = 2.0 * scan.points[1].speed - scan.points[2].speed;
        start_err = start_err.max((extrap - sys.first_eigenvalue(b)).abs());
    }
    let ds = s_max / n_s as f64;
    Ok(LiuStrengthReport {
        liu_ok: m < 0.0,
        m,
        strength_ok: p > 0.0,
        p,
        start_speed_error: start_err,
        start_ok: start_err <= 10.0 * ds * ds * (1.0 + sys.max_speed(&bases[0])),
        bases: bases.to_vec(),
        s_grid: uniform_nodes(s_max, n_s),
        rho,
        window: (0.0, s_max),
    })
}

/// One flagged discontinuity of the admissibility sweep.
#[derive(Debug, Clone)]
pub struct SweepViolation {
    pub left: State,
    pub right: State,
    pub speed: f64,
    pub family: usize,
    pub kind: &'static str,
}

#[derive(Debug, Clone, Default)]
pub struct AdmissibilityReport {
    pub entropic_samples: usize,
    pub rejected_samples: usize,
    /// Entropic discontinuities with `sigma <= lambda_1(u_L)`.
    pub slow_samples: usize,
    pub violations: Vec<SweepViolation>,
    /// Branches cut short by the admissible set or continuation, with their reach.
    pub truncated: Vec<(usize, usize, f64)>,
}

impl AdmissibilityReport {
    pub fn pass(&self) -> bool {
        self.violations.is_empty()
    }
}

fn distance_to_polyline(p: &State, line: &[ShockCurvePoint]) -> f64 {
    let mut best = f64::INFINITY;
    for w in line.windows(2) {
        let a = w[0].locus;
        let d = w[1].locus - a;
        let len2 = d.dot(&d);
        let t = if len2 > 0.0 { ((*p - a).dot(&d) / len2).clamp(0.0, 1.0) } else { 0.0 };
        best = best.min((*p - a.axpy(t, &d)).norm());
    }
    best
}

/// Sweeps every family's Hugoniot locus (both directions) from each base.
pub fn check_admissibility(sys: &dyn System, bases: &[State], n_probe: usize, b: f64) -> Result<AdmissibilityReport> {
    if n_probe < 2 || !(b > 0.0) {
        return Err(Error::param("shock_curves", "n_probe", "need n_probe >= 2 and B > 0"));
    }
    let n = sys.dim();
    let probe_nodes = uniform_nodes(b, n_probe);
    let fine_opts = ContinuationOptions::with_step(5e-3);
    let reports: Vec<Result<AdmissibilityReport>> = bases
        .par_iter()
        .enumerate()
        .map(|(ib, base)| {
            let mut rep = AdmissibilityReport::default();
            let lam_l = sys.first_eigenvalue(base);
            let one_locus = Tracer::first_family(sys, *base, fine_opts)?
                .trace_partial(&uniform_nodes(b * 1.5, (b * 1.5 / 5e-3).ceil() as usize))
                .points;
            for k in 0..n {
                for dir in [1.0, -1.0] {
                    let tr = Tracer::new(sys, *base, k, dir, ContinuationOptions::with_step(1e-2))?;
                    let t = tr.trace_partial(&probe_nodes);
                    if let Some(err) = &t.stopped {
                        let reach = match err {
                            Error::DomainExit { s_u, .. } => *s_u,
                            Error::Continuation { last_s, .. } => *last_s,
                            _ => 0.0,
                        };
                        rep.truncated.push((ib, k, reach));
                    }
                    for p in t.points.iter().skip(1) {
                        let ur = p.locus;
                        let dq = sys.entropy_flux(&ur) - sys.entropy_flux(base);
                        let de = sys.entropy(&ur) - sys.entropy(base);
                        let tol = 1e-9 * (1.0 + dq.abs() + (p.speed * de).abs());
                        if dq - p.speed * de > tol {
                            rep.rejected_samples += 1;
                            continue;
                        }
                        rep.entropic_samples += 1;
                        if p.speed <= sys.first_eigenvalue(&ur) {
                            rep.violations.push(SweepViolation {
                                left: *base,
                                right: ur,
                                speed: p.speed,
                                family: k,
                                kind: "speed not above lambda_1(u_R)",
                            });
                        }
                        if p.speed <= lam_l {
                            rep.slow_samples += 1;
                            let dist = distance_to_polyline(&ur, &one_locus);
                            if dist > 1e-4 * (1.0 + ur.norm()) {
                                rep.violations.push(SweepViolation {
                                    left: *base,
                                    right: ur,
                                    speed: p.speed,
                                    family: k,
                                    kind: "slow entropic shock off the 1-locus",
                                });
                            }
                        }
                    }
                }
            }
            Ok(rep)
        })
        .collect();
    let mut total = AdmissibilityReport::default();
    for r in reports {
        let r = r?;
        total.entropic_samples += r.entropic_samples;
        total.rejected_samples += r.rejected_samples;
        total.slow_samples += r.slow_samples;
        total.violations.extend(r.violations);
        total.truncated.extend(r.truncated);
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::{Burgers, CubicFlux, FullEuler, IsentropicEuler};

    #[test]
    fn derivative_stencils_are_exact_on_polynomials() {
        let h = 0.1;
        let y: Vec<f64> = (0..8).map(|i| (i as f64 * h).powi(2)).collect();
        for (i, d) in centered_derivative(&y, h).iter().enumerate() {
            assert!((d - 2.0 * i as f64 * h).abs() < 1e-12);
        }
        let y: Vec<f64> = (0..8).map(|i| (i as f64 * h).powi(4)).collect();
        for (i, d) in derivative4(&y, h).iter().enumerate() {
            assert!((d - 4.0 * (i as f64 * h).powi(3)).abs() < 1e-10, "{i}");
        }
    }

    #[test]
    fn burgers_h1() {
        let bases: Vec<State> = [-1.0, 0.0, 1.0].iter().map(|&u| State::scalar(u)).collect();
        let rep = check_liu_strength(&Burgers, &bases, 2.0, 0.25, 40).unwrap();
        assert!(rep.pass());
        assert!((rep.m + 0.5).abs() < 1e-10);
        assert!((rep.p - 0.25).abs() < 1e-10);
    }

    #[test]
    fn cubic_flux_fails_liu_at_origin() {
        let rep = check_liu_strength(&CubicFlux, &[State::scalar(0.0)], 1.0, 0.2, 20).unwrap();
        assert!(!rep.liu_ok);
    }

    #[test]
    fn isentropic_h1_passes() {
        let sys = IsentropicEuler::new(1.4, 1.0).unwrap();
        let bases: Vec<State> = (0..5)
            .map(|i| sys.from_primitive(&State::new(&[0.5 + 0.3 * i as f64, -0.5 + 0.25 * i as f64])))
            .collect();
        let rep = check_liu_strength(&sys, &bases, 1.0, 0.1, 50).unwrap();
        assert!(rep.pass(), "{rep:?}");
    }

    #[test]
    fn sweeps_find_no_violations() {
        let rep = check_admissibility(&Burgers, &[State::scalar(0.5)], 10, 1.0).unwrap();
        assert!(rep.pass() && rep.entropic_samples == 10);
        let sys = FullEuler::new(1.4).unwrap();
        let base = sys.from_primitive(&State::new(&[1.0, 0.0, 1.0]));
        let rep = check_admissibility(&sys, &[base], 10, 1.0).unwrap();
        assert!(rep.pass(), "{:?}", rep.violations);
        // contact samples are entropic in both directions but never slow
        assert!(rep.entropic_samples >= 30);
    }

    #[test]
    fn rejects_bad_rho() {
        assert!(check_liu_strength(&Burgers, &[State::scalar(0.0)], 1.0, 1.5, 10).is_err());
    }
}
