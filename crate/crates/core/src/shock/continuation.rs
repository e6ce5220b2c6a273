//! Predictor-corrector arc-length continuation of Hugoniot loci.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::state::State;
use crate::system::{Reflected, System};

/// Which extremal family to follow.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    First,
    Last,
}

/// A point of a shock curve: `S_u(s)` with speed `sigma_u(s)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShockCurvePoint {
    pub base: State,
    pub s: f64,
    pub locus: State,
    pub speed: f64,
}

impl ShockCurvePoint {
    /// `|f(S) - f(u) - sigma (S - u)|_inf`
    pub fn rh_residual(&self, sys: &dyn System) -> f64 {
        (sys.flux(&self.locus) - sys.flux(&self.base) - (self.locus - self.base) * self.speed).norm_inf()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuationOptions {
    /// Largest arc-length step.
    pub step: f64,
    /// Newton stops once the scaled residual drops below this.
    pub newton_tol: f64,
    pub max_newton: usize,
    /// Halving stops here.
    pub min_step: f64,
}

impl Default for ContinuationOptions {
    fn default() -> Self {
        ContinuationOptions { step: 1e-2, newton_tol: 1e-13, max_newton: 30, min_step: 1e-9 }
    }
}

impl ContinuationOptions {
    pub fn with_step(step: f64) -> Self {
        ContinuationOptions { step, ..Default::default() }
    }

    fn validate(&self) -> Result<()> {
        if !(self.step > 0.0) {
            return Err(Error::param("shock_curves", "step", format!("must be positive, got {}", self.step)));
        }
        Ok(())
    }
}

/// Follows the Hugoniot locus of `base` for eigenvalue index `k`, leaving along `dir * r_k`.
pub struct Tracer<'a> {
    sys: &'a dyn System,
    base: State,
    k: usize,
    dir: f64,
    opts: ContinuationOptions,
    f_base: State,
    scale: f64,
}

/// Outcome of a trace that may stop early.
pub struct PartialTrace {
    pub points: Vec<ShockCurvePoint>,
    pub stopped: Option<Error>,
}

impl<'a> Tracer<'a> {
    pub fn new(sys: &'a dyn System, base: State, k: usize, dir: f64, opts: ContinuationOptions) -> Result<Self> {
        sys.check(&base)?;
        opts.validate()?;
        let f_base = sys.flux(&base);
        let scale = 1.0 + f_base.norm_inf() + base.norm_inf();
        Ok(Tracer { sys, base, k, dir, opts, f_base, scale })
    }

    /// Tracer for the first family oriented so that the speed decreases (Liu direction).
    pub fn first_family(sys: &'a dyn System, base: State, opts: ContinuationOptions) -> Result<Self> {
        sys.check(&base)?;
        let r = sys.eigenvector(&base, 0)?;
        let eps = 1e-6 * base.norm().max(1.0);
        let slope = sys.first_eigenvalue(&base.axpy(eps, &r)) - sys.first_eigenvalue(&base.axpy(-eps, &r));
        let dir = if slope > 0.0 { -1.0 } else { 1.0 };
        Tracer::new(sys, base, 0, dir, opts)
    }

    fn rh(&self, s: &State, sigma: f64) -> State {
        self.sys.flux(s) - self.f_base - (*s - self.base) * sigma
    }

    pub fn start(&self) -> Result<ShockCurvePoint> {
        let speed = self.sys.eigenvalues(&self.base)?[self.k];
        Ok(ShockCurvePoint { base: self.base, s: 0.0, locus: self.base, speed })
    }

    /// Damped Newton for RH plus `|S - prev| = h`, started from the predictor.
    fn correct(&self, prev: &State, h: f64, mut s: State, mut sigma: f64) -> Option<(State, f64)> {
        let n = s.dim();
        let resid = |s: &State, sigma: f64| -> Option<DVector<f64>> {
            if !self.sys.is_admissible(s) {
                return None;
            }
            let r = self.rh(s, sigma);
            let d = *s - *prev;
            let mut v = DVector::zeros(n + 1);
            for i in 0..n {
                v[i] = r[i] / self.scale;
            }
            v[n] = (d.dot(&d) - h * h) / (2.0 * h);
            Some(v)
        };
        let mut f = resid(&s, sigma)?;
        for _ in 0..self.opts.max_newton {
            let norm = f.amax();
            if norm <= self.opts.newton_tol {
                return Some((s, sigma));
            }
            let jf = self.sys.flux_jacobian(&s);
            let d = s - *prev;
            let mut jac = DMatrix::zeros(n + 1, n + 1);
            for i in 0..n {
                for j in 0..n {
                    jac[(i, j)] = jf[(i, j)] / self.scale;
                }
                jac[(i, i)] -= sigma / self.scale;
                jac[(i, n)] = -(s[i] - self.base[i]) / self.scale;
                jac[(n, i)] = d[i] / h;
            }
            let delta = jac.lu().solve(&(-&f))?;
            let mut lambda = 1.0;
            let mut accepted = false;
            for _ in 0..12 {
                let mut trial = s;
                for i in 0..n {
                    trial[i] += lambda * delta[i];
                }
                let trial_sigma = sigma + lambda * delta[n];
                if let Some(ft) = resid(&trial, trial_sigma) {
                    if ft.amax() < norm || ft.amax() <= self.opts.newton_tol {
                        s = trial;
                        sigma = trial_sigma;
                        f = ft;
                        accepted = true;
                        break;
                    }
                }
                lambda *= 0.5;
            }
            if !accepted {
                return None;
            }
        }
        if f.amax() <= 1e3 * self.opts.newton_tol {
            Some((s, sigma))
        } else {
            None
        }
    }

    /// Traces through the ascending arc-length `nodes`, returning a point at each.
    /// Stops early (returning the points so far) on failure.
    pub fn trace_partial(&self, nodes: &[f64]) -> PartialTrace {
        let mut points = Vec::with_capacity(nodes.len());
        let start = match self.start() {
            Ok(p) => p,
            Err(e) => return PartialTrace { points, stopped: Some(e) },
        };
        let r = match self.sys.eigenvector(&self.base, self.k) {
            Ok(r) => r * self.dir,
            Err(e) => return PartialTrace { points, stopped: Some(e) },
        };
        // initial speed slope along r: d sigma/ds = (1/2) grad(lambda_k) . r
        let eps = 1e-6 * self.base.norm().max(1.0);
        let lam_k = |u: &State| self.sys.eigenvalues(u).map(|l| l[self.k]).unwrap_or(f64::NAN);
        let mut slope0 = 0.25 * (lam_k(&self.base.axpy(eps, &r)) - lam_k(&self.base.axpy(-eps, &r))) / eps;
        if !slope0.is_finite() {
            slope0 = 0.0;
        }

        let mut cur = start;
        let mut tangent = r;
        let mut sigma_slope = slope0;
        let mut h_max = self.opts.step;
        let mut saw_inadmissible = false;
        for &node in nodes {
            if !(node >= cur.s - 1e-15) {
                return PartialTrace {
                    points,
                    stopped: Some(Error::param("shock_curves", "nodes", "arc-length nodes must ascend from 0")),
                };
            }
            while node - cur.s > 1e-14 {
                let h = h_max.min(node - cur.s);
                let pred = cur.locus.axpy(h, &tangent);
                let pred_sigma = cur.speed + h * sigma_slope;
                if !self.sys.is_admissible(&pred) {
                    saw_inadmissible = true;
                }
                let ok = self.correct(&cur.locus, h, pred, pred_sigma).and_then(|(s, sigma)| {
                    let chord = (s - cur.locus) * (1.0 / h);
                    // reject branch jumps: the new chord must continue the old direction
                    if chord.dot(&tangent) > 0.5 {
                        Some((s, sigma, chord))
                    } else {
                        None
                    }
                });
                match ok {
                    Some((s, sigma, chord)) => {
                        let next_s = if node - cur.s - h <= 1e-14 { node } else { cur.s + h };
                        sigma_slope = (sigma - cur.speed) / h;
                        tangent = chord * (1.0 / chord.norm());
                        cur = ShockCurvePoint { base: self.base, s: next_s, locus: s, speed: sigma };
                        saw_inadmissible = false;
                        if h_max < self.opts.step {
                            h_max = (2.0 * h_max).min(self.opts.step);
                        }
                    }
                    None => {
                        if !self.sys.is_admissible(&pred) {
                            saw_inadmissible = true;
                        }
                        h_max *= 0.5;
                        if h_max < self.opts.min_step {
                            let err = if saw_inadmissible {
                                Error::DomainExit {
                                    s_u: cur.s,
                                    detail: format!("from base {} toward s = {node}", self.base),
                                }
                            } else {
                                Error::Continuation {
                                    last_s: cur.s,
                                    target: node,
                                    detail: format!("Newton failed from base {}", self.base),
                                }
                            };
                            return PartialTrace { points, stopped: Some(err) };
                        }
                    }
                }
            }
            points.push(ShockCurvePoint { s: node, ..cur });
        }
        PartialTrace { points, stopped: None }
    }

    pub fn trace(&self, nodes: &[f64]) -> Result<Vec<ShockCurvePoint>> {
        let t = self.trace_partial(nodes);
        match t.stopped {
            Some(e) => Err(e),
            None => Ok(t.points),
        }
    }
}

/// `n + 1` equally spaced nodes on `[0, s_max]`.
pub fn uniform_nodes(s_max: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|j| if j == n { s_max } else { s_max * j as f64 / n as f64 }).collect()
}

/// Traces the extremal-family locus of `base` through `nodes`.
pub fn trace_locus(
    sys: &dyn System,
    base: &State,
    family: Family,
    nodes: &[f64],
    opts: ContinuationOptions,
) -> Result<Vec<ShockCurvePoint>> {
    match family {
        Family::First => Tracer::first_family(sys, *base, opts)?.trace(nodes),
        Family::Last => {
            let refl = Reflected(sys);
            let pts = Tracer::first_family(&refl, *base, opts)?.trace(nodes)?;
            Ok(pts.into_iter().map(|p| ShockCurvePoint { speed: -p.speed, ..p }).collect())
        }
    }
}

/// The point at arc length `s` on the extremal locus of `base`.
pub fn hugoniot_locus(sys: &dyn System, base: &State, family: Family, s: f64, step: f64) -> Result<ShockCurvePoint> {
    if !(s >= 0.0) {
        return Err(Error::param("shock_curves", "s", format!("must be nonnegative, got {s}")));
    }
    let pts = trace_locus(sys, base, family, &[s], ContinuationOptions::with_step(step))?;
    Ok(pts[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::{Burgers, FullEuler, IsentropicEuler};

    #[test]
    fn zero_arc_length_is_base() {
        let sys = IsentropicEuler::new(1.4, 1.0).unwrap();
        let u = State::new(&[1.2, 0.3]);
        let p = hugoniot_locus(&sys, &u, Family::First, 0.0, 0.01).unwrap();
        assert_eq!(p.locus, u);
        assert_eq!(p.speed, sys.eigenvalues(&u).unwrap()[0]);
    }

    #[test]
    fn burgers_closed_form() {
        let p = hugoniot_locus(&Burgers, &State::scalar(1.0), Family::First, 1.0, 0.01).unwrap();
        assert!((p.locus[0] - 0.0).abs() < 1e-12);
        assert!((p.speed - 0.5).abs() < 1e-12);
    }

    #[test]
    fn euler_rh_residual_small_along_path() {
        let sys = FullEuler::new(1.4).unwrap();
        let u = sys.from_primitive(&State::new(&[1.0, 0.2, 1.0]));
        let pts = trace_locus(&sys, &u, Family::First, &uniform_nodes(1.0, 100), Default::default()).unwrap();
        for w in pts.windows(2) {
            assert!(w[1].rh_residual(&sys) <= 1e-8);
            assert!(w[1].speed < w[0].speed);
        }
    }

    #[test]
    fn last_family_by_reflection_matches_direct() {
        let sys = IsentropicEuler::new(1.4, 1.0).unwrap();
        let u = State::new(&[1.0, 0.1]);
        let refl = trace_locus(&sys, &u, Family::Last, &uniform_nodes(0.5, 10), Default::default()).unwrap();
        // direct trace of family index 1 in the compressive direction
        let direct = Tracer::new(&sys, u, 1, 1.0, Default::default()).unwrap();
        let mut pts = direct.trace(&uniform_nodes(0.5, 10)).unwrap();
        if (pts[1].locus - refl[1].locus).norm() > 1e-3 {
            pts = Tracer::new(&sys, u, 1, -1.0, Default::default()).unwrap().trace(&uniform_nodes(0.5, 10)).unwrap();
        }
        for (a, b) in refl.iter().zip(&pts) {
            assert!((a.locus - b.locus).norm() < 1e-9);
            assert!((a.speed - b.speed).abs() < 1e-9);
        }
        // the last family speeds increase along the compressive branch
        assert!(refl[10].speed > refl[0].speed);
    }

    #[test]
    fn rejects_bad_step() {
        assert!(hugoniot_locus(&Burgers, &State::scalar(1.0), Family::First, 1.0, 0.0).is_err());
        assert!(hugoniot_locus(&Burgers, &State::scalar(1.0), Family::First, -1.0, 0.1).is_err());
    }
}
