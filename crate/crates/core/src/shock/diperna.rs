//! Entropy dissipation along a shock curve and the DiPerna-type bounds.

use rayon::prelude::*;

use super::continuation::{uniform_nodes, ContinuationOptions, Tracer};
use super::hypotheses::{centered_derivative, derivative4};
use crate::error::{Error, Result};
use crate::relative::{eta_rel, q_rel};
use crate::state::State;
use crate::system::System;

/// Composite Simpson on an even number of equal intervals.
pub fn simpson(y: &[f64], h: f64) -> f64 {
    let n = y.len() - 1;
    assert!(n >= 2 && n % 2 == 0, "Simpson needs an even number of intervals");
    let mut acc = y[0] + y[n];
    for (i, v) in y.iter().enumerate().take(n).skip(1) {
        acc += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
    }
    acc * h / 3.0
}

/// `D(s, s0) = q(S(s); S(s0)) - sigma(s) eta(S(s) | S(s0))` directly and as the
/// integral of `sigma'(t) (eta(u|S(t)) - eta(u|S(s0)))` from `s0` to `s`.
pub fn dissipation(sys: &dyn System, base: &State, s: f64, s0: f64, step: f64) -> Result<(f64, f64)> {
    if !(s >= 0.0 && s0 >= 0.0) {
        return Err(Error::param("shock_curves", "s", "arc lengths must be nonnegative"));
    }
    if !(step > 0.0) {
        return Err(Error::param("shock_curves", "step", "must be positive"));
    }
    sys.check(base)?;
    if s == s0 {
        return Ok((0.0, 0.0));
    }
    let (lo, hi) = if s < s0 { (s, s0) } else { (s0, s) };
    let n = (2 * ((hi - lo) / (2.0 * step)).ceil() as usize).max(4);
    let h = (hi - lo) / n as f64;
    let before = (1..=2).filter(|k| lo - *k as f64 * h >= 0.0).count();
    let mut nodes: Vec<f64> = (0..before).rev().map(|k| lo - (k + 1) as f64 * h).collect();
    nodes.extend((0..=n).map(|j| if j == n { hi } else { lo + j as f64 * h }));
    nodes.push(hi + h);
    nodes.push(hi + 2.0 * h);
    let pts = Tracer::first_family(sys, *base, ContinuationOptions::with_step(step.min(h)))?.trace(&nodes)?;
    let sig: Vec<f64> = pts.iter().map(|p| p.speed).collect();
    let dsig = derivative4(&sig, h);
    let i_lo = before;
    let i_hi = before + n;
    let (i_s, i_s0) = if s < s0 { (i_lo, i_hi) } else { (i_hi, i_lo) };
    let v = pts[i_s0].locus;
    let g0 = eta_rel(sys, base, &v);
    let integrand: Vec<f64> =
        (i_lo..=i_hi).map(|i| dsig[i] * (eta_rel(sys, base, &pts[i].locus) - g0)).collect();
    let mut integral = simpson(&integrand, h);
    if s < s0 {
        integral = -integral;
    }
    let w = pts[i_s].locus;
    let direct = q_rel(sys, &w, &v) - pts[i_s].speed * eta_rel(sys, &w, &v);
    Ok((direct, integral))
}

/// Constants `k`, `delta0` of the two-regime bound on `D(s, s0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DipernaFit {
    pub k: f64,
    pub delta0: f64,
    pub b: f64,
    pub rho: f64,
    /// `sup sigma'` and `inf d/ds eta(u|S)` used in the margin conditions.
    pub m: f64,
    pub p: f64,
    /// Raw minimum ratio before the 10% shrink.
    pub k_raw: f64,
    pub grid: usize,
}

struct DenseCurve {
    s: Vec<f64>,
    loci: Vec<State>,
    sigma: Vec<f64>,
    dsigma: Vec<f64>,
    dstrength: Vec<f64>,
}

fn dense_curve(sys: &dyn System, base: &State, b: f64, n: usize) -> Result<DenseCurve> {
    let nodes = uniform_nodes(b, n);
    let ds = b / n as f64;
    let pts = Tracer::first_family(sys, *base, ContinuationOptions::with_step(ds.min(1e-2)))?.trace(&nodes)?;
    let sigma: Vec<f64> = pts.iter().map(|p| p.speed).collect();
    let strength: Vec<f64> = pts.iter().map(|p| eta_rel(sys, base, &p.locus)).collect();
    Ok(DenseCurve {
        dsigma: centered_derivative(&sigma, ds),
        dstrength: centered_derivative(&strength, ds),
        s: nodes,
        loci: pts.iter().map(|p| p.locus).collect(),
        sigma,
    })
}

/// Indices of `count` grid points: the s-grid on `[0, b]` and the s0-grid inside `(rho, b)`.
fn grid_indices(curve: &DenseCurve, rho: f64, count: usize) -> (Vec<usize>, Vec<usize>) {
    let n = curve.s.len() - 1;
    let s_idx: Vec<usize> = (0..count).map(|i| (i * n) / (count - 1).max(1)).collect();
    let inner: Vec<usize> = (0..=n).filter(|&j| curve.s[j] > rho && j < n).collect();
    let s0_idx: Vec<usize> = if inner.is_empty() {
        vec![]
    } else {
        (0..count).map(|i| inner[(i * (inner.len() - 1)) / (count - 1).max(1)]).collect()
    };
    (s_idx, s0_idx)
}

fn d_value(sys: &dyn System, c: &DenseCurve, i: usize, j: usize) -> f64 {
    let (w, v) = (c.loci[i], c.loci[j]);
    q_rel(sys, &w, &v) - c.sigma[i] * eta_rel(sys, &w, &v)
}

/// Fits `k, delta0` on a `grid x grid` sample of `(s, s0)` for every base.
pub fn fit_diperna_bounds(sys: &dyn System, bases: &[State], b: f64, rho: f64, grid: usize) -> Result<DipernaFit> {
    if !(rho > 0.0 && rho < b) {
        return Err(Error::param("shock_curves", "rho", format!("need 0 < rho < B, got rho = {rho}, B = {b}")));
    }
    if grid < 4 || bases.is_empty() {
        return Err(Error::param("shock_curves", "grid", "need grid >= 4 and at least one base"));
    }
    let n_dense = 4 * (grid - 1);
    let curves: Vec<DenseCurve> =
        bases.par_iter().map(|u| dense_curve(sys, u, b, n_dense)).collect::<Result<Vec<_>>>()?;
    let ds = b / n_dense as f64;
    let mut m = f64::NEG_INFINITY;
    let mut p = f64::INFINITY;
    for c in &curves {
        for j in 1..c.s.len() {
            m = m.max(c.dsigma[j]);
            if c.s[j] >= rho {
                p = p.min(c.dstrength[j]);
            }
        }
    }
    if !(m < 0.0 && p > 0.0) {
        return Err(Error::Hypothesis(format!("Liu margin M = {m}, strength margin P = {p}")));
    }
    // largest delta (a multiple of ds) meeting both half-margin conditions
    let mut delta_steps = n_dense;
    for c in &curves {
        let mut best = 0;
        'outer: for d in 1..=n_dense {
            for j0 in 0..=n_dense {
                if c.s[j0] <= rho {
                    continue;
                }
                let lo = j0.saturating_sub(d);
                let hi = (j0 + d).min(n_dense);
                for j in lo..=hi {
                    if (c.dsigma[j] - c.dsigma[j0]).abs() > 0.5 * m.abs()
                        || (c.dstrength[j] - c.dstrength[j0]).abs() > 0.5 * p
                    {
                        break 'outer;
                    }
                }
            }
            best = d;
        }
        delta_steps = delta_steps.min(best);
    }
    if delta_steps == 0 {
        return Err(Error::Hypothesis("no delta0 satisfies the half-margin conditions on the grid".into()));
    }
    let delta0 = delta_steps as f64 * ds;
    let mut k_raw = f64::INFINITY;
    for c in &curves {
        let (s_idx, s0_idx) = grid_indices(c, rho, grid);
        for &j in &s0_idx {
            // the far-regime ratio is smallest right at |s - s0| = delta0, which the grid may miss
            let edges = [j.checked_sub(delta_steps), Some(j + delta_steps).filter(|&i| i <= n_dense)];
            for i in s_idx.iter().copied().chain(edges.into_iter().flatten()) {
                if i == j {
                    continue;
                }
                let dsig = c.sigma[i] - c.sigma[j];
                if dsig == 0.0 {
                    continue;
                }
                let d = d_value(sys, c, i, j);
                let near = i.abs_diff(j) < delta_steps;
                let bound = if near { dsig * dsig } else { delta0 * dsig.abs() };
                k_raw = k_raw.min(-d / bound);
            }
        }
    }
    if !(k_raw > 0.0) {
        return Err(Error::Hypothesis(format!("dissipation bound has no positive constant (min ratio {k_raw})")));
    }
    Ok(DipernaFit { k: 0.9 * k_raw, delta0, b, rho, m, p, k_raw, grid })
}

/// Re-checks both inequalities of a fit on a `grid x grid` sample.
pub fn verify_diperna(sys: &dyn System, bases: &[State], fit: &DipernaFit, grid: usize) -> Result<bool> {
    let n_dense = 4 * (grid - 1);
    let ok: Vec<Result<bool>> = bases
        .par_iter()
        .map(|u| {
            let c = dense_curve(sys, u, fit.b, n_dense)?;
            let (s_idx, s0_idx) = grid_indices(&c, fit.rho, grid);
            for &j in &s0_idx {
                for &i in &s_idx {
                    let dsig = c.sigma[i] - c.sigma[j];
                    let d = d_value(sys, &c, i, j);
                    let bound = if (c.s[i] - c.s[j]).abs() < fit.delta0 {
                        -fit.k * dsig * dsig
                    } else {
                        -fit.k * fit.delta0 * dsig.abs()
                    };
                    if d > bound + 1e-14 {
                        return Ok(false);
                    }
                }
            }
            Ok(true)
        })
        .collect();
    let mut all = true;
    for r in ok {
        all &= r?;
    }
    Ok(all)
}
