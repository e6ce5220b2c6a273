//! Sampled constants for the shift: the weight `a`, the margins `c1`, `c4`, `gamma0`,
//! the Lipschitz constant `L*` and the drift `C*`.
//!
//! Every infimum is shrunk by `shrink` and every supremum inflated by `inflate`;
//! the sample counts travel with the result.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::relative::{eta_rel, q_rel};
use crate::shock::{r_a_geometry, trace_locus, uniform_nodes, ContinuationOptions, Family};
use crate::state::State;
use crate::system::{Region, System};

/// `eta(u|u_L) - a eta(u|u_R)`.
fn gamma(sys: &dyn System, u: &State, u_l: &State, u_r: &State, a: f64) -> f64 {
    eta_rel(sys, u, u_l) - a * eta_rel(sys, u, u_r)
}

/// The map whose Lipschitz constant is `L*`.
pub fn phi(sys: &dyn System, u: &State, u_l: &State, u_r: &State, a: f64) -> f64 {
    let lam = sys.first_eigenvalue(u);
    a * (q_rel(sys, u, u_r) - lam * eta_rel(sys, u, u_r)) - q_rel(sys, u, u_l) + lam * eta_rel(sys, u, u_l)
}

fn default_a0() -> f64 {
    1e-2
}
fn default_theta() -> f64 {
    0.5
}
fn default_shrink() -> f64 {
    0.9
}
fn default_inflate() -> f64 {
    1.05
}
fn default_n_sr() -> usize {
    5
}
fn default_n_s() -> usize {
    11
}
fn default_n_dirs() -> usize {
    12
}
fn default_lip_samples() -> usize {
    2000
}
fn default_c4_samples() -> usize {
    400
}
fn default_c_star_samples() -> usize {
    10_000
}
fn default_step() -> f64 {
    1e-2
}

/// Knobs for the constant fits. All have defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightOptions {
    /// Starting weight of the halving search.
    #[serde(default = "default_a0")]
    pub a0: f64,
    /// Skip the search and use this weight.
    #[serde(default)]
    pub a: Option<f64>,
    /// Replace the computed drift, e.g. `0` for the toothless indicator.
    #[serde(default)]
    pub c_star: Option<f64>,
    #[serde(default = "default_theta")]
    pub theta: f64,
    #[serde(default = "default_shrink")]
    pub shrink: f64,
    #[serde(default = "default_inflate")]
    pub inflate: f64,
    /// Shock strengths `s_R` sampled in `[rho, B]`.
    #[serde(default = "default_n_sr")]
    pub n_sr: usize,
    /// Strengths `s` sampled in `[0, B]`.
    #[serde(default = "default_n_s")]
    pub n_s: usize,
    /// Directions used to sample `R_a` (dimension > 1).
    #[serde(default = "default_n_dirs")]
    pub n_dirs: usize,
    #[serde(default = "default_lip_samples")]
    pub lipschitz_samples: usize,
    #[serde(default = "default_c4_samples")]
    pub c4_samples: usize,
    #[serde(default = "default_c_star_samples")]
    pub c_star_samples: usize,
    #[serde(default = "default_step")]
    pub step: f64,
    #[serde(default)]
    pub seed: u64,
}

impl Default for WeightOptions {
    fn default() -> Self {
        toml::from_str("").expect("defaults parse")
    }
}

impl WeightOptions {
    pub fn validate(&self) -> Result<()> {
        let m = "shift_filippov";
        if !(self.a0 > 0.0 && self.a0 < 1.0) {
            return Err(Error::param(m, "constants.a0", "must lie in (0, 1)"));
        }
        if let Some(a) = self.a {
            if !(a > 0.0 && a < 1.0) {
                return Err(Error::param(m, "constants.a", "must lie in (0, 1)"));
            }
        }
        if let Some(c) = self.c_star {
            if !(c >= 0.0 && c.is_finite()) {
                return Err(Error::param(m, "constants.c_star", "must be finite and nonnegative"));
            }
        }
        if !(self.shrink > 0.0 && self.shrink <= 1.0) || !(self.inflate >= 1.0) {
            return Err(Error::param(m, "constants.shrink", "need 0 < shrink <= 1 <= inflate"));
        }
        if self.n_sr == 0 || self.n_s < 2 || self.n_dirs == 0 {
            return Err(Error::param(m, "constants.n_s", "sample counts too small"));
        }
        if !(self.step > 0.0) {
            return Err(Error::param(m, "constants.step", "must be positive"));
        }
        Ok(())
    }
}

/// Seeded unit directions; in one dimension just `+1` and `-1`.
fn directions(dim: usize, count: usize, rng: &mut ChaCha8Rng) -> Vec<State> {
    if dim == 1 {
        return vec![State::scalar(1.0), State::scalar(-1.0)];
    }
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let w = State::new(&v);
        let n = w.norm();
        if n <= 1.0 && n > 1e-3 {
            out.push(w * (1.0 / n));
        }
    }
    out
}

/// Largest `t` with `u_L + t d` in `R_a`; `Gamma` is convex along the ray and negative at `t = 0`.
fn boundary_along(sys: &dyn System, u_l: &State, u_r: &State, a: f64, d: &State) -> f64 {
    let inside = |t: f64| {
        let u = u_l.axpy(t, d);
        sys.is_admissible(&u) && gamma(sys, &u, u_l, u_r, a) <= 0.0
    };
    let mut hi = 1e-3;
    while inside(hi) {
        hi *= 2.0;
        if hi > 1e6 {
            return hi;
        }
    }
    let mut lo = 0.0;
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if inside(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct C1Fit {
    pub c1: f64,
    pub c1_raw: f64,
    /// Largest left side of the shock-curve inequality among samples where both speeds coincide.
    pub worst_tie: f64,
    /// Largest left side of the characteristic inequality; must be negative.
    pub worst_char: f64,
    pub samples: usize,
}

/// Largest `c1` (shrunk) with both the shock-curve and the characteristic inequality
/// holding over `u_L` in `bases`, `s_R` in `[rho, B]`, `u` in `R_a`, `s` in `[0, B]`.
pub fn fit_c1(sys: &dyn System, a: f64, bases: &[State], b: f64, rho: f64, opts: &WeightOptions) -> Result<C1Fit> {
    if !(a > 0.0 && a < 1.0) {
        return Err(Error::param("shift_filippov", "a", "must lie in (0, 1)"));
    }
    if !(rho > 0.0 && b > rho) {
        return Err(Error::param("shift_filippov", "rho", "need 0 < rho < B"));
    }
    let copts = ContinuationOptions::with_step(opts.step);
    let sr: Vec<f64> = (0..opts.n_sr)
        .map(|i| if opts.n_sr == 1 { b } else { rho + (b - rho) * i as f64 / (opts.n_sr - 1) as f64 })
        .collect();
    let s_nodes = uniform_nodes(b, opts.n_s - 1);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0xc1);
    let dirs = directions(sys.dim(), opts.n_dirs, &mut rng);
    let fracs = [0.0, 0.5, 1.0];

    let jobs: Vec<(usize, usize)> = (0..bases.len()).flat_map(|i| (0..sr.len()).map(move |j| (i, j))).collect();
    let parts: Vec<Result<(f64, f64, f64, usize)>> = jobs
        .par_iter()
        .map(|&(i, j)| {
            let u_l = bases[i];
            let pt = trace_locus(sys, &u_l, Family::First, &[sr[j]], copts)?[0];
            let (u_r, sig_r) = (pt.locus, pt.speed);
            let mut us = vec![u_l];
            for d in &dirs {
                let t = boundary_along(sys, &u_l, &u_r, a, d);
                for &f in &fracs[1..] {
                    us.push(u_l.axpy(f * t, d));
                }
            }
            let (mut ratio, mut tie, mut worst_char, mut n) = (f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY, 0);
            for u in &us {
                let l4 = phi(sys, u, &u_l, &u_r, a);
                worst_char = worst_char.max(l4);
                ratio = ratio.min(-l4);
                let curve = trace_locus(sys, u, Family::First, &s_nodes, copts)?;
                for p in &curve {
                    let s_u = p.locus;
                    let l3 = a * (q_rel(sys, &s_u, &u_r) - p.speed * eta_rel(sys, &s_u, &u_r)) - q_rel(sys, u, &u_l)
                        + p.speed * eta_rel(sys, u, &u_l);
                    let ds = sig_r - p.speed;
                    if ds * ds > 1e-14 {
                        ratio = ratio.min(-l3 / (ds * ds));
                    } else {
                        tie = tie.max(l3);
                    }
                    n += 1;
                }
            }
            Ok((ratio, tie, worst_char, n))
        })
        .collect();
    let (mut raw, mut tie, mut worst_char, mut samples) = (f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY, 0);
    for p in parts {
        let (r, t, w, n) = p?;
        raw = raw.min(r);
        tie = tie.max(t);
        worst_char = worst_char.max(w);
        samples += n;
    }
    let tie_tol = 1e-12 * (1.0 + b * b);
    if !(raw > 0.0) || tie > tie_tol {
        return Err(Error::WeightTooLarge {
            a,
            detail: format!("no positive c1: min ratio {raw:.3e}, worst tie {tie:.3e}, worst characteristic {worst_char:.3e}"),
        });
    }
    Ok(C1Fit { c1: opts.shrink * raw, c1_raw: raw, worst_tie: tie, worst_char, samples })
}

/// Sampled pair `(u_L, u_R)` for the region-wide constants; every fifth pair is diagonal,
/// and the box corners come first as diagonal pairs.
fn region_pairs(sys: &dyn System, region: &Region, n: usize, rng: &mut ChaCha8Rng) -> Vec<(State, State)> {
    let dim = region.lo.len();
    let mut out: Vec<(State, State)> = (0..1usize << dim)
        .map(|mask| {
            let p: Vec<f64> = (0..dim).map(|i| if mask >> i & 1 == 1 { region.hi[i] } else { region.lo[i] }).collect();
            let u = sys.from_primitive(&State::new(&p));
            (u, u)
        })
        .filter(|(u, _)| sys.is_admissible(u))
        .collect();
    out.extend((0..n).map(|k| {
        let l = region.sample(sys, rng);
        let r = if k % 5 == 0 { l } else { region.sample(sys, rng) };
        (l, r)
    }));
    out
}

/// Unit eigenvector of the lowest eigenvalue of the entropy Hessian, the flattest direction of `eta`.
fn softest_direction(sys: &dyn System, u: &State) -> State {
    let h = sys.entropy_hessian(u);
    let eig = ((&h + h.transpose()) * 0.5).symmetric_eigen();
    let k = eig.eigenvalues.imin();
    let v: Vec<f64> = eig.eigenvectors.column(k).iter().cloned().collect();
    State::new(&v)
}

/// `L*` as the largest difference quotient of `phi` over close pairs of triples in the region.
pub fn lipschitz_l_star(sys: &dyn System, region: &Region, a: f64, opts: &WeightOptions) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x15);
    let dim = sys.dim();
    let mut best = 0.0f64;
    let mut hits = 0;
    for _ in 0..opts.lipschitz_samples {
        let u = region.sample(sys, &mut rng);
        let u_l = region.sample(sys, &mut rng);
        let u_r = region.sample(sys, &mut rng);
        let d: Vec<State> = directions(dim.max(2), 3, &mut rng).into_iter().map(|v| State::new(&v.as_slice()[..dim])).collect();
        let scale = 1e-5 * (1.0 + u.norm().max(u_l.norm()).max(u_r.norm()));
        let (v, vl, vr) = (u.axpy(scale, &d[0]), u_l.axpy(scale, &d[1]), u_r.axpy(scale, &d[2]));
        if !(sys.is_admissible(&v) && sys.is_admissible(&vl) && sys.is_admissible(&vr)) {
            continue;
        }
        let dist = ((v - u).dot(&(v - u)) + (vl - u_l).dot(&(vl - u_l)) + (vr - u_r).dot(&(vr - u_r))).sqrt();
        if dist == 0.0 {
            continue;
        }
        let q = (phi(sys, &v, &vl, &vr, a) - phi(sys, &u, &u_l, &u_r, a)).abs() / dist;
        best = best.max(q);
        hits += 1;
    }
    if hits == 0 {
        return Err(Error::Sampling { module: "shift_filippov", detail: "no admissible triple for L*".into() });
    }
    Ok((best * opts.inflate).max(f64::MIN_POSITIVE))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct C4Fit {
    pub c4: f64,
    pub c4_raw: f64,
    pub gamma0: f64,
    pub samples: usize,
}

/// `c4` as the shrunk infimum of `Gamma(u) / gamma0^2` over `u` at distance exactly `gamma0`
/// from `R_a`, reached by stepping `gamma0` along the outward normal from boundary points.
pub fn fit_c4(sys: &dyn System, region: &Region, extra: &[(State, State)], a: f64, gamma0: f64, opts: &WeightOptions) -> Result<C4Fit> {
    if !(gamma0 > 0.0) {
        return Err(Error::param("shift_filippov", "gamma0", "must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0xc4);
    let mut pairs = region_pairs(sys, region, opts.c4_samples, &mut rng);
    pairs.extend_from_slice(extra);
    let dirs = directions(sys.dim(), opts.n_dirs, &mut rng);
    let vals: Vec<(f64, usize)> = pairs
        .par_iter()
        .map(|(u_l, u_r)| {
            let mut best = f64::INFINITY;
            let mut n = 0;
            let soft = softest_direction(sys, u_l);
            let own = [soft, soft * -1.0];
            for d in dirs.iter().chain(own.iter()) {
                let t = boundary_along(sys, u_l, u_r, a, d);
                let w = u_l.axpy(t, d);
                let g = sys.entropy_gradient(&w) * (1.0 - a) - sys.entropy_gradient(u_l) + sys.entropy_gradient(u_r) * a;
                let normal = if g.norm() > 1e-12 { g * (1.0 / g.norm()) } else { *d };
                let u = w.axpy(gamma0, &normal);
                if !sys.is_admissible(&u) {
                    continue;
                }
                best = best.min(gamma(sys, &u, u_l, u_r, a) / (gamma0 * gamma0));
                n += 1;
            }
            (best, n)
        })
        .collect();
    let samples: usize = vals.iter().map(|v| v.1).sum();
    let raw = vals.iter().map(|v| v.0).fold(f64::INFINITY, f64::min);
    if samples == 0 || !(raw > 0.0) {
        return Err(Error::Sampling { module: "shift_filippov", detail: format!("c4 infimum {raw:.3e} from {samples} samples") });
    }
    Ok(C4Fit { c4: opts.shrink * raw, c4_raw: raw, gamma0, samples })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DriftBound {
    pub c_star: f64,
    pub sup_q: f64,
    pub sup_lambda: f64,
    pub samples: usize,
}

/// `C* = (sup|a q(u;u_R) - q(u;u_L)| + 1) / (c4 gamma0^2) + 2 sup|lambda_1|`, suprema sampled over the region and inflated.
pub fn compute_c_star(sys: &dyn System, region: &Region, a: f64, c4: f64, gamma0: f64, opts: &WeightOptions) -> Result<DriftBound> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0xcc);
    let (mut sq, mut sl) = (0.0f64, 0.0f64);
    for _ in 0..opts.c_star_samples {
        let u = region.sample(sys, &mut rng);
        let u_l = region.sample(sys, &mut rng);
        let u_r = region.sample(sys, &mut rng);
        sq = sq.max((a * q_rel(sys, &u, &u_r) - q_rel(sys, &u, &u_l)).abs());
        sl = sl.max(sys.first_eigenvalue(&u).abs());
    }
    let (sup_q, sup_lambda) = (sq * opts.inflate, sl * opts.inflate);
    let c_star = (sup_q + 1.0) / (c4 * gamma0 * gamma0) + 2.0 * sup_lambda;
    if !c_star.is_finite() {
        return Err(Error::Sampling { module: "shift_filippov", detail: "C* is not finite".into() });
    }
    Ok(DriftBound { c_star, sup_q, sup_lambda, samples: opts.c_star_samples })
}

/// Everything the shift and the contraction checks need, with the sampling certificate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContractionWeights {
    pub a: f64,
    pub c1: f64,
    pub c4: f64,
    pub gamma0: f64,
    pub lipschitz_l_star: f64,
    pub c_star: f64,
    pub b: f64,
    pub rho: f64,
    /// Margin of the dissipation inequality.
    pub c: f64,
    pub theta: f64,
    /// Geometry constant and threshold for the weight.
    pub c_geom: f64,
    pub alpha: f64,
    pub halvings: usize,
    pub c1_fit: C1Fit,
    pub c4_fit: C4Fit,
    pub drift: DriftBound,
    /// True when `c_star` came from the configuration rather than the formula.
    pub c_star_overridden: bool,
}

impl ContractionWeights {
    /// Sup of `|V|` over the sampled region.
    pub fn v_norm(&self) -> f64 {
        self.drift.sup_lambda + self.c_star
    }
}

/// Full constant chain: geometry threshold, weight search, `c1`, `L*`, `gamma0`, `c4`, `C*`, `c`.
pub fn build_weights(sys: &dyn System, region: &Region, bases: &[State], b: f64, rho: f64, opts: &WeightOptions) -> Result<ContractionWeights> {
    opts.validate()?;
    region.validate(sys)?;
    if bases.is_empty() {
        return Err(Error::param("shift_filippov", "bases", "need at least one base state"));
    }
    let copts = ContinuationOptions::with_step(opts.step);
    // geometry threshold over the extreme strengths
    let mut alpha = f64::INFINITY;
    let mut c_geom = 0.0f64;
    let mut extra = Vec::new();
    for (i, u_l) in bases.iter().enumerate() {
        for p in trace_locus(sys, u_l, Family::First, &[rho, b], copts)? {
            let g = r_a_geometry(sys, u_l, &p.locus, opts.theta, opts.seed.wrapping_add(i as u64))?;
            alpha = alpha.min(g.alpha);
            c_geom = c_geom.max(g.c);
            extra.push((*u_l, p.locus));
        }
        extra.push((*u_l, *u_l));
    }
    let mut halvings = 0;
    let (a, c1_fit) = match opts.a {
        Some(a) => {
            if !(a < alpha) {
                return Err(Error::WeightTooLarge { a, detail: format!("geometry needs a < {alpha:.3e}") });
            }
            (a, fit_c1(sys, a, bases, b, rho, opts)?)
        }
        None => {
            let mut a = opts.a0;
            loop {
                if a < alpha {
                    match fit_c1(sys, a, bases, b, rho, opts) {
                        Ok(f) => break (a, f),
                        Err(Error::WeightTooLarge { .. }) => {}
                        Err(e) => return Err(e),
                    }
                }
                a *= 0.5;
                halvings += 1;
                if halvings > 40 {
                    return Err(Error::WeightTooLarge { a, detail: "halving search exhausted".into() });
                }
            }
        }
    };
    let l_star = lipschitz_l_star(sys, region, a, opts)?;
    let gamma0 = c1_fit.c1 / (2.0 * l_star);
    let c4_fit = fit_c4(sys, region, &extra, a, gamma0, opts)?;
    let mut drift = compute_c_star(sys, region, a, c4_fit.c4, gamma0, opts)?;
    let c_star_overridden = opts.c_star.is_some();
    if let Some(c) = opts.c_star {
        drift.c_star = c;
    }
    let v = drift.sup_lambda + drift.c_star;
    let c = c1_fit.c1.min(0.5 * c1_fit.c1.min(1.0) / ((1.0 + v) * (1.0 + v)));
    Ok(ContractionWeights {
        a,
        c1: c1_fit.c1,
        c4: c4_fit.c4,
        gamma0,
        lipschitz_l_star: l_star,
        c_star: drift.c_star,
        b,
        rho,
        c,
        theta: opts.theta,
        c_geom,
        alpha,
        halvings,
        c1_fit,
        c4_fit,
        drift,
        c_star_overridden,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::{Burgers, IsentropicEuler};

    fn opts() -> WeightOptions {
        WeightOptions { lipschitz_samples: 300, c4_samples: 60, c_star_samples: 2000, ..Default::default() }
    }

    #[test]
    fn burgers_c1_positive_and_grid_holds() {
        let bases = [State::scalar(1.0), State::scalar(0.5)];
        let f = fit_c1(&Burgers, 1e-3, &bases, 2.0, 0.5, &opts()).unwrap();
        assert!(f.c1 > 0.0 && f.worst_char < 0.0);
        assert!(f.worst_tie.abs() < 1e-12);
    }

    #[test]
    fn weight_near_one_is_rejected() {
        let bases = [State::scalar(1.0)];
        let o = WeightOptions { a: Some(0.99), ..opts() };
        let e = build_weights(&Burgers, &Region::scalar_ball(2.0), &bases, 2.0, 0.5, &o).unwrap_err();
        assert!(matches!(e, Error::WeightTooLarge { .. }));
    }

    #[test]
    fn shock_curve_tie_vanishes() {
        // s = s_R and u = u_L: every term vanishes
        let (u_l, s_r) = (State::scalar(1.0), 0.8);
        let u_r = State::scalar(1.0 - s_r);
        let sig = 1.0 - s_r / 2.0;
        let l3 = 1e-3 * (q_rel(&Burgers, &u_r, &u_r) - sig * eta_rel(&Burgers, &u_r, &u_r)) - q_rel(&Burgers, &u_l, &u_l)
            + sig * eta_rel(&Burgers, &u_l, &u_l);
        assert_eq!(l3, 0.0);
    }

    #[test]
    fn burgers_c4_matches_quadratic() {
        let region = Region::scalar_ball(1.0);
        for a in [0.0f64, 1e-2] {
            let o = WeightOptions { a: None, ..opts() };
            let f = fit_c4(&Burgers, &region, &[], a, 1e-3, &o).unwrap();
            assert!((f.c4_raw - (1.0 - a) / 2.0).abs() < 1e-6, "{a}: {}", f.c4_raw);
        }
    }

    #[test]
    fn degenerate_ball_gives_bare_drift() {
        let region = Region::scalar_ball(0.0);
        let d = compute_c_star(&Burgers, &region, 0.1, 0.5, 0.1, &opts()).unwrap();
        assert!((d.c_star - 1.0 / (0.5 * 0.01)).abs() < 1e-12);
        let region = Region::scalar_ball(1.0);
        let d = compute_c_star(&Burgers, &region, 0.0, 0.5, 1.0, &opts()).unwrap();
        assert!(d.c_star >= 2.0);
    }

    #[test]
    fn burgers_chain() {
        let region = Region::scalar_ball(2.0);
        let w = build_weights(&Burgers, &region, &[State::scalar(1.0)], 2.0, 0.5, &opts()).unwrap();
        assert!(w.a < w.alpha && w.a <= 1e-2);
        assert!((w.gamma0 - w.c1 / (2.0 * w.lipschitz_l_star)).abs() <= 1e-15 * w.gamma0);
        let lhs = (w.drift.sup_q + 1.0) / (w.c4 * w.gamma0 * w.gamma0) + 2.0 * w.drift.sup_lambda;
        assert!(w.c_star >= lhs * (1.0 - 1e-12));
        assert!(w.c > 0.0 && w.c <= w.c1);
    }

    #[test]
    fn isentropic_c4_refines() {
        let sys = IsentropicEuler::new(1.4, 1.0).unwrap();
        let region = sys.default_region();
        let o = opts();
        let coarse = fit_c4(&sys, &region, &[], 1e-2, 1e-3, &o).unwrap();
        let fine = fit_c4(&sys, &region, &[], 1e-2, 1e-3, &WeightOptions { c4_samples: 600, n_dirs: 40, ..o }).unwrap();
        assert!(coarse.c4 > 0.0 && fine.c4 > 0.0);
        assert!(coarse.c4 <= fine.c4_raw);
    }
}
