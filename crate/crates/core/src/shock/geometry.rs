//! Geometry of the sublevel set `R_a = {u : eta(u|u_L) <= a eta(u|u_R)}`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::relative::eta_rel;
use crate::state::State;
use crate::system::System;

/// `eta(u|u_L) - a eta(u|u_R)`; nonpositive exactly on `R_a`.
pub fn gamma_a(sys: &dyn System, u: &State, u_l: &State, u_r: &State, a: f64) -> f64 {
    eta_rel(sys, u, u_l) - a * eta_rel(sys, u, u_r)
}

pub fn in_r_a(sys: &dyn System, u: &State, u_l: &State, u_r: &State, a: f64) -> bool {
    sys.is_admissible(u) && gamma_a(sys, u, u_l, u_r, a) <= 0.0
}

#[derive(Debug, Clone, PartialEq)]
pub struct RaGeometry {
    /// `|u - u_L|^2 <= C a` on `R_a`.
    pub c: f64,
    /// Threshold below which `R_a` sits inside `B_theta(u_L)`.
    pub alpha: f64,
    pub theta: f64,
    /// Sampled lower quadratic constant of `eta(.|u_L)` on `B_theta(u_L)`.
    pub c_star: f64,
    pub sup_lambda: f64,
}

/// Unit vector uniformly distributed in direction, radius uniform in the ball.
fn ball_sample<R: Rng>(rng: &mut R, dim: usize) -> State {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let w = State::new(&v);
        if w.norm() <= 1.0 && w.norm() > 1e-3 {
            return w;
        }
    }
}

/// Computes `C` and `alpha = theta^2 / (2C)` for the pair `(u_L, u_R)`.
pub fn r_a_geometry(sys: &dyn System, u_l: &State, u_r: &State, theta: f64, seed: u64) -> Result<RaGeometry> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::param("shock_curves", "theta", "must lie in (0, 1)"));
    }
    sys.check(u_l)?;
    sys.check(u_r)?;
    let dim = u_l.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c_star = f64::INFINITY;
    let mut hits = 0;
    for _ in 0..4000 {
        let u = *u_l + ball_sample(&mut rng, dim) * theta;
        if !sys.is_admissible(&u) {
            continue;
        }
        let d = u - *u_l;
        c_star = c_star.min(eta_rel(sys, &u, u_l) / d.dot(&d));
        hits += 1;
    }
    if hits == 0 || !(c_star > 0.0) {
        return Err(Error::Sampling { module: "shock_curves".into(), detail: "no admissible sample near u_L".into() });
    }
    // Lambda(u) = eta(u|u_R) - eta(u|u_L) is affine
    let grad = sys.entropy_gradient(u_l) - sys.entropy_gradient(u_r);
    let sup_lambda = eta_rel(sys, u_l, u_r) + theta * grad.norm();
    let c = 2.0 * sup_lambda / c_star;
    Ok(RaGeometry { c, alpha: theta * theta / (2.0 * c), theta, c_star, sup_lambda })
}

/// Result of scanning a box around `u_L` for points of `R_a`.
#[derive(Debug, Clone, PartialEq)]
pub struct ContainmentScan {
    pub checked: usize,
    pub inside: usize,
    /// Points of `R_a` outside `B_theta(u_L)`.
    pub escapes: usize,
    pub max_distance: f64,
}

/// Dense grid over `u_L +/- half_width` with about `points` nodes.
pub fn scan_containment(
    sys: &dyn System,
    u_l: &State,
    u_r: &State,
    a: f64,
    theta: f64,
    half_width: f64,
    points: usize,
) -> ContainmentScan {
    let dim = u_l.dim();
    let per_axis = ((points as f64).powf(1.0 / dim as f64).round() as usize).max(2);
    let total = per_axis.pow(dim as u32);
    let results: Vec<(bool, f64)> = (0..total)
        .into_par_iter()
        .filter_map(|idx| {
            let mut rem = idx;
            let mut u = *u_l;
            for k in 0..dim {
                let i = rem % per_axis;
                rem /= per_axis;
                u[k] += -half_width + 2.0 * half_width * i as f64 / (per_axis - 1) as f64;
            }
            if !sys.is_admissible(&u) {
                return None;
            }
            Some((gamma_a(sys, &u, u_l, u_r, a) <= 0.0, (u - *u_l).norm()))
        })
        .collect();
    let mut scan = ContainmentScan { checked: results.len(), inside: 0, escapes: 0, max_distance: 0.0 };
    for (inside, dist) in results {
        if inside {
            scan.inside += 1;
            scan.max_distance = scan.max_distance.max(dist);
            if dist >= theta {
                scan.escapes += 1;
            }
        }
    }
    scan
}
