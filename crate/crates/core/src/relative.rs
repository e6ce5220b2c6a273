//! Relative entropy, relative entropy flux, relative flux and quadratic bounds.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::state::{mat_vec, vec_mat, State};
use crate::system::{Region, System};

/// Safety margin applied to sampled quadratic bounds.
pub const QUADRATIC_MARGIN: f64 = 0.01;

/// `eta(u|v)`, unchecked.
pub fn eta_rel(sys: &dyn System, u: &State, v: &State) -> f64 {
    sys.entropy(u) - sys.entropy(v) - sys.entropy_gradient(v).dot(&(*u - *v))
}

/// `q(u;v)`, unchecked.
pub fn q_rel(sys: &dyn System, u: &State, v: &State) -> f64 {
    sys.entropy_flux(u) - sys.entropy_flux(v) - sys.entropy_gradient(v).dot(&(sys.flux(u) - sys.flux(v)))
}

pub fn rel_entropy(sys: &dyn System, u: &State, v: &State) -> Result<f64> {
    sys.check(u)?;
    sys.check(v)?;
    Ok(eta_rel(sys, u, v))
}

pub fn rel_entropy_flux(sys: &dyn System, u: &State, v: &State) -> Result<f64> {
    sys.check(u)?;
    sys.check(v)?;
    Ok(q_rel(sys, u, v))
}

/// `f(u|v) = f(u) - f(v) - grad f(v) (u - v)`
pub fn rel_flux(sys: &dyn System, u: &State, v: &State) -> Result<State> {
    sys.check(u)?;
    sys.check(v)?;
    Ok(f_rel(sys, u, v))
}

pub fn f_rel(sys: &dyn System, u: &State, v: &State) -> State {
    sys.flux(u) - sys.flux(v) - mat_vec(&sys.flux_jacobian(v), &(*u - *v))
}

/// `grad eta(u|v) = grad eta(u) - grad eta(v) - (u - v)^T hess eta(v)`
pub fn rel_entropy_gradient(sys: &dyn System, u: &State, v: &State) -> Result<State> {
    sys.check(u)?;
    sys.check(v)?;
    Ok(grad_eta_rel(sys, u, v))
}

pub fn grad_eta_rel(sys: &dyn System, u: &State, v: &State) -> State {
    sys.entropy_gradient(u) - sys.entropy_gradient(v) - vec_mat(&(*u - *v), &sys.entropy_hessian(v))
}

/// Absolute residual of the three-state identity relating `q(.;.) - sigma eta(.|.)`.
pub fn triangle_identity_residual(sys: &dyn System, u: &State, v: &State, w: &State, sigma: f64) -> Result<f64> {
    for s in [u, v, w] {
        sys.check(s)?;
    }
    let d = |a: &State, b: &State| q_rel(sys, a, b) - sigma * eta_rel(sys, a, b);
    let lhs = d(u, v);
    let cross = (sys.entropy_gradient(w) - sys.entropy_gradient(v))
        .dot(&(sys.flux(w) - sys.flux(u) - (*w - *u) * sigma));
    let rhs = d(u, w) + d(w, v) - cross;
    Ok((lhs - rhs).abs())
}

/// Constants with `c_star |u-v|^2 <= eta(u|v) <= c_double_star |u-v|^2` on a region.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticBounds {
    pub c_star: f64,
    pub c_double_star: f64,
    /// Sampled extremes before the margin.
    pub raw_min: f64,
    pub raw_max: f64,
    pub region: Region,
    pub samples: usize,
    pub margin: f64,
}

impl QuadraticBounds {
    pub fn holds(&self, sys: &dyn System, u: &State, v: &State) -> bool {
        let d2 = (*u - *v).dot(&(*u - *v));
        let e = eta_rel(sys, u, v);
        self.c_star * d2 <= e * (1.0 + 1e-12) && e <= self.c_double_star * d2 * (1.0 + 1e-12)
    }
}

/// Samples `eta(u|v)/|u-v|^2` over pairs drawn from `region`.
pub fn estimate_quadratic_bounds(sys: &dyn System, region: &Region, n_samples: usize, seed: u64) -> Result<QuadraticBounds> {
    if n_samples == 0 {
        return Err(Error::Sampling { module: "relative_entropy", detail: "n_samples must be positive".into() });
    }
    region.validate(sys)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    let mut used = 0;
    for i in 0..n_samples {
        let u = region.sample(sys, &mut rng);
        // every fourth pair is a close pair, to probe the Hessian limit
        let v = if i % 4 == 3 {
            let mut w = u;
            for k in 0..u.dim() {
                let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
                w[k] += sign * 1e-3 * (0.5 + 0.5 * rng.gen::<f64>()) * (1.0 + u[k].abs());
            }
            w
        } else {
            region.sample(sys, &mut rng)
        };
        if !sys.is_admissible(&v) || !sys.is_admissible(&u) {
            continue;
        }
        let d2 = (u - v).dot(&(u - v));
        if d2 < 1e-12 {
            continue;
        }
        let ratio = eta_rel(sys, &u, &v) / d2;
        lo = lo.min(ratio);
        hi = hi.max(ratio);
        used += 1;
    }
    if used == 0 || !(lo > 0.0) {
        return Err(Error::Sampling {
            module: "relative_entropy",
            detail: format!("no informative pairs among {n_samples} samples"),
        });
    }
    Ok(QuadraticBounds {
        c_star: lo * (1.0 - QUADRATIC_MARGIN),
        c_double_star: hi * (1.0 + QUADRATIC_MARGIN),
        raw_min: lo,
        raw_max: hi,
        region: region.clone(),
        samples: used,
        margin: QUADRATIC_MARGIN,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::{fd, hessian_min_eigenvalue, Burgers, FullEuler, IsentropicEuler};

    fn iso() -> IsentropicEuler {
        IsentropicEuler::new(1.4, 1.0).unwrap()
    }

    #[test]
    fn burgers_values() {
        let (a, b) = (State::scalar(1.0), State::scalar(0.0));
        assert_eq!(rel_entropy(&Burgers, &a, &b).unwrap(), 0.5);
        assert_eq!(rel_flux(&Burgers, &a, &b).unwrap()[0], 0.5);
        let q = rel_entropy_flux(&Burgers, &State::scalar(0.0), &State::scalar(0.5)).unwrap();
        assert!((q - 1.0 / 48.0).abs() < 1e-15);
        assert_eq!(rel_entropy_gradient(&Burgers, &a, &State::scalar(-0.3)).unwrap()[0], 0.0);
    }

    #[test]
    fn self_pairs_vanish() {
        let sys = FullEuler::new(1.4).unwrap();
        let u = sys.from_primitive(&State::new(&[1.1, 0.2, 0.7]));
        assert_eq!(rel_entropy(&sys, &u, &u).unwrap(), 0.0);
        assert_eq!(rel_entropy_flux(&sys, &u, &u).unwrap(), 0.0);
        assert_eq!(rel_flux(&sys, &u, &u).unwrap().norm(), 0.0);
        assert_eq!(rel_entropy_gradient(&sys, &u, &u).unwrap().norm(), 0.0);
    }

    #[test]
    fn isentropic_direct_formula() {
        // eta = m^2/(2 rho) + rho^1.4/0.4 evaluated by hand at (1.2, 0.1) and (1, 0)
        let eta_u = 0.01 / 2.4 + 1.2f64.powf(1.4) / 0.4;
        let eta_v = 1.0 / 0.4;
        let grad_v = [1.4 / 0.4, 0.0];
        let expect = eta_u - eta_v - grad_v[0] * 0.2 - grad_v[1] * 0.1;
        let got = rel_entropy(&iso(), &State::new(&[1.2, 0.1]), &State::new(&[1.0, 0.0])).unwrap();
        assert!((got - expect).abs() < 1e-12);
    }

    #[test]
    fn full_euler_direct_formulas() {
        let g = 1.4;
        let sys = FullEuler::new(g).unwrap();
        let u = State::new(&[1.3, 0.4, 2.9]);
        let v = State::new(&[0.9, -0.2, 2.1]);
        let p = |w: &State| (g - 1.0) * (w[2] - 0.5 * w[1] * w[1] / w[0]);
        let eta = |w: &State| -w[0] * (p(w).ln() - g * w[0].ln()) / (g - 1.0);
        let q = |w: &State| w[1] / w[0] * eta(w);
        let f = |w: &State| {
            let vel = w[1] / w[0];
            State::new(&[w[1], w[1] * vel + p(w), (w[2] + p(w)) * vel])
        };
        let gv = fd::gradient(eta, &v);
        let q_expect = q(&u) - q(&v) - gv.dot(&(f(&u) - f(&v)));
        assert!((rel_entropy_flux(&sys, &u, &v).unwrap() - q_expect).abs() < 1e-8);
        // independent Hessian via nested differences of the hand-written gradient
        let hv = fd::jacobian(|w| fd::gradient(eta, w), &v);
        let expect = fd::gradient(eta, &u) - gv - vec_mat(&(u - v), &hv);
        let got = rel_entropy_gradient(&sys, &u, &v).unwrap();
        assert!((got - expect).norm_inf() < 1e-4);
    }

    #[test]
    fn isentropic_rel_flux_direct() {
        let sys = iso();
        let u = State::new(&[1.2, 0.1]);
        let v = State::new(&[1.0, 0.0]);
        let f = |w: &State| State::new(&[w[1], w[1] * w[1] / w[0] + w[0].powf(1.4)]);
        // grad f at (1, 0) = [[0, 1], [1.4, 0]]
        let expect = f(&u) - f(&v) - State::new(&[0.1, 1.4 * 0.2]);
        assert!((rel_flux(&sys, &u, &v).unwrap() - expect).norm_inf() < 1e-12);
    }

    #[test]
    fn triangle_identity_collapses() {
        let sys = FullEuler::new(1.4).unwrap();
        let u = sys.from_primitive(&State::new(&[1.0, 0.1, 1.0]));
        let v = sys.from_primitive(&State::new(&[1.5, -0.3, 0.6]));
        let w = sys.from_primitive(&State::new(&[0.7, 0.5, 1.8]));
        assert!(triangle_identity_residual(&sys, &u, &v, &v, 0.4).unwrap() < 1e-13);
        assert!(triangle_identity_residual(&sys, &u, &v, &u, 0.4).unwrap() < 1e-13);
        assert!(triangle_identity_residual(&sys, &u, &v, &w, 0.3).unwrap() < 1e-12);
    }

    #[test]
    fn burgers_bounds_are_one_half() {
        let b = estimate_quadratic_bounds(&Burgers, &Region::scalar_ball(2.0), 1000, 0).unwrap();
        assert!((b.raw_min - 0.5).abs() < 1e-6 && (b.raw_max - 0.5).abs() < 1e-6);
        assert!(estimate_quadratic_bounds(&Burgers, &Region::scalar_ball(2.0), 0, 0).is_err());
    }

    #[test]
    fn isentropic_bounds_bracket_hessian_range() {
        let sys = iso();
        let region = sys.default_region();
        let b = estimate_quadratic_bounds(&sys, &region, 20_000, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut hmin = f64::INFINITY;
        for _ in 0..2000 {
            let u = region.sample(&sys, &mut rng);
            hmin = hmin.min(hessian_min_eigenvalue(&sys, &u));
        }
        assert!(b.c_star > 0.0 && b.c_star <= b.c_double_star);
        // eta(u|v)/|u-v|^2 is an average of Hessian quadratic forms over a segment
        assert!(b.raw_min >= 0.5 * hmin * 0.99);
    }

    #[test]
    fn second_order_vanishing() {
        let sys = iso();
        let v = State::new(&[1.1, 0.3]);
        let d = State::new(&[0.6, -0.8]);
        let ratio = |eps: f64| {
            let u = v.axpy(eps, &d);
            (f_rel(&sys, &u, &v).norm() / (eps * eps), grad_eta_rel(&sys, &u, &v).norm() / (eps * eps))
        };
        let (a1, b1) = ratio(1e-2);
        let (a2, b2) = ratio(1e-3);
        assert!((a1 / a2 - 1.0).abs() < 0.2);
        assert!((b1 / b2 - 1.0).abs() < 0.2);
    }
}
