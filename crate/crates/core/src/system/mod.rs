//! Balance-law systems: flux, entropy pair, derivatives, characteristic speeds.

pub mod fd;

mod burgers;
mod cubic;
mod full_euler;
mod isentropic;
mod reflected;

pub use burgers::Burgers;
pub use cubic::CubicFlux;
pub use full_euler::FullEuler;
pub use isentropic::IsentropicEuler;
pub use reflected::Reflected;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::state::{mat_vec, vec_mat, Mat, State};

/// Density floor for the Euler instances.
pub const DENSITY_FLOOR: f64 = 1e-10;

/// A hyperbolic system with a strictly convex entropy pair.
///
/// The evaluators assume an admissible argument; use [`System::check`] or the
/// checked free functions at API boundaries. Derivatives default to central
/// finite differences, so a user system only has to supply `f`, `eta`, `q`.
pub trait System: Send + Sync {
    fn name(&self) -> &str;
    fn dim(&self) -> usize;

    /// `Err(constraint)` when `u` lies outside the admissible set.
    fn admissible(&self, u: &State) -> std::result::Result<(), String>;

    fn flux(&self, u: &State) -> State;
    fn entropy(&self, u: &State) -> f64;
    fn entropy_flux(&self, u: &State) -> f64;

    fn flux_jacobian(&self, u: &State) -> Mat {
        fd::jacobian(|w| self.flux(w), u)
    }

    fn entropy_gradient(&self, u: &State) -> State {
        fd::gradient(|w| self.entropy(w), u)
    }

    fn entropy_hessian(&self, u: &State) -> Mat {
        fd::jacobian(|w| self.entropy_gradient(w), u)
    }

    /// Closed-form `grad q`, when the instance registers one.
    fn entropy_flux_gradient(&self, _u: &State) -> Option<State> {
        None
    }

    /// Eigenvalues of the flux Jacobian, ascending.
    fn eigenvalues(&self, u: &State) -> Result<Vec<f64>> {
        numeric_eigenvalues(&self.flux_jacobian(u), u)
    }

    /// Right eigenvector for eigenvalue index `k`, unit length.
    fn eigenvector(&self, u: &State, k: usize) -> Result<State> {
        let lam = self.eigenvalues(u)?[k];
        Ok(null_vector(&(self.flux_jacobian(u) - Mat::identity(u.dim(), u.dim()) * lam)))
    }

    /// Map to the variables used for region boxes (identity unless overridden).
    fn to_primitive(&self, u: &State) -> State {
        *u
    }

    fn from_primitive(&self, p: &State) -> State {
        *p
    }

    /// Box of primitive variables used when no region is configured.
    fn default_region(&self) -> Region;

    fn check(&self, u: &State) -> Result<()> {
        if u.dim() != self.dim() {
            return Err(Error::Domain {
                state: u.to_string(),
                constraint: format!("dimension {} != {}", u.dim(), self.dim()),
            });
        }
        if !u.is_finite() {
            return Err(Error::Domain { state: u.to_string(), constraint: "non-finite component".into() });
        }
        self.admissible(u).map_err(|constraint| Error::Domain { state: u.to_string(), constraint })
    }

    fn is_admissible(&self, u: &State) -> bool {
        u.dim() == self.dim() && u.is_finite() && self.admissible(u).is_ok()
    }

    /// Builds a validated state.
    fn state(&self, components: &[f64]) -> Result<State> {
        if components.is_empty() || components.len() > crate::state::MAX_DIM {
            return Err(Error::Domain {
                state: format!("{components:?}"),
                constraint: format!("dimension must be {}", self.dim()),
            });
        }
        let u = State::new(components);
        self.check(&u)?;
        Ok(u)
    }

    fn first_eigenvalue(&self, u: &State) -> f64 {
        self.eigenvalues(u).map(|l| l[0]).unwrap_or(f64::NAN)
    }

    fn max_speed(&self, u: &State) -> f64 {
        self.eigenvalues(u).map(|l| l.iter().fold(0.0f64, |m, x| m.max(x.abs()))).unwrap_or(f64::NAN)
    }
}

/// Eigenvalues of a general matrix; errors when any is complex beyond tolerance.
pub fn numeric_eigenvalues(j: &Mat, u: &State) -> Result<Vec<f64>> {
    let scale = j.amax().max(1.0);
    let ev = j.clone().complex_eigenvalues();
    let mut out = Vec::with_capacity(ev.len());
    for z in ev.iter() {
        if z.im.abs() > 1e-9 * scale {
            return Err(Error::Hyperbolicity {
                state: u.to_string(),
                detail: format!("complex eigenvalue {} + {}i", z.re, z.im),
            });
        }
        out.push(z.re);
    }
    out.sort_by(f64::total_cmp);
    Ok(out)
}

/// Unit vector spanning the (numerical) kernel of a square matrix.
pub fn null_vector(m: &Mat) -> State {
    let n = m.nrows();
    let svd = m.clone().svd(false, true);
    let vt = svd.v_t.expect("requested v_t");
    let k = (0..n)
        .min_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]))
        .unwrap_or(0);
    let mut v = State::zeros(n);
    for i in 0..n {
        v[i] = vt[(k, i)];
    }
    v * (1.0 / v.norm())
}

/// Axis-aligned box in primitive variables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Region {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl Region {
    pub fn new(lo: &[f64], hi: &[f64]) -> Self {
        Region { lo: lo.to_vec(), hi: hi.to_vec() }
    }

    /// Scalar interval `[-b, b]`.
    pub fn scalar_ball(b: f64) -> Self {
        Region::new(&[-b], &[b])
    }

    pub fn validate(&self, sys: &dyn System) -> Result<()> {
        if self.lo.len() != sys.dim() || self.hi.len() != sys.dim() {
            return Err(Error::param("system_model", "region", "bounds must match the system dimension"));
        }
        if self.lo.iter().zip(&self.hi).any(|(l, h)| !(l <= h)) {
            return Err(Error::param("system_model", "region", "each lower bound must not exceed its upper bound"));
        }
        Ok(())
    }

    pub fn sample<R: Rng + ?Sized>(&self, sys: &dyn System, rng: &mut R) -> State {
        let p: Vec<f64> = self
            .lo
            .iter()
            .zip(&self.hi)
            .map(|(&l, &h)| if h > l { rng.gen_range(l..=h) } else { l })
            .collect();
        sys.from_primitive(&State::new(&p))
    }

    pub fn contains(&self, sys: &dyn System, u: &State) -> bool {
        let p = sys.to_primitive(u);
        (0..p.dim()).all(|i| p[i] >= self.lo[i] - 1e-12 && p[i] <= self.hi[i] + 1e-12)
    }

    /// Primitive-space diameter, used as a length scale.
    pub fn diameter(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(l, h)| (h - l) * (h - l)).sum::<f64>().sqrt()
    }
}

/// Checked flux evaluation.
pub fn flux(sys: &dyn System, u: &State) -> Result<State> {
    sys.check(u)?;
    Ok(sys.flux(u))
}

/// Checked, sorted eigenvalues.
pub fn eigenvalues(sys: &dyn System, u: &State) -> Result<Vec<f64>> {
    sys.check(u)?;
    sys.eigenvalues(u)
}

/// Result of the compatibility self-check `grad q = grad eta * grad f`.
#[derive(Debug, Clone, PartialEq)]
pub struct CompatibilityReport {
    pub max_residual: f64,
    pub worst_state: Option<State>,
    pub tol: f64,
    pub samples: usize,
    pub pass: bool,
}

/// `grad q - grad eta * grad f` at `u`, with `grad q` from finite differences of `q`
/// and, when registered, from the closed form; the larger residual is returned.
pub fn compatibility_residual(sys: &dyn System, u: &State) -> f64 {
    let rhs = vec_mat(&sys.entropy_gradient(u), &sys.flux_jacobian(u));
    let fd = fd::gradient(|w| sys.entropy_flux(w), u);
    let mut r = (fd - rhs).norm_inf();
    if let Some(g) = sys.entropy_flux_gradient(u) {
        r = r.max((g - rhs).norm_inf());
    }
    r
}

pub fn check_compatibility(sys: &dyn System, samples: &[State], tol: f64) -> Result<CompatibilityReport> {
    let mut max_residual = 0.0;
    let mut worst_state = None;
    for u in samples {
        sys.check(u)?;
        let r = compatibility_residual(sys, u);
        if !(r <= max_residual) {
            max_residual = r;
            worst_state = Some(*u);
        }
    }
    Ok(CompatibilityReport {
        max_residual,
        worst_state,
        tol,
        samples: samples.len(),
        pass: max_residual < tol,
    })
}

/// Smallest eigenvalue of the (symmetrized) entropy Hessian.
pub fn hessian_min_eigenvalue(sys: &dyn System, u: &State) -> f64 {
    let h = sys.entropy_hessian(u);
    let sym = (&h + h.transpose()) * 0.5;
    sym.symmetric_eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min)
}

/// `A v` for the flux Jacobian, handy in directional checks.
pub fn jacobian_times(sys: &dyn System, u: &State, v: &State) -> State {
    mat_vec(&sys.flux_jacobian(u), v)
}

/// System selection block of the experiment config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub name: String,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(default = "default_kappa")]
    pub kappa: f64,
}

fn default_gamma() -> f64 {
    1.4
}

fn default_kappa() -> f64 {
    1.0
}

impl Default for SystemConfig {
    fn default() -> Self {
        SystemConfig { name: "burgers".into(), gamma: default_gamma(), kappa: default_kappa() }
    }
}

impl SystemConfig {
    pub fn build(&self) -> Result<Box<dyn System>> {
        match self.name.as_str() {
            "burgers" => Ok(Box::new(Burgers)),
            "isentropic_euler" => Ok(Box::new(IsentropicEuler::new(self.gamma, self.kappa)?)),
            "full_euler" => Ok(Box::new(FullEuler::new(self.gamma)?)),
            other => Err(Error::param(
                "system_model",
                "system.name",
                format!("unknown system `{other}` (expected burgers, isentropic_euler or full_euler)"),
            )),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn all() -> Vec<Box<dyn System>> {
        vec![
            Box::new(Burgers),
            Box::new(IsentropicEuler::new(1.4, 1.0).unwrap()),
            Box::new(FullEuler::new(1.4).unwrap()),
        ]
    }

    #[test]
    fn hessian_spd_on_random_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for sys in all() {
            let region = sys.default_region();
            for _ in 0..1000 {
                let u = region.sample(sys.as_ref(), &mut rng);
                assert!(hessian_min_eigenvalue(sys.as_ref(), &u) > 0.0, "{} at {u}", sys.name());
            }
        }
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for sys in all() {
            let region = sys.default_region();
            for _ in 0..200 {
                let u = region.sample(sys.as_ref(), &mut rng);
                let exact = sys.flux_jacobian(&u);
                let approx = fd::jacobian(|w| sys.flux(w), &u);
                let scale = exact.amax().max(1.0);
                assert!((exact - approx).amax() <= 1e-6 * scale, "{}", sys.name());
            }
        }
    }

    #[test]
    fn hessian_and_gradient_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for sys in all() {
            let region = sys.default_region();
            for _ in 0..200 {
                let u = region.sample(sys.as_ref(), &mut rng);
                let g = sys.entropy_gradient(&u);
                let g_fd = fd::gradient(|w| sys.entropy(w), &u);
                assert!((g - g_fd).norm_inf() <= 1e-6 * g.norm_inf().max(1.0));
                let h = sys.entropy_hessian(&u);
                let h_fd = fd::jacobian(|w| sys.entropy_gradient(w), &u);
                assert!((h.clone() - h_fd).amax() <= 1e-6 * h.amax().max(1.0));
                assert!((h.clone() - h.transpose()).amax() <= 1e-12 * h.amax().max(1.0));
            }
        }
    }

    #[test]
    fn closed_form_eigenvalues_match_numeric() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for sys in all() {
            let region = sys.default_region();
            for _ in 0..200 {
                let u = region.sample(sys.as_ref(), &mut rng);
                let closed = sys.eigenvalues(&u).unwrap();
                let numeric = numeric_eigenvalues(&sys.flux_jacobian(&u), &u).unwrap();
                for (a, b) in closed.iter().zip(&numeric) {
                    assert!((a - b).abs() < 1e-8, "{}: {closed:?} vs {numeric:?}", sys.name());
                }
                assert!(closed.windows(2).all(|w| w[0] <= w[1]));
                if sys.dim() > 1 {
                    assert!(closed.windows(2).all(|w| w[0] < w[1]));
                }
            }
        }
    }

    #[test]
    fn eigenvectors_are_eigenvectors() {
        let sys = FullEuler::new(1.4).unwrap();
        let u = sys.from_primitive(&State::new(&[1.2, 0.3, 0.8]));
        let lam = sys.eigenvalues(&u).unwrap();
        for k in 0..3 {
            let r = sys.eigenvector(&u, k).unwrap();
            let resid = jacobian_times(&sys, &u, &r) - r * lam[k];
            assert!(resid.norm() < 1e-9);
        }
    }

    #[test]
    fn compatibility_detects_mismatch() {
        struct Broken;
        impl System for Broken {
            fn name(&self) -> &str {
                "broken"
            }
            fn dim(&self) -> usize {
                1
            }
            fn admissible(&self, _u: &State) -> std::result::Result<(), String> {
                Ok(())
            }
            fn flux(&self, u: &State) -> State {
                State::scalar(0.5 * u[0] * u[0])
            }
            fn entropy(&self, u: &State) -> f64 {
                0.5 * u[0] * u[0]
            }
            fn entropy_flux(&self, u: &State) -> f64 {
                u[0].powi(3) / 3.0 + u[0]
            }
            fn default_region(&self) -> Region {
                Region::scalar_ball(1.0)
            }
        }
        let samples: Vec<State> = (0..10).map(|i| State::scalar(i as f64 * 0.1)).collect();
        let rep = check_compatibility(&Broken, &samples, 1e-6).unwrap();
        assert!(!rep.pass);
        assert!(rep.max_residual >= 1.0 - 1e-6);
        let ok = check_compatibility(&Burgers, &samples, 1e-6).unwrap();
        assert!(ok.pass && ok.max_residual < 1e-9);
    }

    #[test]
    fn config_builds_instances() {
        let cfg = SystemConfig { name: "full_euler".into(), gamma: 1.4, kappa: 1.0 };
        assert_eq!(cfg.build().unwrap().dim(), 3);
        let bad = SystemConfig { name: "mhd".into(), ..Default::default() };
        assert!(bad.build().err().unwrap().is_usage());
    }
}
