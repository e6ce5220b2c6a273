//! Isentropic Euler, `u = (rho, m)`, pressure `kappa * rho^gamma`, mechanical-energy entropy.

use super::{Region, System, DENSITY_FLOOR};
use crate::error::{Error, Result};
use crate::state::{Mat, State};

#[derive(Debug, Clone, Copy)]
pub struct IsentropicEuler {
    pub gamma: f64,
    pub kappa: f64,
}

impl IsentropicEuler {
    pub fn new(gamma: f64, kappa: f64) -> Result<Self> {
        if !(gamma > 1.0) || !gamma.is_finite() {
            return Err(Error::param("system_model", "gamma", format!("need gamma > 1, got {gamma}")));
        }
        if !(kappa > 0.0) || !kappa.is_finite() {
            return Err(Error::param("system_model", "kappa", format!("need kappa > 0, got {kappa}")));
        }
        Ok(IsentropicEuler { gamma, kappa })
    }

    fn pressure(&self, rho: f64) -> f64 {
        self.kappa * rho.powf(self.gamma)
    }

    /// Sound speed squared.
    fn c2(&self, rho: f64) -> f64 {
        self.gamma * self.kappa * rho.powf(self.gamma - 1.0)
    }
}

impl System for IsentropicEuler {
    fn name(&self) -> &str {
        "isentropic_euler"
    }

    fn dim(&self) -> usize {
        2
    }

    fn admissible(&self, u: &State) -> std::result::Result<(), String> {
        if u[0] >= DENSITY_FLOOR {
            Ok(())
        } else {
            Err(format!("density {} below floor {DENSITY_FLOOR}", u[0]))
        }
    }

    fn flux(&self, u: &State) -> State {
        let (rho, m) = (u[0], u[1]);
        State::new(&[m, m * m / rho + self.pressure(rho)])
    }

    fn entropy(&self, u: &State) -> f64 {
        let (rho, m) = (u[0], u[1]);
        0.5 * m * m / rho + self.pressure(rho) / (self.gamma - 1.0)
    }

    fn entropy_flux(&self, u: &State) -> f64 {
        let (rho, m) = (u[0], u[1]);
        let v = m / rho;
        v * (0.5 * rho * v * v + self.gamma * self.pressure(rho) / (self.gamma - 1.0))
    }

    fn flux_jacobian(&self, u: &State) -> Mat {
        let v = u[1] / u[0];
        Mat::from_row_slice(2, 2, &[0.0, 1.0, self.c2(u[0]) - v * v, 2.0 * v])
    }

    fn entropy_gradient(&self, u: &State) -> State {
        let v = u[1] / u[0];
        State::new(&[-0.5 * v * v + self.c2(u[0]) / (self.gamma - 1.0), v])
    }

    fn entropy_hessian(&self, u: &State) -> Mat {
        let rho = u[0];
        let v = u[1] / rho;
        let a = (v * v + self.c2(rho)) / rho;
        Mat::from_row_slice(2, 2, &[a, -v / rho, -v / rho, 1.0 / rho])
    }

    fn entropy_flux_gradient(&self, u: &State) -> Option<State> {
        let v = u[1] / u[0];
        let c2 = self.c2(u[0]);
        Some(State::new(&[v * c2 - v * v * v, 1.5 * v * v + c2 / (self.gamma - 1.0)]))
    }

    fn eigenvalues(&self, u: &State) -> Result<Vec<f64>> {
        let v = u[1] / u[0];
        let c = self.c2(u[0]).sqrt();
        Ok(vec![v - c, v + c])
    }

    fn first_eigenvalue(&self, u: &State) -> f64 {
        u[1] / u[0] - self.c2(u[0]).sqrt()
    }

    fn max_speed(&self, u: &State) -> f64 {
        (u[1] / u[0]).abs() + self.c2(u[0]).sqrt()
    }

    fn eigenvector(&self, u: &State, k: usize) -> Result<State> {
        let lam = self.eigenvalues(u)?[k];
        let r = State::new(&[1.0, lam]);
        Ok(r * (1.0 / r.norm()))
    }

    /// `(rho, v)`
    fn to_primitive(&self, u: &State) -> State {
        State::new(&[u[0], u[1] / u[0]])
    }

    fn from_primitive(&self, p: &State) -> State {
        State::new(&[p[0], p[0] * p[1]])
    }

    fn default_region(&self) -> Region {
        Region::new(&[0.5, -1.0], &[2.0, 1.0])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::{eigenvalues, flux};

    #[test]
    fn flux_at_rest() {
        let sys = IsentropicEuler::new(1.4, 1.0).unwrap();
        let f = flux(&sys, &State::new(&[1.0, 0.0])).unwrap();
        assert_eq!(f.as_slice(), &[0.0, 1.0]);
    }

    #[test]
    fn sound_speed_gamma_two() {
        let sys = IsentropicEuler::new(2.0, 1.0).unwrap();
        let l = eigenvalues(&sys, &State::new(&[1.0, 0.0])).unwrap();
        assert!((l[0] + 2f64.sqrt()).abs() < 1e-15 && (l[1] - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn rejects_vacuum() {
        let sys = IsentropicEuler::new(1.4, 1.0).unwrap();
        assert!(sys.state(&[1e-12, 0.0]).is_err());
        assert!(sys.state(&[-1.0, 0.0]).is_err());
        assert!(IsentropicEuler::new(1.0, 1.0).is_err());
    }
}
