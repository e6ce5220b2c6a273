//! Full Euler for a polytropic gas, `u = (rho, m, E)`, entropy `-rho * s / (gamma - 1)`.

use super::{Region, System, DENSITY_FLOOR};
use crate::error::{Error, Result};
use crate::state::{Mat, State};

/// Pressure floor, mirroring the density floor.
pub const PRESSURE_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, Copy)]
pub struct FullEuler {
    pub gamma: f64,
}

impl FullEuler {
    pub fn new(gamma: f64) -> Result<Self> {
        if !(gamma > 1.0) || !gamma.is_finite() {
            return Err(Error::param("system_model", "gamma", format!("need gamma > 1, got {gamma}")));
        }
        Ok(FullEuler { gamma })
    }

    pub fn pressure(&self, u: &State) -> f64 {
        (self.gamma - 1.0) * (u[2] - 0.5 * u[1] * u[1] / u[0])
    }

    /// Specific entropy `ln p - gamma ln rho`.
    fn specific_entropy(&self, u: &State) -> f64 {
        self.pressure(u).ln() - self.gamma * u[0].ln()
    }
}

impl System for FullEuler {
    fn name(&self) -> &str {
        "full_euler"
    }

    fn dim(&self) -> usize {
        3
    }

    fn admissible(&self, u: &State) -> std::result::Result<(), String> {
        if !(u[0] >= DENSITY_FLOOR) {
            return Err(format!("density {} below floor {DENSITY_FLOOR}", u[0]));
        }
        let p = self.pressure(u);
        if !(p >= PRESSURE_FLOOR) {
            return Err(format!("pressure {p} below floor {PRESSURE_FLOOR}"));
        }
        Ok(())
    }

    fn flux(&self, u: &State) -> State {
        let v = u[1] / u[0];
        let p = self.pressure(u);
        State::new(&[u[1], u[1] * v + p, (u[2] + p) * v])
    }

    fn entropy(&self, u: &State) -> f64 {
        -u[0] * self.specific_entropy(u) / (self.gamma - 1.0)
    }

    fn entropy_flux(&self, u: &State) -> f64 {
        u[1] / u[0] * self.entropy(u)
    }

    fn flux_jacobian(&self, u: &State) -> Mat {
        let g = self.gamma;
        let v = u[1] / u[0];
        let h = (u[2] + self.pressure(u)) / u[0];
        Mat::from_row_slice(
            3,
            3,
            &[
                0.0,
                1.0,
                0.0,
                0.5 * (g - 3.0) * v * v,
                (3.0 - g) * v,
                g - 1.0,
                v * (0.5 * (g - 1.0) * v * v - h),
                h - (g - 1.0) * v * v,
                g * v,
            ],
        )
    }

    fn entropy_gradient(&self, u: &State) -> State {
        let g = self.gamma;
        let v = u[1] / u[0];
        let beta = u[0] / self.pressure(u);
        let s = self.specific_entropy(u);
        State::new(&[(g - s) / (g - 1.0) - 0.5 * beta * v * v, beta * v, -beta])
    }

    fn entropy_hessian(&self, u: &State) -> Mat {
        let g = self.gamma;
        let rho = u[0];
        let v = u[1] / rho;
        let p = self.pressure(u);
        let beta = rho / p;
        let dp = [0.5 * (g - 1.0) * v * v, -(g - 1.0) * v, g - 1.0];
        let dv = [-v / rho, 1.0 / rho, 0.0];
        let mut h = Mat::zeros(3, 3);
        for x in 0..3 {
            let is_rho = if x == 0 { 1.0 } else { 0.0 };
            let ds = dp[x] / p - g * is_rho / rho;
            let dbeta = is_rho / p - rho * dp[x] / (p * p);
            h[(0, x)] = -ds / (g - 1.0) - 0.5 * dbeta * v * v - beta * v * dv[x];
            h[(1, x)] = dbeta * v + beta * dv[x];
            h[(2, x)] = -dbeta;
        }
        h
    }

    fn entropy_flux_gradient(&self, u: &State) -> Option<State> {
        let rho = u[0];
        let v = u[1] / rho;
        let eta = self.entropy(u);
        let dv = State::new(&[-v / rho, 1.0 / rho, 0.0]);
        Some(self.entropy_gradient(u) * v + dv * eta)
    }

    fn eigenvalues(&self, u: &State) -> Result<Vec<f64>> {
        let v = u[1] / u[0];
        let c = (self.gamma * self.pressure(u) / u[0]).sqrt();
        Ok(vec![v - c, v, v + c])
    }

    fn first_eigenvalue(&self, u: &State) -> f64 {
        u[1] / u[0] - (self.gamma * self.pressure(u) / u[0]).sqrt()
    }

    fn max_speed(&self, u: &State) -> f64 {
        (u[1] / u[0]).abs() + (self.gamma * self.pressure(u) / u[0]).sqrt()
    }

    fn eigenvector(&self, u: &State, k: usize) -> Result<State> {
        let v = u[1] / u[0];
        let p = self.pressure(u);
        let c = (self.gamma * p / u[0]).sqrt();
        let h = (u[2] + p) / u[0];
        let r = match k {
            0 => State::new(&[1.0, v - c, h - v * c]),
            1 => State::new(&[1.0, v, 0.5 * v * v]),
            _ => State::new(&[1.0, v + c, h + v * c]),
        };
        Ok(r * (1.0 / r.norm()))
    }

    /// `(rho, v, p)`
    fn to_primitive(&self, u: &State) -> State {
        State::new(&[u[0], u[1] / u[0], self.pressure(u)])
    }

    fn from_primitive(&self, p: &State) -> State {
        let (rho, v, pr) = (p[0], p[1], p[2]);
        State::new(&[rho, rho * v, pr / (self.gamma - 1.0) + 0.5 * rho * v * v])
    }

    fn default_region(&self) -> Region {
        Region::new(&[0.5, -1.0, 0.5], &[2.0, 1.0, 2.0])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::eigenvalues;

    #[test]
    fn unit_sound_speed_at_rest() {
        let sys = FullEuler::new(1.4).unwrap();
        let u = sys.from_primitive(&State::new(&[1.0, 0.0, 1.0 / 1.4]));
        let l = eigenvalues(&sys, &u).unwrap();
        for (a, b) in l.iter().zip([-1.0, 0.0, 1.0]) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn primitive_round_trip() {
        let sys = FullEuler::new(1.4).unwrap();
        let p = State::new(&[1.3, -0.4, 0.9]);
        let back = sys.to_primitive(&sys.from_primitive(&p));
        assert!((back - p).norm() < 1e-14);
    }

    #[test]
    fn rejects_negative_pressure() {
        let sys = FullEuler::new(1.4).unwrap();
        assert!(sys.state(&[1.0, 2.0, 1.0]).is_err());
    }
}
