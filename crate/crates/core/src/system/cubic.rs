//! Scalar law with flux `u^3/3`, which is not genuinely nonlinear at the origin.

use super::{Region, System};
use crate::error::Result;
use crate::state::{Mat, State};

#[derive(Debug, Clone, Copy, Default)]
pub struct CubicFlux;

impl System for CubicFlux {
    fn name(&self) -> &str {
        "cubic"
    }

    fn dim(&self) -> usize {
        1
    }

    fn admissible(&self, _u: &State) -> std::result::Result<(), String> {
        Ok(())
    }

    fn flux(&self, u: &State) -> State {
        State::scalar(u[0].powi(3) / 3.0)
    }

    fn entropy(&self, u: &State) -> f64 {
        0.5 * u[0] * u[0]
    }

    fn entropy_flux(&self, u: &State) -> f64 {
        u[0].powi(4) / 4.0
    }

    fn flux_jacobian(&self, u: &State) -> Mat {
        Mat::from_element(1, 1, u[0] * u[0])
    }

    fn entropy_gradient(&self, u: &State) -> State {
        *u
    }

    fn entropy_hessian(&self, _u: &State) -> Mat {
        Mat::from_element(1, 1, 1.0)
    }

    fn eigenvalues(&self, u: &State) -> Result<Vec<f64>> {
        Ok(vec![u[0] * u[0]])
    }

    fn eigenvector(&self, _u: &State, _k: usize) -> Result<State> {
        Ok(State::scalar(1.0))
    }

    fn default_region(&self) -> Region {
        Region::scalar_ball(1.0)
    }
}
