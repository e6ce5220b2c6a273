//! Inviscid Burgers equation with the quadratic entropy.

use super::{Region, System};
use crate::error::Result;
use crate::state::{Mat, State};

#[derive(Debug, Clone, Copy, Default)]
pub struct Burgers;

impl System for Burgers {
    fn name(&self) -> &str {
        "burgers"
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
        u[0] * u[0] * u[0] / 3.0
    }

    fn flux_jacobian(&self, u: &State) -> Mat {
        Mat::from_element(1, 1, u[0])
    }

    fn entropy_gradient(&self, u: &State) -> State {
        *u
    }

    fn entropy_hessian(&self, _u: &State) -> Mat {
        Mat::from_element(1, 1, 1.0)
    }

    fn entropy_flux_gradient(&self, u: &State) -> Option<State> {
        Some(State::scalar(u[0] * u[0]))
    }

    fn eigenvalues(&self, u: &State) -> Result<Vec<f64>> {
        Ok(vec![u[0]])
    }

    fn first_eigenvalue(&self, u: &State) -> f64 {
        u[0]
    }

    fn max_speed(&self, u: &State) -> f64 {
        u[0].abs()
    }

    fn eigenvector(&self, _u: &State, _k: usize) -> Result<State> {
        Ok(State::scalar(1.0))
    }

    fn default_region(&self) -> Region {
        Region::scalar_ball(1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::{eigenvalues, flux};

    #[test]
    fn closed_forms() {
        assert_eq!(flux(&Burgers, &State::scalar(0.0)).unwrap()[0], 0.0);
        assert_eq!(flux(&Burgers, &State::scalar(2.0)).unwrap()[0], 2.0);
        assert_eq!(eigenvalues(&Burgers, &State::scalar(3.0)).unwrap(), vec![3.0]);
    }
}
