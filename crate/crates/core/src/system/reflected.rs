//! The system with flux `-f`; its first family is the last family of the original.

use super::{Region, System};
use crate::error::Result;
use crate::state::{Mat, State};

pub struct Reflected<'a>(pub &'a dyn System);

impl System for Reflected<'_> {
    fn name(&self) -> &str {
        self.0.name()
    }

    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn admissible(&self, u: &State) -> std::result::Result<(), String> {
        self.0.admissible(u)
    }

    fn flux(&self, u: &State) -> State {
        -self.0.flux(u)
    }

    fn entropy(&self, u: &State) -> f64 {
        self.0.entropy(u)
    }

    fn entropy_flux(&self, u: &State) -> f64 {
        -self.0.entropy_flux(u)
    }

    fn flux_jacobian(&self, u: &State) -> Mat {
        -self.0.flux_jacobian(u)
    }

    fn entropy_gradient(&self, u: &State) -> State {
        self.0.entropy_gradient(u)
    }

    fn entropy_hessian(&self, u: &State) -> Mat {
        self.0.entropy_hessian(u)
    }

    fn entropy_flux_gradient(&self, u: &State) -> Option<State> {
        self.0.entropy_flux_gradient(u).map(|g| -g)
    }

    fn eigenvalues(&self, u: &State) -> Result<Vec<f64>> {
        let mut l: Vec<f64> = self.0.eigenvalues(u)?.into_iter().map(|x| -x).collect();
        l.reverse();
        Ok(l)
    }

    fn eigenvector(&self, u: &State, k: usize) -> Result<State> {
        self.0.eigenvector(u, self.0.dim() - 1 - k)
    }

    fn to_primitive(&self, u: &State) -> State {
        self.0.to_primitive(u)
    }

    fn from_primitive(&self, p: &State) -> State {
        self.0.from_primitive(p)
    }

    fn default_region(&self) -> Region {
        self.0.default_region()
    }
}
