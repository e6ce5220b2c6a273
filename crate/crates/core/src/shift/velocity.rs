//! The discontinuous shift velocity `V(u) = lambda_1(u) - C* 1{a eta(u|ub+) < eta(u|ub-)}`.

use crate::relative::eta_rel;
use crate::state::State;
use crate::system::System;

/// `eta(u|ub-) - a eta(u|ub+)`; the drift is on exactly where this is positive.
pub fn indicator_margin(sys: &dyn System, u: &State, ub_minus: &State, ub_plus: &State, a: f64) -> f64 {
    eta_rel(sys, u, ub_minus) - a * eta_rel(sys, u, ub_plus)
}

pub fn indicator_on(sys: &dyn System, u: &State, ub_minus: &State, ub_plus: &State, a: f64) -> bool {
    a * eta_rel(sys, u, ub_plus) < eta_rel(sys, u, ub_minus)
}

pub fn shift_velocity(sys: &dyn System, u: &State, ub_minus: &State, ub_plus: &State, a: f64, c_star: f64) -> f64 {
    let lam = sys.first_eigenvalue(u);
    if indicator_on(sys, u, ub_minus, ub_plus, a) {
        lam - c_star
    } else {
        lam
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::{Burgers, IsentropicEuler};

    #[test]
    fn branches() {
        let (m, p) = (State::scalar(1.0), State::scalar(0.0));
        assert_eq!(shift_velocity(&Burgers, &m, &m, &p, 0.1, 50.0), 1.0);
        assert_eq!(shift_velocity(&Burgers, &p, &m, &p, 0.1, 50.0), -50.0);
        // u = 0.9: eta(u|1) = 0.005, a eta(u|0) = 0.0405, so off
        assert_eq!(shift_velocity(&Burgers, &State::scalar(0.9), &m, &p, 0.1, 50.0), 0.9);
        // u = 0.5: 0.125 vs 0.0125, on
        assert_eq!(shift_velocity(&Burgers, &State::scalar(0.5), &m, &p, 0.1, 50.0), 0.5 - 50.0);
    }

    #[test]
    fn euler_left_state_rides_characteristic() {
        let sys = IsentropicEuler::new(1.4, 1.0).unwrap();
        let m = State::new(&[1.0, 0.0]);
        let p = State::new(&[1.5, -0.4]);
        assert_eq!(shift_velocity(&sys, &m, &m, &p, 0.01, 1e6), sys.first_eigenvalue(&m));
        assert_eq!(shift_velocity(&sys, &p, &m, &p, 0.01, 1e6), sys.first_eigenvalue(&p) - 1e6);
    }
}
