//! Central finite differences used as derivative fallbacks and oracles.

use crate::state::{Mat, State};

/// Step `1e-6 * max(1, |u|)`.
pub fn fd_step(u: &State) -> f64 {
    1e-6 * u.norm().max(1.0)
}

pub fn gradient(f: impl Fn(&State) -> f64, u: &State) -> State {
    let h = fd_step(u);
    let n = u.dim();
    let mut g = State::zeros(n);
    for i in 0..n {
        let e = State::unit(n, i);
        g[i] = (f(&u.axpy(h, &e)) - f(&u.axpy(-h, &e))) / (2.0 * h);
    }
    g
}

/// Jacobian with entries `d f_i / d u_j`.
pub fn jacobian(f: impl Fn(&State) -> State, u: &State) -> Mat {
    let h = fd_step(u);
    let n = u.dim();
    let mut m = Mat::zeros(n, n);
    for j in 0..n {
        let e = State::unit(n, j);
        let d = (f(&u.axpy(h, &e)) - f(&u.axpy(-h, &e))) * (0.5 / h);
        for i in 0..n {
            m[(i, j)] = d[i];
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gradient_of_quadratic() {
        let g = gradient(|u| u[0] * u[0] + 3.0 * u[1], &State::new(&[2.0, 1.0]));
        assert!((g[0] - 4.0).abs() < 1e-8);
        assert!((g[1] - 3.0).abs() < 1e-8);
    }

    #[test]
    fn jacobian_of_linear_map() {
        let m = jacobian(|u| State::new(&[u[0] + 2.0 * u[1], -u[1]]), &State::new(&[0.3, 0.7]));
        assert!((m[(0, 1)] - 2.0).abs() < 1e-8);
        assert!((m[(1, 1)] + 1.0).abs() < 1e-8);
        assert!(m[(1, 0)].abs() < 1e-8);
    }
}
