//! Fixed-capacity state vectors.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

/// Largest system dimension handled by the lab.
pub const MAX_DIM: usize = 3;

/// A point in state space: up to `MAX_DIM` conserved quantities.
#[derive(Clone, Copy, PartialEq)]
pub struct State {
    data: [f64; MAX_DIM],
    len: usize,
}

impl State {
    /// Builds a state from components. Panics if there are more than `MAX_DIM`.
    pub fn new(components: &[f64]) -> Self {
        assert!(
            !components.is_empty() && components.len() <= MAX_DIM,
            "state dimension must be in 1..={MAX_DIM}"
        );
        let mut data = [0.0; MAX_DIM];
        data[..components.len()].copy_from_slice(components);
        State { data, len: components.len() }
    }

    pub fn scalar(u: f64) -> Self {
        State::new(&[u])
    }

    pub fn zeros(n: usize) -> Self {
        assert!(n >= 1 && n <= MAX_DIM);
        State { data: [0.0; MAX_DIM], len: n }
    }

    /// Unit vector along axis `i`.
    pub fn unit(n: usize, i: usize) -> Self {
        let mut s = State::zeros(n);
        s.data[i] = 1.0;
        s
    }

    pub fn dim(&self) -> usize {
        self.len
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data[..self.len]
    }

    pub fn dot(&self, other: &State) -> f64 {
        debug_assert_eq!(self.len, other.len);
        self.as_slice().iter().zip(other.as_slice()).map(|(a, b)| a * b).sum()
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn norm_inf(&self) -> f64 {
        self.as_slice().iter().fold(0.0f64, |m, x| m.max(x.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.as_slice().iter().all(|x| x.is_finite())
    }

    /// `self + t * dir`
    pub fn axpy(&self, t: f64, dir: &State) -> State {
        *self + *dir * t
    }

    pub fn lerp(&self, other: &State, t: f64) -> State {
        *self + (*other - *self) * t
    }
}

impl Index<usize> for State {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.as_slice()[i]
    }
}

impl IndexMut<usize> for State {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        assert!(i < self.len);
        &mut self.data[i]
    }
}

impl Add for State {
    type Output = State;
    fn add(mut self, rhs: State) -> State {
        debug_assert_eq!(self.len, rhs.len);
        for i in 0..self.len {
            self.data[i] += rhs.data[i];
        }
        self
    }
}

impl Sub for State {
    type Output = State;
    fn sub(mut self, rhs: State) -> State {
        debug_assert_eq!(self.len, rhs.len);
        for i in 0..self.len {
            self.data[i] -= rhs.data[i];
        }
        self
    }
}

impl Mul<f64> for State {
    type Output = State;
    fn mul(mut self, k: f64) -> State {
        for i in 0..self.len {
            self.data[i] *= k;
        }
        self
    }
}

impl Neg for State {
    type Output = State;
    fn neg(self) -> State {
        self * -1.0
    }
}

impl fmt::Debug for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.as_slice()).finish()
    }
}

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.as_slice().iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}

/// Small dense square matrix matching a state dimension.
pub type Mat = nalgebra::DMatrix<f64>;

/// `m * v`
pub fn mat_vec(m: &Mat, v: &State) -> State {
    let n = v.dim();
    let mut out = State::zeros(n);
    for i in 0..n {
        out[i] = (0..n).map(|j| m[(i, j)] * v[j]).sum();
    }
    out
}

/// `v^T * m`
pub fn vec_mat(v: &State, m: &Mat) -> State {
    let n = v.dim();
    let mut out = State::zeros(n);
    for j in 0..n {
        out[j] = (0..n).map(|i| v[i] * m[(i, j)]).sum();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic() {
        let a = State::new(&[1.0, 2.0]);
        let b = State::new(&[0.5, -1.0]);
        assert_eq!((a + b).as_slice(), &[1.5, 1.0]);
        assert_eq!((a - b).as_slice(), &[0.5, 3.0]);
        assert_eq!((a * 2.0).as_slice(), &[2.0, 4.0]);
        assert_eq!(a.dot(&b), -1.5);
        assert_eq!(a.axpy(2.0, &b).as_slice(), &[2.0, 0.0]);
    }

    #[test]
    fn matrix_products() {
        let m = Mat::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let v = State::new(&[1.0, 1.0]);
        assert_eq!(mat_vec(&m, &v).as_slice(), &[3.0, 7.0]);
        assert_eq!(vec_mat(&v, &m).as_slice(), &[4.0, 6.0]);
    }

    #[test]
    #[should_panic]
    fn rejects_oversized() {
        State::new(&[0.0; 4]);
    }
}
