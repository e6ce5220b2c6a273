//! Mollified Filippov flow `h' = v_n(h, t)` with
//! `v_n(x) = n * int_{x - 1/n}^{x} V(u(y)) dy` on frozen cell data.

use std::cell::RefCell;

use super::velocity::indicator_margin;
use crate::error::{Error, Result};
use crate::fv::FieldSnapshot;
use crate::state::State;
use crate::system::System;

const SUB: usize = 8;

/// Mollification index with a window of at least four cells.
pub fn default_mollification(dx: f64) -> usize {
    ((1.0 / (4.0 * dx)).floor() as usize).max(1)
}

#[derive(Clone)]
struct Segment {
    /// Parameter interval in `[0, 1]` where the drift is off.
    off: Option<(f64, f64)>,
    lam: [f64; SUB],
}

/// `V` along the piecewise-linear interpolant of one snapshot, with fixed traces.
pub struct FrozenVelocity<'a> {
    sys: &'a dyn System,
    snap: &'a FieldSnapshot,
    ub_minus: State,
    ub_plus: State,
    a: f64,
    c_star: f64,
    pub window: f64,
    segs: RefCell<Vec<Option<Segment>>>,
    /// Largest sampled `|lambda_1|` and whether the drift was ever on.
    stats: RefCell<(f64, bool)>,
}

fn golden_min(f: impl Fn(f64) -> f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut lo, mut hi) = (0.0, 1.0);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..80 {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        }
    }
    let m = 0.5 * (lo + hi);
    [0.0, m, 1.0].into_iter().fold(m, |best, x| if f(x) < f(best) { x } else { best })
}

/// Root of a sign change of `f` on `[lo, hi]`, `f(lo)` and `f(hi)` of opposite sign.
fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let pos_lo = f(lo) > 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if (f(mid) > 0.0) == pos_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

impl<'a> FrozenVelocity<'a> {
    pub fn new(
        sys: &'a dyn System,
        snap: &'a FieldSnapshot,
        ub_minus: State,
        ub_plus: State,
        a: f64,
        c_star: f64,
        n: usize,
    ) -> Self {
        let n_seg = snap.cells.len() - 1;
        FrozenVelocity {
            sys,
            snap,
            ub_minus,
            ub_plus,
            a,
            c_star,
            window: 1.0 / n as f64,
            segs: RefCell::new(vec![None; n_seg]),
            stats: RefCell::new((0.0, false)),
        }
    }

    fn margin(&self, u: &State) -> f64 {
        indicator_margin(self.sys, u, &self.ub_minus, &self.ub_plus, self.a)
    }

    /// `V` at a state, recording statistics.
    pub fn v_of(&self, u: &State) -> f64 {
        let lam = self.sys.first_eigenvalue(u);
        let on = self.c_star != 0.0 && self.margin(u) > 0.0;
        let mut st = self.stats.borrow_mut();
        st.0 = st.0.max(lam.abs());
        st.1 |= on;
        if on {
            lam - self.c_star
        } else {
            lam
        }
    }

    /// Sampled bound on `|V|`.
    pub fn v_sup(&self) -> f64 {
        let st = self.stats.borrow();
        st.0 + if st.1 { self.c_star.abs() } else { 0.0 }
    }

    fn segment(&self, j: usize) -> Segment {
        if let Some(s) = &self.segs.borrow()[j] {
            return s.clone();
        }
        let (u0, u1) = (self.snap.cells[j], self.snap.cells[j + 1]);
        let at = |tau: f64| u0.lerp(&u1, tau);
        let mut lam = [0.0; SUB];
        for (i, l) in lam.iter_mut().enumerate() {
            *l = self.sys.first_eigenvalue(&at((i as f64 + 0.5) / SUB as f64));
        }
        let off = if self.c_star == 0.0 {
            Some((0.0, 1.0))
        } else {
            let g = |tau: f64| self.margin(&at(tau));
            let tm = golden_min(g);
            if g(tm) > 0.0 {
                None
            } else {
                let lo = if g(0.0) <= 0.0 { 0.0 } else { bisect(g, 0.0, tm) };
                let hi = if g(1.0) <= 0.0 { 1.0 } else { bisect(g, tm, 1.0) };
                Some((lo, hi))
            }
        };
        {
            let mut st = self.stats.borrow_mut();
            st.0 = lam.iter().fold(st.0, |m, l| m.max(l.abs()));
            st.1 |= self.c_star != 0.0 && off != Some((0.0, 1.0));
        }
        let s = Segment { off, lam };
        self.segs.borrow_mut()[j] = Some(s.clone());
        s
    }

    /// `int V dy` over the parameter range `[alpha, beta]` of segment `j`.
    fn segment_integral(&self, j: usize, alpha: f64, beta: f64) -> f64 {
        let s = self.segment(j);
        let mut acc = 0.0;
        for (i, l) in s.lam.iter().enumerate() {
            let lo = (i as f64 / SUB as f64).max(alpha);
            let hi = ((i + 1) as f64 / SUB as f64).min(beta);
            if hi > lo {
                acc += l * (hi - lo);
            }
        }
        let off_len = match s.off {
            Some((lo, hi)) => (hi.min(beta) - lo.max(alpha)).max(0.0),
            None => 0.0,
        };
        (acc - self.c_star * ((beta - alpha) - off_len)) * self.snap.grid.dx
    }

    /// Mollified velocity at `x`.
    pub fn v(&self, x: f64) -> f64 {
        let g = &self.snap.grid;
        let n = g.n_cells;
        let c0 = g.center(0);
        let cl = g.center(n - 1);
        let (lo, hi) = (x - self.window, x);
        let mut acc = 0.0;
        if lo < c0 {
            acc += self.v_of(&self.snap.cells[0]) * (hi.min(c0) - lo);
        }
        if hi > cl {
            acc += self.v_of(&self.snap.cells[n - 1]) * (hi - lo.max(cl));
        }
        let a = lo.max(c0);
        let b = hi.min(cl);
        if b > a {
            let pa = (a - c0) / g.dx;
            let pb = (b - c0) / g.dx;
            let ja = (pa.floor() as usize).min(n - 2);
            let jb = (pb.ceil() as usize).clamp(1, n - 1) - 1;
            for j in ja..=jb {
                let alpha = (pa - j as f64).clamp(0.0, 1.0);
                let beta = (pb - j as f64).clamp(0.0, 1.0);
                if beta > alpha {
                    acc += self.segment_integral(j, alpha, beta);
                }
            }
        }
        acc / self.window
    }

    /// Range of sampled `V` values over `[lo, hi]`.
    pub fn hull(&self, lo: f64, hi: f64) -> (f64, f64) {
        let g = &self.snap.grid;
        let n = g.n_cells;
        let mut vmin = f64::INFINITY;
        let mut vmax = f64::NEG_INFINITY;
        let mut push = |v: f64| {
            vmin = vmin.min(v);
            vmax = vmax.max(v);
        };
        let c0 = g.center(0);
        if lo <= c0 {
            push(self.v_of(&self.snap.cells[0]));
        }
        if hi >= g.center(n - 1) {
            push(self.v_of(&self.snap.cells[n - 1]));
        }
        let ja = (((lo - c0) / g.dx).floor().max(0.0) as usize).min(n - 2);
        let jb = (((hi - c0) / g.dx).floor().max(0.0) as usize).min(n - 2);
        for j in ja..=jb {
            let s = self.segment(j);
            for (i, l) in s.lam.iter().enumerate() {
                let tau = (i as f64 + 0.5) / SUB as f64;
                let y = c0 + (j as f64 + tau) * g.dx;
                if y < lo || y > hi {
                    continue;
                }
                let off = matches!(s.off, Some((a, b)) if tau >= a && tau <= b);
                push(if off { *l } else { l - self.c_star });
            }
            for u in [self.snap.cells[j], self.snap.cells[j + 1]] {
                push(self.v_of(&u));
            }
        }
        (vmin, vmax)
    }
}

/// Outcome of one frozen step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrozenStep {
    pub h: f64,
    pub hdot: f64,
    /// Hull of `V` near the path.
    pub hull: (f64, f64),
    pub v_sup: f64,
}

/// Solves `h' = v(h)` exactly for piecewise-linear `v` between scan points over time `dt`.
pub fn advance_frozen(vel: &FrozenVelocity, h0: f64, dt: f64, t: f64) -> Result<FrozenStep> {
    let g = &vel.snap.grid;
    let (x_lo, x_hi) = (g.x_min + g.dx, g.x_max() - g.dx);
    let delta = g.dx / SUB as f64;
    let mut x = h0;
    let mut v = vel.v(x);
    let mut remaining = dt;
    if v != 0.0 {
        let d = v.signum();
        loop {
            let xn = x + d * delta;
            if xn < x_lo || xn > x_hi {
                return Err(Error::ShiftExit { t, h: xn });
            }
            let vn = vel.v(xn);
            if vn * d <= 0.0 {
                // sign change: settle on the root with the local exponential rate
                let root = if vn == 0.0 { xn } else { bisect(|y| vel.v(y) * d, x, xn) };
                let k = v.abs() / (root - x).abs().max(f64::MIN_POSITIVE);
                x = root - (root - x) * (-k * remaining).exp();
                break;
            }
            let (sp, sn) = (v.abs(), vn.abs());
            let slope = (sn - sp) / delta;
            let t_seg = if (sn - sp).abs() > 1e-12 * sp { delta * (sn / sp).ln() / (sn - sp) } else { delta / sp };
            if t_seg >= remaining {
                let dist = if (sn - sp).abs() > 1e-12 * sp { sp * ((slope * remaining).exp() - 1.0) / slope } else { sp * remaining };
                x += d * dist.min(delta);
                break;
            }
            remaining -= t_seg;
            x = xn;
            v = vn;
        }
    }
    let (a, b) = if x < h0 { (x, h0) } else { (h0, x) };
    let hull = vel.hull(a - vel.window - g.dx, b + g.dx);
    let v_sup = vel.v_sup().max(hull.0.abs()).max(hull.1.abs());
    let mut hdot = (x - h0) / dt;
    // the exact flow never outruns the sampled bound; clip round-off
    if hdot.abs() > v_sup {
        hdot = hdot.signum() * v_sup;
        x = h0 + hdot * dt;
    }
    Ok(FrozenStep { h: x, hdot, hull, v_sup })
}

/// `u(h-)` and `u(h+)`: the cells on either side of the cell containing `h`.
pub fn adjacent_traces(snap: &FieldSnapshot, h: f64) -> Option<(State, State)> {
    let j = snap.grid.cell_of(h)?;
    if j == 0 || j + 1 >= snap.grid.n_cells {
        return None;
    }
    Some((snap.cells[j - 1], snap.cells[j + 1]))
}

/// Traces `offset` cells away from the cell containing `h`.
pub fn offset_traces(snap: &FieldSnapshot, h: f64, offset: usize) -> Option<(State, State)> {
    let j = snap.grid.cell_of(h)?;
    if j < offset || j + offset >= snap.grid.n_cells {
        return None;
    }
    Some((snap.cells[j - offset], snap.cells[j + offset]))
}
