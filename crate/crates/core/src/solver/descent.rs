//! Preconditioned Riemannian descent on `S_{a₁} × S_{a₂}` with a nonlinear
//! conjugate-gradient direction and Armijo backtracking.
//!
//! The metric is `A + σW` (stiffness plus shifted mass), so one step costs a
//! tridiagonal solve per component. Trial points are retracted by taking
//! absolute values and renormalizing both masses exactly.

use std::sync::Arc;

use crate::banded::solve_tridiagonal;
use crate::fiber::FiberMap;
use crate::radial::{RadialField, RadialGrid, StatePair};
use crate::real::{lit, Real};

use super::discrete::Discrete;

const ARMIJO: f64 = 1e-4;
const MAX_BACKTRACK: usize = 60;
const SIGMA_FLOOR: f64 = 1e-2;
const TAU_MAX: f64 = 8.0;
/// Iterations without a 1% gain on the best residual before giving up.
const PATIENCE: usize = 5000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Mode<T> {
    /// Energy merit, trials with kinetic norm `≥ r0` rejected.
    Mixed { r0: T },
    /// Fiber-maximized energy merit; accepted iterates are moved to the maximizer.
    Supercritical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Stop {
    Threshold,
    MaxIterations,
    Stagnated,
}

struct Memory<T> {
    g: [Vec<T>; 2],
    pg: [Vec<T>; 2],
    d: [Vec<T>; 2],
}

pub(crate) struct Descent<'a, T: Real> {
    disc: Discrete<'a, T>,
    grid: Arc<RadialGrid<T>>,
    masses: (T, T),
    mode: Mode<T>,
    pub u: Vec<T>,
    pub v: Vec<T>,
    pub merit: T,
    pub lambda: (T, T),
    pub residual: T,
    pub iterations: usize,
    pub monotone: bool,
    pub fiber_unique: bool,
    /// Largest relative change of the merit caused by moving to the fiber maximum.
    pub projection_drift: T,
    frozen_v: bool,
    tau: T,
    g: [Vec<T>; 2],
    f: [Vec<T>; 2],
    memory: Option<Memory<T>>,
    scratch: Vec<T>,
}

/// Retraction: `|x|`, last node pinned, mass scaled to `a`.
fn retract<T: Real>(disc: &Discrete<'_, T>, x: &mut [T], a: T) -> bool {
    for xi in x.iter_mut() {
        *xi = xi.abs();
    }
    let n = x.len();
    x[n - 1] = T::zero();
    let m = disc.mass2(x).sqrt();
    if !(m > T::zero()) || !m.is_finite() {
        return false;
    }
    let s = a / m;
    for xi in x.iter_mut() {
        *xi *= s;
    }
    true
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

impl<'a, T: Real> Descent<'a, T> {
    /// Starts from `(u, v)`, which must already carry the target masses and, in
    /// the supercritical mode, sit at its fiber maximum.
    pub fn new(
        disc: Discrete<'a, T>,
        grid: Arc<RadialGrid<T>>,
        masses: (T, T),
        mode: Mode<T>,
        u: Vec<T>,
        v: Vec<T>,
        step: T,
    ) -> Option<Self> {
        let n = u.len();
        let mut d = Self {
            disc,
            grid,
            masses,
            mode,
            u,
            v,
            merit: T::zero(),
            lambda: (T::zero(), T::zero()),
            residual: T::infinity(),
            iterations: 0,
            monotone: true,
            fiber_unique: true,
            projection_drift: T::zero(),
            frozen_v: false,
            tau: step,
            g: [vec![T::zero(); n], vec![T::zero(); n]],
            f: [vec![T::zero(); n], vec![T::zero(); n]],
            memory: None,
            scratch: Vec::new(),
        };
        d.merit = d.evaluate(&d.u.clone(), &d.v.clone())?.0;
        d.refresh();
        Some(d)
    }

    /// Merit value and, in the supercritical mode, the fiber maximizer.
    fn evaluate(&mut self, u: &[T], v: &[T]) -> Option<(T, T)> {
        let it = self.disc.integrals(u, v);
        let kin = it.kinetic_u + it.kinetic_v;
        match self.mode {
            Mode::Mixed { r0 } => {
                if kin.sqrt() >= r0 {
                    return None;
                }
                let e = it.energy(self.disc.prm);
                e.is_finite().then_some((e, T::zero()))
            }
            Mode::Supercritical => {
                let map = FiberMap::from_integrals(self.disc.prm, kin, it.lp_u, it.lq_v, it.coupling).ok()?;
                match map.report() {
                    Ok(rep) => {
                        let t = rep.t_max?;
                        Some((map.phi(t), t))
                    }
                    Err(_) => {
                        self.fiber_unique = false;
                        None
                    }
                }
            }
        }
    }

    /// Gradient, multipliers and residual at the current point.
    fn refresh(&mut self) {
        let [gu, gv] = &mut self.g;
        let [fu, fv] = &mut self.f;
        self.disc.gradient(&self.u, &self.v, gu, gv, fu, fv);
        let l1 = -dot(&self.u, gu) / self.disc.mass2(&self.u);
        let l2 = -dot(&self.v, gv) / self.disc.mass2(&self.v);
        self.lambda = (l1, l2);
        let (ru, rv) = self.disc.residuals(&self.u, &self.v, gu, gv, fu, fv, self.lambda);
        self.residual = if self.frozen_v { ru } else { ru.max(rv) };
    }

    /// `(A + σW)⁻¹ x` on the free nodes.
    fn precondition(&mut self, sigma: T, x: &mut [T]) {
        let rho = self.grid.stiffness();
        let w = self.grid.weights();
        let m = x.len() - 1;
        let mut lower = vec![T::zero(); m];
        let mut diag = vec![T::zero(); m];
        let mut upper = vec![T::zero(); m];
        for i in 0..m {
            let left = if i > 0 { rho[i - 1] } else { T::zero() };
            diag[i] = left + rho[i] + sigma * w[i];
            if i > 0 {
                lower[i] = -rho[i - 1];
            }
            if i + 1 < m {
                upper[i] = -rho[i];
            }
        }
        solve_tridiagonal(&lower, &diag, &upper, &mut x[..m], &mut self.scratch);
        x[m] = T::zero();
    }

    /// Preconditioned gradient projected onto the tangent space of the sphere.
    fn tangent_gradient(&mut self, k: usize) -> Vec<T> {
        let w = self.grid.weights();
        let x = if k == 0 { self.u.clone() } else { self.v.clone() };
        let lam = if k == 0 { self.lambda.0 } else { self.lambda.1 };
        let sigma = lam.max(lit(SIGMA_FLOOR));
        let wx: Vec<T> = x.iter().zip(w).map(|(&a, &b)| a * b).collect();
        let mut z = self.g[k].clone();
        self.precondition(sigma, &mut z);
        let mut y = wx.clone();
        self.precondition(sigma, &mut y);
        let alpha = dot(&wx, &z) / dot(&wx, &y);
        z.iter_mut().zip(&y).for_each(|(a, &b)| *a -= alpha * b);
        z
    }

    fn project_tangent(&self, k: usize, d: &mut [T]) {
        let w = self.grid.weights();
        let x = if k == 0 { &self.u } else { &self.v };
        let num: T = x.iter().zip(w).zip(d.iter()).map(|((&a, &b), &c)| a * b * c).sum();
        let den: T = x.iter().zip(w).map(|(&a, &b)| a * a * b).sum();
        let c = num / den;
        d.iter_mut().zip(x).for_each(|(di, &xi)| *di -= c * xi);
    }

    fn direction(&mut self, allow_cg: bool) -> ([Vec<T>; 2], [Vec<T>; 2], T) {
        let n = self.u.len();
        let pg = if self.frozen_v {
            [self.tangent_gradient(0), vec![T::zero(); n]]
        } else {
            [self.tangent_gradient(0), self.tangent_gradient(1)]
        };
        let mut d = [
            pg[0].iter().map(|&x| -x).collect::<Vec<T>>(),
            pg[1].iter().map(|&x| -x).collect::<Vec<T>>(),
        ];
        if allow_cg {
            if let Some(mem) = &self.memory {
                let mut num = T::zero();
                let mut den = T::zero();
                for k in 0..2 {
                    if k == 1 && self.frozen_v {
                        continue;
                    }
                    num += self.g[k].iter().zip(&pg[k]).zip(&mem.pg[k]).map(|((&g, &a), &b)| g * (a - b)).sum::<T>();
                    den += dot(&mem.g[k], &mem.pg[k]);
                }
                let beta = if den > T::zero() { (num / den).max(T::zero()) } else { T::zero() };
                if beta > T::zero() {
                    let mut cand = d.clone();
                    for k in 0..2 {
                        cand[k].iter_mut().zip(&mem.d[k]).for_each(|(a, &b)| *a += beta * b);
                    }
                    let (head, tail) = cand.split_at_mut(1);
                    self.project_tangent(0, &mut head[0]);
                    if self.frozen_v {
                        tail[0].iter_mut().for_each(|x| *x = T::zero());
                    } else {
                        self.project_tangent(1, &mut tail[0]);
                    }
                    let slope = dot(&self.g[0], &cand[0]) + dot(&self.g[1], &cand[1]);
                    if slope < T::zero() {
                        d = cand;
                    }
                }
            }
        }
        let slope = dot(&self.g[0], &d[0]) + dot(&self.g[1], &d[1]);
        (pg, d, slope)
    }

    /// One accepted step, or `false` when no step decreases the merit.
    fn step(&mut self) -> bool {
        for allow_cg in [true, false] {
            let (pg, d, slope) = self.direction(allow_cg);
            if !(slope < T::zero()) {
                continue;
            }
            let mut tau = self.tau;
            let (a1, a2) = self.masses;
            for _ in 0..MAX_BACKTRACK {
                let mut tu: Vec<T> = self.u.iter().zip(&d[0]).map(|(&x, &y)| x + tau * y).collect();
                let mut tv: Vec<T> = self.v.iter().zip(&d[1]).map(|(&x, &y)| x + tau * y).collect();
                let v_ok = self.frozen_v || retract(&self.disc, &mut tv, a2);
                if retract(&self.disc, &mut tu, a1) && v_ok {
                    if let Some((m, t)) = self.evaluate(&tu, &tv) {
                        if m <= self.merit + lit::<T>(ARMIJO) * tau * slope {
                            self.accept(tu, tv, m, t, pg, d);
                            self.tau = (tau * lit(1.5)).min(lit(TAU_MAX));
                            return true;
                        }
                    }
                }
                tau = tau / lit(2.0);
                if tau < lit::<T>(1e-16) {
                    break;
                }
            }
            self.memory = None;
        }
        false
    }

    fn accept(&mut self, u: Vec<T>, v: Vec<T>, merit: T, t: T, pg: [Vec<T>; 2], d: [Vec<T>; 2]) {
        if merit > self.merit {
            self.monotone = false;
        }
        self.u = u;
        self.v = v;
        self.merit = merit;
        if self.mode == Mode::Supercritical && t != T::zero() {
            self.move_to_fiber_max(t);
        }
        let g = std::mem::replace(&mut self.g, [Vec::new(), Vec::new()]);
        self.memory = Some(Memory { g, pg, d });
        let n = self.u.len();
        self.g = [vec![T::zero(); n], vec![T::zero(); n]];
        self.refresh();
        self.iterations += 1;
    }

    /// Dilates the iterate by `t` and renormalizes; the merit is re-read there.
    /// The discrete merit is dilation invariant only up to discretization error,
    /// which is recorded as drift rather than counted against monotonicity.
    fn move_to_fiber_max(&mut self, t: T) {
        let grid = self.grid.clone();
        let pair = StatePair {
            u: RadialField::new(grid.clone(), self.u.clone()).expect("grid length"),
            v: RadialField::new(grid, self.v.clone()).expect("grid length"),
        }
        .dilate(t);
        let mut u = pair.u.into_values();
        let mut v = pair.v.into_values();
        let (a1, a2) = self.masses;
        if !(retract(&self.disc, &mut u, a1) && retract(&self.disc, &mut v, a2)) {
            return;
        }
        if let Some((m, _)) = self.evaluate(&u, &v) {
            let drift = (m - self.merit).abs() / self.merit.abs().max(T::min_positive_value());
            self.projection_drift = self.projection_drift.max(drift);
            self.u = u;
            self.v = v;
            self.merit = m;
        }
    }

    /// Iterates until the residual drops below `threshold`, the iteration budget
    /// is spent, or the line search fails.
    pub fn run(&mut self, threshold: T, max_iterations: usize) -> Stop {
        let mut best = self.residual;
        let mut since = self.iterations;
        while self.residual > threshold {
            if self.residual < best * lit(0.99) {
                best = self.residual;
                since = self.iterations;
            } else if self.iterations - since > PATIENCE {
                return Stop::Stagnated;
            }
            if self.iterations >= max_iterations {
                return Stop::MaxIterations;
            }
            if !self.step() {
                return Stop::Stagnated;
            }
            if self.iterations % 100 == 0 {
                log::debug!(
                    "descent {}: merit {} residual {:e} tau {:e}",
                    self.iterations,
                    self.merit,
                    self.residual,
                    self.tau
                );
            }
        }
        Stop::Threshold
    }

    /// Keeps `v` fixed from now on; only `u` moves and only its residual counts.
    pub fn freeze_v(&mut self) {
        self.frozen_v = true;
        self.memory = None;
        self.refresh();
    }

    /// Replaces the iterate (after a Newton polish) and drops the CG memory.
    pub fn reset_to(&mut self, u: Vec<T>, v: Vec<T>) -> bool {
        match self.evaluate(&u, &v) {
            Some((m, _)) => {
                self.u = u;
                self.v = v;
                self.merit = m;
                self.memory = None;
                self.refresh();
                true
            }
            None => false,
        }
    }
}
