//! Discrete energy of the system on raw sample vectors, its gradient and the
//! Euler–Lagrange residual.

use crate::params::ProblemParams;
use crate::radial::RadialGrid;
use crate::real::{lit, Real};

/// `sign(x)|x|^e`, zero at the origin.
#[inline]
pub(crate) fn spow<T: Real>(x: T, e: T) -> T {
    if x == T::zero() {
        T::zero()
    } else {
        x.signum() * x.abs().powf(e)
    }
}

/// `|x|^e` with `0^e` read as `0` even for negative `e`; non-finite results become `0`.
#[inline]
pub(crate) fn apow<T: Real>(x: T, e: T) -> T {
    if x == T::zero() {
        return T::zero();
    }
    let v = x.abs().powf(e);
    if v.is_finite() {
        v
    } else {
        T::zero()
    }
}

/// The four integrals entering `I` and `P`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integrals<T> {
    pub kinetic_u: T,
    pub kinetic_v: T,
    pub lp_u: T,
    pub lq_v: T,
    pub coupling: T,
}

impl<T: Real> Integrals<T> {
    pub fn energy(&self, prm: &ProblemParams<T>) -> T {
        (self.kinetic_u + self.kinetic_v) / lit(2.0)
            - prm.mu1 / prm.p * self.lp_u
            - prm.mu2 / prm.q * self.lq_v
            - prm.beta * self.coupling
    }

    /// `λ₁, λ₂` from testing each equation with its own component.
    pub fn multipliers(&self, prm: &ProblemParams<T>, mass_u: T, mass_v: T) -> (T, T) {
        let l1 = (-self.kinetic_u + prm.mu1 * self.lp_u + prm.beta * prm.r1 * self.coupling) / mass_u;
        let l2 = (-self.kinetic_v + prm.mu2 * self.lq_v + prm.beta * prm.r2 * self.coupling) / mass_v;
        (l1, l2)
    }
}

/// Discretized system bound to one grid and one parameter set.
pub struct Discrete<'a, T> {
    pub grid: &'a RadialGrid<T>,
    pub prm: &'a ProblemParams<T>,
}

impl<'a, T: Real> Discrete<'a, T> {
    pub fn new(grid: &'a RadialGrid<T>, prm: &'a ProblemParams<T>) -> Self {
        Self { grid, prm }
    }

    pub fn n(&self) -> usize {
        self.grid.len()
    }

    pub fn integrals(&self, u: &[T], v: &[T]) -> Integrals<T> {
        let g = self.grid;
        Integrals {
            kinetic_u: crate::radial::kinetic(g, u),
            kinetic_v: crate::radial::kinetic(g, v),
            lp_u: crate::radial::lp_integral(g, u, self.prm.p),
            lq_v: crate::radial::lp_integral(g, v, self.prm.q),
            coupling: crate::radial::coupling(g, u, v, self.prm.r1, self.prm.r2),
        }
    }

    pub fn mass2(&self, f: &[T]) -> T {
        crate::radial::lp_integral(self.grid, f, lit(2.0))
    }

    /// Nonlinear right-hand sides `f_u`, `f_v` at node `i`.
    #[inline]
    pub fn forces(&self, a: T, b: T) -> (T, T) {
        let p = self.prm;
        let one = T::one();
        let mut fu = p.mu1 * spow(a, p.p - one);
        let mut fv = p.mu2 * spow(b, p.q - one);
        if p.beta != T::zero() && a != T::zero() && b != T::zero() {
            let ua = a.abs().powf(p.r1);
            let vb = b.abs().powf(p.r2);
            fu += p.beta * p.r1 * ua / a * vb;
            fv += p.beta * p.r2 * ua * vb / b;
        }
        (fu, fv)
    }

    /// `(Af)_i` with `A` the stiffness operator (`½∂K/∂f`), for the free nodes.
    pub fn stiffness_apply(&self, f: &[T], out: &mut [T]) {
        let rho = self.grid.stiffness();
        let n = f.len();
        for i in 0..n - 1 {
            let left = if i > 0 { rho[i - 1] * (f[i] - f[i - 1]) } else { T::zero() };
            out[i] = left + rho[i] * (f[i] - f[i + 1]);
        }
        out[n - 1] = T::zero();
    }

    /// Euclidean gradient of the discrete energy and the weighted forces.
    pub fn gradient(&self, u: &[T], v: &[T], gu: &mut [T], gv: &mut [T], fu: &mut [T], fv: &mut [T]) {
        self.stiffness_apply(u, gu);
        self.stiffness_apply(v, gv);
        let w = self.grid.weights();
        let n = u.len();
        for i in 0..n - 1 {
            let (a, b) = self.forces(u[i], v[i]);
            fu[i] = a;
            fv[i] = b;
            gu[i] -= w[i] * a;
            gv[i] -= w[i] * b;
        }
        fu[n - 1] = T::zero();
        fv[n - 1] = T::zero();
        gu[n - 1] = T::zero();
        gv[n - 1] = T::zero();
    }

    /// Relative Euler–Lagrange residual `‖∇I + λWf‖/scale` per component, using
    /// the L² norm induced by the quadrature weights.
    pub fn residuals(&self, u: &[T], v: &[T], gu: &[T], gv: &[T], fu: &[T], fv: &[T], lambda: (T, T)) -> (T, T) {
        let w = self.grid.weights();
        let n = u.len();
        let mut ru = T::zero();
        let mut rv = T::zero();
        let mut su = T::zero();
        let mut sv = T::zero();
        let mut mu = T::zero();
        let mut mv = T::zero();
        for i in 1..n - 1 {
            let a = gu[i] + lambda.0 * w[i] * u[i];
            let b = gv[i] + lambda.1 * w[i] * v[i];
            ru += a * a / w[i];
            rv += b * b / w[i];
            su += w[i] * fu[i] * fu[i];
            sv += w[i] * fv[i] * fv[i];
            mu += w[i] * u[i] * u[i];
            mv += w[i] * v[i] * v[i];
        }
        let scale_u = su.sqrt().max(lambda.0.abs() * mu.sqrt()).max(T::min_positive_value());
        let scale_v = sv.sqrt().max(lambda.1.abs() * mv.sqrt()).max(T::min_positive_value());
        (ru.sqrt() / scale_u, rv.sqrt() / scale_v)
    }
}
