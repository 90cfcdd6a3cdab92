//! Newton iteration on the discrete Euler–Lagrange system with the two mass
//! constraints, used to polish a descent iterate.

use crate::banded::Banded;
use crate::real::{lit, Real};

use super::discrete::{apow, spow, Discrete};

pub(crate) struct NewtonOutcome<T> {
    pub u: Vec<T>,
    pub v: Vec<T>,
    pub iterations: usize,
    pub residual: T,
}

struct Workspace<T> {
    gu: Vec<T>,
    gv: Vec<T>,
    fu: Vec<T>,
    fv: Vec<T>,
}

impl<T: Real> Workspace<T> {
    fn new(n: usize) -> Self {
        Self {
            gu: vec![T::zero(); n],
            gv: vec![T::zero(); n],
            fu: vec![T::zero(); n],
            fv: vec![T::zero(); n],
        }
    }
}

/// Stacked residual `(F, G)` and its squared norm.
fn residual_vector<T: Real>(
    disc: &Discrete<'_, T>,
    u: &[T],
    v: &[T],
    lambda: (T, T),
    masses: (T, T),
    ws: &mut Workspace<T>,
    out: &mut Vec<T>,
) -> (T, T, T) {
    let n = u.len();
    let w = disc.grid.weights();
    disc.gradient(u, v, &mut ws.gu, &mut ws.gv, &mut ws.fu, &mut ws.fv);
    out.clear();
    let mut norm = T::zero();
    for i in 0..n - 1 {
        let a = ws.gu[i] + lambda.0 * w[i] * u[i];
        let b = ws.gv[i] + lambda.1 * w[i] * v[i];
        out.push(a);
        out.push(b);
        norm += a * a + b * b;
    }
    let g1 = disc.mass2(u) - masses.0 * masses.0;
    let g2 = disc.mass2(v) - masses.1 * masses.1;
    norm += g1 * g1 + g2 * g2;
    (norm, g1, g2)
}

fn relative_residual<T: Real>(disc: &Discrete<'_, T>, u: &[T], v: &[T], lambda: (T, T), ws: &mut Workspace<T>) -> T {
    disc.gradient(u, v, &mut ws.gu, &mut ws.gv, &mut ws.fu, &mut ws.fv);
    let (a, b) = disc.residuals(u, v, &ws.gu, &ws.gv, &ws.fu, &ws.fv, lambda);
    a.max(b)
}

fn jacobian<T: Real>(disc: &Discrete<'_, T>, u: &[T], v: &[T], lambda: (T, T)) -> Banded<T> {
    let n = u.len();
    let m = 2 * (n - 1);
    let prm = disc.prm;
    let w = disc.grid.weights();
    let rho = disc.grid.stiffness();
    let one = T::one();
    let two = lit::<T>(2.0);
    let mut jac = Banded::zeros(m, 2, 2);
    for i in 0..n - 1 {
        let (a, b) = (u[i], v[i]);
        let mut fuu = prm.mu1 * (prm.p - one) * apow(a, prm.p - two);
        let mut fvv = prm.mu2 * (prm.q - one) * apow(b, prm.q - two);
        let mut fuv = T::zero();
        if prm.beta != T::zero() && a != T::zero() && b != T::zero() {
            let cu = prm.beta * prm.r1 * (prm.r1 - one) * apow(a, prm.r1 - two) * apow(b, prm.r2);
            let cv = prm.beta * prm.r2 * (prm.r2 - one) * apow(a, prm.r1) * apow(b, prm.r2 - two);
            let x = prm.beta * prm.r1 * prm.r2 * spow(a, prm.r1 - one) * spow(b, prm.r2 - one);
            fuu += if cu.is_finite() { cu } else { T::zero() };
            fvv += if cv.is_finite() { cv } else { T::zero() };
            fuv = if x.is_finite() { x } else { T::zero() };
        }
        let left = if i > 0 { rho[i - 1] } else { T::zero() };
        let diag = left + rho[i];
        let (ru, rv) = (2 * i, 2 * i + 1);
        jac.add(ru, ru, diag + w[i] * (lambda.0 - fuu));
        jac.add(ru, rv, -w[i] * fuv);
        jac.add(rv, ru, -w[i] * fuv);
        jac.add(rv, rv, diag + w[i] * (lambda.1 - fvv));
        if i > 0 {
            jac.add(ru, ru - 2, -rho[i - 1]);
            jac.add(rv, rv - 2, -rho[i - 1]);
        }
        if i + 2 < n {
            jac.add(ru, ru + 2, -rho[i]);
            jac.add(rv, rv + 2, -rho[i]);
        }
    }
    jac
}

/// Damped Newton on `(u, v, λ₁, λ₂)`. Stops at relative residual `tol`, after
/// `max_iter` steps, or when the line search makes no progress.
pub(crate) fn polish<T: Real>(
    disc: &Discrete<'_, T>,
    u0: &[T],
    v0: &[T],
    masses: (T, T),
    lambda0: (T, T),
    tol: T,
    max_iter: usize,
) -> Option<NewtonOutcome<T>> {
    let n = u0.len();
    let w = disc.grid.weights();
    let mut u = u0.to_vec();
    let mut v = v0.to_vec();
    let mut lambda = lambda0;
    let mut ws = Workspace::new(n);
    let mut rvec = Vec::with_capacity(2 * n);
    let (mut merit, mut g1, mut g2) = residual_vector(disc, &u, &v, lambda, masses, &mut ws, &mut rvec);
    let mut residual = relative_residual(disc, &u, &v, lambda, &mut ws);
    let mut iterations = 0;
    let mut tu = vec![T::zero(); n];
    let mut tv = vec![T::zero(); n];
    let mut trial = Vec::with_capacity(2 * n);
    while iterations < max_iter && residual > tol {
        let mut jac = jacobian(disc, &u, &v, lambda);
        if !jac.factor() {
            return None;
        }
        let m = 2 * (n - 1);
        let mut b1 = vec![T::zero(); m];
        let mut b2 = vec![T::zero(); m];
        for i in 0..n - 1 {
            b1[2 * i] = w[i] * u[i];
            b2[2 * i + 1] = w[i] * v[i];
        }
        let mut x1 = b1.clone();
        let mut x2 = b2.clone();
        let mut y = rvec.clone();
        jac.solve(&mut x1);
        jac.solve(&mut x2);
        jac.solve(&mut y);
        let dot = |a: &[T], b: &[T]| a.iter().zip(b).map(|(&x, &y)| x * y).sum::<T>();
        let (m11, m12, m21, m22) = (dot(&b1, &x1), dot(&b1, &x2), dot(&b2, &x1), dot(&b2, &x2));
        let r1 = g1 / lit(2.0) - dot(&b1, &y);
        let r2 = g2 / lit(2.0) - dot(&b2, &y);
        let det = m11 * m22 - m12 * m21;
        if det == T::zero() || !det.is_finite() {
            return None;
        }
        let dl1 = (r1 * m22 - m12 * r2) / det;
        let dl2 = (m11 * r2 - m21 * r1) / det;
        let dz: Vec<T> = (0..m).map(|k| -y[k] - x1[k] * dl1 - x2[k] * dl2).collect();
        if dz.iter().any(|x| !x.is_finite()) {
            return None;
        }
        let mut alpha = T::one();
        let mut accepted = false;
        for _ in 0..30 {
            for i in 0..n - 1 {
                tu[i] = u[i] + alpha * dz[2 * i];
                tv[i] = v[i] + alpha * dz[2 * i + 1];
            }
            tu[n - 1] = T::zero();
            tv[n - 1] = T::zero();
            let tl = (lambda.0 + alpha * dl1, lambda.1 + alpha * dl2);
            let (tm, t1, t2) = residual_vector(disc, &tu, &tv, tl, masses, &mut ws, &mut trial);
            if tm.is_finite() && tm < merit {
                std::mem::swap(&mut u, &mut tu);
                std::mem::swap(&mut v, &mut tv);
                std::mem::swap(&mut rvec, &mut trial);
                lambda = tl;
                merit = tm;
                g1 = t1;
                g2 = t2;
                accepted = true;
                break;
            }
            alpha = alpha / lit(2.0);
        }
        iterations += 1;
        if !accepted {
            break;
        }
        residual = relative_residual(disc, &u, &v, lambda, &mut ws);
    }
    Some(NewtonOutcome { u, v, iterations, residual })
}
