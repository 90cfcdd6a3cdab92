//! Dormand–Prince 5(4) stepping for planar first-order systems.

use crate::real::{lit, Real};

pub type State<T> = [T; 2];

/// Adaptive Dormand–Prince integrator with an optional step cap.
#[derive(Debug, Clone, Copy)]
pub struct DormandPrince<T> {
    pub rtol: T,
    pub atol: T,
    pub max_step: T,
}

/// Outcome of one attempted step.
#[derive(Debug, Clone, Copy)]
pub struct Step<T> {
    pub y: State<T>,
    /// Scaled error norm; the step is acceptable when `<= 1`.
    pub err: T,
}

impl<T: Real> DormandPrince<T> {
    pub fn attempt<F>(&self, f: &F, x: T, y: State<T>, h: T) -> Step<T>
    where
        F: Fn(T, State<T>) -> State<T>,
    {
        let c = |v: f64| lit::<T>(v);
        let add = |y: State<T>, ks: &[(f64, &State<T>)]| -> State<T> {
            let mut out = y;
            for &(a, k) in ks {
                out[0] += h * c(a) * k[0];
                out[1] += h * c(a) * k[1];
            }
            out
        };
        let k1 = f(x, y);
        let k2 = f(x + h * c(0.2), add(y, &[(0.2, &k1)]));
        let k3 = f(
            x + h * c(0.3),
            add(y, &[(3.0 / 40.0, &k1), (9.0 / 40.0, &k2)]),
        );
        let k4 = f(
            x + h * c(0.8),
            add(y, &[(44.0 / 45.0, &k1), (-56.0 / 15.0, &k2), (32.0 / 9.0, &k3)]),
        );
        let k5 = f(
            x + h * c(8.0 / 9.0),
            add(
                y,
                &[
                    (19372.0 / 6561.0, &k1),
                    (-25360.0 / 2187.0, &k2),
                    (64448.0 / 6561.0, &k3),
                    (-212.0 / 729.0, &k4),
                ],
            ),
        );
        let k6 = f(
            x + h,
            add(
                y,
                &[
                    (9017.0 / 3168.0, &k1),
                    (-355.0 / 33.0, &k2),
                    (46732.0 / 5247.0, &k3),
                    (49.0 / 176.0, &k4),
                    (-5103.0 / 18656.0, &k5),
                ],
            ),
        );
        let y5 = add(
            y,
            &[
                (35.0 / 384.0, &k1),
                (500.0 / 1113.0, &k3),
                (125.0 / 192.0, &k4),
                (-2187.0 / 6784.0, &k5),
                (11.0 / 84.0, &k6),
            ],
        );
        let k7 = f(x + h, y5);
        let e = [
            71.0 / 57600.0,
            -71.0 / 16695.0,
            71.0 / 1920.0,
            -17253.0 / 339200.0,
            22.0 / 525.0,
            -1.0 / 40.0,
        ];
        let ks = [&k1, &k3, &k4, &k5, &k6, &k7];
        let mut err = T::zero();
        for i in 0..2 {
            let mut d = T::zero();
            for (ej, kj) in e.iter().zip(ks.iter()) {
                d += c(*ej) * kj[i];
            }
            let scale = self.atol + self.rtol * y[i].abs().max(y5[i].abs());
            err = err.max((h * d / scale).abs());
        }
        Step { y: y5, err }
    }

    /// Next step size proposal after an error estimate.
    pub fn propose(&self, h: T, err: T) -> T {
        let factor = if err == T::zero() {
            lit(5.0)
        } else {
            (lit::<T>(0.9) * err.powf(lit(-0.2))).max(lit(0.2)).min(lit(5.0))
        };
        let next = h * factor;
        if next.abs() > self.max_step {
            self.max_step * h.signum()
        } else {
            next
        }
    }

    /// Integrates from `x0` to `x1` (either direction), returning the end state.
    /// `h` carries the step proposal between calls.
    pub fn advance<F>(&self, f: &F, x0: T, y0: State<T>, x1: T, h: &mut T) -> State<T>
    where
        F: Fn(T, State<T>) -> State<T>,
    {
        let dir = (x1 - x0).signum();
        let mut x = x0;
        let mut y = y0;
        if *h == T::zero() || h.signum() != dir {
            *h = self.max_step * dir;
        }
        let mut guard = 0usize;
        while (x1 - x) * dir > T::zero() {
            let remaining = x1 - x;
            let last = h.abs() >= remaining.abs();
            let step = if last { remaining } else { *h };
            let out = self.attempt(f, x, y, step);
            if out.err <= T::one() || step.abs() <= T::epsilon() * x.abs().max(T::one()) {
                x = if last { x1 } else { x + step };
                y = out.y;
                if !last {
                    *h = self.propose(step, out.err);
                }
            } else {
                *h = self.propose(step, out.err);
            }
            guard += 1;
            if guard > 50_000_000 {
                break;
            }
        }
        y
    }
}
