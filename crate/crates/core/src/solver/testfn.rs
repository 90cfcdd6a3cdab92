//! Upper bound for `m(a₁,a₂)` from the pair `(u, s⋆v)` with `u` the scalar
//! ground state of mass `a₁` and `v = cφ(|x|)/|x|^m` a singular profile of mass `a₂`.
//!
//! As `s → −∞` the coupling term decays like `e^{θs}` with `θ = (N/2 − m)r₂ < 2`,
//! slower than the kinetic term of `v`, so the energy drops below `m(a₁,0)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fiber::FiberMap;
use crate::params::{derive_regime, ProblemParams, Regime};
use crate::radial::sphere_area;
use crate::real::{from_usize, lit, Real};
use crate::scalar::{normalized_scalar, simpson, solve_unit_scalar};
use crate::radial::RadialGrid;

const PANELS: usize = 4096;

/// Smooth cutoff: 1 on `[0,1]`, 0 on `[2,∞)`.
pub fn cutoff<T: Real>(r: T) -> T {
    let one = T::one();
    let two = lit::<T>(2.0);
    if r <= one {
        one
    } else if r >= two {
        T::zero()
    } else {
        let a = psi(two - r);
        a / (a + psi(r - one))
    }
}

fn psi<T: Real>(x: T) -> T {
    if x > T::zero() {
        (-x.recip()).exp()
    } else {
        T::zero()
    }
}

fn dpsi<T: Real>(x: T) -> T {
    if x > T::zero() {
        psi(x) / (x * x)
    } else {
        T::zero()
    }
}

pub fn cutoff_derivative<T: Real>(r: T) -> T {
    let one = T::one();
    let two = lit::<T>(2.0);
    if r <= one || r >= two {
        return T::zero();
    }
    let a = psi(two - r);
    let b = psi(r - one);
    let s = a + b;
    (-dpsi(two - r) * b - a * dpsi(r - one)) / (s * s)
}

/// The open window `(N/2 − 2/r₂, N/2 − 1)` for the singular exponent `m`.
pub fn exponent_window<T: Real>(dim: usize, r2: T) -> Result<(T, T)> {
    if !(r2 < lit(2.0)) {
        return Err(Error::InvalidParams(format!(
            "the singular test function needs r2 < 2, got {r2}"
        )));
    }
    let half = from_usize::<T>(dim) / lit(2.0);
    Ok((half - lit::<T>(2.0) / r2, half - T::one()))
}

/// `θ = (N/2 − m) r₂`.
pub fn theta<T: Real>(dim: usize, m: T, r2: T) -> T {
    (from_usize::<T>(dim) / lit(2.0) - m) * r2
}

/// Integrals of the unit-amplitude profile `φ(r)/r^m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingularProfile<T> {
    pub m: T,
    pub mass2: T,
    pub kinetic: T,
    pub lq: T,
}

impl<T: Real> SingularProfile<T> {
    /// Closed form on `[0,1]`, Simpson on `[1,2]`.
    pub fn new(dim: usize, m: T, q: T) -> Self {
        let n = from_usize::<T>(dim);
        let omega = sphere_area::<T>(dim);
        let one = T::one();
        let two = lit::<T>(2.0);
        let e = n - one;
        let mass_tail = simpson(|r: T| cutoff(r).powi(2) * r.powf(e - two * m), one, two, PANELS);
        let kin_tail = simpson(
            |r: T| {
                let d = cutoff_derivative(r) * r.powf(-m) - m * cutoff(r) * r.powf(-m - one);
                d * d * r.powf(e)
            },
            one,
            two,
            PANELS,
        );
        let lq_tail = simpson(|r: T| cutoff(r).powf(q) * r.powf(e - q * m), one, two, PANELS);
        Self {
            m,
            mass2: omega * (one / (n - two * m) + mass_tail),
            kinetic: omega * (m * m / (n - two * m - two) + kin_tail),
            lq: omega * (one / (n - q * m) + lq_tail),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestFunctionBound<T> {
    /// Minimum over the supplied dilation grid.
    pub bound: T,
    pub s_at_min: T,
    pub m: T,
    pub theta: T,
    /// Least-squares slope of `ln ∫|u|^{r1}|s⋆v|^{r2}` on `s ∈ [−8, −4]`.
    pub theta_fit: T,
    /// `E_p(u)` of the scalar profile on its grid (the `s → −∞` limit in the mixed regime).
    pub scalar_energy: T,
    /// `(s, value)` for every grid point.
    pub values: Vec<(T, T)>,
}

/// Evenly spaced dilation parameters.
pub fn linspace<T: Real>(a: T, b: T, n: usize) -> Vec<T> {
    if n < 2 {
        return vec![a];
    }
    (0..n).map(|i| a + (b - a) * from_usize::<T>(i) / from_usize::<T>(n - 1)).collect()
}

/// Evaluates the test-function energy on `s_grid` and returns its minimum.
pub fn singular_testfunction_bound<T: Real>(params: &ProblemParams<T>, s_grid: &[T]) -> Result<TestFunctionBound<T>> {
    let reg = derive_regime(params)?;
    let (lo, hi) = exponent_window(params.dim, params.r2)?;
    let m = (lo + hi) / lit(2.0);
    singular_bound_with_exponent(params, s_grid, m, reg.regime)
}

/// As [`singular_testfunction_bound`] with an explicit exponent `m`.
pub fn singular_bound_with_exponent<T: Real>(
    params: &ProblemParams<T>,
    s_grid: &[T],
    m: T,
    regime: Regime,
) -> Result<TestFunctionBound<T>> {
    if regime == Regime::Other {
        return Err(Error::Unsupported("test-function bound needs the mixed or supercritical regime".into()));
    }
    if s_grid.is_empty() {
        return Err(Error::InvalidParams("empty dilation grid".into()));
    }
    let (lo, hi) = exponent_window(params.dim, params.r2)?;
    if !(m > lo && m < hi) {
        return Err(Error::InvalidParams(format!("m = {m} outside ({lo}, {hi})")));
    }
    let dim = params.dim;
    let grid = RadialGrid::default_for(dim)?;
    let gs = solve_unit_scalar(dim, params.p, &grid)?;
    let sol = normalized_scalar(&gs, params.mu1, params.a1)?;
    let u = sol.u;
    let prof = SingularProfile::new(dim, m, params.q);
    let c = params.a2 / prof.mass2.sqrt();
    let n = from_usize::<T>(dim);
    let two = lit::<T>(2.0);
    let gq = params.gamma(params.q);
    let q_exp = if params.q_is_critical() { params.q } else { params.q * gq };
    let kin_u = u.kinetic();
    let lp_u = u.lp_integral(params.p);
    let ur1: Vec<T> = u.values().iter().map(|&x| x.abs().powf(params.r1)).collect();
    let weights = u.grid().weights();
    let nodes = u.grid().nodes();
    // ∫|u|^{r1}|s⋆v|^{r2}
    let coupling = |s: T| -> T {
        let amp = (n * s / two).exp() * c;
        let es = s.exp();
        let mut acc = T::zero();
        for i in 1..nodes.len() {
            let x = es * nodes[i];
            let phi = cutoff(x);
            if phi == T::zero() {
                break;
            }
            let v = amp * phi * x.powf(-m);
            acc += weights[i] * ur1[i] * v.powf(params.r2);
        }
        acc
    };
    let kin_v = c * c * prof.kinetic;
    let lq_v = c.powf(params.q) * prof.lq;
    let scalar_energy = kin_u / two - params.mu1 / params.p * lp_u;
    let value = |s: T| -> Result<T> {
        let kv = kin_v * (two * s).exp();
        let qv = lq_v * (q_exp * s).exp();
        let cpl = coupling(s);
        match regime {
            Regime::MixedSubSuper => Ok(scalar_energy + kv / two - params.mu2 / params.q * qv - params.beta * cpl),
            _ => {
                let map = FiberMap::from_integrals(params, kin_u + kv, lp_u, qv, cpl)?;
                let t = map.report()?.t_max.ok_or_else(|| Error::Fiber("no fiber maximum".into()))?;
                Ok(map.phi(t))
            }
        }
    };
    let mut values = Vec::with_capacity(s_grid.len());
    for &s in s_grid {
        values.push((s, value(s)?));
    }
    let (s_at_min, bound) = values
        .iter()
        .copied()
        .fold((s_grid[0], T::infinity()), |best, (s, v)| if v < best.1 { (s, v) } else { best });
    let fit_s = linspace(lit::<T>(-8.0), lit(-4.0), 41);
    let pts: Vec<(T, T)> = fit_s.iter().map(|&s| (s, coupling(s).ln())).collect();
    let theta_fit = slope(&pts);
    Ok(TestFunctionBound {
        bound,
        s_at_min,
        m,
        theta: theta(dim, m, params.r2),
        theta_fit,
        scalar_energy,
        values,
    })
}

fn slope<T: Real>(pts: &[(T, T)]) -> T {
    let k = from_usize::<T>(pts.len());
    let mx = pts.iter().map(|p| p.0).sum::<T>() / k;
    let my = pts.iter().map(|p| p.1).sum::<T>() / k;
    let sxy: T = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: T = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}
