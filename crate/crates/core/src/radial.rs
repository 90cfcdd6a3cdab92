//! Radial functions on a uniform grid over `[0, R_max]` with `r^{N-1}` quadrature.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::real::{from_usize, lit, Real};

/// Default truncation radius.
pub const DEFAULT_R_MAX: f64 = 40.0;
/// Default node count.
pub const DEFAULT_NODES: usize = 4096;

/// Uniform radial grid `r_i = i h`, `i = 0..n`, with precomputed quadrature data.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid<T> {
    dim: usize,
    r_max: T,
    spacing: T,
    sphere_area: T,
    nodes: Vec<T>,
    weights: Vec<T>,
    stiffness: Vec<T>,
}

/// `Γ(k/2)` for a positive integer `k`.
pub fn gamma_half<T: Real>(k: usize) -> T {
    assert!(k > 0);
    let (mut acc, mut x) = if k % 2 == 0 {
        (T::one(), T::one())
    } else {
        (T::PI().sqrt(), lit(0.5))
    };
    let target = lit::<T>(k as f64 / 2.0);
    while x < target - lit(0.25) {
        acc *= x;
        x += T::one();
    }
    acc
}

/// Surface measure `2π^{N/2}/Γ(N/2)` of the unit sphere in `R^N`.
pub fn sphere_area<T: Real>(dim: usize) -> T {
    lit::<T>(2.0) * T::PI().powf(lit::<T>(dim as f64 / 2.0)) / gamma_half(dim)
}

impl<T: Real> RadialGrid<T> {
    pub const MIN_NODES: usize = 16;

    pub fn new(dim: usize, r_max: T, n: usize) -> Result<Arc<Self>> {
        if dim < 3 {
            return Err(Error::InvalidGrid(format!("dimension {dim} < 3")));
        }
        if n < Self::MIN_NODES {
            return Err(Error::InvalidGrid(format!(
                "need at least {} nodes, got {n}",
                Self::MIN_NODES
            )));
        }
        if !(r_max > T::zero()) || !r_max.is_finite() {
            return Err(Error::InvalidGrid("R_max must be positive".into()));
        }
        let h = r_max / from_usize(n - 1);
        let omega = sphere_area::<T>(dim);
        let pow = (dim - 1) as i32;
        let nodes: Vec<T> = (0..n).map(|i| from_usize::<T>(i) * h).collect();
        let mut weights: Vec<T> = nodes.iter().map(|&r| omega * h * r.powi(pow)).collect();
        weights[n - 1] *= lit(0.5);
        let stiffness = (0..n - 1)
            .map(|i| {
                let mid = (from_usize::<T>(i) + lit(0.5)) * h;
                omega * mid.powi(pow) / h
            })
            .collect();
        Ok(Arc::new(Self {
            dim,
            r_max,
            spacing: h,
            sphere_area: omega,
            nodes,
            weights,
            stiffness,
        }))
    }

    /// Grid with the default truncation radius and node count.
    pub fn default_for(dim: usize) -> Result<Arc<Self>> {
        Self::new(dim, lit(DEFAULT_R_MAX), DEFAULT_NODES)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn len(&self) -> usize {
        self.nodes.len()
    }
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
    pub fn r_max(&self) -> T {
        self.r_max
    }
    pub fn spacing(&self) -> T {
        self.spacing
    }
    pub fn sphere_area(&self) -> T {
        self.sphere_area
    }
    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }
    /// Trapezoid weights including the sphere area: `∫ f ≈ Σ W_i f(r_i)`.
    pub fn weights(&self) -> &[T] {
        &self.weights
    }
    /// Midpoint stiffness `ω r_{i+1/2}^{N-1}/h`, so that `|∇f|² ≈ Σ ρ_i (f_{i+1} − f_i)²`.
    pub fn stiffness(&self) -> &[T] {
        &self.stiffness
    }

    /// Same dimension, radius and node count.
    pub fn same_as(&self, other: &Self) -> bool {
        std::ptr::eq(self, other)
            || (self.dim == other.dim && self.r_max == other.r_max && self.len() == other.len())
    }
}

/// Radial function sampled at the grid nodes; the last node is pinned to zero.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialField<T> {
    grid: Arc<RadialGrid<T>>,
    values: Vec<T>,
}

impl<T: Real> RadialField<T> {
    pub fn new(grid: Arc<RadialGrid<T>>, mut values: Vec<T>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "{} samples for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if let Some(last) = values.last_mut() {
            *last = T::zero();
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Arc<RadialGrid<T>>) -> Self {
        let values = vec![T::zero(); grid.len()];
        Self { grid, values }
    }

    pub fn from_fn(grid: Arc<RadialGrid<T>>, f: impl Fn(T) -> T) -> Self {
        let values = grid.nodes().iter().map(|&r| f(r)).collect();
        Self::new(grid, values).expect("length matches grid")
    }

    pub fn grid(&self) -> &Arc<RadialGrid<T>> {
        &self.grid
    }
    pub fn values(&self) -> &[T] {
        &self.values
    }
    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn scaled(&self, c: T) -> Self {
        let values = self.values.iter().map(|&x| x * c).collect();
        Self { grid: self.grid.clone(), values }
    }

    /// `s⋆f` represented exactly on the grid scaled by `e^{−s}`, without interpolation.
    pub fn rescaled(&self, s: T) -> Result<Self> {
        let g = &self.grid;
        let grid = RadialGrid::new(g.dim(), g.r_max() * (-s).exp(), g.len())?;
        let amp = (from_usize::<T>(g.dim()) * s / lit(2.0)).exp();
        let values = self.values.iter().map(|&x| amp * x).collect();
        Ok(Self { grid, values })
    }

    /// `|f|₂²`.
    pub fn mass_squared(&self) -> T {
        self.lp_integral(lit(2.0))
    }

    /// `|f|₂`.
    pub fn mass(&self) -> T {
        self.mass_squared().sqrt()
    }

    /// `|∇f|₂²` from first differences at cell midpoints.
    pub fn kinetic(&self) -> T {
        kinetic(&self.grid, &self.values)
    }

    /// `|f|_s^s`.
    pub fn lp_integral(&self, s: T) -> T {
        lp_integral(&self.grid, &self.values, s)
    }

    /// `|f|_s`.
    pub fn lp_norm(&self, s: T) -> T {
        self.lp_integral(s).powf(T::one() / s)
    }

    /// Smallest node radius enclosing the fraction `frac` of the mass.
    pub fn core_radius(&self, frac: T) -> T {
        let w = self.grid.weights();
        let total = self.mass_squared();
        if total == T::zero() {
            return T::zero();
        }
        let mut acc = T::zero();
        for (i, (&x, &wi)) in self.values.iter().zip(w).enumerate() {
            acc += wi * x * x;
            if acc >= frac * total {
                return self.grid.nodes()[i];
            }
        }
        self.grid.r_max()
    }

    /// Whether `s⋆f` pushes the bulk of the mass (99.9%) beyond `R_max`.
    pub fn escapes_grid(&self, s: T) -> bool {
        (-s).exp() * self.core_radius(lit(0.999)) > self.grid.r_max()
    }

    /// Piecewise-cubic interpolant, even across `r = 0` and zero beyond `R_max`.
    pub fn sample(&self, r: T) -> T {
        interpolate(&self.values, self.grid.spacing(), r)
    }

    /// Mass-preserving dilation `(s⋆f)(r) = e^{Ns/2} f(e^s r)`, renormalized exactly.
    pub fn dilate(&self, s: T) -> Self {
        if s == T::zero() {
            return self.clone();
        }
        if self.escapes_grid(s) {
            log::warn!(
                "dilation by s = {s} moves the profile core beyond R_max = {}",
                self.grid.r_max()
            );
        }
        let amp = (from_usize::<T>(self.grid.dim()) * s / lit(2.0)).exp();
        let scale = s.exp();
        let values = self
            .grid
            .nodes()
            .iter()
            .map(|&r| amp * self.sample(scale * r))
            .collect();
        let out = Self::new(self.grid.clone(), values).expect("length matches grid");
        let target = self.mass();
        out.normalize_mass(target).unwrap_or(out)
    }

    /// Rescales to `|f|₂ = a`.
    pub fn normalize_mass(&self, a: T) -> Result<Self> {
        let m = self.mass();
        if m == T::zero() {
            return Err(Error::ZeroField);
        }
        if m == a {
            return Ok(self.clone());
        }
        Ok(self.scaled(a / m))
    }
}

/// `Σ ρ_i (f_{i+1} − f_i)²` over the grid.
pub fn kinetic<T: Real>(grid: &RadialGrid<T>, f: &[T]) -> T {
    grid.stiffness()
        .iter()
        .zip(f.windows(2))
        .map(|(&rho, w)| {
            let d = w[1] - w[0];
            rho * d * d
        })
        .sum()
}

/// `Σ W_i |f_i|^s`.
pub fn lp_integral<T: Real>(grid: &RadialGrid<T>, f: &[T], s: T) -> T {
    let two = lit::<T>(2.0);
    grid.weights()
        .iter()
        .zip(f)
        .map(|(&w, &x)| {
            if s == two {
                w * x * x
            } else {
                w * x.abs().powf(s)
            }
        })
        .sum()
}

/// `Σ W_i |u_i|^{r1} |v_i|^{r2}`.
pub fn coupling<T: Real>(grid: &RadialGrid<T>, u: &[T], v: &[T], r1: T, r2: T) -> T {
    grid.weights()
        .iter()
        .zip(u.iter().zip(v))
        .map(|(&w, (&a, &b))| {
            if a == T::zero() || b == T::zero() {
                T::zero()
            } else {
                w * a.abs().powf(r1) * b.abs().powf(r2)
            }
        })
        .sum()
}

fn interpolate<T: Real>(values: &[T], h: T, r: T) -> T {
    let n = values.len() as isize;
    let x = r.abs() / h;
    if x >= from_usize::<T>(values.len() - 1) {
        return T::zero();
    }
    let k = x.floor();
    let t = x - k;
    let k = k.to_isize().unwrap_or(n);
    let at = |j: isize| -> T {
        let j = j.abs();
        if j >= n {
            T::zero()
        } else {
            values[j as usize]
        }
    };
    let one = T::one();
    let two = lit::<T>(2.0);
    let six = lit::<T>(6.0);
    let wm = -t * (t - one) * (t - two) / six;
    let w0 = (t + one) * (t - one) * (t - two) / two;
    let w1 = -(t + one) * t * (t - two) / two;
    let w2 = (t + one) * t * (t - one) / six;
    wm * at(k - 1) + w0 * at(k) + w1 * at(k + 1) + w2 * at(k + 2)
}

/// Pair `(u, v)` on a shared grid.
#[derive(Debug, Clone, PartialEq)]
pub struct StatePair<T> {
    pub u: RadialField<T>,
    pub v: RadialField<T>,
}

impl<T: Real> StatePair<T> {
    pub fn new(u: RadialField<T>, v: RadialField<T>) -> Result<Self> {
        if !u.grid().same_as(v.grid()) {
            return Err(Error::GridMismatch);
        }
        Ok(Self { u, v })
    }

    pub fn grid(&self) -> &Arc<RadialGrid<T>> {
        self.u.grid()
    }

    /// `∫|u|^{r1}|v|^{r2}`.
    pub fn coupling_integral(&self, r1: T, r2: T) -> T {
        coupling(self.u.grid(), self.u.values(), self.v.values(), r1, r2)
    }

    pub fn kinetic(&self) -> T {
        self.u.kinetic() + self.v.kinetic()
    }

    pub fn dilate(&self, s: T) -> Self {
        Self { u: self.u.dilate(s), v: self.v.dilate(s) }
    }

    pub fn normalize(&self, a1: T, a2: T) -> Result<Self> {
        Ok(Self { u: self.u.normalize_mass(a1)?, v: self.v.normalize_mass(a2)? })
    }
}
