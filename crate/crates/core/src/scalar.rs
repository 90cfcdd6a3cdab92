//! Single-equation theory: the unit ground state `−Δw + w = w^{p−1}`, its
//! Gagliardo–Nirenberg constant, the normalized solutions obtained by scaling,
//! their levels, and the Sobolev-critical level.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode::{DormandPrince, State};
use crate::params::{cmp_exponent, gamma, two_star};
use crate::radial::{sphere_area, RadialField, RadialGrid};
use crate::real::{floor_tol, from_usize, lit, Real};

/// Knobs of the shooting solver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShootingConfig {
    /// Relative width of the final bracket on `w(0)`.
    pub w0_rtol: f64,
    pub max_bisections: usize,
    /// Step cap; `None` means `R_max / 1e5`.
    pub max_step: Option<f64>,
    /// Relative agreement required between the two bracketing trajectories.
    pub agree_tol: f64,
    /// Extra length added beyond the matching radius for the inward tail solve.
    pub tail_length: f64,
}

impl Default for ShootingConfig {
    fn default() -> Self {
        Self {
            w0_rtol: 1e-12,
            max_bisections: 200,
            max_step: None,
            agree_tol: 1e-9,
            tail_length: 25.0,
        }
    }
}

/// Positive radial solution of `−Δw + w = w^{p−1}` and its derived constants.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarGroundState<T> {
    pub w: RadialField<T>,
    pub p: T,
    /// Best constant `C_{N,p}`.
    pub c_np: T,
    /// `|w|₂`.
    pub w_mass: T,
    /// `|∇w|₂²`.
    pub w_kinetic: T,
    /// `|w|_p^p`.
    pub w_lp: T,
    /// Shooting value `w(0)`.
    pub w_center: T,
    /// Radius where the outward shot hands over to the inward tail solve.
    pub match_radius: T,
}

/// `u = (λ/μ)^{1/(p−2)} w(√λ ·)` with `|u|₂ = a`.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedScalarSolution<T> {
    pub u: RadialField<T>,
    pub lambda: T,
    pub p: T,
    pub mu: T,
    pub a: T,
    /// `E_{p,μ}(u)` by quadrature.
    pub energy: T,
}

/// Best Sobolev constant and the critical level built from it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SobolevData<T> {
    pub dim: usize,
    pub s: T,
}

impl<T: Real> SobolevData<T> {
    pub fn new(dim: usize) -> Self {
        Self { dim, s: sobolev_constant(dim) }
    }

    /// `(1/N) μ^{−(N−2)/2} S^{N/2}`.
    pub fn critical_level(&self, mu: T) -> T {
        let n = from_usize::<T>(self.dim);
        mu.powf(-(n - lit(2.0)) / lit(2.0)) * self.s.powf(n / lit(2.0)) / n
    }

    /// Gagliardo–Nirenberg constant at `2*`, i.e. `S^{−1/2}`.
    pub fn gn_constant(&self) -> T {
        self.s.powf(lit(-0.5))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Fate {
    /// Crossed zero.
    Over,
    /// Turned upward before reaching zero.
    Under,
    Undecided,
}

struct Shooter<T> {
    dim: T,
    p: T,
    stepper: DormandPrince<T>,
    r_start: T,
    r_end: T,
}

impl<T: Real> Shooter<T> {
    fn rhs(&self) -> impl Fn(T, State<T>) -> State<T> + '_ {
        move |r: T, y: State<T>| {
            let w = y[0];
            let nl = if w == T::zero() {
                T::zero()
            } else {
                w.abs().powf(self.p - lit(2.0)) * w
            };
            [y[1], w - nl - (self.dim - T::one()) / r * y[1]]
        }
    }

    /// Series expansion `w ≈ w0 + c r²` at the start radius.
    fn initial(&self, w0: T) -> State<T> {
        let c = (w0 - w0.powf(self.p - T::one())) / (lit::<T>(2.0) * self.dim);
        let r = self.r_start;
        [w0 + c * r * r, lit::<T>(2.0) * c * r]
    }

    fn classify(y: State<T>) -> Option<Fate> {
        if y[0] < T::zero() {
            Some(Fate::Over)
        } else if y[1] > T::zero() {
            Some(Fate::Under)
        } else {
            None
        }
    }

    fn fate(&self, w0: T) -> Fate {
        let f = self.rhs();
        let mut r = self.r_start;
        let mut y = self.initial(w0);
        let mut h = self.stepper.max_step;
        while r < self.r_end {
            let out = self.stepper.attempt(&f, r, y, h);
            if out.err <= T::one() {
                r += h;
                y = out.y;
                if let Some(fate) = Self::classify(y) {
                    return fate;
                }
            }
            h = self.stepper.propose(h, out.err);
        }
        Fate::Undecided
    }

    /// Trajectory at the grid nodes until it is classified or leaves the grid.
    fn record(&self, w0: T, nodes: &[T]) -> Vec<State<T>> {
        let f = self.rhs();
        let mut out = vec![[w0, T::zero()]];
        let mut r = self.r_start;
        let mut y = self.initial(w0);
        let mut h = self.stepper.max_step;
        for &target in &nodes[1..] {
            y = self.stepper.advance(&f, r, y, target, &mut h);
            r = target;
            out.push(y);
            if Self::classify(y).is_some() {
                break;
            }
        }
        out
    }
}

/// Decaying profile `r^{−(N−1)/2} e^{−r}(1 + (4ν²−1)/(8r))`, `ν = (N−2)/2`, and its log-derivative.
fn tail_shape<T: Real>(dim: T, r: T) -> (T, T) {
    let nu = (dim - lit(2.0)) / lit(2.0);
    let c = (lit::<T>(4.0) * nu * nu - T::one()) / lit(8.0);
    let half = (dim - T::one()) / lit(2.0);
    let k = r.powf(-half) * (-r).exp() * (T::one() + c / r);
    let dlog = -half / r - T::one() - c / (r * r + c * r);
    (k, dlog)
}

/// Solves the unit-coefficient ground state with default shooting settings.
pub fn solve_unit_scalar<T: Real>(
    dim: usize,
    p: T,
    grid: &Arc<RadialGrid<T>>,
) -> Result<ScalarGroundState<T>> {
    solve_unit_scalar_with(dim, p, grid, &ShootingConfig::default())
}

/// Shooting on `w(0)` followed by an inward solve of the exponentially small tail.
pub fn solve_unit_scalar_with<T: Real>(
    dim: usize,
    p: T,
    grid: &Arc<RadialGrid<T>>,
    cfg: &ShootingConfig,
) -> Result<ScalarGroundState<T>> {
    let crit = two_star::<T>(dim);
    if grid.dim() != dim {
        return Err(Error::InvalidGrid("grid dimension differs from N".into()));
    }
    if !(p > lit(2.0)) || !cmp_exponent(p, crit).is_lt() {
        return Err(Error::BracketNotFound(format!(
            "p = {p} outside (2, 2*) with 2* = {crit}"
        )));
    }
    let n = from_usize::<T>(dim);
    let max_step = cfg
        .max_step
        .map(lit::<T>)
        .unwrap_or_else(|| grid.r_max() / lit(1e5));
    let stepper = DormandPrince {
        rtol: floor_tol(1e-12),
        atol: floor_tol(1e-14),
        max_step,
    };
    let r_start = lit::<T>(1e-4).min(grid.spacing() / lit(4.0));
    let r_end = grid.r_max().max(lit(60.0)) + lit(cfg.tail_length);
    let sh = Shooter { dim: n, p, stepper, r_start, r_end };

    // Below (p/2)^{1/(p−2)} the energy w'²/2 + w^p/p − w²/2 starts nonpositive, so zero is never reached.
    let mut lo = (p / lit(2.0)).powf(T::one() / (p - lit(2.0)));
    let mut hi = lo * lit(2.0);
    let mut tries = 0;
    loop {
        match sh.fate(hi) {
            Fate::Over => break,
            Fate::Under => {
                lo = hi;
                hi = hi * lit(2.0);
            }
            Fate::Undecided => break,
        }
        tries += 1;
        if tries > 60 {
            return Err(Error::BracketNotFound(format!(
                "no overshooting center value found up to {hi}"
            )));
        }
    }
    let tol = floor_tol::<T>(cfg.w0_rtol);
    let mut steps = 0usize;
    while (hi - lo) > tol * hi {
        let mid = lo + (hi - lo) / lit(2.0);
        if mid <= lo || mid >= hi {
            break;
        }
        match sh.fate(mid) {
            Fate::Over => hi = mid,
            Fate::Under => lo = mid,
            Fate::Undecided => {
                lo = mid;
                hi = mid;
                break;
            }
        }
        steps += 1;
        if steps > cfg.max_bisections {
            return Err(Error::NoConvergence(format!(
                "shooting bracket [{lo}, {hi}] after {steps} bisections"
            )));
        }
    }

    let nodes = grid.nodes();
    let traj_lo = sh.record(lo, nodes);
    let traj_hi = sh.record(hi, nodes);
    let agree = floor_tol::<T>(cfg.agree_tol);
    let common = traj_lo.len().min(traj_hi.len());
    let mut values = vec![T::zero(); grid.len()];
    let mut m = 0usize;
    for i in 0..common {
        let (a, b) = (traj_lo[i], traj_hi[i]);
        let mid = (a[0] + b[0]) / lit(2.0);
        let ok = mid > T::zero()
            && (a[0] - b[0]).abs() <= agree * mid
            && (i == 0 || (a[1] < T::zero() && b[1] < T::zero()));
        if !ok {
            break;
        }
        values[i] = mid;
        m = i;
    }
    if m < 2 {
        return Err(Error::NoConvergence(
            "bracketing trajectories separate immediately".into(),
        ));
    }
    let match_radius = nodes[m];
    if m + 1 < grid.len() {
        fill_tail(&sh, grid, &mut values, m, cfg)?;
    }
    let w_center = lo + (hi - lo) / lit(2.0);
    values[0] = w_center;
    let w = RadialField::new(grid.clone(), values)?;
    Ok(ground_state_from_profile(w, p, w_center, match_radius))
}

fn fill_tail<T: Real>(
    sh: &Shooter<T>,
    grid: &Arc<RadialGrid<T>>,
    values: &mut [T],
    m: usize,
    cfg: &ShootingConfig,
) -> Result<()> {
    let nodes = grid.nodes();
    let r_m = nodes[m];
    let target = values[m];
    let r_far = grid.r_max().max(r_m + lit(cfg.tail_length));
    let f = sh.rhs();
    let (k_far, dlog_far) = tail_shape(sh.dim, r_far);
    let (k_m, _) = tail_shape(sh.dim, r_m);
    let shoot_in = |amp: T, record: Option<&mut [T]>| -> T {
        let mut h = T::zero();
        let mut y = [amp * k_far, amp * k_far * dlog_far];
        let mut r = r_far;
        let last = grid.len() - 1;
        if r > nodes[last] {
            y = sh.stepper.advance(&f, r, y, nodes[last], &mut h);
            r = nodes[last];
        }
        match record {
            Some(out) => {
                for i in (m..last).rev() {
                    y = sh.stepper.advance(&f, r, y, nodes[i], &mut h);
                    r = nodes[i];
                    out[i] = y[0];
                }
            }
            None => {
                y = sh.stepper.advance(&f, r, y, r_m, &mut h);
            }
        }
        y[0]
    };
    let mut a0 = target / k_m;
    let mut w0 = shoot_in(a0, None);
    let mut a1 = a0 * target / w0;
    let tol = floor_tol::<T>(1e-14);
    for _ in 0..30 {
        let w1 = shoot_in(a1, None);
        if (w1 - target).abs() <= tol * target {
            break;
        }
        let denom = w1 - w0;
        let next = if denom == T::zero() {
            a1 * target / w1
        } else {
            a1 + (target - w1) * (a1 - a0) / denom
        };
        a0 = a1;
        w0 = w1;
        a1 = next;
    }
    let mut tail = values.to_vec();
    shoot_in(a1, Some(&mut tail));
    let last = values.len() - 1;
    values[(m + 1)..last].copy_from_slice(&tail[(m + 1)..last]);
    values[last] = T::zero();
    Ok(())
}

/// Packages a profile with its norms and GN constant.
pub fn ground_state_from_profile<T: Real>(
    w: RadialField<T>,
    p: T,
    w_center: T,
    match_radius: T,
) -> ScalarGroundState<T> {
    let w_mass = w.mass();
    let w_kinetic = w.kinetic();
    let w_lp = w.lp_integral(p);
    let g = gamma(w.grid().dim(), p);
    let c_np = w_lp.powf(T::one() / p)
        / (w_kinetic.powf(g / lit(2.0)) * w_mass.powf(T::one() - g));
    ScalarGroundState {
        w,
        p,
        c_np,
        w_mass,
        w_kinetic,
        w_lp,
        w_center,
        match_radius,
    }
}

/// `C_{N,p} = |w|_p / (|∇w|₂^{γ_p} |w|₂^{1−γ_p})`.
pub fn gn_constant<T: Real>(gs: &ScalarGroundState<T>) -> T {
    gs.c_np
}

/// Frequency `λ` of the normalized solution with mass `a` and coefficient `μ`.
pub fn scaling_lambda<T: Real>(gs: &ScalarGroundState<T>, mu: T, a: T) -> T {
    let dim = gs.w.grid().dim();
    let p = gs.p;
    let g = gamma(dim, p);
    let two = lit::<T>(2.0);
    (a * a / (gs.w_mass * gs.w_mass) * mu.powf(two / (p - two))).powf((p - two) / (two - p * g))
}

/// Normalized scalar solution obtained from `w` by amplitude scaling and dilation.
/// The result lives on the correspondingly rescaled grid, so no resolution is lost.
pub fn normalized_scalar<T: Real>(
    gs: &ScalarGroundState<T>,
    mu: T,
    a: T,
) -> Result<NormalizedScalarSolution<T>> {
    if !(mu > T::zero()) || !(a > T::zero()) {
        return Err(Error::InvalidParams("mu and a must be positive".into()));
    }
    let lambda = scaling_lambda(gs, mu, a);
    let s = lambda.ln() / lit(2.0);
    let u = gs.w.rescaled(s)?.normalize_mass(a)?;
    let energy = u.kinetic() / lit(2.0) - mu / gs.p * u.lp_integral(gs.p);
    Ok(NormalizedScalarSolution {
        u,
        lambda,
        p: gs.p,
        mu,
        a,
        energy,
    })
}

/// Level `(1/2 − 1/(pγ_p)) (γ_p C^p μ a^{p−pγ_p})^{2/(2−pγ_p)}` for a given constant `C = C_{N,p}`.
pub fn level_from_constant<T: Real>(dim: usize, p: T, c_np: T, mu: T, a: T) -> T {
    let g = gamma(dim, p);
    let two = lit::<T>(2.0);
    let pg = p * g;
    (T::one() / two - T::one() / pg) * (g * c_np.powf(p) * mu * a.powf(p - pg)).powf(two / (two - pg))
}

/// `m_p^μ(a)` in closed form.
pub fn scalar_level<T: Real>(gs: &ScalarGroundState<T>, mu: T, a: T) -> T {
    level_from_constant(gs.w.grid().dim(), gs.p, gs.c_np, mu, a)
}

/// Composite Simpson rule on `[a, b]` with `2k` panels.
pub(crate) fn simpson<T: Real>(f: impl Fn(T) -> T, a: T, b: T, k: usize) -> T {
    let n = 2 * k;
    let h = (b - a) / from_usize(n);
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let c: T = if i % 2 == 1 { lit(4.0) } else { lit(2.0) };
        acc += c * f(a + h * from_usize(i));
    }
    acc * h / lit(3.0)
}

/// Sobolev quotient `|∇U|₂²/|U|_{2*}²` of the Aubin–Talenti profile
/// `U = (1 + r²/(N(N−2)))^{−(N−2)/2}`, integrated after `r = √(N(N−2)) tan θ`.
pub fn sobolev_constant<T: Real>(dim: usize) -> T {
    let n = from_usize::<T>(dim);
    let two = lit::<T>(2.0);
    let c = n * (n - two);
    let omega = sphere_area::<T>(dim);
    let half_pi = T::FRAC_PI_2();
    let d = dim as i32;
    let kin_int = simpson(|t: T| t.sin().powi(d + 1) * t.cos().powi(d - 3), T::zero(), half_pi, 4096);
    let crit_int = simpson(|t: T| (t.sin() * t.cos()).powi(d - 1), T::zero(), half_pi, 4096);
    let kinetic = omega * (n - two) * (n - two) * c.powf((n - two) / two) * kin_int;
    let l2s = omega * c.powf(n / two) * crit_int;
    let crit = two * n / (n - two);
    kinetic / l2s.powf(two / crit)
}

/// `m_{2*}^μ = (1/N) μ^{−(N−2)/2} S^{N/2}`.
pub fn sobolev_level<T: Real>(dim: usize, mu: T) -> T {
    SobolevData::<T>::new(dim).critical_level(mu)
}
