//! Normalized ground states of the coupled system.
//!
//! Mixed regime: local minimization of `I` over pairs with kinetic norm below
//! the first zero `R₀` of the landscape function. Purely supercritical regime:
//! minimization of the fiber-maximized energy, which equals `I` restricted to
//! the Pohozaev manifold. Both finish with a Newton polish on the discrete
//! Euler–Lagrange system.

mod descent;
mod discrete;
mod newton;
pub mod sweep;
pub mod testfn;

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fiber::{FiberClass, FiberMap, FiberReport};
use crate::landscape::{analyze, LandscapeCoeffs, LandscapeReport};
use crate::params::{compute_thresholds, derive_regime, GnConstants, ProblemParams, Regime, RegimeData, ThresholdData};
use crate::radial::{RadialField, RadialGrid, StatePair, DEFAULT_NODES, DEFAULT_R_MAX};
use crate::real::{lit, Real};
use crate::scalar::{scalar_level, scaling_lambda, solve_unit_scalar, ScalarGroundState, SobolevData};

pub use discrete::Integrals;
use descent::{Descent, Mode, Stop};
use discrete::Discrete;

/// Radial grid of a system solve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub r_max: f64,
    pub nodes: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { r_max: DEFAULT_R_MAX, nodes: DEFAULT_NODES }
    }
}

/// Gaussian initial data `exp(−r²/(2w²))`, optionally dilated by `pre_dilation`.
/// Widths left unset are taken from the scalar ground states.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitialData {
    pub width_u: Option<f64>,
    pub width_v: Option<f64>,
    pub pre_dilation: f64,
    /// Relative random perturbation of both widths, drawn from the seed.
    pub jitter: f64,
}

impl Default for InitialData {
    fn default() -> Self {
        Self { width_u: None, width_v: None, pre_dilation: 0.0, jitter: 0.1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Initial step of the line search.
    pub step: f64,
    pub max_iterations: usize,
    /// Target relative Euler–Lagrange residual.
    pub tol_grad: f64,
    /// Allowed `|P| / (|∇u|₂² + |∇v|₂²)`.
    pub tol_p: f64,
    /// Residual at which descent hands over to Newton.
    pub newton_switch: f64,
    pub newton_max_iterations: usize,
    pub grid: GridSpec,
    pub init: InitialData,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            step: 1.0,
            max_iterations: 200_000,
            tol_grad: 1e-6,
            tol_p: 1e-4,
            newton_switch: 1e-3,
            newton_max_iterations: 40,
            grid: GridSpec::default(),
            init: InitialData::default(),
            seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let pos = [self.step, self.tol_grad, self.tol_p, self.newton_switch, self.grid.r_max];
        if pos.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
            return Err(Error::InvalidParams(
                "step, tolerances and r_max must be positive".into(),
            ));
        }
        if !(self.init.jitter >= 0.0 && self.init.jitter < 1.0) || !self.init.pre_dilation.is_finite() {
            return Err(Error::InvalidParams("jitter must lie in [0, 1)".into()));
        }
        for w in [self.init.width_u, self.init.width_v].into_iter().flatten() {
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::InvalidParams("Gaussian widths must be positive".into()));
            }
        }
        Ok(())
    }
}

/// `m(a₁,0)` and `m(0,a₂)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Marginals<T> {
    pub m_a1_0: T,
    pub m_0_a2: T,
}

impl<T: Real> Marginals<T> {
    pub fn min(&self) -> T {
        self.m_a1_0.min(self.m_0_a2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Checks {
    pub positivity: bool,
    pub multiplier_signs: bool,
    pub energy_ordering: bool,
    pub energy_sign: bool,
    pub pohozaev: bool,
    pub fiber_class: bool,
    pub mass: bool,
}

impl Checks {
    pub fn all(&self) -> bool {
        self.positivity
            && self.multiplier_signs
            && self.energy_ordering
            && self.energy_sign
            && self.pohozaev
            && self.fiber_class
            && self.mass
    }

    /// Names of the failed checks.
    pub fn failures(&self) -> Vec<&'static str> {
        let all = [
            ("positivity", self.positivity),
            ("multiplier_signs", self.multiplier_signs),
            ("energy_ordering", self.energy_ordering),
            ("energy_sign", self.energy_sign),
            ("pohozaev", self.pohozaev),
            ("fiber_class", self.fiber_class),
            ("mass", self.mass),
        ];
        all.iter().filter(|(_, ok)| !ok).map(|(n, _)| *n).collect()
    }
}

/// Scalar data shared by the solves of one parameter set.
#[derive(Debug, Clone)]
pub struct Context<T: Real> {
    pub params: ProblemParams<T>,
    pub regime: RegimeData<T>,
    pub scalar_grid: Arc<RadialGrid<T>>,
    pub ground_p: ScalarGroundState<T>,
    /// `None` when `q = 2*`.
    pub ground_q: Option<ScalarGroundState<T>>,
    pub sobolev: Option<SobolevData<T>>,
    pub marginals: Marginals<T>,
    pub gn: Option<GnConstants<T>>,
    pub thresholds: Option<ThresholdData<T>>,
    pub landscape: Option<(LandscapeCoeffs<T>, LandscapeReport<T>)>,
}

fn solve_cached<T: Real>(
    cache: &mut Vec<ScalarGroundState<T>>,
    dim: usize,
    s: T,
    grid: &Arc<RadialGrid<T>>,
) -> Result<ScalarGroundState<T>> {
    if let Some(gs) = cache.iter().find(|g| crate::params::cmp_exponent(g.p, s).is_eq()) {
        return Ok(gs.clone());
    }
    let gs = solve_unit_scalar(dim, s, grid)?;
    cache.push(gs.clone());
    Ok(gs)
}

fn unsupported<T: Real>(prm: &ProblemParams<T>, reg: &RegimeData<T>) -> Error {
    Error::Unsupported(format!(
        "regime Other: need 2 < p < pbar < q <= 2* (mixed) or pbar < p, q, r1+r2 < 2* \
         (supercritical), with pbar = {} and 2* = {}; got p = {}, q = {}, r1+r2 = {}",
        reg.pbar,
        reg.two_star,
        prm.p,
        prm.q,
        prm.r()
    ))
}

impl<T: Real> Context<T> {
    /// Solves the scalar problems on the default grid for `N` and assembles
    /// marginals, constants and, in the mixed regime, the landscape.
    pub fn new(params: &ProblemParams<T>) -> Result<Self> {
        let regime = derive_regime(params)?;
        if regime.regime == Regime::Other {
            return Err(unsupported(params, &regime));
        }
        let dim = params.dim;
        let scalar_grid = RadialGrid::default_for(dim)?;
        let mut cache = Vec::new();
        let ground_p = solve_cached(&mut cache, dim, params.p, &scalar_grid)?;
        let critical = params.q_is_critical();
        let ground_q = if critical {
            None
        } else {
            Some(solve_cached(&mut cache, dim, params.q, &scalar_grid)?)
        };
        let sobolev = critical.then(|| SobolevData::new(dim));
        let m_0_a2 = match (&ground_q, &sobolev) {
            (Some(gs), _) => scalar_level(gs, params.mu2, params.a2),
            (None, Some(sd)) => sd.critical_level(params.mu2),
            (None, None) => unreachable!("either a scalar state or the Sobolev data exists"),
        };
        let marginals = Marginals { m_a1_0: scalar_level(&ground_p, params.mu1, params.a1), m_0_a2 };
        let (gn, thresholds, landscape) = if regime.regime == Regime::MixedSubSuper {
            let ground_r = solve_cached(&mut cache, dim, params.r(), &scalar_grid)?;
            let c_nq = match (&ground_q, &sobolev) {
                (Some(gs), _) => gs.c_np,
                (_, Some(sd)) => sd.gn_constant(),
                _ => unreachable!(),
            };
            let gn = GnConstants { c_np: ground_p.c_np, c_nq, c_nr: ground_r.c_np };
            let th = compute_thresholds(params, gn)?;
            let coeffs = LandscapeCoeffs::from_thresholds(params, &th)?;
            let rep = analyze(&coeffs)?;
            (Some(gn), Some(th), Some((coeffs, rep)))
        } else {
            (None, None, None)
        };
        Ok(Self {
            params: *params,
            regime,
            scalar_grid,
            ground_p,
            ground_q,
            sobolev,
            marginals,
            gn,
            thresholds,
            landscape,
        })
    }

    /// First zero `R₀` of `h` when the landscape has the two-well structure.
    pub fn r0(&self) -> Option<T> {
        self.landscape.as_ref().filter(|(_, rep)| rep.structure_ok).map(|(_, rep)| rep.zeros[0])
    }

    /// Second zero `R₁` of `h` when the landscape has the two-well structure.
    pub fn r1(&self) -> Option<T> {
        self.landscape.as_ref().filter(|(_, rep)| rep.structure_ok).map(|(_, rep)| rep.zeros[1])
    }
}

/// A computed normalized ground state with its diagnostics.
#[derive(Debug, Clone)]
pub struct GroundStateResult<T: Real> {
    pub pair: StatePair<T>,
    pub summary: ResultSummary<T>,
}

/// Every scalar output of a solve; serialized next to the profile CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultSummary<T> {
    pub params: ProblemParams<T>,
    pub regime: Regime,
    pub lambda1: T,
    pub lambda2: T,
    pub energy: T,
    pub kinetic: T,
    pub pohozaev_residual: T,
    pub gradient_residual: T,
    pub fiber: FiberReport<T>,
    /// `Φ''(0)`.
    pub fiber_curvature: T,
    pub marginals: Marginals<T>,
    pub checks: Checks,
    pub converged: bool,
    pub iterations: usize,
    pub newton_iterations: usize,
    pub sobolev_critical_marginal: bool,
    pub monotone_descent: bool,
    /// Supercritical runs only.
    pub fiber_unique_every_iterate: Option<bool>,
    /// Supercritical runs only: largest relative merit change from regridded fiber projections.
    pub projection_drift: Option<T>,
    /// Mixed runs only.
    pub r0: Option<T>,
    pub seed: u64,
}

impl<T: Real> GroundStateResult<T> {
    pub fn energy(&self) -> T {
        self.summary.energy
    }

    pub fn all_checks_pass(&self) -> bool {
        self.summary.converged && self.summary.checks.all()
    }
}

/// Multipliers from testing each equation with its own component.
pub fn extract_multipliers<T: Real>(pair: &StatePair<T>, params: &ProblemParams<T>) -> (T, T) {
    let it = pair_integrals(pair, params);
    it.multipliers(params, pair.u.mass_squared(), pair.v.mass_squared())
}

pub fn pair_integrals<T: Real>(pair: &StatePair<T>, params: &ProblemParams<T>) -> Integrals<T> {
    Discrete::new(pair.grid(), params).integrals(pair.u.values(), pair.v.values())
}

/// Relative Euler–Lagrange residual `max(res_u, res_v)` with the given multipliers.
pub fn euler_lagrange_residual<T: Real>(pair: &StatePair<T>, params: &ProblemParams<T>, lambda: (T, T)) -> T {
    let disc = Discrete::new(pair.grid(), params);
    let n = disc.n();
    let (mut gu, mut gv, mut fu, mut fv) = (vec![T::zero(); n], vec![T::zero(); n], vec![T::zero(); n], vec![T::zero(); n]);
    let (u, v) = (pair.u.values(), pair.v.values());
    disc.gradient(u, v, &mut gu, &mut gv, &mut fu, &mut fv);
    let (a, b) = disc.residuals(u, v, &gu, &gv, &fu, &fv, lambda);
    a.max(b)
}

/// Recomputes every check of a stored pair from scratch.
pub fn evaluate_pair<T: Real>(
    pair: &StatePair<T>,
    params: &ProblemParams<T>,
    marginals: Marginals<T>,
    tol_p: T,
) -> Result<(Checks, ResultSummary<T>)> {
    let reg = derive_regime(params)?;
    if reg.regime == Regime::Other {
        return Err(unsupported(params, &reg));
    }
    let it = pair_integrals(pair, params);
    let (l1, l2) = it.multipliers(params, pair.u.mass_squared(), pair.v.mass_squared());
    let energy = it.energy(params);
    let kinetic = it.kinetic_u + it.kinetic_v;
    let map = FiberMap::from_integrals(params, kinetic, it.lp_u, it.lq_v, it.coupling)?;
    let p_res = map.dphi(T::zero()).abs() / kinetic.max(T::min_positive_value());
    let curvature = map.d2phi(T::zero());
    let fiber = map.report()?;
    let mass_tol = lit::<T>(1e-10);
    let mass = (pair.u.mass() - params.a1).abs() <= mass_tol * params.a1
        && (pair.v.mass() - params.a2).abs() <= mass_tol * params.a2;
    let fiber_class = match reg.regime {
        Regime::MixedSubSuper => {
            curvature > T::zero() && matches!(fiber.classification, FiberClass::PlusMinus | FiberClass::UniqueMin)
        }
        _ => fiber.classification == FiberClass::UniqueMax,
    };
    let energy_sign = match reg.regime {
        Regime::MixedSubSuper => energy < T::zero(),
        _ => energy > T::zero(),
    };
    let checks = Checks {
        positivity: positive(pair.u.values()) && positive(pair.v.values()),
        multiplier_signs: params.dim > 4 || (l1 > T::zero() && l2 > T::zero()),
        energy_ordering: energy < marginals.min(),
        energy_sign,
        pohozaev: p_res < tol_p,
        fiber_class,
        mass,
    };
    let gradient_residual = euler_lagrange_residual(pair, params, (l1, l2));
    let summary = ResultSummary {
        params: *params,
        regime: reg.regime,
        lambda1: l1,
        lambda2: l2,
        energy,
        kinetic,
        pohozaev_residual: p_res,
        gradient_residual,
        fiber,
        fiber_curvature: curvature,
        marginals,
        checks,
        converged: false,
        iterations: 0,
        newton_iterations: 0,
        sobolev_critical_marginal: params.q_is_critical(),
        monotone_descent: true,
        fiber_unique_every_iterate: None,
        projection_drift: None,
        r0: None,
        seed: 0,
    };
    Ok((checks, summary))
}

/// Nonnegative everywhere and strictly positive where `f² > 10⁻¹² max f²`.
fn positive<T: Real>(f: &[T]) -> bool {
    let peak = f.iter().fold(T::zero(), |m, &x| m.max(x * x));
    let n = f.len();
    f.iter().all(|&x| x >= T::zero())
        && f[..n - 1].iter().all(|&x| x * x <= lit::<T>(1e-12) * peak || x > T::zero())
}

fn gaussian<T: Real>(grid: &Arc<RadialGrid<T>>, width: T, mass: T) -> Result<RadialField<T>> {
    let two = lit::<T>(2.0);
    RadialField::from_fn(grid.clone(), |r| (-r * r / (two * width * width)).exp()).normalize_mass(mass)
}

/// Width of a Gaussian with roughly the spread of the scalar solution of frequency `lambda`.
fn scalar_width<T: Real>(lambda: T) -> T {
    lit::<T>(1.5) / lambda.sqrt()
}

fn initial_pair<T: Real>(ctx: &Context<T>, grid: &Arc<RadialGrid<T>>, cfg: &SolverConfig) -> Result<StatePair<T>> {
    let prm = &ctx.params;
    let h = grid.spacing();
    let clamp = |w: T| w.max(h * lit(8.0)).min(grid.r_max() / lit(6.0));
    let wu = match cfg.init.width_u {
        Some(w) => lit(w),
        None => scalar_width(scaling_lambda(&ctx.ground_p, prm.mu1, prm.a1)),
    };
    let wv = match (cfg.init.width_v, &ctx.ground_q) {
        (Some(w), _) => lit(w),
        (None, Some(gs)) if ctx.regime.regime == Regime::PurelySupercritical => {
            scalar_width(scaling_lambda(gs, prm.mu2, prm.a2))
        }
        _ => wu,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let j = cfg.init.jitter;
    let ju: f64 = 1.0 + j * rng.random_range(-1.0..=1.0);
    let jv: f64 = 1.0 + j * rng.random_range(-1.0..=1.0);
    let u = gaussian(grid, clamp(wu * lit(ju)), prm.a1)?;
    let v = gaussian(grid, clamp(wv * lit(jv)), prm.a2)?;
    let pair = StatePair::new(u, v)?;
    let s0 = lit::<T>(cfg.init.pre_dilation);
    Ok(if s0 == T::zero() { pair } else { pair.dilate(s0) })
}

/// Minimizes over `{√K < R₀}` in the mixed regime.
pub fn solve_mixed<T: Real>(params: &ProblemParams<T>, config: &SolverConfig) -> Result<GroundStateResult<T>> {
    let ctx = Context::new(params)?;
    solve_mixed_with(&ctx, config)
}

/// Minimizes the fiber-maximized energy in the purely supercritical regime.
pub fn solve_supercritical<T: Real>(params: &ProblemParams<T>, config: &SolverConfig) -> Result<GroundStateResult<T>> {
    let ctx = Context::new(params)?;
    solve_supercritical_with(&ctx, config)
}

/// Dispatches on the regime.
pub fn solve<T: Real>(params: &ProblemParams<T>, config: &SolverConfig) -> Result<GroundStateResult<T>> {
    let ctx = Context::new(params)?;
    solve_with(&ctx, config)
}

pub fn solve_with<T: Real>(ctx: &Context<T>, config: &SolverConfig) -> Result<GroundStateResult<T>> {
    match ctx.regime.regime {
        Regime::MixedSubSuper => solve_mixed_with(ctx, config),
        Regime::PurelySupercritical => solve_supercritical_with(ctx, config),
        Regime::Other => Err(unsupported(&ctx.params, &ctx.regime)),
    }
}

pub fn solve_mixed_with<T: Real>(ctx: &Context<T>, config: &SolverConfig) -> Result<GroundStateResult<T>> {
    config.validate()?;
    if ctx.regime.regime != Regime::MixedSubSuper {
        return Err(Error::Unsupported("solve_mixed requires 2 < p < pbar < q <= 2*".into()));
    }
    let r0 = ctx.r0().ok_or_else(|| {
        Error::Landscape(
            "h lacks the two-well structure: the masses exceed the effective threshold".into(),
        )
    })?;
    let r1 = ctx.r1().expect("structure implies two zeros");
    let grid = RadialGrid::new(ctx.params.dim, lit(config.grid.r_max), config.grid.nodes)?;
    let mut pair = initial_pair(ctx, &grid, config)?;
    // Shrink the kinetic norm until the start lies well inside the ball and has negative energy.
    let prm = &ctx.params;
    for _ in 0..80 {
        let it = pair_integrals(&pair, prm);
        let kin = (it.kinetic_u + it.kinetic_v).sqrt();
        if kin < lit::<T>(0.9) * r0 && it.energy(prm) < T::zero() {
            break;
        }
        pair = pair.dilate(lit(-0.25));
    }
    let out = run(ctx, &grid, pair, Mode::Mixed { r0 }, config)?;
    if out.pair.kinetic().sqrt() > r1 {
        return Err(Error::EscapedBall(format!(
            "kinetic norm {} exceeds R1 = {}",
            out.pair.kinetic().sqrt(),
            r1
        )));
    }
    let mut res = out;
    res.summary.r0 = Some(r0);
    Ok(res)
}

pub fn solve_supercritical_with<T: Real>(ctx: &Context<T>, config: &SolverConfig) -> Result<GroundStateResult<T>> {
    config.validate()?;
    if ctx.regime.regime != Regime::PurelySupercritical {
        return Err(Error::Unsupported("solve_supercritical requires pbar < p, q, r < 2*".into()));
    }
    let grid = RadialGrid::new(ctx.params.dim, lit(config.grid.r_max), config.grid.nodes)?;
    let pair = initial_pair(ctx, &grid, config)?;
    let (pair, _) = crate::fiber::project_to_pohozaev(&pair, &ctx.params, crate::fiber::Target::Maximizer)?;
    let pair = pair.normalize(ctx.params.a1, ctx.params.a2)?;
    run(ctx, &grid, pair, Mode::Supercritical, config)
}

fn run<T: Real>(
    ctx: &Context<T>,
    grid: &Arc<RadialGrid<T>>,
    start: StatePair<T>,
    mode: Mode<T>,
    cfg: &SolverConfig,
) -> Result<GroundStateResult<T>> {
    let prm = &ctx.params;
    let masses = (prm.a1, prm.a2);
    let disc = Discrete::new(grid, prm);
    let mut desc = Descent::new(
        disc,
        grid.clone(),
        masses,
        mode,
        start.u.into_values(),
        start.v.into_values(),
        lit(cfg.step),
    )
    .ok_or_else(|| Error::NoConvergence("initial data is not admissible".into()))?;
    let tol = lit::<T>(cfg.tol_grad);
    let switch = lit::<T>(cfg.newton_switch).max(tol);
    let mut newton_iterations = 0;
    let mut newton_done = false;
    loop {
        let target = if newton_done { tol } else { switch };
        let stop = desc.run(target, cfg.max_iterations);
        if newton_done || stop != Stop::Threshold {
            break;
        }
        newton_done = true;
        let disc = Discrete::new(grid, prm);
        let target = tol.min(lit(1e-10));
        if let Some(out) = newton::polish(&disc, &desc.u, &desc.v, masses, desc.lambda, target, cfg.newton_max_iterations) {
            newton_iterations = out.iterations;
            let mut u = out.u;
            let mut v = out.v;
            let ok = clean(&disc, &mut u, prm.a1) && clean(&disc, &mut v, prm.a2);
            let e_before = desc.merit;
            let e_after = disc.integrals(&u, &v).energy(prm);
            let slack = lit::<T>(1e-9) * e_before.abs().max(T::one());
            if ok && out.residual < desc.residual && e_after <= e_before + slack && desc.reset_to(u.clone(), v.clone()) {
                log::debug!("newton polish: residual {} after {} steps", out.residual, out.iterations);
            } else {
                log::debug!("newton polish rejected; continuing descent");
            }
        }
    }
    let u = RadialField::new(grid.clone(), desc.u.clone())?;
    let v = RadialField::new(grid.clone(), desc.v.clone())?;
    let pair = StatePair::new(u, v)?;
    let (_, mut summary) = evaluate_pair(&pair, prm, ctx.marginals, lit(cfg.tol_p))?;
    summary.converged = summary.gradient_residual <= tol;
    summary.iterations = desc.iterations;
    summary.newton_iterations = newton_iterations;
    summary.monotone_descent = desc.monotone;
    summary.fiber_unique_every_iterate = (mode == Mode::Supercritical).then_some(desc.fiber_unique);
    summary.projection_drift = (mode == Mode::Supercritical).then_some(desc.projection_drift);
    summary.seed = cfg.seed;
    Ok(GroundStateResult { pair, summary })
}

/// Minimizes `I(·, v)` over `S_{a₁}` with `v` held fixed on its own grid.
///
/// With `β = 0` the result is the scalar ground state of mass `a₁`, whatever `v` is.
pub fn relax_u_frozen_v<T: Real>(
    params: &ProblemParams<T>,
    v: &RadialField<T>,
    config: &SolverConfig,
) -> Result<(RadialField<T>, T)> {
    config.validate()?;
    params.validate()?;
    let grid = v.grid().clone();
    let h = grid.spacing();
    let width = lit::<T>(config.init.width_u.unwrap_or(1.0)).max(h * lit(8.0)).min(grid.r_max() / lit(6.0));
    let u = gaussian(&grid, width, params.a1)?;
    let v = v.normalize_mass(params.a2)?;
    let disc = Discrete::new(&grid, params);
    let mut desc = Descent::new(
        disc,
        grid.clone(),
        (params.a1, params.a2),
        Mode::Mixed { r0: T::infinity() },
        u.into_values(),
        v.into_values(),
        lit(config.step),
    )
    .ok_or_else(|| Error::NoConvergence("initial data is not admissible".into()))?;
    desc.freeze_v();
    let tol = lit::<T>(config.tol_grad);
    desc.run(tol, config.max_iterations);
    let residual = desc.residual;
    let u = std::mem::take(&mut desc.u);
    drop(desc);
    Ok((RadialField::new(grid, u)?, residual))
}

/// Absolute values and exact mass after a Newton step.
fn clean<T: Real>(disc: &Discrete<'_, T>, x: &mut [T], a: T) -> bool {
    if x.iter().any(|v| !v.is_finite()) {
        return false;
    }
    for xi in x.iter_mut() {
        *xi = xi.abs();
    }
    let m = disc.mass2(x).sqrt();
    if !(m > T::zero()) {
        return false;
    }
    let s = a / m;
    x.iter_mut().for_each(|xi| *xi *= s);
    true
}
