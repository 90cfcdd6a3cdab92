//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.
//!
//! `cargo test --test acceptance` (add `-- 5` to run a single criterion).

mod common;

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::{check_case, dense_count, CASES};
use normground::fiber::{pohozaev, FiberMap};
use normground::io::to_json;
use normground::landscape::{analyze, effective_threshold, PointKind};
use normground::params::{compute_thresholds, gamma};
use normground::radial::{RadialField, RadialGrid, StatePair};
use normground::scalar::{gn_constant, normalized_scalar, scalar_level, sobolev_constant, sobolev_level, solve_unit_scalar};
use normground::solver::testfn::{linspace, singular_testfunction_bound};
use normground::solver::{solve, solve_with, Context, GridSpec, SolverConfig};
use normground::{GroundState, Params};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::function::beta::beta;
use statrs::function::gamma::gamma as gamma_fn;

const REL_SCALAR: f64 = 1e-4;
const REL_LEVEL: f64 = 1e-4;
const REL_SOBOLEV: f64 = 1e-5;
const REL_FIBER_CLOSED: f64 = 1e-6;
const REL_FIBER_DILATE: f64 = 1e-3;
const LANDSCAPE_DRAWS: usize = 1000;
const LANDSCAPE_SAMPLES: usize = 1_000_000;
const ROOT_TOL: f64 = 1e-10;
const REL_POHOZAEV: f64 = 1e-4;
const THETA_FIT: f64 = 0.05;
const SCALAR_TIME: Duration = Duration::from_secs(2);
const MIXED_TIME: Duration = Duration::from_secs(60);
const SUPER_TIME: Duration = Duration::from_secs(120);

type Outcome = (bool, String);

fn mixed(a1: f64, a2: f64) -> Params {
    Params { dim: 3, p: 2.5, q: 4.0, r1: 1.5, r2: 1.5, mu1: 1.0, mu2: 1.0, beta: 1.0, a1, a2 }
}

fn supercritical(beta: f64) -> Params {
    Params { p: 4.0, q: 4.0, r1: 1.9, r2: 1.9, beta, a1: 2.5, a2: 2.5, ..mixed(2.5, 2.5) }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn c1_scalar() -> Outcome {
    let t = Instant::now();
    let grid = RadialGrid::default_for(3).unwrap();
    let gs = solve_unit_scalar(3, 4.0, &grid).unwrap();
    let elapsed = t.elapsed();
    let g = gamma(3, 4.0);
    let poho = rel(gs.w_kinetic, g * gs.w_lp);
    let w = &gs.w;
    let gn = rel(w.lp_norm(4.0), gn_constant(&gs) * w.kinetic().sqrt().powf(g) * w.mass().powf(1.0 - g));
    // the constant again from the mass alone
    let m2 = gs.w_mass * gs.w_mass;
    let cp = (m2 / (1.0 - g)).powf(-1.0) * g.powf(-2.0 * g) * (1.0 - g).powf(-2.0 * (1.0 - g));
    let weinstein = rel(cp.powf(0.25), gs.c_np);
    let ok = poho < REL_SCALAR && gn < REL_SCALAR && weinstein < REL_SCALAR && elapsed < SCALAR_TIME;
    (ok, format!("pohozaev {poho:.1e}, GN {gn:.1e}, mass route {weinstein:.1e}, {elapsed:.2?}"))
}

fn c2_levels() -> Outcome {
    let grid = RadialGrid::default_for(3).unwrap();
    let mut worst = 0.0f64;
    let mut decreasing = true;
    for p in [2.5, 4.0] {
        let gs = solve_unit_scalar(3, p, &grid).unwrap();
        for mu in [0.5, 1.0, 2.0] {
            let mut prev = f64::INFINITY;
            for a in [0.5, 1.0, 2.0] {
                let sol = normalized_scalar(&gs, mu, a).unwrap();
                let lvl = scalar_level(&gs, mu, a);
                worst = worst.max(rel(sol.energy, lvl));
                decreasing &= sol.energy < prev && lvl < prev;
                prev = lvl.min(sol.energy);
            }
        }
    }
    (worst < REL_LEVEL && decreasing, format!("worst rel err {worst:.1e}, decreasing in a: {decreasing}"))
}

fn c3_sobolev() -> Outcome {
    let mut worst = 0.0f64;
    let mut level = 0.0f64;
    for dim in [3usize, 4, 5] {
        let n = dim as f64;
        let k = n * (n - 2.0);
        let omega = 2.0 * PI.powf(n / 2.0) / gamma_fn(n / 2.0);
        let kin = omega * (n - 2.0).powi(2) / (k * k) * k.powf((n + 2.0) / 2.0) * 0.5 * beta((n + 2.0) / 2.0, (n - 2.0) / 2.0);
        let crit = omega * k.powf(n / 2.0) * 0.5 * beta(n / 2.0, n / 2.0);
        let oracle = kin / crit.powf((n - 2.0) / n);
        let s: f64 = sobolev_constant(dim);
        worst = worst.max(rel(s, oracle));
        for mu in [0.5f64, 1.0, 3.0] {
            let expect = mu.powf(-(n - 2.0) / 2.0) * oracle.powf(n / 2.0) / n;
            level = level.max(rel(sobolev_level(dim, mu), expect));
        }
    }
    (worst < REL_SOBOLEV && level < REL_SOBOLEV, format!("S rel err {worst:.1e}, level rel err {level:.1e}"))
}

fn c4_fiber() -> Outcome {
    let grid = RadialGrid::new(3, 30.0, 6001).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut closed, mut dilated) = (0.0f64, 0.0f64);
    for k in 0..20 {
        let prm = if k % 2 == 0 { mixed(2.0, 0.2) } else { supercritical(1.0) };
        let field = |rng: &mut ChaCha8Rng| {
            let (w, c, tail) = (rng.random_range(0.6..2.0), rng.random_range(0.0..1.5), rng.random_range(0.0..0.3));
            RadialField::from_fn(grid.clone(), move |r: f64| (-(r - c).powi(2) / (2.0 * w * w)).exp() + tail * (-r).exp())
        };
        let (u, v) = (field(&mut rng), field(&mut rng));
        let pair = StatePair::new(u, v).unwrap().normalize(prm.a1, prm.a2).unwrap();
        let map = FiberMap::new(&pair, &prm).unwrap();
        for _ in 0..3 {
            let s: f64 = rng.random_range(-0.5..0.5);
            let scale = map.dphi(s).abs().max((2.0 * s).exp() * map.kinetic);
            let exact = StatePair::new(pair.u.rescaled(s).unwrap(), pair.v.rescaled(s).unwrap()).unwrap();
            closed = closed.max((pohozaev(&exact, &prm).unwrap() - map.dphi(s)).abs() / scale);
            dilated = dilated.max((pohozaev(&pair.dilate(s), &prm).unwrap() - map.dphi(s)).abs() / scale);
        }
    }
    let ok = closed < REL_FIBER_CLOSED && dilated < REL_FIBER_DILATE;
    (ok, format!("closed form {closed:.1e}, regridded {dilated:.1e}"))
}

fn c5_landscape() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (i, case) in CASES.iter().enumerate() {
        let st = check_case(*case, LANDSCAPE_DRAWS, LANDSCAPE_SAMPLES, 500 + i as u64);
        ok &= st.violations == 0 && st.mismatches == 0 && st.draws >= LANDSCAPE_DRAWS;
        parts.push(format!("{case:?}: {} draws, {} violations, {} mismatches", st.draws, st.violations, st.mismatches));
    }
    (ok, parts.join("; "))
}

fn c6_structure() -> Outcome {
    let base = mixed(0.5, 0.5);
    let gn = Context::new(&base).unwrap().gn.unwrap();
    let sigmas: Vec<f64> = (0..60).map(|k| 10f64.powf(-3.0 + k as f64 * 0.08)).collect();
    let eff = effective_threshold(&base, gn, &sigmas).unwrap();
    let sigma = 0.5 * eff.sigma;
    let prm = base.with_masses(sigma * base.a1, sigma * base.a2);
    let th = compute_thresholds(&prm, gn).unwrap();
    let c = normground::landscape::LandscapeCoeffs::from_thresholds(&prm, &th).unwrap();
    let rep = analyze(&c).unwrap();
    let cps = &rep.critical_points;
    let pattern = cps.len() == 2
        && cps[0].kind == PointKind::Min
        && cps[0].value < 0.0
        && cps[1].kind == PointKind::Max
        && cps[1].value > 0.0
        && dense_count(&c, LANDSCAPE_SAMPLES).sign_changes == 2;
    let (r0, r1) = (rep.zeros[0], rep.zeros[1]);
    let flips = c.eval(r0 * (1.0 - ROOT_TOL)) < 0.0
        && c.eval(r0 * (1.0 + ROOT_TOL)) > 0.0
        && c.eval(r1 * (1.0 - ROOT_TOL)) > 0.0
        && c.eval(r1 * (1.0 + ROOT_TOL)) < 0.0;
    let (lo, hi) = ((r0 / 100.0).ln(), (r1 * 100.0).ln());
    let n = LANDSCAPE_SAMPLES;
    let mut sign_ok = true;
    for i in 0..n {
        let t = (lo + (hi - lo) * i as f64 / (n - 1) as f64).exp();
        if (t / r0 - 1.0).abs() < ROOT_TOL || (t / r1 - 1.0).abs() < ROOT_TOL {
            continue;
        }
        sign_ok &= (c.eval(t) > 0.0) == (t > r0 && t < r1);
    }
    let ok = rep.structure_ok && pattern && flips && sign_ok;
    (ok, format!("sigma {sigma:.4}, R0 {r0:.6}, R1 {r1:.6}, pattern {pattern}, flips {flips}, dense sign {sign_ok}"))
}

fn mixed_run() -> (GroundState, Duration) {
    let t = Instant::now();
    let res = solve(&mixed(2.0, 0.2), &SolverConfig::default()).unwrap();
    (res, t.elapsed())
}

fn c7_mixed(res: &GroundState, elapsed: Duration) -> Outcome {
    let s = &res.summary;
    let masses = (res.pair.u.mass() - 2.0).abs() < 1e-12 && (res.pair.v.mass() - 0.2).abs() < 1e-12;
    let ok = masses
        && s.converged
        && s.pohozaev_residual < REL_POHOZAEV
        && s.lambda1 > 0.0
        && s.lambda2 > 0.0
        && s.energy < 0.0
        && s.energy < s.marginals.min()
        && s.fiber_curvature > 0.0
        && elapsed < MIXED_TIME;
    let detail = format!(
        "E {:.10}, marginal min {:.6}, P {:.1e}, lambda ({:.4}, {:.4}), curvature {:.3e}, {elapsed:.2?}",
        s.energy,
        s.marginals.min(),
        s.pohozaev_residual,
        s.lambda1,
        s.lambda2,
        s.fiber_curvature
    );
    (ok, detail)
}

fn c8_testfn() -> Outcome {
    let prm = mixed(2.0, 0.2);
    let b = singular_testfunction_bound(&prm, &linspace(-12.0, 4.0, 161)).unwrap();
    let m = Context::new(&prm).unwrap().marginals.m_a1_0;
    let fit = rel(b.theta_fit, b.theta);
    let ok = b.bound < m && fit < THETA_FIT;
    (ok, format!("bound {:.6} < m(a1,0) {m:.6}, theta {:.4} fit {:.4} ({fit:.1e})", b.bound, b.theta, b.theta_fit))
}

fn c9_supercritical() -> Outcome {
    let mut ok = true;
    let mut energies = Vec::new();
    let mut parts = Vec::new();
    for beta in [0.5, 1.0, 2.0, 4.0] {
        let t = Instant::now();
        let ctx = Context::new(&supercritical(beta)).unwrap();
        let res = solve_with(&ctx, &SolverConfig::default()).unwrap();
        let elapsed = t.elapsed();
        let s = &res.summary;
        ok &= s.converged
            && s.fiber_unique_every_iterate == Some(true)
            && s.energy > 0.0
            && s.energy < s.marginals.min()
            && s.lambda1 > 0.0
            && s.lambda2 > 0.0
            && elapsed < SUPER_TIME;
        energies.push(s.energy);
        parts.push(format!("beta {beta}: E {:.6} < {:.6} ({elapsed:.1?})", s.energy, s.marginals.min()));
    }
    let monotone = energies.windows(2).all(|w| w[1] <= w[0]);
    (ok && monotone, format!("{}; non-increasing {monotone}", parts.join(", ")))
}

fn c10_dim4() -> Outcome {
    let prm = Params { dim: 4, p: 3.5, q: 3.5, r1: 1.75, r2: 1.75, mu1: 1.0, mu2: 1.0, beta: 0.5, a1: 1.0, a2: 1.0 };
    let cfg = SolverConfig { grid: GridSpec { r_max: 4.0, nodes: 8192 }, ..SolverConfig::default() };
    let res = solve(&prm, &cfg).unwrap();
    let s = &res.summary;
    let ok = res.all_checks_pass() && s.converged;
    (ok, format!("E {:.4}, marginal min {:.4}, failures {:?}", s.energy, s.marginals.min(), s.checks.failures()))
}

fn c11_determinism(first: &GroundState) -> Outcome {
    let (second, _) = mixed_run();
    let (a, b) = (to_json(&first.summary).unwrap(), to_json(&second.summary).unwrap());
    (a == b, format!("{} bytes, identical {}", a.len(), a == b))
}

fn guarded(f: impl FnOnce() -> Outcome) -> Outcome {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(o) => o,
        Err(e) => {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            (false, format!("panicked: {msg}"))
        }
    }
}

fn main() -> ExitCode {
    let only: Option<usize> = std::env::args().skip(1).find_map(|a| a.parse().ok());
    let wanted = |k: usize| only.is_none_or(|o| o == k);
    let mut mixed: Option<GroundState> = None;
    let mut failed = 0;
    for k in 1..=11 {
        if !wanted(k) {
            continue;
        }
        let t = Instant::now();
        let (ok, detail) = guarded(|| match k {
            1 => c1_scalar(),
            2 => c2_levels(),
            3 => c3_sobolev(),
            4 => c4_fiber(),
            5 => c5_landscape(),
            6 => c6_structure(),
            7 => {
                let (res, elapsed) = mixed_run();
                let out = c7_mixed(&res, elapsed);
                mixed = Some(res);
                out
            }
            11 => {
                let first = mixed.take().unwrap_or_else(|| mixed_run().0);
                c11_determinism(&first)
            }
            8 => c8_testfn(),
            9 => c9_supercritical(),
            _ => c10_dim4(),
        });
        failed += !ok as usize;
        println!("criterion {k:>2} ... {} [{:.1?}] {detail}", if ok { "PASS" } else { "FAIL" }, t.elapsed());
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
