use std::f64::consts::PI;
use std::sync::OnceLock;

use normground::params::gamma;
use normground::radial::RadialGrid;
use normground::scalar::{
    gn_constant, level_from_constant, normalized_scalar, scalar_level, sobolev_constant, sobolev_level,
    solve_unit_scalar, SobolevData,
};
use normground::ScalarState;
use statrs::function::beta::beta;
use statrs::function::gamma::gamma as gamma_fn;

/// `w(0)` for `N = 3, p = 4`, from an independent DOP853 shooting run (rtol 1e-13).
const W0_N3_P4: f64 = 4.337387679899752;
/// `C_{3,4}` from the same run.
const C_N3_P4: f64 = 0.449257015501;

fn state(dim: usize, p: f64) -> ScalarState {
    let grid = RadialGrid::default_for(dim).unwrap();
    solve_unit_scalar(dim, p, &grid).unwrap()
}

fn n3p4() -> &'static ScalarState {
    static S: OnceLock<ScalarState> = OnceLock::new();
    S.get_or_init(|| state(3, 4.0))
}

fn n3p25() -> &'static ScalarState {
    static S: OnceLock<ScalarState> = OnceLock::new();
    S.get_or_init(|| state(3, 2.5))
}

/// Fixed-step RK4 shot of `w'' + (N−1)w'/r = w − w^{p−1}`; `true` when the
/// trajectory crosses zero before turning upward.
fn rk4_shot(dim: usize, p: f64, w0: f64, h: f64, r_end: f64, mut record: Option<&mut Vec<(f64, f64)>>) -> bool {
    let n = dim as f64;
    let f = |r: f64, y: [f64; 2]| -> [f64; 2] {
        let w = y[0];
        [y[1], w - w.abs().powf(p - 2.0) * w - (n - 1.0) / r * y[1]]
    };
    // series start off the singular point
    let mut r = h;
    let c = (w0 - w0.powf(p - 1.0)) / (2.0 * n);
    let mut y = [w0 + c * r * r, 2.0 * c * r];
    while r < r_end {
        if let Some(rec) = record.as_deref_mut() {
            rec.push((r, y[0]));
        }
        let k1 = f(r, y);
        let k2 = f(r + h / 2.0, [y[0] + h / 2.0 * k1[0], y[1] + h / 2.0 * k1[1]]);
        let k3 = f(r + h / 2.0, [y[0] + h / 2.0 * k2[0], y[1] + h / 2.0 * k2[1]]);
        let k4 = f(r + h, [y[0] + h * k3[0], y[1] + h * k3[1]]);
        for i in 0..2 {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        r += h;
        if y[0] < 0.0 {
            return true;
        }
        if y[1] > 0.0 {
            return false;
        }
    }
    false
}

fn rk4_center(dim: usize, p: f64, mut lo: f64, mut hi: f64, h: f64) -> f64 {
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if rk4_shot(dim, p, mid, h, 40.0, None) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn pohozaev_and_gn_equality() {
    let gs = n3p4();
    let g = gamma(3, 4.0);
    assert!((gs.w_kinetic - g * gs.w_lp).abs() / gs.w_kinetic < 1e-4);
    let w = &gs.w;
    let lhs = w.lp_norm(4.0);
    let rhs = gn_constant(gs) * w.kinetic().sqrt().powf(g) * w.mass().powf(1.0 - g);
    assert!((lhs - rhs).abs() / lhs < 1e-4);
}

#[test]
fn profile_positive_and_decreasing() {
    for gs in [n3p4(), n3p25()] {
        let v = gs.w.values();
        let n = v.len();
        assert!(v[..n - 1].iter().all(|&x| x > 0.0));
        assert!(v.windows(2).all(|p| p[1] < p[0]), "p = {}", gs.p);
    }
}

#[test]
fn center_value_matches_oracles() {
    let gs = n3p4();
    assert!((gs.w_center - W0_N3_P4).abs() < 1e-8 * W0_N3_P4, "{}", gs.w_center);
    let rk = rk4_center(3, 4.0, 3.0, 6.0, 1e-4);
    assert!((rk - W0_N3_P4).abs() < 1e-7 * W0_N3_P4, "rk4 {rk}");
}

#[test]
fn constant_matches_pin_and_mass_route() {
    let gs = n3p4();
    assert!((gs.c_np - C_N3_P4).abs() < 1e-6 * C_N3_P4, "{}", gs.c_np);
    // From the mass alone: Pohozaev and the equation give |w|_p^p = M²/(1−γ), |∇w|² = γ|w|_p^p.
    let (p, g) = (4.0_f64, gamma(3, 4.0));
    let m2 = gs.w_mass * gs.w_mass;
    let cp = (m2 / (1.0 - g)).powf(1.0 - p / 2.0) * g.powf(-p * g / 2.0) * (1.0 - g).powf(-p * (1.0 - g) / 2.0);
    assert!((cp.powf(1.0 / p) - gs.c_np).abs() < 1e-6 * gs.c_np);
}

#[test]
fn two_brackets_give_the_same_profile() {
    // An RK4 shot from a different bracket, compared where the trajectory is still reliable.
    let gs = n3p4();
    let w0 = rk4_center(3, 4.0, 4.0, 5.0, 1e-4);
    let mut rec = Vec::new();
    rk4_shot(3, 4.0, w0, 1e-4, 8.0, Some(&mut rec));
    let worst = rec
        .iter()
        .step_by(50)
        .map(|&(r, w)| (gs.w.sample(r) - w).abs())
        .fold(0.0, f64::max);
    assert!(worst < 1e-5, "{worst:e}");
}

#[test]
fn unit_mass_fixed_point() {
    let gs = n3p4();
    let sol = normalized_scalar(gs, 1.0, gs.w_mass).unwrap();
    assert!((sol.lambda - 1.0).abs() < 1e-12);
    let diff = sol.u.values().iter().zip(gs.w.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(diff < 1e-10 * gs.w_center);
}

#[test]
fn normalized_solution_on_pohozaev_set() {
    for gs in [n3p4(), n3p25()] {
        for (mu, a) in [(0.5, 0.7), (1.0, 2.0), (2.0, 1.3)] {
            let sol = normalized_scalar(gs, mu, a).unwrap();
            assert!((sol.u.mass() - a).abs() < 1e-14 * a);
            let g = gamma(3, gs.p);
            let kin = sol.u.kinetic();
            assert!((kin - g * mu * sol.u.lp_integral(gs.p)).abs() < 1e-4 * kin);
            assert!(sol.lambda > 0.0);
            // sign of the level flips across pbar
            assert_eq!(sol.energy < 0.0, gs.p < 10.0 / 3.0);
        }
    }
}

#[test]
fn level_agrees_with_quadrature() {
    for gs in [n3p4(), n3p25()] {
        for mu in [0.5, 1.0, 2.0] {
            for a in [0.5, 1.0, 2.0] {
                let sol = normalized_scalar(gs, mu, a).unwrap();
                let lvl = scalar_level(gs, mu, a);
                assert!((sol.energy - lvl).abs() < 1e-4 * lvl.abs(), "p {} mu {mu} a {a}: {} vs {lvl}", gs.p, sol.energy);
            }
        }
    }
}

#[test]
fn level_strictly_decreasing_in_mass() {
    for gs in [n3p4(), n3p25()] {
        let levels: Vec<f64> = (1..40).map(|k| scalar_level(gs, 1.0, 0.1 * k as f64)).collect();
        assert!(levels.windows(2).all(|w| w[1] < w[0]), "p = {}", gs.p);
    }
    // p > pbar: the level blows up as the mass vanishes
    let gs = n3p4();
    assert!(scalar_level(gs, 1.0, 1e-6) > 1e10);
    let c = gs.c_np;
    assert_eq!(level_from_constant(3, 4.0, c, 1.0, 0.3), scalar_level(gs, 1.0, 0.3));
}

/// `S` of the Talenti profile from Beta integrals: with `k = N(N−2)` and
/// `∫_0^∞ t^a (1+t²)^{−b} dt = B((a+1)/2, b−(a+1)/2)/2`.
fn sobolev_beta_oracle(dim: usize) -> f64 {
    let n = dim as f64;
    let k = n * (n - 2.0);
    let omega = 2.0 * PI.powf(n / 2.0) / gamma_fn(n / 2.0);
    let kinetic = omega * (n - 2.0).powi(2) / (k * k) * k.powf((n + 2.0) / 2.0) * 0.5 * beta((n + 2.0) / 2.0, (n - 2.0) / 2.0);
    let crit = omega * k.powf(n / 2.0) * 0.5 * beta(n / 2.0, n / 2.0);
    kinetic / crit.powf((n - 2.0) / n)
}

#[test]
fn sobolev_constant_matches_beta_oracle() {
    for dim in [3, 4, 5] {
        let s: f64 = sobolev_constant(dim);
        let oracle = sobolev_beta_oracle(dim);
        assert!((s - oracle).abs() < 1e-5 * oracle, "N = {dim}: {s} vs {oracle}");
        // classical closed form πN(N−2) (Γ(N/2)/Γ(N))^{2/N}
        let n = dim as f64;
        let closed = PI * n * (n - 2.0) * (gamma_fn(n / 2.0) / gamma_fn(n)).powf(2.0 / n);
        assert!((oracle - closed).abs() < 1e-10 * closed, "N = {dim}: {oracle} vs {closed}");
    }
}

#[test]
fn sobolev_level_formula_and_monotonicity() {
    let s: f64 = sobolev_constant(3);
    let expect = s.powf(1.5) / 3.0;
    assert!((sobolev_level(3, 1.0) - expect).abs() < 1e-14 * expect);
    let sd = SobolevData::<f64>::new(4);
    assert!((sd.critical_level(2.0) - sd.s * sd.s / 4.0 / 2.0).abs() < 1e-12);
    let levels: Vec<f64> = [0.25, 0.5, 1.0, 2.0, 4.0].iter().map(|&mu| sobolev_level(3, mu)).collect();
    assert!(levels.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn rejects_exponents_outside_range() {
    let grid = RadialGrid::default_for(3).unwrap();
    assert!(solve_unit_scalar(3, 2.0, &grid).is_err());
    assert!(solve_unit_scalar(3, 6.0, &grid).is_err());
    let gs = n3p4();
    assert!(normalized_scalar(gs, 0.0, 1.0).is_err());
}
