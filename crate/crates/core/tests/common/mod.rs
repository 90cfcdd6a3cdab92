//! Independent dense-sampling oracle for the critical points of
//! `l(t) = a t² − b t^{e_r} − c t^{e_p} − d t^{e_q}` and the coefficient draws
//! for the four exponent cases of the mixed regime.
#![allow(dead_code)]

use normground::landscape::LandscapeCoeffs;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Exponent cases with `pγ_p < 2 < qγ_q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Case {
    /// `p ≤ r < p̄`
    RBetweenPAndPbar,
    /// `r < p < p̄`
    RBelowP,
    /// `r = p̄`, `b < a`
    RAtPbar,
    /// `r > p̄`
    RAbovePbar,
}

pub const CASES: [Case; 4] = [Case::RBetweenPAndPbar, Case::RBelowP, Case::RAtPbar, Case::RAbovePbar];

/// Minimal gap between distinct exponents of a draw.
const MIN_GAP: f64 = 0.02;

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (rng.random_range(lo.ln()..hi.ln())).exp()
}

/// One coefficient draw; exponents come from `e_s = N(s−2)/2` for drawn `s`.
pub fn draw(case: Case, rng: &mut ChaCha8Rng) -> LandscapeCoeffs<f64> {
    loop {
        let dim = if rng.random_bool(0.5) { 3 } else { 4 };
        let n = dim as f64;
        let pbar = 2.0 + 4.0 / n;
        let star = 2.0 * n / (n - 2.0);
        let e = |s: f64| n * (s - 2.0) / 2.0;
        let lo = 2.0 + 1e-3;
        let (p, r) = match case {
            Case::RBetweenPAndPbar => {
                let p = rng.random_range(lo..pbar);
                (p, rng.random_range(p..pbar))
            }
            Case::RBelowP => {
                let r = rng.random_range(lo..pbar);
                (rng.random_range(r..pbar), r)
            }
            Case::RAtPbar => (rng.random_range(lo..pbar), pbar),
            Case::RAbovePbar => (rng.random_range(lo..pbar), rng.random_range(pbar..star)),
        };
        let q = rng.random_range(pbar..=star);
        let a = 0.5;
        let b = if case == Case::RAtPbar { rng.random_range(0.0..a) } else { log_uniform(rng, 1e-3, 10.0) };
        let coeffs = LandscapeCoeffs {
            a,
            b,
            c: log_uniform(rng, 1e-3, 10.0),
            d: log_uniform(rng, 1e-3, 10.0),
            exp_r: if case == Case::RAtPbar { 2.0 } else { e(r) },
            exp_p: e(p),
            exp_q: e(q),
        };
        let mut ex = vec![coeffs.exp_p, coeffs.exp_q, coeffs.exp_r];
        if case != Case::RAtPbar {
            ex.push(2.0);
        }
        ex.sort_by(|x, y| x.partial_cmp(y).unwrap());
        if ex.windows(2).any(|w| w[1] - w[0] < MIN_GAP) {
            continue;
        }
        if let Some((x0, x1)) = window(&coeffs) {
            let emax = ex[ex.len() - 1];
            if x0.abs().max(x1.abs()) * emax < 600.0 {
                return coeffs;
            }
        }
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `t l'(t)` as terms `(k, e)` meaning `k e^{e x}` with `x = ln t`; equal exponents merged.
fn slope_terms(c: &LandscapeCoeffs<f64>) -> Vec<(f64, f64)> {
    let raw = [(2.0 * c.a, 2.0), (-c.b * c.exp_r, c.exp_r), (-c.c * c.exp_p, c.exp_p), (-c.d * c.exp_q, c.exp_q)];
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (k, e) in raw {
        if k == 0.0 {
            continue;
        }
        match out.iter_mut().find(|t| t.1 == e) {
            Some(t) => t.0 += k,
            None => out.push((k, e)),
        }
    }
    out.retain(|t| t.0 != 0.0);
    out
}

/// Interval in `x = ln t` outside which one term beats every other by a factor 4,
/// so the sign of `t l'(t)` cannot change there.
pub fn window(c: &LandscapeCoeffs<f64>) -> Option<(f64, f64)> {
    let terms = slope_terms(c);
    if terms.len() < 2 {
        return None;
    }
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..terms.len() {
        for j in i + 1..terms.len() {
            let (ki, ei) = terms[i];
            let (kj, ej) = terms[j];
            let gap = (ei - ej).abs();
            let x = (ki.abs() / kj.abs()).ln() / (ej - ei);
            let margin = 4f64.ln() / gap;
            lo = lo.min(x - margin);
            hi = hi.max(x + margin);
        }
    }
    Some((lo, hi))
}

/// Result of the dense scan.
#[derive(Debug, Clone, Copy)]
pub struct Dense {
    pub sign_changes: usize,
    /// Spacing in `x = ln t`.
    pub dx: f64,
}

/// Counts sign changes of `t l'(t)` on `samples` points spanning [`window`],
/// stepping each exponential by a constant factor.
pub fn dense_count(c: &LandscapeCoeffs<f64>, samples: usize) -> Dense {
    let terms = slope_terms(c);
    let Some((x0, x1)) = window(c) else {
        return Dense { sign_changes: 0, dx: 0.0 };
    };
    let dx = (x1 - x0) / (samples - 1) as f64;
    let mut vals: Vec<f64> = terms.iter().map(|&(k, e)| k * (e * x0).exp()).collect();
    let ratios: Vec<f64> = terms.iter().map(|&(_, e)| (e * dx).exp()).collect();
    let mut prev = 0.0f64;
    let mut changes = 0;
    for i in 0..samples {
        if i > 0 && i % 4096 == 0 {
            // refresh against drift of the running products
            let x = x0 + dx * i as f64;
            for (v, &(k, e)) in vals.iter_mut().zip(&terms) {
                *v = k * (e * x).exp();
            }
        }
        let g: f64 = vals.iter().sum();
        if g != 0.0 {
            if prev != 0.0 && (g > 0.0) != (prev > 0.0) {
                changes += 1;
            }
            prev = g;
        }
        for (v, r) in vals.iter_mut().zip(&ratios) {
            *v *= r;
        }
    }
    Dense { sign_changes: changes, dx }
}

/// Outcome of checking a batch of draws against the analyzer.
#[derive(Debug, Default, Clone, Copy)]
pub struct BatchStats {
    pub draws: usize,
    /// Draws with more than two critical points by either route.
    pub violations: usize,
    /// Draws where the routes disagree beyond the grid resolution.
    pub mismatches: usize,
    /// Draws by analyzer count: none, one, two critical points.
    pub by_count: [usize; 3],
}

/// Runs `draws` coefficient draws of `case` through the analyzer and the dense oracle.
pub fn check_case(case: Case, draws: usize, samples: usize, seed: u64) -> BatchStats {
    let mut r = rng(seed);
    let all: Vec<LandscapeCoeffs<f64>> = (0..draws).map(|_| draw(case, &mut r)).collect();
    all.par_iter()
        .map(|c| {
            let rep = normground::landscape::analyze(c);
            let dense = dense_count(c, samples);
            let (count, close_pair) = match &rep {
                Ok(rep) => {
                    let ts: Vec<f64> = rep.critical_points.iter().map(|p| p.t.ln()).collect();
                    let close = ts.windows(2).any(|w| (w[1] - w[0]).abs() < 3.0 * dense.dx);
                    (ts.len(), close)
                }
                // the analyzer refuses more than two critical points
                Err(_) => (3, false),
            };
            let violation = count > 2 || dense.sign_changes > 2;
            let mismatch = count != dense.sign_changes && !close_pair;
            let mut by_count = [0; 3];
            if count <= 2 {
                by_count[count] = 1;
            }
            BatchStats { draws: 1, violations: violation as usize, mismatches: mismatch as usize, by_count }
        })
        .reduce(BatchStats::default, |a, b| BatchStats {
            draws: a.draws + b.draws,
            violations: a.violations + b.violations,
            mismatches: a.mismatches + b.mismatches,
            by_count: [0, 1, 2].map(|k| a.by_count[k] + b.by_count[k]),
        })
}
