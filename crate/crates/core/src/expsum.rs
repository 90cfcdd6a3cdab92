//! Real roots of exponential sums `f(x) = Σ c_k e^{e_k x}`.
//!
//! Roots are isolated exactly: after dividing by the leading exponential the
//! derivative has one term fewer, so the roots of `f` are separated by the
//! roots of that derivative (found recursively) and each monotone piece holds
//! at most one root. The outer brackets come from dominance bounds.

use crate::real::{floor_tol, from_usize, lit, Real};

#[derive(Debug, Clone, PartialEq)]
pub struct ExpSum<T> {
    /// `(exponent, coefficient)` sorted by exponent, merged, no zero coefficients.
    terms: Vec<(T, T)>,
}

/// Maximal bisection steps per root.
const MAX_BISECT: usize = 400;

impl<T: Real> ExpSum<T> {
    pub fn new(terms: impl IntoIterator<Item = (T, T)>) -> Self {
        let mut raw: Vec<(T, T)> = terms
            .into_iter()
            .filter(|&(_, c)| c != T::zero())
            .collect();
        raw.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite exponents"));
        let tol = lit::<T>(1e-12);
        let mut terms: Vec<(T, T)> = Vec::with_capacity(raw.len());
        for (e, c) in raw {
            match terms.last_mut() {
                Some(last) if (last.0 - e).abs() <= tol * T::one().max(e.abs()) => last.1 += c,
                _ => terms.push((e, c)),
            }
        }
        terms.retain(|&(_, c)| c != T::zero());
        Self { terms }
    }

    pub fn terms(&self) -> &[(T, T)] {
        &self.terms
    }

    pub fn eval(&self, x: T) -> T {
        self.terms.iter().map(|&(e, c)| c * (e * x).exp()).sum()
    }

    pub fn derivative(&self) -> Self {
        Self::new(self.terms.iter().map(|&(e, c)| (e, c * e)))
    }

    /// `f(x) e^{-M}` with `M` the largest log-magnitude, so the sign is exact
    /// even where individual terms overflow.
    pub fn scaled_eval(&self, x: T) -> T {
        let m = self
            .terms
            .iter()
            .map(|&(e, c)| e * x + c.abs().ln())
            .fold(T::neg_infinity(), T::max);
        if !m.is_finite() {
            return T::zero();
        }
        self.terms
            .iter()
            .map(|&(e, c)| c.signum() * (e * x + c.abs().ln() - m).exp())
            .sum()
    }

    fn sign_at(&self, x: T) -> i8 {
        let v = self.scaled_eval(x);
        if v > T::zero() {
            1
        } else if v < T::zero() {
            -1
        } else {
            0
        }
    }

    /// Interval outside of which the extreme terms dominate, so all roots lie inside.
    pub fn root_window(&self) -> Option<(T, T)> {
        let k = self.terms.len();
        if k < 2 {
            return None;
        }
        let m = from_usize::<T>(k - 1);
        let (e0, c0) = self.terms[0];
        let (el, cl) = self.terms[k - 1];
        let mut lo = T::infinity();
        let mut hi = T::neg_infinity();
        for &(e, c) in &self.terms[1..] {
            lo = lo.min((c0.abs() / (m * c.abs())).ln() / (e - e0));
        }
        for &(e, c) in &self.terms[..k - 1] {
            hi = hi.max((m * c.abs() / cl.abs()).ln() / (el - e));
        }
        let pad = T::one();
        Some((lo.min(hi) - pad, hi.max(lo) + pad))
    }

    /// All sign-changing roots, ascending, each located to relative width `tol`.
    pub fn roots(&self, tol: f64) -> Vec<T> {
        match self.root_window() {
            Some((lo, hi)) => self.roots_in(lo, hi, floor_tol(tol)),
            None => Vec::new(),
        }
    }

    /// Roots strictly inside `(lo, hi)`.
    pub fn roots_in(&self, lo: T, hi: T, tol: T) -> Vec<T> {
        if self.terms.len() < 2 || !(lo < hi) {
            return Vec::new();
        }
        let e0 = self.terms[0].0;
        let shifted = Self {
            terms: self.terms.iter().map(|&(e, c)| (e - e0, c)).collect(),
        };
        let crit = shifted.derivative().roots_in(lo, hi, tol);
        let mut cuts = Vec::with_capacity(crit.len() + 2);
        cuts.push(lo);
        cuts.extend(crit.iter().copied());
        cuts.push(hi);
        let mut out: Vec<T> = Vec::new();
        for w in cuts.windows(2) {
            let (a, b) = (w[0], w[1]);
            let (sa, sb) = (shifted.sign_at(a), shifted.sign_at(b));
            if sa == 0 {
                if a > lo && out.last().is_none_or(|&x| x < a) {
                    out.push(a);
                }
                continue;
            }
            if sb == 0 || sa == sb {
                continue;
            }
            out.push(shifted.bisect(a, b, sa, tol));
        }
        out
    }

    fn bisect(&self, mut a: T, mut b: T, sa: i8, tol: T) -> T {
        for _ in 0..MAX_BISECT {
            let mid = a + (b - a) / lit(2.0);
            if (b - a) <= tol * T::one().max(mid.abs()) || mid <= a || mid >= b {
                return mid;
            }
            let sm = self.sign_at(mid);
            if sm == 0 {
                return mid;
            }
            if sm == sa {
                a = mid;
            } else {
                b = mid;
            }
        }
        a + (b - a) / lit(2.0)
    }
}
