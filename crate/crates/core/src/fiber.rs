//! Energy, Pohozaev functional and the fiber map `Φ(s) = I(s⋆(u,v))`.
//!
//! Along the dilation every term of `I` scales by an exact exponential, so the
//! fiber map is an exponential sum built from four integrals of the pair.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expsum::ExpSum;
use crate::params::{derive_regime, ProblemParams, Regime};
use crate::radial::StatePair;
use crate::real::{lit, Real};

/// Relative size of `Φ''` below which a critical point is reported as degenerate.
pub const DEGENERATE_TOL: f64 = 1e-8;
/// Root tolerance in `s`.
pub const ROOT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FiberClass {
    /// Local minimum followed by a maximum.
    PlusMinus,
    UniqueMax,
    UniqueMin,
    NoCriticalPoint,
    /// A critical point with vanishing second derivative, or an unexpected pattern.
    Degenerate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiberReport<T> {
    pub s_minus: Option<T>,
    pub t_max: Option<T>,
    pub critical_points: Vec<T>,
    pub zeros: Vec<T>,
    pub phi_at_crit: Vec<T>,
    pub second_derivs: Vec<T>,
    pub classification: FiberClass,
}

/// The integrals that determine the fiber map of one pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiberMap<T> {
    /// `|∇u|₂² + |∇v|₂²`
    pub kinetic: T,
    /// `μ₁|u|_p^p`
    pub a: T,
    /// `μ₂|v|_q^q`
    pub b: T,
    /// `β∫|u|^{r1}|v|^{r2}`
    pub c: T,
    pub p: T,
    pub q: T,
    pub r: T,
    pub gamma_p: T,
    pub gamma_q: T,
    pub gamma_r: T,
    pub regime: Regime,
}

impl<T: Real> FiberMap<T> {
    pub fn new(pair: &StatePair<T>, params: &ProblemParams<T>) -> Result<Self> {
        Self::from_integrals(
            params,
            pair.kinetic(),
            pair.u.lp_integral(params.p),
            pair.v.lp_integral(params.q),
            pair.coupling_integral(params.r1, params.r2),
        )
    }

    /// Builds the map from `|∇u|²+|∇v|²`, `|u|_p^p`, `|v|_q^q` and `∫|u|^{r1}|v|^{r2}`.
    pub fn from_integrals(
        params: &ProblemParams<T>,
        kinetic: T,
        lp_u: T,
        lq_v: T,
        coupling: T,
    ) -> Result<Self> {
        let reg = derive_regime(params)?;
        Ok(Self {
            kinetic,
            a: params.mu1 * lp_u,
            b: params.mu2 * lq_v,
            c: params.beta * coupling,
            p: params.p,
            q: params.q,
            r: params.r(),
            gamma_p: reg.gamma_p,
            gamma_q: reg.gamma_q,
            gamma_r: reg.gamma_r,
            regime: reg.regime,
        })
    }

    fn exps(&self) -> [T; 4] {
        [
            lit(2.0),
            self.p * self.gamma_p,
            self.q * self.gamma_q,
            self.r * self.gamma_r,
        ]
    }

    /// `Φ` as an exponential sum in `s`.
    pub fn phi_sum(&self) -> ExpSum<T> {
        let e = self.exps();
        ExpSum::new([
            (e[0], self.kinetic / lit(2.0)),
            (e[1], -self.a / self.p),
            (e[2], -self.b / self.q),
            (e[3], -self.c),
        ])
    }

    /// `Φ'` as an exponential sum in `s`; equals `P(s⋆(u,v))`.
    pub fn dphi_sum(&self) -> ExpSum<T> {
        self.phi_sum().derivative()
    }

    pub fn phi(&self, s: T) -> T {
        let e = self.exps();
        self.kinetic / lit(2.0) * (e[0] * s).exp()
            - self.a / self.p * (e[1] * s).exp()
            - self.b / self.q * (e[2] * s).exp()
            - self.c * (e[3] * s).exp()
    }

    pub fn dphi(&self, s: T) -> T {
        let e = self.exps();
        self.kinetic * (e[0] * s).exp()
            - self.gamma_p * self.a * (e[1] * s).exp()
            - self.gamma_q * self.b * (e[2] * s).exp()
            - self.r * self.gamma_r * self.c * (e[3] * s).exp()
    }

    pub fn d2phi(&self, s: T) -> T {
        self.d2phi_parts(s).0
    }

    /// `Φ''(s)` and the sum of absolute values of its terms.
    fn d2phi_parts(&self, s: T) -> (T, T) {
        let e = self.exps();
        let terms = [
            lit::<T>(2.0) * self.kinetic * (e[0] * s).exp(),
            -e[1] * self.gamma_p * self.a * (e[1] * s).exp(),
            -e[2] * self.gamma_q * self.b * (e[2] * s).exp(),
            -e[3] * self.r * self.gamma_r * self.c * (e[3] * s).exp(),
        ];
        let val = terms.iter().copied().sum();
        let scale = terms.iter().map(|t| t.abs()).sum();
        (val, scale)
    }

    /// Critical points, zeros and classification of `Φ`.
    pub fn report(&self) -> Result<FiberReport<T>> {
        let crit = self.dphi_sum().roots(ROOT_TOL);
        let zeros = self.phi_sum().roots(ROOT_TOL);
        let mut phi_at_crit = Vec::with_capacity(crit.len());
        let mut second_derivs = Vec::with_capacity(crit.len());
        let mut degenerate = false;
        for &s in &crit {
            let (d2, scale) = self.d2phi_parts(s);
            if d2.abs() < lit::<T>(DEGENERATE_TOL) * scale {
                degenerate = true;
            }
            phi_at_crit.push(self.phi(s));
            second_derivs.push(d2);
        }
        let kinds: Vec<bool> = second_derivs.iter().map(|&d| d > T::zero()).collect();
        let (classification, s_minus, t_max) = if degenerate {
            (FiberClass::Degenerate, None, None)
        } else {
            match kinds.as_slice() {
                [] => (FiberClass::NoCriticalPoint, None, None),
                [true] => (FiberClass::UniqueMin, Some(crit[0]), None),
                [false] => (FiberClass::UniqueMax, None, Some(crit[0])),
                [true, false] => (FiberClass::PlusMinus, Some(crit[0]), Some(crit[1])),
                _ => (FiberClass::Degenerate, None, None),
            }
        };
        if self.regime == Regime::PurelySupercritical && crit.len() != 1 {
            return Err(Error::Fiber(format!(
                "expected exactly one critical point in the supercritical regime, found {}",
                crit.len()
            )));
        }
        Ok(FiberReport {
            s_minus,
            t_max,
            critical_points: crit,
            zeros,
            phi_at_crit,
            second_derivs,
            classification,
        })
    }
}

/// `I(u,v)`.
pub fn energy<T: Real>(pair: &StatePair<T>, params: &ProblemParams<T>) -> T {
    pair.kinetic() / lit(2.0)
        - params.mu1 / params.p * pair.u.lp_integral(params.p)
        - params.mu2 / params.q * pair.v.lp_integral(params.q)
        - params.beta * pair.coupling_integral(params.r1, params.r2)
}

/// `P(u,v)`.
pub fn pohozaev<T: Real>(pair: &StatePair<T>, params: &ProblemParams<T>) -> Result<T> {
    Ok(FiberMap::new(pair, params)?.dphi(T::zero()))
}

/// Samples `(s, Φ(s), Φ'(s))` on a uniform grid of `samples` points over `range`.
pub fn fiber_profile<T: Real>(
    pair: &StatePair<T>,
    params: &ProblemParams<T>,
    range: (T, T),
    samples: usize,
) -> Result<Vec<(T, T, T)>> {
    let map = FiberMap::new(pair, params)?;
    let n = samples.max(2);
    let step = (range.1 - range.0) / crate::real::from_usize(n - 1);
    Ok((0..n)
        .map(|i| {
            let s = range.0 + step * crate::real::from_usize(i);
            (s, map.phi(s), map.dphi(s))
        })
        .collect())
}

pub fn locate_critical_points<T: Real>(
    pair: &StatePair<T>,
    params: &ProblemParams<T>,
) -> Result<FiberReport<T>> {
    FiberMap::new(pair, params)?.report()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Target {
    /// Local minimum `s_{(u,v)}`.
    Minimizer,
    /// Maximum `t_{(u,v)}`.
    Maximizer,
}

/// Dilates the pair onto the Pohozaev manifold at the requested critical point.
/// Returns the projected pair and the total dilation applied.
pub fn project_to_pohozaev<T: Real>(
    pair: &StatePair<T>,
    params: &ProblemParams<T>,
    which: Target,
) -> Result<(StatePair<T>, T)> {
    let mut current = pair.clone();
    let mut total = T::zero();
    let tol = crate::real::floor_tol::<T>(1e-12);
    for _ in 0..20 {
        let report = locate_critical_points(&current, params)?;
        let s = match which {
            Target::Minimizer => report.s_minus,
            Target::Maximizer => report.t_max,
        }
        .ok_or_else(|| {
            Error::MissingCriticalPoint(format!(
                "{which:?} absent (classification {:?})",
                report.classification
            ))
        })?;
        if s.abs() <= tol {
            break;
        }
        current = current.dilate(s);
        total += s;
    }
    Ok((current, total))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial::{RadialField, RadialGrid};

    fn params() -> ProblemParams<f64> {
        ProblemParams {
            dim: 3,
            p: 4.0,
            q: 4.0,
            r1: 1.9,
            r2: 1.9,
            mu1: 1.0,
            mu2: 1.0,
            beta: 1.0,
            a1: 1.0,
            a2: 1.0,
        }
    }

    fn pair() -> StatePair<f64> {
        let grid = RadialGrid::new(3, 30.0, 3001).unwrap();
        let u = RadialField::from_fn(grid.clone(), |r: f64| (-r * r / 2.0).exp());
        let v = RadialField::from_fn(grid, |r: f64| (-r * r / 4.5).exp());
        StatePair::new(u, v).unwrap()
    }

    #[test]
    fn zero_pair() {
        let grid = RadialGrid::new(3, 10.0, 64).unwrap();
        let z = StatePair::new(RadialField::zeros(grid.clone()), RadialField::zeros(grid)).unwrap();
        assert_eq!(energy(&z, &params()), 0.0);
        assert_eq!(pohozaev(&z, &params()).unwrap(), 0.0);
    }

    #[test]
    fn closed_form_derivative() {
        let map = FiberMap::new(&pair(), &params()).unwrap();
        for s in [-1.0, -0.2, 0.0, 0.7] {
            let h = 1e-5;
            let fd = (map.phi(s + h) - map.phi(s - h)) / (2.0 * h);
            assert!((fd - map.dphi(s)).abs() < 1e-6 * map.dphi(s).abs().max(1.0));
            let fd2 = (map.dphi(s + h) - map.dphi(s - h)) / (2.0 * h);
            assert!((fd2 - map.d2phi(s)).abs() < 1e-6 * map.d2phi(s).abs().max(1.0));
        }
        assert!((map.phi(0.0) - energy(&pair(), &params())).abs() < 1e-12);
    }

    #[test]
    fn supercritical_unique_max() {
        let rep = locate_critical_points(&pair(), &params()).unwrap();
        assert_eq!(rep.classification, FiberClass::UniqueMax);
        assert!(rep.second_derivs[0] < 0.0);
        assert!(rep.phi_at_crit[0] > 0.0);
        assert_eq!(rep.zeros.len(), 1);
    }

    #[test]
    fn projection_lands_on_manifold() {
        let (proj, t) = project_to_pohozaev(&pair(), &params(), Target::Maximizer).unwrap();
        let p = pohozaev(&proj, &params()).unwrap();
        assert!(p.abs() < 1e-9 * proj.kinetic(), "P = {p}");
        assert!((proj.u.mass() - pair().u.mass()).abs() < 1e-13);
        assert!(t.is_finite());
        assert!(matches!(
            project_to_pohozaev(&pair(), &params(), Target::Minimizer),
            Err(Error::MissingCriticalPoint(_))
        ));
    }
}
