//! The one-dimensional landscape `l(t) = a t² − b t^{e_r} − c t^{e_p} − d t^{e_q}`
//! that bounds the energy from below in terms of the kinetic norm.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expsum::ExpSum;
use crate::params::{compute_thresholds, derive_regime, GnConstants, ProblemParams, Regime, ThresholdData};
use crate::real::{lit, Real};

/// Root tolerance in `ln t`.
pub const ROOT_TOL: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LandscapeCoeffs<T> {
    pub a: T,
    pub b: T,
    pub c: T,
    pub d: T,
    /// Exponents of the `b`, `c`, `d` terms: `rγ_r`, `pγ_p`, `qγ_q`.
    pub exp_r: T,
    pub exp_p: T,
    pub exp_q: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PointKind {
    Min,
    Max,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint<T> {
    pub t: T,
    pub value: T,
    pub kind: PointKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LandscapeReport<T> {
    pub critical_points: Vec<CriticalPoint<T>>,
    pub zeros: Vec<T>,
    pub structure_ok: bool,
}

impl<T: Real> LandscapeCoeffs<T> {
    /// `h(t) = ½t² − D₁β t^{rγ_r} − D₂ t^{pγ_p} − D₃ t^{qγ_q}`.
    pub fn from_thresholds(params: &ProblemParams<T>, th: &ThresholdData<T>) -> Result<Self> {
        let reg = derive_regime(params)?;
        Ok(Self {
            a: lit(0.5),
            b: th.d1 * params.beta,
            c: th.d2,
            d: th.d3,
            exp_r: params.r() * reg.gamma_r,
            exp_p: params.p * reg.gamma_p,
            exp_q: params.q * reg.gamma_q,
        })
    }

    pub fn eval(&self, t: T) -> T {
        self.a * t * t - self.b * t.powf(self.exp_r) - self.c * t.powf(self.exp_p) - self.d * t.powf(self.exp_q)
    }

    /// `l'(t)`.
    pub fn derivative(&self, t: T) -> T {
        lit::<T>(2.0) * self.a * t
            - self.b * self.exp_r * t.powf(self.exp_r - T::one())
            - self.c * self.exp_p * t.powf(self.exp_p - T::one())
            - self.d * self.exp_q * t.powf(self.exp_q - T::one())
    }

    /// `x ↦ l(e^x)`.
    pub fn log_sum(&self) -> ExpSum<T> {
        ExpSum::new([
            (lit(2.0), self.a),
            (self.exp_r, -self.b),
            (self.exp_p, -self.c),
            (self.exp_q, -self.d),
        ])
    }
}

/// Critical points and zeros of `l` on `(0, ∞)`, with the two-well structure test.
pub fn analyze<T: Real>(coeffs: &LandscapeCoeffs<T>) -> Result<LandscapeReport<T>> {
    let exps = [coeffs.exp_r, coeffs.exp_p, coeffs.exp_q];
    if exps.iter().any(|&e| !(e > T::zero())) {
        return Err(Error::Landscape("exponents must be positive".into()));
    }
    let coefs = [coeffs.a, coeffs.b, coeffs.c, coeffs.d];
    if coefs.iter().any(|&c| !(c >= T::zero()) || !c.is_finite()) {
        return Err(Error::Landscape("coefficients must be finite and nonnegative".into()));
    }
    let f = coeffs.log_sum();
    let df = f.derivative();
    let d2f = df.derivative();
    let crit = df.roots(ROOT_TOL);
    if crit.len() > 2 {
        return Err(Error::Landscape(format!(
            "{} critical points found; at most two are possible",
            crit.len()
        )));
    }
    let critical_points: Vec<CriticalPoint<T>> = crit
        .iter()
        .map(|&x| {
            let t = x.exp();
            let kind = if d2f.scaled_eval(x) > T::zero() {
                PointKind::Min
            } else {
                PointKind::Max
            };
            CriticalPoint { t, value: coeffs.eval(t), kind }
        })
        .collect();
    let zeros: Vec<T> = f.roots(ROOT_TOL).iter().map(|x| x.exp()).collect();
    let structure_ok = match (critical_points.as_slice(), zeros.as_slice()) {
        ([lo, hi], [r0, r1]) => {
            lo.kind == PointKind::Min
                && lo.value < T::zero()
                && hi.kind == PointKind::Max
                && hi.value > T::zero()
                && *r0 < hi.t
                && hi.t < *r1
                && coeffs.eval(*r0 / lit(2.0)) < T::zero()
                && coeffs.eval(*r1 * lit(2.0)) < T::zero()
        }
        _ => false,
    };
    Ok(LandscapeReport { critical_points, zeros, structure_ok })
}

/// First zero `R₀` of a landscape with the two-well structure.
pub fn radius_r0<T: Real>(coeffs: &LandscapeCoeffs<T>) -> Result<T> {
    let rep = analyze(coeffs)?;
    if !rep.structure_ok {
        return Err(Error::Landscape(
            "landscape lacks the min-negative/max-positive structure".into(),
        ));
    }
    Ok(rep.zeros[0])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectiveThreshold<T> {
    /// Largest tested mass scale with the two-well structure, 0 if none.
    pub sigma: T,
    /// `T(σa₁, σa₂)` at that scale.
    pub t_value: T,
    /// Structure flag per tested scale, ascending in σ.
    pub scan: Vec<(T, bool)>,
    /// Whether the flags are true up to some scale and false beyond it.
    pub monotone: bool,
}

/// Scans `(a₁, a₂) → (σa₁, σa₂)` over `sigmas` for the two-well structure of `h`.
pub fn effective_threshold<T: Real>(
    params: &ProblemParams<T>,
    gn: GnConstants<T>,
    sigmas: &[T],
) -> Result<EffectiveThreshold<T>> {
    if derive_regime(params)?.regime != Regime::MixedSubSuper {
        return Err(Error::Unsupported(
            "the landscape threshold applies to the mixed regime only".into(),
        ));
    }
    let mut grid: Vec<T> = sigmas.iter().copied().filter(|s| *s > T::zero()).collect();
    grid.sort_by(|a, b| a.partial_cmp(b).expect("finite scale"));
    let mut scan = Vec::with_capacity(grid.len());
    let mut best = (T::zero(), T::zero());
    for &sigma in &grid {
        let scaled = params.with_masses(params.a1 * sigma, params.a2 * sigma);
        let th = compute_thresholds(&scaled, gn)?;
        let coeffs = LandscapeCoeffs::from_thresholds(&scaled, &th)?;
        let ok = analyze(&coeffs)?.structure_ok;
        if ok {
            best = (sigma, th.t);
        }
        scan.push((sigma, ok));
    }
    let first_bad = scan.iter().position(|&(_, ok)| !ok).unwrap_or(scan.len());
    let monotone = scan[first_bad..].iter().all(|&(_, ok)| !ok);
    Ok(EffectiveThreshold { sigma: best.0, t_value: best.1, scan, monotone })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coeffs(b: f64, c: f64, d: f64) -> LandscapeCoeffs<f64> {
        LandscapeCoeffs { a: 0.5, b, c, d, exp_r: 1.5, exp_p: 0.75, exp_q: 3.0 }
    }

    #[test]
    fn pure_quadratic() {
        let rep = analyze(&coeffs(0.0, 0.0, 0.0)).unwrap();
        assert!(rep.critical_points.is_empty());
        assert!(!rep.structure_ok);
    }

    #[test]
    fn small_coefficients_give_two_wells() {
        let c = coeffs(0.01, 0.01, 0.01);
        let rep = analyze(&c).unwrap();
        assert!(rep.structure_ok);
        let r0 = radius_r0(&c).unwrap();
        assert!(c.eval(r0).abs() < 1e-10);
        assert!(0.5 * r0 * r0 > c.c * r0.powf(c.exp_p));
    }

    #[test]
    fn large_coefficients_lose_structure() {
        let c = coeffs(2.0, 2.0, 2.0);
        let rep = analyze(&c).unwrap();
        assert!(!rep.structure_ok);
        assert!(radius_r0(&c).is_err());
    }
}
