//! Problem constants, derived exponents and the scalar threshold quantities.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::real::{from_usize, lit, Real};

/// Relative tolerance used when an exponent is compared against `p̄` or `2*`.
pub const EXPONENT_TOL: f64 = 1e-12;

/// Coefficients, exponents and masses of the coupled system.
///
/// The JSON form uses exactly the keys `N, p, q, r1, r2, mu1, mu2, beta, a1, a2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemParams<T> {
    #[serde(rename = "N")]
    pub dim: usize,
    pub p: T,
    pub q: T,
    pub r1: T,
    pub r2: T,
    pub mu1: T,
    pub mu2: T,
    pub beta: T,
    pub a1: T,
    pub a2: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regime {
    /// `2 < p < p̄ < q ≤ 2*`
    MixedSubSuper,
    /// `p̄ < p, q, r < 2*`
    PurelySupercritical,
    Other,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeData<T> {
    pub gamma_p: T,
    pub gamma_q: T,
    pub gamma_r: T,
    pub pbar: T,
    pub two_star: T,
    pub regime: Regime,
}

/// Gagliardo–Nirenberg constants for the exponents `p`, `q` and `r = r1 + r2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GnConstants<T> {
    pub c_np: T,
    pub c_nq: T,
    pub c_nr: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdData<T> {
    pub d1: T,
    pub d2: T,
    pub d3: T,
    pub t: T,
    pub c_np: T,
    pub c_nq: T,
    pub c_nr: T,
}

/// `γ_s = N(s−2)/(2s)`.
pub fn gamma<T: Real>(dim: usize, s: T) -> T {
    let n = from_usize::<T>(dim);
    n * (s - lit(2.0)) / (lit::<T>(2.0) * s)
}

/// L²-critical exponent `2 + 4/N`.
pub fn pbar<T: Real>(dim: usize) -> T {
    lit::<T>(2.0) + lit::<T>(4.0) / from_usize(dim)
}

/// Sobolev exponent `2N/(N−2)`.
pub fn two_star<T: Real>(dim: usize) -> T {
    let n = from_usize::<T>(dim);
    lit::<T>(2.0) * n / (n - lit(2.0))
}

/// Three-way comparison with the exponent tolerance.
pub fn cmp_exponent<T: Real>(a: T, b: T) -> std::cmp::Ordering {
    let tol = lit::<T>(EXPONENT_TOL) * a.abs().max(b.abs());
    if (a - b).abs() <= tol {
        std::cmp::Ordering::Equal
    } else if a < b {
        std::cmp::Ordering::Less
    } else {
        std::cmp::Ordering::Greater
    }
}

impl<T: Real> ProblemParams<T> {
    pub fn r(&self) -> T {
        self.r1 + self.r2
    }

    pub fn pbar(&self) -> T {
        pbar(self.dim)
    }

    pub fn two_star(&self) -> T {
        two_star(self.dim)
    }

    pub fn gamma(&self, s: T) -> T {
        gamma(self.dim, s)
    }

    pub fn with_masses(&self, a1: T, a2: T) -> Self {
        Self { a1, a2, ..*self }
    }

    pub fn with_beta(&self, beta: T) -> Self {
        Self { beta, ..*self }
    }

    /// True when `q` equals `2*` up to [`EXPONENT_TOL`].
    pub fn q_is_critical(&self) -> bool {
        cmp_exponent(self.q, self.two_star()).is_eq()
    }

    /// Checks the global constraints on dimension, exponents, coefficients and masses.
    pub fn validate(&self) -> Result<()> {
        let two = lit::<T>(2.0);
        let bad = |msg: String| Err(Error::InvalidParams(msg));
        if self.dim < 3 {
            return bad(format!("N must be at least 3, got {}", self.dim));
        }
        let crit = self.two_star();
        let all = [
            self.p, self.q, self.r1, self.r2, self.mu1, self.mu2, self.beta, self.a1, self.a2,
        ];
        if all.iter().any(|x| !x.is_finite()) {
            return bad("all parameters must be finite".into());
        }
        if !(self.r1 > T::one()) || !(self.r2 > T::one()) {
            return bad(format!("r1, r2 must exceed 1 (r1={}, r2={})", self.r1, self.r2));
        }
        if !(self.p > two) || !cmp_exponent(self.p, crit).is_lt() {
            return bad(format!("p must lie in (2, 2*) with 2* = {crit}, got {}", self.p));
        }
        let r = self.r();
        if !(r > two) || !cmp_exponent(r, crit).is_lt() {
            return bad(format!("r1 + r2 must lie in (2, 2*) with 2* = {crit}, got {r}"));
        }
        if !(self.q > two) || cmp_exponent(self.q, crit).is_gt() {
            return bad(format!("q must lie in (2, 2*] with 2* = {crit}, got {}", self.q));
        }
        if !(self.mu1 > T::zero()) || !(self.mu2 > T::zero()) {
            return bad("mu1 and mu2 must be positive".into());
        }
        if !(self.beta >= T::zero()) {
            return bad("beta must be nonnegative".into());
        }
        if !(self.a1 > T::zero()) || !(self.a2 > T::zero()) {
            return bad("masses a1, a2 must be positive".into());
        }
        Ok(())
    }

    pub fn regime_data(&self) -> Result<RegimeData<T>> {
        derive_regime(self)
    }
}

/// Computes the γ's, the critical exponents and the regime label.
pub fn derive_regime<T: Real>(params: &ProblemParams<T>) -> Result<RegimeData<T>> {
    params.validate()?;
    let pb = params.pbar();
    let crit = params.two_star();
    let gamma_q = if params.q_is_critical() {
        T::one()
    } else {
        params.gamma(params.q)
    };
    let r = params.r();
    let mixed = cmp_exponent(params.p, pb).is_lt() && cmp_exponent(params.q, pb).is_gt();
    let super_all = [params.p, params.q, r]
        .iter()
        .all(|&s| cmp_exponent(s, pb).is_gt() && cmp_exponent(s, crit).is_lt());
    let regime = if mixed {
        Regime::MixedSubSuper
    } else if super_all {
        Regime::PurelySupercritical
    } else {
        Regime::Other
    };
    Ok(RegimeData {
        gamma_p: params.gamma(params.p),
        gamma_q,
        gamma_r: params.gamma(r),
        pbar: pb,
        two_star: crit,
        regime,
    })
}

/// Evaluates `D1, D2, D3` and `T(a1, a2)` for the given Gagliardo–Nirenberg constants.
pub fn compute_thresholds<T: Real>(
    params: &ProblemParams<T>,
    gn: GnConstants<T>,
) -> Result<ThresholdData<T>> {
    let reg = derive_regime(params)?;
    if !(gn.c_np > T::zero() && gn.c_nq > T::zero() && gn.c_nr > T::zero()) {
        return Err(Error::InvalidParams(
            "Gagliardo-Nirenberg constants must be positive".into(),
        ));
    }
    let ProblemParams {
        p, q, r1, r2, mu1, mu2, beta, a1, a2, ..
    } = *params;
    let one = T::one();
    let two = lit::<T>(2.0);
    let r = r1 + r2;
    let (gp, gq, gr) = (reg.gamma_p, reg.gamma_q, reg.gamma_r);

    let mass_r = a1.powf(r1 * (one - gr)) * a2.powf(r2 * (one - gr));
    let d1 = (r1.max(r2) / r).powf(r * gr / two) * gn.c_nr.powf(r) * mass_r;
    let d2 = mu1 / p * gn.c_np.powf(p) * a1.powf(p * (one - gp));
    let d3 = mu2 / q * gn.c_nq.powf(q) * a2.powf(q * (one - gq));

    let yp = mu1 * a1.powf(p * (one - gp));
    let yq = mu2 * a2.powf(q * (one - gq));
    let xr = mass_r * beta;
    let sub_gap = two - p * gp;
    let super_gap = q * gq - two;
    let unsupported = |what: &str| {
        Err(Error::Unsupported(format!(
            "{what} vanishes in the threshold formula (exponent equals the L2-critical value)"
        )))
    };
    if cmp_exponent(q, reg.pbar).is_eq() {
        return unsupported("q*gamma_q - 2");
    }
    let t = match cmp_exponent(r, reg.pbar) {
        std::cmp::Ordering::Less => {
            xr * yq.powf((two - r * gr) / super_gap) + yp * yq.powf(sub_gap / super_gap)
        }
        std::cmp::Ordering::Equal => {
            if cmp_exponent(p, reg.pbar).is_eq() {
                return unsupported("2 - p*gamma_p");
            }
            xr.min(yp.powf(one / sub_gap) * yq.powf(one / super_gap))
        }
        std::cmp::Ordering::Greater => {
            if cmp_exponent(p, reg.pbar).is_eq() {
                return unsupported("2 - p*gamma_p");
            }
            xr * yp.powf((r * gr - two) / sub_gap) + yq * yp.powf(super_gap / sub_gap)
        }
    };
    Ok(ThresholdData {
        d1,
        d2,
        d3,
        t,
        c_np: gn.c_np,
        c_nq: gn.c_nq,
        c_nr: gn.c_nr,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mixed() -> ProblemParams<f64> {
        ProblemParams {
            dim: 3,
            p: 2.5,
            q: 4.0,
            r1: 1.5,
            r2: 1.5,
            mu1: 1.0,
            mu2: 1.0,
            beta: 1.0,
            a1: 0.5,
            a2: 0.5,
        }
    }

    #[test]
    fn gamma_values() {
        assert_eq!(gamma(3, 4.0_f64), 0.75);
        let pb: f64 = pbar(3);
        assert!((pb * gamma(3, pb) - 2.0).abs() < 1e-15);
        let p = ProblemParams { dim: 4, q: 4.0, ..mixed() };
        assert_eq!(derive_regime(&p).unwrap().gamma_q, 1.0);
    }

    #[test]
    fn regimes() {
        assert_eq!(derive_regime(&mixed()).unwrap().regime, Regime::MixedSubSuper);
        let sup = ProblemParams { p: 4.0, q: 4.0, r1: 1.9, r2: 1.9, ..mixed() };
        assert_eq!(derive_regime(&sup).unwrap().regime, Regime::PurelySupercritical);
        let other = ProblemParams { p: 4.0, q: 2.5, ..mixed() };
        assert_eq!(derive_regime(&other).unwrap().regime, Regime::Other);
        let critical_q = ProblemParams { q: 6.0, ..mixed() };
        assert_eq!(derive_regime(&critical_q).unwrap().regime, Regime::MixedSubSuper);
    }

    #[test]
    fn rejects_invalid() {
        for bad in [
            ProblemParams { dim: 2, ..mixed() },
            ProblemParams { p: 6.0, ..mixed() },
            ProblemParams { q: 6.5, ..mixed() },
            ProblemParams { r1: 1.0, ..mixed() },
            ProblemParams { r1: 3.0, r2: 3.0, ..mixed() },
            ProblemParams { mu1: 0.0, ..mixed() },
            ProblemParams { beta: -1.0, ..mixed() },
            ProblemParams { a2: 0.0, ..mixed() },
        ] {
            assert!(derive_regime(&bad).is_err(), "{bad:?}");
        }
    }

    #[test]
    fn threshold_beta_zero_branch() {
        let p = ProblemParams { beta: 0.0, ..mixed() };
        let gn = GnConstants { c_np: 0.7, c_nq: 0.45, c_nr: 0.56 };
        let th = compute_thresholds(&p, gn).unwrap();
        let gp = gamma(3, 2.5);
        let gq = gamma(3, 4.0);
        let expect = 0.5_f64.powf(2.5 * (1.0 - gp))
            * (0.5_f64.powf(4.0 * (1.0 - gq))).powf((2.0 - 2.5 * gp) / (4.0 * gq - 2.0));
        assert!((th.t - expect).abs() < 1e-15 * expect);
    }

    #[test]
    fn q_at_pbar_unsupported() {
        let p = ProblemParams { p: 4.0, q: 10.0 / 3.0, ..mixed() };
        let gn = GnConstants { c_np: 0.5, c_nq: 0.5, c_nr: 0.5 };
        assert!(matches!(compute_thresholds(&p, gn), Err(Error::Unsupported(_))));
    }

    #[test]
    fn json_field_names() {
        let text = r#"{"N":3,"p":2.5,"q":4,"r1":1.5,"r2":1.5,"mu1":1,"mu2":1,"beta":1,"a1":0.5,"a2":0.5}"#;
        let p: ProblemParams<f64> = serde_json::from_str(text).unwrap();
        assert_eq!(p, mixed());
        let extra = r#"{"N":3,"p":2.5,"q":4,"r1":1.5,"r2":1.5,"mu1":1,"mu2":1,"beta":1,"a1":0.5,"a2":0.5,"x":1}"#;
        assert!(serde_json::from_str::<ProblemParams<f64>>(extra).is_err());
    }
}
