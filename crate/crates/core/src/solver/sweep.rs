//! Parameter sweeps over the coupling `β` or a common mass scale, solved in parallel.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::params::ProblemParams;
use crate::real::Real;

use super::{solve_with, Context, SolverConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    Beta,
    /// `(a₁, a₂) → (σa₁, σa₂)`.
    MassScale,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow<T> {
    pub value: T,
    pub energy: Option<T>,
    pub lambda1: Option<T>,
    pub lambda2: Option<T>,
    pub pohozaev_residual: Option<T>,
    pub gradient_residual: Option<T>,
    pub m_a1_0: Option<T>,
    pub m_0_a2: Option<T>,
    pub checks_pass: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable<T> {
    pub axis: Axis,
    pub rows: Vec<SweepRow<T>>,
    /// Energies non-increasing along increasing `β` over the successful rows
    /// (`None` for other axes).
    pub non_increasing: Option<bool>,
}

fn point<T: Real>(template: &ProblemParams<T>, axis: Axis, value: T) -> ProblemParams<T> {
    match axis {
        Axis::Beta => template.with_beta(value),
        Axis::MassScale => template.with_masses(template.a1 * value, template.a2 * value),
    }
}

/// Solves at every grid value; a failing point is recorded, not propagated.
pub fn sweep<T: Real>(template: &ProblemParams<T>, axis: Axis, grid: &[T], config: &SolverConfig) -> SweepTable<T> {
    let mut values = grid.to_vec();
    values.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let rows: Vec<SweepRow<T>> = values
        .par_iter()
        .map(|&value| {
            let prm = point(template, axis, value);
            let empty = SweepRow {
                value,
                energy: None,
                lambda1: None,
                lambda2: None,
                pohozaev_residual: None,
                gradient_residual: None,
                m_a1_0: None,
                m_0_a2: None,
                checks_pass: false,
                error: None,
            };
            let ctx = match Context::new(&prm) {
                Ok(c) => c,
                Err(e) => return SweepRow { error: Some(e.to_string()), ..empty },
            };
            let marg = SweepRow { m_a1_0: Some(ctx.marginals.m_a1_0), m_0_a2: Some(ctx.marginals.m_0_a2), ..empty };
            match solve_with(&ctx, config) {
                Ok(res) => {
                    let s = &res.summary;
                    SweepRow {
                        energy: Some(s.energy),
                        lambda1: Some(s.lambda1),
                        lambda2: Some(s.lambda2),
                        pohozaev_residual: Some(s.pohozaev_residual),
                        gradient_residual: Some(s.gradient_residual),
                        checks_pass: res.all_checks_pass(),
                        ..marg
                    }
                }
                Err(e) => SweepRow { error: Some(e.to_string()), ..marg },
            }
        })
        .collect();
    let non_increasing = (axis == Axis::Beta).then(|| {
        let e: Vec<T> = rows.iter().filter_map(|r| r.energy).collect();
        e.windows(2).all(|w| w[1] <= w[0])
    });
    SweepTable { axis, rows, non_increasing }
}
