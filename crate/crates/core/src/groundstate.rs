//! Ground-state lower bound `E₀ >= inf (1/u_M - M)` and the monotone
//! iteration `M_{n+1} = M_n - inf 1/u_{M_n}`.

use std::io::Write;
use std::sync::Arc;

use serde::Serialize;

use crate::grid::Domain;
use crate::landscape::{landscape_for, LandscapeField};
use crate::potentials::PotentialSpec;
use crate::report::fmt_float;
use crate::{Error, Result};

/// `min over the window of 1/u - M`.
pub fn groundstate_lower_bound(u: &LandscapeField) -> f64 {
    let w = u.effective_potential();
    u.domain()
        .window_indices()
        .map(|i| w[i])
        .fold(f64::INFINITY, f64::min)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IterationStep {
    pub step: usize,
    pub shift: f64,
    /// `inf 1/u_{M_n}` over the window.
    pub inf_inverse: f64,
    /// `max u_{M_n}` over the grid.
    pub max_u: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IterationStatus {
    /// The last step was shorter than the tolerance.
    Converged,
    /// The next shift fell to (or below) zero; for potentials vanishing at
    /// infinity `-E₀ >= 0`, so the iteration stops at this boundary.
    DomainBoundary,
    MaxSteps,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationTrace {
    pub steps: Vec<IterationStep>,
    pub status: IterationStatus,
    /// Estimate of `E₀`, i.e. minus the limit of the shifts.
    pub estimate: f64,
}

impl IterationTrace {
    pub fn shifts(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.shift).collect()
    }

    pub fn write_csv<W: Write>(&self, out: &mut W) -> Result<()> {
        writeln!(out, "step,M,inf_inv_u,max_u")?;
        for s in &self.steps {
            writeln!(
                out,
                "{},{},{},{}",
                s.step,
                fmt_float(s.shift),
                fmt_float(s.inf_inverse),
                fmt_float(s.max_u)
            )?;
        }
        Ok(())
    }
}

/// Runs `M_{n+1} = M_n - inf 1/u_{M_n}` from `m0`. Every landscape solve
/// certifies `M_n > -E₀` by inertia.
pub fn iterate_m(
    spec: &PotentialSpec,
    domain: &Arc<Domain>,
    m0: f64,
    tol: f64,
    max_steps: usize,
) -> Result<IterationTrace> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let mut steps = Vec::new();
    let mut m = m0;
    for step in 0..max_steps {
        let u = landscape_for(spec, domain, m).map_err(|e| match e {
            Error::Indefinite { count } => Error::Iteration {
                step,
                reason: format!("shift {m} is not above -E₀ ({count} eigenvalue(s) at or below it)"),
            },
            other => other,
        })?;
        let inf_inverse = groundstate_lower_bound(&u) + m;
        steps.push(IterationStep { step, shift: m, inf_inverse, max_u: u.max() });

        if !(inf_inverse.is_finite() && inf_inverse > 0.0) {
            return Err(Error::Iteration {
                step,
                reason: format!("non-monotone step: inf 1/u = {inf_inverse}"),
            });
        }
        let next = m - inf_inverse;
        if inf_inverse < tol {
            return Ok(IterationTrace { estimate: -next, steps, status: IterationStatus::Converged });
        }
        if next <= tol {
            return Ok(IterationTrace {
                estimate: -next.max(0.0),
                steps,
                status: IterationStatus::DomainBoundary,
            });
        }
        m = next;
    }
    Ok(IterationTrace { estimate: -m, steps, status: IterationStatus::MaxSteps })
}
