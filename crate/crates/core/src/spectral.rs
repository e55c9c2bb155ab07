//! Discrete Schrödinger operators, inertia counting and eigenvalue moments.

use std::io::Write;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::grid::Domain;
use crate::potentials::PotentialField;
use crate::report::fmt_float;
use crate::{Error, Result};

/// Symmetric tridiagonal `-Δ_h + V + M`, optionally with the centrifugal
/// term `l(l+1)/r²` of a radial sector.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteOperator {
    domain: Arc<Domain>,
    diag: Vec<f64>,
    off: f64,
    shift: f64,
    angular_momentum: Option<usize>,
}

pub fn assemble(v: &PotentialField, shift: f64) -> DiscreteOperator {
    let h = v.domain().spacing();
    let diag = v.values().iter().map(|&vj| 2.0 / (h * h) + vj + shift).collect();
    DiscreteOperator {
        domain: Arc::clone(v.domain()),
        diag,
        off: -1.0 / (h * h),
        shift,
        angular_momentum: None,
    }
}

/// Sector `l` of a radial problem in the variable `w = r u`.
pub fn assemble_radial(v: &PotentialField, shift: f64, l: usize) -> Result<DiscreteOperator> {
    if v.domain().as_radial().is_none() {
        return Err(Error::InvalidArgument("radial assembly needs a radial grid".into()));
    }
    let h = v.domain().spacing();
    let barrier = (l * (l + 1)) as f64;
    let diag = v
        .values()
        .iter()
        .zip(v.domain().nodes())
        .map(|(&vj, &r)| 2.0 / (h * h) + vj + shift + barrier / (r * r))
        .collect();
    Ok(DiscreteOperator {
        domain: Arc::clone(v.domain()),
        diag,
        off: -1.0 / (h * h),
        shift,
        angular_momentum: Some(l),
    })
}

impl DiscreteOperator {
    /// Operator from explicit diagonal and constant coupling.
    pub fn from_parts(domain: Arc<Domain>, diag: Vec<f64>, off: f64) -> Result<Self> {
        if diag.len() != domain.len() {
            return Err(Error::InvalidArgument(format!(
                "{} diagonal entries for {} nodes",
                diag.len(),
                domain.len()
            )));
        }
        Ok(Self { domain, diag, off, shift: 0.0, angular_momentum: None })
    }

    pub fn domain(&self) -> &Arc<Domain> {
        &self.domain
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn off_diag(&self) -> f64 {
        self.off
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    pub fn angular_momentum(&self) -> Option<usize> {
        self.angular_momentum
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// `H + c I`.
    pub fn shifted_by(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.diag.iter_mut().for_each(|a| *a += c);
        out.shift += c;
        out
    }

    /// Interval containing the whole spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.diag.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (i, &a) in self.diag.iter().enumerate() {
            let neighbours = (i > 0) as u8 + (i + 1 < n) as u8;
            let radius = neighbours as f64 * self.off.abs();
            lo = lo.min(a - radius);
            hi = hi.max(a + radius);
        }
        (lo, hi)
    }

    /// `y = H x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.diag.len();
        (0..n)
            .map(|i| {
                let mut y = self.diag[i] * x[i];
                if i > 0 {
                    y += self.off * x[i - 1];
                }
                if i + 1 < n {
                    y += self.off * x[i + 1];
                }
                y
            })
            .collect()
    }

    /// Negative LDLᵀ pivots of `H - μ I`, or `None` if a pivot vanished.
    fn negative_pivots(&self, mu: f64) -> Option<usize> {
        let off2 = self.off * self.off;
        let mut count = 0;
        let mut d = 1.0;
        for (i, &a) in self.diag.iter().enumerate() {
            d = if i == 0 { a - mu } else { a - mu - off2 / d };
            if d == 0.0 {
                return None;
            }
            if d < 0.0 {
                count += 1;
            }
        }
        Some(count)
    }
}

/// Number of eigenvalues `<= mu`, exact by Sylvester's law of inertia.
pub fn count_below(op: &DiscreteOperator, mu: f64) -> usize {
    if let Some(c) = op.negative_pivots(mu) {
        return c;
    }
    // an exact zero pivot means mu is (numerically) an eigenvalue; move just
    // above it so that it is counted
    let (lo, hi) = op.gershgorin();
    let scale = mu.abs().max(lo.abs()).max(hi.abs()).max(f64::MIN_POSITIVE);
    let mut nudge = f64::EPSILON * scale;
    loop {
        if let Some(c) = op.negative_pivots(mu + nudge) {
            return c;
        }
        nudge *= 2.0;
    }
}

/// Eigenvalues `<= mu`, each bracketed to width `tol` by bisection on the
/// counting function; returned at the bracket midpoints in ascending order.
pub fn spectrum_below(op: &DiscreteOperator, mu: f64, tol: f64) -> Result<Vec<f64>> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let k = count_below(op, mu);
    if k == 0 {
        return Ok(Vec::new());
    }
    let (g_lo, g_hi) = op.gershgorin();
    let lower = g_lo - tol.max(f64::EPSILON * g_lo.abs().max(1.0));
    let upper = mu.min(g_hi);
    let mut eigs = Vec::with_capacity(k);
    let mut a = lower;
    for index in 1..=k {
        // invariant: count(a) < index <= count(b)
        let mut b = upper;
        while b - a > tol {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            if count_below(op, m) >= index {
                b = m;
            } else {
                a = m;
            }
        }
        eigs.push(0.5 * (a + b));
        // the next eigenvalue is not below this bracket's left end
    }
    Ok(eigs)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Provenance {
    #[serde(rename = "inertia")]
    Inertia,
    #[serde(rename = "box-N")]
    BoxUpper,
    #[serde(rename = "box-n")]
    BoxLower,
    #[serde(rename = "box-n_c")]
    BoxKato,
    #[serde(rename = "analytic")]
    Analytic,
}

impl Provenance {
    pub fn label(self) -> &'static str {
        match self {
            Provenance::Inertia => "inertia",
            Provenance::BoxUpper => "box-N",
            Provenance::BoxLower => "box-n",
            Provenance::BoxKato => "box-n_c",
            Provenance::Analytic => "analytic",
        }
    }
}

/// Right-continuous counting function sampled on a sorted μ-grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountingCurve {
    pub mu: Vec<f64>,
    pub counts: Vec<usize>,
    pub provenance: Provenance,
}

fn check_sorted(mu: &[f64]) -> Result<()> {
    if mu.iter().any(|m| !m.is_finite()) || mu.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("μ-grid must be finite and strictly increasing".into()));
    }
    Ok(())
}

impl CountingCurve {
    pub fn from_fn<F>(mu: &[f64], provenance: Provenance, count: F) -> Result<Self>
    where
        F: Fn(f64) -> usize + Sync,
    {
        check_sorted(mu)?;
        let counts = mu.par_iter().map(|&m| count(m)).collect();
        Ok(Self { mu: mu.to_vec(), counts, provenance })
    }

    pub fn from_operator(op: &DiscreteOperator, mu: &[f64]) -> Result<Self> {
        Self::from_fn(mu, Provenance::Inertia, |m| count_below(op, m))
    }

    /// Exact step function of a finite spectrum: breakpoints at each distinct
    /// negative eigenvalue, closed by a final point at zero.
    pub fn from_eigenvalues(eigs: &[f64]) -> Self {
        let mut sorted: Vec<f64> = eigs.iter().copied().filter(|&e| e < 0.0).collect();
        sorted.sort_by(|a, b| a.total_cmp(b));
        let mut mu: Vec<f64> = Vec::new();
        let mut counts = Vec::new();
        for (i, &e) in sorted.iter().enumerate() {
            if mu.last() == Some(&e) {
                *counts.last_mut().unwrap() = i + 1;
            } else {
                mu.push(e);
                counts.push(i + 1);
            }
        }
        mu.push(0.0);
        counts.push(sorted.len() + eigs.iter().filter(|&&e| e == 0.0).count());
        Self { mu, counts, provenance: Provenance::Inertia }
    }

    pub fn is_monotone(&self) -> bool {
        self.counts.windows(2).all(|w| w[0] <= w[1])
    }

    pub fn write_csv<W: Write>(&self, out: &mut W) -> Result<()> {
        writeln!(out, "mu,count,provenance")?;
        self.write_rows(out)
    }

    /// Data rows only, for concatenating several curves under one header.
    pub fn write_rows<W: Write>(&self, out: &mut W) -> Result<()> {
        for (m, c) in self.mu.iter().zip(&self.counts) {
            writeln!(out, "{},{},{}", fmt_float(*m), c, self.provenance.label())?;
        }
        Ok(())
    }
}

/// `Σ |λ|^γ` over the negative entries.
pub fn negative_moment_sum(eigs: &[f64], gamma: f64) -> Result<f64> {
    check_gamma(gamma)?;
    Ok(eigs.iter().filter(|&&e| e < 0.0).map(|e| e.abs().powf(gamma)).sum())
}

/// `γ ∫_0^∞ λ^{γ-1} 𝒩(-λ) dλ`, integrated exactly on the step function
/// `𝒩(μ) = counts[i]` for `μ ∈ [mu[i], mu[i+1])` and zero below `mu[0]`.
pub fn negative_moment_layer_cake(curve: &CountingCurve, gamma: f64) -> Result<f64> {
    check_gamma(gamma)?;
    check_sorted(&curve.mu)?;
    let n = curve.mu.len();
    let mut total = 0.0;
    for i in 0..n {
        let a = curve.mu[i];
        if a >= 0.0 {
            break;
        }
        let b = if i + 1 < n { curve.mu[i + 1].min(0.0) } else { 0.0 };
        total += curve.counts[i] as f64 * (a.abs().powf(gamma) - b.abs().powf(gamma));
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MomentMode {
    Sum,
    LayerCake,
}

pub fn negative_moment(eigs: &[f64], gamma: f64, mode: MomentMode) -> Result<f64> {
    match mode {
        MomentMode::Sum => negative_moment_sum(eigs, gamma),
        MomentMode::LayerCake => negative_moment_layer_cake(&CountingCurve::from_eigenvalues(eigs), gamma),
    }
}

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma > 0.0 && gamma.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("moment exponent must be positive, got {gamma}")))
    }
}
