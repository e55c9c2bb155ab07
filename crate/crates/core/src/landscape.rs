//! Landscape functions `u_M` solving `(-Δ + V + M) u = 1`, the effective
//! potential `1/u - M`, and Harnack-type constants of the computed field.

use std::io::Write;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::grid::{box_partition, Domain, Grid};
use crate::potentials::{sample_potential, PotentialSpec};
use crate::report::fmt_float;
use crate::spectral::{assemble, assemble_radial, count_below, DiscreteOperator};
use crate::{Error, Result};

/// Largest accepted normwise relative residual
/// `‖Hu - b‖∞ / (‖H‖∞ ‖u‖∞ + ‖b‖∞)`.
pub const RESIDUAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct LandscapeField {
    domain: Arc<Domain>,
    values: Vec<f64>,
    shift: f64,
    residual: f64,
}

/// Solves `H u = 1` (or `H w = r` on a radial grid, with `u = w / r`).
pub fn solve_landscape(op: &DiscreteOperator) -> Result<LandscapeField> {
    let negative = count_below(op, 0.0);
    if negative > 0 {
        return Err(Error::Indefinite { count: negative });
    }
    let radial = op.domain().as_radial().is_some();
    if radial && op.angular_momentum().unwrap_or(0) != 0 {
        return Err(Error::InvalidArgument("the landscape lives in the l = 0 sector".into()));
    }
    let nodes = op.domain().nodes();
    let rhs: Vec<f64> = if radial { nodes.to_vec() } else { vec![1.0; nodes.len()] };

    let mut x = thomas(op.diag(), op.off_diag(), &rhs)?;
    let mut residual = relative_residual(op, &x, &rhs);
    if residual > RESIDUAL_TOL {
        // one step of iterative refinement
        let r: Vec<f64> = op.apply(&x).iter().zip(&rhs).map(|(hx, b)| b - hx).collect();
        let dx = thomas(op.diag(), op.off_diag(), &r)?;
        x.iter_mut().zip(&dx).for_each(|(xi, d)| *xi += d);
        residual = relative_residual(op, &x, &rhs);
    }
    if !(residual <= RESIDUAL_TOL) {
        return Err(Error::Solver(format!("relative residual {residual:e} exceeds {RESIDUAL_TOL:e}")));
    }
    let values: Vec<f64> = if radial { x.iter().zip(nodes).map(|(w, r)| w / r).collect() } else { x };
    if let Some(i) = values.iter().position(|&u| !(u > 0.0)) {
        return Err(Error::Solver(format!(
            "landscape is not positive at node {} (u = {})",
            nodes[i], values[i]
        )));
    }
    Ok(LandscapeField { domain: Arc::clone(op.domain()), values, shift: op.shift(), residual })
}

/// Samples `spec`, assembles with shift `m` and solves.
pub fn landscape_for(spec: &PotentialSpec, domain: &Arc<Domain>, m: f64) -> Result<LandscapeField> {
    let v = sample_potential(spec, domain)?;
    let op = match domain.as_ref() {
        Domain::Line(_) => assemble(&v, m),
        Domain::Radial(_) => assemble_radial(&v, m, 0)?,
    };
    solve_landscape(&op)
}

fn thomas(diag: &[f64], off: f64, rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut prev_c = 0.0;
    let mut prev_d = 0.0;
    for i in 0..n {
        let denom = diag[i] - off * prev_c;
        if denom == 0.0 || !denom.is_finite() {
            return Err(Error::Solver(format!("zero pivot in tridiagonal solve at row {i}")));
        }
        c[i] = off / denom;
        d[i] = (rhs[i] - off * prev_d) / denom;
        prev_c = c[i];
        prev_d = d[i];
    }
    let mut x = d;
    for i in (0..n.saturating_sub(1)).rev() {
        x[i] -= c[i] * x[i + 1];
    }
    Ok(x)
}

fn relative_residual(op: &DiscreteOperator, x: &[f64], b: &[f64]) -> f64 {
    let hx = op.apply(x);
    let r = hx.iter().zip(b).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let h_norm = op.diag().iter().map(|a| a.abs() + 2.0 * op.off_diag().abs()).fold(0.0, f64::max);
    let x_norm = x.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let b_norm = b.iter().map(|v| v.abs()).fold(0.0, f64::max);
    r / (h_norm * x_norm + b_norm)
}

impl LandscapeField {
    /// Field given directly by its node values, for synthetic tests.
    pub fn from_values(domain: Arc<Domain>, values: Vec<f64>, shift: f64) -> Result<Self> {
        if values.len() != domain.len() {
            return Err(Error::InvalidArgument(format!(
                "{} values for {} nodes",
                values.len(),
                domain.len()
            )));
        }
        if let Some(i) = values.iter().position(|&u| !(u > 0.0)) {
            return Err(Error::InvalidArgument(format!("nonpositive landscape value at node {i}")));
        }
        Ok(Self { domain, values, shift, residual: 0.0 })
    }

    pub fn domain(&self) -> &Arc<Domain> {
        &self.domain
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    pub fn residual(&self) -> f64 {
        self.residual
    }

    /// `1/u` at every node.
    pub fn reciprocal(&self) -> Vec<f64> {
        self.values.iter().map(|u| 1.0 / u).collect()
    }

    /// `W = 1/u - M` at every node.
    pub fn effective_potential(&self) -> Vec<f64> {
        self.values.iter().map(|u| 1.0 / u - self.shift).collect()
    }

    /// Largest value of `u` over the whole grid.
    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `(min, max)` of `u` over the window.
    pub fn window_extrema(&self) -> (f64, f64) {
        self.domain
            .window_indices()
            .map(|i| self.values[i])
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), u| (lo.min(u), hi.max(u)))
    }

    pub fn write_csv<W: Write>(&self, out: &mut W) -> Result<()> {
        writeln!(out, "x,u,W")?;
        for (x, u) in self.domain.nodes().iter().zip(&self.values) {
            writeln!(out, "{},{},{}", fmt_float(*x), fmt_float(*u), fmt_float(1.0 / u - self.shift))?;
        }
        Ok(())
    }
}

/// `W = 1/u - M`; fails on a nonpositive node.
pub fn effective_potential(u: &LandscapeField) -> Result<Vec<f64>> {
    if let Some(i) = u.values.iter().position(|&v| !(v > 0.0)) {
        return Err(Error::InvalidArgument(format!("nonpositive landscape value at node {i}")));
    }
    Ok(u.effective_potential())
}

/// `h 2^k` for every `k` with `h 2^k <= 2W`.
pub fn dyadic_scales(grid: &Grid) -> Vec<f64> {
    let limit = 2.0 * grid.window() * (1.0 + 1e-12);
    std::iter::successors(Some(grid.spacing()), |s| Some(2.0 * s))
        .take_while(|&s| s <= limit)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoxRecord {
    pub side: f64,
    pub lower: f64,
    pub upper: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HarnackDiagnostics {
    /// `max(1, max_Q sup_Q u / (inf_Q u + ℓ²))`; line grids only.
    pub c_hm: Option<f64>,
    /// The box realizing the unclipped maximum.
    pub c_hm_box: Option<BoxRecord>,
    /// `sup u / inf u` over the window.
    pub a_m: f64,
    pub kato_c: f64,
    /// `(c - 1) / (2^d (5 A_M)²)`.
    pub c_c: f64,
    /// `min_Q sup_Q W / inf_Q W` over boxes with `sup_Q W < 0`, the largest
    /// constant with `sup_Q W <= C inf_Q W` on every such box.
    pub c_tilde_h: Option<f64>,
    pub c_tilde_box: Option<BoxRecord>,
    /// Boxes that entered the minimum above.
    pub c_tilde_boxes: usize,
    /// Boxes with `sup_Q W <= -c / (C_c ℓ²)`.
    pub c_tilde_strict_boxes: usize,
    pub scales: Vec<f64>,
}

pub fn harnack_constants(u: &LandscapeField, scales: &[f64]) -> Result<HarnackDiagnostics> {
    harnack_constants_with(u, scales, 2.0)
}

pub fn harnack_constants_with(u: &LandscapeField, scales: &[f64], kato_c: f64) -> Result<HarnackDiagnostics> {
    if !(kato_c > 1.0) {
        return Err(Error::InvalidArgument(format!("the constant c must exceed 1, got {kato_c}")));
    }
    let (lo, hi) = u.window_extrema();
    let a_m = hi / lo;
    let d = u.domain.dimension() as i32;
    let c_c = (kato_c - 1.0) / (2f64.powi(d) * (5.0 * a_m).powi(2));

    let mut diag = HarnackDiagnostics {
        c_hm: None,
        c_hm_box: None,
        a_m,
        kato_c,
        c_c,
        c_tilde_h: None,
        c_tilde_box: None,
        c_tilde_boxes: 0,
        c_tilde_strict_boxes: 0,
        scales: scales.to_vec(),
    };
    let Some(grid) = u.domain.as_line() else {
        return Ok(diag);
    };

    let (c_hm_raw, c_hm_box) = harnack_moser_on_scales(u, scales)?;
    diag.c_hm = Some(c_hm_raw.max(1.0));
    diag.c_hm_box = c_hm_box;

    let w = u.effective_potential();
    let per_scale: Vec<(Option<BoxRecord>, usize, usize)> = scales
        .par_iter()
        .map(|&side| {
            let part = box_partition(grid, side)?;
            let threshold = -kato_c / (c_c * side * side);
            let mut best: Option<BoxRecord> = None;
            let (mut boxes, mut strict) = (0, 0);
            for (cell, (inf, sup)) in part.cells().iter().zip(part.extrema(&w)) {
                if sup >= 0.0 {
                    continue;
                }
                boxes += 1;
                if sup <= threshold {
                    strict += 1;
                }
                let ratio = sup / inf;
                if best.map_or(true, |b| ratio < b.ratio) {
                    best = Some(BoxRecord { side, lower: cell.lower, upper: cell.upper, ratio });
                }
            }
            Ok((best, boxes, strict))
        })
        .collect::<Result<_>>()?;
    for (best, boxes, strict) in per_scale {
        diag.c_tilde_boxes += boxes;
        diag.c_tilde_strict_boxes += strict;
        if let Some(b) = best {
            if diag.c_tilde_box.map_or(true, |cur| b.ratio < cur.ratio) {
                diag.c_tilde_box = Some(b);
            }
        }
    }
    diag.c_tilde_h = diag.c_tilde_box.map(|b| b.ratio);
    Ok(diag)
}

/// Unclipped `max_Q sup_Q u / (inf_Q u + ℓ²)` over the partitions of the
/// given sides, with the maximizing box.
pub fn harnack_moser_on_scales(u: &LandscapeField, scales: &[f64]) -> Result<(f64, Option<BoxRecord>)> {
    let grid = u
        .domain
        .as_line()
        .ok_or_else(|| Error::InvalidArgument("box scans need a line grid".into()))?;
    let per_scale: Vec<Option<BoxRecord>> = scales
        .par_iter()
        .map(|&side| {
            let part = box_partition(grid, side)?;
            let mut best: Option<BoxRecord> = None;
            for (cell, (inf, sup)) in part.cells().iter().zip(part.extrema(&u.values)) {
                let ratio = sup / (inf + side * side);
                if best.map_or(true, |b| ratio > b.ratio) {
                    best = Some(BoxRecord { side, lower: cell.lower, upper: cell.upper, ratio });
                }
            }
            Ok(best)
        })
        .collect::<Result<_>>()?;
    let best = per_scale
        .into_iter()
        .flatten()
        .fold(None::<BoxRecord>, |acc, b| match acc {
            Some(a) if a.ratio >= b.ratio => Some(a),
            _ => Some(b),
        });
    Ok((best.map_or(0.0, |b| b.ratio), best))
}
