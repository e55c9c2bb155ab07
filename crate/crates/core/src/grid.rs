//! Uniform Dirichlet-truncated grids, measurement windows and box partitions.
//!
//! A line grid on `[-L, L]` carries the interior nodes `x_k = (k - n/2) h`,
//! `k = 1..n-1` with `n = 2L/h`. Each node owns the dual cell
//! `[x - h/2, x + h/2]`; quadrature weights, sublevel volumes and box
//! membership are all expressed through these dual cells so that the
//! discrete field is treated as piecewise constant.

use std::ops::Range;

use crate::radial3d::RadialGrid;
use crate::{Error, Result};

/// Relative slack used when checking that a length is an integer multiple of
/// the spacing, or that a cell corner sits on the window edge.
pub(crate) const ALIGN_TOL: f64 = 1e-9;

/// Number of spacings in `length`, provided it is an integer.
pub(crate) fn integer_ratio(length: f64, spacing: f64) -> Option<usize> {
    let ratio = length / spacing;
    let rounded = ratio.round();
    if rounded >= 1.0 && (ratio - rounded).abs() <= ALIGN_TOL * ratio.max(1.0) {
        Some(rounded as usize)
    } else {
        None
    }
}

/// Length of the overlap of `[a0, a1]` and `[b0, b1]`.
pub(crate) fn overlap(a0: f64, a1: f64, b0: f64, b1: f64) -> f64 {
    (a1.min(b1) - a0.max(b0)).max(0.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    half_width: f64,
    spacing: f64,
    window: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl Grid {
    /// Line grid on `[-half_width, half_width]` with measurement window
    /// `[-window, window]`.
    pub fn new(half_width: f64, spacing: f64, window: f64) -> Result<Self> {
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(Error::InvalidGrid(format!("spacing must be positive, got {spacing}")));
        }
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "half-width must be positive, got {half_width}"
            )));
        }
        if spacing >= 2.0 * half_width {
            return Err(Error::InvalidGrid(format!(
                "spacing {spacing} must be smaller than the domain length {}",
                2.0 * half_width
            )));
        }
        if !(window > 0.0 && window <= half_width) {
            return Err(Error::InvalidGrid(format!(
                "window half-width {window} must lie in (0, {half_width}]"
            )));
        }
        let cells = integer_ratio(2.0 * half_width, spacing).ok_or_else(|| {
            Error::InvalidGrid(format!("2L/h = {} is not an integer", 2.0 * half_width / spacing))
        })?;
        if cells < 2 {
            return Err(Error::InvalidGrid("grid has no interior nodes".into()));
        }
        let centre = cells as f64 / 2.0;
        let nodes: Vec<f64> = (1..cells).map(|k| (k as f64 - centre) * spacing).collect();
        let weights = nodes
            .iter()
            .map(|&x| overlap(x - 0.5 * spacing, x + 0.5 * spacing, -window, window))
            .collect();
        Ok(Self { half_width, spacing, window, nodes, weights })
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn window(&self) -> f64 {
        self.window
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Length of each node's dual cell inside the window.
    pub fn window_weights(&self) -> &[f64] {
        &self.weights
    }

    /// Whether the gap between window and truncation boundary is at least
    /// `10/sqrt(shift)`, i.e. ten decay lengths of the free resolvent.
    pub fn boundary_margin_ok(&self, shift: f64) -> bool {
        shift > 0.0 && self.half_width - self.window >= 10.0 / shift.sqrt()
    }

    /// Indices of nodes whose dual cell overlaps `(lower, upper)` with
    /// positive length.
    pub fn members(&self, lower: f64, upper: f64) -> Range<usize> {
        let h = self.spacing;
        let offset = self.half_width / h;
        // node index k (0-based) sits at x = -L + (k + 1) h
        let lo = ((lower / h + offset) - 0.5 + ALIGN_TOL).ceil() as i64 - 1;
        let hi = ((upper / h + offset) + 0.5 - ALIGN_TOL).floor() as i64 - 1;
        let lo = lo.max(0) as usize;
        let hi = (hi + 1).clamp(0, self.nodes.len() as i64) as usize;
        lo..hi.max(lo)
    }
}

/// Either a line grid or a radial grid; shared read-only by every field
/// built on it.
#[derive(Debug, Clone, PartialEq)]
pub enum Domain {
    Line(Grid),
    Radial(RadialGrid),
}

impl Domain {
    pub fn nodes(&self) -> &[f64] {
        match self {
            Domain::Line(g) => g.nodes(),
            Domain::Radial(g) => g.nodes(),
        }
    }

    /// Quadrature weight of every node restricted to the window (`h` or
    /// `4π r² h` in the interior, zero outside).
    pub fn window_weights(&self) -> &[f64] {
        match self {
            Domain::Line(g) => g.window_weights(),
            Domain::Radial(g) => g.window_weights(),
        }
    }

    pub fn spacing(&self) -> f64 {
        match self {
            Domain::Line(g) => g.spacing(),
            Domain::Radial(g) => g.spacing(),
        }
    }

    pub fn dimension(&self) -> usize {
        match self {
            Domain::Line(_) => 1,
            Domain::Radial(_) => 3,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes().len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes().is_empty()
    }

    pub fn as_line(&self) -> Option<&Grid> {
        match self {
            Domain::Line(g) => Some(g),
            Domain::Radial(_) => None,
        }
    }

    pub fn as_radial(&self) -> Option<&RadialGrid> {
        match self {
            Domain::Radial(g) => Some(g),
            Domain::Line(_) => None,
        }
    }

    /// Indices of nodes carrying positive window weight.
    pub fn window_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.window_weights()
            .iter()
            .enumerate()
            .filter(|(_, &w)| w > 0.0)
            .map(|(i, _)| i)
    }
}

/// `d = 1` gives a line grid on `[-L, L]`; `d = 3` a radial grid on `(0, L)`
/// with window `r <= W`.
pub fn build_grid(dimension: usize, half_width: f64, spacing: f64, window: f64) -> Result<Domain> {
    match dimension {
        1 => Grid::new(half_width, spacing, window).map(Domain::Line),
        3 => RadialGrid::new(half_width, spacing, window).map(Domain::Radial),
        d => Err(Error::InvalidGrid(format!(
            "dimension {d} is not supported (use 1, or 3 for radial problems)"
        ))),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub lower: f64,
    pub upper: f64,
    /// Nodes whose dual cell overlaps the cell interior.
    pub members: Range<usize>,
}

/// Cells `[kℓ, (k+1)ℓ]` lying inside the window.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxPartition {
    side: f64,
    spacing: f64,
    nodes_start: f64,
    cells: Vec<Cell>,
}

impl BoxPartition {
    pub fn side(&self) -> f64 {
        self.side
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Length of node `j`'s dual cell inside `cell`.
    pub fn member_overlap(&self, cell: &Cell, j: usize) -> f64 {
        let x = self.nodes_start + j as f64 * self.spacing;
        overlap(x - 0.5 * self.spacing, x + 0.5 * self.spacing, cell.lower, cell.upper)
    }

    /// `(min, max)` of a per-node field over each cell's members.
    pub fn extrema(&self, field: &[f64]) -> Vec<(f64, f64)> {
        self.cells
            .iter()
            .map(|c| {
                field[c.members.clone()]
                    .iter()
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
            })
            .collect()
    }
}

pub fn box_partition(grid: &Grid, side: f64) -> Result<BoxPartition> {
    if !(side.is_finite() && side >= grid.spacing() * (1.0 - ALIGN_TOL)) {
        return Err(Error::InvalidPartition(format!(
            "side {side} is below the grid spacing {}",
            grid.spacing()
        )));
    }
    if side > 2.0 * grid.window() * (1.0 + ALIGN_TOL) {
        return Err(Error::InvalidPartition(format!(
            "side {side} exceeds the window length {}",
            2.0 * grid.window()
        )));
    }
    let w = grid.window();
    let first = (-w / side - ALIGN_TOL).ceil() as i64;
    let last = (w / side + ALIGN_TOL).floor() as i64 - 1;
    let cells = (first..=last)
        .map(|k| {
            let lower = k as f64 * side;
            let upper = (k + 1) as f64 * side;
            Cell { lower, upper, members: grid.members(lower, upper) }
        })
        .collect();
    Ok(BoxPartition {
        side,
        spacing: grid.spacing(),
        nodes_start: grid.nodes()[0],
        cells,
    })
}
