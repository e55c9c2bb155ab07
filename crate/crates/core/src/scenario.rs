//! JSON scenario files and the pipeline behind the command-line tool.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::bounds::{box_counts, verify_bounds, BoundKind, BoundsContext, BoundsParams, BoxMode, BoundsReport};
use crate::grid::{build_grid, Domain};
use crate::groundstate::{groundstate_lower_bound, iterate_m, IterationStatus, IterationTrace};
use crate::potentials::{kato_norm_estimate, sample_potential, PotentialSpec};
use crate::radial3d::{asymptotics_ratio, write_ratios_csv, AsymptoticsOptions, AsymptoticsRow};
use crate::report::write_file;
use crate::spectral::{CountingCurve, Provenance};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    /// `L` on the line, `R` for radial grids.
    pub half_width: f64,
    pub spacing: f64,
    pub window: f64,
}

impl GridConfig {
    pub fn build(&self, dimension: usize) -> Result<Arc<Domain>> {
        build_grid(dimension, self.half_width, self.spacing, self.window)
            .map(Arc::new)
            .map_err(|e| Error::Config(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum MuGrid {
    Linspace { start: f64, stop: f64, count: usize },
    Values { values: Vec<f64> },
}

impl MuGrid {
    pub fn values(&self) -> Vec<f64> {
        match self {
            MuGrid::Values { values } => values.clone(),
            MuGrid::Linspace { start, stop, count } => match *count {
                0 => Vec::new(),
                1 => vec![*start],
                n => (0..n).map(|i| start + (stop - start) * i as f64 / (n - 1) as f64).collect(),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    Comparison,
    ClrSandwich,
    KatoLower,
    KatoSublevelLower,
    KatoClrUpper,
    LtTwoSided,
    Iteration,
    Asymptotics,
}

impl Check {
    pub fn bound_kind(self) -> Option<BoundKind> {
        Some(match self {
            Check::Comparison => BoundKind::Comparison,
            Check::ClrSandwich => BoundKind::ClrSandwich,
            Check::KatoLower => BoundKind::KatoLower,
            Check::KatoSublevelLower => BoundKind::KatoSublevelLower,
            Check::KatoClrUpper => BoundKind::KatoClrUpper,
            Check::LtTwoSided => BoundKind::LtTwoSided,
            Check::Iteration | Check::Asymptotics => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IterationConfig {
    pub initial_shift: f64,
    pub tolerance: f64,
    pub max_steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AsymptoticsConfig {
    pub mu: Vec<f64>,
    #[serde(default)]
    pub oracle: bool,
    #[serde(default)]
    pub substituted: bool,
    pub semiclassical_grid: GridConfig,
    #[serde(default)]
    pub count_grid: Option<GridConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub potential: PotentialSpec,
    pub dimension: usize,
    pub grid: GridConfig,
    #[serde(default)]
    pub shift: Option<f64>,
    #[serde(default)]
    pub mu_grid: Option<MuGrid>,
    #[serde(default)]
    pub negative_mu_grid: Option<MuGrid>,
    #[serde(default)]
    pub checks: Vec<Check>,
    #[serde(default)]
    pub bounds: BoundsParams,
    #[serde(default)]
    pub iteration: Option<IterationConfig>,
    #[serde(default)]
    pub asymptotics: Option<AsymptoticsConfig>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

/// Which part of the pipeline to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Landscape,
    Count,
    Bounds,
    Iterate,
    Asymptotics,
    Run,
}

impl Scenario {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let scenario: Scenario = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        scenario.validate()?;
        Ok(scenario)
    }

    fn needs(&self, stage: Stage) -> Result<()> {
        let uses_shift = matches!(stage, Stage::Landscape | Stage::Count | Stage::Bounds)
            || (stage == Stage::Run && self.checks.iter().any(|c| c.bound_kind().is_some()));
        if uses_shift && self.shift.is_none() {
            return Err(Error::Config("a shift M is required".into()));
        }
        if stage == Stage::Iterate && self.iteration.is_none() {
            return Err(Error::Config("the iteration block is missing".into()));
        }
        if stage == Stage::Asymptotics && self.asymptotics.is_none() {
            return Err(Error::Config("the asymptotics block is missing".into()));
        }
        Ok(())
    }

    /// Checks that every requested computation has its inputs.
    pub fn validate(&self) -> Result<()> {
        let cfg = |m: String| Err(Error::Config(m));
        self.grid.build(self.dimension)?;
        self.potential.validate(self.dimension).map_err(|e| Error::Config(e.to_string()))?;
        if let Some(m) = self.shift {
            if !(m > 0.0 && m.is_finite()) {
                return cfg(format!("shift must be positive, got {m}"));
            }
        }
        for check in &self.checks {
            match check {
                Check::Comparison | Check::ClrSandwich => {
                    if self.mu_grid.is_none() {
                        return cfg(format!("{check:?} needs mu_grid"));
                    }
                    if self.mu_grid.as_ref().unwrap().values().iter().any(|&m| !(m > 0.0)) {
                        return cfg("mu_grid must be positive".into());
                    }
                }
                Check::KatoLower | Check::KatoSublevelLower | Check::KatoClrUpper => {
                    if self.negative_mu_grid.is_none() {
                        return cfg(format!("{check:?} needs negative_mu_grid"));
                    }
                    if self.negative_mu_grid.as_ref().unwrap().values().iter().any(|&m| !(m < 0.0)) {
                        return cfg("negative_mu_grid must be negative".into());
                    }
                }
                Check::LtTwoSided => {}
                Check::Iteration => {
                    let Some(it) = &self.iteration else {
                        return cfg("the iteration check needs an iteration block".into());
                    };
                    if !(it.tolerance > 0.0) || it.max_steps == 0 {
                        return cfg("iteration needs a positive tolerance and max_steps".into());
                    }
                }
                Check::Asymptotics => {
                    let Some(a) = &self.asymptotics else {
                        return cfg("the asymptotics check needs an asymptotics block".into());
                    };
                    if self.dimension != 3 {
                        return cfg("asymptotics are computed for radial problems (dimension 3)".into());
                    }
                    a.semiclassical_grid.build(3)?;
                    if let Some(g) = &a.count_grid {
                        g.build(3)?;
                    }
                    if a.mu.iter().any(|&m| !(m < 0.0)) {
                        return cfg("asymptotics need negative μ values".into());
                    }
                }
            }
            if check.bound_kind().is_some() && self.shift.is_none() {
                return cfg(format!("{check:?} needs a shift"));
            }
        }
        Ok(())
    }
}

/// Result of one pipeline invocation.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: Value,
    /// Every requested check passed.
    pub passed: bool,
    /// One line per failed or not-applicable check.
    pub failures: Vec<String>,
}

pub fn run_scenario(scenario: &Scenario, stage: Stage, out_dir: &Path) -> Result<Outcome> {
    scenario.needs(stage)?;
    let domain = scenario.grid.build(scenario.dimension)?;
    let mut report = serde_json::Map::new();
    report.insert("config".into(), serde_json::to_value(scenario)?);
    let mut failures = Vec::new();

    let wants = |check: Check| stage == Stage::Run && scenario.checks.contains(&check);
    let mu_pos = scenario.mu_grid.as_ref().map(MuGrid::values).unwrap_or_default();
    let mu_neg = scenario.negative_mu_grid.as_ref().map(MuGrid::values).unwrap_or_default();

    let needs_context = matches!(stage, Stage::Landscape | Stage::Count | Stage::Bounds)
        || (stage == Stage::Run && scenario.shift.is_some());
    if needs_context {
        let shift = scenario.shift.expect("validated");
        let v = sample_potential(&scenario.potential, &domain)?;
        let ctx = BoundsContext::new(v, shift, scenario.bounds.clone())?;
        report.insert("diagnostics".into(), diagnostics(scenario, &ctx)?);

        if matches!(stage, Stage::Landscape | Stage::Run) {
            write_file(out_dir, "landscape.csv", |buf| ctx.landscape.write_csv(buf))?;
        }
        if matches!(stage, Stage::Count | Stage::Run) {
            let curves = counting_curves(&ctx, &mu_pos, &mu_neg)?;
            write_file(out_dir, "curves.csv", |buf| {
                use std::io::Write;
                writeln!(buf, "mu,count,provenance")?;
                curves.iter().try_for_each(|c| c.write_rows(buf))
            })?;
        }
        if matches!(stage, Stage::Bounds | Stage::Run) {
            let kinds: Vec<BoundKind> = if stage == Stage::Bounds {
                let requested: Vec<BoundKind> = scenario.checks.iter().filter_map(|c| c.bound_kind()).collect();
                if requested.is_empty() { BoundKind::ALL.to_vec() } else { requested }
            } else {
                scenario.checks.iter().filter_map(|c| c.bound_kind()).collect()
            };
            let mut reports: Vec<BoundsReport> = Vec::new();
            for kind in kinds {
                let r = verify_bounds(kind, &ctx, &mu_pos, &mu_neg)?;
                if !r.passed() {
                    failures.push(describe_failure(&r));
                }
                reports.push(r);
            }
            report.insert("bounds".into(), serde_json::to_value(&reports)?);
        }
    }

    if stage == Stage::Iterate || wants(Check::Iteration) {
        let it = scenario.iteration.expect("validated");
        let trace = iterate_m(&scenario.potential, &domain, it.initial_shift, it.tolerance, it.max_steps)?;
        if let Some(reason) = iteration_problem(&trace) {
            failures.push(format!("iteration: {reason}"));
        }
        write_file(out_dir, "trace.csv", |buf| trace.write_csv(buf))?;
        report.insert("iteration".into(), serde_json::to_value(&trace)?);
    }

    if stage == Stage::Asymptotics || wants(Check::Asymptotics) {
        let rows = run_asymptotics(scenario)?;
        write_file(out_dir, "ratios.csv", |buf| write_ratios_csv(&rows, buf))?;
        report.insert("asymptotics".into(), serde_json::to_value(&rows)?);
    }

    let passed = failures.is_empty();
    report.insert("passed".into(), Value::Bool(passed));
    report.insert("failures".into(), serde_json::to_value(&failures)?);
    let report = Value::Object(report);
    write_file(out_dir, "report.json", |buf| {
        serde_json::to_writer_pretty(&mut *buf, &report)?;
        buf.push(b'\n');
        Ok(())
    })?;
    Ok(Outcome { report, passed, failures })
}

fn diagnostics(scenario: &Scenario, ctx: &BoundsContext) -> Result<Value> {
    let kato = kato_norm_estimate(&scenario.potential, scenario.dimension).ok();
    Ok(json!({
        "shift": ctx.shift,
        "residual": ctx.landscape.residual(),
        "max_u": ctx.landscape.max(),
        "groundstate_lower_bound": groundstate_lower_bound(&ctx.landscape),
        "e0": ctx.e0(),
        "negative_eigenvalues": ctx.eigenvalues,
        "harnack": ctx.harnack,
        "kato_norm": kato,
        "boundary_margin_ok": ctx.landscape.domain().as_line().map(|g| g.boundary_margin_ok(ctx.shift)),
    }))
}

fn counting_curves(ctx: &BoundsContext, mu_pos: &[f64], mu_neg: &[f64]) -> Result<Vec<CountingCurve>> {
    let mut curves = Vec::new();
    let line = ctx.landscape.domain().as_line().is_some();
    if !mu_neg.is_empty() {
        let mut sorted = mu_neg.to_vec();
        sorted.sort_by(f64::total_cmp);
        // rows with μ < 0 count -Δ + V
        let counts = sorted.iter().map(|&m| ctx.count(m)).collect::<Result<Vec<_>>>()?;
        curves.push(CountingCurve { mu: sorted.clone(), counts, provenance: Provenance::Inertia });
        if line {
            let mode = BoxMode::Kato { c: ctx.params.kato_c, c_c: ctx.harnack.c_c };
            curves.push(box_curve(ctx, &sorted, mode, Provenance::BoxKato)?);
        }
    }
    if !mu_pos.is_empty() {
        let mut sorted = mu_pos.to_vec();
        sorted.sort_by(f64::total_cmp);
        // rows with μ > 0 count -Δ + V + M
        let counts = sorted.iter().map(|&m| ctx.shifted_count(m)).collect::<Result<Vec<_>>>()?;
        curves.push(CountingCurve { mu: sorted.clone(), counts, provenance: Provenance::Inertia });
        if line {
            curves.push(box_curve(ctx, &sorted, BoxMode::Upper, Provenance::BoxUpper)?);
            curves.push(box_curve(ctx, &sorted, BoxMode::Lower, Provenance::BoxLower)?);
        }
    }
    Ok(curves)
}

/// Box counts where the partition exists; μ values whose side leaves
/// `[h, 2W]` are skipped.
fn box_curve(ctx: &BoundsContext, mu: &[f64], mode: BoxMode, provenance: Provenance) -> Result<CountingCurve> {
    let mut kept = Vec::new();
    let mut counts = Vec::new();
    for &m in mu {
        match box_counts(&ctx.landscape, m, mode) {
            Ok(c) => {
                kept.push(m);
                counts.push(c);
            }
            Err(Error::InvalidPartition(_)) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(CountingCurve { mu: kept, counts, provenance })
}

fn run_asymptotics(scenario: &Scenario) -> Result<Vec<AsymptoticsRow>> {
    let a = scenario.asymptotics.as_ref().expect("validated");
    let shift = scenario.shift.unwrap_or(1.0);
    let count_grid = match &a.count_grid {
        Some(g) => Some(g.build(3)?),
        None if !a.oracle || a.substituted => Some(scenario.grid.build(3)?),
        None => None,
    };
    let options = AsymptoticsOptions {
        semiclassical_grid: a.semiclassical_grid.build(3)?,
        count_grid,
        oracle: a.oracle,
        substituted: a.substituted,
    };
    asymptotics_ratio(&scenario.potential, shift, &a.mu, &options)
}

fn iteration_problem(trace: &IterationTrace) -> Option<String> {
    let shifts = trace.shifts();
    if shifts.windows(2).any(|w| w[1] >= w[0]) {
        return Some("shifts are not strictly decreasing".into());
    }
    if trace.status == IterationStatus::MaxSteps {
        return Some("no convergence within max_steps".into());
    }
    None
}

fn describe_failure(r: &BoundsReport) -> String {
    let name = serde_json::to_value(r.kind).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
    match (&r.status, r.worst_row()) {
        (crate::bounds::Status::NotApplicable { reason }, _) => format!("{name}: not applicable ({reason})"),
        (_, Some(row)) => format!(
            "{name}: {} violation(s); worst at {} = {}: {} vs {} (margin {})",
            r.violations, row.label, row.param, row.lhs, row.rhs, row.margin
        ),
        _ => format!("{name}: failed"),
    }
}
