//! Radial potentials in three dimensions: partial-wave counting, the radial
//! landscape and the small-|μ| asymptotics of the counting function.

use std::f64::consts::PI;
use std::io::Write;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::analytic::hydrogen_count;
use crate::bounds::{semiclassical_integral, weyl_prefactor};
use crate::grid::{integer_ratio, Domain};
use crate::landscape::{landscape_for, LandscapeField};
use crate::potentials::{sample_potential, PotentialField, PotentialSpec};
use crate::report::{fmt_float, fmt_opt};
use crate::spectral::{assemble_radial, count_below, spectrum_below};
use crate::{Error, Result};

/// Nodes `r_j = j h`, `j = 1..R/h - 1`, Dirichlet at `0` and `R` for
/// `w = r u`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    radius: f64,
    spacing: f64,
    window: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl RadialGrid {
    pub fn new(radius: f64, spacing: f64, window: f64) -> Result<Self> {
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(Error::InvalidGrid(format!("spacing must be positive, got {spacing}")));
        }
        if !(radius > spacing && radius.is_finite()) {
            return Err(Error::InvalidGrid(format!("radius {radius} must exceed the spacing {spacing}")));
        }
        if !(window > 0.0 && window <= radius) {
            return Err(Error::InvalidGrid(format!("window radius {window} must lie in (0, {radius}]")));
        }
        let cells = integer_ratio(radius, spacing)
            .ok_or_else(|| Error::InvalidGrid(format!("R/h = {} is not an integer", radius / spacing)))?;
        if cells < 2 {
            return Err(Error::InvalidGrid("radial grid has no interior nodes".into()));
        }
        let nodes: Vec<f64> = (1..cells).map(|j| j as f64 * spacing).collect();
        let weights = nodes
            .iter()
            .enumerate()
            .map(|(j, &r)| {
                // the first cell absorbs [0, h/2]
                let lo = if j == 0 { 0.0 } else { r - 0.5 * spacing };
                let a = lo.min(window);
                let b = (r + 0.5 * spacing).min(window);
                4.0 * PI * (b.powi(3) - a.powi(3)) / 3.0
            })
            .collect();
        Ok(Self { radius, spacing, window, nodes, weights })
    }

    pub fn radius(&self) -> f64 {
        self.radius
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

    /// Shell volume of each node's dual cell inside the window.
    pub fn window_weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

fn radial_domain(domain: &Arc<Domain>) -> Result<&RadialGrid> {
    domain
        .as_radial()
        .ok_or_else(|| Error::InvalidArgument("radial computations need a radial grid".into()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadialCount {
    pub total: u64,
    /// Eigenvalue count of each sector `l = 0, 1, ...` without the `2l + 1`
    /// degeneracy.
    pub per_l: Vec<usize>,
}

/// `Σ_l (2l+1) #{eigenvalues of h_l <= μ}`, stopping after two consecutive
/// empty sectors, then evaluating `extra_l` further sectors.
pub fn radial_count_field(v: &PotentialField, mu: f64, extra_l: usize) -> Result<RadialCount> {
    radial_domain(v.domain())?;
    if !(mu < 0.0) {
        return Err(Error::InvalidArgument(format!("radial counting needs μ < 0, got {mu}")));
    }
    const BATCH: usize = 8;
    let mut per_l: Vec<usize> = Vec::new();
    let mut zeros = 0;
    let mut stop = None;
    while stop.is_none() {
        let start = per_l.len();
        let batch: Vec<usize> = (start..start + BATCH)
            .into_par_iter()
            .map(|l| assemble_radial(v, 0.0, l).map(|op| count_below(&op, mu)))
            .collect::<Result<_>>()?;
        for c in batch {
            per_l.push(c);
            zeros = if c == 0 { zeros + 1 } else { 0 };
            if zeros == 2 {
                stop = Some(per_l.len());
                break;
            }
        }
    }
    per_l.truncate(stop.unwrap_or(per_l.len()));
    let start = per_l.len();
    let extra: Vec<usize> = (start..start + extra_l)
        .into_par_iter()
        .map(|l| assemble_radial(v, 0.0, l).map(|op| count_below(&op, mu)))
        .collect::<Result<_>>()?;
    per_l.extend(extra);
    let total = per_l.iter().enumerate().map(|(l, &c)| (2 * l as u64 + 1) * c as u64).sum();
    Ok(RadialCount { total, per_l })
}

pub fn radial_count(spec: &PotentialSpec, mu: f64, grid: &Arc<Domain>) -> Result<u64> {
    let v = sample_potential(spec, grid)?;
    Ok(radial_count_field(&v, mu, 0)?.total)
}

pub fn radial_landscape(spec: &PotentialSpec, shift: f64, grid: &Arc<Domain>) -> Result<LandscapeField> {
    radial_domain(grid)?;
    landscape_for(spec, grid, shift)
}

/// Eigenvalues `<= mu` of sector `l`.
pub fn sector_levels(v: &PotentialField, l: usize, mu: f64, tol: f64) -> Result<Vec<f64>> {
    spectrum_below(&assemble_radial(v, 0.0, l)?, mu, tol)
}

/// Least-squares slope of `log|diff|` against `log r` over the nodes in
/// `[r_min, r_max]`, returned as the decay exponent `-slope`.
pub fn decay_exponent(r: &[f64], diff: &[f64], r_min: f64, r_max: f64) -> Result<f64> {
    let pts: Vec<(f64, f64)> = r
        .iter()
        .zip(diff)
        .filter(|(&x, &y)| x >= r_min && x <= r_max && y != 0.0)
        .map(|(&x, &y)| (x.ln(), y.abs().ln()))
        .collect();
    if pts.len() < 2 {
        return Err(Error::InvalidArgument("decay fit needs at least two nonzero samples".into()));
    }
    let n = pts.len() as f64;
    let (mx, my) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x / n, b + y / n));
    let (sxy, sxx) = pts
        .iter()
        .fold((0.0, 0.0), |(a, b), (x, y)| (a + (x - mx) * (y - my), b + (x - mx) * (x - mx)));
    Ok(-sxy / sxx)
}

#[derive(Debug, Clone)]
pub struct AsymptoticsOptions {
    /// Radial grid for the landscape entering the semiclassical integral.
    pub semiclassical_grid: Arc<Domain>,
    /// Radial grid for numerical counts and for the substituted potential.
    pub count_grid: Option<Arc<Domain>>,
    /// Use the hydrogen level formula for column (a).
    pub oracle: bool,
    /// Compute column (c).
    pub substituted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AsymptoticsRow {
    pub mu: f64,
    pub count_exact: Option<u64>,
    pub semiclassical: f64,
    /// Whether the classically allowed region of `W` reaches the window edge.
    pub truncated: bool,
    pub count_substituted: Option<u64>,
    pub ratio_b: Option<f64>,
    pub ratio_c: Option<f64>,
}

/// Counting function versus the Weyl-prefactored integral
/// `∫(μ - W)₊^{3/2}` of the effective potential `W = 1/u_M - M`, and versus
/// the count for `W` used as a potential.
pub fn asymptotics_ratio(
    spec: &PotentialSpec,
    shift: f64,
    mus: &[f64],
    options: &AsymptoticsOptions,
) -> Result<Vec<AsymptoticsRow>> {
    if let Some(&bad) = mus.iter().find(|&&m| !(m < 0.0)) {
        return Err(Error::InvalidArgument(format!("asymptotics need μ < 0, got {bad}")));
    }
    if options.oracle && *spec != PotentialSpec::hydrogen() {
        return Err(Error::InvalidArgument("the level-formula oracle only covers -1/|x|".into()));
    }
    let count_grid = match (&options.count_grid, options.oracle, options.substituted) {
        (Some(g), _, _) => Some(radial_domain(g).map(|_| g)?),
        (None, true, false) => None,
        _ => return Err(Error::InvalidArgument("numerical counts need a count grid".into())),
    };

    let landscape = radial_landscape(spec, shift, &options.semiclassical_grid)?;
    let w = landscape.effective_potential();
    let sc_grid = radial_domain(&options.semiclassical_grid)?;
    let last_in_window = sc_grid.window_weights().iter().rposition(|&x| x > 0.0).unwrap_or(0);

    let v_count = match count_grid {
        Some(g) if !options.oracle => Some(sample_potential(spec, g)?),
        _ => None,
    };
    let substituted = match count_grid {
        Some(g) if options.substituted => {
            let u = radial_landscape(spec, shift, g)?;
            Some(PotentialField::from_values(Arc::clone(g), u.effective_potential())?)
        }
        _ => None,
    };

    let prefactor = weyl_prefactor(3);
    mus.iter()
        .map(|&mu| {
            let count_exact = if options.oracle {
                Some(hydrogen_count(mu)?)
            } else {
                Some(radial_count_field(v_count.as_ref().expect("count grid"), mu, 0)?.total)
            };
            let semiclassical =
                prefactor * semiclassical_integral(&w, sc_grid.window_weights(), mu, 1.5);
            let truncated = mu - w[last_in_window] > 0.0;
            let count_substituted = match (&substituted, count_grid) {
                // the classically allowed region must fit inside the grid
                (Some(field), Some(g)) if radial_domain(g)?.radius() >= 2.0 / mu.abs() => {
                    Some(radial_count_field(field, mu, 0)?.total)
                }
                _ => None,
            };
            let ratio = |den: Option<f64>| match (count_exact, den) {
                (Some(a), Some(b)) if a > 0 && b > 0.0 => Some(a as f64 / b),
                _ => None,
            };
            Ok(AsymptoticsRow {
                mu,
                count_exact,
                semiclassical,
                truncated,
                count_substituted,
                ratio_b: ratio(Some(semiclassical)),
                ratio_c: ratio(count_substituted.map(|c| c as f64)),
            })
        })
        .collect()
}

pub fn write_ratios_csv<W: Write>(rows: &[AsymptoticsRow], out: &mut W) -> Result<()> {
    writeln!(out, "mu,count_exact,semiclassical,count_substituted,ratio_b,ratio_c")?;
    let int = |x: Option<u64>| x.map_or_else(|| "NA".to_string(), |v| v.to_string());
    for row in rows {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            fmt_float(row.mu),
            int(row.count_exact),
            fmt_float(row.semiclassical),
            int(row.count_substituted),
            fmt_opt(row.ratio_b),
            fmt_opt(row.ratio_c)
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{hydrogen_level, hydrogen_midpoint};
    use crate::grid::build_grid;

    fn radial(r: f64, h: f64, w: f64) -> Arc<Domain> {
        Arc::new(build_grid(3, r, h, w).unwrap())
    }

    #[test]
    fn grid_layout() {
        let g = RadialGrid::new(2.0, 0.5, 2.0).unwrap();
        assert_eq!(g.nodes(), &[0.5, 1.0, 1.5]);
        let vol: f64 = g.window_weights().iter().sum();
        assert!((vol - 4.0 * PI * 1.75f64.powi(3) / 3.0).abs() < 1e-12);
        assert!(RadialGrid::new(2.0, 0.3, 2.0).is_err());
        assert!(RadialGrid::new(2.0, 0.5, 3.0).is_err());
    }

    #[test]
    fn hydrogen_counts_small_grid() {
        let g = radial(200.0, 5e-3, 190.0);
        let spec = PotentialSpec::hydrogen();
        assert_eq!(radial_count(&spec, -0.3, &g).unwrap(), 0);
        let v = sample_potential(&spec, &g).unwrap();
        let c = radial_count_field(&v, -0.06, 0).unwrap();
        assert_eq!(c.total, 5);
        assert_eq!(&c.per_l[..2], &[2, 1]);
        assert!(radial_count_field(&v, 0.0, 0).is_err());
    }

    #[test]
    fn extra_sectors_do_not_change_counts() {
        let g = radial(200.0, 5e-3, 190.0);
        let v = sample_potential(&PotentialSpec::hydrogen(), &g).unwrap();
        for n in [1, 2, 3] {
            let mu = hydrogen_midpoint(n);
            let a = radial_count_field(&v, mu, 0).unwrap();
            let b = radial_count_field(&v, mu, 5).unwrap();
            assert_eq!(a.total, b.total);
            assert_eq!(a.total, hydrogen_count(mu).unwrap());
        }
    }

    #[test]
    fn s_wave_levels() {
        let g = radial(100.0, 5e-3, 90.0);
        let v = sample_potential(&PotentialSpec::hydrogen(), &g).unwrap();
        let levels = sector_levels(&v, 0, -0.02, 1e-12).unwrap();
        assert_eq!(levels.len(), 3);
        for (n, e) in levels.iter().enumerate() {
            let exact = hydrogen_level(n + 1);
            assert!(((e - exact) / exact).abs() < 1e-3, "n = {}: {e}", n + 1);
        }
    }

    #[test]
    fn free_radial_landscape() {
        let g = radial(40.0, 1e-2, 20.0);
        let u = radial_landscape(&PotentialSpec::Zero, 1.0, &g).unwrap();
        // w = r / M solves the sector problem exactly except near r = R
        for i in g.window_indices() {
            assert!((u.values()[i] - 1.0).abs() < 1e-6, "{}", u.values()[i]);
        }
    }

    #[test]
    fn direct_radial_scheme_agrees() {
        let g = radial(60.0, 1e-2, 40.0);
        let spec = PotentialSpec::hydrogen();
        let m = 1.0;
        let u = radial_landscape(&spec, m, &g).unwrap();
        // -u'' - (2/r) u' + (V + M) u = 1 with centred differences
        let r = g.nodes();
        let h = g.spacing();
        let n = r.len();
        let mut lower = vec![0.0; n];
        let mut diag = vec![0.0; n];
        let mut upper = vec![0.0; n];
        for j in 0..n {
            lower[j] = -1.0 / (h * h) + 1.0 / (r[j] * h);
            upper[j] = -1.0 / (h * h) - 1.0 / (r[j] * h);
            diag[j] = 2.0 / (h * h) + spec.value(r[j]) + m;
        }
        let mut cp = vec![0.0; n];
        let mut dp = vec![0.0; n];
        for j in 0..n {
            let denom = diag[j] - if j > 0 { lower[j] * cp[j - 1] } else { 0.0 };
            cp[j] = upper[j] / denom;
            dp[j] = (1.0 - if j > 0 { lower[j] * dp[j - 1] } else { 0.0 }) / denom;
        }
        let mut direct = dp;
        for j in (0..n - 1).rev() {
            direct[j] -= cp[j] * direct[j + 1];
        }
        for i in g.window_indices() {
            let rel = (direct[i] - u.values()[i]).abs() / u.values()[i];
            assert!(rel < 1e-6, "r = {}: {rel}", r[i]);
        }
    }

    #[test]
    fn decay_fit_recovers_power() {
        let r: Vec<f64> = (1..200).map(|i| i as f64).collect();
        let diff: Vec<f64> = r.iter().map(|x| 3.0 * x.powf(-2.5)).collect();
        let p = decay_exponent(&r, &diff, 10.0, 100.0).unwrap();
        assert!((p - 2.5).abs() < 1e-12);
    }

    #[test]
    fn zero_potential_asymptotics_not_applicable() {
        let g = radial(60.0, 0.05, 40.0);
        let opts = AsymptoticsOptions {
            semiclassical_grid: Arc::clone(&g),
            count_grid: Some(g),
            oracle: false,
            substituted: true,
        };
        let rows = asymptotics_ratio(&PotentialSpec::Zero, 1.0, &[-0.1, -0.05], &opts).unwrap();
        for row in rows {
            assert_eq!(row.count_exact, Some(0));
            assert_eq!(row.ratio_b, None);
            assert_eq!(row.ratio_c, None);
        }
        let err = asymptotics_ratio(&PotentialSpec::Zero, 1.0, &[0.1], &AsymptoticsOptions {
            semiclassical_grid: radial(10.0, 0.1, 5.0),
            count_grid: None,
            oracle: false,
            substituted: false,
        });
        assert!(err.is_err());
    }
}
