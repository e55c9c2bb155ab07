//! Potential families, grid sampling and Kato-norm estimates.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::grid::{overlap, Domain, ALIGN_TOL};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialSpec {
    Zero,
    /// `V = -depth` on `|x| < half_width`, zero outside.
    SquareWell { depth: f64, half_width: f64 },
    /// `V = -|x|^{-exponent}`.
    PowerLaw { exponent: f64 },
    /// Samples at `origin + k * spacing`, one per grid node.
    Tabulated { origin: f64, spacing: f64, values: Vec<f64> },
}

impl PotentialSpec {
    pub fn square_well(depth: f64, half_width: f64) -> Self {
        Self::SquareWell { depth, half_width }
    }

    pub fn power_law(exponent: f64) -> Self {
        Self::PowerLaw { exponent }
    }

    /// Coulomb attraction `-1/|x|`.
    pub fn hydrogen() -> Self {
        Self::PowerLaw { exponent: 1.0 }
    }

    pub fn validate(&self, dimension: usize) -> Result<()> {
        match *self {
            Self::Zero => Ok(()),
            Self::SquareWell { depth, half_width } => {
                if depth > 0.0 && half_width > 0.0 && depth.is_finite() && half_width.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidPotential(format!(
                        "square well needs positive depth and half-width, got ({depth}, {half_width})"
                    )))
                }
            }
            Self::PowerLaw { exponent } => {
                let limit = critical_exponent(dimension);
                if exponent > 0.0 && exponent < limit {
                    Ok(())
                } else {
                    Err(Error::InvalidPotential(format!(
                        "power-law exponent {exponent} must lie in (0, {limit}) for d = {dimension}"
                    )))
                }
            }
            Self::Tabulated { spacing, ref values, .. } => {
                if !(spacing > 0.0) {
                    return Err(Error::InvalidPotential("tabulated spacing must be positive".into()));
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(Error::InvalidPotential("tabulated values must be finite".into()));
                }
                Ok(())
            }
        }
    }

    /// Pointwise value at distance or coordinate `x`. Tabulated potentials
    /// are piecewise constant around each sample.
    pub fn value(&self, x: f64) -> f64 {
        match *self {
            Self::Zero => 0.0,
            Self::SquareWell { depth, half_width } => {
                if x.abs() < half_width {
                    -depth
                } else {
                    0.0
                }
            }
            Self::PowerLaw { exponent } => -x.abs().powf(-exponent),
            Self::Tabulated { origin, spacing, ref values } => {
                let k = ((x - origin) / spacing).round();
                if k < 0.0 || k as usize >= values.len() {
                    0.0
                } else {
                    values[k as usize]
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Self::Zero)
    }
}

/// `min(d, 2)`: the power-law exponents below it are in the Kato class.
pub fn critical_exponent(dimension: usize) -> f64 {
    (dimension as f64).min(2.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PotentialField {
    domain: Arc<Domain>,
    values: Vec<f64>,
}

impl PotentialField {
    pub fn from_values(domain: Arc<Domain>, values: Vec<f64>) -> Result<Self> {
        if values.len() != domain.len() {
            return Err(Error::TabulatedMismatch(format!(
                "{} values for {} nodes",
                values.len(),
                domain.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::SingularNode(domain.nodes()[i]));
        }
        Ok(Self { domain, values })
    }

    pub fn domain(&self) -> &Arc<Domain> {
        &self.domain
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Same domain, every value shifted by `s`.
    pub fn shifted(&self, s: f64) -> Self {
        Self {
            domain: Arc::clone(&self.domain),
            values: self.values.iter().map(|v| v + s).collect(),
        }
    }
}

pub fn sample_potential(spec: &PotentialSpec, domain: &Arc<Domain>) -> Result<PotentialField> {
    spec.validate(domain.dimension())?;
    let nodes = domain.nodes();
    let h = domain.spacing();
    let values = match *spec {
        PotentialSpec::Zero => vec![0.0; nodes.len()],
        PotentialSpec::SquareWell { depth, half_width } => {
            // fraction of the dual cell covered by the well; exact for nodes
            // away from the edge, and removes the O(h) interface error
            nodes
                .iter()
                .map(|&x| {
                    let (lo, hi) = (x - 0.5 * h, x + 0.5 * h);
                    let inside = match domain.as_ref() {
                        Domain::Line(_) => overlap(lo, hi, -half_width, half_width),
                        Domain::Radial(_) => overlap(lo, hi, 0.0, half_width),
                    };
                    -depth * inside / h
                })
                .collect()
        }
        PotentialSpec::PowerLaw { exponent } => {
            if let Some(&x) = nodes.iter().find(|x| x.abs() <= ALIGN_TOL * h) {
                return Err(Error::SingularNode(x));
            }
            nodes.iter().map(|&x| -x.abs().powf(-exponent)).collect()
        }
        PotentialSpec::Tabulated { origin, spacing, ref values } => {
            if values.len() != nodes.len() {
                return Err(Error::TabulatedMismatch(format!(
                    "{} samples for {} grid nodes",
                    values.len(),
                    nodes.len()
                )));
            }
            if (spacing - h).abs() > ALIGN_TOL * h || (origin - nodes[0]).abs() > ALIGN_TOL * h.max(1.0) {
                return Err(Error::TabulatedMismatch(format!(
                    "table (origin {origin}, spacing {spacing}) does not sit on the grid (first node {}, spacing {h})",
                    nodes[0]
                )));
            }
            values.clone()
        }
    };
    PotentialField::from_values(Arc::clone(domain), values)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KatoEstimate {
    pub value: f64,
    /// Largest change of the local integral between the maximizing center
    /// and its neighbours on the finest scan lattice.
    pub tolerance: f64,
    /// Coordinate (d = 1) or distance from the origin (d = 3) of the
    /// maximizing center.
    pub center: f64,
}

/// `sup_x ∫_{B(x,1)} |V(y)| dy` for d = 1, and
/// `sup_x ∫_{B(x,1)} |V(y)| / |x-y| dy` for radial potentials in d = 3.
pub fn kato_norm_estimate(spec: &PotentialSpec, dimension: usize) -> Result<KatoEstimate> {
    if let PotentialSpec::PowerLaw { exponent } = *spec {
        if exponent >= critical_exponent(dimension) {
            return Err(Error::Divergent(format!(
                "|x|^-{exponent} is not locally integrable against the d = {dimension} kernel"
            )));
        }
    }
    spec.validate(dimension)?;
    if spec.is_zero() {
        return Ok(KatoEstimate { value: 0.0, tolerance: 0.0, center: 0.0 });
    }
    match dimension {
        1 => {
            let p = LineAntiderivative::new(spec);
            let (lo, hi) = p.support();
            Ok(sup_search(lo - 1.0, hi + 1.0, |x| p.at(x + 1.0) - p.at(x - 1.0)))
        }
        3 => {
            let f = RadialMoment::new(spec);
            let reach = f.support() + 1.0;
            Ok(sup_search(0.0, reach, |a| f.kato_local(a)))
        }
        d => Err(Error::InvalidArgument(format!("Kato norm is implemented for d = 1 and 3, not {d}"))),
    }
}

/// Coarse lattice scan followed by three rounds of local refinement.
fn sup_search<F>(lo: f64, hi: f64, f: F) -> KatoEstimate
where
    F: Fn(f64) -> f64 + Sync,
{
    const POINTS: usize = 401;
    let scan = |a: f64, b: f64| -> (f64, f64, f64, f64) {
        let step = (b - a) / (POINTS - 1) as f64;
        let values: Vec<f64> = (0..POINTS).into_par_iter().map(|i| f(a + i as f64 * step)).collect();
        let best = values
            .iter()
            .enumerate()
            .fold(0, |k, (i, &v)| if v > values[k] { i } else { k });
        let spread = [best.saturating_sub(1), (best + 1).min(POINTS - 1)]
            .iter()
            .map(|&j| (values[j] - values[best]).abs())
            .fold(0.0, f64::max);
        (a + best as f64 * step, values[best], step, spread)
    };
    let (mut center, mut value, mut step, mut spread) = scan(lo, hi);
    for _ in 0..3 {
        let (c, v, s, t) = scan((center - step).max(lo), (center + step).min(hi));
        if v >= value {
            center = c;
            value = v;
        }
        step = s;
        spread = t;
    }
    KatoEstimate { value, tolerance: spread, center }
}

/// Antiderivative of `|V|` on the line.
struct LineAntiderivative<'a> {
    spec: &'a PotentialSpec,
}

impl<'a> LineAntiderivative<'a> {
    fn new(spec: &'a PotentialSpec) -> Self {
        Self { spec }
    }

    fn support(&self) -> (f64, f64) {
        match *self.spec {
            PotentialSpec::Zero => (0.0, 0.0),
            PotentialSpec::SquareWell { half_width, .. } => (-half_width, half_width),
            PotentialSpec::PowerLaw { .. } => (-2.0, 2.0),
            PotentialSpec::Tabulated { origin, spacing, ref values } => {
                (origin - 0.5 * spacing, origin + (values.len() as f64 - 0.5) * spacing)
            }
        }
    }

    fn at(&self, x: f64) -> f64 {
        match *self.spec {
            PotentialSpec::Zero => 0.0,
            PotentialSpec::SquareWell { depth, half_width } => depth * x.clamp(-half_width, half_width),
            PotentialSpec::PowerLaw { exponent } => {
                x.signum() * x.abs().powf(1.0 - exponent) / (1.0 - exponent)
            }
            PotentialSpec::Tabulated { origin, spacing, ref values } => {
                let start = origin - 0.5 * spacing;
                values
                    .iter()
                    .enumerate()
                    .map(|(k, v)| {
                        let a = start + k as f64 * spacing;
                        v.abs() * (x.clamp(a, a + spacing) - a)
                    })
                    .sum()
            }
        }
    }
}

/// `F(r) = ∫_0^r |V(s)| s ds` for radial potentials.
struct RadialMoment<'a> {
    spec: &'a PotentialSpec,
}

impl<'a> RadialMoment<'a> {
    fn new(spec: &'a PotentialSpec) -> Self {
        Self { spec }
    }

    fn support(&self) -> f64 {
        match *self.spec {
            PotentialSpec::Zero => 0.0,
            PotentialSpec::SquareWell { half_width, .. } => half_width,
            PotentialSpec::PowerLaw { .. } => 2.0,
            PotentialSpec::Tabulated { origin, spacing, ref values } => {
                origin + values.len() as f64 * spacing
            }
        }
    }

    fn at(&self, r: f64) -> f64 {
        match *self.spec {
            PotentialSpec::Zero => 0.0,
            PotentialSpec::SquareWell { depth, half_width } => 0.5 * depth * r.min(half_width).powi(2),
            PotentialSpec::PowerLaw { exponent } => r.powf(2.0 - exponent) / (2.0 - exponent),
            PotentialSpec::Tabulated { origin, spacing, ref values } => {
                let start = origin - 0.5 * spacing;
                values
                    .iter()
                    .enumerate()
                    .map(|(k, v)| {
                        let a = (start + k as f64 * spacing).max(0.0);
                        let b = (start + (k + 1) as f64 * spacing).min(r).max(a);
                        0.5 * v.abs() * (b * b - a * a)
                    })
                    .sum()
            }
        }
    }

    /// Kernel integral over the unit ball centred at distance `a` from the
    /// origin.
    fn kato_local(&self, a: f64) -> f64 {
        use std::f64::consts::PI;
        if a < 1e-12 {
            return 4.0 * PI * self.at(1.0);
        }
        let g = |s: f64| self.at(a + s) - self.at((a - s).abs());
        let integrate = |x0: f64, x1: f64| quadrature::double_exponential::integrate(&g, x0, x1, 1e-12).integral;
        let total = if a < 1.0 { integrate(0.0, a) + integrate(a, 1.0) } else { integrate(0.0, 1.0) };
        2.0 * PI / a * total
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::build_grid;

    fn line(l: f64, h: f64, w: f64) -> Arc<Domain> {
        Arc::new(build_grid(1, l, h, w).unwrap())
    }

    #[test]
    fn zero_field() {
        let d = line(2.0, 0.25, 2.0);
        let f = sample_potential(&PotentialSpec::Zero, &d).unwrap();
        assert!(f.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn square_well_indicator() {
        let d = line(2.0, 0.5, 2.0);
        let f = sample_potential(&PotentialSpec::square_well(1.0, 1.0), &d).unwrap();
        let at = |x: f64| f.values()[d.nodes().iter().position(|&n| (n - x).abs() < 1e-12).unwrap()];
        assert_eq!(at(0.5), -1.0);
        assert_eq!(at(1.5), 0.0);
        assert_eq!(at(1.0), -0.5);
    }

    #[test]
    fn coulomb_on_radial_grid() {
        let d = Arc::new(build_grid(3, 2.0, 0.25, 2.0).unwrap());
        let f = sample_potential(&PotentialSpec::hydrogen(), &d).unwrap();
        assert_eq!(f.values()[0], -4.0);
    }

    #[test]
    fn power_law_rejects_origin_and_exponent() {
        let d = line(2.0, 0.5, 2.0);
        assert!(matches!(
            sample_potential(&PotentialSpec::power_law(0.5), &d),
            Err(Error::SingularNode(_))
        ));
        assert!(sample_potential(&PotentialSpec::power_law(1.0), &d).is_err());
        let r = Arc::new(build_grid(3, 2.0, 0.25, 2.0).unwrap());
        assert!(sample_potential(&PotentialSpec::power_law(2.0), &r).is_err());
    }

    #[test]
    fn tabulated_must_match() {
        let d = line(1.0, 0.5, 1.0);
        let good = PotentialSpec::Tabulated { origin: -0.5, spacing: 0.5, values: vec![1.0, 2.0, 3.0] };
        assert_eq!(sample_potential(&good, &d).unwrap().values(), &[1.0, 2.0, 3.0]);
        let short = PotentialSpec::Tabulated { origin: -0.5, spacing: 0.5, values: vec![1.0, 2.0] };
        assert!(matches!(sample_potential(&short, &d), Err(Error::TabulatedMismatch(_))));
        let shifted = PotentialSpec::Tabulated { origin: -0.25, spacing: 0.5, values: vec![1.0; 3] };
        assert!(matches!(sample_potential(&shifted, &d), Err(Error::TabulatedMismatch(_))));
    }

    #[test]
    fn spec_round_trips_through_json() {
        let spec = PotentialSpec::square_well(1.0, 1.0);
        let text = serde_json::to_string(&spec).unwrap();
        assert_eq!(text, r#"{"kind":"square_well","depth":1.0,"half_width":1.0}"#);
        assert_eq!(serde_json::from_str::<PotentialSpec>(&text).unwrap(), spec);
    }

    #[test]
    fn kato_zero() {
        assert_eq!(kato_norm_estimate(&PotentialSpec::Zero, 1).unwrap().value, 0.0);
    }

    #[test]
    fn kato_square_well_line() {
        let k = kato_norm_estimate(&PotentialSpec::square_well(1.0, 0.5), 1).unwrap();
        assert!((k.value - 1.0).abs() < 1e-12);
        let k2 = kato_norm_estimate(&PotentialSpec::square_well(3.0, 0.5), 1).unwrap();
        assert!((k2.value - 3.0 * k.value).abs() < 1e-12);
        let wide = kato_norm_estimate(&PotentialSpec::square_well(1.0, 4.0), 1).unwrap();
        assert!((wide.value - 2.0).abs() < 1e-12);
    }

    #[test]
    fn kato_coulomb_radial() {
        let k = kato_norm_estimate(&PotentialSpec::hydrogen(), 3).unwrap();
        let four_pi = 4.0 * std::f64::consts::PI;
        assert!((k.value - four_pi).abs() < 1e-6, "{k:?}");
        assert!(k.center < 1e-2);
    }

    #[test]
    fn kato_divergent_exponents() {
        assert!(matches!(kato_norm_estimate(&PotentialSpec::power_law(2.0), 3), Err(Error::Divergent(_))));
        assert!(matches!(kato_norm_estimate(&PotentialSpec::power_law(1.0), 1), Err(Error::Divergent(_))));
    }

    #[test]
    fn kato_radial_kernel_matches_direct_quadrature() {
        // square well, centre at distance 0.7: average the kernel over the
        // ball with a brute-force midpoint rule in spherical coordinates
        let spec = PotentialSpec::square_well(1.0, 0.8);
        let f = RadialMoment::new(&spec);
        let a = 0.7;
        let n = 400;
        let mut direct = 0.0;
        for i in 0..n {
            let s = (i as f64 + 0.5) / n as f64;
            for j in 0..n {
                let c = -1.0 + 2.0 * (j as f64 + 0.5) / n as f64;
                let r = (a * a + s * s + 2.0 * a * s * c).sqrt();
                if r < 0.8 {
                    direct += s * (1.0 / n as f64) * (2.0 / n as f64) * 2.0 * std::f64::consts::PI;
                }
            }
        }
        assert!((f.kato_local(a) - direct).abs() < 2e-2 * direct);
    }
}
