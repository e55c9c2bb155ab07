use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use proptest::prelude::*;

use landscape_bounds::analytic::{squarewell_e0, squarewell_inf_effective, SquareWellClosedForm};
use landscape_bounds::bounds::{verify_bounds, BoundKind, BoundsContext, BoundsParams};
use landscape_bounds::groundstate::groundstate_lower_bound;
use landscape_bounds::landscape::landscape_for;
use landscape_bounds::potentials::kato_norm_estimate;
use landscape_bounds::radial3d::radial_count_field;
use landscape_bounds::spectral::{negative_moment, MomentMode};
use landscape_bounds::*;

fn line(l: f64, h: f64, w: f64) -> Arc<Domain> {
    Arc::new(build_grid(1, l, h, w).unwrap())
}

fn field(domain: &Arc<Domain>, values: Vec<f64>) -> PotentialField {
    PotentialField::from_values(Arc::clone(domain), values).unwrap()
}

fn dense_eigenvalues(op: &DiscreteOperator) -> Vec<f64> {
    let n = op.len();
    let mut m = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = op.diag()[i];
        if i + 1 < n {
            m[(i, i + 1)] = op.off_diag();
            m[(i + 1, i)] = op.off_diag();
        }
    }
    let mut eigs: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
    eigs.sort_by(f64::total_cmp);
    eigs
}

/// μ values on a uniform grid over the spectrum, minus those too close to an
/// eigenvalue for a floating-point count to be meaningful.
fn safe_mus(op: &DiscreteOperator, eigs: &[f64], n: usize) -> Vec<f64> {
    let (lo, hi) = op.gershgorin();
    let gap = 1e-9 * lo.abs().max(hi.abs());
    (0..n)
        .map(|i| lo - 1.0 + (hi - lo + 2.0) * i as f64 / (n - 1) as f64)
        .filter(|mu| eigs.iter().all(|e| (e - mu).abs() > gap))
        .collect()
}

fn small_potential() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-60.0f64..60.0, 199)
}

fn well() -> impl Strategy<Value = (f64, f64)> {
    (0.2f64..4.0, 0.3f64..2.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn inertia_matches_dense_eigensolver(values in small_potential(), shift in -5.0f64..5.0) {
        let d = line(1.0, 0.01, 0.5);
        let op = assemble(&field(&d, values), shift);
        let eigs = dense_eigenvalues(&op);
        for mu in safe_mus(&op, &eigs, 100) {
            let dense = eigs.iter().filter(|&&e| e <= mu).count();
            prop_assert_eq!(count_below(&op, mu), dense, "mu = {}", mu);
        }
    }

    #[test]
    fn counting_is_monotone_and_shift_covariant(values in small_potential(), c in -100.0f64..100.0) {
        let d = line(1.0, 0.01, 0.5);
        let op = assemble(&field(&d, values), 0.0);
        let eigs = dense_eigenvalues(&op);
        let mus = safe_mus(&op, &eigs, 100);
        let counts: Vec<usize> = mus.iter().map(|&m| count_below(&op, m)).collect();
        prop_assert!(counts.windows(2).all(|w| w[0] <= w[1]));
        let moved = op.shifted_by(c);
        let gap = 1e-9 * (op.gershgorin().1.abs() + c.abs());
        for (&mu, &n) in mus.iter().zip(&counts) {
            if eigs.iter().all(|e| (e - mu).abs() > gap) {
                prop_assert_eq!(count_below(&moved, mu + c), n);
            }
        }
    }

    #[test]
    fn larger_potential_has_fewer_eigenvalues(values in small_potential(), bump in prop::collection::vec(0.0f64..30.0, 199)) {
        let d = line(1.0, 0.01, 0.5);
        let v2: Vec<f64> = values.iter().zip(&bump).map(|(a, b)| a + b).collect();
        let op1 = assemble(&field(&d, values), 0.0);
        let op2 = assemble(&field(&d, v2), 0.0);
        let (lo, hi) = op1.gershgorin();
        for i in 0..100 {
            let mu = lo + (hi - lo) * i as f64 / 99.0;
            prop_assert!(count_below(&op1, mu) >= count_below(&op2, mu));
        }
    }

    #[test]
    fn layer_cake_matches_sum(
        eigs in prop::collection::vec(-20.0f64..-1e-6, 0..60),
        repeats in prop::collection::vec(1usize..4, 60),
        gamma in 0.5f64..3.0,
    ) {
        let mut spectrum = Vec::new();
        for (e, r) in eigs.iter().zip(&repeats) {
            spectrum.extend(std::iter::repeat(*e).take(*r));
        }
        let sum = negative_moment(&spectrum, gamma, MomentMode::Sum).unwrap();
        let cake = negative_moment(&spectrum, gamma, MomentMode::LayerCake).unwrap();
        prop_assert!((sum - cake).abs() <= 1e-10 * sum.max(1.0), "{} vs {}", sum, cake);
    }

    #[test]
    fn partitions_refine(j in 1usize..40, k in 2usize..4, w_steps in 20usize..80) {
        let h = 0.01;
        let grid = Grid::new(1.0, h, w_steps as f64 * h).unwrap();
        let fine_side = j as f64 * h;
        let coarse_side = fine_side * k as f64;
        prop_assume!(coarse_side <= 2.0 * grid.window());
        let coarse = box_partition(&grid, coarse_side).unwrap();
        let fine = box_partition(&grid, fine_side).unwrap();
        let tol = 1e-9;
        for c in coarse.cells() {
            prop_assert!(c.lower >= -grid.window() - tol && c.upper <= grid.window() + tol);
            let parts: Vec<_> = fine
                .cells()
                .iter()
                .filter(|f| f.lower >= c.lower - tol && f.upper <= c.upper + tol)
                .collect();
            prop_assert_eq!(parts.len(), k);
            prop_assert!((parts[0].lower - c.lower).abs() < tol);
            prop_assert!((parts[k - 1].upper - c.upper).abs() < tol);
            prop_assert_eq!(parts[0].members.start, c.members.start);
            prop_assert_eq!(parts[k - 1].members.end, c.members.end);
        }
        for pair in fine.cells().windows(2) {
            prop_assert!(pair[0].upper <= pair[1].lower + tol);
        }
    }

    #[test]
    fn kato_norm_scales_with_depth((eps, delta) in well(), factor in 0.1f64..10.0) {
        let a = kato_norm_estimate(&PotentialSpec::square_well(eps, delta), 1).unwrap();
        let b = kato_norm_estimate(&PotentialSpec::square_well(eps * factor, delta), 1).unwrap();
        prop_assert!((b.value - factor * a.value).abs() <= 1e-9 * b.value);
    }

    #[test]
    fn kato_norm_is_translation_invariant(values in prop::collection::vec(-3.0f64..3.0, 3..12), shift in -20i32..20) {
        let spacing = 0.25;
        let base = PotentialSpec::Tabulated { origin: -1.0, spacing, values: values.clone() };
        let moved = PotentialSpec::Tabulated { origin: -1.0 + shift as f64 * spacing, spacing, values };
        let a = kato_norm_estimate(&base, 1).unwrap();
        let b = kato_norm_estimate(&moved, 1).unwrap();
        prop_assert!((a.value - b.value).abs() <= 1e-9 * a.value.max(1e-12) + a.tolerance + b.tolerance);
    }

    #[test]
    fn closed_form_is_c1_and_below_ground_state((eps, delta) in well(), t in 0.01f64..5.0) {
        let e0 = squarewell_e0(eps, delta).unwrap();
        let m = -e0 + t;
        let form = SquareWellClosedForm::new(eps, delta, m).unwrap();
        let (du, dd) = form.interface_jump();
        let scale = form.value(0.0).abs().max(1.0);
        prop_assert!(du.abs() < 1e-10 * scale && dd.abs() < 1e-10 * scale, "{:?}", (du, dd));
        prop_assert!(squarewell_inf_effective(eps, delta, m).unwrap().value <= e0 + 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn landscape_shrinks_with_shift((eps, delta) in well(), t in 0.05f64..3.0, extra in 0.01f64..3.0) {
        let d = line(20.0, 0.01, 15.0);
        let spec = PotentialSpec::square_well(eps, delta);
        let m = -squarewell_e0(eps, delta).unwrap() + t;
        let a = landscape_for(&spec, &d, m).unwrap();
        let b = landscape_for(&spec, &d, m + extra).unwrap();
        prop_assert!(a.values().iter().zip(b.values()).all(|(x, y)| y <= x));
    }

    #[test]
    fn landscape_grows_with_domain((eps, delta) in well(), t in 0.05f64..3.0) {
        let spec = PotentialSpec::square_well(eps, delta);
        let m = -squarewell_e0(eps, delta).unwrap() + t;
        let small = landscape_for(&spec, &line(6.0, 0.01, 4.0), m).unwrap();
        let big = landscape_for(&spec, &line(9.0, 0.01, 4.0), m).unwrap();
        let offset = 300;
        for (i, &u) in small.values().iter().enumerate() {
            let x = small.domain().nodes()[i];
            prop_assert!((big.domain().nodes()[i + offset] - x).abs() < 1e-9);
            prop_assert!(big.values()[i + offset] >= u);
        }
    }

    #[test]
    fn ground_state_transform((eps, delta) in well(), t in 0.05f64..3.0, phi in prop::collection::vec(-1.0f64..1.0, 300)) {
        let d = line(10.0, 0.01, 5.0);
        let v = sample_potential(&PotentialSpec::square_well(eps, delta), &d).unwrap();
        let m = -squarewell_e0(eps, delta).unwrap() + t;
        let op = assemble(&v, m);
        let u = landscape::solve_landscape(&op).unwrap();
        let mut test = vec![0.0; d.len()];
        let start = d.len() / 2 - 150;
        test[start..start + 300].copy_from_slice(&phi);
        let hphi = op.apply(&test);
        let form: f64 = test.iter().zip(&hphi).map(|(a, b)| a * b).sum();
        let uv = u.values();
        let h = d.spacing();
        let psi: Vec<f64> = test.iter().zip(uv).map(|(p, q)| p / q).collect();
        let gradient: f64 = (0..d.len() - 1)
            .map(|i| uv[i] * uv[i + 1] * ((psi[i + 1] - psi[i]) / h).powi(2))
            .sum();
        let potential: f64 = test.iter().zip(uv).map(|(p, q)| p * p / q).sum();
        prop_assert!((form - gradient - potential).abs() <= 1e-8 * form.abs(), "{} vs {}", form, gradient + potential);
    }

    #[test]
    fn lower_bound_sandwiches_ground_state((eps, delta) in well(), t in 0.02f64..8.0) {
        let d = line(20.0, 0.01, 15.0);
        let v = sample_potential(&PotentialSpec::square_well(eps, delta), &d).unwrap();
        let e0 = spectrum_below(&assemble(&v, 0.0), 0.0, 1e-12).unwrap()[0];
        let u = landscape_for(&PotentialSpec::square_well(eps, delta), &d, -e0 + t).unwrap();
        prop_assert!(groundstate_lower_bound(&u) <= e0);
    }

    #[test]
    fn comparison_chain_holds((eps, delta) in well(), shift in 0.5f64..6.0, mus in prop::collection::vec(0.05f64..5.0, 1..8)) {
        let d = line(20.0, 0.01, 15.0);
        let v = sample_potential(&PotentialSpec::square_well(eps, delta), &d).unwrap();
        let e0 = squarewell_e0(eps, delta).unwrap();
        let ctx = BoundsContext::new(v, -e0 + shift, BoundsParams::default()).unwrap();
        let report = verify_bounds(BoundKind::Comparison, &ctx, &mus, &[]).unwrap();
        prop_assert!(report.passed(), "{:?}", report.worst_row());
    }

    #[test]
    fn clr_rows_are_shift_invariant((eps, delta) in well(), s in -0.3f64..0.3, mus in prop::collection::vec(0.05f64..5.0, 1..6)) {
        let d = line(20.0, 0.01, 15.0);
        let v = sample_potential(&PotentialSpec::square_well(eps, delta), &d).unwrap();
        let m = -squarewell_e0(eps, delta).unwrap() + 1.0;
        let a = BoundsContext::new(v.clone(), m, BoundsParams::default()).unwrap();
        let b = BoundsContext::new(v.shifted(s), m - s, BoundsParams::default()).unwrap();
        let ra = verify_bounds(BoundKind::ClrSandwich, &a, &mus, &[]).unwrap();
        let rb = verify_bounds(BoundKind::ClrSandwich, &b, &mus, &[]).unwrap();
        prop_assert_eq!(ra.passed(), rb.passed());
        let holds = |r: &bounds::BoundsReport| r.rows.iter().map(|row| row.holds).collect::<Vec<_>>();
        prop_assert_eq!(holds(&ra), holds(&rb));
    }

    #[test]
    fn curves_agree_on_nested_grids(values in small_potential(), n in 5usize..30) {
        let d = line(1.0, 0.01, 0.5);
        let op = assemble(&field(&d, values), 0.0);
        let (lo, hi) = op.gershgorin();
        let coarse: Vec<f64> = (0..n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect();
        let fine: Vec<f64> = (0..2 * n).map(|i| lo + (hi - lo) * i as f64 / (2 * n) as f64).collect();
        let a = CountingCurve::from_operator(&op, &coarse).unwrap();
        let b = CountingCurve::from_operator(&op, &fine).unwrap();
        for (i, &c) in a.counts.iter().enumerate() {
            prop_assert_eq!(c, b.counts[2 * i]);
        }
        prop_assert!(b.is_monotone());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn extra_angular_sectors_change_nothing(mu in -0.2f64..-0.004) {
        let d = Arc::new(build_grid(3, 150.0, 0.02, 150.0).unwrap());
        let v = sample_potential(&PotentialSpec::hydrogen(), &d).unwrap();
        let base = radial_count_field(&v, mu, 0).unwrap();
        let more = radial_count_field(&v, mu, 5).unwrap();
        prop_assert_eq!(base.total, more.total);
        let weighted: u64 = base.per_l.iter().enumerate().map(|(l, &c)| (2 * l as u64 + 1) * c as u64).sum();
        prop_assert_eq!(weighted, base.total);
    }

    #[test]
    fn max_landscape_grows_towards_threshold((eps, delta) in well()) {
        let d = line(30.0, 0.01, 15.0);
        let spec = PotentialSpec::square_well(eps, delta);
        let v = sample_potential(&spec, &d).unwrap();
        let e0 = spectrum_below(&assemble(&v, 0.0), 0.0, 1e-13).unwrap()[0];
        let maxima: Vec<f64> = (0..8)
            .map(|k| landscape_for(&spec, &d, -e0 + 0.5f64.powi(k)).unwrap().max())
            .collect();
        prop_assert!(maxima.windows(2).all(|w| w[1] > w[0]), "{:?}", maxima);
    }
}
