//! End-to-end runs of the certification scans and the best-constant search.

use morawetz_core::geometry::{Geometry, MultiplierParams};
use morawetz_core::verifier::{
    best_constant, certify, log_spaced, scan_alpha, ConstantKind, ConstantOptions,
    VerifierOptions,
};

#[test]
fn default_family_certifies() {
    let g = Geometry::new(1.0).unwrap();
    let opts = VerifierOptions::default();
    let cert = certify(&g, 10.0, &opts).unwrap();
    assert!(cert.report.verdict, "{:#?}", cert.report);
    assert_eq!(cert.report.checks.len(), 4);
    for check in &cert.report.checks {
        assert!(check.passed, "{}: margin {:e}", check.name, check.min_margin);
        assert!(check.min_margin > 0.0);
        assert!(check.refinement_levels >= 2);
    }
    // The coefficient scan bottoms out between the horizon and the far
    // region, and the margin there is genuinely small against the local
    // scale but safely positive.
    let s2 = &cert.report.checks[0];
    assert_eq!(s2.name, "lower_bound_coefficient");
    let cross = s2
        .diagnostics
        .iter()
        .find(|d| d.name == "mode_jet_bound_min_scaled")
        .unwrap();
    assert!(cross.value >= -1e-12, "cross validation {:e}", cross.value);
    // Sample tables exist and carry the scanned margins.
    assert_eq!(cert.samples.len(), 4);
    for table in &cert.samples {
        assert!(!table.rows.is_empty());
        assert!(table.rows.iter().all(|r| r.margin.is_finite()));
    }
}

#[test]
fn tight_family_fails_the_ratio_bound() {
    let g = Geometry::new(1.0).unwrap();
    let opts = VerifierOptions {
        base_points: 4_000,
        ..VerifierOptions::default()
    };
    let cert = certify(&g, 1.0, &opts).unwrap();
    assert!(!cert.report.verdict);
    let ratio = cert
        .report
        .checks
        .iter()
        .find(|c| c.name == "ratio_bound")
        .unwrap();
    assert!(!ratio.passed);
    assert!(ratio.min_margin < -1.0, "margin {:e}", ratio.min_margin);
}

#[test]
fn alpha_scan_reports_the_smallest_admissible_value() {
    let g = Geometry::new(1.0).unwrap();
    let opts = VerifierOptions {
        base_points: 4_000,
        cross_check_samples: 2_000,
        ..VerifierOptions::default()
    };
    let alphas = [1.0, 6.0, 10.0];
    let (report, best) = scan_alpha(&g, &alphas, &opts).unwrap();
    assert_eq!(report.entries.len(), 3);
    assert!(!report.entries[0].passed);
    let certified = report.certified_alpha.expect("some alpha certifies");
    assert!(certified > 1.0 && certified <= 10.0);
    let best = best.unwrap();
    assert_eq!(best.report.alpha, certified);
    assert_eq!(
        report.entries.iter().filter(|e| e.passed).map(|e| e.alpha).fold(f64::INFINITY, f64::min),
        certified
    );
}

#[test]
fn log_grid_matches_endpoints() {
    let grid = log_spaced(1e2, 1e6, 5);
    assert_eq!(grid.len(), 5);
    for (have, want) in grid.iter().zip([1e2, 1e3, 1e4, 1e5, 1e6]) {
        assert!((have / want - 1.0).abs() < 1e-12);
    }
}

#[test]
fn both_constants_are_finite_and_validated() {
    let g = Geometry::new(1.0).unwrap();
    let params = MultiplierParams::new(10.0, &g).unwrap();
    let opts = ConstantOptions {
        base_points: 650,
        ell_max: 32,
        validation_samples: 20_000,
        ..ConstantOptions::default()
    };
    let kernel = best_constant(&g, &params, ConstantKind::Kernel, &opts).unwrap();
    assert!(kernel.constant.is_finite() && kernel.constant > 0.0);
    assert!(kernel.validation_min >= -1e-10, "{:e}", kernel.validation_min);
    // The kernel-only constant is attained near the photon sphere at high
    // mode index, where the kernel's angular coefficient degenerates
    // quadratically; it is large but finite.
    assert!(kernel.exceeds_1e6);
    assert!(kernel.argmax_r_star.abs() < 1.0, "argmax {}", kernel.argmax_r_star);

    let aux = best_constant(&g, &params, ConstantKind::KernelPlusAux, &opts).unwrap();
    assert!(aux.constant.is_finite() && aux.constant > 0.0);
    assert!(aux.validation_min >= -1e-10, "{:e}", aux.validation_min);
    assert!(aux.constant >= kernel.constant * 0.99);
    assert_eq!(aux.aux_weight, 1.0e-3);

    // Every per-mode table row is finite and the limit row is present.
    for report in [&kernel, &aux] {
        assert_eq!(report.per_ell.last().unwrap().ell, -1);
        assert!(report.per_ell.iter().all(|e| e.ratio.is_finite()));
    }
}
