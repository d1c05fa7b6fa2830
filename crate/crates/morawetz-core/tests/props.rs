//! Property tests for structural invariants: the kernels are quadratic
//! forms in the mode coefficients, the mode-to-moments map keeps its
//! eigenvalue proportionality bitwise, the coordinate inversion round-trips
//! within the sensitivity of the forward map, and the stationary-energy
//! flux splits into nonnegative null pieces.

use morawetz_core::currents::{
    flux_components, k_combined_sphere, mode_to_jet, CurrentKind, ModeState, SphereJet,
};
use morawetz_core::geometry::{Geometry, MultiplierParams};
use proptest::prelude::*;

fn setup() -> (Geometry, MultiplierParams) {
    let g = Geometry::new(1.0).unwrap();
    let params = MultiplierParams::new(10.0, &g).unwrap();
    (g, params)
}

fn add_jets(a: &SphereJet, b: &SphereJet) -> SphereJet {
    SphereJet {
        a00: a.a00 + b.a00,
        arr: a.arr + b.arr,
        att: a.att + b.att,
        across: a.across + b.across,
        atr: a.atr + b.atr,
        at0: a.at0 + b.at0,
        aang: a.aang + b.aang,
        aang2: a.aang2 + b.aang2,
        b00: a.b00 + b.b00,
        brr: a.brr + b.brr,
        btt: a.btt + b.btt,
        bcross: a.bcross + b.bcross,
        btr: a.btr + b.btr,
        bt0: a.bt0 + b.bt0,
        bang: a.bang + b.bang,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn kernel_is_linear_in_the_moments(
        rs in -30.0..120.0f64,
        ell in 0u32..6,
        u1 in -2.0..2.0f64, ur1 in -2.0..2.0f64, ut1 in -2.0..2.0f64,
        u2 in -2.0..2.0f64, ur2 in -2.0..2.0f64, ut2 in -2.0..2.0f64,
    ) {
        let (g, params) = setup();
        let p = g.point_at_rstar(rs);
        let j1 = mode_to_jet(&ModeState { ell, u: u1, ur: ur1, ut: ut1 }, &p);
        let j2 = mode_to_jet(&ModeState { ell, u: u2, ur: ur2, ut: ut2 }, &p);
        let sum = add_jets(&j1, &j2);
        let lhs = k_combined_sphere(&sum, &p, &params);
        let k1 = k_combined_sphere(&j1, &p, &params);
        let k2 = k_combined_sphere(&j2, &p, &params);
        let scale = k1.abs() + k2.abs() + 1e-300;
        prop_assert!((lhs - k1 - k2).abs() <= 1e-11 * scale,
            "lhs {lhs:e} vs {k1:e} + {k2:e}");
    }

    #[test]
    fn mode_map_keeps_eigenvalue_proportionality_bitwise(
        rs in -30.0..120.0f64,
        ell in 0u32..10,
        u in -3.0..3.0f64, ur in -3.0..3.0f64, ut in -3.0..3.0f64,
    ) {
        let (g, _) = setup();
        let p = g.point_at_rstar(rs);
        let jet = mode_to_jet(&ModeState { ell, u, ur, ut }, &p);
        let lam = (ell as f64) * (ell as f64 + 1.0);
        prop_assert_eq!(jet.b00, lam * jet.a00);
        prop_assert_eq!(jet.brr, lam * jet.arr);
        prop_assert_eq!(jet.btt, lam * jet.att);
        prop_assert_eq!(jet.bcross, lam * jet.across);
        prop_assert_eq!(jet.btr, lam * jet.atr);
        prop_assert_eq!(jet.bt0, lam * jet.at0);
        prop_assert_eq!(jet.bang, lam * jet.aang);
        let r2 = p.r * p.r;
        prop_assert_eq!(jet.aang, jet.b00 / r2);
        // Angular view relabels the rotation moments as plain ones.
        let view = jet.angular_view();
        prop_assert_eq!(view.a00, jet.b00);
        prop_assert_eq!(view.arr, jet.brr);
        prop_assert_eq!(view.aang, jet.bang);
        prop_assert_eq!(view.b00, 0.0);
    }

    #[test]
    fn coordinate_inversion_round_trips(r in prop::num::f64::NORMAL.prop_map(|v| {
        2.0 + 1e-9 + v.abs().rem_euclid(1e6)
    })) {
        let g = Geometry::new(1.0).unwrap();
        let rs = g.rstar_of_r(r).unwrap();
        let back = g.r_of_rstar(rs);
        // The forward map loses resolution near the horizon where d r*/dr
        // blows up; the recovered radius is exact up to that quantization.
        let sensitivity = (r - 2.0).max(4.0 * f64::EPSILON * r.max(rs.abs()));
        prop_assert!((back - r).abs() <= 64.0 * f64::EPSILON / (r - 2.0) * r * sensitivity
            + 4.0 * f64::EPSILON * r,
            "r {r} -> r* {rs} -> {back}");
    }

    #[test]
    fn stationary_energy_flux_splits_into_nonnegative_null_pieces(
        rs in -30.0..120.0f64,
        ell in 0u32..6,
        u in -3.0..3.0f64, ur in -3.0..3.0f64, ut in -3.0..3.0f64,
    ) {
        let (g, params) = setup();
        let p = g.point_at_rstar(rs);
        let jet = mode_to_jet(&ModeState { ell, u, ur, ut }, &p);
        let flux = flux_components(&jet, &p, &params, CurrentKind::TimeEnergy);
        let scale = flux.jt.abs() + flux.jr.abs() + 1e-300;
        prop_assert!(flux.jt + flux.jr >= -1e-13 * scale);
        prop_assert!(flux.jt - flux.jr >= -1e-13 * scale);
        prop_assert!(flux.jt >= 0.0);
    }
}
