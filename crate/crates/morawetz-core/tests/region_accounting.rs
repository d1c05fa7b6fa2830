//! Divergence-theorem accounting on evolved waves: the bulk integral of
//! each kernel against the net outward flux of its current, the
//! conservation and decay of the time energy, and the absorbed estimate
//! with the eigenvalue-derived constant.

use morawetz_core::accounting::{
    account_history, bump, bump_prime, DensityKind, TrapezoidRegion,
};
use morawetz_core::currents::CurrentKind;
use morawetz_core::geometry::{Geometry, MultiplierParams};
use morawetz_core::solver::{evolve, rw_potential, Boundary, EvolutionConfig, FieldHistory};
use morawetz_core::verifier::{best_constant, ConstantKind, ConstantOptions};

const AUX_WEIGHT: f64 = 1e-3;

fn history(g: &Geometry, ell: u32, h: f64) -> FieldHistory {
    let cfg = EvolutionConfig {
        r_star_min: -30.0,
        r_star_max: 30.0,
        h,
        courant: 0.5,
        t_final: 8.0 + 2.0 * h,
        ell,
        boundary: Boundary::Dirichlet,
    };
    evolve(
        &cfg,
        |x| rw_potential(g, ell, g.point_at_rstar(x).r),
        |x| bump((x - 12.0) / 4.0),
        |x| bump_prime((x - 12.0) / 4.0) / 4.0,
    )
    .unwrap()
}

fn region() -> TrapezoidRegion {
    TrapezoidRegion::new(0.4, 8.0, -6.0, 6.0).unwrap()
}

#[test]
fn kernel_bulk_matches_boundary_flux_at_second_order() {
    let g = Geometry::new(1.0).unwrap();
    let params = MultiplierParams::new(10.0, &g).unwrap();
    let densities = [DensityKind::Kernel, DensityKind::KernelPlusAux { weight: AUX_WEIGHT }];
    let currents = [CurrentKind::Combined, CurrentKind::Aux { weight: AUX_WEIGHT }];
    let mut residuals: Vec<[f64; 2]> = Vec::new();
    let mut bulk_scale = 0.0f64;
    for h in [0.08, 0.04, 0.02] {
        let hist = history(&g, 2, h);
        let totals =
            account_history(&hist, &g, params, region(), &densities, &currents, false).unwrap();
        let combined = totals.bulk[0] - totals.boundary[0].net_outward();
        // The auxiliary current alone accounts for the difference of the two
        // bulk integrals.
        let aux = (totals.bulk[1] - totals.bulk[0]) - totals.boundary[1].net_outward();
        println!(
            "h={h}: bulk={:.6e} residual_combined={combined:.3e} residual_aux={aux:.3e}",
            totals.bulk[0]
        );
        bulk_scale = totals.bulk[0].abs().max(bulk_scale);
        residuals.push([combined.abs(), aux.abs()]);
    }
    assert!(bulk_scale > 0.0);
    for pair in residuals.windows(2) {
        for which in 0..2 {
            let ratio = pair[0][which] / pair[1][which];
            println!("which={which} ratio={ratio}");
            assert!(
                (3.2..=4.8).contains(&ratio),
                "residual ratio {ratio} for entry {which}: {:?}",
                residuals
            );
        }
    }
    // The finest residual is far below the bulk it reconciles.
    assert!(residuals[2][0] <= 1e-3 * bulk_scale);
}

#[test]
fn time_energy_is_conserved_and_decays() {
    let g = Geometry::new(1.0).unwrap();
    let params = MultiplierParams::new(10.0, &g).unwrap();
    let hist = history(&g, 2, 0.02);
    let totals =
        account_history(&hist, &g, params, region(), &[], &[CurrentKind::TimeEnergy], true)
            .unwrap();
    let flux = totals.boundary[0];
    assert!(flux.past > 0.0);
    // Divergence-free: the four pieces cancel to discretization error.
    assert!(flux.net_outward().abs() <= 1e-4 * flux.past, "net {}", flux.net_outward());
    // The null sides only let energy leave.
    assert!(flux.left <= 0.0);
    assert!(flux.right <= 0.0);
    // Energy through the top face stays below the data energy.
    assert!(-flux.future <= flux.past);
    // The data norm adds the rotation energies on top of the field energy.
    let data_norm = totals.data_norm.unwrap();
    assert!(data_norm > flux.past);
    assert!(hist.stats.energy_drift() <= 1e-6);
}

#[test]
fn absorbed_estimate_holds_on_an_evolved_wave() {
    let g = Geometry::new(1.0).unwrap();
    let params = MultiplierParams::new(10.0, &g).unwrap();
    let hist = history(&g, 2, 0.04);
    let totals = account_history(
        &hist,
        &g,
        params,
        region(),
        &[
            DensityKind::KernelPlusAux { weight: AUX_WEIGHT },
            DensityKind::ControlledPlusTime,
            DensityKind::Kernel,
            DensityKind::LowerBound,
        ],
        &[],
        false,
    )
    .unwrap();
    let augmented = totals.bulk[0];
    let controlled = totals.bulk[1];
    assert!(augmented > 0.0);
    assert!(controlled > 0.0);
    // The kernel dominates its certified pointwise lower bound in the bulk.
    assert!(totals.bulk[2] >= totals.bulk[3] - 1e-12 * totals.bulk[2].abs());

    let constant = best_constant(
        &g,
        &params,
        ConstantKind::KernelPlusAux,
        &ConstantOptions { base_points: 700, ell_max: 16, ..ConstantOptions::default() },
    )
    .unwrap();
    assert!(constant.aux_weight == AUX_WEIGHT);
    println!(
        "constant={:.6e} augmented={augmented:.6e} controlled={controlled:.6e} slack={:.3}",
        constant.constant,
        constant.constant * augmented / controlled
    );
    assert!(
        constant.constant * augmented >= controlled,
        "constant {} x augmented {augmented} < controlled {controlled}",
        constant.constant
    );
}
