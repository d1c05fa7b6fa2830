//! `evolve`: one mode evolution with spacetime accounting and a refinement
//! table, or the zero-potential oracle compared against the exact
//! d'Alembert translate. Both modes write `run.csv` (per-level diagnostics
//! at the base resolution), `convergence.csv`, and `evolve.json`.

use std::path::Path;

use rayon::prelude::*;
use serde_json::json;

use morawetz_core::accounting::{bump, bump_prime, Accountant, DensityKind, RegionTotals};
use morawetz_core::currents::{flux_components, k_aux_sphere, k_combined_sphere, mode_to_jet, CurrentKind};
use morawetz_core::geometry::{Geometry, MultiplierParams, RadialPoint};
use morawetz_core::solver::{
    discrete_energy, evolve_with, rw_potential, Boundary, EvolutionConfig, LevelView, RunStats,
};

use crate::config::{Config, SolverBlock, FALLBACK_ALPHA};
use crate::output::{self, Cell, Csv};
use crate::CliError;

pub fn run(cfg: &Config, out: &Path, pool: &rayon::ThreadPool) -> Result<(), CliError> {
    if cfg.solver.flat {
        run_flat(cfg, out, pool)
    } else {
        run_curved(cfg, out, pool)
    }
}

fn evolution_config(block: &SolverBlock, h: f64) -> EvolutionConfig {
    EvolutionConfig {
        r_star_min: block.r_star_min,
        r_star_max: block.r_star_max,
        h,
        courant: block.courant,
        t_final: block.t_final,
        ell: block.ell,
        boundary: Boundary::Dirichlet,
    }
}

/// Spacings of the convergence table: the configured `h` and `refinements`
/// halvings of it.
fn spacings(block: &SolverBlock) -> Vec<f64> {
    (0..=block.refinements).map(|j| block.h / f64::from(1u32 << j)).collect()
}

// ---------------------------------------------------------------------------
// Curved mode.

struct CurvedPass {
    h: f64,
    stats: RunStats,
    totals: RegionTotals,
    /// `t, energy, max_abs_u, kernel_rate, aux_kernel_rate, time_energy_row`
    /// per streamed level; kept for the base resolution only.
    rows: Option<Vec<[f64; 6]>>,
}

impl CurvedPass {
    fn residual_kernel(&self) -> f64 {
        self.totals.bulk[0] - self.totals.boundary[0].net_outward()
    }

    fn residual_aux(&self) -> f64 {
        (self.totals.bulk[1] - self.totals.bulk[0]) - self.totals.boundary[1].net_outward()
    }

    fn net_time_flux(&self) -> f64 {
        self.totals.boundary[2].net_outward()
    }
}

fn run_curved(cfg: &Config, out: &Path, pool: &rayon::ThreadPool) -> Result<(), CliError> {
    let g = super::geometry(cfg.mass)?;
    let alpha = cfg.alpha.unwrap_or(FALLBACK_ALPHA);
    let params = MultiplierParams::new(alpha, &g)
        .map_err(super::geometry_error)?;
    let block = &cfg.solver;
    let aux_weight = cfg.constants.aux_weight;

    let passes: Result<Vec<CurvedPass>, CliError> = pool.install(|| {
        spacings(block)
            .par_iter()
            .enumerate()
            .map(|(j, &h)| curved_pass(&g, &params, block, aux_weight, h, j == 0))
            .collect()
    });
    let passes = passes?;

    write_curved_reports(cfg, alpha, &passes, out)
}

fn curved_pass(
    g: &Geometry,
    params: &MultiplierParams,
    block: &SolverBlock,
    aux_weight: f64,
    h: f64,
    want_rows: bool,
) -> Result<CurvedPass, CliError> {
    let region = block.region.region()?;
    let cfg = evolution_config(block, h);
    let densities = [
        DensityKind::Kernel,
        DensityKind::KernelPlusAux { weight: aux_weight },
        DensityKind::Controlled,
    ];
    let currents = [
        CurrentKind::Combined,
        CurrentKind::Aux { weight: aux_weight },
        CurrentKind::TimeEnergy,
    ];
    let mut acc = Accountant::new(g, *params, region, &densities, &currents, true)
        .map_err(super::accounting_error)?;

    let mut points: Vec<RadialPoint> = Vec::new();
    let mut potential: Vec<f64> = Vec::new();
    let mut rows: Option<Vec<[f64; 6]>> = want_rows.then(Vec::new);
    let center = block.center;
    let width = block.width;
    let amplitude = block.amplitude;

    let stats = evolve_with(
        &cfg,
        |x| rw_potential(g, block.ell, g.point_at_rstar(x).r),
        |x| amplitude * bump((x - center) / width),
        |x| amplitude * bump_prime((x - center) / width) / width,
        |view| {
            if points.is_empty() {
                for i in 0..view.columns() {
                    let p = g.point_at_rstar(view.x(i));
                    potential.push(rw_potential(g, block.ell, p.r));
                    points.push(p);
                }
            }
            acc.ingest(view);
            if let Some(rows) = rows.as_mut() {
                rows.push(level_row(view, params, aux_weight, &points, &potential));
            }
        },
    )
    .map_err(super::solver_error)?;
    let totals = acc.finish().map_err(super::accounting_error)?;
    Ok(CurvedPass { h, stats, totals, rows })
}

/// Whole-line diagnostics of one level: the conserved discrete energy, the
/// largest magnitude of the evolved variable, and interior-trapezoid row
/// integrals of the two kernel densities (with the volume factor) and of
/// the time-energy density.
fn level_row(
    view: &LevelView<'_>,
    params: &MultiplierParams,
    aux_weight: f64,
    points: &[RadialPoint],
    potential: &[f64],
) -> [f64; 6] {
    let n = view.columns();
    let mut kernel_rate = 0.0;
    let mut aux_rate = 0.0;
    let mut time_row = 0.0;
    let mut max_abs_u = 0.0f64;
    for (i, &u) in view.curr.iter().enumerate() {
        max_abs_u = max_abs_u.max(u.abs());
        if i == 0 || i + 1 >= n {
            continue;
        }
        let p = &points[i];
        let state = view.mode_state(i, p);
        let jet = mode_to_jet(&state, p);
        let weight = if i == 1 || i + 2 == n { 0.5 * view.h } else { view.h };
        kernel_rate += weight * p.one_minus_mu * k_combined_sphere(&jet, p, params);
        aux_rate += weight * p.one_minus_mu * k_aux_sphere(&jet, p, aux_weight);
        time_row += weight * flux_components(&jet, p, params, CurrentKind::TimeEnergy).jt;
    }
    let energy = discrete_energy(view.curr, view.next, view.h, view.k, potential);
    [view.t, energy, max_abs_u, kernel_rate, aux_rate, time_row]
}

/// `|a| / |b|` guarded against a vanishing denominator; refinement ratio
/// tables skip entries the grid already resolves to round-off.
fn ratio_or_none(a: f64, b: f64) -> Option<f64> {
    if b.abs() < 1e-300 {
        None
    } else {
        Some(a.abs() / b.abs())
    }
}

fn write_curved_reports(
    cfg: &Config,
    alpha: f64,
    passes: &[CurvedPass],
    out: &Path,
) -> Result<(), CliError> {
    let block = &cfg.solver;
    let base = &passes[0];

    let mut csv = Csv::new(&[
        "t",
        "energy",
        "max_abs_u",
        "kernel_rate",
        "aux_kernel_rate",
        "time_energy_row",
    ]);
    for row in base.rows.as_ref().expect("base pass keeps rows") {
        csv.row(&[
            Cell::Float(row[0]),
            Cell::Float(row[1]),
            Cell::Float(row[2]),
            Cell::Float(row[3]),
            Cell::Float(row[4]),
            Cell::Float(row[5]),
        ]);
    }
    output::write_file(out, "run.csv", &csv.finish())?;

    let mut conv = Csv::new(&["h", "bulk_kernel", "residual_kernel", "residual_aux", "net_flux_time"]);
    for pass in passes {
        conv.row(&[
            Cell::Float(pass.h),
            Cell::Float(pass.totals.bulk[0]),
            Cell::Float(pass.residual_kernel()),
            Cell::Float(pass.residual_aux()),
            Cell::Float(pass.net_time_flux()),
        ]);
    }
    output::write_file(out, "convergence.csv", &conv.finish())?;

    let kernel_ratios: Vec<f64> = passes
        .windows(2)
        .filter_map(|w| ratio_or_none(w[0].residual_kernel(), w[1].residual_kernel()))
        .collect();
    let aux_ratios: Vec<f64> = passes
        .windows(2)
        .filter_map(|w| ratio_or_none(w[0].residual_aux(), w[1].residual_aux()))
        .collect();
    let time_ratios: Vec<f64> = passes
        .windows(2)
        .filter_map(|w| ratio_or_none(w[0].net_time_flux(), w[1].net_time_flux()))
        .collect();

    let flux_json = |b: &morawetz_core::accounting::BoundaryBreakdown| {
        json!({
            "past": b.past, "future": b.future, "left": b.left, "right": b.right,
            "net_outward": b.net_outward(),
        })
    };
    let convergence: Vec<serde_json::Value> = passes
        .iter()
        .map(|p| {
            json!({
                "h": p.h,
                "bulk_kernel": p.totals.bulk[0],
                "residual_kernel": p.residual_kernel(),
                "residual_aux": p.residual_aux(),
                "net_flux_time": p.net_time_flux(),
            })
        })
        .collect();
    let body = json!({
        "mode": "curved",
        "mass": cfg.mass,
        "alpha": alpha,
        "ell": block.ell,
        "grid": {
            "r_star_min": block.r_star_min,
            "r_star_max": block.r_star_max,
            "h": block.h,
            "courant": block.courant,
            "t_final": block.t_final,
        },
        "pulse": {"center": block.center, "width": block.width, "amplitude": block.amplitude},
        "region": serde_json::to_value(block.region.region().expect("validated above"))
            .expect("region serializes"),
        "stats": stats_json(&base.stats),
        "totals": {
            "bulk_kernel": base.totals.bulk[0],
            "bulk_kernel_plus_aux": base.totals.bulk[1],
            "bulk_controlled": base.totals.bulk[2],
            "flux_combined": flux_json(&base.totals.boundary[0]),
            "flux_aux": flux_json(&base.totals.boundary[1]),
            "flux_time": flux_json(&base.totals.boundary[2]),
            "data_norm": base.totals.data_norm,
            "max_abs_phi": base.totals.max_abs_phi,
        },
        "convergence": convergence,
        "residual_ratios": {
            "kernel": kernel_ratios,
            "aux": aux_ratios,
            "time_flux": time_ratios,
        },
    });
    output::write_file(out, "evolve.json", &output::json_report(body)?)
}

fn stats_json(stats: &RunStats) -> serde_json::Value {
    json!({
        "steps": stats.steps,
        "k": stats.k,
        "energy_first": stats.energy_first,
        "energy_min": stats.energy_min,
        "energy_max": stats.energy_max,
        "energy_drift": stats.energy_drift(),
        "max_abs_u": stats.max_abs_u,
    })
}

// ---------------------------------------------------------------------------
// Flat oracle mode.

struct FlatPass {
    h: f64,
    stats: RunStats,
    final_error: f64,
    /// `t, energy, max_abs_u, l2_error` per streamed level.
    rows: Option<Vec<[f64; 4]>>,
}

fn run_flat(cfg: &Config, out: &Path, pool: &rayon::ThreadPool) -> Result<(), CliError> {
    let block = &cfg.solver;
    if block.refinements == 0 {
        return Err(CliError::Config(
            "the flat oracle needs refinements >= 1 to measure an order".into(),
        ));
    }
    let passes: Result<Vec<FlatPass>, CliError> = pool.install(|| {
        spacings(block)
            .par_iter()
            .enumerate()
            .map(|(j, &h)| flat_pass(block, h, j == 0))
            .collect()
    });
    let passes = passes?;

    let errors: Vec<f64> = passes.iter().map(|p| p.final_error).collect();
    let zero_data = errors.iter().all(|&e| e == 0.0);
    let orders: Vec<f64> = if zero_data {
        Vec::new()
    } else {
        errors
            .windows(2)
            .filter_map(|w| {
                if w[1] > 0.0 && w[0] > 0.0 {
                    Some((w[0] / w[1]).log2())
                } else {
                    None
                }
            })
            .collect()
    };
    // Coarse pairs can sit outside the asymptotic regime, so the finest
    // pair carries the verdict; the whole sequence goes in the report.
    let passed = zero_data || orders.last().is_some_and(|&o| o >= 1.9);

    write_flat_reports(cfg, &passes, &orders, passed, out)?;

    if passed {
        Ok(())
    } else {
        Err(CliError::Failed(format!(
            "flat-space translate error does not shrink at second order: orders {orders:?}"
        )))
    }
}

fn flat_pass(block: &SolverBlock, h: f64, want_rows: bool) -> Result<FlatPass, CliError> {
    let cfg = evolution_config(block, h);
    let center = block.center;
    let width = block.width;
    let amplitude = block.amplitude;
    // Leftward translate: u(t, x) = A bump((x - c + t)/w).
    let exact = move |x: f64, t: f64| amplitude * bump((x - center + t) / width);

    let mut rows: Option<Vec<[f64; 4]>> = want_rows.then(Vec::new);
    let mut final_error = 0.0;
    let zeros: Vec<f64> = vec![0.0; grid_columns(block, h)];
    let stats = evolve_with(
        &cfg,
        |_| 0.0,
        |x| exact(x, 0.0),
        |x| amplitude * bump_prime((x - center) / width) / width,
        |view| {
            if let Some(rows) = rows.as_mut() {
                let energy = discrete_energy(view.curr, view.next, view.h, view.k, &zeros);
                let mut max_abs_u = 0.0f64;
                for &u in view.curr {
                    max_abs_u = max_abs_u.max(u.abs());
                }
                rows.push([view.t, energy, max_abs_u, grid_l2_error(view.curr, view, &exact, view.t)]);
            }
            // The callbacks arrive in time order, so the last one leaves the
            // error of the final level behind.
            final_error = grid_l2_error(view.next, view, &exact, view.t + view.k);
        },
    )
    .map_err(super::solver_error)?;
    Ok(FlatPass { h, stats, final_error, rows })
}

fn grid_columns(block: &SolverBlock, h: f64) -> usize {
    ((block.r_star_max - block.r_star_min) / h).round() as usize + 1
}

/// Grid-function L2 distance between a level and the exact profile.
fn grid_l2_error(
    level: &[f64],
    view: &LevelView<'_>,
    exact: &dyn Fn(f64, f64) -> f64,
    t: f64,
) -> f64 {
    let mut sum = 0.0;
    for (i, &u) in level.iter().enumerate() {
        let d = u - exact(view.x(i), t);
        sum += d * d;
    }
    (view.h * sum).sqrt()
}

fn write_flat_reports(
    cfg: &Config,
    passes: &[FlatPass],
    orders: &[f64],
    passed: bool,
    out: &Path,
) -> Result<(), CliError> {
    let block = &cfg.solver;
    let base = &passes[0];

    let mut csv = Csv::new(&["t", "energy", "max_abs_u", "l2_error"]);
    for row in base.rows.as_ref().expect("base pass keeps rows") {
        csv.row(&[
            Cell::Float(row[0]),
            Cell::Float(row[1]),
            Cell::Float(row[2]),
            Cell::Float(row[3]),
        ]);
    }
    output::write_file(out, "run.csv", &csv.finish())?;

    let mut conv = Csv::new(&["h", "l2_error"]);
    for pass in passes {
        conv.row(&[Cell::Float(pass.h), Cell::Float(pass.final_error)]);
    }
    output::write_file(out, "convergence.csv", &conv.finish())?;

    let convergence: Vec<serde_json::Value> = passes
        .iter()
        .map(|p| json!({"h": p.h, "l2_error": p.final_error}))
        .collect();
    let body = json!({
        "mode": "flat",
        "ell": block.ell,
        "grid": {
            "r_star_min": block.r_star_min,
            "r_star_max": block.r_star_max,
            "h": block.h,
            "courant": block.courant,
            "t_final": block.t_final,
        },
        "pulse": {"center": block.center, "width": block.width, "amplitude": block.amplitude},
        "stats": stats_json(&base.stats),
        "convergence": convergence,
        "orders": orders,
        "passed": passed,
    });
    output::write_file(out, "evolve.json", &output::json_report(body)?)
}
