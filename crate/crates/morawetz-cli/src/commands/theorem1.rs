//! `check-theorem1`: ensemble evidence for the integrated decay estimate.
//!
//! Draws a family of random initial pulses, evolves each across a spacetime
//! region kept away from the horizon, and reports the largest ratio of the
//! controlled bulk integral to the time-energy of the data. A finite maximum
//! that survives grid refinement is the numerical signature of the estimate.

use std::path::Path;

use morawetz_core::accounting::{ensemble_run, EnsembleOptions, EnsembleReport};
use morawetz_core::geometry::Geometry;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::Config;
use crate::output::{json_report, write_file, Cell, Csv};
use crate::CliError;

pub fn run(cfg: &Config, out_dir: &Path, pool: &rayon::ThreadPool) -> Result<(), CliError> {
    if cfg.ensemble.runs == 0 {
        return Err(CliError::Config("the ensemble needs at least one run".into()));
    }
    let g = super::geometry(cfg.mass)?;
    let opts = cfg.ensemble.options(cfg.seed)?;
    let coarse = run_ensemble(&g, &opts, pool)?;
    let refined = if cfg.ensemble.refine {
        let fine_opts = EnsembleOptions { h: opts.h / 2.0, ..opts };
        Some((fine_opts.h, run_ensemble(&g, &fine_opts, pool)?))
    } else {
        None
    };
    write_reports(cfg, &opts, &coarse, refined.as_ref(), out_dir)
}

/// Parallel map over run indices. Each member is deterministic in
/// `(options, index)` and the results are collected in index order, so the
/// report is identical to the sequential one whatever the thread count.
fn run_ensemble(
    g: &Geometry,
    opts: &EnsembleOptions,
    pool: &rayon::ThreadPool,
) -> Result<EnsembleReport, CliError> {
    let runs = pool
        .install(|| {
            (0..opts.runs)
                .into_par_iter()
                .map(|index| ensemble_run(g, opts, index))
                .collect::<Result<Vec<_>, _>>()
        })
        .map_err(super::accounting_error)?;
    let mut empirical_constant = f64::NEG_INFINITY;
    let mut argmax_index = 0;
    for record in &runs {
        if record.ratio > empirical_constant {
            empirical_constant = record.ratio;
            argmax_index = record.index;
        }
    }
    Ok(EnsembleReport { runs, empirical_constant, argmax_index })
}

fn ensemble_csv(report: &EnsembleReport) -> String {
    let mut csv = Csv::new(&[
        "index",
        "ell",
        "center",
        "width",
        "amplitude",
        "bulk_controlled",
        "data_norm",
        "ratio",
        "energy_past",
        "energy_future",
        "max_abs_phi",
    ]);
    for r in &report.runs {
        csv.row(&[
            Cell::UInt(r.index as u64),
            Cell::UInt(u64::from(r.ell)),
            Cell::Float(r.center),
            Cell::Float(r.width),
            Cell::Float(r.amplitude),
            Cell::Float(r.bulk_controlled),
            Cell::Float(r.data_norm),
            Cell::Float(r.ratio),
            Cell::Float(r.energy_past),
            Cell::Float(r.energy_future),
            Cell::Float(r.max_abs_phi),
        ]);
    }
    csv.finish()
}

fn summary_json(report: &EnsembleReport) -> Value {
    let argmax = report.runs.iter().find(|r| r.index == report.argmax_index);
    json!({
        "runs": report.runs.len(),
        "empirical_constant": report.empirical_constant,
        "argmax_index": report.argmax_index,
        "argmax": serde_json::to_value(argmax).expect("run records serialize"),
    })
}

fn write_reports(
    cfg: &Config,
    opts: &EnsembleOptions,
    coarse: &EnsembleReport,
    refined: Option<&(f64, EnsembleReport)>,
    out_dir: &Path,
) -> Result<(), CliError> {
    write_file(out_dir, "ensemble.csv", &ensemble_csv(coarse))?;

    let refined_json = match refined {
        Some((h, fine)) => {
            write_file(out_dir, "ensemble_refined.csv", &ensemble_csv(fine))?;
            let change = (fine.empirical_constant - coarse.empirical_constant).abs()
                / coarse.empirical_constant.abs().max(f64::MIN_POSITIVE);
            let mut body = summary_json(fine);
            let obj = body.as_object_mut().expect("summary is an object");
            obj.insert("h".into(), json!(*h));
            obj.insert("relative_change".into(), json!(change));
            body
        }
        None => Value::Null,
    };

    let body = json!({
        "mass": cfg.mass,
        "options": serde_json::to_value(opts).expect("options serialize"),
        "ensemble": summary_json(coarse),
        "refined": refined_json,
    });
    write_file(out_dir, "ensemble.json", &json_report(body)?)
}
