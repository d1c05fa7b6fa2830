//! `constants`: compute the best constants of the two controlled-quantity
//! estimates by the pointwise generalized eigenproblem search, and validate
//! them on random draws.

use std::path::Path;

use rayon::prelude::*;

use morawetz_core::geometry::MultiplierParams;
use morawetz_core::verifier::{best_constant, BestConstantReport, ConstantError, ConstantKind};

use crate::config::{Config, FALLBACK_ALPHA};
use crate::output::{self, Cell, Csv};
use crate::CliError;

pub fn run(cfg: &Config, out: &Path, pool: &rayon::ThreadPool) -> Result<(), CliError> {
    let g = super::geometry(cfg.mass)?;
    let alpha = cfg.alpha.unwrap_or(FALLBACK_ALPHA);
    let params = MultiplierParams::new(alpha, &g)
        .map_err(super::geometry_error)?;
    let opts = cfg.constants.options(cfg.seed);

    let kinds = [ConstantKind::Kernel, ConstantKind::KernelPlusAux];
    let reports: Result<Vec<BestConstantReport>, ConstantError> = pool.install(|| {
        kinds
            .par_iter()
            .map(|&kind| best_constant(&g, &params, kind, &opts))
            .collect()
    });
    let reports = reports.map_err(constant_error)?;

    write_reports(&reports, out)
}

fn constant_error(e: ConstantError) -> CliError {
    match e {
        ConstantError::EmptyModeRange { .. } => CliError::Config(e.to_string()),
        _ => CliError::Inadmissible(e.to_string()),
    }
}

fn write_reports(reports: &[BestConstantReport], out: &Path) -> Result<(), CliError> {
    let mut body = serde_json::Map::new();
    for report in reports {
        let value = serde_json::to_value(report)
            .map_err(|e| CliError::Config(format!("serialize constants: {e}")))?;
        body.insert(report.kind.clone(), value);
    }
    output::write_file(out, "constants.json", &output::json_report(body.into())?)?;

    let mut csv = Csv::new(&["kind", "ell", "ratio", "r_star"]);
    for report in reports {
        for row in &report.per_ell {
            csv.row(&[
                Cell::Str(&report.kind),
                Cell::Int(row.ell),
                Cell::Float(row.ratio),
                Cell::Float(row.r_star),
            ]);
        }
    }
    output::write_file(out, "constants.csv", &csv.finish())
}
