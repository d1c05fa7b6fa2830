//! `scan-alpha`: certify every value in the configured range and tabulate
//! the margins, flagging the smallest admissible value. A pinned `alpha`
//! degenerates to a one-point scan.

use std::path::Path;

use rayon::prelude::*;
use serde_json::json;

use morawetz_core::verifier::{certify, scan_entry, AlphaScanEntry, AlphaScanReport};

use crate::config::Config;
use crate::output::{self, Cell, Csv};
use crate::CliError;

pub fn run(cfg: &Config, out: &Path, pool: &rayon::ThreadPool) -> Result<(), CliError> {
    let g = super::geometry(cfg.mass)?;
    let opts = cfg.verifier.options(cfg.seed);
    let alphas = match cfg.alpha {
        Some(alpha) => vec![alpha],
        None => cfg.scan.alphas(),
    };

    let entries: Result<Vec<AlphaScanEntry>, _> = pool.install(|| {
        alphas
            .par_iter()
            .map(|&a| certify(&g, a, &opts).map(|cert| scan_entry(&cert)))
            .collect()
    });
    let entries = entries.map_err(super::geometry_error)?;
    let certified_alpha = entries.iter().find(|e| e.passed).map(|e| e.alpha);
    let report = AlphaScanReport { entries, certified_alpha };

    write_reports(cfg.mass, &report, out)?;

    match certified_alpha {
        Some(_) => Ok(()),
        None => Err(CliError::Inadmissible(format!(
            "no scanned alpha in [{}, {}] passes all checks",
            alphas.first().copied().unwrap_or(f64::NAN),
            alphas.last().copied().unwrap_or(f64::NAN),
        ))),
    }
}

fn write_reports(mass: f64, report: &AlphaScanReport, out: &Path) -> Result<(), CliError> {
    let value = serde_json::to_value(report)
        .map_err(|e| CliError::Config(format!("serialize scan: {e}")))?;
    let body = json!({ "mass": mass, "scan": value });
    output::write_file(out, "scan.json", &output::json_report(body)?)?;

    // One margin column per check, named by the check itself; the set and
    // order are fixed by the certifier.
    let mut columns = vec!["alpha".to_string(), "c_star".to_string()];
    if let Some(first) = report.entries.first() {
        for margin in &first.margins {
            columns.push(format!("margin_{}", margin.name));
        }
    }
    columns.push("passed".to_string());
    let header: Vec<&str> = columns.iter().map(|s| s.as_str()).collect();
    let mut csv = Csv::new(&header);
    for entry in &report.entries {
        let mut cells = vec![Cell::Float(entry.alpha), Cell::Float(entry.c_star)];
        for margin in &entry.margins {
            cells.push(Cell::Float(margin.value));
        }
        cells.push(Cell::Bool(entry.passed));
        csv.row(&cells);
    }
    output::write_file(out, "scan.csv", &csv.finish())
}
