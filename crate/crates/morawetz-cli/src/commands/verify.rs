//! `verify`: certify the configured multiplier parameter, or scan the
//! configured range for the smallest admissible one, and write the full
//! certification report with its margin tables.

use std::path::Path;

use rayon::prelude::*;
use serde_json::json;

use morawetz_core::verifier::{certify, Certification};

use crate::config::Config;
use crate::output::{self, Cell, Csv};
use crate::CliError;

pub fn run(cfg: &Config, out: &Path, pool: &rayon::ThreadPool) -> Result<(), CliError> {
    let g = super::geometry(cfg.mass)?;
    let opts = cfg.verifier.options(cfg.seed);

    let (cert, scanned): (Certification, Option<Vec<f64>>) = match cfg.alpha {
        Some(alpha) => {
            let cert = certify(&g, alpha, &opts)
                .map_err(super::geometry_error)?;
            (cert, None)
        }
        None => {
            let alphas = cfg.scan.alphas();
            let certs: Result<Vec<Certification>, _> = pool
                .install(|| alphas.par_iter().map(|&a| certify(&g, a, &opts)).collect());
            let mut certs = certs.map_err(super::geometry_error)?;
            // The range is ascending, so the first passing entry is the
            // smallest admissible value; with none passing, the report
            // documents the largest scanned value.
            let pick = certs
                .iter()
                .position(|c| c.report.verdict)
                .unwrap_or(certs.len() - 1);
            (certs.swap_remove(pick), Some(alphas))
        }
    };

    write_reports(&cert, scanned.as_deref(), out)?;

    if cert.report.verdict {
        Ok(())
    } else {
        let failing: Vec<&str> = cert
            .report
            .checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.name.as_str())
            .collect();
        Err(CliError::Inadmissible(format!(
            "alpha = {} fails: {}",
            cert.report.alpha,
            failing.join(", ")
        )))
    }
}

fn write_reports(cert: &Certification, scanned: Option<&[f64]>, out: &Path) -> Result<(), CliError> {
    let report = serde_json::to_value(&cert.report)
        .map_err(|e| CliError::Config(format!("serialize report: {e}")))?;
    let body = json!({
        "parameter_source": if scanned.is_some() { "scan" } else { "pinned" },
        "scanned_alphas": scanned,
        "certification": report,
    });
    output::write_file(out, "report.json", &output::json_report(body)?)?;

    let mut csv = Csv::new(&["check", "coordinate", "value", "margin"]);
    for table in &cert.samples {
        for row in &table.rows {
            csv.row(&[
                Cell::Str(&table.check),
                Cell::Float(row.coordinate),
                Cell::Float(row.value),
                Cell::Float(row.margin),
            ]);
        }
    }
    output::write_file(out, "margins.csv", &csv.finish())
}
