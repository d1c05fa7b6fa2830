//! One module per subcommand. Each takes the parsed configuration, the
//! output directory, and the thread pool, writes its report files, and
//! returns the verdict as a `Result`; verdict-style failures are returned
//! only after the files are on disk.

pub mod constants;
pub mod evolve;
pub mod scan;
pub mod theorem1;
pub mod verify;

use morawetz_core::accounting::AccountingError;
use morawetz_core::geometry::{Geometry, GeometryError};
use morawetz_core::solver::SolverError;

use crate::CliError;

pub(crate) fn geometry(mass: f64) -> Result<Geometry, CliError> {
    Geometry::new(mass).map_err(geometry_error)
}

pub(crate) fn geometry_error(e: GeometryError) -> CliError {
    CliError::Config(e.to_string())
}

/// A runaway norm is the one evolution failure with its own exit code;
/// everything else an evolution or accounting pass can report traces back
/// to the configuration.
pub(crate) fn solver_error(e: SolverError) -> CliError {
    match e {
        SolverError::Unstable { .. } => CliError::Unstable(e.to_string()),
        SolverError::InvalidGrid { .. } => CliError::Config(e.to_string()),
    }
}

pub(crate) fn accounting_error(e: AccountingError) -> CliError {
    match e {
        AccountingError::Evolution(inner) => solver_error(inner),
        other => CliError::Config(other.to_string()),
    }
}
