//! The JSON configuration shared by all subcommands. Every field has a
//! default, so `{}` (or no `--config` at all) is a complete configuration;
//! unknown keys are rejected at every nesting level so typos fail loudly
//! instead of silently running defaults.

use std::path::Path;

use serde::{Deserialize, Serialize};

use morawetz_core::accounting::{EnsembleOptions, TrapezoidRegion};
use morawetz_core::verifier::{ConstantOptions, VerifierOptions};

use crate::CliError;

/// Multiplier parameter used by commands that need one concrete value when
/// `alpha` is absent from the configuration: the smallest round value the
/// default certification scan admits.
pub const FALLBACK_ALPHA: f64 = 10.0;

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    /// Black-hole mass; all lengths scale with it.
    pub mass: f64,
    /// Multiplier family parameter. When absent, `verify` and `scan-alpha`
    /// search the `scan` range and other commands fall back to
    /// [`FALLBACK_ALPHA`].
    pub alpha: Option<f64>,
    /// Base seed for every randomized draw; the `--seed` flag overrides it.
    pub seed: u64,
    /// Where reports are written; the `--out` flag overrides it.
    pub output_dir: String,
    pub scan: ScanBlock,
    pub verifier: VerifierBlock,
    pub constants: ConstantsBlock,
    pub solver: SolverBlock,
    pub ensemble: EnsembleBlock,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            mass: 1.0,
            alpha: None,
            seed: 0,
            output_dir: String::from("out"),
            scan: ScanBlock::default(),
            verifier: VerifierBlock::default(),
            constants: ConstantsBlock::default(),
            solver: SolverBlock::default(),
            ensemble: EnsembleBlock::default(),
        }
    }
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let raw = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let cfg: Config = serde_json::from_str(&raw)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if !(self.mass > 0.0 && self.mass.is_finite()) {
            return Err(CliError::Config("mass must be positive and finite".into()));
        }
        if let Some(a) = self.alpha {
            if !(a > 0.0 && a.is_finite()) {
                return Err(CliError::Config("alpha must be positive and finite".into()));
            }
        }
        self.scan.validate()?;
        self.constants.validate()?;
        Ok(())
    }
}

/// Log-spaced parameter range searched when `alpha` is not pinned.
#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScanBlock {
    pub alpha_min: f64,
    pub alpha_max: f64,
    pub points: usize,
}

impl Default for ScanBlock {
    fn default() -> Self {
        ScanBlock { alpha_min: 4.0, alpha_max: 400.0, points: 7 }
    }
}

impl ScanBlock {
    fn validate(&self) -> Result<(), CliError> {
        if !(self.alpha_min > 0.0 && self.alpha_max >= self.alpha_min) {
            return Err(CliError::Config("scan range must satisfy 0 < alpha_min <= alpha_max".into()));
        }
        if self.points == 0 {
            return Err(CliError::Config("scan needs at least one point".into()));
        }
        Ok(())
    }

    pub fn alphas(&self) -> Vec<f64> {
        morawetz_core::verifier::log_spaced(self.alpha_min, self.alpha_max, self.points)
    }
}

/// Grids and tolerances of the inequality scans; mirrors the library
/// options minus the seed, which comes from the top level.
#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifierBlock {
    pub r_star_min: f64,
    pub r_max_over_mass: f64,
    pub split_radius_over_mass: f64,
    pub base_points: usize,
    pub max_refinements: u32,
    pub stability_tol: f64,
    pub exact_zero_tol: f64,
    pub sample_rows: usize,
    pub cross_check_samples: usize,
}

impl Default for VerifierBlock {
    fn default() -> Self {
        let o = VerifierOptions::default();
        VerifierBlock {
            r_star_min: o.r_star_min,
            r_max_over_mass: o.r_max_over_mass,
            split_radius_over_mass: o.split_radius_over_mass,
            base_points: o.base_points,
            max_refinements: o.max_refinements,
            stability_tol: o.stability_tol,
            exact_zero_tol: o.exact_zero_tol,
            sample_rows: o.sample_rows,
            cross_check_samples: o.cross_check_samples,
        }
    }
}

impl VerifierBlock {
    pub fn options(&self, seed: u64) -> VerifierOptions {
        VerifierOptions {
            r_star_min: self.r_star_min,
            r_max_over_mass: self.r_max_over_mass,
            split_radius_over_mass: self.split_radius_over_mass,
            base_points: self.base_points,
            max_refinements: self.max_refinements,
            stability_tol: self.stability_tol,
            exact_zero_tol: self.exact_zero_tol,
            sample_rows: self.sample_rows,
            cross_check_samples: self.cross_check_samples,
            seed,
        }
    }
}

/// Search grid of the best-constant eigenproblems.
#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConstantsBlock {
    pub r_star_min: f64,
    pub r_star_max: f64,
    pub base_points: usize,
    pub ell_min: u32,
    pub ell_max: u32,
    pub aux_weight: f64,
    pub validation_samples: usize,
}

impl Default for ConstantsBlock {
    fn default() -> Self {
        let o = ConstantOptions::default();
        ConstantsBlock {
            r_star_min: o.r_star_min,
            r_star_max: o.r_star_max,
            base_points: o.base_points,
            ell_min: o.ell_min,
            ell_max: o.ell_max,
            aux_weight: o.aux_weight,
            validation_samples: o.validation_samples,
        }
    }
}

impl ConstantsBlock {
    fn validate(&self) -> Result<(), CliError> {
        if self.ell_min > self.ell_max {
            return Err(CliError::Config(format!(
                "empty mode range: ell_min = {} > ell_max = {}",
                self.ell_min, self.ell_max
            )));
        }
        Ok(())
    }

    pub fn options(&self, seed: u64) -> ConstantOptions {
        ConstantOptions {
            r_star_min: self.r_star_min,
            r_star_max: self.r_star_max,
            base_points: self.base_points,
            ell_min: self.ell_min,
            ell_max: self.ell_max,
            aux_weight: self.aux_weight,
            validation_samples: self.validation_samples,
            seed,
        }
    }
}

/// A causal trapezoid given by its two time faces and the top-face radial
/// interval.
#[derive(Debug, Clone, Copy, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct RegionBlock {
    pub t1: f64,
    pub t2: f64,
    pub r1_star: f64,
    pub r2_star: f64,
}

impl RegionBlock {
    pub fn region(&self) -> Result<TrapezoidRegion, CliError> {
        TrapezoidRegion::new(self.t1, self.t2, self.r1_star, self.r2_star)
            .map_err(|e| CliError::Config(e.to_string()))
    }
}

/// One mode evolution: grid, initial pulse, accounting region, and the
/// refinement depth of the convergence table.
#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverBlock {
    pub ell: u32,
    pub r_star_min: f64,
    pub r_star_max: f64,
    pub h: f64,
    pub courant: f64,
    pub t_final: f64,
    /// Center of the initial leftward pulse.
    pub center: f64,
    /// Width of the initial pulse.
    pub width: f64,
    /// Amplitude of the initial pulse; zero evolves the zero field.
    pub amplitude: f64,
    /// Run the zero-potential oracle instead of the curved-space problem
    /// and compare against the exact translate.
    pub flat: bool,
    /// Extra halvings of `h` in the convergence table.
    pub refinements: u32,
    pub region: RegionBlock,
}

impl Default for SolverBlock {
    fn default() -> Self {
        SolverBlock {
            ell: 2,
            r_star_min: -90.0,
            r_star_max: 90.0,
            h: 0.05,
            courant: 0.5,
            t_final: 55.0,
            center: 40.0,
            width: 6.0,
            amplitude: 1.0,
            flat: false,
            refinements: 2,
            region: RegionBlock { t1: 5.0, t2: 45.0, r1_star: -12.0, r2_star: 12.0 },
        }
    }
}

impl Default for RegionBlock {
    fn default() -> Self {
        SolverBlock::default().region
    }
}

/// The random-data ensemble behind the integrated-estimate check; mirrors
/// the library options minus the seed.
#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnsembleBlock {
    pub runs: usize,
    pub ell_max: u32,
    pub h: f64,
    pub courant: f64,
    pub r_star_min: f64,
    pub r_star_max: f64,
    pub region: RegionBlock,
    pub center_range: [f64; 2],
    pub width_range: [f64; 2],
    pub amplitude_range: [f64; 2],
    /// Rerun the ensemble at half the spacing and report both constants.
    pub refine: bool,
}

impl Default for EnsembleBlock {
    fn default() -> Self {
        let o = EnsembleOptions::default();
        EnsembleBlock {
            runs: o.runs,
            ell_max: o.ell_max,
            h: o.h,
            courant: o.courant,
            r_star_min: o.r_star_min,
            r_star_max: o.r_star_max,
            region: RegionBlock {
                t1: o.region.t1,
                t2: o.region.t2,
                r1_star: o.region.r1_star,
                r2_star: o.region.r2_star,
            },
            center_range: [o.center_range.0, o.center_range.1],
            width_range: [o.width_range.0, o.width_range.1],
            amplitude_range: [o.amplitude_range.0, o.amplitude_range.1],
            refine: false,
        }
    }
}

impl EnsembleBlock {
    pub fn options(&self, seed: u64) -> Result<EnsembleOptions, CliError> {
        Ok(EnsembleOptions {
            runs: self.runs,
            ell_max: self.ell_max,
            seed,
            h: self.h,
            courant: self.courant,
            r_star_min: self.r_star_min,
            r_star_max: self.r_star_max,
            region: self.region.region()?,
            center_range: (self.center_range[0], self.center_range[1]),
            width_range: (self.width_range[0], self.width_range[1]),
            amplitude_range: (self.amplitude_range[0], self.amplitude_range[1]),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_object_is_the_default_config() {
        let cfg: Config = serde_json::from_str("{}").unwrap();
        assert_eq!(cfg.mass, 1.0);
        assert!(cfg.alpha.is_none());
        assert_eq!(cfg.seed, 0);
        assert_eq!(cfg.output_dir, "out");
        assert_eq!(cfg.scan.points, 7);
        assert_eq!(cfg.verifier.base_points, VerifierOptions::default().base_points);
        assert_eq!(cfg.ensemble.runs, 20);
    }

    #[test]
    fn unknown_keys_are_rejected_at_every_level() {
        assert!(serde_json::from_str::<Config>(r#"{"masss": 2.0}"#).is_err());
        assert!(serde_json::from_str::<Config>(r#"{"verifier": {"points": 5}}"#).is_err());
        assert!(serde_json::from_str::<Config>(r#"{"solver": {"region": {"t0": 1}}}"#).is_err());
    }

    #[test]
    fn validation_rejects_inconsistent_ranges() {
        let mut cfg = Config::default();
        cfg.constants.ell_min = 5;
        cfg.constants.ell_max = 2;
        assert!(matches!(cfg.validate(), Err(CliError::Config(_))));

        let mut cfg = Config::default();
        cfg.scan.alpha_min = 10.0;
        cfg.scan.alpha_max = 1.0;
        assert!(cfg.validate().is_err());

        let mut cfg = Config::default();
        cfg.alpha = Some(-1.0);
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn blocks_convert_onto_the_library_options() {
        let cfg = Config::default();
        let v = cfg.verifier.options(7);
        assert_eq!(v.seed, 7);
        assert_eq!(v.base_points, VerifierOptions::default().base_points);
        let c = cfg.constants.options(9);
        assert_eq!(c.seed, 9);
        assert_eq!(c.ell_max, ConstantOptions::default().ell_max);
        let e = cfg.ensemble.options(11).unwrap();
        assert_eq!(e.seed, 11);
        assert_eq!(e.region.t2, 140.0);
        assert_eq!(e.center_range, (55.0, 85.0));
    }
}
