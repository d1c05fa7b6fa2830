//! Certification of the kernel nonnegativity argument and computation of
//! best constants for the controlled-quantity estimates.
//!
//! Four scalar inequalities carry the nonnegativity of the combined kernel.
//! Each is scanned on a dense grid with targeted refinement where the
//! cancellations concentrate (the photon sphere and the arctangent shoulder
//! points), local minima are polished by golden-section search, and the
//! whole scan is repeated on doubled grids until the reported margin is
//! stable to the configured tolerance. A check passes only with a strictly
//! positive margin; the certification verdict requires all four.
//!
//! Best constants for the two controlled-quantity estimates come from a
//! generalized ratio maximization: at every grid radius and mode index both
//! sides are 3x3 quadratic forms in the mode coefficients, and the maximal
//! ratio is the largest eigenvalue of the numerator form whitened by the
//! denominator form. The mode-index limit is appended in closed form.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::currents::{
    controlled_aux_sphere, controlled_sphere, k_aux_sphere, k_combined_sphere,
    lower_bound_sphere, mode_to_jet, ModeState,
};
use crate::fmath;
use crate::geometry::{Geometry, GeometryError, MultiplierParams, RadialPoint};
use crate::multipliers::{
    d2h_dr2, d2h_dr2_parts, dh_dr, f_b, h_of_r, midrange_margin, ratio_function, s2_coefficient,
    s_tilde_coefficient,
};
use crate::rng::SplitMix64;

/// Scan controls for the certification checks.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifierOptions {
    /// Left end of the radial scans, as a tortoise coordinate.
    pub r_star_min: f64,
    /// Right end of the radial scans, as a radius in units of the mass.
    pub r_max_over_mass: f64,
    /// Split radius between the curvature argument and the direct far
    /// scan in the positivity chain, in units of the mass.
    pub split_radius_over_mass: f64,
    /// Base grid sizes; refinement doubles them.
    pub base_points: usize,
    /// Cap on grid-doubling passes.
    pub max_refinements: u32,
    /// Relative stability demanded of a margin between the last two passes.
    pub stability_tol: f64,
    /// Tolerance for the photon-sphere exact-zero identities.
    pub exact_zero_tol: f64,
    /// Number of rows kept per check for the flat sample table.
    pub sample_rows: usize,
    /// Random mode jets drawn for the lower-bound cross-validation.
    pub cross_check_samples: usize,
    /// Seed for the cross-validation draws.
    pub seed: u64,
}

impl Default for VerifierOptions {
    fn default() -> Self {
        VerifierOptions {
            r_star_min: -60.0,
            r_max_over_mass: 1.0e4,
            split_radius_over_mass: 10.0,
            base_points: 20_000,
            max_refinements: 5,
            stability_tol: 0.01,
            exact_zero_tol: 1.0e-12,
            sample_rows: 2_048,
            cross_check_samples: 10_000,
            seed: 0,
        }
    }
}

/// One named scalar attached to a check record.
#[derive(Debug, Clone, Serialize)]
pub struct Diagnostic {
    pub name: String,
    pub value: f64,
}

/// Outcome of one scanned inequality.
#[derive(Debug, Clone, Serialize)]
pub struct CheckRecord {
    pub name: String,
    /// Human-readable description of the scanned region.
    pub region: String,
    /// Points in the final scan pass.
    pub grid_points: usize,
    /// Number of scan passes taken until the margin stabilized.
    pub refinement_levels: u32,
    /// Smallest margin found; the inequality holds iff this is positive.
    pub min_margin: f64,
    /// Coordinate (radius or shifted tortoise offset) attaining the margin.
    pub argmin: f64,
    pub passed: bool,
    pub diagnostics: Vec<Diagnostic>,
}

/// Full certification outcome for one multiplier family.
#[derive(Debug, Clone, Serialize)]
pub struct CertificationReport {
    pub mass: f64,
    pub alpha: f64,
    pub c_star: f64,
    pub checks: Vec<CheckRecord>,
    pub verdict: bool,
}

/// One row of the flat sample table behind a check.
#[derive(Debug, Clone, Copy)]
pub struct ScanSample {
    pub coordinate: f64,
    pub value: f64,
    pub margin: f64,
}

/// Sample table for one check.
#[derive(Debug, Clone)]
pub struct CheckSamples {
    pub check: String,
    pub rows: Vec<ScanSample>,
}

/// A certification report together with the scan tables behind it.
#[derive(Debug, Clone)]
pub struct Certification {
    pub report: CertificationReport,
    pub samples: Vec<CheckSamples>,
}

/// Golden-section polish of a local minimum bracketed by three grid points.
fn golden_min(f: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut c = hi - INV_PHI * (hi - lo);
    let mut d = lo + INV_PHI * (hi - lo);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..80 {
        if fc <= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - INV_PHI * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + INV_PHI * (hi - lo);
            fd = f(d);
        }
        if hi - lo <= 1e-14 * (1.0 + fmath::abs(lo) + fmath::abs(hi)) {
            break;
        }
    }
    if fc <= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Scan `f` on `grid`, polish the deepest local minima, and return the
/// refined global minimum with its location and the raw samples.
fn scan_minimum(f: &dyn Fn(f64) -> f64, grid: &[f64]) -> (f64, f64, Vec<(f64, f64)>) {
    let values: Vec<(f64, f64)> = grid.iter().map(|&x| (x, f(x))).collect();
    let mut best = (f64::INFINITY, 0.0);
    for &(x, v) in &values {
        if v < best.0 {
            best = (v, x);
        }
    }
    // Collect interior local minima, deepest first, and polish a handful.
    let mut minima: Vec<usize> = (1..values.len().saturating_sub(1))
        .filter(|&i| values[i].1 <= values[i - 1].1 && values[i].1 <= values[i + 1].1)
        .collect();
    minima.sort_by(|&a, &b| values[a].1.partial_cmp(&values[b].1).unwrap());
    for &i in minima.iter().take(8) {
        let (x, v) = golden_min(f, values[i - 1].0, values[i + 1].0);
        if v < best.0 {
            best = (v, x);
        }
    }
    (best.0, best.1, values)
}

/// Uniform grid over `[lo, hi]` with `n + 1` points plus geometric clusters
/// around the listed centers, sorted and deduplicated.
fn clustered_grid(lo: f64, hi: f64, n: usize, centers: &[f64]) -> Vec<f64> {
    let mut pts = Vec::with_capacity(n + 1 + centers.len() * 26);
    let step = (hi - lo) / n as f64;
    for i in 0..=n {
        pts.push(lo + step * i as f64);
    }
    for &c in centers {
        if !(lo..=hi).contains(&c) {
            continue;
        }
        pts.push(c);
        let mut offset = step;
        for _ in 0..13 {
            offset *= 0.3;
            if c + offset <= hi {
                pts.push(c + offset);
            }
            if c - offset >= lo {
                pts.push(c - offset);
            }
        }
    }
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup();
    pts
}

fn decimate(rows: Vec<ScanSample>, keep: usize) -> Vec<ScanSample> {
    if rows.len() <= keep || keep == 0 {
        return rows;
    }
    let stride = rows.len().div_ceil(keep);
    rows.into_iter().step_by(stride.max(1)).collect()
}

/// Run one scan-with-refinement loop: `make_grid(points)` builds the grid
/// for a pass, `f` is the margin function. Returns (margin, argmin, passes,
/// final grid size, relative change in the last doubling, final samples).
fn refine_scan(
    f: &dyn Fn(f64) -> f64,
    make_grid: &dyn Fn(usize) -> Vec<f64>,
    opts: &VerifierOptions,
) -> (f64, f64, u32, usize, f64, Vec<(f64, f64)>) {
    let mut points = opts.base_points;
    let mut previous: Option<f64> = None;
    let mut passes = 0;
    loop {
        passes += 1;
        let grid = make_grid(points);
        let (margin, argmin, samples) = scan_minimum(f, &grid);
        let delta = previous
            .map(|p| fmath::abs(margin - p) / fmath::abs(margin).max(1e-300))
            .unwrap_or(f64::INFINITY);
        if (delta <= opts.stability_tol && passes >= 2) || passes > opts.max_refinements {
            return (margin, argmin, passes, grid.len(), delta, samples);
        }
        previous = Some(margin);
        points *= 2;
    }
}

/// The radial-coefficient check: the scanned lower-bound coefficient must
/// be nonnegative over the whole exterior range. Both the printed form and
/// the variant consistent with the shipped lower bound are scanned; the
/// gate takes the smaller of the two margins so a pass really implies
/// nonnegativity of the mode-jet lower bound, which is cross-validated
/// here on random jets as well.
fn check_lower_bound_coefficient(
    g: &Geometry,
    params: &MultiplierParams,
    opts: &VerifierOptions,
) -> (CheckRecord, Vec<ScanSample>) {
    let m = g.mass();
    let r_star_hi = g.rstar_of_r(opts.r_max_over_mass * m).unwrap();
    let x_offset = params.x_offset();
    let alpha = params.alpha();
    let centers = [0.0, x_offset - alpha, x_offset + alpha];

    let s2 = |rs: f64| {
        let p = g.point_at_rstar(rs);
        s2_coefficient(&p, params, g)
    };
    let s_tilde = |rs: f64| {
        let p = g.point_at_rstar(rs);
        s_tilde_coefficient(&p, params, g)
    };
    let lo = opts.r_star_min;
    let make_grid = |n: usize| clustered_grid(lo, r_star_hi, n, &centers);

    let (m2, arg2, passes2, grid_len, delta2, samples) = refine_scan(&s2, &make_grid, opts);
    let (mt, argt, _passes_t, _grid_t, delta_t, _unused) = refine_scan(&s_tilde, &make_grid, opts);

    // Cross-validation: the mode-jet lower bound must be nonnegative when
    // the scanned coefficients are. Scaled by the unsigned magnitude of the
    // bound's constituent terms.
    let mut rng = SplitMix64::new(opts.seed ^ 0x5eed_1b0c);
    let mut lb_min_scaled = f64::INFINITY;
    for _ in 0..opts.cross_check_samples {
        let rs = rng.uniform(lo, 200.0);
        let p = g.point_at_rstar(rs);
        let ell = rng.below(16) as u32 + 1;
        let mode = ModeState {
            ell,
            u: rng.uniform(-2.0, 2.0),
            ur: rng.uniform(-2.0, 2.0),
            ut: rng.uniform(-2.0, 2.0),
        };
        let jet = mode_to_jet(&mode, &p);
        let lb = lower_bound_sphere(&jet, &p, params);
        let scale = unsigned_lower_bound_scale(&jet, &p, params);
        let scaled = lb / scale.max(1e-300);
        if scaled < lb_min_scaled {
            lb_min_scaled = scaled;
        }
    }

    let min_margin = m2.min(mt);
    let argmin_rs = if m2 <= mt { arg2 } else { argt };
    let passed = min_margin > 0.0 && lb_min_scaled >= -1e-12;
    let record = CheckRecord {
        name: String::from("lower_bound_coefficient"),
        region: format!(
            "r* in [{lo}, {r_star_hi:.3}] with clusters at the photon sphere and x = +/-alpha"
        ),
        grid_points: grid_len,
        refinement_levels: passes2,
        min_margin,
        argmin: g.r_of_rstar(argmin_rs),
        passed,
        diagnostics: alloc::vec![
            Diagnostic { name: String::from("printed_coefficient_min"), value: m2 },
            Diagnostic { name: String::from("printed_coefficient_argmin_rstar"), value: arg2 },
            Diagnostic { name: String::from("consistent_coefficient_min"), value: mt },
            Diagnostic { name: String::from("consistent_coefficient_argmin_rstar"), value: argt },
            Diagnostic { name: String::from("refinement_delta_rel"), value: delta2.max(delta_t) },
            Diagnostic { name: String::from("mode_jet_bound_min_scaled"), value: lb_min_scaled },
        ],
    };
    let rows = samples
        .into_iter()
        .map(|(x, v)| ScanSample { coordinate: g.r_of_rstar(x), value: v, margin: v })
        .collect();
    (record, decimate(rows, opts.sample_rows))
}

/// Unsigned magnitude of the lower bound's three terms, used to scale the
/// cross-validation draws.
fn unsigned_lower_bound_scale(
    jet: &crate::currents::SphereJet,
    p: &RadialPoint,
    params: &MultiplierParams,
) -> f64 {
    let b_eval = f_b(p, params);
    let a_eval = crate::multipliers::f_a(p, params);
    let r2 = p.r * p.r;
    let p3 = fmath::abs(p.photon_factor());
    let zeroth = fmath::abs(crate::multipliers::big_f(p, params)) * r2
        + fmath::abs(b_eval.f) * p.mu * fmath::abs(3.0 - 4.0 * p.mu) / (2.0 * p.r);
    r2 * fmath::abs(b_eval.f) * p3 * jet.bang
        + zeroth * jet.b00
        + fmath::abs(a_eval.f) * p3 * jet.b00
}

/// The positivity chain for the radial compensator: strict positivity close
/// to the horizon, exact double zero at the photon sphere, convexity up to
/// the split radius, and direct positivity beyond it.
fn check_h_function(
    g: &Geometry,
    params: &MultiplierParams,
    opts: &VerifierOptions,
) -> (CheckRecord, Vec<ScanSample>) {
    let m = g.mass();
    let alpha = params.alpha();
    let split = opts.split_radius_over_mass * m;
    let r_max = opts.r_max_over_mass * m;

    // Near segment (horizon, 8M/3], geometric in r - 2M.
    let near = |r: f64| h_of_r(r, params, g);
    let near_grid = |n: usize| {
        let lo_gap = 1e-12 * m;
        let hi_gap = 8.0 * m / 3.0 - 2.0 * m;
        let ratio = fmath::ln(hi_gap / lo_gap);
        (0..=n)
            .map(|i| 2.0 * m + lo_gap * fmath::exp(ratio * i as f64 / n as f64))
            .collect::<Vec<f64>>()
    };
    let (near_min, near_arg, passes, _pts, near_delta, near_samples) =
        refine_scan(&near, &near_grid, opts);

    // Photon-sphere double zero.
    let h_center = fmath::abs(h_of_r(3.0 * m, params, g));
    let dh_center = fmath::abs(dh_dr(3.0 * m, params, g));
    let center_margin =
        (opts.exact_zero_tol - h_center).min(opts.exact_zero_tol - dh_center);

    // Convexity segment [8M/3, split].
    let curvature = |r: f64| d2h_dr2(r, params, g);
    let mid_grid = |n: usize| {
        let lo = 8.0 * m / 3.0;
        (0..=n)
            .map(|i| lo + (split - lo) * i as f64 / n as f64)
            .collect::<Vec<f64>>()
    };
    let (curv_min, curv_arg, _p2, _g2, curv_delta, mid_samples) =
        refine_scan(&curvature, &mid_grid, opts);

    // Far segment [split, r_max], geometric in r.
    let far_grid = |n: usize| {
        let ratio = fmath::ln(r_max / split);
        (0..=n)
            .map(|i| split * fmath::exp(ratio * i as f64 / n as f64))
            .collect::<Vec<f64>>()
    };
    let (far_min, far_arg, _p3, _g3, far_delta, far_samples) =
        refine_scan(&near, &far_grid, opts);

    // Empirical scaling constants of the curvature decomposition, and the
    // far-field floor constant of the arctangent profile.
    let mut f2_term_max = 0.0f64;
    let mut f1_terms_min = f64::INFINITY;
    {
        let lo = 8.0 * m / 3.0;
        for i in 0..=2000 {
            let r = lo + (split - lo) * i as f64 / 2000.0;
            let parts = d2h_dr2_parts(r, params, g);
            f2_term_max = f2_term_max.max(fmath::abs(parts.f2_term));
            f1_terms_min = f1_terms_min.min(parts.f1_term + parts.fb_term);
        }
    }
    let mut floor_c = f64::INFINITY;
    {
        for i in 0..=2000 {
            let r = split * fmath::exp(fmath::ln(r_max / split) * i as f64 / 2000.0);
            let p = g.point_at_r(r).unwrap();
            let fb = f_b(&p, params).f;
            let envelope = (p.r / alpha).min(1.0) / alpha;
            floor_c = floor_c.min(fb / envelope);
        }
    }

    let mut min_margin = near_min;
    let mut argmin = near_arg;
    for (v, a) in [(center_margin, 3.0 * m), (curv_min, curv_arg), (far_min, far_arg)] {
        if v < min_margin {
            min_margin = v;
            argmin = a;
        }
    }
    let record = CheckRecord {
        name: String::from("h_function"),
        region: format!(
            "r in (2M, {:.1}M] near, [8M/3, {:.0}M] convexity, [{:.0}M, {:.0}M] far",
            8.0 / 3.0,
            split / m,
            split / m,
            r_max / m
        ),
        grid_points: near_samples.len() + mid_samples.len() + far_samples.len(),
        refinement_levels: passes,
        min_margin,
        argmin,
        passed: min_margin > 0.0,
        diagnostics: alloc::vec![
            Diagnostic { name: String::from("near_min"), value: near_min },
            Diagnostic { name: String::from("photon_sphere_value"), value: h_center },
            Diagnostic { name: String::from("photon_sphere_slope"), value: dh_center },
            Diagnostic { name: String::from("curvature_min"), value: curv_min },
            Diagnostic {
                name: String::from("curvature_min_times_alpha2"),
                value: curv_min * alpha * alpha,
            },
            Diagnostic {
                name: String::from("second_derivative_term_max_times_alpha3"),
                value: f2_term_max * alpha * alpha * alpha,
            },
            Diagnostic {
                name: String::from("first_derivative_terms_min_times_alpha2"),
                value: f1_terms_min * alpha * alpha,
            },
            Diagnostic { name: String::from("far_min"), value: far_min },
            Diagnostic { name: String::from("far_profile_floor_constant"), value: floor_c * alpha },
            Diagnostic {
                name: String::from("refinement_delta_rel"),
                value: near_delta.max(curv_delta).max(far_delta),
            },
        ],
    };

    let mut rows: Vec<ScanSample> = Vec::new();
    for (x, v) in near_samples.into_iter().chain(far_samples) {
        rows.push(ScanSample { coordinate: x, value: v, margin: v });
    }
    for (x, v) in mid_samples {
        rows.push(ScanSample { coordinate: x, value: v, margin: v });
    }
    rows.sort_by(|a, b| a.coordinate.partial_cmp(&b.coordinate).unwrap());
    (record, decimate(rows, opts.sample_rows))
}

/// The shoulder-ratio bound: the rational function of the shifted tortoise
/// offset stays below 9/10 on [-alpha, alpha], with the two sharper
/// interval bounds used by the positivity argument.
fn check_ratio_bound(
    params: &MultiplierParams,
    opts: &VerifierOptions,
) -> (CheckRecord, Vec<ScanSample>) {
    let alpha = params.alpha();
    const GLOBAL_BOUND: f64 = 0.9;
    const LEFT_BOUND: f64 = 0.75;
    // (2/7) * 2^(3/2)
    const RIGHT_BOUND: f64 = 0.808_122_035_641_768_5;

    let neg_ratio = |x: f64| -ratio_function(x, alpha);
    let left_grid = |n: usize| {
        (0..=n)
            .map(|i| -alpha + alpha * i as f64 / n as f64)
            .collect::<Vec<f64>>()
    };
    let right_grid = |n: usize| {
        (0..=n)
            .map(|i| alpha * i as f64 / n as f64)
            .collect::<Vec<f64>>()
    };
    let (neg_left, left_arg, passes, grid_len, left_delta, left_samples) =
        refine_scan(&neg_ratio, &left_grid, opts);
    let (neg_right, right_arg, _p, _g, right_delta, right_samples) =
        refine_scan(&neg_ratio, &right_grid, opts);
    let left_max = -neg_left;
    let right_max = -neg_right;
    let global_max = left_max.max(right_max);

    let margins = [
        (GLOBAL_BOUND - global_max, if left_max >= right_max { left_arg } else { right_arg }),
        (LEFT_BOUND - left_max, left_arg),
        (RIGHT_BOUND - right_max, right_arg),
    ];
    let (mut min_margin, mut argmin) = margins[0];
    for &(v, a) in &margins[1..] {
        if v < min_margin {
            min_margin = v;
            argmin = a;
        }
    }

    let record = CheckRecord {
        name: String::from("ratio_bound"),
        region: format!("x in [-{alpha}, {alpha}]"),
        grid_points: grid_len * 2,
        refinement_levels: passes,
        min_margin,
        argmin,
        passed: min_margin > 0.0,
        diagnostics: alloc::vec![
            Diagnostic { name: String::from("global_max"), value: global_max },
            Diagnostic { name: String::from("left_interval_max"), value: left_max },
            Diagnostic { name: String::from("right_interval_max"), value: right_max },
            Diagnostic { name: String::from("global_bound"), value: GLOBAL_BOUND },
            Diagnostic { name: String::from("left_bound"), value: LEFT_BOUND },
            Diagnostic { name: String::from("right_bound"), value: RIGHT_BOUND },
            Diagnostic {
                name: String::from("refinement_delta_rel"),
                value: left_delta.max(right_delta),
            },
        ],
    };
    let rows = left_samples
        .into_iter()
        .chain(right_samples)
        .map(|(x, v)| ScanSample { coordinate: x, value: -v, margin: GLOBAL_BOUND + v })
        .collect();
    (record, decimate(rows, opts.sample_rows))
}

/// The midrange inequality, checked in its exact form on the shoulder
/// interval; the large-alpha surrogates are compared against the exact
/// pieces and their worst relative deviations reported.
fn check_midrange_exact(
    g: &Geometry,
    params: &MultiplierParams,
    opts: &VerifierOptions,
) -> (CheckRecord, Vec<ScanSample>) {
    let alpha = params.alpha();
    let x_offset = params.x_offset();
    let exact = |x: f64| {
        let p = g.point_at_rstar(x + x_offset);
        midrange_margin(&p, params, g)
    };
    let make_grid = |n: usize| {
        (0..=n)
            .map(|i| -alpha + 2.0 * alpha * i as f64 / n as f64)
            .collect::<Vec<f64>>()
    };
    let (min_margin, argmin, passes, grid_len, delta, samples) =
        refine_scan(&exact, &make_grid, opts);

    // Deviation of the two large-alpha surrogates from the exact pieces.
    let mut f_dev_max = 0.0f64;
    let mut lead_dev_max = 0.0f64;
    let sqrt_alpha = fmath::sqrt(alpha);
    for i in 0..=2000 {
        let x = -alpha + 2.0 * alpha * i as f64 / 2000.0;
        let p = g.point_at_rstar(x + x_offset);
        let d = alpha * alpha + x * x;
        let exact_f = crate::multipliers::big_f(&p, params);
        let approx_f = 0.5 * (x * x - alpha * alpha) / (d * d * d);
        if exact_f != 0.0 {
            f_dev_max = f_dev_max.max(fmath::abs(approx_f - exact_f) / fmath::abs(exact_f));
        }
        let lead = {
            let eval = f_b(&p, params);
            2.0 * eval.f * (p.r - 3.0 * g.mass()) / (p.r * p.r * p.r * p.r)
        };
        let approx_lead = {
            let shoulder = x + alpha + sqrt_alpha;
            2.0 * (x + alpha) / (d * shoulder * shoulder * shoulder)
        };
        if fmath::abs(lead) > 1e-300 {
            lead_dev_max = lead_dev_max.max(fmath::abs(approx_lead - lead) / fmath::abs(lead));
        }
    }

    let record = CheckRecord {
        name: String::from("midrange_exact"),
        region: format!("x in [-{alpha}, {alpha}] (exact inequality, surrogates diagnostic)"),
        grid_points: grid_len,
        refinement_levels: passes,
        min_margin,
        argmin,
        passed: min_margin > 0.0,
        diagnostics: alloc::vec![
            Diagnostic { name: String::from("zeroth_surrogate_max_rel_dev"), value: f_dev_max },
            Diagnostic { name: String::from("leading_surrogate_max_rel_dev"), value: lead_dev_max },
            Diagnostic { name: String::from("refinement_delta_rel"), value: delta },
        ],
    };
    let rows = samples
        .into_iter()
        .map(|(x, v)| ScanSample { coordinate: x, value: v, margin: v })
        .collect();
    (record, decimate(rows, opts.sample_rows))
}

/// Certify one multiplier family: run all four checks and assemble the
/// report. Pure in (mass, alpha, options).
pub fn certify(g: &Geometry, alpha: f64, opts: &VerifierOptions) -> Result<Certification, GeometryError> {
    let params = MultiplierParams::new(alpha, g)?;
    let (rec_s2, rows_s2) = check_lower_bound_coefficient(g, &params, opts);
    let (rec_h, rows_h) = check_h_function(g, &params, opts);
    let (rec_ratio, rows_ratio) = check_ratio_bound(&params, opts);
    let (rec_mid, rows_mid) = check_midrange_exact(g, &params, opts);
    let checks = alloc::vec![rec_s2, rec_h, rec_ratio, rec_mid];
    let verdict = checks.iter().all(|c| c.passed);
    Ok(Certification {
        report: CertificationReport {
            mass: g.mass(),
            alpha,
            c_star: params.c_star(),
            checks,
            verdict,
        },
        samples: alloc::vec![
            CheckSamples { check: String::from("lower_bound_coefficient"), rows: rows_s2 },
            CheckSamples { check: String::from("h_function"), rows: rows_h },
            CheckSamples { check: String::from("ratio_bound"), rows: rows_ratio },
            CheckSamples { check: String::from("midrange_exact"), rows: rows_mid },
        ],
    })
}

/// One row of the admissibility table produced by the parameter scan.
#[derive(Debug, Clone, Serialize)]
pub struct AlphaScanEntry {
    pub alpha: f64,
    pub c_star: f64,
    pub margins: Vec<Diagnostic>,
    pub passed: bool,
}

/// Outcome of scanning a parameter range for admissibility.
#[derive(Debug, Clone, Serialize)]
pub struct AlphaScanReport {
    pub entries: Vec<AlphaScanEntry>,
    /// Smallest scanned value passing every check.
    pub certified_alpha: Option<f64>,
}

/// Log-spaced grid, inclusive of both ends.
pub fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n <= 1 {
        return alloc::vec![lo];
    }
    let ratio = fmath::ln(hi / lo);
    (0..n)
        .map(|i| lo * fmath::exp(ratio * i as f64 / (n - 1) as f64))
        .collect()
}

/// Condense one certification into a scan-table entry.
pub fn scan_entry(cert: &Certification) -> AlphaScanEntry {
    AlphaScanEntry {
        alpha: cert.report.alpha,
        c_star: cert.report.c_star,
        margins: cert
            .report
            .checks
            .iter()
            .map(|c| Diagnostic { name: c.name.clone(), value: c.min_margin })
            .collect(),
        passed: cert.report.verdict,
    }
}

/// Scan a parameter list for admissibility. Sequential reference
/// implementation; callers may certify the points in parallel and reduce
/// with [`scan_entry`] since every certification is pure.
pub fn scan_alpha(
    g: &Geometry,
    alphas: &[f64],
    opts: &VerifierOptions,
) -> Result<(AlphaScanReport, Option<Certification>), GeometryError> {
    let mut entries = Vec::with_capacity(alphas.len());
    let mut best: Option<Certification> = None;
    for &alpha in alphas {
        let cert = certify(g, alpha, opts)?;
        entries.push(scan_entry(&cert));
        if cert.report.verdict {
            let replace = match &best {
                Some(b) => alpha < b.report.alpha,
                None => true,
            };
            if replace {
                best = Some(cert);
            }
        }
    }
    let certified_alpha = best.as_ref().map(|c| c.report.alpha);
    Ok((AlphaScanReport { entries, certified_alpha }, best))
}

// ---------------------------------------------------------------------------
// Best constants via 3x3 generalized ratio maximization.

/// Which denominator form a constant is computed against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConstantKind {
    /// The combined kernel alone.
    Kernel,
    /// The combined kernel plus the weighted auxiliary kernel, with the
    /// time-derivative term added to the controlled side.
    KernelPlusAux,
}

impl ConstantKind {
    pub fn name(self) -> &'static str {
        match self {
            ConstantKind::Kernel => "k",
            ConstantKind::KernelPlusAux => "k_plus_aux",
        }
    }
}

/// Grid and sampling controls for the constant search.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConstantOptions {
    pub r_star_min: f64,
    pub r_star_max: f64,
    pub base_points: usize,
    /// Smallest mode index searched; the range `ell_min..=ell_max` must be
    /// nonempty.
    pub ell_min: u32,
    pub ell_max: u32,
    pub aux_weight: f64,
    pub validation_samples: usize,
    pub seed: u64,
}

impl Default for ConstantOptions {
    fn default() -> Self {
        ConstantOptions {
            r_star_min: -60.0,
            r_star_max: 200.0,
            base_points: 2_600,
            ell_min: 0,
            ell_max: 64,
            aux_weight: 1.0e-3,
            validation_samples: 100_000,
            seed: 0,
        }
    }
}

/// Largest ratio over one mode index, with the radius attaining it.
#[derive(Debug, Clone, Serialize)]
pub struct EllExtremum {
    /// Mode index; -1 denotes the large-index limit form.
    pub ell: i64,
    pub ratio: f64,
    pub r_star: f64,
}

/// Best-constant outcome for one controlled-quantity estimate.
#[derive(Debug, Clone, Serialize)]
pub struct BestConstantReport {
    pub kind: String,
    pub mass: f64,
    pub alpha: f64,
    pub c_star: f64,
    pub aux_weight: f64,
    /// The supremum of the controlled/kernel ratio over the search grid.
    pub constant: f64,
    pub argmax_r_star: f64,
    /// Mode index attaining the constant; -1 denotes the limit form.
    pub argmax_ell: i64,
    pub exceeds_1e6: bool,
    pub grid: String,
    pub per_ell: Vec<EllExtremum>,
    /// Smallest scaled value of (constant * kernel - controlled) over the
    /// random validation draws; nonnegative up to round-off when the
    /// constant is genuine.
    pub validation_min: f64,
    pub validation_samples: usize,
}

/// Failure modes of the constant search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConstantError {
    /// The requested mode range `ell_min..=ell_max` is empty.
    EmptyModeRange { ell_min: u32, ell_max: u32 },
    /// The certified kernel form came out indefinite somewhere, which
    /// contradicts the certification.
    KernelNotPsd { r_star: f64, ell: u32, eigenvalue: f64 },
    /// The auxiliary-augmented form is indefinite: the auxiliary weight is
    /// too large for this multiplier family.
    AugmentedNotPsd { r_star: f64, ell: u32, eigenvalue: f64 },
    /// The controlled form has support on a kernel null direction.
    UnboundedRatio { r_star: f64, ell: u32 },
}

impl core::fmt::Display for ConstantError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            ConstantError::EmptyModeRange { ell_min, ell_max } => {
                write!(f, "empty mode range: ell_min = {ell_min} > ell_max = {ell_max}")
            }
            ConstantError::KernelNotPsd { r_star, ell, eigenvalue } => write!(
                f,
                "kernel form indefinite at r* = {r_star}, mode {ell} (eigenvalue {eigenvalue:e})"
            ),
            ConstantError::AugmentedNotPsd { r_star, ell, eigenvalue } => write!(
                f,
                "augmented form indefinite at r* = {r_star}, mode {ell} (eigenvalue {eigenvalue:e}); auxiliary weight too large"
            ),
            ConstantError::UnboundedRatio { r_star, ell } => {
                write!(f, "unbounded ratio at r* = {r_star}, mode {ell}")
            }
        }
    }
}

impl core::error::Error for ConstantError {}

/// Eigenvalues and eigenvector columns of a symmetric 3x3 matrix by cyclic
/// Jacobi rotations.
fn jacobi3(mut m: [[f64; 3]; 3]) -> ([f64; 3], [[f64; 3]; 3]) {
    let mut v = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    for _ in 0..64 {
        let off = m[0][1] * m[0][1] + m[0][2] * m[0][2] + m[1][2] * m[1][2];
        let scale = m[0][0] * m[0][0] + m[1][1] * m[1][1] + m[2][2] * m[2][2];
        if off <= 1e-32 * (scale + off) {
            break;
        }
        for (p, q) in [(0usize, 1usize), (0, 2), (1, 2)] {
            if m[p][q] == 0.0 {
                continue;
            }
            let theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
            let t = if theta >= 0.0 {
                1.0 / (theta + fmath::sqrt(1.0 + theta * theta))
            } else {
                -1.0 / (-theta + fmath::sqrt(1.0 + theta * theta))
            };
            let c = 1.0 / fmath::sqrt(1.0 + t * t);
            let s = t * c;
            let mpp = m[p][p];
            let mqq = m[q][q];
            let mpq = m[p][q];
            m[p][p] = mpp - t * mpq;
            m[q][q] = mqq + t * mpq;
            m[p][q] = 0.0;
            m[q][p] = 0.0;
            for k in 0..3 {
                if k != p && k != q {
                    let mkp = m[k][p];
                    let mkq = m[k][q];
                    m[k][p] = c * mkp - s * mkq;
                    m[p][k] = m[k][p];
                    m[k][q] = s * mkp + c * mkq;
                    m[q][k] = m[k][q];
                }
            }
            for row in &mut v {
                let vp = row[p];
                let vq = row[q];
                row[p] = c * vp - s * vq;
                row[q] = s * vp + c * vq;
            }
        }
    }
    ([m[0][0], m[1][1], m[2][2]], v)
}

/// Build the 3x3 matrix of a quadratic functional of the mode coefficients
/// by polarization.
fn form_matrix(q: &dyn Fn(f64, f64, f64) -> f64) -> [[f64; 3]; 3] {
    let q100 = q(1.0, 0.0, 0.0);
    let q010 = q(0.0, 1.0, 0.0);
    let q001 = q(0.0, 0.0, 1.0);
    let q110 = q(1.0, 1.0, 0.0);
    let q101 = q(1.0, 0.0, 1.0);
    let q011 = q(0.0, 1.0, 1.0);
    [
        [q100, 0.5 * (q110 - q100 - q010), 0.5 * (q101 - q100 - q001)],
        [0.5 * (q110 - q100 - q010), q010, 0.5 * (q011 - q010 - q001)],
        [0.5 * (q101 - q100 - q001), 0.5 * (q011 - q010 - q001), q001],
    ]
}

enum RatioOutcome {
    Bounded(f64),
    Unbounded,
    NotPsd(f64),
}

/// Maximal generalized ratio v'Av / v'Bv over nonzero v with v'Bv > 0, for
/// symmetric positive semidefinite A and B.
///
/// `active` names the coordinates the denominator genuinely carries; the
/// rest are structurally null (the quadratic form contains no such terms,
/// so their matrix entries are at worst cancellation noise) and the ratio
/// is unbounded if the numerator touches them. The active block is
/// equilibrated by its diagonal before the eigensolve: the raw sectors are
/// separated by up to fourteen orders of magnitude near the horizon, which
/// would otherwise make every small-but-genuine entry look like a null
/// direction.
fn max_generalized_ratio(a: &[[f64; 3]; 3], b: &[[f64; 3]; 3], active: &[usize]) -> RatioOutcome {
    let a_scale = a
        .iter()
        .flatten()
        .fold(0.0f64, |acc, &x| acc.max(fmath::abs(x)));
    // The numerator must vanish on the structurally null coordinates. Both
    // quadratic forms are diagonal-dominated sums of squares, so checking
    // the diagonal suffices for a positive semidefinite numerator.
    for i in 0..3 {
        if !active.contains(&i) && fmath::abs(a[i][i]) > 1e-12 * a_scale {
            return RatioOutcome::Unbounded;
        }
    }
    if active.is_empty() {
        return RatioOutcome::Bounded(0.0);
    }
    // Equilibrate: scale both forms by 1/sqrt of the denominator diagonal.
    let mut inv_scale = [0.0f64; 3];
    for (slot, &i) in inv_scale.iter_mut().zip(active) {
        let dii = b[i][i];
        if dii <= 0.0 {
            return RatioOutcome::NotPsd(dii);
        }
        *slot = 1.0 / fmath::sqrt(dii);
    }
    let k = active.len();
    // Pad the equilibrated denominator with decoupled unit diagonal and the
    // numerator with zeros so the fixed-size solver applies; the padding
    // contributes eigenvalue one to one and nothing to the other.
    let mut c = [[0.0; 3]; 3];
    let mut a_eq = [[0.0; 3]; 3];
    for i in 0..3 {
        c[i][i] = 1.0;
    }
    for i in 0..k {
        for j in 0..k {
            c[i][j] = b[active[i]][active[j]] * inv_scale[i] * inv_scale[j];
            a_eq[i][j] = a[active[i]][active[j]] * inv_scale[i] * inv_scale[j];
        }
    }
    let a_eq_scale = a_eq
        .iter()
        .flatten()
        .fold(0.0f64, |acc, &x| acc.max(fmath::abs(x)));
    let (d, vecs) = jacobi3(c);
    let mut white: Vec<[f64; 3]> = Vec::new();
    for i in 0..3 {
        if d[i] < -1e-11 {
            return RatioOutcome::NotPsd(d[i]);
        }
        let col = [vecs[0][i], vecs[1][i], vecs[2][i]];
        if d[i] <= 1e-13 {
            // A genuinely degenerate direction of the equilibrated block:
            // bounded only if the numerator vanishes along it.
            let av = mat_vec(&a_eq, &col);
            let vav = col[0] * av[0] + col[1] * av[1] + col[2] * av[2];
            if fmath::abs(vav) > 1e-8 * a_eq_scale {
                return RatioOutcome::Unbounded;
            }
        } else {
            let s = 1.0 / fmath::sqrt(d[i]);
            white.push([col[0] * s, col[1] * s, col[2] * s]);
        }
    }
    // Whitened numerator, padded with zero rows to reuse the 3x3 solver.
    let mut reduced = [[0.0; 3]; 3];
    for (i, wi) in white.iter().enumerate() {
        for (j, wj) in white.iter().enumerate() {
            let awj = mat_vec(&a_eq, wj);
            reduced[i][j] = wi[0] * awj[0] + wi[1] * awj[1] + wi[2] * awj[2];
        }
    }
    let (eigs, _) = jacobi3(reduced);
    RatioOutcome::Bounded(eigs[0].max(eigs[1]).max(eigs[2]).max(0.0))
}

/// The coordinates (u, radial derivative, time derivative) the denominator
/// form genuinely contains. The kernel has no time-derivative content at
/// all, and on the lowest mode every term carrying the field value itself
/// is weighted by the angular eigenvalue and drops.
fn active_coordinates(kind: ConstantKind, ell: u32) -> &'static [usize] {
    match (kind, ell) {
        (ConstantKind::Kernel, 0) => &[1],
        (ConstantKind::Kernel, _) => &[0, 1],
        (ConstantKind::KernelPlusAux, 0) => &[1, 2],
        (ConstantKind::KernelPlusAux, _) => &[0, 1, 2],
    }
}

fn mat_vec(m: &[[f64; 3]; 3], v: &[f64; 3]) -> [f64; 3] {
    [
        m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
        m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
        m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
    ]
}

fn numerator(jet: &crate::currents::SphereJet, p: &RadialPoint, kind: ConstantKind) -> f64 {
    match kind {
        ConstantKind::Kernel => controlled_sphere(jet, p),
        ConstantKind::KernelPlusAux => controlled_aux_sphere(jet, p),
    }
}

fn denominator(
    jet: &crate::currents::SphereJet,
    p: &RadialPoint,
    params: &MultiplierParams,
    kind: ConstantKind,
    aux_weight: f64,
) -> f64 {
    match kind {
        ConstantKind::Kernel => k_combined_sphere(jet, p, params),
        ConstantKind::KernelPlusAux => {
            k_combined_sphere(jet, p, params) + k_aux_sphere(jet, p, aux_weight)
        }
    }
}

/// Large-mode-index limit of the pointwise ratio: only the top-degree
/// angular terms survive, leaving a scalar function of the radius with a
/// removable singularity at the photon sphere.
fn limit_ratio(p: &RadialPoint, params: &MultiplierParams, g: &Geometry) -> f64 {
    if fmath::abs(p.r_star) < 1e-5 {
        let x0 = params.x_offset();
        return (params.alpha() * params.alpha() + x0 * x0) / (9.0 * g.mass());
    }
    let fb = f_b(p, params).f;
    (p.r - 3.0 * g.mass()) / (p.r * fb)
}

/// Search the (radius, mode) grid for the best constant of one estimate.
pub fn best_constant(
    g: &Geometry,
    params: &MultiplierParams,
    kind: ConstantKind,
    opts: &ConstantOptions,
) -> Result<BestConstantReport, ConstantError> {
    if opts.ell_min > opts.ell_max {
        return Err(ConstantError::EmptyModeRange { ell_min: opts.ell_min, ell_max: opts.ell_max });
    }
    let aux_weight = match kind {
        ConstantKind::Kernel => 0.0,
        ConstantKind::KernelPlusAux => opts.aux_weight,
    };
    let grid = clustered_grid(opts.r_star_min, opts.r_star_max, opts.base_points, &[0.0]);

    let mut per_ell: Vec<EllExtremum> = Vec::new();
    let mut constant = 0.0f64;
    let mut argmax_r_star = grid[0];
    let mut argmax_ell: i64 = opts.ell_min as i64;
    for ell in opts.ell_min..=opts.ell_max {
        let mut ell_best = 0.0f64;
        let mut ell_arg = grid[0];
        for &rs in &grid {
            let p = g.point_at_rstar(rs);
            let num = form_matrix(&|u, ur, ut| {
                let jet = mode_to_jet(&ModeState { ell, u, ur, ut }, &p);
                numerator(&jet, &p, kind)
            });
            let den = form_matrix(&|u, ur, ut| {
                let jet = mode_to_jet(&ModeState { ell, u, ur, ut }, &p);
                denominator(&jet, &p, params, kind, aux_weight)
            });
            match max_generalized_ratio(&num, &den, active_coordinates(kind, ell)) {
                RatioOutcome::Bounded(r) => {
                    if r > ell_best {
                        ell_best = r;
                        ell_arg = rs;
                    }
                }
                RatioOutcome::Unbounded => {
                    return Err(ConstantError::UnboundedRatio { r_star: rs, ell });
                }
                RatioOutcome::NotPsd(eig) => {
                    return Err(match kind {
                        ConstantKind::Kernel => {
                            ConstantError::KernelNotPsd { r_star: rs, ell, eigenvalue: eig }
                        }
                        ConstantKind::KernelPlusAux => {
                            ConstantError::AugmentedNotPsd { r_star: rs, ell, eigenvalue: eig }
                        }
                    });
                }
            }
        }
        per_ell.push(EllExtremum { ell: ell as i64, ratio: ell_best, r_star: ell_arg });
        if ell_best > constant {
            constant = ell_best;
            argmax_r_star = ell_arg;
            argmax_ell = ell as i64;
        }
    }

    // Large-index limit form.
    {
        let mut lim_best = 0.0f64;
        let mut lim_arg = grid[0];
        for &rs in &grid {
            let p = g.point_at_rstar(rs);
            let r = limit_ratio(&p, params, g);
            if r > lim_best {
                lim_best = r;
                lim_arg = rs;
            }
        }
        per_ell.push(EllExtremum { ell: -1, ratio: lim_best, r_star: lim_arg });
        if lim_best > constant {
            constant = lim_best;
            argmax_r_star = lim_arg;
            argmax_ell = -1;
        }
    }

    // Post-hoc validation on random unit mode states.
    let mut rng = SplitMix64::new(opts.seed ^ 0xbe57_c0de);
    let mut validation_min = f64::INFINITY;
    for _ in 0..opts.validation_samples {
        let rs = rng.uniform(opts.r_star_min, opts.r_star_max);
        let p = g.point_at_rstar(rs);
        let ell = opts.ell_min + rng.below((opts.ell_max - opts.ell_min) as u64 + 1) as u32;
        let mut state = ModeState {
            ell,
            u: rng.uniform(-1.0, 1.0),
            ur: rng.uniform(-1.0, 1.0),
            ut: rng.uniform(-1.0, 1.0),
        };
        let norm = fmath::sqrt(state.u * state.u + state.ur * state.ur + state.ut * state.ut);
        if norm == 0.0 {
            continue;
        }
        state.u /= norm;
        state.ur /= norm;
        state.ut /= norm;
        let jet = mode_to_jet(&state, &p);
        let num = numerator(&jet, &p, kind);
        let den = denominator(&jet, &p, params, kind, aux_weight);
        let slack = constant * den - num;
        let scaled = slack / (1.0 + constant * fmath::abs(den) + fmath::abs(num));
        if scaled < validation_min {
            validation_min = scaled;
        }
    }

    Ok(BestConstantReport {
        kind: String::from(kind.name()),
        mass: g.mass(),
        alpha: params.alpha(),
        c_star: params.c_star(),
        aux_weight,
        constant,
        argmax_r_star,
        argmax_ell,
        exceeds_1e6: constant > 1.0e6,
        grid: format!(
            "r* in [{}, {}], {} base points with photon-sphere cluster, modes {}..={} plus limit",
            opts.r_star_min, opts.r_star_max, opts.base_points, opts.ell_min, opts.ell_max
        ),
        per_ell,
        validation_min,
        validation_samples: opts.validation_samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jacobi_recovers_known_spectrum() {
        let (d, v) = jacobi3([[2.0, 1.0, 0.0], [1.0, 2.0, 0.0], [0.0, 0.0, 5.0]]);
        let mut eigs = [d[0], d[1], d[2]];
        eigs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((eigs[0] - 1.0).abs() < 1e-12);
        assert!((eigs[1] - 3.0).abs() < 1e-12);
        assert!((eigs[2] - 5.0).abs() < 1e-12);
        // Columns are orthonormal.
        for i in 0..3 {
            for j in 0..3 {
                let dot: f64 = (0..3).map(|k| v[k][i] * v[k][j]).sum();
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((dot - expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn polarization_matrix_is_symmetric_and_exact() {
        // q(v) = v' M v for a known symmetric M must be recovered entry by
        // entry, including the mixed terms in the third row and column.
        let m = [[2.0, -1.0, 0.5], [-1.0, 4.0, 1.5], [0.5, 1.5, 3.0]];
        let q = |u: f64, ur: f64, ut: f64| {
            let v = [u, ur, ut];
            let mut total = 0.0;
            for i in 0..3 {
                for j in 0..3 {
                    total += v[i] * m[i][j] * v[j];
                }
            }
            total
        };
        let rebuilt = form_matrix(&q);
        for i in 0..3 {
            for j in 0..3 {
                assert!(
                    (rebuilt[i][j] - m[i][j]).abs() < 1e-14,
                    "entry ({i},{j}): {} vs {}",
                    rebuilt[i][j],
                    m[i][j]
                );
            }
        }
    }

    #[test]
    fn golden_section_finds_parabola_vertex() {
        let f = |x: f64| (x - 1.3) * (x - 1.3) + 0.7;
        let (x, v) = golden_min(&f, 0.0, 3.0);
        assert!((x - 1.3).abs() < 1e-7);
        assert!((v - 0.7).abs() < 1e-13);
    }

    #[test]
    fn generalized_ratio_handles_null_directions() {
        // The third coordinate is structurally null; A vanishes there, so
        // the ratio is finite and equals the largest diagonal quotient on
        // the active block.
        let a = [[3.0, 0.0, 0.0], [0.0, 8.0, 0.0], [0.0, 0.0, 0.0]];
        let b = [[1.0, 0.0, 0.0], [0.0, 2.0, 0.0], [0.0, 0.0, 0.0]];
        match max_generalized_ratio(&a, &b, &[0, 1]) {
            RatioOutcome::Bounded(r) => assert!((r - 4.0).abs() < 1e-12, "{r}"),
            _ => panic!("expected bounded ratio"),
        }
        // Give A support on the null coordinate: unbounded.
        let a2 = [[3.0, 0.0, 0.0], [0.0, 8.0, 0.0], [0.0, 0.0, 1.0]];
        assert!(matches!(max_generalized_ratio(&a2, &b, &[0, 1]), RatioOutcome::Unbounded));
        // Indefinite B reported as such.
        let b2 = [[1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, 1.0]];
        assert!(matches!(
            max_generalized_ratio(&a, &b2, &[0, 1, 2]),
            RatioOutcome::NotPsd(_)
        ));
        // Wildly different diagonal scales with a genuinely tiny entry do
        // not read as null: the mixed quotient survives equilibration.
        let a3 = [[0.25, 0.0, 0.0], [0.0, 0.5, 0.0], [0.0, 0.0, 0.25]];
        let b3 = [[5.0e6, 2.6e8, 0.0], [2.6e8, 1.9e10, 0.0], [0.0, 0.0, 1.25e-4]];
        match max_generalized_ratio(&a3, &b3, &[0, 1, 2]) {
            RatioOutcome::Bounded(r) => {
                assert!((r - 2000.0).abs() < 1e-9 * 2000.0, "{r}");
            }
            _ => panic!("expected bounded ratio"),
        }
    }

    #[test]
    fn limit_ratio_is_continuous_through_the_photon_sphere() {
        let g = Geometry::new(1.0).unwrap();
        let params = MultiplierParams::new(10.0, &g).unwrap();
        let at_zero = limit_ratio(&g.point_at_rstar(0.0), &params, &g);
        let nearby = limit_ratio(&g.point_at_rstar(1e-3), &params, &g);
        assert!((at_zero - nearby).abs() < 1e-4 * at_zero, "{at_zero} vs {nearby}");
        let x0 = params.x_offset();
        let expected = (params.alpha() * params.alpha() + x0 * x0) / 9.0;
        assert!((at_zero - expected).abs() < 1e-12 * expected);
    }

    #[test]
    fn log_grid_covers_range() {
        let grid = log_spaced(10.0, 1e5, 21);
        assert_eq!(grid.len(), 21);
        assert!((grid[0] - 10.0).abs() < 1e-12);
        assert!((grid[20] - 1e5).abs() < 1e-7);
        assert!(grid.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn lowest_mode_ratio_is_exact() {
        let g = Geometry::new(1.0).unwrap();
        let params = MultiplierParams::new(10.0, &g).unwrap();
        let opts = ConstantOptions {
            base_points: 40,
            ell_max: 1,
            validation_samples: 200,
            ..ConstantOptions::default()
        };
        let report = best_constant(&g, &params, ConstantKind::Kernel, &opts).unwrap();
        let expected = params.alpha() * params.alpha() / (2.0 * params.c_star());
        let ell0 = &report.per_ell[0];
        assert_eq!(ell0.ell, 0);
        assert!(
            (ell0.ratio - expected).abs() <= 1e-10 * expected,
            "{} vs {expected}",
            ell0.ratio
        );
    }
}
