//! The two radial multiplier profiles and the scalar functions built from
//! them: the inverse-square profile `f_a`, the arctangent profile `f_b`, the
//! zeroth-order coefficient `big_f`, and the photon-sphere bookkeeping
//! function `h` whose positivity drives the certification.
//!
//! Every profile is evaluated together with its first three derivatives in
//! `r*`. Two floating-point invariants are arranged structurally rather than
//! hoped for:
//!
//! * `f_b` vanishes bit-exactly at `r* = 0` because the stored reference
//!   angle is produced by the same expression tree the running term uses
//!   there (see [`crate::geometry::MultiplierParams`]).
//! * `dh_dr` vanishes bit-exactly at `r = 3M` (for masses where `3M` is the
//!   rounded sum `m + 2m`) because the constant it subtracts is the value of
//!   the same helper that produces its leading term, and [`choose_cstar`] is
//!   defined through that helper.

use crate::fmath;
use crate::geometry::{Geometry, MultiplierParams, RadialPoint};

/// A multiplier value with its first three `r*`-derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MultiplierEval {
    pub f: f64,
    pub f1: f64,
    pub f2: f64,
    pub f3: f64,
}

/// `f_a = -C_* / (alpha^2 r^2)` and its `r*`-derivatives.
///
/// The combination `2 f1 + (4 (1 - mu)/r) f` vanishes identically for this
/// profile, which is what removes the trace term from its divergence kernel.
/// In floating point the cancellation is only near-exact (order 1e-16
/// relative); consumers multiply it by coefficients that carry their own
/// `1 - mu` factor, so no near-horizon amplification occurs.
pub fn f_a(p: &RadialPoint, params: &MultiplierParams) -> MultiplierEval {
    let r = p.r;
    let lapse = p.one_minus_mu;
    let mu = p.mu;
    let scale = params.c_star() / (params.alpha() * params.alpha());
    let r2 = r * r;
    let r3 = r2 * r;
    let r4 = r3 * r;
    let r5 = r4 * r;
    MultiplierEval {
        f: -scale / r2,
        f1: 2.0 * scale * lapse / r3,
        f2: 2.0 * scale * lapse * (4.0 * mu - 3.0) / r4,
        f3: 2.0 * scale * lapse * (24.0 * mu * mu - 35.0 * mu + 12.0) / r5,
    }
}

/// `f_b = (1/alpha)(atan(x/alpha) - atan(x(0)/alpha))` and its
/// `r*`-derivatives, which are rational in `x`.
pub fn f_b(p: &RadialPoint, params: &MultiplierParams) -> MultiplierEval {
    let alpha = params.alpha();
    let x = params.x(p);
    let d = alpha * alpha + x * x;
    MultiplierEval {
        f: (fmath::atan(x / alpha) - params.ref_angle()) / alpha,
        f1: 1.0 / d,
        f2: -2.0 * x / (d * d),
        f3: (6.0 * x * x - 2.0 * alpha * alpha) / (d * d * d),
    }
}

/// Zeroth-order coefficient `F = (x^2 - alpha^2) / (2 (1 - mu) (alpha^2 + x^2)^3)`.
///
/// Negative strictly inside `|x| < alpha`, positive outside; this is the
/// term the photon-sphere analysis has to absorb.
pub fn big_f(p: &RadialPoint, params: &MultiplierParams) -> f64 {
    let alpha = params.alpha();
    let x = params.x(p);
    let d = alpha * alpha + x * x;
    (x * x - alpha * alpha) / (2.0 * p.one_minus_mu * d * d * d)
}

/// The `f_b`-variation part of `dH/dr`: `M f1_b (3r^2 - 8Mr) / (1 - mu)`.
///
/// Both [`choose_cstar`] and [`dh_dr`] are defined through this single
/// helper so that their photon-sphere cancellation is a subtraction of
/// identical bits, not of two independently rounded values.
fn h_slope_fb_term(r: f64, alpha: f64, x_offset: f64, g: &Geometry) -> f64 {
    let m = g.mass();
    let r_star = g
        .rstar_of_r(r)
        .expect("h-function helpers require an exterior radius");
    let x = r_star - x_offset;
    let f1 = 1.0 / (alpha * alpha + x * x);
    m * f1 * (3.0 * r * r - 8.0 * m * r) / g.one_minus_mu(r)
}

/// The constant `C_* = 9 alpha^2 M^3 / (2 ((alpha + sqrt(alpha))^2 + alpha^2))`,
/// chosen so that `dh_dr` has a critical point exactly at `r = 3M`.
///
/// Computed through [`h_slope_fb_term`] at `3M` rather than from the closed
/// form, for the bit-exactness noted in the module docs.
pub fn choose_cstar(alpha: f64, g: &Geometry) -> f64 {
    let x_offset = alpha + fmath::sqrt(alpha);
    let m = g.mass();
    alpha * alpha * h_slope_fb_term(3.0 * m, alpha, x_offset, g) / 2.0
}

/// `H(r) = M f_b (3r^2 - 8Mr) - 2 C_* (r - 3M) / alpha^2`.
///
/// Vanishes together with its first `r`-derivative at the photon sphere and
/// must be positive everywhere else in the exterior; the certification scans
/// enforce that.
pub fn h_of_r(r: f64, params: &MultiplierParams, g: &Geometry) -> f64 {
    let m = g.mass();
    let p = g
        .point_at_r(r)
        .expect("h-function helpers require an exterior radius");
    let fb = f_b(&p, params).f;
    let alpha = params.alpha();
    m * fb * (3.0 * r * r - 8.0 * m * r) - 2.0 * params.c_star() * (r - 3.0 * m) / (alpha * alpha)
}

/// `dH/dr`, assembled so the value at `r = 3M` is an exact zero.
pub fn dh_dr(r: f64, params: &MultiplierParams, g: &Geometry) -> f64 {
    let m = g.mass();
    let alpha = params.alpha();
    let x_offset = params.x_offset();
    let p = g
        .point_at_r(r)
        .expect("h-function helpers require an exterior radius");
    let fb = f_b(&p, params).f;
    let slope = h_slope_fb_term(r, alpha, x_offset, g);
    let at_photon = h_slope_fb_term(3.0 * m, alpha, x_offset, g);
    slope + 2.0 * m * fb * (3.0 * r - 4.0 * m) - at_photon
}

/// The three contributions to `d^2H/dr^2`, kept separate because the
/// certification reports their scales against powers of `alpha`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvatureParts {
    /// `M f2_b (3r^2 - 8Mr) / (1 - mu)^2`
    pub f2_term: f64,
    /// `4 M f1_b (3r - 4M)/(1 - mu) - 2 M^2 f1_b (3r^2 - 8Mr)/(r^2 (1 - mu)^2)`
    pub f1_term: f64,
    /// `6 M f_b`
    pub fb_term: f64,
}

pub fn d2h_dr2_parts(r: f64, params: &MultiplierParams, g: &Geometry) -> CurvatureParts {
    let m = g.mass();
    let p = g
        .point_at_r(r)
        .expect("h-function helpers require an exterior radius");
    let eval = f_b(&p, params);
    let lapse = p.one_minus_mu;
    let quad = 3.0 * r * r - 8.0 * m * r;
    CurvatureParts {
        f2_term: m * eval.f2 * quad / (lapse * lapse),
        f1_term: 4.0 * m * eval.f1 * (3.0 * r - 4.0 * m) / lapse
            - 2.0 * m * m * eval.f1 * quad / (r * r * lapse * lapse),
        fb_term: 6.0 * m * eval.f,
    }
}

pub fn d2h_dr2(r: f64, params: &MultiplierParams, g: &Geometry) -> f64 {
    let parts = d2h_dr2_parts(r, params, g);
    parts.f2_term + parts.f1_term + parts.fb_term
}

/// The scanned lower-bound coefficient
/// `S(r) = 2 f_b (r - 3M) r^2 + H + F r^6`.
///
/// Its nonnegativity on the whole exterior is one of the gating checks.
pub fn s2_coefficient(p: &RadialPoint, params: &MultiplierParams, g: &Geometry) -> f64 {
    let m = g.mass();
    let r = p.r;
    let fb = f_b(p, params).f;
    let r2 = r * r;
    2.0 * fb * (r - 3.0 * m) * r2 + h_of_r(r, params, g) + big_f(p, params) * r2 * r2 * r2
}

/// The coefficient the assembled zeroth-order bound actually carries:
/// [`s2_coefficient`] shifted by `C_* (r - 3M) / alpha^2`. Reported as a
/// diagnostic; it can dip below the scanned coefficient inside the photon
/// sphere.
pub fn s_tilde_coefficient(p: &RadialPoint, params: &MultiplierParams, g: &Geometry) -> f64 {
    let alpha = params.alpha();
    s2_coefficient(p, params, g) + params.c_star() * (p.r - 3.0 * g.mass()) / (alpha * alpha)
}

/// Exact mid-range margin `2 f_b (r - 3M)/r^4 + F`, the quantity that must
/// stay nonnegative for `|x| <= alpha`, where `F < 0`.
pub fn midrange_margin(p: &RadialPoint, params: &MultiplierParams, g: &Geometry) -> f64 {
    let m = g.mass();
    let r = p.r;
    let r4 = r * r * r * r;
    2.0 * f_b(p, params).f * (r - 3.0 * m) / r4 + big_f(p, params)
}

/// The pure-`x` ratio `(alpha - x)(x + alpha + sqrt(alpha))^3 / (4 (x^2 + alpha^2)^2)`
/// that dominates `|F| r^4 / (2 f_b (r - 3M))` on the mid-range. The
/// certification requires its maximum over `[-alpha, alpha]` to stay below
/// `9/10`, with sharper caps on each half.
pub fn ratio_function(x: f64, alpha: f64) -> f64 {
    let shifted = x + alpha + fmath::sqrt(alpha);
    let d = x * x + alpha * alpha;
    (alpha - x) * shifted * shifted * shifted / (4.0 * d * d)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup(alpha: f64) -> (Geometry, MultiplierParams) {
        let g = Geometry::new(1.0).unwrap();
        let params = MultiplierParams::new(alpha, &g).unwrap();
        (g, params)
    }

    #[test]
    fn cstar_matches_closed_form() {
        let g = Geometry::new(1.0).unwrap();
        for &alpha in &[1.0f64, 4.0, 10.0, 100.0] {
            let x_off = alpha + alpha.sqrt();
            let expected = 9.0 * alpha * alpha / (2.0 * (x_off * x_off + alpha * alpha));
            let got = choose_cstar(alpha, &g);
            assert!(
                (got - expected).abs() <= 1e-14 * expected,
                "alpha = {alpha}: {got} vs {expected}"
            );
        }
        assert!((choose_cstar(1.0, &g) - 0.9).abs() <= 1e-14);
    }

    #[test]
    fn cstar_scales_with_mass_cubed() {
        let g1 = Geometry::new(1.0).unwrap();
        let g2 = Geometry::new(2.0).unwrap();
        let ratio = choose_cstar(10.0, &g2) / choose_cstar(10.0, &g1);
        assert!((ratio - 8.0).abs() <= 1e-12 * 8.0);
    }

    #[test]
    fn f_a_trace_combination_cancels() {
        let (g, params) = setup(10.0);
        for &rs in &[-25.0, -3.0, 0.0, 4.0, 40.0, 1e4] {
            let p = g.point_at_rstar(rs);
            let eval = f_a(&p, &params);
            let lhs = 2.0 * eval.f1 + 4.0 * p.w() * eval.f;
            let scale = 2.0 * eval.f1.abs() + (4.0 * p.w() * eval.f).abs();
            assert!(lhs.abs() <= 1e-13 * scale.max(1e-300), "r* = {rs}: residual {lhs}");
        }
    }

    #[test]
    fn f_a_derivative_chain_is_consistent() {
        let (g, params) = setup(4.0);
        let h = 1e-3;
        for &rs in &[-2.0, 1.0, 9.0, 120.0] {
            let at = |s: f64| f_a(&g.point_at_rstar(s), &params);
            let mid = at(rs);
            let plus = at(rs + h);
            let minus = at(rs - h);
            let checks = [
                ((plus.f - minus.f) / (2.0 * h), mid.f1),
                ((plus.f1 - minus.f1) / (2.0 * h), mid.f2),
                ((plus.f2 - minus.f2) / (2.0 * h), mid.f3),
            ];
            for (fd, exact) in checks {
                assert!(
                    (fd - exact).abs() <= 1e-4 * exact.abs().max(1e-10),
                    "r* = {rs}: fd {fd} vs {exact}"
                );
            }
        }
    }

    #[test]
    fn f_b_vanishes_exactly_at_photon_sphere() {
        for &alpha in &[1.0, 10.0, 33.7] {
            let (g, params) = setup(alpha);
            let p = g.point_at_r(3.0).unwrap();
            assert_eq!(f_b(&p, &params).f, 0.0, "alpha = {alpha}");
        }
    }

    #[test]
    fn f_b_derivative_chain_is_consistent() {
        let (g, params) = setup(10.0);
        let h = 1e-3;
        for &rs in &[-40.0, -1.0, 13.0, 90.0] {
            let at = |s: f64| f_b(&g.point_at_rstar(s), &params);
            let mid = at(rs);
            let plus = at(rs + h);
            let minus = at(rs - h);
            let checks = [
                ((plus.f - minus.f) / (2.0 * h), mid.f1),
                ((plus.f1 - minus.f1) / (2.0 * h), mid.f2),
                ((plus.f2 - minus.f2) / (2.0 * h), mid.f3),
            ];
            for (fd, exact) in checks {
                assert!(
                    (fd - exact).abs() <= 1e-4 * exact.abs().max(1e-10),
                    "r* = {rs}: fd {fd} vs {exact}"
                );
            }
        }
    }

    #[test]
    fn f_b_is_increasing_and_bounded() {
        let (g, params) = setup(10.0);
        let far = f_b(&g.point_at_rstar(1e9), &params).f;
        let cap = (core::f64::consts::FRAC_PI_2 - params.ref_angle()) / 10.0;
        assert!(far > 0.0 && far < cap);
        assert!((far - cap).abs() < 1e-7);
        let mut prev = f_b(&g.point_at_rstar(-60.0), &params).f;
        assert!(prev < 0.0);
        for i in 1..200 {
            let rs = -60.0 + i as f64;
            let v = f_b(&g.point_at_rstar(rs), &params).f;
            assert!(v > prev);
            prev = v;
        }
    }

    #[test]
    fn big_f_changes_sign_at_corridor_edges() {
        let (g, params) = setup(10.0);
        let inside = g.point_at_rstar(params.x_offset());
        assert!(big_f(&inside, &params) < 0.0);
        let near_edge_in = g.point_at_rstar(params.x_offset() + 9.9);
        assert!(big_f(&near_edge_in, &params) < 0.0);
        let outside = g.point_at_rstar(params.x_offset() + 10.1);
        assert!(big_f(&outside, &params) > 0.0);
        let left_outside = g.point_at_rstar(params.x_offset() - 10.1);
        assert!(big_f(&left_outside, &params) > 0.0);
    }

    #[test]
    fn big_f_matches_zeroth_order_combination() {
        // -(1/4)(f3 + 4 f2 x/(alpha^2+x^2) + 4 alpha^2 f1/(alpha^2+x^2)^2)
        // divided by (1 - mu) collapses to F.
        let (g, params) = setup(10.0);
        for &rs in &[-20.0, -1.0, 6.5, 33.0] {
            let p = g.point_at_rstar(rs);
            let eval = f_b(&p, &params);
            let alpha = params.alpha();
            let x = params.x(&p);
            let d = alpha * alpha + x * x;
            let combo = eval.f3 + 4.0 * eval.f2 * x / d + 4.0 * alpha * alpha * eval.f1 / (d * d);
            let via_combo = -0.25 * combo / p.one_minus_mu;
            let direct = big_f(&p, &params);
            assert!(
                (via_combo - direct).abs() <= 1e-13 * direct.abs().max(1e-300),
                "r* = {rs}: {via_combo} vs {direct}"
            );
        }
    }

    #[test]
    fn h_and_slope_vanish_exactly_at_photon_sphere() {
        for &alpha in &[1.0, 10.0, 250.0] {
            let (g, params) = setup(alpha);
            assert_eq!(h_of_r(3.0, &params, &g), 0.0, "alpha = {alpha}");
            assert_eq!(dh_dr(3.0, &params, &g), 0.0, "alpha = {alpha}");
        }
    }

    #[test]
    fn h_is_positive_at_sample_radii() {
        let (g, params) = setup(10.0);
        for &r in &[2.1, 2.5, 2.9, 3.5, 5.0, 10.0, 100.0] {
            let h = h_of_r(r, &params, &g);
            assert!(h > 0.0, "H({r}) = {h}");
        }
    }

    #[test]
    fn dh_dr_matches_finite_difference_of_h() {
        let (g, params) = setup(10.0);
        for &r in &[2.4, 2.9, 3.0, 3.2, 7.0, 40.0] {
            let h = 1e-5 * r;
            let fd = (h_of_r(r + h, &params, &g) - h_of_r(r - h, &params, &g)) / (2.0 * h);
            let exact = dh_dr(r, &params, &g);
            // The floor covers the truncation term at the exact zero r = 3M.
            assert!(
                (fd - exact).abs() <= 1e-5 * exact.abs().max(1e-5),
                "r = {r}: fd {fd} vs {exact}"
            );
        }
    }

    #[test]
    fn d2h_dr2_matches_finite_difference_of_slope() {
        let (g, params) = setup(10.0);
        for &r in &[2.5, 3.0, 3.5, 9.0] {
            let h = 1e-5 * r;
            let fd = (dh_dr(r + h, &params, &g) - dh_dr(r - h, &params, &g)) / (2.0 * h);
            let exact = d2h_dr2(r, &params, &g);
            assert!(
                (fd - exact).abs() <= 1e-4 * exact.abs().max(1e-6),
                "r = {r}: fd {fd} vs {exact}"
            );
        }
    }

    #[test]
    fn curvature_is_positive_between_photon_sphere_and_far_anchor() {
        let (g, params) = setup(10.0);
        for i in 0..200 {
            let r = 8.0 / 3.0 + (10.0 - 8.0 / 3.0) * i as f64 / 199.0;
            let v = d2h_dr2(r, &params, &g);
            assert!(v > 0.0, "d2H({r}) = {v}");
        }
    }

    #[test]
    fn s_tilde_differs_from_scan_coefficient_by_linear_shift() {
        let (g, params) = setup(10.0);
        for &rs in &[-9.0, -0.4, 2.0, 28.0] {
            let p = g.point_at_rstar(rs);
            let shift = params.c_star() * (p.r - 3.0) / (params.alpha() * params.alpha());
            let lhs = s_tilde_coefficient(&p, &params, &g) - s2_coefficient(&p, &params, &g);
            assert!((lhs - shift).abs() <= 1e-12 * shift.abs().max(1e-12));
        }
    }

    #[test]
    fn scan_coefficient_is_positive_at_samples() {
        let (g, params) = setup(10.0);
        for &rs in &[-30.0, -5.0, -0.1, 0.1, 3.0, 13.2, 60.0, 900.0] {
            let p = g.point_at_rstar(rs);
            let s = s2_coefficient(&p, &params, &g);
            assert!(s > 0.0, "S({rs}) = {s}");
        }
    }

    #[test]
    fn midrange_margin_is_nonnegative_on_corridor_samples() {
        let (g, params) = setup(10.0);
        for i in 0..=100 {
            let x = -10.0 + 20.0 * i as f64 / 100.0;
            let p = g.point_at_rstar(params.x_offset() + x);
            let m = midrange_margin(&p, &params, &g);
            assert!(m >= 0.0, "margin({x}) = {m}");
        }
    }

    #[test]
    fn ratio_function_known_values() {
        // At x = -alpha the numerator factor collapses to alpha^(3/2) cubed.
        let alpha = 10.0f64;
        let at_left = ratio_function(-alpha, alpha);
        let expected = 2.0 * alpha * alpha.sqrt().powi(3) / (4.0 * (2.0 * alpha * alpha).powi(2));
        assert!((at_left - expected).abs() <= 1e-14 * expected);
        // The certified global cap for alpha = 10 sits near 0.645.
        let mut max = 0.0f64;
        for i in 0..=4000 {
            let x = -alpha + 2.0 * alpha * i as f64 / 4000.0;
            max = max.max(ratio_function(x, alpha));
        }
        assert!(max < 0.9, "max ratio {max}");
        assert!((max - 0.645).abs() < 0.02, "max ratio {max}");
    }
}
