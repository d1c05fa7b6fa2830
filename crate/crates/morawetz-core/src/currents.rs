//! Sphere-integrated currents: divergence kernels, boundary flux components,
//! the certified pointwise lower bound, and the controlled-quantity density.
//!
//! Everything here consumes a [`SphereJet`], the collection of unit-sphere
//! integrals of quadratic first-jet monomials of the field. The `a` moments
//! are integrals of products of `phi` and its `t`/`r*` derivatives; the `b`
//! moments are the corresponding integrals with one extra angular gradient
//! (for a single spherical-harmonic mode they are the `a` moments scaled by
//! `l(l+1)`). All kernel and flux functions return quantities already
//! integrated over the sphere and weighted by `r^2`; the remaining measure
//! factor `(1 - mu) dt dr*` is applied by the spacetime accounting.
//!
//! Derivatives written into coefficient formulas are with respect to `r*`.

use crate::fmath;
use crate::geometry::{MultiplierParams, RadialPoint};
use crate::multipliers::{f_a, f_b, MultiplierEval};

/// Unit-sphere integrals of the quadratic first-jet monomials.
///
/// Field names: `a`/`b` selects plain field or angular-gradient moments,
/// then the derivative pair (`00` none, `rr` two `r*`, `tt` two `t`,
/// `cross` one `r*` and none, `tr` one `t` one `r*`, `t0` one `t` none).
/// `aang` is the integral of the squared angular gradient (metric scaling
/// `1/r^2` included), `aang2` of the squared second angular covariant
/// derivative, `bang` of the squared angular gradient of the angular
/// gradient components.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SphereJet {
    pub a00: f64,
    pub arr: f64,
    pub att: f64,
    pub across: f64,
    pub atr: f64,
    pub at0: f64,
    pub aang: f64,
    pub aang2: f64,
    pub b00: f64,
    pub brr: f64,
    pub btt: f64,
    pub bcross: f64,
    pub btr: f64,
    pub bt0: f64,
    pub bang: f64,
}

impl SphereJet {
    /// Reinterpret the angular-gradient moments as a plain jet, so any
    /// kernel can be applied to the angular-derivative components of the
    /// field. Moments that would need two extra angular derivatives are not
    /// tracked and come back as zero.
    pub fn angular_view(&self) -> SphereJet {
        SphereJet {
            a00: self.b00,
            arr: self.brr,
            att: self.btt,
            across: self.bcross,
            atr: self.btr,
            at0: self.bt0,
            aang: self.bang,
            aang2: 0.0,
            ..SphereJet::default()
        }
    }
}

/// One spherical-harmonic mode of the field at a point: the coefficient `u`
/// of the unit-normalized harmonic and its `r*` and `t` derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeState {
    pub ell: u32,
    pub u: f64,
    pub ur: f64,
    pub ut: f64,
}

/// Moments of a single mode. Orthonormality collapses the sphere integrals
/// to products of the coefficients, with angular factors `l(l+1)` for one
/// extra gradient and `l(l+1)(l(l+1) - 1)` for the squared second
/// derivative.
pub fn mode_to_jet(mode: &ModeState, p: &RadialPoint) -> SphereJet {
    let lam = (mode.ell as f64) * (mode.ell as f64 + 1.0);
    let r2 = p.r * p.r;
    let (u, ur, ut) = (mode.u, mode.ur, mode.ut);
    // b moments are lam times the a moments; multiplying the finished a
    // moments keeps that proportionality exact in floating point.
    let a00 = u * u;
    let arr = ur * ur;
    let att = ut * ut;
    let across = u * ur;
    let atr = ur * ut;
    let at0 = u * ut;
    let b00 = lam * a00;
    let aang = b00 / r2;
    SphereJet {
        a00,
        arr,
        att,
        across,
        atr,
        at0,
        aang,
        aang2: (lam - 1.0) * b00 / (r2 * r2),
        b00,
        brr: lam * arr,
        btt: lam * att,
        bcross: lam * across,
        btr: lam * atr,
        bt0: lam * at0,
        bang: lam * aang,
    }
}

/// Divergence kernel of the plain momentum current with radial profile
/// `eval`: the profile times the radial translation vector, with no
/// zeroth-order modifier.
pub fn kv0_sphere(jet: &SphereJet, p: &RadialPoint, eval: &MultiplierEval) -> f64 {
    let r2 = p.r * p.r;
    let lapse = p.one_minus_mu;
    let trace = 2.0 * eval.f1 + 4.0 * p.w() * eval.f;
    r2 * (eval.f1 * jet.arr / lapse + eval.f * p.photon_factor() * jet.aang
        - 0.25 * trace * ((jet.arr - jet.att) / lapse + jet.aang))
}

/// Divergence kernel of the current with the trace part absorbed into a
/// zeroth-order term: squares of `t` derivatives drop out and a potential
/// built from three profile derivatives multiplies the square of the field.
pub fn kv1_sphere(jet: &SphereJet, p: &RadialPoint, eval: &MultiplierEval) -> f64 {
    let r2 = p.r * p.r;
    let r = p.r;
    let lapse = p.one_minus_mu;
    let mu_p = p.mu_prime();
    let q = eval.f3 / lapse + 4.0 * eval.f2 / r - 4.0 * mu_p * eval.f1 / (r * lapse)
        + 2.0 / (lapse * r) * (mu_p * lapse / r - p.mu_second()) * eval.f;
    r2 * (eval.f1 * jet.arr / lapse + eval.f * p.photon_factor() * jet.aang - 0.25 * q * jet.a00)
}

/// Divergence kernel of the arctangent current with the radial square
/// completed by `beta` times the field. Specific to the arctangent profile:
/// the zeroth-order potential collapses to the closed-form coefficient
/// [`crate::multipliers::big_f`] plus a curvature correction.
pub fn kv2_sphere(jet: &SphereJet, p: &RadialPoint, params: &MultiplierParams) -> f64 {
    let eval = f_b(p, params);
    let alpha = params.alpha();
    let x = params.x(p);
    let beta = params.beta(p);
    let d = alpha * alpha + x * x;
    let r = p.r;
    let r2 = r * r;
    let lapse = p.one_minus_mu;
    let square = jet.arr + 2.0 * beta * jet.across + beta * beta * jet.a00;
    let potential = eval.f3 + 4.0 * eval.f2 * x / d + 4.0 * alpha * alpha * eval.f1 / (d * d);
    r2 * (eval.f1 * square / lapse + eval.f * p.photon_factor() * jet.aang
        - 0.25 * potential * jet.a00 / lapse
        - p.mu * eval.f * (4.0 * p.mu - 3.0) / (2.0 * r2 * r) * jet.a00)
}

/// The certified combined kernel: the inverse-square current applied to the
/// field plus the completed-square arctangent current applied to its angular
/// derivatives.
pub fn k_combined_sphere(jet: &SphereJet, p: &RadialPoint, params: &MultiplierParams) -> f64 {
    kv0_sphere(jet, p, &f_a(p, params)) + kv2_sphere(&jet.angular_view(), p, params)
}

/// The summands of [`k_combined_sphere`], separated by role.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CombinedBreakdown {
    /// `r^2 f1_a (d_{r*} phi)^2 / (1 - mu)`: manifestly nonnegative.
    pub monotone_square: f64,
    /// `r^2 f1_b ((d_{r*} + beta) grad phi)^2 / (1 - mu)`: manifestly nonnegative.
    pub completed_square: f64,
    /// Photon-sphere angular terms from both currents.
    pub angular: f64,
    /// Zeroth-order terms multiplying the squared angular gradient moments.
    pub zeroth_order: f64,
    /// The trace combination of the inverse-square profile, identically zero
    /// in exact arithmetic; kept visible as a floating-point residual.
    pub trace_residual: f64,
    pub total: f64,
}

pub fn combined_breakdown(
    jet: &SphereJet,
    p: &RadialPoint,
    params: &MultiplierParams,
) -> CombinedBreakdown {
    let a_eval = f_a(p, params);
    let b_eval = f_b(p, params);
    let alpha = params.alpha();
    let x = params.x(p);
    let beta = params.beta(p);
    let d = alpha * alpha + x * x;
    let r = p.r;
    let r2 = r * r;
    let lapse = p.one_minus_mu;
    let p3 = p.photon_factor();

    let monotone_square = r2 * a_eval.f1 * jet.arr / lapse;
    let square = jet.brr + 2.0 * beta * jet.bcross + beta * beta * jet.b00;
    let completed_square = r2 * b_eval.f1 * square / lapse;
    let angular = r2 * (a_eval.f * p3 * jet.aang + b_eval.f * p3 * jet.bang);
    let potential = b_eval.f3 + 4.0 * b_eval.f2 * x / d + 4.0 * alpha * alpha * b_eval.f1 / (d * d);
    let zeroth_order = r2
        * (-0.25 * potential / lapse - p.mu * b_eval.f * (4.0 * p.mu - 3.0) / (2.0 * r2 * r))
        * jet.b00;
    let trace = 2.0 * a_eval.f1 + 4.0 * p.w() * a_eval.f;
    let trace_residual = -0.25 * r2 * trace * ((jet.arr - jet.att) / lapse + jet.aang);
    CombinedBreakdown {
        monotone_square,
        completed_square,
        angular,
        zeroth_order,
        trace_residual,
        total: monotone_square + completed_square + angular + zeroth_order + trace_residual,
    }
}

/// Pointwise lower bound for the combined kernel: the two manifest squares
/// are dropped and nothing else. Equal to the sum of the `angular` and
/// `zeroth_order` parts of [`CombinedBreakdown`] up to rounding, written in
/// the closed form the certification scans.
pub fn lower_bound_sphere(jet: &SphereJet, p: &RadialPoint, params: &MultiplierParams) -> f64 {
    let a_eval = f_a(p, params);
    let b_eval = f_b(p, params);
    let r = p.r;
    let r2 = r * r;
    let p3 = p.photon_factor();
    let zeroth =
        crate::multipliers::big_f(p, params) * r2 + b_eval.f * p.mu * (3.0 - 4.0 * p.mu) / (2.0 * r);
    r2 * b_eval.f * p3 * jet.bang + zeroth * jet.b00 + a_eval.f * p3 * jet.b00
}

/// The steep auxiliary profile `-weight / r^3` with its `r*`-derivatives.
/// Its kernel picks up squares of `t` derivatives near infinity at the
/// price of a bounded angular deficit, which the combined kernel absorbs
/// for small `weight`.
pub fn aux_profile(p: &RadialPoint, weight: f64) -> MultiplierEval {
    let r = p.r;
    let lapse = p.one_minus_mu;
    let mu = p.mu;
    let r3 = r * r * r;
    let r4 = r3 * r;
    MultiplierEval {
        f: -weight / r3,
        f1: 3.0 * weight * lapse / r4,
        f2: 3.0 * weight * lapse * (5.0 * mu - 4.0) / (r4 * r),
        f3: 3.0 * weight * lapse * (35.0 * mu * mu - 54.0 * mu + 20.0) / (r4 * r * r),
    }
}

/// Divergence kernel of the auxiliary current.
pub fn k_aux_sphere(jet: &SphereJet, p: &RadialPoint, weight: f64) -> f64 {
    kv0_sphere(jet, p, &aux_profile(p, weight))
}

/// Density of the quantity the combined kernel controls pointwise up to a
/// mass-dependent constant: a weighted radial derivative square, the
/// photon-sphere-degenerate second angular derivative square, and a
/// tortoise-decaying angular gradient square.
pub fn controlled_sphere(jet: &SphereJet, p: &RadialPoint) -> f64 {
    let r = p.r;
    let r2 = r * r;
    let r3 = r2 * r;
    let p3 = p.photon_factor();
    let decay = {
        let s = fmath::abs(p.r_star) + 1.0;
        s * s * s * s
    };
    r2 * (jet.arr / r3
        + p3 * p3 * r3 * jet.aang2
        + r3 / (p.one_minus_mu * decay) * jet.aang)
}

/// [`controlled_sphere`] plus the square of the `t` derivative with weight
/// `1/r^4`, the extra term the auxiliary current buys.
pub fn controlled_aux_sphere(jet: &SphereJet, p: &RadialPoint) -> f64 {
    controlled_sphere(jet, p) + jet.att / (p.r * p.r)
}

/// Which current a flux is taken from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CurrentKind {
    /// The certified combined current (inverse-square on the field plus
    /// completed-square arctangent on its angular derivatives).
    Combined,
    /// The steep auxiliary current with the given profile weight.
    Aux { weight: f64 },
    /// The stress-energy contraction with the stationary Killing field.
    TimeEnergy,
}

/// Sphere-integrated flux components of a current: `jt` is the integral of
/// the lowered `t` component times `r^2`, `jr` of the lowered `r*`
/// component. The coordinate divergence identity is
/// `-d jt/dt + d jr/dr* = (1 - mu) k_sphere` on solutions.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FluxPair {
    pub jt: f64,
    pub jr: f64,
}

fn flux_plain(jet: &SphereJet, p: &RadialPoint, eval: &MultiplierEval) -> FluxPair {
    let r2 = p.r * p.r;
    FluxPair {
        jt: r2 * eval.f * jet.atr,
        jr: r2 * eval.f * (0.5 * (jet.arr + jet.att) - 0.5 * p.one_minus_mu * jet.aang),
    }
}

fn flux_completed(
    jet: &SphereJet,
    p: &RadialPoint,
    params: &MultiplierParams,
    eval: &MultiplierEval,
) -> FluxPair {
    let r2 = p.r * p.r;
    let w = p.w();
    let h = eval.f1 + 2.0 * w * eval.f;
    let h_prime = eval.f2 + 2.0 * p.w_prime() * eval.f + 2.0 * w * eval.f1;
    let base = flux_plain(jet, p, eval);
    let beta = params.beta(p);
    FluxPair {
        jt: base.jt + r2 * 0.5 * h * jet.at0,
        // The completion shift must carry the full `f1 beta` weight: its
        // radial derivative produces the cross term of the completed square
        // in the kernel, which fixes both sign and size.
        jr: base.jr + r2 * (0.5 * h * jet.across - 0.25 * h_prime * jet.a00)
            + r2 * eval.f1 * beta * jet.a00,
    }
}

pub fn flux_components(
    jet: &SphereJet,
    p: &RadialPoint,
    params: &MultiplierParams,
    kind: CurrentKind,
) -> FluxPair {
    match kind {
        CurrentKind::Combined => {
            let plain = flux_plain(jet, p, &f_a(p, params));
            let view = jet.angular_view();
            let completed = flux_completed(&view, p, params, &f_b(p, params));
            FluxPair {
                jt: plain.jt + completed.jt,
                jr: plain.jr + completed.jr,
            }
        }
        CurrentKind::Aux { weight } => flux_plain(jet, p, &aux_profile(p, weight)),
        CurrentKind::TimeEnergy => {
            let r2 = p.r * p.r;
            FluxPair {
                jt: r2 * (0.5 * (jet.att + jet.arr) + 0.5 * p.one_minus_mu * jet.aang),
                jr: r2 * jet.atr,
            }
        }
    }
}
