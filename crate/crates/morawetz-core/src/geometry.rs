//! Schwarzschild exterior background: the mass function `mu = 2M/r`, the
//! tortoise coordinate, its numerical inversion, and the shifted coordinate
//! `x` with the associated weight `beta` used by the arctangent multiplier.
//!
//! Conventions fixed here and relied on everywhere else:
//!
//! * `one_minus_mu` is computed as `(r - 2M)/r`, never as `1.0 - mu`, so it
//!   stays exact (and positive) arbitrarily close to the horizon.
//! * The tortoise coordinate is normalized so that `r*(3M) = 0`; primes on
//!   radial functions denote derivatives with respect to `r*`.
//! * Grids that approach the horizon are always specified in `r*`. Near the
//!   horizon `r*` loses resolution as a function of representable `r`
//!   (an ulp step in `r` moves `r*` by `2 ulp/(r - 2M)`), so `r_of_rstar`
//!   returns the closest representable radius and saturates at the smallest
//!   double above `2M` once the requested `r*` falls below the representable
//!   range. All kernel formulas stay finite there because `one_minus_mu`
//!   never reaches zero.

use crate::fmath;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GeometryError {
    NonPositiveMass { mass: f64 },
    /// Radius at or inside the horizon, where the exterior chart ends.
    OutsideExterior { r: f64, horizon: f64 },
    NonPositiveAlpha { alpha: f64 },
}

impl core::fmt::Display for GeometryError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            GeometryError::NonPositiveMass { mass } => {
                write!(f, "mass must be positive and finite, got {mass}")
            }
            GeometryError::OutsideExterior { r, horizon } => {
                write!(f, "radius {r} is not in the exterior r > {horizon}")
            }
            GeometryError::NonPositiveAlpha { alpha } => {
                write!(f, "multiplier parameter alpha must be positive and finite, got {alpha}")
            }
        }
    }
}

impl core::error::Error for GeometryError {}

/// The background, parameterized by its mass in geometric units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Geometry {
    mass: f64,
}

impl Geometry {
    pub fn new(mass: f64) -> Result<Self, GeometryError> {
        if !(mass > 0.0) || !mass.is_finite() {
            return Err(GeometryError::NonPositiveMass { mass });
        }
        Ok(Self { mass })
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn horizon_radius(&self) -> f64 {
        2.0 * self.mass
    }

    pub fn photon_sphere_radius(&self) -> f64 {
        3.0 * self.mass
    }

    pub fn mu(&self, r: f64) -> f64 {
        2.0 * self.mass / r
    }

    pub fn one_minus_mu(&self, r: f64) -> f64 {
        (r - 2.0 * self.mass) / r
    }

    /// Tortoise coordinate `r* = r + 2M ln(r - 2M) - 3M - 2M ln M`.
    ///
    /// The additive constants put the photon sphere at `r* = 0` for every
    /// mass; at `M = 1`, `rstar_of_r(3.0)` is exactly `0.0` because the two
    /// `3M` terms share one floating-point value and `ln 1 = 0`.
    pub fn rstar_of_r(&self, r: f64) -> Result<f64, GeometryError> {
        let m = self.mass;
        if !(r > 2.0 * m) {
            return Err(GeometryError::OutsideExterior { r, horizon: 2.0 * m });
        }
        Ok(r + 2.0 * m * fmath::ln(r - 2.0 * m) - 3.0 * m - 2.0 * m * fmath::ln(m))
    }

    /// Inverse of [`rstar_of_r`]: the unique `r > 2M` with `r*(r) = r_star`,
    /// to relative tolerance 1e-13 in `r`.
    ///
    /// Bracketed Newton iteration with bisection fallback; the bracket is
    /// maintained every step, so the method cannot diverge for finite input.
    /// For `r_star` below the value at the smallest representable radius
    /// above `2M` (about `-71.7` at `M = 1`) the result saturates there.
    pub fn r_of_rstar(&self, r_star: f64) -> f64 {
        assert!(r_star.is_finite(), "r_of_rstar requires finite input, got {r_star}");
        let m = self.mass;
        let horizon = 2.0 * m;

        let rstar_above = |r: f64| -> f64 {
            // Callers keep r strictly above the horizon, so the closed form
            // is always defined here.
            r + 2.0 * m * fmath::ln(r - horizon) - 3.0 * m - 2.0 * m * fmath::ln(m)
        };

        let (mut lo, mut hi, mut r);
        if r_star <= 0.0 {
            lo = horizon.next_up();
            if rstar_above(lo) >= r_star {
                // Requested point is beyond what doubles can resolve.
                return lo;
            }
            // Near the horizon r* ~ (r - 2M) - M + 2M ln((r - 2M)/M); dropping
            // the linear term overestimates r - 2M, giving an upper bracket.
            let delta_seed = m * fmath::exp((r_star + m) / (2.0 * m));
            hi = 3.0 * m;
            let seeded = horizon + delta_seed;
            if seeded > lo && seeded < hi {
                hi = seeded;
            }
            r = 0.5 * (lo + hi);
        } else {
            // rstar(2.5M) = -0.5M - 2M ln 2 < 0 <= r_star, and
            // rstar(r_star + 4M) >= r_star + M(1 + 2 ln 2) > r_star.
            lo = 2.5 * m;
            hi = r_star + 4.0 * m;
            r = if r_star > 3.0 * m { r_star } else { 3.0 * m };
        }

        let mut prev_width = hi - lo;
        for _ in 0..100 {
            let g = rstar_above(r) - r_star;
            if g == 0.0 {
                return r;
            }
            if g > 0.0 {
                hi = r;
            } else {
                lo = r;
            }
            let width = hi - lo;
            // Run the bracket down to a couple of ulps: near the horizon the
            // tortoise coordinate is exquisitely sensitive to r, so anything
            // looser leaks into r* roundtrips.
            if width <= 2.0 * f64::EPSILON * hi {
                break;
            }
            // dr*/dr = 1/(1 - mu), so the Newton step is g * (1 - mu).
            let step = g * (r - horizon) / r;
            let mut next = r - step;
            // Fall back to bisection when Newton leaves the bracket or the
            // bracket stopped contracting, which bounds the iteration count.
            if !(next > lo && next < hi) || width > 0.75 * prev_width {
                next = 0.5 * (lo + hi);
            }
            prev_width = width;
            if next == r {
                break;
            }
            r = next;
        }
        0.5 * (lo + hi)
    }

    /// Bundle the per-radius quantities the kernels consume.
    pub fn point_at_r(&self, r: f64) -> Result<RadialPoint, GeometryError> {
        let r_star = self.rstar_of_r(r)?;
        Ok(RadialPoint {
            r,
            r_star,
            mu: self.mu(r),
            one_minus_mu: self.one_minus_mu(r),
        })
    }

    /// Like [`point_at_r`], addressed by the tortoise coordinate. The stored
    /// `r_star` is the requested one (grid semantics); `r` is its closest
    /// representable preimage.
    pub fn point_at_rstar(&self, r_star: f64) -> RadialPoint {
        let r = self.r_of_rstar(r_star);
        RadialPoint {
            r,
            r_star,
            mu: self.mu(r),
            one_minus_mu: self.one_minus_mu(r),
        }
    }
}

/// Cached data at one radius. All derivative helpers are with respect to
/// `r*` and depend only on `mu` and `r`, never on the mass directly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialPoint {
    pub r: f64,
    pub r_star: f64,
    pub mu: f64,
    pub one_minus_mu: f64,
}

impl RadialPoint {
    /// `d mu / d r* = -(mu/r)(1 - mu)`.
    pub fn mu_prime(&self) -> f64 {
        -(self.mu / self.r) * self.one_minus_mu
    }

    /// `d^2 mu / d r*^2 = (2 mu (1 - mu)/r^2)(1 - (3/2) mu)`.
    pub fn mu_second(&self) -> f64 {
        2.0 * self.mu * self.one_minus_mu / (self.r * self.r) * (1.0 - 1.5 * self.mu)
    }

    /// `(r - 3M)/r^2 = (1 - (3/2) mu)/r`, the factor that degenerates at the
    /// photon sphere. Within an ulp of zero at `r = 3M` (not exactly zero);
    /// code that needs an exact zero there forms `r - 3M` directly.
    pub fn photon_factor(&self) -> f64 {
        (1.0 - 1.5 * self.mu) / self.r
    }

    /// `w = (1 - mu)/r`, the coefficient pairing with `f` in the currents.
    pub fn w(&self) -> f64 {
        self.one_minus_mu / self.r
    }

    /// `d w / d r* = (1 - mu)(2 mu - 1)/r^2`.
    pub fn w_prime(&self) -> f64 {
        self.one_minus_mu * (2.0 * self.mu - 1.0) / (self.r * self.r)
    }
}

/// The pair `(alpha, C_*)` with the derived offset `x_offset = alpha + sqrt(alpha)`
/// and the cached reference angle of the arctangent multiplier.
///
/// `c_star` is always the value of [`crate::multipliers::choose_cstar`] for
/// this `alpha`; the constructor enforces it, so the photon-sphere
/// cancellations downstream hold bit-exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MultiplierParams {
    alpha: f64,
    x_offset: f64,
    c_star: f64,
    ref_angle: f64,
}

impl MultiplierParams {
    pub fn new(alpha: f64, geometry: &Geometry) -> Result<Self, GeometryError> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(GeometryError::NonPositiveAlpha { alpha });
        }
        let x_offset = alpha + fmath::sqrt(alpha);
        // Written as (0 - x_offset)/alpha: the same expression the running
        // arctangent evaluates at r* = 0, so their difference vanishes
        // bit-exactly at the photon sphere.
        let ref_angle = fmath::atan((0.0 - x_offset) / alpha);
        let c_star = crate::multipliers::choose_cstar(alpha, geometry);
        Ok(Self { alpha, x_offset, c_star, ref_angle })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn c_star(&self) -> f64 {
        self.c_star
    }

    pub fn x_offset(&self) -> f64 {
        self.x_offset
    }

    pub(crate) fn ref_angle(&self) -> f64 {
        self.ref_angle
    }

    /// `x = r* - alpha - sqrt(alpha)`.
    pub fn x_of(&self, r_star: f64) -> f64 {
        r_star - self.x_offset
    }

    pub fn x(&self, p: &RadialPoint) -> f64 {
        self.x_of(p.r_star)
    }

    /// `beta = (1 - mu)/r - x/(alpha^2 + x^2)`.
    pub fn beta(&self, p: &RadialPoint) -> f64 {
        let x = self.x(p);
        p.w() - x / (self.alpha * self.alpha + x * x)
    }
}
