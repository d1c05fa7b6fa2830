//! Leapfrog evolution of a single spherical-harmonic mode of the wave
//! equation in the tortoise coordinate.
//!
//! The evolved variable is `u = r * phi_mode`: it obeys the flat 1+1 wave
//! equation with the curvature potential [`rw_potential`], and the potential
//! enters the scheme as a plain function of the tortoise coordinate so the
//! same loop runs the zero-potential d'Alembert oracle. Boundaries are
//! handled by padding the domain until the walls are causally disconnected
//! from whatever is being measured, so the Dirichlet pin at the ends is
//! exact bookkeeping rather than an absorbing-layer approximation.
//!
//! The scheme is the standard three-level leapfrog: second order in both
//! steps, explicitly reversible, and exactly conserving the quadratic form
//! [`discrete_energy`] on every interior update. Spacetime consumers stream
//! over [`LevelView`] windows; small runs can collect a full [`FieldHistory`].

use alloc::vec;
use alloc::vec::Vec;

use serde::Serialize;

use crate::currents::{mode_to_jet, ModeState, SphereJet};
use crate::geometry::{Geometry, RadialPoint};

/// Treatment of the two ends of the spatial interval. With a causally padded
/// domain the choice never reaches the measured region; pinned ends keep the
/// discrete energy exactly conserved, so that is the only treatment offered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Boundary {
    /// Pin `u` to zero at both end columns on every level.
    #[default]
    Dirichlet,
}

/// Grid and duration of one evolution. The spatial interval is
/// `[r_star_min, r_star_max]` with spacing `h`; the time step is
/// `courant * h` and must not exceed `h`. Evolution runs to the first time
/// lattice point at or past `t_final`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolutionConfig {
    pub r_star_min: f64,
    pub r_star_max: f64,
    /// Spatial step; the interval length must be a whole multiple of it.
    pub h: f64,
    /// Time step over spatial step, in `(0, 1]`. Default 0.5.
    pub courant: f64,
    pub t_final: f64,
    /// Harmonic index of the evolved mode, carried into the jets.
    pub ell: u32,
    pub boundary: Boundary,
}

impl EvolutionConfig {
    /// Half the grid limit: stable for any bounded nonnegative potential at
    /// reasonable spacings, and it keeps alternate time levels coupled.
    pub const DEFAULT_COURANT: f64 = 0.5;

    pub fn k(&self) -> f64 {
        self.courant * self.h
    }

    fn lattice(&self) -> Result<Lattice, SolverError> {
        let fail = |reason| Err(SolverError::InvalidGrid { reason });
        if !(self.h > 0.0 && self.h.is_finite()) {
            return fail("spatial step must be positive and finite");
        }
        if !(self.courant > 0.0 && self.courant <= 1.0) {
            return fail("courant number must lie in (0, 1]");
        }
        let span = self.r_star_max - self.r_star_min;
        if !(span > 0.0 && span.is_finite()) {
            return fail("domain must have positive finite length");
        }
        let cells = span / self.h;
        let rounded = crate::fmath::round(cells);
        if crate::fmath::abs(cells - rounded) > 1e-6 * rounded.max(1.0) {
            return fail("domain length must be a whole multiple of the spatial step");
        }
        let columns = rounded as usize + 1;
        if columns < 4 {
            return fail("domain must span at least three cells");
        }
        let k = self.courant * self.h;
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return fail("final time must be positive and finite");
        }
        let steps = crate::fmath::ceil(self.t_final / k - 1e-9) as usize;
        if steps < 2 {
            return fail("final time must cover at least two time steps");
        }
        Ok(Lattice { columns, steps, k })
    }
}

struct Lattice {
    columns: usize,
    steps: usize,
    k: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SolverError {
    InvalidGrid {
        reason: &'static str,
    },
    /// The max-norm of the field exceeded ten times its initial value.
    Unstable {
        step: usize,
        t: f64,
        norm: f64,
        initial: f64,
    },
}

impl core::fmt::Display for SolverError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            SolverError::InvalidGrid { reason } => write!(f, "invalid evolution grid: {reason}"),
            SolverError::Unstable { step, t, norm, initial } => write!(
                f,
                "evolution unstable at step {step} (t = {t}): max-norm {norm} from initial {initial}"
            ),
        }
    }
}

impl core::error::Error for SolverError {}

/// Three consecutive time levels of the evolved variable, handed to the
/// streaming callback once per interior time index. `curr` is level `step`
/// at time `t = step * k`; `prev` and `next` are its neighbors, so centered
/// time differences are available without storing the whole run.
#[derive(Debug, Clone, Copy)]
pub struct LevelView<'a> {
    pub step: usize,
    pub t: f64,
    pub h: f64,
    pub k: f64,
    pub r_star_min: f64,
    pub ell: u32,
    pub prev: &'a [f64],
    pub curr: &'a [f64],
    pub next: &'a [f64],
}

impl LevelView<'_> {
    pub fn columns(&self) -> usize {
        self.curr.len()
    }

    /// Tortoise coordinate of column `i`.
    pub fn x(&self, i: usize) -> f64 {
        self.r_star_min + i as f64 * self.h
    }

    /// Field mode and its first derivatives at an interior column, by
    /// centered differences in both directions. `p` must be the radial point
    /// at `x(i)`; the evolved variable divides by `r` to give the field, so
    /// the radial derivative picks up the chain-rule term `-u (1 - mu)/r^2`.
    pub fn mode_state(&self, i: usize, p: &RadialPoint) -> ModeState {
        debug_assert!(i >= 1 && i + 1 < self.curr.len());
        debug_assert!(crate::fmath::abs(p.r_star - self.x(i)) <= 1e-9 * (1.0 + crate::fmath::abs(p.r_star)));
        let r = p.r;
        let u = self.curr[i];
        let du_dt = (self.next[i] - self.prev[i]) / (2.0 * self.k);
        let du_dx = (self.curr[i + 1] - self.curr[i - 1]) / (2.0 * self.h);
        ModeState {
            ell: self.ell,
            u: u / r,
            ur: du_dx / r - u * p.one_minus_mu / (r * r),
            ut: du_dt / r,
        }
    }
}

/// Extremes of the conserved discrete energy and of the field over one run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RunStats {
    pub steps: usize,
    pub k: f64,
    /// Energy of the first level pair, the value the scheme conserves.
    pub energy_first: f64,
    pub energy_min: f64,
    pub energy_max: f64,
    pub max_abs_u: f64,
}

impl RunStats {
    /// Spread of the discrete energy over the run, relative to its initial
    /// value. Zero for an identically zero run.
    pub fn energy_drift(&self) -> f64 {
        if self.energy_first <= 0.0 {
            return 0.0;
        }
        (self.energy_max - self.energy_min) / self.energy_first
    }
}

/// The quadratic form the leapfrog update conserves exactly with pinned
/// ends: for consecutive levels `u^n = curr`, `u^{n+1} = next`,
///
/// `E = (h/2) sum_i ((next_i - curr_i)/k)^2
///    + (h/2) sum_i (curr_{i+1} - curr_i)(next_{i+1} - next_i)/h^2
///    + (h/2) sum_i V_i curr_i next_i`.
///
/// Summation by parts turns the middle sum into `-<D+D- curr, next>`, and
/// the update rule cancels the telescoped difference of consecutive values
/// identically, so any change over a run is pure rounding noise.
pub fn discrete_energy(curr: &[f64], next: &[f64], h: f64, k: f64, potential: &[f64]) -> f64 {
    debug_assert_eq!(curr.len(), next.len());
    debug_assert_eq!(curr.len(), potential.len());
    let mut kinetic = 0.0;
    let mut gradient = 0.0;
    let mut binding = 0.0;
    for i in 0..curr.len() {
        let v = (next[i] - curr[i]) / k;
        kinetic += v * v;
        binding += potential[i] * curr[i] * next[i];
        if i + 1 < curr.len() {
            gradient += (curr[i + 1] - curr[i]) * (next[i + 1] - next[i]) / (h * h);
        }
    }
    0.5 * h * (kinetic + gradient + binding)
}

/// Run the leapfrog and stream every interior level through `on_level`.
///
/// `potential`, `initial_u`, and `initial_v` are sampled once on the grid;
/// `initial_v` is the initial time derivative. The first step is the Taylor
/// half-update `u^1 = u^0 + k v + (k^2/2)(D+D- u^0 - V u^0)`, which keeps the
/// whole run second order. End columns are pinned to zero on every level,
/// including the sampled initial one. The callback sees `step = 1` through
/// `steps - 1`; level times run to `steps * k`, the first lattice point at
/// or past `t_final`.
///
/// Aborts with [`SolverError::Unstable`] as soon as the max-norm exceeds ten
/// times the initial max-norm.
pub fn evolve_with<V, U, W, F>(
    cfg: &EvolutionConfig,
    potential: V,
    initial_u: U,
    initial_v: W,
    mut on_level: F,
) -> Result<RunStats, SolverError>
where
    V: Fn(f64) -> f64,
    U: Fn(f64) -> f64,
    W: Fn(f64) -> f64,
    F: FnMut(&LevelView<'_>),
{
    let Lattice { columns, steps, k } = cfg.lattice()?;
    let h = cfg.h;
    let x = |i: usize| cfg.r_star_min + i as f64 * h;
    let Boundary::Dirichlet = cfg.boundary;

    let v: Vec<f64> = (0..columns).map(|i| potential(x(i))).collect();
    let mut prev: Vec<f64> = (0..columns).map(|i| initial_u(x(i))).collect();
    prev[0] = 0.0;
    prev[columns - 1] = 0.0;

    let mut curr = vec![0.0; columns];
    for i in 1..columns - 1 {
        let lap = (prev[i + 1] - 2.0 * prev[i] + prev[i - 1]) / (h * h);
        curr[i] = prev[i] + k * initial_v(x(i)) + 0.5 * k * k * (lap - v[i] * prev[i]);
    }

    let max_abs = |level: &[f64]| level.iter().fold(0.0f64, |m, &u| m.max(crate::fmath::abs(u)));
    let initial_norm = max_abs(&prev).max(max_abs(&curr));
    let mut max_abs_u = initial_norm;

    let energy_first = discrete_energy(&prev, &curr, h, k, &v);
    let mut energy_min = energy_first;
    let mut energy_max = energy_first;

    let mut next = vec![0.0; columns];
    for n in 1..steps {
        for i in 1..columns - 1 {
            let lap = (curr[i + 1] - 2.0 * curr[i] + curr[i - 1]) / (h * h);
            next[i] = 2.0 * curr[i] - prev[i] + k * k * (lap - v[i] * curr[i]);
        }
        next[0] = 0.0;
        next[columns - 1] = 0.0;

        let norm = max_abs(&next);
        max_abs_u = max_abs_u.max(norm);
        if initial_norm > 0.0 && norm > 10.0 * initial_norm {
            return Err(SolverError::Unstable {
                step: n + 1,
                t: (n + 1) as f64 * k,
                norm,
                initial: initial_norm,
            });
        }
        let energy = discrete_energy(&curr, &next, h, k, &v);
        energy_min = energy_min.min(energy);
        energy_max = energy_max.max(energy);

        on_level(&LevelView {
            step: n,
            t: n as f64 * k,
            h,
            k,
            r_star_min: cfg.r_star_min,
            ell: cfg.ell,
            prev: &prev,
            curr: &curr,
            next: &next,
        });

        core::mem::swap(&mut prev, &mut curr);
        core::mem::swap(&mut curr, &mut next);
    }

    Ok(RunStats {
        steps,
        k,
        energy_first,
        energy_min,
        energy_max,
        max_abs_u,
    })
}

/// A fully stored run: every time level of the evolved variable. Memory is
/// `levels * columns` doubles, so this is for modest grids; large accounting
/// runs stream over [`evolve_with`] instead.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldHistory {
    pub r_star_min: f64,
    pub h: f64,
    pub k: f64,
    pub ell: u32,
    /// `levels[n][i]` is the evolved variable at time `n * k`, column `i`.
    pub levels: Vec<Vec<f64>>,
    pub stats: RunStats,
}

impl FieldHistory {
    pub fn columns(&self) -> usize {
        self.levels[0].len()
    }

    pub fn times(&self) -> usize {
        self.levels.len()
    }

    pub fn x(&self, i: usize) -> f64 {
        self.r_star_min + i as f64 * self.h
    }

    pub fn t(&self, n: usize) -> f64 {
        n as f64 * self.k
    }

    pub fn u(&self, n: usize, i: usize) -> f64 {
        self.levels[n][i]
    }

    /// Time derivative of the evolved variable at level `n`, column `i`:
    /// centered inside, second-order one-sided at the first and last level.
    pub fn time_derivative(&self, n: usize, i: usize) -> f64 {
        let last = self.levels.len() - 1;
        let two_k = 2.0 * self.k;
        if n == 0 {
            (-3.0 * self.levels[0][i] + 4.0 * self.levels[1][i] - self.levels[2][i]) / two_k
        } else if n == last {
            (3.0 * self.levels[last][i] - 4.0 * self.levels[last - 1][i]
                + self.levels[last - 2][i])
                / two_k
        } else {
            (self.levels[n + 1][i] - self.levels[n - 1][i]) / two_k
        }
    }

    /// Radial (`r*`) derivative at level `n`, column `i`: centered inside,
    /// second-order one-sided at the end columns.
    pub fn radial_derivative(&self, n: usize, i: usize) -> f64 {
        let row = &self.levels[n];
        let last = row.len() - 1;
        let two_h = 2.0 * self.h;
        if i == 0 {
            (-3.0 * row[0] + 4.0 * row[1] - row[2]) / two_h
        } else if i == last {
            (3.0 * row[last] - 4.0 * row[last - 1] + row[last - 2]) / two_h
        } else {
            (row[i + 1] - row[i - 1]) / two_h
        }
    }

    /// Field mode and first derivatives at a grid node, dividing the evolved
    /// variable by `r`. `p` must be the radial point at `x(i)`.
    pub fn mode_state(&self, n: usize, i: usize, p: &RadialPoint) -> ModeState {
        let r = p.r;
        let u = self.levels[n][i];
        ModeState {
            ell: self.ell,
            u: u / r,
            ur: self.radial_derivative(n, i) / r - u * p.one_minus_mu / (r * r),
            ut: self.time_derivative(n, i) / r,
        }
    }

    pub fn jet(&self, n: usize, i: usize, p: &RadialPoint) -> SphereJet {
        mode_to_jet(&self.mode_state(n, i, p), p)
    }
}

/// Run the leapfrog and keep every level. See [`evolve_with`] for the
/// scheme, boundary handling, and the instability abort.
pub fn evolve<V, U, W>(
    cfg: &EvolutionConfig,
    potential: V,
    initial_u: U,
    initial_v: W,
) -> Result<FieldHistory, SolverError>
where
    V: Fn(f64) -> f64,
    U: Fn(f64) -> f64,
    W: Fn(f64) -> f64,
{
    let mut levels: Vec<Vec<f64>> = Vec::new();
    let stats = evolve_with(cfg, potential, initial_u, initial_v, |view| {
        if view.step == 1 {
            levels.push(view.prev.to_vec());
            levels.push(view.curr.to_vec());
        }
        levels.push(view.next.to_vec());
    })?;
    Ok(FieldHistory {
        r_star_min: cfg.r_star_min,
        h: cfg.h,
        k: cfg.k(),
        ell: cfg.ell,
        levels,
        stats,
    })
}

/// Sphere jets of one stored time level at every column, with the radial
/// points resolved from the grid. End columns use one-sided derivatives.
pub fn assemble_jets(hist: &FieldHistory, g: &Geometry, n: usize) -> Vec<SphereJet> {
    (0..hist.columns())
        .map(|i| {
            let p = g.point_at_rstar(hist.x(i));
            hist.jet(n, i, &p)
        })
        .collect()
}

/// The curvature potential of the evolved variable: for harmonic index
/// `ell` at area radius `r`,
/// `(1 - 2M/r) (ell (ell + 1) / r^2 + 2M / r^3)`.
pub fn rw_potential(g: &Geometry, ell: u32, r: f64) -> f64 {
    let m = g.mass();
    let lam = ell as f64 * (ell as f64 + 1.0);
    let lapse = 1.0 - 2.0 * m / r;
    lapse * (lam / (r * r) + 2.0 * m / (r * r * r))
}
