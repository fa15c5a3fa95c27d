//! Radial steady Euler branches and transonic background assembly.
//!
//! A background solution is built from three pieces: a supersonic branch of
//! the radial Euler ODEs on `[r0, r_b]`, one normal Rankine–Hugoniot jump at
//! `r_b`, and a subsonic branch on `[r_b, r1]`. The shock radius is selected
//! by shooting against a prescribed back pressure at the exit.
//!
//! Along any branch the mass flux `rho*u0*(x0)^2`, the Bernoulli quantity
//! `E`, and the entropy function `A` are exact first integrals; they are
//! monitored at every output sample and enforced.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gas::{rh_normal_jump, GasState, ShockJump, EPS_SONIC};
use crate::interp::{cubic_uniform, linspace};
use crate::ode::{integrate, integrate_to_end, OdeOptions};

/// Which side of the sonic set a branch lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    Supersonic,
    Subsonic,
}

impl Regime {
    fn check(self, mach_squared: f64) -> Result<()> {
        let ok = match self {
            Regime::Supersonic => mach_squared > 1.0 + EPS_SONIC,
            Regime::Subsonic => mach_squared < 1.0 - EPS_SONIC,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::RegimeMismatch {
                expected: match self {
                    Regime::Supersonic => "supersonic",
                    Regime::Subsonic => "subsonic",
                },
                mach_squared,
            })
        }
    }
}

/// First integrals of a radial branch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FirstIntegrals {
    /// `rho * u0 * (x0)^2`, constant by conservation of mass.
    pub mass_flux: f64,
    /// Bernoulli quantity `E`.
    pub energy: f64,
    /// Entropy function `A`.
    pub entropy: f64,
}

impl FirstIntegrals {
    fn of(state: &GasState, radius: f64) -> Self {
        Self {
            mass_flux: state.rho * state.u0 * radius * radius,
            energy: state.bernoulli_energy(),
            entropy: state.entropy(),
        }
    }

    /// Largest relative deviation of `state` at `radius` from the integrals.
    pub fn drift(&self, state: &GasState, radius: f64) -> f64 {
        let here = Self::of(state, radius);
        let d1 = ((here.mass_flux - self.mass_flux) / self.mass_flux).abs();
        let d2 = ((here.energy - self.energy) / self.energy).abs();
        let d3 = ((here.entropy - self.entropy) / self.entropy).abs();
        d1.max(d2).max(d3)
    }
}

/// One integrated branch, resampled onto a uniform radius grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FlowBranch {
    pub gamma: f64,
    pub r_start: f64,
    pub r_end: f64,
    pub regime: Regime,
    pub radii: Vec<f64>,
    pub states: Vec<GasState>,
    pub first_integrals: FirstIntegrals,
    /// Largest first-integral drift observed at the output samples.
    pub max_drift: f64,
}

impl FlowBranch {
    fn grid_step(&self) -> f64 {
        if self.radii.len() < 2 {
            1.0
        } else {
            (self.r_end - self.r_start) / (self.radii.len() - 1) as f64
        }
    }

    /// Cubic interpolation of the sampled state at radius `r`.
    pub fn state_at(&self, r: f64) -> GasState {
        if self.radii.len() == 1 {
            return self.states[0];
        }
        let dx = self.grid_step();
        let comp = |sel: fn(&GasState) -> f64| -> f64 {
            let vals: Vec<f64> = self.states.iter().map(sel).collect();
            cubic_uniform(self.r_start, dx, &vals, r)
        };
        GasState {
            p: comp(|s| s.p),
            rho: comp(|s| s.rho),
            u0: comp(|s| s.u0),
            gamma: self.gamma,
        }
    }

    pub fn mach_squared_at(&self, r: f64) -> f64 {
        self.state_at(r).mach_squared()
    }

    pub fn start_state(&self) -> GasState {
        self.states[0]
    }

    pub fn end_state(&self) -> GasState {
        *self.states.last().expect("branch has samples")
    }

    fn validate(&self, drift_limit: f64) -> Result<()> {
        for (r, s) in self.radii.iter().zip(&self.states) {
            s.validate()?;
            let t = s.mach_squared();
            match self.regime {
                Regime::Supersonic if t <= 1.0 + EPS_SONIC => {
                    return Err(Error::SonicApproach {
                        x0: *r,
                        mach_squared: t,
                    })
                }
                Regime::Subsonic if t >= 1.0 - EPS_SONIC => {
                    return Err(Error::SonicApproach {
                        x0: *r,
                        mach_squared: t,
                    })
                }
                _ => {}
            }
        }
        if self.max_drift > drift_limit {
            return Err(Error::FirstIntegralDrift {
                name: "(mass flux, E, A)",
                drift: self.max_drift,
                limit: drift_limit,
            });
        }
        Ok(())
    }
}

/// Numerical controls shared by the background operations.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Relative ODE tolerance.
    pub ode_rel: f64,
    /// Absolute ODE tolerance.
    pub ode_abs: f64,
    /// Relative tolerance on the exit-pressure residual of the shock search.
    pub shock_tol: f64,
    /// Output samples per branch.
    pub n_samples: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            ode_rel: 1e-10,
            ode_abs: 1e-12,
            shock_tol: 1e-10,
            n_samples: 1025,
        }
    }
}

impl SolverOptions {
    pub fn ode(&self) -> OdeOptions {
        OdeOptions {
            rtol: self.ode_rel,
            atol: self.ode_abs,
            ..Default::default()
        }
    }

    /// Drift enforcement threshold, scaled with the requested tolerance.
    pub fn drift_limit(&self) -> f64 {
        (1e2 * self.ode_rel).max(1e-8)
    }
}

/// Right-hand side of the radial Euler system for `y = [u0, rho, p]`:
/// all three components share the factor `1/(x0 ((u0)^2 - c^2))`, which
/// degenerates at the sonic point; a guard aborts the step there.
fn radial_rhs(gamma: f64) -> impl Fn(f64, &[f64; 3]) -> Result<[f64; 3]> {
    move |x: f64, y: &[f64; 3]| {
        let [u, rho, p] = *y;
        if !(u > 0.0 && rho > 0.0 && p > 0.0) {
            return Err(Error::InvalidState {
                reason: format!("integration left the physical region at x0={x}"),
            });
        }
        let c2 = gamma * p / rho;
        let t = u * u / c2;
        if (t - 1.0).abs() < EPS_SONIC {
            return Err(Error::SonicApproach {
                x0: x,
                mach_squared: t,
            });
        }
        let denom = x * (u * u - c2);
        Ok([
            2.0 * c2 * u / denom,
            -2.0 * rho * u * u / denom,
            -2.0 * rho * c2 * u * u / denom,
        ])
    }
}

/// Integrate the radial Euler ODEs from `start` at `r_start` to `r_end`
/// (backward when `r_end < r_start`) and resample onto a uniform grid.
pub fn integrate_radial_flow(
    start: &GasState,
    r_start: f64,
    r_end: f64,
    regime: Regime,
    opts: &SolverOptions,
) -> Result<FlowBranch> {
    start.validate()?;
    regime.check(start.mach_squared())?;
    let integrals = FirstIntegrals::of(start, r_start);

    if r_end == r_start {
        return Ok(FlowBranch {
            gamma: start.gamma,
            r_start,
            r_end,
            regime,
            radii: vec![r_start],
            states: vec![*start],
            first_integrals: integrals,
            max_drift: 0.0,
        });
    }

    let y0 = [start.u0, start.rho, start.p];
    let sol = integrate(radial_rhs(start.gamma), r_start, &y0, r_end, &opts.ode())?;

    let radii = linspace(r_start, r_end, opts.n_samples.max(2));
    let mut states = Vec::with_capacity(radii.len());
    let mut max_drift: f64 = 0.0;
    for &r in &radii {
        let [u, rho, p] = sol.eval(r);
        let s = GasState {
            p,
            rho,
            u0: u,
            gamma: start.gamma,
        };
        max_drift = max_drift.max(integrals.drift(&s, r));
        states.push(s);
    }

    let branch = FlowBranch {
        gamma: start.gamma,
        r_start,
        r_end,
        regime,
        radii,
        states,
        first_integrals: integrals,
        max_drift,
    };
    branch.validate(opts.drift_limit())?;
    Ok(branch)
}

/// Integrate the Mach-squared ODE
/// `dt/dx0 = (2t/x0) (2 + (gamma-1) t) / (t - 1)`
/// and sample `t(x0)` on the branch grid convention.
pub fn mach_squared_profile(
    gamma: f64,
    t_start: f64,
    r_start: f64,
    r_end: f64,
    opts: &SolverOptions,
) -> Result<Vec<(f64, f64)>> {
    let radii = linspace(r_start, r_end, opts.n_samples.max(2));
    if t_start == 0.0 {
        // Fixed point of the equation.
        return Ok(radii.into_iter().map(|r| (r, 0.0)).collect());
    }
    if t_start < 0.0 || (t_start - 1.0).abs() < EPS_SONIC {
        return Err(Error::InvalidConfig {
            reason: format!("t_start = {t_start} must lie in (0,1) or (1,inf) away from 1"),
        });
    }
    let rhs = move |x: f64, y: &[f64; 1]| {
        let t = y[0];
        if (t - 1.0).abs() < EPS_SONIC {
            return Err(Error::SonicApproach {
                x0: x,
                mach_squared: t,
            });
        }
        Ok([(2.0 * t / x) * (2.0 + (gamma - 1.0) * t) / (t - 1.0)])
    };
    if r_end == r_start {
        return Ok(vec![(r_start, t_start)]);
    }
    let sol = integrate(rhs, r_start, &[t_start], r_end, &opts.ode())?;
    Ok(radii.into_iter().map(|r| (r, sol.eval(r)[0])).collect())
}

/// Complete transonic background: supersonic branch, jump, subsonic branch.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BackgroundSolution {
    pub gamma: f64,
    pub r0: f64,
    pub r1: f64,
    pub r_b: f64,
    pub supersonic: FlowBranch,
    pub subsonic: FlowBranch,
    pub jump: ShockJump,
    pub p_exit: f64,
    /// Backward extension of the subsonic branch actually achieved, as a
    /// radius decrement below `r_b` (recorded, not used downstream).
    pub extension_h: f64,
}

impl BackgroundSolution {
    pub fn kappa(&self) -> f64 {
        self.r1 - self.r_b
    }

    /// Squared Mach number just behind the shock.
    pub fn t_s(&self) -> f64 {
        self.jump.downstream.mach_squared()
    }

    pub fn validate(&self, opts: &SolverOptions) -> Result<()> {
        self.supersonic.validate(opts.drift_limit())?;
        self.subsonic.validate(opts.drift_limit())?;
        if self.jump.downstream.p <= self.jump.upstream.p {
            return Err(Error::SignViolation {
                name: "entropy condition p+ - p-".into(),
                value: self.jump.downstream.p - self.jump.upstream.p,
            });
        }
        let up_end = self.supersonic.end_state();
        let dn_start = self.subsonic.start_state();
        if up_end != self.jump.upstream || dn_start != self.jump.downstream {
            return Err(Error::InvalidState {
                reason: "branch endpoints do not match the jump states".into(),
            });
        }
        Ok(())
    }
}

/// Final state of a branch without building the sample grid. Used inside
/// root finding where only the endpoint matters.
fn end_state_only(
    start: &GasState,
    r_start: f64,
    r_end: f64,
    opts: &SolverOptions,
) -> Result<GasState> {
    if r_end == r_start {
        return Ok(*start);
    }
    let y = integrate_to_end(
        radial_rhs(start.gamma),
        r_start,
        &[start.u0, start.rho, start.p],
        r_end,
        &opts.ode(),
    )?;
    Ok(GasState {
        p: y[2],
        rho: y[1],
        u0: y[0],
        gamma: start.gamma,
    })
}

/// Exit pressure of the configuration with the shock placed at `r_b`,
/// without assembling branch sample grids.
pub fn exit_pressure_only(
    inflow: &GasState,
    r0: f64,
    r_b: f64,
    r1: f64,
    opts: &SolverOptions,
) -> Result<f64> {
    let upstream = end_state_only(inflow, r0, r_b, opts)?;
    let jump = rh_normal_jump(&upstream, r_b)?;
    let exit = end_state_only(&jump.downstream, r_b, r1, opts)?;
    Ok(exit.p)
}

/// Integrate the supersonic branch to `r_b`, jump, and continue subsonic to
/// `r1`. Returns the assembled background with its exit pressure.
pub fn forward_exit_pressure(
    inflow: &GasState,
    r0: f64,
    r_b: f64,
    r1: f64,
    opts: &SolverOptions,
) -> Result<BackgroundSolution> {
    if !(r0 <= r_b && r_b <= r1 && r0 < r1) {
        return Err(Error::InvalidConfig {
            reason: format!("need r0 <= r_b <= r1 with r0 < r1; got {r0}, {r_b}, {r1}"),
        });
    }
    let supersonic = integrate_radial_flow(inflow, r0, r_b, Regime::Supersonic, opts)?;
    let jump = rh_normal_jump(&supersonic.end_state(), r_b)?;
    let subsonic = integrate_radial_flow(&jump.downstream, r_b, r1, Regime::Subsonic, opts)?;
    let p_exit = subsonic.end_state().p;

    // Attempt to extend the subsonic solution below r_b; the flow chokes if
    // pushed back to the sonic radius, so halve until the integration fits.
    let mut h = 0.05 * (r1 - r0);
    let mut extension_h = 0.0;
    for _ in 0..24 {
        if r_b - h <= 0.0 {
            h *= 0.5;
            continue;
        }
        match end_state_only(&jump.downstream, r_b, r_b - h, opts) {
            Ok(_) => {
                extension_h = h;
                break;
            }
            Err(Error::SonicApproach { .. }) | Err(Error::StepFailure { .. }) => h *= 0.5,
            Err(e) => return Err(e),
        }
    }

    let bg = BackgroundSolution {
        gamma: inflow.gamma,
        r0,
        r1,
        r_b,
        supersonic,
        subsonic,
        jump,
        p_exit,
        extension_h,
    };
    bg.validate(opts)?;
    Ok(bg)
}

/// Admissible open interval of back pressures, computed from the two
/// limiting shock placements `r_b -> r0` and `r_b -> r1`.
pub fn admissible_backpressure_interval(
    inflow: &GasState,
    r0: f64,
    r1: f64,
    opts: &SolverOptions,
) -> Result<(f64, f64)> {
    let (a, b) = rayon::join(
        || exit_pressure_only(inflow, r0, r0, r1, opts),
        || exit_pressure_only(inflow, r0, r1, r1, opts),
    );
    let (pa, pb) = (a?, b?);
    Ok((pa.min(pb), pa.max(pb)))
}

const SWEEP_POINTS: usize = 33;

/// Locate the shock radius whose exit pressure matches `p_back`.
///
/// A 33-point sweep verifies that the exit pressure is strictly monotone in
/// the shock radius and brackets the residual's sign change; bisection then
/// drives the relative residual below `opts.shock_tol`.
pub fn find_shock_position(
    inflow: &GasState,
    p_back: f64,
    r0: f64,
    r1: f64,
    opts: &SolverOptions,
) -> Result<BackgroundSolution> {
    inflow.validate()?;
    Regime::Supersonic.check(inflow.mach_squared())?;
    if !(p_back > 0.0) {
        return Err(Error::InvalidConfig {
            reason: format!("back pressure must be positive, got {p_back}"),
        });
    }

    let (p_lo, p_hi) = admissible_backpressure_interval(inflow, r0, r1, opts)?;
    if p_back <= p_lo || p_back >= p_hi {
        return Err(Error::BackPressureOutOfRange { p_back, p_lo, p_hi });
    }

    // Monotonicity sweep; branch evaluations are independent.
    let grid = linspace(r0, r1, SWEEP_POINTS);
    let sweep: Vec<f64> = grid
        .par_iter()
        .map(|&rb| exit_pressure_only(inflow, r0, rb, r1, opts))
        .collect::<Result<Vec<f64>>>()?;
    let increasing = sweep[SWEEP_POINTS - 1] > sweep[0];
    for w in sweep.windows(2) {
        let ok = if increasing { w[1] > w[0] } else { w[1] < w[0] };
        if !ok {
            return Err(Error::NonMonotoneResidual {
                detail: format!("adjacent sweep exit pressures {} -> {}", w[0], w[1]),
            });
        }
    }
    let sign_changes = sweep
        .windows(2)
        .filter(|w| (w[0] - p_back) * (w[1] - p_back) < 0.0)
        .count();
    let on_grid = sweep.iter().position(|&p| p == p_back);
    if sign_changes > 1 {
        return Err(Error::NonMonotoneResidual {
            detail: format!("{sign_changes} sign changes of the exit-pressure residual"),
        });
    }

    // Bracket the crossing.
    let (mut lo, mut hi) = if let Some(i) = on_grid {
        (grid[i], grid[i])
    } else {
        let i = sweep
            .windows(2)
            .position(|w| (w[0] - p_back) * (w[1] - p_back) < 0.0)
            .ok_or_else(|| Error::NonMonotoneResidual {
                detail: "residual does not change sign inside the sweep".into(),
            })?;
        (grid[i], grid[i + 1])
    };

    let g_lo_pos = exit_pressure_only(inflow, r0, lo, r1, opts)? > p_back;
    let width_tol = 1e-12 * (r1 - r0);
    let mut best_rb = 0.5 * (lo + hi);
    let mut best_res = f64::INFINITY;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let p_mid = exit_pressure_only(inflow, r0, mid, r1, opts)?;
        let res = (p_mid - p_back).abs() / p_back;
        if res < best_res {
            best_res = res;
            best_rb = mid;
        }
        if res < opts.shock_tol && hi - lo < 1e-9 * (r1 - r0) {
            break;
        }
        if hi - lo < width_tol {
            break;
        }
        if (p_mid > p_back) == g_lo_pos {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if best_res >= opts.shock_tol {
        return Err(Error::ShockSearchStalled {
            r_b: best_rb,
            residual: best_res,
        });
    }

    forward_exit_pressure(inflow, r0, best_rb, r1, opts)
}
