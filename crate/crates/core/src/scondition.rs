//! Per-mode non-solvability checks for the shock-position problems.
//!
//! For each spherical-harmonic eigenvalue `lambda_n = n(n+1)` the background
//! induces a two-point problem for a radial profile `v`:
//!
//! ```text
//! e1 v'' + kappa e2 v' + kappa^2 (e3 - lambda_n) v = -kappa^2 e4,
//! v(0) = 1,  v(1) = 0,  v'(0) = -(lambda_n + mu7)/mu9 * kappa,
//! ```
//!
//! which is overdetermined as stated: integrating the initial value problem
//! and checking the terminal value `v(1)` decides solvability. `v(1) != 0`
//! means the problem has no solution, which is exactly what the background
//! must guarantee for every mode. Nontrivial solvability of the nonlocal
//! variant (where `e4` multiplies `v(0)`) for any of the `2n+1` harmonics of
//! level `n` reduces to `v(1) = 0` here: a mode with `v(0) = 0` has zero
//! initial slope as well and vanishes identically by Cauchy uniqueness, and
//! a mode with `v(0) != 0` can be normalized to this problem.
//!
//! Three exclusion routes are implemented: a Hopf comparison for large
//! `lambda_n`, an energy bound in a transformed variable for small shell
//! width `kappa`, and the numeric shooting margin itself.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::background::{BackgroundSolution, SolverOptions};
use crate::error::Result;
use crate::interp::linspace;
use crate::linearize::{coefficient_profiles, compute_mu, CoefficientProfiles, MuCoefficients};
use crate::ode::{integrate, OdeOptions};

/// Strictness margin for the Hopf grid inequalities.
const HOPF_MARGIN: f64 = 1e-10;

/// How the tail `n > n_checked` is handled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModePolicy {
    /// Largest mode checked explicitly when the Hopf conditions never fire.
    pub n_max: u32,
}

impl Default for ModePolicy {
    fn default() -> Self {
        Self { n_max: 64 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExclusionMethod {
    /// Hopf comparison excludes a solution outright.
    HopfExcluded,
    /// The energy bound applies: the shell is thinner than `kappa_bound`.
    EnergyBoundExcluded,
    /// Shooting margin resolved away from zero.
    NumericMargin,
    /// Margin smaller than the decision tolerance.
    Inconclusive,
}

/// Evidence for one spherical-harmonic level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeVerdict {
    pub n: u32,
    pub lambda_n: f64,
    pub multiplicity: u32,
    pub method: ExclusionMethod,
    /// Signed terminal value `v(1)` when the mode was shot numerically.
    pub margin: Option<f64>,
    /// Effective decision tolerance for this mode.
    pub margin_tol: Option<f64>,
    /// Largest shell width for which the energy bound excludes a solution.
    pub kappa_bound: Option<f64>,
    /// The margin is zero to integration accuracy at two refinement levels.
    pub zero_confirmed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TailStatus {
    /// Hopf fired at `n0`; monotonicity in `lambda_n` covers all `n > n0`.
    HopfCoversTail {
        n0: u32,
    },
    Unverified,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum OverallVerdict {
    Holds,
    Fails { n: u32 },
    Inconclusive { modes: Vec<u32> },
}

/// Aggregated decision over all modes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SConditionReport {
    pub verdicts: Vec<ModeVerdict>,
    pub n_checked: u32,
    pub tail_status: TailStatus,
    pub overall: OverallVerdict,
    pub warning: Option<String>,
}

/// `(n, lambda_n, multiplicity)` for `n = 0..=n_max`: the sphere Laplacian
/// has eigenvalues `n(n+1)` with `2n+1` independent eigenfunctions.
pub fn enumerate_modes(n_max: u32) -> Vec<(u32, u64, u32)> {
    (0..=n_max)
        .map(|n| (n, n as u64 * (n as u64 + 1), 2 * n + 1))
        .collect()
}

fn lambda(n: u32) -> f64 {
    n as f64 * (n as f64 + 1.0)
}

/// Initial slope prescribed by the jump relations.
fn initial_slope(n: u32, profiles: &CoefficientProfiles, mus: &MuCoefficients) -> f64 {
    -(lambda(n) + mus.mu7) / mus.mu9 * profiles.kappa
}

struct ModeShot {
    margin: f64,
    sup_v: f64,
}

fn shoot_mode(
    n: u32,
    profiles: &CoefficientProfiles,
    mus: &MuCoefficients,
    ode: &OdeOptions,
) -> Result<ModeShot> {
    let lam = lambda(n);
    let kappa = profiles.kappa;
    let rhs = |y: f64, v: &[f64; 2]| -> Result<[f64; 2]> {
        let e1 = profiles.e1_at(y);
        let e2 = profiles.e2_at(y);
        let e3 = profiles.e3_at(y);
        let e4 = profiles.e4_at(y);
        Ok([
            v[1],
            -(kappa * e2 * v[1] + kappa * kappa * ((e3 - lam) * v[0] + e4)) / e1,
        ])
    };
    let y0 = [1.0, initial_slope(n, profiles, mus)];
    let sol = integrate(rhs, 0.0, &y0, 1.0, ode)?;
    let mut sup_v: f64 = 1.0;
    for k in 0..=100 {
        sup_v = sup_v.max(sol.eval(k as f64 / 100.0)[0].abs());
    }
    Ok(ModeShot {
        margin: sol.end_state()[0],
        sup_v,
    })
}

/// Terminal shooting value `v(1)` for mode `n`. The problem has no solution
/// exactly when this is nonzero.
pub fn mode_margin(
    n: u32,
    profiles: &CoefficientProfiles,
    mus: &MuCoefficients,
    opts: &SolverOptions,
) -> Result<f64> {
    shoot_mode(n, profiles, mus, &opts.ode()).map(|s| s.margin)
}

/// Hopf comparison: with `e4 <= 0` on the whole interval, `sup e3 <
/// lambda_n`, and `lambda_n + mu7 > 0`, a solution of the two-point problem
/// would need an interior positive maximum where the operator has the wrong
/// sign. Grid inequalities are required with margin 1e-10; `e4` may touch
/// zero to the same tolerance.
pub fn hopf_excludes(n: u32, profiles: &CoefficientProfiles, mus: &MuCoefficients) -> bool {
    let lam = lambda(n);
    profiles.max_e4() <= HOPF_MARGIN
        && profiles.sup_e3() < lam - HOPF_MARGIN
        && lam + mus.mu7 > HOPF_MARGIN
}

/// The transformed problem `w'' + kappa^2 alpha_n w = kappa^2 beta_n` on
/// `[0, z_star]` with `w(0) = 1`, `w'(0) = 0`, obtained from `v` by
/// `w = e^{-h_n y} v`, an integrating factor `p_n`, and the arc-length-like
/// change of variable `z = int_0^y ds/p_n(s)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnergyForm {
    pub n: u32,
    pub h_n: f64,
    pub kappa: f64,
    pub z_star: f64,
    /// `p_n` sampled on the uniform `y` grid of the profiles.
    pub p_n: Vec<f64>,
    /// Uniform grid on `[0, z_star]` carrying `alpha_n`, `beta_n` samples.
    pub z_grid: Vec<f64>,
    pub alpha_n: Vec<f64>,
    pub beta_n: Vec<f64>,
    /// Sup norms taken over the `y` grid, where the transform is resolved.
    /// The change of variable compresses most of the `y` interval into a
    /// sliver near `z_star` once `p_n` grows, so uniform-`z` samples would
    /// miss the supremum entirely.
    pub alpha_sup: f64,
    pub beta_sup: f64,
}

impl EnergyForm {
    pub fn sup_alpha(&self) -> f64 {
        self.alpha_sup
    }

    pub fn sup_beta(&self) -> f64 {
        self.beta_sup
    }
}

fn alpha_beta(
    y: f64,
    p: f64,
    lam: f64,
    q: f64,
    h_n: f64,
    profiles: &CoefficientProfiles,
) -> (f64, f64) {
    let e1 = profiles.e1_at(y);
    let e2 = profiles.e2_at(y);
    let e3 = profiles.e3_at(y);
    let e4 = profiles.e4_at(y);
    (
        p * p * (q * q - q * e2 / e1 + (e3 - lam) / e1),
        -p * p * (-h_n * y).exp() * e4 / e1,
    )
}

/// Build the energy form for mode `n`.
pub fn energy_transform(
    n: u32,
    profiles: &CoefficientProfiles,
    mus: &MuCoefficients,
    opts: &SolverOptions,
) -> Result<EnergyForm> {
    let lam = lambda(n);
    let kappa = profiles.kappa;
    let h_n = -(mus.mu7 + lam) / mus.mu9 * kappa;
    let q = (lam + mus.mu7) / mus.mu9;
    let ode = opts.ode();

    // Forward pass: P(y) = int_0^y (2 h_n + kappa e2/e1), z(y) = int 1/p_n.
    let fwd = |y: f64, s: &[f64; 2]| -> Result<[f64; 2]> {
        let ratio = profiles.e2_at(y) / profiles.e1_at(y);
        Ok([2.0 * h_n + kappa * ratio, (-s[0]).exp()])
    };
    let fwd_sol = integrate(fwd, 0.0, &[0.0, 0.0], 1.0, &ode)?;
    let z_star = fwd_sol.end_state()[1];

    let mut p_n = Vec::with_capacity(profiles.grid.len());
    let mut alpha_sup: f64 = 0.0;
    let mut beta_sup: f64 = 0.0;
    for &y in &profiles.grid {
        let p = fwd_sol.eval(y)[0].exp();
        p_n.push(p);
        let (a, b) = alpha_beta(y, p, lam, q, h_n, profiles);
        alpha_sup = alpha_sup.max(a.abs());
        beta_sup = beta_sup.max(b.abs());
    }

    // Record alpha, beta on a uniform z grid by inverting the monotone map
    // z(y) pointwise. (Integrating the inverse map forward in z would
    // amplify errors by e^{P}, so bisection on the forward solution is used
    // instead.)
    let m = profiles.grid.len();
    let z_grid = linspace(0.0, z_star, m);
    let mut alpha_n = Vec::with_capacity(m);
    let mut beta_n = Vec::with_capacity(m);
    for &z in &z_grid {
        let mut lo = 0.0f64;
        let mut hi = 1.0f64;
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if fwd_sol.eval(mid)[1] < z {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let y = 0.5 * (lo + hi);
        let (a, b) = alpha_beta(y, fwd_sol.eval(y)[0].exp(), lam, q, h_n, profiles);
        alpha_n.push(a);
        beta_n.push(b);
    }

    Ok(EnergyForm {
        n,
        h_n,
        kappa,
        z_star,
        p_n,
        z_grid,
        alpha_n,
        beta_n,
        alpha_sup,
        beta_sup,
    })
}

/// Solve the transformed problem `w'' + kappa^2 alpha_n w = kappa^2 beta_n`
/// (derivatives in `z`) with `w(0) = 1`, `w'(0) = 0`, and map back:
/// returns `v(1) = e^{h_n} w(z*)`.
///
/// The unknowns are `w` and `w_z`; the system is marched along `y` through
/// `dz = e^{-P(y)} dy`, which is the numerically stable parametrization of
/// the same equation (forward-in-`z` integration of the change of variable
/// amplifies errors by `e^{P}`). A regression partner for `mode_margin`
/// through an independent formulation.
pub fn energy_margin(
    n: u32,
    profiles: &CoefficientProfiles,
    mus: &MuCoefficients,
    opts: &SolverOptions,
) -> Result<f64> {
    let lam = lambda(n);
    let kappa = profiles.kappa;
    let h_n = -(mus.mu7 + lam) / mus.mu9 * kappa;
    let q = (lam + mus.mu7) / mus.mu9;
    let ode = opts.ode();

    let exponent = |y: f64, _s: &[f64; 1]| -> Result<[f64; 1]> {
        Ok([2.0 * h_n + kappa * profiles.e2_at(y) / profiles.e1_at(y)])
    };
    let p_sol = integrate(exponent, 0.0, &[0.0], 1.0, &ode)?;

    // State [w, w_z] in y: dw/dy = w_z e^{-P}; d(w_z)/dy = kappa^2
    // (beta - alpha w) e^{-P}, with alpha = e^{2P} a~, beta = e^{2P} b~
    // factored so only e^{P} appears.
    let k2 = kappa * kappa;
    let rhs = |y: f64, s: &[f64; 2]| -> Result<[f64; 2]> {
        let p_exp = p_sol.eval(y)[0];
        let e1 = profiles.e1_at(y);
        let a_tilde = q * q - q * profiles.e2_at(y) / e1 + (profiles.e3_at(y) - lam) / e1;
        let b_tilde = -(-h_n * y).exp() * profiles.e4_at(y) / e1;
        Ok([
            s[1] * (-p_exp).exp(),
            k2 * p_exp.exp() * (b_tilde - a_tilde * s[0]),
        ])
    };
    let sol = integrate(rhs, 0.0, &[1.0, 0.0], 1.0, &ode)?;
    Ok(h_n.exp() * sol.end_state()[0])
}

/// Largest shell width excluded by the energy estimate.
///
/// From `w(z*) = 0` one has `|w(z)| <= sqrt(z*) ||w'||` and `1 = |w(0)| <=
/// sqrt(z*) ||w'||`; the energy identity then bounds
/// `||w'||^2 <= kappa^2 sup|beta| (z*)^{3/2} ||w'|| + kappa^2 sup|alpha|
/// (z*)^2 ||w'||^2`, which is contradictory for
/// `kappa < min( 1/(z* sqrt(2 sup|alpha|)), 1/(z* sqrt(2 sup|beta|)) )`.
pub fn energy_kappa_bound(form: &EnergyForm) -> f64 {
    let z = form.z_star;
    let a = form.sup_alpha();
    let b = form.sup_beta();
    let bound_a = if a > 0.0 {
        1.0 / (z * (2.0 * a).sqrt())
    } else {
        f64::INFINITY
    };
    let bound_b = if b > 0.0 {
        1.0 / (z * (2.0 * b).sqrt())
    } else {
        f64::INFINITY
    };
    bound_a.min(bound_b)
}

/// Decide the per-mode non-solvability for a whole background.
///
/// `margin_tol` is the base decision tolerance (scaled per mode by
/// `max(1, sup |v|)`); `None` uses the default `1e-6`.
pub fn check_s_condition(
    bg: &BackgroundSolution,
    margin_tol: Option<f64>,
    policy: &ModePolicy,
    opts: &SolverOptions,
) -> Result<SConditionReport> {
    let mus = compute_mu(bg)?;
    let profiles = coefficient_profiles(bg, opts.n_samples.max(129))?;
    check_s_condition_with(&profiles, &mus, margin_tol, policy, opts)
}

/// Same decision procedure on pre-built profiles (synthetic ones included).
pub fn check_s_condition_with(
    profiles: &CoefficientProfiles,
    mus: &MuCoefficients,
    margin_tol: Option<f64>,
    policy: &ModePolicy,
    opts: &SolverOptions,
) -> Result<SConditionReport> {
    let tol_base = margin_tol.unwrap_or(1e-6);

    // Smallest Hopf-excluded mode; monotone in lambda_n, so it covers the
    // entire tail above it.
    let hopf_n0 = (0..=policy.n_max).find(|&n| hopf_excludes(n, profiles, mus));
    let numeric_end = hopf_n0.unwrap_or(policy.n_max + 1);

    let coarse = opts.ode();
    let fine = OdeOptions {
        rtol: coarse.rtol * 1e-2,
        atol: coarse.atol * 1e-2,
        ..coarse
    };

    let mut verdicts: Vec<ModeVerdict> = (0..numeric_end)
        .into_par_iter()
        .map(|n| -> Result<ModeVerdict> {
            let shot = shoot_mode(n, profiles, mus, &coarse)?;
            let refined = shoot_mode(n, profiles, mus, &fine)?;
            let margin = refined.margin;
            let sup_v = shot.sup_v.max(refined.sup_v);
            let tol_eff = tol_base * sup_v.max(1.0);
            // Zero at integration accuracy, confirmed at both refinement
            // levels. A margin that merely fails tol_eff stays inconclusive.
            let zero_tol = 1e3 * (coarse.atol).max(coarse.rtol * sup_v);
            let zero_confirmed = shot.margin.abs() <= zero_tol && refined.margin.abs() <= zero_tol;

            let form = energy_transform(n, profiles, mus, opts)?;
            let kappa_bound = energy_kappa_bound(&form);
            let energy_applies = profiles.kappa < kappa_bound && profiles.kappa > 0.0;

            let method = if energy_applies {
                ExclusionMethod::EnergyBoundExcluded
            } else if margin.abs() >= tol_eff {
                ExclusionMethod::NumericMargin
            } else {
                ExclusionMethod::Inconclusive
            };
            Ok(ModeVerdict {
                n,
                lambda_n: lambda(n),
                multiplicity: 2 * n + 1,
                method,
                margin: Some(margin),
                margin_tol: Some(tol_eff),
                kappa_bound: kappa_bound.is_finite().then_some(kappa_bound),
                zero_confirmed,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let (n_checked, tail_status) = match hopf_n0 {
        Some(n0) => {
            verdicts.push(ModeVerdict {
                n: n0,
                lambda_n: lambda(n0),
                multiplicity: 2 * n0 + 1,
                method: ExclusionMethod::HopfExcluded,
                margin: None,
                margin_tol: None,
                kappa_bound: None,
                zero_confirmed: false,
            });
            (n0, TailStatus::HopfCoversTail { n0 })
        }
        None => (policy.n_max, TailStatus::Unverified),
    };

    let failing = verdicts
        .iter()
        .find(|v| v.zero_confirmed && v.method != ExclusionMethod::EnergyBoundExcluded);
    let inconclusive: Vec<u32> = verdicts
        .iter()
        .filter(|v| v.method == ExclusionMethod::Inconclusive && !v.zero_confirmed)
        .map(|v| v.n)
        .collect();

    let overall = if let Some(f) = failing {
        OverallVerdict::Fails { n: f.n }
    } else if !inconclusive.is_empty() {
        OverallVerdict::Inconclusive {
            modes: inconclusive,
        }
    } else if matches!(tail_status, TailStatus::HopfCoversTail { .. }) {
        OverallVerdict::Holds
    } else {
        OverallVerdict::Inconclusive { modes: vec![] }
    };

    let warning = match tail_status {
        TailStatus::Unverified => Some(format!(
            "TailUnverifiable: Hopf conditions never fired up to n_max = {}; higher modes unchecked",
            policy.n_max
        )),
        TailStatus::HopfCoversTail { .. } => None,
    };

    Ok(SConditionReport {
        verdicts,
        n_checked,
        tail_status,
        overall,
        warning,
    })
}
