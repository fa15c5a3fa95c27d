//! Linearization coefficients of the transonic background.
//!
//! Ten scalars `mu0..mu9` collect the linearized jump and shock-relation
//! coefficients at the shock radius; four profiles `e1..e4` are the interior
//! elliptic-operator coefficients on the normalized subsonic interval. All
//! printed signs and product identities are enforced at construction.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::background::BackgroundSolution;
use crate::error::{Error, Result};
use crate::interp::{cubic_uniform, linspace};

/// The linearized shock-relation coefficients, evaluated at `r_b`.
///
/// `mu0_dual` is the equivalent first-power expression
/// `(gamma+1)/2 * u0+ / (c^2 - (u0)^2)+`; `mu0_squared_form` is the same
/// expression with `(u0+)^2` in the numerator, kept for comparison because it
/// is dimensionally inconsistent with the defining ratio and does not equal
/// it (see `MuCoefficients::mu0_squared_form_ratio`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MuCoefficients {
    pub mu0: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub mu3: f64,
    pub mu4: f64,
    pub mu5: f64,
    pub mu6: f64,
    pub mu7: f64,
    pub mu8: f64,
    pub mu9: f64,
    /// First-power dual expression for `mu0`.
    pub mu0_dual: f64,
    /// Relative difference between `mu0` and `mu0_dual`.
    pub mu0_dual_rel_diff: f64,
    /// Squared-numerator variant of the dual expression.
    pub mu0_squared_form: f64,
    /// Shock radius the coefficients were evaluated at.
    pub r_b: f64,
    /// Squared Mach number just behind the shock.
    pub t_s: f64,
}

impl MuCoefficients {
    /// Ratio `mu0_squared_form / mu0`; equals `u0+`, hence differs from 1
    /// except at the measure-zero case `u0+ = 1`.
    pub fn mu0_squared_form_ratio(&self) -> f64 {
        self.mu0_squared_form / self.mu0
    }
}

/// Evaluate `mu0..mu9` for a background, enforcing every printed sign and
/// the product identities `mu7 = -mu0*mu6`, `mu8 = -mu2*mu5/(4 pi mu6)`,
/// `mu9 = -mu0*mu2*mu5`.
pub fn compute_mu(bg: &BackgroundSolution) -> Result<MuCoefficients> {
    let g = bg.gamma;
    let r_b = bg.r_b;
    let up = bg.jump.upstream;
    let dn = bg.jump.downstream;
    let c2 = dn.sound_speed_squared();
    let u = dn.u0;
    let rho = dn.rho;
    let p = dn.p;
    let t_s = dn.mach_squared();

    let mu0 = rho * u / (dn.p - up.p);
    let mu0_dual = 0.5 * (g + 1.0) * u / (c2 - u * u);
    let mu0_squared_form = 0.5 * (g + 1.0) * u * u / (c2 - u * u);
    let mu1 = 4.0 * g * u / ((g + 1.0) * r_b);
    let mu2 = -4.0 * rho / ((g + 1.0) * r_b) * ((g - 1.0) * u * u + c2);
    let mu3 = -4.0 * g * rho / ((g + 1.0) * r_b);
    let mu4 = 4.0 * (g - 1.0) / ((g + 1.0) * r_b * rho.powf(g - 1.0)) * (c2 - u * u);
    let mu5 = r_b * r_b * (u * u - c2) / (g * p * u);
    let mu6 = 8.0 * g * u / ((g + 1.0) * (1.0 - t_s)) * ((g - 1.0) * t_s * t_s + t_s + 1.0);
    let mu7 = -mu0 * mu6;
    let mu8 = -mu2 * mu5 / (4.0 * PI * mu6);
    let mu9 = -mu0 * mu2 * mu5;

    let checks: [(&str, f64, f64); 10] = [
        ("mu0", mu0, 1.0),
        ("mu1", mu1, 1.0),
        ("mu2", mu2, -1.0),
        ("mu3", mu3, -1.0),
        ("mu4", mu4, 1.0),
        ("mu5", mu5, -1.0),
        ("mu6", mu6, 1.0),
        ("mu7", mu7, -1.0),
        ("mu8", mu8, -1.0),
        ("mu9", mu9, -1.0),
    ];
    for (name, value, sign) in checks {
        if !(value * sign > 0.0) || !value.is_finite() {
            return Err(Error::SignViolation {
                name: name.into(),
                value,
            });
        }
    }

    Ok(MuCoefficients {
        mu0,
        mu1,
        mu2,
        mu3,
        mu4,
        mu5,
        mu6,
        mu7,
        mu8,
        mu9,
        mu0_dual,
        mu0_dual_rel_diff: ((mu0 - mu0_dual) / mu0).abs(),
        mu0_squared_form,
        r_b,
        t_s,
    })
}

/// `e1 = (x0)^2 (1 - t)`.
pub fn e1_of(x0: f64, t: f64) -> f64 {
    x0 * x0 * (1.0 - t)
}

/// `e2 = 2 x0 ((1+2 gamma) t^2 - 3 t + 4) / (1 - t)`.
pub fn e2_of(gamma: f64, x0: f64, t: f64) -> f64 {
    2.0 * x0 * ((1.0 + 2.0 * gamma) * t * t - 3.0 * t + 4.0) / (1.0 - t)
}

/// `e3 = -2 (6 - 19 t - 7 t^2 (gamma - 2) + t^4 gamma (1 + 2 gamma)
///        + t^3 (-3 + 2 gamma - 4 gamma^2)) / (t - 1)^3`.
pub fn e3_of(gamma: f64, t: f64) -> f64 {
    let num = 6.0 - 19.0 * t - 7.0 * t * t * (gamma - 2.0)
        + t.powi(4) * gamma * (1.0 + 2.0 * gamma)
        + t.powi(3) * (-3.0 + 2.0 * gamma - 4.0 * gamma * gamma);
    -2.0 * num / (t - 1.0).powi(3)
}

/// Quadratic factor controlling the sign of `e4`.
pub fn e4_sign_factor(gamma: f64, t: f64) -> f64 {
    (2.0 * gamma - 3.0) * t * t + 8.0 * t - 3.0
}

/// `e4 = (1 - t_s) / (rho_s^gamma (1 + (gamma-1) t_s))
///       * 2 rho^gamma (2 + (gamma-1) t) / (1 - t)^3
///       * ((2 gamma - 3) t^2 + 8 t - 3)`.
///
/// `rho` is the local subsonic density, `rho_s` its value at the shock.
pub fn e4_of(gamma: f64, t: f64, t_s: f64, rho: f64, rho_s: f64) -> f64 {
    (1.0 - t_s) / (rho_s.powf(gamma) * (1.0 + (gamma - 1.0) * t_s))
        * 2.0
        * rho.powf(gamma)
        * (2.0 + (gamma - 1.0) * t)
        / (1.0 - t).powi(3)
        * e4_sign_factor(gamma, t)
}

/// Unique root of `(2 gamma - 3) t^2 + 8 t - 3` in `(0, 1)`: the squared
/// Mach number below which `e4 < 0`.
pub fn e4_sign_threshold(gamma: f64) -> f64 {
    let a = 2.0 * gamma - 3.0;
    if a.abs() < 1e-14 {
        return 3.0 / 8.0;
    }
    let disc = (64.0 + 12.0 * a).sqrt();
    // Of the two roots (-8 +- disc)/(2a), exactly one lies in (0, 1).
    let r1 = (-8.0 + disc) / (2.0 * a);
    let r2 = (-8.0 - disc) / (2.0 * a);
    if (0.0..1.0).contains(&r1) {
        r1
    } else {
        r2
    }
}

/// Interior elliptic-operator coefficients sampled on the normalized
/// subsonic interval `y0 in [0, 1]`, `x0 = kappa*y0 + r_b`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoefficientProfiles {
    pub gamma: f64,
    pub kappa: f64,
    pub t_s: f64,
    pub r_b: f64,
    pub r1: f64,
    /// Subsonic density at the shock, `rho_b^+(r_b)`.
    pub rho_s: f64,
    pub grid: Vec<f64>,
    pub t: Vec<f64>,
    pub rho: Vec<f64>,
    pub e1: Vec<f64>,
    pub e2: Vec<f64>,
    pub e3: Vec<f64>,
    pub e4: Vec<f64>,
}

impl CoefficientProfiles {
    fn dy(&self) -> f64 {
        1.0 / (self.grid.len() - 1) as f64
    }

    pub fn e1_at(&self, y0: f64) -> f64 {
        cubic_uniform(0.0, self.dy(), &self.e1, y0)
    }
    pub fn e2_at(&self, y0: f64) -> f64 {
        cubic_uniform(0.0, self.dy(), &self.e2, y0)
    }
    pub fn e3_at(&self, y0: f64) -> f64 {
        cubic_uniform(0.0, self.dy(), &self.e3, y0)
    }
    pub fn e4_at(&self, y0: f64) -> f64 {
        cubic_uniform(0.0, self.dy(), &self.e4, y0)
    }
    pub fn t_at(&self, y0: f64) -> f64 {
        cubic_uniform(0.0, self.dy(), &self.t, y0)
    }

    pub fn sup_e3(&self) -> f64 {
        self.e3.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_e4(&self) -> f64 {
        self.e4.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    /// First grid location where `e4` changes sign, by linear interpolation
    /// between the adjacent samples. `None` when the sign is constant.
    pub fn e4_sign_change_y0(&self) -> Option<f64> {
        for (i, w) in self.e4.windows(2).enumerate() {
            if w[0] == 0.0 {
                return Some(self.grid[i]);
            }
            if w[0] * w[1] < 0.0 {
                let frac = w[0] / (w[0] - w[1]);
                return Some(self.grid[i] + frac * self.dy());
            }
        }
        None
    }

    /// Assemble profiles directly from samples. Shape checks only; the
    /// physical sign constraints are not imposed, so synthetic profiles for
    /// solver studies (scaled `e4`, degenerate limits) can be expressed.
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        gamma: f64,
        kappa: f64,
        t_s: f64,
        r_b: f64,
        r1: f64,
        rho_s: f64,
        grid: Vec<f64>,
        t: Vec<f64>,
        rho: Vec<f64>,
        e: [Vec<f64>; 4],
    ) -> Result<Self> {
        let n = grid.len();
        let [e1, e2, e3, e4] = e;
        if n < 2
            || t.len() != n
            || rho.len() != n
            || e1.len() != n
            || e2.len() != n
            || e3.len() != n
            || e4.len() != n
        {
            return Err(Error::InvalidConfig {
                reason: "profile sample vectors must share a length >= 2".into(),
            });
        }
        Ok(Self {
            gamma,
            kappa,
            t_s,
            r_b,
            r1,
            rho_s,
            grid,
            t,
            rho,
            e1,
            e2,
            e3,
            e4,
        })
    }
}

/// Sample `e1..e4` over the subsonic interval of a background.
///
/// The local `t` and `rho` come from the subsonic branch samples (one source
/// of truth for the branch); the enforced invariants are `e1 > 0`, `e2 > 0`,
/// `sign(e4) = sign((2 gamma - 3) t^2 + 8 t - 3)`, and `t` decreasing.
pub fn coefficient_profiles(
    bg: &BackgroundSolution,
    n_samples: usize,
) -> Result<CoefficientProfiles> {
    if n_samples < 129 {
        return Err(Error::InvalidConfig {
            reason: format!("n_samples = {n_samples} < 129"),
        });
    }
    let kappa = bg.kappa();
    let t_s = bg.t_s();
    let rho_s = bg.jump.downstream.rho;
    let g = bg.gamma;

    let grid = linspace(0.0, 1.0, n_samples);
    let mut t = Vec::with_capacity(n_samples);
    let mut rho = Vec::with_capacity(n_samples);
    let mut e1 = Vec::with_capacity(n_samples);
    let mut e2 = Vec::with_capacity(n_samples);
    let mut e3 = Vec::with_capacity(n_samples);
    let mut e4 = Vec::with_capacity(n_samples);

    for &y0 in &grid {
        let x0 = kappa * y0 + bg.r_b;
        let s = bg.subsonic.state_at(x0);
        let ti = s.mach_squared();
        t.push(ti);
        rho.push(s.rho);
        e1.push(e1_of(x0, ti));
        e2.push(e2_of(g, x0, ti));
        e3.push(e3_of(g, ti));
        e4.push(e4_of(g, ti, t_s, s.rho, rho_s));
    }

    for i in 0..n_samples {
        if !(e1[i] > 0.0) {
            return Err(Error::SignViolation {
                name: format!("e1(y0={})", grid[i]),
                value: e1[i],
            });
        }
        if !(e2[i] > 0.0) {
            return Err(Error::SignViolation {
                name: format!("e2(y0={})", grid[i]),
                value: e2[i],
            });
        }
        let q = e4_sign_factor(g, t[i]);
        if e4[i] * q < 0.0 {
            return Err(Error::SignViolation {
                name: format!("sign(e4)(y0={})", grid[i]),
                value: e4[i],
            });
        }
        if i > 0 && !(t[i] < t[i - 1]) {
            return Err(Error::SignViolation {
                name: format!("t decreasing at y0={}", grid[i]),
                value: t[i] - t[i - 1],
            });
        }
    }

    CoefficientProfiles::from_parts(
        g,
        kappa,
        t_s,
        bg.r_b,
        bg.r1,
        rho_s,
        grid,
        t,
        rho,
        [e1, e2, e3, e4],
    )
}
