//! Pointwise gas-state algebra and the normal Rankine–Hugoniot jump.
//!
//! States are dimensionless: pressures and densities are measured in units of
//! the inflow values at the entry radius, velocities in the resulting sound
//! speed scale. The equations are invariant under this normalization.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Guard width around the sonic set `M^2 = 1`. Jumps and branch integrations
/// refuse to operate closer to the sonic point than this.
pub const EPS_SONIC: f64 = 1e-6;

/// Pointwise fluid state `(p, rho, u0)` with adiabatic exponent `gamma`.
///
/// `u0` is the radial velocity component; the flow is purely radial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GasState {
    pub p: f64,
    pub rho: f64,
    pub u0: f64,
    pub gamma: f64,
}

impl GasState {
    /// Validated constructor: requires `p, rho, u0 > 0` and `gamma > 1`.
    pub fn new(p: f64, rho: f64, u0: f64, gamma: f64) -> Result<Self> {
        let s = Self { p, rho, u0, gamma };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.p > 0.0
            && self.rho > 0.0
            && self.u0 > 0.0
            && self.gamma > 1.0
            && self.p.is_finite()
            && self.rho.is_finite()
            && self.u0.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidState {
                reason: format!(
                    "need p>0, rho>0, u0>0, gamma>1; got p={}, rho={}, u0={}, gamma={}",
                    self.p, self.rho, self.u0, self.gamma
                ),
            })
        }
    }

    /// Squared sound speed `c^2 = gamma p / rho`.
    pub fn sound_speed_squared(&self) -> f64 {
        self.gamma * self.p / self.rho
    }

    /// Squared Mach number `t = (u0)^2 / c^2`.
    pub fn mach_squared(&self) -> f64 {
        self.u0 * self.u0 / self.sound_speed_squared()
    }

    /// Bernoulli quantity `E = (u0)^2/2 + c^2/(gamma-1)`.
    pub fn bernoulli_energy(&self) -> f64 {
        0.5 * self.u0 * self.u0 + self.sound_speed_squared() / (self.gamma - 1.0)
    }

    /// Entropy function `A = p rho^{-gamma}` of the state equation
    /// `p = A rho^gamma`.
    pub fn entropy(&self) -> f64 {
        self.p * self.rho.powf(-self.gamma)
    }

    /// Construct a state from its Mach number (`u0 = M c`).
    pub fn from_mach(p: f64, rho: f64, mach: f64, gamma: f64) -> Result<Self> {
        if !(mach > 0.0) {
            return Err(Error::InvalidState {
                reason: format!("mach must be positive, got {mach}"),
            });
        }
        let c = (gamma * p / rho).sqrt();
        Self::new(p, rho, mach * c, gamma)
    }
}

/// A resolved normal shock at radius `r_b`: supersonic upstream, subsonic
/// downstream, with the conservation residuals recorded.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShockJump {
    pub r_b: f64,
    pub upstream: GasState,
    pub downstream: GasState,
    /// Relative residuals of (mass flux, momentum flux, Bernoulli energy).
    pub residuals: [f64; 3],
}

impl ShockJump {
    /// Gap of the Mach-product identity
    /// `(1/t_minus + (gamma-1)/2)(1/t_plus + (gamma-1)/2) - (gamma+1)^2/4`,
    /// where `t` is the squared Mach number. Zero (to roundoff) for every
    /// normal jump.
    pub fn mach_product_gap(&self) -> f64 {
        let g = self.upstream.gamma;
        let tm = self.upstream.mach_squared();
        let tp = self.downstream.mach_squared();
        (1.0 / tm + 0.5 * (g - 1.0)) * (1.0 / tp + 0.5 * (g - 1.0)) - 0.25 * (g + 1.0) * (g + 1.0)
    }
}

/// Resolve the entropy-admissible downstream state of a normal shock.
///
/// The downstream state conserves mass flux `rho u0`, momentum flux
/// `rho (u0)^2 + p`, and `E`, with `p` rising across the jump and the flow
/// turning subsonic. Closed-form ratio relations keep the branch selection
/// explicit; the residuals of the three conservation laws are evaluated and
/// recorded on the result.
pub fn rh_normal_jump(upstream: &GasState, r_b: f64) -> Result<ShockJump> {
    upstream.validate()?;
    let g = upstream.gamma;
    let t = upstream.mach_squared();
    if t <= 1.0 + EPS_SONIC {
        return Err(Error::NotSupersonic { mach_squared: t });
    }

    let p_ratio = (2.0 * g * t - (g - 1.0)) / (g + 1.0);
    let rho_ratio = (g + 1.0) * t / ((g - 1.0) * t + 2.0);
    let downstream = GasState {
        p: upstream.p * p_ratio,
        rho: upstream.rho * rho_ratio,
        u0: upstream.u0 / rho_ratio,
        gamma: g,
    };

    let mass_up = upstream.rho * upstream.u0;
    let mass_dn = downstream.rho * downstream.u0;
    let mom_up = upstream.rho * upstream.u0 * upstream.u0 + upstream.p;
    let mom_dn = downstream.rho * downstream.u0 * downstream.u0 + downstream.p;
    let e_up = upstream.bernoulli_energy();
    let e_dn = downstream.bernoulli_energy();
    let residuals = [
        ((mass_dn - mass_up) / mass_up).abs(),
        ((mom_dn - mom_up) / mom_up).abs(),
        ((e_dn - e_up) / e_up).abs(),
    ];

    Ok(ShockJump {
        r_b,
        upstream: *upstream,
        downstream,
        residuals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m2_reference_upstream() -> GasState {
        GasState::from_mach(1.0, 1.0, 2.0, 1.4).unwrap()
    }

    #[test]
    fn sound_speed_squared_basics() {
        assert_eq!(
            GasState::new(1.0, 1.0, 0.5, 1.4)
                .unwrap()
                .sound_speed_squared(),
            1.4
        );
        assert_eq!(
            GasState::new(2.0, 4.0, 0.5, 2.0)
                .unwrap()
                .sound_speed_squared(),
            1.0
        );
        // Downstream of the M=2 jump.
        let s = GasState::new(4.5, 8.0 / 3.0, 0.5, 1.4).unwrap();
        assert!((s.sound_speed_squared() - 2.3625).abs() < 1e-14);
    }

    #[test]
    fn bernoulli_energy_stagnation_limit() {
        // The kinetic term is 5e-25, far below one ulp of c^2/(gamma-1).
        let s = GasState::new(1.0, 1.0, 1e-12, 1.4).unwrap();
        assert!((s.bernoulli_energy() - 3.5).abs() < 1e-14);
    }

    #[test]
    fn bernoulli_energy_reference_and_conservation() {
        let up = m2_reference_upstream();
        assert!((up.u0 - 2.0 * 1.4f64.sqrt()).abs() < 1e-15);
        assert!((up.bernoulli_energy() - 6.3).abs() < 1e-13);
        let jump = rh_normal_jump(&up, 1.0).unwrap();
        assert!((jump.downstream.bernoulli_energy() - 6.3).abs() < 1e-12);
    }

    #[test]
    fn entropy_values() {
        let s = GasState::new(1.0, 1.0, 0.1, 1.7).unwrap();
        assert_eq!(s.entropy(), 1.0);
        let s = GasState::new(4.5, 8.0 / 3.0, 0.1, 1.4).unwrap();
        // 4.5 * (8/3)^(-1.4), evaluated directly.
        let expect = 4.5 * (8.0f64 / 3.0).powf(-1.4);
        assert!((s.entropy() - expect).abs() < 1e-15);
        assert!((s.entropy() - 1.1398725325).abs() < 1e-5);
    }

    #[test]
    fn normal_jump_m2_closed_form() {
        let jump = rh_normal_jump(&m2_reference_upstream(), 1.3).unwrap();
        let d = jump.downstream;
        assert!((d.p - 4.5).abs() < 1e-12);
        assert!((d.rho - 8.0 / 3.0).abs() < 1e-12);
        assert!((d.u0 - 0.887412).abs() < 1e-6);
        assert!((d.mach_squared() - 1.0 / 3.0).abs() < 1e-12);
        for r in jump.residuals {
            assert!(r < 1e-12);
        }
    }

    #[test]
    fn sonic_limit_vanishing_strength() {
        let up = GasState::from_mach(1.0, 1.0, 1.0 + 1e-6, 1.4).unwrap();
        let jump = rh_normal_jump(&up, 1.0).unwrap();
        let d = jump.downstream;
        assert!((d.p / up.p - 1.0).abs() < 1e-4);
        assert!((d.rho / up.rho - 1.0).abs() < 1e-4);
        assert!((d.u0 / up.u0 - 1.0).abs() < 1e-4);
    }

    #[test]
    fn subsonic_upstream_rejected() {
        let up = GasState::from_mach(1.0, 1.0, 0.8, 1.4).unwrap();
        assert!(matches!(
            rh_normal_jump(&up, 1.0),
            Err(Error::NotSupersonic { .. })
        ));
        // Applying the jump to a downstream state must also fail.
        let sub = rh_normal_jump(&m2_reference_upstream(), 1.0)
            .unwrap()
            .downstream;
        assert!(matches!(
            rh_normal_jump(&sub, 1.0),
            Err(Error::NotSupersonic { .. })
        ));
    }

    #[test]
    fn mach_product_identity_grid() {
        for &g in &[1.2, 1.4, 5.0 / 3.0, 2.0, 3.0] {
            for &m in &[1.1, 2.0, 5.0] {
                let up = GasState::from_mach(1.0, 1.0, m, g).unwrap();
                let jump = rh_normal_jump(&up, 1.0).unwrap();
                assert!(
                    jump.mach_product_gap().abs() < 1e-10,
                    "gamma={g} M={m} gap={}",
                    jump.mach_product_gap()
                );
            }
        }
        // The value itself at gamma=1.4: (1/t- + 0.2)(1/t+ + 0.2) = 1.44.
        let jump = rh_normal_jump(&m2_reference_upstream(), 1.0).unwrap();
        let lhs = (1.0 / jump.upstream.mach_squared() + 0.2)
            * (1.0 / jump.downstream.mach_squared() + 0.2);
        assert!((lhs - 1.44).abs() < 1e-10);
    }

    #[test]
    fn entropy_and_pressure_rise_downstream() {
        // Property sweep over supersonic upstream states.
        let mut lcg = 123456789u64;
        let mut unit = move || {
            lcg = lcg
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (lcg >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..200 {
            let g = 1.1 + 1.9 * unit();
            let m = 1.01 + 8.99 * unit();
            let p = 0.1 + 10.0 * unit();
            let rho = 0.1 + 10.0 * unit();
            let up = GasState::from_mach(p, rho, m, g).unwrap();
            let jump = rh_normal_jump(&up, 1.0).unwrap();
            assert!(jump.downstream.p > up.p);
            assert!(jump.downstream.entropy() > up.entropy());
            assert!(jump.downstream.mach_squared() < 1.0);
            for r in jump.residuals {
                assert!(r < 1e-12);
            }
        }
    }

    #[test]
    fn invalid_states_rejected() {
        assert!(GasState::new(0.0, 1.0, 1.0, 1.4).is_err());
        assert!(GasState::new(1.0, -1.0, 1.0, 1.4).is_err());
        assert!(GasState::new(1.0, 1.0, 0.0, 1.4).is_err());
        assert!(GasState::new(1.0, 1.0, 1.0, 1.0).is_err());
    }
}
