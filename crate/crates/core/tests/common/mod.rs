//! Independent oracles shared by the integration suites. Each suite uses
//! the subset it needs.
#![allow(dead_code)]
//!
//! Everything here re-derives expected values through routes the library
//! does not use: a damped Newton solve of the three jump conservation laws,
//! a quadratic-root route through the critical speed, one-variable root
//! solves of the first-integral algebra, and plain bisection.

use shockshell::gas::GasState;

/// Downstream state of a normal jump by damped Newton iteration on the
/// three conservation laws, seeded on the subsonic side.
pub fn rh_newton_oracle(up: &GasState) -> GasState {
    let g = up.gamma;
    let m = up.rho * up.u0;
    let mom = up.rho * up.u0 * up.u0 + up.p;
    let e = up.bernoulli_energy();

    let mut u = 0.3 * up.u0;
    let mut rho = m / u;
    let mut p = mom - m * u;

    let residual = |u: f64, rho: f64, p: f64| -> [f64; 3] {
        [
            rho * u - m,
            rho * u * u + p - mom,
            0.5 * u * u + g * p / ((g - 1.0) * rho) - e,
        ]
    };
    let norm = |r: &[f64; 3]| r.iter().map(|x| x * x).sum::<f64>().sqrt();

    for _ in 0..200 {
        let r = residual(u, rho, p);
        if norm(&r) < 1e-13 {
            break;
        }
        // Jacobian rows for (u, rho, p).
        let j = [
            [rho, u, 0.0],
            [2.0 * rho * u, u * u, 1.0],
            [u, -g * p / ((g - 1.0) * rho * rho), g / ((g - 1.0) * rho)],
        ];
        let det = j[0][0] * (j[1][1] * j[2][2] - j[1][2] * j[2][1])
            - j[0][1] * (j[1][0] * j[2][2] - j[1][2] * j[2][0])
            + j[0][2] * (j[1][0] * j[2][1] - j[1][1] * j[2][0]);
        let inv = |a: usize, b: usize| -> f64 {
            // Cofactor (b,a) / det.
            let (r1, r2) = match b {
                0 => (1, 2),
                1 => (0, 2),
                _ => (0, 1),
            };
            let (c1, c2) = match a {
                0 => (1, 2),
                1 => (0, 2),
                _ => (0, 1),
            };
            let sign = if (a + b).is_multiple_of(2) { 1.0 } else { -1.0 };
            sign * (j[r1][c1] * j[r2][c2] - j[r1][c2] * j[r2][c1]) / det
        };
        let mut step = [0.0f64; 3];
        for (a, s) in step.iter_mut().enumerate() {
            for (b, rb) in r.iter().enumerate() {
                *s += inv(a, b) * rb;
            }
        }
        let mut lambda = 1.0;
        loop {
            let (un, rn, pn) = (
                u - lambda * step[0],
                rho - lambda * step[1],
                p - lambda * step[2],
            );
            if un > 0.0 && rn > 0.0 && pn > 0.0 && norm(&residual(un, rn, pn)) <= norm(&r) {
                u = un;
                rho = rn;
                p = pn;
                break;
            }
            lambda *= 0.5;
            assert!(lambda > 1e-12, "Newton oracle failed to damp");
        }
    }
    let r = residual(u, rho, p);
    assert!(norm(&r) < 1e-10, "Newton oracle residual {:?}", r);
    GasState {
        p,
        rho,
        u0: u,
        gamma: g,
    }
}

/// Critical speed squared `c*^2 = 2 (gamma-1) E / (gamma+1)`.
pub fn critical_speed_squared(e: f64, gamma: f64) -> f64 {
    2.0 * (gamma - 1.0) * e / (gamma + 1.0)
}

/// Downstream state through the quadratic-in-velocity route: eliminating
/// `rho` and `p` from the conservation laws leaves a quadratic whose two
/// roots are the upstream and downstream velocities.
pub fn rh_quadratic_oracle(up: &GasState) -> GasState {
    let g = up.gamma;
    let m = up.rho * up.u0;
    let mom = up.rho * up.u0 * up.u0 + up.p;
    let e = up.bernoulli_energy();
    let a = 0.5 - g / (g - 1.0);
    let b = g * mom / ((g - 1.0) * m);
    let c = -e;
    let disc = (b * b - 4.0 * a * c).sqrt();
    let r1 = (-b + disc) / (2.0 * a);
    let r2 = (-b - disc) / (2.0 * a);
    // The root further from the upstream velocity is the downstream one.
    let u = if (r1 - up.u0).abs() > (r2 - up.u0).abs() {
        r1
    } else {
        r2
    };
    GasState {
        p: mom - m * u,
        rho: m / u,
        u0: u,
        gamma: g,
    }
}

/// Reconstruct the state at radius `x` from the branch first integrals
/// `(mass_flux, energy, entropy)` by bisecting the density on the requested
/// branch of the energy equation.
pub fn state_from_integrals(
    mass_flux: f64,
    energy: f64,
    entropy: f64,
    x: f64,
    gamma: f64,
    supersonic: bool,
) -> GasState {
    let x2 = x * x;
    // Sonic density: where the kinetic and sonic terms balance.
    let rho_sonic = (mass_flux * mass_flux / (gamma * entropy * x2 * x2)).powf(1.0 / (gamma + 1.0));
    let gap = |rho: f64| -> f64 {
        energy
            - mass_flux * mass_flux / (2.0 * rho * rho * x2 * x2)
            - gamma * entropy * rho.powf(gamma - 1.0) / (gamma - 1.0)
    };
    let (mut lo, mut hi) = if supersonic {
        (rho_sonic * 1e-6, rho_sonic)
    } else {
        // Stagnation density bounds the subsonic branch from above.
        let rho_stag = ((gamma - 1.0) * energy / (gamma * entropy)).powf(1.0 / (gamma - 1.0));
        (rho_sonic, rho_stag)
    };
    assert!(
        gap(lo) * gap(hi) <= 0.0,
        "integral oracle bracket failed: gap({lo}) = {}, gap({hi}) = {}",
        gap(lo),
        gap(hi)
    );
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if gap(lo) * gap(mid) <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let rho = 0.5 * (lo + hi);
    GasState {
        p: entropy * rho.powf(gamma),
        rho,
        u0: mass_flux / (rho * x2),
        gamma,
    }
}

/// Root of `(2 gamma - 3) t^2 + 8 t - 3` in `(0,1)` by bisection.
pub fn t_star_bisect(gamma: f64) -> f64 {
    let q = |t: f64| (2.0 * gamma - 3.0) * t * t + 8.0 * t - 3.0;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    assert!(q(lo) < 0.0 && q(hi) > 0.0);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if q(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Relative gap helper.
pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}
