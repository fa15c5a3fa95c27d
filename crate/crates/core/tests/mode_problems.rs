//! Mode-problem studies beyond the acceptance gate: a constructed failing
//! case, margin continuity, and the Hopf monotonicity structure.

use shockshell::background::{find_shock_position, SolverOptions};
use shockshell::gas::GasState;
use shockshell::interp::linspace;
use shockshell::linearize::{
    coefficient_profiles, compute_mu, e1_of, e2_of, e3_of, e4_of, CoefficientProfiles,
};
use shockshell::scondition::{
    check_s_condition_with, enumerate_modes, hopf_excludes, mode_margin, ModePolicy, OverallVerdict,
};

fn reference_parts() -> (CoefficientProfiles, shockshell::linearize::MuCoefficients) {
    let inflow = GasState::from_mach(1.0, 1.0, 2.0, 1.4).unwrap();
    let opts = SolverOptions::default();
    let bg = find_shock_position(&inflow, 3.5, 1.0, 2.0, &opts).unwrap();
    let mus = compute_mu(&bg).unwrap();
    let profiles = coefficient_profiles(&bg, 513).unwrap();
    (profiles, mus)
}

/// Scale `e4` by the factor that zeroes the terminal value at `n = 1`.
/// The margin is affine in the scale (the problem is linear), so the root
/// is found by a secant step and confirmed by bisection refinement.
#[test]
fn constructed_zero_margin_fails_at_n1() {
    let (profiles, mus) = reference_parts();
    let opts = SolverOptions::default();

    let scaled = |s: f64| -> CoefficientProfiles {
        let mut p = profiles.clone();
        for v in &mut p.e4 {
            *v *= s;
        }
        p
    };
    let margin_at = |s: f64| mode_margin(1, &scaled(s), &mus, &opts).unwrap();

    let m0 = margin_at(0.0);
    let m1 = margin_at(1.0);
    let mut s_star = -m0 / (m1 - m0);
    // Bisection refinement around the secant estimate.
    let (mut lo, mut hi) = (s_star - 0.5, s_star + 0.5);
    assert!(margin_at(lo) * margin_at(hi) < 0.0, "root not bracketed");
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if margin_at(lo) * margin_at(mid) <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    s_star = 0.5 * (lo + hi);
    assert!(margin_at(s_star).abs() < 1e-10);

    let report =
        check_s_condition_with(&scaled(s_star), &mus, None, &ModePolicy { n_max: 8 }, &opts)
            .unwrap();
    assert_eq!(report.overall, OverallVerdict::Fails { n: 1 });
}

#[test]
fn margin_continuous_along_back_pressure_sweep() {
    let inflow = GasState::from_mach(1.0, 1.0, 2.0, 1.4).unwrap();
    let opts = SolverOptions::default();
    let mut margins = Vec::new();
    for k in 0..15 {
        let p_back = 2.0 + 3.0 * k as f64 / 14.0; // interior of (1.46, 5.58)
        let bg = find_shock_position(&inflow, p_back, 1.0, 2.0, &opts).unwrap();
        let mus = compute_mu(&bg).unwrap();
        let profiles = coefficient_profiles(&bg, 257).unwrap();
        margins.push(mode_margin(1, &profiles, &mus, &opts).unwrap());
    }
    let range = margins.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - margins.iter().cloned().fold(f64::INFINITY, f64::min);
    for w in margins.windows(2) {
        assert!(
            (w[1] - w[0]).abs() < 0.25 * range.max(1e-6),
            "jump in margin sweep: {margins:?}"
        );
        // No sign change is skipped: adjacent values of equal sign here.
        assert!(w[0] * w[1] > 0.0, "unexpected sign change: {margins:?}");
    }
}

#[test]
fn hopf_exclusion_monotone_in_mode_index() {
    let (profiles, mus) = reference_parts();
    let n0 = (0..=32)
        .find(|&n| hopf_excludes(n, &profiles, &mus))
        .unwrap();
    for n in 0..n0 {
        assert!(!hopf_excludes(n, &profiles, &mus));
    }
    for n in n0..=32 {
        assert!(hopf_excludes(n, &profiles, &mus), "n = {n}");
    }
}

/// The printed Hopf conditions on a synthetic small-t branch: mode 4 clears
/// all three, mode 0 never does.
#[test]
fn hopf_small_t_synthetic_branch() {
    let n = 257;
    let grid = linspace(0.0, 1.0, n);
    let gamma = 1.4;
    let t_s = 0.1;
    let kappa = 0.5;
    let r_b = 1.5;
    let mut t = Vec::new();
    let mut rho = Vec::new();
    let mut e = [vec![], vec![], vec![], vec![]];
    for &y in &grid {
        let ti = t_s * (1.0 - 0.5 * y);
        let x0 = r_b + kappa * y;
        let rhoi = 1.0 + 0.2 * y;
        t.push(ti);
        rho.push(rhoi);
        e[0].push(e1_of(x0, ti));
        e[1].push(e2_of(gamma, x0, ti));
        e[2].push(e3_of(gamma, ti));
        e[3].push(e4_of(gamma, ti, t_s, rhoi, 1.0));
    }
    let profiles =
        CoefficientProfiles::from_parts(gamma, kappa, t_s, r_b, r_b + kappa, 1.0, grid, t, rho, e)
            .unwrap();
    let mus = {
        let (_, mus) = reference_parts();
        mus
    };
    // sup e3 just above 12 is impossible here: e3 < 12 for t > 0.
    assert!(profiles.sup_e3() < 12.0);
    assert!(profiles.max_e4() < 0.0);
    assert!(hopf_excludes(4, &profiles, &mus));
    assert!(!hopf_excludes(0, &profiles, &mus));
}

#[test]
fn margin_matches_refined_reference() {
    let (profiles, mus) = reference_parts();
    let coarse = SolverOptions::default();
    let fine = SolverOptions {
        ode_rel: 1e-12,
        ode_abs: 1e-14,
        ..coarse
    };
    for n in [1u32, 4] {
        let a = mode_margin(n, &profiles, &mus, &coarse).unwrap();
        let b = mode_margin(n, &profiles, &mus, &fine).unwrap();
        assert!(
            (a - b).abs() < 1e-8 * b.abs().max(1.0),
            "n = {n}: {a} vs {b}"
        );
    }
}

#[test]
fn mode_table_matches_sphere_spectrum() {
    let modes = enumerate_modes(12);
    assert_eq!(modes.len(), 13);
    for (n, lam, mult) in modes {
        assert_eq!(lam, n as u64 * (n as u64 + 1));
        assert_eq!(mult, 2 * n + 1);
    }
}
