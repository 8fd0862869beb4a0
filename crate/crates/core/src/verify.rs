//! The verification suite: one check per shipped claim, each with a pinned
//! desk-scale configuration and a pinned tolerance. `cargo test` runs the
//! same suite through the `acceptance` integration test; the CLI exposes it
//! as the `verify` subcommand.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::analysis::{
    action_gradient_density, center_of_mass_report, empirical_constant, gradient_pairing,
    lagrangian_value, linear_fit, EnsembleFamily, EnsembleSpec,
};
use crate::conservation::{
    conserved_quantities, continuity_residual_norms, fit_continuity_coefficient, invariant_drift,
};
use crate::dynamics::{
    bright_soliton, evolve, galilean_boost, gaussian_packet, plane_wave, random_bandlimited,
    Integrator, NlsParams, SolverConfig,
};
use crate::error::Result;
use crate::grid::Grid1D;
use crate::io::write_ensemble_csv;

/// Outcome of one acceptance check. `pass` may be stricter than
/// `measured <= threshold` when a check has secondary conditions; those are
/// spelled out in `detail`.
#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: &'static str,
    pub pass: bool,
    pub measured: f64,
    pub threshold: f64,
    pub detail: String,
}

impl CheckResult {
    fn line(&self) -> String {
        format!(
            "{} {:<26} measured={:<12.3e} threshold={:<9.1e} {}",
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.measured,
            self.threshold,
            self.detail
        )
    }
}

/// Every acceptance check, in a fixed order, exactly once.
#[derive(Debug, Clone)]
pub struct VerifySuiteResult {
    pub checks: Vec<CheckResult>,
}

impl VerifySuiteResult {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

impl std::fmt::Display for VerifySuiteResult {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for c in &self.checks {
            writeln!(f, "{}", c.line())?;
        }
        let failed = self.checks.iter().filter(|c| !c.pass).count();
        write!(
            f,
            "{} checks, {} failed",
            self.checks.len(),
            failed
        )
    }
}

// Pinned desk-scale settings shared by several checks.
const N: usize = 256;
const L: f64 = 40.0;
const DT: f64 = 1e-3;

fn soliton_grid() -> Grid1D<f64> {
    Grid1D::new(N, L).expect("pinned grid is valid")
}

fn focusing() -> NlsParams<f64> {
    NlsParams::cubic(-1).expect("pinned params are valid")
}

fn defocusing() -> NlsParams<f64> {
    NlsParams::cubic(1).expect("pinned params are valid")
}

/// Run the full suite. `threads` caps the ensemble worker pool (0 = auto);
/// results are identical for any value.
pub fn run_acceptance_suite(threads: usize) -> Result<VerifySuiteResult> {
    let checks = vec![
        check_mass_conservation()?,
        check_momentum_conservation()?,
        check_energy_drift_order()?,
        check_plane_wave_exactness()?,
        check_soliton_oracle()?,
        check_continuity_coefficient()?,
        check_cross_integrator()?,
        check_action_gradient()?,
        check_inertial_center_of_mass()?,
        check_smoothing_ensemble(threads)?,
        check_invariant_spot_values()?,
    ];
    Ok(VerifySuiteResult { checks })
}

/// Soliton run to t = 10: relative mass drift stays at the roundoff floor.
fn check_mass_conservation() -> Result<CheckResult> {
    let grid = soliton_grid();
    let u0 = bright_soliton(1.0, 0.0, &grid, 0.0)?;
    let mut cfg = SolverConfig::new(DT, 10.0, Integrator::Strang, 100);
    cfg.dealias = false;
    let traj = evolve(&u0, &focusing(), &cfg)?;
    let drift = invariant_drift(&traj)?;
    let threshold = 1e-10;
    Ok(CheckResult {
        name: "mass-conservation",
        pass: drift.mass_drift <= threshold,
        measured: drift.mass_drift,
        threshold,
        detail: format!("soliton, t_end=10, dt={DT}"),
    })
}

/// Boosted Gaussian to t = 10: relative momentum drift bounded by the
/// aliasing floor of the nonlinear substep.
fn check_momentum_conservation() -> Result<CheckResult> {
    let grid = soliton_grid();
    let u0 = gaussian_packet(1.0, 0.0, 1.0, 1.0, &grid)?;
    let cfg = SolverConfig::new(DT, 10.0, Integrator::Strang, 100);
    let traj = evolve(&u0, &defocusing(), &cfg)?;
    let drift = invariant_drift(&traj)?;
    let threshold = 1e-8;
    Ok(CheckResult {
        name: "momentum-conservation",
        pass: drift.momentum_drift <= threshold,
        measured: drift.momentum_drift,
        threshold,
        detail: format!("gaussian k0=1, t_end=10, dt={DT}"),
    })
}

fn energy_drift_at(dt: f64, record_every: usize) -> Result<f64> {
    let grid = soliton_grid();
    let u0 = gaussian_packet(1.0, 0.0, 1.0, 1.0, &grid)?;
    let cfg = SolverConfig::new(dt, 2.0, Integrator::Strang, record_every);
    let traj = evolve(&u0, &defocusing(), &cfg)?;
    Ok(invariant_drift(&traj)?.energy_drift)
}

/// Energy drift of the splitting shrinks like dt^2: each halving divides it
/// by a factor inside [3.2, 4.8], checked for two consecutive halvings.
///
/// Run on a dispersing Gaussian packet. Soliton data is unusable here: a
/// soliton is a relative equilibrium, its splitting error is dominated by a
/// phase drift that leaves the energy untouched, and the residual energy
/// drift converges at fourth order (measured ratios ~16 and ~32).
fn check_energy_drift_order() -> Result<CheckResult> {
    let d0 = energy_drift_at(4e-3, 25)?;
    let d1 = energy_drift_at(2e-3, 50)?;
    let d2 = energy_drift_at(1e-3, 100)?;
    let r1 = d0 / d1;
    let r2 = d1 / d2;
    let measured = (r1 - 4.0).abs().max((r2 - 4.0).abs());
    let threshold = 0.8;
    Ok(CheckResult {
        name: "energy-drift-order",
        pass: measured <= threshold,
        measured,
        threshold,
        detail: format!("drifts [{d0:.3e}, {d1:.3e}, {d2:.3e}], ratios [{r1:.2}, {r2:.2}]"),
    })
}

/// Strang is exact on plane waves for any dt (the substep phases commute):
/// evolved field matches the dispersion-relation solution to roundoff.
fn check_plane_wave_exactness() -> Result<CheckResult> {
    let grid = Grid1D::new(64, std::f64::consts::TAU)?;
    let params = defocusing();
    let u0 = plane_wave(1.0, 2, &grid, &params, 0.0)?;
    let exact = plane_wave(1.0, 2, &grid, &params, 1.0)?;
    let mut worst = 0.0f64;
    for dt in [1e-2, 1e-3] {
        let cfg = SolverConfig::new(dt, 1.0, Integrator::Strang, 100);
        let traj = evolve(&u0, &params, &cfg)?;
        worst = worst.max(traj.final_state().max_abs_diff(&exact)?);
    }
    let threshold = 1e-12;
    Ok(CheckResult {
        name: "plane-wave-exactness",
        pass: worst <= threshold,
        measured: worst,
        threshold,
        detail: "A=1, k=2, L=2pi, t_end=1, dt in {1e-2, 1e-3}".into(),
    })
}

/// Soliton error at t = 1 under the analytic oracle, plus the global
/// second-order signature under two dt-halvings.
fn check_soliton_oracle() -> Result<CheckResult> {
    let grid = soliton_grid();
    let params = focusing();
    let u0 = bright_soliton(1.0, 0.0, &grid, 0.0)?;
    let exact = bright_soliton(1.0, 0.0, &grid, 1.0)?;
    let mut errs = Vec::new();
    for dt in [1e-3, 5e-4, 2.5e-4] {
        let cfg = SolverConfig::new(dt, 1.0, Integrator::Strang, 1000);
        let traj = evolve(&u0, &params, &cfg)?;
        errs.push(traj.final_state().max_abs_diff(&exact)?);
    }
    let order = ((errs[0] / errs[1]).log2() + (errs[1] / errs[2]).log2()) / 2.0;
    let threshold = 1e-6;
    let pass = errs[0] <= threshold && (order - 2.0).abs() <= 0.2;
    Ok(CheckResult {
        name: "soliton-oracle",
        pass,
        measured: errs[0],
        threshold,
        detail: format!("fitted order {order:.3} (want 2.0 +- 0.2)"),
    })
}

/// The continuity identity needs coefficient 2: the least-squares fit on
/// boosted-soliton data lands on 2 +- 0.01, the c=2 residual refines at
/// second order, and the literal c=1 residual does not converge to zero.
fn check_continuity_coefficient() -> Result<CheckResult> {
    let grid = soliton_grid();
    let params = focusing();
    let u0 = galilean_boost(&bright_soliton(1.0, 0.0, &grid, 0.0)?, 1.0);
    let coarse = evolve(&u0, &params, &SolverConfig::new(2e-3, 0.5, Integrator::Strang, 10))?;
    let fine = evolve(&u0, &params, &SolverConfig::new(1e-3, 0.5, Integrator::Strang, 10))?;

    let report = fit_continuity_coefficient(&fine)?;
    let c2_coarse = continuity_residual_norms(&coarse, 2.0)?.mass;
    let c2_fine = continuity_residual_norms(&fine, 2.0)?.mass;
    let c1_coarse = continuity_residual_norms(&coarse, 1.0)?.mass;
    let c1_fine = continuity_residual_norms(&fine, 1.0)?.mass;
    let order_c2 = (c2_coarse / c2_fine).log2();
    let shrink_c1 = (c1_coarse / c1_fine).log2();

    let measured = (report.c_fit - 2.0).abs();
    let threshold = 0.01;
    let pass = measured <= threshold
        && (order_c2 - 2.0).abs() <= 0.3
        && shrink_c1 < 0.5
        && c1_fine > 10.0 * c2_fine;
    Ok(CheckResult {
        name: "continuity-coefficient",
        pass,
        measured,
        threshold,
        detail: format!(
            "c_fit={:.5}; c=2 residual {c2_coarse:.3e}->{c2_fine:.3e} (order {order_c2:.2}); \
             c=1 residual {c1_coarse:.3e}->{c1_fine:.3e} (order {shrink_c1:.2}, stagnant)",
            report.c_fit
        ),
    })
}

/// The two integrators agree on the soliton at t = 1.
fn check_cross_integrator() -> Result<CheckResult> {
    let grid = soliton_grid();
    let params = focusing();
    let u0 = bright_soliton(1.0, 0.0, &grid, 0.0)?;
    let strang = evolve(&u0, &params, &SolverConfig::new(DT, 1.0, Integrator::Strang, 1000))?;
    let rk4 = evolve(&u0, &params, &SolverConfig::new(DT, 1.0, Integrator::Rk4, 1000))?;
    let measured = strang.final_state().max_abs_diff(rk4.final_state())?;
    let threshold = 1e-6;
    Ok(CheckResult {
        name: "cross-integrator-agreement",
        pass: measured <= threshold,
        measured,
        threshold,
        detail: "strang vs rk4, soliton, t=1".into(),
    })
}

/// Analytic action gradient vs central finite differences on ten seeded
/// random field/direction pairs.
fn check_action_gradient() -> Result<CheckResult> {
    let grid = Grid1D::new(128, 20.0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(2026);
    let eps = 1e-5;
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let u = random_bandlimited(&grid, 12, 1.0, &mut rng);
        let phi = random_bandlimited(&grid, 12, 1.0, &mut rng);
        let analytic = gradient_pairing(&action_gradient_density(&u)?, &phi)?;
        let ec = Complex64::new(eps, 0.0);
        let plus = lagrangian_value(&u.add_scaled(&phi, ec)?)?;
        let minus = lagrangian_value(&u.add_scaled(&phi, -ec)?)?;
        let numeric = (plus - minus) / (2.0 * eps);
        worst = worst.max((analytic - numeric).abs() / analytic.abs().max(1e-12));
    }
    let threshold = 1e-6;
    Ok(CheckResult {
        name: "action-gradient-check",
        pass: worst <= threshold,
        measured: worst,
        threshold,
        detail: "10 seeded random (u, phi) pairs, eps=1e-5".into(),
    })
}

/// With no external potential the center of mass moves on a straight line:
/// acceleration at the noise floor and slope equal to -2*momentum/mass.
/// Both sides of the Newton-type identity are reported, not asserted.
fn check_inertial_center_of_mass() -> Result<CheckResult> {
    let grid = soliton_grid();
    let params = defocusing();
    let u0 = gaussian_packet(1.0, 0.0, 1.0, 1.0, &grid)?;
    let cfg = SolverConfig::new(DT, 1.0, Integrator::Strang, 25);
    let traj = evolve(&u0, &params, &cfg)?;
    let report = center_of_mass_report(&traj)?;
    let q = conserved_quantities(&u0, &params, 0.0)?;
    let expect_slope = -2.0 * q.momentum / q.mass;
    let ts: Vec<f64> = report.xcm.iter().map(|&(t, _)| t).collect();
    let xs: Vec<f64> = report.xcm.iter().map(|&(_, x)| x).collect();
    let (slope, _) = linear_fit(&ts, &xs);
    let slope_err = (slope - expect_slope).abs();
    let identity_gap = report
        .eq32_lhs
        .iter()
        .zip(&report.eq32_rhs)
        .map(|(&l, &r)| (l - r).abs())
        .fold(0.0f64, f64::max);
    let threshold = 1e-6;
    let pass = report.xcm_accel_max <= threshold && slope_err <= 1e-4;
    Ok(CheckResult {
        name: "inertial-center-of-mass",
        pass,
        measured: report.xcm_accel_max,
        threshold,
        detail: format!(
            "slope err {slope_err:.2e} (tol 1e-4); identity sides differ by {identity_gap:.3} \
             (reported, not asserted)"
        ),
    })
}

/// 20-member seeded Gaussian ensemble: finite empirical constant, the bound
/// holds member-wise, every Poincaré side check holds, and the emitted CSV
/// is byte-identical across reruns with the same seed.
fn check_smoothing_ensemble(threads: usize) -> Result<CheckResult> {
    let grid = Grid1D::new(512, L)?;
    let params = defocusing();
    let spec = EnsembleSpec {
        family: EnsembleFamily::GaussianScan {
            amplitude: (0.5, 2.0),
            width: (0.5, 2.0),
            wave: (-4.0, 4.0),
            center: (-2.0, 2.0),
        },
        count: 20,
        seed: 42,
    };
    let cfg = SolverConfig::new(DT, 1.0, Integrator::Strang, 5);
    let first = empirical_constant(&spec, &grid, &params, &cfg, 0.0, threads)?;
    let second = empirical_constant(&spec, &grid, &params, &cfg, 0.0, threads)?;

    let mut bytes_a = Vec::new();
    let mut bytes_b = Vec::new();
    write_ensemble_csv(&mut bytes_a, &first.members)?;
    write_ensemble_csv(&mut bytes_b, &second.members)?;
    let reproducible = bytes_a == bytes_b;

    let constant = first.empirical_constant;
    let bound_holds = first
        .members
        .iter()
        .all(|m| m.lhs <= constant * m.grad_norm_sq * (1.0 + 1e-12));
    let poincare_holds = first
        .members
        .iter()
        .all(|m| m.poincare_lhs <= m.poincare_rhs * (1.0 + 1e-12));
    let pass = constant.is_finite()
        && bound_holds
        && poincare_holds
        && reproducible
        && first.members.len() == 20;
    Ok(CheckResult {
        name: "smoothing-ensemble",
        pass,
        measured: constant,
        threshold: f64::INFINITY,
        detail: format!(
            "20 members, seed 42; bound member-wise: {bound_holds}; poincare: {poincare_holds}; \
             byte-identical rerun: {reproducible}"
        ),
    })
}

/// Closed-form invariant values: plane wave (A=1, k=2, L=2pi) and the unit
/// soliton.
fn check_invariant_spot_values() -> Result<CheckResult> {
    let tau = std::f64::consts::TAU;
    let grid = Grid1D::new(64, tau)?;
    let params = defocusing();
    let wave = plane_wave(1.0, 2, &grid, &params, 0.0)?;
    let qw = conserved_quantities(&wave, &params, 0.0)?;

    let sgrid = soliton_grid();
    let sol = bright_soliton(1.0, 0.0, &sgrid, 0.0)?;
    let qs = conserved_quantities(&sol, &focusing(), 0.0)?;

    let deviations = [
        (qw.mass - tau).abs(),
        (qw.momentum + 2.0 * tau).abs(),
        (qw.energy - (4.0 * PI + PI / 2.0)).abs(),
        (qs.mass - 4.0).abs(),
        (qs.energy + 2.0 / 3.0).abs(),
    ];
    let measured = deviations.iter().copied().fold(0.0f64, f64::max);
    let threshold = 1e-10;
    Ok(CheckResult {
        name: "invariant-spot-checks",
        pass: measured <= threshold,
        measured,
        threshold,
        detail: "plane-wave mass/momentum/energy; soliton mass/energy".into(),
    })
}
