use std::path::{Path, PathBuf};
use std::process::ExitCode;

use nlslab_core::analysis::{center_of_mass_report, empirical_constant};
use nlslab_core::conservation::invariant_drift;
use nlslab_core::dynamics::evolve;
use nlslab_core::io::{
    write_convergence_csv_file, write_diagnostics_csv_file, write_ensemble_csv_file,
    write_field_csv_file, write_variational_csv_file, ConvergenceRow,
};
use nlslab_core::spectral::{dft, inverse_dft};
use nlslab_core::verify::run_acceptance_suite;
use nlslab_core::{ComplexField, Grid};

use crate::config::{
    load_ensemble_config, load_run_config, BuiltRun, InitialConfig, RunConfig,
};
use crate::{CliError, CommonRunArgs};

fn prepare(common: &CommonRunArgs) -> Result<(RunConfig, BuiltRun), CliError> {
    let config = load_run_config(&common.config)?;
    let config_dir = common
        .config
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("."));
    let mut built = config.build(&config_dir)?;
    if common.dealias {
        built.solver.dealias = true;
    }
    std::fs::create_dir_all(&common.out)
        .map_err(|e| CliError::Other(format!("{}: {e}", common.out.display())))?;
    Ok((config, built))
}

fn out_path(out: &Path, configured: &Option<PathBuf>, default: &str) -> PathBuf {
    match configured {
        Some(p) if p.is_absolute() => p.clone(),
        Some(p) => out.join(p),
        None => out.join(default),
    }
}

pub fn run(common: &CommonRunArgs, dump_fields: bool) -> Result<ExitCode, CliError> {
    let (_, built) = prepare(common)?;
    let u0 = built.require_initial()?;
    let traj = evolve(u0, &built.params, &built.solver)?;
    let report = invariant_drift(&traj)?;

    let diag_path = out_path(&common.out, &built.diagnostics_path, "diagnostics.csv");
    write_diagnostics_csv_file(&diag_path, &report.series)?;
    println!(
        "wrote {} ({} records, t_end = {})",
        diag_path.display(),
        traj.len(),
        traj.final_time()
    );
    println!(
        "max relative drifts: mass {:.3e}, momentum {:.3e}, energy {:.3e}",
        report.mass_drift, report.momentum_drift, report.energy_drift
    );

    if dump_fields {
        let dir = out_path(&common.out, &built.fields_dir, "fields");
        std::fs::create_dir_all(&dir)
            .map_err(|e| CliError::Other(format!("{}: {e}", dir.display())))?;
        for (i, state) in traj.states().iter().enumerate() {
            write_field_csv_file(&dir.join(format!("snapshot_{i:05}.csv")), state)?;
        }
        println!("wrote {} field snapshots to {}", traj.len(), dir.display());
    }
    Ok(ExitCode::SUCCESS)
}

pub fn verify(threads: usize) -> Result<ExitCode, CliError> {
    let result = run_acceptance_suite(threads)?;
    println!("{result}");
    Ok(if result.all_pass() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

pub fn smoothing(
    common: &CommonRunArgs,
    ensemble_path: &Path,
    x0: f64,
    seed: Option<u64>,
    threads: usize,
) -> Result<ExitCode, CliError> {
    let (_, built) = prepare(common)?;
    let mut spec = load_ensemble_config(ensemble_path)?.build()?;
    if let Some(seed) = seed {
        spec.seed = seed;
    }

    let nls = empirical_constant(&spec, &built.grid, &built.params, &built.solver, x0, threads)?;
    let mut linear_solver = built.solver;
    linear_solver.linear = true;
    let linear =
        empirical_constant(&spec, &built.grid, &built.params, &linear_solver, x0, threads)?;

    for report in [&nls, &linear] {
        for &idx in &report.excluded {
            eprintln!("warning: member {idx} is degenerate (zero gradient norm); excluded");
        }
    }

    write_ensemble_csv_file(&common.out.join("smoothing_ensemble.csv"), &nls.members)?;
    write_ensemble_csv_file(
        &common.out.join("smoothing_ensemble_linear.csv"),
        &linear.members,
    )?;
    merge_summary(
        &common.out.join("summary.json"),
        &[
            ("empirical_constant", nls.empirical_constant.into()),
            (
                "empirical_constant_linear",
                linear.empirical_constant.into(),
            ),
        ],
    )?;
    println!(
        "{} members, seed {}: empirical constant {:.6e} (cubic), {:.6e} (linear)",
        spec.count, spec.seed, nls.empirical_constant, linear.empirical_constant
    );
    println!("wrote smoothing_ensemble.csv, smoothing_ensemble_linear.csv, summary.json");
    Ok(ExitCode::SUCCESS)
}

pub fn convergence(common: &CommonRunArgs, halvings: u32) -> Result<ExitCode, CliError> {
    let (config, built) = prepare(common)?;
    let u0 = built.require_initial()?;

    // record only the final state; intermediate records are not needed here
    let mut solver = built.solver;
    solver.record_every = usize::MAX;

    let mut finals = Vec::new();
    for level in 0..=halvings {
        let mut s = solver;
        s.dt = solver.dt / f64::powi(2.0, level as i32);
        let traj = evolve(u0, &built.params, &s)?;
        finals.push((s.dt, traj.final_time(), traj.final_state().clone()));
    }

    let reference = analytic_reference(&config, &built, finals[0].1)?;
    let reference = match reference {
        Some(r) => r,
        None => {
            // self-convergence: one more halving as the reference solution
            let mut s = solver;
            s.dt = solver.dt / f64::powi(2.0, halvings as i32 + 1);
            let traj = evolve(u0, &built.params, &s)?;
            traj.final_state().clone()
        }
    };

    let mut rows: Vec<ConvergenceRow> = Vec::new();
    for (level, (dt, _, state)) in finals.iter().enumerate() {
        let error = state.max_abs_diff(&reference)?;
        let ratio = if level == 0 {
            f64::NAN
        } else {
            rows[level - 1].error / error
        };
        rows.push(ConvergenceRow {
            level: level as u32,
            dt: *dt,
            error,
            ratio,
        });
    }

    let levels: Vec<f64> = (0..rows.len()).map(|i| i as f64).collect();
    let logs: Vec<f64> = rows.iter().map(|r| r.error.log2()).collect();
    let (slope, _) = nlslab_core::analysis::linear_fit(&levels, &logs);
    let order = -slope;

    println!("level  dt            max_error     ratio");
    for r in &rows {
        if r.ratio.is_nan() {
            println!("{:<6} {:<13.6e} {:<13.6e} -", r.level, r.dt, r.error);
        } else {
            println!(
                "{:<6} {:<13.6e} {:<13.6e} {:.3}",
                r.level, r.dt, r.error, r.ratio
            );
        }
    }
    println!("fitted order: {order:.3}");
    write_convergence_csv_file(&common.out.join("convergence.csv"), &rows)?;
    println!("wrote convergence.csv");
    Ok(ExitCode::SUCCESS)
}

/// Exact reference at the final time when one is known: plane waves (any
/// sign), the standing soliton (focusing, nonlinear), and any datum under
/// the linear flow (exact spectral propagation).
fn analytic_reference(
    config: &RunConfig,
    built: &BuiltRun,
    t_final: f64,
) -> Result<Option<ComplexField>, CliError> {
    if built.solver.linear {
        let u0 = built.require_initial()?;
        return Ok(Some(free_flow(&built.grid, u0, t_final)?));
    }
    match &config.initial {
        Some(InitialConfig::PlaneWave(c)) => Ok(Some(nlslab_core::dynamics::plane_wave(
            c.amplitude,
            c.k_index,
            &built.grid,
            &built.params,
            t_final,
        )?)),
        Some(InitialConfig::Soliton(c)) if built.params.sigma() == -1 => Ok(Some(
            nlslab_core::dynamics::bright_soliton(c.a, c.x0, &built.grid, t_final)?,
        )),
        _ => Ok(None),
    }
}

/// Exact free (linear) evolution: multiply each mode by `exp(-i k^2 t)`.
fn free_flow(grid: &Grid, u0: &ComplexField, t: f64) -> Result<ComplexField, CliError> {
    let mut spectrum = dft(u0);
    for (z, &k) in spectrum.iter_mut().zip(grid.wavenumbers()) {
        *z *= nlslab_core::Complex64::from_polar(1.0, -k * k * t);
    }
    Ok(inverse_dft(grid, &spectrum)?)
}

pub fn variational(common: &CommonRunArgs) -> Result<ExitCode, CliError> {
    let (_, built) = prepare(common)?;
    let u0 = built.require_initial()?;
    let traj = evolve(u0, &built.params, &built.solver)?;
    let report = center_of_mass_report(&traj)?;

    write_variational_csv_file(&common.out.join("variational.csv"), &report)?;
    merge_summary(
        &common.out.join("summary.json"),
        &[
            ("action", report.action.into()),
            ("xcm_accel_max", report.xcm_accel_max.into()),
        ],
    )?;
    println!(
        "action = {:.12e}, xcm_accel_max = {:.3e} over {} records",
        report.action,
        report.xcm_accel_max,
        report.xcm.len()
    );
    println!("wrote variational.csv, summary.json");
    Ok(ExitCode::SUCCESS)
}

/// Insert keys into `summary.json`, keeping whatever other keys are present.
/// The map is sorted, so the file is byte-deterministic.
fn merge_summary(path: &Path, entries: &[(&str, serde_json::Value)]) -> Result<(), CliError> {
    let mut map: serde_json::Map<String, serde_json::Value> = if path.exists() {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Other(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).unwrap_or_default()
    } else {
        serde_json::Map::new()
    };
    for (key, value) in entries {
        map.insert((*key).to_string(), value.clone());
    }
    let text = serde_json::to_string_pretty(&serde_json::Value::Object(map))
        .map_err(|e| CliError::Other(e.to_string()))?;
    std::fs::write(path, text + "\n")
        .map_err(|e| CliError::Other(format!("{}: {e}", path.display())))?;
    Ok(())
}
