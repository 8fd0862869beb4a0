//! JSON run configuration: strict schema (unknown keys rejected at every
//! level), no defaults for physics parameters — only output paths default.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use nlslab_core::analysis::{EnsembleFamily, EnsembleSpec};
use nlslab_core::dynamics::{
    bright_soliton, gaussian_packet, plane_wave, soliton_tail_amplitude, Integrator,
};
use nlslab_core::io::field_from_csv;
use nlslab_core::{ComplexField, Grid, Params, SolverConfig};

use crate::CliError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub grid: GridConfig,
    pub params: ParamsConfig,
    /// Required by `run`, `convergence` and `variational`; the `smoothing`
    /// command generates its own members and ignores it.
    pub initial: Option<InitialConfig>,
    pub solver: SolverSection,
    #[serde(default)]
    pub outputs: OutputsConfig,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n: usize,
    pub length: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsConfig {
    pub sigma: i32,
    pub lambda: f64,
    pub p: u32,
}

/// Initial datum, externally tagged:
/// `{"soliton": {"a": 1.0, "x0": 0.0}}`, `{"plane_wave": {"A": 1.0, "k_index": 2}}`,
/// `{"gaussian": {"A": 1.0, "x0": 0.0, "k0": 1.0, "w": 1.0}}`,
/// `{"file": {"path": "u0.csv"}}`.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub enum InitialConfig {
    PlaneWave(PlaneWaveInit),
    Soliton(SolitonInit),
    Gaussian(GaussianInit),
    File(FileInit),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlaneWaveInit {
    #[serde(rename = "A")]
    pub amplitude: f64,
    pub k_index: i64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolitonInit {
    pub a: f64,
    pub x0: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianInit {
    #[serde(rename = "A")]
    pub amplitude: f64,
    pub x0: f64,
    pub k0: f64,
    pub w: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileInit {
    pub path: PathBuf,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub dt: f64,
    pub t_end: f64,
    pub integrator: IntegratorConfig,
    pub record_every: usize,
    #[serde(default)]
    pub dealias: bool,
    /// Disable the nonlinear term (free dispersive flow). Off by default.
    #[serde(default)]
    pub linear: bool,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntegratorConfig {
    Strang,
    Rk4,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputsConfig {
    /// Defaults to `diagnostics.csv` inside the output directory.
    #[serde(default)]
    pub diagnostics_path: Option<PathBuf>,
    /// Where `--dump-fields` writes snapshots; defaults to `fields/` inside
    /// the output directory.
    #[serde(default)]
    pub fields_dir: Option<PathBuf>,
}

/// Ensemble description for the smoothing harness. Range fields are
/// `[lo, hi]` pairs; which ones are required depends on `family`.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleConfig {
    pub family: String,
    pub count: usize,
    pub seed: u64,
    #[serde(rename = "A")]
    pub amplitude: Option<[f64; 2]>,
    pub w: Option<[f64; 2]>,
    pub k0: Option<[f64; 2]>,
    pub x0: Option<[f64; 2]>,
    pub band: Option<usize>,
}

/// Everything a command needs, validated and converted to core types.
pub struct BuiltRun {
    pub grid: Grid,
    pub params: Params,
    pub solver: SolverConfig,
    pub initial: Option<ComplexField>,
    pub diagnostics_path: Option<PathBuf>,
    pub fields_dir: Option<PathBuf>,
}

impl BuiltRun {
    pub fn require_initial(&self) -> Result<&ComplexField, CliError> {
        self.initial
            .as_ref()
            .ok_or_else(|| config_err("initial", "required for this command"))
    }
}

fn config_err(key: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{key}: {msg}"))
}

pub fn load_run_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

pub fn load_ensemble_config(path: &Path) -> Result<EnsembleConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

impl RunConfig {
    /// Validate every module precondition before any computation runs.
    /// `config_dir` anchors relative paths in the `file` initial datum.
    pub fn build(&self, config_dir: &Path) -> Result<BuiltRun, CliError> {
        let grid =
            Grid::new(self.grid.n, self.grid.length).map_err(|e| match e {
                nlslab_core::Error::InvalidGridSize(_) => config_err("grid.n", e),
                _ => config_err("grid.length", e),
            })?;
        let params = Params::new(self.params.sigma, self.params.lambda, self.params.p)
            .map_err(|e| match e {
                nlslab_core::Error::InvalidSigma(_) => config_err("params.sigma", e),
                nlslab_core::Error::InvalidLambda(_) => config_err("params.lambda", e),
                _ => config_err("params.p", e),
            })?;
        let mut solver = SolverConfig::new(
            self.solver.dt,
            self.solver.t_end,
            match self.solver.integrator {
                IntegratorConfig::Strang => Integrator::Strang,
                IntegratorConfig::Rk4 => Integrator::Rk4,
            },
            self.solver.record_every,
        );
        solver.dealias = self.solver.dealias;
        solver.linear = self.solver.linear;
        solver.validate(&grid).map_err(|e| match e {
            nlslab_core::Error::InvalidTimeStep(_) => config_err("solver.dt", e),
            nlslab_core::Error::InvalidTimeSpan { .. } => config_err("solver.t_end", e),
            nlslab_core::Error::InvalidRecordCadence => config_err("solver.record_every", e),
            _ => config_err("solver.dt", e),
        })?;

        let initial = match &self.initial {
            None => None,
            Some(InitialConfig::PlaneWave(c)) => Some(
                plane_wave(c.amplitude, c.k_index, &grid, &params, 0.0)
                    .map_err(|e| config_err("initial.plane_wave.k_index", e))?,
            ),
            Some(InitialConfig::Soliton(c)) => {
                let field = bright_soliton(c.a, c.x0, &grid, 0.0)
                    .map_err(|e| config_err("initial.soliton.a", e))?;
                let tail = soliton_tail_amplitude(c.a, &grid);
                if tail > 1e-10 {
                    eprintln!(
                        "warning: soliton tail amplitude at the box edge is {tail:.2e} \
                         (above 1e-10); truncation error may be visible in tight oracles"
                    );
                }
                Some(field)
            }
            Some(InitialConfig::Gaussian(c)) => Some(
                gaussian_packet(c.amplitude, c.x0, c.k0, c.w, &grid).map_err(|e| match e {
                    nlslab_core::Error::UnderResolvedWidth { .. } => {
                        config_err("initial.gaussian.w", e)
                    }
                    _ => config_err("initial.gaussian.x0", e),
                })?,
            ),
            Some(InitialConfig::File(c)) => {
                let path = if c.path.is_absolute() {
                    c.path.clone()
                } else {
                    config_dir.join(&c.path)
                };
                Some(field_from_csv(&grid, &path).map_err(|e| config_err("initial.file.path", e))?)
            }
        };

        Ok(BuiltRun {
            grid,
            params,
            solver,
            initial,
            diagnostics_path: self.outputs.diagnostics_path.clone(),
            fields_dir: self.outputs.fields_dir.clone(),
        })
    }
}

impl EnsembleConfig {
    pub fn build(&self) -> Result<EnsembleSpec<f64>, CliError> {
        if self.count == 0 {
            return Err(config_err("count", "must be at least 1"));
        }
        let range = |name: &str, v: &Option<[f64; 2]>| -> Result<(f64, f64), CliError> {
            match v {
                Some([lo, hi]) if lo.is_finite() && hi.is_finite() && lo <= hi => Ok((*lo, *hi)),
                Some([lo, hi]) => Err(config_err(name, format!("invalid range [{lo}, {hi}]"))),
                None => Err(config_err(
                    name,
                    format!("required for family {:?}", self.family),
                )),
            }
        };
        let family = match self.family.as_str() {
            "gaussian_grid_scan" => {
                if self.band.is_some() {
                    return Err(config_err("band", "not a gaussian_grid_scan parameter"));
                }
                EnsembleFamily::GaussianScan {
                    amplitude: range("A", &self.amplitude)?,
                    width: range("w", &self.w)?,
                    wave: range("k0", &self.k0)?,
                    center: range("x0", &self.x0)?,
                }
            }
            "random_bandlimited" => {
                if self.w.is_some() || self.k0.is_some() || self.x0.is_some() {
                    return Err(config_err(
                        "w/k0/x0",
                        "not random_bandlimited parameters",
                    ));
                }
                let band = self
                    .band
                    .ok_or_else(|| config_err("band", "required for family random_bandlimited"))?;
                if band == 0 {
                    return Err(config_err("band", "must be at least 1"));
                }
                EnsembleFamily::RandomBandlimited {
                    band,
                    amplitude: range("A", &self.amplitude)?,
                }
            }
            other => {
                return Err(config_err(
                    "family",
                    format!(
                        "unknown family {other:?}; expected gaussian_grid_scan or random_bandlimited"
                    ),
                ))
            }
        };
        Ok(EnsembleSpec {
            family,
            count: self.count,
            seed: self.seed,
        })
    }
}
