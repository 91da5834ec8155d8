//! Strict TOML run configuration.
//!
//! One file describes the whole experiment; unknown keys are rejected so a
//! typo cannot silently fall back to a default. The output directory is the
//! only setting an environment variable (`OMIDYN_OUT`) may override.

use std::fmt;
use std::path::{Path, PathBuf};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::model::{Gamma, SystemParams};
use crate::observables::InitialState;
use crate::spectrum::linspace;

/// Experiment selected by the CLI subcommand.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    Eigen,
    Dynamics,
    Spectrum,
    Longtime,
    Verify,
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Experiment::Eigen => "eigen",
            Experiment::Dynamics => "dynamics",
            Experiment::Spectrum => "spectrum",
            Experiment::Longtime => "longtime",
            Experiment::Verify => "verify",
        };
        f.write_str(name)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("cannot parse config: {0}")]
    Parse(String),
    #[error("invalid config field `{field}`: {reason}")]
    Validation { field: String, reason: String },
    #[error(transparent)]
    Numerics(#[from] Error),
    #[error("verification check `{check}` failed: max |analytic - oracle| = {error:.3e} >= {tolerance:.1e}")]
    VerificationFailed {
        check: String,
        error: f64,
        tolerance: f64,
    },
    #[error("i/o failure on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    /// Process exit status: 1 for numerical non-convergence or a failed
    /// verification, 2 for configuration or stability problems (and anything
    /// environmental).
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Numerics(Error::NonConvergence { .. }) => 1,
            CliError::VerificationFailed { .. } => 1,
            _ => 2,
        }
    }
}

fn invalid(field: &str, reason: impl Into<String>) -> CliError {
    CliError::Validation {
        field: field.to_string(),
        reason: reason.into(),
    }
}

// ---------------------------------------------------------------------------
// raw file schema

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    system: SystemSection,
    #[serde(default)]
    experiment: Option<Experiment>,
    #[serde(default)]
    state: Option<StateSection>,
    #[serde(default)]
    grid: GridSection,
    #[serde(default)]
    sweep: SweepSection,
    #[serde(default)]
    eigen: EigenSection,
    #[serde(default)]
    dynamics: DynamicsSection,
    #[serde(default)]
    spectrum: SpectrumSection,
    #[serde(default)]
    tolerances: ToleranceSection,
    #[serde(default)]
    output: OutputSection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SystemSection {
    omega_c: f64,
    omega_m: f64,
    g_l: f64,
    g_q: f64,
    gamma: GammaSpec,
}

/// A decoherence rate: a positive number or the string `"inf"`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GammaSpec {
    Rate(f64),
    Name(String),
}

impl GammaSpec {
    fn resolve(&self, field: &str) -> Result<Gamma, CliError> {
        match self {
            GammaSpec::Rate(g) => Gamma::from_f64(*g).map_err(CliError::Numerics),
            GammaSpec::Name(s) if s == "inf" => Ok(Gamma::Infinite),
            GammaSpec::Name(s) => Err(invalid(
                field,
                format!("expected a rate or \"inf\", got {s:?}"),
            )),
        }
    }

    pub fn from_gamma(g: Gamma) -> Self {
        match g {
            Gamma::Finite(v) => GammaSpec::Rate(v),
            Gamma::Infinite => GammaSpec::Name("inf".to_string()),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StateSection {
    kind: String,
    #[serde(default)]
    photons: Option<u32>,
    #[serde(default)]
    phonons: Option<u32>,
    #[serde(default)]
    alpha: Option<f64>,
    #[serde(default)]
    beta: Option<ComplexSpec>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexSpec {
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

impl From<ComplexSpec> for C64 {
    fn from(c: ComplexSpec) -> Self {
        C64::new(c.re, c.im)
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridSection {
    #[serde(default)]
    time: Option<RangeSpec>,
    #[serde(default)]
    omega: Option<RangeSpec>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RangeSpec {
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

impl RangeSpec {
    fn resolve(&self, field: &str) -> Result<Vec<f64>, CliError> {
        if !(self.start.is_finite() && self.stop.is_finite()) {
            return Err(invalid(field, "bounds must be finite"));
        }
        match self.steps {
            0 => Err(invalid(field, "steps must be >= 1")),
            1 => {
                if self.start == self.stop {
                    Ok(vec![self.start])
                } else {
                    Err(invalid(field, "steps = 1 requires start == stop"))
                }
            }
            _ => {
                if self.stop > self.start {
                    Ok(linspace(self.start, self.stop, self.steps))
                } else {
                    Err(invalid(field, "stop must exceed start"))
                }
            }
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepSection {
    #[serde(default)]
    g_l: Option<RangeSpec>,
    #[serde(default)]
    g_q: Option<RangeSpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EigenSection {
    photon_max: u32,
    phonon_max: u32,
}

impl Default for EigenSection {
    fn default() -> Self {
        Self {
            photon_max: 3,
            phonon_max: 3,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DynamicsSection {
    #[serde(default)]
    gammas: Option<Vec<GammaSpec>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpectrumSection {
    #[serde(default = "default_filter")]
    filter_linewidth: f64,
}

fn default_filter() -> f64 {
    0.01
}

impl Default for SpectrumSection {
    fn default() -> Self {
        Self {
            filter_linewidth: default_filter(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ToleranceSection {
    #[serde(default = "default_cutoff")]
    oracle_phonon_cutoff: usize,
    #[serde(default = "default_epsilon")]
    epsilon: f64,
    #[serde(default = "default_series_cap")]
    series_cap: u64,
}

fn default_cutoff() -> usize {
    80
}
fn default_epsilon() -> f64 {
    1e-6
}
fn default_series_cap() -> u64 {
    crate::coefficients::DEFAULT_SERIES_CAP
}

impl Default for ToleranceSection {
    fn default() -> Self {
        Self {
            oracle_phonon_cutoff: default_cutoff(),
            epsilon: default_epsilon(),
            series_cap: default_series_cap(),
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct OutputSection {
    #[serde(default)]
    dir: Option<PathBuf>,
    #[serde(default)]
    svg: bool,
}

// ---------------------------------------------------------------------------
// resolved configuration

/// Fully validated run description.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub system: SystemParams,
    pub state: InitialState,
    pub time_grid: Vec<f64>,
    pub omega_grid: Option<Vec<f64>>,
    pub sweep_g_l: Option<Vec<f64>>,
    pub sweep_g_q: Option<Vec<f64>>,
    pub eigen_photon_max: u32,
    pub eigen_phonon_max: u32,
    pub dynamics_gammas: Vec<Gamma>,
    pub filter_linewidth: f64,
    pub oracle_phonon_cutoff: usize,
    pub epsilon: f64,
    pub series_cap: u64,
    pub out_dir: PathBuf,
    pub svg: bool,
}

/// Command-line overrides applied after parsing.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out_dir: Option<PathBuf>,
    pub svg: bool,
}

/// Parse, validate, and resolve a config file for the given experiment.
pub fn load_config(
    path: &Path,
    experiment: Experiment,
    overrides: &Overrides,
) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let file: ConfigFile = toml::from_str(&text).map_err(|e| CliError::Parse(e.to_string()))?;
    resolve(file, experiment, overrides)
}

fn resolve(
    file: ConfigFile,
    experiment: Experiment,
    overrides: &Overrides,
) -> Result<RunConfig, CliError> {
    if let Some(declared) = file.experiment {
        if declared != experiment {
            return Err(invalid(
                "experiment",
                format!(
                    "config declares `{declared}` but the `{experiment}` subcommand was invoked"
                ),
            ));
        }
    }

    let gamma = file.system.gamma.resolve("system.gamma")?;
    let system = SystemParams::new(
        file.system.omega_c,
        file.system.omega_m,
        file.system.g_l,
        file.system.g_q,
        gamma,
    )?;

    let state = resolve_state(file.state.as_ref(), experiment)?;
    state.validate()?;

    let time_grid = match &file.grid.time {
        Some(spec) => {
            let g = spec.resolve("grid.time")?;
            if g[0] < 0.0 {
                return Err(invalid("grid.time", "times must be >= 0"));
            }
            g
        }
        None => linspace(0.0, 20.0, 201),
    };
    let omega_grid = file
        .grid
        .omega
        .as_ref()
        .map(|spec| spec.resolve("grid.omega"))
        .transpose()?;

    let sweep_g_l = file
        .sweep
        .g_l
        .as_ref()
        .map(|s| s.resolve("sweep.g_l"))
        .transpose()?;
    let sweep_g_q = file
        .sweep
        .g_q
        .as_ref()
        .map(|s| s.resolve("sweep.g_q"))
        .transpose()?;

    let dynamics_gammas = match &file.dynamics.gammas {
        Some(list) if !list.is_empty() => list
            .iter()
            .map(|g| g.resolve("dynamics.gammas"))
            .collect::<Result<Vec<_>, _>>()?,
        _ => vec![system.gamma],
    };

    if !(file.tolerances.epsilon > 0.0) {
        return Err(invalid("tolerances.epsilon", "must be positive"));
    }
    if file.tolerances.oracle_phonon_cutoff < 8 {
        return Err(invalid("tolerances.oracle_phonon_cutoff", "must be >= 8"));
    }
    if !(file.spectrum.filter_linewidth > 0.0) {
        return Err(invalid("spectrum.filter_linewidth", "must be positive"));
    }

    let out_dir = overrides
        .out_dir
        .clone()
        .or_else(|| std::env::var_os("OMIDYN_OUT").map(PathBuf::from))
        .or(file.output.dir.clone())
        .unwrap_or_else(|| PathBuf::from("runs"));

    let config = RunConfig {
        experiment,
        system,
        state,
        time_grid,
        omega_grid,
        sweep_g_l,
        sweep_g_q,
        eigen_photon_max: file.eigen.photon_max,
        eigen_phonon_max: file.eigen.phonon_max,
        dynamics_gammas,
        filter_linewidth: file.spectrum.filter_linewidth,
        oracle_phonon_cutoff: file.tolerances.oracle_phonon_cutoff,
        epsilon: file.tolerances.epsilon,
        series_cap: file.tolerances.series_cap,
        out_dir,
        svg: overrides.svg || file.output.svg,
    };
    check_stability(&config)?;
    Ok(config)
}

fn resolve_state(
    section: Option<&StateSection>,
    experiment: Experiment,
) -> Result<InitialState, CliError> {
    let Some(s) = section else {
        // eigen sweeps need no initial state; everything else defaults to a
        // single photon on an undisturbed mirror.
        return Ok(InitialState::NumberNumber {
            photons: 1,
            phonons: 0,
        });
    };
    let _ = experiment;
    match s.kind.as_str() {
        "number" => {
            forbid(
                s.alpha.is_some(),
                "state.alpha",
                "not used by kind = \"number\"",
            )?;
            forbid(
                s.beta.is_some(),
                "state.beta",
                "not used by kind = \"number\"",
            )?;
            Ok(InitialState::NumberNumber {
                photons: s.photons.unwrap_or(1),
                phonons: s.phonons.unwrap_or(0),
            })
        }
        "number-coherent" => {
            forbid(
                s.alpha.is_some(),
                "state.alpha",
                "not used by kind = \"number-coherent\"",
            )?;
            forbid(
                s.phonons.is_some(),
                "state.phonons",
                "not used by kind = \"number-coherent\"",
            )?;
            let beta = s
                .beta
                .ok_or_else(|| invalid("state.beta", "required for kind = \"number-coherent\""))?;
            Ok(InitialState::NumberCoherent {
                photons: s.photons.unwrap_or(1),
                beta: beta.into(),
            })
        }
        "coherent" => {
            forbid(
                s.photons.is_some(),
                "state.photons",
                "not used by kind = \"coherent\"",
            )?;
            forbid(
                s.phonons.is_some(),
                "state.phonons",
                "not used by kind = \"coherent\"",
            )?;
            let alpha = s
                .alpha
                .ok_or_else(|| invalid("state.alpha", "required for kind = \"coherent\""))?;
            let beta = s
                .beta
                .ok_or_else(|| invalid("state.beta", "required for kind = \"coherent\""))?;
            Ok(InitialState::CoherentCoherent {
                alpha,
                beta: beta.into(),
            })
        }
        other => Err(invalid(
            "state.kind",
            format!("expected \"number\", \"number-coherent\" or \"coherent\", got {other:?}"),
        )),
    }
}

fn forbid(present: bool, field: &str, reason: &str) -> Result<(), CliError> {
    if present {
        Err(invalid(field, reason))
    } else {
        Ok(())
    }
}

/// Reject configurations whose photon support contains an unstable sector,
/// citing the lowest offender.
fn check_stability(config: &RunConfig) -> Result<(), CliError> {
    match config.experiment {
        Experiment::Eigen => {
            let couplings = sweep_pairs(config);
            for (g_l, g_q) in couplings {
                let p = SystemParams {
                    g_l,
                    g_q,
                    ..config.system
                };
                for n in 0..=config.eigen_photon_max {
                    p.check_stability(n)?;
                }
            }
        }
        _ => {
            for (n, _) in config.state.sector_weights()? {
                config.system.check_stability(n)?;
            }
        }
    }
    Ok(())
}

/// The coupling grid an eigen sweep walks, in deterministic order.
pub fn sweep_pairs(config: &RunConfig) -> Vec<(f64, f64)> {
    match (&config.sweep_g_l, &config.sweep_g_q) {
        (Some(ls), Some(qs)) => {
            let mut out = Vec::with_capacity(ls.len() * qs.len());
            for &l in ls {
                for &q in qs {
                    out.push((l, q));
                }
            }
            out
        }
        (Some(ls), None) => ls.iter().map(|&l| (l, config.system.g_q)).collect(),
        (None, Some(qs)) => qs.iter().map(|&q| (config.system.g_l, q)).collect(),
        (None, None) => vec![(config.system.g_l, config.system.g_q)],
    }
}

/// Serializable snapshot of a resolved run for the metadata sidecar.
#[derive(Debug, Serialize)]
pub struct ResolvedSnapshot<'a> {
    pub library: &'a str,
    pub version: &'a str,
    pub experiment: String,
    pub omega_c: f64,
    pub omega_m: f64,
    pub g_l: f64,
    pub g_q: f64,
    pub gamma: String,
    pub state: String,
    pub time_grid_len: usize,
    pub omega_grid_len: usize,
    pub filter_linewidth: f64,
    pub oracle_phonon_cutoff: usize,
    pub epsilon: f64,
}

impl RunConfig {
    pub fn snapshot(&self, omega_grid_len: usize) -> ResolvedSnapshot<'_> {
        ResolvedSnapshot {
            library: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            experiment: self.experiment.to_string(),
            omega_c: self.system.omega_c,
            omega_m: self.system.omega_m,
            g_l: self.system.g_l,
            g_q: self.system.g_q,
            gamma: match self.system.gamma {
                Gamma::Finite(g) => format!("{g}"),
                Gamma::Infinite => "inf".to_string(),
            },
            state: format!("{:?}", self.state),
            time_grid_len: self.time_grid.len(),
            omega_grid_len,
            filter_linewidth: self.filter_linewidth,
            oracle_phonon_cutoff: self.oracle_phonon_cutoff,
            epsilon: self.epsilon,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_config(text: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(text.as_bytes()).unwrap();
        f
    }

    fn load(text: &str, experiment: Experiment) -> Result<RunConfig, CliError> {
        let f = write_config(text);
        load_config(f.path(), experiment, &Overrides::default())
    }

    #[test]
    fn minimal_config_fills_defaults() {
        let cfg = load(
            r#"
            [system]
            omega_c = 1.0
            omega_m = 1.0
            g_l = 1.0
            g_q = 1.0
            gamma = 1.0
            "#,
            Experiment::Dynamics,
        )
        .unwrap();
        assert_eq!(cfg.time_grid.len(), 201);
        assert_eq!(
            cfg.state,
            InitialState::NumberNumber {
                photons: 1,
                phonons: 0
            }
        );
        assert_eq!(cfg.oracle_phonon_cutoff, 80);
        assert_eq!(cfg.filter_linewidth, 0.01);
        assert_eq!(cfg.dynamics_gammas.len(), 1);
    }

    #[test]
    fn negative_mechanical_frequency_names_the_field() {
        let err = load(
            r#"
            [system]
            omega_c = 1.0
            omega_m = -1.0
            g_l = 0.0
            g_q = 0.0
            gamma = 1.0
            "#,
            Experiment::Dynamics,
        )
        .unwrap_err();
        assert!(err.to_string().contains("omega_m"), "{err}");
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn unknown_keys_are_named() {
        let err = load(
            r#"
            [system]
            omega_c = 1.0
            omega_m = 1.0
            g_l = 0.0
            g_q = 0.0
            gamma = 1.0
            typo_key = 3
            "#,
            Experiment::Dynamics,
        )
        .unwrap_err();
        assert!(err.to_string().contains("typo_key"), "{err}");
    }

    #[test]
    fn unstable_coherent_support_cites_first_sector() {
        let err = load(
            r#"
            [system]
            omega_c = 1.0
            omega_m = 1.0
            g_l = 0.0
            g_q = -0.3
            gamma = 1.0

            [state]
            kind = "coherent"
            alpha = 2.0
            beta = { re = 0.0 }
            "#,
            Experiment::Dynamics,
        )
        .unwrap_err();
        match err {
            CliError::Numerics(Error::Stability { photons, .. }) => assert_eq!(photons, 1),
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn gamma_inf_is_accepted() {
        let cfg = load(
            r#"
            [system]
            omega_c = 1.0
            omega_m = 1.0
            g_l = 1.0
            g_q = 0.0
            gamma = "inf"
            "#,
            Experiment::Dynamics,
        )
        .unwrap();
        assert_eq!(cfg.system.gamma, Gamma::Infinite);
    }

    #[test]
    fn experiment_tag_mismatch_is_rejected() {
        let err = load(
            r#"
            experiment = "spectrum"
            [system]
            omega_c = 1.0
            omega_m = 1.0
            g_l = 1.0
            g_q = 0.0
            gamma = 1.0
            "#,
            Experiment::Dynamics,
        )
        .unwrap_err();
        assert!(err.to_string().contains("spectrum"), "{err}");
    }

    #[test]
    fn single_point_grid_requires_matching_bounds() {
        let ok = load(
            r#"
            [system]
            omega_c = 1.0
            omega_m = 1.0
            g_l = 1.0
            g_q = 0.0
            gamma = 1.0
            [grid]
            time = { start = 0.0, stop = 0.0, steps = 1 }
            "#,
            Experiment::Dynamics,
        )
        .unwrap();
        assert_eq!(ok.time_grid, vec![0.0]);

        let err = load(
            r#"
            [system]
            omega_c = 1.0
            omega_m = 1.0
            g_l = 1.0
            g_q = 0.0
            gamma = 1.0
            [grid]
            time = { start = 0.0, stop = 5.0, steps = 1 }
            "#,
            Experiment::Dynamics,
        )
        .unwrap_err();
        assert!(err.to_string().contains("grid.time"));
    }

    #[test]
    fn mixed_gamma_list_resolves() {
        let cfg = load(
            r#"
            [system]
            omega_c = 1.0
            omega_m = 1.0
            g_l = 1.0
            g_q = 0.0
            gamma = 1.0
            [dynamics]
            gammas = [0.5, 2.0, "inf"]
            "#,
            Experiment::Dynamics,
        )
        .unwrap();
        assert_eq!(
            cfg.dynamics_gammas,
            vec![Gamma::Finite(0.5), Gamma::Finite(2.0), Gamma::Infinite]
        );
    }
}
