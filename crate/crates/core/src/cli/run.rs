//! Experiment drivers behind the CLI subcommands.

use std::path::{Path, PathBuf};

use num_complex::Complex64 as C64;

use super::config::{sweep_pairs, CliError, Experiment, RunConfig};
use super::output::{self, fmt_f64, Csv, Series};
use crate::model::{Gamma, SystemParams};
use crate::observables::{dynamics_sweep, InitialState};
use crate::oracle;
use crate::spectrum::{
    self, correlation, longtime_spectrum, spectrum_coherent, spectrum_number, SpectrumParams,
};
use crate::{coefficients, observables};

/// Artifacts written by a run.
#[derive(Debug, Default)]
pub struct RunSummary {
    pub files: Vec<PathBuf>,
    /// Verification rows when the experiment was `verify`.
    pub checks: Vec<CheckRow>,
}

#[derive(Debug, Clone)]
pub struct CheckRow {
    pub check: String,
    pub max_abs_error: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Execute a resolved configuration, writing artifacts under its output
/// directory.
pub fn run(config: &RunConfig) -> Result<RunSummary, CliError> {
    std::fs::create_dir_all(&config.out_dir).map_err(|source| CliError::Io {
        path: config.out_dir.clone(),
        source,
    })?;
    let mut summary = match config.experiment {
        Experiment::Eigen => run_eigen(config)?,
        Experiment::Dynamics => run_dynamics(config)?,
        Experiment::Spectrum => run_spectrum(config)?,
        Experiment::Longtime => run_longtime(config)?,
        Experiment::Verify => run_verify(config)?,
    };
    let sidecar = config
        .out_dir
        .join(format!("{}.meta.toml", config.experiment));
    let omega_len = config.omega_grid.as_ref().map_or(0, Vec::len);
    let snapshot = toml::to_string_pretty(&config.snapshot(omega_len))
        .expect("sidecar serialization is infallible");
    output::write_atomic(&sidecar, snapshot.as_bytes())?;
    summary.files.push(sidecar);
    Ok(summary)
}

fn run_eigen(config: &RunConfig) -> Result<RunSummary, CliError> {
    let mut csv = Csv::new(&["n", "N", "g_l", "g_q", "energy"]);
    let mut curves: Vec<Series> = Vec::new();
    let pairs = sweep_pairs(config);
    for n in 0..=config.eigen_photon_max {
        for big_n in 0..=config.eigen_phonon_max {
            let mut points = Vec::with_capacity(pairs.len());
            for &(g_l, g_q) in &pairs {
                let p = SystemParams {
                    g_l,
                    g_q,
                    ..config.system
                };
                let energy = p.eigenvalue(n, big_n)?;
                csv.row(&[
                    n.to_string(),
                    big_n.to_string(),
                    fmt_f64(g_l),
                    fmt_f64(g_q),
                    fmt_f64(energy),
                ]);
                // plot against whichever coupling sweeps (first one wins)
                let x = if config.sweep_g_l.is_some() { g_l } else { g_q };
                points.push((x, energy));
            }
            curves.push(Series {
                label: format!("n={n} N={big_n}"),
                points,
            });
        }
    }
    let mut summary = RunSummary::default();
    let csv_path = config.out_dir.join("eigen.csv");
    csv.write(&csv_path)?;
    summary.files.push(csv_path);
    if config.svg {
        let x_label = if config.sweep_g_l.is_some() {
            "g_l"
        } else {
            "g_q"
        };
        let svg = output::line_chart("dressed level energies", x_label, "energy", &curves);
        let path = config.out_dir.join("eigen.svg");
        output::write_atomic(&path, svg.as_bytes())?;
        summary.files.push(path);
    }
    Ok(summary)
}

fn run_dynamics(config: &RunConfig) -> Result<RunSummary, CliError> {
    let mut csv = Csv::new(&["t", "phonon_number", "quadrature", "gamma"]);
    let mut phonon_curves = Vec::new();
    let mut quad_curves = Vec::new();
    for &gamma in &config.dynamics_gammas {
        let p = SystemParams {
            gamma,
            ..config.system
        };
        let rows = dynamics_sweep(&p, &config.state, &config.time_grid)?;
        let label = match gamma {
            Gamma::Finite(g) => format!("gamma={g}"),
            Gamma::Infinite => "gamma=inf".to_string(),
        };
        phonon_curves.push(Series {
            label: label.clone(),
            points: rows.iter().map(|r| (r.t, r.phonon_number)).collect(),
        });
        quad_curves.push(Series {
            label,
            points: rows.iter().map(|r| (r.t, r.quadrature)).collect(),
        });
        for r in rows {
            csv.row(&[
                fmt_f64(r.t),
                fmt_f64(r.phonon_number),
                fmt_f64(r.quadrature),
                fmt_f64(gamma.as_f64()),
            ]);
        }
    }
    let mut summary = RunSummary::default();
    let csv_path = config.out_dir.join("dynamics.csv");
    csv.write(&csv_path)?;
    summary.files.push(csv_path);
    if config.svg {
        for (name, curves, y_label) in [
            ("dynamics_phonon.svg", &phonon_curves, "mean phonon number"),
            ("dynamics_quadrature.svg", &quad_curves, "mean quadrature"),
        ] {
            let svg = output::line_chart("mirror dynamics", "t", y_label, curves);
            let path = config.out_dir.join(name);
            output::write_atomic(&path, svg.as_bytes())?;
            summary.files.push(path);
        }
    }
    Ok(summary)
}

fn resolved_omega_grid(config: &RunConfig) -> Result<Vec<f64>, CliError> {
    if let Some(grid) = &config.omega_grid {
        return Ok(grid.clone());
    }
    let max_photons = config
        .state
        .sector_weights()?
        .iter()
        .map(|&(n, _)| n)
        .max()
        .unwrap_or(0);
    Ok(SpectrumParams::default_omega_grid(
        &config.system,
        max_photons,
    )?)
}

fn run_spectrum(config: &RunConfig) -> Result<RunSummary, CliError> {
    let omega_grid = resolved_omega_grid(config)?;
    let mut csv = Csv::new(&["omega", "t", "intensity"]);
    let mut grid_rows: Vec<Vec<f64>> = Vec::with_capacity(config.time_grid.len());
    for &t in &config.time_grid {
        let sp = SpectrumParams {
            filter_linewidth: config.filter_linewidth,
            omega_grid: omega_grid.clone(),
            t,
        };
        let values = match config.state {
            InitialState::NumberNumber { photons, .. } => {
                spectrum_number(&config.system, photons, C64::new(0.0, 0.0), &sp)?
            }
            InitialState::NumberCoherent { photons, beta } => {
                spectrum_number(&config.system, photons, beta, &sp)?
            }
            InitialState::CoherentCoherent { alpha, beta } => {
                spectrum_coherent(&config.system, alpha, beta, &sp)?
            }
        };
        for (w, v) in omega_grid.iter().zip(&values) {
            csv.row(&[fmt_f64(*w), fmt_f64(t), fmt_f64(*v)]);
        }
        grid_rows.push(values);
    }
    let mut summary = RunSummary::default();
    let csv_path = config.out_dir.join("spectrum.csv");
    csv.write(&csv_path)?;
    summary.files.push(csv_path);
    if config.svg {
        // one heatmap panel: omega on rows, t on columns
        let transposed: Vec<Vec<f64>> = (0..omega_grid.len())
            .map(|wi| grid_rows.iter().map(|row| row[wi]).collect())
            .collect();
        let svg = output::heatmap(
            "time-dependent spectrum",
            "t",
            "omega",
            &config.time_grid,
            &omega_grid,
            &transposed,
        );
        let path = config.out_dir.join("spectrum.svg");
        output::write_atomic(&path, svg.as_bytes())?;
        summary.files.push(path);
    }
    Ok(summary)
}

fn run_longtime(config: &RunConfig) -> Result<RunSummary, CliError> {
    let omega_grid = resolved_omega_grid(config)?;
    let sectors = config.state.sector_weights()?;
    let mut csv = Csv::new(&["omega", "intensity"]);
    let mut points = Vec::with_capacity(omega_grid.len());
    for &w in &omega_grid {
        let mut value = 0.0;
        for &(n, weight) in &sectors {
            value += weight * longtime_spectrum(&config.system, n, config.filter_linewidth, w)?;
        }
        csv.row(&[fmt_f64(w), fmt_f64(value)]);
        points.push((w, value));
    }
    let mut summary = RunSummary::default();
    let csv_path = config.out_dir.join("longtime.csv");
    csv.write(&csv_path)?;
    summary.files.push(csv_path);
    if config.svg {
        let svg = output::line_chart(
            "long-time spectrum",
            "omega",
            "intensity",
            &[Series {
                label: "limit".into(),
                points,
            }],
        );
        let path = config.out_dir.join("longtime.svg");
        output::write_atomic(&path, svg.as_bytes())?;
        summary.files.push(path);
    }
    Ok(summary)
}

// ---------------------------------------------------------------------------
// verify

fn run_verify(config: &RunConfig) -> Result<RunSummary, CliError> {
    let mut rows = Vec::new();
    let p = &config.system;
    let cutoff = config.oracle_phonon_cutoff;
    let eps = config.epsilon;
    let cap = config.series_cap;

    let sectors = config.state.sector_weights()?;
    let probe_n = sectors.iter().map(|&(n, _)| n).max().unwrap_or(1).max(1);

    // 1. dressed-level energies against the sorted block spectrum (dense
    // eigenvalues carry the sector zero-point offset on top of the ladder)
    {
        let oracle = oracle::SectorOracle::new(p, probe_n, cutoff);
        let eig = oracle.sorted_eigenvalues();
        let offset = p.zero_point_offset(probe_n)?;
        let mut worst: f64 = 0.0;
        for big_n in 0..6 {
            let analytic = p.eigenvalue(probe_n, big_n)? + offset;
            worst = worst.max((analytic - eig[big_n as usize]).abs());
        }
        rows.push(make_row("eigenvalues", worst, 1e-8));
    }

    // Operator projections need a taller block with a small interior window:
    // squeezing drags truncation-edge garbage far into the matrix.
    let projection_cutoff = cutoff.max(200);
    let projection_margin = projection_cutoff - 12;

    // 2. dephasing-step coefficients against projected step matrices
    if let Gamma::Finite(gamma) = p.gamma {
        let oracle = oracle::SectorOracle::new(p, probe_n, projection_cutoff);
        let mut worst: f64 = 0.0;
        for k in [1u64, 3, 10] {
            let theta = k as f64 / gamma;
            let raised = oracle.heisenberg_lower_unitary(theta).adjoint();
            let (a, b, c, _) = oracle::project_operator(&raised, projection_margin);
            let chi = coefficients::step_coeffs(p, probe_n, k)?;
            worst = worst
                .max((a - chi.u).norm())
                .max((b - chi.v).norm())
                .max((c - chi.shift).norm());
        }
        rows.push(make_row("step_coeffs", worst, 1e-7));
    }

    // 3. resummed coefficients against the projected dephasing-averaged matrix
    {
        let oracle = oracle::SectorOracle::new(p, probe_n, projection_cutoff);
        let mut worst: f64 = 0.0;
        for &t in &[0.5, 2.0, 8.0] {
            let lowered = oracle.heisenberg_lower(p.gamma, t, cap)?;
            let (a, b, c, _) = oracle::project_operator(&lowered, projection_margin);
            let nu = coefficients::evolved_coeffs(p, probe_n, t)?;
            // lowered operator carries the conjugate coefficients
            worst = worst
                .max((a - nu.v.conj()).norm())
                .max((b - nu.u.conj()).norm())
                .max((c - nu.shift.conj()).norm());
        }
        rows.push(make_row("evolved_coeffs", worst, 1e-7));
    }

    // 4a. truncation certificate: enlarging the basis must not move the
    // oracle observables by more than a tenth of the comparison tolerance
    {
        let dim = cutoff + 1;
        let number_op = oracle::number_op(dim);
        let position_op = oracle::position_op(dim);
        let refined = cutoff + 80;
        let number_ref = oracle::number_op(refined + 1);
        let position_ref = oracle::position_op(refined + 1);
        let mut delta: f64 = 0.0;
        for &t in &[0.0, 5.0, 15.0] {
            let coarse = oracle::evolve_milburn_resummed(p, &config.state, t, cutoff)?;
            let fine = oracle::evolve_milburn_resummed(p, &config.state, t, refined)?;
            delta = delta
                .max((coarse.expectation(&number_op)?.re - fine.expectation(&number_ref)?.re).abs())
                .max(
                    (coarse.expectation(&position_op)?.re - fine.expectation(&position_ref)?.re)
                        .abs(),
                );
        }
        rows.push(make_row("oracle_convergence", delta, 0.1 * eps));
    }

    // 4. closed-form resummation against the direct truncated series
    if p.gamma.is_finite() {
        let mut worst: f64 = 0.0;
        for &t in &[0.7, 3.0, 12.0] {
            let closed = coefficients::evolved_coeffs(p, probe_n, t)?;
            let series = coefficients::evolved_coeffs_series(p, probe_n, t, 1e-12, cap)?;
            worst = worst
                .max((closed.u - series.u).norm())
                .max((closed.v - series.v).norm())
                .max((closed.shift - series.shift).norm());
        }
        rows.push(make_row("series_resummation", worst, 1e-11));
    }

    // 5. observables against the dephasing-evolved density matrix
    {
        let dim = cutoff + 1;
        let number_op = oracle::number_op(dim);
        let position_op = oracle::position_op(dim);
        let mut worst: f64 = 0.0;
        for &t in &[0.0, 1.0, 5.0, 15.0] {
            let ms = oracle::evolve_milburn_resummed(p, &config.state, t, cutoff)?;
            let n_oracle = ms.expectation(&number_op)?.re;
            let x_oracle = ms.expectation(&position_op)?.re;
            let n_analytic = observables::phonon_number(p, &config.state, t)?;
            let x_analytic = observables::quadrature(p, &config.state, t)?;
            worst = worst
                .max((n_oracle - n_analytic).abs())
                .max((x_oracle - x_analytic).abs());
        }
        rows.push(make_row("observables", worst, eps));
    }

    // 6. two-time correlation against the averaged-operator product
    {
        let dim = cutoff + 1;
        let mut worst: f64 = 0.0;
        for &(t1, t2) in &[(1.0, 2.0), (0.5, 4.0)] {
            let mut oracle_value = C64::new(0.0, 0.0);
            for &(n, weight) in &sectors {
                let oracle = oracle::SectorOracle::new(p, n, cutoff);
                let psi0 = match config.state {
                    InitialState::NumberNumber { phonons, .. } => {
                        oracle::number_vector(phonons, dim)
                    }
                    InitialState::NumberCoherent { beta, .. }
                    | InitialState::CoherentCoherent { beta, .. } => {
                        oracle::coherent_vector(beta, dim)
                    }
                }?;
                let b1 = oracle.heisenberg_lower(p.gamma, t1, cap)?;
                let b2 = oracle.heisenberg_lower(p.gamma, t2, cap)?;
                let v1 = &b1 * &psi0;
                let v2 = &b2 * &psi0;
                oracle_value += weight * (v1.adjoint() * v2)[(0, 0)];
            }
            let analytic = correlation(p, &config.state, t1, t2)?;
            worst = worst.max((analytic - oracle_value).norm());
        }
        rows.push(make_row("correlation", worst, eps));
    }

    // 7. closed-form spectrum against the direct double quadrature
    {
        let omega_probe = match p.gamma {
            Gamma::Finite(g) => g * (p.dressed_frequency(probe_n)? / g).sin(),
            Gamma::Infinite => p.dressed_frequency(probe_n)?,
        };
        let sp = SpectrumParams {
            filter_linewidth: config.filter_linewidth,
            omega_grid: vec![0.0, 0.5 * omega_probe, omega_probe],
            t: 6.0,
        };
        let numeric = oracle::spectrum_numeric(p, &config.state, &sp, 600, cutoff.min(40), cap)?;
        let analytic = match config.state {
            InitialState::NumberNumber { photons, .. } => {
                spectrum_number(p, photons, C64::new(0.0, 0.0), &sp)?
            }
            InitialState::NumberCoherent { photons, beta } => {
                spectrum_number(p, photons, beta, &sp)?
            }
            InitialState::CoherentCoherent { alpha, beta } => {
                spectrum_coherent(p, alpha, beta, &sp)?
            }
        };
        let mut worst: f64 = 0.0;
        for (a, b) in analytic.iter().zip(&numeric) {
            let scale = a.abs().max(b.abs()).max(1e-12);
            worst = worst.max((a - b).abs() / scale);
        }
        rows.push(make_row("spectrum_quadrature_rel", worst, 1e-4));
    }

    // 8. long-time limit against the late-time spectrum
    if p.gamma.is_finite() {
        let t_late = 50.0 / config.filter_linewidth;
        let omega_grid = spectrum::linspace(-2.0, 2.0, 21);
        let sp = SpectrumParams {
            filter_linewidth: config.filter_linewidth,
            omega_grid: omega_grid.clone(),
            t: t_late,
        };
        let mut worst: f64 = 0.0;
        for &(n, weight) in &sectors {
            let late = spectrum_number(p, n, C64::new(0.0, 0.0), &sp)?;
            for (w, v) in omega_grid.iter().zip(&late) {
                let limit = longtime_spectrum(p, n, config.filter_linewidth, *w)?;
                worst = worst.max(weight * (v - limit).abs());
            }
        }
        rows.push(make_row("longtime_limit", worst, 1e-6));
    }

    let mut csv = Csv::new(&["check", "max_abs_error", "tolerance", "pass"]);
    for row in &rows {
        csv.row(&[
            row.check.clone(),
            fmt_f64(row.max_abs_error),
            fmt_f64(row.tolerance),
            row.pass.to_string(),
        ]);
    }
    let csv_path = config.out_dir.join("verify.csv");
    csv.write(&csv_path)?;

    for row in &rows {
        println!(
            "verify {:<24} max |analytic - oracle| = {:9.3e}  tol = {:7.1e}  {}",
            row.check,
            row.max_abs_error,
            row.tolerance,
            if row.pass { "ok" } else { "FAIL" }
        );
    }
    if let Some(bad) = rows.iter().find(|r| !r.pass) {
        return Err(CliError::VerificationFailed {
            check: bad.check.clone(),
            error: bad.max_abs_error,
            tolerance: bad.tolerance,
        });
    }
    Ok(RunSummary {
        files: vec![csv_path],
        checks: rows,
    })
}

fn make_row(check: &str, max_abs_error: f64, tolerance: f64) -> CheckRow {
    CheckRow {
        check: check.to_string(),
        max_abs_error,
        tolerance,
        pass: max_abs_error < tolerance,
    }
}

/// Convenience wrapper for binaries: load, run, and map errors to exit codes.
pub fn execute(path: &Path, experiment: Experiment, overrides: &super::config::Overrides) -> i32 {
    match super::config::load_config(path, experiment, overrides) {
        Ok(config) => match run(&config) {
            Ok(summary) => {
                for file in &summary.files {
                    println!("wrote {}", file.display());
                }
                0
            }
            Err(e) => {
                eprintln!("error: {e}");
                e.exit_code()
            }
        },
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
