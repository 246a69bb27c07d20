//! The subcommands: each turns a [`RunConfig`] into a [`ResultTable`].

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use lmg_core::bosonic::{magnetization_polaron, oscillator_energies, solve_oscillator};
use lmg_core::dissipation::{frame_observables, rates, Frame, FrameObservables, RatePair};
use lmg_core::spin::{build_lmg_hamiltonian, lowest_eigenvalues, thermal_expectation_jz, GibbsSpectrum};
use lmg_core::waiting_times::{
    sample_trajectories, wtd_analytic, wtd_histogram_merged, wtd_numeric_adaptive, JumpType,
};
use lmg_core::Error;

use crate::config::{fmt_f64, Command, Output, RunConfig, Variable};
use crate::error::{CliError, Result};
use crate::table::{Cell, Metadata, ResultTable};

pub fn run(config: &RunConfig) -> Result<ResultTable> {
    match config.command {
        Command::Magnetization => run_magnetization(config),
        Command::Trajectory => run_trajectory(config),
        Command::Spectrum | Command::Occupation | Command::Wtd | Command::Sweep => run_sweep(config),
    }
}

/// Errors that mark a point as outside the model's validity rather than
/// failing the run.
fn skippable(e: &Error) -> bool {
    matches!(e, Error::CriticalPoint { .. } | Error::Domain { .. })
}

fn guarded<T>(r: lmg_core::Result<T>) -> Result<Option<T>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(e) if skippable(&e) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

fn cell(v: Option<f64>) -> Cell {
    v.map_or(Cell::Skipped, Cell::Value)
}

/// Parameters of one sweep point, in absolute units.
#[derive(Debug, Clone, Copy)]
struct Point {
    gamma_x: f64,
    beta: f64,
    tau: f64,
}

impl Point {
    fn at(config: &RunConfig, variable: Variable, value: f64) -> Self {
        let mut p = Point {
            gamma_x: config.gamma_x.unwrap_or(0.0),
            beta: config.beta,
            tau: config.tau.unwrap_or(0.0),
        };
        match variable {
            Variable::GammaX => p.gamma_x = value,
            Variable::Temperature => p.beta = 1.0 / value,
            Variable::Tau => p.tau = value,
        }
        p
    }
}

/// Value of the swept variable in output units.
fn scaled_variable(config: &RunConfig, variable: Variable, value: f64) -> f64 {
    match variable {
        Variable::GammaX | Variable::Temperature => value / config.h,
        Variable::Tau => value * config.h,
    }
}

fn wtd_columns(config: &RunConfig, frame: Frame) -> Vec<String> {
    let mut cols = Vec::new();
    for kind in &config.kinds {
        for method in config.method.names() {
            cols.push(format!("{}_w{kind}_{method}", frame.as_str()));
        }
    }
    cols
}

fn output_columns(config: &RunConfig, output: Output) -> Vec<String> {
    if output.per_frame() {
        return config
            .frame
            .frames()
            .into_iter()
            .flat_map(|frame| match output {
                Output::Wtd => wtd_columns(config, frame),
                _ => vec![format!("{}_{}", frame.as_str(), output.as_str())],
            })
            .collect();
    }
    match output {
        Output::EnergyExact => (0..config.levels).map(|i| format!("exact_E{i}")).collect(),
        Output::EnergyBoson => (0..config.levels).map(|i| format!("boson_E{i}")).collect(),
        Output::JzExact => vec!["jz_exact".into()],
        Output::JzBoson => vec!["jz_boson".into()],
        _ => unreachable!("per-frame outputs handled above"),
    }
}

fn frame_cells(config: &RunConfig, output: Output, frame: Frame, obs: Option<&FrameObservables>, p: Point) -> Result<Vec<Cell>> {
    let h = config.h;
    let single = |f: fn(&FrameObservables) -> Option<f64>| vec![cell(obs.and_then(f))];
    Ok(match output {
        Output::Coupling => vec![cell(obs.map(|o| o.coupling / h))],
        Output::Omega => vec![cell(obs.map(|o| o.omega / h))],
        Output::Dd => single(|o| Some(o.occupation_diagonal)),
        Output::Aa => single(|o| Some(o.occupation_mode)),
        Output::Rate => vec![cell(obs.map(|o| o.rates.relaxation_rate() / h))],
        Output::Nb => single(|o| o.rates.occupation_ratio()),
        Output::Wtd => {
            let width = wtd_columns(config, frame).len();
            let Some((g, n)) = obs.and_then(|o| Some((o.rates.relaxation_rate(), o.rates.occupation_ratio()?))) else {
                return Ok(vec![Cell::Skipped; width]);
            };
            let mut cells = Vec::with_capacity(width);
            for &kind in &config.kinds {
                for method in config.method.names() {
                    let value = match *method {
                        "analytic" => guarded(wtd_analytic(kind, p.tau, g, n))?,
                        _ => guarded(wtd_numeric_adaptive(kind, p.tau, g, n))?,
                    };
                    cells.push(cell(value.map(|w| w / h)));
                }
            }
            cells
        }
        _ => unreachable!("not a per-frame output"),
    })
}

fn output_cells(config: &RunConfig, output: Output, p: Point) -> Result<Vec<Cell>> {
    let h = config.h;
    let n = config.n_spins as f64;
    if output.per_frame() {
        let bath = config.bath(p.beta)?;
        let mut cells = Vec::new();
        for frame in config.frame.frames() {
            let obs = guarded(frame_observables(frame, h, p.gamma_x, &bath))?;
            cells.extend(frame_cells(config, output, frame, obs.as_ref(), p)?);
        }
        return Ok(cells);
    }
    Ok(match output {
        Output::EnergyExact => {
            let m = build_lmg_hamiltonian(&config.lmg(p.gamma_x)?)?;
            let e = lowest_eigenvalues(&m, config.levels)?;
            e.eigenvalues.iter().map(|v| Cell::Value(v / h)).collect()
        }
        Output::EnergyBoson => match guarded(solve_oscillator(h, p.gamma_x))? {
            Some(sol) => oscillator_energies(&sol, config.levels, config.n_spins)
                .iter()
                .map(|v| Cell::Value(v / h))
                .collect(),
            None => vec![Cell::Skipped; config.levels],
        },
        Output::JzExact => vec![Cell::Value(thermal_expectation_jz(&config.lmg(p.gamma_x)?, p.beta)? / n)],
        Output::JzBoson => vec![cell(guarded(magnetization_polaron(h, p.gamma_x, p.beta, config.n_spins))?.map(|m| m / n))],
        _ => unreachable!("per-frame outputs handled above"),
    })
}

fn check_finite(row: &[Cell], columns: &[String]) -> Result<()> {
    for (c, name) in row.iter().zip(columns) {
        if let Cell::Value(v) = c {
            if !v.is_finite() {
                return Err(CliError::Numerical(format!("non-finite value in column `{name}`")));
            }
        }
    }
    Ok(())
}

fn count_skipped(table: &ResultTable) -> usize {
    table.rows.iter().flatten().filter(|c| **c == Cell::Skipped).count()
}

/// One row per value of the swept variable; backs `spectrum`,
/// `occupation`, `wtd` and `sweep`.
fn run_sweep(config: &RunConfig) -> Result<ResultTable> {
    let spec = config.sweep.expect("sweep commands resolve a range");
    let mut columns = vec![spec.variable.as_str().to_string()];
    for &o in &config.outputs {
        columns.extend(output_columns(config, o));
    }
    let values = spec.values();
    let rows = config.execution.map(&values, |&v| -> Result<Vec<Cell>> {
        let p = Point::at(config, spec.variable, v);
        let mut row = vec![Cell::Value(scaled_variable(config, spec.variable, v))];
        for &o in &config.outputs {
            row.extend(output_cells(config, o, p)?);
        }
        Ok(row)
    });
    let mut table = ResultTable::new(columns, Metadata::for_run(config));
    for row in rows {
        let row = row?;
        check_finite(&row, &table.columns)?;
        table.push(row);
    }
    let skipped = count_skipped(&table);
    table.metadata.notes.push(("skipped_cells".into(), skipped.to_string()));
    Ok(table)
}

/// Grid over couplings and inverse temperatures; the exact spectrum is
/// diagonalized once per coupling.
fn run_magnetization(config: &RunConfig) -> Result<ResultTable> {
    let spec = config.sweep.expect("magnetization resolves a coupling range");
    let (h, n) = (config.h, config.n_spins as f64);
    let gammas = spec.values();
    let blocks = config.execution.map(&gammas, |&g| -> Result<Vec<Vec<Cell>>> {
        let gibbs = GibbsSpectrum::new(&config.lmg(g)?)?;
        config
            .betas
            .iter()
            .map(|&beta| {
                let boson = guarded(magnetization_polaron(h, g, beta, config.n_spins))?;
                Ok(vec![
                    Cell::Value(g / h),
                    Cell::Value(beta * h),
                    Cell::Value(gibbs.thermal_jz(beta) / n),
                    cell(boson.map(|m| m / n)),
                ])
            })
            .collect()
    });
    let columns = ["gamma_x", "beta", "jz_exact", "jz_boson"].map(String::from).to_vec();
    let mut table = ResultTable::new(columns, Metadata::for_run(config));
    for block in blocks {
        for row in block? {
            check_finite(&row, &table.columns)?;
            table.push(row);
        }
    }
    let skipped = count_skipped(&table);
    table.metadata.notes.push(("skipped_cells".into(), skipped.to_string()));
    Ok(table)
}

/// `events.csv` -> `events_bms.csv` when several frames are sampled.
fn events_path(base: &str, frame: Frame, several: bool) -> PathBuf {
    let path = Path::new(base);
    if !several {
        return path.to_path_buf();
    }
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("events");
    let name = match path.extension().and_then(|e| e.to_str()) {
        Some(ext) => format!("{stem}_{}.{ext}", frame.as_str()),
        None => format!("{stem}_{}", frame.as_str()),
    };
    path.with_file_name(name)
}

fn write_events(path: &Path, record: &lmg_core::waiting_times::JumpRecord) -> Result<()> {
    let display = path.display().to_string();
    let file = File::create(path).map_err(|e| CliError::io(&display, e))?;
    let mut out = BufWriter::new(file);
    let written = if path.extension().is_some_and(|e| e == "bin") {
        record.write_binary(&mut out)
    } else {
        record.write_csv(&mut out)
    };
    written.map_err(|e| CliError::io(&display, e))
}

/// Samples jump trajectories at one coupling and histograms the waiting
/// times against the closed forms.
fn run_trajectory(config: &RunConfig) -> Result<ResultTable> {
    let h = config.h;
    let g = config.gamma_x.expect("trajectory resolves gamma_x");
    let bath = config.bath(config.beta)?;
    let frames = config.frame.frames();
    let pairs: Vec<(Frame, RatePair)> = frames
        .iter()
        .map(|&f| Ok((f, rates(f, h, g, &bath)?)))
        .collect::<Result<_>>()?;
    let slowest = pairs.iter().map(|(_, r)| r.relaxation_rate()).fold(f64::INFINITY, f64::min);
    let bin_width = config.bin_width.unwrap_or(0.05 / slowest);
    let max_tau = config.max_tau.unwrap_or(60.0 / slowest);
    if max_tau <= bin_width {
        return Err(CliError::Invalid(format!("max_tau ({max_tau}) must exceed bin_width ({bin_width})")));
    }
    let per_chain = config.jumps / config.chains;

    let mut columns = vec!["tau".to_string()];
    let mut data: Vec<Vec<f64>> = Vec::new();
    let mut notes = vec![
        ("bin_width".to_string(), fmt_f64(bin_width * h)),
        ("max_tau".to_string(), fmt_f64(max_tau * h)),
        ("jumps_sampled".to_string(), (per_chain * config.chains).to_string()),
    ];
    let mut centers = Vec::new();
    for (frame, r) in &pairs {
        let name = frame.as_str();
        let (gamma, n_b) = (r.relaxation_rate(), r.occupation_ratio().unwrap_or(0.0));
        let records = sample_trajectories(r, config.chains, per_chain, config.seed, config.execution)?;
        if let Some(base) = &config.events {
            write_events(&events_path(base, *frame, pairs.len() > 1), &records[0])?;
        }
        let total: usize = records.iter().map(|c| c.len()).sum();
        let emitted: usize = records.iter().map(|c| c.count(JumpType::Emission)).sum();
        let mean_occ = records.iter().filter_map(|c| c.mean_occupation()).sum::<f64>() / records.len() as f64;
        notes.push((format!("{name}_rate"), fmt_f64(gamma / h)));
        notes.push((format!("{name}_nb"), fmt_f64(n_b)));
        notes.push((format!("{name}_emission_fraction"), fmt_f64(emitted as f64 / total as f64)));
        notes.push((format!("{name}_mean_occupation"), fmt_f64(mean_occ)));
        for &kind in &config.kinds {
            let hist = wtd_histogram_merged(&records, kind, bin_width, max_tau)?;
            let analytic = |t: f64| wtd_analytic(kind, t, gamma, n_b).unwrap_or(f64::NAN);
            notes.push((format!("{name}_w{kind}_l1"), fmt_f64(hist.l1_distance(analytic))));
            notes.push((format!("{name}_w{kind}_conditioning"), hist.conditioning_events.to_string()));
            centers = hist.bin_centers();
            columns.push(format!("{name}_w{kind}_hist"));
            data.push(hist.densities().iter().map(|d| d / h).collect());
            columns.push(format!("{name}_w{kind}_analytic"));
            data.push(centers.iter().map(|&t| analytic(t) / h).collect());
        }
    }

    let mut metadata = Metadata::for_run(config);
    metadata.notes = notes;
    let mut table = ResultTable::new(columns, metadata);
    for (i, &t) in centers.iter().enumerate() {
        let mut row = vec![Cell::Value(t * h)];
        row.extend(data.iter().map(|col| Cell::Value(col[i])));
        check_finite(&row, &table.columns)?;
        table.push(row);
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Settings;
    use lmg_core::Execution;

    fn config(text: &str, command: Command) -> RunConfig {
        RunConfig::resolve(&Settings::parse(text, "t").unwrap(), command).unwrap().0
    }

    fn values(t: &ResultTable, col: &str) -> Vec<Option<f64>> {
        t.column(col).unwrap().iter().map(Cell::value).collect()
    }

    #[test]
    fn spectrum_marks_critical_point() {
        let t = run(&config("h = 1\nn_spins = 50\nsteps = 5\n", Command::Spectrum)).unwrap();
        assert_eq!(t.columns, ["gamma_x", "exact_E0", "exact_E1", "exact_E2", "boson_E0", "boson_E1", "boson_E2"]);
        assert_eq!(values(&t, "gamma_x"), [0.0, 0.5, 1.0, 1.5, 2.0].map(Some));
        assert_eq!(t.rows[2][4], Cell::Skipped);
        assert!(t.rows[2][1].value().is_some());
    }

    #[test]
    fn small_n_spectrum_deviates_more() {
        let err = |n: usize| {
            let t = run(&config(&format!("h = 1\nn_spins = {n}\nstart = 0.2\nstop = 0.6\nsteps = 3\n"), Command::Spectrum)).unwrap();
            let (e0, e1) = (values(&t, "exact_E0"), values(&t, "exact_E1"));
            let (b0, b1) = (values(&t, "boson_E0"), values(&t, "boson_E1"));
            (0..3)
                .map(|i| (((e1[i].unwrap() - e0[i].unwrap()) / (b1[i].unwrap() - b0[i].unwrap())) - 1.0).abs())
                .fold(0.0, f64::max)
        };
        assert!(err(10) > 5.0 * err(1000));
    }

    #[test]
    fn too_many_levels_fails() {
        let e = run(&config("h = 1\nn_spins = 3\nlevels = 5\n", Command::Spectrum)).unwrap_err();
        assert_eq!(e.exit_code(), 1);
    }

    #[test]
    fn occupation_diverges_at_frame_critical_points() {
        let t = run(&config("h = 1\nstart = 0.9\nstop = 1.2\nsteps = 151\n", Command::Occupation)).unwrap();
        let g = values(&t, "gamma_x");
        let argmax = |col: &str| {
            let v = values(&t, col);
            let i = (0..v.len()).filter(|&i| v[i].is_some()).max_by(|&a, &b| v[a].unwrap().total_cmp(&v[b].unwrap())).unwrap();
            g[i].unwrap()
        };
        assert!((argmax("polaron_aa") - 1.0).abs() < 0.01);
        assert!((argmax("bms_aa") - 1.1).abs() < 0.01);
        // Polaron omega vanishes at h, BMS omega at the shifted point.
        assert!(values(&t, "polaron_omega")[50].is_none());
        let omega = values(&t, "bms_omega");
        let near = omega.iter().zip(&g).filter(|(_, g)| (g.unwrap() - 1.1).abs() < 0.003);
        assert!(near.into_iter().all(|(w, _)| w.is_none_or(|w| w < 0.1)));
    }

    #[test]
    fn magnetization_grid_shape_and_limits() {
        let t = run(&config("h = 1\nn_spins = 200\nstart = 0.5\nstop = 2\nsteps = 4\nbetas = 1.79, 50\n", Command::Magnetization)).unwrap();
        assert_eq!(t.rows.len(), 8);
        // Cold, normal phase: fully polarized.
        assert!((t.rows[1][2].value().unwrap() - 0.5).abs() < 1e-3);
        assert!((t.rows[1][3].value().unwrap() - 0.5).abs() < 1e-3);
        // Cold, broken phase: h / (2 gamma) per spin.
        assert!((t.rows[7][2].value().unwrap() - 0.25).abs() < 0.01);
    }

    #[test]
    fn exact_magnetization_ignores_bath() {
        let a = run(&config("h = 1\nn_spins = 40\nsteps = 5\n", Command::Magnetization)).unwrap();
        let b = run(&config("h = 1\nn_spins = 40\nsteps = 5\neta = 0.01\nomega_c = 3\n", Command::Magnetization)).unwrap();
        assert_eq!(a.column("jz_exact"), b.column("jz_exact"));
    }

    #[test]
    fn wtd_methods_agree() {
        let t = run(&config("h = 1\ngamma_x = 0.5\nframe = polaron\nmethod = both\nsteps = 11\n", Command::Wtd)).unwrap();
        for kind in ["ee", "ae", "ea", "aa"] {
            let a = values(&t, &format!("polaron_w{kind}_analytic"));
            let b = values(&t, &format!("polaron_w{kind}_numeric"));
            for (x, y) in a.iter().zip(&b) {
                let (x, y) = (x.unwrap(), y.unwrap());
                assert!(x == y || ((x - y) / x).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn parallel_equals_serial() {
        for (text, command) in [
            ("h = 1\nn_spins = 60\nsteps = 21\n", Command::Spectrum),
            ("h = 1\nsteps = 31\n", Command::Occupation),
            ("h = 1\ngamma_x = 0.5\njumps = 40000\nchains = 4\nkinds = ee\n", Command::Trajectory),
        ] {
            let mut c = config(text, command);
            c.execution = Execution::Serial;
            let serial = run(&c).unwrap();
            c.execution = Execution::Parallel;
            let parallel = run(&c).unwrap();
            assert_eq!(serial.rows, parallel.rows);
            assert_eq!(serial.metadata.notes, parallel.metadata.notes);
        }
    }

    #[test]
    fn trajectory_histogram_tracks_closed_form() {
        let t = run(&config("h = 1\ngamma_x = 0.5\nframe = polaron\njumps = 400000\nseed = 3\n", Command::Trajectory)).unwrap();
        let note = |k: &str| t.metadata.notes.iter().find(|(n, _)| n == k).unwrap().1.parse::<f64>().unwrap();
        for kind in ["ee", "ae", "ea", "aa"] {
            assert!(note(&format!("polaron_w{kind}_l1")) < 0.03);
        }
        assert!((note("polaron_emission_fraction") - 0.5).abs() < 0.01);
    }

    #[test]
    fn events_path_gets_frame_suffix() {
        assert_eq!(events_path("out/ev.csv", Frame::Bms, true), PathBuf::from("out/ev_bms.csv"));
        assert_eq!(events_path("ev.bin", Frame::Polaron, false), PathBuf::from("ev.bin"));
    }
}
