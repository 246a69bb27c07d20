//! Flat `key = value` run configuration.
//!
//! The same parser reads config files, command-line overrides and the
//! metadata header of an emitted table, so a table's header can be fed back
//! in to reproduce it.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;
use std::fmt;
use std::path::Path;

use lmg_core::dissipation::Frame;
use lmg_core::model::{BathParams, LmgParams};
use lmg_core::waiting_times::WtdKind;
use lmg_core::Execution;

use crate::error::{CliError, Result};

/// Every recognised key, in the order they are echoed.
pub const KEYS: &[&str] = &[
    "h", "gamma_x", "n_spins", "eta", "omega_c", "beta", "frame", "seed", "format", "execution",
    "variable", "start", "stop", "steps", "tau", "levels", "betas", "kinds", "method", "outputs",
    "jumps", "chains", "bin_width", "max_tau", "events", "out",
];

/// Output paths and encoding; they do not change the numbers, so they are
/// not echoed.
const NOT_ECHOED: &[&str] = &["format", "events", "out"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Spectrum,
    Magnetization,
    Occupation,
    Wtd,
    Trajectory,
    Sweep,
}

impl Command {
    pub fn as_str(&self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::Magnetization => "magnetization",
            Command::Occupation => "occupation",
            Command::Wtd => "wtd",
            Command::Trajectory => "trajectory",
            Command::Sweep => "sweep",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrameChoice {
    Bms,
    Polaron,
    Both,
}

impl FrameChoice {
    pub fn frames(&self) -> Vec<Frame> {
        match self {
            FrameChoice::Bms => vec![Frame::Bms],
            FrameChoice::Polaron => vec![Frame::Polaron],
            FrameChoice::Both => vec![Frame::Bms, Frame::Polaron],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

/// Swept quantity. Temperature is in units of h (`T = 1 / beta`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variable {
    GammaX,
    Temperature,
    Tau,
}

impl Variable {
    pub fn as_str(&self) -> &'static str {
        match self {
            Variable::GammaX => "gamma_x",
            Variable::Temperature => "temperature",
            Variable::Tau => "tau",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WtdMethod {
    Analytic,
    Numeric,
    Both,
}

impl WtdMethod {
    pub fn names(&self) -> &'static [&'static str] {
        match self {
            WtdMethod::Analytic => &["analytic"],
            WtdMethod::Numeric => &["numeric"],
            WtdMethod::Both => &["analytic", "numeric"],
        }
    }
}

/// Observable groups a sweep can emit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Output {
    /// Coupling the frame evaluates the oscillator at.
    Coupling,
    Omega,
    /// `<d^dag d>`.
    Dd,
    /// `<a^dag a>`.
    Aa,
    Rate,
    Nb,
    JzExact,
    JzBoson,
    EnergyExact,
    EnergyBoson,
    Wtd,
}

impl Output {
    const ALL: [(Output, &'static str); 11] = [
        (Output::Coupling, "coupling"),
        (Output::Omega, "omega"),
        (Output::Dd, "dd"),
        (Output::Aa, "aa"),
        (Output::Rate, "rate"),
        (Output::Nb, "nb"),
        (Output::JzExact, "jz_exact"),
        (Output::JzBoson, "jz_boson"),
        (Output::EnergyExact, "energy_exact"),
        (Output::EnergyBoson, "energy_boson"),
        (Output::Wtd, "wtd"),
    ];

    pub fn as_str(&self) -> &'static str {
        Self::ALL.iter().find(|(o, _)| o == self).unwrap().1
    }

    pub fn per_frame(&self) -> bool {
        matches!(
            self,
            Output::Coupling | Output::Omega | Output::Dd | Output::Aa | Output::Rate | Output::Nb | Output::Wtd
        )
    }
}

/// Where a raw value came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Origin {
    File { path: String, line: usize },
    Flag(String),
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::File { path, line } => write!(f, "{path}:{line}"),
            Origin::Flag(flag) => write!(f, "{flag}"),
        }
    }
}

/// Raw string values keyed by name, before typing and validation.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings {
    values: BTreeMap<String, (String, Origin)>,
}

fn config_error(origin: &Origin, key: &str, message: impl Into<String>) -> CliError {
    CliError::Config {
        origin: origin.to_string(),
        key: key.to_string(),
        message: message.into(),
    }
}

impl Settings {
    /// Parses config text; `source` names it in diagnostics.
    pub fn parse(text: &str, source: &str) -> Result<Self> {
        let mut settings = Settings::default();
        for (i, raw) in text.lines().enumerate() {
            let origin = Origin::File {
                path: source.to_string(),
                line: i + 1,
            };
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(config_error(&origin, line, "expected `key = value`"));
            };
            let (key, value) = (key.trim(), value.trim());
            if let Some((_, first)) = settings.values.get(key) {
                return Err(config_error(&origin, key, format!("duplicate key (first set at {first})")));
            }
            settings.set(key, value, origin)?;
        }
        Ok(settings)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path.display().to_string(), e))?;
        Self::parse(&text, &path.display().to_string())
    }

    /// Reads the `# key = value` lines of a CSV metadata header. Lines of the
    /// form `# name: value` are informational and skipped; the header ends at
    /// the first line not starting with `#`.
    pub fn from_metadata(text: &str) -> Result<Self> {
        let header: String = text
            .lines()
            .take_while(|l| l.starts_with('#'))
            .map(|l| {
                let body = l.trim_start_matches('#');
                if body.contains(" = ") { body } else { "" }
            })
            .collect::<Vec<_>>()
            .join("\n");
        Self::parse(&header, "metadata")
    }

    /// Reads the `parameters` object of a JSON table.
    pub fn from_json_metadata(doc: &serde_json::Value) -> Result<Self> {
        let params = doc
            .get("parameters")
            .and_then(|p| p.as_object())
            .ok_or_else(|| CliError::Invalid("JSON table has no `parameters` object".into()))?;
        let mut settings = Settings::default();
        for (key, value) in params {
            let origin = Origin::File {
                path: "metadata".into(),
                line: 0,
            };
            let value = value
                .as_str()
                .ok_or_else(|| config_error(&origin, key, "expected a string value"))?;
            settings.set(key, value, origin)?;
        }
        Ok(settings)
    }

    /// Sets one value, rejecting unknown keys and empty values.
    pub fn set(&mut self, key: &str, value: &str, origin: Origin) -> Result<()> {
        if !KEYS.contains(&key) {
            return Err(config_error(&origin, key, format!("unknown key; expected one of {}", KEYS.join(", "))));
        }
        if value.is_empty() {
            return Err(config_error(&origin, key, "empty value"));
        }
        self.values.insert(key.to_string(), (value.to_string(), origin));
        Ok(())
    }

    /// Values in `other` replace ours.
    pub fn merge(&mut self, other: Settings) {
        self.values.extend(other.values);
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(|(v, _)| v.as_str())
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.values.keys().map(String::as_str)
    }
}

/// Inclusive, evenly spaced range of the swept variable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSpec {
    pub variable: Variable,
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

impl SweepSpec {
    pub fn values(&self) -> Vec<f64> {
        let last = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| {
                if i + 1 == self.steps {
                    self.stop
                } else {
                    self.start + (self.stop - self.start) * i as f64 / last
                }
            })
            .collect()
    }
}

/// Fully typed and validated parameters for one run. Fields a command does
/// not use keep fixed defaults, so two configs for the same command compare
/// equal exactly when they produce the same table.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub h: f64,
    pub n_spins: usize,
    pub eta: f64,
    pub omega_c: f64,
    pub beta: f64,
    pub frame: FrameChoice,
    pub seed: u64,
    pub format: Format,
    pub execution: Execution,
    pub gamma_x: Option<f64>,
    pub sweep: Option<SweepSpec>,
    pub tau: Option<f64>,
    pub levels: usize,
    pub betas: Vec<f64>,
    pub kinds: Vec<WtdKind>,
    pub method: WtdMethod,
    pub outputs: Vec<Output>,
    pub jumps: usize,
    pub chains: usize,
    pub bin_width: Option<f64>,
    pub max_tau: Option<f64>,
    pub events: Option<String>,
    pub out: Option<String>,
    parameters: BTreeMap<usize, String>,
}

/// Typed access to [`Settings`] that records every key it resolves.
struct Reader<'a> {
    settings: &'a Settings,
    resolved: BTreeMap<usize, String>,
    read: BTreeSet<&'static str>,
}

impl<'a> Reader<'a> {
    fn raw(&mut self, key: &'static str) -> Option<(&'a str, &'a Origin)> {
        self.read.insert(key);
        self.settings.values.get(key).map(|(v, o)| (v.as_str(), o))
    }

    fn record(&mut self, key: &'static str, canonical: String) {
        let idx = KEYS.iter().position(|k| *k == key).expect("known key");
        self.resolved.insert(idx, canonical);
    }

    fn parsed<T, F>(&mut self, key: &'static str, parse: F) -> Result<Option<(T, Origin)>>
    where
        F: Fn(&str) -> std::result::Result<T, String>,
    {
        match self.raw(key) {
            None => Ok(None),
            Some((value, origin)) => parse(value)
                .map(|v| Some((v, origin.clone())))
                .map_err(|m| config_error(origin, key, m)),
        }
    }

    fn f64_checked(&mut self, key: &'static str, default: Option<f64>, check: fn(f64) -> bool, what: &str) -> Result<Option<f64>> {
        let value = match self.parsed(key, parse_f64)? {
            Some((v, origin)) => {
                if !check(v) {
                    return Err(config_error(&origin, key, format!("must be {what}, got {v}")));
                }
                Some(v)
            }
            None => default,
        };
        if let Some(v) = value {
            self.record(key, fmt_f64(v));
        }
        Ok(value)
    }

    fn f64_or(&mut self, key: &'static str, default: f64, check: fn(f64) -> bool, what: &str) -> Result<f64> {
        Ok(self.f64_checked(key, Some(default), check, what)?.expect("defaulted"))
    }

    fn count(&mut self, key: &'static str, default: usize, min: usize) -> Result<usize> {
        let value = match self.parsed(key, |s| s.parse::<usize>().map_err(|_| format!("expected a non-negative integer, got `{s}`")))? {
            Some((v, origin)) if v < min => {
                return Err(config_error(&origin, key, format!("must be at least {min}, got {v}")))
            }
            Some((v, _)) => v,
            None => default,
        };
        self.record(key, value.to_string());
        Ok(value)
    }

    fn choice<T: Copy + PartialEq>(&mut self, key: &'static str, default: T, options: &[(&str, T)]) -> Result<T> {
        let value = match self.parsed(key, |s| {
            options
                .iter()
                .find(|(name, _)| name.eq_ignore_ascii_case(s))
                .map(|(_, v)| *v)
                .ok_or_else(|| {
                    let names: Vec<&str> = options.iter().map(|(n, _)| *n).collect();
                    format!("expected one of {}, got `{s}`", names.join("|"))
                })
        })? {
            Some((v, _)) => v,
            None => default,
        };
        let name = options.iter().find(|(_, v)| *v == value).map(|(n, _)| *n).expect("listed");
        self.record(key, name.to_string());
        Ok(value)
    }

    fn list<T: Clone, F>(&mut self, key: &'static str, default: Vec<T>, parse: F, show: fn(&T) -> String) -> Result<Vec<T>>
    where
        F: Fn(&str) -> std::result::Result<T, String>,
    {
        let value = match self.parsed(key, |s| s.split(',').map(|item| parse(item.trim())).collect::<std::result::Result<Vec<T>, String>>())? {
            Some((v, origin)) if v.is_empty() => return Err(config_error(&origin, key, "empty list")),
            Some((v, _)) => v,
            None => default,
        };
        self.record(key, value.iter().map(show).collect::<Vec<_>>().join(","));
        Ok(value)
    }

    fn path(&mut self, key: &'static str) -> Option<String> {
        self.raw(key).map(|(v, _)| v.to_string())
    }
}

fn parse_f64(s: &str) -> std::result::Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        Ok(v) => Err(format!("must be finite, got {v}")),
        Err(_) => Err(format!("expected a number, got `{s}`")),
    }
}

/// Shortest representation that parses back to the same value.
pub fn fmt_f64(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-4..1e7).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

fn positive(v: f64) -> bool {
    v > 0.0
}

fn non_negative(v: f64) -> bool {
    v >= 0.0
}

impl RunConfig {
    /// Types and validates `settings` for `command`, filling defaults. Also
    /// returns the names of supplied keys the command does not use.
    pub fn resolve(settings: &Settings, command: Command) -> Result<(Self, Vec<String>)> {
        let mut r = Reader {
            settings,
            resolved: BTreeMap::new(),
            read: BTreeSet::new(),
        };

        let h = r.f64_checked("h", None, positive, "positive")?.ok_or(CliError::Missing("h"))?;
        let n_spins = r.count("n_spins", 1000, 1)?;
        LmgParams::new(h, 0.0, n_spins)?;
        let eta = r.f64_or("eta", 2.0 * PI * 0.1, non_negative, "non-negative")?;
        let omega_c = r.f64_or("omega_c", 0.5 * h, positive, "positive")?;
        let beta = r.f64_or("beta", 1.79 / h, positive, "positive")?;
        BathParams::new(eta, omega_c, beta)?;
        let frame = r.choice(
            "frame",
            FrameChoice::Both,
            &[("bms", FrameChoice::Bms), ("polaron", FrameChoice::Polaron), ("both", FrameChoice::Both)],
        )?;
        let seed = match r.parsed("seed", |s| s.parse::<u64>().map_err(|_| format!("expected an unsigned integer, got `{s}`")))? {
            Some((v, _)) => v,
            None => 0,
        };
        r.record("seed", seed.to_string());
        let format = r.choice("format", Format::Csv, &[("csv", Format::Csv), ("json", Format::Json)])?;
        let execution = r.choice(
            "execution",
            Execution::Parallel,
            &[("parallel", Execution::Parallel), ("serial", Execution::Serial)],
        )?;

        let variables = [
            ("gamma_x", Variable::GammaX),
            ("temperature", Variable::Temperature),
            ("tau", Variable::Tau),
        ];
        let variable = match command {
            Command::Trajectory => None,
            Command::Spectrum | Command::Magnetization | Command::Occupation => {
                Some(r.choice("variable", Variable::GammaX, &variables[..1])?)
            }
            Command::Wtd => Some(r.choice("variable", Variable::Tau, &[variables[0], variables[2]])?),
            Command::Sweep => Some(r.choice("variable", Variable::GammaX, &variables)?),
        };

        let sweep = match variable {
            None => None,
            Some(variable) => {
                type Defaults = (f64, f64, usize, fn(f64) -> bool, &'static str);
                let (start, stop, steps, check, what): Defaults = match variable {
                    Variable::GammaX => (0.0, 2.0 * h, 41, non_negative, "non-negative"),
                    Variable::Tau => (0.0, 50.0 / h, 201, non_negative, "non-negative"),
                    Variable::Temperature => (0.05 * h, 2.0 * h, 40, positive, "positive"),
                };
                let start = r.f64_or("start", start, check, what)?;
                let stop = r.f64_or("stop", stop, check, what)?;
                let steps = r.count("steps", steps, 2)?;
                if start == stop {
                    return Err(CliError::Invalid(format!("sweep range is empty: start = stop = {start}")));
                }
                Some(SweepSpec {
                    variable,
                    start,
                    stop,
                    steps,
                })
            }
        };
        let swept = |v: Variable| sweep.is_some_and(|s| s.variable == v);

        let outputs = match command {
            Command::Sweep => r.list(
                "outputs",
                vec![Output::Omega, Output::Dd, Output::Aa],
                |s| {
                    Output::ALL
                        .iter()
                        .find(|(_, n)| *n == s)
                        .map(|(o, _)| *o)
                        .ok_or_else(|| {
                            let names: Vec<&str> = Output::ALL.iter().map(|(_, n)| *n).collect();
                            format!("unknown output `{s}`; expected one of {}", names.join(", "))
                        })
                },
                |o| o.as_str().to_string(),
            )?,
            Command::Spectrum => vec![Output::EnergyExact, Output::EnergyBoson],
            Command::Magnetization => vec![Output::JzExact, Output::JzBoson],
            Command::Occupation => vec![
                Output::Coupling,
                Output::Omega,
                Output::Dd,
                Output::Aa,
                Output::Rate,
                Output::Nb,
            ],
            Command::Wtd => vec![Output::Wtd],
            Command::Trajectory => vec![],
        };
        let wants = |o: Output| outputs.contains(&o);

        let gamma_x = if command == Command::Trajectory || (sweep.is_some() && !swept(Variable::GammaX)) {
            Some(r.f64_checked("gamma_x", None, non_negative, "non-negative")?.ok_or(CliError::Missing("gamma_x"))?)
        } else {
            None
        };
        let tau = if wants(Output::Wtd) && !swept(Variable::Tau) {
            Some(r.f64_or("tau", 0.0, non_negative, "non-negative")?)
        } else {
            None
        };
        let levels = if wants(Output::EnergyExact) || wants(Output::EnergyBoson) {
            r.count("levels", 3, 1)?
        } else {
            3
        };
        let betas = if command == Command::Magnetization {
            r.list("betas", vec![beta], |s| parse_f64(s).and_then(|v| if v > 0.0 { Ok(v) } else { Err(format!("must be positive, got {v}")) }), |v| fmt_f64(*v))?
        } else {
            vec![]
        };
        let kinds = if wants(Output::Wtd) || command == Command::Trajectory {
            r.list("kinds", WtdKind::ALL.to_vec(), |s| s.parse::<WtdKind>().map_err(|e| e.to_string()), |k| k.as_str().to_string())?
        } else {
            WtdKind::ALL.to_vec()
        };
        let method = if wants(Output::Wtd) {
            r.choice(
                "method",
                WtdMethod::Analytic,
                &[("analytic", WtdMethod::Analytic), ("numeric", WtdMethod::Numeric), ("both", WtdMethod::Both)],
            )?
        } else {
            WtdMethod::Analytic
        };

        let (mut jumps, mut chains, mut bin_width, mut max_tau, mut events) = (1_000_000, 8, None, None, None);
        if command == Command::Trajectory {
            jumps = r.count("jumps", jumps, 1)?;
            chains = r.count("chains", chains, 1)?;
            if chains > jumps {
                return Err(CliError::Invalid(format!("chains ({chains}) exceeds jumps ({jumps})")));
            }
            bin_width = r.f64_checked("bin_width", None, positive, "positive")?;
            max_tau = r.f64_checked("max_tau", None, positive, "positive")?;
            if let (Some(b), Some(m)) = (bin_width, max_tau) {
                if m <= b {
                    return Err(CliError::Invalid(format!("max_tau ({m}) must exceed bin_width ({b})")));
                }
            }
            events = r.path("events");
        }
        let out = r.path("out");

        let unused: Vec<String> = settings
            .keys()
            .filter(|k| !r.read.contains(k))
            .map(str::to_string)
            .collect();
        let config = RunConfig {
            command,
            h,
            n_spins,
            eta,
            omega_c,
            beta,
            frame,
            seed,
            format,
            execution,
            gamma_x,
            sweep,
            tau,
            levels,
            betas,
            kinds,
            method,
            outputs,
            jumps,
            chains,
            bin_width,
            max_tau,
            events,
            out,
            parameters: r.resolved,
        };
        Ok((config, unused))
    }

    /// Resolved parameters in canonical form, defaults included. Feeding
    /// these back through [`Settings::parse`] and [`RunConfig::resolve`]
    /// gives an equal config (apart from output format and paths).
    pub fn parameters(&self) -> Vec<(&'static str, String)> {
        self.parameters
            .iter()
            .map(|(&i, v)| (KEYS[i], v.clone()))
            .filter(|(k, _)| !NOT_ECHOED.contains(k))
            .collect()
    }

    pub fn lmg(&self, gamma_x: f64) -> lmg_core::Result<LmgParams> {
        LmgParams::new(self.h, gamma_x, self.n_spins)
    }

    pub fn bath(&self, beta: f64) -> lmg_core::Result<BathParams> {
        BathParams::new(self.eta, self.omega_c, beta)
    }

    /// Same parameters with output format and paths reset.
    pub fn without_output(&self) -> Self {
        let mut c = RunConfig {
            format: Format::Csv,
            events: None,
            out: None,
            ..self.clone()
        };
        for key in NOT_ECHOED {
            let idx = KEYS.iter().position(|k| k == key).expect("known key");
            c.parameters.remove(&idx);
        }
        c
    }
}
