use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use lmg_cli::config::{Command, Origin, RunConfig, Settings};
use lmg_cli::{run, CliError};

#[derive(Parser)]
#[command(name = "lmg", version, about = "Dissipative LMG model: spectra, magnetization, occupations and waiting times")]
#[command(allow_negative_numbers = true)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
    #[command(flatten)]
    opts: Options,
}

#[derive(Subcommand, Clone, Copy)]
enum Sub {
    /// Lowest levels, exact and oscillator, against gamma_x.
    Spectrum,
    /// Magnetization per spin on a (gamma_x, beta) grid.
    Magnetization,
    /// Mode occupations and rates per frame against gamma_x.
    Occupation,
    /// Closed-form or Fock-sum waiting times against tau or gamma_x.
    Wtd,
    /// Sampled jump trajectories histogrammed into waiting times.
    Trajectory,
    /// Any outputs against gamma_x, temperature or tau.
    Sweep,
}

impl From<Sub> for Command {
    fn from(s: Sub) -> Self {
        match s {
            Sub::Spectrum => Command::Spectrum,
            Sub::Magnetization => Command::Magnetization,
            Sub::Occupation => Command::Occupation,
            Sub::Wtd => Command::Wtd,
            Sub::Trajectory => Command::Trajectory,
            Sub::Sweep => Command::Sweep,
        }
    }
}

/// Every flag mirrors a config key and overrides the file value. Values are
/// kept as text and validated by the config reader.
#[derive(Args)]
struct Options {
    /// Flat `key = value` config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    h: Option<String>,
    #[arg(long, global = true)]
    gamma_x: Option<String>,
    #[arg(long, global = true)]
    n_spins: Option<String>,
    #[arg(long, global = true)]
    eta: Option<String>,
    #[arg(long, global = true)]
    omega_c: Option<String>,
    #[arg(long, global = true)]
    beta: Option<String>,
    /// bms | polaron | both
    #[arg(long, global = true)]
    frame: Option<String>,
    #[arg(long, global = true)]
    seed: Option<String>,
    /// Output file; stdout if absent.
    #[arg(long, global = true)]
    out: Option<String>,
    /// csv | json
    #[arg(long, global = true)]
    format: Option<String>,
    /// parallel | serial
    #[arg(long, global = true)]
    execution: Option<String>,
    /// gamma_x | temperature | tau
    #[arg(long, global = true)]
    variable: Option<String>,
    #[arg(long, global = true)]
    start: Option<String>,
    #[arg(long, global = true)]
    stop: Option<String>,
    #[arg(long, global = true)]
    steps: Option<String>,
    #[arg(long, global = true)]
    tau: Option<String>,
    #[arg(long, global = true)]
    levels: Option<String>,
    /// Comma-separated inverse temperatures.
    #[arg(long, global = true)]
    betas: Option<String>,
    /// Comma-separated subset of ee,ae,ea,aa.
    #[arg(long, global = true)]
    kinds: Option<String>,
    /// analytic | numeric | both
    #[arg(long, global = true)]
    method: Option<String>,
    /// Comma-separated outputs for `sweep`.
    #[arg(long, global = true)]
    outputs: Option<String>,
    #[arg(long, global = true)]
    jumps: Option<String>,
    #[arg(long, global = true)]
    chains: Option<String>,
    #[arg(long, global = true)]
    bin_width: Option<String>,
    #[arg(long, global = true)]
    max_tau: Option<String>,
    /// Jump log of the first chain; `.bin` selects the binary format.
    #[arg(long, global = true)]
    events: Option<String>,
}

impl Options {
    fn overrides(&self) -> Result<Settings, CliError> {
        let flags = [
            ("h", &self.h),
            ("gamma_x", &self.gamma_x),
            ("n_spins", &self.n_spins),
            ("eta", &self.eta),
            ("omega_c", &self.omega_c),
            ("beta", &self.beta),
            ("frame", &self.frame),
            ("seed", &self.seed),
            ("out", &self.out),
            ("format", &self.format),
            ("execution", &self.execution),
            ("variable", &self.variable),
            ("start", &self.start),
            ("stop", &self.stop),
            ("steps", &self.steps),
            ("tau", &self.tau),
            ("levels", &self.levels),
            ("betas", &self.betas),
            ("kinds", &self.kinds),
            ("method", &self.method),
            ("outputs", &self.outputs),
            ("jumps", &self.jumps),
            ("chains", &self.chains),
            ("bin_width", &self.bin_width),
            ("max_tau", &self.max_tau),
            ("events", &self.events),
        ];
        let mut settings = Settings::default();
        for (key, value) in flags {
            if let Some(v) = value {
                let flag = format!("--{}", key.replace('_', "-"));
                settings.set(key, v.trim(), Origin::Flag(flag))?;
            }
        }
        Ok(settings)
    }
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    let mut settings = match &cli.opts.config {
        Some(path) => Settings::from_file(path)?,
        None => Settings::default(),
    };
    settings.merge(cli.opts.overrides()?);
    let (config, unused) = RunConfig::resolve(&settings, cli.command.into())?;
    for key in unused {
        eprintln!("warning: `{key}` is not used by `{}`", config.command.as_str());
    }
    let table = run(&config)?;
    match &config.out {
        Some(path) => {
            let file = File::create(path).map_err(|e| CliError::Io { path: path.clone(), source: e })?;
            let mut out = BufWriter::new(file);
            table
                .write(config.format, &mut out)
                .and_then(|_| out.flush())
                .map_err(|e| CliError::Io { path: path.clone(), source: e })
        }
        None => {
            let stdout = io::stdout();
            let mut out = stdout.lock();
            match table.write(config.format, &mut out).and_then(|_| out.flush()) {
                Err(e) if e.kind() == io::ErrorKind::BrokenPipe => Ok(()),
                r => r.map_err(|e| CliError::Io { path: "stdout".into(), source: e }),
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
