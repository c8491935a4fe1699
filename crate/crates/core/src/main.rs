use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use particle_lbm::config::{Command, RunConfig, OUTPUT_ROOT_ENV};
use particle_lbm::run::execute;
use particle_lbm::{ConfigError, SimError};

/// Resolved-sphere lattice Boltzmann benchmarks.
#[derive(Debug, Parser)]
#[command(version, after_help = format!("The output root defaults to ${OUTPUT_ROOT_ENV}, then ./output."))]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Drag on a periodic array of fixed spheres.
    Stokes(Flags),
    /// Galileo-number calibration of a settling case.
    Calibrate(Flags),
    /// Calibration followed by the free settling motion.
    Settle(Flags),
    /// Runs every command line of a list file, one per line.
    Sweep {
        #[arg(long)]
        list: PathBuf,
        /// Defaults for every run of the list.
        #[command(flatten)]
        flags: Flags,
    },
}

#[derive(Debug, Clone, Default, Args)]
struct Flags {
    /// TOML configuration file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// BB, CLI, MR, M1B1, M2B2 or M3B2.
    #[arg(long)]
    coupling: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output root; each run writes into its own subdirectory.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Steps between volumetric dumps, 0 for none.
    #[arg(long)]
    dump_every: Option<u64>,
    /// Step budget of the Stokes run or of the settling phase.
    #[arg(long)]
    max_steps: Option<u64>,
    #[arg(long, help_heading = "Stokes array")]
    nu: Option<f64>,
    /// Box edge in cells; the diameter is half of it.
    #[arg(long, help_heading = "Stokes array")]
    length: Option<usize>,
    #[arg(long, help_heading = "Stokes array")]
    forcing: Option<f64>,
    /// A, B, C or D.
    #[arg(long, help_heading = "Settling sphere")]
    regime: Option<String>,
    /// Cells per diameter.
    #[arg(long, help_heading = "Settling sphere")]
    resolution: Option<usize>,
    /// Accepts resolutions without reference data.
    #[arg(long, help_heading = "Settling sphere")]
    force_resolution: bool,
    #[arg(long, help_heading = "Settling sphere")]
    galileo: Option<f64>,
    /// Free-motion duration in gravitational time units.
    #[arg(long, help_heading = "Settling sphere")]
    duration: Option<f64>,
    /// Truncated single-pass calibration with this many steps.
    #[arg(long, help_heading = "Settling sphere")]
    calibration_steps: Option<u64>,
    #[arg(long, help_heading = "Settling sphere")]
    samples: Option<usize>,
    /// Starting viscosity of the calibration.
    #[arg(long, help_heading = "Settling sphere")]
    nu0: Option<f64>,
}

impl Flags {
    /// `self` with unset values taken from `base`.
    fn or(self, base: &Flags) -> Flags {
        let b = base.clone();
        Flags {
            config: self.config.or(b.config),
            coupling: self.coupling.or(b.coupling),
            seed: self.seed.or(b.seed),
            output: self.output.or(b.output),
            dump_every: self.dump_every.or(b.dump_every),
            max_steps: self.max_steps.or(b.max_steps),
            nu: self.nu.or(b.nu),
            length: self.length.or(b.length),
            forcing: self.forcing.or(b.forcing),
            regime: self.regime.or(b.regime),
            resolution: self.resolution.or(b.resolution),
            force_resolution: self.force_resolution || b.force_resolution,
            galileo: self.galileo.or(b.galileo),
            duration: self.duration.or(b.duration),
            calibration_steps: self.calibration_steps.or(b.calibration_steps),
            samples: self.samples.or(b.samples),
            nu0: self.nu0.or(b.nu0),
        }
    }

    fn config(&self, command: Command) -> Result<RunConfig, SimError> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| SimError::io(path, e))?;
                RunConfig::parse(&text, command).map_err(|e| in_file(path, e))?
            }
            None => RunConfig::new(command),
        };
        cfg.command = command;
        if let Some(v) = &self.coupling {
            cfg.coupling = v.parse()?;
        }
        if let Some(v) = &self.regime {
            cfg.settling.regime = v.parse()?;
        }
        set(&mut cfg.seed, self.seed);
        if self.output.is_some() {
            cfg.output.directory = self.output.clone();
        }
        set(&mut cfg.output.dump_every, self.dump_every);
        if let Some(n) = self.max_steps {
            match command {
                Command::Stokes => cfg.stokes.max_steps = n,
                _ => cfg.settling.max_steps = Some(n),
            }
        }
        set(&mut cfg.stokes.nu, self.nu);
        set(&mut cfg.stokes.length, self.length);
        set(&mut cfg.stokes.forcing, self.forcing);
        set(&mut cfg.settling.resolution, self.resolution);
        cfg.settling.force_resolution |= self.force_resolution;
        if self.galileo.is_some() {
            cfg.settling.galileo = self.galileo;
        }
        set(&mut cfg.settling.duration, self.duration);
        if self.calibration_steps.is_some() {
            cfg.settling.calibration_steps = self.calibration_steps;
        }
        if self.samples.is_some() {
            cfg.settling.samples = self.samples;
        }
        set(&mut cfg.settling.nu0, self.nu0);
        cfg.validate()?;
        Ok(cfg)
    }
}

fn set<T: Copy>(target: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *target = v;
    }
}

fn in_file(path: &Path, e: ConfigError) -> SimError {
    let message = format!("{}: {e}", path.display());
    SimError::Config(ConfigError::Syntax {
        message,
        location: e.location(),
    })
}

fn run(cmd: Cmd) -> Result<(), SimError> {
    let (command, flags) = match cmd {
        Cmd::Stokes(f) => (Command::Stokes, f),
        Cmd::Calibrate(f) => (Command::Calibrate, f),
        Cmd::Settle(f) => (Command::Settle, f),
        Cmd::Sweep { list, flags } => return sweep(&list, &flags),
    };
    let dir = execute(&flags.config(command)?)?;
    println!("{}", dir.display());
    Ok(())
}

/// Runs each line of the list in order. Blank lines and `#` comments are
/// skipped. Every run is attempted; the first failure decides the result.
fn sweep(list: &Path, base: &Flags) -> Result<(), SimError> {
    let text = fs::read_to_string(list).map_err(|e| SimError::io(list, e))?;
    let mut lines = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let words = std::iter::once("particle-lbm").chain(line.split_whitespace());
        let cli = Cli::try_parse_from(words).map_err(|e| {
            let message = format!("{}: {}", list.display(), e.kind());
            let location = Some(particle_lbm::error::Location { line: i + 1, column: 1 });
            SimError::Config(ConfigError::Syntax { message, location })
        })?;
        let (command, flags) = match cli.command {
            Cmd::Stokes(f) => (Command::Stokes, f),
            Cmd::Calibrate(f) => (Command::Calibrate, f),
            Cmd::Settle(f) => (Command::Settle, f),
            Cmd::Sweep { .. } => {
                let message = format!("{}: sweeps cannot be nested", list.display());
                let location = Some(particle_lbm::error::Location { line: i + 1, column: 1 });
                return Err(SimError::Config(ConfigError::Syntax { message, location }));
            }
        };
        lines.push(flags.or(base).config(command)?);
    }
    let mut first_failure = None;
    for cfg in &lines {
        match execute(cfg) {
            Ok(dir) => println!("{}", dir.display()),
            Err(e) => {
                log::error!("{}: {e}", cfg.run_name());
                first_failure.get_or_insert(e);
            }
        }
    }
    first_failure.map_or(Ok(()), Err)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::error!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
