//! Run configuration.
//!
//! Files are TOML: `key = value` pairs, `[section]` headers and `#`
//! comments. Every key is optional; command-line flags override the file.
//!
//! ```toml
//! command = "settle"
//! coupling = "M2B2"
//! seed = 3
//!
//! [stokes]
//! length = 32
//! forcing = 1e-5
//! nu = 0.1
//!
//! [settling]
//! regime = "C"
//! resolution = 36
//!
//! [output]
//! directory = "runs"
//! dump_every = 0
//! ```

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::Deserialize;
use toml::Spanned;

use crate::bench::settling::{Regime, SettlingCase, RESOLUTIONS};
use crate::bench::stokes::StokesCase;
use crate::error::{ConfigError, Location};
use crate::simulation::CouplingKind;

/// Environment variable naming the default output root.
pub const OUTPUT_ROOT_ENV: &str = "PARTICLE_LBM_OUTPUT";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Command {
    Stokes,
    Calibrate,
    Settle,
    Sweep,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Stokes => "stokes",
            Command::Calibrate => "calibrate",
            Command::Settle => "settle",
            Command::Sweep => "sweep",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [Command::Stokes, Command::Calibrate, Command::Settle, Command::Sweep]
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| ConfigError::invalid("command", format!("unknown command `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StokesConfig {
    pub length: usize,
    pub forcing: f64,
    pub nu: f64,
    pub window: u64,
    pub tolerance: f64,
    pub max_steps: u64,
}

impl Default for StokesConfig {
    fn default() -> Self {
        let c = StokesCase::new(CouplingKind::CLI, 0.1);
        Self {
            length: c.length,
            forcing: c.forcing,
            nu: c.nu,
            window: c.window,
            tolerance: c.tolerance,
            max_steps: c.max_steps,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SettlingConfig {
    pub regime: Regime,
    pub resolution: usize,
    /// Allows resolutions without reference data.
    pub force_resolution: bool,
    /// Overrides the Galileo number of the regime.
    pub galileo: Option<f64>,
    pub duration: f64,
    pub transient: f64,
    pub subcycles: usize,
    pub perturbation: f64,
    pub calibration_steps: Option<u64>,
    pub max_steps: Option<u64>,
    /// Number of perturbed samples with consecutive seeds; defaults to the
    /// regime's sample count.
    pub samples: Option<usize>,
    /// Starting viscosity of the calibration; it also fixes the inflow speed.
    pub nu0: f64,
}

impl Default for SettlingConfig {
    fn default() -> Self {
        let c = SettlingCase::new(Regime::A, 18, CouplingKind::CLI);
        Self {
            regime: c.regime,
            resolution: c.resolution,
            force_resolution: false,
            galileo: None,
            duration: c.duration,
            transient: c.transient,
            subcycles: c.subcycles,
            perturbation: c.perturbation,
            calibration_steps: c.calibration_steps,
            max_steps: c.max_steps,
            samples: None,
            nu0: c.nu0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputConfig {
    /// Root under which each run creates its own directory. Falls back to
    /// `$PARTICLE_LBM_OUTPUT`, then `output`.
    pub directory: Option<PathBuf>,
    /// Steps between volumetric dumps; 0 disables them.
    pub dump_every: u64,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            directory: None,
            dump_every: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub coupling: CouplingKind,
    pub seed: u64,
    /// Run list of a sweep.
    pub list: Option<PathBuf>,
    pub stokes: StokesConfig,
    pub settling: SettlingConfig,
    pub output: OutputConfig,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        Self {
            command,
            coupling: CouplingKind::CLI,
            seed: 1,
            list: None,
            stokes: StokesConfig::default(),
            settling: SettlingConfig::default(),
            output: OutputConfig::default(),
        }
    }

    /// Parses a configuration text; `command` applies when the text names none.
    pub fn parse(text: &str, command: Command) -> Result<Self, ConfigError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| translate(text, e))?;
        let mut cfg = Self::new(command);
        let loc = |s: &std::ops::Range<usize>| Some(Location::from_offset(text, s.start));
        if let Some(v) = &raw.command {
            cfg.command = v.get_ref().parse().map_err(|e| relocate(e, loc(&v.span())))?;
        }
        if let Some(v) = &raw.coupling {
            cfg.coupling = v.get_ref().parse().map_err(|e| relocate(e, loc(&v.span())))?;
        }
        if let Some(v) = raw.seed {
            cfg.seed = v;
        }
        if let Some(v) = raw.list {
            cfg.list = Some(v);
        }
        if let Some(s) = raw.stokes {
            let d = &mut cfg.stokes;
            set(&mut d.length, s.length);
            set(&mut d.forcing, s.forcing);
            set(&mut d.nu, s.nu);
            set(&mut d.window, s.window);
            set(&mut d.tolerance, s.tolerance);
            set(&mut d.max_steps, s.max_steps);
        }
        if let Some(s) = raw.settling {
            let d = &mut cfg.settling;
            if let Some(v) = &s.regime {
                d.regime = v.get_ref().parse().map_err(|e| relocate(e, loc(&v.span())))?;
            }
            set(&mut d.resolution, s.resolution);
            set(&mut d.force_resolution, s.force_resolution);
            if s.galileo.is_some() {
                d.galileo = s.galileo;
            }
            set(&mut d.duration, s.duration);
            set(&mut d.transient, s.transient);
            set(&mut d.subcycles, s.subcycles);
            set(&mut d.perturbation, s.perturbation);
            if s.calibration_steps.is_some() {
                d.calibration_steps = s.calibration_steps;
            }
            if s.max_steps.is_some() {
                d.max_steps = s.max_steps;
            }
            if s.samples.is_some() {
                d.samples = s.samples;
            }
            set(&mut d.nu0, s.nu0);
        }
        if let Some(o) = raw.output {
            if let Some(v) = o.directory {
                cfg.output.directory = Some(v);
            }
            if let Some(v) = o.dump_every {
                cfg.output.dump_every = v;
            }
        }
        cfg.validate().map_err(|e| match e {
            ConfigError::Invalid { key, message, .. } => {
                let location = raw_location(text, &key);
                ConfigError::Invalid { key, message, location }
            }
            other => other,
        })?;
        Ok(cfg)
    }

    /// Range and consistency checks.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let s = &self.settling;
        if !s.force_resolution && !RESOLUTIONS.contains(&s.resolution) {
            return Err(ConfigError::invalid(
                "settling.resolution",
                format!("{} is not one of {:?}; set force_resolution = true to use it anyway", s.resolution, RESOLUTIONS),
            ));
        }
        if s.resolution < 4 {
            return Err(ConfigError::invalid("settling.resolution", "at least 4 cells per diameter are needed"));
        }
        positive("settling.duration", s.duration)?;
        if !(0.0..1.0).contains(&s.transient) {
            return Err(ConfigError::invalid("settling.transient", "must lie in [0, 1)"));
        }
        if s.subcycles == 0 {
            return Err(ConfigError::invalid("settling.subcycles", "must be at least 1"));
        }
        if !(s.perturbation >= 0.0 && s.perturbation < 0.5) {
            return Err(ConfigError::invalid("settling.perturbation", "must lie in [0, 0.5)"));
        }
        if let Some(g) = s.galileo {
            positive("settling.galileo", g)?;
        }
        positive("settling.nu0", s.nu0)?;
        if s.samples == Some(0) {
            return Err(ConfigError::invalid("settling.samples", "must be at least 1"));
        }
        let k = &self.stokes;
        positive("stokes.nu", k.nu)?;
        positive("stokes.forcing", k.forcing)?;
        positive("stokes.tolerance", k.tolerance)?;
        if k.length < 8 || k.length % 2 != 0 {
            return Err(ConfigError::invalid("stokes.length", "must be even and at least 8"));
        }
        if k.window == 0 {
            return Err(ConfigError::invalid("stokes.window", "must be at least 1"));
        }
        if self.command == Command::Sweep && self.list.is_none() {
            return Err(ConfigError::invalid("list", "a sweep needs a run list"));
        }
        Ok(())
    }

    /// Cells per diameter, as used in directory names.
    pub fn resolution(&self) -> usize {
        match self.command {
            Command::Stokes => self.stokes.length / 2,
            _ => self.settling.resolution,
        }
    }

    /// Name of the run's own output directory.
    pub fn run_name(&self) -> String {
        let base = format!("{}-{}-{}-s{}", self.command, self.coupling, self.resolution(), self.seed);
        match self.command {
            Command::Stokes => format!("{base}-nu{}", self.stokes.nu),
            _ => base,
        }
    }

    /// Output root: configured directory, environment, or `output`.
    pub fn output_root(&self) -> PathBuf {
        self.output
            .directory
            .clone()
            .or_else(|| std::env::var_os(OUTPUT_ROOT_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("output"))
    }

    pub fn run_directory(&self) -> PathBuf {
        self.output_root().join(self.run_name())
    }

    pub fn stokes_case(&self) -> StokesCase {
        let k = &self.stokes;
        StokesCase {
            length: k.length,
            forcing: k.forcing,
            window: k.window,
            tolerance: k.tolerance,
            max_steps: k.max_steps,
            ..StokesCase::new(self.coupling, k.nu)
        }
    }

    /// Samples of a settling run.
    pub fn samples(&self) -> usize {
        self.settling.samples.unwrap_or_else(|| self.settling.regime.samples())
    }

    pub fn settling_case(&self) -> SettlingCase {
        let s = &self.settling;
        let mut c = SettlingCase::new(s.regime, s.resolution, self.coupling);
        if let Some(g) = s.galileo {
            c.galileo = g;
        }
        c.seed = self.seed;
        c.duration = s.duration;
        c.transient = s.transient;
        c.subcycles = s.subcycles;
        c.perturbation = s.perturbation;
        c.calibration_steps = s.calibration_steps;
        c.max_steps = s.max_steps;
        c.nu0 = s.nu0;
        c
    }

    /// The effective configuration as TOML; parsing it gives back `self`.
    pub fn to_toml(&self) -> String {
        let mut out = String::new();
        let mut line = |s: String| {
            out.push_str(&s);
            out.push('\n');
        };
        let float = |v: f64| format!("{v:?}");
        line(format!("command = \"{}\"", self.command));
        line(format!("coupling = \"{}\"", self.coupling));
        line(format!("seed = {}", self.seed));
        if let Some(l) = &self.list {
            line(format!("list = {}", toml_string(&l.to_string_lossy())));
        }
        let k = &self.stokes;
        line(String::new());
        line("[stokes]".into());
        line(format!("length = {}", k.length));
        line(format!("forcing = {}", float(k.forcing)));
        line(format!("nu = {}", float(k.nu)));
        line(format!("window = {}", k.window));
        line(format!("tolerance = {}", float(k.tolerance)));
        line(format!("max_steps = {}", k.max_steps));
        let s = &self.settling;
        line(String::new());
        line("[settling]".into());
        line(format!("regime = \"{}\"", s.regime));
        line(format!("resolution = {}", s.resolution));
        line(format!("force_resolution = {}", s.force_resolution));
        if let Some(g) = s.galileo {
            line(format!("galileo = {}", float(g)));
        }
        line(format!("duration = {}", float(s.duration)));
        line(format!("transient = {}", float(s.transient)));
        line(format!("subcycles = {}", s.subcycles));
        line(format!("perturbation = {}", float(s.perturbation)));
        if let Some(n) = s.calibration_steps {
            line(format!("calibration_steps = {n}"));
        }
        if let Some(n) = s.max_steps {
            line(format!("max_steps = {n}"));
        }
        if let Some(n) = s.samples {
            line(format!("samples = {n}"));
        }
        line(format!("nu0 = {}", float(s.nu0)));
        line(String::new());
        line("[output]".into());
        if let Some(d) = &self.output.directory {
            line(format!("directory = {}", toml_string(&d.to_string_lossy())));
        }
        line(format!("dump_every = {}", self.output.dump_every));
        out
    }
}

fn toml_string(s: &str) -> String {
    toml::Value::String(s.to_owned()).to_string()
}

fn positive(key: &str, v: f64) -> Result<(), ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(ConfigError::invalid(key, format!("{v} is not a positive number")))
    }
}

fn set<T>(target: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *target = v;
    }
}

fn relocate(e: ConfigError, location: Option<Location>) -> ConfigError {
    match e {
        ConfigError::Invalid { key, message, .. } => ConfigError::Invalid { key, message, location },
        other => other,
    }
}

/// Position of the value of a dotted `section.key` in the text.
fn raw_location(text: &str, dotted: &str) -> Option<Location> {
    let (section, key) = dotted.rsplit_once('.').unwrap_or(("", dotted));
    let mut current = "";
    let mut offset = 0;
    for line in text.split_inclusive('\n') {
        let t = line.trim();
        if let Some(name) = t.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
            current = name.trim();
        } else if current == section {
            if let Some((k, _)) = t.split_once('=') {
                if k.trim() == key {
                    let col = line.find('=').map_or(0, |i| i + 1);
                    let skip = line[col..].len() - line[col..].trim_start().len();
                    return Some(Location::from_offset(text, offset + col + skip));
                }
            }
        }
        offset += line.len();
    }
    None
}

fn translate(text: &str, e: toml::de::Error) -> ConfigError {
    let location = e.span().map(|s| Location::from_offset(text, s.start));
    let message = e.message().to_owned();
    if let Some(rest) = message.strip_prefix("unknown field `") {
        let key = rest.split('`').next().unwrap_or_default().to_owned();
        return ConfigError::UnknownKey { key, location };
    }
    ConfigError::Syntax { message, location }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    command: Option<Spanned<String>>,
    coupling: Option<Spanned<String>>,
    seed: Option<u64>,
    list: Option<PathBuf>,
    stokes: Option<RawStokes>,
    settling: Option<RawSettling>,
    output: Option<RawOutput>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStokes {
    length: Option<usize>,
    forcing: Option<f64>,
    nu: Option<f64>,
    window: Option<u64>,
    tolerance: Option<f64>,
    max_steps: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSettling {
    regime: Option<Spanned<String>>,
    resolution: Option<usize>,
    force_resolution: Option<bool>,
    galileo: Option<f64>,
    duration: Option<f64>,
    transient: Option<f64>,
    subcycles: Option<usize>,
    perturbation: Option<f64>,
    nu0: Option<f64>,
    samples: Option<usize>,
    calibration_steps: Option<u64>,
    max_steps: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    directory: Option<PathBuf>,
    dump_every: Option<u64>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let c = RunConfig::parse("", Command::Stokes).unwrap();
        assert_eq!(c, RunConfig::new(Command::Stokes));
        assert_eq!(c.stokes.length, 32);
        assert_eq!(c.stokes_case().diameter(), 16.0);
    }

    #[test]
    fn regime_case_from_file() {
        let text = "coupling = \"M2B2\"\n[settling]\nresolution = 24\nregime = \"A\"\n";
        let c = RunConfig::parse(text, Command::Settle).unwrap();
        let case = c.settling_case();
        assert_eq!((case.regime, case.coupling, case.resolution), (Regime::A, CouplingKind::M2B2, 24));
        assert_eq!(c.run_name(), "settle-M2B2-24-s1");
    }

    #[test]
    fn unsupported_resolution_is_rejected_with_location() {
        let text = "# comment\n[settling]\nresolution = 17\n";
        match RunConfig::parse(text, Command::Settle) {
            Err(ConfigError::Invalid { key, location, .. }) => {
                assert_eq!(key, "settling.resolution");
                assert_eq!(location, Some(Location { line: 3, column: 14 }));
            }
            other => panic!("{other:?}"),
        }
        let forced = "[settling]\nresolution = 17\nforce_resolution = true\n";
        assert_eq!(RunConfig::parse(forced, Command::Settle).unwrap().settling.resolution, 17);
    }

    #[test]
    fn unknown_key_is_located() {
        let text = "seed = 2\n[stokes]\nlenght = 32\n";
        match RunConfig::parse(text, Command::Stokes) {
            Err(ConfigError::UnknownKey { key, location }) => {
                assert_eq!(key, "lenght");
                assert_eq!(location.unwrap().line, 3);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn type_mismatch_is_located() {
        let err = RunConfig::parse("\nseed = \"x\"\n", Command::Settle).unwrap_err();
        assert!(matches!(err, ConfigError::Syntax { .. }));
        assert_eq!(err.location().unwrap().line, 2);
        let err = RunConfig::parse("coupling = \"XX\"\n", Command::Settle).unwrap_err();
        assert_eq!(err.location(), Some(Location { line: 1, column: 12 }));
    }

    #[test]
    fn echo_round_trips() {
        let mut c = RunConfig::new(Command::Settle);
        c.coupling = CouplingKind::M3B2;
        c.seed = 7;
        c.settling.regime = Regime::C;
        c.settling.resolution = 36;
        c.settling.galileo = Some(190.5);
        c.settling.max_steps = Some(12);
        c.stokes.nu = 0.05;
        c.stokes.forcing = 1.0e-5 / 3.0;
        c.output.directory = Some(PathBuf::from("runs/a \"b\""));
        c.output.dump_every = 100;
        let again = RunConfig::parse(&c.to_toml(), Command::Stokes).unwrap();
        assert_eq!(again, c);
        let d = RunConfig::new(Command::Stokes);
        assert_eq!(RunConfig::parse(&d.to_toml(), Command::Settle).unwrap(), d);
    }

    #[test]
    fn sweep_needs_a_list() {
        assert!(RunConfig::parse("", Command::Sweep).is_err());
        assert!(RunConfig::parse("list = \"runs.txt\"", Command::Sweep).is_ok());
    }
}
