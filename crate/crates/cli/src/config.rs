//! Run configuration, read from TOML.
//!
//! ```toml
//! temperatures = [0.1, 0.5, 1.0]      # or { from = 0.1, to = 2.0, steps = 20 }
//! k = [3.141592653589793]             # defaults to the model's k grid
//! witnesses = ["concurrence", "qfi"]
//! filter = "qfi"
//! out = "out"
//! formats = ["csv", "json", "svg"]
//!
//! [model]
//! kind = "HeisenbergChain"
//! n_sites = 8
//! boundary = "Periodic"
//! ```

use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use qwitness_core::model::{Axis, SpinModel};
use qwitness_core::spectral::FilterKind;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Simulate,
    Witness,
    Qfi,
    IngestQfi,
    Sweep,
    Report,
}

impl Command {
    pub fn needs_model(self) -> bool {
        !matches!(self, Command::IngestQfi | Command::Report)
    }

    pub fn is_thermal(self) -> bool {
        matches!(
            self,
            Command::Simulate | Command::Witness | Command::Qfi | Command::Sweep
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WitnessKind {
    Concurrence,
    EntanglementOfFormation,
    Discord,
    Susceptibility,
    Tangle,
    Qfi,
    Nqfi,
    Coherence,
}

impl WitnessKind {
    pub const ALL: [WitnessKind; 8] = [
        WitnessKind::Concurrence,
        WitnessKind::EntanglementOfFormation,
        WitnessKind::Discord,
        WitnessKind::Susceptibility,
        WitnessKind::Tangle,
        WitnessKind::Qfi,
        WitnessKind::Nqfi,
        WitnessKind::Coherence,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            WitnessKind::Concurrence => "concurrence",
            WitnessKind::EntanglementOfFormation => "entanglement-of-formation",
            WitnessKind::Discord => "discord",
            WitnessKind::Susceptibility => "susceptibility",
            WitnessKind::Tangle => "tangle",
            WitnessKind::Qfi => "qfi",
            WitnessKind::Nqfi => "nqfi",
            WitnessKind::Coherence => "coherence",
        }
    }

    /// Evaluated once per wavevector rather than once per temperature.
    pub fn is_spectral(self) -> bool {
        matches!(self, WitnessKind::Qfi | WitnessKind::Nqfi | WitnessKind::Coherence)
    }
}

impl fmt::Display for WitnessKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    #[serde(alias = "json-lines", alias = "jsonl")]
    Json,
    Svg,
}

impl FromStr for Format {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s.trim() {
            "csv" => Ok(Format::Csv),
            "json" | "jsonl" | "json-lines" => Ok(Format::Json),
            "svg" => Ok(Format::Svg),
            other => Err(CliError::Config(format!("unknown output format '{other}'"))),
        }
    }
}

/// Either an explicit list or an inclusive linear range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Temperatures {
    List(Vec<f64>),
    Range { from: f64, to: f64, steps: usize },
}

impl Default for Temperatures {
    fn default() -> Self {
        Temperatures::List(Vec::new())
    }
}

impl Temperatures {
    pub fn values(&self) -> Vec<f64> {
        match *self {
            Temperatures::List(ref v) => v.clone(),
            Temperatures::Range { from, to, steps } => match steps {
                0 => Vec::new(),
                1 => vec![from],
                _ => (0..steps)
                    .map(|i| from + (to - from) * i as f64 / (steps - 1) as f64)
                    .collect(),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IngestConfig {
    pub file: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temperature_override: Option<f64>,
    /// Bins above this frequency are excluded and reported as tail.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<Command>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<SpinModel>,
    #[serde(default)]
    pub temperatures: Temperatures,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<Vec<f64>>,
    #[serde(default)]
    pub witnesses: Vec<WitnessKind>,
    #[serde(default = "default_filter")]
    pub filter: String,
    /// Component of the collective operator for spectral witnesses.
    #[serde(default = "default_axis")]
    pub axis: String,
    /// Site pair for two-site witnesses.
    #[serde(default = "default_pair")]
    pub pair: (usize, usize),
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    #[serde(default = "default_formats")]
    pub formats: Vec<Format>,
    /// Frequency bins of the spectra written by `simulate`.
    #[serde(default = "default_bins")]
    pub bins: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ingest: Option<IngestConfig>,
}

fn default_filter() -> String {
    "qfi".into()
}

fn default_axis() -> String {
    "z".into()
}

fn default_pair() -> (usize, usize) {
    (0, 1)
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

fn default_formats() -> Vec<Format> {
    vec![Format::Csv, Format::Json]
}

fn default_bins() -> usize {
    200
}

pub const DEFAULT_TOLERANCE: f64 = qwitness_core::witness::DEFAULT_TOLERANCE;

/// A config with every default and command-line override applied and
/// checked.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub command: Command,
    pub config: RunConfig,
    pub model: Option<SpinModel>,
    pub temperatures: Vec<f64>,
    pub k: Vec<f64>,
    pub witnesses: Vec<WitnessKind>,
    pub filter: FilterKind,
    pub axis: Axis,
    pub tolerance: f64,
    pub formats: BTreeSet<Format>,
}

impl Resolved {
    pub fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Relative paths inside the config are taken relative to `dir`.
    pub fn rebase(&mut self, dir: &Path) {
        if let Some(ing) = &mut self.ingest {
            if ing.file.is_relative() {
                ing.file = dir.join(&ing.file);
            }
        }
    }

    /// Checks the config for `command` without touching the filesystem
    /// beyond existence checks on inputs.
    pub fn resolve(self, command: Command) -> Result<Resolved, CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        if let Some(c) = self.command {
            if c != command {
                log::warn!("config names command '{c:?}', running '{command:?}'");
            }
        }
        let tolerance = self.tolerance.unwrap_or(DEFAULT_TOLERANCE);
        if !(tolerance >= 0.0 && tolerance.is_finite()) {
            return bad(format!("tolerance {tolerance} must be finite and nonnegative"));
        }
        let filter: FilterKind = self.filter.parse().map_err(|e| CliError::Config(format!("{e}")))?;
        let axis = match self.axis.trim().to_ascii_lowercase().as_str() {
            "x" => Axis::X,
            "y" => Axis::Y,
            "z" => Axis::Z,
            other => return bad(format!("unknown axis '{other}'")),
        };
        let formats: BTreeSet<Format> = self.formats.iter().copied().collect();
        if formats.is_empty() {
            return bad("no output formats selected".into());
        }

        let model = if command.needs_model() {
            let Some(m) = self.model.clone() else {
                return bad("missing [model] section".into());
            };
            m.validate().map_err(|e| CliError::Config(e.to_string()))?;
            let (i, j) = self.pair;
            if i == j || i >= m.n_sites || j >= m.n_sites {
                return bad(format!("pair ({i}, {j}) is not two distinct sites of {}", m.n_sites));
            }
            Some(m)
        } else {
            None
        };

        let temperatures = self.temperatures.values();
        if command.is_thermal() && temperatures.is_empty() {
            return bad("temperature list is empty".into());
        }
        if let Some(t) = temperatures.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
            return bad(format!("temperature {t} must be finite and nonnegative"));
        }

        let k = match (&self.k, &model) {
            (Some(k), _) => k.clone(),
            (None, Some(m)) => m.k_grid(),
            (None, None) => Vec::new(),
        };
        if k.iter().any(|x| !x.is_finite()) {
            return bad("wavevectors must be finite".into());
        }

        let witnesses: Vec<WitnessKind> = {
            let mut seen = BTreeSet::new();
            self.witnesses.iter().copied().filter(|w| seen.insert(*w)).collect()
        };
        let applicable: Vec<WitnessKind> = match command {
            Command::Witness => witnesses.iter().copied().filter(|w| !w.is_spectral()).collect(),
            Command::Qfi => witnesses.iter().copied().filter(|w| w.is_spectral()).collect(),
            _ => witnesses.clone(),
        };
        if matches!(command, Command::Witness | Command::Qfi | Command::Sweep) {
            if witnesses.is_empty() {
                return bad("witness list is empty".into());
            }
            if applicable.is_empty() {
                return bad(format!("none of the listed witnesses apply to '{command:?}'"));
            }
            if applicable.iter().any(|w| w.is_spectral()) && k.is_empty() {
                return bad("spectral witnesses need at least one wavevector".into());
            }
        }

        if command == Command::Simulate && self.bins < 2 {
            return bad(format!("bins = {} must be at least 2", self.bins));
        }

        if command == Command::IngestQfi {
            let Some(ing) = &self.ingest else {
                return bad("missing [ingest] section".into());
            };
            if !ing.file.is_file() {
                return bad(format!("spectrum file {} does not exist", ing.file.display()));
            }
            if let Some(t) = ing.temperature_override {
                if !(t.is_finite() && t > 0.0) {
                    return bad(format!("temperature override {t} must be positive"));
                }
            }
        }

        Ok(Resolved {
            command,
            config: self,
            model,
            temperatures,
            k,
            witnesses: applicable,
            filter,
            axis,
            tolerance,
            formats,
        })
    }
}
