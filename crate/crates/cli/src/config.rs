//! Run configuration: command, flat parameter map, seed and output path.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{CliError, CliResult};

pub const DEFAULT_OUTPUT: &str = "pseudospec-out";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    FlatSpectrum,
    StabilityScan,
    OppenheimScan,
    Cartan,
    Properness,
    Sharpness,
    Ads3Stable,
    OrbitCount,
    Poincare,
    StabilityExperiment,
}

impl Command {
    pub const ALL: [Command; 10] = [
        Command::FlatSpectrum,
        Command::StabilityScan,
        Command::OppenheimScan,
        Command::Cartan,
        Command::Properness,
        Command::Sharpness,
        Command::Ads3Stable,
        Command::OrbitCount,
        Command::Poincare,
        Command::StabilityExperiment,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::FlatSpectrum => "flat-spectrum",
            Command::StabilityScan => "stability-scan",
            Command::OppenheimScan => "oppenheim-scan",
            Command::Cartan => "cartan",
            Command::Properness => "properness",
            Command::Sharpness => "sharpness",
            Command::Ads3Stable => "ads3-stable",
            Command::OrbitCount => "orbit-count",
            Command::Poincare => "poincare",
            Command::StabilityExperiment => "stability-experiment",
        }
    }

    /// Every accepted parameter with its default; `null` marks an optional key.
    pub fn defaults(self) -> BTreeMap<String, Value> {
        let presentation = [
            ("presentation", json!("standard")),
            ("translation", json!(2.0)),
            ("generators", Value::Null),
        ];
        let pairs: Vec<(&str, Value)> = match self {
            Command::FlatSpectrum => vec![
                ("g", json!([[1.0]])),
                ("p", json!(1)),
                ("q", json!(0)),
                ("box_radius", json!(10)),
                ("lambda_min", json!(-1000.0)),
                ("lambda_max", json!(1000.0)),
            ],
            Command::StabilityScan => vec![
                ("g", json!([[1.0, 0.0], [0.0, 1.0]])),
                ("p", json!(1)),
                ("q", json!(1)),
                ("radius", json!(0.01)),
                ("samples", json!(100)),
                ("box_radius", json!(8)),
                ("lambda_min", json!(-500.0)),
                ("lambda_max", json!(500.0)),
                ("match_tol", json!(1e-6)),
            ],
            Command::OppenheimScan => vec![
                ("g", json!([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])),
                ("p", json!(2)),
                ("q", json!(1)),
                ("box_radii", json!([10, 20, 40, 60])),
                ("lambda_min", json!(-400.0)),
                ("lambda_max", json!(400.0)),
                ("rational_bound", json!(pseudospec::quadform::DEFAULT_RATIONAL_BOUND)),
                ("rational_tol", json!(pseudospec::quadform::DEFAULT_RATIONAL_TOL)),
                ("shrink_factor", json!(pseudospec::flat_spectra::DEFAULT_SHRINK_FACTOR)),
            ],
            Command::Cartan => vec![
                ("group", json!("sl2xsl2")),
                ("matrix", Value::Null),
                ("left", json!([[1.0, 0.0], [0.0, 1.0]])),
                ("right", json!([[1.0, 0.0], [0.0, 1.0]])),
            ],
            Command::Properness => vec![
                ("group", json!("sl2xsl2")),
                ("n", Value::Null),
                ("mu_l", json!("first_axis")),
                ("mu_h", json!("diagonal")),
                ("probe_count", json!(64)),
            ],
            Command::Sharpness => {
                let mut v = presentation.to_vec();
                v.extend([
                    ("word_radius", json!(6)),
                    ("mu_h", json!("diagonal")),
                    ("c_prime", json!(0.0)),
                ]);
                v
            }
            Command::Ads3Stable => vec![("c", json!(1.0)), ("l_max", json!(12))],
            Command::OrbitCount => {
                let mut v = presentation.to_vec();
                v.extend([
                    ("word_radius", json!(8)),
                    (
                        "radii",
                        json!([1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0, 11.0, 12.0, 13.0]),
                    ),
                ]);
                v
            }
            Command::Poincare => {
                let mut v = presentation.to_vec();
                v.extend([
                    ("decay_rate", Value::Null),
                    ("decay_multiple", json!(3.0)),
                    ("schedule", json!([1, 2, 3, 4, 5, 6, 7, 8])),
                ]);
                v
            }
            Command::StabilityExperiment => {
                let mut v = presentation.to_vec();
                v.extend([
                    ("perturbation_scale", json!(1e-3)),
                    ("samples", json!(20)),
                    ("word_radius", json!(6)),
                    ("l_max", json!(40)),
                ]);
                v
            }
        };
        pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        Command::ALL.into_iter().find(|c| c.name() == s).ok_or_else(|| {
            let names: Vec<&str> = Command::ALL.iter().map(|c| c.name()).collect();
            CliError::Usage(format!("unknown command `{s}`; expected one of: {}", names.join(", ")))
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    pub parameters: BTreeMap<String, Value>,
    pub seed: u64,
    pub output_path: String,
}

impl RunConfig {
    /// Fully populated with the command's defaults.
    pub fn new(command: Command) -> Self {
        Self {
            command,
            parameters: command.defaults(),
            seed: 0,
            output_path: DEFAULT_OUTPUT.to_string(),
        }
    }

    pub fn set(&mut self, key: &str, value: Value) -> CliResult<()> {
        if !self.parameters.contains_key(key) {
            let known: Vec<&str> = self.parameters.keys().map(String::as_str).collect();
            return Err(CliError::Param {
                command: self.command.name(),
                key: key.to_string(),
                reason: format!("unknown key; accepted keys: {}", known.join(", ")),
            });
        }
        self.parameters.insert(key.to_string(), value);
        Ok(())
    }

    /// Applies a `key=value` override; the value is read as JSON when it
    /// parses, otherwise as a bare string.
    pub fn apply_assignment(&mut self, assignment: &str) -> CliResult<()> {
        let (key, raw) = assignment
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("--set expects KEY=VALUE, got `{assignment}`")))?;
        let key = key.trim();
        let value = serde_json::from_str(raw.trim()).unwrap_or_else(|_| Value::String(raw.trim().to_string()));
        self.set(key, value)
    }

    /// Merges a configuration file.
    ///
    /// A flat object sets parameters (plus the reserved key `seed`); a run
    /// manifest is recognized by its `config` object and replaces the whole
    /// configuration.
    pub fn merge_file(&mut self, path: &Path) -> CliResult<()> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        let value: Value = serde_json::from_str(&text).map_err(|source| CliError::Json {
            path: path.to_path_buf(),
            source,
        })?;
        let Value::Object(map) = value else {
            return Err(CliError::Usage(format!(
                "{}: configuration must be a JSON object",
                path.display()
            )));
        };
        if let Some(config) = map.get("config") {
            let parsed: RunConfig = serde_json::from_value(config.clone()).map_err(|source| CliError::Json {
                path: path.to_path_buf(),
                source,
            })?;
            if parsed.command != self.command {
                return Err(CliError::Usage(format!(
                    "{}: manifest is for `{}`, not `{}`",
                    path.display(),
                    parsed.command,
                    self.command
                )));
            }
            for (k, v) in parsed.parameters {
                self.set(&k, v)?;
            }
            self.seed = parsed.seed;
            self.output_path = parsed.output_path;
            return Ok(());
        }
        for (k, v) in map {
            if k == "seed" {
                self.seed = v.as_u64().ok_or_else(|| CliError::Param {
                    command: self.command.name(),
                    key: "seed".into(),
                    reason: "must be a nonnegative 64-bit integer".into(),
                })?;
            } else {
                self.set(&k, v)?;
            }
        }
        Ok(())
    }
}
