//! Experiment configuration: JSON file, command-line overrides, validation
//! and the content hash embedded in every output.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use dirac_tomography::clifford::RepKind;
use dirac_tomography::reconstruct::Group;
use dirac_tomography::spinor::DiracSpinor;
use dirac_tomography::tomography::Protocol;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    #[serde(alias = "fierz-check")]
    FierzCheck,
    Roundtrip,
    Feasibility,
    Ambiguity,
    #[serde(alias = "kernel-check")]
    KernelCheck,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::FierzCheck => "fierz-check",
            Command::Roundtrip => "roundtrip",
            Command::Feasibility => "feasibility",
            Command::Ambiguity => "ambiguity",
            Command::KernelCheck => "kernel-check",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(CliError::Config(format!("unknown format `{s}` (csv|json)"))),
        }
    }
}

/// Protocols are written as their display strings, e.g.
/// `"continuous_grid(8,16)"`.
mod protocol_str {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(p: &Protocol, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(p)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Protocol, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

fn default_protocol() -> Protocol {
    Protocol::DiscreteMajorana
}

fn default_trials() -> usize {
    1
}

fn default_output() -> String {
    "-".into()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: Command,
    /// `None` runs every built-in representation where that makes sense.
    #[serde(default)]
    pub representation: Option<RepKind>,
    #[serde(default = "default_protocol", with = "protocol_str")]
    pub protocol: Protocol,
    #[serde(default)]
    pub shots: Option<u64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_trials")]
    pub trials: usize,
    /// Quadrature grid `(nθ, nφ)`; overrides the grid of a continuous
    /// protocol and sets the kernel-check grid.
    #[serde(default)]
    pub grid: Option<(usize, usize)>,
    /// Explicit spinor as `(re₀, im₀, …, re₃, im₃)`, used for every trial.
    #[serde(default)]
    pub spinor: Option<[f64; 8]>,
    #[serde(default)]
    pub group: Option<Group>,
    /// `-` writes to standard output.
    #[serde(default = "default_output")]
    pub output_path: String,
    #[serde(default)]
    pub format: Format,
    /// Worker threads; `None` uses the rayon default. Never affects output.
    #[serde(default)]
    pub threads: Option<usize>,
}

impl ExperimentConfig {
    pub fn new(command: Command) -> Self {
        ExperimentConfig {
            command,
            representation: None,
            protocol: default_protocol(),
            shots: None,
            seed: 0,
            trials: default_trials(),
            grid: None,
            spinor: None,
            group: None,
            output_path: default_output(),
            format: Format::Csv,
            threads: None,
        }
    }

    /// Parses a JSON config. `command`, when given, fills in or replaces the
    /// file's command.
    pub fn from_json(text: &str, command: Option<Command>) -> Result<Self, CliError> {
        let mut value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| CliError::Config(format!("malformed config: {e}")))?;
        if let Some(cmd) = command {
            let obj = value
                .as_object_mut()
                .ok_or_else(|| CliError::Config("config must be a JSON object".into()))?;
            obj.insert("command".into(), serde_json::to_value(cmd).expect("enum serializes"));
        }
        serde_json::from_value(value).map_err(|e| CliError::Config(format!("invalid config: {e}")))
    }

    pub fn from_file(path: &Path, command: Option<Command>) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text, command)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        if self.shots == Some(0) {
            return bad("shots must be at least 1".into());
        }
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if let Some((a, b)) = self.grid {
            if a < 2 || b < 2 {
                return bad(format!("grid {a}×{b}: dimensions must be ≥ 2"));
            }
        }
        if let Protocol::ContinuousGrid { n_theta, n_phi } = self.protocol {
            if n_theta < 2 || n_phi < 2 {
                return bad(format!("grid {n_theta}×{n_phi}: dimensions must be ≥ 2"));
            }
        }
        if let Some(x) = self.spinor {
            if x.iter().any(|v| !v.is_finite()) || x.iter().all(|&v| v == 0.0) {
                return bad("explicit spinor must be finite and nonzero".into());
            }
        }
        if self.representation == Some(RepKind::Custom) {
            return bad("only built-in representations can be selected".into());
        }
        if self.threads == Some(0) {
            return bad("threads must be at least 1".into());
        }
        if self.command == Command::Roundtrip {
            if let Some(rep) = self.representation {
                if !self.protocol().rep_kinds().contains(&rep) {
                    return bad(format!("protocol {} does not use the {rep} representation", self.protocol));
                }
            }
        }
        Ok(())
    }

    /// The protocol with any explicit grid applied.
    pub fn protocol(&self) -> Protocol {
        match (self.protocol, self.grid) {
            (Protocol::ContinuousGrid { .. }, Some((n_theta, n_phi))) => Protocol::ContinuousGrid { n_theta, n_phi },
            (p, _) => p,
        }
    }

    pub fn explicit_spinor(&self) -> Option<DiracSpinor> {
        self.spinor.map(DiracSpinor::from_reals)
    }

    /// Representations selected for per-representation commands.
    pub fn reps(&self) -> Vec<RepKind> {
        match self.representation {
            Some(r) => vec![r],
            None => RepKind::BUILT_IN.to_vec(),
        }
    }

    pub fn groups(&self) -> Vec<Group> {
        match self.group {
            Some(g) => vec![g],
            None => Group::ALL.to_vec(),
        }
    }

    /// SHA-256 of the canonical JSON of everything that determines the
    /// results; the output location and thread count are excluded.
    pub fn hash(&self) -> String {
        let mut canon = self.clone();
        canon.protocol = self.protocol();
        canon.output_path = default_output();
        canon.threads = None;
        let bytes = serde_json::to_vec(&canon).expect("config serializes");
        hex::encode(Sha256::digest(&bytes))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_file() {
        let cfg = ExperimentConfig::from_json(r#"{"command": "fierz_check"}"#, None).unwrap();
        assert_eq!(cfg, ExperimentConfig::new(Command::FierzCheck));
    }

    #[test]
    fn full_file() {
        let text = r#"{
            "command": "roundtrip", "representation": "majorana",
            "protocol": "continuous_grid(8,16)", "shots": 1000, "seed": 3,
            "trials": 5, "grid": [12, 24], "output_path": "out.csv", "format": "json",
            "group": "rotations", "threads": 2
        }"#;
        let cfg = ExperimentConfig::from_json(text, None).unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.protocol(), Protocol::ContinuousGrid { n_theta: 12, n_phi: 24 });
        assert_eq!(cfg.format, Format::Json);
        assert_eq!(cfg.group, Some(Group::Rotations));
    }

    #[test]
    fn command_override() {
        let cfg = ExperimentConfig::from_json(r#"{"seed": 4}"#, Some(Command::KernelCheck)).unwrap();
        assert_eq!((cfg.command, cfg.seed), (Command::KernelCheck, 4));
        assert!(ExperimentConfig::from_json(r#"{"seed": 4}"#, None).is_err());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(ExperimentConfig::from_json("{not json", None).is_err());
        assert!(ExperimentConfig::from_json(r#"{"command": "roundtrip", "bogus": 1}"#, None).is_err());
        assert!(ExperimentConfig::from_json(r#"{"command": "roundtrip", "protocol": "nope"}"#, None).is_err());
        let check = |f: fn(&mut ExperimentConfig)| {
            let mut cfg = ExperimentConfig::new(Command::Roundtrip);
            f(&mut cfg);
            cfg.validate().is_err()
        };
        assert!(check(|c| c.shots = Some(0)));
        assert!(check(|c| c.trials = 0));
        assert!(check(|c| c.grid = Some((1, 8))));
        assert!(check(|c| c.spinor = Some([0.0; 8])));
        assert!(check(|c| c.spinor = Some([f64::NAN, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0])));
        assert!(check(|c| c.representation = Some(RepKind::Standard)));
        assert!(!check(|_| ()));
    }

    #[test]
    fn hash_ignores_location_and_threads() {
        let a = ExperimentConfig::new(Command::Roundtrip);
        let mut b = a.clone();
        b.output_path = "elsewhere.csv".into();
        b.threads = Some(7);
        assert_eq!(a.hash(), b.hash());
        b.seed = 1;
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }
}
