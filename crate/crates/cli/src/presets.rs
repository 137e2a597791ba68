//! Named scenarios with fully populated configurations.

use serde_json::{json, Value};

use crate::config::{Command, RunConfig};
use crate::error::{CliError, CliResult};

pub struct Preset {
    pub name: &'static str,
    pub summary: &'static str,
    pub command: Command,
    overrides: fn() -> Vec<(&'static str, Value)>,
}

pub const PRESETS: &[Preset] = &[
    Preset {
        name: "string-1d",
        summary: "vibrating string of length 2: values -pi^2 m^2 for |m| <= 3 in [-50, 1]",
        command: Command::FlatSpectrum,
        overrides: || {
            vec![
                ("g", json!([[2.0]])),
                ("p", json!(1)),
                ("q", json!(0)),
                ("box_radius", json!(3)),
                ("lambda_min", json!(-50.0)),
                ("lambda_max", json!(1.0)),
            ]
        },
    },
    Preset {
        name: "null-directions",
        summary: "Lorentzian 2-torus: eigenvalue 0 carried by both null directions",
        command: Command::FlatSpectrum,
        overrides: || {
            vec![
                ("g", json!([[1.0, 0.0], [0.0, 1.0]])),
                ("p", json!(1)),
                ("q", json!(1)),
                ("box_radius", json!(10)),
                ("lambda_min", json!(-1e-6)),
                ("lambda_max", json!(1e-6)),
            ]
        },
    },
    Preset {
        name: "no-stable-flat",
        summary: "random deformations of the Lorentzian 2-torus share only the eigenvalue 0",
        command: Command::StabilityScan,
        overrides: Vec::new,
    },
    Preset {
        name: "oppenheim-irrational",
        summary: "form diag(1, 1, -sqrt 2): gaps shrink as the box grows",
        command: Command::OppenheimScan,
        overrides: || {
            vec![(
                "g",
                json!([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 2f64.powf(-0.25)]]),
            )]
        },
    },
    Preset {
        name: "oppenheim-integral",
        summary: "form diag(1, 1, -1): integral, gaps bounded below by 4 pi^2",
        command: Command::OppenheimScan,
        overrides: Vec::new,
    },
    Preset {
        name: "ads3-standard",
        summary: "rank-2 ping-pong group in the first factor against the diagonal ray",
        command: Command::Sharpness,
        overrides: Vec::new,
    },
    Preset {
        name: "calabi-markus",
        summary: "full-rank isotropy: every nonzero cone meets the whole chamber",
        command: Command::Properness,
        overrides: || vec![("mu_h", json!("full_chamber"))],
    },
    Preset {
        name: "ads3-spectrum",
        summary: "stable eigenvalues l(l-2) for C = 1 up to l = 12",
        command: Command::Ads3Stable,
        overrides: Vec::new,
    },
    Preset {
        name: "orbit-growth",
        summary: "orbit counts of the standard group inside Cartan-norm balls",
        command: Command::OrbitCount,
        overrides: Vec::new,
    },
    Preset {
        name: "orbit-rank-one",
        summary: "cyclic group: linear orbit growth, fitted exponential slope near 0",
        command: Command::OrbitCount,
        overrides: || {
            vec![
                ("presentation", json!("rank_one")),
                ("translation", json!(1.0)),
                ("word_radius", json!(200)),
                ("radii", json!((1..=20).map(|k| 10.0 * k as f64).collect::<Vec<_>>())),
            ]
        },
    },
    Preset {
        name: "poincare-standard",
        summary: "Poincare partial sums of the standard group at decay 3/C",
        command: Command::Poincare,
        overrides: Vec::new,
    },
    Preset {
        name: "ads3-stability",
        summary: "small deformations of the standard group keep a common stable spectrum",
        command: Command::StabilityExperiment,
        overrides: Vec::new,
    },
];

pub fn preset(name: &str) -> CliResult<RunConfig> {
    let p = PRESETS.iter().find(|p| p.name == name).ok_or_else(|| {
        let names: Vec<&str> = PRESETS.iter().map(|p| p.name).collect();
        CliError::Usage(format!(
            "unknown preset `{name}`; available presets: {}",
            names.join(", ")
        ))
    })?;
    let mut cfg = RunConfig::new(p.command);
    for (k, v) in (p.overrides)() {
        cfg.set(k, v)?;
    }
    Ok(cfg)
}

/// One line per preset: name, command, summary.
pub fn listing() -> String {
    PRESETS
        .iter()
        .map(|p| format!("{:<22} {:<22} {}\n", p.name, p.command.name(), p.summary))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_builds() {
        for p in PRESETS {
            let cfg = preset(p.name).unwrap();
            assert_eq!(cfg.command, p.command);
        }
        let err = preset("missing").unwrap_err().to_string();
        assert!(err.contains("string-1d") && err.contains("ads3-standard"));
    }
}
