//! Experiment configuration: RON-serializable, validated before any work.

use serde::{Deserialize, Serialize};

use crate::catalog;

pub const EXPERIMENT_PRESETS: [&str; 5] = [
    "oracle-suite",
    "ball-symmetry",
    "whole-space-symmetry",
    "principle-suite",
    "barrier-suite",
];

/// A catalog reference plus its numeric parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamSpec {
    pub id: String,
    #[serde(default)]
    pub params: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Trailing-gap threshold for declaring a limit profile.
    pub omega: f64,
    /// Round-off allowance for comparison-principle conclusions.
    pub mp: f64,
    /// Relative reflection-deviation threshold for a symmetry verdict.
    pub sym: f64,
    /// Relative monotonicity-violation threshold.
    pub mono: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            omega: 1e-4,
            mp: 1e-10,
            sym: 0.02,
            mono: 0.01,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub preset: String,
    pub dim: usize,
    pub radius: f64,
    pub h: f64,
    pub s: f64,
    pub nonlinearity: ParamSpec,
    pub initial_data: ParamSpec,
    /// Primary horizon; symmetry presets integrate to `2 t_end` and verify
    /// stability of the limit across the doubling.
    pub t_end: f64,
    pub snap_every: f64,
    pub tolerances: Tolerances,
    pub seed: u64,
    pub out: String,
}

impl ExperimentConfig {
    /// Built-in defaults per experiment preset.
    pub fn preset_default(name: &str) -> Option<ExperimentConfig> {
        let base = |preset: &str| ExperimentConfig {
            preset: preset.to_string(),
            dim: 1,
            radius: 2.0,
            h: 1.0 / 256.0,
            s: 0.5,
            nonlinearity: ParamSpec {
                id: "zero".into(),
                params: vec![],
            },
            initial_data: ParamSpec {
                id: "bump-power".into(),
                params: vec![0.5],
            },
            t_end: 1.0,
            snap_every: 0.5,
            tolerances: Tolerances::default(),
            seed: 42,
            out: "out".into(),
        };
        match name {
            "oracle-suite" => Some(base("oracle-suite")),
            "ball-symmetry" => Some(ExperimentConfig {
                dim: 2,
                radius: 1.0,
                h: 1.0 / 32.0,
                nonlinearity: ParamSpec {
                    id: "ball-logistic".into(),
                    params: vec![6.0],
                },
                initial_data: ParamSpec {
                    id: "seeded-bumps".into(),
                    params: vec![],
                },
                t_end: 8.0,
                snap_every: 0.5,
                ..base("ball-symmetry")
            }),
            "whole-space-symmetry" => Some(ExperimentConfig {
                dim: 1,
                radius: 8.0,
                h: 1.0 / 32.0,
                nonlinearity: ParamSpec {
                    id: "schrodinger-p3".into(),
                    params: vec![],
                },
                initial_data: ParamSpec {
                    id: "offset-gaussian".into(),
                    params: vec![0.4, 0.5],
                },
                t_end: 20.0,
                snap_every: 1.0,
                ..base("whole-space-symmetry")
            }),
            "principle-suite" => Some(ExperimentConfig {
                h: 1.0 / 32.0,
                nonlinearity: ParamSpec {
                    id: "schrodinger-p3".into(),
                    params: vec![],
                },
                t_end: 20.0,
                ..base("principle-suite")
            }),
            "barrier-suite" => Some(ExperimentConfig {
                radius: 4.0,
                h: 1.0 / 32.0,
                t_end: 2.0,
                snap_every: 0.1,
                ..base("barrier-suite")
            }),
            _ => None,
        }
    }

    /// Returns the list of problems; empty means valid.
    pub fn validate(&self) -> Vec<String> {
        let mut errs = Vec::new();
        if !EXPERIMENT_PRESETS.contains(&self.preset.as_str()) {
            errs.push(format!("unknown preset '{}'", self.preset));
        }
        if self.dim != 1 && self.dim != 2 {
            errs.push(format!("dim must be 1 or 2, got {}", self.dim));
        }
        if !(self.h > 0.0) {
            errs.push(format!("h must be positive, got {}", self.h));
        } else {
            let ratio = self.radius / self.h;
            if (ratio - ratio.round()).abs() > 1e-9 || ratio < 1.0 {
                errs.push(format!(
                    "radius {} is not a positive integer multiple of h {}",
                    self.radius, self.h
                ));
            }
        }
        if !(self.s > 0.0 && self.s < 1.0) {
            errs.push(format!("s must lie in (0,1), got {}", self.s));
        }
        if !(self.t_end > 0.0) {
            errs.push(format!("t_end must be positive, got {}", self.t_end));
        }
        if !(self.snap_every > 0.0) {
            errs.push(format!("snap_every must be positive, got {}", self.snap_every));
        }
        for (name, v) in [
            ("omega", self.tolerances.omega),
            ("mp", self.tolerances.mp),
            ("sym", self.tolerances.sym),
            ("mono", self.tolerances.mono),
        ] {
            if !(v > 0.0) {
                errs.push(format!("tolerance '{name}' must be positive, got {v}"));
            }
        }
        if catalog::nonlinearity(&self.nonlinearity).is_none() {
            errs.push(format!(
                "unknown nonlinearity preset '{}'",
                self.nonlinearity.id
            ));
        }
        if !catalog::initial_data_exists(&self.initial_data.id) {
            errs.push(format!(
                "unknown initial-data preset '{}'",
                self.initial_data.id
            ));
        }
        if self.preset == "ball-symmetry" && (self.radius - 1.0).abs() > 1e-12 {
            errs.push("ball-symmetry requires radius = 1 (unit ball)".into());
        }
        errs
    }

    pub fn from_ron(text: &str) -> Result<ExperimentConfig, ron::error::SpannedError> {
        ron::from_str(text)
    }

    pub fn to_ron(&self) -> String {
        ron::ser::to_string_pretty(self, ron::ser::PrettyConfig::default())
            .expect("config serializes")
    }
}
