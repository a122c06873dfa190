//! TOML experiment configuration.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::compiler::SplitStrategy;
use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

/// Smallest cutoff any experiment accepts.
pub const MIN_CUTOFF: usize = 8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub name: String,
    /// Artifact directory; the CLI `--out` flag takes precedence.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    pub experiment: Experiment,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Experiment {
    Squeezing(SqueezingConfig),
    PhotonCounting(PhotonCountingConfig),
    IdentityCheck(IdentityCheckConfig),
    TrotterOrder(TrotterConfig),
    ResolvabilityTable(ResolvabilityConfig),
}

impl Experiment {
    pub fn kind(&self) -> &'static str {
        match self {
            Experiment::Squeezing(_) => "squeezing",
            Experiment::PhotonCounting(_) => "photon_counting",
            Experiment::IdentityCheck(_) => "identity_check",
            Experiment::TrotterOrder(_) => "trotter_order",
            Experiment::ResolvabilityTable(_) => "resolvability_table",
        }
    }
}

/// Compiled squeezer applied to vacuum. Exactly one of `db`, `r` is set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SqueezingConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub db: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(default)]
    pub split: SplitStrategy,
    pub cutoff: usize,
    /// Largest headline change allowed at the certification cutoff.
    pub tolerance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhotonCountingConfig {
    /// Photon number in mode 1.
    pub photons: usize,
    /// Meter squeezing in dB.
    pub ancilla_db: f64,
    pub theta_step: f64,
    pub repetitions: usize,
    pub order: u32,
    #[serde(default)]
    pub split: SplitStrategy,
    /// `[mode 1, mode 2]`
    pub cutoffs: [usize; 2],
    pub tolerance: f64,
    /// Photon numbers at which the direct coupler's meter shift is checked.
    #[serde(default)]
    pub shift_law_photons: Vec<usize>,
}

/// Compiled vs direct unitaries on the low-energy half of the comparison space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IdentityCheckConfig {
    /// `(t1, t2)` pairs for the quadratic identity.
    pub quad_params: Vec<[f64; 2]>,
    /// Squeezing values (nepers) for the squeezer identity, balanced split.
    pub squeezer_r: Vec<f64>,
    /// `(t1, t2)` pairs for both cross-gate identities.
    pub cross_params: Vec<[f64; 2]>,
    pub single_cutoff: usize,
    pub two_mode_cutoff: usize,
    /// Gates are synthesized at `padding ×` the comparison cutoff.
    pub padding: usize,
    pub tolerance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrotterConfig {
    /// One-repetition interaction time; errors are compared at θ and θ/2.
    pub theta: f64,
    pub orders: Vec<u32>,
    #[serde(default)]
    pub split: SplitStrategy,
    /// Photon number of the `|n⟩₁|0⟩₂` test state.
    pub test_photons: usize,
    pub cutoffs: [usize; 2],
    pub tolerance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResolvabilityConfig {
    pub thetas: Vec<f64>,
    pub dbs: Vec<f64>,
    pub theta_step: f64,
    /// Squeezing (nepers) at which the minimal θ is reported.
    pub probe_r: f64,
    /// Interaction time at which the minimal squeezing is reported.
    pub probe_theta: f64,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if self.name.trim().is_empty() {
            return Err(Error::Config("name must not be empty".into()));
        }
        match &self.experiment {
            Experiment::Squeezing(c) => {
                match (c.db, c.r) {
                    (Some(v), None) | (None, Some(v)) if v.is_finite() && v >= 0.0 => {}
                    (Some(_), Some(_)) | (None, None) => {
                        return Err(Error::Config("squeezing needs exactly one of `db`, `r`".into()))
                    }
                    _ => return Err(Error::Config("squeezing target must be finite and ≥ 0".into())),
                }
                cutoffs_ok(&[c.cutoff])?;
                positive("tolerance", c.tolerance)
            }
            Experiment::PhotonCounting(c) => {
                cutoffs_ok(&c.cutoffs)?;
                positive("tolerance", c.tolerance)?;
                positive("theta_step", c.theta_step)?;
                non_negative("ancilla_db", c.ancilla_db)?;
                order_ok(c.order)?;
                if c.photons + 1 >= c.cutoffs[0] {
                    return Err(Error::Config(format!(
                        "photons + 1 = {} must lie below the mode-1 cutoff {}",
                        c.photons + 1,
                        c.cutoffs[0]
                    )));
                }
                if let Some(&n) = c.shift_law_photons.iter().find(|&&n| n >= c.cutoffs[0]) {
                    return Err(Error::Config(format!("shift-law photon number {n} exceeds the cutoff")));
                }
                Ok(())
            }
            Experiment::IdentityCheck(c) => {
                cutoffs_ok(&[c.single_cutoff, c.two_mode_cutoff])?;
                positive("tolerance", c.tolerance)?;
                if c.padding < 1 {
                    return Err(Error::Config("padding must be at least 1".into()));
                }
                let finite = c
                    .quad_params
                    .iter()
                    .chain(&c.cross_params)
                    .flatten()
                    .all(|v| v.is_finite());
                if !finite {
                    return Err(Error::Config("identity parameters must be finite".into()));
                }
                for &r in &c.squeezer_r {
                    positive("squeezer_r", r)?;
                }
                Ok(())
            }
            Experiment::TrotterOrder(c) => {
                cutoffs_ok(&c.cutoffs)?;
                positive("tolerance", c.tolerance)?;
                positive("theta", c.theta)?;
                if c.orders.is_empty() {
                    return Err(Error::Config("orders must not be empty".into()));
                }
                c.orders.iter().try_for_each(|&o| order_ok(o))?;
                if c.test_photons >= c.cutoffs[0] {
                    return Err(Error::Config("test_photons must lie below the mode-1 cutoff".into()));
                }
                Ok(())
            }
            Experiment::ResolvabilityTable(c) => {
                positive("theta_step", c.theta_step)?;
                positive("probe_theta", c.probe_theta)?;
                non_negative("probe_r", c.probe_r)?;
                for &t in &c.thetas {
                    non_negative("thetas", t)?;
                }
                for &d in &c.dbs {
                    non_negative("dbs", d)?;
                }
                Ok(())
            }
        }
    }

    /// Replaces the primary cutoff with `cutoff`; other cutoffs keep their
    /// ratio to it. Used for CI-scale runs.
    pub fn with_cutoff(mut self, cutoff: usize) -> Result<Self> {
        let scale = |old: usize, primary: usize| -> usize {
            ((old as f64) * (cutoff as f64) / (primary as f64)).round().max(1.0) as usize
        };
        match &mut self.experiment {
            Experiment::Squeezing(c) => c.cutoff = cutoff,
            Experiment::PhotonCounting(c) => c.cutoffs = [cutoff, scale(c.cutoffs[1], c.cutoffs[0])],
            Experiment::TrotterOrder(c) => c.cutoffs = [cutoff, scale(c.cutoffs[1], c.cutoffs[0])],
            Experiment::IdentityCheck(c) => {
                c.two_mode_cutoff = scale(c.two_mode_cutoff, c.single_cutoff);
                c.single_cutoff = cutoff;
            }
            Experiment::ResolvabilityTable(_) => {}
        }
        self.validate()?;
        Ok(self)
    }
}

fn cutoffs_ok(cutoffs: &[usize]) -> Result<()> {
    match cutoffs.iter().find(|&&c| c < MIN_CUTOFF) {
        Some(c) => Err(Error::Config(format!("cutoff {c} is below the minimum {MIN_CUTOFF}"))),
        None => Ok(()),
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} must be positive, got {v}")))
    }
}

fn non_negative(name: &str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} must be finite and ≥ 0, got {v}")))
    }
}

fn order_ok(order: u32) -> Result<()> {
    if order == 1 || order == 2 {
        Ok(())
    } else {
        Err(Error::Config(format!("splitting order must be 1 or 2, got {order}")))
    }
}

/// Names accepted by [`preset`].
pub const PRESET_NAMES: [&str; 5] = [
    "squeezing_10db",
    "photon_counting_two_photon",
    "identity_suite",
    "trotter_order",
    "resolvability_sweep",
];

/// Built-in configurations reproducing the reference numerics.
pub fn preset(name: &str) -> Option<ExperimentConfig> {
    let experiment = match name {
        "squeezing_10db" => Experiment::Squeezing(SqueezingConfig {
            db: Some(10.0),
            r: None,
            split: SplitStrategy::Balanced,
            cutoff: 128,
            tolerance: 1e-3,
        }),
        "photon_counting_two_photon" => Experiment::PhotonCounting(PhotonCountingConfig {
            photons: 2,
            ancilla_db: 10.0,
            theta_step: 0.1,
            repetitions: 14,
            order: 1,
            split: SplitStrategy::Balanced,
            cutoffs: [40, 120],
            tolerance: 1e-3,
            shift_law_photons: vec![0, 1, 2, 3],
        }),
        "identity_suite" => Experiment::IdentityCheck(IdentityCheckConfig {
            quad_params: vec![[0.0, 0.0], [0.3, 0.3], [0.5, 0.5], [-0.5, 0.5], [0.5, -0.2]],
            squeezer_r: vec![0.05, 0.12],
            cross_params: vec![[0.0, 0.0], [0.4, 0.4], [0.5, 0.5], [-0.5, 0.3]],
            single_cutoff: 64,
            two_mode_cutoff: 24,
            padding: 4,
            tolerance: 1e-7,
        }),
        "trotter_order" => Experiment::TrotterOrder(TrotterConfig {
            theta: 0.1,
            orders: vec![1, 2],
            split: SplitStrategy::Balanced,
            test_photons: 1,
            cutoffs: [24, 48],
            tolerance: 1e-3,
        }),
        "resolvability_sweep" => Experiment::ResolvabilityTable(ResolvabilityConfig {
            thetas: vec![0.1, 0.5, 1.0, 1.28, 1.4, 2.0],
            dbs: vec![10.0, 15.0, 20.0, 25.0, 30.0, 32.0, 35.0],
            theta_step: 0.1,
            probe_r: 1.15,
            probe_theta: 0.1,
        }),
        _ => return None,
    };
    Some(ExperimentConfig {
        schema_version: SCHEMA_VERSION,
        name: name.to_string(),
        output: None,
        experiment,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate_and_round_trip() {
        for name in PRESET_NAMES {
            let cfg = preset(name).unwrap();
            cfg.validate().unwrap();
            let text = cfg.to_toml().unwrap();
            assert_eq!(ExperimentConfig::from_toml(&text).unwrap(), cfg, "{name}");
        }
        assert!(preset("nope").is_none());
    }

    #[test]
    fn parses_hand_written_config() {
        let text = r#"
schema_version = 1
name = "sq"

[experiment]
kind = "squeezing"
r = 0.5
cutoff = 64
tolerance = 1e-3
split = { strategy = "fixed_cubic", t2 = 0.1 }
"#;
        let cfg = ExperimentConfig::from_toml(text).unwrap();
        let Experiment::Squeezing(c) = cfg.experiment else {
            panic!()
        };
        assert_eq!(c.r, Some(0.5));
        assert_eq!(c.split, SplitStrategy::FixedCubic { t2: 0.1 });
    }

    #[test]
    fn rejects_bad_configs() {
        let base = preset("squeezing_10db").unwrap();
        let mut bad = base.clone();
        bad.schema_version = 2;
        assert!(matches!(bad.validate(), Err(Error::Config(_))));

        let text = base.to_toml().unwrap().replace("cutoff = 128", "cutoff = 4");
        assert!(matches!(ExperimentConfig::from_toml(&text), Err(Error::Config(_))));

        let text = base.to_toml().unwrap().replace("tolerance = 0.001", "tolerance = 0.0");
        assert!(ExperimentConfig::from_toml(&text).is_err());

        let text = base.to_toml().unwrap().replace("db = 10.0", "db = 10.0\nr = 1.0");
        assert!(ExperimentConfig::from_toml(&text).is_err());

        let text = base
            .to_toml()
            .unwrap()
            .replace("kind = \"squeezing\"", "kind = \"warp\"");
        assert!(ExperimentConfig::from_toml(&text).is_err());

        let text = base
            .to_toml()
            .unwrap()
            .replace("cutoff = 128", "cutoff = 128\nbogus = 1");
        assert!(ExperimentConfig::from_toml(&text).is_err());
    }

    #[test]
    fn cutoff_override_keeps_ratios() {
        let cfg = preset("photon_counting_two_photon").unwrap().with_cutoff(20).unwrap();
        let Experiment::PhotonCounting(c) = cfg.experiment else {
            panic!()
        };
        assert_eq!(c.cutoffs, [20, 60]);
        assert!(preset("squeezing_10db").unwrap().with_cutoff(4).is_err());
    }
}
