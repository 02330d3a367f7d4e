//! Line-based key=value run configuration; command-line flags override
//! file entries. All randomness flows from the single named seed when
//! deterministic mode is set.

use std::path::Path;

use anyhow::{bail, Context};
use pqvrf::ringsig::SigMode;
use pqvrf::vrf::VrfConfig;

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub group: String,
    pub rlwe: String,
    pub participants: usize,
    pub threshold: Option<usize>,
    pub rounds: u64,
    pub seed: Option<u64>,
    pub deterministic: bool,
    pub literal_alg2: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            group: "modp2048".into(),
            rlwe: "R256".into(),
            participants: 5,
            threshold: None,
            rounds: 1,
            seed: None,
            deterministic: false,
            literal_alg2: false,
        }
    }
}

impl RunConfig {
    pub fn from_file(path: &Path) -> anyhow::Result<RunConfig> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        let mut cfg = RunConfig::default();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                bail!("config line {} is not key=value: {line:?}", lineno + 1);
            };
            let key = key.trim();
            let value = value.trim();
            match key {
                "group" => cfg.group = value.into(),
                "rlwe" => cfg.rlwe = value.into(),
                "participants" => cfg.participants = value.parse()?,
                "threshold" => cfg.threshold = Some(value.parse()?),
                "rounds" => cfg.rounds = value.parse()?,
                "seed" => cfg.seed = Some(value.parse()?),
                "deterministic" => cfg.deterministic = value.parse()?,
                "literal_alg2" => cfg.literal_alg2 = value.parse()?,
                other => bail!("unknown config key {other:?}"),
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        if self.participants == 0 {
            bail!("participants must be at least 1");
        }
        if let Some(t) = self.threshold {
            if t > self.participants {
                bail!("threshold {t} exceeds participant count {}", self.participants);
            }
        }
        if self.deterministic && self.seed.is_none() {
            bail!("deterministic mode requires an explicit seed");
        }
        Ok(())
    }

    pub fn vrf_config(&self) -> VrfConfig {
        VrfConfig {
            group: self.group.clone(),
            rlwe: self.rlwe.clone(),
            participants: self.participants,
            sig_mode: if self.literal_alg2 {
                SigMode::Literal
            } else {
                SigMode::Generalized
            },
        }
    }
}
