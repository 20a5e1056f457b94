use std::path::{Path, PathBuf};

use dmol_chem::vocab::AtomType;
use dmol_chem::AtomVocab;
use dmol_core::loss::{LossConfig, LossWeights, MseReference};
use dmol_core::noise::EdgeScope;
use dmol_core::schedule::{ScheduleConfig, DEFAULT_C, DEFAULT_K, DEFAULT_R};
use dmol_core::TrainConfig64;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub data: DataSection,
    pub vocab: Vec<AtomType>,
    pub schedule: ScheduleSection,
    pub loss: LossSection,
    pub denoiser: DenoiserSection,
    pub codec: CodecSection,
    pub sampling: SamplingSection,
    pub ablation: AblationSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct DataSection {
    pub dataset: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScheduleSection {
    pub k: usize,
    pub r: f64,
    pub c: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LossSection {
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda3: f64,
    pub mse_reference: MseReference,
    pub hard_count: bool,
    pub mse_loss: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DenoiserSection {
    pub layers: usize,
    pub width: usize,
    pub learning_rate: f64,
    pub momentum: f64,
    pub clip_norm: f64,
    pub steps: usize,
    pub batch_size: usize,
    pub validation_size: usize,
    pub eval_every: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CodecSection {
    pub enabled: bool,
    pub k_rings: usize,
    pub max_spare: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplingSection {
    pub num_samples: usize,
    pub batch_size: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct AblationSection {
    pub edge_scope: EdgeScope,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            data: DataSection::default(),
            vocab: AtomVocab::default().into(),
            schedule: ScheduleSection::default(),
            loss: LossSection::default(),
            denoiser: DenoiserSection::default(),
            codec: CodecSection::default(),
            sampling: SamplingSection::default(),
            ablation: AblationSection::default(),
        }
    }
}

impl Default for ScheduleSection {
    fn default() -> Self {
        Self {
            k: DEFAULT_K,
            r: DEFAULT_R,
            c: DEFAULT_C,
        }
    }
}

impl Default for LossSection {
    fn default() -> Self {
        let w = LossWeights::<f64>::default();
        Self {
            lambda1: w.lambda1,
            lambda2: w.lambda2,
            lambda3: w.lambda3,
            mse_reference: MseReference::Noisy,
            hard_count: false,
            mse_loss: true,
        }
    }
}

impl Default for DenoiserSection {
    fn default() -> Self {
        let t = TrainConfig64::default();
        Self {
            layers: 2,
            width: 32,
            learning_rate: t.learning_rate,
            momentum: t.momentum,
            clip_norm: t.clip_norm.unwrap_or(5.0),
            steps: t.steps,
            batch_size: t.batch_size,
            validation_size: t.validation_size,
            eval_every: t.eval_every,
        }
    }
}

impl Default for CodecSection {
    fn default() -> Self {
        Self {
            enabled: false,
            k_rings: 3,
            max_spare: 1,
        }
    }
}

impl Default for SamplingSection {
    fn default() -> Self {
        Self {
            num_samples: 256,
            batch_size: 64,
        }
    }
}

fn usage(module: &str, message: impl std::fmt::Display) -> CliError {
    CliError::Usage(format!("[{module}] {message}"))
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::io(format!("reading {}", path.display()), e))?;
        Self::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self =
            toml::from_str(text).map_err(|e| CliError::Usage(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn atom_vocab(&self) -> Result<AtomVocab> {
        AtomVocab::try_from(self.vocab.clone()).map_err(|e| usage("vocab", e))
    }

    pub fn schedule(&self) -> Result<ScheduleConfig<f64>> {
        ScheduleConfig::new(self.schedule.k, self.schedule.r, self.schedule.c)
            .map_err(|e| usage("schedule", e))
    }

    pub fn loss(&self) -> Result<LossConfig<f64>> {
        let l = &self.loss;
        Ok(LossConfig {
            weights: LossWeights::new(l.lambda1, l.lambda2, l.lambda3)
                .map_err(|e| usage("loss", e))?,
            mse_reference: l.mse_reference,
            hard_count: l.hard_count,
            use_count_penalty: l.mse_loss,
        })
    }

    pub fn train(&self) -> Result<TrainConfig64> {
        let d = &self.denoiser;
        let check = |ok: bool, what: &str| {
            if ok {
                Ok(())
            } else {
                Err(usage("denoiser", what))
            }
        };
        check(d.layers >= 1, "layers must be at least 1")?;
        check(d.width >= 1, "width must be positive")?;
        check(d.batch_size >= 1, "batch_size must be positive")?;
        check(
            d.learning_rate.is_finite() && d.learning_rate >= 0.0,
            "learning_rate must be finite and >= 0",
        )?;
        check(
            (0.0..1.0).contains(&d.momentum),
            "momentum must lie in [0, 1)",
        )?;
        check(d.clip_norm > 0.0, "clip_norm must be positive")?;
        Ok(TrainConfig64 {
            steps: d.steps,
            batch_size: d.batch_size,
            learning_rate: d.learning_rate,
            momentum: d.momentum,
            clip_norm: Some(d.clip_norm),
            validation_size: d.validation_size,
            eval_every: d.eval_every.max(1),
            loss: self.loss()?,
            edge_scope: self.ablation.edge_scope,
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.atom_vocab()?;
        self.schedule()?;
        self.train()?;
        if self.codec.enabled && self.codec.k_rings == 0 {
            return Err(usage(
                "codec",
                "k_rings must be at least 1 when the codec is enabled",
            ));
        }
        if self.sampling.batch_size == 0 {
            return Err(usage("sampling", "batch_size must be positive"));
        }
        if let Some(p) = &self.data.dataset {
            if !p.exists() {
                return Err(usage(
                    "data",
                    format!("dataset {} does not exist", p.display()),
                ));
            }
        }
        Ok(())
    }
}
