use serde::{Deserialize, Serialize};

use crate::data::DEFAULT_DUTY_THRESHOLD;
use crate::error::{Error, Result};

/// Which of the two GAN systems to train.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GanMode {
    /// One independent conditional GAN per generation type.
    SingleType,
    /// One GAN for all types; the type is a generator condition and the
    /// discriminator carries an auxiliary type classifier.
    MultiType,
}

impl std::str::FromStr for GanMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "single" | "single_type" => Ok(GanMode::SingleType),
            "multi" | "multi_type" => Ok(GanMode::MultiType),
            other => Err(Error::invalid(format!("unknown GAN mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GanConfig {
    pub latent_dim: usize,
    pub generator_hidden: Vec<usize>,
    pub discriminator_hidden: Vec<usize>,
    pub lr_generator: f64,
    pub lr_discriminator: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub batch_size: usize,
    pub epochs: usize,
    /// Real-label smoothing `s`: real targets become `1 - s`.
    pub label_smoothing: f64,
    /// Weight of the auxiliary type-classification loss (multi-type only).
    pub lambda_cls: f64,
    /// Multi-type only. When false the class head is never evaluated in the
    /// loss, which turns the system into a plain conditional GAN.
    pub aux_classifier: bool,
    pub spectral_norm: bool,
    pub spectral_iterations: usize,
    pub use_month: bool,
    pub use_starting_point: bool,
    pub leaky_alpha: f64,
    pub discriminator_steps: usize,
    pub duty_threshold: f64,
    pub seed: u64,
}

impl Default for GanConfig {
    fn default() -> Self {
        GanConfig {
            latent_dim: 32,
            generator_hidden: vec![64, 128],
            discriminator_hidden: vec![128, 64],
            lr_generator: 1e-4,
            lr_discriminator: 1e-4,
            adam_beta1: 0.5,
            adam_beta2: 0.999,
            batch_size: 64,
            epochs: 500,
            label_smoothing: 0.1,
            lambda_cls: 1.0,
            aux_classifier: true,
            spectral_norm: false,
            spectral_iterations: 5,
            use_month: true,
            use_starting_point: true,
            leaky_alpha: 0.2,
            discriminator_steps: 1,
            duty_threshold: DEFAULT_DUTY_THRESHOLD,
            seed: 0,
        }
    }
}

impl GanConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::invalid(m.to_string()));
        if self.latent_dim < 1 {
            return bad("latent_dim must be >= 1");
        }
        if !(0.0..0.5).contains(&self.label_smoothing) {
            return bad("label_smoothing must lie in [0, 0.5)");
        }
        if !(self.lambda_cls >= 0.0) || !self.lambda_cls.is_finite() {
            return bad("lambda_cls must be >= 0");
        }
        if self.batch_size == 0 {
            return bad("batch_size must be >= 1");
        }
        if self.generator_hidden.contains(&0) || self.discriminator_hidden.contains(&0) {
            return bad("hidden widths must be positive");
        }
        if !(self.lr_generator > 0.0 && self.lr_discriminator > 0.0) {
            return bad("learning rates must be positive");
        }
        if !(0.0..1.0).contains(&self.adam_beta1) || !(0.0..1.0).contains(&self.adam_beta2) {
            return bad("Adam betas must lie in [0, 1)");
        }
        if self.discriminator_steps == 0 {
            return bad("discriminator_steps must be >= 1");
        }
        if self.spectral_norm && self.spectral_iterations == 0 {
            return bad("spectral_iterations must be >= 1");
        }
        if !(0.0..1.0).contains(&self.duty_threshold) {
            return bad("duty_threshold must lie in [0, 1)");
        }
        if !(self.leaky_alpha >= 0.0 && self.leaky_alpha < 1.0) {
            return bad("leaky_alpha must lie in [0, 1)");
        }
        Ok(())
    }
}
