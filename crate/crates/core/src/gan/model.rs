use serde::{Deserialize, Serialize};

use super::config::{GanConfig, GanMode};
use crate::data::{ConditionVector, DailyShape, TypeRegistry, TypeStats, HOURS_PER_DAY, MONTHS};
use crate::error::{Error, Result};
use crate::nn::{Matrix, MultiLayerNet};

/// Column layout of the generator and discriminator inputs and outputs.
///
/// Generator input: `[z | type one-hot | month one-hot? | starting point?]`.
/// Generator output: `[24 shape | duty?]`, all sigmoid.
/// Discriminator input: `[24 shape | duty? | type one-hot (single-type only)
/// | month one-hot? | starting point?]`.
/// Discriminator output: `[real/fake logit | K class logits (multi-type only)]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Layout {
    pub mode: GanMode,
    pub latent_dim: usize,
    pub num_types: usize,
    pub use_month: bool,
    pub use_starting_point: bool,
    /// A duty output exists when any registered type is intermittent.
    pub duty_channel: bool,
}

impl Layout {
    pub fn new(mode: GanMode, config: &GanConfig, registry: &TypeRegistry) -> Self {
        Layout {
            mode,
            latent_dim: config.latent_dim,
            num_types: registry.len(),
            use_month: config.use_month,
            use_starting_point: config.use_starting_point,
            duty_channel: registry.any_intermittent(),
        }
    }

    fn shared_condition_dim(&self) -> usize {
        (if self.use_month { MONTHS } else { 0 }) + usize::from(self.use_starting_point)
    }

    pub fn generator_condition_dim(&self) -> usize {
        self.num_types + self.shared_condition_dim()
    }

    pub fn discriminator_condition_dim(&self) -> usize {
        let type_dim = match self.mode {
            GanMode::SingleType => self.num_types,
            GanMode::MultiType => 0,
        };
        type_dim + self.shared_condition_dim()
    }

    pub fn generator_input(&self) -> usize {
        self.latent_dim + self.generator_condition_dim()
    }

    pub fn sample_dim(&self) -> usize {
        HOURS_PER_DAY + usize::from(self.duty_channel)
    }

    pub fn discriminator_input(&self) -> usize {
        self.sample_dim() + self.discriminator_condition_dim()
    }

    pub fn discriminator_output(&self) -> usize {
        match self.mode {
            GanMode::SingleType => 1,
            GanMode::MultiType => 1 + self.num_types,
        }
    }

    fn push_shared(&self, c: &ConditionVector, out: &mut Vec<f64>) {
        if self.use_month {
            out.extend_from_slice(&c.month_onehot);
        }
        if self.use_starting_point {
            out.push(c.starting_point);
        }
    }

    pub fn generator_condition(&self, c: &ConditionVector) -> Result<Vec<f64>> {
        self.check_condition(c)?;
        let mut out = Vec::with_capacity(self.generator_condition_dim());
        out.extend_from_slice(&c.type_onehot);
        self.push_shared(c, &mut out);
        Ok(out)
    }

    pub fn discriminator_condition(&self, c: &ConditionVector) -> Result<Vec<f64>> {
        self.check_condition(c)?;
        let mut out = Vec::with_capacity(self.discriminator_condition_dim());
        if self.mode == GanMode::SingleType {
            out.extend_from_slice(&c.type_onehot);
        }
        self.push_shared(c, &mut out);
        Ok(out)
    }

    fn check_condition(&self, c: &ConditionVector) -> Result<()> {
        if c.type_onehot.len() != self.num_types {
            return Err(Error::dim(format!(
                "condition has {} type entries, model has {} types",
                c.type_onehot.len(),
                self.num_types
            )));
        }
        Ok(())
    }
}

/// Maps latent noise plus condition to a daily shape (and duty).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Generator {
    pub net: MultiLayerNet,
}

/// Scores real/fake given the condition; in multi-type mode also predicts
/// the generation type from a head sharing the trunk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Discriminator {
    pub net: MultiLayerNet,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochLosses {
    pub epoch: usize,
    pub discriminator: f64,
    pub generator: f64,
    /// Mean auxiliary cross-entropy on generated samples (multi-type only).
    pub auxiliary: Option<f64>,
}

/// A generated day before duty masking.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratedDay {
    pub shape: DailyShape,
    /// Present iff the requested type is intermittent.
    pub duty: Option<f64>,
}

/// Self-contained trained system: both networks, the configuration, the
/// type encoding and the per-type history summary.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedGanModel {
    pub mode: GanMode,
    pub config: GanConfig,
    pub registry: TypeRegistry,
    pub generator: Generator,
    pub discriminator: Discriminator,
    /// Indexed like the registry.
    pub stats: Vec<TypeStats>,
    pub history: Vec<EpochLosses>,
}

// keeps outputs strictly inside (0, 1) when a sigmoid saturates in f64
const OPEN_UNIT_EPS: f64 = 1e-15;

impl TrainedGanModel {
    pub fn layout(&self) -> Layout {
        Layout::new(self.mode, &self.config, &self.registry)
    }

    pub fn latent_dim(&self) -> usize {
        self.config.latent_dim
    }

    pub fn type_stats(&self, label: &str) -> Result<&TypeStats> {
        let t = self.registry.lookup(label)?;
        Ok(&self.stats[t.index])
    }

    /// Generate one day for `condition` from latent vector `z`.
    ///
    /// A pure function of the parameters, `condition` and `z`.
    pub fn sample(&self, condition: &ConditionVector, z: &[f64]) -> Result<GeneratedDay> {
        Ok(self
            .sample_batch(std::slice::from_ref(condition), z)?
            .remove(0))
    }

    /// Generate one day per condition; `z` holds the latent rows back to back.
    pub fn sample_batch(
        &self,
        conditions: &[ConditionVector],
        z: &[f64],
    ) -> Result<Vec<GeneratedDay>> {
        let layout = self.layout();
        let l = layout.latent_dim;
        if conditions.is_empty() {
            return Ok(Vec::new());
        }
        if z.len() != l * conditions.len() {
            return Err(Error::dim(format!(
                "latent input has {} values, expected {}",
                z.len(),
                l * conditions.len()
            )));
        }
        let mut input = Vec::with_capacity(conditions.len() * layout.generator_input());
        for (c, zi) in conditions.iter().zip(z.chunks_exact(l)) {
            input.extend_from_slice(zi);
            input.extend(layout.generator_condition(c)?);
        }
        let input = Matrix::new(conditions.len(), layout.generator_input(), input)?;
        let out = self.generator.net.predict(&input)?;
        conditions
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let row = out.row(i);
                let mut shape = [0.0; HOURS_PER_DAY];
                for (s, v) in shape.iter_mut().zip(row) {
                    *s = v.clamp(OPEN_UNIT_EPS, 1.0 - OPEN_UNIT_EPS);
                }
                let t = self
                    .registry
                    .by_index(c.type_index())
                    .ok_or_else(|| Error::dim("condition type outside registry"))?;
                let duty = (t.intermittent && layout.duty_channel)
                    .then(|| row[HOURS_PER_DAY].clamp(OPEN_UNIT_EPS, 1.0 - OPEN_UNIT_EPS));
                Ok(GeneratedDay {
                    shape: DailyShape(shape),
                    duty,
                })
            })
            .collect()
    }

    /// Raw discriminator outputs for assembled discriminator inputs.
    pub fn discriminate(&self, input: &Matrix) -> Result<Matrix> {
        self.discriminator.net.predict(input)
    }
}
