//! Checkpoint files: pretty-printed JSON with every network parameter and
//! history statistic stored as a decimal string of 17 significant digits,
//! which parses back to the identical `f64`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::{GanConfig, GanMode};
use super::model::{Discriminator, EpochLosses, Generator, TrainedGanModel};
use crate::data::{GenerationType, TypeRegistry, TypeStats, MONTHS};
use crate::error::{Error, Result};
use crate::nn::{Activation, DenseLayer, Matrix, MultiLayerNet};

pub const SCHEMA_VERSION: u64 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CheckpointFile {
    schema_version: u64,
    mode: GanMode,
    config: GanConfig,
    type_registry: Vec<GenerationType>,
    generator: Vec<LayerRecord>,
    discriminator: Vec<LayerRecord>,
    type_stats: Vec<StatsRecord>,
    loss_history: Vec<EpochLosses>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LayerRecord {
    inputs: usize,
    outputs: usize,
    activation: Activation,
    weights: Vec<String>,
    bias: Vec<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StatsRecord {
    label: String,
    month_mean: Vec<String>,
    jan1_starts: Vec<String>,
    ramp_quantiles: Vec<String>,
    duty_threshold: String,
}

fn encode(v: f64) -> String {
    format!("{v:.16e}")
}

fn encode_all(vs: &[f64]) -> Vec<String> {
    vs.iter().map(|v| encode(*v)).collect()
}

fn decode(s: &str) -> Result<f64> {
    let v: f64 = s
        .parse()
        .map_err(|_| Error::CorruptCheckpoint(format!("bad number {s:?}")))?;
    if !v.is_finite() {
        return Err(Error::CorruptCheckpoint(format!("non-finite number {s:?}")));
    }
    Ok(v)
}

fn decode_all(ss: &[String]) -> Result<Vec<f64>> {
    ss.iter().map(|s| decode(s)).collect()
}

fn net_to_records(net: &MultiLayerNet) -> Vec<LayerRecord> {
    net.layers()
        .iter()
        .map(|l| LayerRecord {
            inputs: l.inputs(),
            outputs: l.outputs(),
            activation: l.activation,
            weights: encode_all(l.weights.data()),
            bias: encode_all(&l.bias),
        })
        .collect()
}

fn records_to_net(records: &[LayerRecord]) -> Result<MultiLayerNet> {
    let corrupt = |e: Error| Error::CorruptCheckpoint(e.to_string());
    let layers = records
        .iter()
        .map(|r| {
            let weights =
                Matrix::new(r.outputs, r.inputs, decode_all(&r.weights)?).map_err(corrupt)?;
            DenseLayer::new(weights, decode_all(&r.bias)?, r.activation).map_err(corrupt)
        })
        .collect::<Result<Vec<_>>>()?;
    MultiLayerNet::new(layers).map_err(corrupt)
}

fn to_file(model: &TrainedGanModel) -> CheckpointFile {
    CheckpointFile {
        schema_version: SCHEMA_VERSION,
        mode: model.mode,
        config: model.config.clone(),
        type_registry: model.registry.types().to_vec(),
        generator: net_to_records(&model.generator.net),
        discriminator: net_to_records(&model.discriminator.net),
        type_stats: model
            .stats
            .iter()
            .map(|s| StatsRecord {
                label: s.label.clone(),
                month_mean: encode_all(&s.month_mean),
                jan1_starts: encode_all(&s.jan1_starts),
                ramp_quantiles: encode_all(&s.ramp_quantiles),
                duty_threshold: encode(s.duty_threshold),
            })
            .collect(),
        loss_history: model.history.clone(),
    }
}

fn from_file(file: CheckpointFile) -> Result<TrainedGanModel> {
    let registry = TypeRegistry::new(
        file.type_registry
            .iter()
            .map(|t| (t.label.clone(), t.intermittent)),
    )
    .map_err(|e| Error::CorruptCheckpoint(e.to_string()))?;
    if registry.types() != file.type_registry.as_slice() {
        return Err(Error::CorruptCheckpoint(
            "type registry is not in canonical order".into(),
        ));
    }
    let stats = file
        .type_stats
        .iter()
        .map(|s| {
            let month_mean: [f64; MONTHS] = decode_all(&s.month_mean)?
                .try_into()
                .map_err(|_| Error::CorruptCheckpoint("month_mean needs 12 values".into()))?;
            Ok(TypeStats {
                label: s.label.clone(),
                month_mean,
                jan1_starts: decode_all(&s.jan1_starts)?,
                ramp_quantiles: decode_all(&s.ramp_quantiles)?,
                duty_threshold: decode(&s.duty_threshold)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    if stats.len() != registry.len() {
        return Err(Error::CorruptCheckpoint(
            "type_stats do not match the registry".into(),
        ));
    }
    let model = TrainedGanModel {
        mode: file.mode,
        config: file.config,
        registry,
        generator: Generator {
            net: records_to_net(&file.generator)?,
        },
        discriminator: Discriminator {
            net: records_to_net(&file.discriminator)?,
        },
        stats,
        history: file.loss_history,
    };
    let layout = model.layout();
    let g = &model.generator.net;
    let d = &model.discriminator.net;
    if g.input_dim() != layout.generator_input()
        || g.output_dim() != layout.sample_dim()
        || d.input_dim() != layout.discriminator_input()
        || d.output_dim() != layout.discriminator_output()
    {
        return Err(Error::CorruptCheckpoint(
            "network dimensions do not match the configuration".into(),
        ));
    }
    Ok(model)
}

/// Serialize a model to the checkpoint text format.
pub fn to_checkpoint_string(model: &TrainedGanModel) -> String {
    let mut s = serde_json::to_string_pretty(&to_file(model)).expect("checkpoint serializes");
    s.push('\n');
    s
}

pub fn from_checkpoint_str(text: &str) -> Result<TrainedGanModel> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| Error::CorruptCheckpoint(e.to_string()))?;
    let version = value
        .get("schema_version")
        .and_then(serde_json::Value::as_u64)
        .ok_or_else(|| Error::CorruptCheckpoint("missing schema_version".into()))?;
    if version != SCHEMA_VERSION {
        return Err(Error::SchemaVersion {
            found: version,
            expected: SCHEMA_VERSION,
        });
    }
    let file: CheckpointFile =
        serde_json::from_value(value).map_err(|e| Error::CorruptCheckpoint(e.to_string()))?;
    from_file(file)
}

pub fn save_model(model: &TrainedGanModel, path: &Path) -> Result<()> {
    std::fs::write(path, to_checkpoint_string(model)).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: &Path) -> Result<TrainedGanModel> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    from_checkpoint_str(&text)
}
