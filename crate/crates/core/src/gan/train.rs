use rand::seq::SliceRandom;
use rand_distr::{Distribution, StandardNormal};

use super::config::{GanConfig, GanMode};
use super::loss::{
    auxiliary_logit_grad, auxiliary_loss, discriminator_loss, generator_loss, softmax,
};
use super::model::{Discriminator, EpochLosses, Generator, Layout, TrainedGanModel};
use crate::data::{TrainingData, HOURS_PER_DAY};
use crate::error::{Error, Result};
use crate::nn::{
    adam_step, sigmoid, spectral_normalize, Activation, AdamState, Gradients, Matrix, MultiLayerNet,
};
use crate::rng::{derive_seed, from_seed, Rng};
use crate::synthesis::duty_keep_mask;

/// Losses above this (or non-finite) abort training.
pub const DIVERGENCE_LIMIT: f64 = 1e3;

/// Train one of the two GAN systems.
///
/// Each batch takes `discriminator_steps` discriminator updates followed by
/// one generator update. Shuffling, latent draws and initialization all come
/// from `config.seed`, so identical inputs give bit-identical parameters.
pub fn train(data: &TrainingData, config: &GanConfig, mode: GanMode) -> Result<TrainedGanModel> {
    config.validate()?;
    if data.samples.is_empty() {
        return Err(Error::Data("training set is empty".into()));
    }
    match mode {
        GanMode::SingleType => {
            if data.registry.len() != 1 {
                return Err(Error::invalid(format!(
                    "single-type training needs exactly one type, registry has {}",
                    data.registry.len()
                )));
            }
        }
        GanMode::MultiType => {
            if data.registry.len() < 2 {
                return Err(Error::invalid("multi-type requires ≥ 2 types"));
            }
        }
    }
    if data.stats.len() != data.registry.len() {
        return Err(Error::invalid("type statistics do not match the registry"));
    }

    let layout = Layout::new(mode, config, &data.registry);
    let mut init_rng = from_seed(derive_seed(config.seed, "init", 0));
    let hidden = Activation::LeakyRelu {
        alpha: config.leaky_alpha,
    };
    let gen_widths: Vec<usize> = std::iter::once(layout.generator_input())
        .chain(config.generator_hidden.iter().copied())
        .chain(std::iter::once(layout.sample_dim()))
        .collect();
    let disc_widths: Vec<usize> = std::iter::once(layout.discriminator_input())
        .chain(config.discriminator_hidden.iter().copied())
        .chain(std::iter::once(layout.discriminator_output()))
        .collect();
    let generator = MultiLayerNet::xavier(&gen_widths, hidden, Activation::Sigmoid, &mut init_rng)?;
    let mut discriminator =
        MultiLayerNet::xavier(&disc_widths, hidden, Activation::Linear, &mut init_rng)?;
    if config.spectral_norm {
        project_spectral(&mut discriminator, config.spectral_iterations);
    }

    let mut model = TrainedGanModel {
        mode,
        config: config.clone(),
        registry: data.registry.clone(),
        generator: Generator { net: generator },
        discriminator: Discriminator { net: discriminator },
        stats: data.stats.clone(),
        history: Vec::new(),
    };
    if config.epochs == 0 {
        return Ok(model);
    }

    let mut trainer = Trainer::new(data, config, layout, &model)?;
    for epoch in 0..config.epochs {
        let losses = trainer.epoch(epoch, &mut model)?;
        model.history.push(losses);
    }
    Ok(model)
}

fn project_spectral(net: &mut MultiLayerNet, iterations: usize) {
    for layer in net.layers_mut() {
        layer.weights = spectral_normalize(&layer.weights, iterations);
    }
}

/// Precomputed, encoded form of one training sample.
struct Encoded {
    gen_condition: Vec<f64>,
    /// Full discriminator input for the real sample.
    real_input: Vec<f64>,
    disc_condition: Vec<f64>,
    type_index: usize,
    intermittent: bool,
}

struct Trainer<'a> {
    config: &'a GanConfig,
    layout: Layout,
    samples: Vec<Encoded>,
    order: Vec<usize>,
    rng: Rng,
    adam_g: AdamState,
    adam_d: AdamState,
}

struct StepLosses {
    discriminator: f64,
    generator: f64,
    auxiliary: f64,
}

impl<'a> Trainer<'a> {
    fn new(
        data: &TrainingData,
        config: &'a GanConfig,
        layout: Layout,
        model: &TrainedGanModel,
    ) -> Result<Self> {
        let mut samples = Vec::with_capacity(data.samples.len());
        for s in &data.samples {
            let t = data
                .registry
                .by_index(s.condition.type_index())
                .ok_or_else(|| Error::dim("sample type outside registry"))?;
            if t.intermittent != s.target_duty.is_some() {
                return Err(Error::Data(format!(
                    "sample duty presence does not match type {}",
                    t.label
                )));
            }
            let disc_condition = layout.discriminator_condition(&s.condition)?;
            let mut real_input = Vec::with_capacity(layout.discriminator_input());
            real_input.extend_from_slice(&s.target_shape.0);
            if layout.duty_channel {
                real_input.push(s.target_duty.unwrap_or(0.0));
            }
            real_input.extend_from_slice(&disc_condition);
            samples.push(Encoded {
                gen_condition: layout.generator_condition(&s.condition)?,
                real_input,
                disc_condition,
                type_index: t.index,
                intermittent: t.intermittent,
            });
        }
        let adam_g = AdamState::for_net(
            &model.generator.net,
            config.lr_generator,
            config.adam_beta1,
            config.adam_beta2,
        )?;
        let adam_d = AdamState::for_net(
            &model.discriminator.net,
            config.lr_discriminator,
            config.adam_beta1,
            config.adam_beta2,
        )?;
        Ok(Trainer {
            config,
            layout,
            order: (0..samples.len()).collect(),
            samples,
            rng: from_seed(derive_seed(config.seed, "train", 0)),
            adam_g,
            adam_d,
        })
    }

    fn aux_active(&self) -> bool {
        self.layout.mode == GanMode::MultiType && self.config.aux_classifier
    }

    fn epoch(&mut self, epoch: usize, model: &mut TrainedGanModel) -> Result<EpochLosses> {
        self.order.shuffle(&mut self.rng);
        let order = std::mem::take(&mut self.order);
        let (mut d_sum, mut g_sum, mut a_sum) = (0.0, 0.0, 0.0);
        let mut batches = 0;
        for (b, batch) in order.chunks(self.config.batch_size).enumerate() {
            let losses = self.step(batch, model)?;
            for (name, value) in [
                ("discriminator", losses.discriminator),
                ("generator", losses.generator),
            ] {
                if !value.is_finite() || value > DIVERGENCE_LIMIT {
                    return Err(Error::Diverged {
                        epoch,
                        batch: b,
                        loss_name: name,
                        value,
                    });
                }
            }
            d_sum += losses.discriminator;
            g_sum += losses.generator;
            a_sum += losses.auxiliary;
            batches += 1;
        }
        self.order = order;
        let n = batches as f64;
        Ok(EpochLosses {
            epoch,
            discriminator: d_sum / n,
            generator: g_sum / n,
            auxiliary: self.aux_active().then_some(a_sum / n),
        })
    }

    fn latent(&mut self, rows: usize) -> Matrix {
        let l = self.layout.latent_dim;
        let data = (0..rows * l)
            .map(|_| StandardNormal.sample(&mut self.rng))
            .collect();
        Matrix::new(rows, l, data).expect("finite normals")
    }

    fn generator_input(&mut self, batch: &[usize]) -> Result<Matrix> {
        let z = self.latent(batch.len());
        let cond_dim = self.layout.generator_condition_dim();
        let mut cond = Vec::with_capacity(batch.len() * cond_dim);
        for &i in batch {
            cond.extend_from_slice(&self.samples[i].gen_condition);
        }
        z.hstack(&Matrix::new(batch.len(), cond_dim, cond)?)
    }

    /// Discriminator input for generated rows plus the duty masks
    /// (true = hour kept).
    ///
    /// The discriminator sees the masked shape and the duty rounded to whole
    /// hours, exactly like a real day; both are treated as straight-through
    /// in the backward pass.
    fn fake_input(
        &self,
        batch: &[usize],
        generated: &Matrix,
    ) -> Result<(Matrix, Vec<[bool; HOURS_PER_DAY]>)> {
        let mut data = Vec::with_capacity(batch.len() * self.layout.discriminator_input());
        let mut masks = Vec::with_capacity(batch.len());
        for (r, &i) in batch.iter().enumerate() {
            let row = generated.row(r);
            let s = &self.samples[i];
            let shape: &[f64; HOURS_PER_DAY] = row[..HOURS_PER_DAY].try_into().expect("24 columns");
            let mask = if s.intermittent {
                duty_keep_mask(shape, row[HOURS_PER_DAY])
            } else {
                [true; HOURS_PER_DAY]
            };
            data.extend(
                shape
                    .iter()
                    .zip(&mask)
                    .map(|(v, keep)| if *keep { *v } else { 0.0 }),
            );
            if self.layout.duty_channel {
                data.push(if s.intermittent {
                    quantize_duty(row[HOURS_PER_DAY])
                } else {
                    0.0
                });
            }
            data.extend_from_slice(&s.disc_condition);
            masks.push(mask);
        }
        Ok((
            Matrix::new(batch.len(), self.layout.discriminator_input(), data)?,
            masks,
        ))
    }

    fn real_input(&self, batch: &[usize]) -> Result<Matrix> {
        let mut data = Vec::with_capacity(batch.len() * self.layout.discriminator_input());
        for &i in batch {
            data.extend_from_slice(&self.samples[i].real_input);
        }
        Matrix::new(batch.len(), self.layout.discriminator_input(), data)
    }

    fn class_probs(&self, out: &Matrix) -> Vec<Vec<f64>> {
        (0..out.rows()).map(|r| softmax(&out.row(r)[1..])).collect()
    }

    fn step(&mut self, batch: &[usize], model: &mut TrainedGanModel) -> Result<StepLosses> {
        let b = batch.len();
        let bf = b as f64;
        let s = self.config.label_smoothing;
        let lambda = self.config.lambda_cls;
        let types: Vec<usize> = batch.iter().map(|&i| self.samples[i].type_index).collect();

        // discriminator
        let mut d_total = 0.0;
        for _ in 0..self.config.discriminator_steps {
            let g_in = self.generator_input(batch)?;
            let generated = model.generator.net.predict(&g_in)?;
            let (fake_in, _) = self.fake_input(batch, &generated)?;
            let real_in = self.real_input(batch)?;
            let disc = &model.discriminator.net;
            let real_cache = disc.forward(&real_in)?;
            let fake_cache = disc.forward(&fake_in)?;
            let (real_out, fake_out) = (real_cache.output(), fake_cache.output());

            let real_p: Vec<f64> = (0..b).map(|r| sigmoid(real_out.get(r, 0))).collect();
            let fake_p: Vec<f64> = (0..b).map(|r| sigmoid(fake_out.get(r, 0))).collect();
            d_total = discriminator_loss(&real_p, &fake_p, s);

            let mut real_grad = Matrix::zeros(b, real_out.cols());
            let mut fake_grad = Matrix::zeros(b, fake_out.cols());
            for r in 0..b {
                real_grad.set(r, 0, -(1.0 - s) * (1.0 - real_p[r]) / bf);
                fake_grad.set(r, 0, fake_p[r] / bf);
            }
            if self.aux_active() {
                let real_cls = self.class_probs(real_out);
                let fake_cls = self.class_probs(fake_out);
                d_total += auxiliary_loss(&real_cls, &types, lambda)?
                    + auxiliary_loss(&fake_cls, &types, lambda)?;
                for r in 0..b {
                    let gr = auxiliary_logit_grad(&real_cls[r], types[r], lambda, b);
                    let gf = auxiliary_logit_grad(&fake_cls[r], types[r], lambda, b);
                    real_grad.row_mut(r)[1..].copy_from_slice(&gr);
                    fake_grad.row_mut(r)[1..].copy_from_slice(&gf);
                }
            }
            let (mut grads, _) = disc.backward(&real_cache, &real_grad)?;
            let (fake_grads, _) = disc.backward(&fake_cache, &fake_grad)?;
            add_grads(&mut grads, &fake_grads);
            adam_step(&mut model.discriminator.net, &grads, &mut self.adam_d)?;
            if self.config.spectral_norm {
                project_spectral(
                    &mut model.discriminator.net,
                    self.config.spectral_iterations,
                );
            }
        }

        // generator
        let g_in = self.generator_input(batch)?;
        let g_cache = model.generator.net.forward(&g_in)?;
        let (fake_in, masks) = self.fake_input(batch, g_cache.output())?;
        let disc = &model.discriminator.net;
        let d_cache = disc.forward(&fake_in)?;
        let out = d_cache.output();
        let fake_p: Vec<f64> = (0..b).map(|r| sigmoid(out.get(r, 0))).collect();
        let mut g_total = generator_loss(&fake_p);
        let mut out_grad = Matrix::zeros(b, out.cols());
        for (r, p) in fake_p.iter().enumerate() {
            out_grad.set(r, 0, -(1.0 - p) / bf);
        }
        let mut aux = 0.0;
        if self.aux_active() {
            let cls = self.class_probs(out);
            aux = auxiliary_loss(&cls, &types, lambda)?;
            g_total += aux;
            for r in 0..b {
                let g = auxiliary_logit_grad(&cls[r], types[r], lambda, b);
                out_grad.row_mut(r)[1..].copy_from_slice(&g);
            }
        }
        let (_, input_grad) = disc.backward(&d_cache, &out_grad)?;
        let mut gen_grad = Matrix::zeros(b, self.layout.sample_dim());
        for (r, &i) in batch.iter().enumerate() {
            let src = input_grad.row(r);
            let dst = gen_grad.row_mut(r);
            for h in 0..HOURS_PER_DAY {
                if masks[r][h] {
                    dst[h] = src[h];
                }
            }
            if self.layout.duty_channel && self.samples[i].intermittent {
                let row = g_cache.output().row(r);
                let shape: &[f64; HOURS_PER_DAY] =
                    row[..HOURS_PER_DAY].try_into().expect("24 columns");
                dst[HOURS_PER_DAY] = src[HOURS_PER_DAY]
                    + duty_gate_grad(shape, row[HOURS_PER_DAY], &src[..HOURS_PER_DAY]);
            }
        }
        let (g_grads, _) = model.generator.net.backward(&g_cache, &gen_grad)?;
        adam_step(&mut model.generator.net, &g_grads, &mut self.adam_g)?;

        Ok(StepLosses {
            discriminator: d_total,
            generator: g_total,
            auxiliary: aux,
        })
    }
}

/// Duty as the discriminator sees it: a whole number of hours.
fn quantize_duty(duty: f64) -> f64 {
    (duty.clamp(0.0, 1.0) * HOURS_PER_DAY as f64).round() / HOURS_PER_DAY as f64
}

/// Gradient of the masked shape with respect to the duty, through a soft
/// rank gate: hour of rank `r` (0 = largest) is kept with weight
/// `sigmoid(24 d - r - 0.5)`. Only hours ranked near the cut contribute.
fn duty_gate_grad(shape: &[f64; HOURS_PER_DAY], duty: f64, input_grad: &[f64]) -> f64 {
    let mut order: [usize; HOURS_PER_DAY] = std::array::from_fn(|i| i);
    order.sort_by(|&a, &b| shape[b].total_cmp(&shape[a]));
    let pos = duty * HOURS_PER_DAY as f64;
    order
        .iter()
        .enumerate()
        .map(|(rank, &h)| {
            let g = sigmoid(pos - rank as f64 - 0.5);
            input_grad[h] * shape[h] * HOURS_PER_DAY as f64 * g * (1.0 - g)
        })
        .sum()
}

fn add_grads(acc: &mut Gradients, other: &Gradients) {
    for (a, o) in acc.layers.iter_mut().zip(&other.layers) {
        for (x, y) in a.weights.data_mut().iter_mut().zip(o.weights.data()) {
            *x += y;
        }
        for (x, y) in a.bias.iter_mut().zip(&o.bias) {
            *x += y;
        }
    }
}
