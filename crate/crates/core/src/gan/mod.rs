//! The two GAN systems: independent single-type GANs and the Multi-type GAN
//! with an auxiliary type classifier on the discriminator.

mod checkpoint;
mod config;
pub mod loss;
mod model;
mod train;

pub use checkpoint::{
    from_checkpoint_str, load_model, save_model, to_checkpoint_string, SCHEMA_VERSION,
};
pub use config::{GanConfig, GanMode};
pub use loss::{discriminator_loss, generator_loss, multi_type_loss};
pub use model::{Discriminator, EpochLosses, GeneratedDay, Generator, Layout, TrainedGanModel};
pub use train::{train, DIVERGENCE_LIMIT};
