//! Small dense feed-forward network engine in double precision.
//!
//! Just enough machinery for the GAN: fully-connected layers with a few
//! activations, hand-written backpropagation, Adam, spectral normalization
//! and a finite-difference gradient checker.

mod adam;
mod gradcheck;
mod layer;
mod matrix;
mod spectral;

pub use adam::{adam_step, AdamState};
pub use gradcheck::{compare_gradients, gradient_check, FD_STEP};
pub use layer::{
    sigmoid, Activation, DenseLayer, ForwardCache, Gradients, LayerGradient, MultiLayerNet,
};
pub use matrix::Matrix;
pub use spectral::{largest_singular_value, spectral_normalize};
