use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::matrix::{axpy, Matrix};
use crate::error::{Error, Result};
use crate::rng::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Activation {
    Linear,
    LeakyRelu { alpha: f64 },
    Tanh,
    Sigmoid,
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

impl Activation {
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Linear => x,
            Activation::LeakyRelu { alpha } => {
                if x > 0.0 {
                    x
                } else {
                    alpha * x
                }
            }
            Activation::Tanh => x.tanh(),
            Activation::Sigmoid => sigmoid(x),
        }
    }

    /// Derivative at pre-activation `x`, given `y = apply(x)`.
    fn derivative(self, x: f64, y: f64) -> f64 {
        match self {
            Activation::Linear => 1.0,
            Activation::LeakyRelu { alpha } => {
                if x > 0.0 {
                    1.0
                } else {
                    alpha
                }
            }
            Activation::Tanh => 1.0 - y * y,
            Activation::Sigmoid => y * (1.0 - y),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseLayer {
    /// `out x in`.
    pub weights: Matrix,
    pub bias: Vec<f64>,
    pub activation: Activation,
}

impl DenseLayer {
    pub fn new(weights: Matrix, bias: Vec<f64>, activation: Activation) -> Result<Self> {
        if bias.len() != weights.rows() {
            return Err(Error::dim(format!(
                "bias length {} for {} outputs",
                bias.len(),
                weights.rows()
            )));
        }
        Ok(DenseLayer {
            weights,
            bias,
            activation,
        })
    }

    /// Glorot-uniform weights, zero bias.
    pub fn xavier(inputs: usize, outputs: usize, activation: Activation, rng: &mut Rng) -> Self {
        let limit = (6.0 / (inputs + outputs) as f64).sqrt();
        let data = (0..inputs * outputs)
            .map(|_| rng.random_range(-limit..limit))
            .collect();
        DenseLayer {
            weights: Matrix::new(outputs, inputs, data).expect("finite init"),
            bias: vec![0.0; outputs],
            activation,
        }
    }

    pub fn inputs(&self) -> usize {
        self.weights.cols()
    }

    pub fn outputs(&self) -> usize {
        self.weights.rows()
    }

    pub fn param_count(&self) -> usize {
        self.weights.data().len() + self.bias.len()
    }
}

/// Feed-forward stack of dense layers. Equality compares parameters only.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MultiLayerNet {
    layers: Vec<DenseLayer>,
    /// Bumped on every parameter mutation; ties caches to parameters.
    #[serde(skip)]
    version: u64,
}

impl PartialEq for MultiLayerNet {
    fn eq(&self, other: &Self) -> bool {
        self.layers == other.layers
    }
}

/// Per-layer values retained by [`MultiLayerNet::forward`] for backprop.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    version: u64,
    /// Input to each layer; `inputs[0]` is the batch.
    inputs: Vec<Matrix>,
    pre: Vec<Matrix>,
    output: Matrix,
}

impl ForwardCache {
    pub fn pre_activations(&self) -> &[Matrix] {
        &self.pre
    }

    pub fn output(&self) -> &Matrix {
        &self.output
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerGradient {
    pub weights: Matrix,
    pub bias: Vec<f64>,
}

/// Gradients shaped exactly like a network's parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<LayerGradient>,
}

impl Gradients {
    pub fn zeros_like(net: &MultiLayerNet) -> Self {
        Gradients {
            layers: net
                .layers
                .iter()
                .map(|l| LayerGradient {
                    weights: Matrix::zeros(l.outputs(), l.inputs()),
                    bias: vec![0.0; l.outputs()],
                })
                .collect(),
        }
    }

    /// Parameters in layer order, weights (row-major) before bias.
    pub fn flat(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for l in &self.layers {
            out.extend_from_slice(l.weights.data());
            out.extend_from_slice(&l.bias);
        }
        out
    }

    pub fn scale(&mut self, k: f64) {
        for l in &mut self.layers {
            l.weights.scale(k);
            l.bias.iter_mut().for_each(|b| *b *= k);
        }
    }

    pub fn is_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weights.is_finite() && l.bias.iter().all(|b| b.is_finite()))
    }
}

impl MultiLayerNet {
    pub fn new(layers: Vec<DenseLayer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::dim("network needs at least one layer"));
        }
        for (i, pair) in layers.windows(2).enumerate() {
            if pair[0].outputs() != pair[1].inputs() {
                return Err(Error::dim(format!(
                    "layer {i} outputs {} but layer {} takes {}",
                    pair[0].outputs(),
                    i + 1,
                    pair[1].inputs()
                )));
            }
        }
        Ok(MultiLayerNet { layers, version: 0 })
    }

    /// Xavier-initialized stack: `widths = [in, h1, ..., out]`, `hidden` on
    /// every layer but the last, which uses `output`.
    pub fn xavier(
        widths: &[usize],
        hidden: Activation,
        output: Activation,
        rng: &mut Rng,
    ) -> Result<Self> {
        if widths.len() < 2 || widths.contains(&0) {
            return Err(Error::dim(format!("invalid layer widths {widths:?}")));
        }
        let n = widths.len() - 1;
        let layers = (0..n)
            .map(|i| {
                let act = if i + 1 == n { output } else { hidden };
                DenseLayer::xavier(widths[i], widths[i + 1], act, rng)
            })
            .collect();
        MultiLayerNet::new(layers)
    }

    pub fn layers(&self) -> &[DenseLayer] {
        &self.layers
    }

    /// Mutable access to the parameters; invalidates outstanding caches.
    pub fn layers_mut(&mut self) -> &mut [DenseLayer] {
        self.version += 1;
        &mut self.layers
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].inputs()
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].outputs()
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(DenseLayer::param_count).sum()
    }

    pub fn flat_params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for l in &self.layers {
            out.extend_from_slice(l.weights.data());
            out.extend_from_slice(&l.bias);
        }
        out
    }

    fn layer_forward(layer: &DenseLayer, x: &Matrix) -> Result<(Matrix, Matrix)> {
        let mut pre = x.matmul_t(&layer.weights)?;
        for r in 0..pre.rows() {
            for (v, b) in pre.row_mut(r).iter_mut().zip(&layer.bias) {
                *v += b;
            }
        }
        let mut out = pre.clone();
        out.data_mut()
            .iter_mut()
            .for_each(|v| *v = layer.activation.apply(*v));
        Ok((pre, out))
    }

    fn check_input(&self, batch: &Matrix) -> Result<()> {
        if batch.cols() != self.input_dim() {
            return Err(Error::dim(format!(
                "batch width {} but network expects {}",
                batch.cols(),
                self.input_dim()
            )));
        }
        Ok(())
    }

    /// Forward pass retaining everything `backward` needs.
    pub fn forward(&self, batch: &Matrix) -> Result<ForwardCache> {
        self.check_input(batch)?;
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut pre_all = Vec::with_capacity(self.layers.len());
        let mut x = batch.clone();
        for layer in &self.layers {
            let (pre, out) = Self::layer_forward(layer, &x)?;
            inputs.push(x);
            pre_all.push(pre);
            x = out;
        }
        if !x.is_finite() {
            return Err(Error::NonFinite("network output".into()));
        }
        Ok(ForwardCache {
            version: self.version,
            inputs,
            pre: pre_all,
            output: x,
        })
    }

    /// Forward pass without a cache.
    pub fn predict(&self, batch: &Matrix) -> Result<Matrix> {
        self.check_input(batch)?;
        let mut x = batch.clone();
        for layer in &self.layers {
            x = Self::layer_forward(layer, &x)?.1;
        }
        if !x.is_finite() {
            return Err(Error::NonFinite("network output".into()));
        }
        Ok(x)
    }

    /// Backpropagate `output_grad` (dLoss/dOutput) through the cached pass.
    ///
    /// Returns parameter gradients and dLoss/dInput.
    pub fn backward(
        &self,
        cache: &ForwardCache,
        output_grad: &Matrix,
    ) -> Result<(Gradients, Matrix)> {
        if cache.version != self.version || cache.inputs.len() != self.layers.len() {
            return Err(Error::StaleCache(
                "cache was produced before the last parameter update".into(),
            ));
        }
        for (i, (layer, x)) in self.layers.iter().zip(&cache.inputs).enumerate() {
            if x.cols() != layer.inputs() {
                return Err(Error::StaleCache(format!("layer {i} input width changed")));
            }
        }
        if output_grad.rows() != cache.output.rows() || output_grad.cols() != cache.output.cols() {
            return Err(Error::dim(format!(
                "output gradient {}x{} vs output {}x{}",
                output_grad.rows(),
                output_grad.cols(),
                cache.output.rows(),
                cache.output.cols()
            )));
        }

        let n = self.layers.len();
        let mut grads = Vec::with_capacity(n);
        let mut delta = output_grad.clone();
        for l in (0..n).rev() {
            let layer = &self.layers[l];
            let pre = &cache.pre[l];
            let out = if l + 1 < n {
                &cache.inputs[l + 1]
            } else {
                &cache.output
            };
            // through the activation
            for ((d, &x), &y) in delta.data_mut().iter_mut().zip(pre.data()).zip(out.data()) {
                *d *= layer.activation.derivative(x, y);
            }
            let dw = delta.t_matmul(&cache.inputs[l])?;
            let mut db = vec![0.0; layer.outputs()];
            for r in 0..delta.rows() {
                axpy(1.0, delta.row(r), &mut db);
            }
            let dx = delta.matmul(&layer.weights)?;
            grads.push(LayerGradient {
                weights: dw,
                bias: db,
            });
            delta = dx;
        }
        grads.reverse();
        let grads = Gradients { layers: grads };
        if !grads.is_finite() || !delta.is_finite() {
            return Err(Error::NonFinite("gradients".into()));
        }
        Ok((grads, delta))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::from_seed;

    fn single(weights: Matrix, bias: Vec<f64>, act: Activation) -> MultiLayerNet {
        MultiLayerNet::new(vec![DenseLayer::new(weights, bias, act).unwrap()]).unwrap()
    }

    #[test]
    fn identity_linear_layer_is_identity() {
        let net = single(Matrix::identity(3), vec![0.0; 3], Activation::Linear);
        let x = Matrix::from_rows(&[vec![1.0, -2.0, 3.5], vec![0.0, 4.0, -1.0]]).unwrap();
        assert_eq!(net.predict(&x).unwrap(), x);
    }

    #[test]
    fn sigmoid_and_tanh_at_zero() {
        let x = Matrix::zeros(2, 3);
        let s = single(Matrix::identity(3), vec![0.0; 3], Activation::Sigmoid);
        assert!(s.predict(&x).unwrap().data().iter().all(|v| *v == 0.5));
        let t = single(Matrix::identity(3), vec![0.0; 3], Activation::Tanh);
        assert!(t.predict(&x).unwrap().data().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn hand_computed_quadratic_gradient() {
        // loss = 0.5 * |y|^2, y = W x with W = I: dL/dy = y = x,
        // dL/dW = y x^T, dL/db = y, dL/dx = W^T y.
        let net = single(Matrix::identity(2), vec![0.0; 2], Activation::Linear);
        let x = Matrix::from_rows(&[vec![3.0, -2.0]]).unwrap();
        let cache = net.forward(&x).unwrap();
        let (g, dx) = net.backward(&cache, cache.output()).unwrap();
        assert_eq!(g.layers[0].weights.data(), &[9.0, -6.0, -6.0, 4.0]);
        assert_eq!(g.layers[0].bias, vec![3.0, -2.0]);
        assert_eq!(dx.data(), &[3.0, -2.0]);
    }

    #[test]
    fn zero_output_gradient_gives_zero_gradients() {
        let mut rng = from_seed(1);
        let net =
            MultiLayerNet::xavier(&[4, 5, 3], Activation::Tanh, Activation::Sigmoid, &mut rng)
                .unwrap();
        let x = Matrix::new(2, 4, vec![0.3; 8]).unwrap();
        let cache = net.forward(&x).unwrap();
        let (g, _) = net.backward(&cache, &Matrix::zeros(2, 3)).unwrap();
        assert!(g.flat().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn stale_cache_and_bad_dims_rejected() {
        let mut rng = from_seed(2);
        let mut net =
            MultiLayerNet::xavier(&[2, 3, 1], Activation::Tanh, Activation::Linear, &mut rng)
                .unwrap();
        assert!(matches!(
            net.forward(&Matrix::zeros(1, 3)),
            Err(Error::Dimension(_))
        ));
        let cache = net.forward(&Matrix::zeros(1, 2)).unwrap();
        net.layers_mut()[0].bias[0] = 0.5;
        assert!(matches!(
            net.backward(&cache, &Matrix::zeros(1, 1)),
            Err(Error::StaleCache(_))
        ));
    }

    #[test]
    fn rejects_mismatched_layers() {
        let mut rng = from_seed(3);
        let a = DenseLayer::xavier(2, 3, Activation::Tanh, &mut rng);
        let b = DenseLayer::xavier(4, 1, Activation::Linear, &mut rng);
        assert!(MultiLayerNet::new(vec![a, b]).is_err());
    }
}
