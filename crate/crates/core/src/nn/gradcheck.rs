use super::layer::{Gradients, MultiLayerNet};
use super::matrix::Matrix;
use crate::error::Result;

/// Central-difference step.
pub const FD_STEP: f64 = 1e-5;

/// Max relative error between backprop gradients and central differences.
///
/// `loss_fn` maps the network output to `(loss, dLoss/dOutput)`. The
/// relative error per parameter is `|a - n| / max(|a|, |n|, 1e-8)`.
pub fn gradient_check<F>(net: &MultiLayerNet, input: &Matrix, loss_fn: F) -> Result<f64>
where
    F: Fn(&Matrix) -> (f64, Matrix),
{
    let cache = net.forward(input)?;
    let (_, grad_out) = loss_fn(cache.output());
    let (analytic, _) = net.backward(&cache, &grad_out)?;
    compare_gradients(net, input, loss_fn, &analytic)
}

/// Like [`gradient_check`] but against caller-supplied gradients.
pub fn compare_gradients<F>(
    net: &MultiLayerNet,
    input: &Matrix,
    loss_fn: F,
    analytic: &Gradients,
) -> Result<f64>
where
    F: Fn(&Matrix) -> (f64, Matrix),
{
    let analytic = analytic.flat();
    let mut probe = net.clone();
    let mut worst: f64 = 0.0;
    let mut idx = 0;
    for l in 0..net.layers().len() {
        let n_w = net.layers()[l].weights.data().len();
        let n_b = net.layers()[l].bias.len();
        for k in 0..n_w + n_b {
            let orig = param(&probe, l, k);
            set_param(&mut probe, l, k, orig + FD_STEP);
            let plus = loss_fn(&probe.predict(input)?).0;
            set_param(&mut probe, l, k, orig - FD_STEP);
            let minus = loss_fn(&probe.predict(input)?).0;
            set_param(&mut probe, l, k, orig);
            let numeric = (plus - minus) / (2.0 * FD_STEP);
            let a = analytic[idx];
            let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-8);
            worst = worst.max(rel);
            idx += 1;
        }
    }
    Ok(worst)
}

fn param(net: &MultiLayerNet, layer: usize, k: usize) -> f64 {
    let l = &net.layers()[layer];
    let n_w = l.weights.data().len();
    if k < n_w {
        l.weights.data()[k]
    } else {
        l.bias[k - n_w]
    }
}

fn set_param(net: &mut MultiLayerNet, layer: usize, k: usize, v: f64) {
    let l = &mut net.layers_mut()[layer];
    let n_w = l.weights.data().len();
    if k < n_w {
        l.weights.data_mut()[k] = v;
    } else {
        l.bias[k - n_w] = v;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::Activation;
    use crate::rng::from_seed;
    use rand::Rng as _;

    fn quadratic(y: &Matrix) -> (f64, Matrix) {
        let loss = 0.5 * y.data().iter().map(|v| v * v).sum::<f64>();
        (loss, y.clone())
    }

    fn random_input(rows: usize, cols: usize, seed: u64) -> Matrix {
        let mut rng = from_seed(seed);
        Matrix::new(
            rows,
            cols,
            (0..rows * cols)
                .map(|_| rng.random_range(-1.0..1.0))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn linear_net_is_exact() {
        let mut rng = from_seed(5);
        let net =
            MultiLayerNet::xavier(&[4, 6, 3], Activation::Linear, Activation::Linear, &mut rng)
                .unwrap();
        let err = gradient_check(&net, &random_input(5, 4, 6), quadratic).unwrap();
        assert!(err < 1e-7, "{err}");
    }

    #[test]
    fn corrupted_gradient_is_detected() {
        let mut rng = from_seed(7);
        let net = MultiLayerNet::xavier(&[3, 4, 2], Activation::Tanh, Activation::Linear, &mut rng)
            .unwrap();
        let x = random_input(4, 3, 8);
        let cache = net.forward(&x).unwrap();
        let (mut g, _) = net.backward(&cache, cache.output()).unwrap();
        g.scale(2.0);
        let err = compare_gradients(&net, &x, quadratic, &g).unwrap();
        assert!((err - 0.5).abs() < 1e-3, "{err}");
    }
}
