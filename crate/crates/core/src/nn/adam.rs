use serde::{Deserialize, Serialize};

use super::layer::{Gradients, MultiLayerNet};
use crate::error::{Error, Result};

/// Adam moments and hyperparameters over a flat parameter vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub t: u64,
    m: Vec<f64>,
    v: Vec<f64>,
}

impl AdamState {
    pub fn new(param_count: usize, lr: f64, beta1: f64, beta2: f64, epsilon: f64) -> Result<Self> {
        if !(lr > 0.0) || !(epsilon > 0.0) {
            return Err(Error::invalid("Adam needs lr > 0 and epsilon > 0"));
        }
        if !(0.0..1.0).contains(&beta1) || !(0.0..1.0).contains(&beta2) {
            return Err(Error::invalid("Adam betas must lie in [0, 1)"));
        }
        Ok(AdamState {
            lr,
            beta1,
            beta2,
            epsilon,
            t: 0,
            m: vec![0.0; param_count],
            v: vec![0.0; param_count],
        })
    }

    pub fn for_net(net: &MultiLayerNet, lr: f64, beta1: f64, beta2: f64) -> Result<Self> {
        AdamState::new(net.param_count(), lr, beta1, beta2, 1e-8)
    }

    pub fn len(&self) -> usize {
        self.m.len()
    }

    pub fn is_empty(&self) -> bool {
        self.m.is_empty()
    }

    /// One update of a flat parameter vector.
    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) -> Result<()> {
        if params.len() != self.m.len() || grads.len() != self.m.len() {
            return Err(Error::dim(format!(
                "Adam state for {} params, got {} params and {} grads",
                self.m.len(),
                params.len(),
                grads.len()
            )));
        }
        if grads.iter().any(|g| !g.is_finite()) {
            return Err(Error::NonFinite("gradient passed to Adam".into()));
        }
        self.t += 1;
        let (c1, c2) = self.corrections();
        self.update_slice(0, params, grads, c1, c2);
        Ok(())
    }

    fn corrections(&self) -> (f64, f64) {
        let t = self.t as i32;
        (1.0 - self.beta1.powi(t), 1.0 - self.beta2.powi(t))
    }

    fn update_slice(&mut self, offset: usize, params: &mut [f64], grads: &[f64], c1: f64, c2: f64) {
        let m = &mut self.m[offset..offset + params.len()];
        let v = &mut self.v[offset..offset + params.len()];
        for (((p, &g), m), v) in params.iter_mut().zip(grads).zip(m).zip(v) {
            *m = self.beta1 * *m + (1.0 - self.beta1) * g;
            *v = self.beta2 * *v + (1.0 - self.beta2) * g * g;
            let m_hat = *m / c1;
            let v_hat = *v / c2;
            *p -= self.lr * m_hat / (v_hat.sqrt() + self.epsilon);
        }
    }
}

/// Apply one Adam update to every parameter of `net`.
pub fn adam_step(net: &mut MultiLayerNet, grads: &Gradients, state: &mut AdamState) -> Result<()> {
    if grads.layers.len() != net.layers().len() || state.len() != net.param_count() {
        return Err(Error::dim(
            "gradients or Adam state do not match the network",
        ));
    }
    for (l, g) in net.layers().iter().zip(&grads.layers) {
        if g.weights.rows() != l.weights.rows()
            || g.weights.cols() != l.weights.cols()
            || g.bias.len() != l.bias.len()
        {
            return Err(Error::dim("gradient shape differs from parameter shape"));
        }
    }
    if !grads.is_finite() {
        return Err(Error::NonFinite("gradient passed to Adam".into()));
    }
    state.t += 1;
    let (c1, c2) = state.corrections();
    let mut offset = 0;
    for (layer, g) in net.layers_mut().iter_mut().zip(&grads.layers) {
        let w = layer.weights.data_mut();
        state.update_slice(offset, w, g.weights.data(), c1, c2);
        offset += w.len();
        state.update_slice(offset, &mut layer.bias, &g.bias, c1, c2);
        offset += layer.bias.len();
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_step_moves_by_lr_times_sign() {
        let mut s = AdamState::new(3, 0.01, 0.9, 0.999, 1e-8).unwrap();
        let mut p = vec![1.0, 1.0, 1.0];
        s.step(&mut p, &[2.5, -0.3, 1e3]).unwrap();
        for (x, sign) in p.iter().zip([1.0, -1.0, 1.0]) {
            assert!(((1.0 - x) - 0.01 * sign).abs() < 1e-8);
        }
    }

    #[test]
    fn zero_gradient_from_zero_state_is_noop() {
        let mut s = AdamState::new(2, 0.1, 0.9, 0.999, 1e-8).unwrap();
        let mut p = vec![0.7, -1.2];
        s.step(&mut p, &[0.0, 0.0]).unwrap();
        assert_eq!(p, vec![0.7, -1.2]);
        assert_eq!(s.t, 1);
    }

    #[test]
    fn minimizes_square() {
        // f(x) = x^2 from x = 1 at lr = 0.05
        let mut s = AdamState::new(1, 0.05, 0.9, 0.999, 1e-8).unwrap();
        let mut x = [1.0];
        for _ in 0..500 {
            let g = [2.0 * x[0]];
            s.step(&mut x, &g).unwrap();
        }
        assert!(x[0].abs() < 1e-3, "x = {}", x[0]);
    }

    #[test]
    fn rejects_non_finite_and_bad_hyperparameters() {
        let mut s = AdamState::new(1, 0.1, 0.9, 0.999, 1e-8).unwrap();
        let mut p = [1.0];
        assert!(matches!(
            s.step(&mut p, &[f64::NAN]),
            Err(Error::NonFinite(_))
        ));
        assert_eq!(p, [1.0]);
        assert!(AdamState::new(1, 0.0, 0.9, 0.999, 1e-8).is_err());
        assert!(AdamState::new(1, 0.1, 1.0, 0.999, 1e-8).is_err());
    }
}
