//! Fully connected Q-network mapping one scaled observation to eight
//! action values. Hidden layers use ReLU; the output layer is linear.

use rand::Rng;

use crate::error::{Error, Result};
use crate::rl::NUM_ACTIONS;

pub type QValues = [f64; NUM_ACTIONS];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Relu,
}

impl Activation {
    pub fn name(self) -> &'static str {
        match self {
            Activation::Relu => "relu",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "relu" => Some(Activation::Relu),
            _ => None,
        }
    }

    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
        }
    }

    fn derivative(self, z: f64) -> f64 {
        match self {
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

/// One affine layer; `weights` is row-major `outputs × inputs`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub inputs: usize,
    pub outputs: usize,
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

impl Dense {
    fn zeros(inputs: usize, outputs: usize) -> Self {
        Dense {
            inputs,
            outputs,
            weights: vec![0.0; inputs * outputs],
            biases: vec![0.0; outputs],
        }
    }

    fn affine(&self, x: &[f64], out: &mut Vec<f64>) {
        out.clear();
        out.extend(
            self.weights
                .chunks_exact(self.inputs)
                .zip(&self.biases)
                .map(|(row, b)| row.iter().zip(x).map(|(w, xi)| w * xi).sum::<f64>() + b),
        );
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpParams {
    layers: Vec<Dense>,
    activation: Activation,
}

impl MlpParams {
    /// Glorot-uniform weights, zero biases.
    pub fn init<R: Rng + ?Sized>(layer_sizes: &[usize], rng: &mut R) -> Result<Self> {
        let mut params = Self::zeros(layer_sizes)?;
        for layer in &mut params.layers {
            let limit = (6.0 / (layer.inputs + layer.outputs) as f64).sqrt();
            for w in &mut layer.weights {
                *w = rng.gen_range(-limit..=limit);
            }
        }
        Ok(params)
    }

    pub fn zeros(layer_sizes: &[usize]) -> Result<Self> {
        check_sizes(layer_sizes)?;
        let layers = layer_sizes
            .windows(2)
            .map(|w| Dense::zeros(w[0], w[1]))
            .collect();
        Ok(MlpParams {
            layers,
            activation: Activation::Relu,
        })
    }

    pub fn from_layers(layers: Vec<Dense>, activation: Activation) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::InvalidModel("network has no layers".into()));
        }
        for (i, l) in layers.iter().enumerate() {
            if l.weights.len() != l.inputs * l.outputs || l.biases.len() != l.outputs {
                return Err(Error::InvalidModel(format!(
                    "layer {i} has inconsistent shapes"
                )));
            }
        }
        let mut sizes = vec![layers[0].inputs];
        for pair in layers.windows(2) {
            if pair[0].outputs != pair[1].inputs {
                return Err(Error::InvalidModel("adjacent layer widths disagree".into()));
            }
        }
        sizes.extend(layers.iter().map(|l| l.outputs));
        check_sizes(&sizes)?;
        let params = MlpParams { layers, activation };
        if !params.tensors().all(|t| t.iter().all(|v| v.is_finite())) {
            return Err(Error::InvalidModel("non-finite parameter".into()));
        }
        Ok(params)
    }

    pub fn zeros_like(&self) -> Self {
        MlpParams {
            layers: self
                .layers
                .iter()
                .map(|l| Dense::zeros(l.inputs, l.outputs))
                .collect(),
            activation: self.activation,
        }
    }

    pub fn layers(&self) -> &[Dense] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Dense] {
        &mut self.layers
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn layer_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![self.layers[0].inputs];
        sizes.extend(self.layers.iter().map(|l| l.outputs));
        sizes
    }

    pub fn num_params(&self) -> usize {
        self.tensors().map(<[f64]>::len).sum()
    }

    /// Parameter tensors in canonical order: per layer, weights then biases.
    pub fn tensors(&self) -> impl Iterator<Item = &[f64]> {
        self.layers
            .iter()
            .flat_map(|l| [l.weights.as_slice(), l.biases.as_slice()])
    }

    pub fn tensors_mut(&mut self) -> impl Iterator<Item = &mut [f64]> {
        self.layers
            .iter_mut()
            .flat_map(|l| [l.weights.as_mut_slice(), l.biases.as_mut_slice()])
    }

    pub fn flatten(&self) -> Vec<f64> {
        self.tensors().flatten().copied().collect()
    }

    pub fn same_shape(&self, other: &MlpParams) -> bool {
        self.layers.len() == other.layers.len()
            && self
                .layers
                .iter()
                .zip(&other.layers)
                .all(|(a, b)| a.inputs == b.inputs && a.outputs == b.outputs)
    }

    /// `self += factor · other`, shapes must match.
    pub fn add_scaled(&mut self, other: &MlpParams, factor: f64) -> Result<()> {
        if !self.same_shape(other) {
            return Err(Error::InvalidModel("gradient shape mismatch".into()));
        }
        for (dst, src) in self.tensors_mut().zip(other.tensors()) {
            for (d, s) in dst.iter_mut().zip(src) {
                *d += factor * s;
            }
        }
        Ok(())
    }

    pub fn forward(&self, observation: f64) -> Result<QValues> {
        if !observation.is_finite() {
            return Err(Error::invalid(format!(
                "observation {observation} is not finite"
            )));
        }
        let trace = self.trace(observation);
        let out = trace.pre.last().expect("at least one layer");
        let mut q = [0.0; NUM_ACTIONS];
        q.copy_from_slice(out);
        Ok(q)
    }

    /// Gradient of `½·(Q(obs)[action] − target)²` with respect to every
    /// parameter. Only the selected action's output error propagates.
    pub fn backward(&self, observation: f64, action: usize, target: f64) -> Result<MlpParams> {
        let mut grads = self.zeros_like();
        self.accumulate_gradient(observation, action, target, &mut grads)?;
        Ok(grads)
    }

    /// Adds the gradient of `backward` into `grads` and returns `Q(obs)[action]`.
    pub fn accumulate_gradient(
        &self,
        observation: f64,
        action: usize,
        target: f64,
        grads: &mut MlpParams,
    ) -> Result<f64> {
        if action >= NUM_ACTIONS {
            return Err(Error::InvalidAction(action));
        }
        if !observation.is_finite() || !target.is_finite() {
            return Err(Error::invalid("observation and target must be finite"));
        }
        if !self.same_shape(grads) {
            return Err(Error::InvalidModel("gradient shape mismatch".into()));
        }
        let trace = self.trace(observation);
        let n = self.layers.len();
        let prediction = trace.pre[n - 1][action];
        let mut delta = vec![0.0; NUM_ACTIONS];
        delta[action] = prediction - target;

        for l in (0..n).rev() {
            let layer = &self.layers[l];
            let input: &[f64] = if l == 0 {
                &trace.input
            } else {
                &trace.post[l - 1]
            };
            let g = &mut grads.layers[l];
            for (i, &d) in delta.iter().enumerate() {
                if d == 0.0 {
                    continue;
                }
                g.biases[i] += d;
                let row = &mut g.weights[i * layer.inputs..(i + 1) * layer.inputs];
                for (gw, x) in row.iter_mut().zip(input) {
                    *gw += d * x;
                }
            }
            if l > 0 {
                let z_prev = &trace.pre[l - 1];
                let mut next = vec![0.0; layer.inputs];
                for (i, &d) in delta.iter().enumerate() {
                    if d == 0.0 {
                        continue;
                    }
                    let row = &layer.weights[i * layer.inputs..(i + 1) * layer.inputs];
                    for (acc, w) in next.iter_mut().zip(row) {
                        *acc += w * d;
                    }
                }
                for (acc, &z) in next.iter_mut().zip(z_prev) {
                    *acc *= self.activation.derivative(z);
                }
                delta = next;
            }
        }
        Ok(prediction)
    }

    /// Pre-activations of every hidden layer for `observation`.
    pub fn hidden_preactivations(&self, observation: f64) -> Vec<Vec<f64>> {
        let mut t = self.trace(observation);
        t.pre.pop();
        t.pre
    }

    fn trace(&self, observation: f64) -> Trace {
        let n = self.layers.len();
        let mut pre = Vec::with_capacity(n);
        let mut post: Vec<Vec<f64>> = Vec::with_capacity(n - 1);
        let input = vec![observation];
        for (l, layer) in self.layers.iter().enumerate() {
            let x = if l == 0 { &input } else { &post[l - 1] };
            let mut z = Vec::with_capacity(layer.outputs);
            layer.affine(x, &mut z);
            if l + 1 < n {
                post.push(z.iter().map(|&v| self.activation.apply(v)).collect());
            }
            pre.push(z);
        }
        Trace { input, pre, post }
    }
}

struct Trace {
    input: Vec<f64>,
    pre: Vec<Vec<f64>>,
    post: Vec<Vec<f64>>,
}

fn check_sizes(sizes: &[usize]) -> Result<()> {
    if sizes.len() < 2 {
        return Err(Error::InvalidModel(
            "need at least input and output widths".into(),
        ));
    }
    if sizes[0] != 1 {
        return Err(Error::InvalidModel(format!(
            "input width must be 1, got {}",
            sizes[0]
        )));
    }
    if *sizes.last().unwrap() != NUM_ACTIONS {
        return Err(Error::InvalidModel(format!(
            "output width must be {NUM_ACTIONS}, got {}",
            sizes.last().unwrap()
        )));
    }
    if sizes.contains(&0) {
        return Err(Error::InvalidModel("zero-width layer".into()));
    }
    Ok(())
}

/// Mean of squared differences.
pub fn mse_loss(pred: &[f64], target: &[f64]) -> Result<f64> {
    if pred.len() != target.len() {
        return Err(Error::invalid(format!(
            "length mismatch: {} predictions vs {} targets",
            pred.len(),
            target.len()
        )));
    }
    if pred.is_empty() {
        return Err(Error::invalid("mse of empty input"));
    }
    let sum: f64 = pred
        .iter()
        .zip(target)
        .map(|(p, t)| (p - t) * (p - t))
        .sum();
    Ok(sum / pred.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_network_outputs_zero() {
        let p = MlpParams::zeros(&[1, 16, 16, 16, 8]).unwrap();
        assert_eq!(p.forward(0.37).unwrap(), [0.0; 8]);
    }

    #[test]
    fn single_affine_layer() {
        let w: Vec<f64> = (0..8).map(|i| i as f64 * 0.5 - 1.0).collect();
        let b: Vec<f64> = (0..8).map(|i| 0.1 * i as f64).collect();
        let layer = Dense {
            inputs: 1,
            outputs: 8,
            weights: w.clone(),
            biases: b.clone(),
        };
        let p = MlpParams::from_layers(vec![layer], Activation::Relu).unwrap();
        let x = 0.3;
        let q = p.forward(x).unwrap();
        for i in 0..8 {
            assert_eq!(q[i], w[i] * x + b[i]);
        }
    }

    #[test]
    fn default_architecture_shape() {
        let mut rng = crate::agent_rng(1);
        let p = MlpParams::init(&[1, 16, 16, 16, 8], &mut rng).unwrap();
        assert_eq!(p.layer_sizes(), vec![1, 16, 16, 16, 8]);
        assert_eq!(p.num_params(), 16 * 2 + 16 * 17 * 2 + 8 * 17);
        for x in [0.0, 0.5, 1.0] {
            assert_eq!(p.forward(x).unwrap().len(), 8);
        }
    }

    #[test]
    fn init_is_bounded() {
        let mut rng = crate::agent_rng(2);
        let p = MlpParams::init(&[1, 64, 8], &mut rng).unwrap();
        for l in p.layers() {
            let limit = (6.0 / (l.inputs + l.outputs) as f64).sqrt();
            assert!(l.weights.iter().all(|w| w.abs() <= limit));
            assert!(l.biases.iter().all(|&b| b == 0.0));
        }
    }

    #[test]
    fn bad_shapes_rejected() {
        assert!(matches!(
            MlpParams::zeros(&[2, 8]),
            Err(Error::InvalidModel(_))
        ));
        assert!(matches!(
            MlpParams::zeros(&[1, 4]),
            Err(Error::InvalidModel(_))
        ));
        assert!(matches!(
            MlpParams::zeros(&[1, 0, 8]),
            Err(Error::InvalidModel(_))
        ));
        let broken = Dense {
            inputs: 1,
            outputs: 8,
            weights: vec![0.0; 7],
            biases: vec![0.0; 8],
        };
        assert!(MlpParams::from_layers(vec![broken], Activation::Relu).is_err());
    }

    #[test]
    fn zero_error_gives_zero_gradient() {
        let mut rng = crate::agent_rng(3);
        let p = MlpParams::init(&[1, 8, 8], &mut rng).unwrap();
        let q = p.forward(0.4).unwrap();
        let g = p.backward(0.4, 2, q[2]).unwrap();
        assert!(g.flatten().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn unselected_output_rows_have_zero_gradient() {
        let mut rng = crate::agent_rng(4);
        let p = MlpParams::init(&[1, 16, 16, 8], &mut rng).unwrap();
        let g = p.backward(0.8, 5, 10.0).unwrap();
        let out = g.layers().last().unwrap();
        for i in (0..8).filter(|&i| i != 5) {
            assert_eq!(out.biases[i], 0.0);
            assert!(out.weights[i * 16..(i + 1) * 16].iter().all(|&w| w == 0.0));
        }
        assert_ne!(out.biases[5], 0.0);
        assert!(matches!(
            p.backward(0.8, 8, 0.0),
            Err(Error::InvalidAction(8))
        ));
    }

    #[test]
    fn mse_values() {
        assert_eq!(mse_loss(&[0.3, 0.4], &[0.3, 0.4]).unwrap(), 0.0);
        assert_eq!(mse_loss(&[1.0, 0.0], &[0.0, 0.0]).unwrap(), 0.5);
        let base = mse_loss(&[1.0, -2.0, 0.5], &[0.0, 0.0, 0.0]).unwrap();
        let scaled = mse_loss(&[3.0, -6.0, 1.5], &[0.0, 0.0, 0.0]).unwrap();
        assert!((scaled - 9.0 * base).abs() < 1e-12);
        assert!(mse_loss(&[1.0], &[1.0, 2.0]).is_err());
    }
}
