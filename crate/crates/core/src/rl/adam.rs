use crate::error::{Error, Result};
use crate::rl::MlpParams;

pub const DEFAULT_BETA1: f64 = 0.9;
pub const DEFAULT_BETA2: f64 = 0.999;
pub const DEFAULT_EPSILON: f64 = 1e-8;

/// Adam moments over the flattened parameter vector of one network.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub first_moment: Vec<f64>,
    pub second_moment: Vec<f64>,
    pub t: u64,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl AdamState {
    pub fn new(num_params: usize, learning_rate: f64) -> Self {
        AdamState {
            first_moment: vec![0.0; num_params],
            second_moment: vec![0.0; num_params],
            t: 0,
            learning_rate,
            beta1: DEFAULT_BETA1,
            beta2: DEFAULT_BETA2,
            epsilon: DEFAULT_EPSILON,
        }
    }

    pub fn for_params(params: &MlpParams, learning_rate: f64) -> Self {
        Self::new(params.num_params(), learning_rate)
    }

    /// One bias-corrected Adam update of `params` along `grads`.
    pub fn step(&mut self, params: &mut MlpParams, grads: &MlpParams) -> Result<()> {
        if !params.same_shape(grads) || params.num_params() != self.first_moment.len() {
            return Err(Error::InvalidModel(
                "optimizer, parameter and gradient shapes disagree".into(),
            ));
        }
        self.t += 1;
        let t = self.t as i32;
        let bc1 = 1.0 - self.beta1.powi(t);
        let bc2 = 1.0 - self.beta2.powi(t);
        let mut k = 0;
        for (p_tensor, g_tensor) in params.tensors_mut().zip(grads.tensors()) {
            for (p, &g) in p_tensor.iter_mut().zip(g_tensor) {
                let m = &mut self.first_moment[k];
                let v = &mut self.second_moment[k];
                *m = self.beta1 * *m + (1.0 - self.beta1) * g;
                *v = self.beta2 * *v + (1.0 - self.beta2) * g * g;
                let m_hat = *m / bc1;
                let v_hat = *v / bc2;
                *p -= self.learning_rate * m_hat / (v_hat.sqrt() + self.epsilon);
                k += 1;
            }
        }
        Ok(())
    }
}
