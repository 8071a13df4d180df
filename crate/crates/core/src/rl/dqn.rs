use crate::error::{Error, Result};
use crate::rl::{mse_loss, AdamState, MlpParams, Transition};

/// `r` for terminal transitions, otherwise `r + γ·max(q_next)`.
pub fn bellman_target(r: f64, gamma: f64, q_next: &[f64], done: bool) -> f64 {
    if done {
        r
    } else {
        r + gamma * q_next.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// One gradient step of the online network towards Bellman targets computed
/// with `target_net`. Returns the batch MSE measured before the update.
pub fn dqn_train_step(
    online: &mut MlpParams,
    target_net: &MlpParams,
    opt: &mut AdamState,
    batch: &[Transition],
    gamma: f64,
) -> Result<f64> {
    if batch.is_empty() {
        return Err(Error::invalid("empty training batch"));
    }
    let mut grads = online.zeros_like();
    let mut preds = Vec::with_capacity(batch.len());
    let mut targets = Vec::with_capacity(batch.len());
    for t in batch {
        let q_next = target_net.forward(t.s_next)?;
        let target = bellman_target(t.r, gamma, &q_next, t.done);
        preds.push(online.accumulate_gradient(t.s, t.a, target, &mut grads)?);
        targets.push(target);
    }
    let loss = mse_loss(&preds, &targets)?;
    let inv = 1.0 / batch.len() as f64;
    if batch.len() > 1 {
        for tensor in grads.tensors_mut() {
            for g in tensor {
                *g *= inv;
            }
        }
    }
    opt.step(online, &grads)?;
    Ok(loss)
}
