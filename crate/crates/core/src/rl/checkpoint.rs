//! Policy checkpoints.
//!
//! A checkpoint is one file: a UTF-8 text header of `key: value` lines
//! terminated by `end_header\n`, followed by a little-endian f64 payload
//! holding the network parameters (per layer, weights row-major then
//! biases) and the two Adam moment vectors in the same order.

use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::{Error, IoContext, Result};
use crate::rl::{Activation, AdamState, Dense, MlpParams};

const MAGIC: &str = "LINKRL-CHECKPOINT v1";
const END_HEADER: &[u8] = b"end_header\n";

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub params: MlpParams,
    pub optimizer: AdamState,
    pub train_steps: u64,
    pub fingerprint: String,
}

/// File name used for the checkpoint written after `episode`.
pub fn checkpoint_file_name(episode: usize) -> String {
    format!("policy_ep{episode:03}.ckpt")
}

impl Checkpoint {
    pub fn to_bytes(&self) -> Vec<u8> {
        let sizes = self
            .params
            .layer_sizes()
            .iter()
            .map(usize::to_string)
            .collect::<Vec<_>>()
            .join(" ");
        let mut payload = Vec::with_capacity(self.params.num_params() * 3 * 8);
        let values = self
            .params
            .tensors()
            .flatten()
            .chain(&self.optimizer.first_moment)
            .chain(&self.optimizer.second_moment);
        let mut count = 0usize;
        for v in values {
            payload.extend_from_slice(&v.to_le_bytes());
            count += 1;
        }
        let opt = &self.optimizer;
        let header = format!(
            "{MAGIC}\n\
             layer_sizes: {sizes}\n\
             activation: {}\n\
             train_steps: {}\n\
             fingerprint: {}\n\
             adam_t: {}\n\
             adam_learning_rate: {:?}\n\
             adam_beta1: {:?}\n\
             adam_beta2: {:?}\n\
             adam_epsilon: {:?}\n\
             payload_f64: {count}\n\
             payload_sha256: {:x}\n",
            self.params.activation().name(),
            self.train_steps,
            self.fingerprint,
            opt.t,
            opt.learning_rate,
            opt.beta1,
            opt.beta2,
            opt.epsilon,
            Sha256::digest(&payload),
        );
        let mut out = header.into_bytes();
        out.extend_from_slice(END_HEADER);
        out.extend_from_slice(&payload);
        out
    }

    pub fn from_bytes(bytes: &[u8], origin: &Path) -> Result<Self> {
        let corrupt = |reason: String| Error::CorruptCheckpoint {
            path: origin.to_path_buf(),
            reason,
        };
        let split = bytes
            .windows(END_HEADER.len())
            .position(|w| w == END_HEADER)
            .ok_or_else(|| corrupt("missing header terminator".into()))?;
        let header = std::str::from_utf8(&bytes[..split])
            .map_err(|_| corrupt("header is not UTF-8".into()))?;
        let payload = &bytes[split + END_HEADER.len()..];

        let mut lines = header.lines();
        if lines.next() != Some(MAGIC) {
            return Err(corrupt("unrecognized file signature".into()));
        }
        let mut fields = std::collections::HashMap::new();
        for line in lines {
            let (k, v) = line
                .split_once(": ")
                .ok_or_else(|| corrupt(format!("malformed header line {line:?}")))?;
            fields.insert(k, v);
        }
        let field = |k: &str| {
            fields
                .get(k)
                .copied()
                .ok_or_else(|| corrupt(format!("header lacks {k}")))
        };
        fn parse<T: std::str::FromStr>(s: &str, k: &str, origin: &Path) -> Result<T> {
            s.parse().map_err(|_| Error::CorruptCheckpoint {
                path: origin.to_path_buf(),
                reason: format!("bad value for {k}: {s:?}"),
            })
        }

        let sizes: Vec<usize> = field("layer_sizes")?
            .split_whitespace()
            .map(|s| parse(s, "layer_sizes", origin))
            .collect::<Result<_>>()?;
        let activation = Activation::from_name(field("activation")?)
            .ok_or_else(|| corrupt("unknown activation".into()))?;
        let count: usize = parse(field("payload_f64")?, "payload_f64", origin)?;
        if payload.len() != count * 8 {
            return Err(corrupt(format!(
                "payload holds {} bytes, header promises {}",
                payload.len(),
                count * 8
            )));
        }
        let digest = format!("{:x}", Sha256::digest(payload));
        if digest != field("payload_sha256")? {
            return Err(corrupt("payload checksum mismatch".into()));
        }

        let mut params = MlpParams::zeros(&sizes).map_err(|e| corrupt(e.to_string()))?;
        let n = params.num_params();
        if count != 3 * n {
            return Err(corrupt(format!(
                "payload holds {count} values, architecture needs {}",
                3 * n
            )));
        }
        let mut values = payload
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")));
        for tensor in params.tensors_mut() {
            for (slot, v) in tensor.iter_mut().zip(values.by_ref()) {
                *slot = v;
            }
        }
        let layers: Vec<Dense> = params.layers().to_vec();
        let params =
            MlpParams::from_layers(layers, activation).map_err(|e| corrupt(e.to_string()))?;
        let first_moment: Vec<f64> = values.by_ref().take(n).collect();
        let second_moment: Vec<f64> = values.collect();

        let optimizer = AdamState {
            first_moment,
            second_moment,
            t: parse(field("adam_t")?, "adam_t", origin)?,
            learning_rate: parse(field("adam_learning_rate")?, "adam_learning_rate", origin)?,
            beta1: parse(field("adam_beta1")?, "adam_beta1", origin)?,
            beta2: parse(field("adam_beta2")?, "adam_beta2", origin)?,
            epsilon: parse(field("adam_epsilon")?, "adam_epsilon", origin)?,
        };
        Ok(Checkpoint {
            params,
            optimizer,
            train_steps: parse(field("train_steps")?, "train_steps", origin)?,
            fingerprint: field("fingerprint")?.to_string(),
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_bytes())
            .context(|| format!("writing checkpoint {}", path.display()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = match fs::read(path) {
            Ok(b) => b,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                return Err(Error::CheckpointNotFound(PathBuf::from(path)))
            }
            Err(e) => {
                return Err(Error::Io {
                    context: format!("reading checkpoint {}", path.display()),
                    source: e,
                })
            }
        };
        Self::from_bytes(&bytes, path)
    }

    /// Refuses a checkpoint trained under a different configuration unless
    /// `allow_mismatch` is set, in which case a warning is logged.
    pub fn verify_fingerprint(&self, expected: &str, allow_mismatch: bool) -> Result<()> {
        if self.fingerprint == expected {
            return Ok(());
        }
        if allow_mismatch {
            log::warn!(
                "checkpoint fingerprint {} differs from configuration {}; loading anyway",
                self.fingerprint,
                expected
            );
            return Ok(());
        }
        Err(Error::FingerprintMismatch {
            expected: expected.to_string(),
            found: self.fingerprint.clone(),
        })
    }
}
