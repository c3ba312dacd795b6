use pharmasyn_chem::FP_BITS;
use serde::{Deserialize, Serialize};

/// Architecture hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub hidden: usize,
    pub enc_layers: usize,
    pub d_model: usize,
    pub heads: usize,
    pub dec_layers: usize,
    pub ff: usize,
    pub fp_bits: usize,
    /// Reaction vocabulary size including NONE.
    pub rxn_vocab: usize,
}

impl ModelConfig {
    pub fn new(d_model: usize, rxn_vocab: usize) -> Self {
        ModelConfig {
            hidden: 128,
            enc_layers: 7,
            d_model,
            heads: 8,
            dec_layers: 7,
            ff: 4 * d_model,
            fp_bits: FP_BITS,
            rxn_vocab,
        }
    }

    /// Reduced widths for fast tests.
    pub fn tiny(rxn_vocab: usize) -> Self {
        ModelConfig {
            hidden: 8,
            enc_layers: 2,
            d_model: 8,
            heads: 2,
            dec_layers: 2,
            ff: 16,
            fp_bits: FP_BITS,
            rxn_vocab,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.heads == 0 || self.d_model % self.heads != 0 {
            return Err(format!("d_model {} not divisible by {} heads", self.d_model, self.heads));
        }
        if [self.hidden, self.enc_layers, self.d_model, self.dec_layers, self.ff, self.fp_bits]
            .contains(&0)
        {
            return Err("all widths and depths must be positive".into());
        }
        if self.rxn_vocab < 2 {
            return Err("reaction vocabulary needs NONE plus at least one template".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub lr: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
    pub d_model: usize,
    pub grad_clip: f64,
    /// Stop the block loss from moving the target embeddings.
    pub detach_targets: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            lr: 3e-4,
            batch_size: 8,
            epochs: 500,
            seed: 0,
            d_model: 128,
            grad_clip: 1.0,
            detach_targets: true,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.lr > 0.0 && self.grad_clip > 0.0) || self.batch_size == 0 || self.d_model == 0 {
            return Err("lr, grad_clip, batch_size and d_model must be positive".into());
        }
        Ok(())
    }
}
