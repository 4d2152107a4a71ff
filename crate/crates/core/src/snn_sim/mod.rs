//! Toy-scale spiking transformer forward simulator.
//!
//! The network is patch embedding, `depth` blocks of spiking self-attention
//! and spiking MLP with residual connections, then global average pooling
//! and a linear head. Every matrix product tallies its dense
//! multiply-accumulate count in a [`MacCounter`], independent of how many
//! spikes were actually present, so the counts can be compared with the
//! analytic cost model.
//!
//! Inputs to spiking layers are binary, so products are evaluated by
//! accumulating weight rows for active inputs only.

mod layers;
mod lif;
mod model;
mod tensor;
mod verify;
mod weights;

pub use self::layers::{smlp_forward, spe_forward, ssa_forward, ATTENTION_SCALE};
pub use self::lif::{heaviside, lif_over_time, lif_step, LifParams, LifState};
pub use self::model::{model_forward, ForwardOutput};
pub use self::tensor::{ImageSeq, SpikeTensor, Tensor3};
pub use self::verify::{verify_flops, verify_flops_with, Identity, VerifyReport};
pub use self::weights::{BlockWeights, Conv3x3, Linear, ModelWeights, SeededWeights, SpeWeights, WeightSource};

/// Dense multiply-accumulate tallies. Counters only grow.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MacCounter {
    pub sa_macs: u64,
    pub mlp_macs: u64,
    pub spe_macs: u64,
}

impl MacCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub(crate) fn add_sa(&mut self, macs: u64) {
        self.sa_macs += macs;
    }

    pub(crate) fn add_mlp(&mut self, macs: u64) {
        self.mlp_macs += macs;
    }

    pub(crate) fn add_spe(&mut self, macs: u64) {
        self.spe_macs += macs;
    }
}
