use std::borrow::Cow;

use rand::Rng;

use crate::error::{Error, Result};
use crate::genome::{ArchGenome, RunConfig};
use crate::rng::{derive_seed, seeded_rng, SimRng};

/// Scale of random initial weights relative to `1/sqrt(fan_in)`. Inputs to
/// most layers are sparse binary spikes, so a unit gain leaves membranes
/// well below threshold.
pub const WEIGHT_GAIN: f32 = 6.0;

/// Bias-free linear map stored input-major: row `i` holds the weights from
/// input `i` to every output.
#[derive(Debug, Clone, PartialEq)]
pub struct Linear {
    pub d_in: usize,
    pub d_out: usize,
    pub w: Vec<f32>,
}

impl Linear {
    pub fn zeros(d_in: usize, d_out: usize) -> Self {
        Self {
            d_in,
            d_out,
            w: vec![0.0; d_in * d_out],
        }
    }

    /// Uniform in `[-1/sqrt(d_in), 1/sqrt(d_in)]`.
    pub fn random(d_in: usize, d_out: usize, rng: &mut SimRng) -> Self {
        let bound = WEIGHT_GAIN / (d_in as f32).sqrt();
        let w = (0..d_in * d_out).map(|_| rng.random_range(-bound..=bound)).collect();
        Self { d_in, d_out, w }
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.w[i * self.d_out..(i + 1) * self.d_out]
    }

    fn expect(&self, context: &'static str, d_in: usize, d_out: usize) -> Result<()> {
        if (self.d_in, self.d_out) != (d_in, d_out) || self.w.len() != d_in * d_out {
            return Err(Error::ShapeMismatch {
                context,
                expected: format!("{d_in}x{d_out}"),
                got: format!("{}x{} ({} values)", self.d_in, self.d_out, self.w.len()),
            });
        }
        Ok(())
    }
}

/// Bias-free 3x3 convolution with unit stride and zero padding, stored as
/// `[ky][kx][c_in][c_out]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Conv3x3 {
    pub c_in: usize,
    pub c_out: usize,
    pub w: Vec<f32>,
}

impl Conv3x3 {
    pub fn zeros(c_in: usize, c_out: usize) -> Self {
        Self {
            c_in,
            c_out,
            w: vec![0.0; 9 * c_in * c_out],
        }
    }

    /// Uniform in `[-1/sqrt(9 c_in), 1/sqrt(9 c_in)]`.
    pub fn random(c_in: usize, c_out: usize, rng: &mut SimRng) -> Self {
        let bound = WEIGHT_GAIN / ((9 * c_in) as f32).sqrt();
        let w = (0..9 * c_in * c_out)
            .map(|_| rng.random_range(-bound..=bound))
            .collect();
        Self { c_in, c_out, w }
    }

    pub fn tap(&self, ky: usize, kx: usize, c: usize) -> &[f32] {
        let start = ((ky * 3 + kx) * self.c_in + c) * self.c_out;
        &self.w[start..start + self.c_out]
    }

    fn expect(&self, context: &'static str, c_in: usize, c_out: usize) -> Result<()> {
        if (self.c_in, self.c_out) != (c_in, c_out) || self.w.len() != 9 * c_in * c_out {
            return Err(Error::ShapeMismatch {
                context,
                expected: format!("3x3x{c_in}x{c_out}"),
                got: format!("3x3x{}x{} ({} values)", self.c_in, self.c_out, self.w.len()),
            });
        }
        Ok(())
    }
}

/// Patch-embedding ladder `c_in -> d/8 -> d/4 -> d/2 -> d` plus the
/// relative-position convolution.
#[derive(Debug, Clone, PartialEq)]
pub struct SpeWeights {
    pub convs: [Conv3x3; 4],
    pub rpe: Conv3x3,
}

impl SpeWeights {
    fn ladder(c_in: usize, d: usize) -> [(usize, usize); 5] {
        [(c_in, d / 8), (d / 8, d / 4), (d / 4, d / 2), (d / 2, d), (d, d)]
    }

    fn build(c_in: usize, d: usize, mut make: impl FnMut(usize, usize) -> Conv3x3) -> Self {
        let [a, b, c, e, r] = Self::ladder(c_in, d).map(|(i, o)| make(i, o));
        Self {
            convs: [a, b, c, e],
            rpe: r,
        }
    }

    pub fn zeros(c_in: usize, d: usize) -> Self {
        Self::build(c_in, d, Conv3x3::zeros)
    }

    pub fn random(c_in: usize, d: usize, rng: &mut SimRng) -> Self {
        Self::build(c_in, d, |i, o| Conv3x3::random(i, o, rng))
    }

    pub fn check(&self, c_in: usize, d: usize) -> Result<()> {
        let shapes = Self::ladder(c_in, d);
        for (conv, (i, o)) in self.convs.iter().zip(shapes) {
            conv.expect("patch-embedding convolution", i, o)?;
        }
        self.rpe.expect("relative-position convolution", d, d)
    }
}

/// Weights of one transformer block.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockWeights {
    pub q: Linear,
    pub k: Linear,
    pub v: Linear,
    pub proj: Linear,
    pub fc1: Linear,
    pub fc2: Linear,
}

impl BlockWeights {
    pub fn zeros(d: usize, hidden: usize) -> Self {
        Self {
            q: Linear::zeros(d, d),
            k: Linear::zeros(d, d),
            v: Linear::zeros(d, d),
            proj: Linear::zeros(d, d),
            fc1: Linear::zeros(d, hidden),
            fc2: Linear::zeros(hidden, d),
        }
    }

    pub fn random(d: usize, hidden: usize, rng: &mut SimRng) -> Self {
        Self {
            q: Linear::random(d, d, rng),
            k: Linear::random(d, d, rng),
            v: Linear::random(d, d, rng),
            proj: Linear::random(d, d, rng),
            fc1: Linear::random(d, hidden, rng),
            fc2: Linear::random(hidden, d, rng),
        }
    }

    pub fn check_attention(&self, d: usize) -> Result<()> {
        self.q.expect("query projection", d, d)?;
        self.k.expect("key projection", d, d)?;
        self.v.expect("value projection", d, d)?;
        self.proj.expect("output projection", d, d)
    }

    pub fn check_mlp(&self, d: usize, hidden: usize) -> Result<()> {
        self.fc1.expect("MLP expansion", d, hidden)?;
        self.fc2.expect("MLP contraction", hidden, d)
    }
}

/// Supplies weights to a forward pass one component at a time.
pub trait WeightSource {
    fn spe(&self) -> Result<Cow<'_, SpeWeights>>;
    fn block(&self, layer: usize) -> Result<Cow<'_, BlockWeights>>;
    fn head(&self) -> Result<Cow<'_, Linear>>;
    fn depth(&self) -> usize;
}

/// Fully materialized weights.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelWeights {
    pub spe: SpeWeights,
    pub blocks: Vec<BlockWeights>,
    pub head: Linear,
}

impl ModelWeights {
    pub fn zeros(g: &ArchGenome, cfg: &RunConfig) -> Self {
        let (c_in, d, hidden, classes) = dims(g, cfg);
        Self {
            spe: SpeWeights::zeros(c_in, d),
            blocks: (0..g.depth).map(|_| BlockWeights::zeros(d, hidden)).collect(),
            head: Linear::zeros(d, classes),
        }
    }

    /// Same values as [`SeededWeights`] with the same seed.
    pub fn random(g: &ArchGenome, cfg: &RunConfig, seed: u64) -> Result<Self> {
        let src = SeededWeights::new(*g, *cfg, seed);
        Ok(Self {
            spe: src.spe()?.into_owned(),
            blocks: (0..g.depth as usize)
                .map(|l| src.block(l).map(Cow::into_owned))
                .collect::<Result<_>>()?,
            head: src.head()?.into_owned(),
        })
    }
}

impl WeightSource for ModelWeights {
    fn spe(&self) -> Result<Cow<'_, SpeWeights>> {
        Ok(Cow::Borrowed(&self.spe))
    }

    fn block(&self, layer: usize) -> Result<Cow<'_, BlockWeights>> {
        self.blocks.get(layer).map(Cow::Borrowed).ok_or(Error::ShapeMismatch {
            context: "block weights",
            expected: format!("layer {layer}"),
            got: format!("{} layers", self.blocks.len()),
        })
    }

    fn head(&self) -> Result<Cow<'_, Linear>> {
        Ok(Cow::Borrowed(&self.head))
    }

    fn depth(&self) -> usize {
        self.blocks.len()
    }
}

/// Uniform-initialized weights generated on demand, one component at a
/// time, from per-component sub-seeds. Keeps memory bounded for deep, wide
/// genomes.
#[derive(Debug, Clone, Copy)]
pub struct SeededWeights {
    genome: ArchGenome,
    cfg: RunConfig,
    seed: u64,
}

impl SeededWeights {
    pub fn new(genome: ArchGenome, cfg: RunConfig, seed: u64) -> Self {
        Self { genome, cfg, seed }
    }

    fn rng(&self, component: u64) -> SimRng {
        seeded_rng(derive_seed(self.seed, &[component]))
    }
}

const SPE_STREAM: u64 = 0;
const HEAD_STREAM: u64 = 1;
const BLOCK_STREAM: u64 = 2;

impl WeightSource for SeededWeights {
    fn spe(&self) -> Result<Cow<'_, SpeWeights>> {
        let (c_in, d, _, _) = dims(&self.genome, &self.cfg);
        Ok(Cow::Owned(SpeWeights::random(c_in, d, &mut self.rng(SPE_STREAM))))
    }

    fn block(&self, layer: usize) -> Result<Cow<'_, BlockWeights>> {
        if layer >= self.depth() {
            return Err(Error::ShapeMismatch {
                context: "block weights",
                expected: format!("layer {layer}"),
                got: format!("{} layers", self.depth()),
            });
        }
        let (_, d, hidden, _) = dims(&self.genome, &self.cfg);
        let mut rng = self.rng(BLOCK_STREAM + layer as u64);
        Ok(Cow::Owned(BlockWeights::random(d, hidden, &mut rng)))
    }

    fn head(&self) -> Result<Cow<'_, Linear>> {
        let (_, d, _, classes) = dims(&self.genome, &self.cfg);
        Ok(Cow::Owned(Linear::random(d, classes, &mut self.rng(HEAD_STREAM))))
    }

    fn depth(&self) -> usize {
        self.genome.depth as usize
    }
}

fn dims(g: &ArchGenome, cfg: &RunConfig) -> (usize, usize, usize, usize) {
    (
        cfg.in_channels as usize,
        g.embed_dim as usize,
        g.hidden_dim() as usize,
        cfg.num_classes as usize,
    )
}
