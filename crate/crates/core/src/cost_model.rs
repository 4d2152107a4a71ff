//! Analytic cost model: the FLOPs score and the parameter count.
//!
//! Attention and MLP costs per timestep are
//!
//! ```text
//! sa  = L * n * d * (2d + n)
//! mlp = L * n * (d * d_mlp + d_mlp * d)
//! ```
//!
//! and the spiking score multiplies their sum by the timestep count `T`.
//! The patch-embedding stage is excluded from the score. All arithmetic is
//! exact `u64` with overflow reported as an error.
//!
//! This module never builds a tensor or simulator state.

use std::io;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::genome::{ArchGenome, RunConfig, SearchSpaceTier};

/// 3x3 convolution kernels in the patch embedding.
const KERNEL_AREA: u64 = 9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlopsBreakdown {
    pub sa_flops: u64,
    pub mlp_flops: u64,
    pub ann_total: u64,
    pub snn_total: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamBreakdown {
    pub block_params: u64,
    pub spe_params: u64,
    pub head_params: u64,
    pub total: u64,
}

fn mul(what: &'static str, factors: &[u64]) -> Result<u64> {
    factors
        .iter()
        .try_fold(1u64, |acc, &f| acc.checked_mul(f))
        .ok_or(Error::Overflow(what))
}

fn add(what: &'static str, terms: &[u64]) -> Result<u64> {
    terms
        .iter()
        .try_fold(0u64, |acc, &t| acc.checked_add(t))
        .ok_or(Error::Overflow(what))
}

/// Self-attention cost `L * n * d * (2d + n)`.
pub fn flops_sa(depth: u64, seq_len: u64, embed_dim: u64) -> Result<u64> {
    let width = embed_dim
        .checked_mul(2)
        .and_then(|x| x.checked_add(seq_len))
        .ok_or(Error::Overflow("attention FLOPs"))?;
    mul("attention FLOPs", &[depth, seq_len, embed_dim, width])
}

/// MLP cost `2 * L * n * d * d_mlp`.
pub fn flops_mlp(depth: u64, seq_len: u64, embed_dim: u64, hidden_dim: u64) -> Result<u64> {
    mul("MLP FLOPs", &[2, depth, seq_len, embed_dim, hidden_dim])
}

/// The search metric: `T * (sa + mlp)` for the genome under `cfg`.
pub fn flops_snn(g: &ArchGenome, cfg: &RunConfig) -> Result<FlopsBreakdown> {
    let n = cfg.seq_len();
    let d = u64::from(g.embed_dim);
    let l = u64::from(g.depth);
    let sa_flops = flops_sa(l, n, d)?;
    let mlp_flops = flops_mlp(l, n, d, g.hidden_dim())?;
    let ann_total = add("ANN FLOPs", &[sa_flops, mlp_flops])?;
    let snn_total = mul("SNN FLOPs", &[u64::from(cfg.timesteps), ann_total])?;
    Ok(FlopsBreakdown {
        sa_flops,
        mlp_flops,
        ann_total,
        snn_total,
    })
}

fn require_ladder(d: u64) -> Result<()> {
    if !d.is_multiple_of(8) || d == 0 {
        return Err(Error::InvalidConfig(format!(
            "embed_dim {d} must be a positive multiple of 8 for the patch-embedding channel ladder"
        )));
    }
    Ok(())
}

/// Parameter count, ignoring biases and normalization.
///
/// Each block holds four `d x d` projections and two MLP linears. The patch
/// embedding is a ladder of bias-free 3x3 convolutions
/// `c_in -> d/8 -> d/4 -> d/2 -> d` followed by a `d -> d` relative-position
/// convolution. The head is a `d x classes` linear.
pub fn param_count(g: &ArchGenome, cfg: &RunConfig) -> Result<ParamBreakdown> {
    let d = u64::from(g.embed_dim);
    require_ladder(d)?;
    let hidden = g.hidden_dim();
    let per_block = add(
        "block parameters",
        &[
            mul("block parameters", &[4, d, d])?,
            mul("block parameters", &[2, d, hidden])?,
        ],
    )?;
    let block_params = mul("block parameters", &[u64::from(g.depth), per_block])?;

    let c_in = u64::from(cfg.in_channels);
    let ladder = add(
        "patch-embedding parameters",
        &[c_in * (d / 8), (d / 8) * (d / 4), (d / 4) * (d / 2), (d / 2) * d],
    )?;
    let spe_params = add(
        "patch-embedding parameters",
        &[
            mul("patch-embedding parameters", &[KERNEL_AREA, ladder])?,
            mul("patch-embedding parameters", &[KERNEL_AREA, d, d])?,
        ],
    )?;
    let head_params = mul("head parameters", &[d, u64::from(cfg.num_classes)])?;
    let total = add("total parameters", &[block_params, spe_params, head_params])?;
    Ok(ParamBreakdown {
        block_params,
        spe_params,
        head_params,
        total,
    })
}

/// Whether the genome's parameter count lies in the tier's inclusive band.
/// A genome whose parameters cannot be counted is never in band.
pub fn in_band(g: &ArchGenome, tier: &SearchSpaceTier, cfg: &RunConfig) -> bool {
    param_count(g, cfg).is_ok_and(|p| tier.band.contains(p.total))
}

/// Dense multiply-accumulates of the patch embedding for one timestep.
///
/// The first three convolutions run at full resolution, the fourth after a
/// 2x pooling, and the relative-position convolution after a second 2x
/// pooling. Not part of the score.
pub fn spe_macs_per_timestep(g: &ArchGenome, cfg: &RunConfig) -> Result<u64> {
    let d = u64::from(g.embed_dim);
    require_ladder(d)?;
    let (h, w) = cfg.image_size;
    let full = u64::from(h) * u64::from(w);
    let half = full / 4;
    let quarter = cfg.seq_len();
    let c_in = u64::from(cfg.in_channels);
    let terms = [
        mul("patch-embedding MACs", &[full, c_in, d / 8])?,
        mul("patch-embedding MACs", &[full, d / 8, d / 4])?,
        mul("patch-embedding MACs", &[full, d / 4, d / 2])?,
        mul("patch-embedding MACs", &[half, d / 2, d])?,
        mul("patch-embedding MACs", &[quarter, d, d])?,
    ];
    mul(
        "patch-embedding MACs",
        &[KERNEL_AREA, add("patch-embedding MACs", &terms)?],
    )
}

/// One CSV row of a scored genome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoreRow {
    pub sa_flops: u64,
    pub mlp_flops: u64,
    pub ann_total: u64,
    pub snn_total: u64,
    pub total_params: u64,
}

impl ScoreRow {
    pub fn new(flops: &FlopsBreakdown, params: &ParamBreakdown) -> Self {
        Self {
            sa_flops: flops.sa_flops,
            mlp_flops: flops.mlp_flops,
            ann_total: flops.ann_total,
            snn_total: flops.snn_total,
            total_params: params.total,
        }
    }
}

pub fn write_scores_csv<W: io::Write>(out: W, rows: &[ScoreRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}
