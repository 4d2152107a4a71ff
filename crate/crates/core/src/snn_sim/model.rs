use crate::error::{Error, Result};
use crate::genome::{ArchGenome, RunConfig};

use super::layers::{smlp_stage, spe_stage, ssa_stage};
use super::lif::{lif_over_time, LifParams};
use super::tensor::ImageSeq;
use super::weights::WeightSource;
use super::MacCounter;

#[derive(Debug, Clone, PartialEq)]
pub struct ForwardOutput {
    /// One real score per class.
    pub scores: Vec<f32>,
    /// Fraction of active sites in the patch-embedding output, then in each
    /// block's attention and MLP outputs.
    pub spike_rates: Vec<f64>,
}

/// Full forward pass: patch embedding, `depth` residual blocks, global
/// average pooling over time and tokens, linear head.
///
/// The residual stream carries real pre-activations: it starts as the
/// patch embedding's pre-LIF sum, and each sub-block reads it through its own
/// LIF layer and adds back the pre-LIF output of its last linear map.
pub fn model_forward<W: WeightSource + ?Sized>(
    images: &ImageSeq,
    g: &ArchGenome,
    cfg: &RunConfig,
    weights: &W,
    lif: &LifParams,
    ctr: &mut MacCounter,
) -> Result<ForwardOutput> {
    cfg.check()?;
    g.check_structure().into_result()?;
    if weights.depth() != g.depth as usize {
        return Err(Error::ShapeMismatch {
            context: "model weights",
            expected: format!("{} blocks", g.depth),
            got: format!("{} blocks", weights.depth()),
        });
    }

    let mut spike_rates = Vec::with_capacity(1 + 2 * g.depth as usize);
    let rate = |ones: usize, len: usize| ones as f64 / len.max(1) as f64;

    let spe = weights.spe()?;
    let (mut stream, x) = spe_stage(images, g, cfg, &spe, lif, ctr)?;
    spike_rates.push(rate(x.count_ones(), x.data().len()));

    for layer in 0..g.depth as usize {
        let w = weights.block(layer)?;
        let (pre, a) = ssa_stage(&lif_over_time(&stream, lif)?, g, &w, lif, ctr)?;
        spike_rates.push(rate(a.count_ones(), a.data().len()));
        stream.add_assign(&pre)?;

        let (pre, m) = smlp_stage(&lif_over_time(&stream, lif)?, g, &w, lif, ctr)?;
        spike_rates.push(rate(m.count_ones(), m.data().len()));
        stream.add_assign(&pre)?;
    }

    let (t, n, d) = stream.shape();
    let mut pooled = vec![0.0f64; d];
    for row in stream.data().chunks_exact(d) {
        for (p, &v) in pooled.iter_mut().zip(row) {
            *p += f64::from(v);
        }
    }
    let denom = (t * n) as f64;

    let head = weights.head()?;
    let classes = cfg.num_classes as usize;
    if (head.d_in, head.d_out) != (d, classes) {
        return Err(Error::ShapeMismatch {
            context: "classifier head",
            expected: format!("{d}x{classes}"),
            got: format!("{}x{}", head.d_in, head.d_out),
        });
    }
    let mut scores = vec![0.0f32; classes];
    for (i, p) in pooled.iter().enumerate() {
        let p = (p / denom) as f32;
        if p != 0.0 {
            for (s, &w) in scores.iter_mut().zip(head.row(i)) {
                *s += p * w;
            }
        }
    }
    Ok(ForwardOutput { scores, spike_rates })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost_model::{flops_mlp, flops_sa};
    use crate::snn_sim::{ModelWeights, SeededWeights};

    #[test]
    fn zero_network_scores_zero() {
        let g = ArchGenome::new(64, 2, 4, 1);
        let cfg = RunConfig::default();
        let out = model_forward(
            &ImageSeq::zeros(4, 3, 32, 32),
            &g,
            &cfg,
            &ModelWeights::zeros(&g, &cfg),
            &LifParams::default(),
            &mut MacCounter::new(),
        )
        .unwrap();
        assert_eq!(out.scores, vec![0.0; 10]);
        assert_eq!(out.spike_rates.len(), 3);
    }

    #[test]
    fn counts_match_closed_form() {
        let g = ArchGenome::new(256, 4, 4, 4);
        let cfg = RunConfig::default();
        let mut ctr = MacCounter::new();
        let out = model_forward(
            &ImageSeq::zeros(4, 3, 32, 32),
            &g,
            &cfg,
            &SeededWeights::new(g, cfg, 1),
            &LifParams::default(),
            &mut ctr,
        )
        .unwrap();
        assert_eq!(out.scores.len(), 10);
        assert_eq!(ctr.mlp_macs, 536_870_912);
        assert_eq!(ctr.mlp_macs, 4 * flops_mlp(4, 64, 256, 1024).unwrap());
        assert_eq!(ctr.sa_macs, 301_989_888);
        assert_eq!(ctr.sa_macs, 2 * 4 * flops_sa(4, 64, 256).unwrap());
    }

    #[test]
    fn random_network_spikes_in_every_stage() {
        let g = ArchGenome::new(128, 4, 4, 3);
        let cfg = RunConfig::default();
        let mut rng = crate::rng::seeded_rng(3);
        let frame: Vec<f32> = (0..3 * 32 * 32).map(|_| rand::Rng::random(&mut rng)).collect();
        let images = ImageSeq::repeat_frame(4, 3, 32, 32, &frame).unwrap();
        let run = || {
            model_forward(
                &images,
                &g,
                &cfg,
                &SeededWeights::new(g, cfg, 9),
                &LifParams::default(),
                &mut MacCounter::new(),
            )
            .unwrap()
        };
        let out = run();
        assert_eq!(out.spike_rates.len(), 7);
        for r in &out.spike_rates {
            assert!(*r > 0.0 && *r < 1.0, "{:?}", out.spike_rates);
        }
        assert_eq!(out, run());
    }

    #[test]
    fn weight_depth_mismatch() {
        let g = ArchGenome::new(64, 2, 4, 2);
        let cfg = RunConfig::default();
        let w = ModelWeights::zeros(&ArchGenome::new(64, 2, 4, 1), &cfg);
        let err = model_forward(
            &ImageSeq::zeros(4, 3, 32, 32),
            &g,
            &cfg,
            &w,
            &LifParams::default(),
            &mut MacCounter::new(),
        );
        assert!(matches!(err, Err(Error::ShapeMismatch { .. })));
    }
}
