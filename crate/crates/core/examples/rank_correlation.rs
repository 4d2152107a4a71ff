//! Rank correlation between the FLOPs score and a synthetic accuracy.
//!
//! cargo run --example rank_correlation

use rand::Rng;
use spikenas::cost_model::flops_snn;
use spikenas::rank_stats::{correlate, ScoredSample};
use spikenas::{genome, seeded_rng, RunConfig, SearchSpaceTier};

fn main() -> spikenas::Result<()> {
    let cfg = RunConfig::default();
    let tier = SearchSpaceTier::small();
    let mut rng = seeded_rng(1);
    for noise in [0.0, 1.0, 3.0, 10.0] {
        let samples = (0..100)
            .map(|_| {
                let g = genome::sample(&tier, &mut rng);
                let score = flops_snn(&g, &cfg)?.snn_total as f64;
                let jitter = if noise > 0.0 {
                    rng.random_range(-noise..noise)
                } else {
                    0.0
                };
                let accuracy = (60.0 + 4.0 * (score / 1e8).ln() + jitter).clamp(0.0, 100.0);
                Ok(ScoredSample {
                    genome: g,
                    score,
                    accuracy,
                })
            })
            .collect::<spikenas::Result<Vec<_>>>()?;
        let r = correlate(&samples)?;
        println!(
            "noise +-{noise:>4}: kendall {:.3} spearman {:.3} (n={})",
            r.kendall, r.spearman, r.n
        );
    }
    Ok(())
}
