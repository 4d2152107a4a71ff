//! Analytic cost of a few well-known configurations.
//!
//! cargo run --example score_genome

use spikenas::cost_model::{flops_snn, param_count};
use spikenas::{ArchGenome, RunConfig};

fn main() -> spikenas::Result<()> {
    let cfg = RunConfig::default();
    println!(
        "{:<48} {:>14} {:>14} {:>12}",
        "genome", "ann_flops", "snn_flops", "params"
    );
    for g in [
        ArchGenome::new(256, 4, 4, 4),
        ArchGenome::new(384, 4, 8, 5),
        ArchGenome::new(512, 4, 8, 8),
    ] {
        let flops = flops_snn(&g, &cfg)?;
        let params = param_count(&g, &cfg)?;
        println!(
            "{:<48} {:>14} {:>14} {:>12}",
            g.to_string(),
            flops.ann_total,
            flops.snn_total,
            params.total
        );
    }

    // The metric is linear in the number of timesteps.
    let g = ArchGenome::new(256, 4, 4, 4);
    for t in [1, 2, 4, 8] {
        let cfg = RunConfig { timesteps: t, ..cfg };
        println!("T={t}: {}", flops_snn(&g, &cfg)?.snn_total);
    }
    Ok(())
}
