//! Runs the instrumented simulator and compares its MAC counts with the
//! analytic formulas.
//!
//! cargo run --release --example verify_mac_counts

use rand::Rng;
use spikenas::snn_sim::{model_forward, verify_flops, ImageSeq, LifParams, MacCounter, SeededWeights};
use spikenas::{seeded_rng, ArchGenome, RunConfig};

fn main() -> spikenas::Result<()> {
    let cfg = RunConfig::default();
    let g = ArchGenome::new(256, 4, 4, 4);
    println!("{}", verify_flops(&g, &cfg)?);

    let mut rng = seeded_rng(5);
    let frame: Vec<f32> = (0..3 * 32 * 32).map(|_| rng.random()).collect();
    let images = ImageSeq::repeat_frame(4, 3, 32, 32, &frame)?;
    let weights = SeededWeights::new(g, cfg, 5);
    let mut ctr = MacCounter::new();
    let out = model_forward(&images, &g, &cfg, &weights, &LifParams::default(), &mut ctr)?;
    let rates: Vec<String> = out.spike_rates.iter().map(|r| format!("{r:.3}")).collect();
    println!("spike rates per stage: {}", rates.join(" "));
    println!("class scores: {:?}", out.scores);
    Ok(())
}
