//! How often the evolutionary search recovers the exhaustive optimum.
//!
//! cargo run --release --example exhaustive_vs_evolution

use spikenas::evo_search::{exhaustive_search, run_search};
use spikenas::{RunConfig, SearchConfig, SearchSpaceTier};

fn main() -> spikenas::Result<()> {
    let cfg = RunConfig::default();
    for tier in SearchSpaceTier::builtins() {
        let best = exhaustive_search(&tier, &cfg)?;
        let hits = (0..20)
            .map(|seed| {
                run_search(
                    &tier,
                    &cfg,
                    &SearchConfig {
                        seed,
                        ..SearchConfig::default()
                    },
                )
            })
            .filter(|r| r.as_ref().is_ok_and(|r| r.best.score == best.score))
            .count();
        println!(
            "{:<5} optimum {} ({} params), evolution matched {hits}/20 seeds",
            tier.name, best.genome, best.params
        );
    }
    Ok(())
}
