//! Evolutionary search over the small tier.
//!
//! cargo run --example evolutionary_search -- [seed]

use spikenas::evo_search::run_search;
use spikenas::{RunConfig, SearchConfig, SearchSpaceTier};

fn main() -> spikenas::Result<()> {
    let seed: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    let tier = SearchSpaceTier::small();
    let scfg = SearchConfig {
        seed,
        ..SearchConfig::default()
    };
    let res = run_search(&tier, &RunConfig::default(), &scfg)?;
    for h in res.history.iter().step_by(10) {
        println!(
            "gen {:>3} best score {:>14} params {:>10}",
            h.generation, h.best_score, h.best_params
        );
    }
    println!(
        "best {} score {} params {} ({} genomes evaluated)",
        res.best.genome, res.best.score, res.best.params, res.evaluated_count
    );
    Ok(())
}
