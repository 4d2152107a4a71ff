//! Drawing, mutating and recombining genomes inside a search tier.
//!
//! cargo run --example sample_and_mutate

use spikenas::genome::{self, validate};
use spikenas::{cost_model, seeded_rng, RunConfig, SearchSpaceTier};

fn main() -> spikenas::Result<()> {
    let cfg = RunConfig::default();
    let tier = SearchSpaceTier::tiny();
    println!(
        "tier {} has {} grid points, band {}",
        tier.name,
        tier.grid_size(),
        tier.band
    );

    let mut rng = seeded_rng(7);
    let a = genome::sample(&tier, &mut rng);
    let b = genome::sample(&tier, &mut rng);
    println!("parent a {a}");
    println!("parent b {b}");
    println!("mutant   {}", genome::mutate(&a, &tier, 0.5, &mut rng));
    println!("child    {}", genome::crossover(&a, &b, &tier, &mut rng));

    let feasible = tier.grid().filter(|g| cost_model::in_band(g, &tier, &cfg)).count();
    println!("{feasible} grid points satisfy the parameter band");

    let off_grid = spikenas::ArchGenome::new(200, 4, 4, 2);
    if let spikenas::Verdict::Invalid(v) = validate(&off_grid, &tier) {
        println!("{off_grid} rejected: {v}");
    }
    Ok(())
}
