//! Evolutionary search over a tier, maximizing the FLOPs score under the
//! tier's parameter band, plus an exhaustive oracle for small grids.
//!
//! Band violations are handled by rejection: no out-of-band genome is ever
//! admitted to a population. Each population slot draws from its own
//! sub-seed derived from `(seed, generation, slot)`, so the result does not
//! depend on evaluation order.

use std::cmp::{Ordering, Reverse};
use std::io;

use rand::Rng;
use serde::Serialize;

use crate::cost_model::{flops_snn, in_band, param_count};
use crate::error::{Error, Result};
use crate::genome::{self, ArchGenome, RunConfig, SearchSpaceTier};
use crate::rng::{derive_seed, seeded_rng, SimRng};

/// Largest grid [`exhaustive_search`] will enumerate.
pub const EXHAUSTIVE_LIMIT: u128 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchConfig {
    pub population_size: usize,
    pub generations: usize,
    pub tournament_size: usize,
    pub mutation_prob: f64,
    pub crossover_prob: f64,
    pub max_rejection_resamples: usize,
    pub seed: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            population_size: 64,
            generations: 50,
            tournament_size: 4,
            mutation_prob: 0.2,
            crossover_prob: 0.5,
            max_rejection_resamples: 200,
            seed: 0,
        }
    }
}

impl SearchConfig {
    pub fn check(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.population_size == 0 || self.generations == 0 || self.max_rejection_resamples == 0 {
            return bad("population_size, generations and max_rejection_resamples must be >= 1".into());
        }
        if self.tournament_size == 0 || self.tournament_size > self.population_size {
            return bad(format!(
                "tournament_size {} must be in 1..={}",
                self.tournament_size, self.population_size
            ));
        }
        for (name, p) in [
            ("mutation_prob", self.mutation_prob),
            ("crossover_prob", self.crossover_prob),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("{name} {p} outside [0, 1]"));
            }
        }
        Ok(())
    }
}

/// A scored genome.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Candidate {
    pub genome: ArchGenome,
    /// Spiking FLOPs score.
    pub score: u64,
    pub params: u64,
}

impl Candidate {
    pub fn evaluate(genome: ArchGenome, cfg: &RunConfig) -> Result<Self> {
        Ok(Self {
            genome,
            score: flops_snn(&genome, cfg)?.snn_total,
            params: param_count(&genome, cfg)?.total,
        })
    }

    /// Higher score first, then fewer parameters, then the smaller genome.
    fn rank_key(&self) -> (Reverse<u64>, u64, ArchGenome) {
        (Reverse(self.score), self.params, self.genome)
    }

    /// `Ordering::Less` means `self` is the better candidate.
    pub fn cmp_rank(&self, other: &Self) -> Ordering {
        self.rank_key().cmp(&other.rank_key())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct HistoryEntry {
    pub generation: usize,
    pub best_score: u64,
    pub best_params: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchResult {
    pub best: Candidate,
    /// Best-so-far after the initial population (generation 0) and after
    /// each generation.
    pub history: Vec<HistoryEntry>,
    /// Genomes scored, including rejected ones.
    pub evaluated_count: usize,
}

fn best_of(pop: &[Candidate]) -> Candidate {
    *pop.iter()
        .min_by(|a, b| a.cmp_rank(b))
        .expect("population is non-empty")
}

fn admissible(g: &ArchGenome, tier: &SearchSpaceTier, cfg: &RunConfig) -> bool {
    genome::validate(g, tier).is_valid() && in_band(g, tier, cfg)
}

fn infeasible(tier: &SearchSpaceTier, attempts: usize) -> Error {
    Error::Infeasible {
        tier: tier.name.clone(),
        min: tier.band.min,
        max: tier.band.max,
        attempts,
    }
}

fn init_counted(tier: &SearchSpaceTier, cfg: &RunConfig, scfg: &SearchConfig) -> Result<(Vec<Candidate>, usize)> {
    let mut pop = Vec::with_capacity(scfg.population_size);
    let mut draws = 0;
    for slot in 0..scfg.population_size {
        let mut rng = seeded_rng(derive_seed(scfg.seed, &[0, slot as u64]));
        let accepted = (0..scfg.max_rejection_resamples).find_map(|_| {
            draws += 1;
            let g = genome::sample(tier, &mut rng);
            admissible(&g, tier, cfg).then_some(g)
        });
        let g = accepted.ok_or_else(|| infeasible(tier, scfg.max_rejection_resamples))?;
        pop.push(Candidate::evaluate(g, cfg)?);
    }
    Ok((pop, draws))
}

/// Rejection-samples `population_size` in-band candidates.
pub fn init_population(tier: &SearchSpaceTier, cfg: &RunConfig, scfg: &SearchConfig) -> Result<Vec<Candidate>> {
    tier.check()?;
    cfg.check()?;
    scfg.check()?;
    init_counted(tier, cfg, scfg).map(|(pop, _)| pop)
}

fn tournament<'a>(pop: &'a [Candidate], size: usize, rng: &mut SimRng) -> &'a Candidate {
    (0..size)
        .map(|_| &pop[rng.random_range(0..pop.len())])
        .min_by(|a, b| a.cmp_rank(b))
        .expect("tournament size >= 1")
}

/// Produces one in-band child. Falls back to the last selected parent, which
/// is in band, if every attempt is rejected.
fn breed(
    pop: &[Candidate],
    tier: &SearchSpaceTier,
    cfg: &RunConfig,
    scfg: &SearchConfig,
    rng: &mut SimRng,
    evaluated: &mut usize,
) -> Result<Candidate> {
    let mut parent = pop[0];
    for _ in 0..scfg.max_rejection_resamples {
        parent = *tournament(pop, scfg.tournament_size, rng);
        let mut child = parent.genome;
        if rng.random_bool(scfg.crossover_prob) {
            let other = tournament(pop, scfg.tournament_size, rng);
            child = genome::crossover(&child, &other.genome, tier, rng);
        }
        child = genome::mutate(&child, tier, scfg.mutation_prob, rng);
        *evaluated += 1;
        if admissible(&child, tier, cfg) {
            return Candidate::evaluate(child, cfg);
        }
    }
    Ok(parent)
}

/// Tournament selection, uniform crossover, per-gene mutation and
/// single-elite replacement for `generations` rounds.
pub fn run_search(tier: &SearchSpaceTier, cfg: &RunConfig, scfg: &SearchConfig) -> Result<SearchResult> {
    tier.check()?;
    cfg.check()?;
    scfg.check()?;

    let (mut pop, mut evaluated) = init_counted(tier, cfg, scfg)?;
    let mut best = best_of(&pop);
    let mut history = vec![HistoryEntry {
        generation: 0,
        best_score: best.score,
        best_params: best.params,
    }];

    for generation in 1..=scfg.generations {
        let mut next = Vec::with_capacity(scfg.population_size);
        next.push(best);
        for slot in 1..scfg.population_size {
            let mut rng = seeded_rng(derive_seed(scfg.seed, &[1, generation as u64, slot as u64]));
            next.push(breed(&pop, tier, cfg, scfg, &mut rng, &mut evaluated)?);
        }
        pop = next;
        let gen_best = best_of(&pop);
        if gen_best.cmp_rank(&best) == Ordering::Less {
            best = gen_best;
        }
        history.push(HistoryEntry {
            generation,
            best_score: best.score,
            best_params: best.params,
        });
    }

    Ok(SearchResult {
        best,
        history,
        evaluated_count: evaluated,
    })
}

/// Scores every grid point and returns the best in-band candidate.
pub fn exhaustive_search(tier: &SearchSpaceTier, cfg: &RunConfig) -> Result<Candidate> {
    tier.check()?;
    cfg.check()?;
    let points = tier.grid_size();
    if points > EXHAUSTIVE_LIMIT {
        return Err(Error::GridTooLarge {
            points,
            limit: EXHAUSTIVE_LIMIT,
        });
    }
    let mut best: Option<Candidate> = None;
    for g in tier.grid() {
        if !admissible(&g, tier, cfg) {
            continue;
        }
        let c = Candidate::evaluate(g, cfg)?;
        if best.is_none_or(|b| c.cmp_rank(&b) == Ordering::Less) {
            best = Some(c);
        }
    }
    best.ok_or_else(|| Error::EmptyFeasibleSet {
        tier: tier.name.clone(),
        min: tier.band.min,
        max: tier.band.max,
    })
}

pub fn write_history_csv<W: io::Write>(out: W, history: &[HistoryEntry]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for h in history {
        w.serialize(h)?;
    }
    w.flush()?;
    Ok(())
}
