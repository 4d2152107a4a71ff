//! Training-free architecture search for spiking transformers.
//!
//! Candidates are drawn from a grid over embedding width, MLP ratio, head
//! count and depth. Each candidate is ranked by an analytic FLOPs count
//! (attention plus MLP, multiplied by the number of simulation timesteps)
//! and constrained to a parameter budget. No network is built or trained to
//! score a candidate.
//!
//! The crate is organized as:
//!
//! - [`genome`]: architecture encoding, search-space tiers, sampling and
//!   variation operators.
//! - [`cost_model`]: the FLOPs metric and the parameter-count model.
//! - [`evo_search`]: constrained evolutionary search and an exhaustive oracle.
//! - [`snn_sim`]: a small spiking-transformer forward simulator with a dense
//!   multiply-accumulate counter, used to cross-check the cost model.
//! - [`rank_stats`]: Kendall tau-b and Spearman rho for metric/accuracy
//!   agreement.
//! - [`cli`]: the command implementations behind the `spikenas` binary.
//!
//! ```
//! use spikenas::{cost_model, ArchGenome, RunConfig};
//!
//! let g = ArchGenome::new(256, 4, 4, 4);
//! let flops = cost_model::flops_snn(&g, &RunConfig::default()).unwrap();
//! assert_eq!(flops.snn_total, 687_865_856);
//! ```

pub mod cli;
pub mod cost_model;
pub mod error;
pub mod evo_search;
pub mod genome;
pub mod rank_stats;
mod rng;
pub mod snn_sim;

pub use crate::cost_model::{FlopsBreakdown, ParamBreakdown};
pub use crate::error::{Error, Result};
pub use crate::evo_search::{Candidate, SearchConfig, SearchResult};
pub use crate::genome::{ArchGenome, GeneRange, ParamBand, RunConfig, SearchSpaceTier, Verdict, Violation};
pub use crate::rank_stats::{CorrelationReport, ScoredSample};
pub use crate::rng::{derive_seed, seeded_rng, SimRng};
