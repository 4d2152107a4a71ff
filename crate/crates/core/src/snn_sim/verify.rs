use std::fmt;

use rand::Rng;

use crate::cost_model::{flops_mlp, flops_sa, spe_macs_per_timestep};
use crate::error::Result;
use crate::genome::{ArchGenome, RunConfig};
use crate::rng::{derive_seed, seeded_rng};

use super::lif::LifParams;
use super::model::model_forward;
use super::tensor::ImageSeq;
use super::weights::SeededWeights;
use super::MacCounter;

/// One counted-vs-analytic equality.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Identity {
    pub name: &'static str,
    pub counted: u64,
    pub expected: u64,
    pub formula: &'static str,
}

impl Identity {
    pub fn holds(&self) -> bool {
        self.counted == self.expected
    }
}

impl fmt::Display for Identity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} lhs={} rhs={} ({}) {}",
            self.name,
            self.counted,
            self.expected,
            self.formula,
            if self.holds() { "pass" } else { "FAIL" }
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyReport {
    pub genome: ArchGenome,
    pub timesteps: u32,
    pub identities: Vec<Identity>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.identities.iter().all(Identity::holds)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Identity> {
        self.identities.iter().filter(|i| !i.holds())
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "genome {} T={}", self.genome, self.timesteps)?;
        for id in &self.identities {
            writeln!(f, "{id}")?;
        }
        write!(f, "result {}", if self.passed() { "pass" } else { "FAIL" })
    }
}

/// Runs a forward pass with random weights and input, then compares the
/// counters with the analytic formulas.
pub fn verify_flops(g: &ArchGenome, cfg: &RunConfig) -> Result<VerifyReport> {
    verify_flops_with(g, cfg, |_| {})
}

/// As [`verify_flops`], with a hook that may alter the counter before the
/// comparison.
pub fn verify_flops_with(
    g: &ArchGenome,
    cfg: &RunConfig,
    tamper: impl FnOnce(&mut MacCounter),
) -> Result<VerifyReport> {
    cfg.check()?;
    let (h, w) = (cfg.image_size.0 as usize, cfg.image_size.1 as usize);
    let (t, c) = (cfg.timesteps as usize, cfg.in_channels as usize);
    let mut rng = seeded_rng(derive_seed(cfg.seed, &[0x1_0000]));
    let frame: Vec<f32> = (0..c * h * w).map(|_| rng.random::<f32>()).collect();
    let images = ImageSeq::repeat_frame(t, c, h, w, &frame)?;
    let weights = SeededWeights::new(*g, *cfg, cfg.seed);

    let mut ctr = MacCounter::new();
    model_forward(&images, g, cfg, &weights, &LifParams::default(), &mut ctr)?;
    tamper(&mut ctr);

    let (n, d, l) = (cfg.seq_len(), u64::from(g.embed_dim), u64::from(g.depth));
    let steps = u64::from(cfg.timesteps);
    let identities = vec![
        Identity {
            name: "mlp_macs",
            counted: ctr.mlp_macs,
            expected: steps * flops_mlp(l, n, d, g.hidden_dim())?,
            formula: "T * flops_mlp",
        },
        Identity {
            name: "sa_macs",
            counted: ctr.sa_macs,
            expected: 2 * steps * flops_sa(l, n, d)?,
            formula: "2 * T * flops_sa",
        },
        Identity {
            name: "spe_macs",
            counted: ctr.spe_macs,
            expected: steps * spe_macs_per_timestep(g, cfg)?,
            formula: "T * spe_macs",
        },
    ];
    Ok(VerifyReport {
        genome: *g,
        timesteps: cfg.timesteps,
        identities,
    })
}
