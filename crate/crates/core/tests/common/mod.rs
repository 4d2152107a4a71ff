//! Reference implementations used as oracles by the integration tests.
//! Each is written directly from the textbook definition, independently of
//! the library code.

#![allow(dead_code)]

use spikenas::{ArchGenome, GeneRange, ParamBand, SearchSpaceTier};

fn sign(v: f64) -> i32 {
    if v > 0.0 {
        1
    } else if v < 0.0 {
        -1
    } else {
        0
    }
}

/// Tau-b by explicit pair counting.
pub fn kendall_brute(pairs: &[(f64, f64)]) -> f64 {
    let n = pairs.len();
    let (mut conc, mut disc, mut tie_x, mut tie_y) = (0i64, 0i64, 0i64, 0i64);
    for i in 0..n {
        for j in i + 1..n {
            let sx = sign(pairs[i].0 - pairs[j].0);
            let sy = sign(pairs[i].1 - pairs[j].1);
            if sx == 0 {
                tie_x += 1;
            }
            if sy == 0 {
                tie_y += 1;
            }
            match sx * sy {
                1 => conc += 1,
                -1 => disc += 1,
                _ => {}
            }
        }
    }
    let n0 = (n * (n - 1) / 2) as i64;
    (conc - disc) as f64 / (((n0 - tie_x) * (n0 - tie_y)) as f64).sqrt()
}

/// Mean rank of each value: one plus the number strictly below, plus half
/// the other members of its tie group.
pub fn ranks_brute(v: &[f64]) -> Vec<f64> {
    v.iter()
        .map(|&a| {
            let below = v.iter().filter(|&&b| b < a).count() as f64;
            let equal = v.iter().filter(|&&b| b == a).count() as f64;
            1.0 + below + (equal - 1.0) / 2.0
        })
        .collect()
}

pub fn spearman_brute(pairs: &[(f64, f64)]) -> f64 {
    let rx = ranks_brute(&pairs.iter().map(|p| p.0).collect::<Vec<_>>());
    let ry = ranks_brute(&pairs.iter().map(|p| p.1).collect::<Vec<_>>());
    let n = rx.len() as f64;
    let mean = (n + 1.0) / 2.0;
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mean) * (b - mean)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mean).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - mean).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

/// Spiking FLOPs written out longhand for a 32x32 RGB input (64 tokens).
pub fn snn_flops_longhand(g: &ArchGenome, timesteps: u64) -> u64 {
    let n = 64u64;
    let d = u64::from(g.embed_dim);
    let l = u64::from(g.depth);
    let hidden = d * u64::from(g.mlp_ratio);
    let attention = l * n * d * (2 * d + n);
    let mlp = 2 * l * n * d * hidden;
    timesteps * (attention + mlp)
}

/// Eight-point tier whose best genome is {128, 4, 4, 2}.
pub fn micro_tier() -> SearchSpaceTier {
    SearchSpaceTier::new(
        "micro",
        GeneRange::new(64, 128, 64),
        GeneRange::new(3, 4, 1),
        GeneRange::new(4, 4, 4),
        GeneRange::new(1, 2, 1),
        ParamBand::UNBOUNDED,
    )
    .unwrap()
}

pub const MICRO_TIER_TOML: &str = r#"name = "micro"
embed = [64, 128, 64]
ratio = [3, 4, 1]
heads = [4, 4, 4]
depth = [1, 2, 1]
"#;
