//! Architecture genomes, search-space tiers and the variation operators.
//!
//! A genome fixes four global hyperparameters of a spiking transformer. A
//! tier bounds each of them to an arithmetic grid `low, low + step, ..., high`
//! and attaches an inclusive parameter-count band.

use std::fmt;
use std::io;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Spatial downsampling of the patch-embedding stage along each axis.
pub const SPE_DOWNSAMPLE: u32 = 4;

/// Number of embed_dim resamples attempted to restore head divisibility.
pub const REPAIR_ATTEMPTS: usize = 16;

/// One candidate architecture. Field order defines the lexicographic order
/// used for tie-breaking.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ArchGenome {
    pub embed_dim: u32,
    pub mlp_ratio: u32,
    pub num_heads: u32,
    pub depth: u32,
}

impl ArchGenome {
    pub const fn new(embed_dim: u32, mlp_ratio: u32, num_heads: u32, depth: u32) -> Self {
        Self {
            embed_dim,
            mlp_ratio,
            num_heads,
            depth,
        }
    }

    pub fn hidden_dim(&self) -> u64 {
        u64::from(self.embed_dim) * u64::from(self.mlp_ratio)
    }

    pub fn head_dim(&self) -> u32 {
        self.embed_dim / self.num_heads.max(1)
    }

    /// Checks what can be checked without a tier: positive genes and head
    /// divisibility.
    pub fn check_structure(&self) -> Verdict {
        let genes = [
            ("embed_dim", self.embed_dim),
            ("mlp_ratio", self.mlp_ratio),
            ("num_heads", self.num_heads),
            ("depth", self.depth),
        ];
        if let Some((gene, _)) = genes.iter().find(|(_, v)| *v == 0) {
            return Verdict::Invalid(Violation::NonPositive { gene });
        }
        if !self.embed_dim.is_multiple_of(self.num_heads) {
            return Verdict::Invalid(Violation::HeadsDivisibility {
                embed_dim: self.embed_dim,
                num_heads: self.num_heads,
            });
        }
        Verdict::Valid
    }
}

impl fmt::Display for ArchGenome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{{embed_dim: {}, mlp_ratio: {}, num_heads: {}, depth: {}}}",
            self.embed_dim, self.mlp_ratio, self.num_heads, self.depth
        )
    }
}

/// Inclusive arithmetic grid `low, low + step, ..., high`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "[u32; 3]", into = "[u32; 3]")]
pub struct GeneRange {
    pub low: u32,
    pub high: u32,
    pub step: u32,
}

impl From<[u32; 3]> for GeneRange {
    fn from([low, high, step]: [u32; 3]) -> Self {
        Self { low, high, step }
    }
}

impl From<GeneRange> for [u32; 3] {
    fn from(r: GeneRange) -> Self {
        [r.low, r.high, r.step]
    }
}

impl GeneRange {
    pub const fn new(low: u32, high: u32, step: u32) -> Self {
        Self { low, high, step }
    }

    fn check(&self, gene: &str) -> Result<()> {
        if self.low == 0 {
            return Err(Error::InvalidTier(format!("{gene}: low must be positive")));
        }
        if self.step == 0 {
            return Err(Error::InvalidTier(format!("{gene}: step must be >= 1")));
        }
        if self.low > self.high {
            return Err(Error::InvalidTier(format!(
                "{gene}: low {} exceeds high {}",
                self.low, self.high
            )));
        }
        if !(self.high - self.low).is_multiple_of(self.step) {
            return Err(Error::InvalidTier(format!(
                "{gene}: span {}..{} is not a multiple of step {}",
                self.low, self.high, self.step
            )));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        ((self.high - self.low) / self.step) as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn value(&self, k: usize) -> u32 {
        self.low + self.step * k as u32
    }

    pub fn index_of(&self, v: u32) -> Option<usize> {
        if v < self.low || v > self.high || !(v - self.low).is_multiple_of(self.step) {
            None
        } else {
            Some(((v - self.low) / self.step) as usize)
        }
    }

    pub fn contains(&self, v: u32) -> bool {
        self.index_of(v).is_some()
    }

    pub fn values(&self) -> impl Iterator<Item = u32> + Clone + '_ {
        (0..self.len()).map(move |k| self.value(k))
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        self.value(rng.random_range(0..self.len()))
    }

    /// Uniform draw among the grid values other than `current`; returns
    /// `current` when the grid has a single point.
    pub fn sample_other<R: Rng + ?Sized>(&self, current: u32, rng: &mut R) -> u32 {
        let n = self.len();
        if n < 2 {
            return current;
        }
        match self.index_of(current) {
            Some(k) => {
                let mut j = rng.random_range(0..n - 1);
                if j >= k {
                    j += 1;
                }
                self.value(j)
            }
            None => self.sample(rng),
        }
    }
}

impl fmt::Display for GeneRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.low, self.high, self.step)
    }
}

/// Inclusive bounds on the total parameter count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParamBand {
    pub min: u64,
    pub max: u64,
}

impl ParamBand {
    pub const UNBOUNDED: ParamBand = ParamBand { min: 0, max: u64::MAX };

    pub const fn new(min: u64, max: u64) -> Self {
        Self { min, max }
    }

    pub fn contains(&self, params: u64) -> bool {
        (self.min..=self.max).contains(&params)
    }
}

impl fmt::Display for ParamBand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.max == u64::MAX {
            write!(f, "[{}, inf]", self.min)
        } else {
            write!(f, "[{}, {}]", self.min, self.max)
        }
    }
}

/// A bounded search space: one grid per gene plus a parameter band.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchSpaceTier {
    pub name: String,
    pub embed: GeneRange,
    pub ratio: GeneRange,
    pub heads: GeneRange,
    pub depth: GeneRange,
    pub band: ParamBand,
}

pub const BUILTIN_TIERS: [&str; 3] = ["tiny", "small", "base"];

impl SearchSpaceTier {
    pub fn new(
        name: impl Into<String>,
        embed: GeneRange,
        ratio: GeneRange,
        heads: GeneRange,
        depth: GeneRange,
        band: ParamBand,
    ) -> Result<Self> {
        let tier = Self {
            name: name.into(),
            embed,
            ratio,
            heads,
            depth,
            band,
        };
        tier.check()?;
        Ok(tier)
    }

    pub fn tiny() -> Self {
        Self {
            name: "tiny".into(),
            embed: GeneRange::new(192, 384, 64),
            ratio: GeneRange::new(3, 5, 1),
            heads: GeneRange::new(4, 8, 4),
            depth: GeneRange::new(1, 8, 1),
            band: ParamBand::new(4_000_000, 5_000_000),
        }
    }

    pub fn small() -> Self {
        Self {
            name: "small".into(),
            embed: GeneRange::new(256, 512, 64),
            ratio: GeneRange::new(3, 5, 1),
            heads: GeneRange::new(4, 8, 4),
            depth: GeneRange::new(2, 12, 1),
            band: ParamBand::new(11_000_000, 15_000_000),
        }
    }

    pub fn base() -> Self {
        Self {
            name: "base".into(),
            embed: GeneRange::new(384, 768, 64),
            ratio: GeneRange::new(3, 6, 1),
            heads: GeneRange::new(4, 8, 4),
            depth: GeneRange::new(4, 15, 1),
            band: ParamBand::new(25_000_000, 35_000_000),
        }
    }

    pub fn builtin(name: &str) -> Option<Self> {
        match name {
            "tiny" => Some(Self::tiny()),
            "small" => Some(Self::small()),
            "base" => Some(Self::base()),
            _ => None,
        }
    }

    pub fn builtins() -> [Self; 3] {
        [Self::tiny(), Self::small(), Self::base()]
    }

    pub fn with_band(mut self, band: ParamBand) -> Self {
        self.band = band;
        self
    }

    pub fn check(&self) -> Result<()> {
        self.embed.check("embed")?;
        self.ratio.check("ratio")?;
        self.heads.check("heads")?;
        self.depth.check("depth")?;
        if self.band.min >= self.band.max {
            return Err(Error::InvalidTier(format!(
                "parameter band {} is empty or inverted",
                self.band
            )));
        }
        Ok(())
    }

    pub fn grid_size(&self) -> u128 {
        [self.embed, self.ratio, self.heads, self.depth]
            .iter()
            .map(|r| r.len() as u128)
            .product()
    }

    /// Every grid combination in lexicographic genome order, including
    /// combinations that violate head divisibility.
    pub fn grid(&self) -> impl Iterator<Item = ArchGenome> + '_ {
        self.embed.values().flat_map(move |e| {
            self.ratio.values().flat_map(move |r| {
                self.heads
                    .values()
                    .flat_map(move |h| self.depth.values().map(move |d| ArchGenome::new(e, r, h, d)))
            })
        })
    }

    pub fn parse_file(text: &str) -> Result<Self> {
        let file: TierFile = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Self::new(
            file.name,
            file.embed,
            file.ratio,
            file.heads,
            file.depth,
            ParamBand::new(file.min_params, file.max_params.unwrap_or(u64::MAX)),
        )
    }

    pub fn to_file_string(&self) -> String {
        let file = TierFile {
            name: self.name.clone(),
            embed: self.embed,
            ratio: self.ratio,
            heads: self.heads,
            depth: self.depth,
            min_params: self.band.min,
            max_params: (self.band.max != u64::MAX).then_some(self.band.max),
        };
        toml::to_string(&file).expect("tier serializes")
    }
}

/// On-disk form of a custom tier. `max_params` may be omitted for an
/// unbounded band.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TierFile {
    name: String,
    embed: GeneRange,
    ratio: GeneRange,
    heads: GeneRange,
    depth: GeneRange,
    #[serde(default)]
    min_params: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    max_params: Option<u64>,
}

/// Run-level configuration shared by scoring and simulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunConfig {
    pub timesteps: u32,
    pub image_size: (u32, u32),
    pub in_channels: u32,
    pub num_classes: u32,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            timesteps: 4,
            image_size: (32, 32),
            in_channels: 3,
            num_classes: 10,
            seed: 0,
        }
    }
}

impl RunConfig {
    pub fn check(&self) -> Result<()> {
        if self.timesteps == 0 {
            return Err(Error::InvalidConfig("timesteps must be >= 1".into()));
        }
        let (h, w) = self.image_size;
        if h == 0 || w == 0 || h % SPE_DOWNSAMPLE != 0 || w % SPE_DOWNSAMPLE != 0 {
            return Err(Error::InvalidConfig(format!(
                "image size {h}x{w} must be positive and divisible by {SPE_DOWNSAMPLE}"
            )));
        }
        if self.in_channels == 0 || self.num_classes == 0 {
            return Err(Error::InvalidConfig(
                "in_channels and num_classes must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Token count after patch embedding: `(H / 4) * (W / 4)`.
    pub fn seq_len(&self) -> u64 {
        let (h, w) = self.image_size;
        u64::from(h / SPE_DOWNSAMPLE) * u64::from(w / SPE_DOWNSAMPLE)
    }
}

/// First constraint a genome breaks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Violation {
    NonPositive {
        gene: &'static str,
    },
    OffGrid {
        gene: &'static str,
        value: u32,
        range: GeneRange,
    },
    HeadsDivisibility {
        embed_dim: u32,
        num_heads: u32,
    },
}

impl Violation {
    pub fn constraint(&self) -> String {
        match self {
            Violation::NonPositive { gene } => format!("{gene} not positive"),
            Violation::OffGrid { gene, .. } => format!("{gene} off grid"),
            Violation::HeadsDivisibility { .. } => "embed_dim not divisible by num_heads".into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NonPositive { gene } => write!(f, "{gene} not positive"),
            Violation::OffGrid { gene, value, range } => {
                write!(f, "{gene} off grid ({value} not on {range})")
            }
            Violation::HeadsDivisibility { embed_dim, num_heads } => write!(
                f,
                "embed_dim not divisible by num_heads ({embed_dim} % {num_heads} != 0)"
            ),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Valid,
    Invalid(Violation),
}

impl Verdict {
    pub fn is_valid(&self) -> bool {
        matches!(self, Verdict::Valid)
    }

    pub fn into_result(self) -> Result<()> {
        match self {
            Verdict::Valid => Ok(()),
            Verdict::Invalid(v) => Err(Error::InvalidGenome(v)),
        }
    }
}

/// Grid membership is checked gene by gene before head divisibility.
pub fn validate(g: &ArchGenome, tier: &SearchSpaceTier) -> Verdict {
    let genes = [
        ("embed_dim", g.embed_dim, tier.embed),
        ("mlp_ratio", g.mlp_ratio, tier.ratio),
        ("num_heads", g.num_heads, tier.heads),
        ("depth", g.depth, tier.depth),
    ];
    for (gene, value, range) in genes {
        if !range.contains(value) {
            return Verdict::Invalid(Violation::OffGrid { gene, value, range });
        }
    }
    g.check_structure()
}

fn repair<R: Rng + ?Sized>(mut g: ArchGenome, tier: &SearchSpaceTier, rng: &mut R) -> ArchGenome {
    for _ in 0..REPAIR_ATTEMPTS {
        if g.embed_dim.is_multiple_of(g.num_heads) {
            break;
        }
        g.embed_dim = tier.embed.sample(rng);
    }
    g
}

/// Uniform draw over each gene's grid. The parameter band is not enforced.
pub fn sample<R: Rng + ?Sized>(tier: &SearchSpaceTier, rng: &mut R) -> ArchGenome {
    let g = ArchGenome::new(
        tier.embed.sample(rng),
        tier.ratio.sample(rng),
        tier.heads.sample(rng),
        tier.depth.sample(rng),
    );
    repair(g, tier, rng)
}

/// Resamples each gene to a different grid value with probability
/// `per_gene_prob`.
pub fn mutate<R: Rng + ?Sized>(g: &ArchGenome, tier: &SearchSpaceTier, per_gene_prob: f64, rng: &mut R) -> ArchGenome {
    let p = per_gene_prob.clamp(0.0, 1.0);
    let mut out = *g;
    if rng.random_bool(p) {
        out.embed_dim = tier.embed.sample_other(out.embed_dim, rng);
    }
    if rng.random_bool(p) {
        out.mlp_ratio = tier.ratio.sample_other(out.mlp_ratio, rng);
    }
    if rng.random_bool(p) {
        out.num_heads = tier.heads.sample_other(out.num_heads, rng);
    }
    if rng.random_bool(p) {
        out.depth = tier.depth.sample_other(out.depth, rng);
    }
    repair(out, tier, rng)
}

/// Uniform gene-wise crossover.
pub fn crossover<R: Rng + ?Sized>(a: &ArchGenome, b: &ArchGenome, tier: &SearchSpaceTier, rng: &mut R) -> ArchGenome {
    let mut pick = |x: u32, y: u32| if rng.random_bool(0.5) { x } else { y };
    let child = ArchGenome::new(
        pick(a.embed_dim, b.embed_dim),
        pick(a.mlp_ratio, b.mlp_ratio),
        pick(a.num_heads, b.num_heads),
        pick(a.depth, b.depth),
    );
    repair(child, tier, rng)
}

/// Flat genome record used for TOML files and CSV rows.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenomeRecord {
    pub tier: String,
    pub embed_dim: u32,
    pub mlp_ratio: u32,
    pub num_heads: u32,
    pub depth: u32,
}

impl GenomeRecord {
    pub fn new(tier: &str, g: &ArchGenome) -> Self {
        Self {
            tier: tier.to_owned(),
            embed_dim: g.embed_dim,
            mlp_ratio: g.mlp_ratio,
            num_heads: g.num_heads,
            depth: g.depth,
        }
    }

    pub fn genome(&self) -> ArchGenome {
        ArchGenome::new(self.embed_dim, self.mlp_ratio, self.num_heads, self.depth)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("genome record serializes")
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }
}

pub const GENOME_CSV_HEADER: [&str; 5] = ["tier", "embed_dim", "mlp_ratio", "num_heads", "depth"];

pub fn write_genomes_csv<W: io::Write>(out: W, tier: &str, genomes: &[ArchGenome]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for g in genomes {
        w.serialize(GenomeRecord::new(tier, g))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_genomes_csv<R: io::Read>(input: R) -> Result<Vec<GenomeRecord>> {
    let mut r = csv::Reader::from_reader(input);
    let headers = r.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != GENOME_CSV_HEADER {
        return Err(Error::Parse(format!(
            "expected genome columns {GENOME_CSV_HEADER:?}, found {:?}",
            headers.iter().collect::<Vec<_>>()
        )));
    }
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

#[cfg(test)]
mod tests {
    use std::collections::HashSet;

    use super::*;
    use crate::rng::seeded_rng;

    fn one_point() -> SearchSpaceTier {
        SearchSpaceTier::new(
            "point",
            GeneRange::new(192, 192, 1),
            GeneRange::new(4, 4, 1),
            GeneRange::new(4, 4, 4),
            GeneRange::new(2, 2, 1),
            ParamBand::UNBOUNDED,
        )
        .unwrap()
    }

    #[test]
    fn builtin_tiers_match_published_grids() {
        let t = SearchSpaceTier::tiny();
        assert_eq!(t.embed.values().collect::<Vec<_>>(), [192, 256, 320, 384]);
        assert_eq!(t.ratio.values().collect::<Vec<_>>(), [3, 4, 5]);
        assert_eq!(t.heads.values().collect::<Vec<_>>(), [4, 8]);
        assert_eq!(t.depth.len(), 8);
        assert_eq!(t.band, ParamBand::new(4_000_000, 5_000_000));

        let s = SearchSpaceTier::small();
        assert_eq!(s.embed, GeneRange::new(256, 512, 64));
        assert_eq!(s.depth, GeneRange::new(2, 12, 1));
        assert_eq!(s.band, ParamBand::new(11_000_000, 15_000_000));

        let b = SearchSpaceTier::base();
        assert_eq!(b.embed, GeneRange::new(384, 768, 64));
        assert_eq!(b.ratio, GeneRange::new(3, 6, 1));
        assert_eq!(b.depth, GeneRange::new(4, 15, 1));
        assert_eq!(b.band, ParamBand::new(25_000_000, 35_000_000));

        for tier in SearchSpaceTier::builtins() {
            tier.check().unwrap();
        }
        assert_eq!(SearchSpaceTier::tiny().grid_size(), 192);
        assert_eq!(SearchSpaceTier::small().grid_size(), 330);
        assert_eq!(SearchSpaceTier::base().grid_size(), 672);
    }

    #[test]
    fn every_builtin_grid_point_is_head_divisible() {
        for tier in SearchSpaceTier::builtins() {
            assert!(tier.grid().all(|g| validate(&g, &tier).is_valid()));
        }
    }

    #[test]
    fn bad_tiers_are_rejected() {
        let r = GeneRange::new(4, 4, 1);
        assert!(SearchSpaceTier::new("x", GeneRange::new(192, 380, 64), r, r, r, ParamBand::UNBOUNDED).is_err());
        assert!(SearchSpaceTier::new("x", GeneRange::new(384, 192, 64), r, r, r, ParamBand::UNBOUNDED).is_err());
        assert!(SearchSpaceTier::new("x", GeneRange::new(192, 384, 0), r, r, r, ParamBand::UNBOUNDED).is_err());
        assert!(SearchSpaceTier::new("x", r, r, r, r, ParamBand::new(5, 5)).is_err());
    }

    #[test]
    fn validate_examples() {
        let tiny = SearchSpaceTier::tiny();
        assert!(validate(&ArchGenome::new(192, 4, 4, 2), &tiny).is_valid());
        assert!(validate(&ArchGenome::new(320, 4, 8, 2), &tiny).is_valid());

        match validate(&ArchGenome::new(200, 4, 4, 2), &tiny) {
            Verdict::Invalid(v) => assert_eq!(v.constraint(), "embed_dim off grid"),
            Verdict::Valid => panic!("200 is off grid"),
        }
        // 324 is also not divisible by 8; grid membership is reported first.
        match validate(&ArchGenome::new(324, 4, 8, 2), &tiny) {
            Verdict::Invalid(v) => assert_eq!(v.constraint(), "embed_dim off grid"),
            Verdict::Valid => panic!("324 is off grid"),
        }
    }

    #[test]
    fn divisibility_checked_on_custom_grid() {
        let tier = SearchSpaceTier::new(
            "odd",
            GeneRange::new(60, 72, 12),
            GeneRange::new(4, 4, 1),
            GeneRange::new(8, 8, 1),
            GeneRange::new(1, 1, 1),
            ParamBand::UNBOUNDED,
        )
        .unwrap();
        match validate(&ArchGenome::new(60, 4, 8, 1), &tier) {
            Verdict::Invalid(Violation::HeadsDivisibility { .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        // Sampling repairs toward 72, the only divisible embed value.
        let mut rng = seeded_rng(3);
        let ok = (0..200)
            .filter(|_| validate(&sample(&tier, &mut rng), &tier).is_valid())
            .count();
        assert!(ok >= 199);
    }

    #[test]
    fn sample_examples() {
        let tiny = SearchSpaceTier::tiny();
        let g = sample(&tiny, &mut seeded_rng(11));
        assert!([192, 256, 320, 384].contains(&g.embed_dim));

        assert_eq!(sample(&one_point(), &mut seeded_rng(5)), ArchGenome::new(192, 4, 4, 2));
        assert_eq!(sample(&tiny, &mut seeded_rng(7)), sample(&tiny, &mut seeded_rng(7)));
    }

    #[test]
    fn sample_covers_every_grid_point() {
        // With 10^4 draws the least likely value (p = 1/8) is missed with
        // probability (7/8)^10000, far below 1e-6.
        let tiny = SearchSpaceTier::tiny();
        let mut rng = seeded_rng(2024);
        let mut seen: [HashSet<u32>; 4] = Default::default();
        for _ in 0..10_000 {
            let g = sample(&tiny, &mut rng);
            seen[0].insert(g.embed_dim);
            seen[1].insert(g.mlp_ratio);
            seen[2].insert(g.num_heads);
            seen[3].insert(g.depth);
        }
        assert_eq!(seen[0].len(), tiny.embed.len());
        assert_eq!(seen[1].len(), tiny.ratio.len());
        assert_eq!(seen[2].len(), tiny.heads.len());
        assert_eq!(seen[3].len(), tiny.depth.len());
    }

    #[test]
    fn mutate_examples() {
        let tiny = SearchSpaceTier::tiny();
        let g = ArchGenome::new(192, 4, 4, 2);
        let mut rng = seeded_rng(1);
        for _ in 0..50 {
            assert_eq!(mutate(&g, &tiny, 0.0, &mut rng), g);
        }
        assert_eq!(mutate(&g, &one_point(), 1.0, &mut rng), g);

        let m = mutate(&g, &tiny, 1.0, &mut seeded_rng(42));
        assert_ne!(m.embed_dim, g.embed_dim);
        assert_ne!(m.mlp_ratio, g.mlp_ratio);
        assert_ne!(m.num_heads, g.num_heads);
        assert_ne!(m.depth, g.depth);
        assert!(validate(&m, &tiny).is_valid());
        assert_eq!(
            m,
            ArchGenome::new(GOLDEN_MUTANT[0], GOLDEN_MUTANT[1], GOLDEN_MUTANT[2], GOLDEN_MUTANT[3])
        );
    }

    // Output of mutate({192,4,4,2}, tiny, 1.0, seed 42), frozen.
    const GOLDEN_MUTANT: [u32; 4] = [256, 5, 8, 8];

    #[test]
    fn crossover_examples() {
        let tiny = SearchSpaceTier::tiny();
        let a = ArchGenome::new(192, 3, 4, 1);
        let b = ArchGenome::new(384, 5, 8, 8);
        let mut rng = seeded_rng(9);
        assert_eq!(crossover(&a, &a, &tiny, &mut rng), a);
        for _ in 0..100 {
            let c = crossover(&a, &b, &tiny, &mut rng);
            assert!([a.embed_dim, b.embed_dim].contains(&c.embed_dim));
            assert!([a.mlp_ratio, b.mlp_ratio].contains(&c.mlp_ratio));
            assert!([a.num_heads, b.num_heads].contains(&c.num_heads));
            assert!([a.depth, b.depth].contains(&c.depth));
        }
        assert_eq!(
            crossover(&a, &b, &tiny, &mut seeded_rng(77)),
            crossover(&a, &b, &tiny, &mut seeded_rng(77))
        );
    }

    #[test]
    fn tier_file_round_trip() {
        let text = "name = \"micro\"\nembed = [64, 128, 64]\nratio = [3, 4, 1]\nheads = [4, 4, 4]\ndepth = [1, 2, 1]\n";
        let tier = SearchSpaceTier::parse_file(text).unwrap();
        assert_eq!(tier.band, ParamBand::UNBOUNDED);
        assert_eq!(tier.grid_size(), 8);
        assert_eq!(SearchSpaceTier::parse_file(&tier.to_file_string()).unwrap(), tier);

        let tiny = SearchSpaceTier::tiny();
        assert_eq!(SearchSpaceTier::parse_file(&tiny.to_file_string()).unwrap(), tiny);
        assert!(SearchSpaceTier::parse_file("name = \"x\"").is_err());
    }

    #[test]
    fn genome_csv_columns_and_toml() {
        let mut buf = Vec::new();
        write_genomes_csv(&mut buf, "tiny", &[ArchGenome::new(256, 4, 4, 4)]).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text, "tier,embed_dim,mlp_ratio,num_heads,depth\ntiny,256,4,4,4\n");
        let back = read_genomes_csv(&buf[..]).unwrap();
        assert_eq!(back[0].genome(), ArchGenome::new(256, 4, 4, 4));

        let rec = GenomeRecord::new("small", &ArchGenome::new(384, 4, 8, 5));
        assert_eq!(GenomeRecord::from_toml(&rec.to_toml()).unwrap(), rec);
        assert!(rec.to_toml().starts_with("tier = \"small\"\nembed_dim = 384"));
    }

    #[test]
    fn run_config_checks() {
        let cfg = RunConfig::default();
        cfg.check().unwrap();
        assert_eq!(cfg.seq_len(), 64);
        assert!(RunConfig { timesteps: 0, ..cfg }.check().is_err());
        assert!(RunConfig {
            image_size: (30, 32),
            ..cfg
        }
        .check()
        .is_err());
    }
}
