//! Command implementations for the `spikenas` binary.
//!
//! Every command first prints its fully resolved configuration so a run can
//! be repeated from its own output.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::cost_model::{self, ScoreRow};
use crate::error::Error;
use crate::evo_search::{self, SearchConfig};
use crate::genome::{self, ArchGenome, GenomeRecord, RunConfig, SearchSpaceTier};
use crate::rank_stats;
use crate::rng::seeded_rng;
use crate::snn_sim::{self, VerifyReport};

pub const EXIT_VALIDATION: i32 = 3;
pub const EXIT_INFEASIBLE: i32 = 4;
pub const EXIT_VERIFICATION: i32 = 5;
pub const EXIT_IO: i32 = 6;

#[derive(Debug, Parser)]
#[command(
    name = "spikenas",
    version,
    about = "Training-free architecture search for spiking transformers"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Simulation timesteps T.
    #[arg(long, global = true, default_value_t = 4)]
    pub timesteps: u32,

    #[arg(long, global = true, num_args = 2, value_names = ["H", "W"], default_values_t = [32, 32])]
    pub image_size: Vec<u32>,

    #[arg(long, global = true, default_value_t = 3)]
    pub in_channels: u32,

    #[arg(long, global = true, default_value_t = 10)]
    pub classes: u32,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw random genomes from a tier.
    Sample {
        #[command(flatten)]
        tier: TierArgs,
        #[arg(long, default_value_t = 10)]
        count: usize,
        /// Reject genomes outside the tier's parameter band.
        #[arg(long)]
        in_band: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the FLOPs and parameter breakdown of one genome.
    Score {
        #[command(flatten)]
        genome: GenomeArgs,
        #[command(flatten)]
        tier: OptTierArgs,
        /// Also print the CSV row.
        #[arg(long)]
        csv: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evolutionary search within a tier.
    Search {
        #[command(flatten)]
        tier: TierArgs,
        #[command(flatten)]
        search: SearchArgs,
        /// Enumerate the grid instead of evolving.
        #[arg(long)]
        exhaustive: bool,
        /// Output directory for best.toml and history.csv.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Enumerate every grid point of a tier.
    Exhaustive {
        #[command(flatten)]
        tier: TierArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check simulator MAC counts against the analytic formulas.
    Verify {
        #[command(flatten)]
        genome: OptGenomeArgs,
        #[command(flatten)]
        tier: OptTierArgs,
        /// Random genomes to verify when no genome is given.
        #[arg(long, default_value_t = 10)]
        count: usize,
        #[arg(long, hide = true)]
        corrupt_counter: Option<Counter>,
    },
    /// Kendall and Spearman correlation of scores against accuracy.
    Correlate {
        #[arg(long)]
        input: PathBuf,
        /// Custom tier referenced by name in the CSV.
        #[arg(long)]
        tier_file: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Counter {
    Sa,
    Mlp,
    Spe,
}

#[derive(Debug, Args)]
pub struct TierArgs {
    /// Built-in tier: tiny, small or base.
    #[arg(long, conflicts_with = "tier_file", required_unless_present = "tier_file")]
    pub tier: Option<String>,
    /// Custom tier file (TOML).
    #[arg(long)]
    pub tier_file: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OptTierArgs {
    /// Built-in tier: tiny, small or base.
    #[arg(long, conflicts_with = "tier_file")]
    pub tier: Option<String>,
    /// Custom tier file (TOML).
    #[arg(long)]
    pub tier_file: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenomeArgs {
    #[arg(long, required_unless_present = "genome")]
    pub embed: Option<u32>,
    #[arg(long, required_unless_present = "genome")]
    pub ratio: Option<u32>,
    #[arg(long, required_unless_present = "genome")]
    pub heads: Option<u32>,
    #[arg(long, required_unless_present = "genome")]
    pub depth: Option<u32>,
    /// Genome record file (TOML).
    #[arg(long, conflicts_with_all = ["embed", "ratio", "heads", "depth"])]
    pub genome: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OptGenomeArgs {
    #[arg(long, requires_all = ["ratio", "heads", "depth"])]
    pub embed: Option<u32>,
    #[arg(long)]
    pub ratio: Option<u32>,
    #[arg(long)]
    pub heads: Option<u32>,
    #[arg(long)]
    pub depth: Option<u32>,
    #[arg(long, conflicts_with = "embed")]
    pub genome: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    /// Population size [default: 64].
    #[arg(long)]
    pub population: Option<usize>,
    /// Generations after the initial population [default: 50].
    #[arg(long)]
    pub generations: Option<usize>,
    /// Tournament size [default: 4].
    #[arg(long)]
    pub tournament: Option<usize>,
    /// Per-gene mutation probability [default: 0.2].
    #[arg(long)]
    pub mutation_prob: Option<f64>,
    /// Per-child crossover probability [default: 0.5].
    #[arg(long)]
    pub crossover_prob: Option<f64>,
    /// Draws per slot before an out-of-band tier is declared infeasible [default: 200].
    #[arg(long)]
    pub max_resamples: Option<usize>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Lib(#[from] Error),
    #[error("verification failed for {0}")]
    Verification(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Verification(_) => EXIT_VERIFICATION,
            CliError::Lib(e) => match e {
                Error::Io(_) | Error::Csv(_) => EXIT_IO,
                Error::Infeasible { .. } | Error::EmptyFeasibleSet { .. } | Error::GridTooLarge { .. } => {
                    EXIT_INFEASIBLE
                }
                _ => EXIT_VALIDATION,
            },
        }
    }
}

type CliResult<T = ()> = std::result::Result<T, CliError>;

fn io_err(path: &Path, e: std::io::Error) -> Error {
    Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
}

fn read_text(path: &Path) -> Result<String, Error> {
    fs::read_to_string(path).map_err(|e| io_err(path, e))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), Error> {
    fs::write(path, bytes).map_err(|e| io_err(path, e))
}

fn resolve_tier(name: Option<&str>, file: Option<&Path>) -> Result<Option<SearchSpaceTier>, Error> {
    match (name, file) {
        (Some(n), _) => SearchSpaceTier::builtin(n)
            .map(Some)
            .ok_or_else(|| Error::InvalidTier(format!("unknown tier {n:?}; expected one of tiny, small, base"))),
        (None, Some(p)) => SearchSpaceTier::parse_file(&read_text(p)?).map(Some),
        (None, None) => Ok(None),
    }
}

fn required_tier(args: &TierArgs) -> Result<SearchSpaceTier, Error> {
    resolve_tier(args.tier.as_deref(), args.tier_file.as_deref())?
        .ok_or_else(|| Error::InvalidTier("one of --tier or --tier-file is required".into()))
}

fn genome_from(
    embed: Option<u32>,
    ratio: Option<u32>,
    heads: Option<u32>,
    depth: Option<u32>,
    file: Option<&Path>,
) -> Result<Option<ArchGenome>, Error> {
    if let Some(p) = file {
        return GenomeRecord::from_toml(&read_text(p)?).map(|r| Some(r.genome()));
    }
    match (embed, ratio, heads, depth) {
        (Some(e), Some(r), Some(h), Some(d)) => Ok(Some(ArchGenome::new(e, r, h, d))),
        (None, None, None, None) => Ok(None),
        _ => Err(Error::InvalidConfig(
            "--embed, --ratio, --heads and --depth go together".into(),
        )),
    }
}

fn check_genome(g: &ArchGenome, tier: Option<&SearchSpaceTier>, cfg: &RunConfig) -> Result<(), Error> {
    match tier {
        Some(t) => genome::validate(g, t).into_result()?,
        None => g.check_structure().into_result()?,
    }
    cost_model::param_count(g, cfg).map(|_| ())
}

impl Cli {
    pub fn run_config(&self) -> Result<RunConfig, Error> {
        let (h, w) = match self.image_size[..] {
            [h, w] => (h, w),
            _ => return Err(Error::InvalidConfig("--image-size takes H and W".into())),
        };
        let cfg = RunConfig {
            timesteps: self.timesteps,
            image_size: (h, w),
            in_channels: self.in_channels,
            num_classes: self.classes,
            seed: self.seed,
        };
        cfg.check()?;
        Ok(cfg)
    }
}

fn echo_config(out: &mut dyn Write, command: &str, tier: Option<&SearchSpaceTier>, cfg: &RunConfig) -> CliResult {
    let mut line = format!("config command={command}");
    if let Some(t) = tier {
        write!(
            line,
            " tier={} embed={} ratio={} heads={} depth={} band={}",
            t.name, t.embed, t.ratio, t.heads, t.depth, t.band
        )
        .unwrap();
    }
    write!(
        line,
        " seed={} timesteps={} image_size={}x{} in_channels={} classes={}",
        cfg.seed, cfg.timesteps, cfg.image_size.0, cfg.image_size.1, cfg.in_channels, cfg.num_classes
    )
    .unwrap();
    writeln!(out, "{line}").map_err(Error::from)?;
    Ok(())
}

/// Executes one parsed invocation, writing human-readable output to `out`.
pub fn run(cli: &Cli, out: &mut dyn Write) -> CliResult {
    let cfg = cli.run_config()?;
    match &cli.command {
        Command::Sample {
            tier,
            count,
            in_band,
            out: path,
        } => cmd_sample(&required_tier(tier)?, &cfg, *count, *in_band, path.as_deref(), out),
        Command::Score {
            genome: ga,
            tier,
            csv,
            out: path,
        } => {
            let tier = resolve_tier(tier.tier.as_deref(), tier.tier_file.as_deref())?;
            let g = genome_from(ga.embed, ga.ratio, ga.heads, ga.depth, ga.genome.as_deref())?
                .ok_or_else(|| Error::InvalidConfig("a genome is required".into()))?;
            cmd_score(&g, tier.as_ref(), &cfg, *csv, path.as_deref(), out)
        }
        Command::Search {
            tier,
            search,
            exhaustive,
            out: path,
        } => {
            let tier = required_tier(tier)?;
            if *exhaustive {
                cmd_exhaustive(&tier, &cfg, path.as_deref(), out)
            } else {
                let d = SearchConfig::default();
                let scfg = SearchConfig {
                    population_size: search.population.unwrap_or(d.population_size),
                    generations: search.generations.unwrap_or(d.generations),
                    tournament_size: search.tournament.unwrap_or(d.tournament_size),
                    mutation_prob: search.mutation_prob.unwrap_or(d.mutation_prob),
                    crossover_prob: search.crossover_prob.unwrap_or(d.crossover_prob),
                    max_rejection_resamples: search.max_resamples.unwrap_or(d.max_rejection_resamples),
                    seed: cfg.seed,
                };
                cmd_search(&tier, &cfg, &scfg, path.as_deref(), out)
            }
        }
        Command::Exhaustive { tier, out: path } => cmd_exhaustive(&required_tier(tier)?, &cfg, path.as_deref(), out),
        Command::Verify {
            genome: ga,
            tier,
            count,
            corrupt_counter,
        } => {
            let tier = resolve_tier(tier.tier.as_deref(), tier.tier_file.as_deref())?;
            let g = genome_from(ga.embed, ga.ratio, ga.heads, ga.depth, ga.genome.as_deref())?;
            let genomes = match (g, &tier) {
                (Some(g), t) => {
                    check_genome(&g, t.as_ref(), &cfg)?;
                    vec![g]
                }
                (None, Some(t)) => {
                    let mut rng = seeded_rng(cfg.seed);
                    (0..*count).map(|_| genome::sample(t, &mut rng)).collect()
                }
                (None, None) => {
                    return Err(Error::InvalidConfig("verify needs a genome or --tier/--tier-file".into()).into())
                }
            };
            cmd_verify(&genomes, tier.as_ref(), &cfg, *corrupt_counter, out)
        }
        Command::Correlate {
            input,
            tier_file,
            out: path,
        } => {
            let custom = tier_file
                .as_deref()
                .map(|p| read_text(p).and_then(|t| SearchSpaceTier::parse_file(&t)))
                .transpose()?;
            cmd_correlate(input, custom, &cfg, path.as_deref(), out)
        }
    }
}

fn cmd_sample(
    tier: &SearchSpaceTier,
    cfg: &RunConfig,
    count: usize,
    in_band: bool,
    path: Option<&Path>,
    out: &mut dyn Write,
) -> CliResult {
    echo_config(out, "sample", Some(tier), cfg)?;
    tier.check()?;
    const MAX_DRAWS: usize = 10_000;
    let mut rng = seeded_rng(cfg.seed);
    let mut genomes = Vec::with_capacity(count);
    for _ in 0..count {
        let g = if in_band {
            (0..MAX_DRAWS)
                .map(|_| genome::sample(tier, &mut rng))
                .find(|g| genome::validate(g, tier).is_valid() && cost_model::in_band(g, tier, cfg))
                .ok_or_else(|| Error::Infeasible {
                    tier: tier.name.clone(),
                    min: tier.band.min,
                    max: tier.band.max,
                    attempts: MAX_DRAWS,
                })?
        } else {
            genome::sample(tier, &mut rng)
        };
        genomes.push(g);
    }
    let mut buf = Vec::new();
    genome::write_genomes_csv(&mut buf, &tier.name, &genomes)?;
    match path {
        Some(p) => {
            write_file(p, &buf)?;
            writeln!(out, "wrote {} genomes to {}", genomes.len(), p.display()).map_err(Error::from)?;
        }
        None => out.write_all(&buf).map_err(Error::from)?,
    }
    Ok(())
}

fn cmd_score(
    g: &ArchGenome,
    tier: Option<&SearchSpaceTier>,
    cfg: &RunConfig,
    csv: bool,
    path: Option<&Path>,
    out: &mut dyn Write,
) -> CliResult {
    echo_config(out, "score", tier, cfg)?;
    check_genome(g, tier, cfg)?;
    let flops = cost_model::flops_snn(g, cfg)?;
    let params = cost_model::param_count(g, cfg)?;
    let text = format!(
        "genome {g}\n\
         sa_flops     {}\n\
         mlp_flops    {}\n\
         ann_total    {}\n\
         snn_total    {}\n\
         block_params {}\n\
         spe_params   {}\n\
         head_params  {}\n\
         total_params {}\n",
        flops.sa_flops,
        flops.mlp_flops,
        flops.ann_total,
        flops.snn_total,
        params.block_params,
        params.spe_params,
        params.head_params,
        params.total
    );
    out.write_all(text.as_bytes()).map_err(Error::from)?;
    let mut row = Vec::new();
    cost_model::write_scores_csv(&mut row, &[ScoreRow::new(&flops, &params)])?;
    if csv {
        out.write_all(&row).map_err(Error::from)?;
    }
    if let Some(p) = path {
        write_file(p, &row)?;
    }
    Ok(())
}

fn write_best(dir: Option<&Path>, tier: &SearchSpaceTier, g: &ArchGenome) -> Result<(), Error> {
    if let Some(dir) = dir {
        fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
        write_file(
            &dir.join("best.toml"),
            GenomeRecord::new(&tier.name, g).to_toml().as_bytes(),
        )?;
    }
    Ok(())
}

fn cmd_search(
    tier: &SearchSpaceTier,
    cfg: &RunConfig,
    scfg: &SearchConfig,
    dir: Option<&Path>,
    out: &mut dyn Write,
) -> CliResult {
    echo_config(out, "search", Some(tier), cfg)?;
    writeln!(
        out,
        "search population={} generations={} tournament={} mutation_prob={} crossover_prob={} max_resamples={}",
        scfg.population_size,
        scfg.generations,
        scfg.tournament_size,
        scfg.mutation_prob,
        scfg.crossover_prob,
        scfg.max_rejection_resamples
    )
    .map_err(Error::from)?;
    let res = evo_search::run_search(tier, cfg, scfg)?;
    writeln!(
        out,
        "best {} score {} params {} evaluated {}",
        res.best.genome, res.best.score, res.best.params, res.evaluated_count
    )
    .map_err(Error::from)?;
    write_best(dir, tier, &res.best.genome)?;
    if let Some(dir) = dir {
        let mut buf = Vec::new();
        evo_search::write_history_csv(&mut buf, &res.history)?;
        write_file(&dir.join("history.csv"), &buf)?;
        writeln!(out, "wrote {}", dir.display()).map_err(Error::from)?;
    }
    Ok(())
}

fn cmd_exhaustive(tier: &SearchSpaceTier, cfg: &RunConfig, dir: Option<&Path>, out: &mut dyn Write) -> CliResult {
    echo_config(out, "exhaustive", Some(tier), cfg)?;
    let best = evo_search::exhaustive_search(tier, cfg)?;
    writeln!(
        out,
        "best {} score {} params {} grid_points {}",
        best.genome,
        best.score,
        best.params,
        tier.grid_size()
    )
    .map_err(Error::from)?;
    write_best(dir, tier, &best.genome)?;
    Ok(())
}

fn cmd_verify(
    genomes: &[ArchGenome],
    tier: Option<&SearchSpaceTier>,
    cfg: &RunConfig,
    corrupt: Option<Counter>,
    out: &mut dyn Write,
) -> CliResult {
    echo_config(out, "verify", tier, cfg)?;
    let mut failed = Vec::new();
    for g in genomes {
        let report: VerifyReport = snn_sim::verify_flops_with(g, cfg, |c| match corrupt {
            Some(Counter::Sa) => c.sa_macs += 1,
            Some(Counter::Mlp) => c.mlp_macs += 1,
            Some(Counter::Spe) => c.spe_macs += 1,
            None => {}
        })?;
        writeln!(out, "{report}").map_err(Error::from)?;
        if !report.passed() {
            failed.push(g.to_string());
        }
    }
    writeln!(out, "verified {} genomes, {} failed", genomes.len(), failed.len()).map_err(Error::from)?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Verification(failed.join(", ")))
    }
}

fn cmd_correlate(
    input: &Path,
    custom: Option<SearchSpaceTier>,
    cfg: &RunConfig,
    path: Option<&Path>,
    out: &mut dyn Write,
) -> CliResult {
    echo_config(out, "correlate", custom.as_ref(), cfg)?;
    let file = fs::File::open(input).map_err(|e| io_err(input, e))?;
    let samples = rank_stats::read_accuracy_csv(file, cfg, |name| match &custom {
        Some(t) if t.name == name => Some(t.clone()),
        _ => SearchSpaceTier::builtin(name),
    })?;
    let report = rank_stats::correlate(&samples)?;
    let text = report.to_toml();
    out.write_all(text.as_bytes()).map_err(Error::from)?;
    if let Some(p) = path {
        write_file(p, text.as_bytes())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (CliResult, String) {
        let cli = Cli::try_parse_from(std::iter::once("spikenas").chain(args.iter().copied())).unwrap();
        let mut buf = Vec::new();
        let res = run(&cli, &mut buf);
        (res, String::from_utf8(buf).unwrap())
    }

    #[test]
    fn score_prints_breakdown() {
        let (res, text) = run_args(&[
            "score", "--embed", "256", "--ratio", "4", "--heads", "4", "--depth", "4", "--csv",
        ]);
        res.unwrap();
        assert!(text.starts_with("config command=score seed=0 timesteps=4 image_size=32x32"));
        assert!(text.contains("snn_total    687865856\n"));
        assert!(text.contains("total_params 4126048\n"));
        assert!(text.contains("37748736,134217728,171966464,687865856,4126048\n"));
    }

    #[test]
    fn score_rejects_off_grid() {
        let (res, _) = run_args(&[
            "score", "--embed", "200", "--ratio", "4", "--heads", "4", "--depth", "2", "--tier", "tiny",
        ]);
        let err = res.unwrap_err();
        assert_eq!(err.exit_code(), EXIT_VALIDATION);
        assert!(err.to_string().contains("embed_dim off grid"));
    }

    #[test]
    fn infeasible_exit_code() {
        let err = CliError::Lib(Error::Infeasible {
            tier: "tiny".into(),
            min: 1,
            max: 2,
            attempts: 3,
        });
        assert_eq!(err.exit_code(), EXIT_INFEASIBLE);
        assert_eq!(CliError::Verification("x".into()).exit_code(), EXIT_VERIFICATION);
        assert_eq!(
            CliError::Lib(Error::Io(std::io::Error::other("x"))).exit_code(),
            EXIT_IO
        );
    }

    #[test]
    fn verify_detects_corruption() {
        let (res, text) = run_args(&[
            "verify",
            "--embed",
            "192",
            "--ratio",
            "3",
            "--heads",
            "4",
            "--depth",
            "1",
            "--corrupt-counter",
            "sa",
        ]);
        assert_eq!(res.unwrap_err().exit_code(), EXIT_VERIFICATION);
        assert!(text.contains("sa_macs lhs="));
        assert!(text.contains("FAIL"));
    }
}
