//! Rank correlation between metric scores and measured accuracies.
//!
//! Kendall's tau-b is computed with Knight's O(n log n) algorithm; Spearman's
//! rho is the Pearson correlation of average ranks.

use std::cmp::Ordering;
use std::io;

use serde::{Deserialize, Serialize};

use crate::cost_model::flops_snn;
use crate::error::{Error, Result};
use crate::genome::{validate, ArchGenome, RunConfig, SearchSpaceTier};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoredSample {
    pub genome: ArchGenome,
    pub score: f64,
    /// Percent, in `[0, 100]`.
    pub accuracy: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    pub kendall: f64,
    pub spearman: f64,
    pub n: usize,
}

impl CorrelationReport {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("report serializes")
    }
}

fn check_input(pairs: &[(f64, f64)]) -> Result<()> {
    if pairs.len() < 2 {
        return Err(Error::InsufficientSamples(pairs.len()));
    }
    if pairs.iter().any(|(x, y)| x.is_nan() || y.is_nan()) {
        return Err(Error::NotANumber("rank correlation"));
    }
    Ok(())
}

fn cmp(a: f64, b: f64) -> Ordering {
    a.partial_cmp(&b).expect("NaN filtered")
}

/// Sum of `t (t - 1) / 2` over runs of equal keys in an already sorted slice.
fn tied_pairs<T>(sorted: &[T], eq: impl Fn(&T, &T) -> bool) -> u64 {
    let mut total = 0u64;
    let mut run = 1u64;
    for w in sorted.windows(2) {
        if eq(&w[0], &w[1]) {
            run += 1;
        } else {
            total += run * (run - 1) / 2;
            run = 1;
        }
    }
    total + run * (run - 1) / 2
}

/// Stable merge sort by `y`, returning the number of inversions.
fn sort_counting_swaps(v: &mut [(f64, f64)], buf: &mut Vec<(f64, f64)>) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut swaps = sort_counting_swaps(&mut v[..mid], buf) + sort_counting_swaps(&mut v[mid..], buf);
    buf.clear();
    let (mut i, mut j) = (0, mid);
    while i < mid && j < n {
        if v[j].1 < v[i].1 {
            swaps += (mid - i) as u64;
            buf.push(v[j]);
            j += 1;
        } else {
            buf.push(v[i]);
            i += 1;
        }
    }
    buf.extend_from_slice(&v[i..mid]);
    buf.extend_from_slice(&v[j..n]);
    v.copy_from_slice(buf);
    swaps
}

/// Kendall's tau-b: `(C - D) / sqrt((n0 - tx) (n0 - ty))`.
pub fn kendall_tau(pairs: &[(f64, f64)]) -> Result<f64> {
    check_input(pairs)?;
    let n = pairs.len() as u64;
    let n0 = n * (n - 1) / 2;

    let mut v = pairs.to_vec();
    v.sort_by(|a, b| cmp(a.0, b.0).then(cmp(a.1, b.1)));
    let tx = tied_pairs(&v, |a, b| a.0 == b.0);
    let txy = tied_pairs(&v, |a, b| a.0 == b.0 && a.1 == b.1);

    let swaps = sort_counting_swaps(&mut v, &mut Vec::with_capacity(pairs.len()));
    let ty = tied_pairs(&v, |a, b| a.1 == b.1);

    if tx == n0 {
        return Err(Error::Degenerate("all x values tied"));
    }
    if ty == n0 {
        return Err(Error::Degenerate("all y values tied"));
    }
    // C - D = n0 - tx - ty + txy - 2 * swaps
    let numer = n0 as f64 - tx as f64 - ty as f64 + txy as f64 - 2.0 * swaps as f64;
    let denom = ((n0 - tx) as f64 * (n0 - ty) as f64).sqrt();
    Ok((numer / denom).clamp(-1.0, 1.0))
}

/// 1-based ranks with ties sharing their mean rank.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| cmp(values[a], values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        let mean = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = mean;
        }
        start = end;
    }
    ranks
}

fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Degenerate("zero rank variance"));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Spearman's rho over average ranks.
pub fn spearman_rho(pairs: &[(f64, f64)]) -> Result<f64> {
    check_input(pairs)?;
    let xs: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    pearson(&average_ranks(&xs), &average_ranks(&ys))
}

pub fn correlate(samples: &[ScoredSample]) -> Result<CorrelationReport> {
    if let Some(s) = samples.iter().find(|s| !(0.0..=100.0).contains(&s.accuracy)) {
        return Err(Error::Parse(format!("accuracy {} outside [0, 100]", s.accuracy)));
    }
    let pairs: Vec<(f64, f64)> = samples.iter().map(|s| (s.score, s.accuracy)).collect();
    Ok(CorrelationReport {
        kendall: kendall_tau(&pairs)?,
        spearman: spearman_rho(&pairs)?,
        n: pairs.len(),
    })
}

pub const ACCURACY_CSV_HEADER: [&str; 6] = ["tier", "embed_dim", "mlp_ratio", "num_heads", "depth", "accuracy"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyRow {
    pub tier: String,
    pub embed_dim: u32,
    pub mlp_ratio: u32,
    pub num_heads: u32,
    pub depth: u32,
    pub accuracy: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub score: Option<f64>,
}

/// Reads `tier, embed_dim, mlp_ratio, num_heads, depth, accuracy` rows, with
/// an optional trailing `score` column. Genomes are validated against the
/// tier returned by `resolve`; missing scores are recomputed with `cfg`.
pub fn read_accuracy_csv<R: io::Read>(
    input: R,
    cfg: &RunConfig,
    resolve: impl Fn(&str) -> Option<SearchSpaceTier>,
) -> Result<Vec<ScoredSample>> {
    let mut r = csv::Reader::from_reader(input);
    let headers: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
    let ok = headers.len() >= 6
        && headers[..6] == ACCURACY_CSV_HEADER
        && (headers.len() == 6 || (headers.len() == 7 && headers[6] == "score"));
    if !ok {
        return Err(Error::Parse(format!(
            "expected columns {ACCURACY_CSV_HEADER:?} with optional score, found {headers:?}"
        )));
    }
    let mut out = Vec::new();
    for (line, row) in r.deserialize::<AccuracyRow>().enumerate() {
        let row = row?;
        let tier =
            resolve(&row.tier).ok_or_else(|| Error::Parse(format!("row {}: unknown tier {:?}", line + 1, row.tier)))?;
        let genome = ArchGenome::new(row.embed_dim, row.mlp_ratio, row.num_heads, row.depth);
        validate(&genome, &tier).into_result()?;
        let score = match row.score {
            Some(s) => s,
            None => flops_snn(&genome, cfg)?.snn_total as f64,
        };
        out.push(ScoredSample {
            genome,
            score,
            accuracy: row.accuracy,
        });
    }
    Ok(out)
}

pub fn write_accuracy_csv<W: io::Write>(out: W, rows: &[AccuracyRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}
