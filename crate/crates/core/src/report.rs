//! CSV reporting: per-round trajectories and cross-algorithm comparisons.
//! Schemas are stable; a header row is always present.

use std::io::{self, Write};

use crate::recur::{clustering_error, RoundStats};

/// Clustering error after each round, computed from the per-round assigned
/// id lists against the latent labels.
pub fn progressive_errors(
    n: usize,
    per_round: &[(usize, Vec<usize>)],
    labels: &[usize],
    k: usize,
) -> Vec<f64> {
    let mut assignment: Vec<Option<usize>> = vec![None; n];
    let mut errors = Vec::with_capacity(per_round.len());
    for (local, ids) in per_round {
        for &id in ids {
            assignment[id] = Some(*local);
        }
        errors.push(clustering_error(&assignment, labels, k));
    }
    errors
}

/// `round,cluster_local_id,sample_size,recovered,residual,queries_cumulative,error_so_far,wall_time_s`
pub fn write_round_csv<W: Write>(
    mut out: W,
    rounds: &[RoundStats],
    errors: &[f64],
) -> io::Result<()> {
    writeln!(
        out,
        "round,cluster_local_id,sample_size,recovered,residual,queries_cumulative,error_so_far,wall_time_s"
    )?;
    for (r, stats) in rounds.iter().enumerate() {
        let err = errors.get(r).copied().unwrap_or(f64::NAN);
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            stats.round,
            stats.cluster_local_id,
            stats.sample_size,
            stats.recovered,
            stats.residual,
            stats.queries_cumulative,
            err,
            stats.wall_time_s
        )?;
    }
    Ok(())
}

/// One comparison measurement: an algorithm's error level after a given
/// cumulative query count.
#[derive(Debug, Clone, PartialEq)]
pub struct CompareRow {
    pub algo: String,
    pub seed: u64,
    pub round: usize,
    pub queries_cumulative: u64,
    pub error: f64,
}

/// `algo,seed,round,queries_cumulative,error`, sorted by (algo, seed, round).
pub fn write_compare_csv<W: Write>(mut out: W, rows: &[CompareRow]) -> io::Result<()> {
    let mut sorted: Vec<&CompareRow> = rows.iter().collect();
    sorted.sort_by(|a, b| {
        a.algo.cmp(&b.algo).then(a.seed.cmp(&b.seed)).then(a.round.cmp(&b.round))
    });
    writeln!(out, "algo,seed,round,queries_cumulative,error")?;
    for row in sorted {
        writeln!(
            out,
            "{},{},{},{},{}",
            row.algo, row.seed, row.round, row.queries_cumulative, row.error
        )?;
    }
    Ok(())
}
