//! Baseline clusterer: estimate a cluster's centroid from a labeled sample,
//! sort the residual by Euclidean distance to it, and binary-search the
//! cluster radius with same-cluster queries. One shot per cluster, k rounds.
//!
//! Correct when clusters are Euclidean balls around their own centroids with
//! margin; under anisotropic latent metrics the distance ordering interleaves
//! clusters and the binary search overshoots or truncates.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::oracle::{label_with_representatives, OracleError, SameClusterOracle};
use crate::points::PointSet;
use crate::recur::{RecoveredClustering, RoundStats};
use crate::seeding;

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineConfig {
    /// Sample size for the centroid estimate of each round.
    pub phase1_samples: usize,
    pub rng_seed: u64,
}

impl BaselineConfig {
    /// Default phase-1 sample size: min(n, ⌈k·ln(k)/γ⁴⌉), capped at 10·k for
    /// desk scale.
    pub fn with_default_samples(n: usize, k: usize, gamma: f64, rng_seed: u64) -> Self {
        let theoretical = (k as f64 * (k as f64).ln() / gamma.powi(4)).ceil();
        let samples = (theoretical as usize).min(n).min(10 * k).max(1);
        Self { phase1_samples: samples, rng_seed }
    }
}

#[derive(Debug, Error)]
pub enum BaselineError {
    #[error("degenerate sample: no majority label")]
    DegenerateSample,
    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

/// Runs the k-round centroid/binary-search baseline. `trace`, when given,
/// receives (local id, assigned ids) per round for reporting.
pub fn scq_kmeans<O: SameClusterOracle>(
    pts: &PointSet,
    k: usize,
    _gamma: f64,
    config: &BaselineConfig,
    oracle: &mut O,
    mut trace: Option<&mut Vec<(usize, Vec<usize>)>>,
) -> Result<RecoveredClustering, BaselineError> {
    if k < 2 {
        return Err(BaselineError::InvalidConfig("k must be at least 2"));
    }
    if config.phase1_samples == 0 {
        return Err(BaselineError::InvalidConfig("phase1_samples must be at least 1"));
    }
    let n = pts.len();
    let d = pts.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seeding::derive(config.rng_seed, "scq-kmeans"));

    let mut assignment: Vec<Option<usize>> = vec![None; n];
    let mut residual: Vec<usize> = (0..n).collect();
    let mut rounds: Vec<RoundStats> = Vec::new();

    for round in 0..k {
        if residual.is_empty() {
            break;
        }
        let t_round = Instant::now();

        // Phase 1: centroid estimate from the majority label of a sample.
        let sample: Vec<usize> = (0..config.phase1_samples)
            .map(|_| residual[rng.gen_range(0..residual.len())])
            .collect();
        let mut reps: Vec<usize> = Vec::new();
        let locals = label_with_representatives(oracle, &sample, &mut reps)?;
        let n_locals = locals.iter().copied().max().map_or(0, |m| m + 1);
        let mut counts = vec![0usize; n_locals];
        for &l in &locals {
            counts[l] += 1;
        }
        let majority = counts
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
            .map(|(l, _)| l)
            .ok_or(BaselineError::DegenerateSample)?;
        let majority_ids: Vec<usize> = sample
            .iter()
            .zip(&locals)
            .filter(|(_, &l)| l == majority)
            .map(|(&id, _)| id)
            .collect();
        let known = *majority_ids.first().ok_or(BaselineError::DegenerateSample)?;
        let mut mu = vec![0.0f64; d];
        for &id in &majority_ids {
            for (m, v) in mu.iter_mut().zip(pts.point(id)) {
                *m += v / majority_ids.len() as f64;
            }
        }

        // Phase 2: sort by distance to the estimate and binary-search the
        // largest prefix answering +1 against the known member.
        let mut order: Vec<(f64, usize)> = residual
            .iter()
            .map(|&id| {
                let dist2: f64 =
                    pts.point(id).iter().zip(&mu).map(|(a, b)| (a - b) * (a - b)).sum();
                (dist2, id)
            })
            .collect();
        order.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));

        let m = order.len() as i64;
        let mut lo: i64 = -1;
        let mut hi: i64 = m - 1;
        while lo < hi {
            let mid = lo + (hi - lo + 1) / 2;
            if oracle.scq(known, order[mid as usize].1)? == 1 {
                lo = mid;
            } else {
                hi = mid - 1;
            }
        }

        let mut assigned: Vec<usize> = (0..=lo).map(|i| order[i as usize].1).collect();
        assigned.extend(&majority_ids);
        assigned.sort_unstable();
        assigned.dedup();
        for &id in &assigned {
            assignment[id] = Some(round);
        }
        residual.retain(|&id| assignment[id].is_none());

        rounds.push(RoundStats {
            round: rounds.len(),
            cluster_local_id: round,
            sample_size: config.phase1_samples,
            recovered: assigned.len(),
            residual: residual.len(),
            queries_cumulative: oracle.queries(),
            wall_time_s: t_round.elapsed().as_secs_f64(),
        });
        if let Some(tr) = trace.as_deref_mut() {
            tr.push((round, assigned));
        }
    }

    // Leftover points go to the last cluster.
    if !residual.is_empty() {
        let leftover = residual.clone();
        for &id in &leftover {
            assignment[id] = Some(k - 1);
        }
        rounds.push(RoundStats {
            round: rounds.len(),
            cluster_local_id: k - 1,
            sample_size: 0,
            recovered: leftover.len(),
            residual: 0,
            queries_cumulative: oracle.queries(),
            wall_time_s: 0.0,
        });
        if let Some(tr) = trace.as_deref_mut() {
            tr.push((k - 1, leftover));
        }
    }

    Ok(RecoveredClustering { assignment, rounds })
}
