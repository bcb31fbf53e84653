//! Outer recovery loop: sample the residual set until one latent cluster
//! hits its quota (or take the best of a fixed batch), learn that cluster's
//! chunk through the monochromatic tessellation, remove it, repeat. Always
//! correct for any fed γ at most the true margin; only queries and round
//! counts are random.

mod assignment;
mod expansion;

pub use assignment::clustering_error;
pub use expansion::{expansion_rate, greedy_hull_expansion};

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::geometry::GeometryError;
use crate::oracle::{label_with_representatives, OracleError, SameClusterOracle};
use crate::points::PointSet;
use crate::seeding;
use crate::tessellation::{tessellation_learn, TessOutcome, TessellationError};

#[derive(Debug, Clone, PartialEq)]
pub enum SamplingMode {
    /// Sample until some cluster's draw count reaches
    /// ceil(b_const · d² · ln k); d is the ambient dimension (the span is
    /// unknown before sampling).
    Quota { b_const: f64 },
    /// Draw exactly `m` samples and take the cluster with the largest count
    /// (ties to the lowest local id).
    Batch { m: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecurConfig {
    /// Target residual fraction in [0, 1]; 0 means exact recovery.
    pub epsilon: f64,
    pub sampling_mode: SamplingMode,
    pub use_hull_expansion: bool,
    pub mvee_epsilon: f64,
    pub rng_seed: u64,
}

impl Default for RecurConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.0,
            sampling_mode: SamplingMode::Quota { b_const: 1.0 },
            use_hull_expansion: false,
            mvee_epsilon: 1e-3,
            rng_seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundStats {
    pub round: usize,
    pub cluster_local_id: usize,
    /// Oracle-labeled draws this round (duplicates included).
    pub sample_size: usize,
    /// Points assigned this round (sample, absorbed and tessellated).
    pub recovered: usize,
    /// Residual points left after the round.
    pub residual: usize,
    pub queries_cumulative: u64,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone)]
pub struct RecoveredClustering {
    /// Local cluster id per point; None marks points left unlabeled under
    /// epsilon > 0.
    pub assignment: Vec<Option<usize>>,
    pub rounds: Vec<RoundStats>,
}

impl RecoveredClustering {
    pub fn unlabeled(&self) -> usize {
        self.assignment.iter().filter(|a| a.is_none()).count()
    }
}

/// Per-round internals for audits and reporting.
#[derive(Debug, Default)]
pub struct RunTrace {
    pub rounds: Vec<RoundTrace>,
}

#[derive(Debug)]
pub struct RoundTrace {
    pub local_id: usize,
    /// Distinct sampled ids that seeded the round.
    pub seed_sample: Vec<usize>,
    /// Ids absorbed by hull expansion (empty when disabled).
    pub absorbed: Vec<usize>,
    /// Everything assigned this round.
    pub assigned: Vec<usize>,
    /// Tessellation passes of the round (one unless expansion re-triggers).
    pub tess: Vec<TessOutcome>,
}

#[derive(Debug, Error)]
pub enum RecurError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("no cluster reached its sampling quota after {draws} draws; is k configured correctly?")]
    QuotaStall { draws: usize },
    #[error(transparent)]
    Tessellation(#[from] TessellationError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

fn label_of<O: SameClusterOracle>(
    oracle: &mut O,
    reps: &mut Vec<usize>,
    cache: &mut [Option<usize>],
    id: usize,
) -> Result<usize, OracleError> {
    if let Some(l) = cache[id] {
        return Ok(l);
    }
    let l = label_with_representatives(oracle, &[id], reps)?[0];
    cache[id] = Some(l);
    Ok(l)
}

/// Recovers the latent clustering of `pts` using same-cluster queries,
/// leaving at most `epsilon·n` points unlabeled (all labeled points are
/// correct whenever `gamma` is at most the true margin).
pub fn recur<O: SameClusterOracle>(
    pts: &PointSet,
    k: usize,
    gamma: f64,
    config: &RecurConfig,
    oracle: &mut O,
    mut trace: Option<&mut RunTrace>,
) -> Result<RecoveredClustering, RecurError> {
    if k < 2 {
        return Err(RecurError::InvalidConfig("k must be at least 2"));
    }
    if !(gamma > 0.0) {
        return Err(RecurError::InvalidConfig("gamma must be positive"));
    }
    if !(0.0..=1.0).contains(&config.epsilon) {
        return Err(RecurError::InvalidConfig("epsilon must lie in [0, 1]"));
    }
    if !(config.mvee_epsilon > 0.0) {
        return Err(RecurError::InvalidConfig("mvee epsilon must be positive"));
    }
    match config.sampling_mode {
        SamplingMode::Quota { b_const } if !(b_const > 0.0) => {
            return Err(RecurError::InvalidConfig("quota constant must be positive"));
        }
        SamplingMode::Batch { m } if m < k => {
            return Err(RecurError::InvalidConfig("batch size must be at least k"));
        }
        _ => {}
    }

    let n = pts.len();
    let d = pts.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seeding::derive(config.rng_seed, "recur-sampler"));

    let mut assignment: Vec<Option<usize>> = vec![None; n];
    let mut residual: Vec<usize> = (0..n).collect();
    let mut reps: Vec<usize> = Vec::new();
    let mut label_cache: Vec<Option<usize>> = vec![None; n];
    let mut round_stamp: Vec<u32> = vec![0; n];
    let mut rounds: Vec<RoundStats> = Vec::new();

    let mut round: u32 = 0;
    while residual.len() as f64 > config.epsilon * n as f64 {
        round += 1;
        let t_round = Instant::now();

        // Sampling: label draws from the residual set until a cluster wins.
        let mut counts: Vec<usize> = Vec::new();
        let mut distinct: Vec<Vec<usize>> = Vec::new();
        let mut draws = 0usize;
        let record = |id: usize,
                          local: usize,
                          counts: &mut Vec<usize>,
                          distinct: &mut Vec<Vec<usize>>,
                          round_stamp: &mut Vec<u32>| {
            if counts.len() <= local {
                counts.resize(local + 1, 0);
                distinct.resize(local + 1, Vec::new());
            }
            counts[local] += 1;
            if round_stamp[id] != round {
                round_stamp[id] = round;
                distinct[local].push(id);
            }
        };
        let winner = match config.sampling_mode {
            SamplingMode::Quota { b_const } => {
                let quota =
                    ((b_const * (d * d) as f64 * (k as f64).ln()).ceil() as usize).max(1);
                let budget = 10 * k * quota;
                loop {
                    if draws >= budget {
                        return Err(RecurError::QuotaStall { draws });
                    }
                    let id = residual[rng.gen_range(0..residual.len())];
                    draws += 1;
                    let local = label_of(oracle, &mut reps, &mut label_cache, id)?;
                    record(id, local, &mut counts, &mut distinct, &mut round_stamp);
                    if counts[local] >= quota {
                        break local;
                    }
                }
            }
            SamplingMode::Batch { m } => {
                for _ in 0..m {
                    let id = residual[rng.gen_range(0..residual.len())];
                    draws += 1;
                    let local = label_of(oracle, &mut reps, &mut label_cache, id)?;
                    record(id, local, &mut counts, &mut distinct, &mut round_stamp);
                }
                let mut best = 0usize;
                for l in 1..counts.len() {
                    if counts[l] > counts[best] {
                        best = l;
                    }
                }
                best
            }
        };

        let mut s_c: Vec<usize> = distinct[winner].clone();
        s_c.sort_unstable();
        let seed_sample = s_c.clone();

        // With expansion on, alternate (absorb, tessellate) until the
        // recovered set stops growing: the first tessellation fattens a
        // thin sample enough for the hull to take off. Without expansion a
        // single tessellation runs.
        let mut in_sc = vec![false; n];
        for &id in &s_c {
            in_sc[id] = true;
        }
        let mut absorbed_all: Vec<usize> = Vec::new();
        let mut tess_outcomes: Vec<TessOutcome> = Vec::new();
        loop {
            if config.use_hull_expansion {
                let others: Vec<usize> =
                    residual.iter().copied().filter(|&id| !in_sc[id]).collect();
                let absorbed = greedy_hull_expansion(
                    pts,
                    &s_c,
                    &others,
                    gamma,
                    1.0 + config.mvee_epsilon,
                )?;
                for &id in &absorbed {
                    in_sc[id] = true;
                    label_cache[id] = Some(winner);
                }
                s_c.extend(&absorbed);
                s_c.sort_unstable();
                absorbed_all.extend(absorbed);
            }

            let candidates: Vec<usize> =
                residual.iter().copied().filter(|&id| !in_sc[id]).collect();
            let out =
                tessellation_learn(pts, &candidates, &s_c, gamma, config.mvee_epsilon, oracle)?;
            let grew = out.recovered.len() > s_c.len();
            for &id in &out.recovered {
                if !in_sc[id] {
                    in_sc[id] = true;
                    label_cache[id] = Some(winner);
                }
            }
            s_c = out.recovered.clone();
            tess_outcomes.push(out);
            if !grew || !config.use_hull_expansion {
                break;
            }
        }

        for &id in &s_c {
            assignment[id] = Some(winner);
        }
        residual.retain(|&id| assignment[id].is_none());

        rounds.push(RoundStats {
            round: rounds.len(),
            cluster_local_id: winner,
            sample_size: draws,
            recovered: s_c.len(),
            residual: residual.len(),
            queries_cumulative: oracle.queries(),
            wall_time_s: t_round.elapsed().as_secs_f64(),
        });
        if let Some(tr) = trace.as_deref_mut() {
            tr.rounds.push(RoundTrace {
                local_id: winner,
                seed_sample,
                absorbed: absorbed_all,
                assigned: s_c,
                tess: tess_outcomes,
            });
        }
    }

    Ok(RecoveredClustering { assignment, rounds })
}
