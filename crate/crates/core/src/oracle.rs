//! Simulated same-cluster-query oracle with exact query accounting.

use std::io::Write;

use thiserror::Error;

use crate::geometry::{margin_of_clustering, ClusterMetric, GeometryError};
use crate::points::PointSet;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("point id {0} out of range")]
    InvalidId(usize),
}

/// Ground truth: the input points, their latent labels, the number of
/// clusters, the declared margin, and (optionally) the per-cluster metrics
/// that witness it.
#[derive(Debug, Clone)]
pub struct LatentInstance {
    pub points: PointSet,
    pub labels: Vec<usize>,
    pub k: usize,
    pub gamma: f64,
    pub metrics: Option<Vec<ClusterMetric>>,
    pub provenance: Option<crate::instances::Provenance>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InstanceValidationError {
    #[error("labels length {got} does not match point count {expected}")]
    LabelCount { expected: usize, got: usize },
    #[error("cluster {0} has no points")]
    MissingCluster(usize),
    #[error("label {0} out of range for k clusters")]
    LabelRange(usize),
    #[error("k must be at least 2")]
    TooFewClusters,
    #[error("gamma must be positive")]
    NonPositiveGamma,
    #[error("metrics count does not match k")]
    MetricCount,
    #[error("margin check failed: cluster {cluster} has margin {got}, declared {declared}")]
    MarginViolation { cluster: usize, got: f64, declared: f64 },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

impl LatentInstance {
    /// Checks the structural invariants and, when metrics are present, that
    /// every cluster's margin is at least the declared gamma.
    pub fn validate(&self) -> Result<(), InstanceValidationError> {
        if self.k < 2 {
            return Err(InstanceValidationError::TooFewClusters);
        }
        if !(self.gamma > 0.0) {
            return Err(InstanceValidationError::NonPositiveGamma);
        }
        if self.labels.len() != self.points.len() {
            return Err(InstanceValidationError::LabelCount {
                expected: self.points.len(),
                got: self.labels.len(),
            });
        }
        let mut seen = vec![false; self.k];
        for &l in &self.labels {
            if l >= self.k {
                return Err(InstanceValidationError::LabelRange(l));
            }
            seen[l] = true;
        }
        if let Some(c) = seen.iter().position(|&s| !s) {
            return Err(InstanceValidationError::MissingCluster(c));
        }
        if let Some(metrics) = &self.metrics {
            if metrics.len() != self.k {
                return Err(InstanceValidationError::MetricCount);
            }
            let margins = self.margins()?.expect("metrics are present");
            for (c, &m) in margins.iter().enumerate() {
                // Slack covers constructions whose margin equals gamma exactly.
                if m < self.gamma * (1.0 - 1e-9) - 1e-12 {
                    return Err(InstanceValidationError::MarginViolation {
                        cluster: c,
                        got: m,
                        declared: self.gamma,
                    });
                }
            }
        }
        Ok(())
    }

    /// Per-cluster margin values, or None when no metrics are attached.
    pub fn margins(&self) -> Result<Option<Vec<f64>>, GeometryError> {
        match &self.metrics {
            Some(metrics) => {
                Ok(Some(margin_of_clustering(&self.points, &self.labels, metrics)?))
            }
            None => Ok(None),
        }
    }

    pub fn n(&self) -> usize {
        self.points.len()
    }

    pub fn dim(&self) -> usize {
        self.points.dim()
    }
}

/// Monotone query counter with an optional append-only transcript.
#[derive(Debug, Clone, Default)]
pub struct QueryLedger {
    count: u64,
    transcript: Option<Vec<(usize, usize, i8)>>,
}

impl QueryLedger {
    pub fn new() -> Self {
        Self { count: 0, transcript: None }
    }

    pub fn with_transcript() -> Self {
        Self { count: 0, transcript: Some(Vec::new()) }
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn record(&mut self, i: usize, j: usize, answer: i8) {
        self.count += 1;
        if let Some(t) = &mut self.transcript {
            t.push((i, j, answer));
        }
    }

    pub fn transcript(&self) -> Option<&[(usize, usize, i8)]> {
        self.transcript.as_deref()
    }

    /// CSV dump of the transcript: `seq,i,j,answer`.
    pub fn write_transcript_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "seq,i,j,answer")?;
        if let Some(t) = &self.transcript {
            for (seq, (i, j, a)) in t.iter().enumerate() {
                writeln!(out, "{seq},{i},{j},{a}")?;
            }
        }
        Ok(())
    }
}

/// Answers +1 iff the two ids share a latent cluster. Every call (including
/// i = j) increments the ledger by exactly one.
pub trait SameClusterOracle {
    fn scq(&mut self, i: usize, j: usize) -> Result<i8, OracleError>;
    fn queries(&self) -> u64;
}

/// The standard oracle over a latent instance.
pub struct SimulatedOracle<'a> {
    labels: &'a [usize],
    ledger: QueryLedger,
}

impl<'a> SimulatedOracle<'a> {
    pub fn new(instance: &'a LatentInstance) -> Self {
        Self { labels: &instance.labels, ledger: QueryLedger::new() }
    }

    pub fn with_transcript(instance: &'a LatentInstance) -> Self {
        Self { labels: &instance.labels, ledger: QueryLedger::with_transcript() }
    }

    pub fn ledger(&self) -> &QueryLedger {
        &self.ledger
    }
}

impl SameClusterOracle for SimulatedOracle<'_> {
    fn scq(&mut self, i: usize, j: usize) -> Result<i8, OracleError> {
        let n = self.labels.len();
        if i >= n {
            return Err(OracleError::InvalidId(i));
        }
        if j >= n {
            return Err(OracleError::InvalidId(j));
        }
        let answer = if self.labels[i] == self.labels[j] { 1 } else { -1 };
        self.ledger.record(i, j, answer);
        Ok(answer)
    }

    fn queries(&self) -> u64 {
        self.ledger.count()
    }
}

/// Labels each id in `ids` by querying it against the representatives in
/// discovery order until a +1; an id answering −1 to every representative
/// becomes the representative of a new local cluster.
///
/// Uses at most `k·|ids|` queries and never mislabels: the local→latent
/// label map is an injection on every run.
pub fn label_with_representatives<O: SameClusterOracle>(
    oracle: &mut O,
    ids: &[usize],
    reps: &mut Vec<usize>,
) -> Result<Vec<usize>, OracleError> {
    let mut labels = Vec::with_capacity(ids.len());
    for &id in ids {
        let mut found = None;
        for (local, &rep) in reps.iter().enumerate() {
            if oracle.scq(rep, id)? == 1 {
                found = Some(local);
                break;
            }
        }
        let local = match found {
            Some(l) => l,
            None => {
                reps.push(id);
                reps.len() - 1
            }
        };
        labels.push(local);
    }
    Ok(labels)
}
