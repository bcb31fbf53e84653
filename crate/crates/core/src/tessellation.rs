//! Monochromatic tessellation of an enclosing ellipsoid.
//!
//! Inside the ellipsoid of a within-cluster sample, axis coordinates are
//! bucketed into signed geometric intervals: level 0 covers |t| ≤ β_i, level
//! ±j covers β_i(1+α)^(j−1) < |t| ≤ β_i(1+α)^j. With the constants below,
//! every nonempty cell is monochromatic for any clustering whose margin is
//! at least the γ used to build them, so one oracle query labels a whole
//! cell.
//!
//! With c = √5 and Φ the rounding stretch of the enclosing ellipsoid
//! (1+ε for the weight iteration), the constants per axis of length L_i are
//!
//! ```text
//! α = γ / (c·√2·Φ·r)
//! β_i = γ/(c·√(2r)) · L_i/(Φ·r)        (so L_i/β_i = c·Φ·r·√(2r)/γ)
//! b = max(0, ⌈log_{1+α}(c·Φ·r·√(2r)/γ)⌉)
//! ```
//!
//! γ is clamped to 1/2: larger margins reuse the γ = 1/2 construction.

use serde::Serialize;
use thiserror::Error;

use crate::geometry::{mvee, Ellipsoid, GeometryError};
use crate::oracle::{OracleError, SameClusterOracle};
use crate::points::PointSet;
use std::collections::BTreeMap;

/// The tessellation constant c = √5.
pub const TESS_C: f64 = 2.236_067_977_499_79;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TessellationError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("sample of known cluster members must be nonempty")]
    EmptySample,
    #[error("gamma must be positive")]
    NonPositiveGamma,
}

/// Constants of the monochromatic tessellation for one ellipsoid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TessParams {
    /// The margin actually used: min(requested γ, 1/2).
    pub gamma_eff: f64,
    /// The constant √5.
    pub c: f64,
    /// Rounding stretch of the enclosing ellipsoid.
    pub phi: f64,
    /// Geometric growth rate of the interval lengths, ρ = 1+α.
    pub alpha: f64,
    /// Number of geometric levels covering each semiaxis.
    pub b: u32,
    /// Base interval length per axis.
    pub beta: Vec<f64>,
}

/// Tessellation constants for an ellipsoid of the given rank and semiaxis
/// lengths, under rounding stretch `phi`.
pub fn tess_params(rank: usize, gamma: f64, semiaxes: &[f64], phi: f64) -> TessParams {
    assert!(rank >= 1, "tessellation requires rank >= 1");
    assert!(gamma > 0.0, "gamma must be positive");
    assert!(phi >= 1.0, "rounding stretch must be at least 1");
    assert_eq!(semiaxes.len(), rank);
    assert!(semiaxes.iter().all(|&l| l > 0.0), "semiaxes must be positive");

    let gamma_eff = gamma.min(0.5);
    let r = rank as f64;
    let alpha = gamma_eff / (TESS_C * 2.0_f64.sqrt() * phi * r);
    let ratio = TESS_C * phi * r * (2.0 * r).sqrt() / gamma_eff; // L_i / beta_i
    let beta: Vec<f64> = semiaxes.iter().map(|&l| l / ratio).collect();
    let b_real = (ratio.ln() / alpha.ln_1p()).ceil();
    let b = if b_real > 0.0 { b_real as u32 } else { 0 };
    TessParams { gamma_eff, c: TESS_C, phi, alpha, b, beta }
}

/// Signed per-axis geometric level identifying a hyperrectangle.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct CellKey(pub Vec<i32>);

/// Maps a point of the ellipsoid to its cell. Levels marginally pushed past
/// the outermost interval by floating point are clamped to ±b (coverage of
/// the ellipsoid is guaranteed, so the point belongs to that interval).
pub fn cell_key(e: &Ellipsoid, params: &TessParams, y: &[f64]) -> Result<CellKey, GeometryError> {
    assert!(e.rank() >= 1, "cell indexing requires rank >= 1");
    let q = e.quadform(y).ok_or(GeometryError::NotInEllipsoid)?;
    if q > 1.0 + crate::geometry::MEMBERSHIP_TOL {
        return Err(GeometryError::NotInEllipsoid);
    }
    let (t, _) = e.axis_coords(y);
    let ln_rho = params.alpha.ln_1p();
    let mut levels = Vec::with_capacity(e.rank());
    for (ti, &bi) in t.iter().zip(&params.beta) {
        let a = ti.abs() / bi;
        let level = if a <= 1.0 {
            0
        } else {
            let raw = (a.ln() / ln_rho).ceil();
            let clamped = raw.min(params.b as f64).max(1.0) as i32;
            if *ti < 0.0 {
                -clamped
            } else {
                clamped
            }
        };
        levels.push(level);
    }
    Ok(CellKey(levels))
}

/// One tessellation cell as probed during a run.
#[derive(Debug, Clone, Serialize)]
pub struct TessCell {
    pub key: CellKey,
    /// Ids mapped to the cell, ascending.
    pub point_ids: Vec<usize>,
    /// The id whose query labeled the cell (lowest id of the cell).
    pub probe: usize,
    pub answer: i8,
}

/// Result of learning one cluster chunk.
#[derive(Debug, Clone)]
pub struct TessOutcome {
    /// The known sample plus every point of a cell answered +1, ascending.
    pub recovered: Vec<usize>,
    /// Oracle queries issued: the number of distinct nonempty cells.
    pub queries: u64,
    pub rank: usize,
    /// None for rank 0 (the ellipsoid is a single point, one cell).
    pub params: Option<TessParams>,
    pub cells: Vec<TessCell>,
    pub ellipsoid: Ellipsoid,
}

impl TessOutcome {
    /// Debug dump of the tessellation (cells, sizes, labels) for inspection.
    pub fn to_debug_json(&self) -> String {
        #[derive(Serialize)]
        struct Dump<'a> {
            rank: usize,
            queries: u64,
            params: &'a Option<TessParams>,
            cells: Vec<CellDump<'a>>,
        }
        #[derive(Serialize)]
        struct CellDump<'a> {
            key: &'a [i32],
            size: usize,
            probe: usize,
            answer: i8,
        }
        let dump = Dump {
            rank: self.rank,
            queries: self.queries,
            params: &self.params,
            cells: self
                .cells
                .iter()
                .map(|c| CellDump {
                    key: &c.key.0,
                    size: c.point_ids.len(),
                    probe: c.probe,
                    answer: c.answer,
                })
                .collect(),
        };
        serde_json::to_string_pretty(&dump).expect("tessellation dump serializes")
    }
}

/// Learns `C ∩ E` where `E` is the enclosing ellipsoid of the sample `s_c`
/// (all latently in one cluster) and `C` that cluster, provided `gamma` is
/// at most the cluster's true margin.
///
/// `candidates` are the unlabeled ids to classify (callers pass the residual
/// set minus `s_c`). Candidates inside `E` are grouped by cell; each
/// nonempty cell costs exactly one query between the lowest id of `s_c` and
/// the lowest id of the cell, issued in cell-key order.
pub fn tessellation_learn<O: SameClusterOracle>(
    pts: &PointSet,
    candidates: &[usize],
    s_c: &[usize],
    gamma: f64,
    mvee_epsilon: f64,
    oracle: &mut O,
) -> Result<TessOutcome, TessellationError> {
    if s_c.is_empty() {
        return Err(TessellationError::EmptySample);
    }
    if !(gamma > 0.0) {
        return Err(TessellationError::NonPositiveGamma);
    }
    let (ellipsoid, cert) = mvee(pts, s_c, mvee_epsilon)?;
    let x_c = *s_c.iter().min().expect("nonempty sample");

    let mut recovered: Vec<usize> = s_c.to_vec();
    let mut cells: Vec<TessCell> = Vec::new();

    if ellipsoid.rank() == 0 {
        // Degenerate sample: the ellipsoid is a single point, one cell.
        let mut members: Vec<usize> =
            candidates.iter().copied().filter(|&i| ellipsoid.contains(pts.point(i))).collect();
        members.sort_unstable();
        if !members.is_empty() {
            let probe = members[0];
            let answer = oracle.scq(x_c, probe)?;
            if answer == 1 {
                recovered.extend(&members);
            }
            cells.push(TessCell { key: CellKey(Vec::new()), point_ids: members, probe, answer });
        }
        recovered.sort_unstable();
        recovered.dedup();
        let queries = cells.len() as u64;
        return Ok(TessOutcome {
            recovered,
            queries,
            rank: 0,
            params: None,
            cells,
            ellipsoid,
        });
    }

    let params = tess_params(ellipsoid.rank(), gamma, ellipsoid.semiaxes(), 1.0 + cert.epsilon);

    let mut groups: BTreeMap<CellKey, Vec<usize>> = BTreeMap::new();
    for &id in candidates {
        let p = pts.point(id);
        if ellipsoid.contains(p) {
            let key = cell_key(&ellipsoid, &params, p).expect("member has a cell");
            groups.entry(key).or_default().push(id);
        }
    }

    for (key, mut members) in groups {
        members.sort_unstable();
        let probe = members[0];
        let answer = oracle.scq(x_c, probe)?;
        if answer == 1 {
            recovered.extend(&members);
        }
        cells.push(TessCell { key, point_ids: members, probe, answer });
    }
    recovered.sort_unstable();
    recovered.dedup();

    let queries = cells.len() as u64;
    Ok(TessOutcome {
        recovered,
        queries,
        rank: ellipsoid.rank(),
        params: Some(params),
        cells,
        ellipsoid,
    })
}
