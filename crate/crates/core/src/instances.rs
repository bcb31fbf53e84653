//! Margin-verified synthetic instance generators and JSON serialization.
//!
//! Every generator verifies the margin of its output against the declared
//! gamma before returning; an instance that fails the check is a bug or an
//! infeasible parameter set, never a silent return.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{ClusterMetric, GeometryError, PsdMetric};
use crate::oracle::{InstanceValidationError, LatentInstance};
use crate::points::PointSet;
use crate::seeding;

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("generation failed: {0}")]
    GenerationFailure(String),
    #[error("sphere packing produced fewer than 2 points (gamma too large for this dimension)")]
    PackingTooSmall,
    #[error("parse error: {0}")]
    ParseError(String),
    #[error("margin mismatch: {0}")]
    MarginMismatch(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// How an instance was produced: generator name, master seed, and the
/// numeric parameters (sorted by name for stable serialization).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub generator: String,
    pub seed: u64,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

fn params(entries: &[(&str, f64)]) -> BTreeMap<String, f64> {
    entries.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

/// Random rotation: QR of a Gaussian matrix, sign-fixed so the diagonal of R
/// is nonnegative (Haar-distributed).
fn random_rotation(rng: &mut ChaCha8Rng, d: usize) -> DMatrix<f64> {
    if d == 1 {
        return DMatrix::identity(1, 1);
    }
    let g = DMatrix::from_fn(d, d, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for i in 0..d {
        if r[(i, i)] < 0.0 {
            for row in 0..d {
                q[(row, i)] = -q[(row, i)];
            }
        }
    }
    q
}

fn unit_ball_sample(rng: &mut ChaCha8Rng, d: usize) -> DVector<f64> {
    loop {
        let g = DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal));
        let norm = g.norm();
        if norm > 1e-12 {
            let radius = rng.gen::<f64>().powf(1.0 / d as f64);
            return g * (radius / norm);
        }
    }
}

/// Ellipsoidal clusters with prescribed condition number.
///
/// Each cluster gets a random rotation and log-spaced eigenvalues with
/// λ_max/λ_min = kappa; points are sampled uniformly in the unit W-ball
/// around the cluster center. Centers sit on a lattice whose scale doubles
/// until every cluster's verified margin reaches gamma.
pub fn gen_ellipsoidal(
    n: usize,
    k: usize,
    d: usize,
    gamma: f64,
    kappa: f64,
    seed: u64,
) -> Result<LatentInstance, InstanceError> {
    if k < 2 || n < k {
        return Err(InstanceError::InvalidParameter("need n >= k >= 2"));
    }
    if d < 1 {
        return Err(InstanceError::InvalidParameter("dimension must be at least 1"));
    }
    if !(gamma > 0.0) {
        return Err(InstanceError::InvalidParameter("gamma must be positive"));
    }
    if !(kappa >= 1.0) {
        return Err(InstanceError::InvalidParameter("kappa must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seeding::derive(seed, "gen-ellipsoidal"));

    // Per-cluster metric W = Q diag(λ) Qᵀ and the matching ball transform
    // B = Q diag(λ^-1/2): x = c + B·u has d_W(x, c) = |u|.
    let mut metrics_raw: Vec<(DMatrix<f64>, DMatrix<f64>)> = Vec::with_capacity(k);
    for _ in 0..k {
        let q = random_rotation(&mut rng, d);
        let lambdas: Vec<f64> = (0..d)
            .map(|i| {
                if d == 1 {
                    1.0
                } else {
                    kappa.powf(-(i as f64) / (d - 1) as f64)
                }
            })
            .collect();
        let lam = DMatrix::from_diagonal(&DVector::from_row_slice(&lambdas));
        let lam_inv_sqrt = DMatrix::from_diagonal(&DVector::from_row_slice(
            &lambdas.iter().map(|l| 1.0 / l.sqrt()).collect::<Vec<_>>(),
        ));
        let mut w = &q * lam * q.transpose();
        // Symmetrize away the rounding skew from the triple product.
        w = (&w + w.transpose()) * 0.5;
        let b = &q * lam_inv_sqrt;
        metrics_raw.push((w, b));
    }

    // Cluster sizes: n/k each, remainder to the last.
    let base = n / k;
    let sizes: Vec<usize> =
        (0..k).map(|c| if c + 1 == k { n - base * (k - 1) } else { base }).collect();

    let mut offsets: Vec<Vec<DVector<f64>>> = Vec::with_capacity(k);
    for (c, size) in sizes.iter().enumerate() {
        let b = &metrics_raw[c].1;
        offsets.push((0..*size).map(|_| b * unit_ball_sample(&mut rng, d)).collect());
    }

    // Unit lattice centers, centered at the origin.
    let side = (k as f64).powf(1.0 / d as f64).ceil() as usize;
    let mut lattice: Vec<DVector<f64>> = Vec::with_capacity(k);
    let mut idx = vec![0usize; d];
    for _ in 0..k {
        lattice.push(DVector::from_fn(d, |i, _| idx[i] as f64));
        for i in 0..d {
            idx[i] += 1;
            if idx[i] < side {
                break;
            }
            idx[i] = 0;
        }
    }
    let mean = lattice.iter().fold(DVector::zeros(d), |a, c| a + c) / k as f64;
    for c in lattice.iter_mut() {
        *c -= &mean;
    }

    let labels: Vec<usize> =
        sizes.iter().enumerate().flat_map(|(c, s)| std::iter::repeat(c).take(*s)).collect();

    let mut scale = 1.0;
    for _ in 0..20 {
        let mut rows: Vec<Vec<f64>> = Vec::with_capacity(n);
        let mut centers: Vec<Vec<f64>> = Vec::with_capacity(k);
        for c in 0..k {
            let center = &lattice[c] * scale;
            centers.push(center.as_slice().to_vec());
            for off in &offsets[c] {
                rows.push((&center + off).as_slice().to_vec());
            }
        }
        let points = PointSet::from_rows(&rows).expect("generated points are finite");
        let metrics: Vec<ClusterMetric> = metrics_raw
            .iter()
            .zip(&centers)
            .map(|((w, _), c)| ClusterMetric {
                w: PsdMetric::new(w.clone()).expect("constructed metric is PSD"),
                center: c.clone(),
            })
            .collect();
        let margins = crate::geometry::margin_of_clustering(&points, &labels, &metrics)?;
        if margins.iter().all(|&m| m >= gamma) {
            let instance = LatentInstance {
                points,
                labels,
                k,
                gamma,
                metrics: Some(metrics),
                provenance: Some(Provenance {
                    generator: "ellipsoidal".into(),
                    seed,
                    params: params(&[
                        ("n", n as f64),
                        ("k", k as f64),
                        ("d", d as f64),
                        ("gamma", gamma),
                        ("kappa", kappa),
                        ("center_scale", scale),
                    ]),
                }),
            };
            return Ok(instance);
        }
        scale *= 2.0;
    }
    Err(InstanceError::GenerationFailure(format!(
        "no lattice scale within 20 doublings reached margin {gamma} (n={n}, k={k}, d={d}, kappa={kappa})"
    )))
}

/// Two-cluster instance on which centroid-plus-binary-search clustering
/// fails: a heavy cluster split between (±1, 0) and a light cluster at
/// (0, √(1+γ)/2), both under W = diag(1/4, 1). The heavy cluster's margin is
/// exactly gamma.
pub fn gen_adversarial_kmeans(
    n: usize,
    p: f64,
    gamma: f64,
    seed: u64,
) -> Result<LatentInstance, InstanceError> {
    gen_adversarial_kmeans_perturbed(n, p, gamma, 0.0, seed)
}

/// Like [`gen_adversarial_kmeans`] but with each point displaced uniformly
/// in a ball of radius `perturb` (0 keeps the points exactly coincident,
/// which exercises the degenerate enclosing-ellipsoid paths). The margin is
/// re-verified after perturbation.
pub fn gen_adversarial_kmeans_perturbed(
    n: usize,
    p: f64,
    gamma: f64,
    perturb: f64,
    seed: u64,
) -> Result<LatentInstance, InstanceError> {
    if !(0.0 < p && p < 1.0) {
        return Err(InstanceError::InvalidParameter("p must lie in (0, 1)"));
    }
    if !(perturb >= 0.0) {
        return Err(InstanceError::InvalidParameter("perturbation radius must be nonnegative"));
    }
    if !(gamma > 0.0 && gamma <= 0.1) {
        return Err(InstanceError::InvalidParameter("gamma must lie in (0, 0.1]"));
    }
    if n < 4 {
        return Err(InstanceError::InvalidParameter("n must be at least 4"));
    }
    let n1 = (n as f64 * (1.0 + p) / 2.0).round() as usize;
    let n2 = n - n1;
    if n1 < 2 || n2 < 1 {
        return Err(InstanceError::InvalidParameter("p leaves a cluster empty at this n"));
    }
    let y2 = (1.0 + gamma).sqrt() / 2.0;

    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(n);
    let right = n1 - n1 / 2; // odd counts put the extra point at (1, 0)
    for _ in 0..right {
        rows.push(vec![1.0, 0.0]);
    }
    for _ in 0..(n1 / 2) {
        rows.push(vec![-1.0, 0.0]);
    }
    for _ in 0..n2 {
        rows.push(vec![0.0, y2]);
    }
    if perturb > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seeding::derive(seed, "gen-adversarial"));
        for row in rows.iter_mut() {
            let noise = unit_ball_sample(&mut rng, 2) * perturb;
            row[0] += noise[0];
            row[1] += noise[1];
        }
    }
    let mut labels = vec![0usize; n1];
    labels.extend(std::iter::repeat(1).take(n2));

    let w = PsdMetric::from_diagonal(&[0.25, 1.0])?;
    let metrics = vec![
        ClusterMetric { w: w.clone(), center: vec![0.0, 0.0] },
        ClusterMetric { w, center: vec![0.0, y2] },
    ];
    let instance = LatentInstance {
        points: PointSet::from_rows(&rows).expect("adversarial points are finite"),
        labels,
        k: 2,
        gamma,
        metrics: Some(metrics),
        provenance: Some(Provenance {
            generator: "adversarial".into(),
            seed,
            params: params(&[("n", n as f64), ("p", p), ("gamma", gamma), ("perturb", perturb)]),
        }),
    };
    instance.validate().map_err(|e| InstanceError::GenerationFailure(e.to_string()))?;
    Ok(instance)
}

/// Greedy packing of unit vectors in the positive orthant (in squared-
/// coordinate space) with pairwise distance at least eps.
fn pack_positive_orthant(
    rng: &mut ChaCha8Rng,
    d: usize,
    eps: f64,
) -> Vec<DVector<f64>> {
    let mut packed: Vec<DVector<f64>> = Vec::new();
    let mut rejects = 0usize;
    while rejects < 2000 {
        let mut v = DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal).abs());
        let norm = v.norm();
        if norm < 1e-12 {
            continue;
        }
        v /= norm;
        if packed.iter().all(|z| (z - &v).norm() >= eps) {
            packed.push(v);
            rejects = 0;
        } else {
            rejects += 1;
        }
    }
    packed
}

/// Sphere-packing lower-bound instance: a packing {z} on the positive-
/// orthant unit sphere at pairwise distance ≥ ε = √(8γ/(1+γ)), lifted to
/// X = {+√z} ∪ {−√z}. A hidden pair ±√z* forms two singleton clusters under
/// W = (1+γ)·diag(z*); everything else is one cluster with margin ≥ γ.
/// Returns the instance and the id of the hidden +√z* point.
pub fn gen_lb_sphere(
    d: usize,
    gamma: f64,
    seed: u64,
) -> Result<(LatentInstance, usize), InstanceError> {
    if d < 2 {
        return Err(InstanceError::InvalidParameter("d must be at least 2"));
    }
    if !(gamma > 0.0 && gamma < 1.0 / 7.0) {
        return Err(InstanceError::InvalidParameter("gamma must lie in (0, 1/7)"));
    }
    let eps = (8.0 * gamma / (1.0 + gamma)).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seeding::derive(seed, "gen-lb-sphere"));
    let zs = pack_positive_orthant(&mut rng, d, eps);
    let m = zs.len();
    if m < 2 {
        return Err(InstanceError::PackingTooSmall);
    }
    let hidden = rng.gen_range(0..m);
    let z_star = &zs[hidden];

    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(2 * m);
    for z in &zs {
        rows.push(z.iter().map(|v| v.sqrt()).collect());
    }
    for z in &zs {
        rows.push(z.iter().map(|v| -v.sqrt()).collect());
    }
    let mut labels = vec![0usize; 2 * m];
    labels[hidden] = 1;
    labels[m + hidden] = 2;

    let w_main =
        PsdMetric::from_diagonal(&z_star.iter().map(|v| (1.0 + gamma) * v).collect::<Vec<_>>())?;
    let metrics = vec![
        ClusterMetric { w: w_main, center: vec![0.0; d] },
        ClusterMetric { w: PsdMetric::identity(d), center: rows[hidden].clone() },
        ClusterMetric { w: PsdMetric::identity(d), center: rows[m + hidden].clone() },
    ];
    let instance = LatentInstance {
        points: PointSet::from_rows(&rows).expect("packed points are finite"),
        labels,
        k: 3,
        gamma,
        metrics: Some(metrics),
        provenance: Some(Provenance {
            generator: "lb-sphere".into(),
            seed,
            params: params(&[
                ("d", d as f64),
                ("gamma", gamma),
                ("packed", m as f64),
                ("hidden_index", hidden as f64),
            ]),
        }),
    };
    instance.validate().map_err(|e| InstanceError::GenerationFailure(e.to_string()))?;
    Ok((instance, hidden))
}

/// Hypercube lower-bound instance: n i.i.d. Bernoulli(1/(2(1+γ))) binary
/// vectors; the last one is a singleton cluster under W = diag(x*), c = 0.
/// Rejection-samples until all points are distinct and both margins reach
/// gamma; the accepted retry count is recorded in the provenance.
pub fn gen_lb_hypercube(
    d: usize,
    gamma: f64,
    n: usize,
    seed: u64,
) -> Result<(LatentInstance, usize), InstanceError> {
    if d < 8 {
        return Err(InstanceError::InvalidParameter("d must be at least 8"));
    }
    if !(gamma > 0.0) {
        return Err(InstanceError::InvalidParameter("gamma must be positive"));
    }
    if n < 2 {
        return Err(InstanceError::InvalidParameter("n must be at least 2"));
    }
    let p = 1.0 / (2.0 * (1.0 + gamma));
    let mut rng = ChaCha8Rng::seed_from_u64(seeding::derive(seed, "gen-lb-hypercube"));

    for retry in 0..100u32 {
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..d).map(|_| if rng.gen::<f64>() < p { 1.0 } else { 0.0 }).collect())
            .collect();
        let distinct = {
            let mut seen: Vec<&Vec<f64>> = rows.iter().collect();
            seen.sort_by(|a, b| a.partial_cmp(b).unwrap());
            seen.windows(2).all(|w| w[0] != w[1])
        };
        if !distinct {
            continue;
        }
        let x_star = rows[n - 1].clone();
        let mut labels = vec![0usize; n];
        labels[n - 1] = 1;
        let metrics = vec![
            ClusterMetric { w: PsdMetric::from_diagonal(&x_star)?, center: vec![0.0; d] },
            ClusterMetric { w: PsdMetric::identity(d), center: x_star.clone() },
        ];
        let points = PointSet::from_rows(&rows).expect("binary points are finite");
        let margins = crate::geometry::margin_of_clustering(&points, &labels, &metrics)?;
        if margins.iter().all(|&m| m >= gamma) {
            let instance = LatentInstance {
                points,
                labels,
                k: 2,
                gamma,
                metrics: Some(metrics),
                provenance: Some(Provenance {
                    generator: "lb-hypercube".into(),
                    seed,
                    params: params(&[
                        ("d", d as f64),
                        ("gamma", gamma),
                        ("n", n as f64),
                        ("retries", retry as f64),
                        ("hidden_index", (n - 1) as f64),
                    ]),
                }),
            };
            return Ok((instance, n - 1));
        }
    }
    Err(InstanceError::GenerationFailure(format!(
        "no accepted draw in 100 retries; the construction needs d ≥ 48(1+gamma)² (d={d}, gamma={gamma})"
    )))
}

#[derive(Serialize, Deserialize)]
struct MetricSchema {
    #[serde(rename = "W")]
    w: Vec<Vec<f64>>,
    c: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct InstanceSchema {
    n: usize,
    d: usize,
    k: usize,
    gamma: f64,
    points: Vec<Vec<f64>>,
    labels: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    metrics: Option<Vec<MetricSchema>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    provenance: Option<Provenance>,
}

/// Serializes an instance as canonical JSON (stable field and key order, so
/// save/load/save round-trips byte-identically).
pub fn save_instance<P: AsRef<Path>>(instance: &LatentInstance, path: P) -> Result<(), InstanceError> {
    let schema = InstanceSchema {
        n: instance.n(),
        d: instance.dim(),
        k: instance.k,
        gamma: instance.gamma,
        points: instance.points.iter().map(|p| p.to_vec()).collect(),
        labels: instance.labels.clone(),
        metrics: instance.metrics.as_ref().map(|ms| {
            ms.iter()
                .map(|m| MetricSchema {
                    w: (0..m.w.dim())
                        .map(|i| m.w.matrix().row(i).iter().copied().collect())
                        .collect(),
                    c: m.center.clone(),
                })
                .collect()
        }),
        provenance: instance.provenance.clone(),
    };
    let mut out = BufWriter::new(File::create(path)?);
    serde_json::to_writer(&mut out, &schema)
        .map_err(|e| InstanceError::ParseError(e.to_string()))?;
    out.flush()?;
    Ok(())
}

/// Loads an instance and re-verifies its declared margin when metrics are
/// present.
pub fn load_instance<P: AsRef<Path>>(path: P) -> Result<LatentInstance, InstanceError> {
    let reader = BufReader::new(File::open(path)?);
    let schema: InstanceSchema =
        serde_json::from_reader(reader).map_err(|e| InstanceError::ParseError(e.to_string()))?;

    if schema.points.len() != schema.n {
        return Err(InstanceError::ParseError(format!(
            "n={} but {} points given",
            schema.n,
            schema.points.len()
        )));
    }
    if schema.points.iter().any(|p| p.len() != schema.d) {
        return Err(InstanceError::ParseError("point dimension mismatch".into()));
    }
    let points = PointSet::from_rows(&schema.points)
        .map_err(|e| InstanceError::ParseError(e.to_string()))?;
    let metrics = match schema.metrics {
        Some(ms) => {
            let mut out = Vec::with_capacity(ms.len());
            for m in ms {
                if m.w.len() != schema.d
                    || m.w.iter().any(|row| row.len() != schema.d)
                    || m.c.len() != schema.d
                {
                    return Err(InstanceError::ParseError("metric dimension mismatch".into()));
                }
                let flat: Vec<f64> = m.w.iter().flatten().copied().collect();
                let w = PsdMetric::new(DMatrix::from_row_slice(schema.d, schema.d, &flat))
                    .map_err(|e| InstanceError::ParseError(e.to_string()))?;
                out.push(ClusterMetric { w, center: m.c });
            }
            Some(out)
        }
        None => None,
    };
    let instance = LatentInstance {
        points,
        labels: schema.labels,
        k: schema.k,
        gamma: schema.gamma,
        metrics,
        provenance: schema.provenance,
    };
    match instance.validate() {
        Ok(()) => Ok(instance),
        Err(InstanceValidationError::MarginViolation { cluster, got, declared }) => {
            Err(InstanceError::MarginMismatch(format!(
                "cluster {cluster} has margin {got}, declared gamma {declared}"
            )))
        }
        Err(e) => Err(InstanceError::ParseError(e.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn ellipsoidal_margins_verify() {
        let inst = gen_ellipsoidal(200, 3, 2, 1.0, 100.0, 7).unwrap();
        inst.validate().unwrap();
        let margins = inst.margins().unwrap().unwrap();
        assert!(margins.iter().all(|&m| m >= 1.0), "margins {margins:?}");
        assert_eq!(inst.n(), 200);
        // Condition number of every metric is kappa.
        for m in inst.metrics.as_ref().unwrap() {
            let eig = m.w.matrix().clone().symmetric_eigen().eigenvalues;
            let max = eig.iter().fold(f64::MIN, |a, &b| a.max(b));
            let min = eig.iter().fold(f64::MAX, |a, &b| a.min(b));
            assert_relative_eq!(max / min, 100.0, max_relative = 1e-6);
        }
    }

    #[test]
    fn ellipsoidal_kappa_one_is_spherical() {
        let inst = gen_ellipsoidal(60, 2, 3, 1.0, 1.0, 3).unwrap();
        for m in inst.metrics.as_ref().unwrap() {
            let w = m.w.matrix();
            for i in 0..3 {
                for j in 0..3 {
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert_relative_eq!(w[(i, j)], want, epsilon = 1e-9);
                }
            }
        }
        assert!(inst.margins().unwrap().unwrap().iter().all(|&m| m >= 1.0));
    }

    #[test]
    fn ellipsoidal_one_dimensional_works() {
        let inst = gen_ellipsoidal(10, 2, 1, 1.0, 1.0, 5).unwrap();
        inst.validate().unwrap();
        assert_eq!(inst.dim(), 1);
    }

    #[test]
    fn ellipsoidal_is_deterministic() {
        let a = gen_ellipsoidal(50, 2, 2, 0.5, 10.0, 9).unwrap();
        let b = gen_ellipsoidal(50, 2, 2, 0.5, 10.0, 9).unwrap();
        assert_eq!(a.points, b.points);
        assert_eq!(a.labels, b.labels);
    }

    #[test]
    fn adversarial_margin_is_exactly_gamma() {
        let inst = gen_adversarial_kmeans(10_000, 0.5, 0.05, 2).unwrap();
        assert_eq!(inst.labels.iter().filter(|&&l| l == 0).count(), 7500);
        assert_eq!(inst.labels.iter().filter(|&&l| l == 1).count(), 2500);
        let margins = inst.margins().unwrap().unwrap();
        assert!((margins[0] - 0.05).abs() <= 1e-12, "heavy cluster margin {}", margins[0]);
        assert!(margins[1].is_infinite());
    }

    #[test]
    fn adversarial_perturbation_reverifies_margin() {
        // A vanishing perturbation stays within the margin slack; a visible
        // one breaks the exactly-γ margin and must be rejected.
        let ok = gen_adversarial_kmeans_perturbed(100, 0.5, 0.05, 1e-12, 3).unwrap();
        assert!(ok.margins().unwrap().unwrap()[0] >= 0.05 * (1.0 - 1e-9) - 1e-12);
        assert!(matches!(
            gen_adversarial_kmeans_perturbed(100, 0.5, 0.05, 0.01, 3),
            Err(InstanceError::GenerationFailure(_))
        ));
    }

    #[test]
    fn adversarial_rejects_large_gamma() {
        assert!(matches!(
            gen_adversarial_kmeans(100, 0.5, 0.2, 0),
            Err(InstanceError::InvalidParameter(_))
        ));
    }

    #[test]
    fn lb_sphere_small_dimension_packs_two_points() {
        // d=2, γ=0.1: ε ≈ 0.8528 allows exactly two points on the quarter
        // circle, so the instance has 4 points.
        let (inst, hidden) = gen_lb_sphere(2, 0.1, 1).unwrap();
        assert_eq!(inst.n(), 4);
        assert!(hidden < 2);
        let margins = inst.margins().unwrap().unwrap();
        assert!(margins.iter().all(|&m| m >= 0.1));

        // The hidden point sits at squared distance exactly 1+γ from the
        // origin under the main cluster's metric.
        let w = &inst.metrics.as_ref().unwrap()[0].w;
        let q = w.squared_distance(inst.points.point(hidden), &[0.0, 0.0]).unwrap();
        assert_relative_eq!(q, 1.1, epsilon = 1e-12);
        // Everyone else is at squared distance at most 1.
        for i in 0..inst.n() {
            if inst.labels[i] == 0 {
                let q = w.squared_distance(inst.points.point(i), &[0.0, 0.0]).unwrap();
                assert!(q <= 1.0 + 1e-12);
            }
        }
    }

    #[test]
    fn lb_sphere_packing_respects_epsilon() {
        let (inst, _) = gen_lb_sphere(3, 0.1, 4).unwrap();
        let m = inst.n() / 2;
        let eps = (8.0 * 0.1 / 1.1_f64).sqrt();
        for i in 0..m {
            for j in (i + 1)..m {
                let zi: Vec<f64> = inst.points.point(i).iter().map(|v| v * v).collect();
                let zj: Vec<f64> = inst.points.point(j).iter().map(|v| v * v).collect();
                let dist: f64 =
                    zi.iter().zip(&zj).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
                assert!(dist >= eps - 1e-12, "packing pair ({i},{j}) too close: {dist}");
            }
        }
    }

    #[test]
    fn lb_hypercube_accepts_and_verifies() {
        let (inst, hidden) = gen_lb_hypercube(64, 0.1, 8, 1).unwrap();
        assert_eq!(hidden, 7);
        assert_eq!(inst.n(), 8);
        inst.validate().unwrap();
        // Hamming-weight identity for the hidden point.
        let w = &inst.metrics.as_ref().unwrap()[0].w;
        let x_star = inst.points.point(hidden);
        let weight: f64 = x_star.iter().sum();
        let q = w.squared_distance(x_star, &vec![0.0; 64]).unwrap();
        assert_relative_eq!(q, weight, epsilon = 1e-12);
    }

    #[test]
    fn json_round_trip_is_byte_identical() {
        let dir = std::env::temp_dir();
        let p1 = dir.join("recur_test_instance_1.json");
        let p2 = dir.join("recur_test_instance_2.json");
        let inst = gen_ellipsoidal(40, 2, 2, 1.0, 10.0, 11).unwrap();
        save_instance(&inst, &p1).unwrap();
        let loaded = load_instance(&p1).unwrap();
        save_instance(&loaded, &p2).unwrap();
        let b1 = std::fs::read(&p1).unwrap();
        let b2 = std::fs::read(&p2).unwrap();
        assert_eq!(b1, b2);
        std::fs::remove_file(&p1).ok();
        std::fs::remove_file(&p2).ok();
    }

    #[test]
    fn minimal_hand_written_json_loads() {
        let dir = std::env::temp_dir();
        let p = dir.join("recur_test_minimal.json");
        std::fs::write(
            &p,
            r#"{"n":2,"d":1,"k":2,"gamma":1.0,"points":[[0.0],[5.0]],"labels":[0,1]}"#,
        )
        .unwrap();
        let inst = load_instance(&p).unwrap();
        assert_eq!(inst.n(), 2);
        assert!(inst.metrics.is_none());
        std::fs::remove_file(&p).ok();
    }

    #[test]
    fn corrupted_margin_fails_to_load() {
        let dir = std::env::temp_dir();
        let p = dir.join("recur_test_corrupt.json");
        let inst = gen_ellipsoidal(40, 2, 2, 1.0, 10.0, 13).unwrap();
        save_instance(&inst, &p).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        // Declare a margin far above the verified one.
        let corrupted = text.replacen("\"gamma\":1.0", "\"gamma\":1e9", 1);
        assert_ne!(text, corrupted);
        std::fs::write(&p, corrupted).unwrap();
        assert!(matches!(load_instance(&p), Err(InstanceError::MarginMismatch(_))));
        std::fs::remove_file(&p).ok();
    }
}
