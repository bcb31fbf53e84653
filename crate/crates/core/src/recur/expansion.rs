//! Greedy hull expansion: grow a within-cluster sample by absorbing every
//! residual point inside a slightly scaled copy of its convex hull, at zero
//! query cost. Soundness comes from the margin: a point of the (1+α)-scaled
//! hull has W-distance at most (1+2α)·R from the cluster's reference point,
//! which stays below √(1+γ)·R — the closest any foreign point can be — as
//! long as (1+2α)² ≤ 1+γ and γ is at most the true margin.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::{min_norm_point, orthonormal_span, GeometryError};
use crate::points::PointSet;

const FEAS_TOL: f64 = 1e-8;

/// Hull growth rate for a fed margin: the largest α with (1+2α)² ≤ 1+γ,
/// i.e. the provable no-mislabel bound, with γ capped at 2 to keep the
/// per-pass factor moderate when the caller deliberately overstates the
/// margin.
pub fn expansion_rate(gamma: f64) -> f64 {
    ((1.0 + gamma.min(2.0)).sqrt() - 1.0) / 2.0
}

/// Repeatedly scales the convex hull of `s_c` by (1+α) about its centroid
/// and absorbs every residual point inside, until a pass absorbs nothing.
/// Returns the absorbed ids (a subset of `residual`, ascending). Issues
/// zero queries.
pub fn greedy_hull_expansion(
    pts: &PointSet,
    s_c: &[usize],
    residual: &[usize],
    gamma: f64,
    _phi: f64,
) -> Result<Vec<usize>, GeometryError> {
    if s_c.is_empty() {
        return Err(GeometryError::EmptySubset);
    }
    if !(gamma > 0.0) {
        return Err(GeometryError::InvalidParameter("gamma must be positive"));
    }
    let span = orthonormal_span(pts, s_c);

    if span.rank == 0 {
        // Coincident sample: the hull is one point whatever the scaling.
        let tol = 1e-9 * 1.0_f64.max(span.origin.norm());
        let mut absorbed: Vec<usize> = residual
            .iter()
            .copied()
            .filter(|&i| {
                let (_, res) = span.project(pts.point(i));
                res <= tol
            })
            .collect();
        absorbed.sort_unstable();
        return Ok(absorbed);
    }

    let r = span.rank;
    let alpha = expansion_rate(gamma);
    let shrink = 1.0 / (1.0 + alpha);

    // Everything below works in span coordinates.
    let members: Vec<DVector<f64>> =
        s_c.iter().map(|&i| span.project(pts.point(i)).0).collect();
    let data_scale = members.iter().map(|z| z.norm()).fold(0.0_f64, f64::max).max(1.0);
    let tol = FEAS_TOL * data_scale;

    struct Candidate {
        id: usize,
        z: DVector<f64>,
        // Separating certificate from the last failed test: direction and a
        // lower bound that the hull support must exceed to invalidate it.
        cert: Option<(DVector<f64>, f64)>,
    }
    let mut candidates: Vec<Candidate> = Vec::new();
    for &id in residual {
        let (z, res) = span.project(pts.point(id));
        if res <= tol {
            candidates.push(Candidate { id, z, cert: None });
        }
    }
    if candidates.is_empty() {
        return Ok(Vec::new());
    }

    // Fixed direction bundle for support bounds and vertex mining.
    let mut dirs: Vec<DVector<f64>> = Vec::new();
    for i in 0..r {
        let mut e = DVector::zeros(r);
        e[i] = 1.0;
        dirs.push(e.clone());
        dirs.push(-e);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x9e37_79b9);
    let extra = (2 * r * r).clamp(16, 128);
    for _ in 0..extra {
        let v = DVector::from_fn(r, |_, _| rng.gen_range(-1.0_f64..1.0));
        let n = v.norm();
        if n > 1e-9 {
            dirs.push(v / n);
        }
    }

    // Vertex set: hull vertices of the absorbed region (initially the whole
    // sample, which is small). conv(vertices) tracks conv(members) exactly:
    // every absorbed point either lies in conv(vertices) or is pushed in.
    let mut vertices: Vec<DVector<f64>> = members.clone();
    let mut supports: Vec<f64> =
        dirs.iter().map(|d| vertices.iter().map(|z| d.dot(z)).fold(f64::MIN, f64::max)).collect();

    let mut g_sum: DVector<f64> = members.iter().fold(DVector::zeros(r), |a, z| a + z);
    let mut n_members = members.len() as f64;

    let mut absorbed_ids: Vec<usize> = Vec::new();
    let mut new_vertices_from = 0usize; // vertices added since the last cert sweep

    loop {
        let g = &g_sum / n_members;
        let r_max = vertices.iter().map(|z| (z - &g).norm()).fold(0.0_f64, f64::max);

        // Fold vertices added last pass into the cached certificates.
        if new_vertices_from < vertices.len() {
            for cand in candidates.iter_mut() {
                if let Some((w, sup)) = &mut cand.cert {
                    for v in &vertices[new_vertices_from..] {
                        let s = w.dot(v);
                        if s > *sup {
                            *sup = s;
                        }
                    }
                }
            }
            new_vertices_from = vertices.len();
        }

        let mut absorbed_pass: Vec<usize> = Vec::new();
        let mut remaining: Vec<Candidate> = Vec::with_capacity(candidates.len());
        for mut cand in candidates.drain(..) {
            let qp = &g + (&cand.z - &g) * shrink;
            if (&qp - &g).norm() > r_max + tol {
                remaining.push(cand);
                continue;
            }
            let outside_support =
                dirs.iter().zip(&supports).any(|(d, &s)| d.dot(&qp) > s + tol);
            if outside_support {
                remaining.push(cand);
                continue;
            }
            if let Some((w, sup)) = &cand.cert {
                if w.dot(&qp) > *sup + tol {
                    remaining.push(cand);
                    continue;
                }
            }
            match hull_test(&vertices, &qp, tol)? {
                HullTest::Inside => {
                    // Track the hull exactly: absorbed points outside the
                    // current vertex hull become vertices themselves.
                    if let HullTest::Outside { .. } = hull_test(&vertices, &cand.z, tol)? {
                        for (d, s) in dirs.iter().zip(supports.iter_mut()) {
                            let v = d.dot(&cand.z);
                            if v > *s {
                                *s = v;
                            }
                        }
                        vertices.push(cand.z.clone());
                    }
                    g_sum += &cand.z;
                    n_members += 1.0;
                    absorbed_pass.push(cand.id);
                }
                HullTest::Outside { separator, support } => {
                    cand.cert = Some((separator, support));
                    remaining.push(cand);
                }
            }
        }
        candidates = remaining;
        let done = absorbed_pass.is_empty();
        absorbed_ids.extend(absorbed_pass);
        if done {
            break;
        }
    }

    absorbed_ids.sort_unstable();
    Ok(absorbed_ids)
}

enum HullTest {
    Inside,
    /// Certified outside: a unit direction along which the point exceeds the
    /// hull support by the returned bound.
    Outside { separator: DVector<f64>, support: f64 },
}

/// Two-tier membership: a cheap check against the nearest vertices first,
/// the full vertex set only when that fails.
fn hull_test(
    vertices: &[DVector<f64>],
    q: &DVector<f64>,
    tol: f64,
) -> Result<HullTest, GeometryError> {
    const NEAR: usize = 40;
    let r = q.len();
    if vertices.len() > NEAR * 2 {
        let mut dist2: Vec<(f64, usize)> = vertices
            .iter()
            .enumerate()
            .map(|(i, v)| ((v - q).norm_squared(), i))
            .collect();
        dist2.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
        let mut cols = DMatrix::zeros(r, NEAR);
        for (j, &(_, i)) in dist2.iter().take(NEAR).enumerate() {
            cols.set_column(j, &(&vertices[i] - q));
        }
        if min_norm_point(&cols, tol)?.norm() <= tol {
            return Ok(HullTest::Inside);
        }
    }
    let mut cols = DMatrix::zeros(r, vertices.len());
    for (j, v) in vertices.iter().enumerate() {
        cols.set_column(j, &(v - q));
    }
    let x = min_norm_point(&cols, tol)?;
    if x.norm() <= tol {
        return Ok(HullTest::Inside);
    }
    let w = -&x / x.norm();
    let support = vertices.iter().map(|v| w.dot(v)).fold(f64::MIN, f64::max);
    Ok(HullTest::Outside { separator: w, support })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::hull_membership;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn fixpoint_is_idempotent() {
        // Sample already covers its cluster: one pass, no additions.
        let rows = vec![
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![0.0, 1.0],
            vec![10.0, 10.0],
        ];
        let pts = PointSet::from_rows(&rows).unwrap();
        let absorbed = greedy_hull_expansion(&pts, &[0, 1, 2], &[3], 1.0, 1.001).unwrap();
        assert!(absorbed.is_empty());
    }

    #[test]
    fn collinear_lattice_is_absorbed_in_one_pass() {
        // Dense 1-d lattice; three spanning points absorb the interior.
        let mut rows: Vec<Vec<f64>> = (0..21).map(|i| vec![i as f64 * 0.05, 0.0]).collect();
        rows.push(vec![50.0, 0.0]); // far foreign point, same line
        let pts = PointSet::from_rows(&rows).unwrap();
        let s_c = [0usize, 10, 20];
        let residual: Vec<usize> = (0..22).filter(|i| !s_c.contains(i)).collect();
        let absorbed = greedy_hull_expansion(&pts, &s_c, &residual, 1.0, 1.001).unwrap();
        let expect: Vec<usize> = (0..21).filter(|i| !s_c.contains(i)).collect();
        assert_eq!(absorbed, expect);
    }

    #[test]
    fn coincident_sample_absorbs_exact_duplicates() {
        let rows = vec![
            vec![2.0, 2.0],
            vec![2.0, 2.0],
            vec![2.0 + 1e-6, 2.0],
        ];
        let pts = PointSet::from_rows(&rows).unwrap();
        let absorbed = greedy_hull_expansion(&pts, &[0], &[1, 2], 0.5, 1.001).unwrap();
        assert_eq!(absorbed, vec![1]);
    }

    #[test]
    fn absorbed_points_agree_with_exact_hull_membership() {
        // Every absorbed point must lie in the (1+α)-scaled hull of the set
        // at some pass; at minimum, nothing outside the final scaled hull of
        // sample ∪ absorbed may be absorbed. Cross-check the final state
        // against the exact LP-style membership oracle.
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let n = 300;
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| {
                let a: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
                let rad: f64 = rng.gen_range(0.0_f64..1.0).sqrt();
                vec![rad * a.cos(), 0.3 * rad * a.sin()]
            })
            .collect();
        let pts = PointSet::from_rows(&rows).unwrap();
        let s_c: Vec<usize> = (0..12).collect();
        let residual: Vec<usize> = (12..n).collect();
        let absorbed = greedy_hull_expansion(&pts, &s_c, &residual, 1.0, 1.001).unwrap();
        assert!(!absorbed.is_empty());

        // The union hull scaled by (1+alpha) must contain every absorbed
        // point (inside-ness is monotone in the pass sequence).
        let mut members: Vec<usize> = s_c.clone();
        members.extend(&absorbed);
        let centroid: Vec<f64> = {
            let mut c = vec![0.0; 2];
            for &i in &members {
                for (cc, v) in c.iter_mut().zip(pts.point(i)) {
                    *cc += v / members.len() as f64;
                }
            }
            c
        };
        let alpha = expansion_rate(1.0);
        for &i in &absorbed {
            let p = pts.point(i);
            let scaled: Vec<f64> = p
                .iter()
                .zip(&centroid)
                .map(|(v, c)| c + (v - c) / (1.0 + alpha))
                .collect();
            assert!(
                hull_membership(&pts, &members, &scaled).unwrap(),
                "absorbed point {i} escapes the scaled hull of the final set"
            );
        }
    }
}
