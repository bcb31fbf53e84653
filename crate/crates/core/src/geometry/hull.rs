//! Convex-hull membership by minimum-norm-point feasibility.
//!
//! Membership of `q` in conv(S) is decided by computing the distance from
//! the origin to conv({s − q}) with Wolfe's corral algorithm: distance ~ 0
//! certifies a convex combination, a positive optimality gap certifies a
//! separating direction. Feasibility tolerance is 1e-8, scale-relative.

use nalgebra::{DMatrix, DVector};

use super::span::orthonormal_span;
use super::GeometryError;
use crate::points::PointSet;

const FEAS_TOL: f64 = 1e-8;
const MAX_MAJOR_ITERS: usize = 20_000;

/// True iff `q` is a convex combination of the points `ids` (within the
/// 1e-8 feasibility tolerance).
pub fn hull_membership(pts: &PointSet, ids: &[usize], q: &[f64]) -> Result<bool, GeometryError> {
    if ids.is_empty() {
        return Err(GeometryError::EmptySubset);
    }
    if q.len() != pts.dim() {
        return Err(GeometryError::DimMismatch { expected: pts.dim(), got: q.len() });
    }
    let span = orthonormal_span(pts, ids);
    let scale = ids
        .iter()
        .map(|&i| {
            pts.point(i)
                .iter()
                .zip(span.origin.iter())
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt()
        })
        .fold(0.0_f64, f64::max);
    let tol = FEAS_TOL * scale.max(1.0);

    let (qz, residual) = span.project(q);
    if residual > tol {
        return Ok(false);
    }
    if span.rank == 0 {
        return Ok(true); // q coincides with the single hull point
    }

    let mut cols = DMatrix::zeros(span.rank, ids.len());
    for (j, &i) in ids.iter().enumerate() {
        let (t, _) = span.project(pts.point(i));
        cols.set_column(j, &(t - &qz));
    }
    let x = min_norm_point(&cols, tol)?;
    Ok(x.norm() <= tol)
}

/// Minimum-norm point of the convex hull of the columns of `cols` (Wolfe's
/// corral algorithm). `tol` is the decision tolerance: the search stops as
/// soon as the norm is certified on either side of it, so the result is the
/// exact minimizer only up to that tolerance. The returned point doubles as
/// a separating witness when its norm exceeds `tol`.
pub(crate) fn min_norm_point(
    cols: &DMatrix<f64>,
    tol: f64,
) -> Result<DVector<f64>, GeometryError> {
    let m = cols.ncols();
    let scale = (0..m).map(|j| cols.column(j).norm()).fold(0.0_f64, f64::max);
    if scale == 0.0 {
        return Ok(DVector::zeros(cols.nrows()));
    }

    // Start from the shortest column.
    let start = (0..m)
        .min_by(|&a, &b| {
            cols.column(a)
                .norm_squared()
                .partial_cmp(&cols.column(b).norm_squared())
                .unwrap_or(std::cmp::Ordering::Equal)
        })
        .unwrap();
    let mut corral: Vec<usize> = vec![start];
    let mut weights: Vec<f64> = vec![1.0];
    let mut x = cols.column(start).clone_owned();

    for _ in 0..MAX_MAJOR_ITERS {
        let xn = x.norm();
        if xn <= tol {
            return Ok(x);
        }
        // Most improving vertex; optimality gap certifies a separator.
        let (mut j_best, mut dot_best) = (0usize, f64::MAX);
        for j in 0..m {
            let d = cols.column(j).dot(&x);
            if d < dot_best {
                dot_best = d;
                j_best = j;
            }
        }
        if dot_best / xn > tol {
            return Ok(x); // strictly separated
        }
        if dot_best >= x.norm_squared() - 1e-14 * scale * scale {
            return Ok(x); // Wolfe optimality
        }
        if !corral.contains(&j_best) {
            corral.push(j_best);
            weights.push(0.0);
        }

        // Minor cycles: move to the affine minimizer over the corral,
        // dropping vertices that leave the simplex.
        loop {
            let k = corral.len();
            let mut kkt = DMatrix::zeros(k + 1, k + 1);
            for a in 0..k {
                for b in 0..k {
                    kkt[(a, b)] = cols.column(corral[a]).dot(&cols.column(corral[b]));
                }
                kkt[(a, k)] = 1.0;
                kkt[(k, a)] = 1.0;
            }
            let mut rhs = DVector::zeros(k + 1);
            rhs[k] = 1.0;
            let sol = kkt
                .clone()
                .lu()
                .solve(&rhs)
                .or_else(|| {
                    let ridge = 1e-13 * scale * scale;
                    let mut reg = kkt;
                    for a in 0..k {
                        reg[(a, a)] += ridge;
                    }
                    reg.lu().solve(&rhs)
                })
                .ok_or(GeometryError::LpFailure)?;
            let mu: Vec<f64> = sol.iter().take(k).copied().collect();

            if mu.iter().all(|&v| v > -1e-12) {
                weights = mu;
                break;
            }
            // Line search toward the affine minimizer, stopping where the
            // first weight hits zero.
            let mut theta = 1.0_f64;
            for a in 0..k {
                if mu[a] < weights[a] {
                    theta = theta.min(weights[a] / (weights[a] - mu[a]));
                }
            }
            let mut next_w: Vec<f64> = (0..k)
                .map(|a| (1.0 - theta) * weights[a] + theta * mu[a])
                .collect();
            let mut keep: Vec<bool> = next_w.iter().map(|&v| v > 1e-13).collect();
            if keep.iter().all(|&b| b) {
                // Numerical stall: force the most negative weight out.
                let worst = (0..k)
                    .min_by(|&a, &b| mu[a].partial_cmp(&mu[b]).unwrap_or(std::cmp::Ordering::Equal))
                    .unwrap();
                keep[worst] = false;
            }
            let mut new_corral = Vec::with_capacity(k);
            let mut new_weights = Vec::with_capacity(k);
            for a in 0..k {
                if keep[a] {
                    new_corral.push(corral[a]);
                    new_weights.push(next_w[a].max(0.0));
                }
            }
            let wsum: f64 = new_weights.iter().sum();
            if wsum <= 0.0 || new_corral.is_empty() {
                return Err(GeometryError::LpFailure);
            }
            for w in new_weights.iter_mut() {
                *w /= wsum;
            }
            corral = new_corral;
            weights = new_weights;
            next_w.clear();
        }

        x = DVector::zeros(cols.nrows());
        for (a, &j) in corral.iter().enumerate() {
            x.axpy(weights[a], &cols.column(j).clone_owned(), 1.0);
        }
    }
    Err(GeometryError::LpFailure)
}

/// For each direction, the index of the extreme column (ties to the lowest
/// index). Returned sorted and deduplicated.
pub(crate) fn extreme_indices(cols: &DMatrix<f64>, dirs: &[DVector<f64>]) -> Vec<usize> {
    let m = cols.ncols();
    let mut out = Vec::with_capacity(dirs.len());
    for dir in dirs {
        let mut best = 0usize;
        let mut best_dot = f64::MIN;
        for j in 0..m {
            let d = cols.column(j).dot(dir);
            if d > best_dot {
                best_dot = d;
                best = j;
            }
        }
        out.push(best);
    }
    out.sort_unstable();
    out.dedup();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn simplex2() -> PointSet {
        PointSet::from_rows(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap()
    }

    #[test]
    fn interior_point_is_a_member() {
        assert!(hull_membership(&simplex2(), &[0, 1, 2], &[0.2, 0.2]).unwrap());
    }

    #[test]
    fn outside_point_is_not() {
        assert!(!hull_membership(&simplex2(), &[0, 1, 2], &[1.0, 1.0]).unwrap());
    }

    #[test]
    fn vertices_and_edges_are_members() {
        let ps = simplex2();
        assert!(hull_membership(&ps, &[0, 1, 2], &[0.0, 0.0]).unwrap());
        assert!(hull_membership(&ps, &[0, 1, 2], &[0.5, 0.5]).unwrap());
    }

    #[test]
    fn off_span_point_is_rejected() {
        let ps = PointSet::from_rows(&[vec![0.0, 0.0], vec![2.0, 0.0]]).unwrap();
        assert!(hull_membership(&ps, &[0, 1], &[1.0, 0.5]).unwrap() == false);
        assert!(hull_membership(&ps, &[0, 1], &[1.0, 0.0]).unwrap());
    }

    #[test]
    fn centroid_of_random_polytope_is_inside() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for d in [2usize, 4, 6] {
            let n = 3 * d;
            let rows: Vec<Vec<f64>> =
                (0..n).map(|_| (0..d).map(|_| rng.gen_range(-3.0..3.0)).collect()).collect();
            let ps = PointSet::from_rows(&rows).unwrap();
            let ids: Vec<usize> = (0..n).collect();
            let mut centroid = vec![0.0; d];
            for r in &rows {
                for (c, v) in centroid.iter_mut().zip(r) {
                    *c += v / n as f64;
                }
            }
            assert!(hull_membership(&ps, &ids, &centroid).unwrap());
        }
    }

    #[test]
    fn single_point_hull() {
        let ps = PointSet::from_rows(&[vec![1.0, 2.0]]).unwrap();
        assert!(hull_membership(&ps, &[0], &[1.0, 2.0]).unwrap());
        assert!(!hull_membership(&ps, &[0], &[1.0, 2.1]).unwrap());
    }
}
