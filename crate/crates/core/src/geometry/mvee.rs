//! Minimum-volume enclosing ellipsoids.
//!
//! The enclosing ellipsoid is computed inside the affine span of the input
//! (rank r ≤ d), via the Khachiyan weight iteration with away steps. The
//! iteration stops once the maximum scaled distance of any input point from
//! the weighted center is at most (1+ε)·r, which certifies that shrinking
//! the returned ellipsoid about its center by 1/((1+ε)·r) lands inside the
//! convex hull of the input.
//!
//! Large inputs are handled with an active-set outer loop: the weight
//! iteration runs on a working subset of direction-extreme points and
//! violators found by full scans are folded in until the certificate holds
//! globally.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::span::orthonormal_span;
use super::GeometryError;
use crate::points::PointSet;

/// Quadratic-form slack accepted when testing ellipsoid membership.
pub const MEMBERSHIP_TOL: f64 = 1e-7;

/// Possibly rank-deficient ellipsoid: center, orthonormal axis basis and
/// semiaxis lengths (sorted descending). Rank 0 denotes the single point at
/// the center.
#[derive(Debug, Clone)]
pub struct Ellipsoid {
    center: DVector<f64>,
    basis: DMatrix<f64>,
    semiaxes: Vec<f64>,
}

impl Ellipsoid {
    pub(crate) fn new(center: DVector<f64>, basis: DMatrix<f64>, semiaxes: Vec<f64>) -> Self {
        debug_assert_eq!(basis.ncols(), semiaxes.len());
        Self { center, basis, semiaxes }
    }

    pub fn point(center: DVector<f64>) -> Self {
        let d = center.len();
        Self { center, basis: DMatrix::zeros(d, 0), semiaxes: Vec::new() }
    }

    pub fn rank(&self) -> usize {
        self.semiaxes.len()
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn center(&self) -> &DVector<f64> {
        &self.center
    }

    /// d×r orthonormal axis basis, ordered with `semiaxes`.
    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    /// Semiaxis lengths, descending.
    pub fn semiaxes(&self) -> &[f64] {
        &self.semiaxes
    }

    /// Axis coordinates of `x − center` plus the out-of-span residual norm.
    pub fn axis_coords(&self, x: &[f64]) -> (DVector<f64>, f64) {
        let xv = DVector::from_row_slice(x) - &self.center;
        if self.rank() == 0 {
            return (DVector::zeros(0), xv.norm());
        }
        let t = self.basis.tr_mul(&xv);
        let residual = (xv - &self.basis * &t).norm();
        (t, residual)
    }

    /// `Σ (⟨x−center, u_i⟩ / ℓ_i)²` when `x` lies in the span, else None.
    pub fn quadform(&self, x: &[f64]) -> Option<f64> {
        let (t, residual) = self.axis_coords(x);
        if self.rank() == 0 {
            let scale = 1.0_f64.max(self.center.norm());
            return if residual <= 1e-9 * scale { Some(0.0) } else { None };
        }
        let span_tol = 1e-8 * (1.0 + t.norm() + residual);
        if residual > span_tol.max(1e-12) {
            return None;
        }
        Some(t.iter().zip(&self.semiaxes).map(|(ti, li)| (ti / li) * (ti / li)).sum())
    }

    /// Membership with the standard 1+1e-7 quadratic-form slack. Rank-0
    /// ellipsoids contain exactly the points equal to the center within
    /// 1e-9 relative tolerance.
    pub fn contains(&self, x: &[f64]) -> bool {
        match self.quadform(x) {
            Some(q) => q <= 1.0 + MEMBERSHIP_TOL,
            None => false,
        }
    }

    /// The ellipsoid scaled by `factor` about its center.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            center: self.center.clone(),
            basis: self.basis.clone(),
            semiaxes: self.semiaxes.iter().map(|l| l * factor).collect(),
        }
    }

    /// Ambient-space point `center + Σ dir_i · ℓ_i · u_i` for an axis-space
    /// direction `dir` (boundary point when `dir` is a unit vector).
    pub fn point_at(&self, dir: &[f64]) -> Vec<f64> {
        assert_eq!(dir.len(), self.rank());
        let mut x = self.center.clone();
        for (i, (&di, &li)) in dir.iter().zip(&self.semiaxes).enumerate() {
            x.axpy(di * li, &self.basis.column(i).clone_owned(), 1.0);
        }
        x.as_slice().to_vec()
    }
}

/// Termination evidence for the enclosing-ellipsoid computation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundingCertificate {
    pub epsilon: f64,
    /// Maximum scaled (Mahalanobis-squared) distance of any input point from
    /// the ellipsoid center; at most (1+epsilon)·rank at termination.
    pub max_scaled_distance: f64,
}

impl RoundingCertificate {
    /// Shrink factor under which the ellipsoid is contained in the input hull.
    pub fn shrink_factor(&self, rank: usize) -> f64 {
        if rank == 0 {
            1.0
        } else {
            1.0 / ((1.0 + self.epsilon) * rank as f64)
        }
    }
}

/// Minimum-volume enclosing ellipsoid of a point subset, computed inside the
/// subset's affine span.
pub fn mvee(
    pts: &PointSet,
    ids: &[usize],
    epsilon: f64,
) -> Result<(Ellipsoid, RoundingCertificate), GeometryError> {
    mvee_with_cap(pts, ids, epsilon, None)
}

pub(crate) fn mvee_with_cap(
    pts: &PointSet,
    ids: &[usize],
    epsilon: f64,
    cap_override: Option<u64>,
) -> Result<(Ellipsoid, RoundingCertificate), GeometryError> {
    if ids.is_empty() {
        return Err(GeometryError::EmptySubset);
    }
    if !(epsilon > 0.0) {
        return Err(GeometryError::InvalidParameter("mvee epsilon must be positive"));
    }
    let span = orthonormal_span(pts, ids);
    if span.rank == 0 {
        let e = Ellipsoid::point(span.origin);
        return Ok((e, RoundingCertificate { epsilon, max_scaled_distance: 0.0 }));
    }
    let r = span.rank;
    let m = ids.len();

    // Span coordinates, rescaled to unit size for conditioning.
    let mut zs = DMatrix::zeros(r, m);
    for (j, &id) in ids.iter().enumerate() {
        let (t, _) = span.project(pts.point(id));
        zs.set_column(j, &t);
    }
    let scale = zs.iter().fold(0.0_f64, |a, &v| a.max(v.abs())).max(f64::MIN_POSITIVE);
    zs /= scale;

    let cap = cap_override.unwrap_or_else(|| {
        (100.0 * (r * r) as f64 * (m.max(2) as f64).ln() / epsilon).ceil() as u64
    });

    let sol = solve_weights(&zs, epsilon, cap)?;

    // Eigendecomposition of the weighted covariance gives the axes; the
    // realized maximum scaled distance normalizes the boundary so the
    // farthest input point lies exactly on it.
    let eig = sol.cov.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..r).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut semiaxes = Vec::with_capacity(r);
    let mut axis_cols = Vec::with_capacity(r);
    for &i in &order {
        let lam = eig.eigenvalues[i].max(0.0);
        semiaxes.push((sol.max_q * lam).sqrt() * scale);
        axis_cols.push(eig.eigenvectors.column(i).clone_owned());
    }
    if semiaxes.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
        return Err(GeometryError::NonConvergence { iterations: sol.iterations });
    }
    let basis = &span.basis * DMatrix::from_columns(&axis_cols);
    let center = &span.origin + &span.basis * (sol.center * scale);

    let e = Ellipsoid::new(center, basis, semiaxes);
    let cert = RoundingCertificate { epsilon, max_scaled_distance: sol.max_q };
    Ok((e, cert))
}

struct WeightSolution {
    center: DVector<f64>,
    cov: DMatrix<f64>,
    max_q: f64,
    iterations: u64,
}

/// Dispatches between the direct weight iteration and the active-set outer
/// loop for large inputs.
fn solve_weights(zs: &DMatrix<f64>, eps: f64, cap: u64) -> Result<WeightSolution, GeometryError> {
    let m = zs.ncols();
    let r = zs.nrows();
    const DIRECT_LIMIT: usize = 600;
    if m <= DIRECT_LIMIT {
        let mut sol = khachiyan(zs, eps, cap)?;
        sol.max_q = rescan_max(zs, &sol)?.0;
        return Ok(sol);
    }

    // Working set: extremes along the axes and a fixed bundle of pseudo-random
    // directions, plus an affinely spanning core.
    let mut dirs: Vec<DVector<f64>> = Vec::new();
    for i in 0..r {
        let mut e = DVector::zeros(r);
        e[i] = 1.0;
        dirs.push(e.clone());
        dirs.push(-e);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x517e_55ed);
    for _ in 0..(4 * r + 8) {
        let v = DVector::from_fn(r, |_, _| rng.gen_range(-1.0_f64..1.0));
        let n = v.norm();
        if n > 1e-9 {
            dirs.push(v / n);
        }
    }
    let mut working = super::hull::extreme_indices(zs, &dirs);
    working.extend(spanning_core(zs));
    working.sort_unstable();
    working.dedup();

    for _ in 0..64 {
        let sub = select_columns(zs, &working);
        let sol = khachiyan(&sub, eps * 0.5, cap)?;
        let (max_q, worst) = rescan_max(zs, &sol)?;
        if max_q <= (1.0 + eps) * r as f64 {
            return Ok(WeightSolution { max_q, ..sol });
        }
        let before = working.len();
        for idx in worst {
            if !working.contains(&idx) {
                working.push(idx);
            }
        }
        if working.len() == before {
            // No new violators to add yet the certificate fails: numerical
            // stalemate.
            return Err(GeometryError::NonConvergence { iterations: sol.iterations });
        }
        working.sort_unstable();
    }
    Err(GeometryError::NonConvergence { iterations: cap })
}

/// Indices whose offsets from column 0 form a basis of the span; guarantees
/// the working set has full affine rank.
fn spanning_core(zs: &DMatrix<f64>) -> Vec<usize> {
    let r = zs.nrows();
    let m = zs.ncols();
    let origin = zs.column(0).clone_owned();
    let scale = (0..m)
        .map(|j| (zs.column(j) - &origin).norm())
        .fold(0.0_f64, f64::max)
        .max(f64::MIN_POSITIVE);
    let mut picked = vec![0usize];
    let mut basis: Vec<DVector<f64>> = Vec::new();
    for j in 1..m {
        if basis.len() == r {
            break;
        }
        let mut v = zs.column(j) - &origin;
        for _ in 0..2 {
            for b in &basis {
                let p = b.dot(&v);
                v.axpy(-p, b, 1.0);
            }
        }
        let n = v.norm();
        if n > 1e-9 * scale {
            basis.push(v / n);
            picked.push(j);
        }
    }
    picked
}

fn select_columns(zs: &DMatrix<f64>, idx: &[usize]) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(zs.nrows(), idx.len());
    for (j, &i) in idx.iter().enumerate() {
        out.set_column(j, &zs.column(i));
    }
    out
}

/// Recomputes the scaled distances of all points exactly and returns the
/// maximum together with the indices of the worst violators (descending).
fn rescan_max(
    zs: &DMatrix<f64>,
    sol: &WeightSolution,
) -> Result<(f64, Vec<usize>), GeometryError> {
    let r = zs.nrows();
    let chol = cholesky_with_fallback(&sol.cov)
        .ok_or(GeometryError::NonConvergence { iterations: sol.iterations })?;
    let mut qs: Vec<(f64, usize)> = Vec::with_capacity(zs.ncols());
    for j in 0..zs.ncols() {
        let v = zs.column(j) - &sol.center;
        let q = chol.solve(&v).dot(&v);
        qs.push((q, j));
    }
    let max_q = qs.iter().map(|&(q, _)| q).fold(0.0_f64, f64::max);
    qs.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(std::cmp::Ordering::Equal));
    let worst: Vec<usize> = qs.iter().take(4 * r).map(|&(_, j)| j).collect();
    Ok((max_q, worst))
}

fn cholesky_with_fallback(m: &DMatrix<f64>) -> Option<Cholesky<f64, Dyn>> {
    if let Some(c) = m.clone().cholesky() {
        return Some(c);
    }
    let ridge = 1e-14 * m.trace().abs().max(f64::MIN_POSITIVE);
    let mut reg = m.clone();
    for i in 0..reg.nrows() {
        reg[(i, i)] += ridge;
    }
    reg.cholesky()
}

/// Khachiyan weight iteration with away steps on the lifted point set.
/// Terminates once `max_j (z_j−c)ᵀΣ⁻¹(z_j−c) ≤ (1+eps)·r`.
fn khachiyan(zs: &DMatrix<f64>, eps: f64, cap: u64) -> Result<WeightSolution, GeometryError> {
    let r = zs.nrows();
    let m = zs.ncols();
    let n1 = r + 1;

    // Lifted points q_j = (z_j, 1).
    let mut q = DMatrix::zeros(n1, m);
    for j in 0..m {
        for i in 0..r {
            q[(i, j)] = zs[(i, j)];
        }
        q[(r, j)] = 1.0;
    }

    let mut u = vec![1.0 / m as f64; m];
    let mut lam_inv = match lambda_inverse(&q, &u) {
        Some(li) => li,
        None => return Err(GeometryError::NonConvergence { iterations: 0 }),
    };
    let mut w = compute_w(&q, &lam_inv);

    let target = 1.0 + (1.0 + eps) * r as f64;
    let mut iterations: u64 = 0;
    loop {
        let (mut j_add, mut w_max) = (0usize, f64::MIN);
        let (mut j_away, mut w_min) = (usize::MAX, f64::MAX);
        for j in 0..m {
            if w[j] > w_max {
                w_max = w[j];
                j_add = j;
            }
            if u[j] > 1e-15 && w[j] < w_min {
                w_min = w[j];
                j_away = j;
            }
        }
        if w_max <= target {
            break;
        }
        if iterations >= cap {
            return Err(GeometryError::NonConvergence { iterations });
        }
        iterations += 1;

        // Away step when the low-weight violation dominates, add step
        // otherwise.
        let nf = n1 as f64;
        let away = j_away != usize::MAX && (nf - w_min) > (w_max - nf) && u[j_away] < 1.0;
        let j = if away { j_away } else { j_add };
        let omega = w[j];
        let mut tau = (omega - nf) / (nf * (omega - 1.0));
        if away {
            tau = tau.max(-u[j] / (1.0 - u[j]));
        }
        let denom = 1.0 - tau + tau * omega;
        if !denom.is_finite() || denom.abs() < 1e-300 {
            return Err(GeometryError::NonConvergence { iterations });
        }

        for uj in u.iter_mut() {
            *uj *= 1.0 - tau;
        }
        u[j] = (u[j] + tau).max(0.0);

        // Sherman–Morrison rank-one update of Λ⁻¹ and all scaled distances.
        let qj = q.column(j).clone_owned();
        let v = &lam_inv * &qj;
        let theta = tau / denom;
        let inv_one_minus_tau = 1.0 / (1.0 - tau);
        for jj in 0..m {
            let c = q.column(jj).dot(&v);
            w[jj] = (w[jj] - theta * c * c) * inv_one_minus_tau;
        }
        lam_inv = (lam_inv - theta * &v * v.transpose()) * inv_one_minus_tau;

        // Periodic exact recompute absorbs floating-point drift.
        if iterations % 512 == 0 {
            match lambda_inverse(&q, &u) {
                Some(li) => {
                    lam_inv = li;
                    w = compute_w(&q, &lam_inv);
                }
                None => return Err(GeometryError::NonConvergence { iterations }),
            }
        }
    }

    // Exact extraction from the final weights.
    let mut center = DVector::zeros(r);
    for j in 0..m {
        center.axpy(u[j], &zs.column(j).clone_owned(), 1.0);
    }
    let mut cov = DMatrix::zeros(r, r);
    for j in 0..m {
        let zc = zs.column(j) - &center;
        cov.syger(u[j], &zc, &zc, 1.0);
    }
    // syger fills the lower triangle; symmetrize.
    for i in 0..r {
        for jj in (i + 1)..r {
            cov[(i, jj)] = cov[(jj, i)];
        }
    }
    let chol = cholesky_with_fallback(&cov)
        .ok_or(GeometryError::NonConvergence { iterations })?;
    let mut max_q = 0.0_f64;
    for j in 0..m {
        let v = zs.column(j) - &center;
        max_q = max_q.max(chol.solve(&v).dot(&v));
    }
    Ok(WeightSolution { center, cov, max_q, iterations })
}

fn lambda_inverse(q: &DMatrix<f64>, u: &[f64]) -> Option<DMatrix<f64>> {
    let n1 = q.nrows();
    let mut lam = DMatrix::zeros(n1, n1);
    for (j, &uj) in u.iter().enumerate() {
        if uj > 0.0 {
            let qj = q.column(j);
            lam.syger(uj, &qj, &qj, 1.0);
        }
    }
    for i in 0..n1 {
        for j in (i + 1)..n1 {
            lam[(i, j)] = lam[(j, i)];
        }
    }
    lam.try_inverse()
}

fn compute_w(q: &DMatrix<f64>, lam_inv: &DMatrix<f64>) -> Vec<f64> {
    let tmp = lam_inv * q;
    (0..q.ncols()).map(|j| q.column(j).dot(&tmp.column(j))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::hull_membership;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_points(rng: &mut ChaCha8Rng, n: usize, d: usize, lo: f64, hi: f64) -> PointSet {
        let rows: Vec<Vec<f64>> =
            (0..n).map(|_| (0..d).map(|_| rng.gen_range(lo..hi)).collect()).collect();
        PointSet::from_rows(&rows).unwrap()
    }

    #[test]
    fn single_point_is_a_rank_zero_ellipsoid() {
        let ps = PointSet::from_rows(&[vec![2.0, -1.0]]).unwrap();
        let (e, cert) = mvee(&ps, &[0], 1e-3).unwrap();
        assert_eq!(e.rank(), 0);
        assert_eq!(cert.max_scaled_distance, 0.0);
        assert!(e.contains(&[2.0, -1.0]));
        assert!(!e.contains(&[2.0, -0.9]));
    }

    #[test]
    fn segment_gives_rank_one_midpoint_ellipsoid() {
        let ps = PointSet::from_rows(&[vec![0.0, 0.0], vec![2.0, 0.0]]).unwrap();
        let (e, cert) = mvee(&ps, &[0, 1], 1e-3).unwrap();
        assert_eq!(e.rank(), 1);
        assert_relative_eq!(e.center()[0], 1.0, epsilon = 1e-6);
        assert_relative_eq!(e.center()[1], 0.0, epsilon = 1e-12);
        assert_relative_eq!(e.semiaxes()[0], 1.0, epsilon = 1e-6);
        assert!(cert.max_scaled_distance <= (1.0 + 1e-3) * 1.0);
    }

    // The minimum-area ellipse through the vertices of a triangle is its
    // Steiner circumellipse: centered at the centroid, all vertices on the
    // boundary, area 4π/(3√3) times the triangle area. An independent
    // annealed random search over (center, shape) cross-checks the area.
    #[test]
    fn triangle_gives_the_steiner_circumellipse() {
        let verts = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        let ps = PointSet::from_rows(&verts.iter().map(|v| v.to_vec()).collect::<Vec<_>>())
            .unwrap();
        let (e, _) = mvee(&ps, &[0, 1, 2], 1e-6).unwrap();
        assert_eq!(e.rank(), 2);
        assert_relative_eq!(e.center()[0], 1.0 / 3.0, epsilon = 1e-3);
        assert_relative_eq!(e.center()[1], 1.0 / 3.0, epsilon = 1e-3);
        for v in &verts {
            let q = e.quadform(v).unwrap();
            assert!((q - 1.0).abs() <= 1e-3, "vertex form {q}");
        }

        let area = std::f64::consts::PI * e.semiaxes()[0] * e.semiaxes()[1];
        let analytic = 4.0 * std::f64::consts::PI * 0.5 / (3.0 * 3.0_f64.sqrt());
        assert_relative_eq!(area, analytic, max_relative = 1e-3);

        let brute = brute_force_min_area(&verts);
        assert!(
            (brute - area).abs() <= 1e-3 * area.max(1.0),
            "search found {brute}, ellipsoid has {area}"
        );
        assert!(area <= brute + 1e-6, "returned ellipse must not beat the feasible search");
    }

    // Annealed random search over centers and Cholesky factors; each sample
    // is rescaled so the worst vertex sits exactly on the boundary, keeping
    // it feasible. Independent of the weight-iteration code path.
    fn brute_force_min_area(verts: &[[f64; 2]; 3]) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(424242);
        let eval = |cx: f64, cy: f64, l11: f64, l21: f64, l22: f64| -> f64 {
            // A = LLᵀ, form value (v−c)ᵀA(v−c).
            let a11 = l11 * l11;
            let a21 = l21 * l11;
            let a22 = l21 * l21 + l22 * l22;
            let mut maxq = 0.0_f64;
            for v in verts {
                let dx = v[0] - cx;
                let dy = v[1] - cy;
                maxq = maxq.max(a11 * dx * dx + 2.0 * a21 * dx * dy + a22 * dy * dy);
            }
            if maxq <= 0.0 {
                return f64::INFINITY;
            }
            // Tighten: A/maxq, area = π/sqrt(det(A/maxq)).
            let det = (a11 * a22 - a21 * a21) / (maxq * maxq);
            if det <= 0.0 {
                return f64::INFINITY;
            }
            std::f64::consts::PI / det.sqrt()
        };
        let mut best = (1.0 / 3.0, 1.0 / 3.0, 1.5, 0.0, 1.5);
        let mut best_area = eval(best.0, best.1, best.2, best.3, best.4);
        let mut sigma = 0.3_f64;
        for _ in 0..200 {
            for _ in 0..40 {
                let cand = (
                    best.0 + sigma * rng.gen_range(-1.0..1.0),
                    best.1 + sigma * rng.gen_range(-1.0..1.0),
                    best.2 * (1.0 + sigma * rng.gen_range(-1.0..1.0)),
                    best.3 + sigma * rng.gen_range(-1.0..1.0),
                    best.4 * (1.0 + sigma * rng.gen_range(-1.0..1.0)),
                );
                let a = eval(cand.0, cand.1, cand.2, cand.3, cand.4);
                if a < best_area {
                    best_area = a;
                    best = cand;
                }
            }
            sigma *= 0.96;
        }
        best_area
    }

    #[test]
    fn containment_and_rounding_hold_on_random_sets() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let ps = random_points(&mut rng, 30, 3, -4.0, 4.0);
        let ids: Vec<usize> = (0..30).collect();
        let eps = 1e-3;
        let (e, cert) = mvee(&ps, &ids, eps).unwrap();
        assert_eq!(e.rank(), 3);
        assert!(cert.max_scaled_distance <= (1.0 + eps) * 3.0 + 1e-9);
        for &i in &ids {
            let q = e.quadform(ps.point(i)).expect("point must lie in span");
            assert!(q <= 1.0 + MEMBERSHIP_TOL, "containment failed: {q}");
        }
        // Boundary points of the shrunk ellipsoid are inside the hull.
        let shrunk = e.scaled(cert.shrink_factor(e.rank()));
        let mut brng = ChaCha8Rng::seed_from_u64(1000);
        for _ in 0..100 {
            let mut dir = DVector::from_fn(3, |_, _| brng.gen_range(-1.0_f64..1.0));
            if dir.norm() < 1e-9 {
                dir[0] = 1.0;
            }
            dir /= dir.norm();
            let p = shrunk.point_at(dir.as_slice());
            assert!(hull_membership(&ps, &ids, &p).unwrap(), "boundary point escaped the hull");
        }
    }

    #[test]
    fn result_is_invariant_under_permutation() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let ps = random_points(&mut rng, 12, 3, -2.0, 2.0);
        let ids: Vec<usize> = (0..12).collect();
        let (e0, _) = mvee(&ps, &ids, 1e-3).unwrap();
        for seed in [8u64, 21, 34] {
            let mut perm = ids.clone();
            let mut prng = ChaCha8Rng::seed_from_u64(seed);
            for i in (1..perm.len()).rev() {
                perm.swap(i, prng.gen_range(0..=i));
            }
            let (e1, _) = mvee(&ps, &perm, 1e-3).unwrap();
            for i in 0..3 {
                assert!((e0.center()[i] - e1.center()[i]).abs() < 1e-6);
                assert!(
                    (e0.semiaxes()[i] - e1.semiaxes()[i]).abs() / e0.semiaxes()[i] < 1e-6,
                    "semiaxis {i} differs"
                );
            }
        }
    }

    #[test]
    fn active_set_path_matches_direct_certificate() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        // Above the direct-solver limit to exercise the violator loop.
        let ps = random_points(&mut rng, 1500, 4, -1.0, 1.0);
        let ids: Vec<usize> = (0..1500).collect();
        let eps = 1e-3;
        let (e, cert) = mvee(&ps, &ids, eps).unwrap();
        assert!(cert.max_scaled_distance <= (1.0 + eps) * 4.0 + 1e-9);
        for &i in &ids {
            assert!(e.quadform(ps.point(i)).unwrap() <= 1.0 + MEMBERSHIP_TOL);
        }
    }

    #[test]
    fn tiny_iteration_budget_reports_nonconvergence() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let ps = random_points(&mut rng, 40, 3, -1.0, 1.0);
        let ids: Vec<usize> = (0..40).collect();
        let err = mvee_with_cap(&ps, &ids, 1e-6, Some(1)).unwrap_err();
        assert!(matches!(err, GeometryError::NonConvergence { .. }));
    }
}
