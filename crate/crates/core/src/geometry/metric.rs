//! PSD seminorms, the distances they induce, and clustering margins.

use nalgebra::{DMatrix, DVector};

use super::GeometryError;
use crate::points::PointSet;

/// A d×d symmetric positive semidefinite matrix defining a seminorm
/// `|x|_W = sqrt(xᵀWx)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PsdMetric {
    matrix: DMatrix<f64>,
}

impl PsdMetric {
    /// Validates symmetry (relative tolerance 1e-9) and numerical positive
    /// semidefiniteness (smallest eigenvalue ≥ −1e-9 · largest).
    pub fn new(matrix: DMatrix<f64>) -> Result<Self, GeometryError> {
        if matrix.nrows() != matrix.ncols() {
            return Err(GeometryError::DimMismatch {
                expected: matrix.nrows(),
                got: matrix.ncols(),
            });
        }
        if !matrix.iter().all(|v| v.is_finite()) {
            return Err(GeometryError::InvalidParameter("metric matrix has non-finite entries"));
        }
        let scale = matrix.iter().fold(0.0_f64, |m, &v| m.max(v.abs()));
        let asym = (&matrix - matrix.transpose()).iter().fold(0.0_f64, |m, &v| m.max(v.abs()));
        if asym > 1e-9 * scale.max(f64::MIN_POSITIVE) {
            return Err(GeometryError::InvalidParameter("metric matrix is not symmetric"));
        }
        let eig = matrix.clone().symmetric_eigen().eigenvalues;
        let lmax = eig.iter().fold(0.0_f64, |m, &v| m.max(v));
        let lmin = eig.iter().fold(f64::INFINITY, |m, &v| m.min(v));
        if lmin < -1e-9 * lmax.max(f64::MIN_POSITIVE) {
            return Err(GeometryError::PsdViolation(lmin));
        }
        Ok(Self { matrix })
    }

    pub fn identity(dim: usize) -> Self {
        Self { matrix: DMatrix::identity(dim, dim) }
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self, GeometryError> {
        Self::new(DMatrix::from_diagonal(&DVector::from_row_slice(diag)))
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// `(x−y)ᵀ W (x−y)`, clamped to 0 when a tiny negative value (≥ −1e-12)
    /// arises from rounding.
    pub fn squared_distance(&self, x: &[f64], y: &[f64]) -> Result<f64, GeometryError> {
        if x.len() != self.dim() || y.len() != self.dim() {
            return Err(GeometryError::DimMismatch { expected: self.dim(), got: x.len().max(y.len()) });
        }
        let d = self.dim();
        let mut q = 0.0;
        for i in 0..d {
            let vi = x[i] - y[i];
            if vi == 0.0 {
                continue;
            }
            let row = self.matrix.row(i);
            let mut acc = 0.0;
            for j in 0..d {
                acc += row[j] * (x[j] - y[j]);
            }
            q += vi * acc;
        }
        if q < -1e-12 {
            return Err(GeometryError::PsdViolation(q));
        }
        Ok(q.max(0.0))
    }
}

/// Per-cluster latent metric: the PSD matrix and the reference point the
/// margin is measured from.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterMetric {
    pub w: PsdMetric,
    pub center: Vec<f64>,
}

/// `d_W(x, y) = sqrt((x−y)ᵀW(x−y))`.
pub fn metric_distance(w: &PsdMetric, x: &[f64], y: &[f64]) -> Result<f64, GeometryError> {
    Ok(w.squared_distance(x, y)?.sqrt())
}

/// Per-cluster margin values. For cluster `C` with metric `(W, c)` this is
///
/// ```text
/// min_{y ∉ C} d_W(y,c)² / max_{x ∈ C} d_W(x,c)²  −  1
/// ```
///
/// and +∞ when the cluster sits entirely at its own reference point. The
/// clustering has margin γ iff every returned value is at least γ.
pub fn margin_of_clustering(
    pts: &PointSet,
    labels: &[usize],
    metrics: &[ClusterMetric],
) -> Result<Vec<f64>, GeometryError> {
    let k = metrics.len();
    if labels.len() != pts.len() {
        return Err(GeometryError::DimMismatch { expected: pts.len(), got: labels.len() });
    }
    if labels.iter().any(|&l| l >= k) {
        return Err(GeometryError::InvalidParameter("label out of range"));
    }

    let mut values = Vec::with_capacity(k);
    for (c, metric) in metrics.iter().enumerate() {
        let mut max_in: Option<f64> = None;
        let mut min_out: Option<f64> = None;
        for (i, &l) in labels.iter().enumerate() {
            let q = metric.w.squared_distance(pts.point(i), &metric.center)?;
            if l == c {
                max_in = Some(max_in.map_or(q, |m: f64| m.max(q)));
            } else {
                min_out = Some(min_out.map_or(q, |m: f64| m.min(q)));
            }
        }
        let max_in = max_in.ok_or(GeometryError::EmptyCluster(c))?;
        let value = if max_in == 0.0 {
            f64::INFINITY
        } else {
            match min_out {
                Some(out) => out / max_in - 1.0,
                None => f64::INFINITY, // no outside points
            }
        };
        values.push(value);
    }
    Ok(values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn euclidean_special_case() {
        let w = PsdMetric::identity(2);
        let d = metric_distance(&w, &[0.0, 0.0], &[3.0, 4.0]).unwrap();
        assert_relative_eq!(d, 5.0, epsilon = 1e-12);
    }

    #[test]
    fn diagonal_quarter_metric() {
        let w = PsdMetric::from_diagonal(&[0.25, 1.0]).unwrap();
        let d = metric_distance(&w, &[1.0, 0.0], &[0.0, 0.0]).unwrap();
        assert_relative_eq!(d, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn distance_to_self_is_zero() {
        let w = PsdMetric::from_diagonal(&[2.0, 0.5, 1.0]).unwrap();
        assert_eq!(metric_distance(&w, &[1.0, -2.0, 0.3], &[1.0, -2.0, 0.3]).unwrap(), 0.0);
    }

    #[test]
    fn rejects_indefinite_matrix() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        assert!(matches!(PsdMetric::new(m), Err(GeometryError::PsdViolation(_))));
    }

    #[test]
    fn quadform_below_clamp_reports_violation() {
        // Almost-PSD matrix passing the eigenvalue tolerance; a huge vector
        // drives the rounding-level negative eigenvalue below the clamp.
        let eps = -0.5e-9;
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, eps]);
        let w = PsdMetric::new(m).unwrap();
        let err = w.squared_distance(&[0.0, 1.0e3], &[0.0, 0.0]).unwrap_err();
        assert!(matches!(err, GeometryError::PsdViolation(_)));
    }

    #[test]
    fn singleton_cluster_margin_is_infinite() {
        let pts = PointSet::from_rows(&[vec![0.0, 0.0], vec![5.0, 0.0]]).unwrap();
        let labels = vec![0, 1];
        let metrics = vec![
            ClusterMetric { w: PsdMetric::identity(2), center: vec![0.0, 0.0] },
            ClusterMetric { w: PsdMetric::identity(2), center: vec![5.0, 0.0] },
        ];
        let values = margin_of_clustering(&pts, &labels, &metrics).unwrap();
        assert!(values.iter().all(|v| v.is_infinite()));
    }

    #[test]
    fn empty_cluster_is_an_error() {
        let pts = PointSet::from_rows(&[vec![0.0], vec![1.0]]).unwrap();
        let metrics = vec![
            ClusterMetric { w: PsdMetric::identity(1), center: vec![0.0] },
            ClusterMetric { w: PsdMetric::identity(1), center: vec![9.0] },
        ];
        let err = margin_of_clustering(&pts, &[0, 0], &metrics).unwrap_err();
        assert_eq!(err, GeometryError::EmptyCluster(1));
    }

    #[test]
    fn margin_is_invariant_under_relabeling() {
        let pts = PointSet::from_rows(&[
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![10.0, 0.0],
            vec![11.0, 0.0],
        ])
        .unwrap();
        let m0 = ClusterMetric { w: PsdMetric::identity(2), center: vec![0.5, 0.0] };
        let m1 = ClusterMetric { w: PsdMetric::identity(2), center: vec![10.5, 0.0] };
        let a = margin_of_clustering(&pts, &[0, 0, 1, 1], &[m0.clone(), m1.clone()]).unwrap();
        let b = margin_of_clustering(&pts, &[1, 1, 0, 0], &[m1, m0]).unwrap();
        assert_relative_eq!(a[0], b[1], epsilon = 1e-12);
        assert_relative_eq!(a[1], b[0], epsilon = 1e-12);
    }

    proptest! {
        // Triangle inequality for the induced pseudo-metric.
        #[test]
        fn triangle_inequality(raw in proptest::collection::vec(-2.0_f64..2.0, 18)) {
            let a = DMatrix::from_row_slice(3, 3, &raw[0..9]);
            let w = PsdMetric::new(&a * a.transpose()).unwrap();
            let x = &raw[9..12];
            let y = &raw[12..15];
            let z = &raw[15..18];
            let dxz = metric_distance(&w, x, z).unwrap();
            let dxy = metric_distance(&w, x, y).unwrap();
            let dyz = metric_distance(&w, y, z).unwrap();
            prop_assert!(dxz <= dxy + dyz + 1e-9);
        }
    }
}
