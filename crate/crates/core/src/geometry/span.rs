//! Orthonormal basis of the affine span of a point subset.

use nalgebra::{DMatrix, DVector};

use crate::points::PointSet;

/// Affine span of a point subset: an origin (the subset's first point), an
/// orthonormal basis of the directions, and the rank.
#[derive(Debug, Clone)]
pub struct Span {
    /// d×r matrix with orthonormal columns; empty (d×0) for rank 0.
    pub basis: DMatrix<f64>,
    pub origin: DVector<f64>,
    pub rank: usize,
}

impl Span {
    /// Coordinates of `x` in the span basis plus the out-of-span residual norm.
    pub fn project(&self, x: &[f64]) -> (DVector<f64>, f64) {
        let xv = DVector::from_row_slice(x) - &self.origin;
        if self.rank == 0 {
            return (DVector::zeros(0), xv.norm());
        }
        let t = self.basis.tr_mul(&xv);
        let residual = (xv - &self.basis * &t).norm();
        (t, residual)
    }
}

/// Minimal orthonormal basis of the affine span of `ids`, relative to the
/// first listed point. Residual directions shorter than 1e-9 times the
/// largest point offset are treated as zero.
pub fn orthonormal_span(pts: &PointSet, ids: &[usize]) -> Span {
    assert!(!ids.is_empty(), "orthonormal_span requires at least one point");
    let d = pts.dim();
    let origin = DVector::from_row_slice(pts.point(ids[0]));

    let scale = ids
        .iter()
        .map(|&i| {
            let p = pts.point(i);
            p.iter().zip(origin.iter()).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
        })
        .fold(0.0_f64, f64::max);
    let tol = 1e-9 * scale;

    let mut cols: Vec<DVector<f64>> = Vec::new();
    if scale > 0.0 {
        for &i in ids.iter().skip(1) {
            if cols.len() == d {
                break;
            }
            let mut v = DVector::from_row_slice(pts.point(i)) - &origin;
            // Two orthogonalization passes keep the basis orthonormal to
            // machine precision even for nearly dependent inputs.
            for _ in 0..2 {
                for c in &cols {
                    let proj = c.dot(&v);
                    v.axpy(-proj, c, 1.0);
                }
            }
            let norm = v.norm();
            if norm > tol {
                cols.push(v / norm);
            }
        }
    }

    let rank = cols.len();
    let basis = if rank == 0 {
        DMatrix::zeros(d, 0)
    } else {
        DMatrix::from_columns(&cols)
    };
    Span { basis, origin, rank }
}
