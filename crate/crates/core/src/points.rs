//! Input point sets with stable indices.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PointSetError {
    #[error("point set must contain at least one point")]
    Empty,
    #[error("dimension must be at least 1")]
    ZeroDim,
    #[error("point {0} has a non-finite coordinate")]
    NonFinite(usize),
    #[error("coordinate buffer length {len} is not a multiple of dim {dim}")]
    RaggedBuffer { len: usize, dim: usize },
}

/// `n` points in `R^d`, stored row-major. Point ids are the row indices
/// `0..n-1` and never change.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    dim: usize,
    coords: Vec<f64>,
}

impl PointSet {
    pub fn new(dim: usize, coords: Vec<f64>) -> Result<Self, PointSetError> {
        if dim == 0 {
            return Err(PointSetError::ZeroDim);
        }
        if coords.is_empty() {
            return Err(PointSetError::Empty);
        }
        if coords.len() % dim != 0 {
            return Err(PointSetError::RaggedBuffer { len: coords.len(), dim });
        }
        if let Some(bad) = coords.chunks_exact(dim).position(|p| !p.iter().all(|c| c.is_finite())) {
            return Err(PointSetError::NonFinite(bad));
        }
        Ok(Self { dim, coords })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, PointSetError> {
        let dim = rows.first().map(|r| r.len()).unwrap_or(0);
        let mut coords = Vec::with_capacity(rows.len() * dim);
        for r in rows {
            if r.len() != dim {
                return Err(PointSetError::RaggedBuffer { len: r.len(), dim });
            }
            coords.extend_from_slice(r);
        }
        Self::new(dim, coords)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false // construction guarantees n >= 1
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn point(&self, id: usize) -> &[f64] {
        &self.coords[id * self.dim..(id + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dim)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_input() {
        assert_eq!(PointSet::new(2, vec![]), Err(PointSetError::Empty));
        assert_eq!(PointSet::new(0, vec![1.0]), Err(PointSetError::ZeroDim));
        assert!(matches!(
            PointSet::new(2, vec![1.0, 2.0, 3.0]),
            Err(PointSetError::RaggedBuffer { .. })
        ));
        assert_eq!(PointSet::new(1, vec![f64::NAN]), Err(PointSetError::NonFinite(0)));
    }

    #[test]
    fn indexing_is_stable() {
        let ps = PointSet::from_rows(&[vec![0.0, 1.0], vec![2.0, 3.0]]).unwrap();
        assert_eq!(ps.len(), 2);
        assert_eq!(ps.point(1), &[2.0, 3.0]);
    }
}
