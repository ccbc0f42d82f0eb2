//! Finite-dimensional Euclidean vectors and linear subspaces.
//!
//! A [`Subspace`] is stored as an orthonormal basis produced by
//! modified Gram–Schmidt with a re-orthogonalization pass; spans may be
//! given redundantly (dependent vectors are dropped at the pivot
//! tolerance [`crate::tol::GS_PIVOT`]). Orthogonal projection is
//! `sum_i <x, b_i> b_i`.

use crate::tol;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EuclidError {
    #[error("vectors must have at least one coordinate")]
    EmptyVector,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("cannot infer the ambient dimension from an empty spanning list")]
    EmptySpan,
    #[error("vector entries must be finite")]
    NonFinite,
}

/// A point of R^n, n >= 1.
#[derive(Debug, Clone, PartialEq)]
pub struct Vector {
    entries: Vec<f64>,
}

impl Vector {
    pub fn new(entries: Vec<f64>) -> Result<Vector, EuclidError> {
        if entries.is_empty() {
            return Err(EuclidError::EmptyVector);
        }
        if entries.iter().any(|e| !e.is_finite()) {
            return Err(EuclidError::NonFinite);
        }
        Ok(Vector { entries })
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.entries
    }

    pub fn get(&self, i: usize) -> f64 {
        self.entries[i]
    }

    pub fn dot(&self, other: &Vector) -> f64 {
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn dist(&self, other: &Vector) -> f64 {
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    pub fn add(&self, other: &Vector) -> Vector {
        Vector {
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Vector) -> Vector {
        Vector {
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn scale(&self, c: f64) -> Vector {
        Vector {
            entries: self.entries.iter().map(|a| a * c).collect(),
        }
    }

    fn zero(dim: usize) -> Vector {
        Vector {
            entries: vec![0.0; dim],
        }
    }

    fn standard(dim: usize, axis: usize) -> Vector {
        let mut entries = vec![0.0; dim];
        entries[axis] = 1.0;
        Vector { entries }
    }
}

impl std::fmt::Display for Vector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(")?;
        for (k, e) in self.entries.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{:.6}", e)?;
        }
        write!(f, ")")
    }
}

/// A linear subspace of R^n held as an orthonormal basis. The basis
/// may be empty (the zero subspace) or full (all of R^n).
#[derive(Debug, Clone)]
pub struct Subspace {
    ambient_dim: usize,
    basis: Vec<Vector>,
}

impl Subspace {
    /// Orthonormalize a spanning list (possibly redundant).
    pub fn from_spanning(spanning: &[Vector]) -> Result<Subspace, EuclidError> {
        let ambient_dim = spanning.first().ok_or(EuclidError::EmptySpan)?.dim();
        let mut basis: Vec<Vector> = Vec::new();
        for v in spanning {
            if v.dim() != ambient_dim {
                return Err(EuclidError::DimensionMismatch {
                    expected: ambient_dim,
                    got: v.dim(),
                });
            }
            push_orthonormal(&mut basis, v);
        }
        Ok(Subspace { ambient_dim, basis })
    }

    /// The orthogonal complement of the span of `normals`.
    pub fn from_normals(ambient_dim: usize, normals: &[Vector]) -> Result<Subspace, EuclidError> {
        let mut normal_basis: Vec<Vector> = Vec::new();
        for n in normals {
            if n.dim() != ambient_dim {
                return Err(EuclidError::DimensionMismatch {
                    expected: ambient_dim,
                    got: n.dim(),
                });
            }
            push_orthonormal(&mut normal_basis, n);
        }
        // Project the standard basis away from the normals, then
        // orthonormalize what survives.
        let mut basis: Vec<Vector> = Vec::new();
        for axis in 0..ambient_dim {
            let mut w = Vector::standard(ambient_dim, axis);
            for n in &normal_basis {
                w = w.sub(&n.scale(w.dot(n)));
            }
            push_orthonormal(&mut basis, &w);
        }
        Ok(Subspace { ambient_dim, basis })
    }

    /// All of R^n.
    pub fn full(ambient_dim: usize) -> Subspace {
        let basis = (0..ambient_dim)
            .map(|axis| Vector::standard(ambient_dim, axis))
            .collect();
        Subspace { ambient_dim, basis }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    /// Dimension of the subspace itself.
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vector] {
        &self.basis
    }

    /// Orthogonal projection onto the subspace.
    pub fn project(&self, x: &Vector) -> Result<Vector, EuclidError> {
        if x.dim() != self.ambient_dim {
            return Err(EuclidError::DimensionMismatch {
                expected: self.ambient_dim,
                got: x.dim(),
            });
        }
        let mut out = Vector::zero(self.ambient_dim);
        for b in &self.basis {
            out = out.add(&b.scale(x.dot(b)));
        }
        Ok(out)
    }

    /// Distance from `x` to the subspace.
    pub fn distance(&self, x: &Vector) -> Result<f64, EuclidError> {
        Ok(x.sub(&self.project(x)?).norm())
    }

    /// Whether `x` lies in the subspace within `tolerance`.
    pub fn contains(&self, x: &Vector, tolerance: f64) -> Result<bool, EuclidError> {
        Ok(self.distance(x)? <= tolerance)
    }

    /// Max deviation of `<b_i, b_j>` from the identity, a self-check
    /// used by tests and validation reports.
    pub fn orthonormality_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, bi) in self.basis.iter().enumerate() {
            for (j, bj) in self.basis.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((bi.dot(bj) - target).abs());
            }
        }
        worst
    }
}

/// Gram–Schmidt step with one re-orthogonalization pass ("twice is
/// enough"); vectors whose residual falls below the pivot tolerance
/// are dropped as dependent.
fn push_orthonormal(basis: &mut Vec<Vector>, v: &Vector) {
    let mut w = v.clone();
    for _ in 0..2 {
        for b in basis.iter() {
            w = w.sub(&b.scale(w.dot(b)));
        }
    }
    let norm = w.norm();
    if norm > tol::GS_PIVOT {
        basis.push(w.scale(1.0 / norm));
    }
}
