//! Dense real symmetric matrices and points of the Siegel upper half-space.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative eigenvalue floor used by the symmetric square root.
const EIGEN_FLOOR: f64 = 1e-14;

/// A dense real symmetric `m x m` matrix.
///
/// Symmetry is enforced on construction: inputs that are symmetric up to
/// rounding are averaged with their transpose, anything further off is
/// rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct SymmetricMatrix(DMatrix<f64>);

impl SymmetricMatrix {
    pub fn new(mat: DMatrix<f64>) -> Result<Self> {
        if !mat.is_square() {
            return Err(Error::invalid(format!(
                "symmetric matrix must be square, got {}x{}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        if mat.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("matrix has non-finite entries"));
        }
        let scale = mat.amax().max(1.0);
        let asym = (&mat - mat.transpose()).amax();
        if asym > 1e-10 * scale {
            return Err(Error::invalid(format!(
                "matrix is not symmetric (max asymmetry {asym:e})"
            )));
        }
        let sym = (&mat + mat.transpose()) * 0.5;
        Ok(SymmetricMatrix(sym))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let m = rows.len();
        if rows.iter().any(|r| r.len() != m) {
            return Err(Error::invalid("rows must form a square matrix"));
        }
        Self::new(DMatrix::from_fn(m, m, |i, j| rows[i][j]))
    }

    pub fn identity(m: usize) -> Self {
        SymmetricMatrix(DMatrix::identity(m, m))
    }

    pub fn zeros(m: usize) -> Self {
        SymmetricMatrix(DMatrix::zeros(m, m))
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let m = diag.len();
        SymmetricMatrix(DMatrix::from_fn(m, m, |i, j| if i == j { diag[i] } else { 0.0 }))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    pub fn determinant(&self) -> f64 {
        self.0.determinant()
    }

    pub fn scale(&self, factor: f64) -> Self {
        SymmetricMatrix(&self.0 * factor)
    }

    /// `self + factor * other`, used for finite-difference perturbations.
    pub fn add_scaled(&self, other: &SymmetricMatrix, factor: f64) -> Self {
        SymmetricMatrix(&self.0 + &other.0 * factor)
    }

    /// `g^T * self * g`.
    pub fn congruence(&self, g: &DMatrix<f64>) -> Self {
        let prod = g.transpose() * &self.0 * g;
        SymmetricMatrix((&prod + prod.transpose()) * 0.5)
    }

    pub fn is_positive_definite(&self) -> bool {
        self.0.clone().cholesky().is_some()
    }

    pub fn require_positive_definite(&self, what: &str) -> Result<()> {
        if self.is_positive_definite() {
            Ok(())
        } else {
            Err(Error::domain(format!("{what} is not positive definite")))
        }
    }

    pub fn inverse(&self) -> Result<Self> {
        let inv = self
            .0
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::domain("matrix is singular"))?;
        Self::new(inv)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        SymmetricEigen::new(self.0.clone()).eigenvalues.iter().copied().collect()
    }

    /// Symmetric positive definite square root and its inverse, via the
    /// symmetric eigendecomposition.
    ///
    /// Eigenvalues below `1e-14 * max` are clamped to that floor; a negative
    /// eigenvalue beyond the floor is a domain error.
    pub fn sqrt_pair(&self) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
        let eig = SymmetricEigen::new(self.0.clone());
        let max = eig.eigenvalues.amax();
        if !(max > 0.0) {
            return Err(Error::domain("matrix is not positive definite"));
        }
        let floor = EIGEN_FLOOR * max;
        let mut roots = Vec::with_capacity(self.dim());
        for &lambda in eig.eigenvalues.iter() {
            if lambda < -floor || !lambda.is_finite() {
                return Err(Error::domain(format!(
                    "matrix is not positive definite (eigenvalue {lambda:e})"
                )));
            }
            roots.push(lambda.max(floor).sqrt());
        }
        let q = &eig.eigenvectors;
        let sqrt = q * DMatrix::from_diagonal(&nalgebra::DVector::from_vec(roots.clone())) * q.transpose();
        let inv_roots: Vec<f64> = roots.iter().map(|r| 1.0 / r).collect();
        let inv_sqrt = q * DMatrix::from_diagonal(&nalgebra::DVector::from_vec(inv_roots)) * q.transpose();
        Ok((symmetrize(sqrt), symmetrize(inv_sqrt)))
    }

    pub fn sqrt(&self) -> Result<Self> {
        self.sqrt_pair().map(|(s, _)| SymmetricMatrix(s))
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim())
            .map(|i| (0..self.dim()).map(|j| self.0[(i, j)]).collect())
            .collect()
    }
}

fn symmetrize(mat: DMatrix<f64>) -> DMatrix<f64> {
    (&mat + mat.transpose()) * 0.5
}

impl TryFrom<Vec<Vec<f64>>> for SymmetricMatrix {
    type Error = Error;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        SymmetricMatrix::from_rows(&rows)
    }
}

impl From<SymmetricMatrix> for Vec<Vec<f64>> {
    fn from(mat: SymmetricMatrix) -> Self {
        mat.to_rows()
    }
}

/// A point `Z = X + iY` of the Siegel upper half-space: `X` symmetric, `Y`
/// symmetric positive definite.
#[derive(Debug, Clone, PartialEq)]
pub struct SiegelPoint {
    pub x: SymmetricMatrix,
    pub y: SymmetricMatrix,
}

impl SiegelPoint {
    pub fn new(x: SymmetricMatrix, y: SymmetricMatrix) -> Result<Self> {
        if x.dim() != y.dim() {
            return Err(Error::invalid("real and imaginary parts differ in size"));
        }
        y.require_positive_definite("Im Z")?;
        Ok(SiegelPoint { x, y })
    }

    /// Constructs without checking `Y > 0`; finite-difference stencils may
    /// step slightly outside the cone and the callee decides what to do.
    pub fn new_unchecked(x: SymmetricMatrix, y: SymmetricMatrix) -> Self {
        SiegelPoint { x, y }
    }

    pub fn dim(&self) -> usize {
        self.x.dim()
    }
}
