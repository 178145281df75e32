//! Finite-dimensional realization of the solution space.
//!
//! Elements are coordinate vectors of length `N`, and the inner product is
//! `<u, v> = u' G v` for a symmetric positive-definite metric `G` (identity
//! by default). Everything downstream (operator adjoints, singular systems,
//! dictionary diagnostics) is computed with respect to this metric.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};

use crate::error::{Error, Result};

/// Relative tolerance for the metric symmetry check.
const METRIC_SYMMETRY_TOL: f64 = 1e-12;

/// A finite-dimensional inner-product space: dimension plus SPD metric.
///
/// The Cholesky factor `G = L L'` is computed once at construction and reused
/// for adjoints and for reducing metric-aware decompositions to Euclidean
/// ones.
#[derive(Debug, Clone)]
pub struct HilbertSpec {
    dim: usize,
    metric: DMatrix<f64>,
    chol: Cholesky<f64, Dyn>,
}

impl HilbertSpec {
    /// Space of dimension `dim` with the identity metric.
    pub fn euclidean(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::EmptySpace);
        }
        Self::new(dim, DMatrix::identity(dim, dim))
    }

    /// Space of dimension `dim` with inner product `u' metric v`.
    ///
    /// The metric must be square of size `dim`, finite, symmetric to within
    /// `1e-12` relative, and strictly positive definite.
    pub fn new(dim: usize, metric: DMatrix<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::EmptySpace);
        }
        if metric.nrows() != dim || metric.ncols() != dim {
            return Err(Error::DimensionMismatch {
                what: "metric",
                expected: dim,
                actual: metric.nrows().max(metric.ncols()),
            });
        }
        if !metric.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite { what: "metric" });
        }

        let scale = metric.amax().max(f64::MIN_POSITIVE);
        let mut max_asymmetry = 0.0_f64;
        for i in 0..dim {
            for j in (i + 1)..dim {
                max_asymmetry = max_asymmetry.max((metric[(i, j)] - metric[(j, i)]).abs());
            }
        }
        if max_asymmetry > METRIC_SYMMETRY_TOL * scale {
            return Err(Error::MetricNotSymmetric { max_asymmetry });
        }

        let eigen = SymmetricEigen::new(metric.clone());
        let min_eigenvalue = eigen.eigenvalues.min();
        if min_eigenvalue <= 0.0 {
            return Err(Error::MetricNotPositiveDefinite { min_eigenvalue });
        }

        let chol = Cholesky::new(metric.clone()).ok_or(Error::DecompositionFailure(
            "Cholesky factorization of metric",
        ))?;

        Ok(Self { dim, metric, chol })
    }

    /// Dimension `N` of the space.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// The metric matrix `G`.
    pub fn metric(&self) -> &DMatrix<f64> {
        &self.metric
    }

    /// Inner product `<u, v> = u' G v`.
    pub fn inner(&self, u: &Element, v: &Element) -> Result<f64> {
        self.check_dim(u)?;
        self.check_dim(v)?;
        Ok(u.coeffs.dot(&(&self.metric * &v.coeffs)))
    }

    /// Squared norm `<u, u>`.
    pub fn norm_sq(&self, u: &Element) -> Result<f64> {
        self.inner(u, u)
    }

    /// Norm `sqrt(<u, u>)`; zero exactly for the zero element.
    pub fn norm(&self, u: &Element) -> Result<f64> {
        Ok(self.norm_sq(u)?.sqrt())
    }

    /// `G u`, as a raw coordinate vector. Used to batch inner products
    /// against a fixed element.
    pub(crate) fn metric_apply(&self, coeffs: &DVector<f64>) -> DVector<f64> {
        &self.metric * coeffs
    }

    /// Solve `G v = rhs` using the stored Cholesky factorization.
    pub(crate) fn metric_solve(&self, rhs: &DVector<f64>) -> DVector<f64> {
        self.chol.solve(rhs)
    }

    /// Lower-triangular Cholesky factor `L` with `G = L L'`.
    pub(crate) fn cholesky_l(&self) -> DMatrix<f64> {
        self.chol.l()
    }

    fn check_dim(&self, u: &Element) -> Result<()> {
        if u.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                what: "element",
                expected: self.dim,
                actual: u.dim(),
            });
        }
        Ok(())
    }
}

/// A member of the space, stored as coordinates in the chosen basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Element {
    coeffs: DVector<f64>,
}

impl Element {
    /// Wrap a coordinate vector; every entry must be finite.
    pub fn new(coeffs: DVector<f64>) -> Result<Self> {
        if !coeffs.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite { what: "element" });
        }
        Ok(Self { coeffs })
    }

    /// Element from a slice of coordinates.
    pub fn from_slice(coeffs: &[f64]) -> Result<Self> {
        Self::new(DVector::from_column_slice(coeffs))
    }

    /// The zero element of an `N`-dimensional space.
    pub fn zeros(dim: usize) -> Self {
        Self {
            coeffs: DVector::zeros(dim),
        }
    }

    /// Number of coordinates.
    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    /// Coordinate vector.
    pub fn coeffs(&self) -> &DVector<f64> {
        &self.coeffs
    }

    /// Consume and return the coordinate vector.
    pub fn into_coeffs(self) -> DVector<f64> {
        self.coeffs
    }

    /// In-place update `self += alpha * other`.
    ///
    /// # Panics
    /// Panics if the dimensions differ.
    pub fn add_scaled(&mut self, alpha: f64, other: &Element) {
        assert_eq!(self.dim(), other.dim(), "element dimensions differ");
        self.coeffs.axpy(alpha, &other.coeffs, 1.0);
    }

    /// `alpha * self` as a new element.
    pub fn scaled(&self, alpha: f64) -> Element {
        Element {
            coeffs: &self.coeffs * alpha,
        }
    }
}

impl std::ops::Sub for &Element {
    type Output = Element;

    /// Coordinate-wise difference.
    ///
    /// # Panics
    /// Panics if the dimensions differ.
    fn sub(self, rhs: &Element) -> Element {
        assert_eq!(self.dim(), rhs.dim(), "element dimensions differ");
        Element {
            coeffs: &self.coeffs - &rhs.coeffs,
        }
    }
}

impl std::ops::Add for &Element {
    type Output = Element;

    /// Coordinate-wise sum.
    ///
    /// # Panics
    /// Panics if the dimensions differ.
    fn add(self, rhs: &Element) -> Element {
        assert_eq!(self.dim(), rhs.dim(), "element dimensions differ");
        Element {
            coeffs: &self.coeffs + &rhs.coeffs,
        }
    }
}
