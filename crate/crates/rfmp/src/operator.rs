//! The forward operator `F: H -> R^l`, its adjoint, singular system, and the
//! orthogonal projectors derived from it.
//!
//! The operator acts on coordinates as an `l x N` matrix `A`. The adjoint is
//! taken with respect to the space metric `G`, so `F* w = G^{-1} A' w`. The
//! singular system is computed by whitening: with `G = L L'`, a Euclidean SVD
//! of `B = A L^{-T}` yields right vectors `x_j = L^{-T} w_j` that are
//! orthonormal in the `G` inner product and satisfy `F x_j = s_j y_j` and
//! `F* y_j = s_j x_j`.

use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector, SVD};

use crate::error::{Error, Result};
use crate::hilbert::{Element, HilbertSpec};

/// Relative cutoff below which singular values are treated as zero.
pub const DEFAULT_RANK_TOLERANCE: f64 = 1e-12;

/// Deviation from the identity allowed when validating an orthonormal basis.
const ORTHONORMALITY_TOL: f64 = 1e-8;

/// Linear continuous map from the solution space into the data space `R^l`.
#[derive(Debug, Clone)]
pub struct ForwardOperator {
    matrix: DMatrix<f64>,
    space: HilbertSpec,
    default_system: OnceLock<std::result::Result<SingularSystem, Error>>,
}

impl ForwardOperator {
    /// Wrap an `l x N` matrix acting on coordinates of `space`.
    pub fn new(space: HilbertSpec, matrix: DMatrix<f64>) -> Result<Self> {
        if matrix.nrows() == 0 {
            return Err(Error::InvalidParameter(
                "operator must have at least one row",
            ));
        }
        if matrix.ncols() != space.dim() {
            return Err(Error::DimensionMismatch {
                what: "operator columns",
                expected: space.dim(),
                actual: matrix.ncols(),
            });
        }
        if !matrix.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite {
                what: "operator matrix",
            });
        }
        Ok(Self {
            matrix,
            space,
            default_system: OnceLock::new(),
        })
    }

    /// The underlying space.
    pub fn space(&self) -> &HilbertSpec {
        &self.space
    }

    /// The coordinate matrix `A`.
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Data-space dimension `l`.
    pub fn data_dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Solution-space dimension `N`.
    pub fn domain_dim(&self) -> usize {
        self.space.dim()
    }

    /// `F u = A u`.
    pub fn apply(&self, u: &Element) -> Result<DVector<f64>> {
        if u.dim() != self.domain_dim() {
            return Err(Error::DimensionMismatch {
                what: "operator argument",
                expected: self.domain_dim(),
                actual: u.dim(),
            });
        }
        Ok(&self.matrix * u.coeffs())
    }

    /// The adjoint `F* w`, i.e. the unique element with
    /// `<F u, w> = <u, F* w>_H` for all `u`; in coordinates `G^{-1} A' w`.
    pub fn apply_adjoint(&self, w: &DVector<f64>) -> Result<Element> {
        self.check_data_dim(w)?;
        let rhs = self.matrix.transpose() * w;
        Element::new(self.space.metric_solve(&rhs))
    }

    /// Largest singular value of `F` with respect to the metrics.
    pub fn operator_norm(&self) -> Result<f64> {
        Ok(self
            .default_singular_system()?
            .sigmas()
            .first()
            .copied()
            .unwrap_or(0.0))
    }

    /// Metric-aware singular value decomposition.
    ///
    /// Returns all `min(l, N)` triples in nonincreasing order of the singular
    /// value; the numerical rank counts values above
    /// `rank_tolerance * sigma_max` (zero for the zero operator).
    pub fn singular_system(&self, rank_tolerance: f64) -> Result<SingularSystem> {
        if !(rank_tolerance > 0.0 && rank_tolerance.is_finite()) {
            return Err(Error::InvalidParameter("rank tolerance must be positive"));
        }
        let l = self.space.cholesky_l();
        // B' = L^{-1} A', so B = A L^{-T}.
        let bt = l.solve_lower_triangular(&self.matrix.transpose()).ok_or(
            Error::DecompositionFailure("triangular solve against metric factor"),
        )?;
        let svd = SVD::new(bt.transpose(), true, true);
        let u = svd.u.ok_or(Error::DecompositionFailure(
            "SVD did not return left vectors",
        ))?;
        let v_t = svd.v_t.ok_or(Error::DecompositionFailure(
            "SVD did not return right vectors",
        ))?;

        let count = svd.singular_values.len();
        let sigmas: Vec<f64> = svd.singular_values.iter().copied().collect();
        let mut right_vectors = Vec::with_capacity(count);
        let mut left_vectors = Vec::with_capacity(count);
        let mut metric_right = Vec::with_capacity(count);
        for j in 0..count {
            let w_j = v_t.row(j).transpose();
            let x_j = l
                .tr_solve_lower_triangular(&w_j)
                .ok_or(Error::DecompositionFailure(
                    "back-substitution against metric factor",
                ))?;
            metric_right.push(self.space.metric_apply(&x_j));
            right_vectors.push(Element::new(x_j)?);
            left_vectors.push(u.column(j).into_owned());
        }

        let sigma_max = sigmas.first().copied().unwrap_or(0.0);
        let rank = sigmas
            .iter()
            .filter(|&&s| s > rank_tolerance * sigma_max)
            .count();

        Ok(SingularSystem {
            sigmas,
            right_vectors,
            left_vectors,
            metric_right,
            rank,
        })
    }

    /// Singular system at [`DEFAULT_RANK_TOLERANCE`], computed once and cached.
    pub fn default_singular_system(&self) -> Result<&SingularSystem> {
        self.default_system
            .get_or_init(|| self.singular_system(DEFAULT_RANK_TOLERANCE))
            .as_ref()
            .map_err(Clone::clone)
    }

    /// Orthogonal projection of `w` onto the range of `F`.
    pub fn range_projection(&self, w: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_data_dim(w)?;
        let sys = self.default_singular_system()?;
        let mut out = DVector::zeros(w.len());
        for j in 0..sys.rank() {
            let y_j = &sys.left_vectors[j];
            out.axpy(w.dot(y_j), y_j, 1.0);
        }
        Ok(out)
    }

    fn check_data_dim(&self, w: &DVector<f64>) -> Result<()> {
        if w.len() != self.data_dim() {
            return Err(Error::DimensionMismatch {
                what: "data vector",
                expected: self.data_dim(),
                actual: w.len(),
            });
        }
        Ok(())
    }
}

/// Singular system `(s_j; x_j, y_j)` of a forward operator.
///
/// `F x_j = s_j y_j` and `F* y_j = s_j x_j`; the `x_j` are orthonormal in the
/// space metric, the `y_j` in the Euclidean data metric.
#[derive(Debug, Clone)]
pub struct SingularSystem {
    sigmas: Vec<f64>,
    right_vectors: Vec<Element>,
    left_vectors: Vec<DVector<f64>>,
    /// `G x_j`, cached so subspace projections need no metric reference.
    metric_right: Vec<DVector<f64>>,
    rank: usize,
}

impl SingularSystem {
    /// Singular values in nonincreasing order.
    pub fn sigmas(&self) -> &[f64] {
        &self.sigmas
    }

    /// Number of singular values above the rank cutoff.
    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Number of computed triples, `min(l, N)`.
    pub fn len(&self) -> usize {
        self.sigmas.len()
    }

    /// True when no triples were computed (cannot happen for valid operators).
    pub fn is_empty(&self) -> bool {
        self.sigmas.is_empty()
    }

    /// Right singular vector `x_j`.
    pub fn right_vector(&self, j: usize) -> Result<&Element> {
        self.right_vectors.get(j).ok_or(Error::InvalidIndex {
            index: j,
            available: self.len(),
        })
    }

    /// Left singular vector `y_j`.
    pub fn left_vector(&self, j: usize) -> Result<&DVector<f64>> {
        self.left_vectors.get(j).ok_or(Error::InvalidIndex {
            index: j,
            available: self.len(),
        })
    }

    /// Orthogonal projection (in the space metric) of `u` onto
    /// `span { x_j : j in indices }`. Duplicate indices are ignored.
    pub fn project_onto_subspace(&self, indices: &[usize], u: &Element) -> Result<Element> {
        let dim = self
            .right_vectors
            .first()
            .map(Element::dim)
            .unwrap_or(u.dim());
        if u.dim() != dim {
            return Err(Error::DimensionMismatch {
                what: "projection argument",
                expected: dim,
                actual: u.dim(),
            });
        }
        let mut seen = vec![false; self.len()];
        let mut out = Element::zeros(dim);
        for &j in indices {
            if j >= self.len() {
                return Err(Error::InvalidIndex {
                    index: j,
                    available: self.len(),
                });
            }
            if seen[j] {
                continue;
            }
            seen[j] = true;
            let coeff = u.coeffs().dot(&self.metric_right[j]);
            out.add_scaled(coeff, &self.right_vectors[j]);
        }
        Ok(out)
    }
}

/// Orthogonal projection of `w` onto the span of an explicit orthonormal
/// data-side basis. The basis vectors must be pairwise orthonormal in the
/// Euclidean inner product.
pub fn orthogonal_projection(basis: &[DVector<f64>], w: &DVector<f64>) -> Result<DVector<f64>> {
    let mut max_deviation = 0.0_f64;
    for (i, b_i) in basis.iter().enumerate() {
        if b_i.len() != w.len() {
            return Err(Error::DimensionMismatch {
                what: "projection basis vector",
                expected: w.len(),
                actual: b_i.len(),
            });
        }
        for (j, b_j) in basis.iter().enumerate().skip(i) {
            let target = if i == j { 1.0 } else { 0.0 };
            max_deviation = max_deviation.max((b_i.dot(b_j) - target).abs());
        }
    }
    if max_deviation > ORTHONORMALITY_TOL {
        return Err(Error::BasisNotOrthonormal { max_deviation });
    }
    let mut out = DVector::zeros(w.len());
    for b in basis {
        out.axpy(w.dot(b), b, 1.0);
    }
    Ok(out)
}

/// Projection of `u` onto the span of an explicit basis that is orthonormal
/// in the space metric. The closed-subspace counterpart of
/// [`SingularSystem::project_onto_subspace`] for subspaces not described by
/// singular indices.
pub fn project_onto_span(space: &HilbertSpec, basis: &[Element], u: &Element) -> Result<Element> {
    let mut max_deviation = 0.0_f64;
    for (i, b_i) in basis.iter().enumerate() {
        for (j, b_j) in basis.iter().enumerate().skip(i) {
            let target = if i == j { 1.0 } else { 0.0 };
            max_deviation = max_deviation.max((space.inner(b_i, b_j)? - target).abs());
        }
    }
    if max_deviation > ORTHONORMALITY_TOL {
        return Err(Error::BasisNotOrthonormal { max_deviation });
    }
    let mut out = Element::zeros(u.dim());
    for b in basis {
        out.add_scaled(space.inner(u, b)?, b);
    }
    Ok(out)
}
