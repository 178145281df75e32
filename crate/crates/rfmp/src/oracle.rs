//! Direct solvers for the objects the greedy iteration converges to, used as
//! ground truth when verifying runs.
//!
//! Three limit objects are covered:
//!
//! * the Tikhonov solution of `(F*F + lambda I) x = F* y` for `lambda > 0`,
//!   computed both by a dense Cholesky solve and, independently, by the
//!   spectral filter `x = sum_j s_j / (s_j^2 + lambda) <y, y_j> x_j`;
//! * the minimum-norm element whose image is the range projection of `y`
//!   (the `lambda = 0` limit);
//! * the restriction of the Tikhonov solution to a singular-vector subspace
//!   `V`, which equals its orthogonal projection onto `V`.
//!
//! Keeping two genuinely independent computation paths for the Tikhonov
//! solution lets the test suite check the oracle against itself before the
//! oracle is trusted to judge solver output.

use nalgebra::{Cholesky, DVector};

use crate::error::{Error, Result};
use crate::hilbert::Element;
use crate::operator::ForwardOperator;

/// Which characterization a solution realizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleMethod {
    /// `(F*F + lambda I) x = F* y`, dense normal-equation solve.
    Tikhonov,
    /// `(F*F + lambda I) x = F* y` via the singular-system filter formula.
    TikhonovSpectral,
    /// Minimum-norm `x` with `F x` equal to the range projection of `y`.
    RangeProjection,
    /// Projection of the Tikhonov solution onto a singular-vector subspace.
    Subspace,
}

/// A direct solution together with how well it satisfies its defining
/// equation (relative residual) and its Tikhonov functional value.
#[derive(Debug, Clone)]
pub struct OracleSolution {
    /// The computed element.
    pub element: Element,
    /// Which defining equation was solved.
    pub method: OracleMethod,
    /// Residual of the characterization, relative to `1 +` the norm of its
    /// right-hand side.
    pub residual_of_characterization: f64,
    /// `|y - F x|^2 + lambda |x|^2` at the solution.
    pub functional_value: f64,
}

fn require_positive_lambda(lambda: f64) -> Result<()> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidParameter(
            "lambda must be finite and positive",
        ));
    }
    Ok(())
}

fn check_data(op: &ForwardOperator, y: &DVector<f64>) -> Result<()> {
    if y.len() != op.data_dim() {
        return Err(Error::DimensionMismatch {
            what: "data vector",
            expected: op.data_dim(),
            actual: y.len(),
        });
    }
    if !y.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite {
            what: "data vector",
        });
    }
    Ok(())
}

/// Tikhonov functional `|y - F candidate|^2 + lambda |candidate|^2`.
///
/// `lambda` may be zero here; the functional itself is defined for any
/// nonnegative parameter.
pub fn tikhonov_functional(
    op: &ForwardOperator,
    y: &DVector<f64>,
    lambda: f64,
    candidate: &Element,
) -> Result<f64> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidParameter(
            "lambda must be finite and nonnegative",
        ));
    }
    check_data(op, y)?;
    let misfit = y - op.apply(candidate)?;
    Ok(misfit.norm_squared() + lambda * op.space().norm_sq(candidate)?)
}

/// Normal-equation residual `|(F*F + lambda I) x - F* y|` relative to
/// `1 + |F* y|`, in the space norm.
fn normal_equation_residual(
    op: &ForwardOperator,
    y: &DVector<f64>,
    lambda: f64,
    x: &Element,
) -> Result<f64> {
    let fstar_y = op.apply_adjoint(y)?;
    let mut lhs = op.apply_adjoint(&op.apply(x)?)?;
    lhs.add_scaled(lambda, x);
    let diff = &lhs - &fstar_y;
    Ok(op.space().norm(&diff)? / (1.0 + op.space().norm(&fstar_y)?))
}

/// Solve `(F*F + lambda I) x = F* y` by a dense Cholesky factorization.
///
/// In coordinates the system is `(A' A + lambda G) x = A' y`, which is
/// symmetric positive definite for `lambda > 0`.
pub fn tikhonov_solve(
    op: &ForwardOperator,
    y: &DVector<f64>,
    lambda: f64,
) -> Result<OracleSolution> {
    require_positive_lambda(lambda)?;
    check_data(op, y)?;
    let a = op.matrix();
    let system = a.transpose() * a + op.space().metric() * lambda;
    let chol = Cholesky::new(system).ok_or(Error::DecompositionFailure(
        "Cholesky of the regularized normal matrix",
    ))?;
    let x = Element::new(chol.solve(&(a.transpose() * y)))?;
    let residual = normal_equation_residual(op, y, lambda, &x)?;
    let functional = tikhonov_functional(op, y, lambda, &x)?;
    Ok(OracleSolution {
        element: x,
        method: OracleMethod::Tikhonov,
        residual_of_characterization: residual,
        functional_value: functional,
    })
}

/// Solve the same equation as [`tikhonov_solve`] through the singular system:
/// `x = sum_j s_j / (s_j^2 + lambda) <y, y_j> x_j`.
///
/// This path shares no factorization with the dense solve and exists so the
/// two can be checked against each other.
pub fn tikhonov_solve_spectral(
    op: &ForwardOperator,
    y: &DVector<f64>,
    lambda: f64,
) -> Result<OracleSolution> {
    require_positive_lambda(lambda)?;
    check_data(op, y)?;
    let sys = op.default_singular_system()?;
    let mut x = Element::zeros(op.domain_dim());
    for j in 0..sys.len() {
        let sigma = sys.sigmas()[j];
        let weight = sigma / (sigma * sigma + lambda) * y.dot(sys.left_vector(j)?);
        x.add_scaled(weight, sys.right_vector(j)?);
    }
    let residual = normal_equation_residual(op, y, lambda, &x)?;
    let functional = tikhonov_functional(op, y, lambda, &x)?;
    Ok(OracleSolution {
        element: x,
        method: OracleMethod::TikhonovSpectral,
        residual_of_characterization: residual,
        functional_value: functional,
    })
}

/// Minimum-norm element `x` with `F x = P_range y`, from the truncated
/// singular expansion `x = sum_{j < rank} <y, y_j> / s_j x_j`.
///
/// The result lies in the orthogonal complement of the kernel of `F`. For a
/// rank-zero operator the zero element is returned.
pub fn range_solution(op: &ForwardOperator, y: &DVector<f64>) -> Result<OracleSolution> {
    check_data(op, y)?;
    let sys = op.default_singular_system()?;
    let mut x = Element::zeros(op.domain_dim());
    for j in 0..sys.rank() {
        let weight = y.dot(sys.left_vector(j)?) / sys.sigmas()[j];
        x.add_scaled(weight, sys.right_vector(j)?);
    }
    let image = op.apply(&x)?;
    let projected = op.range_projection(y)?;
    let residual = (&image - &projected).norm() / (1.0 + y.norm());
    let functional = tikhonov_functional(op, y, 0.0, &x)?;
    Ok(OracleSolution {
        element: x,
        method: OracleMethod::RangeProjection,
        residual_of_characterization: residual,
        functional_value: functional,
    })
}

/// Projection of the Tikhonov solution onto `V = span { x_j : j in indices }`.
///
/// The reported characterization residual is that of the restricted normal
/// equation `(F_V* F_V + lambda I_V) x = F_V* y` with `F_V = F P_V`.
pub fn subspace_tikhonov(
    op: &ForwardOperator,
    y: &DVector<f64>,
    lambda: f64,
    indices: &[usize],
) -> Result<OracleSolution> {
    require_positive_lambda(lambda)?;
    check_data(op, y)?;
    let full = tikhonov_solve(op, y, lambda)?;
    let sys = op.default_singular_system()?;
    let x = sys.project_onto_subspace(indices, &full.element)?;

    // Restricted normal equation: P_V F* F x + lambda x = P_V F* y (x is in V).
    let rhs = sys.project_onto_subspace(indices, &op.apply_adjoint(y)?)?;
    let mut lhs = sys.project_onto_subspace(indices, &op.apply_adjoint(&op.apply(&x)?)?)?;
    lhs.add_scaled(lambda, &x);
    let diff = &lhs - &rhs;
    let residual = op.space().norm(&diff)? / (1.0 + op.space().norm(&rhs)?);
    let functional = tikhonov_functional(op, y, lambda, &x)?;
    Ok(OracleSolution {
        element: x,
        method: OracleMethod::Subspace,
        residual_of_characterization: residual,
        functional_value: functional,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::HilbertSpec;
    use nalgebra::DMatrix;

    fn diag_op(values: &[f64]) -> ForwardOperator {
        let n = values.len();
        let space = HilbertSpec::euclidean(n).unwrap();
        let a = DMatrix::from_diagonal(&DVector::from_column_slice(values));
        ForwardOperator::new(space, a).unwrap()
    }

    fn seeded_vector(len: usize, seed: u64) -> DVector<f64> {
        let mut state = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).max(1);
        DVector::from_fn(len, |_, _| {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state as f64 / u64::MAX as f64) * 2.0 - 1.0
        })
    }

    #[test]
    fn tikhonov_diagonal_example() {
        // diag(6, 3) x = (4, 1)  =>  x = (2/3, 1/3).
        let op = diag_op(&[2.0, 1.0]);
        let y = DVector::from_column_slice(&[2.0, 1.0]);
        let sol = tikhonov_solve(&op, &y, 2.0).unwrap();
        assert!((sol.element.coeffs()[0] - 2.0 / 3.0).abs() < 1e-14);
        assert!((sol.element.coeffs()[1] - 1.0 / 3.0).abs() < 1e-14);
        assert!(sol.residual_of_characterization < 1e-12);
    }

    #[test]
    fn tikhonov_identity_halves_data() {
        let op = diag_op(&[1.0, 1.0, 1.0]);
        let y = DVector::from_column_slice(&[0.3, -2.0, 5.0]);
        let sol = tikhonov_solve(&op, &y, 1.0).unwrap();
        for i in 0..3 {
            assert!((sol.element.coeffs()[i] - y[i] / 2.0).abs() < 1e-14);
        }
    }

    #[test]
    fn tikhonov_zero_data() {
        let op = diag_op(&[2.0, 1.0]);
        let sol = tikhonov_solve(&op, &DVector::zeros(2), 0.5).unwrap();
        assert_eq!(sol.element, Element::zeros(2));
        assert_eq!(sol.functional_value, 0.0);
    }

    #[test]
    fn tikhonov_requires_positive_lambda() {
        let op = diag_op(&[1.0, 1.0]);
        let y = DVector::zeros(2);
        assert!(tikhonov_solve(&op, &y, 0.0).is_err());
        assert!(tikhonov_solve(&op, &y, -1.0).is_err());
    }

    #[test]
    fn functional_at_zero_candidate() {
        let op = diag_op(&[1.0, 2.0]);
        let y = DVector::from_column_slice(&[3.0, 4.0]);
        let value = tikhonov_functional(&op, &y, 0.7, &Element::zeros(2)).unwrap();
        assert_eq!(value, 25.0);
    }

    #[test]
    fn unregularized_functional_vanishes_at_exact_solution() {
        let op = diag_op(&[2.0, 4.0]);
        let y = DVector::from_column_slice(&[2.0, 8.0]);
        let exact = Element::from_slice(&[1.0, 2.0]).unwrap();
        let value = tikhonov_functional(&op, &y, 0.0, &exact).unwrap();
        assert!(value < 1e-24);
    }

    #[test]
    fn tikhonov_minimality_under_random_perturbations() {
        let space = HilbertSpec::euclidean(4).unwrap();
        let a = DMatrix::from_fn(3, 4, |r, c| ((r * 7 + c * 3) as f64).sin());
        let op = ForwardOperator::new(space, a).unwrap();
        let y = DVector::from_column_slice(&[1.0, -0.5, 2.0]);
        let lambda = 0.4;
        let sol = tikhonov_solve(&op, &y, lambda).unwrap();
        for seed in 0..100u64 {
            let scale = if seed % 2 == 0 { 1e-3 } else { 1.0 };
            let delta = Element::new(seeded_vector(4, seed + 1) * scale).unwrap();
            let perturbed = &sol.element + &delta;
            let value = tikhonov_functional(&op, &y, lambda, &perturbed).unwrap();
            assert!(value >= sol.functional_value - 1e-12 * (1.0 + value));
        }
    }

    #[test]
    fn range_solution_full_rank_identity() {
        let op = diag_op(&[1.0, 1.0]);
        let y = DVector::from_column_slice(&[1.0, 2.0]);
        let sol = range_solution(&op, &y).unwrap();
        assert!((sol.element.coeffs()[0] - 1.0).abs() < 1e-12);
        assert!((sol.element.coeffs()[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn range_solution_rank_deficient_by_hand() {
        let op = diag_op(&[1.0, 0.0]);
        let y = DVector::from_column_slice(&[3.0, 4.0]);
        let sol = range_solution(&op, &y).unwrap();
        assert!((sol.element.coeffs()[0] - 3.0).abs() < 1e-12);
        assert!(sol.element.coeffs()[1].abs() < 1e-12);
        let image = op.apply(&sol.element).unwrap();
        assert!((image[0] - 3.0).abs() < 1e-12);
        assert!(image[1].abs() < 1e-12);
    }

    #[test]
    fn range_solution_orthogonal_data_gives_zero() {
        let op = diag_op(&[1.0, 0.0]);
        let y = DVector::from_column_slice(&[0.0, 5.0]);
        let sol = range_solution(&op, &y).unwrap();
        assert_eq!(sol.element, Element::zeros(2));
    }

    #[test]
    fn range_solution_lies_in_kernel_complement() {
        let space = HilbertSpec::euclidean(4).unwrap();
        let a = DMatrix::from_row_slice(2, 4, &[1.0, 2.0, 0.0, -1.0, 0.0, 1.0, 1.0, 0.5]);
        let op = ForwardOperator::new(space, a).unwrap();
        let y = DVector::from_column_slice(&[1.0, -2.0]);
        let sol = range_solution(&op, &y).unwrap();
        // H-orthogonal to every kernel vector x_j (sigma_j below rank cut).
        let sys = op.default_singular_system().unwrap();
        for j in sys.rank()..sys.len() {
            let ip = op
                .space()
                .inner(&sol.element, sys.right_vector(j).unwrap())
                .unwrap();
            assert!(ip.abs() < 1e-10);
        }
    }

    #[test]
    fn dense_and_spectral_paths_agree() {
        let b = DMatrix::from_fn(5, 5, |r, c| ((r * 5 + c) as f64 * 0.37).cos());
        let metric = &b * b.transpose() + DMatrix::identity(5, 5);
        let space = HilbertSpec::new(5, metric).unwrap();
        let a = DMatrix::from_fn(3, 5, |r, c| ((r * 11 + c * 7) as f64 * 0.23).sin());
        let op = ForwardOperator::new(space, a).unwrap();
        let y = DVector::from_column_slice(&[0.9, -1.4, 0.3]);
        for lambda in [0.1, 1.0, 5.0] {
            let dense = tikhonov_solve(&op, &y, lambda).unwrap();
            let spectral = tikhonov_solve_spectral(&op, &y, lambda).unwrap();
            let diff = &dense.element - &spectral.element;
            let scale = 1.0 + op.space().norm(&dense.element).unwrap();
            assert!(op.space().norm(&diff).unwrap() <= 1e-8 * scale);
        }
    }

    #[test]
    fn subspace_full_index_set_matches_full_solution() {
        let op = diag_op(&[3.0, 2.0, 1.0]);
        let y = DVector::from_column_slice(&[1.0, 1.0, 1.0]);
        let full = tikhonov_solve(&op, &y, 0.5).unwrap();
        let restricted = subspace_tikhonov(&op, &y, 0.5, &[0, 1, 2]).unwrap();
        let diff = &full.element - &restricted.element;
        assert!(op.space().norm(&diff).unwrap() < 1e-12);
        assert!(restricted.residual_of_characterization < 1e-12);
    }

    #[test]
    fn subspace_empty_index_set_is_zero() {
        let op = diag_op(&[3.0, 2.0]);
        let y = DVector::from_column_slice(&[1.0, 1.0]);
        let restricted = subspace_tikhonov(&op, &y, 0.5, &[]).unwrap();
        assert_eq!(restricted.element, Element::zeros(2));
    }

    #[test]
    fn subspace_kernel_complement_reproduces_full_solution() {
        // Rank-1 operator on R^2: (ker F)-perp is spanned by the first
        // singular vector, and projecting there leaves the solution fixed.
        let space = HilbertSpec::euclidean(2).unwrap();
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 2.0, 2.0]);
        let op = ForwardOperator::new(space, a).unwrap();
        let y = DVector::from_column_slice(&[1.0, 3.0]);
        let full = tikhonov_solve(&op, &y, 0.3).unwrap();
        let sys = op.default_singular_system().unwrap();
        assert_eq!(sys.rank(), 1);
        let restricted = subspace_tikhonov(&op, &y, 0.3, &[0]).unwrap();
        let diff = &full.element - &restricted.element;
        assert!(op.space().norm(&diff).unwrap() < 1e-10);
    }

    #[test]
    fn subspace_invalid_index_rejected() {
        let op = diag_op(&[1.0, 1.0]);
        let y = DVector::zeros(2);
        assert!(matches!(
            subspace_tikhonov(&op, &y, 1.0, &[9]),
            Err(Error::InvalidIndex { index: 9, .. })
        ));
    }

    #[test]
    fn normal_equation_residual_is_small_on_random_problems() {
        for seed in 0..20u64 {
            let raw = DMatrix::from_fn(4, 6, |r, c| {
                seeded_vector(1, seed * 101 + (r * 6 + c) as u64 + 1)[0]
            });
            let space = HilbertSpec::euclidean(6).unwrap();
            let op = ForwardOperator::new(space, raw).unwrap();
            let y = seeded_vector(4, seed + 7000);
            let sol = tikhonov_solve(&op, &y, 0.25).unwrap();
            assert!(sol.residual_of_characterization <= 1e-10);
        }
    }
}
