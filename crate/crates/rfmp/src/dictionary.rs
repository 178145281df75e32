//! The trial-function set `D` and the quantities the solver and the
//! convergence hypotheses need from it.
//!
//! Building a dictionary precomputes every per-atom quantity the greedy
//! iteration reuses: the images `F d_i`, their squared data norms, the squared
//! atom norms, and the full Gram matrix `<d_i, d_j>` in the space metric. The
//! Gram matrix is what makes the solver's `<F_n, d_i>` cache an O(K)-per-step
//! update instead of a fresh O(K N) scan.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::hilbert::Element;
use crate::operator::ForwardOperator;

/// Default floor below which C1 counts as zero (hypothesis violated).
pub const DEFAULT_C1_FLOOR: f64 = 1e-14;

/// Relative threshold for flagging two atoms as collinear.
const COLLINEARITY_TOL: f64 = 1e-10;

/// A finite set of nonzero trial elements with precomputed images and Gram
/// matrix. Immutable after construction.
#[derive(Debug, Clone)]
pub struct Dictionary {
    atoms: Vec<Element>,
    images: Vec<DVector<f64>>,
    image_norms_sq: Vec<f64>,
    atom_norms_sq: Vec<f64>,
    gram: DMatrix<f64>,
    collinear_pairs: Vec<(usize, usize)>,
}

impl Dictionary {
    /// Validate the atoms and precompute images, norms, and the Gram matrix.
    ///
    /// Atoms must be nonempty, conform to the operator's space, and be
    /// nonzero; a zero atom is rejected with its index. Collinear (including
    /// duplicated) atoms are permitted but recorded in
    /// [`collinear_pairs`](Self::collinear_pairs).
    pub fn build(op: &ForwardOperator, atoms: Vec<Element>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::EmptyDictionary);
        }
        let n = op.domain_dim();
        let k = atoms.len();
        for (index, atom) in atoms.iter().enumerate() {
            if atom.dim() != n {
                return Err(Error::DimensionMismatch {
                    what: "dictionary atom",
                    expected: n,
                    actual: atom.dim(),
                });
            }

            if atom.coeffs().iter().all(|&c| c == 0.0) {
                return Err(Error::ZeroAtom { index });
            }
        }

        // Atom matrix M (N x K) and Gram = M' G M.
        let mut m = DMatrix::zeros(n, k);
        for (i, atom) in atoms.iter().enumerate() {
            m.set_column(i, atom.coeffs());
        }
        let gm = op.space().metric() * &m;
        let gram = m.transpose() * &gm;

        let atom_norms_sq: Vec<f64> = (0..k).map(|i| gram[(i, i)]).collect();
        if let Some(index) = atom_norms_sq.iter().position(|&v| v <= 0.0) {
            // Nonzero coordinates with an SPD metric can still underflow.
            return Err(Error::ZeroAtom { index });
        }

        let images: Vec<DVector<f64>> = (0..k).map(|i| op.matrix() * atoms[i].coeffs()).collect();
        let image_norms_sq: Vec<f64> = images.iter().map(DVector::norm_squared).collect();

        let mut collinear_pairs = Vec::new();
        for i in 0..k {
            for j in (i + 1)..k {
                let cross = gram[(i, j)] * gram[(i, j)];
                let bound = (1.0 - COLLINEARITY_TOL) * atom_norms_sq[i] * atom_norms_sq[j];
                if cross >= bound {
                    collinear_pairs.push((i, j));
                }
            }
        }

        Ok(Self {
            atoms,
            images,
            image_norms_sq,
            atom_norms_sq,
            gram,
            collinear_pairs,
        })
    }

    /// Number of atoms `K`.
    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    /// Always false: empty dictionaries cannot be built.
    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Atom `d_i`.
    pub fn atom(&self, i: usize) -> &Element {
        &self.atoms[i]
    }

    /// All atoms in order.
    pub fn atoms(&self) -> &[Element] {
        &self.atoms
    }

    /// Precomputed image `F d_i`.
    pub fn image(&self, i: usize) -> &DVector<f64> {
        &self.images[i]
    }

    /// Squared data-space norm of the image of atom `i`.
    pub fn image_norm_sq(&self, i: usize) -> f64 {
        self.image_norms_sq[i]
    }

    /// Squared space norm of atom `i`.
    pub fn atom_norm_sq(&self, i: usize) -> f64 {
        self.atom_norms_sq[i]
    }

    /// Gram matrix of the atoms in the space metric.
    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    /// Pairs of atoms found collinear at build time (duplicates included).
    pub fn collinear_pairs(&self) -> &[(usize, usize)] {
        &self.collinear_pairs
    }

    /// Convergence-hypothesis diagnostics at regularization `lambda`.
    ///
    /// * `c1 = min_i (|F d_i|^2 + lambda |d_i|^2)`, with the minimizing atom;
    /// * `c2 = max_i |d_i|`, with the maximizing atom;
    /// * `semi_frame_c` = smallest eigenvalue of the norm-normalized Gram
    ///   matrix `g_ij / (|d_i| |d_j|)`, reported as exactly zero below the
    ///   numerical-rank cutoff. For single-use
    ///   expansions from these atoms it lower-bounds the frame-type constant;
    ///   a duplicated atom drives it to zero.
    /// * `span_rank` = dimension of the span of the atoms.
    pub fn diagnostics(&self, lambda: f64) -> Result<DictionaryDiagnostics> {
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidParameter(
                "lambda must be finite and nonnegative",
            ));
        }
        let k = self.len();

        let mut c1 = f64::INFINITY;
        let mut c1_atom = 0;
        for i in 0..k {
            let value = self.image_norms_sq[i] + lambda * self.atom_norms_sq[i];
            if value < c1 {
                c1 = value;
                c1_atom = i;
            }
        }

        let mut c2_sq = f64::NEG_INFINITY;
        let mut c2_atom = 0;
        for i in 0..k {
            if self.atom_norms_sq[i] > c2_sq {
                c2_sq = self.atom_norms_sq[i];
                c2_atom = i;
            }
        }

        let mut normalized = self.gram.clone();
        for i in 0..k {
            for j in 0..k {
                normalized[(i, j)] /= (self.atom_norms_sq[i] * self.atom_norms_sq[j]).sqrt();
            }
        }
        let eigen = SymmetricEigen::new(normalized);
        let min_eig = eigen.eigenvalues.min();
        let max_eig = eigen.eigenvalues.max();
        let rank_cut = k as f64 * f64::EPSILON * max_eig.max(0.0);
        // Eigenvalues below the numerical-rank cutoff are rounding residue of
        // a singular Gram; report those as exactly zero.
        let semi_frame_c = if min_eig > rank_cut { min_eig } else { 0.0 };
        let span_rank = eigen.eigenvalues.iter().filter(|&&e| e > rank_cut).count();

        Ok(DictionaryDiagnostics {
            c1,
            c1_atom,
            c2: c2_sq.sqrt(),
            c2_atom,
            semi_frame_c,
            span_rank,
            lambda_used: lambda,
        })
    }
}

/// Computable stand-ins for the hypotheses the convergence theory places on
/// the dictionary.
#[derive(Debug, Clone, PartialEq)]
pub struct DictionaryDiagnostics {
    /// `min_i (|F d_i|^2 + lambda |d_i|^2)`; must be positive for the solver.
    pub c1: f64,
    /// Index of the atom realizing `c1`.
    pub c1_atom: usize,
    /// `max_i |d_i|` in the space norm.
    pub c2: f64,
    /// Index of the atom realizing `c2`.
    pub c2_atom: usize,
    /// Smallest eigenvalue of the norm-normalized Gram matrix; exactly zero
    /// when that eigenvalue sits below the numerical-rank cutoff.
    pub semi_frame_c: f64,
    /// Dimension of the span of the atoms.
    pub span_rank: usize,
    /// The regularization parameter these diagnostics were computed at.
    pub lambda_used: f64,
}

impl DictionaryDiagnostics {
    /// Gate on `c1 > `[`DEFAULT_C1_FLOOR`]; see [`Self::check_c1_with_floor`].
    pub fn check_c1_positive(&self) -> Result<()> {
        self.check_c1_with_floor(DEFAULT_C1_FLOOR)
    }

    /// Pass iff `c1 > floor`. On failure the error names the minimizing atom;
    /// the selection quotients are unbounded and the convergence hypotheses
    /// unverifiable in that case.
    pub fn check_c1_with_floor(&self, floor: f64) -> Result<()> {
        if self.c1 > floor {
            Ok(())
        } else {
            Err(Error::C1Violation {
                atom: self.c1_atom,
                c1: self.c1,
            })
        }
    }
}
