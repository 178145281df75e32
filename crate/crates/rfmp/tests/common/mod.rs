//! Shared generators for the integration suites: seeded random operators,
//! metrics, dictionaries, and orthonormalization in the space metric.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rfmp::{Dictionary, Element, ForwardOperator, HilbertSpec, RfmpConfig, RfmpOutcome};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

pub fn gaussian_vector(rng: &mut impl Rng, len: usize) -> DVector<f64> {
    DVector::from_fn(len, |_, _| rng.sample(StandardNormal))
}

/// Random SPD metric with eigenvalues in `[0.5, 2.0]`.
pub fn random_spd_metric(rng: &mut impl Rng, n: usize) -> DMatrix<f64> {
    let q = gaussian_matrix(rng, n, n).qr().q();
    let eigs = DVector::from_fn(n, |_, _| rng.random_range(0.5..2.0));
    let m = &q * DMatrix::from_diagonal(&eigs) * q.transpose();
    (&m + m.transpose()) * 0.5
}

/// Space with identity metric on even seeds, random SPD metric on odd ones.
pub fn mixed_metric_space(rng: &mut impl Rng, n: usize, use_metric: bool) -> HilbertSpec {
    if use_metric {
        HilbertSpec::new(n, random_spd_metric(rng, n)).unwrap()
    } else {
        HilbertSpec::euclidean(n).unwrap()
    }
}

/// Random operator, rescaled so its largest singular value is 1.
pub fn random_operator_unit_norm(
    rng: &mut impl Rng,
    space: HilbertSpec,
    data_dim: usize,
) -> ForwardOperator {
    let n = space.dim();
    let raw = gaussian_matrix(rng, data_dim, n);
    let op = ForwardOperator::new(space.clone(), raw).unwrap();
    let norm = op.operator_norm().unwrap();
    let scaled = op.matrix() / norm;
    ForwardOperator::new(space, scaled).unwrap()
}

/// Random rank-deficient operator of the given rank, largest singular value 1.
pub fn random_rank_deficient_operator(
    rng: &mut impl Rng,
    space: HilbertSpec,
    data_dim: usize,
    rank: usize,
) -> ForwardOperator {
    let n = space.dim();
    let left = gaussian_matrix(rng, data_dim, rank);
    let right = gaussian_matrix(rng, rank, n);
    let op = ForwardOperator::new(space.clone(), left * right).unwrap();
    let norm = op.operator_norm().unwrap();
    let scaled = op.matrix() / norm;
    ForwardOperator::new(space, scaled).unwrap()
}

/// Modified Gram-Schmidt in the space inner product; near-dependent inputs
/// are dropped.
pub fn h_orthonormalize(space: &HilbertSpec, vectors: Vec<Element>) -> Vec<Element> {
    let mut basis: Vec<Element> = Vec::new();
    for mut v in vectors {
        for _ in 0..2 {
            for b in &basis {
                let c = space.inner(&v, b).unwrap();
                v.add_scaled(-c, b);
            }
        }
        let norm = space.norm(&v).unwrap();
        if norm > 1e-10 {
            basis.push(v.scaled(1.0 / norm));
        }
    }
    basis
}

/// A random orthonormal basis of the whole space in its own metric.
pub fn random_h_orthonormal_basis(rng: &mut impl Rng, space: &HilbertSpec) -> Vec<Element> {
    let n = space.dim();
    let raw: Vec<Element> = (0..n)
        .map(|_| Element::new(gaussian_vector(rng, n)).unwrap())
        .collect();
    let basis = h_orthonormalize(space, raw);
    assert_eq!(basis.len(), n, "random vectors failed to span the space");
    basis
}

/// Random atoms normalized to unit norm in the space metric.
pub fn random_unit_atoms(rng: &mut impl Rng, space: &HilbertSpec, count: usize) -> Vec<Element> {
    (0..count)
        .map(|_| {
            let v = Element::new(gaussian_vector(rng, space.dim())).unwrap();
            let norm = space.norm(&v).unwrap();
            v.scaled(1.0 / norm)
        })
        .collect()
}

/// Random atoms rescaled so each image `F d` has unit data norm.
pub fn random_unit_image_atoms(
    rng: &mut impl Rng,
    op: &ForwardOperator,
    count: usize,
) -> Vec<Element> {
    let mut atoms = Vec::with_capacity(count);
    while atoms.len() < count {
        let v = Element::new(gaussian_vector(rng, op.domain_dim())).unwrap();
        let image_norm = op.apply(&v).unwrap().norm();
        if image_norm > 1e-8 {
            atoms.push(v.scaled(1.0 / image_norm));
        }
    }
    atoms
}

/// Every atom's usage must stay within the configured repetition cap.
pub fn assert_usage_within_cap(outcome: &RfmpOutcome, config: &RfmpConfig) {
    let max = outcome
        .state
        .usage_counts()
        .iter()
        .copied()
        .max()
        .unwrap_or(0);
    assert!(
        max <= config.repetition_cap,
        "usage count {max} exceeds repetition cap {}",
        config.repetition_cap
    );
}

/// Difference norm in the space metric.
pub fn h_distance(space: &HilbertSpec, a: &Element, b: &Element) -> f64 {
    space.norm(&(a - b)).unwrap()
}

/// Build a dictionary or panic; test-side sugar.
pub fn dictionary(op: &ForwardOperator, atoms: Vec<Element>) -> Dictionary {
    Dictionary::build(op, atoms).unwrap()
}
