//! When the dictionary only spans a subspace V built from right singular
//! vectors, the run converges to the orthogonal projection onto V of the full
//! regularized solution -- not to some unrelated compromise.
//!
//! ```text
//! cargo run -p rfmp --example subspace_restriction
//! ```

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rfmp::{oracle, solve, Dictionary, Element, ForwardOperator, HilbertSpec, RfmpConfig};

fn main() -> Result<(), rfmp::Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let (n, l) = (12, 8);
    let lambda = 0.6;

    let space = HilbertSpec::euclidean(n)?;
    let raw = DMatrix::from_fn(l, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let op = ForwardOperator::new(space.clone(), &raw / 3.0)?;

    // V = span of every other right singular vector.
    let sys = op.default_singular_system()?;
    let indices: Vec<usize> = (0..sys.len()).filter(|j| j % 2 == 0).collect();
    println!(
        "singular values: {:?}",
        sys.sigmas()
            .iter()
            .map(|s| (s * 1e3).round() / 1e3)
            .collect::<Vec<_>>()
    );
    println!("restricting the dictionary to singular indices {indices:?}");

    let mut atoms: Vec<Element> = indices
        .iter()
        .map(|&j| Ok(sys.right_vector(j)?.clone()))
        .collect::<Result<_, rfmp::Error>>()?;
    for _ in 0..20 {
        let mut combo = Element::zeros(n);
        for &j in &indices {
            combo.add_scaled(rng.sample::<f64, _>(StandardNormal), sys.right_vector(j)?);
        }
        let norm = space.norm(&combo)?;
        atoms.push(combo.scaled(1.0 / norm));
    }
    let dict = Dictionary::build(&op, atoms)?;
    let y = DVector::from_fn(l, |_, _| rng.sample::<f64, _>(StandardNormal));

    let config = RfmpConfig {
        lambda,
        max_iterations: 20_000,
        repetition_cap: 1_000_000,
        stop_alpha_tol: Some(1e-12),
        ..RfmpConfig::default()
    };
    let outcome = solve(&op, &y, &dict, &config)?;

    let full = oracle::tikhonov_solve(&op, &y, lambda)?;
    let restricted = oracle::subspace_tikhonov(&op, &y, lambda, &indices)?;
    let to_projected = space.norm(&(outcome.state.approx() - &restricted.element))?;
    let to_full = space.norm(&(outcome.state.approx() - &full.element))?;
    println!();
    println!(
        "stopped: {} after {} steps",
        outcome.reason,
        outcome.state.iteration()
    );
    println!("distance to projected solution P_V x*: {to_projected:.3e}");
    println!("distance to unrestricted solution x*:  {to_full:.3e}");
    println!();
    println!("the run lands on the projection of the full solution onto V");
    Ok(())
}
