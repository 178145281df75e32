//! Unregularized runs on a rank-deficient operator: the data cannot be fit,
//! but the image of the final approximation converges to the orthogonal
//! projection of the data onto the operator range.
//!
//! ```text
//! cargo run -p rfmp --example range_projection_limit
//! ```

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rfmp::{solve, Dictionary, Element, ForwardOperator, HilbertSpec, RfmpConfig};

fn main() -> Result<(), rfmp::Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (n, l, rank) = (16, 10, 4);

    // Rank-4 operator into R^10: most of the data space is unreachable.
    let space = HilbertSpec::euclidean(n)?;
    let left = DMatrix::from_fn(l, rank, |_, _| rng.sample::<f64, _>(StandardNormal));
    let right = DMatrix::from_fn(rank, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let op = ForwardOperator::new(space, (left * right) / 4.0)?;

    let atoms: Vec<Element> = (0..30)
        .map(|_| {
            let v = nalgebra::DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
            Element::new(v.normalize())
        })
        .collect::<Result<_, _>>()?;
    let dict = Dictionary::build(&op, atoms)?;
    let y = nalgebra::DVector::from_fn(l, |_, _| rng.sample::<f64, _>(StandardNormal));

    let projected = op.range_projection(&y)?;
    let unreachable = (&y - &projected).norm();
    println!(
        "data norm {:.4}, out-of-range part {:.4}",
        y.norm(),
        unreachable
    );
    println!();
    println!(
        "{:>10} {:>18} {:>18}",
        "max steps", "|F x - P y|", "residual norm"
    );
    for budget in [5, 50, 500, 5000] {
        let config = RfmpConfig {
            lambda: 0.0,
            max_iterations: budget,
            repetition_cap: 1_000_000,
            ..RfmpConfig::default()
        };
        let outcome = solve(&op, &y, &dict, &config)?;
        let image = op.apply(outcome.state.approx())?;
        let gap = (&image - &projected).norm();
        println!(
            "{budget:>10} {gap:>18.6e} {:>18.10}",
            outcome.state.residual().norm()
        );
    }
    println!();
    println!(
        "the image gap falls to zero while the residual norm flattens at {unreachable:.6}, \
         the distance from y to the range"
    );
    Ok(())
}
