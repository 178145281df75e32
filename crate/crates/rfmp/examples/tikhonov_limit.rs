//! With lambda > 0 and a dictionary spanning the space, the greedy iterates
//! approach the solution of the regularized normal equation
//! `(F*F + lambda I) x = F* y`. This example runs both and prints how the
//! deviation shrinks with the iteration budget.
//!
//! ```text
//! cargo run -p rfmp --example tikhonov_limit
//! ```

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rfmp::{oracle, solve, Dictionary, Element, ForwardOperator, HilbertSpec, RfmpConfig};

fn main() -> Result<(), rfmp::Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let (n, l) = (20, 10);
    let lambda = 0.25;

    let space = HilbertSpec::euclidean(n)?;
    let raw = DMatrix::from_fn(l, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let op = ForwardOperator::new(space.clone(), &raw / 3.0)?;

    // Canonical basis plus random extras: a spanning dictionary.
    let mut atoms: Vec<Element> = (0..n)
        .map(|i| {
            let mut c = vec![0.0; n];
            c[i] = 1.0;
            Element::from_slice(&c)
        })
        .collect::<Result<_, _>>()?;
    for _ in 0..40 {
        let v = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
        atoms.push(Element::new(v.normalize())?);
    }
    let dict = Dictionary::build(&op, atoms)?;
    let y = DVector::from_fn(l, |_, _| rng.sample::<f64, _>(StandardNormal));

    let direct = oracle::tikhonov_solve(&op, &y, lambda)?;
    println!(
        "direct solve: functional value {:.6e}, normal-equation residual {:.1e}",
        direct.functional_value, direct.residual_of_characterization
    );
    println!();
    println!(
        "{:>10} {:>16} {:>16}",
        "max steps", "deviation", "functional"
    );
    for budget in [10, 100, 1000, 10000] {
        let config = RfmpConfig {
            lambda,
            max_iterations: budget,
            repetition_cap: 1_000_000,
            ..RfmpConfig::default()
        };
        let outcome = solve(&op, &y, &dict, &config)?;
        let gap = space.norm(&(outcome.state.approx() - &direct.element))?;
        let functional = oracle::tikhonov_functional(&op, &y, lambda, outcome.state.approx())?;
        println!("{budget:>10} {gap:>16.6e} {functional:>16.10e}");
    }
    println!();
    println!("the deviation falls toward zero; the functional falls toward the direct value");
    Ok(())
}
