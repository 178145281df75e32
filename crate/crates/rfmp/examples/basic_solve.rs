//! Smallest end-to-end run: build a problem in code, solve, print the trace.
//!
//! ```text
//! cargo run -p rfmp --example basic_solve
//! ```

use nalgebra::{DMatrix, DVector};
use rfmp::{solve, Dictionary, Element, ForwardOperator, HilbertSpec, RfmpConfig};

fn main() -> Result<(), rfmp::Error> {
    // A 3x4 operator on a Euclidean space: more unknowns than data.
    let space = HilbertSpec::euclidean(4)?;
    let matrix = DMatrix::from_row_slice(
        3,
        4,
        &[
            1.0, 0.5, 0.0, -0.3, //
            0.0, 1.0, 0.4, 0.2, //
            0.3, 0.0, 1.0, -0.5,
        ],
    );
    let op = ForwardOperator::new(space, matrix)?;

    // A handful of hand-picked trial directions.
    let atoms = vec![
        Element::from_slice(&[1.0, 0.0, 0.0, 0.0])?,
        Element::from_slice(&[0.0, 1.0, 0.0, 0.0])?,
        Element::from_slice(&[0.0, 0.0, 1.0, 0.0])?,
        Element::from_slice(&[0.0, 0.0, 0.0, 1.0])?,
        Element::from_slice(&[0.5, 0.5, 0.5, 0.5])?,
        Element::from_slice(&[1.0, -1.0, 0.0, 0.0])?,
    ];
    let dict = Dictionary::build(&op, atoms)?;
    let y = DVector::from_column_slice(&[1.0, -0.5, 0.25]);

    let config = RfmpConfig {
        max_iterations: 200,
        stop_alpha_tol: Some(1e-10),
        ..RfmpConfig::new(0.05)
    };
    let outcome = solve(&op, &y, &dict, &config)?;

    println!(
        "stopped: {} after {} steps",
        outcome.reason,
        outcome.state.iteration()
    );
    println!(
        "final residual norm: {:.3e}",
        outcome.state.residual().norm()
    );
    println!(
        "approximation: {:?}",
        outcome.state.approx().coeffs().as_slice()
    );
    println!();
    println!("first ten steps:");
    println!(
        "{:>4} {:>5} {:>13} {:>13} {:>13}",
        "n", "atom", "alpha", "energy", "score"
    );
    for rec in outcome.state.history().iter().take(10) {
        println!(
            "{:>4} {:>5} {:>13.4e} {:>13.4e} {:>13.4e}",
            rec.iteration, rec.atom, rec.alpha, rec.energy, rec.score
        );
    }
    Ok(())
}
