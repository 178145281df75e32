//! The repetition cap in action: a single-atom dictionary that can never fit
//! the data is selected exactly `cap` times, then the run stops with an
//! explicit reason. Without such a cap, unbounded re-selection of one atom is
//! exactly the behavior that defeats frame-type bounds on expansions.
//!
//! ```text
//! cargo run -p rfmp --example repetition_cap
//! ```

use nalgebra::{DMatrix, DVector};
use rfmp::{solve, Dictionary, Element, ForwardOperator, HilbertSpec, RfmpConfig};

fn main() -> Result<(), rfmp::Error> {
    let space = HilbertSpec::euclidean(2)?;
    let op = ForwardOperator::new(space, DMatrix::identity(2, 2))?;
    // One diagonal atom; the data has a component it can never reach.
    let dict = Dictionary::build(&op, vec![Element::from_slice(&[1.0, 1.0])?])?;
    let y = DVector::from_column_slice(&[1.0, 0.0]);

    let config = RfmpConfig {
        lambda: 0.0,
        repetition_cap: 6,
        max_iterations: 1000,
        stop_alpha_tol: None,
        stop_energy_tol: None,
        ..RfmpConfig::default()
    };
    let outcome = solve(&op, &y, &dict, &config)?;

    println!("stopped: {}", outcome.reason);
    println!("usage counts: {:?}", outcome.state.usage_counts());
    println!("steps taken:");
    for rec in outcome.state.history() {
        println!(
            "  n = {}: atom {} with alpha = {:+.3e}, residual norm {:.6}",
            rec.iteration, rec.atom, rec.alpha, rec.residual_norm
        );
    }
    println!();
    println!(
        "after the first step the atom is orthogonal to what remains; every further \
         selection is a zero-length step, and the cap is what ends the run"
    );
    Ok(())
}
