//! The text problem-file format and the batch drivers behind the CLI: write a
//! problem, load it back bit-exactly, run it, and show the run-log head.
//!
//! ```text
//! cargo run -p rfmp --example problem_files
//! ```

use nalgebra::{DMatrix, DVector};
use rfmp::io::{self, Problem};
use rfmp::{Dictionary, Element, ForwardOperator, HilbertSpec, RfmpConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join("rfmp_problem_files_example");
    std::fs::create_dir_all(&dir)?;
    let problem_path = dir.join("demo_problem.txt");

    // A small weighted-metric problem.
    let metric = DMatrix::from_row_slice(3, 3, &[2.0, 0.3, 0.0, 0.3, 1.0, 0.1, 0.0, 0.1, 1.5]);
    let space = HilbertSpec::new(3, metric)?;
    let op = ForwardOperator::new(
        space,
        DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 0.5, 0.0, 1.0, -0.25]),
    )?;
    let dictionary = Dictionary::build(
        &op,
        vec![
            Element::from_slice(&[1.0, 0.0, 0.0])?,
            Element::from_slice(&[0.0, 1.0, 0.0])?,
            Element::from_slice(&[0.0, 0.0, 1.0])?,
            Element::from_slice(&[1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0])?,
        ],
    )?;
    let problem = Problem {
        operator: op,
        data: DVector::from_column_slice(&[0.7, -0.2]),
        dictionary,
        initial: None,
    };

    io::write_problem(&problem_path, &problem)?;
    println!("wrote {}", problem_path.display());
    println!("--- file contents ---");
    print!("{}", std::fs::read_to_string(&problem_path)?);
    println!("---------------------");

    // Round trip: every value is reproduced bit-exactly.
    let loaded = io::load_problem(&problem_path)?;
    assert_eq!(
        loaded.operator.matrix().as_slice(),
        problem.operator.matrix().as_slice()
    );
    println!("reloaded problem matches the written one exactly");
    println!();

    // The same driver the `rfmp solve` subcommand uses.
    let config = RfmpConfig {
        max_iterations: 100,
        stop_alpha_tol: Some(1e-12),
        ..RfmpConfig::new(0.1)
    };
    let artifacts = io::run_solve(&problem_path, &config, dir.join("out"))?;
    println!(
        "solve: {} after {} steps",
        artifacts.outcome.reason,
        artifacts.outcome.state.iteration()
    );
    println!("run log at {}:", artifacts.log_path.display());
    let log = std::fs::read_to_string(&artifacts.log_path)?;
    for line in log.lines().take(16) {
        println!("  {line}");
    }
    Ok(())
}
