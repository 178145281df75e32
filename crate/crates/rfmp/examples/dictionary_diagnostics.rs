//! Dictionary health checks before a run: the quotient floor `c1`, the norm
//! bound `c2`, the semi-frame constant from the normalized Gram spectrum, and
//! what degrades each of them.
//!
//! ```text
//! cargo run -p rfmp --example dictionary_diagnostics
//! ```

use nalgebra::DMatrix;
use rfmp::{Dictionary, Element, ForwardOperator, HilbertSpec};

fn report(label: &str, dict: &Dictionary, lambda: f64) -> Result<(), rfmp::Error> {
    let d = dict.diagnostics(lambda)?;
    println!("{label} (lambda = {lambda}):");
    println!("  c1 = {:.4e} (atom {})", d.c1, d.c1_atom);
    println!("  c2 = {:.4e} (atom {})", d.c2, d.c2_atom);
    println!("  semi_frame_c = {:.4e}", d.semi_frame_c);
    println!("  span_rank = {} of {}", d.span_rank, dict.atom(0).dim());
    if !dict.collinear_pairs().is_empty() {
        println!("  collinear pairs: {:?}", dict.collinear_pairs());
    }
    match d.check_c1_positive() {
        Ok(()) => println!("  gate: PASS"),
        Err(e) => println!("  gate: FAIL ({e})"),
    }
    println!();
    Ok(())
}

fn main() -> Result<(), rfmp::Error> {
    // Operator with a kernel: the second coordinate is invisible.
    let space = HilbertSpec::euclidean(2)?;
    let op = ForwardOperator::new(space, DMatrix::from_row_slice(1, 2, &[1.0, 0.0]))?;

    let healthy = Dictionary::build(
        &op,
        vec![
            Element::from_slice(&[1.0, 0.0])?,
            Element::from_slice(&[0.6, 0.8])?,
        ],
    )?;
    report("well-conditioned pair", &healthy, 0.0)?;

    let kernel_atom = Dictionary::build(
        &op,
        vec![
            Element::from_slice(&[1.0, 0.0])?,
            Element::from_slice(&[0.0, 1.0])?, // annihilated by the operator
        ],
    )?;
    report("atom in the kernel", &kernel_atom, 0.0)?;
    report("same dictionary, regularized", &kernel_atom, 0.1)?;

    let duplicated = Dictionary::build(
        &op,
        vec![
            Element::from_slice(&[1.0, 0.0])?,
            Element::from_slice(&[1.0, 0.0])?, // exact duplicate
            Element::from_slice(&[0.0, 1.0])?,
        ],
    )?;
    report("duplicated atom", &duplicated, 0.1)?;

    println!("a kernel atom kills c1 at lambda = 0 but any lambda > 0 restores it;");
    println!("a duplicated atom drives the semi-frame constant to zero either way");
    Ok(())
}
