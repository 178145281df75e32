//! Acceptance suite: each test pins one verification criterion at its stated
//! tolerance and prints a single PASS line when it holds.
//!
//! Run with `cargo test -p rfmp --test acceptance -- --nocapture` to see the
//! per-criterion lines.

mod common;

use common::*;
use nalgebra::DVector;
use rand::Rng as _;
use rfmp::oracle;
use rfmp::solver::{selection_score, step_coefficient, RfmpState};
use rfmp::{solve, Element, RfmpConfig, StopReason};

/// Criterion 1: per-step energy identity and monotonicity.
///
/// On 50 random problems (l = 20, N = 50, K = 200, lambda in {0, 0.1, 1}),
/// every step satisfies `E_n = E_{n-1} - score_n` within `1e-10 (1 + E_{n-1})`
/// and the energy column is nonincreasing.
#[test]
fn criterion_1_energy_identity() {
    let lambdas = [0.0, 0.1, 1.0];
    for problem_index in 0..50u64 {
        let mut r = rng(1_000 + problem_index);
        let lambda = lambdas[problem_index as usize % lambdas.len()];
        let space = mixed_metric_space(&mut r, 50, problem_index % 2 == 1);
        let op = random_operator_unit_norm(&mut r, space, 20);
        let dict = dictionary(&op, random_unit_atoms(&mut r, op.space(), 200));
        let y = gaussian_vector(&mut r, 20);
        let config = RfmpConfig {
            lambda,
            max_iterations: 150,
            repetition_cap: 100_000,
            ..RfmpConfig::default()
        };
        let outcome = solve(&op, &y, &dict, &config).unwrap();
        assert_usage_within_cap(&outcome, &config);
        assert!(
            outcome.state.iteration() > 0,
            "run {problem_index} took no steps"
        );

        let mut prev = outcome.state.initial_energy();
        for rec in outcome.state.history() {
            let expected = prev - rec.score;
            assert!(
                (rec.energy - expected).abs() <= 1e-10 * (1.0 + prev),
                "energy identity violated: problem {problem_index}, step {}, E = {}, expected {}",
                rec.iteration,
                rec.energy,
                expected
            );
            assert!(
                rec.energy <= prev,
                "energy increased: problem {problem_index}, step {}",
                rec.iteration
            );
            prev = rec.energy;
        }
    }
    println!("criterion 1 (energy identity, 50 problems x 150 steps): PASS");
}

/// Criterion 2: with a spanning dictionary and lambda > 0 the run reproduces
/// the regularized normal-equation solution.
///
/// Dictionary = an orthonormal basis of the space plus 100 random atoms;
/// run until |alpha| < 1e-10 or 20000 iterations; require the final
/// normal-equation residual <= 1e-6 |F* y| and element deviation from the
/// direct solution <= 1e-5 (1 + |solution|).
#[test]
fn criterion_2_tikhonov_limit() {
    let lambdas = [0.1, 1.0];
    for problem_index in 0..20u64 {
        let mut r = rng(2_000 + problem_index);
        let lambda = lambdas[problem_index as usize % lambdas.len()];
        let n = 24;
        let space = mixed_metric_space(&mut r, n, problem_index % 2 == 1);
        let op = random_operator_unit_norm(&mut r, space, 12);
        let mut atoms = random_h_orthonormal_basis(&mut r, op.space());
        atoms.extend(random_unit_atoms(&mut r, op.space(), 100));
        let dict = dictionary(&op, atoms);
        let y = gaussian_vector(&mut r, 12);

        let config = RfmpConfig {
            lambda,
            max_iterations: 20_000,
            repetition_cap: 10_000_000,
            stop_alpha_tol: Some(1e-10),
            ..RfmpConfig::default()
        };
        let outcome = solve(&op, &y, &dict, &config).unwrap();
        assert_usage_within_cap(&outcome, &config);

        let space = op.space();
        let final_approx = outcome.state.approx();
        let fstar_y = op.apply_adjoint(&y).unwrap();
        let mut lhs = op.apply_adjoint(&op.apply(final_approx).unwrap()).unwrap();
        lhs.add_scaled(lambda, final_approx);
        let ne_residual = space.norm(&(&lhs - &fstar_y)).unwrap();
        let ne_scale = space.norm(&fstar_y).unwrap();
        assert!(
            ne_residual <= 1e-6 * ne_scale,
            "problem {problem_index}: normal-equation residual {ne_residual:.3e} > 1e-6 * {ne_scale:.3e} \
             (stopped: {} after {} steps)",
            outcome.reason,
            outcome.state.iteration()
        );

        let direct = oracle::tikhonov_solve(&op, &y, lambda).unwrap();
        let deviation = h_distance(space, final_approx, &direct.element);
        let scale = 1.0 + space.norm(&direct.element).unwrap();
        assert!(
            deviation <= 1e-5 * scale,
            "problem {problem_index}: element deviation {deviation:.3e} > 1e-5 * {scale:.3e}"
        );
    }
    println!("criterion 2 (regularized limit matches direct solution, 20 problems): PASS");
}

/// Criterion 3: with lambda = 0 and images spanning the operator range, the
/// final image reproduces the range projection of the data.
///
/// 20 random rank-deficient problems (l = 15, rank 8); require
/// `|F F_final - P_range y| <= 1e-6 |y|` and
/// `max_d |<R_final, F d>| <= 1e-6 |y|` within 20000 iterations.
#[test]
fn criterion_3_range_projection_limit() {
    for problem_index in 0..20u64 {
        let mut r = rng(3_000 + problem_index);
        let space = mixed_metric_space(&mut r, 30, problem_index % 2 == 1);
        let op = random_rank_deficient_operator(&mut r, space, 15, 8);
        let dict = dictionary(&op, random_unit_image_atoms(&mut r, &op, 60));
        let y = gaussian_vector(&mut r, 15);

        let config = RfmpConfig {
            lambda: 0.0,
            max_iterations: 20_000,
            repetition_cap: 10_000_000,
            stop_alpha_tol: Some(1e-9),
            ..RfmpConfig::default()
        };
        let outcome = solve(&op, &y, &dict, &config).unwrap();
        assert_usage_within_cap(&outcome, &config);

        let image = op.apply(outcome.state.approx()).unwrap();
        let projected = op.range_projection(&y).unwrap();
        let image_deviation = (&image - &projected).norm();
        assert!(
            image_deviation <= 1e-6 * y.norm(),
            "problem {problem_index}: image deviation {image_deviation:.3e} > 1e-6 |y| \
             (stopped: {} after {} steps)",
            outcome.reason,
            outcome.state.iteration()
        );

        let max_correlation = (0..dict.len())
            .map(|i| outcome.state.residual().dot(dict.image(i)).abs())
            .fold(0.0_f64, f64::max);
        assert!(
            max_correlation <= 1e-6 * y.norm(),
            "problem {problem_index}: residual correlation {max_correlation:.3e} > 1e-6 |y|"
        );
    }
    println!("criterion 3 (unregularized limit matches range projection, 20 problems): PASS");
}

/// Criterion 4: a dictionary restricted to a singular-vector subspace V
/// converges to the projection of the full solution onto V, and the normal
/// operator commutes with the projector onto V.
#[test]
fn criterion_4_subspace_limit() {
    let lambdas = [0.5, 1.0];
    for problem_index in 0..10u64 {
        let mut r = rng(4_000 + problem_index);
        let lambda = lambdas[problem_index as usize % lambdas.len()];
        let space = mixed_metric_space(&mut r, 16, problem_index % 2 == 1);
        let op = random_operator_unit_norm(&mut r, space, 10);
        let sys = op.default_singular_system().unwrap();
        let indices: Vec<usize> = (0..sys.len()).filter(|j| j % 2 == 0).collect();

        // Atoms inside V: the selected singular vectors plus random
        // combinations of them, unit-normalized.
        let mut atoms: Vec<Element> = indices
            .iter()
            .map(|&j| sys.right_vector(j).unwrap().clone())
            .collect();
        for _ in 0..30 {
            let weights = gaussian_vector(&mut r, indices.len());
            let mut combo = Element::zeros(op.domain_dim());
            for (pos, &j) in indices.iter().enumerate() {
                combo.add_scaled(weights[pos], sys.right_vector(j).unwrap());
            }
            let norm = op.space().norm(&combo).unwrap();
            atoms.push(combo.scaled(1.0 / norm));
        }
        let dict = dictionary(&op, atoms);
        let y = gaussian_vector(&mut r, 10);

        let config = RfmpConfig {
            lambda,
            max_iterations: 20_000,
            repetition_cap: 10_000_000,
            stop_alpha_tol: Some(1e-11),
            ..RfmpConfig::default()
        };
        let outcome = solve(&op, &y, &dict, &config).unwrap();
        assert_usage_within_cap(&outcome, &config);

        let full = oracle::tikhonov_solve(&op, &y, lambda).unwrap();
        let restricted = oracle::subspace_tikhonov(&op, &y, lambda, &indices).unwrap();
        // Both characterizations of the projected solution must agree: it is
        // the projection of the full solution AND it satisfies the restricted
        // normal equation.
        assert!(
            restricted.residual_of_characterization <= 1e-8,
            "problem {problem_index}: restricted normal-equation residual {:.3e}",
            restricted.residual_of_characterization
        );
        let deviation = h_distance(op.space(), outcome.state.approx(), &restricted.element);
        let scale = 1.0 + op.space().norm(&full.element).unwrap();
        assert!(
            deviation <= 1e-5 * scale,
            "problem {problem_index}: deviation from projected solution {deviation:.3e} > 1e-5 * {scale:.3e} \
             (stopped: {} after {} steps)",
            outcome.reason,
            outcome.state.iteration()
        );

        // Commutation of the normal operator with the subspace projector.
        for probe in 0..10 {
            let u = Element::new(gaussian_vector(&mut r, op.domain_dim())).unwrap();
            let normal = |v: &Element| op.apply_adjoint(&op.apply(v).unwrap()).unwrap();
            let lhs = sys.project_onto_subspace(&indices, &normal(&u)).unwrap();
            let rhs = normal(&sys.project_onto_subspace(&indices, &u).unwrap());
            let gap = h_distance(op.space(), &lhs, &rhs);
            assert!(
                gap <= 1e-8,
                "problem {problem_index}, probe {probe}: commutation gap {gap:.3e} > 1e-8"
            );
        }
    }
    println!("criterion 4 (subspace-restricted limit and commutation, 10 problems): PASS");
}

/// Criterion 5: the closed-form step coefficient minimizes the one-step
/// objective against a 201-point grid spanning [alpha - 1, alpha + 1].
#[test]
fn criterion_5_step_optimality() {
    let lambdas = [0.0, 0.3, 1.0];
    let mut checked = 0usize;
    for case in 0..1000u64 {
        let mut r = rng(5_000 + case);
        let lambda = lambdas[case as usize % lambdas.len()];
        let space = mixed_metric_space(&mut r, 8, case % 2 == 1);
        let op = random_operator_unit_norm(&mut r, space, 6);
        let dict = dictionary(&op, random_unit_atoms(&mut r, op.space(), 12));
        let y = gaussian_vector(&mut r, 6);
        let initial = Element::new(gaussian_vector(&mut r, 8)).unwrap();
        let config = RfmpConfig {
            lambda,
            initial: Some(initial),
            ..RfmpConfig::default()
        };
        let state = RfmpState::init(&op, &y, &dict, &config).unwrap();
        let atom = (case as usize * 7) % dict.len();

        let alpha = step_coefficient(&state, &dict, lambda, atom).unwrap();
        let objective = |a: f64| {
            let shifted = state.approx().coeffs() + dict.atom(atom).coeffs() * a;
            let candidate = Element::new(shifted).unwrap();
            let misfit = &y - op.apply(&candidate).unwrap();
            misfit.norm_squared() + lambda * op.space().norm_sq(&candidate).unwrap()
        };
        let at_alpha = objective(alpha);
        for k in 0..201 {
            let grid_point = alpha - 1.0 + 0.01 * k as f64;
            let value = objective(grid_point);
            assert!(
                at_alpha <= value + 1e-10 * (1.0 + at_alpha.abs()),
                "case {case}: objective at alpha {at_alpha} beaten at grid point {grid_point} ({value})"
            );
        }
        // Cross-check: alpha^2 * denominator equals the selection score.
        let den = dict.image_norm_sq(atom) + lambda * dict.atom_norm_sq(atom);
        let score = selection_score(&state, &dict, lambda, atom).unwrap();
        assert!((alpha * alpha * den - score).abs() <= 1e-10 * (1.0 + score));
        checked += 1;
    }
    assert_eq!(checked, 1000);
    println!("criterion 5 (closed-form step beats 201-point grid, 1000 cases): PASS");
}

/// Criterion 6: rescaling every atom by a random nonzero factor leaves the
/// selected index sequence unchanged for the first 100 iterations.
#[test]
fn criterion_6_scaling_invariance() {
    let lambdas = [0.0, 0.5];
    for problem_index in 0..10u64 {
        let mut r = rng(6_000 + problem_index);
        let lambda = lambdas[problem_index as usize % lambdas.len()];
        let space = mixed_metric_space(&mut r, 20, problem_index % 2 == 1);
        let op = random_operator_unit_norm(&mut r, space, 12);
        let atoms = random_unit_atoms(&mut r, op.space(), 80);
        let scaled_atoms: Vec<Element> = atoms
            .iter()
            .map(|a| a.scaled(r.random_range(0.1..10.0)))
            .collect();
        let dict = dictionary(&op, atoms);
        let scaled_dict = dictionary(&op, scaled_atoms);
        let y = gaussian_vector(&mut r, 12);

        let config = RfmpConfig {
            lambda,
            max_iterations: 100,
            repetition_cap: 10_000_000,
            stop_alpha_tol: None,
            stop_energy_tol: None,
            ..RfmpConfig::default()
        };
        let base = solve(&op, &y, &dict, &config).unwrap();
        let scaled = solve(&op, &y, &scaled_dict, &config).unwrap();
        assert_usage_within_cap(&base, &config);
        assert_usage_within_cap(&scaled, &config);

        let base_sequence: Vec<usize> = base.state.history().iter().map(|rec| rec.atom).collect();
        let scaled_sequence: Vec<usize> =
            scaled.state.history().iter().map(|rec| rec.atom).collect();
        assert_eq!(base_sequence.len(), 100);
        assert_eq!(
            base_sequence, scaled_sequence,
            "problem {problem_index}: selection sequences diverged under atom rescaling"
        );
    }
    println!("criterion 6 (selection invariant under atom rescaling, 10 problems): PASS");
}

/// Criterion 7: a single-atom dictionary that can never fit the data exactly
/// is selected exactly M times, and the run stops on cap exhaustion.
#[test]
fn criterion_7_repetition_cap() {
    use nalgebra::DMatrix;
    use rfmp::{Dictionary, ForwardOperator, HilbertSpec};

    let space = HilbertSpec::euclidean(2).unwrap();
    let op = ForwardOperator::new(space, DMatrix::identity(2, 2)).unwrap();
    let dict = Dictionary::build(&op, vec![Element::from_slice(&[1.0, 1.0]).unwrap()]).unwrap();
    let y = DVector::from_column_slice(&[1.0, 0.0]);
    let cap = 5;
    let config = RfmpConfig {
        lambda: 0.0,
        repetition_cap: cap,
        max_iterations: 10_000,
        stop_alpha_tol: None,
        stop_energy_tol: None,
        ..RfmpConfig::default()
    };
    let outcome = solve(&op, &y, &dict, &config).unwrap();
    assert_eq!(outcome.reason, StopReason::RepetitionCapExhausted);
    assert_eq!(outcome.reason.to_string(), "repetition cap exhausted");
    assert_eq!(outcome.state.usage_counts(), &[cap]);
    assert_eq!(outcome.state.history().len(), cap as usize);
    assert!(
        outcome.state.residual().norm() > 0.1,
        "the residual must never be exactly fit"
    );
    assert_usage_within_cap(&outcome, &config);
    println!("criterion 7 (repetition cap selects the atom exactly M times): PASS");
}

/// Criterion 8: the C1 gate. A kernel atom with lambda = 0 exits with code 2
/// before any iteration; the same dictionary passes at lambda = 0.1.
#[test]
fn criterion_8_hypothesis_gate_exit_codes() {
    use std::process::Command;

    let dir = tempfile::tempdir().unwrap();
    let problem_path = dir.path().join("kernel_atom.txt");
    // A = [1 0]: the atom (0, 1) lies in the kernel.
    std::fs::write(
        &problem_path,
        "OPERATOR 1 2\n1 0\nDATA 1\n1\nDICTIONARY 2 2\n1 0\n0 1\n",
    )
    .unwrap();
    let out_dir = dir.path().join("out");

    let gated = Command::new(env!("CARGO_BIN_EXE_rfmp"))
        .args(["solve"])
        .arg(&problem_path)
        .args(["--lambda", "0", "--out"])
        .arg(&out_dir)
        .output()
        .unwrap();
    assert_eq!(
        gated.status.code(),
        Some(2),
        "stderr: {}",
        String::from_utf8_lossy(&gated.stderr)
    );
    assert!(
        String::from_utf8_lossy(&gated.stderr).contains("C1"),
        "stderr should cite the violated condition"
    );
    assert!(
        !out_dir.join("run_log.csv").exists(),
        "gate must fire before any iteration output"
    );

    let passed = Command::new(env!("CARGO_BIN_EXE_rfmp"))
        .args(["solve"])
        .arg(&problem_path)
        .args(["--lambda", "0.1", "--out"])
        .arg(&out_dir)
        .output()
        .unwrap();
    assert_eq!(
        passed.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&passed.stderr)
    );
    assert!(out_dir.join("run_log.csv").exists());
    println!("criterion 8 (hypothesis gate exit codes 2/0): PASS");
}

/// Criterion 9: the dense and spectral solution paths agree to 1e-8 relative
/// on 100 random problems, including non-identity SPD metrics.
#[test]
fn criterion_9_oracle_self_consistency() {
    let lambdas = [0.1, 1.0, 3.0];
    for case in 0..100u64 {
        let mut r = rng(9_000 + case);
        let lambda = lambdas[case as usize % lambdas.len()];
        let (n, l) = if case % 3 == 0 { (6, 9) } else { (12, 7) };
        let space = mixed_metric_space(&mut r, n, case % 2 == 1);
        let op = random_operator_unit_norm(&mut r, space, l);
        let y = gaussian_vector(&mut r, l);

        let dense = oracle::tikhonov_solve(&op, &y, lambda).unwrap();
        let spectral = oracle::tikhonov_solve_spectral(&op, &y, lambda).unwrap();
        let gap = h_distance(op.space(), &dense.element, &spectral.element);
        let scale = 1.0 + op.space().norm(&dense.element).unwrap();
        assert!(
            gap <= 1e-8 * scale,
            "case {case}: dense and spectral paths differ by {gap:.3e}"
        );
        assert!(dense.residual_of_characterization <= 1e-10);
    }
    println!("criterion 9 (dense and spectral oracle paths agree, 100 problems): PASS");
}
