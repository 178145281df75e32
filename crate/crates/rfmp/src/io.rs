//! Problem ingestion, run logs, and the batch drivers behind the `rfmp`
//! binary.
//!
//! # Problem file format
//!
//! A problem is a single text file of labeled blocks. Values are
//! whitespace-separated decimal floats, `#` starts a comment, blank lines are
//! ignored, and blocks may appear in any order:
//!
//! ```text
//! OPERATOR <l> <N>      # followed by l rows of N values
//! METRIC <N>            # optional; N rows of N values (identity if absent)
//! DATA <l>              # followed by one row of l values
//! DICTIONARY <K> <N>    # followed by K rows of N values (atoms as rows)
//! INITIAL <N>           # optional; one row of N values
//! ```
//!
//! Writers emit 17 significant digits so that load(write(p)) reproduces every
//! value bit-exactly.
//!
//! # Exit codes
//!
//! The command drivers classify failures for scripting: `0` success, `2`
//! hypothesis violation (C1 not positive), `3` parse or validation failure,
//! `4` numerical abort, `1` anything else (including a failed `verify`
//! comparison).

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::dictionary::{Dictionary, DictionaryDiagnostics};
use crate::error::Error;
use crate::hilbert::{Element, HilbertSpec};
use crate::operator::ForwardOperator;
use crate::oracle::{self, OracleSolution};
use crate::solver::{self, RfmpConfig, RfmpOutcome, StopReason};

/// A fully validated problem: operator (with its space), data vector,
/// dictionary, and optional start element.
#[derive(Debug, Clone)]
pub struct Problem {
    pub operator: ForwardOperator,
    pub data: DVector<f64>,
    pub dictionary: Dictionary,
    pub initial: Option<Element>,
}

/// Errors while reading or validating a problem file.
#[derive(Debug, Error)]
pub enum ProblemIoError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error(transparent)]
    Model(#[from] Error),
}

struct Block {
    header_line: usize,
    dims: Vec<usize>,
    rows: Vec<Vec<f64>>,
}

struct Parser<'a> {
    path: &'a Path,
    lines: Vec<(usize, String)>,
    cursor: usize,
}

impl<'a> Parser<'a> {
    fn new(path: &'a Path, text: &str) -> Self {
        let lines = text
            .lines()
            .enumerate()
            .filter_map(|(i, raw)| {
                let content = raw.split('#').next().unwrap_or("").trim();
                if content.is_empty() {
                    None
                } else {
                    Some((i + 1, content.to_string()))
                }
            })
            .collect();
        Self {
            path,
            lines,
            cursor: 0,
        }
    }

    fn error(&self, line: usize, message: String) -> ProblemIoError {
        ProblemIoError::Parse {
            path: self.path.to_path_buf(),
            line,
            message,
        }
    }

    fn parse_row(
        &self,
        line: usize,
        text: &str,
        expected: usize,
        block: &str,
        row: usize,
    ) -> Result<Vec<f64>, ProblemIoError> {
        let mut values = Vec::with_capacity(expected);
        for token in text.split_whitespace() {
            let value: f64 = token.parse().map_err(|_| {
                self.error(
                    line,
                    format!("{block} row {row}: cannot parse '{token}' as a number"),
                )
            })?;
            values.push(value);
        }
        if values.len() != expected {
            return Err(self.error(
                line,
                format!(
                    "{block} row {row}: expected {expected} values, got {}",
                    values.len()
                ),
            ));
        }
        Ok(values)
    }

    fn next_block(&mut self) -> Result<Option<(String, Block)>, ProblemIoError> {
        let Some((line, text)) = self.lines.get(self.cursor).cloned() else {
            return Ok(None);
        };
        self.cursor += 1;
        let mut parts = text.split_whitespace();
        let keyword = parts.next().expect("non-empty line").to_uppercase();
        let dims: Vec<usize> = parts
            .map(|t| {
                t.parse().map_err(|_| {
                    self.error(
                        line,
                        format!("{keyword}: cannot parse '{t}' as a dimension"),
                    )
                })
            })
            .collect::<Result<_, _>>()?;

        let (expected_dims, row_count, row_len): (usize, usize, usize) = match keyword.as_str() {
            "OPERATOR" | "DICTIONARY" => {
                if dims.len() != 2 {
                    return Err(self.error(line, format!("{keyword} expects two dimensions")));
                }
                (2, dims[0], dims[1])
            }
            "METRIC" => {
                if dims.len() != 1 {
                    return Err(self.error(line, format!("{keyword} expects one dimension")));
                }
                (1, dims[0], dims[0])
            }
            "DATA" | "INITIAL" => {
                if dims.len() != 1 {
                    return Err(self.error(line, format!("{keyword} expects one dimension")));
                }
                (1, 1, dims[0])
            }
            other => {
                return Err(self.error(line, format!("unknown block '{other}'")));
            }
        };
        debug_assert_eq!(dims.len(), expected_dims);
        if row_count == 0 || row_len == 0 {
            return Err(self.error(line, format!("{keyword}: dimensions must be positive")));
        }

        let mut rows = Vec::with_capacity(row_count);
        for row in 0..row_count {
            let Some((row_line, row_text)) = self.lines.get(self.cursor).cloned() else {
                return Err(self.error(
                    line,
                    format!("{keyword}: expected {row_count} rows, file ended after {row}"),
                ));
            };
            self.cursor += 1;
            rows.push(self.parse_row(row_line, &row_text, row_len, &keyword, row + 1)?);
        }
        Ok(Some((
            keyword,
            Block {
                header_line: line,
                dims,
                rows,
            },
        )))
    }
}

/// Parse and validate a problem file.
///
/// Validation errors name the offending block and row; model-level failures
/// (non-SPD metric, zero atom, dimensional inconsistency between blocks) are
/// reported with the same messages the library constructors produce.
pub fn load_problem(path: impl AsRef<Path>) -> Result<Problem, ProblemIoError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| ProblemIoError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut parser = Parser::new(path, &text);

    let mut operator_block: Option<Block> = None;
    let mut metric_block: Option<Block> = None;
    let mut data_block: Option<Block> = None;
    let mut dictionary_block: Option<Block> = None;
    let mut initial_block: Option<Block> = None;

    while let Some((keyword, block)) = parser.next_block()? {
        let slot = match keyword.as_str() {
            "OPERATOR" => &mut operator_block,
            "METRIC" => &mut metric_block,
            "DATA" => &mut data_block,
            "DICTIONARY" => &mut dictionary_block,
            "INITIAL" => &mut initial_block,
            _ => unreachable!("next_block rejects unknown keywords"),
        };
        if slot.is_some() {
            return Err(parser.error(block.header_line, format!("duplicate {keyword} block")));
        }
        *slot = Some(block);
    }

    let operator =
        operator_block.ok_or_else(|| parser.error(0, "missing OPERATOR block".into()))?;
    let data = data_block.ok_or_else(|| parser.error(0, "missing DATA block".into()))?;
    let dictionary =
        dictionary_block.ok_or_else(|| parser.error(0, "missing DICTIONARY block".into()))?;

    let (rows, cols) = (operator.dims[0], operator.dims[1]);

    if let Some(m) = &metric_block {
        if m.dims[0] != cols {
            return Err(parser.error(
                m.header_line,
                format!("metric size {}, operator columns {}", m.dims[0], cols),
            ));
        }
    }
    if data.dims[0] != rows {
        return Err(parser.error(
            data.header_line,
            format!("data length {}, operator rows {}", data.dims[0], rows),
        ));
    }
    if dictionary.dims[1] != cols {
        return Err(parser.error(
            dictionary.header_line,
            format!(
                "dictionary atom length {}, operator columns {}",
                dictionary.dims[1], cols
            ),
        ));
    }
    if let Some(init) = &initial_block {
        if init.dims[0] != cols {
            return Err(parser.error(
                init.header_line,
                format!("initial length {}, operator columns {}", init.dims[0], cols),
            ));
        }
    }

    let metric = match &metric_block {
        Some(m) => DMatrix::from_fn(cols, cols, |r, c| m.rows[r][c]),
        None => DMatrix::identity(cols, cols),
    };
    let space = HilbertSpec::new(cols, metric)?;
    let a = DMatrix::from_fn(rows, cols, |r, c| operator.rows[r][c]);
    let operator = ForwardOperator::new(space, a)?;

    let y = DVector::from_column_slice(&data.rows[0]);
    if !y.iter().all(|v| v.is_finite()) {
        return Err(ProblemIoError::Model(Error::NonFinite {
            what: "data vector",
        }));
    }

    let atoms: Result<Vec<Element>, Error> = dictionary
        .rows
        .iter()
        .map(|row| Element::from_slice(row))
        .collect();
    let dictionary = Dictionary::build(&operator, atoms?)?;

    let initial = initial_block
        .map(|b| Element::from_slice(&b.rows[0]))
        .transpose()?;

    Ok(Problem {
        operator,
        data: y,
        dictionary,
        initial,
    })
}

fn push_row(out: &mut String, values: impl IntoIterator<Item = f64>) {
    let mut first = true;
    for v in values {
        if !first {
            out.push(' ');
        }
        first = false;
        let _ = write!(out, "{v:.16e}");
    }
    out.push('\n');
}

/// Render a problem in the file format (17 significant digits per value).
pub fn render_problem(problem: &Problem) -> String {
    let op = &problem.operator;
    let (rows, cols) = (op.data_dim(), op.domain_dim());
    let mut out = String::new();
    let _ = writeln!(out, "# rfmp problem file");
    let _ = writeln!(out, "OPERATOR {rows} {cols}");
    for r in 0..rows {
        push_row(&mut out, (0..cols).map(|c| op.matrix()[(r, c)]));
    }
    let _ = writeln!(out, "METRIC {cols}");
    for r in 0..cols {
        push_row(&mut out, (0..cols).map(|c| op.space().metric()[(r, c)]));
    }
    let _ = writeln!(out, "DATA {rows}");
    push_row(&mut out, problem.data.iter().copied());
    let _ = writeln!(out, "DICTIONARY {} {cols}", problem.dictionary.len());
    for atom in problem.dictionary.atoms() {
        push_row(&mut out, atom.coeffs().iter().copied());
    }
    if let Some(init) = &problem.initial {
        let _ = writeln!(out, "INITIAL {cols}");
        push_row(&mut out, init.coeffs().iter().copied());
    }
    out
}

fn atomic_write(path: &Path, contents: &str) -> std::io::Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)
}

/// Write a problem file atomically (write-then-rename).
pub fn write_problem(path: impl AsRef<Path>, problem: &Problem) -> Result<(), ProblemIoError> {
    let path = path.as_ref();
    atomic_write(path, &render_problem(problem)).map_err(|source| ProblemIoError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn format_optional_tol(tol: Option<f64>) -> String {
    match tol {
        Some(t) => format!("{t:.16e}"),
        None => "disabled".to_string(),
    }
}

/// Render a finished run as comma-separated text with a commented header.
///
/// Columns: step number, chosen atom, alpha, energy, residual norm, selected
/// score, and seconds since the run started. Everything except the wall-time
/// column is deterministic for identical inputs.
pub fn render_run_log(
    diagnostics: &DictionaryDiagnostics,
    config: &RfmpConfig,
    outcome: &RfmpOutcome,
) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# rfmp run log");
    let _ = writeln!(out, "# lambda = {:.16e}", config.lambda);
    let _ = writeln!(out, "# repetition_cap = {}", config.repetition_cap);
    let _ = writeln!(out, "# max_iterations = {}", config.max_iterations);
    let _ = writeln!(
        out,
        "# alpha_tol = {}",
        format_optional_tol(config.stop_alpha_tol)
    );
    let _ = writeln!(
        out,
        "# energy_tol = {}",
        format_optional_tol(config.stop_energy_tol)
    );
    let _ = writeln!(out, "# c1 = {:.16e}", diagnostics.c1);
    let _ = writeln!(out, "# c2 = {:.16e}", diagnostics.c2);
    let _ = writeln!(out, "# semi_frame_c = {:.16e}", diagnostics.semi_frame_c);
    let _ = writeln!(
        out,
        "# initial_energy = {:.16e}",
        outcome.state.initial_energy()
    );
    let _ = writeln!(out, "# termination = {}", outcome.reason);
    let _ = writeln!(out, "n,atom,alpha,energy,residual_norm,score,wall_time_s");
    for rec in outcome.state.history() {
        let _ = writeln!(
            out,
            "{},{},{:.16e},{:.16e},{:.16e},{:.16e},{:.6}",
            rec.iteration,
            rec.atom,
            rec.alpha,
            rec.energy,
            rec.residual_norm,
            rec.score,
            rec.elapsed_s
        );
    }
    out
}

fn render_solution(element: &Element) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# rfmp final approximation, one coefficient per line");
    for v in element.coeffs().iter() {
        let _ = writeln!(out, "{v:.16e}");
    }
    out
}

/// Failure classification for the command drivers; see the module docs for
/// the exit-code mapping.
#[derive(Debug, Error)]
pub enum CommandError {
    /// The problem file, configuration, or construction was invalid.
    #[error(transparent)]
    InvalidProblem(#[from] ProblemIoError),
    /// A convergence hypothesis failed before iterating.
    #[error("{0}")]
    Hypothesis(Error),
    /// The iteration or a factorization aborted numerically.
    #[error("{0}")]
    Numerical(Error),
    /// An output file could not be written.
    #[error("cannot write {path}: {source}")]
    Output {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CommandError {
    fn from_model(error: Error) -> Self {
        match error {
            Error::C1Violation { .. } => CommandError::Hypothesis(error),
            Error::NumericalAbort { .. } | Error::DecompositionFailure(_) => {
                CommandError::Numerical(error)
            }
            other => CommandError::InvalidProblem(ProblemIoError::Model(other)),
        }
    }

    /// Process exit code for this failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CommandError::InvalidProblem(_) => 3,
            CommandError::Hypothesis(_) => 2,
            CommandError::Numerical(_) => 4,
            CommandError::Output { .. } => 1,
        }
    }
}

/// Everything a `solve` run produced.
#[derive(Debug)]
pub struct SolveArtifacts {
    pub outcome: RfmpOutcome,
    pub diagnostics: DictionaryDiagnostics,
    pub log_path: PathBuf,
    pub solution_path: PathBuf,
}

/// Load a problem, gate the hypotheses, run the solver, and write the run log
/// and final coefficients under `out_dir`.
pub fn run_solve(
    problem_path: impl AsRef<Path>,
    config: &RfmpConfig,
    out_dir: impl AsRef<Path>,
) -> Result<SolveArtifacts, CommandError> {
    let problem = load_problem(problem_path)?;
    let diagnostics = problem
        .dictionary
        .diagnostics(config.lambda)
        .map_err(CommandError::from_model)?;
    diagnostics
        .check_c1_positive()
        .map_err(CommandError::from_model)?;

    let mut config = config.clone();
    if config.initial.is_none() {
        config.initial = problem.initial.clone();
    }
    let outcome = solver::solve(
        &problem.operator,
        &problem.data,
        &problem.dictionary,
        &config,
    )
    .map_err(CommandError::from_model)?;

    let out_dir = out_dir.as_ref();
    fs::create_dir_all(out_dir).map_err(|source| CommandError::Output {
        path: out_dir.to_path_buf(),
        source,
    })?;
    let log_path = out_dir.join("run_log.csv");
    atomic_write(&log_path, &render_run_log(&diagnostics, &config, &outcome)).map_err(
        |source| CommandError::Output {
            path: log_path.clone(),
            source,
        },
    )?;
    let solution_path = out_dir.join("solution.txt");
    atomic_write(&solution_path, &render_solution(outcome.state.approx())).map_err(|source| {
        CommandError::Output {
            path: solution_path.clone(),
            source,
        }
    })?;

    Ok(SolveArtifacts {
        outcome,
        diagnostics,
        log_path,
        solution_path,
    })
}

/// Which limit object `verify` compares the run against.
#[derive(Debug, Clone)]
pub enum VerifyOracle {
    /// `lambda > 0`: normal-equation residual and element deviation.
    Tikhonov,
    /// `lambda = 0`: image deviation from the range projection.
    Range,
    /// `lambda > 0`: deviation from the projected solution on the given
    /// singular-vector indices.
    Subspace { indices: Vec<usize> },
}

/// One named comparison in a verification report.
#[derive(Debug, Clone)]
pub struct VerifyCheck {
    pub name: &'static str,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Outcome of `verify`: the solver run summary, the individual checks, and
/// explanatory notes.
#[derive(Debug)]
pub struct VerifyReport {
    pub checks: Vec<VerifyCheck>,
    pub notes: Vec<String>,
    pub reason: StopReason,
    pub iterations: usize,
}

impl VerifyReport {
    /// True when every check passed.
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    fn push(&mut self, name: &'static str, value: f64, tolerance: f64) {
        self.checks.push(VerifyCheck {
            name,
            value,
            tolerance,
            passed: value <= tolerance,
        });
    }
}

fn relative(value: f64, scale: f64) -> f64 {
    value / scale.max(f64::MIN_POSITIVE)
}

/// Run the solver on a problem file and compare the final approximation
/// against the matching direct-solve oracle at the given tolerance.
pub fn run_verify(
    problem_path: impl AsRef<Path>,
    config: &RfmpConfig,
    oracle_kind: &VerifyOracle,
    tolerance: f64,
) -> Result<VerifyReport, CommandError> {
    if !(tolerance > 0.0 && tolerance.is_finite()) {
        return Err(CommandError::from_model(Error::InvalidParameter(
            "verification tolerance must be positive",
        )));
    }
    match oracle_kind {
        VerifyOracle::Tikhonov | VerifyOracle::Subspace { .. } if config.lambda <= 0.0 => {
            return Err(CommandError::from_model(Error::InvalidParameter(
                "this oracle requires lambda > 0",
            )));
        }
        VerifyOracle::Range if config.lambda != 0.0 => {
            return Err(CommandError::from_model(Error::InvalidParameter(
                "the range oracle requires lambda = 0",
            )));
        }
        _ => {}
    }

    let problem = load_problem(problem_path)?;
    problem
        .dictionary
        .diagnostics(config.lambda)
        .and_then(|d| d.check_c1_positive())
        .map_err(CommandError::from_model)?;

    let mut config = config.clone();
    if config.initial.is_none() {
        config.initial = problem.initial.clone();
    }
    let outcome = solver::solve(
        &problem.operator,
        &problem.data,
        &problem.dictionary,
        &config,
    )
    .map_err(CommandError::from_model)?;

    let op = &problem.operator;
    let space = op.space();
    let y = &problem.data;
    let final_approx = outcome.state.approx();
    let mut report = VerifyReport {
        checks: Vec::new(),
        notes: Vec::new(),
        reason: outcome.reason,
        iterations: outcome.state.iteration(),
    };

    let map = CommandError::from_model;
    match oracle_kind {
        VerifyOracle::Tikhonov => {
            let sol: OracleSolution = oracle::tikhonov_solve(op, y, config.lambda).map_err(map)?;
            let fstar_y = op.apply_adjoint(y).map_err(map)?;
            let mut lhs = op
                .apply_adjoint(&op.apply(final_approx).map_err(map)?)
                .map_err(map)?;
            lhs.add_scaled(config.lambda, final_approx);
            let ne_residual = space.norm(&(&lhs - &fstar_y)).map_err(map)?;
            report.push(
                "normal_equation_residual",
                relative(ne_residual, space.norm(&fstar_y).map_err(map)?),
                tolerance,
            );
            let deviation = space.norm(&(final_approx - &sol.element)).map_err(map)?;
            report.push(
                "element_deviation",
                deviation / (1.0 + space.norm(&sol.element).map_err(map)?),
                tolerance,
            );
            report.notes.push(format!(
                "oracle normal-equation residual: {:.3e}",
                sol.residual_of_characterization
            ));
        }
        VerifyOracle::Range => {
            let projected = op.range_projection(y).map_err(map)?;
            let image = op.apply(final_approx).map_err(map)?;
            report.push(
                "image_deviation",
                relative((&image - &projected).norm(), y.norm()),
                tolerance,
            );
            let max_corr = (0..problem.dictionary.len())
                .map(|i| {
                    outcome
                        .state
                        .residual()
                        .dot(problem.dictionary.image(i))
                        .abs()
                })
                .fold(0.0_f64, f64::max);
            report.push(
                "max_residual_correlation",
                relative(max_corr, y.norm()),
                tolerance,
            );
            report.notes.push(
                "element comparison skipped: with lambda = 0 only the image F F_n is \
                 characterized (the operator kernel leaves the element free)"
                    .to_string(),
            );
        }
        VerifyOracle::Subspace { indices } => {
            let sol = oracle::subspace_tikhonov(op, y, config.lambda, indices).map_err(map)?;
            let full = oracle::tikhonov_solve(op, y, config.lambda).map_err(map)?;
            let deviation = space.norm(&(final_approx - &sol.element)).map_err(map)?;
            report.push(
                "subspace_deviation",
                deviation / (1.0 + space.norm(&full.element).map_err(map)?),
                tolerance,
            );
            report.notes.push(format!(
                "restricted normal-equation residual of the oracle: {:.3e}",
                sol.residual_of_characterization
            ));
        }
    }

    Ok(report)
}

/// Diagnostics summary for `diagnose`.
#[derive(Debug)]
pub struct DiagnoseReport {
    pub diagnostics: DictionaryDiagnostics,
    pub atom_count: usize,
    pub space_dim: usize,
    pub collinear_pairs: Vec<(usize, usize)>,
    pub gate_message: Option<String>,
}

impl DiagnoseReport {
    /// True when the C1 gate passes.
    pub fn gate_passed(&self) -> bool {
        self.gate_message.is_none()
    }
}

/// Load a problem and report the dictionary diagnostics at `lambda`.
pub fn run_diagnose(
    problem_path: impl AsRef<Path>,
    lambda: f64,
) -> Result<DiagnoseReport, CommandError> {
    let problem = load_problem(problem_path)?;
    let diagnostics = problem
        .dictionary
        .diagnostics(lambda)
        .map_err(CommandError::from_model)?;
    let gate_message = diagnostics.check_c1_positive().err().map(|e| e.to_string());
    Ok(DiagnoseReport {
        atom_count: problem.dictionary.len(),
        space_dim: problem.operator.domain_dim(),
        collinear_pairs: problem.dictionary.collinear_pairs().to_vec(),
        diagnostics,
        gate_message,
    })
}
