//! The regularized greedy iteration.
//!
//! Starting from `F_0` and the residual `R^0 = y - F F_0`, each step picks the
//! dictionary atom maximizing
//!
//! ```text
//! score(d) = (<R^n, F d> - lambda <F_n, d>)^2 / (|F d|^2 + lambda |d|^2)
//! ```
//!
//! takes the step coefficient
//!
//! ```text
//! alpha = (<R^n, F d> - lambda <F_n, d>) / (|F d|^2 + lambda |d|^2)
//! ```
//!
//! and updates `F_{n+1} = F_n + alpha d`, `R^{n+1} = R^n - alpha F d`. The
//! tracked energy `E_n = |R^n|^2 + lambda |F_n|^2` decreases by exactly the
//! selected score each step, which makes the energy column of the run history
//! a sharp self-check.
//!
//! Atoms chosen `repetition_cap` times become ineligible; when every atom is
//! exhausted the run stops with [`StopReason::RepetitionCapExhausted`]. This
//! is the run-time counterpart of the bounded-multiplicity hypothesis the
//! convergence theory needs (unbounded repetition of a single atom defeats
//! any frame-type constant).

use std::fmt;
use std::time::Instant;

use nalgebra::DVector;

use crate::dictionary::Dictionary;
use crate::error::{Error, Result};
use crate::hilbert::Element;
use crate::operator::ForwardOperator;

/// Tie-breaking policy for equal selection scores.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TieBreak {
    /// Deterministic: the smallest atom index wins.
    #[default]
    LowestIndex,
}

/// Solver configuration: regularization, repetition cap, start point, and
/// stopping rules.
///
/// The two tolerance rules are optional; `None` disables a rule. The energy
/// rule fires when the would-be step's energy decrease (its selection score)
/// is `<=` the tolerance, so the default `Some(0.0)` stops a run whose best
/// step makes exactly zero progress instead of looping on zero-length steps.
#[derive(Debug, Clone)]
pub struct RfmpConfig {
    /// Regularization parameter `lambda >= 0`.
    pub lambda: f64,
    /// Maximum number of times any single atom may be chosen.
    pub repetition_cap: u32,
    /// Start element `F_0`; zero when `None`.
    pub initial: Option<Element>,
    /// Hard iteration limit.
    pub max_iterations: usize,
    /// Halt before applying a step with `|alpha| < tol`.
    pub stop_alpha_tol: Option<f64>,
    /// Halt before applying a step whose energy decrease is `<= tol`.
    pub stop_energy_tol: Option<f64>,
    /// Tie-breaking policy for the argmax.
    pub tie_break: TieBreak,
}

impl Default for RfmpConfig {
    fn default() -> Self {
        Self {
            lambda: 0.0,
            repetition_cap: 1000,
            initial: None,
            max_iterations: 10_000,
            stop_alpha_tol: None,
            stop_energy_tol: Some(0.0),
            tie_break: TieBreak::LowestIndex,
        }
    }
}

impl RfmpConfig {
    /// Default configuration at the given regularization parameter.
    pub fn new(lambda: f64) -> Self {
        Self {
            lambda,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidParameter(
                "lambda must be finite and nonnegative",
            ));
        }
        if self.repetition_cap == 0 {
            return Err(Error::InvalidParameter("repetition cap must be at least 1"));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidParameter("max iterations must be at least 1"));
        }
        for tol in [self.stop_alpha_tol, self.stop_energy_tol]
            .into_iter()
            .flatten()
        {
            if !(tol >= 0.0 && tol.is_finite()) {
                return Err(Error::InvalidParameter(
                    "stopping tolerances must be finite and nonnegative",
                ));
            }
        }
        Ok(())
    }
}

/// Why a run stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    /// The iteration limit was reached.
    MaxIterations,
    /// The next step coefficient fell below `stop_alpha_tol`.
    AlphaBelowTolerance,
    /// The next energy decrease fell to or below `stop_energy_tol`.
    EnergyDecreaseBelowTolerance,
    /// Every atom has been chosen `repetition_cap` times.
    RepetitionCapExhausted,
}

impl fmt::Display for StopReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let text = match self {
            StopReason::MaxIterations => "maximum iterations reached",
            StopReason::AlphaBelowTolerance => "step coefficient below tolerance",
            StopReason::EnergyDecreaseBelowTolerance => "energy decrease below tolerance",
            StopReason::RepetitionCapExhausted => "repetition cap exhausted",
        };
        f.write_str(text)
    }
}

/// One applied greedy step.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    /// Step number, starting at 1.
    pub iteration: usize,
    /// Index of the chosen atom.
    pub atom: usize,
    /// Step coefficient `alpha_n`.
    pub alpha: f64,
    /// Energy `E_n = |R^n|^2 + lambda |F_n|^2` after the step.
    pub energy: f64,
    /// Data-space residual norm after the step.
    pub residual_norm: f64,
    /// Selection score of the chosen atom (the exact energy decrease).
    pub score: f64,
    /// Seconds since the run started, for logging only.
    pub elapsed_s: f64,
}

/// Iteration state: current approximation, residual, history, and the caches
/// that keep each step at O(K l) cost.
#[derive(Debug, Clone)]
pub struct RfmpState {
    approx: Element,
    residual: DVector<f64>,
    iteration: usize,
    history: Vec<IterationRecord>,
    usage_counts: Vec<u32>,
    fn_dot_atoms: Vec<f64>,
    approx_norm_sq: f64,
    energy: f64,
    initial_energy: f64,
    started: Instant,
}

impl RfmpState {
    /// Initialize from `F_0` (taken from the config) and `R^0 = y - F F_0`.
    pub fn init(
        op: &ForwardOperator,
        y: &DVector<f64>,
        dict: &Dictionary,
        config: &RfmpConfig,
    ) -> Result<Self> {
        config.validate()?;
        if y.len() != op.data_dim() {
            return Err(Error::DimensionMismatch {
                what: "data vector",
                expected: op.data_dim(),
                actual: y.len(),
            });
        }
        if !y.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite {
                what: "data vector",
            });
        }
        if dict.atom(0).dim() != op.domain_dim() || dict.image(0).len() != op.data_dim() {
            return Err(Error::DimensionMismatch {
                what: "dictionary",
                expected: op.domain_dim(),
                actual: dict.atom(0).dim(),
            });
        }

        let approx = match &config.initial {
            Some(f0) => {
                if f0.dim() != op.domain_dim() {
                    return Err(Error::DimensionMismatch {
                        what: "initial approximation",
                        expected: op.domain_dim(),
                        actual: f0.dim(),
                    });
                }
                f0.clone()
            }
            None => Element::zeros(op.domain_dim()),
        };

        let residual = y - op.apply(&approx)?;
        let metric_approx = op.space().metric_apply(approx.coeffs());
        let approx_norm_sq = approx.coeffs().dot(&metric_approx);
        let fn_dot_atoms: Vec<f64> = (0..dict.len())
            .map(|i| dict.atom(i).coeffs().dot(&metric_approx))
            .collect();
        let energy = residual.norm_squared() + config.lambda * approx_norm_sq;
        if !energy.is_finite() {
            return Err(Error::NumericalAbort {
                iteration: 0,
                detail: "initial energy is not finite",
            });
        }

        Ok(Self {
            approx,
            residual,
            iteration: 0,
            history: Vec::new(),
            usage_counts: vec![0; dict.len()],
            fn_dot_atoms,
            approx_norm_sq,
            energy,
            initial_energy: energy,
            started: Instant::now(),
        })
    }

    /// Current approximation `F_n`.
    pub fn approx(&self) -> &Element {
        &self.approx
    }

    /// Current residual `R^n`.
    pub fn residual(&self) -> &DVector<f64> {
        &self.residual
    }

    /// Number of applied steps.
    pub fn iteration(&self) -> usize {
        self.iteration
    }

    /// All applied steps in order.
    pub fn history(&self) -> &[IterationRecord] {
        &self.history
    }

    /// How often each atom has been chosen.
    pub fn usage_counts(&self) -> &[u32] {
        &self.usage_counts
    }

    /// Current energy `E_n`.
    pub fn energy(&self) -> f64 {
        self.energy
    }

    /// Energy `E_0` before the first step.
    pub fn initial_energy(&self) -> f64 {
        self.initial_energy
    }

    /// Cached `<F_n, d_i>`; kept current by an O(K) Gram-row update per step.
    pub fn fn_dot_atom(&self, i: usize) -> f64 {
        self.fn_dot_atoms[i]
    }
}

/// A candidate step: chosen atom, its score, and its coefficient.
#[derive(Debug, Clone, Copy)]
struct Choice {
    index: usize,
    score: f64,
    alpha: f64,
}

fn quotient_parts(
    state: &RfmpState,
    dict: &Dictionary,
    lambda: f64,
    i: usize,
) -> Result<(f64, f64)> {
    let denominator = dict.image_norm_sq(i) + lambda * dict.atom_norm_sq(i);
    if denominator <= 0.0 {
        return Err(Error::C1Violation {
            atom: i,
            c1: denominator,
        });
    }
    let numerator = state.residual.dot(dict.image(i)) - lambda * state.fn_dot_atoms[i];
    Ok((numerator, denominator))
}

/// Selection score of atom `i` in the current state:
/// `(<R^n, F d_i> - lambda <F_n, d_i>)^2 / (|F d_i|^2 + lambda |d_i|^2)`.
pub fn selection_score(
    state: &RfmpState,
    dict: &Dictionary,
    lambda: f64,
    atom_index: usize,
) -> Result<f64> {
    let (num, den) = quotient_parts(state, dict, lambda, atom_index)?;
    Ok(num * num / den)
}

/// Signed step coefficient for atom `chosen`; its square times the
/// denominator equals the selection score.
pub fn step_coefficient(
    state: &RfmpState,
    dict: &Dictionary,
    lambda: f64,
    chosen: usize,
) -> Result<f64> {
    let (num, den) = quotient_parts(state, dict, lambda, chosen)?;
    Ok(num / den)
}

fn best_choice(
    state: &RfmpState,
    dict: &Dictionary,
    config: &RfmpConfig,
) -> Result<Option<Choice>> {
    let TieBreak::LowestIndex = config.tie_break;
    let mut best: Option<Choice> = None;
    for i in 0..dict.len() {
        if state.usage_counts[i] >= config.repetition_cap {
            continue;
        }
        let (num, den) = quotient_parts(state, dict, config.lambda, i)?;
        let score = num * num / den;
        // Strict comparison in index order realizes the lowest-index policy.
        if best.is_none_or(|b| score > b.score) {
            best = Some(Choice {
                index: i,
                score,
                alpha: num / den,
            });
        }
    }
    Ok(best)
}

/// The maximizing eligible atom and its score, or `None` when every atom has
/// reached the repetition cap. Ties go to the policy in `config.tie_break`.
pub fn select_atom(
    state: &RfmpState,
    dict: &Dictionary,
    config: &RfmpConfig,
) -> Result<Option<(usize, f64)>> {
    Ok(best_choice(state, dict, config)?.map(|c| (c.index, c.score)))
}

fn apply_step(
    state: &mut RfmpState,
    dict: &Dictionary,
    lambda: f64,
    choice: Choice,
) -> Result<IterationRecord> {
    let alpha = choice.alpha;
    let k = choice.index;
    if !alpha.is_finite() {
        return Err(Error::NumericalAbort {
            iteration: state.iteration + 1,
            detail: "step coefficient is not finite",
        });
    }

    // |F_{n+1}|^2 expands around the pre-update cache value <F_n, d_k>.
    let fn_dot_chosen = state.fn_dot_atoms[k];
    state.approx.add_scaled(alpha, dict.atom(k));
    state.residual.axpy(-alpha, dict.image(k), 1.0);
    state.approx_norm_sq += 2.0 * alpha * fn_dot_chosen + alpha * alpha * dict.atom_norm_sq(k);

    let gram = dict.gram();
    for i in 0..dict.len() {
        state.fn_dot_atoms[i] += alpha * gram[(k, i)];
    }

    state.usage_counts[k] += 1;
    state.iteration += 1;
    state.energy = state.residual.norm_squared() + lambda * state.approx_norm_sq;
    if !state.energy.is_finite() {
        return Err(Error::NumericalAbort {
            iteration: state.iteration,
            detail: "energy is not finite",
        });
    }

    let record = IterationRecord {
        iteration: state.iteration,
        atom: k,
        alpha,
        energy: state.energy,
        residual_norm: state.residual.norm(),
        score: choice.score,
        elapsed_s: state.started.elapsed().as_secs_f64(),
    };
    state.history.push(record.clone());
    Ok(record)
}

/// Result of one [`iterate`] call.
#[derive(Debug, Clone, PartialEq)]
pub enum StepOutcome {
    /// A step was selected and applied.
    Applied(IterationRecord),
    /// Every atom has reached the repetition cap; nothing was applied.
    Exhausted,
}

/// Apply one greedy step unconditionally (stopping rules are the caller's
/// business): select the best eligible atom, update approximation, residual,
/// caches, usage count, and history.
pub fn iterate(
    state: &mut RfmpState,
    dict: &Dictionary,
    config: &RfmpConfig,
) -> Result<StepOutcome> {
    match best_choice(state, dict, config)? {
        None => Ok(StepOutcome::Exhausted),
        Some(choice) => Ok(StepOutcome::Applied(apply_step(
            state,
            dict,
            config.lambda,
            choice,
        )?)),
    }
}

/// A finished run: final state plus why it stopped.
#[derive(Debug, Clone)]
pub struct RfmpOutcome {
    /// State after the last applied step.
    pub state: RfmpState,
    /// The stopping rule that fired.
    pub reason: StopReason,
}

/// Run the greedy iteration until a stopping rule fires.
///
/// The C1 hypothesis is gated before the first step. Tolerance rules are
/// evaluated on the candidate step before it is applied, so a run never ends
/// on a step it would have rejected.
pub fn solve(
    op: &ForwardOperator,
    y: &DVector<f64>,
    dict: &Dictionary,
    config: &RfmpConfig,
) -> Result<RfmpOutcome> {
    config.validate()?;
    dict.diagnostics(config.lambda)?.check_c1_positive()?;
    let mut state = RfmpState::init(op, y, dict, config)?;

    let reason = loop {
        if state.iteration >= config.max_iterations {
            break StopReason::MaxIterations;
        }
        let choice = match best_choice(&state, dict, config)? {
            None => break StopReason::RepetitionCapExhausted,
            Some(c) => c,
        };
        if !choice.alpha.is_finite() {
            return Err(Error::NumericalAbort {
                iteration: state.iteration + 1,
                detail: "step coefficient is not finite",
            });
        }
        if let Some(tol) = config.stop_alpha_tol {
            if choice.alpha.abs() < tol {
                break StopReason::AlphaBelowTolerance;
            }
        }
        if let Some(tol) = config.stop_energy_tol {
            if choice.score <= tol {
                break StopReason::EnergyDecreaseBelowTolerance;
            }
        }
        apply_step(&mut state, dict, config.lambda, choice)?;
    };

    Ok(RfmpOutcome { state, reason })
}
