//! Full-batch training and the four-case experiment suite.

use crate::bc::{BcStrategy, PenaltyWeights};
use crate::fdm::Grid;
use crate::nn::{init_network, validate_layout, Activation, AdamConfig, AdamState, DEFAULT_LAYER_DIMS};
use crate::problems::{loss_and_gradient, BarSpec, BeamSpec, Case, LossBreakdown, Problem};
use crate::{Error, Result};

/// Everything besides the problem and strategy that determines a run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub adam: AdamConfig,
    pub seed: u64,
    pub n_nodes: usize,
    pub ghost: usize,
    pub log_every: usize,
    /// Stop once consecutive losses differ by less than this. Zero runs every epoch.
    pub tolerance: f64,
    pub layer_dims: Vec<usize>,
    pub hidden_activation: Activation,
    pub output_activation: Activation,
    pub penalties: PenaltyWeights,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 10_000,
            adam: AdamConfig::default(),
            seed: 42,
            n_nodes: 101,
            ghost: 2,
            log_every: 100,
            tolerance: 0.0,
            layer_dims: DEFAULT_LAYER_DIMS.to_vec(),
            hidden_activation: Activation::Sigmoid,
            output_activation: Activation::Identity,
            penalties: PenaltyWeights::default(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let invalid = |name: &'static str, reason: &str| Error::InvalidParameter {
            name,
            reason: reason.to_string(),
        };
        if self.log_every == 0 {
            return Err(invalid("log_every", "must be at least 1"));
        }
        if !(self.tolerance.is_finite() && self.tolerance >= 0.0) {
            return Err(invalid("tolerance", "must be finite and non-negative"));
        }
        let AdamConfig {
            learning_rate,
            beta1,
            beta2,
            epsilon,
        } = self.adam;
        if !(learning_rate.is_finite() && learning_rate > 0.0) {
            return Err(invalid("learning_rate", "must be positive and finite"));
        }
        if !(0.0..1.0).contains(&beta1) {
            return Err(invalid("beta1", "must lie in [0, 1)"));
        }
        if !(0.0..1.0).contains(&beta2) {
            return Err(invalid("beta2", "must lie in [0, 1)"));
        }
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(invalid("epsilon", "must be positive and finite"));
        }
        Ok(())
    }
}

/// One logged point of the loss history.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistoryEntry {
    /// Number of optimizer updates applied before the loss was measured.
    pub epoch: usize,
    pub total: f64,
    pub residual: f64,
    pub bc: f64,
}

/// Prediction and reference value at one interior node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeSample {
    pub x: f64,
    pub predicted: f64,
    pub exact: f64,
}

/// Outcome of one training run.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub case: Case,
    pub problem: Problem,
    pub strategy: BcStrategy,
    pub config: TrainConfig,
    pub epochs_run: usize,
    pub loss: LossBreakdown,
    pub percent_error: f64,
    pub max_abs_error: f64,
    /// Boundary-condition deviation at `x = 0` and `x = L`, see [`Problem::boundary_deviation`].
    pub bc_deviation: (f64, f64),
    pub history: Vec<HistoryEntry>,
    pub nodes: Vec<NodeSample>,
}

/// `100 * ||predicted - exact||_2 / ||exact||_2`.
pub fn percent_error(predicted: &[f64], exact: &[f64]) -> Result<f64> {
    if predicted.len() != exact.len() {
        return Err(Error::LengthMismatch {
            expected: exact.len(),
            actual: predicted.len(),
        });
    }
    if exact.is_empty() {
        return Err(Error::ZeroReference);
    }
    let diff: f64 = predicted.iter().zip(exact).map(|(p, e)| (p - e) * (p - e)).sum();
    let reference: f64 = exact.iter().map(|e| e * e).sum();
    if reference == 0.0 {
        return Err(Error::ZeroReference);
    }
    Ok(100.0 * (diff / reference).sqrt())
}

fn check_finite(loss: &LossBreakdown, epoch: usize) -> Result<()> {
    if !loss.residual_term.is_finite() {
        return Err(Error::Diverged {
            epoch,
            term: "residual".into(),
        });
    }
    if let Some(t) = loss.bc_terms.iter().find(|t| !t.weighted.is_finite()) {
        return Err(Error::Diverged {
            epoch,
            term: t.label.into(),
        });
    }
    Ok(())
}

fn entry(epoch: usize, loss: &LossBreakdown) -> HistoryEntry {
    HistoryEntry {
        epoch,
        total: loss.total,
        residual: loss.residual_term,
        bc: loss.bc_total(),
    }
}

/// Every check [`train`] performs before its first epoch, without training.
/// Returns the case the pairing identifies.
pub fn check_run(problem: &Problem, strategy: &BcStrategy, config: &TrainConfig) -> Result<Case> {
    config.validate()?;
    problem.validate()?;
    let case = Case::identify(problem, strategy)?;
    validate_layout(&config.layer_dims)?;
    let grid = Grid::new(problem.length(), config.n_nodes, config.ghost)?;
    if grid.ghost() < problem.min_ghost() {
        return Err(Error::InvalidGrid(format!(
            "the {problem} problem needs at least {} ghost nodes, got {}",
            problem.min_ghost(),
            grid.ghost()
        )));
    }
    Ok(case)
}

/// Trains a freshly initialized network on one case with full-batch Adam.
pub fn train(problem: &Problem, strategy: &BcStrategy, config: &TrainConfig) -> Result<ExperimentReport> {
    let case = check_run(problem, strategy, config)?;
    let grid = Grid::new(problem.length(), config.n_nodes, config.ghost)?;
    let mut net = init_network(&config.layer_dims, config.seed)?
        .with_activations(config.hidden_activation, config.output_activation);
    let mut adam = AdamState::new(&net, config.adam);

    let mut history = Vec::new();
    let mut previous: Option<f64> = None;
    let mut epochs_run = 0;
    for epoch in 0..config.epochs {
        let (loss, grad) = loss_and_gradient(problem, strategy, &net, &grid)?;
        check_finite(&loss, epoch)?;
        if !grad.is_finite() {
            return Err(Error::Diverged {
                epoch,
                term: "gradient".into(),
            });
        }
        if epoch % config.log_every == 0 {
            history.push(entry(epoch, &loss));
        }
        if config.tolerance > 0.0 {
            if let Some(prev) = previous {
                if (prev - loss.total).abs() < config.tolerance {
                    break;
                }
            }
            previous = Some(loss.total);
        }
        adam.step(&mut net, &grad)?;
        epochs_run += 1;
    }

    let raw = net.forward(grid.nodes());
    let output = strategy.output(grid.nodes(), &raw)?;
    let loss = crate::problems::loss_from_samples(problem, strategy, &grid, &raw)?;
    check_finite(&loss, epochs_run)?;
    if epochs_run > 0 {
        history.push(entry(epochs_run, &loss));
    }

    let interior = grid.interior_range();
    let nodes = interior
        .clone()
        .map(|i| {
            let x = grid.nodes()[i];
            Ok(NodeSample {
                x,
                predicted: output[i],
                exact: problem.analytic(x)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let predicted: Vec<f64> = nodes.iter().map(|n| n.predicted).collect();
    let exact: Vec<f64> = nodes.iter().map(|n| n.exact).collect();
    let percent_error = percent_error(&predicted, &exact)?;
    let max_abs_error = nodes.iter().map(|n| (n.predicted - n.exact).abs()).fold(0.0, f64::max);

    Ok(ExperimentReport {
        case,
        problem: *problem,
        strategy: *strategy,
        config: config.clone(),
        epochs_run,
        loss,
        percent_error,
        max_abs_error,
        bc_deviation: problem.boundary_deviation(&grid, &output),
        history,
        nodes,
    })
}

/// Physical constants for both problems.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Physics {
    pub bar: BarSpec,
    pub beam: BeamSpec,
}

impl Physics {
    pub fn problem_for(&self, case: Case) -> Problem {
        if case.is_bar() {
            Problem::Bar(self.bar)
        } else {
            Problem::Beam(self.beam)
        }
    }
}

/// Reports for all four cases in case order; a failed case keeps its error.
#[derive(Debug, Clone)]
pub struct SuiteReport {
    pub runs: Vec<(Case, Result<ExperimentReport>)>,
}

impl SuiteReport {
    pub fn report(&self, case: Case) -> Option<&ExperimentReport> {
        self.runs
            .iter()
            .find(|(c, _)| *c == case)
            .and_then(|(_, r)| r.as_ref().ok())
    }
}

/// Runs one case of the suite.
pub fn run_case(case: Case, physics: &Physics, config: &TrainConfig) -> Result<ExperimentReport> {
    let problem = physics.problem_for(case);
    let strategy = problem.strategy(case.strategy_kind(), config.penalties)?;
    train(&problem, &strategy, config)
}

/// Runs cases 1 to 4 with identical network settings, one thread per case.
pub fn run_suite(physics: &Physics, config: &TrainConfig) -> SuiteReport {
    let runs = std::thread::scope(|scope| {
        let handles: Vec<_> = Case::ALL
            .iter()
            .map(|&case| (case, scope.spawn(move || run_case(case, physics, config))))
            .collect();
        handles
            .into_iter()
            .map(|(case, h)| (case, h.join().expect("training thread panicked")))
            .collect()
    });
    SuiteReport { runs }
}
