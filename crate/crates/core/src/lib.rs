//! Physics-informed neural networks for two structural-mechanics ODEs, with
//! interchangeable ways of enforcing boundary conditions.
//!
//! The building blocks, bottom up:
//!
//! - [`nn`]: a scalar-to-scalar dense network with hand-written reverse-mode
//!   gradients and Adam.
//! - [`fdm`]: uniform grids with ghost nodes and central-difference stencils.
//! - [`bc`]: penalty terms, output multipliers `K(x) = B(x) F(x)`, and the
//!   [`BcStrategy`] that selects between them.
//! - [`problems`]: the axially loaded bar and the simply supported beam, their
//!   closed-form solutions, losses and exact loss gradients.
//! - [`train`](mod@train): full-batch training, the relative L2 error metric and the
//!   four-case suite.
//! - [`output`]: CSV and text files for plotting and inspection.
//!
//! ```
//! use pinnbc::{train, BarSpec, BcStrategy, Multiplier, Problem, TrainConfig};
//!
//! let problem = Problem::Bar(BarSpec::default());
//! let strategy = BcStrategy::Reparameterization(Multiplier::BarDecay);
//! let config = TrainConfig { epochs: 20, layer_dims: vec![1, 16, 16, 1], ..TrainConfig::default() };
//! let report = train(&problem, &strategy, &config).unwrap();
//! assert_eq!(report.nodes.len(), 101);
//! assert_eq!(report.nodes[0].predicted, 0.0);
//! ```

pub mod bc;
mod error;
pub mod fdm;
pub mod nn;
pub mod output;
pub mod problems;
pub mod train;

pub use bc::{BcStrategy, Multiplier, PenaltyCoefficient, PenaltyWeights, StrategyKind};
pub use error::{Error, Result};
pub use fdm::{make_grid, Grid, SampledField, Stencil, StencilOutput};
pub use nn::{init_network, Activation, AdamConfig, AdamState, DenseNetwork, ParamGradient};
pub use problems::{
    bar_analytic, beam_analytic, loss_and_gradient, loss_gradient, BarSpec, BeamSpec, Case, LossBreakdown, Problem,
};
pub use train::{
    check_run, percent_error, run_case, run_suite, train, ExperimentReport, Physics, SuiteReport, TrainConfig,
};

// Compile and run the guide's code listings as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/networks.md")]
    mod networks {}
    #[doc = include_str!("../../../book/src/stencils.md")]
    mod stencils {}
    #[doc = include_str!("../../../book/src/boundary-conditions.md")]
    mod boundary_conditions {}
    #[doc = include_str!("../../../book/src/problems.md")]
    mod problems {}
    #[doc = include_str!("../../../book/src/training.md")]
    mod training {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
