//! The TOML config file, command-line overrides, and the validated
//! [`RunConfig`] they merge into.

use std::path::{Path, PathBuf};

use pinnbc::nn::validate_layout;
use pinnbc::problems::Problem;
use pinnbc::{
    check_run, Activation, AdamConfig, BarSpec, BeamSpec, Error, PenaltyCoefficient, PenaltyWeights, Physics,
    StrategyKind, TrainConfig,
};
use serde::Deserialize;

use crate::CliError;

/// Output directory used when neither the file nor `--out` names one.
pub const DEFAULT_OUTPUT_DIR: &str = "pinnbc-out";

/// The config file as written. Every field is optional; omitted values take
/// the library defaults.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub problem: Option<String>,
    pub strategy: Option<String>,
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub physics: PhysicsSection,
    #[serde(default)]
    pub train: TrainSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicsSection {
    #[serde(default)]
    pub bar: BarSection,
    #[serde(default)]
    pub beam: BeamSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BarSection {
    pub youngs_modulus: Option<f64>,
    pub area: Option<f64>,
    pub length: Option<f64>,
    pub end_load: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BeamSection {
    pub youngs_modulus: Option<f64>,
    pub inertia: Option<f64>,
    pub length: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainSection {
    pub epochs: Option<usize>,
    pub seed: Option<u64>,
    pub n_nodes: Option<usize>,
    pub ghost: Option<usize>,
    pub log_every: Option<usize>,
    pub tolerance: Option<f64>,
    pub learning_rate: Option<f64>,
    pub beta1: Option<f64>,
    pub beta2: Option<f64>,
    pub epsilon: Option<f64>,
    pub layer_dims: Option<Vec<usize>>,
    pub hidden_activation: Option<String>,
    pub output_activation: Option<String>,
    pub lambda1: Option<f64>,
    pub lambda2: Option<f64>,
}

impl FileConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config {
            key: e.span().map_or_else(|| "config".to_string(), |s| key_at(text, s.start)),
            reason: e.message().to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::ConfigRead {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }
}

/// Best-effort name of the key on the line containing byte `offset`, for
/// parse diagnostics (`[section] key`).
fn key_at(text: &str, offset: usize) -> String {
    let before = &text[..offset.min(text.len())];
    let section = before
        .lines()
        .filter_map(|l| l.trim().strip_prefix('[').and_then(|l| l.strip_suffix(']')))
        .next_back();
    let line_start = before.rfind('\n').map_or(0, |i| i + 1);
    let line = text[line_start..].lines().next().unwrap_or("");
    let key = line.split('=').next().unwrap_or("").trim();
    match (section, key.is_empty() || key.starts_with('[')) {
        (Some(s), false) => format!("{s}.{key}"),
        (None, false) => key.to_string(),
        (Some(s), true) => s.to_string(),
        (None, true) => "config".to_string(),
    }
}

/// Values given on the command line; each one replaces the file's value.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub suite: bool,
    pub problem: Option<String>,
    pub strategy: Option<String>,
    pub epochs: Option<usize>,
    pub seed: Option<u64>,
    pub nodes: Option<usize>,
    pub out: Option<PathBuf>,
}

/// What to run.
#[derive(Debug, Clone, PartialEq)]
pub enum Mode {
    Suite,
    Single { problem: Problem, strategy: StrategyKind },
}

/// The merged, validated configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mode: Mode,
    pub physics: Physics,
    pub train: TrainConfig,
    pub output_dir: PathBuf,
}

fn invalid(key: impl Into<String>, reason: impl ToString) -> CliError {
    CliError::Config {
        key: key.into(),
        reason: reason.to_string(),
    }
}

/// Maps a library validation error to a diagnostic naming the config key.
fn keyed(prefix: &str, err: Error) -> CliError {
    match err {
        Error::InvalidParameter { name, reason } => invalid(format!("{prefix}{name}"), reason),
        other => invalid(prefix.trim_end_matches('.'), other),
    }
}

impl RunConfig {
    /// Merges `file` with `overrides` (overrides win) and validates the result
    /// completely, so a successful return means training can start.
    pub fn resolve(file: FileConfig, overrides: &Overrides) -> Result<Self, CliError> {
        let bar_defaults = BarSpec::default();
        let b = &file.physics.bar;
        let bar = BarSpec {
            youngs_modulus: b.youngs_modulus.unwrap_or(bar_defaults.youngs_modulus),
            area: b.area.unwrap_or(bar_defaults.area),
            length: b.length.unwrap_or(bar_defaults.length),
            end_load: b.end_load.unwrap_or(bar_defaults.end_load),
        };
        bar.validate().map_err(|e| keyed("physics.bar.", e))?;

        let beam_defaults = BeamSpec::default();
        let b = &file.physics.beam;
        let beam = BeamSpec {
            youngs_modulus: b.youngs_modulus.unwrap_or(beam_defaults.youngs_modulus),
            inertia: b.inertia.unwrap_or(beam_defaults.inertia),
            length: b.length.unwrap_or(beam_defaults.length),
        };
        beam.validate().map_err(|e| keyed("physics.beam.", e))?;
        let physics = Physics { bar, beam };

        let t = file.train;
        let d = TrainConfig::default();
        let activation = |key: &str, value: Option<String>, default: Activation| match value {
            Some(s) => s.parse::<Activation>().map_err(|e| invalid(key, e)),
            None => Ok(default),
        };
        let lambda1 = t.lambda1.unwrap_or(d.penalties.lambda1.value());
        let lambda2 = t.lambda2.unwrap_or(d.penalties.lambda2.value());
        let penalties = PenaltyWeights {
            lambda1: PenaltyCoefficient::new(lambda1).map_err(|e| invalid("train.lambda1", e))?,
            lambda2: PenaltyCoefficient::new(lambda2).map_err(|e| invalid("train.lambda2", e))?,
        };
        let train = TrainConfig {
            epochs: overrides.epochs.or(t.epochs).unwrap_or(d.epochs),
            adam: AdamConfig {
                learning_rate: t.learning_rate.unwrap_or(d.adam.learning_rate),
                beta1: t.beta1.unwrap_or(d.adam.beta1),
                beta2: t.beta2.unwrap_or(d.adam.beta2),
                epsilon: t.epsilon.unwrap_or(d.adam.epsilon),
            },
            seed: overrides.seed.or(t.seed).unwrap_or(d.seed),
            n_nodes: overrides.nodes.or(t.n_nodes).unwrap_or(d.n_nodes),
            ghost: t.ghost.unwrap_or(d.ghost),
            log_every: t.log_every.unwrap_or(d.log_every),
            tolerance: t.tolerance.unwrap_or(d.tolerance),
            layer_dims: t.layer_dims.unwrap_or(d.layer_dims),
            hidden_activation: activation("train.hidden_activation", t.hidden_activation, d.hidden_activation)?,
            output_activation: activation("train.output_activation", t.output_activation, d.output_activation)?,
            penalties,
        };
        train.validate().map_err(|e| keyed("train.", e))?;
        validate_layout(&train.layer_dims).map_err(|e| invalid("train.layer_dims", e))?;
        if train.n_nodes < pinnbc::fdm::MIN_NODES {
            return Err(invalid(
                "train.n_nodes",
                format!("need at least {} nodes, got {}", pinnbc::fdm::MIN_NODES, train.n_nodes),
            ));
        }

        let mode = if overrides.suite {
            Mode::Suite
        } else {
            let problem = match overrides.problem.as_deref().or(file.problem.as_deref()) {
                Some("bar") => Problem::Bar(physics.bar),
                Some("beam") => Problem::Beam(physics.beam),
                Some(other) => return Err(invalid("problem", format!("expected `bar` or `beam`, got `{other}`"))),
                None => return Err(invalid("problem", "required unless running the suite")),
            };
            let strategy = match overrides.strategy.as_deref().or(file.strategy.as_deref()) {
                Some(s) => s.parse::<StrategyKind>().map_err(|e| keyed("", e))?,
                None => return Err(invalid("strategy", "required unless running the suite")),
            };
            Mode::Single { problem, strategy }
        };

        let problems: Vec<(Problem, StrategyKind)> = match &mode {
            Mode::Suite => pinnbc::Case::ALL
                .iter()
                .map(|&c| (physics.problem_for(c), c.strategy_kind()))
                .collect(),
            Mode::Single { problem, strategy } => vec![(*problem, *strategy)],
        };
        for (problem, kind) in problems {
            if train.ghost < problem.min_ghost() {
                return Err(invalid(
                    "train.ghost",
                    format!(
                        "the {problem} problem needs at least {} ghost nodes, got {}",
                        problem.min_ghost(),
                        train.ghost
                    ),
                ));
            }
            let strategy = problem
                .strategy(kind, train.penalties)
                .map_err(|e| invalid("strategy", e))?;
            check_run(&problem, &strategy, &train).map_err(|e| invalid("config", e))?;
        }

        let output_dir = overrides
            .out
            .clone()
            .or(file.output_dir)
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR));
        Ok(Self {
            mode,
            physics,
            train,
            output_dir,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single(problem: &str, strategy: &str) -> Overrides {
        Overrides {
            problem: Some(problem.into()),
            strategy: Some(strategy.into()),
            ..Overrides::default()
        }
    }

    fn config_key(err: CliError) -> String {
        match err {
            CliError::Config { key, .. } => key,
            other => panic!("expected a config error, got {other:?}"),
        }
    }

    #[test]
    fn empty_file_gives_library_defaults() {
        let cfg = RunConfig::resolve(
            FileConfig::default(),
            &Overrides {
                suite: true,
                ..Overrides::default()
            },
        )
        .unwrap();
        assert_eq!(cfg.mode, Mode::Suite);
        assert_eq!(cfg.physics, Physics::default());
        assert_eq!(cfg.train, TrainConfig::default());
        assert_eq!(cfg.output_dir, PathBuf::from(DEFAULT_OUTPUT_DIR));
    }

    #[test]
    fn flags_override_file_values() {
        let file = FileConfig::parse(
            "problem = \"beam\"\nstrategy = \"penalty\"\noutput_dir = \"a\"\n[train]\nepochs = 5\nseed = 1\nn_nodes = 11\n",
        )
        .unwrap();
        let overrides = Overrides {
            problem: Some("bar".into()),
            strategy: Some("reparam".into()),
            epochs: Some(7),
            seed: Some(9),
            nodes: Some(21),
            out: Some("b".into()),
            ..Overrides::default()
        };
        let cfg = RunConfig::resolve(file, &overrides).unwrap();
        assert_eq!(
            cfg.mode,
            Mode::Single {
                problem: Problem::Bar(BarSpec::default()),
                strategy: StrategyKind::Reparam
            }
        );
        assert_eq!((cfg.train.epochs, cfg.train.seed, cfg.train.n_nodes), (7, 9, 21));
        assert_eq!(cfg.output_dir, PathBuf::from("b"));
    }

    #[test]
    fn file_values_reach_the_run_config() {
        let file = FileConfig::parse(
            "[physics.bar]\nend_load = 0.5\n[physics.beam]\nlength = 2.0\n[train]\nlearning_rate = 0.01\nlayer_dims = [1, 4, 1]\nhidden_activation = \"relu\"\nlambda2 = 3.0\n",
        )
        .unwrap();
        let cfg = RunConfig::resolve(file, &single("beam", "hybrid")).unwrap();
        assert_eq!(cfg.physics.bar.end_load, 0.5);
        assert_eq!(cfg.physics.beam.length, 2.0);
        assert_eq!(cfg.train.adam.learning_rate, 0.01);
        assert_eq!(cfg.train.layer_dims, vec![1, 4, 1]);
        assert_eq!(cfg.train.hidden_activation, Activation::Relu);
        assert_eq!(cfg.train.penalties.lambda2.value(), 3.0);
    }

    #[test]
    fn diagnostics_name_the_offending_key() {
        let cases = [
            (
                "[train]\nlearning_rate = -1.0\n",
                single("bar", "reparam"),
                "train.learning_rate",
            ),
            (
                "[physics.bar]\narea = 0.0\n",
                single("bar", "reparam"),
                "physics.bar.area",
            ),
            ("[train]\nlambda2 = -1.0\n", single("bar", "penalty"), "train.lambda2"),
            (
                "[train]\nlayer_dims = [2, 1]\n",
                single("bar", "penalty"),
                "train.layer_dims",
            ),
            ("[train]\nghost = 1\n", single("beam", "penalty"), "train.ghost"),
            (
                "[train]\nhidden_activation = \"tanh\"\n",
                single("bar", "penalty"),
                "train.hidden_activation",
            ),
            ("", single("plate", "penalty"), "problem"),
            ("", single("bar", "hard"), "strategy"),
            ("", single("bar", "hybrid"), "strategy"),
            ("", Overrides::default(), "problem"),
        ];
        for (text, overrides, key) in cases {
            let err = RunConfig::resolve(FileConfig::parse(text).unwrap(), &overrides).unwrap_err();
            assert_eq!(config_key(err), key, "config {text:?}");
        }
    }

    #[test]
    fn parse_errors_name_the_key() {
        let err = FileConfig::parse("[train]\nepochs = \"many\"\n").unwrap_err();
        assert_eq!(config_key(err), "train.epochs");
        let err = FileConfig::parse("[train]\nepoch = 3\n").unwrap_err();
        assert_eq!(config_key(err), "train.epoch");
    }

    #[test]
    fn guide_example_spells_out_the_defaults() {
        let chapter = include_str!("../../../book/src/cli.md");
        let start = chapter.find("```toml\n").expect("toml listing") + "```toml\n".len();
        let listing = &chapter[start..start + chapter[start..].find("```").unwrap()];
        let cfg = RunConfig::resolve(FileConfig::parse(listing).unwrap(), &Overrides::default()).unwrap();
        assert_eq!(cfg.physics, Physics::default());
        assert_eq!(cfg.train, TrainConfig::default());
        assert_eq!(cfg.output_dir, PathBuf::from("results"));
    }

    #[test]
    fn bar_ghost_one_is_enough() {
        let file = FileConfig::parse("[train]\nghost = 1\n").unwrap();
        assert!(RunConfig::resolve(file, &single("bar", "penalty")).is_ok());
    }
}
