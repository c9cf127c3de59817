//! CSV and text output for experiment reports.
//!
//! Floats are written with Rust's shortest round-trip formatting, so parsing
//! a CSV cell gives back the exact `f64` that was written.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::bc::BcStrategy;
use crate::problems::Problem;
use crate::train::{ExperimentReport, SuiteReport};

pub const SOLUTION_HEADER: &str = "x,predicted,exact,abs_error";
pub const HISTORY_HEADER: &str = "epoch,total_loss,residual_term,bc_term";
pub const SUMMARY_HEADER: &str = "case,percent_error,bc_deviation_x0,bc_deviation_xL";

pub const SOLUTION_FILE: &str = "solution.csv";
pub const HISTORY_FILE: &str = "history.csv";
pub const REPORT_FILE: &str = "report.txt";
pub const SUMMARY_FILE: &str = "summary.csv";

#[derive(Debug, Error)]
#[error("cannot write {}: {source}", path.display())]
pub struct OutputError {
    pub path: PathBuf,
    #[source]
    pub source: io::Error,
}

fn write_file(path: &Path, contents: &str) -> Result<(), OutputError> {
    fs::write(path, contents).map_err(|source| OutputError {
        path: path.to_path_buf(),
        source,
    })
}

pub fn solution_csv(report: &ExperimentReport) -> String {
    let mut out = String::with_capacity(64 * report.nodes.len());
    out.push_str(SOLUTION_HEADER);
    out.push('\n');
    for n in &report.nodes {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            n.x,
            n.predicted,
            n.exact,
            (n.predicted - n.exact).abs()
        );
    }
    out
}

pub fn history_csv(report: &ExperimentReport) -> String {
    let mut out = String::new();
    out.push_str(HISTORY_HEADER);
    out.push('\n');
    for h in &report.history {
        let _ = writeln!(out, "{},{},{},{}", h.epoch, h.total, h.residual, h.bc);
    }
    out
}

/// Human-readable summary echoing every setting that influenced the run.
pub fn report_text(report: &ExperimentReport) -> String {
    let mut s = String::new();
    let c = &report.config;
    let _ = writeln!(s, "case: {} (case {})", report.case.label(), report.case.number());
    let _ = writeln!(s, "problem: {}", report.problem.name());
    match report.problem {
        Problem::Bar(b) => {
            let _ = writeln!(s, "  youngs_modulus = {}", b.youngs_modulus);
            let _ = writeln!(s, "  area = {}", b.area);
            let _ = writeln!(s, "  length = {}", b.length);
            let _ = writeln!(s, "  end_load = {}", b.end_load);
            let _ = writeln!(s, "  load = f(x) = x");
        }
        Problem::Beam(b) => {
            let _ = writeln!(s, "  youngs_modulus = {}", b.youngs_modulus);
            let _ = writeln!(s, "  inertia = {}", b.inertia);
            let _ = writeln!(s, "  length = {}", b.length);
            let _ = writeln!(s, "  load = f(x) = sin(x)");
        }
    }
    let _ = writeln!(s, "strategy: {}", report.strategy.kind());
    if let Some(m) = report.strategy.multiplier() {
        let _ = writeln!(s, "  multiplier = {}", m.name());
    }
    let w = c.penalties;
    let active = matches!(report.strategy, BcStrategy::Penalty(_) | BcStrategy::Hybrid(..));
    let _ = writeln!(
        s,
        "  lambda1 = {}{}",
        w.lambda1.value(),
        if active { "" } else { " (unused)" }
    );
    let _ = writeln!(
        s,
        "  lambda2 = {}{}",
        w.lambda2.value(),
        if active { "" } else { " (unused)" }
    );
    let _ = writeln!(s, "network:");
    let _ = writeln!(s, "  layer_dims = {:?}", c.layer_dims);
    let _ = writeln!(s, "  hidden_activation = {}", c.hidden_activation.name());
    let _ = writeln!(s, "  output_activation = {}", c.output_activation.name());
    let _ = writeln!(s, "  init = glorot-uniform weights, zero biases");
    let _ = writeln!(s, "training:");
    let _ = writeln!(s, "  epochs = {}", c.epochs);
    let _ = writeln!(s, "  epochs_run = {}", report.epochs_run);
    let _ = writeln!(s, "  learning_rate = {}", c.adam.learning_rate);
    let _ = writeln!(s, "  beta1 = {}", c.adam.beta1);
    let _ = writeln!(s, "  beta2 = {}", c.adam.beta2);
    let _ = writeln!(s, "  epsilon = {}", c.adam.epsilon);
    let _ = writeln!(s, "  seed = {}", c.seed);
    let _ = writeln!(s, "  n_nodes = {}", c.n_nodes);
    let _ = writeln!(s, "  ghost = {}", c.ghost);
    let _ = writeln!(s, "  log_every = {}", c.log_every);
    let _ = writeln!(s, "  tolerance = {}", c.tolerance);
    let _ = writeln!(s, "results:");
    let _ = writeln!(s, "  percent_error = {}", report.percent_error);
    let _ = writeln!(s, "  max_abs_error = {}", report.max_abs_error);
    let _ = writeln!(s, "  final_loss = {}", report.loss.total);
    let _ = writeln!(s, "  residual_term = {}", report.loss.residual_term);
    for t in &report.loss.bc_terms {
        let _ = writeln!(
            s,
            "  bc {}: raw = {}, squared = {}, weighted = {}",
            t.label,
            t.raw,
            t.raw * t.raw,
            t.weighted
        );
    }
    let _ = writeln!(s, "  bc_deviation_x0 = {}", report.bc_deviation.0);
    let _ = writeln!(s, "  bc_deviation_xL = {}", report.bc_deviation.1);
    s
}

/// One row per case in case order. Failed cases get `NaN` columns.
pub fn summary_csv(suite: &SuiteReport) -> String {
    let mut out = String::new();
    out.push_str(SUMMARY_HEADER);
    out.push('\n');
    for (case, run) in &suite.runs {
        match run {
            Ok(r) => {
                let _ = writeln!(
                    out,
                    "{},{},{},{}",
                    case.number(),
                    r.percent_error,
                    r.bc_deviation.0,
                    r.bc_deviation.1
                );
            }
            Err(_) => {
                let _ = writeln!(out, "{},NaN,NaN,NaN", case.number());
            }
        }
    }
    out
}

/// Writes `solution.csv`, `history.csv` and `report.txt` into `dir`.
pub fn emit_plotdata(report: &ExperimentReport, dir: &Path) -> Result<(), OutputError> {
    fs::create_dir_all(dir).map_err(|source| OutputError {
        path: dir.to_path_buf(),
        source,
    })?;
    write_file(&dir.join(SOLUTION_FILE), &solution_csv(report))?;
    write_file(&dir.join(HISTORY_FILE), &history_csv(report))?;
    write_file(&dir.join(REPORT_FILE), &report_text(report))
}

/// Writes every successful case into `dir/<case label>/` plus `dir/summary.csv`.
pub fn emit_suite(suite: &SuiteReport, dir: &Path) -> Result<(), OutputError> {
    for (case, run) in &suite.runs {
        if let Ok(report) = run {
            emit_plotdata(report, &dir.join(case.label()))?;
        }
    }
    write_file(&dir.join(SUMMARY_FILE), &summary_csv(suite))
}

/// Parses `solution.csv` contents back into `(x, predicted, exact)` triples.
pub fn parse_solution_csv(text: &str) -> Option<Vec<(f64, f64, f64)>> {
    let mut lines = text.lines();
    if lines.next()? != SOLUTION_HEADER {
        return None;
    }
    lines
        .map(|line| {
            let mut cols = line.split(',').map(|c| c.parse::<f64>().ok());
            Some((cols.next()??, cols.next()??, cols.next()??))
        })
        .collect()
}
