//! Runs the four-case suite with default settings and prints the summary.

use std::time::Instant;

use pinnbc::{run_suite, Physics, TrainConfig};

fn main() {
    let mut config = TrainConfig::default();
    if let Some(epochs) = std::env::args().nth(1).and_then(|a| a.parse().ok()) {
        config.epochs = epochs;
    }
    let start = Instant::now();
    let suite = run_suite(&Physics::default(), &config);
    for (case, run) in &suite.runs {
        match run {
            Ok(r) => println!(
                "{:<20} error {:>9.4} %  loss {:.3e}  bc dev ({:.2e}, {:.2e})",
                case.label(),
                r.percent_error,
                r.loss.total,
                r.bc_deviation.0,
                r.bc_deviation.1
            ),
            Err(e) => println!("{:<20} failed: {e}", case.label()),
        }
    }
    println!("elapsed {:.1?}", start.elapsed());
}
