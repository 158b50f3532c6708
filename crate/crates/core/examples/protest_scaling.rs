//! Sampled planning with the factorized coupling on growing populations.

use manyagent::belief::Coupling;
use manyagent::bench::{loglog_slope, run, ExperimentSpec};

fn main() -> manyagent::Result<()> {
    let spec = ExperimentSpec {
        horizon: 2,
        samples: 3,
        seed: 7,
        sweep: vec![25, 50, 100, 200],
        coupling: Coupling::Factorized,
        ..Default::default()
    };
    let rows = run(&spec)?;
    for r in &rows {
        println!("N={:<4} {:>8.3}s  value {:.4}  {} beliefs", r.n, r.seconds, r.value.unwrap_or(f64::NAN), r.nodes);
    }
    let points: Vec<(f64, f64)> = rows.iter().map(|r| (r.n as f64, r.seconds.max(1e-6))).collect();
    println!("log-log slope of time in N: {:.2}", loglog_slope(&points));
    Ok(())
}
