//! Structured and naive planners side by side on small protest populations.

use manyagent::bench::{run, write_csv, ExperimentSpec, Mode};

fn main() -> manyagent::Result<()> {
    for horizon in [1, 2] {
        let spec = ExperimentSpec { mode: Mode::Both, horizon, sweep: vec![1, 2, 3, 4], ..Default::default() };
        let rows = run(&spec)?;
        println!("horizon {horizon}");
        write_csv(&rows, std::io::stdout())?;
    }
    Ok(())
}
