//! Writes the protest domain as JSON, reads it back and solves both copies.

use manyagent::belief::{FactoredBelief, StructuredEngine};
use manyagent::io::{load_domain, save_domain};
use manyagent::planner::{solve_exact, DEFAULT_GAMMA};
use manyagent::protest::{build_domain, ProtestParams};

fn main() -> manyagent::Result<()> {
    let original = build_domain(&ProtestParams::with_n(3))?;
    let path = std::env::temp_dir().join(format!("protest-{}.json", std::process::id()));
    save_domain(&original, &path)?;
    let bytes = std::fs::metadata(&path)?.len();
    let loaded = load_domain(&path)?;
    std::fs::remove_file(&path)?;

    println!("wrote {bytes} bytes to {}", path.display());
    println!("specs identical: {}", original.spec() == loaded.spec());
    let value = |d| -> manyagent::Result<f64> {
        Ok(solve_exact(&StructuredEngine::new(d), &FactoredBelief::initial(d)?, 2, DEFAULT_GAMMA)?.value)
    };
    println!("value original {:.10}, loaded {:.10}", value(&original)?, value(&loaded)?);
    Ok(())
}
