//! One belief update in the protest domain, checked against joint enumeration.

use manyagent::belief::{BeliefDynamics, FactoredBelief, NaiveEngine, StructuredEngine};
use manyagent::protest::{build_domain, Controllers, ProtestParams};

fn main() -> manyagent::Result<()> {
    let params = ProtestParams { controllers: Controllers::Reactive, ..ProtestParams::with_n(3) };
    let domain = build_domain(&params)?;
    let b0 = FactoredBelief::initial(&domain)?;
    let structured = StructuredEngine::new(&domain);
    let naive = NaiveEngine::new(&domain)?;

    let a0 = 0;
    println!("agent 0 plays `{}`", domain.action_name(a0));
    let pred = structured.predict(&b0, a0)?;
    for (o, &p) in pred.obs_probs().iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        let post = pred.posterior(o)?;
        let reference = naive.update_state(&b0, a0, o)?;
        let gap = post.state_dist().iter().zip(&reference).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        let (best, mass) = post
            .state_dist()
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(s, &m)| (s, m))
            .unwrap();
        println!(
            "obs {:<12} p={p:.4}  likeliest {} ({mass:.3})  gap vs enumeration {gap:.1e}",
            domain.observation_name(o),
            domain.states().describe(best),
        );
    }
    let stats = structured.cache_stats();
    println!("cache: {stats:?}");
    Ok(())
}
