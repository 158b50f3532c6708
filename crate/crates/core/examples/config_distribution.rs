//! Distribution over configurations of five agents sharing one controller.

use manyagent::config::{config_distribution, num_configs, AgentDraw, TrieOptions};
use manyagent::hypergraph::{FrameAction, Neighborhood};
use manyagent::population::Fsc;

fn main() -> manyagent::Result<()> {
    // two nodes: a cautious one and an eager one; actions are stay, march, riot
    let fsc = Fsc::new(
        "mood",
        0,
        3,
        1,
        vec![vec![0.7, 0.3, 0.0], vec![0.1, 0.6, 0.3]],
        vec![vec![0.5, 0.5]; 6],
    )?;
    let beliefs = [vec![1.0, 0.0], vec![0.5, 0.5], vec![0.2, 0.8], vec![0.0, 1.0], vec![0.9, 0.1]];
    let draws: Vec<AgentDraw> = beliefs.iter().map(|b| AgentDraw { frame: 0, fsc: &fsc, belief: b }).collect();

    // count march and riot; stay falls into the dummy slot
    let nu = Neighborhood::new(vec![FrameAction::new(0, 1), FrameAction::new(0, 2)]);
    let trie = config_distribution(&nu, &draws, &TrieOptions::default())?;

    println!("{} of {} possible configurations reachable", trie.len(), num_configs(draws.len(), nu.len()));
    println!("march riot other  probability");
    let mut entries = trie.entries();
    entries.sort_by(|a, b| b.1.total_cmp(&a.1));
    for (c, p) in entries {
        let k = c.counts();
        println!("{:>5} {:>4} {:>5}  {p:.6}", k[0], k[1], k[2]);
    }
    println!("total mass {:.12}", trie.total());
    Ok(())
}
