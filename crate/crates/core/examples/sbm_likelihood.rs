//! Block counts, maximum-likelihood link probabilities and the code length
//! of one snapshot under a fixed partition.

use netseg::sbm::{block_code_length, block_counts, block_log_likelihood, mle_link_probs};
use netseg::{CommunityAssignment, GraphSequence};

fn main() -> netseg::Result<()> {
    // Two triangles joined by one bridge.
    let labels = (0..6).map(|i| format!("n{i}")).collect();
    let edges = vec![(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5), (2, 3)];
    let seq = GraphSequence::from_indexed(labels, vec![edges])?;
    let nodes: Vec<usize> = (0..6).collect();
    let snap = seq.snapshot(1);

    for (name, assign) in [
        ("one block", CommunityAssignment::single(&nodes)),
        ("two triangles", CommunityAssignment::from_raw(&nodes, &[0, 0, 0, 1, 1, 1])),
    ] {
        let counts = block_counts(snap, &assign, &nodes)?;
        let probs = mle_link_probs(&counts);
        let ll = block_log_likelihood(&counts, &probs)?;
        println!("{name}:");
        for (k, l, e, n) in counts.blocks() {
            println!(
                "  block ({k},{l}): E={e} N={n} P={:.3} code {:.3} bits",
                probs.get(k, l),
                block_code_length(e, n)
            );
        }
        println!("  log-likelihood {ll:.3} bits");
    }
    Ok(())
}
