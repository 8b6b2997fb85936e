//! Builds a sequence from labelled edges, writes it to disk in both layouts
//! and reads it back.

use netseg::graph::SequenceBuilder;
use netseg::io::{read_sequence, write_sequence_dir, write_sequence_sectioned};
use netseg::SegmentView;

fn main() -> netseg::Result<()> {
    let mut builder = SequenceBuilder::default();
    builder.push_snapshot([("alice", "bob"), ("bob", "carol")])?;
    builder.push_snapshot([("alice", "carol")])?;
    builder.push_snapshot([("dave", "erin"), ("alice", "bob")])?;
    // Known but silent nodes still belong to the universe.
    builder.register("frank");
    let seq = builder.finish()?;

    println!("{} snapshots over {} labelled nodes", seq.len(), seq.num_nodes());
    for snap in seq.snapshots() {
        let edges: Vec<String> = snap
            .edges()
            .iter()
            .map(|&(a, b)| format!("{}-{}", seq.label(a), seq.label(b)))
            .collect();
        println!("t={} {}", snap.t(), edges.join(" "));
    }

    let first_two = SegmentView::new(1, 3);
    let active: Vec<&str> = seq.active_nodes(first_two)?.into_iter().map(|i| seq.label(i)).collect();
    println!("active in t=1..2: {active:?}");
    let d = netseg::changepoint::consecutive_distances(&seq)?;
    println!("screening distances d_2.. = {d:?}");

    let dir = std::env::temp_dir().join(format!("netseg-build-{}", std::process::id()));
    write_sequence_dir(&seq, &dir.join("snapshots"))?;
    write_sequence_sectioned(&seq, &dir.join("sequence.txt"))?;
    let a = read_sequence(&dir.join("snapshots"))?;
    let b = read_sequence(&dir.join("sequence.txt"))?;
    println!("round trip: directory {} snapshots, sectioned {} snapshots", a.len(), b.len());
    let _ = std::fs::remove_dir_all(&dir);
    Ok(())
}
