//! Lists the built-in settings and generates one of them.
//!
//! `cargo run --example synthetic_settings -- 6` generates setting 6.

use netseg::{builtin_setting, generate};

fn main() -> netseg::Result<()> {
    for k in 1..=6 {
        let spec = builtin_setting(k)?;
        let blocks: Vec<usize> = spec.segments.iter().map(|s| s.ratios.len()).collect();
        println!(
            "setting {k}: T={} change points {:?} blocks per segment {blocks:?} rho={}",
            spec.horizon(),
            spec.change_points(),
            spec.rho
        );
    }

    let k = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(2);
    let spec = builtin_setting(k)?.with_node_range(50, 60).with_seed(1);
    let (seq, truth) = generate(&spec)?;
    println!("\nsetting {k} at 50-60 nodes:");
    for snap in seq.snapshots() {
        println!("  t={:>2} nodes {:>3} edges {:>4}", snap.t(), snap.active_nodes().len(), snap.num_edges());
    }
    println!("planted sizes per segment:");
    for a in &truth.assignments {
        println!("  {:?}", a.sizes());
    }
    Ok(())
}
