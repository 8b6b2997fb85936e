//! Joint change-point and community detection on a scaled-down setting,
//! with the search trace.

use netseg::{builtin_setting, detect, generate, SearchConfig};

fn main() -> netseg::Result<()> {
    let spec = builtin_setting(1)?.with_node_range(80, 90).with_seed(3);
    let (seq, truth) = generate(&spec)?;
    let result = detect(&seq, 9, &SearchConfig::default())?;

    println!("true change points  {:?}", truth.change_points);
    println!("found change points {:?}", result.change_points);
    println!("{:.1} bits after {} segment fits", result.mdl_value, result.evaluations);
    for (view, a) in result.segmentation.views(seq.len()).iter().zip(result.segmentation.assignments()) {
        println!(
            "  t={}..{}: {} communities",
            view.start,
            view.end_exclusive - 1,
            a.num_communities()
        );
    }
    for e in result.trace.iter().filter(|e| e.accepted) {
        println!("  {:?} t={} {:.1} -> {:.1}", e.action, e.t, e.mdl_before, e.mdl_after);
    }
    Ok(())
}
