//! Scores candidate segmentations of a synthetic sequence with the full
//! description length and its parts.

use netseg::mdl::{change_point_code_length, model_code_length, residual_code_length, ChangePointCode};
use netseg::{builtin_setting, full_mdl, generate, MdlConfig, Segmentation};

fn main() -> netseg::Result<()> {
    let spec = builtin_setting(1)?.with_node_range(60, 60).with_seed(7);
    let (seq, truth) = generate(&spec)?;
    let cfg = MdlConfig::default();

    let planted = Segmentation::fit(&seq, truth.change_points.clone(), truth.assignments.clone(), &cfg)?;
    let merged_nodes = seq.active_nodes(seq.full_view())?;
    let flat = Segmentation::fit(
        &seq,
        vec![],
        vec![netseg::CommunityAssignment::single(&merged_nodes)],
        &cfg,
    )?;

    for (name, s) in [("planted", &planted), ("no change, one block", &flat)] {
        println!(
            "{name:>22}: model {:>9.1} + residual {:>9.1} = {:>9.1} bits",
            model_code_length(&seq, s, &cfg)?,
            residual_code_length(&seq, s, &cfg)?,
            full_mdl(&seq, s, &cfg)?
        );
    }

    let t = seq.len();
    let cps = &truth.change_points;
    println!(
        "change-point code for {cps:?}: gaps {:.2} bits, uniform {:.2} bits",
        change_point_code_length(t, cps, ChangePointCode::Gaps),
        change_point_code_length(t, cps, ChangePointCode::Uniform)
    );
    Ok(())
}
