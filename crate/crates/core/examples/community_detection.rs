//! Finds communities in one segment and compares them with the planted
//! partition.

use netseg::synth::{CorrelationModel, LinkLaw, SegmentSpec};
use netseg::{detect_communities, generate, nmi, segment_mdl, Initializer, SearchConfig, SettingSpec};

fn main() -> netseg::Result<()> {
    let spec = SettingSpec {
        segments: vec![SegmentSpec {
            first: 1,
            last: 4,
            ratios: vec![0.5, 0.3, 0.2],
            link_law: LinkLaw::Fixed {
                within: 0.4,
                between: 0.05,
            },
            node_range: (120, 120),
        }],
        rho: 0.0,
        correlation_model: CorrelationModel::Independent,
        seed: 11,
    };
    let (seq, truth) = generate(&spec)?;
    let view = seq.full_view();
    let planted = &truth.assignments[0];

    for init in [Initializer::Random, Initializer::Spectral] {
        let cfg = SearchConfig {
            init,
            ..SearchConfig::default()
        };
        let found = detect_communities(&seq, view, 3, &cfg)?;
        println!(
            "{init:?}: {} communities of sizes {:?}, {:.1} bits (planted {:.1}), NMI {:.3}",
            found.num_communities(),
            found.sizes(),
            segment_mdl(&seq, view, &found, &cfg.mdl)?,
            segment_mdl(&seq, view, planted, &cfg.mdl)?,
            nmi(&found, planted)?
        );
    }
    Ok(())
}
