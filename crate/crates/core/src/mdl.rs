//! Two-part code lengths for a segmented sequence of block-model fits.
//!
//! All terms are in bits. The criterion is
//!
//! ```text
//! log2(M+1) + Σ_m log2(t_m - t_{m-1} + 1)          change points
//!           + Σ_m (1 + |V_m|) log2 c_m              community labels
//!           + Σ_t Σ_{k<=l, N_kl>0} ½ log2 N_kl       link probabilities
//!           - Σ_t log-likelihood                    residuals
//! ```
//!
//! with `t_0 = 1` and `t_{M+1} = T + 1`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{GraphSequence, SegmentView};
use crate::sbm::{block_counts, block_log_likelihood, mle_link_probs, CommunityAssignment, LinkProbs};

/// How change-point locations are encoded.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChangePointCode {
    /// `Σ log2(gap + 1)` over segment lengths.
    #[default]
    Gaps,
    /// `M log2 T`, each location bounded by `T`.
    Uniform,
}

/// Which nodes contribute pairs to `N_kl` at a given snapshot.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairCounting {
    /// Nodes with at least one edge in that snapshot.
    #[default]
    ActiveAtTime,
    /// Every node active somewhere in the enclosing segment.
    SegmentActive,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MdlConfig {
    pub change_point_code: ChangePointCode,
    pub pair_counting: PairCounting,
}

/// Segment windows for change points `cps` over `1..=horizon`.
pub fn segment_views(horizon: usize, change_points: &[usize]) -> Vec<SegmentView> {
    let mut bounds = Vec::with_capacity(change_points.len() + 2);
    bounds.push(1);
    bounds.extend_from_slice(change_points);
    bounds.push(horizon + 1);
    bounds
        .windows(2)
        .map(|w| SegmentView::new(w[0], w[1]))
        .collect()
}

/// Change points must be strictly increasing and lie in `[2, T]`.
pub fn validate_change_points(horizon: usize, change_points: &[usize]) -> Result<()> {
    if let Some(&t) = change_points.iter().find(|&&t| t < 2 || t > horizon) {
        return Err(Error::InvalidSegmentation(format!(
            "change point {t} outside [2, {horizon}]"
        )));
    }
    if change_points.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidSegmentation(format!(
            "change points {change_points:?} are not strictly increasing"
        )));
    }
    Ok(())
}

/// Bits for the number and locations of the change points.
pub fn change_point_code_length(horizon: usize, change_points: &[usize], code: ChangePointCode) -> f64 {
    let m = change_points.len();
    let count_bits = ((m + 1) as f64).log2();
    let location_bits = match code {
        ChangePointCode::Gaps => segment_views(horizon, change_points)
            .iter()
            .map(|s| ((s.len() + 1) as f64).log2())
            .sum(),
        ChangePointCode::Uniform => m as f64 * (horizon as f64).log2(),
    };
    count_bits + location_bits
}

/// `log2 c + |V| log2 c`: the community count plus one label per node.
pub fn community_code_length(num_communities: usize, num_nodes: usize) -> f64 {
    (1 + num_nodes) as f64 * (num_communities as f64).log2()
}

/// Nodes whose pairs enter `N_kl` at time `t`, given the segment's active set.
pub fn counted_nodes(
    seq: &GraphSequence,
    t: usize,
    segment_active: &[usize],
    counting: PairCounting,
) -> Vec<usize> {
    match counting {
        PairCounting::ActiveAtTime => seq.snapshot(t).active_nodes(),
        PairCounting::SegmentActive => segment_active.to_vec(),
    }
}

/// A fitted model: change points, one assignment per segment and link
/// probabilities per snapshot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segmentation {
    change_points: Vec<usize>,
    assignments: Vec<CommunityAssignment>,
    probs: Vec<LinkProbs>,
}

impl Segmentation {
    /// Unchecked; use [`Segmentation::validate`] against a sequence.
    pub fn new(
        change_points: Vec<usize>,
        assignments: Vec<CommunityAssignment>,
        probs: Vec<LinkProbs>,
    ) -> Self {
        Segmentation {
            change_points,
            assignments,
            probs,
        }
    }

    /// Profiles out the link probabilities at their per-snapshot MLE.
    pub fn fit(
        seq: &GraphSequence,
        change_points: Vec<usize>,
        assignments: Vec<CommunityAssignment>,
        cfg: &MdlConfig,
    ) -> Result<Self> {
        validate_change_points(seq.len(), &change_points)?;
        let views = segment_views(seq.len(), &change_points);
        if views.len() != assignments.len() {
            return Err(Error::InvalidSegmentation(format!(
                "{} segments but {} assignments",
                views.len(),
                assignments.len()
            )));
        }
        let mut probs = Vec::with_capacity(seq.len());
        for (view, assign) in views.iter().zip(&assignments) {
            let active = seq.active_nodes(*view)?;
            for t in view.times() {
                let counted = counted_nodes(seq, t, &active, cfg.pair_counting);
                let counts = block_counts(seq.snapshot(t), assign, &counted)?;
                probs.push(mle_link_probs(&counts));
            }
        }
        Ok(Segmentation {
            change_points,
            assignments,
            probs,
        })
    }

    pub fn change_points(&self) -> &[usize] {
        &self.change_points
    }

    pub fn assignments(&self) -> &[CommunityAssignment] {
        &self.assignments
    }

    /// Link probabilities for 1-based time `t`.
    pub fn probs_at(&self, t: usize) -> &LinkProbs {
        &self.probs[t - 1]
    }

    pub fn probs(&self) -> &[LinkProbs] {
        &self.probs
    }

    pub fn probs_mut(&mut self) -> &mut [LinkProbs] {
        &mut self.probs
    }

    pub fn num_segments(&self) -> usize {
        self.change_points.len() + 1
    }

    pub fn views(&self, horizon: usize) -> Vec<SegmentView> {
        segment_views(horizon, &self.change_points)
    }

    /// Checks shape and coverage against `seq`.
    pub fn validate(&self, seq: &GraphSequence) -> Result<()> {
        validate_change_points(seq.len(), &self.change_points)?;
        let views = self.views(seq.len());
        if views.len() != self.assignments.len() {
            return Err(Error::InvalidSegmentation(format!(
                "{} segments but {} assignments",
                views.len(),
                self.assignments.len()
            )));
        }
        if self.probs.len() != seq.len() {
            return Err(Error::InvalidSegmentation(format!(
                "{} probability sets for {} snapshots",
                self.probs.len(),
                seq.len()
            )));
        }
        for (m, (view, assign)) in views.iter().zip(&self.assignments).enumerate() {
            let active = seq.active_nodes(*view)?;
            if assign.nodes() != active.as_slice() {
                return Err(Error::InvalidSegmentation(format!(
                    "assignment {} does not cover exactly the active nodes of its segment",
                    m + 1
                )));
            }
            for t in view.times() {
                if self.probs[t - 1].num_communities() != assign.num_communities() {
                    return Err(Error::InvalidSegmentation(format!(
                        "probabilities at t={t} do not match segment {} community count",
                        m + 1
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Parameter bits and log-likelihood for one snapshot under `probs`.
fn snapshot_terms(
    seq: &GraphSequence,
    t: usize,
    active: &[usize],
    assign: &CommunityAssignment,
    probs: Option<&LinkProbs>,
    cfg: &MdlConfig,
) -> Result<(f64, f64)> {
    let counted = counted_nodes(seq, t, active, cfg.pair_counting);
    let counts = block_counts(seq.snapshot(t), assign, &counted)?;
    let parameter_bits: f64 = counts
        .blocks()
        .filter(|b| b.3 > 0)
        .map(|(_, _, _, n)| 0.5 * (n as f64).log2())
        .sum();
    let loglik = match probs {
        Some(p) => block_log_likelihood(&counts, p)?,
        None => block_log_likelihood(&counts, &mle_link_probs(&counts))?,
    };
    Ok((parameter_bits, loglik))
}

/// First part of the code: change points, communities and link probabilities.
pub fn model_code_length(seq: &GraphSequence, s: &Segmentation, cfg: &MdlConfig) -> Result<f64> {
    s.validate(seq)?;
    let mut bits = change_point_code_length(seq.len(), &s.change_points, cfg.change_point_code);
    for (view, assign) in s.views(seq.len()).iter().zip(&s.assignments) {
        let active = seq.active_nodes(*view)?;
        bits += community_code_length(assign.num_communities(), active.len());
        for t in view.times() {
            bits += snapshot_terms(seq, t, &active, assign, Some(s.probs_at(t)), cfg)?.0;
        }
    }
    Ok(bits)
}

/// Second part of the code: negative log-likelihood in bits.
pub fn residual_code_length(seq: &GraphSequence, s: &Segmentation, cfg: &MdlConfig) -> Result<f64> {
    s.validate(seq)?;
    let mut loglik = 0.0;
    for (view, assign) in s.views(seq.len()).iter().zip(&s.assignments) {
        let active = seq.active_nodes(*view)?;
        for t in view.times() {
            loglik += snapshot_terms(seq, t, &active, assign, Some(s.probs_at(t)), cfg)?.1;
        }
    }
    Ok(-loglik)
}

pub fn full_mdl(seq: &GraphSequence, s: &Segmentation, cfg: &MdlConfig) -> Result<f64> {
    Ok(model_code_length(seq, s, cfg)? + residual_code_length(seq, s, cfg)?)
}

/// The part of the criterion owned by one segment, with link probabilities
/// at their per-snapshot MLE.
pub fn segment_mdl(
    seq: &GraphSequence,
    seg: SegmentView,
    assign: &CommunityAssignment,
    cfg: &MdlConfig,
) -> Result<f64> {
    let active = seq.active_nodes(seg)?;
    let mut bits = community_code_length(assign.num_communities(), active.len());
    for t in seg.times() {
        let (parameter_bits, loglik) = snapshot_terms(seq, t, &active, assign, None, cfg)?;
        bits += parameter_bits - loglik;
    }
    Ok(bits)
}
