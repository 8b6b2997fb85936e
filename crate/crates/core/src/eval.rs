//! Normalized mutual information between partitions and change-point
//! frequency tables.

use std::collections::{BTreeMap, HashMap};
use std::hash::Hash;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mdl::Segmentation;
use crate::sbm::CommunityAssignment;
use crate::synth::GroundTruth;

/// NMI on the shared domain plus the fraction of the union it covers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NmiScore {
    pub value: f64,
    pub coverage: f64,
}

fn entropy(counts: impl Iterator<Item = usize>, n: f64) -> f64 {
    counts
        .filter(|&c| c > 0)
        .map(|c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum()
}

/// NMI between two labelings keyed by any node type. Nodes present in only
/// one labeling are dropped and reflected in `coverage`.
pub fn nmi_keyed<K: Eq + Hash + Clone>(
    est: &HashMap<K, usize>,
    truth: &HashMap<K, usize>,
) -> Result<NmiScore> {
    let shared: Vec<&K> = est.keys().filter(|k| truth.contains_key(*k)).collect();
    if shared.is_empty() {
        return Err(Error::EmptyDomain);
    }
    let union = est.len() + truth.len() - shared.len();
    let n = shared.len() as f64;

    let mut joint: HashMap<(usize, usize), usize> = HashMap::new();
    let mut row: HashMap<usize, usize> = HashMap::new();
    let mut col: HashMap<usize, usize> = HashMap::new();
    for k in shared {
        let (a, b) = (est[k], truth[k]);
        *joint.entry((a, b)).or_default() += 1;
        *row.entry(a).or_default() += 1;
        *col.entry(b).or_default() += 1;
    }
    let h_est = entropy(row.values().copied(), n);
    let h_truth = entropy(col.values().copied(), n);
    let value = if h_est == 0.0 && h_truth == 0.0 {
        1.0
    } else if h_est == 0.0 || h_truth == 0.0 {
        0.0
    } else {
        let mi: f64 = joint
            .iter()
            .map(|(&(a, b), &c)| {
                let c = c as f64;
                c / n * (n * c / (row[&a] as f64 * col[&b] as f64)).ln()
            })
            .sum();
        (mi / ((h_est + h_truth) / 2.0)).clamp(0.0, 1.0)
    };
    Ok(NmiScore {
        value,
        coverage: shared_len_ratio(n, union),
    })
}

fn shared_len_ratio(shared: f64, union: usize) -> f64 {
    if union == 0 {
        0.0
    } else {
        shared / union as f64
    }
}

fn as_map(a: &CommunityAssignment) -> HashMap<usize, usize> {
    a.iter().collect()
}

pub fn nmi_with_coverage(est: &CommunityAssignment, truth: &CommunityAssignment) -> Result<NmiScore> {
    nmi_keyed(&as_map(est), &as_map(truth))
}

pub fn nmi(est: &CommunityAssignment, truth: &CommunityAssignment) -> Result<f64> {
    nmi_with_coverage(est, truth).map(|s| s.value)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NmiReport {
    pub per_segment: Vec<f64>,
    pub coverage: Vec<f64>,
    pub overall: f64,
}

impl NmiReport {
    pub fn from_scores(scores: &[NmiScore]) -> Self {
        let per_segment: Vec<f64> = scores.iter().map(|s| s.value).collect();
        let overall = per_segment.iter().sum::<f64>() / per_segment.len().max(1) as f64;
        NmiReport {
            coverage: scores.iter().map(|s| s.coverage).collect(),
            per_segment,
            overall,
        }
    }

    /// `segment,nmi` rows followed by `overall,<value>`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("segment,nmi\n");
        for (m, v) in self.per_segment.iter().enumerate() {
            out.push_str(&format!("{},{v:.6}\n", m + 1));
        }
        out.push_str(&format!("overall,{:.6}\n", self.overall));
        out
    }
}

/// Per-segment NMI and their mean. Change points must agree.
pub fn overall_nmi(est: &Segmentation, truth: &GroundTruth) -> Result<NmiReport> {
    if est.change_points() != truth.change_points.as_slice() {
        return Err(Error::SegmentMismatch {
            estimated: est.change_points().to_vec(),
            truth: truth.change_points.clone(),
        });
    }
    let scores = est
        .assignments()
        .iter()
        .zip(&truth.assignments)
        .map(|(e, t)| nmi_with_coverage(e, t))
        .collect::<Result<Vec<_>>>()?;
    Ok(NmiReport::from_scores(&scores))
}

/// How often each `t` in `1..=horizon` was reported as a change point.
pub fn changepoint_frequency<'a, I>(results: I, horizon: usize) -> BTreeMap<usize, usize>
where
    I: IntoIterator<Item = &'a [usize]>,
{
    let mut table: BTreeMap<usize, usize> = (1..=horizon).map(|t| (t, 0)).collect();
    for points in results {
        for &t in points {
            *table.entry(t).or_default() += 1;
        }
    }
    table
}

pub fn frequency_csv(table: &BTreeMap<usize, usize>) -> String {
    let mut out = String::from("t,count\n");
    for (t, c) in table {
        out.push_str(&format!("{t},{c}\n"));
    }
    out
}
