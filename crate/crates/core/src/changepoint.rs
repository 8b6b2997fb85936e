//! Candidate-screened greedy change-point search followed by a reverse-order
//! merge pass.

use std::collections::HashMap;
use std::sync::Mutex;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::community::{fit_segment, NeighborIndex, SearchConfig, MIN_IMPROVEMENT};
use crate::error::{Error, Result};
use crate::graph::{GraphSequence, SegmentView};
use crate::mdl::{change_point_code_length, full_mdl, segment_views, Segmentation};
use crate::sbm::CommunityAssignment;
use crate::seed::derive_seed;

/// `d_t` for `t = 2..=T`: the 1-norm of the difference of consecutive
/// adjacency matrices over the geometric mean of their 1-norms. Every
/// undirected edge counts twice in each norm.
pub fn consecutive_distances(seq: &GraphSequence) -> Result<Vec<f64>> {
    (2..=seq.len())
        .map(|t| {
            let (prev, cur) = (seq.snapshot(t - 1), seq.snapshot(t));
            if prev.num_edges() == 0 {
                return Err(Error::DegenerateSnapshot(t - 1));
            }
            if cur.num_edges() == 0 {
                return Err(Error::DegenerateSnapshot(t));
            }
            Ok(distance(prev.symmetric_difference(cur), prev.num_edges(), cur.num_edges()))
        })
        .collect()
}

fn distance(sym_diff: usize, prev_edges: usize, cur_edges: usize) -> f64 {
    let num = 2.0 * sym_diff as f64;
    let den = ((2 * prev_edges) as f64 * (2 * cur_edges) as f64).sqrt();
    num / den
}

/// Like [`consecutive_distances`], but a boundary touching an empty snapshot
/// scores `+inf` and is reported as a warning instead of failing.
pub fn screening_distances(seq: &GraphSequence) -> (Vec<f64>, Vec<String>) {
    let mut warnings = Vec::new();
    let d = (2..=seq.len())
        .map(|t| {
            let (prev, cur) = (seq.snapshot(t - 1), seq.snapshot(t));
            if prev.num_edges() == 0 || cur.num_edges() == 0 {
                warnings.push(format!(
                    "d_{t} undefined: snapshot {} has no edges; treated as +inf",
                    if prev.num_edges() == 0 { t - 1 } else { t }
                ));
                f64::INFINITY
            } else {
                distance(prev.symmetric_difference(cur), prev.num_edges(), cur.num_edges())
            }
        })
        .collect();
    (d, warnings)
}

/// Screened change-point candidates, strongest first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateSet {
    pub entries: Vec<(usize, f64)>,
}

impl CandidateSet {
    pub fn times(&self) -> Vec<usize> {
        self.entries.iter().map(|e| e.0).collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else if v[n / 2 - 1] == v[n / 2] {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

/// Keeps `t` with `d_t >= median`, ordered by `d_t` descending, ties by `t`.
/// `distances[0]` is `d_2`.
pub fn screen(distances: &[f64]) -> CandidateSet {
    if distances.is_empty() {
        return CandidateSet { entries: vec![] };
    }
    let med = median(distances);
    let mut entries: Vec<(usize, f64)> = distances
        .iter()
        .enumerate()
        .filter(|(_, &d)| d >= med)
        .map(|(i, &d)| (i + 2, d))
        .collect();
    entries.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    CandidateSet { entries }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    /// Tentatively add a change point.
    Add,
    /// Adopt every remaining candidate after no single addition helped.
    Fallback,
    /// Tentatively remove a change point by fusing its two segments.
    Merge,
    /// Fallback result did not beat the unsegmented fit and was discarded.
    Revert,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub action: Action,
    pub t: usize,
    pub mdl_before: f64,
    pub mdl_after: f64,
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionResult {
    pub change_points: Vec<usize>,
    pub segmentation: Segmentation,
    /// Full criterion recomputed on `segmentation`.
    pub mdl_value: f64,
    pub trace: Vec<TraceEntry>,
    pub warnings: Vec<String>,
    /// Number of distinct segment fits performed.
    pub evaluations: usize,
}

/// Memoized per-window community fits; fit seeds depend only on the window.
struct SegmentCache<'a> {
    seq: &'a GraphSequence,
    index: NeighborIndex,
    seed: u64,
    cfg: SearchConfig,
    fits: Mutex<HashMap<SegmentView, (CommunityAssignment, f64)>>,
}

impl<'a> SegmentCache<'a> {
    fn new(seq: &'a GraphSequence, seed: u64, cfg: SearchConfig) -> Self {
        SegmentCache {
            seq,
            index: NeighborIndex::new(seq),
            seed,
            cfg,
            fits: Mutex::new(HashMap::new()),
        }
    }

    fn compute(&self, seg: SegmentView) -> Result<(CommunityAssignment, f64)> {
        let seed = derive_seed(self.seed, &[seg.start as u64, seg.end_exclusive as u64]);
        fit_segment(self.seq, &self.index, seg, seed, &self.cfg)
    }

    fn ensure(&self, segs: &[SegmentView]) -> Result<()> {
        let missing: Vec<SegmentView> = {
            let fits = self.fits.lock().expect("segment cache poisoned");
            let mut m: Vec<SegmentView> = segs.iter().filter(|s| !fits.contains_key(s)).copied().collect();
            m.sort();
            m.dedup();
            m
        };
        let computed: Vec<(SegmentView, (CommunityAssignment, f64))> = if self.cfg.parallel {
            missing
                .par_iter()
                .map(|&s| self.compute(s).map(|r| (s, r)))
                .collect::<Result<_>>()?
        } else {
            missing
                .iter()
                .map(|&s| self.compute(s).map(|r| (s, r)))
                .collect::<Result<_>>()?
        };
        self.fits.lock().expect("segment cache poisoned").extend(computed);
        Ok(())
    }

    fn bits(&self, seg: SegmentView) -> Result<f64> {
        self.ensure(&[seg])?;
        Ok(self.fits.lock().expect("segment cache poisoned")[&seg].1)
    }

    fn assignment(&self, seg: SegmentView) -> Result<CommunityAssignment> {
        self.ensure(&[seg])?;
        Ok(self.fits.lock().expect("segment cache poisoned")[&seg].0.clone())
    }

    fn len(&self) -> usize {
        self.fits.lock().expect("segment cache poisoned").len()
    }

    /// Criterion for a set of change points, using fitted segments.
    fn total(&self, change_points: &[usize]) -> Result<f64> {
        let horizon = self.seq.len();
        let views = segment_views(horizon, change_points);
        self.ensure(&views)?;
        let mut bits = change_point_code_length(horizon, change_points, self.cfg.mdl.change_point_code);
        for v in views {
            bits += self.bits(v)?;
        }
        Ok(bits)
    }
}

fn sorted_with(points: &[usize], extra: usize) -> Vec<usize> {
    let mut v = points.to_vec();
    v.push(extra);
    v.sort_unstable();
    v
}

fn sorted_without(points: &[usize], removed: usize) -> Vec<usize> {
    let mut v: Vec<usize> = points.iter().copied().filter(|&t| t != removed).collect();
    v.sort_unstable();
    v
}

/// Joint change-point and community detection.
pub fn detect(seq: &GraphSequence, seed: u64, cfg: &SearchConfig) -> Result<DetectionResult> {
    if seq.is_empty() {
        return Err(Error::EmptySequence);
    }
    let cache = SegmentCache::new(seq, seed, *cfg);
    let (distances, warnings) = screening_distances(seq);
    let mut candidates = screen(&distances).times();
    let mut trace = Vec::new();

    // Greedy additions, restarting from the head after every acceptance.
    let mut accepted: Vec<usize> = Vec::new();
    let baseline = cache.total(&[])?;
    let mut mdl_old = baseline;
    'restart: loop {
        let trial_sets: Vec<Vec<usize>> = candidates.iter().map(|&t| sorted_with(&accepted, t)).collect();
        let needed: Vec<SegmentView> = trial_sets
            .iter()
            .flat_map(|s| segment_views(seq.len(), s))
            .collect();
        cache.ensure(&needed)?;
        for (pos, set) in trial_sets.iter().enumerate() {
            let t = candidates[pos];
            let mdl_new = cache.total(set)?;
            let ok = mdl_new < mdl_old - MIN_IMPROVEMENT;
            trace.push(TraceEntry {
                action: Action::Add,
                t,
                mdl_before: mdl_old,
                mdl_after: mdl_new,
                accepted: ok,
            });
            if ok {
                accepted.push(t);
                candidates.remove(pos);
                mdl_old = mdl_new;
                continue 'restart;
            }
        }
        break;
    }

    // Merge order: last accepted first, or the candidates weakest first.
    let mut order: Vec<usize> = if accepted.is_empty() {
        let fallback: Vec<usize> = candidates.iter().rev().copied().collect();
        if !fallback.is_empty() {
            let mut all = fallback.clone();
            all.sort_unstable();
            let bits = cache.total(&all)?;
            trace.push(TraceEntry {
                action: Action::Fallback,
                t: 0,
                mdl_before: mdl_old,
                mdl_after: bits,
                accepted: true,
            });
            mdl_old = bits;
        }
        fallback
    } else {
        accepted.iter().rev().copied().collect()
    };
    let fell_back = accepted.is_empty() && !order.is_empty();

    'merge: loop {
        let current = {
            let mut c = order.clone();
            c.sort_unstable();
            c
        };
        let trial_sets: Vec<Vec<usize>> = order.iter().map(|&t| sorted_without(&current, t)).collect();
        let needed: Vec<SegmentView> = trial_sets
            .iter()
            .flat_map(|s| segment_views(seq.len(), s))
            .collect();
        cache.ensure(&needed)?;
        for (pos, set) in trial_sets.iter().enumerate() {
            let t = order[pos];
            let mdl_new = cache.total(set)?;
            let ok = mdl_new < mdl_old - MIN_IMPROVEMENT;
            trace.push(TraceEntry {
                action: Action::Merge,
                t,
                mdl_before: mdl_old,
                mdl_after: mdl_new,
                accepted: ok,
            });
            if ok {
                order.remove(pos);
                mdl_old = mdl_new;
                continue 'merge;
            }
        }
        break;
    }

    let mut change_points = order;
    change_points.sort_unstable();
    if fell_back && mdl_old >= baseline {
        trace.push(TraceEntry {
            action: Action::Revert,
            t: 0,
            mdl_before: mdl_old,
            mdl_after: baseline,
            accepted: true,
        });
        change_points.clear();
    }

    let assignments = segment_views(seq.len(), &change_points)
        .into_iter()
        .map(|v| cache.assignment(v))
        .collect::<Result<Vec<_>>>()?;
    let segmentation = Segmentation::fit(seq, change_points.clone(), assignments, &cfg.mdl)?;
    let mdl_value = full_mdl(seq, &segmentation, &cfg.mdl)?;
    Ok(DetectionResult {
        change_points,
        segmentation,
        mdl_value,
        trace,
        warnings,
        evaluations: cache.len(),
    })
}

/// Community fits for known change points (no change-point search).
pub fn fit_known(
    seq: &GraphSequence,
    change_points: &[usize],
    seed: u64,
    cfg: &SearchConfig,
) -> Result<Segmentation> {
    crate::mdl::validate_change_points(seq.len(), change_points)?;
    let cache = SegmentCache::new(seq, seed, *cfg);
    let views = segment_views(seq.len(), change_points);
    cache.ensure(&views)?;
    let assignments = views
        .into_iter()
        .map(|v| cache.assignment(v))
        .collect::<Result<Vec<_>>>()?;
    Segmentation::fit(seq, change_points.to_vec(), assignments, &cfg.mdl)
}
