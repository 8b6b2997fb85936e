//! Synthetic block-model sequences with planted change points, including the
//! six built-in benchmark settings.

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{GraphSequence, SegmentView};
use crate::sbm::CommunityAssignment;
use crate::seed::{derive_seed, rng_from};

/// How within- and between-community link probabilities are drawn per snapshot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinkLaw {
    Fixed { within: f64, between: f64 },
    Uniform { within: (f64, f64), between: (f64, f64) },
}

impl LinkLaw {
    fn draw<R: Rng>(&self, rng: &mut R) -> (f64, f64) {
        match *self {
            LinkLaw::Fixed { within, between } => (within, between),
            LinkLaw::Uniform { within, between } => (
                uniform(rng, within.0, within.1),
                uniform(rng, between.0, between.1),
            ),
        }
    }

    fn bounds(&self) -> [f64; 4] {
        match *self {
            LinkLaw::Fixed { within, between } => [within, within, between, between],
            LinkLaw::Uniform { within, between } => [within.0, within.1, between.0, between.1],
        }
    }
}

fn uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    if hi > lo {
        rng.gen_range(lo..hi)
    } else {
        lo
    }
}

/// One planted segment, snapshots `first..=last`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentSpec {
    pub first: usize,
    pub last: usize,
    pub ratios: Vec<f64>,
    pub link_law: LinkLaw,
    /// Inclusive range of per-snapshot node counts.
    pub node_range: (usize, usize),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrelationModel {
    /// Pairs drawn independently at every snapshot; `rho` is ignored.
    #[default]
    Independent,
    /// Each pair follows a two-state Markov chain over time with the
    /// snapshot's marginal and lag-1 correlation `rho`.
    MarkovChain,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SettingSpec {
    pub segments: Vec<SegmentSpec>,
    #[serde(default)]
    pub rho: f64,
    #[serde(default)]
    pub correlation_model: CorrelationModel,
    #[serde(default)]
    pub seed: u64,
}

impl SettingSpec {
    pub fn horizon(&self) -> usize {
        self.segments.last().map_or(0, |s| s.last)
    }

    pub fn change_points(&self) -> Vec<usize> {
        self.segments.iter().skip(1).map(|s| s.first).collect()
    }

    /// Size of the node universe: the largest per-snapshot node count.
    pub fn universe_size(&self) -> usize {
        self.segments.iter().map(|s| s.node_range.1).max().unwrap_or(0)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Replaces every segment's node range, e.g. for desk-scale runs.
    pub fn with_node_range(mut self, lo: usize, hi: usize) -> Self {
        for s in &mut self.segments {
            s.node_range = (lo, hi);
        }
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidSpec(msg));
        if self.segments.is_empty() {
            return bad("no segments".into());
        }
        if !(0.0..1.0).contains(&self.rho) {
            return bad(format!("rho {} outside [0, 1)", self.rho));
        }
        let mut expected_first = 1;
        for (m, s) in self.segments.iter().enumerate() {
            if s.first != expected_first || s.last < s.first {
                return bad(format!(
                    "segment {} spans {}-{}, expected to start at {expected_first}",
                    m + 1,
                    s.first,
                    s.last
                ));
            }
            expected_first = s.last + 1;
            if s.ratios.is_empty() || s.ratios.iter().any(|&r| r <= 0.0) {
                return bad(format!("segment {} ratios must be positive", m + 1));
            }
            if (s.ratios.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
                return bad(format!("segment {} ratios do not sum to 1", m + 1));
            }
            let b = s.link_law.bounds();
            if b.iter().any(|p| !(0.0..=1.0).contains(p)) || b[0] > b[1] || b[2] > b[3] {
                return bad(format!("segment {} link law out of range", m + 1));
            }
            if s.node_range.0 > s.node_range.1 || s.node_range.0 < 2 {
                return bad(format!("segment {} node range is ill-formed", m + 1));
            }
        }
        Ok(())
    }
}

fn fixed(within: f64, between: f64) -> LinkLaw {
    LinkLaw::Fixed { within, between }
}

fn unif(w: (f64, f64), b: (f64, f64)) -> LinkLaw {
    LinkLaw::Uniform {
        within: w,
        between: b,
    }
}

fn seg(first: usize, last: usize, ratios: &[f64], link_law: LinkLaw, nodes: (usize, usize)) -> SegmentSpec {
    SegmentSpec {
        first,
        last,
        ratios: ratios.to_vec(),
        link_law,
        node_range: nodes,
    }
}

const THIRD: f64 = 1.0 / 3.0;

/// The six benchmark scenarios, `T = 30` each.
pub fn builtin_setting(k: usize) -> Result<SettingSpec> {
    let small = (280, 300);
    let large = (380, 400);
    let (segments, rho, model) = match k {
        1 => (
            vec![
                seg(1, 5, &[THIRD, THIRD, THIRD], fixed(0.90, 0.10), small),
                seg(6, 13, &[1.0], fixed(0.70, 0.20), small),
                seg(14, 16, &[0.25, 0.25, 0.25, 0.25], fixed(0.85, 0.15), small),
                seg(17, 22, &[2.0 * THIRD, THIRD], fixed(0.84, 0.20), small),
                seg(23, 28, &[0.2, 0.2, 0.1, 0.3, 0.2], fixed(0.80, 0.15), small),
                seg(29, 30, &[0.3, 0.4, 0.3], fixed(0.90, 0.10), small),
            ],
            0.0,
            CorrelationModel::Independent,
        ),
        2 => {
            let law = unif((0.70, 0.95), (0.05, 0.30));
            (
                vec![
                    seg(1, 12, &[THIRD, THIRD, THIRD], law, small),
                    seg(13, 21, &[THIRD, 2.0 * THIRD], law, small),
                    seg(22, 22, &[0.75, 0.25], law, small),
                    seg(23, 27, &[0.3, 0.4, 0.3], law, small),
                    seg(28, 30, &[0.2, 0.3, 0.2, 0.3], law, small),
                ],
                0.0,
                CorrelationModel::Independent,
            )
        }
        3 => {
            let law = unif((0.35, 0.40), (0.05, 0.10));
            (
                vec![
                    seg(1, 8, &[THIRD, THIRD, THIRD], law, large),
                    seg(9, 11, &[0.25, 0.75], law, large),
                    seg(12, 16, &[0.5, 0.5], law, large),
                    seg(17, 21, &[0.75, 0.25], law, large),
                    seg(22, 30, &[0.3, 0.4, 0.3], law, large),
                ],
                0.0,
                CorrelationModel::Independent,
            )
        }
        4 => (
            vec![
                seg(1, 5, &[THIRD, THIRD, THIRD], fixed(0.7, 0.6), large),
                seg(6, 9, &[0.75, 0.25], fixed(0.2, 0.1), large),
                seg(10, 16, &[0.25, 0.25, 0.25, 0.25], fixed(0.5, 0.3), large),
                seg(17, 22, &[0.5, 0.5], fixed(0.2, 0.1), large),
                seg(23, 25, &[0.2, 0.2, 0.2, 0.2, 0.2], fixed(0.4, 0.15), large),
                seg(26, 30, &[0.5, 0.5], fixed(0.7, 0.55), large),
            ],
            0.0,
            CorrelationModel::Independent,
        ),
        // Segment 4 is listed as 19-24 and segment 5 as 24-30; t=24 is given
        // to segment 5.
        5 => (
            vec![
                seg(1, 6, &[0.25, 0.25, 0.25, 0.25], unif((0.2, 0.3), (0.05, 0.1)), large),
                seg(7, 12, &[0.5, 0.5], unif((0.45, 0.55), (0.25, 0.35)), large),
                seg(13, 18, &[0.5, 0.25, 0.25], unif((0.15, 0.25), (0.05, 0.10)), large),
                seg(19, 23, &[THIRD, 2.0 * THIRD], unif((0.4, 0.5), (0.2, 0.3)), large),
                seg(24, 30, &[0.25, 0.25, 0.25, 0.25], unif((0.15, 0.25), (0.05, 0.10)), large),
            ],
            0.0,
            CorrelationModel::Independent,
        ),
        // Same overlap at t=24 as setting 5; link probabilities are fixed
        // dense values.
        6 => {
            let law = fixed(0.8, 0.2);
            (
                vec![
                    seg(1, 5, &[0.5, 0.5], law, large),
                    seg(6, 11, &[THIRD, THIRD, THIRD], law, large),
                    seg(12, 19, &[0.75, 0.25], law, large),
                    seg(20, 23, &[0.5, 0.5], law, large),
                    seg(24, 25, &[0.75, 0.25], law, large),
                    seg(26, 30, &[0.4, 0.2, 0.4], law, large),
                ],
                0.7,
                CorrelationModel::MarkovChain,
            )
        }
        other => return Err(Error::UnknownSetting(other)),
    };
    Ok(SettingSpec {
        segments,
        rho,
        correlation_model: model,
        seed: 0,
    })
}

/// Splits `n` items by `ratios` with the largest-remainder method; ties go
/// to the lower index.
pub fn largest_remainder(ratios: &[f64], n: usize) -> Vec<usize> {
    let total: f64 = ratios.iter().sum();
    let quotas: Vec<f64> = ratios.iter().map(|r| r / total * n as f64).collect();
    let mut sizes: Vec<usize> = quotas.iter().map(|q| (q + 1e-9).floor() as usize).collect();
    let assigned: usize = sizes.iter().sum();
    let mut order: Vec<usize> = (0..ratios.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = quotas[a] - sizes[a] as f64;
        let rb = quotas[b] - sizes[b] as f64;
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &k in order.iter().take(n.saturating_sub(assigned)) {
        sizes[k] += 1;
    }
    sizes
}

/// Stationary two-state chain with `P(1) = p` and lag-1 correlation `rho`.
pub fn correlated_pair_sequence(p: f64, rho: f64, len: usize, seed: u64) -> Vec<bool> {
    let mut rng = rng_from(seed);
    let mut out = Vec::with_capacity(len);
    let mut state = false;
    for step in 0..len {
        state = if step == 0 {
            rng.gen::<f64>() < p
        } else {
            markov_step(state, p, rho, &mut rng)
        };
        out.push(state);
    }
    out
}

#[inline]
fn markov_step<R: Rng>(prev: bool, p: f64, rho: f64, rng: &mut R) -> bool {
    let stay = if prev { p + rho * (1.0 - p) } else { p * (1.0 - rho) };
    rng.gen::<f64>() < stay
}

/// Planted structure of a generated sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub change_points: Vec<usize>,
    /// One assignment per segment over that segment's active nodes.
    pub assignments: Vec<CommunityAssignment>,
}

fn pair_index(i: usize, j: usize, n: usize) -> usize {
    // i < j
    i * n - i * (i + 1) / 2 + (j - i - 1)
}

/// Samples a sequence and its ground truth from `spec`.
pub fn generate(spec: &SettingSpec) -> Result<(GraphSequence, GroundTruth)> {
    spec.validate()?;
    let universe = spec.universe_size();
    let horizon = spec.horizon();
    let width = universe.saturating_sub(1).to_string().len().max(3);
    let labels: Vec<String> = (0..universe).map(|i| format!("v{i:0width$}")).collect();

    // Planted membership per segment over the whole universe.
    let planted: Vec<Vec<usize>> = spec
        .segments
        .iter()
        .enumerate()
        .map(|(m, s)| {
            let mut rng = rng_from(derive_seed(spec.seed, &[0, m as u64]));
            let mut perm: Vec<usize> = (0..universe).collect();
            perm.shuffle(&mut rng);
            let mut member = vec![0; universe];
            let mut cursor = 0;
            for (k, size) in largest_remainder(&s.ratios, universe).into_iter().enumerate() {
                for &v in &perm[cursor..cursor + size] {
                    member[v] = k;
                }
                cursor += size;
            }
            member
        })
        .collect();
    let segment_of: Vec<usize> = (1..=horizon)
        .map(|t| spec.segments.iter().position(|s| s.first <= t && t <= s.last).unwrap())
        .collect();

    // Per-snapshot draws: active subset and link probabilities.
    struct Draw {
        active: Vec<bool>,
        within: f64,
        between: f64,
        seed: u64,
    }
    let draws: Vec<Draw> = (1..=horizon)
        .map(|t| {
            let s = &spec.segments[segment_of[t - 1]];
            let mut rng = rng_from(derive_seed(spec.seed, &[1, t as u64]));
            let count = rng.gen_range(s.node_range.0..=s.node_range.1).min(universe);
            let mut perm: Vec<usize> = (0..universe).collect();
            perm.shuffle(&mut rng);
            let mut active = vec![false; universe];
            perm[..count].iter().for_each(|&v| active[v] = true);
            let (within, between) = s.link_law.draw(&mut rng);
            Draw {
                active,
                within,
                between,
                seed: derive_seed(spec.seed, &[2, t as u64]),
            }
        })
        .collect();

    let prob = |t: usize, i: usize, j: usize| {
        let member = &planted[segment_of[t - 1]];
        let d = &draws[t - 1];
        if member[i] == member[j] {
            d.within
        } else {
            d.between
        }
    };

    let correlated = spec.correlation_model == CorrelationModel::MarkovChain && spec.rho > 0.0;
    let snapshots: Vec<Vec<(usize, usize)>> = if correlated {
        let mut state = vec![false; universe * universe.saturating_sub(1) / 2];
        (1..=horizon)
            .map(|t| {
                let d = &draws[t - 1];
                let mut rng = rng_from(d.seed);
                let mut edges = Vec::new();
                for i in 0..universe {
                    for j in i + 1..universe {
                        let p = prob(t, i, j);
                        let idx = pair_index(i, j, universe);
                        state[idx] = if t == 1 {
                            rng.gen::<f64>() < p
                        } else {
                            markov_step(state[idx], p, spec.rho, &mut rng)
                        };
                        if state[idx] && d.active[i] && d.active[j] {
                            edges.push((i, j));
                        }
                    }
                }
                edges
            })
            .collect()
    } else {
        (1..=horizon)
            .into_par_iter()
            .map(|t| {
                let d = &draws[t - 1];
                let mut rng = rng_from(d.seed);
                let mut edges = Vec::new();
                for i in (0..universe).filter(|&i| d.active[i]) {
                    for j in (i + 1..universe).filter(|&j| d.active[j]) {
                        if rng.gen::<f64>() < prob(t, i, j) {
                            edges.push((i, j));
                        }
                    }
                }
                edges
            })
            .collect()
    };

    let seq = GraphSequence::from_indexed(labels, snapshots)?;
    let assignments = spec
        .segments
        .iter()
        .enumerate()
        .map(|(m, s)| {
            let active = seq.active_nodes(SegmentView::new(s.first, s.last + 1))?;
            let raw: Vec<usize> = active.iter().map(|&v| planted[m][v]).collect();
            Ok(CommunityAssignment::from_raw(&active, &raw))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((
        seq,
        GroundTruth {
            change_points: spec.change_points(),
            assignments,
        },
    ))
}
