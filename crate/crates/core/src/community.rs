//! Community search for one segment: recursive bisection with node-switch
//! refinement, then merging of neighbouring communities, repeated until the
//! segment's code length stops dropping.
//!
//! Scores are always the full segment criterion (`mdl::segment_mdl`), kept
//! up to date incrementally: per snapshot the model stores block edge counts
//! and per-community counted sizes, so a single node switch is priced in
//! `O(T_seg * (deg + c))` without touching the rest of the segment.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{GraphSequence, SegmentView};
use crate::mdl::{community_code_length, MdlConfig, PairCounting};
use crate::sbm::CommunityAssignment;
use crate::seed::rng_from;

/// Improvements smaller than this are treated as ties and rejected.
pub(crate) const MIN_IMPROVEMENT: f64 = 1e-7;

const MAX_SWEEPS: usize = 500;

/// Starting bisections tried per split attempt.
const BISECT_STARTS: usize = 4;

/// Largest subset refined with Kernighan-Lin passes.
const KL_LIMIT: usize = 32;

/// How a community is split in two before refinement.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Initializer {
    /// Each member lands on either side with probability 1/2.
    #[default]
    Random,
    /// Sign of the second eigenvector of the aggregate adjacency.
    Spectral,
}

/// Knobs shared by community and change-point search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub mdl: MdlConfig,
    pub init: Initializer,
    /// Upper bound on split/merge cycles per segment.
    pub max_cycles: usize,
    /// Evaluate independent segment fits on the rayon pool.
    pub parallel: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            mdl: MdlConfig::default(),
            init: Initializer::Random,
            max_cycles: 10,
            parallel: true,
        }
    }
}

/// Per-snapshot adjacency in CSR form over global node indices.
#[derive(Debug, Clone)]
pub struct NeighborIndex {
    offsets: Vec<Vec<u32>>,
    targets: Vec<Vec<u32>>,
}

impl NeighborIndex {
    pub fn new(seq: &GraphSequence) -> Self {
        let n = seq.num_nodes();
        let mut offsets = Vec::with_capacity(seq.len());
        let mut targets = Vec::with_capacity(seq.len());
        for snap in seq.snapshots() {
            let mut degree = vec![0u32; n + 1];
            for &(a, b) in snap.edges() {
                degree[a + 1] += 1;
                degree[b + 1] += 1;
            }
            for i in 0..n {
                degree[i + 1] += degree[i];
            }
            let mut fill = degree.clone();
            let mut tgt = vec![0u32; 2 * snap.num_edges()];
            for &(a, b) in snap.edges() {
                tgt[fill[a] as usize] = b as u32;
                fill[a] += 1;
                tgt[fill[b] as usize] = a as u32;
                fill[b] += 1;
            }
            offsets.push(degree);
            targets.push(tgt);
        }
        NeighborIndex { offsets, targets }
    }

    /// Neighbours of `node` at 1-based time `t`.
    pub fn neighbors(&self, t: usize, node: usize) -> &[u32] {
        let off = &self.offsets[t - 1];
        &self.targets[t - 1][off[node] as usize..off[node + 1] as usize]
    }

    pub fn degree(&self, t: usize, node: usize) -> usize {
        self.neighbors(t, node).len()
    }
}

/// Mutable state of one segment's community search.
pub(crate) struct SegmentModel {
    #[cfg_attr(not(test), allow(dead_code))]
    counting: PairCounting,
    /// Local index to global node index.
    nodes: Vec<usize>,
    /// Per snapshot: CSR adjacency over local indices.
    adj_off: Vec<Vec<u32>>,
    adj: Vec<Vec<u32>>,
    counted: Vec<Vec<bool>>,
    /// Union of neighbours across the segment.
    agg: Vec<Vec<u32>>,
    label: Vec<usize>,
    cap: usize,
    size: Vec<usize>,
    occupied: usize,
    /// Per snapshot: counted members per slot.
    tsize: Vec<Vec<u64>>,
    /// Per snapshot: symmetric `cap x cap` edge counts between slots.
    edges: Vec<Vec<u64>>,
    total: f64,
    /// Per snapshot, neighbour counts by slot for node `loaded`.
    scratch: Vec<u64>,
    loaded: Option<usize>,
    code: CodeTable,
}

/// Block code lengths from tabulated `x·log₂x` and `½log₂x` over every
/// possible pair count of one segment.
#[derive(Clone)]
struct CodeTable {
    xlog: Vec<f64>,
    half_log: Vec<f64>,
}

impl CodeTable {
    fn new(num_nodes: usize) -> Self {
        let len = within_pairs(num_nodes as u64) as usize + 2;
        let xlog = (0..len)
            .map(|x| if x == 0 { 0.0 } else { x as f64 * (x as f64).log2() })
            .collect();
        let half_log = (0..len)
            .map(|x| if x == 0 { 0.0 } else { 0.5 * (x as f64).log2() })
            .collect();
        CodeTable { xlog, half_log }
    }

    /// Same value as [`crate::sbm::block_code_length`].
    #[inline]
    fn bits(&self, e: u64, n: u64) -> f64 {
        if n == 0 {
            return 0.0;
        }
        let (e, n) = (e as usize, n as usize);
        self.half_log[n] + self.xlog[n] - self.xlog[e] - self.xlog[n - e]
    }
}

#[inline]
fn within_pairs(n: u64) -> u64 {
    n * n.saturating_sub(1) / 2
}

impl SegmentModel {
    pub(crate) fn new(
        seq: &GraphSequence,
        index: &NeighborIndex,
        seg: SegmentView,
        counting: PairCounting,
        initial: Option<&CommunityAssignment>,
    ) -> Result<Self> {
        let nodes = seq.active_nodes(seg)?;
        let mut local = vec![u32::MAX; seq.num_nodes()];
        for (li, &g) in nodes.iter().enumerate() {
            local[g] = li as u32;
        }

        let n = nodes.len();
        let mut adj_off = Vec::with_capacity(seg.len());
        let mut adj = Vec::with_capacity(seg.len());
        let mut counted = Vec::with_capacity(seg.len());
        let mut agg: Vec<Vec<u32>> = vec![Vec::new(); n];
        for t in seg.times() {
            let mut off = Vec::with_capacity(n + 1);
            let mut tgt = Vec::new();
            let mut cnt = Vec::with_capacity(n);
            off.push(0u32);
            for (li, &g) in nodes.iter().enumerate() {
                let nb = index.neighbors(t, g);
                tgt.extend(nb.iter().map(|&j| local[j as usize]));
                agg[li].extend(nb.iter().map(|&j| local[j as usize]));
                off.push(tgt.len() as u32);
                cnt.push(match counting {
                    PairCounting::ActiveAtTime => !nb.is_empty(),
                    PairCounting::SegmentActive => true,
                });
            }
            adj_off.push(off);
            adj.push(tgt);
            counted.push(cnt);
        }
        for list in &mut agg {
            list.sort_unstable();
            list.dedup();
        }

        let mut label = vec![0usize; n];
        let mut cap = 2;
        if let Some(assign) = initial {
            if assign.nodes() != nodes.as_slice() {
                return Err(Error::InvalidAssignment(
                    "assignment does not cover exactly the segment's active nodes".into(),
                ));
            }
            label = assign.labels().iter().map(|&id| id - 1).collect();
            cap = cap.max(assign.num_communities() + 1);
        }

        let mut model = SegmentModel {
            counting,
            nodes,
            adj_off,
            adj,
            counted,
            agg,
            label,
            cap,
            size: Vec::new(),
            occupied: 0,
            tsize: Vec::new(),
            edges: Vec::new(),
            total: 0.0,
            scratch: Vec::new(),
            loaded: None,
            code: CodeTable::new(n),
        };
        model.rebuild_stats();
        Ok(model)
    }

    fn num_times(&self) -> usize {
        self.adj.len()
    }

    fn neighbors(&self, s: usize, i: usize) -> &[u32] {
        let off = &self.adj_off[s];
        &self.adj[s][off[i] as usize..off[i + 1] as usize]
    }

    fn rebuild_stats(&mut self) {
        let cap = self.cap;
        let times = self.num_times();
        self.size = vec![0; cap];
        for &k in &self.label {
            self.size[k] += 1;
        }
        self.occupied = self.size.iter().filter(|&&s| s > 0).count();
        self.tsize = vec![vec![0; cap]; times];
        self.edges = vec![vec![0; cap * cap]; times];
        for s in 0..times {
            for i in 0..self.nodes.len() {
                if self.counted[s][i] {
                    self.tsize[s][self.label[i]] += 1;
                }
                let ki = self.label[i];
                let off = &self.adj_off[s];
                for &j in &self.adj[s][off[i] as usize..off[i + 1] as usize] {
                    let j = j as usize;
                    if j > i {
                        let kj = self.label[j];
                        self.edges[s][ki * cap + kj] += 1;
                        if ki != kj {
                            self.edges[s][kj * cap + ki] += 1;
                        }
                    }
                }
            }
        }
        self.loaded = None;
        self.total = self.exact_total();
    }

    /// Recomputes the criterion from the stored block counts.
    pub(crate) fn exact_total(&self) -> f64 {
        let cap = self.cap;
        let mut bits = community_code_length(self.occupied.max(1), self.nodes.len());
        for s in 0..self.num_times() {
            let (ts, e) = (&self.tsize[s], &self.edges[s]);
            for k in 0..cap {
                if ts[k] == 0 {
                    continue;
                }
                bits += self.code.bits(e[k * cap + k], within_pairs(ts[k]));
                for l in k + 1..cap {
                    if ts[l] > 0 {
                        bits += self.code.bits(e[k * cap + l], ts[k] * ts[l]);
                    }
                }
            }
        }
        bits
    }

    pub(crate) fn total(&self) -> f64 {
        self.total
    }

    fn resync(&mut self) {
        self.total = self.exact_total();
    }

    fn grow(&mut self) {
        let old = self.cap;
        let cap = old * 2;
        for e in &mut self.edges {
            let mut wide = vec![0; cap * cap];
            for k in 0..old {
                wide[k * cap..k * cap + old].copy_from_slice(&e[k * old..(k + 1) * old]);
            }
            *e = wide;
        }
        for ts in &mut self.tsize {
            ts.resize(cap, 0);
        }
        self.size.resize(cap, 0);
        self.loaded = None;
        self.cap = cap;
    }

    fn fresh_slot(&mut self) -> usize {
        if let Some(k) = self.size.iter().position(|&s| s == 0) {
            return k;
        }
        let k = self.cap;
        self.grow();
        k
    }

    /// Caches node `i`'s per-snapshot neighbour counts by slot. Moving `i`
    /// itself leaves them valid; any other relabelling invalidates them.
    fn load(&mut self, i: usize) {
        if self.loaded == Some(i) {
            return;
        }
        let cap = self.cap;
        let mut x = std::mem::take(&mut self.scratch);
        x.clear();
        x.resize(self.num_times() * cap, 0);
        for s in 0..self.num_times() {
            if self.counted[s][i] {
                let row = &mut x[s * cap..(s + 1) * cap];
                for &j in self.neighbors(s, i) {
                    row[self.label[j as usize]] += 1;
                }
            }
        }
        self.scratch = x;
        self.loaded = Some(i);
    }

    /// Change in the criterion if node `i` moved to slot `b`.
    fn move_delta(&mut self, i: usize, b: usize) -> f64 {
        let a = self.label[i];
        debug_assert_ne!(a, b);
        self.load(i);
        let n = self.nodes.len();
        let c_old = self.occupied;
        let c_new = c_old - usize::from(self.size[a] == 1) + usize::from(self.size[b] == 0);
        let mut delta = community_code_length(c_new, n) - community_code_length(c_old, n);
        let cap = self.cap;
        for s in 0..self.num_times() {
            if self.counted[s][i] {
                delta += self.block_move_delta(s, a, b, &self.scratch[s * cap..(s + 1) * cap]);
            }
        }
        delta
    }

    fn block_move_delta(&self, s: usize, a: usize, b: usize, x: &[u64]) -> f64 {
        let cap = self.cap;
        let (ts, e) = (&self.tsize[s], &self.edges[s]);
        let (na, nb) = (ts[a], ts[b]);
        let mut before = 0.0;
        let mut after = 0.0;
        for k in 0..cap {
            if k == a || k == b || ts[k] == 0 {
                continue;
            }
            let nk = ts[k];
            let (eak, ebk) = (e[a * cap + k], e[b * cap + k]);
            before += self.code.bits(eak, na * nk) + self.code.bits(ebk, nb * nk);
            after += self.code.bits(eak - x[k], (na - 1) * nk)
                + self.code.bits(ebk + x[k], (nb + 1) * nk);
        }
        let (eaa, ebb, eab) = (e[a * cap + a], e[b * cap + b], e[a * cap + b]);
        before += self.code.bits(eaa, within_pairs(na))
            + self.code.bits(ebb, within_pairs(nb))
            + self.code.bits(eab, na * nb);
        after += self.code.bits(eaa - x[a], within_pairs(na - 1))
            + self.code.bits(ebb + x[b], within_pairs(nb + 1))
            + self.code.bits(eab + x[a] - x[b], (na - 1) * (nb + 1));
        after - before
    }

    fn add_block(&mut self, s: usize, k: usize, l: usize, amount: u64, subtract: bool) {
        let cap = self.cap;
        let e = &mut self.edges[s];
        let apply = |v: &mut u64| {
            if subtract {
                *v -= amount
            } else {
                *v += amount
            }
        };
        apply(&mut e[k * cap + l]);
        if k != l {
            apply(&mut e[l * cap + k]);
        }
    }

    fn apply_move(&mut self, i: usize, b: usize, delta: f64) {
        let a = self.label[i];
        self.load(i);
        let cap = self.cap;
        let x = std::mem::take(&mut self.scratch);
        for s in 0..self.num_times() {
            if !self.counted[s][i] {
                continue;
            }
            let row = &x[s * cap..(s + 1) * cap];
            for k in 0..cap {
                if row[k] > 0 {
                    self.add_block(s, a, k, row[k], true);
                    self.add_block(s, b, k, row[k], false);
                }
            }
            self.tsize[s][a] -= 1;
            self.tsize[s][b] += 1;
        }
        self.scratch = x;
        if self.size[a] == 1 {
            self.occupied -= 1;
        }
        if self.size[b] == 0 {
            self.occupied += 1;
        }
        self.size[a] -= 1;
        self.size[b] += 1;
        self.label[i] = b;
        self.total += delta;
    }

    /// Change in the criterion if slots `a` and `b` were fused.
    fn merge_delta(&self, a: usize, b: usize) -> f64 {
        let cap = self.cap;
        let n = self.nodes.len();
        let mut delta = community_code_length(self.occupied - 1, n)
            - community_code_length(self.occupied, n);
        for s in 0..self.num_times() {
            let (ts, e) = (&self.tsize[s], &self.edges[s]);
            let (na, nb) = (ts[a], ts[b]);
            if na == 0 || nb == 0 {
                continue;
            }
            let nm = na + nb;
            let mut before = self.code.bits(e[a * cap + a], within_pairs(na))
                + self.code.bits(e[b * cap + b], within_pairs(nb))
                + self.code.bits(e[a * cap + b], na * nb);
            let mut after = self.code.bits(
                e[a * cap + a] + e[b * cap + b] + e[a * cap + b],
                within_pairs(nm),
            );
            for k in 0..cap {
                if k == a || k == b || ts[k] == 0 {
                    continue;
                }
                let nk = ts[k];
                let (eak, ebk) = (e[a * cap + k], e[b * cap + k]);
                before += self.code.bits(eak, na * nk) + self.code.bits(ebk, nb * nk);
                after += self.code.bits(eak + ebk, nm * nk);
            }
            delta += after - before;
        }
        delta
    }

    /// Moves every member of `b` into `a`.
    fn apply_merge(&mut self, a: usize, b: usize, delta: f64) {
        self.loaded = None;
        let cap = self.cap;
        for s in 0..self.num_times() {
            let e = &mut self.edges[s];
            let (eaa, ebb, eab) = (e[a * cap + a], e[b * cap + b], e[a * cap + b]);
            for k in 0..cap {
                if k == a || k == b {
                    continue;
                }
                let ebk = e[b * cap + k];
                e[a * cap + k] += ebk;
                e[k * cap + a] += ebk;
            }
            e[a * cap + a] = eaa + ebb + eab;
            for k in 0..cap {
                e[b * cap + k] = 0;
                e[k * cap + b] = 0;
            }
            let tb = self.tsize[s][b];
            self.tsize[s][a] += tb;
            self.tsize[s][b] = 0;
        }
        for l in &mut self.label {
            if *l == b {
                *l = a;
            }
        }
        if self.size[a] > 0 && self.size[b] > 0 {
            self.occupied -= 1;
        }
        self.size[a] += self.size[b];
        self.size[b] = 0;
        self.total += delta;
    }

    fn members(&self, k: usize) -> Vec<usize> {
        (0..self.nodes.len()).filter(|&i| self.label[i] == k).collect()
    }

    fn occupied_slots(&self) -> Vec<usize> {
        (0..self.cap).filter(|&k| self.size[k] > 0).collect()
    }

    /// Tries to split slot `k` in two. Returns the new slot on success.
    ///
    /// Starting bisections are refined by node switching until one beats
    /// the unsplit state; a single start often stalls with one side holding
    /// a few stragglers.
    fn bisect(&mut self, k: usize, init: Initializer, rng: &mut ChaCha8Rng) -> Option<usize> {
        let members = self.members(k);
        if members.len() < 2 {
            return None;
        }
        let before = self.total;
        let start_labels = self.label.clone();
        let j = self.fresh_slot();

        let mut best: Option<(f64, Vec<usize>)> = None;
        for attempt in 0..BISECT_STARTS {
            if attempt > 0 {
                self.label.clone_from(&start_labels);
                self.rebuild_stats();
            }
            // The configured initializer goes first; one start of the other
            // kind follows, then random restarts.
            let init = match (attempt, init) {
                (0, i) => i,
                (1, Initializer::Random) => Initializer::Spectral,
                _ => Initializer::Random,
            };
            let to_other: Vec<bool> = match init {
                Initializer::Random => members.iter().map(|_| rng.gen_bool(0.5)).collect(),
                Initializer::Spectral => self.spectral_sides(&members, rng),
            };
            for (&i, &flip) in members.iter().zip(&to_other) {
                if flip {
                    let d = self.move_delta(i, j);
                    self.apply_move(i, j, d);
                }
            }
            self.switch_sweeps(&members, k, j, rng);
            if members.len() <= KL_LIMIT {
                for _ in 0..MAX_SWEEPS {
                    if !self.kl_pass(&members, k, j) {
                        break;
                    }
                    self.switch_sweeps(&members, k, j, rng);
                }
            }
            self.resync();
            let split = self.size[k] > 0 && self.size[j] > 0;
            if split && best.as_ref().map_or(true, |(b, _)| self.total < *b) {
                best = Some((self.total, self.label.clone()));
            }
            if self.total < before - MIN_IMPROVEMENT {
                break;
            }
        }

        match best {
            Some((total, labels)) if total < before - MIN_IMPROVEMENT => {
                if labels != self.label {
                    self.label = labels;
                    self.rebuild_stats();
                }
                Some(j)
            }
            _ => {
                self.label = start_labels;
                self.rebuild_stats();
                None
            }
        }
    }

    /// One Kernighan-Lin pass: move every member once across the cut, best
    /// move first even when it costs bits, then keep the best prefix.
    /// Returns whether the kept prefix lowered the criterion.
    fn kl_pass(&mut self, members: &[usize], k: usize, j: usize) -> bool {
        let mut locked = vec![false; members.len()];
        let mut moved = Vec::with_capacity(members.len());
        let (mut cum, mut best_cum, mut best_len) = (0.0, 0.0, 0);
        for _ in 0..members.len() {
            let mut pick: Option<(f64, usize)> = None;
            for (p, &i) in members.iter().enumerate() {
                if locked[p] || self.size[self.label[i]] == 1 {
                    continue;
                }
                let target = if self.label[i] == k { j } else { k };
                let d = self.move_delta(i, target);
                if pick.map_or(true, |(bd, _)| d < bd) {
                    pick = Some((d, p));
                }
            }
            let Some((d, p)) = pick else { break };
            let i = members[p];
            let target = if self.label[i] == k { j } else { k };
            self.apply_move(i, target, d);
            locked[p] = true;
            moved.push(i);
            cum += d;
            if cum < best_cum - MIN_IMPROVEMENT {
                best_cum = cum;
                best_len = moved.len();
            }
        }
        for &i in moved[best_len..].iter().rev() {
            let target = if self.label[i] == k { j } else { k };
            let d = self.move_delta(i, target);
            self.apply_move(i, target, d);
        }
        self.resync();
        best_len > 0
    }

    /// Moves members between slots `k` and `j` while that strictly helps.
    fn switch_sweeps(&mut self, members: &[usize], k: usize, j: usize, rng: &mut ChaCha8Rng) {
        let mut order = members.to_vec();
        for _ in 0..MAX_SWEEPS {
            order.shuffle(rng);
            let mut switched = false;
            for &i in &order {
                if self.size[self.label[i]] == 1 {
                    continue;
                }
                let target = if self.label[i] == k { j } else { k };
                let d = self.move_delta(i, target);
                if d < -MIN_IMPROVEMENT {
                    self.apply_move(i, target, d);
                    switched = true;
                }
            }
            if !switched {
                break;
            }
        }
    }

    fn spectral_sides(&self, members: &[usize], rng: &mut ChaCha8Rng) -> Vec<bool> {
        let n = members.len();
        let mut pos = vec![usize::MAX; self.nodes.len()];
        for (p, &i) in members.iter().enumerate() {
            pos[i] = p;
        }
        let sub: Vec<Vec<usize>> = members
            .iter()
            .map(|&i| {
                self.agg[i]
                    .iter()
                    .map(|&j| pos[j as usize])
                    .filter(|&p| p != usize::MAX)
                    .collect()
            })
            .collect();
        let shift = sub.iter().map(Vec::len).max().unwrap_or(0) as f64 + 1.0;
        let apply = |v: &[f64]| -> Vec<f64> {
            (0..n)
                .map(|p| shift * v[p] + sub[p].iter().map(|&q| v[q]).sum::<f64>())
                .collect()
        };
        let normalize = |v: &mut Vec<f64>| {
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 0.0 {
                v.iter_mut().for_each(|x| *x /= norm);
            }
        };

        let mut top = vec![1.0; n];
        normalize(&mut top);
        for _ in 0..200 {
            top = apply(&top);
            normalize(&mut top);
        }
        let mut second: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        for _ in 0..300 {
            let dot: f64 = second.iter().zip(&top).map(|(a, b)| a * b).sum();
            second.iter_mut().zip(&top).for_each(|(s, t)| *s -= dot * t);
            normalize(&mut second);
            second = apply(&second);
        }
        let dot: f64 = second.iter().zip(&top).map(|(a, b)| a * b).sum();
        second.iter_mut().zip(&top).for_each(|(s, t)| *s -= dot * t);
        second.iter().map(|&v| v > 0.0).collect()
    }

    /// Pairs of occupied slots joined by at least one aggregate edge.
    fn neighboring_pairs(&self) -> Vec<(usize, usize)> {
        let cap = self.cap;
        let mut linked = vec![false; cap * cap];
        for (i, list) in self.agg.iter().enumerate() {
            let ki = self.label[i];
            for &j in list {
                let kj = self.label[j as usize];
                if ki != kj {
                    linked[ki.min(kj) * cap + ki.max(kj)] = true;
                }
            }
        }
        (0..cap)
            .flat_map(|a| (a + 1..cap).map(move |b| (a, b)))
            .filter(|&(a, b)| linked[a * cap + b])
            .collect()
    }

    /// Greedy best-first merging of neighbouring communities.
    fn merge_pass(&mut self) -> bool {
        let mut merged = false;
        loop {
            let best = self
                .neighboring_pairs()
                .into_iter()
                .map(|(a, b)| (self.merge_delta(a, b), a, b))
                .min_by(|x, y| x.0.total_cmp(&y.0));
            match best {
                Some((d, a, b)) if d < -MIN_IMPROVEMENT => {
                    let (keep, gone) = if self.size[a] >= self.size[b] { (a, b) } else { (b, a) };
                    self.apply_merge(keep, gone, d);
                    merged = true;
                }
                _ => break,
            }
        }
        self.resync();
        merged
    }

    /// Moves single nodes to the best neighbouring community while that
    /// strictly lowers the criterion.
    fn refine(&mut self, rng: &mut ChaCha8Rng) -> bool {
        let mut order: Vec<usize> = (0..self.nodes.len()).collect();
        let mut moved_any = false;
        for _ in 0..MAX_SWEEPS {
            order.shuffle(rng);
            let mut moved = false;
            for &i in &order {
                let a = self.label[i];
                let mut targets: Vec<usize> = self.agg[i]
                    .iter()
                    .map(|&j| self.label[j as usize])
                    .filter(|&k| k != a)
                    .collect();
                targets.sort_unstable();
                targets.dedup();
                let mut best: Option<(f64, usize)> = None;
                for b in targets {
                    let d = self.move_delta(i, b);
                    if best.map_or(true, |(bd, _)| d < bd) {
                        best = Some((d, b));
                    }
                }
                if let Some((d, b)) = best {
                    if d < -MIN_IMPROVEMENT {
                        self.apply_move(i, b, d);
                        moved = true;
                    }
                }
            }
            if !moved {
                break;
            }
            moved_any = true;
        }
        self.resync();
        moved_any
    }

    /// Full search: split until no split helps, merge, refine; repeat while
    /// the criterion keeps dropping.
    fn search(&mut self, cfg: &SearchConfig, rng: &mut ChaCha8Rng) {
        if self.nodes.len() < 2 {
            return;
        }
        for _ in 0..cfg.max_cycles.max(1) {
            let before = self.total;
            let mut pending = self.occupied_slots();
            pending.reverse();
            while let Some(k) = pending.pop() {
                if let Some(j) = self.bisect(k, cfg.init, rng) {
                    pending.push(j);
                    pending.push(k);
                }
            }
            self.merge_pass();
            self.refine(rng);
            if self.total >= before - MIN_IMPROVEMENT {
                break;
            }
        }
    }

    pub(crate) fn assignment(&self) -> CommunityAssignment {
        if self.nodes.is_empty() {
            return CommunityAssignment::single(&[]);
        }
        CommunityAssignment::from_raw(&self.nodes, &self.label)
    }

    #[cfg(test)]
    fn check_consistency(&self) {
        let mut copy = SegmentModel {
            counting: self.counting,
            nodes: self.nodes.clone(),
            adj_off: self.adj_off.clone(),
            adj: self.adj.clone(),
            counted: self.counted.clone(),
            agg: self.agg.clone(),
            label: self.label.clone(),
            cap: self.cap,
            size: Vec::new(),
            occupied: 0,
            tsize: Vec::new(),
            edges: Vec::new(),
            total: 0.0,
            scratch: Vec::new(),
            loaded: None,
            code: self.code.clone(),
        };
        copy.rebuild_stats();
        assert_eq!(copy.edges, self.edges);
        assert_eq!(copy.tsize, self.tsize);
        assert_eq!(copy.size, self.size);
        assert_eq!(copy.occupied, self.occupied);
        assert!((copy.total - self.total).abs() < 1e-6 * (1.0 + copy.total.abs()));
    }
}

/// Runs the search on one segment using a prebuilt index. Returns the
/// assignment and its segment code length.
pub fn fit_segment(
    seq: &GraphSequence,
    index: &NeighborIndex,
    seg: SegmentView,
    seed: u64,
    cfg: &SearchConfig,
) -> Result<(CommunityAssignment, f64)> {
    let mut model = SegmentModel::new(seq, index, seg, cfg.mdl.pair_counting, None)?;
    let mut rng = rng_from(seed);
    model.search(cfg, &mut rng);
    Ok((model.assignment(), model.total()))
}

/// Community assignment minimizing the segment's code length.
pub fn detect_communities(
    seq: &GraphSequence,
    seg: SegmentView,
    seed: u64,
    cfg: &SearchConfig,
) -> Result<CommunityAssignment> {
    seq.check_view(seg)?;
    let index = NeighborIndex::new(seq);
    fit_segment(seq, &index, seg, seed, cfg).map(|(a, _)| a)
}

/// Outcome of a single bisection attempt.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Bisection {
    NoSplit,
    /// Both parts sorted; the part holding the smallest node comes first.
    Split(Vec<usize>, Vec<usize>),
}

/// Splits `subset` in two by node switching, scored against the whole
/// segment with every node outside `subset` keeping its `context` label.
pub fn bisect_refine(
    seq: &GraphSequence,
    seg: SegmentView,
    context: &CommunityAssignment,
    subset: &[usize],
    seed: u64,
    cfg: &SearchConfig,
) -> Result<Bisection> {
    let index = NeighborIndex::new(seq);
    let mut model = SegmentModel::new(seq, &index, seg, cfg.mdl.pair_counting, Some(context))?;
    let mut locals = Vec::with_capacity(subset.len());
    for &g in subset {
        let li = model
            .nodes
            .binary_search(&g)
            .map_err(|_| Error::UnassignedNode(g))?;
        locals.push(li);
    }
    locals.sort_unstable();
    locals.dedup();
    if locals.len() < 2 {
        return Ok(Bisection::NoSplit);
    }

    // Isolate the subset in its own slot unless it already is one.
    let k = model.label[locals[0]];
    let whole = model.members(k);
    let slot = if whole == locals {
        k
    } else {
        let fresh = model.fresh_slot();
        for &i in &locals {
            let d = model.move_delta(i, fresh);
            model.apply_move(i, fresh, d);
        }
        model.resync();
        fresh
    };

    let mut rng = rng_from(seed);
    match model.bisect(slot, cfg.init, &mut rng) {
        None => Ok(Bisection::NoSplit),
        Some(j) => {
            let mut left: Vec<usize> = model.members(slot).iter().map(|&i| model.nodes[i]).collect();
            let mut right: Vec<usize> = model.members(j).iter().map(|&i| model.nodes[i]).collect();
            left.sort_unstable();
            right.sort_unstable();
            if right[0] < left[0] {
                std::mem::swap(&mut left, &mut right);
            }
            Ok(Bisection::Split(left, right))
        }
    }
}

/// Repeatedly fuses the pair of neighbouring communities with the largest
/// drop in segment code length until no fusion lowers it.
pub fn merge_pass(
    seq: &GraphSequence,
    seg: SegmentView,
    assign: &CommunityAssignment,
    cfg: &SearchConfig,
) -> Result<CommunityAssignment> {
    let index = NeighborIndex::new(seq);
    let mut model = SegmentModel::new(seq, &index, seg, cfg.mdl.pair_counting, Some(assign))?;
    model.merge_pass();
    Ok(model.assignment())
}
