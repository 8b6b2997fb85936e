#![allow(dead_code)]

use netseg::mdl::{segment_views, MdlConfig, Segmentation};
use netseg::seed::rng_from;
use netseg::{CommunityAssignment, GraphSequence, SegmentView};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn labels(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("n{i}")).collect()
}

/// Bernoulli(p) snapshots over `n` nodes.
pub fn random_sequence(rng: &mut ChaCha8Rng, t: usize, n: usize, p: f64) -> GraphSequence {
    let snaps = (0..t)
        .map(|_| {
            let mut e = Vec::new();
            for a in 0..n {
                for b in a + 1..n {
                    if rng.gen_bool(p) {
                        e.push((a, b));
                    }
                }
            }
            e
        })
        .collect();
    GraphSequence::from_indexed(labels(n), snaps).unwrap()
}

/// Planted-partition snapshots: `block[v]` is node v's block.
pub fn planted_sequence(
    rng: &mut ChaCha8Rng,
    block: &[usize],
    t: usize,
    p_in: f64,
    p_out: f64,
) -> GraphSequence {
    let n = block.len();
    let snaps = (0..t)
        .map(|_| {
            let mut e = Vec::new();
            for a in 0..n {
                for b in a + 1..n {
                    let p = if block[a] == block[b] { p_in } else { p_out };
                    if rng.gen_bool(p) {
                        e.push((a, b));
                    }
                }
            }
            e
        })
        .collect();
    GraphSequence::from_indexed(labels(n), snaps).unwrap()
}

pub fn random_assignment(rng: &mut ChaCha8Rng, nodes: &[usize], max_c: usize) -> CommunityAssignment {
    if nodes.is_empty() {
        return CommunityAssignment::single(&[]);
    }
    let c = rng.gen_range(1..=max_c.max(1));
    let raw: Vec<usize> = nodes.iter().map(|_| rng.gen_range(0..c)).collect();
    CommunityAssignment::from_raw(nodes, &raw)
}

/// Random change points and random assignments, probabilities at the MLE.
pub fn random_segmentation(rng: &mut ChaCha8Rng, seq: &GraphSequence, cfg: &MdlConfig) -> Segmentation {
    let mut cps: Vec<usize> = (2..=seq.len()).filter(|_| rng.gen_bool(0.3)).collect();
    cps.sort_unstable();
    let assignments = segment_views(seq.len(), &cps)
        .into_iter()
        .map(|v| {
            let active = seq.active_nodes(v).unwrap();
            random_assignment(rng, &active, 4)
        })
        .collect();
    Segmentation::fit(seq, cps, assignments, cfg).unwrap()
}

/// Every set partition of `0..n` as restricted growth strings.
pub fn set_partitions(n: usize) -> Vec<Vec<usize>> {
    fn rec(i: usize, n: usize, cur: &mut Vec<usize>, max: usize, out: &mut Vec<Vec<usize>>) {
        if i == n {
            out.push(cur.clone());
            return;
        }
        for k in 0..=max + 1 {
            if i == 0 && k > 0 {
                break;
            }
            cur.push(k);
            rec(i + 1, n, cur, if i == 0 { 0 } else { max.max(k) }, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if n == 0 {
        out.push(Vec::new());
    } else {
        rec(0, n, &mut Vec::with_capacity(n), 0, &mut out);
    }
    out
}

/// Brute-force minimum of segment_mdl over all partitions of the active nodes.
pub fn exhaustive_optimum(seq: &GraphSequence, seg: SegmentView, cfg: &MdlConfig) -> (f64, CommunityAssignment) {
    let active = seq.active_nodes(seg).unwrap();
    let mut best: Option<(f64, CommunityAssignment)> = None;
    for raw in set_partitions(active.len()) {
        let a = CommunityAssignment::from_raw(&active, &raw);
        let bits = netseg::segment_mdl(seq, seg, &a, cfg).unwrap();
        if best.as_ref().map_or(true, |(b, _)| bits < *b) {
            best = Some((bits, a));
        }
    }
    best.unwrap()
}

/// Small random segment with a few planted blocks, used by the oracle checks.
pub fn small_oracle_case(seed: u64) -> (GraphSequence, SegmentView) {
    let mut rng = rng_from(seed);
    let n = rng.gen_range(4..=10);
    let c = rng.gen_range(1..=3);
    let mut block: Vec<usize> = (0..n).map(|v| v % c).collect();
    block.shuffle(&mut rng);
    let t = rng.gen_range(1..=3);
    let p_in = rng.gen_range(0.6..0.95);
    let p_out = rng.gen_range(0.02..0.3);
    let seq = planted_sequence(&mut rng, &block, t, p_in, p_out);
    let view = seq.full_view();
    (seq, view)
}

pub fn bell(n: usize) -> usize {
    set_partitions(n).len()
}
