//! Bernoulli stochastic block model: block tallies, maximum-likelihood link
//! probabilities and the block log-likelihood, all in bits.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Snapshot;

/// Community labels for a set of nodes. Ids run over `1..=num_communities`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommunityAssignment {
    nodes: Vec<usize>,
    labels: Vec<usize>,
    num_communities: usize,
}

impl CommunityAssignment {
    /// Every node in one community.
    pub fn single(nodes: &[usize]) -> Self {
        let mut nodes = nodes.to_vec();
        nodes.sort_unstable();
        nodes.dedup();
        let labels = vec![1; nodes.len()];
        CommunityAssignment {
            nodes,
            labels,
            num_communities: 1,
        }
    }

    /// Takes `(node, id)` pairs with ids already in `1..=c` and every id used.
    pub fn from_pairs<I>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut pairs: Vec<(usize, usize)> = pairs.into_iter().collect();
        pairs.sort_unstable();
        if pairs.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidAssignment("node assigned twice".into()));
        }
        let c = pairs.iter().map(|p| p.1).max().unwrap_or(1);
        let mut used = vec![false; c + 1];
        for &(_, id) in &pairs {
            if id == 0 {
                return Err(Error::InvalidAssignment("community ids start at 1".into()));
            }
            used[id] = true;
        }
        if !pairs.is_empty() && used[1..].iter().any(|u| !u) {
            return Err(Error::InvalidAssignment(format!(
                "community ids must cover 1..={c} without gaps"
            )));
        }
        let (nodes, labels) = pairs.into_iter().unzip();
        Ok(CommunityAssignment {
            nodes,
            labels,
            num_communities: c,
        })
    }

    /// Accepts arbitrary raw labels and renumbers them: ids ordered by
    /// decreasing community size, ties by smallest member index.
    pub fn from_raw(nodes: &[usize], raw: &[usize]) -> Self {
        assert_eq!(nodes.len(), raw.len(), "one label per node");
        let mut order: Vec<usize> = (0..nodes.len()).collect();
        order.sort_unstable_by_key(|&i| nodes[i]);

        let mut groups: HashMap<usize, (usize, usize)> = HashMap::new();
        for &i in &order {
            let entry = groups.entry(raw[i]).or_insert((0, nodes[i]));
            entry.0 += 1;
        }
        let mut ranked: Vec<(usize, (usize, usize))> = groups.into_iter().collect();
        ranked.sort_unstable_by(|a, b| b.1 .0.cmp(&a.1 .0).then(a.1 .1.cmp(&b.1 .1)));
        let remap: HashMap<usize, usize> = ranked
            .iter()
            .enumerate()
            .map(|(id, (raw_label, _))| (*raw_label, id + 1))
            .collect();

        let sorted_nodes = order.iter().map(|&i| nodes[i]).collect();
        let labels = order.iter().map(|&i| remap[&raw[i]]).collect();
        CommunityAssignment {
            nodes: sorted_nodes,
            labels,
            num_communities: ranked.len().max(1),
        }
    }

    /// Same partition with canonical ids.
    pub fn normalized(&self) -> Self {
        Self::from_raw(&self.nodes, &self.labels)
    }

    pub fn num_communities(&self) -> usize {
        self.num_communities
    }

    /// Sorted node domain.
    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    /// Labels aligned with [`CommunityAssignment::nodes`].
    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn get(&self, node: usize) -> Option<usize> {
        self.nodes
            .binary_search(&node)
            .ok()
            .map(|pos| self.labels[pos])
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.nodes.iter().copied().zip(self.labels.iter().copied())
    }

    /// Members of each community, index `k - 1` for id `k`.
    pub fn communities(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.num_communities];
        for (node, id) in self.iter() {
            out[id - 1].push(node);
        }
        out
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut out = vec![0; self.num_communities];
        for &id in &self.labels {
            out[id - 1] += 1;
        }
        out
    }
}

/// Index of block `(k, l)`, `k <= l`, 0-based, in a packed upper triangle.
fn tri_index(c: usize, k: usize, l: usize) -> usize {
    let (k, l) = if k <= l { (k, l) } else { (l, k) };
    k * c - k * k.saturating_sub(1) / 2 + (l - k)
}

fn tri_len(c: usize) -> usize {
    c * (c + 1) / 2
}

/// Observed and possible edge counts per unordered community pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockCounts {
    num_communities: usize,
    observed: Vec<u64>,
    possible: Vec<u64>,
}

impl BlockCounts {
    pub fn num_communities(&self) -> usize {
        self.num_communities
    }

    /// `(E_kl, N_kl)` for 1-based community ids, either order.
    pub fn get(&self, k: usize, l: usize) -> (u64, u64) {
        let i = tri_index(self.num_communities, k - 1, l - 1);
        (self.observed[i], self.possible[i])
    }

    /// All blocks as `(k, l, E, N)`, `k <= l`, 1-based.
    pub fn blocks(&self) -> impl Iterator<Item = (usize, usize, u64, u64)> + '_ {
        let c = self.num_communities;
        (1..=c).flat_map(move |k| {
            (k..=c).map(move |l| {
                let (e, n) = self.get(k, l);
                (k, l, e, n)
            })
        })
    }

    pub fn total_observed(&self) -> u64 {
        self.observed.iter().sum()
    }
}

/// Per-block link probabilities `P_kl`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkProbs {
    num_communities: usize,
    probs: Vec<f64>,
}

impl LinkProbs {
    /// `values` lists blocks in `(1,1), (1,2), .., (1,c), (2,2), ..` order.
    pub fn new(num_communities: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != tri_len(num_communities) {
            return Err(Error::InvalidSegmentation(format!(
                "{} link probabilities given for {} communities",
                values.len(),
                num_communities
            )));
        }
        Ok(LinkProbs {
            num_communities,
            probs: values,
        })
    }

    pub fn num_communities(&self) -> usize {
        self.num_communities
    }

    pub fn get(&self, k: usize, l: usize) -> f64 {
        self.probs[tri_index(self.num_communities, k - 1, l - 1)]
    }

    pub fn set(&mut self, k: usize, l: usize, p: f64) {
        let i = tri_index(self.num_communities, k - 1, l - 1);
        self.probs[i] = p;
    }

    pub fn values(&self) -> &[f64] {
        &self.probs
    }
}

/// Tallies `E_kl` and `N_kl` over pairs of `counted_nodes`.
pub fn block_counts(
    snap: &Snapshot,
    assign: &CommunityAssignment,
    counted_nodes: &[usize],
) -> Result<BlockCounts> {
    let c = assign.num_communities();
    let mut community_of: HashMap<usize, usize> = HashMap::with_capacity(counted_nodes.len());
    let mut sizes = vec![0u64; c];
    for &node in counted_nodes {
        let id = assign.get(node).ok_or(Error::UnassignedNode(node))?;
        if community_of.insert(node, id - 1).is_none() {
            sizes[id - 1] += 1;
        }
    }

    let mut observed = vec![0u64; tri_len(c)];
    for &(a, b) in snap.edges() {
        if let (Some(&ka), Some(&kb)) = (community_of.get(&a), community_of.get(&b)) {
            observed[tri_index(c, ka, kb)] += 1;
        }
    }

    let mut possible = vec![0u64; tri_len(c)];
    for k in 0..c {
        for l in k..c {
            possible[tri_index(c, k, l)] = if k == l {
                sizes[k] * sizes[k].saturating_sub(1) / 2
            } else {
                sizes[k] * sizes[l]
            };
        }
    }
    Ok(BlockCounts {
        num_communities: c,
        observed,
        possible,
    })
}

/// `P_kl = E_kl / N_kl`, or 0 for empty blocks.
pub fn mle_link_probs(counts: &BlockCounts) -> LinkProbs {
    let probs = counts
        .observed
        .iter()
        .zip(&counts.possible)
        .map(|(&e, &n)| if n == 0 { 0.0 } else { e as f64 / n as f64 })
        .collect();
    LinkProbs {
        num_communities: counts.num_communities,
        probs,
    }
}

/// `count * log2(p)` with `0 * log2(0) = 0`.
fn weighted_log2(count: f64, p: f64) -> f64 {
    if count == 0.0 {
        0.0
    } else {
        count * p.log2()
    }
}

/// Sum over blocks of `E log2 P + (N - E) log2 (1 - P)`.
pub fn block_log_likelihood(counts: &BlockCounts, probs: &LinkProbs) -> Result<f64> {
    if counts.num_communities != probs.num_communities {
        return Err(Error::InvalidSegmentation(format!(
            "counts over {} communities, probabilities over {}",
            counts.num_communities, probs.num_communities
        )));
    }
    let mut total = 0.0;
    for ((&e, &n), &p) in counts.observed.iter().zip(&counts.possible).zip(&probs.probs) {
        if !(0.0..=1.0).contains(&p) || p.is_nan() {
            return Err(Error::DomainError(p));
        }
        total += weighted_log2(e as f64, p) + weighted_log2((n - e) as f64, 1.0 - p);
    }
    Ok(total)
}

/// Code length in bits of one block at its MLE: the `½ log2 N` parameter
/// cost plus the residual `N · H2(E/N)`. Empty blocks cost nothing.
#[inline]
pub fn block_code_length(e: u64, n: u64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let nf = n as f64;
    let ef = e as f64;
    let mut bits = 0.5 * nf.log2();
    if e > 0 && e < n {
        let mf = nf - ef;
        bits -= ef * (ef / nf).log2() + mf * (mf / nf).log2();
    }
    bits
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fixture(name: &str) -> f64 {
        let raw = include_str!("../tests/fixtures/derived_values.json");
        let json: serde_json::Value = serde_json::from_str(raw).unwrap();
        json[name]["value"].as_f64().unwrap()
    }

    fn counts_of(e: u64, n: u64) -> BlockCounts {
        BlockCounts {
            num_communities: 1,
            observed: vec![e],
            possible: vec![n],
        }
    }

    #[test]
    fn tri_index_is_dense() {
        for c in 1..7 {
            let mut seen = vec![false; tri_len(c)];
            for k in 0..c {
                for l in k..c {
                    let i = tri_index(c, k, l);
                    assert!(!seen[i]);
                    seen[i] = true;
                    assert_eq!(i, tri_index(c, l, k));
                }
            }
            assert!(seen.into_iter().all(|s| s));
        }
    }

    #[test]
    fn two_block_counts() {
        let snap = Snapshot::from_pairs(1, [(0, 1), (2, 3), (0, 2)]).unwrap();
        let assign = CommunityAssignment::from_pairs([(0, 1), (1, 1), (2, 2), (3, 2)]).unwrap();
        let counts = block_counts(&snap, &assign, &[0, 1, 2, 3]).unwrap();
        assert_eq!(counts.get(1, 1), (1, 1));
        assert_eq!(counts.get(2, 2), (1, 1));
        assert_eq!(counts.get(1, 2), (1, 4));
        assert_eq!(counts.get(2, 1), (1, 4));
    }

    #[test]
    fn complete_graph_fills_its_block() {
        let n = 6;
        let pairs = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b)));
        let snap = Snapshot::from_pairs(1, pairs).unwrap();
        let nodes: Vec<usize> = (0..n).collect();
        let counts = block_counts(&snap, &CommunityAssignment::single(&nodes), &nodes).unwrap();
        assert_eq!(counts.get(1, 1), (15, 15));
    }

    #[test]
    fn no_edges_keeps_possible_counts() {
        let snap = Snapshot::from_pairs(1, []).unwrap();
        let assign = CommunityAssignment::from_pairs([(0, 1), (1, 1), (2, 2), (3, 2)]).unwrap();
        let counts = block_counts(&snap, &assign, &[0, 1, 2, 3]).unwrap();
        assert_eq!(counts.get(1, 1), (0, 1));
        assert_eq!(counts.get(1, 2), (0, 4));
    }

    #[test]
    fn counted_node_without_label_is_an_error() {
        let snap = Snapshot::from_pairs(1, [(0, 1)]).unwrap();
        let assign = CommunityAssignment::single(&[0]);
        assert!(matches!(
            block_counts(&snap, &assign, &[0, 1]),
            Err(Error::UnassignedNode(1))
        ));
    }

    #[test]
    fn mle_boundaries() {
        assert_eq!(mle_link_probs(&counts_of(1, 4)).get(1, 1), 0.25);
        assert_eq!(mle_link_probs(&counts_of(0, 4)).get(1, 1), 0.0);
        assert_eq!(mle_link_probs(&counts_of(4, 4)).get(1, 1), 1.0);
        assert_eq!(mle_link_probs(&counts_of(0, 0)).get(1, 1), 0.0);
    }

    #[test]
    fn log_likelihood_matches_reference_value() {
        let counts = counts_of(2, 3);
        let ll = block_log_likelihood(&counts, &mle_link_probs(&counts)).unwrap();
        assert!((ll - fixture("loglik_e2_n3")).abs() < 1e-12);
        assert!((ll - -2.75489).abs() < 5e-6);
    }

    #[test]
    fn perfect_fits_cost_nothing() {
        let full = counts_of(3, 3);
        assert_eq!(block_log_likelihood(&full, &mle_link_probs(&full)).unwrap(), 0.0);
        let empty = counts_of(0, 5);
        assert_eq!(block_log_likelihood(&empty, &mle_link_probs(&empty)).unwrap(), 0.0);
    }

    #[test]
    fn out_of_range_probability_is_rejected() {
        let counts = counts_of(1, 2);
        let probs = LinkProbs::new(1, vec![1.5]).unwrap();
        assert!(matches!(
            block_log_likelihood(&counts, &probs),
            Err(Error::DomainError(_))
        ));
    }

    #[test]
    fn normalization_orders_by_size_then_smallest_member() {
        let a = CommunityAssignment::from_raw(&[5, 1, 2, 9, 7], &[40, 30, 30, 10, 40]);
        // {5,7} and {1,2} tie on size; {1,2} has the smaller member.
        assert_eq!(a.get(1), Some(1));
        assert_eq!(a.get(2), Some(1));
        assert_eq!(a.get(5), Some(2));
        assert_eq!(a.get(7), Some(2));
        assert_eq!(a.get(9), Some(3));
        assert_eq!(a.num_communities(), 3);
    }

    #[test]
    fn from_pairs_rejects_gaps() {
        assert!(CommunityAssignment::from_pairs([(0, 1), (1, 3)]).is_err());
        assert!(CommunityAssignment::from_pairs([(0, 0)]).is_err());
    }

    /// H2 in bits, written independently of `block_code_length`.
    fn binary_entropy(p: f64) -> f64 {
        let term = |x: f64| if x <= 0.0 { 0.0 } else { -x * x.log2() };
        term(p) + term(1.0 - p)
    }

    fn brute_force_counts(
        edges: &[(usize, usize)],
        labels: &[usize],
        c: usize,
    ) -> Vec<Vec<(u64, u64)>> {
        let mut out = vec![vec![(0u64, 0u64); c + 1]; c + 1];
        let n = labels.len();
        for i in 0..n {
            for j in i + 1..n {
                let (k, l) = (labels[i].min(labels[j]), labels[i].max(labels[j]));
                out[k][l].1 += 1;
                if edges.contains(&(i, j)) {
                    out[k][l].0 += 1;
                }
            }
        }
        out
    }

    proptest! {
        #[test]
        fn mle_maximizes_likelihood(e in 0u64..20, extra in 0u64..20, eps in 0.001f64..0.2) {
            let n = e + extra;
            prop_assume!(n > 0);
            let counts = counts_of(e, n);
            let mle = mle_link_probs(&counts);
            let best = block_log_likelihood(&counts, &mle).unwrap();
            for delta in [-eps, eps] {
                let p = mle.get(1, 1) + delta;
                if p > 0.0 && p < 1.0 {
                    let other = block_log_likelihood(&counts, &LinkProbs::new(1, vec![p]).unwrap()).unwrap();
                    prop_assert!(other <= best + 1e-12);
                }
            }
        }

        #[test]
        fn mle_likelihood_is_negative_entropy(e in 0u64..50, extra in 0u64..50) {
            let n = e + extra;
            prop_assume!(n > 0);
            let counts = counts_of(e, n);
            let ll = block_log_likelihood(&counts, &mle_link_probs(&counts)).unwrap();
            let closed = -(n as f64) * binary_entropy(e as f64 / n as f64);
            prop_assert!((ll - closed).abs() < 1e-9);
            let bits = block_code_length(e, n);
            prop_assert!((bits - (0.5 * (n as f64).log2() - ll)).abs() < 1e-9);
        }

        #[test]
        fn block_counts_match_pair_scan(
            n in 2usize..30,
            c in 1usize..5,
            seed_labels in proptest::collection::vec(0usize..5, 30),
            edge_bits in proptest::collection::vec(any::<bool>(), 435),
        ) {
            let labels: Vec<usize> = (0..n).map(|i| seed_labels[i] % c + 1).collect();
            let mut edges = Vec::new();
            let mut bit = 0;
            for i in 0..n {
                for j in i + 1..n {
                    if edge_bits[bit % edge_bits.len()] {
                        edges.push((i, j));
                    }
                    bit += 1;
                }
            }
            let nodes: Vec<usize> = (0..n).collect();
            let assign = CommunityAssignment::from_raw(&nodes, &labels);
            let snap = Snapshot::from_pairs(1, edges.clone()).unwrap();
            let counts = block_counts(&snap, &assign, &nodes).unwrap();
            let relabeled: Vec<usize> = nodes.iter().map(|&i| assign.get(i).unwrap()).collect();
            let oracle = brute_force_counts(&edges, &relabeled, assign.num_communities());
            for (k, l, e, nn) in counts.blocks() {
                prop_assert_eq!((e, nn), oracle[k][l]);
            }
            prop_assert_eq!(counts.total_observed(), edges.len() as u64);
        }
    }
}
