//! Aligned sequences of simple undirected graphs.
//!
//! Every snapshot shares one dense node index space. Nodes missing from a
//! snapshot simply have no edges there; nothing is padded.

use std::collections::HashMap;

use crate::error::{Error, Result};

/// A node of the global universe: dense index plus external label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeId {
    pub index: usize,
    pub label: String,
}

/// One time point's edge set. Edges are stored once as `(lo, hi)` with
/// `lo < hi`, sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Snapshot {
    t: usize,
    edges: Vec<(usize, usize)>,
}

impl Snapshot {
    /// Builds a snapshot from arbitrary index pairs, collapsing duplicates.
    /// Self-loops are rejected with the offending index rendered as label.
    pub fn from_pairs<I>(t: usize, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut edges = Vec::new();
        for (a, b) in pairs {
            if a == b {
                return Err(Error::SelfLoop(a.to_string()));
            }
            edges.push((a.min(b), a.max(b)));
        }
        edges.sort_unstable();
        edges.dedup();
        Ok(Snapshot { t, edges })
    }

    /// 1-based time index.
    pub fn t(&self) -> usize {
        self.t
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edges.binary_search(&(a.min(b), a.max(b))).is_ok()
    }

    /// Nodes with degree at least one, sorted.
    pub fn active_nodes(&self) -> Vec<usize> {
        let mut nodes: Vec<usize> = self.edges.iter().flat_map(|&(a, b)| [a, b]).collect();
        nodes.sort_unstable();
        nodes.dedup();
        nodes
    }

    /// Number of edges present in exactly one of the two snapshots.
    pub fn symmetric_difference(&self, other: &Snapshot) -> usize {
        let (mut i, mut j, mut diff) = (0, 0, 0);
        let (a, b) = (&self.edges, &other.edges);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => {
                    diff += 1;
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    diff += 1;
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    i += 1;
                    j += 1;
                }
            }
        }
        diff + (a.len() - i) + (b.len() - j)
    }
}

/// A half-open window `[start, end_exclusive)` of 1-based snapshot times.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SegmentView {
    pub start: usize,
    pub end_exclusive: usize,
}

impl SegmentView {
    pub fn new(start: usize, end_exclusive: usize) -> Self {
        SegmentView {
            start,
            end_exclusive,
        }
    }

    pub fn len(&self) -> usize {
        self.end_exclusive.saturating_sub(self.start)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn times(&self) -> std::ops::Range<usize> {
        self.start..self.end_exclusive
    }

    pub fn contains(&self, t: usize) -> bool {
        self.start <= t && t < self.end_exclusive
    }
}

/// Ordered snapshots over one shared node universe. Immutable once built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphSequence {
    labels: Vec<String>,
    snapshots: Vec<Snapshot>,
}

impl GraphSequence {
    /// Maps labels to dense indices in first-appearance order.
    pub fn from_edge_lists<S: AsRef<str>>(edge_lists: &[Vec<(S, S)>]) -> Result<Self> {
        let mut builder = SequenceBuilder::default();
        for list in edge_lists {
            builder.push_snapshot(list.iter().map(|(a, b)| (a.as_ref(), b.as_ref())))?;
        }
        builder.finish()
    }

    /// Builds from already-indexed snapshots. `labels.len()` fixes N.
    pub fn from_indexed(labels: Vec<String>, snapshots: Vec<Vec<(usize, usize)>>) -> Result<Self> {
        if snapshots.is_empty() {
            return Err(Error::EmptySequence);
        }
        let n = labels.len();
        let snapshots = snapshots
            .into_iter()
            .enumerate()
            .map(|(i, pairs)| {
                if let Some(&(a, b)) = pairs.iter().find(|&&(a, b)| a >= n || b >= n) {
                    return Err(Error::Invariant(format!(
                        "edge ({a}, {b}) references a node outside the universe of {n}"
                    )));
                }
                Snapshot::from_pairs(i + 1, pairs).map_err(|e| match e {
                    Error::SelfLoop(idx) => {
                        let idx: usize = idx.parse().unwrap_or(0);
                        Error::SelfLoop(labels[idx].clone())
                    }
                    other => other,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(GraphSequence { labels, snapshots })
    }

    /// Number of snapshots, `T`.
    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    /// Size of the node universe, `N`.
    pub fn num_nodes(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, index: usize) -> &str {
        &self.labels[index]
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.labels.iter().enumerate().map(|(index, label)| NodeId {
            index,
            label: label.clone(),
        })
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn label_index(&self) -> HashMap<&str, usize> {
        self.labels
            .iter()
            .enumerate()
            .map(|(i, l)| (l.as_str(), i))
            .collect()
    }

    /// Snapshot at 1-based time `t`.
    pub fn snapshot(&self, t: usize) -> &Snapshot {
        &self.snapshots[t - 1]
    }

    pub fn snapshots(&self) -> &[Snapshot] {
        &self.snapshots
    }

    /// The window covering the whole sequence, `[1, T+1)`.
    pub fn full_view(&self) -> SegmentView {
        SegmentView::new(1, self.len() + 1)
    }

    pub fn check_view(&self, seg: SegmentView) -> Result<()> {
        if seg.start < 1 || seg.start >= seg.end_exclusive || seg.end_exclusive > self.len() + 1 {
            return Err(Error::OutOfBounds {
                start: seg.start,
                end: seg.end_exclusive,
                limit: self.len() + 1,
            });
        }
        Ok(())
    }

    /// Binarized union of all snapshots in the window (the "super network").
    pub fn aggregate(&self, seg: SegmentView) -> Result<Snapshot> {
        self.check_view(seg)?;
        let mut edges: Vec<(usize, usize)> = seg
            .times()
            .flat_map(|t| self.snapshot(t).edges().iter().copied())
            .collect();
        edges.sort_unstable();
        edges.dedup();
        Ok(Snapshot {
            t: seg.start,
            edges,
        })
    }

    /// Nodes with degree at least one in some snapshot of the window, sorted.
    pub fn active_nodes(&self, seg: SegmentView) -> Result<Vec<usize>> {
        self.check_view(seg)?;
        let mut seen = vec![false; self.num_nodes()];
        for t in seg.times() {
            for &(a, b) in self.snapshot(t).edges() {
                seen[a] = true;
                seen[b] = true;
            }
        }
        Ok(seen
            .iter()
            .enumerate()
            .filter_map(|(i, &s)| s.then_some(i))
            .collect())
    }

    /// Per-snapshot label pairs, the inverse of [`GraphSequence::from_edge_lists`].
    pub fn to_edge_lists(&self) -> Vec<Vec<(String, String)>> {
        self.snapshots
            .iter()
            .map(|s| {
                s.edges()
                    .iter()
                    .map(|&(a, b)| (self.labels[a].clone(), self.labels[b].clone()))
                    .collect()
            })
            .collect()
    }
}

/// Incremental label-keyed construction, used by the file readers.
#[derive(Debug, Default)]
pub struct SequenceBuilder {
    labels: Vec<String>,
    index: HashMap<String, usize>,
    snapshots: Vec<Vec<(usize, usize)>>,
}

impl SequenceBuilder {
    /// Registers a label without edges so it is part of the universe.
    pub fn register(&mut self, label: &str) -> usize {
        if let Some(&i) = self.index.get(label) {
            return i;
        }
        let i = self.labels.len();
        self.labels.push(label.to_owned());
        self.index.insert(label.to_owned(), i);
        i
    }

    pub fn push_snapshot<'a, I>(&mut self, pairs: I) -> Result<()>
    where
        I: IntoIterator<Item = (&'a str, &'a str)>,
    {
        let mut edges = Vec::new();
        for (a, b) in pairs {
            if a == b {
                return Err(Error::SelfLoop(a.to_owned()));
            }
            let ia = self.register(a);
            let ib = self.register(b);
            edges.push((ia, ib));
        }
        self.snapshots.push(edges);
        Ok(())
    }

    pub fn finish(self) -> Result<GraphSequence> {
        GraphSequence::from_indexed(self.labels, self.snapshots)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(lists: &[&[(&str, &str)]]) -> GraphSequence {
        let owned: Vec<Vec<(&str, &str)>> = lists.iter().map(|l| l.to_vec()).collect();
        GraphSequence::from_edge_lists(&owned).unwrap()
    }

    #[test]
    fn labels_are_indexed_in_first_appearance_order() {
        let s = seq(&[&[("a", "b")], &[("b", "c")]]);
        assert_eq!(s.num_nodes(), 3);
        assert_eq!(s.len(), 2);
        assert_eq!(s.snapshot(1).edges(), &[(0, 1)]);
        assert_eq!(s.snapshot(2).edges(), &[(1, 2)]);
        assert_eq!(s.index_of("c"), Some(2));
    }

    #[test]
    fn duplicate_pairs_collapse() {
        let s = seq(&[&[("a", "b"), ("a", "b"), ("b", "a")]]);
        assert_eq!(s.snapshot(1).num_edges(), 1);
        assert!(s.snapshot(1).has_edge(1, 0));
    }

    #[test]
    fn self_loop_is_rejected() {
        let err = GraphSequence::from_edge_lists(&[vec![("a", "a")]]).unwrap_err();
        assert!(matches!(err, Error::SelfLoop(ref l) if l == "a"));
    }

    #[test]
    fn empty_sequence_is_rejected() {
        let lists: Vec<Vec<(&str, &str)>> = Vec::new();
        assert!(matches!(
            GraphSequence::from_edge_lists(&lists),
            Err(Error::EmptySequence)
        ));
    }

    #[test]
    fn aggregate_is_binarized_union() {
        let s = seq(&[&[("a", "b")], &[("b", "c")]]);
        let agg = s.aggregate(SegmentView::new(1, 3)).unwrap();
        assert_eq!(agg.edges(), &[(0, 1), (1, 2)]);

        let same = seq(&[&[("a", "b"), ("b", "c")], &[("a", "b"), ("b", "c")]]);
        let agg = same.aggregate(SegmentView::new(1, 3)).unwrap();
        assert_eq!(agg.edges(), same.snapshot(1).edges());

        let single = s.aggregate(SegmentView::new(1, 2)).unwrap();
        assert_eq!(single.edges(), s.snapshot(1).edges());
    }

    #[test]
    fn aggregate_rejects_out_of_bounds() {
        let s = seq(&[&[("a", "b")]]);
        assert!(matches!(
            s.aggregate(SegmentView::new(1, 3)),
            Err(Error::OutOfBounds { .. })
        ));
        assert!(matches!(
            s.active_nodes(SegmentView::new(0, 1)),
            Err(Error::OutOfBounds { .. })
        ));
    }

    #[test]
    fn active_nodes_follow_the_window() {
        // "late" only has an edge at t=5, "x" has one at t=2.
        let s = seq(&[
            &[("a", "b")],
            &[("a", "x")],
            &[("a", "b")],
            &[("a", "b")],
            &[("late", "a")],
        ]);
        let late = s.index_of("late").unwrap();
        let x = s.index_of("x").unwrap();
        let window = s.active_nodes(SegmentView::new(1, 4)).unwrap();
        assert!(!window.contains(&late));
        assert!(window.contains(&x));
        assert_eq!(s.active_nodes(s.full_view()).unwrap().len(), s.num_nodes());
    }

    #[test]
    fn registered_isolated_labels_count_toward_universe() {
        let mut b = SequenceBuilder::default();
        b.register("lonely");
        b.push_snapshot([("a", "b")]).unwrap();
        let s = b.finish().unwrap();
        assert_eq!(s.num_nodes(), 3);
        assert_eq!(s.active_nodes(s.full_view()).unwrap(), vec![1, 2]);
    }

    #[test]
    fn symmetric_difference_counts_unshared_edges() {
        let a = Snapshot::from_pairs(1, [(0, 1), (1, 2)]).unwrap();
        let b = Snapshot::from_pairs(2, [(1, 2), (2, 3), (3, 4)]).unwrap();
        assert_eq!(a.symmetric_difference(&b), 3);
        assert_eq!(a.symmetric_difference(&a), 0);
    }
}
