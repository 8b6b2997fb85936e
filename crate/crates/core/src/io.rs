//! On-disk formats.
//!
//! * Edge lists: one `label_a<TAB>label_b` per line, blank lines and `#`
//!   comments ignored. Either a directory with one file per snapshot (order
//!   by file name) or one file split into sections by `--t <k>` headers.
//! * Ground truth: `tau: t1 t2 ...` then `segment m: label=id ...` per segment.
//! * Detection results: pretty JSON with sorted keys, see [`ResultFile`].

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::changepoint::{DetectionResult, TraceEntry};
use crate::community::SearchConfig;
use crate::error::{Error, Result};
use crate::graph::{GraphSequence, SequenceBuilder};
use crate::mdl::{segment_views, Segmentation};
use crate::sbm::CommunityAssignment;
use crate::synth::GroundTruth;

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
    }
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn parse_edge_line<'a>(path: &Path, lineno: usize, line: &'a str) -> Result<(&'a str, &'a str)> {
    let mut parts = line.split('\t');
    match (parts.next(), parts.next(), parts.next()) {
        (Some(a), Some(b), None) if !a.trim().is_empty() && !b.trim().is_empty() => {
            Ok((a.trim(), b.trim()))
        }
        _ => Err(parse_err(path, lineno, "expected `label_a<TAB>label_b`")),
    }
}

fn is_skippable(line: &str) -> bool {
    let t = line.trim();
    t.is_empty() || t.starts_with('#')
}

/// Reads a directory of per-snapshot files or one sectioned file.
pub fn read_sequence(path: &Path) -> Result<GraphSequence> {
    if path.is_dir() {
        read_sequence_dir(path)
    } else {
        read_sectioned(path)
    }
}

fn read_sequence_dir(dir: &Path) -> Result<GraphSequence> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| {
            p.is_file()
                && !p
                    .file_name()
                    .and_then(|n| n.to_str())
                    .map_or(true, |n| n.starts_with('.'))
        })
        .collect();
    files.sort();
    let mut builder = SequenceBuilder::default();
    for file in &files {
        let text = read_to_string(file)?;
        let mut pairs = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if !is_skippable(line) {
                pairs.push(parse_edge_line(file, i + 1, line)?);
            }
        }
        builder.push_snapshot(pairs)?;
    }
    builder.finish()
}

fn read_sectioned(path: &Path) -> Result<GraphSequence> {
    let text = read_to_string(path)?;
    let mut sections: BTreeMap<usize, Vec<(usize, &str, &str)>> = BTreeMap::new();
    let mut current: Option<usize> = None;
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        let trimmed = line.trim();
        if let Some(rest) = trimmed.strip_prefix("--t") {
            let k: usize = rest
                .trim()
                .parse()
                .map_err(|_| parse_err(path, lineno, "section header must be `--t <k>`"))?;
            if sections.insert(k, Vec::new()).is_some() {
                return Err(parse_err(path, lineno, format!("duplicate section {k}")));
            }
            current = Some(k);
            continue;
        }
        if is_skippable(line) {
            continue;
        }
        let (a, b) = parse_edge_line(path, lineno, line)?;
        let k = match current {
            Some(k) => k,
            None => {
                sections.entry(1).or_default();
                current = Some(1);
                1
            }
        };
        sections.get_mut(&k).expect("section exists").push((lineno, a, b));
    }
    let mut builder = SequenceBuilder::default();
    for pairs in sections.values() {
        builder.push_snapshot(pairs.iter().map(|&(_, a, b)| (a, b)))?;
    }
    builder.finish()
}

/// One `t<k>.tsv` file per snapshot, zero-padded so name order is time order.
pub fn write_sequence_dir(seq: &GraphSequence, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let width = seq.len().to_string().len().max(3);
    for snap in seq.snapshots() {
        let mut out = String::new();
        for &(a, b) in snap.edges() {
            out.push_str(seq.label(a));
            out.push('\t');
            out.push_str(seq.label(b));
            out.push('\n');
        }
        write_file(&dir.join(format!("t{:0width$}.tsv", snap.t())), &out)?;
    }
    Ok(())
}

pub fn write_sequence_sectioned(seq: &GraphSequence, path: &Path) -> Result<()> {
    let mut out = String::new();
    for snap in seq.snapshots() {
        out.push_str(&format!("--t {}\n", snap.t()));
        for &(a, b) in snap.edges() {
            out.push_str(&format!("{}\t{}\n", seq.label(a), seq.label(b)));
        }
    }
    write_file(path, &out)
}

/// Ground truth keyed by node label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledTruth {
    pub change_points: Vec<usize>,
    pub segments: Vec<BTreeMap<String, usize>>,
}

impl LabeledTruth {
    pub fn from_truth(seq: &GraphSequence, truth: &GroundTruth) -> Self {
        LabeledTruth {
            change_points: truth.change_points.clone(),
            segments: truth
                .assignments
                .iter()
                .map(|a| a.iter().map(|(v, k)| (seq.label(v).to_owned(), k)).collect())
                .collect(),
        }
    }

    pub fn to_text(&self) -> String {
        let tau: Vec<String> = self.change_points.iter().map(|t| t.to_string()).collect();
        let mut out = format!("tau: {}\n", tau.join(" ")).replace(": \n", ":\n");
        for (m, seg) in self.segments.iter().enumerate() {
            out.push_str(&format!("segment {}:", m + 1));
            for (label, k) in seg {
                out.push_str(&format!(" {label}={k}"));
            }
            out.push('\n');
        }
        out
    }

    pub fn parse(path: &Path, text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !is_skippable(l));
        let (i, first) = lines
            .next()
            .ok_or_else(|| parse_err(path, 1, "missing `tau:` line"))?;
        let rest = first
            .trim()
            .strip_prefix("tau:")
            .ok_or_else(|| parse_err(path, i + 1, "first line must start with `tau:`"))?;
        let change_points = rest
            .split_whitespace()
            .map(|s| s.parse::<usize>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| parse_err(path, i + 1, "change points must be integers"))?;

        let mut segments = Vec::new();
        for (i, line) in lines {
            let lineno = i + 1;
            let (head, body) = line
                .split_once(':')
                .ok_or_else(|| parse_err(path, lineno, "expected `segment m: label=id ...`"))?;
            let m: usize = head
                .trim()
                .strip_prefix("segment")
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| parse_err(path, lineno, "expected `segment m:`"))?;
            if m != segments.len() + 1 {
                return Err(parse_err(path, lineno, format!("segment {m} out of order")));
            }
            let mut seg = BTreeMap::new();
            for token in body.split_whitespace() {
                let (label, id) = token
                    .rsplit_once('=')
                    .ok_or_else(|| parse_err(path, lineno, format!("bad entry {token:?}")))?;
                let id: usize = id
                    .parse()
                    .map_err(|_| parse_err(path, lineno, format!("bad community id in {token:?}")))?;
                seg.insert(label.to_owned(), id);
            }
            segments.push(seg);
        }
        if segments.len() != change_points.len() + 1 {
            return Err(parse_err(
                path,
                1,
                format!(
                    "{} change points need {} segments, found {}",
                    change_points.len(),
                    change_points.len() + 1,
                    segments.len()
                ),
            ));
        }
        Ok(LabeledTruth {
            change_points,
            segments,
        })
    }
}

pub fn write_truth(path: &Path, truth: &LabeledTruth) -> Result<()> {
    write_file(path, &truth.to_text())
}

pub fn read_truth(path: &Path) -> Result<LabeledTruth> {
    LabeledTruth::parse(path, &read_to_string(path)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentRecord {
    pub start: usize,
    pub end: usize,
    pub num_communities: usize,
    pub communities: BTreeMap<String, usize>,
}

/// Serialized detection output. Times are 1-based; `end` is inclusive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultFile {
    pub horizon: usize,
    pub seed: u64,
    pub config: SearchConfig,
    pub change_points: Vec<usize>,
    pub mdl: f64,
    pub segments: Vec<SegmentRecord>,
    pub evaluations: usize,
    pub warnings: Vec<String>,
    pub trace: Vec<TraceEntry>,
}

impl ResultFile {
    pub fn new(seq: &GraphSequence, result: &DetectionResult, seed: u64, config: SearchConfig) -> Self {
        let segments = segment_views(seq.len(), &result.change_points)
            .into_iter()
            .zip(result.segmentation.assignments())
            .map(|(view, assign)| SegmentRecord {
                start: view.start,
                end: view.end_exclusive - 1,
                num_communities: assign.num_communities(),
                communities: assign
                    .iter()
                    .map(|(v, k)| (seq.label(v).to_owned(), k))
                    .collect(),
            })
            .collect();
        ResultFile {
            horizon: seq.len(),
            seed,
            config,
            change_points: result.change_points.clone(),
            mdl: result.mdl_value,
            segments,
            evaluations: result.evaluations,
            warnings: result.warnings.clone(),
            trace: result.trace.clone(),
        }
    }

    /// Rebuilds the fitted segmentation against the sequence it came from.
    pub fn segmentation(&self, seq: &GraphSequence) -> Result<Segmentation> {
        if self.horizon != seq.len() {
            return Err(Error::InvalidSegmentation(format!(
                "result covers {} snapshots, sequence has {}",
                self.horizon,
                seq.len()
            )));
        }
        let index = seq.label_index();
        let assignments = self
            .segments
            .iter()
            .map(|s| {
                let pairs = s
                    .communities
                    .iter()
                    .map(|(label, &k)| {
                        index
                            .get(label.as_str())
                            .map(|&v| (v, k))
                            .ok_or_else(|| Error::InvalidSegmentation(format!("unknown node {label:?}")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                CommunityAssignment::from_pairs(pairs)
            })
            .collect::<Result<Vec<_>>>()?;
        Segmentation::fit(seq, self.change_points.clone(), assignments, &self.config.mdl)
    }

    pub fn labeled_partitions(&self) -> Vec<BTreeMap<String, usize>> {
        self.segments.iter().map(|s| s.communities.clone()).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}

pub fn write_result(path: &Path, result: &ResultFile) -> Result<()> {
    write_file(path, &result.to_json()?)
}

pub fn read_result(path: &Path) -> Result<ResultFile> {
    Ok(serde_json::from_str(&read_to_string(path)?)?)
}

pub fn write_text(path: &Path, contents: &str) -> Result<()> {
    write_file(path, contents)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sectioned_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let seq = GraphSequence::from_edge_lists(&[
            vec![("a", "b"), ("b", "c")],
            vec![],
            vec![("c", "d")],
        ])
        .unwrap();
        let path = dir.path().join("seq.tsv");
        write_sequence_sectioned(&seq, &path).unwrap();
        let back = read_sequence(&path).unwrap();
        assert_eq!(back, seq);
    }

    #[test]
    fn directory_round_trip_sorts_by_name() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("t010.tsv"), "x\ty\n").unwrap();
        fs::write(dir.path().join("t002.tsv"), "# comment\n\na\tb\n").unwrap();
        let seq = read_sequence(dir.path()).unwrap();
        assert_eq!(seq.len(), 2);
        assert_eq!(seq.label(0), "a");
        assert_eq!(seq.snapshot(2).edges(), &[(2, 3)]);

        let out = dir.path().join("copy");
        write_sequence_dir(&seq, &out).unwrap();
        assert_eq!(read_sequence(&out).unwrap(), seq);
    }

    #[test]
    fn malformed_lines_report_their_position() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.tsv");
        fs::write(&path, "--t 1\na\tb\na b\n").unwrap();
        match read_sequence(&path) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        fs::write(&path, "a\ta\n").unwrap();
        assert!(matches!(read_sequence(&path), Err(Error::SelfLoop(_))));
    }

    #[test]
    fn truth_text_round_trip() {
        let truth = LabeledTruth {
            change_points: vec![3],
            segments: vec![
                [("a".to_owned(), 1), ("b".to_owned(), 2)].into_iter().collect(),
                [("a".to_owned(), 1)].into_iter().collect(),
            ],
        };
        let text = truth.to_text();
        assert_eq!(text, "tau: 3\nsegment 1: a=1 b=2\nsegment 2: a=1\n");
        assert_eq!(LabeledTruth::parse(Path::new("g.txt"), &text).unwrap(), truth);

        let empty = LabeledTruth {
            change_points: vec![],
            segments: vec![BTreeMap::new()],
        };
        assert_eq!(empty.to_text(), "tau:\nsegment 1:\n");
        assert_eq!(LabeledTruth::parse(Path::new("g.txt"), &empty.to_text()).unwrap(), empty);
    }

    #[test]
    fn truth_with_wrong_segment_count_is_rejected() {
        let err = LabeledTruth::parse(Path::new("g.txt"), "tau: 4 9\nsegment 1: a=1\n").unwrap_err();
        assert!(matches!(err, Error::Parse { .. }));
    }
}
