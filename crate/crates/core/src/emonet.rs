//! Post-level emotion co-occurrence matrix and network, with GraphML, DOT,
//! edge-list and matrix CSV writers.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::Path;
use std::str::FromStr;

use crate::annotation::{AnnotatedPost, EmotionPolicy};
use crate::emotion::{EmotionLabel, SentimentGroup, SentimentMap, UnknownLabel, EMOTION_COUNT};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum CountMode {
    /// A post adds 1 to every pair of its distinct emotions.
    #[default]
    Distinct,
    /// A post adds min(occurrences of a, occurrences of b) to pair {a, b}.
    Multiset,
}

impl FromStr for CountMode {
    type Err = UnknownLabel;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "distinct" => Ok(CountMode::Distinct),
            "multiset" => Ok(CountMode::Multiset),
            _ => Err(UnknownLabel(s.to_string())),
        }
    }
}

/// Symmetric emotion x emotion counts in canonical label order; the diagonal
/// stays zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CooccurrenceMatrix {
    counts: [[u64; EMOTION_COUNT]; EMOTION_COUNT],
    pub post_count: u64,
}

impl Default for CooccurrenceMatrix {
    fn default() -> Self {
        CooccurrenceMatrix {
            counts: [[0; EMOTION_COUNT]; EMOTION_COUNT],
            post_count: 0,
        }
    }
}

impl CooccurrenceMatrix {
    pub fn get(&self, a: EmotionLabel, b: EmotionLabel) -> u64 {
        self.counts[a.index()][b.index()]
    }

    pub fn rows(&self) -> &[[u64; EMOTION_COUNT]; EMOTION_COUNT] {
        &self.counts
    }

    fn add(&mut self, a: EmotionLabel, b: EmotionLabel, w: u64) {
        debug_assert_ne!(a, b);
        self.counts[a.index()][b.index()] += w;
        self.counts[b.index()][a.index()] += w;
    }

    /// Sum of the strict upper triangle.
    pub fn upper_sum(&self) -> u64 {
        (0..EMOTION_COUNT)
            .flat_map(|i| (i + 1..EMOTION_COUNT).map(move |j| (i, j)))
            .map(|(i, j)| self.counts[i][j])
            .sum()
    }

    pub fn merge(&mut self, other: &CooccurrenceMatrix) {
        for (row, other_row) in self.counts.iter_mut().zip(other.counts.iter()) {
            for (c, o) in row.iter_mut().zip(other_row) {
                *c += o;
            }
        }
        self.post_count += other.post_count;
    }
}

pub fn build_cooccurrence(
    posts: &[AnnotatedPost],
    policy: &EmotionPolicy,
    mode: CountMode,
) -> CooccurrenceMatrix {
    let mut matrix = CooccurrenceMatrix {
        post_count: posts.len() as u64,
        ..Default::default()
    };
    for post in posts {
        match mode {
            CountMode::Distinct => {
                let set: Vec<_> = post.distinct_emotions(policy).iter().collect();
                for (i, &a) in set.iter().enumerate() {
                    for &b in &set[i + 1..] {
                        matrix.add(a, b, 1);
                    }
                }
            }
            CountMode::Multiset => {
                let counts = post.occurrence_counts(policy);
                for i in 0..EMOTION_COUNT {
                    for j in i + 1..EMOTION_COUNT {
                        let w = counts[i].min(counts[j]);
                        if w > 0 {
                            matrix.add(EmotionLabel::ALL[i], EmotionLabel::ALL[j], w);
                        }
                    }
                }
            }
        }
    }
    matrix
}

/// Per-emotion totals: sentence occurrences and number of posts containing
/// the emotion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeStats {
    pub occurrence_count: [u64; EMOTION_COUNT],
    pub post_presence: [u64; EMOTION_COUNT],
}

impl Default for NodeStats {
    fn default() -> Self {
        NodeStats {
            occurrence_count: [0; EMOTION_COUNT],
            post_presence: [0; EMOTION_COUNT],
        }
    }
}

pub fn node_stats(posts: &[AnnotatedPost], policy: &EmotionPolicy) -> NodeStats {
    let mut stats = NodeStats::default();
    for post in posts {
        for (total, c) in stats
            .occurrence_count
            .iter_mut()
            .zip(post.occurrence_counts(policy))
        {
            *total += c;
        }
        for e in post.distinct_emotions(policy).iter() {
            stats.post_presence[e.index()] += 1;
        }
    }
    stats
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub emotion: EmotionLabel,
    pub occurrence_count: u64,
    pub post_presence: u64,
    pub sentiment: SentimentGroup,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    /// `source < target` in canonical order.
    pub source: EmotionLabel,
    pub target: EmotionLabel,
    pub weight: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EmotionNetwork {
    pub nodes: Vec<Node>,
    pub edges: Vec<Edge>,
}

impl EmotionNetwork {
    /// Sum of incident edge weights.
    pub fn weighted_degree(&self, emotion: EmotionLabel) -> u64 {
        self.edges
            .iter()
            .filter(|e| e.source == emotion || e.target == emotion)
            .map(|e| e.weight)
            .sum()
    }

    pub fn node(&self, emotion: EmotionLabel) -> Option<&Node> {
        self.nodes.iter().find(|n| n.emotion == emotion)
    }
}

pub fn matrix_to_network(
    matrix: &CooccurrenceMatrix,
    stats: &NodeStats,
    sentiment: &SentimentMap,
) -> EmotionNetwork {
    let mut edges = Vec::new();
    for (i, &source) in EmotionLabel::ALL.iter().enumerate() {
        for &target in &EmotionLabel::ALL[i + 1..] {
            let weight = matrix.get(source, target);
            if weight > 0 {
                edges.push(Edge {
                    source,
                    target,
                    weight,
                });
            }
        }
    }
    let nodes = EmotionLabel::ALL
        .iter()
        .filter(|&&e| {
            stats.occurrence_count[e.index()] > 0
                || edges
                    .iter()
                    .any(|edge| edge.source == e || edge.target == e)
        })
        .map(|&e| Node {
            emotion: e,
            occurrence_count: stats.occurrence_count[e.index()],
            post_presence: stats.post_presence[e.index()],
            sentiment: sentiment.group(e),
        })
        .collect();
    EmotionNetwork { nodes, edges }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NetworkFormat {
    GraphMl,
    Dot,
    EdgeCsv,
}

impl FromStr for NetworkFormat {
    type Err = UnknownLabel;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "graphml" => Ok(NetworkFormat::GraphMl),
            "dot" => Ok(NetworkFormat::Dot),
            "edge_csv" => Ok(NetworkFormat::EdgeCsv),
            _ => Err(UnknownLabel(s.to_string())),
        }
    }
}

pub fn render_network(network: &EmotionNetwork, format: NetworkFormat) -> String {
    match format {
        NetworkFormat::GraphMl => render_graphml(network),
        NetworkFormat::Dot => render_dot(network),
        NetworkFormat::EdgeCsv => render_edge_csv(network),
    }
}

pub fn export_network(network: &EmotionNetwork, format: NetworkFormat, path: &Path) -> Result<()> {
    fs::write(path, render_network(network, format)).map_err(|e| Error::io(path, e))
}

fn render_graphml(network: &EmotionNetwork) -> String {
    let mut s = String::new();
    s.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    s.push_str("<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n");
    s.push_str("  <key id=\"occurrence_count\" for=\"node\" attr.name=\"occurrence_count\" attr.type=\"long\"/>\n");
    s.push_str("  <key id=\"post_presence\" for=\"node\" attr.name=\"post_presence\" attr.type=\"long\"/>\n");
    s.push_str(
        "  <key id=\"sentiment\" for=\"node\" attr.name=\"sentiment\" attr.type=\"string\"/>\n",
    );
    s.push_str("  <key id=\"weight\" for=\"edge\" attr.name=\"weight\" attr.type=\"long\"/>\n");
    s.push_str("  <graph id=\"emotions\" edgedefault=\"undirected\">\n");
    for n in &network.nodes {
        let _ = writeln!(s, "    <node id=\"{}\">", n.emotion);
        let _ = writeln!(
            s,
            "      <data key=\"occurrence_count\">{}</data>",
            n.occurrence_count
        );
        let _ = writeln!(
            s,
            "      <data key=\"post_presence\">{}</data>",
            n.post_presence
        );
        let _ = writeln!(
            s,
            "      <data key=\"sentiment\">{}</data>",
            n.sentiment.name()
        );
        s.push_str("    </node>\n");
    }
    for (i, e) in network.edges.iter().enumerate() {
        let _ = writeln!(
            s,
            "    <edge id=\"e{i}\" source=\"{}\" target=\"{}\">",
            e.source, e.target
        );
        let _ = writeln!(s, "      <data key=\"weight\">{}</data>", e.weight);
        s.push_str("    </edge>\n");
    }
    s.push_str("  </graph>\n</graphml>\n");
    s
}

fn render_dot(network: &EmotionNetwork) -> String {
    let mut s = String::from("graph emotions {\n");
    for n in &network.nodes {
        let _ = writeln!(
            s,
            "  \"{}\" [occurrence_count={}, post_presence={}, sentiment=\"{}\"];",
            n.emotion,
            n.occurrence_count,
            n.post_presence,
            n.sentiment.name()
        );
    }
    for e in &network.edges {
        let _ = writeln!(
            s,
            "  \"{}\" -- \"{}\" [weight={}];",
            e.source, e.target, e.weight
        );
    }
    s.push_str("}\n");
    s
}

fn render_edge_csv(network: &EmotionNetwork) -> String {
    let mut s = String::from("source,target,weight\n");
    for e in &network.edges {
        let _ = writeln!(s, "{},{},{}", e.source, e.target, e.weight);
    }
    s
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum MatrixOrder {
    #[default]
    Canonical,
    /// Negative block, then positive, then neutral.
    Sentiment,
}

impl FromStr for MatrixOrder {
    type Err = UnknownLabel;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "canonical" => Ok(MatrixOrder::Canonical),
            "sentiment" => Ok(MatrixOrder::Sentiment),
            _ => Err(UnknownLabel(s.to_string())),
        }
    }
}

pub fn write_matrix_csv<W: Write>(
    mut out: W,
    matrix: &CooccurrenceMatrix,
    order: MatrixOrder,
    sentiment: &SentimentMap,
) -> io::Result<()> {
    let labels = match order {
        MatrixOrder::Canonical => EmotionLabel::ALL.to_vec(),
        MatrixOrder::Sentiment => sentiment.grouped_order(),
    };
    write!(out, "emotion")?;
    for e in &labels {
        write!(out, ",{e}")?;
    }
    writeln!(out)?;
    for &a in &labels {
        write!(out, "{a}")?;
        for &b in &labels {
            write!(out, ",{}", matrix.get(a, b))?;
        }
        writeln!(out)?;
    }
    out.flush()
}
