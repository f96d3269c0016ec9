//! Emotion-pair features: pair extraction, the support-filtered pair
//! vocabulary, and the sparse binary design matrix used by the regression.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::io::{self, Write};

use crate::annotation::{AnnotatedPost, EmotionPolicy};
use crate::emotion::EmotionLabel;
use crate::error::{Error, Result};

/// A pair of emotions. Unordered pairs keep `first < second` canonically;
/// ordered pairs mean `first` appeared in an earlier sentence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EmotionPair {
    pub first: EmotionLabel,
    pub second: EmotionLabel,
}

impl EmotionPair {
    /// Canonical unordered pair. Panics if `a == b`.
    pub fn unordered(a: EmotionLabel, b: EmotionLabel) -> Self {
        assert_ne!(a, b, "a pair needs two distinct emotions");
        EmotionPair {
            first: a.min(b),
            second: a.max(b),
        }
    }

    pub fn ordered(first: EmotionLabel, second: EmotionLabel) -> Self {
        assert_ne!(first, second, "a pair needs two distinct emotions");
        EmotionPair { first, second }
    }
}

impl fmt::Display for EmotionPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.first, self.second)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum PairMode {
    #[default]
    Unordered,
    /// Direction from first appearance in the post.
    Ordered,
}

/// All 2-subsets of the post's distinct emotions, sorted.
pub fn extract_pairs(
    post: &AnnotatedPost,
    policy: &EmotionPolicy,
    mode: PairMode,
) -> BTreeSet<EmotionPair> {
    let mut pairs = BTreeSet::new();
    match mode {
        PairMode::Unordered => {
            let set: Vec<_> = post.distinct_emotions(policy).iter().collect();
            for (i, &a) in set.iter().enumerate() {
                for &b in &set[i + 1..] {
                    pairs.insert(EmotionPair::unordered(a, b));
                }
            }
        }
        PairMode::Ordered => {
            let first = post.first_positions(policy);
            let present: Vec<(EmotionLabel, usize)> = EmotionLabel::ALL
                .iter()
                .filter_map(|&e| first[e.index()].map(|pos| (e, pos)))
                .collect();
            for &(a, pa) in &present {
                for &(b, pb) in &present {
                    if pa < pb {
                        pairs.insert(EmotionPair::ordered(a, b));
                    }
                }
            }
        }
    }
    pairs
}

/// `max(25, ceil(0.1% of posts))`.
pub fn default_min_support(n_posts: usize) -> usize {
    25.max(n_posts.div_ceil(1000))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairVocabulary {
    /// Ordered by support descending, then pair order.
    pub pairs: Vec<EmotionPair>,
    pub support: Vec<u64>,
    pub min_support: usize,
    pub mode: PairMode,
}

impl PairVocabulary {
    /// Vocabulary over a fixed list of pairs, in the given order, with
    /// supports measured on `posts`.
    pub fn fixed(
        pairs: Vec<EmotionPair>,
        posts: &[AnnotatedPost],
        policy: &EmotionPolicy,
        mode: PairMode,
    ) -> Self {
        let index: HashMap<EmotionPair, usize> =
            pairs.iter().enumerate().map(|(i, &p)| (p, i)).collect();
        let mut support = vec![0u64; pairs.len()];
        for post in posts {
            for pair in extract_pairs(post, policy, mode) {
                if let Some(&j) = index.get(&pair) {
                    support[j] += 1;
                }
            }
        }
        PairVocabulary {
            pairs,
            support,
            min_support: 0,
            mode,
        }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn position(&self, pair: &EmotionPair) -> Option<usize> {
        self.pairs.iter().position(|p| p == pair)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "col,emotion_a,emotion_b,support")?;
        for (j, (pair, support)) in self.pairs.iter().zip(&self.support).enumerate() {
            writeln!(out, "{j},{},{},{support}", pair.first, pair.second)?;
        }
        out.flush()
    }
}

pub fn build_vocabulary(
    posts: &[AnnotatedPost],
    min_support: usize,
    policy: &EmotionPolicy,
    mode: PairMode,
) -> Result<PairVocabulary> {
    if min_support == 0 {
        return Err(Error::InvalidConfig(
            "min_support must be at least 1".into(),
        ));
    }
    let mut support: BTreeMap<EmotionPair, u64> = BTreeMap::new();
    for post in posts {
        for pair in extract_pairs(post, policy, mode) {
            *support.entry(pair).or_default() += 1;
        }
    }
    let mut kept: Vec<(EmotionPair, u64)> = support
        .into_iter()
        .filter(|&(_, s)| s >= min_support as u64)
        .collect();
    if kept.is_empty() {
        return Err(Error::EmptyVocabulary { min_support });
    }
    kept.sort_by_key(|&(pair, s)| (std::cmp::Reverse(s), pair));
    let (pairs, support) = kept.into_iter().unzip();
    Ok(PairVocabulary {
        pairs,
        support,
        min_support,
        mode,
    })
}

/// Sparse binary matrix: one row of active feature columns per post, plus
/// the binary outcome. The intercept is implicit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DesignMatrix {
    rows: Vec<Vec<u32>>,
    outcome: Vec<u8>,
    names: Vec<String>,
}

impl DesignMatrix {
    /// `rows[i]` lists the active feature columns of row `i`.
    pub fn new(mut rows: Vec<Vec<u32>>, outcome: Vec<u8>, names: Vec<String>) -> Result<Self> {
        if rows.len() != outcome.len() {
            return Err(Error::InvalidConfig(format!(
                "{} rows but {} outcomes",
                rows.len(),
                outcome.len()
            )));
        }
        if let Some(bad) = outcome.iter().find(|&&y| y > 1) {
            return Err(Error::InvalidConfig(format!("outcome {bad} is not binary")));
        }
        for row in &mut rows {
            row.sort_unstable();
            row.dedup();
            if let Some(&last) = row.last() {
                if last as usize >= names.len() {
                    return Err(Error::InvalidConfig(format!(
                        "column {last} out of range for {} features",
                        names.len()
                    )));
                }
            }
        }
        Ok(DesignMatrix {
            rows,
            outcome,
            names,
        })
    }

    /// Builds from dense 0/1 rows; feature columns are named `x1, x2, ..`.
    pub fn from_dense(dense: &[Vec<u8>], outcome: Vec<u8>) -> Result<Self> {
        let width = dense.first().map_or(0, Vec::len);
        let rows = dense
            .iter()
            .map(|r| {
                r.iter()
                    .enumerate()
                    .filter(|&(_, &v)| v != 0)
                    .map(|(j, _)| j as u32)
                    .collect()
            })
            .collect();
        let names = (1..=width).map(|j| format!("x{j}")).collect();
        DesignMatrix::new(rows, outcome, names)
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_features(&self) -> usize {
        self.names.len()
    }

    pub fn row(&self, i: usize) -> &[u32] {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[Vec<u32>] {
        &self.rows
    }

    pub fn outcome(&self) -> &[u8] {
        &self.outcome
    }

    pub fn feature_names(&self) -> &[String] {
        &self.names
    }

    pub fn column_sums(&self) -> Vec<u64> {
        let mut sums = vec![0u64; self.n_features()];
        for row in &self.rows {
            for &j in row {
                sums[j as usize] += 1;
            }
        }
        sums
    }

    pub fn get(&self, i: usize, j: usize) -> u8 {
        u8::from(self.rows[i].binary_search(&(j as u32)).is_ok())
    }

    /// Single-feature matrix over column `j` (for marginal fits).
    pub fn column_subset(&self, j: usize) -> DesignMatrix {
        let rows = self
            .rows
            .iter()
            .map(|r| {
                if r.binary_search(&(j as u32)).is_ok() {
                    vec![0]
                } else {
                    Vec::new()
                }
            })
            .collect();
        DesignMatrix {
            rows,
            outcome: self.outcome.clone(),
            names: vec![self.names[j].clone()],
        }
    }

    /// Row-permuted copy: row `i` of the result is row `order[i]` of `self`.
    pub fn permute_rows(&self, order: &[usize]) -> DesignMatrix {
        DesignMatrix {
            rows: order.iter().map(|&i| self.rows[i].clone()).collect(),
            outcome: order.iter().map(|&i| self.outcome[i]).collect(),
            names: self.names.clone(),
        }
    }

    /// `row,col,value` triplets for the nonzero entries.
    pub fn write_triplets<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "row,col,value")?;
        for (i, row) in self.rows.iter().enumerate() {
            for j in row {
                writeln!(out, "{i},{j},1")?;
            }
        }
        out.flush()
    }

    pub fn write_outcome<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "row,y")?;
        for (i, y) in self.outcome.iter().enumerate() {
            writeln!(out, "{i},{y}")?;
        }
        out.flush()
    }
}

pub fn build_design_matrix(
    posts: &[AnnotatedPost],
    vocabulary: &PairVocabulary,
    policy: &EmotionPolicy,
) -> Result<DesignMatrix> {
    if vocabulary.is_empty() {
        return Err(Error::EmptyVocabulary {
            min_support: vocabulary.min_support,
        });
    }
    let index: HashMap<EmotionPair, u32> = vocabulary
        .pairs
        .iter()
        .enumerate()
        .map(|(j, &p)| (p, j as u32))
        .collect();
    let rows = posts
        .iter()
        .map(|post| {
            extract_pairs(post, policy, vocabulary.mode)
                .iter()
                .filter_map(|p| index.get(p).copied())
                .collect()
        })
        .collect();
    let outcome = posts.iter().map(|p| p.outcome).collect();
    let names = vocabulary.pairs.iter().map(ToString::to_string).collect();
    DesignMatrix::new(rows, outcome, names)
}
