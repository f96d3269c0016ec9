//! Ranked emotion frequencies with CDF/CCDF, and the distribution of
//! emotion pairs per post.

use std::collections::BTreeMap;
use std::io::{self, Write};
use std::str::FromStr;

use crate::annotation::{AnnotatedPost, EmotionPolicy};
use crate::emotion::{EmotionLabel, UnknownLabel, EMOTION_COUNT};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum FrequencyUnit {
    /// Every labeled sentence counts once.
    #[default]
    Sentence,
    /// Each emotion counts once per post containing it.
    PostPresence,
}

impl FromStr for FrequencyUnit {
    type Err = UnknownLabel;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "sentence" => Ok(FrequencyUnit::Sentence),
            "post_presence" => Ok(FrequencyUnit::PostPresence),
            _ => Err(UnknownLabel(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankedEmotion {
    pub emotion: EmotionLabel,
    pub count: u64,
    pub share: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistributionSummary {
    /// Emotions with nonzero count, by count descending then canonical order.
    pub ranked: Vec<RankedEmotion>,
    pub cdf: Vec<f64>,
    /// `1 - cdf` at the same rank.
    pub ccdf: Vec<f64>,
    pub total: u64,
}

impl DistributionSummary {
    pub fn from_counts(counts: &[u64; EMOTION_COUNT]) -> Result<Self> {
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return Err(Error::EmptyDistribution);
        }
        let mut order: Vec<EmotionLabel> = EmotionLabel::ALL
            .iter()
            .copied()
            .filter(|e| counts[e.index()] > 0)
            .collect();
        order.sort_by_key(|e| (std::cmp::Reverse(counts[e.index()]), *e));

        let denom = total as f64;
        let mut ranked = Vec::with_capacity(order.len());
        let mut cdf = Vec::with_capacity(order.len());
        let mut ccdf = Vec::with_capacity(order.len());
        // Cumulative shares come from integer prefix sums, so the curve is
        // exactly monotone and ends at exactly 1.
        let mut cumulative = 0u64;
        for e in order {
            let count = counts[e.index()];
            cumulative += count;
            ranked.push(RankedEmotion {
                emotion: e,
                count,
                share: count as f64 / denom,
            });
            let c = cumulative as f64 / denom;
            cdf.push(c);
            ccdf.push(1.0 - c);
        }
        Ok(DistributionSummary {
            ranked,
            cdf,
            ccdf,
            total,
        })
    }

    pub fn len(&self) -> usize {
        self.ranked.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranked.is_empty()
    }

    /// Sum of shares with Neumaier compensation.
    pub fn share_sum(&self) -> f64 {
        let mut sum = 0.0f64;
        let mut carry = 0.0f64;
        for r in &self.ranked {
            let t = sum + r.share;
            if sum.abs() >= r.share.abs() {
                carry += (sum - t) + r.share;
            } else {
                carry += (r.share - t) + sum;
            }
            sum = t;
        }
        sum + carry
    }

    pub fn write_tsv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "rank\temotion\tcount\tshare\tcdf\tccdf")?;
        for (i, r) in self.ranked.iter().enumerate() {
            writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}",
                i + 1,
                r.emotion,
                r.count,
                r.share,
                self.cdf[i],
                self.ccdf[i]
            )?;
        }
        out.flush()
    }
}

pub fn emotion_counts(
    posts: &[AnnotatedPost],
    unit: FrequencyUnit,
    policy: &EmotionPolicy,
) -> [u64; EMOTION_COUNT] {
    let mut counts = [0u64; EMOTION_COUNT];
    for post in posts {
        match unit {
            FrequencyUnit::Sentence => {
                for s in post.admitted(policy) {
                    counts[s.emotion.index()] += 1;
                }
            }
            FrequencyUnit::PostPresence => {
                for e in post.distinct_emotions(policy).iter() {
                    counts[e.index()] += 1;
                }
            }
        }
    }
    counts
}

pub fn emotion_frequency(
    posts: &[AnnotatedPost],
    unit: FrequencyUnit,
    policy: &EmotionPolicy,
) -> Result<DistributionSummary> {
    DistributionSummary::from_counts(&emotion_counts(posts, unit, policy))
}

/// Cumulative share of the `k` most frequent emotions.
pub fn top_k_share(summary: &DistributionSummary, k: usize) -> Result<f64> {
    if k == 0 || k > summary.len() {
        return Err(Error::Bounds {
            index: k,
            len: summary.len(),
        });
    }
    Ok(summary.cdf[k - 1])
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PairCountHistogram {
    /// Pairs per post, C(k, 2), to number of posts.
    pub by_pairs: BTreeMap<u64, u64>,
    /// Distinct emotions per post, k, to number of posts.
    pub by_emotions: BTreeMap<u64, u64>,
}

impl PairCountHistogram {
    pub fn post_count(&self) -> u64 {
        self.by_pairs.values().sum()
    }

    pub fn write_tsv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "pairs\tposts")?;
        for (pairs, posts) in &self.by_pairs {
            writeln!(out, "{pairs}\t{posts}")?;
        }
        out.flush()
    }
}

pub fn pairs_in(k: u64) -> u64 {
    k * k.saturating_sub(1) / 2
}

pub fn pair_count_histogram(posts: &[AnnotatedPost], policy: &EmotionPolicy) -> PairCountHistogram {
    let mut hist = PairCountHistogram::default();
    for post in posts {
        let k = post.distinct_emotions(policy).len() as u64;
        *hist.by_emotions.entry(k).or_default() += 1;
        *hist.by_pairs.entry(pairs_in(k)).or_default() += 1;
    }
    hist
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotation::SentenceEmotion;
    use crate::emotion::{DepressionClass, DepressionLabel};
    use EmotionLabel::*;

    fn counts(pairs: &[(EmotionLabel, u64)]) -> [u64; EMOTION_COUNT] {
        let mut c = [0; EMOTION_COUNT];
        for &(e, n) in pairs {
            c[e.index()] = n;
        }
        c
    }

    fn post(emotions: &[EmotionLabel]) -> AnnotatedPost {
        AnnotatedPost {
            post_id: "p".into(),
            sentence_emotions: emotions
                .iter()
                .enumerate()
                .map(|(index, &emotion)| SentenceEmotion {
                    index,
                    emotion,
                    confidence: 1.0,
                })
                .collect(),
            depression: DepressionLabel {
                class: DepressionClass::NotDepressed,
                confidence: 1.0,
            },
            outcome: 0,
        }
    }

    #[test]
    fn cdf_and_ccdf_by_hand() {
        let s =
            DistributionSummary::from_counts(&counts(&[(Joy, 5), (Fear, 3), (Love, 2)])).unwrap();
        let order: Vec<_> = s.ranked.iter().map(|r| r.emotion).collect();
        assert_eq!(order, [Joy, Fear, Love]);
        assert_eq!(s.cdf, [0.5, 0.8, 1.0]);
        for (got, want) in s.ccdf.iter().zip([0.5, 0.2, 0.0]) {
            assert!((got - want).abs() < 1e-15);
        }
        assert!((top_k_share(&s, 2).unwrap() - 0.8).abs() < 1e-15);
        assert_eq!(top_k_share(&s, 3).unwrap(), 1.0);
        assert!(matches!(
            top_k_share(&s, 4),
            Err(Error::Bounds { index: 4, len: 3 })
        ));
        assert!(matches!(top_k_share(&s, 0), Err(Error::Bounds { .. })));
    }

    #[test]
    fn single_emotion_and_ties() {
        let s = DistributionSummary::from_counts(&counts(&[(Grief, 7)])).unwrap();
        assert_eq!(s.cdf, [1.0]);
        let tie = DistributionSummary::from_counts(&counts(&[(Joy, 2), (Anger, 2)])).unwrap();
        assert_eq!(tie.ranked[0].emotion, Anger);
        assert_eq!(tie.ranked[1].emotion, Joy);
    }

    #[test]
    fn empty_distribution_is_an_error() {
        assert!(matches!(
            emotion_frequency(&[], FrequencyUnit::Sentence, &EmotionPolicy::default()),
            Err(Error::EmptyDistribution)
        ));
        let only_neutral = [post(&[Neutral, Neutral])];
        assert!(matches!(
            emotion_frequency(
                &only_neutral,
                FrequencyUnit::Sentence,
                &EmotionPolicy::default()
            ),
            Err(Error::EmptyDistribution)
        ));
    }

    #[test]
    fn units_differ_on_repeats() {
        let posts = [post(&[Anger, Anger, Joy]), post(&[Anger])];
        let policy = EmotionPolicy::default();
        let by_sentence = emotion_frequency(&posts, FrequencyUnit::Sentence, &policy).unwrap();
        assert_eq!((by_sentence.ranked[0].count, by_sentence.total), (3, 4));
        let by_post = emotion_frequency(&posts, FrequencyUnit::PostPresence, &policy).unwrap();
        assert_eq!((by_post.ranked[0].count, by_post.total), (2, 3));
    }

    #[test]
    fn pair_histogram_by_hand() {
        let posts = [
            post(&[Anger, Joy]),
            post(&[Anger, Joy, Fear]),
            post(&[Love, Pride, Grief]),
        ];
        let h = pair_count_histogram(&posts, &EmotionPolicy::default());
        assert_eq!(h.by_pairs, BTreeMap::from([(1, 1), (3, 2)]));
        assert_eq!(h.by_emotions, BTreeMap::from([(2, 1), (3, 2)]));

        let singles = [post(&[Joy]), post(&[Fear, Fear])];
        assert_eq!(
            pair_count_histogram(&singles, &EmotionPolicy::default()).by_pairs,
            BTreeMap::from([(0, 2)])
        );
        assert_eq!(pairs_in(4), 6);
    }

    #[test]
    fn tsv_output() {
        let s =
            DistributionSummary::from_counts(&counts(&[(Joy, 5), (Fear, 3), (Love, 2)])).unwrap();
        let mut buf = Vec::new();
        s.write_tsv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text.lines().next().unwrap(),
            "rank\temotion\tcount\tshare\tcdf\tccdf"
        );
        assert_eq!(text.lines().nth(1).unwrap(), "1\tjoy\t5\t0.5\t0.5\t0.5");
    }
}
