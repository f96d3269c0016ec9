//! Synthetic labeled corpora drawn from a planted logistic model over
//! emotion-pair features.
//!
//! Generator: Xoshiro256++ seeded through `seed_from_u64` (SplitMix64
//! expansion of the 64-bit seed). Every draw uses whole `u64` outputs:
//!
//! - uniform in [0, 1): `(x >> 11) * 2^-53`;
//! - Bernoulli(p): uniform `< p`;
//! - index below `n`: high 64 bits of `x * n` (128-bit product).
//!
//! Per post, emotions are visited in canonical order and each is included
//! with its probability; the draw repeats until the set size lies in
//! `[min_emotions, max_emotions]`. The sentence order is a Fisher-Yates
//! shuffle (from the last position down), then one uniform draw decides
//! the outcome.

use serde::{Deserialize, Serialize};

use rand_xoshiro::rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::annotation::{AnnotatedPost, EmotionPolicy, SentenceEmotion};
use crate::corpus::RawPost;
use crate::emotion::{DepressionClass, DepressionLabel, EmotionLabel, EmotionSet};
use crate::error::{Error, Result};
use crate::pairfeat::{EmotionPair, PairMode, PairVocabulary};

const MAX_SET_DRAWS: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedPair {
    pub emotions: [EmotionLabel; 2],
    pub coefficient: f64,
}

impl PlantedPair {
    pub fn pair(&self) -> EmotionPair {
        EmotionPair::unordered(self.emotions[0], self.emotions[1])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Inclusion {
    pub emotion: EmotionLabel,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedModel {
    pub seed: u64,
    pub intercept: f64,
    pub pairs: Vec<PlantedPair>,
    /// Emotions not listed are never drawn.
    pub inclusion: Vec<Inclusion>,
    pub min_emotions: usize,
    pub max_emotions: usize,
}

impl PlantedModel {
    /// Twelve pairs over eight emotions, six with nonzero effects.
    pub fn example(seed: u64) -> Self {
        use EmotionLabel::*;
        let planted = [
            ([Amusement, Grief], 0.9632),
            ([Caring, Curiosity], -0.9),
            ([Optimism, Sadness], -0.45),
            ([Anger, Sadness], 0.5),
            ([Approval, Caring], -0.6),
            ([Curiosity, Grief], 0.7),
            ([Amusement, Anger], 0.0),
            ([Anger, Approval], 0.0),
            ([Approval, Optimism], 0.0),
            ([Curiosity, Sadness], 0.0),
            ([Grief, Sadness], 0.0),
            ([Amusement, Optimism], 0.0),
        ];
        let emotions = [
            Amusement, Anger, Approval, Caring, Curiosity, Grief, Optimism, Sadness,
        ];
        PlantedModel {
            seed,
            intercept: -0.5,
            pairs: planted
                .iter()
                .map(|&(emotions, coefficient)| PlantedPair {
                    emotions,
                    coefficient,
                })
                .collect(),
            inclusion: emotions
                .iter()
                .map(|&emotion| Inclusion {
                    emotion,
                    probability: 0.35,
                })
                .collect(),
            min_emotions: 1,
            max_emotions: 6,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        let mut listed = EmotionSet::new();
        for inc in &self.inclusion {
            if !(0.0..=1.0).contains(&inc.probability) {
                return bad(format!(
                    "inclusion probability of {} outside [0, 1]",
                    inc.emotion
                ));
            }
            if !listed.insert(inc.emotion) {
                return bad(format!("{} listed twice", inc.emotion));
            }
        }
        let mut seen = std::collections::HashSet::new();
        for p in &self.pairs {
            if p.emotions[0] == p.emotions[1] {
                return bad(format!(
                    "pair {}-{} repeats an emotion",
                    p.emotions[0], p.emotions[1]
                ));
            }
            if !seen.insert(p.pair()) {
                return bad(format!("pair {} listed twice", p.pair()));
            }
            if !p.coefficient.is_finite() {
                return bad(format!("coefficient of {} is not finite", p.pair()));
            }
            for e in p.emotions {
                if self.probability(e) <= 0.0 {
                    return bad(format!("pair {} uses {e}, which is never drawn", p.pair()));
                }
            }
        }
        let possible = self
            .inclusion
            .iter()
            .filter(|i| i.probability > 0.0)
            .count();
        let certain = self
            .inclusion
            .iter()
            .filter(|i| i.probability >= 1.0)
            .count();
        if self.min_emotions > self.max_emotions
            || self.min_emotions > possible
            || certain > self.max_emotions
        {
            return bad(format!(
                "emotions per post range [{}, {}] is unreachable",
                self.min_emotions, self.max_emotions
            ));
        }
        if !self.intercept.is_finite() {
            return bad("intercept is not finite".into());
        }
        Ok(())
    }

    pub fn probability(&self, emotion: EmotionLabel) -> f64 {
        self.inclusion
            .iter()
            .find(|i| i.emotion == emotion)
            .map_or(0.0, |i| i.probability)
    }

    /// Intercept followed by the pair coefficients in model order.
    pub fn coefficients(&self) -> Vec<f64> {
        std::iter::once(self.intercept)
            .chain(self.pairs.iter().map(|p| p.coefficient))
            .collect()
    }

    /// The planted pairs as a regression vocabulary, supports measured on
    /// `posts`.
    pub fn vocabulary(&self, posts: &[AnnotatedPost]) -> PairVocabulary {
        PairVocabulary::fixed(
            self.pairs.iter().map(PlantedPair::pair).collect(),
            posts,
            &EmotionPolicy::default(),
            PairMode::Unordered,
        )
    }

    pub fn linear_predictor(&self, emotions: &EmotionSet) -> f64 {
        self.intercept
            + self
                .pairs
                .iter()
                .filter(|p| emotions.contains(p.emotions[0]) && emotions.contains(p.emotions[1]))
                .map(|p| p.coefficient)
                .sum::<f64>()
    }
}

struct Draws(Xoshiro256PlusPlus);

impl Draws {
    fn uniform(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    fn below(&mut self, n: usize) -> usize {
        ((self.0.next_u64() as u128 * n as u128) >> 64) as usize
    }
}

pub fn generate_corpus(model: &PlantedModel, n_posts: usize) -> Result<Vec<AnnotatedPost>> {
    if n_posts == 0 {
        return Err(Error::InvalidConfig("n_posts must be at least 1".into()));
    }
    model.validate()?;
    let mut rng = Draws(Xoshiro256PlusPlus::seed_from_u64(model.seed));
    let width = (n_posts - 1).to_string().len().max(6);
    let mut posts = Vec::with_capacity(n_posts);
    for i in 0..n_posts {
        let set = draw_set(model, &mut rng)?;
        let mut order: Vec<EmotionLabel> = set.iter().collect();
        for k in (1..order.len()).rev() {
            order.swap(k, rng.below(k + 1));
        }
        let eta = model.linear_predictor(&set);
        let outcome = u8::from(rng.uniform() < 1.0 / (1.0 + (-eta).exp()));
        let class = if outcome == 1 {
            DepressionClass::Severe
        } else {
            DepressionClass::NotDepressed
        };
        posts.push(AnnotatedPost {
            post_id: format!("sim{i:0width$}"),
            sentence_emotions: order
                .into_iter()
                .enumerate()
                .map(|(index, emotion)| SentenceEmotion {
                    index,
                    emotion,
                    confidence: 1.0,
                })
                .collect(),
            depression: DepressionLabel {
                class,
                confidence: 1.0,
            },
            outcome,
        });
    }
    Ok(posts)
}

fn draw_set(model: &PlantedModel, rng: &mut Draws) -> Result<EmotionSet> {
    for _ in 0..MAX_SET_DRAWS {
        let mut set = EmotionSet::new();
        for &e in &EmotionLabel::ALL {
            let p = model.probability(e);
            if p > 0.0 && rng.uniform() < p {
                set.insert(e);
            }
        }
        if (model.min_emotions..=model.max_emotions).contains(&set.len()) {
            return Ok(set);
        }
    }
    Err(Error::InvalidConfig(format!(
        "no emotion set of size [{}, {}] after {MAX_SET_DRAWS} draws",
        model.min_emotions, model.max_emotions
    )))
}

/// Raw posts whose body is one sentence per label name, so keyword
/// annotation with label-name rules reproduces the sentence labels.
pub fn to_raw_posts(posts: &[AnnotatedPost], base_time: i64) -> Vec<RawPost> {
    posts
        .iter()
        .enumerate()
        .map(|(i, p)| RawPost {
            id: p.post_id.clone(),
            created_utc: base_time + i as i64,
            title: String::new(),
            body: p
                .sentence_emotions
                .iter()
                .map(|s| format!("{}.", s.emotion))
                .collect::<Vec<_>>()
                .join(" "),
            source: "synthetic".into(),
        })
        .collect()
}
