#![allow(dead_code)]

use emopair::annotation::SentenceEmotion;
use emopair::{AnnotatedPost, DepressionClass, DepressionLabel, EmotionLabel};
use rand_xoshiro::rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

pub struct Rng(Xoshiro256PlusPlus);

impl Rng {
    pub fn new(seed: u64) -> Self {
        Rng(Xoshiro256PlusPlus::seed_from_u64(seed))
    }

    pub fn below(&mut self, n: usize) -> usize {
        (self.0.next_u64() % n as u64) as usize
    }

    pub fn uniform(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }
}

pub fn post(id: &str, emotions: &[EmotionLabel], outcome: u8) -> AnnotatedPost {
    AnnotatedPost {
        post_id: id.to_string(),
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
            class: if outcome == 1 {
                DepressionClass::Severe
            } else {
                DepressionClass::NotDepressed
            },
            confidence: 1.0,
        },
        outcome,
    }
}

/// Random corpus: up to `max_posts` posts of up to `max_sentences`
/// sentences drawn from all 28 labels (neutral included).
pub fn random_corpus(rng: &mut Rng, max_posts: usize, max_sentences: usize) -> Vec<AnnotatedPost> {
    let n = 1 + rng.below(max_posts);
    (0..n)
        .map(|i| {
            let k = rng.below(max_sentences + 1);
            let emotions: Vec<_> = (0..k)
                .map(|_| EmotionLabel::ALL[rng.below(EmotionLabel::ALL.len())])
                .collect();
            post(&format!("r{i}"), &emotions, (rng.below(2)) as u8)
        })
        .collect()
}

pub fn fixture(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}
