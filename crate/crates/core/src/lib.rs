//! Emotion co-occurrence analytics for labeled social-media corpora.
//!
//! The pipeline runs from raw post dumps ([`corpus`]) through sentence and
//! post labels ([`annotation`]) to co-occurrence networks ([`emonet`]),
//! frequency distributions ([`diststats`]), emotion-pair design matrices
//! ([`pairfeat`]) and a logistic regression with Wald inference ([`logit`]).
//! [`simulate`] generates labeled corpora from a planted pair model.

pub mod annotation;
pub mod corpus;
pub mod diststats;
pub mod emonet;
pub mod emotion;
pub mod error;
mod linalg;
pub mod logit;
pub mod pairfeat;
pub mod simulate;

pub use annotation::{AnnotatedPost, EmotionPolicy};
pub use emotion::{
    DepressionClass, DepressionLabel, EmotionLabel, EmotionSet, SentimentGroup, SentimentMap,
};
pub use error::{Error, Result};
