//! The GoEmotions label set, its sentiment grouping and the depression
//! severity labels produced by the post-level classifier.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

macro_rules! emotions {
    ($($variant:ident => $name:literal),+ $(,)?) => {
        /// One of the 28 GoEmotions categories.
        ///
        /// Variants are declared in canonical order, so the derived `Ord`
        /// and [`EmotionLabel::index`] agree with it.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub enum EmotionLabel {
            $($variant),+
        }

        impl EmotionLabel {
            pub const ALL: [EmotionLabel; 28] = [$(EmotionLabel::$variant),+];

            pub fn name(self) -> &'static str {
                match self {
                    $(EmotionLabel::$variant => $name),+
                }
            }
        }

        impl FromStr for EmotionLabel {
            type Err = UnknownLabel;

            fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
                match s {
                    $($name => Ok(EmotionLabel::$variant),)+
                    _ => Err(UnknownLabel(s.to_string())),
                }
            }
        }
    };
}

emotions! {
    Admiration => "admiration",
    Amusement => "amusement",
    Anger => "anger",
    Annoyance => "annoyance",
    Approval => "approval",
    Caring => "caring",
    Confusion => "confusion",
    Curiosity => "curiosity",
    Desire => "desire",
    Disappointment => "disappointment",
    Disapproval => "disapproval",
    Disgust => "disgust",
    Embarrassment => "embarrassment",
    Excitement => "excitement",
    Fear => "fear",
    Gratitude => "gratitude",
    Grief => "grief",
    Joy => "joy",
    Love => "love",
    Nervousness => "nervousness",
    Optimism => "optimism",
    Pride => "pride",
    Realization => "realization",
    Relief => "relief",
    Remorse => "remorse",
    Sadness => "sadness",
    Surprise => "surprise",
    Neutral => "neutral",
}

pub const EMOTION_COUNT: usize = EmotionLabel::ALL.len();

impl EmotionLabel {
    /// Position in canonical order.
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Option<Self> {
        Self::ALL.get(index).copied()
    }
}

impl fmt::Display for EmotionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl Serialize for EmotionLabel {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for EmotionLabel {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = <std::borrow::Cow<'de, str>>::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Set of distinct emotions, iterated in canonical order.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct EmotionSet(u32);

impl EmotionSet {
    pub fn new() -> Self {
        EmotionSet(0)
    }

    pub fn insert(&mut self, emotion: EmotionLabel) -> bool {
        let bit = 1u32 << emotion.index();
        let fresh = self.0 & bit == 0;
        self.0 |= bit;
        fresh
    }

    pub fn remove(&mut self, emotion: EmotionLabel) {
        self.0 &= !(1u32 << emotion.index());
    }

    pub fn contains(&self, emotion: EmotionLabel) -> bool {
        self.0 & (1u32 << emotion.index()) != 0
    }

    pub fn len(&self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = EmotionLabel> + '_ {
        EmotionLabel::ALL
            .iter()
            .copied()
            .filter(|&e| self.contains(e))
    }
}

impl FromIterator<EmotionLabel> for EmotionSet {
    fn from_iter<I: IntoIterator<Item = EmotionLabel>>(iter: I) -> Self {
        let mut set = EmotionSet::new();
        for e in iter {
            set.insert(e);
        }
        set
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownLabel(pub String);

impl fmt::Display for UnknownLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "unknown label {:?}", self.0)
    }
}

impl std::error::Error for UnknownLabel {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SentimentGroup {
    Negative,
    Positive,
    Neutral,
}

impl SentimentGroup {
    pub fn name(self) -> &'static str {
        match self {
            SentimentGroup::Negative => "negative",
            SentimentGroup::Positive => "positive",
            SentimentGroup::Neutral => "neutral",
        }
    }
}

impl FromStr for SentimentGroup {
    type Err = UnknownLabel;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "negative" => Ok(SentimentGroup::Negative),
            "positive" => Ok(SentimentGroup::Positive),
            "neutral" => Ok(SentimentGroup::Neutral),
            _ => Err(UnknownLabel(s.to_string())),
        }
    }
}

const DEFAULT_SENTIMENT_CSV: &str = include_str!("../data/sentiment.csv");

/// Total mapping from emotion to sentiment group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SentimentMap {
    groups: [SentimentGroup; EMOTION_COUNT],
}

impl Default for SentimentMap {
    fn default() -> Self {
        Self::parse_csv(DEFAULT_SENTIMENT_CSV).expect("bundled sentiment map is valid")
    }
}

impl SentimentMap {
    pub fn group(&self, emotion: EmotionLabel) -> SentimentGroup {
        self.groups[emotion.index()]
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_csv(&text)
    }

    /// Parses `emotion,group` rows (header optional). Every emotion must be
    /// assigned exactly once.
    pub fn parse_csv(text: &str) -> Result<Self> {
        let mut groups: [Option<SentimentGroup>; EMOTION_COUNT] = [None; EMOTION_COUNT];
        for (n, raw) in text.lines().enumerate() {
            let line = n + 1;
            let row = raw.trim();
            if row.is_empty() || (line == 1 && row.starts_with("emotion,")) {
                continue;
            }
            let (emotion, group) = row.split_once(',').ok_or_else(|| Error::SchemaViolation {
                line,
                message: "expected `emotion,group`".into(),
            })?;
            let emotion: EmotionLabel =
                emotion
                    .trim()
                    .parse()
                    .map_err(|e: UnknownLabel| Error::SchemaViolation {
                        line,
                        message: e.to_string(),
                    })?;
            let group: SentimentGroup =
                group
                    .trim()
                    .parse()
                    .map_err(|e: UnknownLabel| Error::SchemaViolation {
                        line,
                        message: e.to_string(),
                    })?;
            if groups[emotion.index()].replace(group).is_some() {
                return Err(Error::SchemaViolation {
                    line,
                    message: format!("{emotion} assigned twice"),
                });
            }
        }
        let mut out = [SentimentGroup::Neutral; EMOTION_COUNT];
        for (slot, (emotion, group)) in out.iter_mut().zip(EmotionLabel::ALL.iter().zip(groups)) {
            *slot = group.ok_or_else(|| {
                Error::InvalidConfig(format!("sentiment map has no group for {emotion}"))
            })?;
        }
        Ok(SentimentMap { groups: out })
    }

    /// Emotions ordered by group (negative, positive, neutral), canonical
    /// order within each group.
    pub fn grouped_order(&self) -> Vec<EmotionLabel> {
        let mut order = EmotionLabel::ALL.to_vec();
        order.sort_by_key(|&e| (self.group(e), e));
        order
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DepressionClass {
    NotDepressed,
    Moderate,
    Severe,
}

impl DepressionClass {
    pub fn name(self) -> &'static str {
        match self {
            DepressionClass::NotDepressed => "not_depressed",
            DepressionClass::Moderate => "moderate",
            DepressionClass::Severe => "severe",
        }
    }
}

impl FromStr for DepressionClass {
    type Err = UnknownLabel;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "not_depressed" => Ok(DepressionClass::NotDepressed),
            "moderate" => Ok(DepressionClass::Moderate),
            "severe" => Ok(DepressionClass::Severe),
            _ => Err(UnknownLabel(s.to_string())),
        }
    }
}

impl fmt::Display for DepressionClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Post-level depression classifier output.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DepressionLabel {
    pub class: DepressionClass,
    pub confidence: f64,
}

impl DepressionLabel {
    pub fn new(class: DepressionClass, confidence: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&confidence) {
            return Err(Error::InvalidConfig(format!(
                "depression confidence {confidence} outside [0, 1]"
            )));
        }
        Ok(DepressionLabel { class, confidence })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_order_is_alphabetical_with_neutral_last() {
        assert_eq!(EmotionLabel::ALL.len(), 28);
        let names: Vec<_> = EmotionLabel::ALL[..27].iter().map(|e| e.name()).collect();
        let mut sorted = names.clone();
        sorted.sort();
        assert_eq!(names, sorted);
        assert_eq!(EmotionLabel::ALL[27], EmotionLabel::Neutral);
        for (i, e) in EmotionLabel::ALL.iter().enumerate() {
            assert_eq!(e.index(), i);
            assert_eq!(e.name().parse::<EmotionLabel>().unwrap(), *e);
        }
    }

    #[test]
    fn unknown_label_rejected() {
        assert!("happyness".parse::<EmotionLabel>().is_err());
        assert!("Anger".parse::<EmotionLabel>().is_err());
    }

    #[test]
    fn default_sentiment_map() {
        let map = SentimentMap::default();
        let count = |g| {
            EmotionLabel::ALL
                .iter()
                .filter(|&&e| map.group(e) == g)
                .count()
        };
        assert_eq!(count(SentimentGroup::Positive), 12);
        assert_eq!(count(SentimentGroup::Negative), 11);
        assert_eq!(count(SentimentGroup::Neutral), 5);
        assert_eq!(map.group(EmotionLabel::Grief), SentimentGroup::Negative);
        assert_eq!(map.group(EmotionLabel::Curiosity), SentimentGroup::Neutral);

        let order = map.grouped_order();
        assert_eq!(order[0], EmotionLabel::Anger);
        assert_eq!(order[11], EmotionLabel::Admiration);
        assert_eq!(order[27], EmotionLabel::Neutral);
    }

    #[test]
    fn incomplete_sentiment_map_rejected() {
        let err = SentimentMap::parse_csv("emotion,group\nanger,negative\n").unwrap_err();
        assert!(matches!(err, Error::InvalidConfig(_)));
        let err = SentimentMap::parse_csv("anger,negative\nanger,positive\n").unwrap_err();
        assert!(matches!(err, Error::SchemaViolation { line: 2, .. }));
    }
}
