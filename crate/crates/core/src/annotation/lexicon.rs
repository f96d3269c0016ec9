use std::fs;
use std::path::Path;
use std::str::FromStr;

use super::{Annotator, BackendError};
use crate::emotion::{DepressionClass, DepressionLabel, EmotionLabel, UnknownLabel};
use crate::error::{Error, Result};

/// First rule whose keyword occurs in `text` (case-insensitive substring)
/// wins; no match yields `neutral`.
pub fn lexicon_annotate(text: &str, rules: &[(String, EmotionLabel)]) -> EmotionLabel {
    let lowered = text.to_lowercase();
    first_match(&lowered, rules).unwrap_or(EmotionLabel::Neutral)
}

fn first_match<T: Copy>(lowered: &str, rules: &[(String, T)]) -> Option<T> {
    rules
        .iter()
        .find(|(keyword, _)| lowered.contains(keyword.to_lowercase().as_str()))
        .map(|&(_, label)| label)
}

/// Deterministic keyword backend. Every label carries confidence 1.0.
#[derive(Debug, Clone, Default)]
pub struct LexiconAnnotator {
    emotion_rules: Vec<(String, EmotionLabel)>,
    depression_rules: Vec<(String, DepressionClass)>,
}

impl LexiconAnnotator {
    pub fn new(
        emotion_rules: Vec<(String, EmotionLabel)>,
        depression_rules: Vec<(String, DepressionClass)>,
    ) -> Self {
        LexiconAnnotator {
            emotion_rules,
            depression_rules,
        }
    }

    /// Emotion rules that map every label name to itself, so text made of
    /// label names annotates back to those labels. Longer names come first
    /// since "approval" is a substring of "disapproval".
    pub fn identity() -> Self {
        let mut labels = EmotionLabel::ALL;
        labels.sort_by_key(|e| (std::cmp::Reverse(e.name().len()), *e));
        let rules = labels.iter().map(|&e| (e.name().to_string(), e)).collect();
        LexiconAnnotator::new(rules, Vec::new())
    }

    pub fn emotion_rules(&self) -> &[(String, EmotionLabel)] {
        &self.emotion_rules
    }

    pub fn load(emotion_rules: &Path, depression_rules: Option<&Path>) -> Result<Self> {
        let emotions = parse_rules(&read(emotion_rules)?)?;
        if emotions.is_empty() {
            return Err(Error::InvalidConfig(format!(
                "{}: no lexicon rules",
                emotion_rules.display()
            )));
        }
        let depression = match depression_rules {
            Some(path) => parse_rules(&read(path)?)?,
            None => Vec::new(),
        };
        Ok(LexiconAnnotator::new(emotions, depression))
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Parses ordered `keyword,label` rows. A first row whose label column does
/// not parse is taken as a header.
pub fn parse_rules<T: FromStr<Err = UnknownLabel>>(text: &str) -> Result<Vec<(String, T)>> {
    let mut rules = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let row = raw.trim();
        if row.is_empty() || row.starts_with('#') {
            continue;
        }
        let (keyword, label) = row.rsplit_once(',').ok_or_else(|| Error::SchemaViolation {
            line: n + 1,
            message: "expected `keyword,label`".into(),
        })?;
        match label.trim().parse::<T>() {
            Ok(label) => {
                let keyword = keyword.trim().to_lowercase();
                if keyword.is_empty() {
                    return Err(Error::SchemaViolation {
                        line: n + 1,
                        message: "empty keyword".into(),
                    });
                }
                rules.push((keyword, label));
            }
            Err(_) if n == 0 => continue,
            Err(e) => {
                return Err(Error::SchemaViolation {
                    line: n + 1,
                    message: e.to_string(),
                })
            }
        }
    }
    Ok(rules)
}

impl Annotator for LexiconAnnotator {
    fn classify_sentences(
        &self,
        texts: &[String],
    ) -> std::result::Result<Vec<(EmotionLabel, f64)>, BackendError> {
        Ok(texts
            .iter()
            .map(|t| (lexicon_annotate(t, &self.emotion_rules), 1.0))
            .collect())
    }

    fn classify_post(&self, text: &str) -> std::result::Result<DepressionLabel, BackendError> {
        let class = first_match(&text.to_lowercase(), &self.depression_rules)
            .unwrap_or(DepressionClass::NotDepressed);
        Ok(DepressionLabel {
            class,
            confidence: 1.0,
        })
    }
}
