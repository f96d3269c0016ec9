//! Per-sentence emotion and per-post depression labels.
//!
//! Labels come from an [`Annotator`] backend: the deterministic keyword
//! [`LexiconAnnotator`], the HTTP [`RemoteAnnotator`], or a previously saved
//! labeled-corpus file via [`load_annotations`].

mod lexicon;
mod remote;

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};

pub use lexicon::{lexicon_annotate, parse_rules, LexiconAnnotator};
pub use remote::{RemoteAnnotator, RemoteConfig, MAX_EMOTION_BATCH};

use crate::corpus::{post_text, segment_sentences, RawPost, Sentence};
use crate::emotion::{DepressionClass, DepressionLabel, EmotionLabel, EmotionSet, UnknownLabel};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SentenceEmotion {
    pub index: usize,
    pub emotion: EmotionLabel,
    pub confidence: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnnotatedPost {
    pub post_id: String,
    pub sentence_emotions: Vec<SentenceEmotion>,
    pub depression: DepressionLabel,
    pub outcome: u8,
}

/// Which sentence labels count when reducing a post to its emotions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmotionPolicy {
    pub include_neutral: bool,
    /// Sentences labeled below this confidence are ignored.
    pub min_confidence: f64,
}

impl Default for EmotionPolicy {
    fn default() -> Self {
        EmotionPolicy {
            include_neutral: false,
            min_confidence: 0.0,
        }
    }
}

impl EmotionPolicy {
    pub fn admits(&self, s: &SentenceEmotion) -> bool {
        (self.include_neutral || s.emotion != EmotionLabel::Neutral)
            && s.confidence >= self.min_confidence
    }
}

impl AnnotatedPost {
    /// Sentence labels that pass `policy`, in sentence order.
    pub fn admitted<'a>(
        &'a self,
        policy: &'a EmotionPolicy,
    ) -> impl Iterator<Item = &'a SentenceEmotion> + 'a {
        self.sentence_emotions
            .iter()
            .filter(move |s| policy.admits(s))
    }

    pub fn distinct_emotions(&self, policy: &EmotionPolicy) -> EmotionSet {
        self.admitted(policy).map(|s| s.emotion).collect()
    }

    /// Per-emotion sentence occurrence counts, indexed canonically.
    pub fn occurrence_counts(&self, policy: &EmotionPolicy) -> [u64; 28] {
        let mut counts = [0u64; 28];
        for s in self.admitted(policy) {
            counts[s.emotion.index()] += 1;
        }
        counts
    }

    /// Sentence index at which each emotion first appears.
    pub fn first_positions(&self, policy: &EmotionPolicy) -> [Option<usize>; 28] {
        let mut first = [None; 28];
        for s in self.admitted(policy) {
            first[s.emotion.index()].get_or_insert(s.index);
        }
        first
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BinarizationPolicy {
    #[default]
    ModerateOrSevere,
    SevereOnly,
}

impl FromStr for BinarizationPolicy {
    type Err = UnknownLabel;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "moderate_or_severe" => Ok(BinarizationPolicy::ModerateOrSevere),
            "severe_only" => Ok(BinarizationPolicy::SevereOnly),
            _ => Err(UnknownLabel(s.to_string())),
        }
    }
}

pub fn binarize_depression(label: DepressionClass, policy: BinarizationPolicy) -> u8 {
    match (label, policy) {
        (DepressionClass::NotDepressed, _) => 0,
        (DepressionClass::Moderate, BinarizationPolicy::ModerateOrSevere) => 1,
        (DepressionClass::Moderate, BinarizationPolicy::SevereOnly) => 0,
        (DepressionClass::Severe, _) => 1,
    }
}

/// Recomputes every outcome from the stored depression label.
pub fn rebinarize(posts: &mut [AnnotatedPost], policy: BinarizationPolicy) {
    for post in posts {
        post.outcome = binarize_depression(post.depression.class, policy);
    }
}

/// Failure reported by an annotation backend for one request.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BackendError(pub String);

impl std::fmt::Display for BackendError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

pub trait Annotator: Sync {
    /// Top-1 emotion and score for each text, in input order.
    fn classify_sentences(
        &self,
        texts: &[String],
    ) -> std::result::Result<Vec<(EmotionLabel, f64)>, BackendError>;

    fn classify_post(&self, text: &str) -> std::result::Result<DepressionLabel, BackendError>;
}

/// A post together with its sentences and the text sent to the post-level
/// classifier.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentedPost {
    pub post: RawPost,
    pub sentences: Vec<Sentence>,
    pub text: String,
}

impl SegmentedPost {
    pub fn new(post: RawPost, include_title: bool) -> Self {
        let sentences = segment_sentences(&post, include_title);
        let text = post_text(&post, include_title);
        SegmentedPost {
            post,
            sentences,
            text,
        }
    }
}

#[derive(Debug, Clone)]
pub struct AnnotateOptions {
    pub binarization: BinarizationPolicy,
    /// Posts in flight at once.
    pub concurrency: usize,
    pub attempts: usize,
    /// First retry delay; doubles on each further retry.
    pub backoff: Duration,
}

impl Default for AnnotateOptions {
    fn default() -> Self {
        AnnotateOptions {
            binarization: BinarizationPolicy::default(),
            concurrency: 4,
            attempts: 3,
            backoff: Duration::from_millis(200),
        }
    }
}

fn with_retries<T>(
    options: &AnnotateOptions,
    mut call: impl FnMut() -> std::result::Result<T, BackendError>,
) -> std::result::Result<T, BackendError> {
    let mut delay = options.backoff;
    let mut attempt = 1;
    loop {
        match call() {
            Ok(v) => return Ok(v),
            Err(e) if attempt >= options.attempts.max(1) => return Err(e),
            Err(_) => {
                thread::sleep(delay);
                delay *= 2;
                attempt += 1;
            }
        }
    }
}

fn annotate_post(
    post: &SegmentedPost,
    annotator: &dyn Annotator,
    options: &AnnotateOptions,
) -> Result<AnnotatedPost> {
    let fail = |e: BackendError| Error::AnnotationBackend {
        post_id: post.post.id.clone(),
        message: e.0,
    };
    let texts: Vec<String> = post.sentences.iter().map(|s| s.text.clone()).collect();
    let labels = if texts.is_empty() {
        Vec::new()
    } else {
        with_retries(options, || annotator.classify_sentences(&texts)).map_err(fail)?
    };
    if labels.len() != texts.len() {
        return Err(fail(BackendError(format!(
            "expected {} sentence labels, got {}",
            texts.len(),
            labels.len()
        ))));
    }
    let mut sentence_emotions = Vec::with_capacity(labels.len());
    for (sentence, (emotion, confidence)) in post.sentences.iter().zip(labels) {
        if !(0.0..=1.0).contains(&confidence) {
            return Err(fail(BackendError(format!(
                "score {confidence} outside [0, 1]"
            ))));
        }
        sentence_emotions.push(SentenceEmotion {
            index: sentence.index,
            emotion,
            confidence,
        });
    }
    let depression = with_retries(options, || annotator.classify_post(&post.text)).map_err(fail)?;
    if !(0.0..=1.0).contains(&depression.confidence) {
        return Err(fail(BackendError(format!(
            "depression score {} outside [0, 1]",
            depression.confidence
        ))));
    }
    Ok(AnnotatedPost {
        post_id: post.post.id.clone(),
        sentence_emotions,
        depression,
        outcome: binarize_depression(depression.class, options.binarization),
    })
}

/// Labels every sentence and post. Output order is input order; on any
/// backend failure no partial result is returned.
pub fn annotate_corpus(
    posts: &[SegmentedPost],
    annotator: &dyn Annotator,
    options: &AnnotateOptions,
) -> Result<Vec<AnnotatedPost>> {
    let workers = options.concurrency.clamp(1, posts.len().max(1));
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<Result<AnnotatedPost>>>> =
        posts.iter().map(|_| Mutex::new(None)).collect();
    let failed = std::sync::atomic::AtomicBool::new(false);

    thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                if failed.load(Ordering::Relaxed) {
                    break;
                }
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(post) = posts.get(i) else { break };
                let result = annotate_post(post, annotator, options);
                if result.is_err() {
                    failed.store(true, Ordering::Relaxed);
                }
                *slots[i].lock().unwrap() = Some(result);
            });
        }
    });

    // Slots are only left empty after some worker recorded a failure, so
    // collecting stops at an error before an empty slot can matter.
    slots
        .into_iter()
        .filter_map(|slot| slot.into_inner().unwrap())
        .collect()
}

#[derive(Serialize, Deserialize)]
struct SentenceRecord {
    i: usize,
    emotion: String,
    score: f64,
}

#[derive(Serialize, Deserialize)]
struct PostRecord {
    id: String,
    outcome: u8,
    depression: String,
    #[serde(default = "one", skip_serializing_if = "is_one")]
    depression_score: f64,
    sentences: Vec<SentenceRecord>,
}

fn one() -> f64 {
    1.0
}

fn is_one(x: &f64) -> bool {
    *x == 1.0
}

fn schema(line: usize, message: impl Into<String>) -> Error {
    Error::SchemaViolation {
        line,
        message: message.into(),
    }
}

fn score_ok(x: f64) -> bool {
    (0.0..=1.0).contains(&x)
}

/// Parses one labeled-corpus line (1-based `line` for error reporting).
pub fn parse_annotation(text: &str, line: usize) -> Result<AnnotatedPost> {
    let record: PostRecord = serde_json::from_str(text).map_err(|e| schema(line, e.to_string()))?;
    if record.id.is_empty() {
        return Err(schema(line, "empty id"));
    }
    if record.outcome > 1 {
        return Err(schema(
            line,
            format!("outcome {} is not 0 or 1", record.outcome),
        ));
    }
    let class: DepressionClass = record
        .depression
        .parse()
        .map_err(|e: UnknownLabel| schema(line, format!("depression: {e}")))?;
    if !score_ok(record.depression_score) {
        return Err(schema(line, "depression_score outside [0, 1]"));
    }
    let mut sentence_emotions = Vec::with_capacity(record.sentences.len());
    for (pos, s) in record.sentences.into_iter().enumerate() {
        if s.i != pos {
            return Err(schema(
                line,
                format!("sentence index {} where {pos} expected", s.i),
            ));
        }
        let emotion: EmotionLabel = s
            .emotion
            .parse()
            .map_err(|e: UnknownLabel| schema(line, format!("emotion: {e}")))?;
        if !score_ok(s.score) {
            return Err(schema(
                line,
                format!("sentence {} score outside [0, 1]", s.i),
            ));
        }
        sentence_emotions.push(SentenceEmotion {
            index: s.i,
            emotion,
            confidence: s.score,
        });
    }
    Ok(AnnotatedPost {
        post_id: record.id,
        sentence_emotions,
        depression: DepressionLabel {
            class,
            confidence: record.depression_score,
        },
        outcome: record.outcome,
    })
}

pub fn format_annotation(post: &AnnotatedPost) -> String {
    let record = PostRecord {
        id: post.post_id.clone(),
        outcome: post.outcome,
        depression: post.depression.class.name().to_string(),
        depression_score: post.depression.confidence,
        sentences: post
            .sentence_emotions
            .iter()
            .map(|s| SentenceRecord {
                i: s.index,
                emotion: s.emotion.name().to_string(),
                score: s.confidence,
            })
            .collect(),
    };
    serde_json::to_string(&record).expect("labeled record serializes")
}

pub fn load_annotations(path: &Path) -> Result<Vec<AnnotatedPost>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(n, l)| parse_annotation(l, n + 1))
        .collect()
}

pub fn write_annotations<W: Write>(mut out: W, posts: &[AnnotatedPost]) -> std::io::Result<()> {
    for post in posts {
        writeln!(out, "{}", format_annotation(post))?;
    }
    out.flush()
}

pub fn save_annotations(path: &Path, posts: &[AnnotatedPost]) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_annotations(BufWriter::new(file), posts).map_err(|e| Error::io(path, e))
}
