//! Post dump ingestion and rule-based sentence segmentation.
//!
//! Input is JSON lines, one post object per line. Malformed lines, empty
//! posts and duplicate ids are skipped and counted rather than aborting the
//! load; only a file with no usable record at all is an error.

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use chrono::{DateTime, NaiveDate, NaiveDateTime, NaiveTime, TimeZone, Utc};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawPost {
    pub id: String,
    pub created_utc: i64,
    pub title: String,
    pub body: String,
    pub source: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    pub post_id: String,
    pub index: usize,
    pub text: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusManifest {
    pub post_count: usize,
    pub sentence_count: usize,
    pub time_min: Option<i64>,
    pub time_max: Option<i64>,
    pub skipped_records: usize,
    /// Well-formed posts dropped by the time filter.
    pub time_filtered: usize,
}

/// Inclusive range of epoch seconds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimeRange {
    pub start: i64,
    pub end: i64,
}

impl TimeRange {
    pub fn new(start: i64, end: i64) -> Result<Self> {
        if start > end {
            return Err(Error::InvalidConfig(format!(
                "time range start {start} is after end {end}"
            )));
        }
        Ok(TimeRange { start, end })
    }

    /// 2012-01-01T00:00:00Z through 2022-12-31T23:59:59Z.
    pub fn default_decade() -> Self {
        TimeRange {
            start: 1_325_376_000,
            end: 1_672_531_199,
        }
    }

    pub fn contains(&self, t: i64) -> bool {
        self.start <= t && t <= self.end
    }
}

/// Parses an ISO-8601 date or date-time into epoch seconds.
///
/// A bare date resolves to the first second of the day, or the last one when
/// `end_of_day` is set, so `--until 2022-12-31` includes that whole day.
pub fn parse_time_bound(s: &str, end_of_day: bool) -> Result<i64> {
    let s = s.trim();
    if let Ok(dt) = DateTime::parse_from_rfc3339(s) {
        return Ok(dt.timestamp());
    }
    if let Ok(dt) = NaiveDateTime::parse_from_str(s, "%Y-%m-%dT%H:%M:%S") {
        return Ok(Utc.from_utc_datetime(&dt).timestamp());
    }
    if let Ok(date) = NaiveDate::parse_from_str(s, "%Y-%m-%d") {
        let time = if end_of_day {
            NaiveTime::from_hms_opt(23, 59, 59).unwrap()
        } else {
            NaiveTime::MIN
        };
        return Ok(Utc.from_utc_datetime(&date.and_time(time)).timestamp());
    }
    Err(Error::InvalidConfig(format!("not an ISO-8601 date: {s:?}")))
}

fn text_field(obj: &serde_json::Map<String, Value>, key: &str) -> Option<String> {
    match obj.get(key) {
        Some(Value::String(s)) => Some(s.clone()),
        _ => None,
    }
}

/// Parses one dump record. `None` means the line is malformed.
pub fn parse_record(line: &str) -> Option<RawPost> {
    let value: Value = serde_json::from_str(line).ok()?;
    let obj = value.as_object()?;
    let id = match obj.get("id")? {
        Value::String(s) if !s.trim().is_empty() => s.clone(),
        _ => return None,
    };
    let created_utc = match obj.get("created_utc")? {
        Value::Number(n) => match n.as_i64() {
            Some(t) => t,
            None => {
                let f = n.as_f64()?;
                if f.fract() != 0.0 || f < 0.0 || f > i64::MAX as f64 {
                    return None;
                }
                f as i64
            }
        },
        _ => return None,
    };
    if created_utc < 0 {
        return None;
    }
    let body = text_field(obj, "selftext")
        .or_else(|| text_field(obj, "body"))
        .unwrap_or_default();
    Some(RawPost {
        id,
        created_utc,
        title: text_field(obj, "title").unwrap_or_default(),
        body,
        source: text_field(obj, "subreddit").unwrap_or_default(),
    })
}

/// Loads a JSON-lines dump, keeping posts whose `created_utc` lies in
/// `time_range`. Output is ordered by `(created_utc, id)`.
pub fn load_corpus(
    path: &Path,
    time_range: Option<TimeRange>,
) -> Result<(Vec<RawPost>, CorpusManifest)> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let (posts, manifest, well_formed, lines) = load_from_str(&text, time_range);
    if lines > 0 && well_formed == 0 {
        return Err(Error::MalformedCorpus {
            path: path.to_path_buf(),
            lines,
        });
    }
    Ok((posts, manifest))
}

fn load_from_str(
    text: &str,
    time_range: Option<TimeRange>,
) -> (Vec<RawPost>, CorpusManifest, usize, usize) {
    let mut manifest = CorpusManifest::default();
    let mut seen = HashSet::new();
    let mut posts = Vec::new();
    let mut well_formed = 0;
    let mut lines = 0;
    for line in text.lines().filter(|l| !l.trim().is_empty()) {
        lines += 1;
        let Some(post) = parse_record(line) else {
            manifest.skipped_records += 1;
            continue;
        };
        well_formed += 1;
        if post.title.trim().is_empty() && post.body.trim().is_empty() {
            manifest.skipped_records += 1;
            continue;
        }
        if !seen.insert(post.id.clone()) {
            manifest.skipped_records += 1;
            continue;
        }
        if let Some(range) = time_range {
            if !range.contains(post.created_utc) {
                manifest.time_filtered += 1;
                continue;
            }
        }
        posts.push(post);
    }
    posts.sort_by(|a, b| (a.created_utc, &a.id).cmp(&(b.created_utc, &b.id)));

    manifest.post_count = posts.len();
    manifest.time_min = posts.iter().map(|p| p.created_utc).min();
    manifest.time_max = posts.iter().map(|p| p.created_utc).max();
    manifest.sentence_count = posts.iter().map(|p| segment_sentences(p, true).len()).sum();
    (posts, manifest, well_formed, lines)
}

fn collapse_whitespace(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Splits a post into sentences.
///
/// The title, when present and `include_title` is set, is sentence 0 as a
/// whole. The body is split after `.`, `!` or `?` when the next character is
/// whitespace or the end of text. No abbreviation handling is attempted, so
/// "Dr. Smith" yields two sentences.
pub fn segment_sentences(post: &RawPost, include_title: bool) -> Vec<Sentence> {
    let mut texts = Vec::new();
    if include_title {
        let title = collapse_whitespace(&post.title);
        if !title.is_empty() {
            texts.push(title);
        }
    }
    texts.extend(split_body(&collapse_whitespace(&post.body)));
    texts
        .into_iter()
        .enumerate()
        .map(|(index, text)| Sentence {
            post_id: post.id.clone(),
            index,
            text,
        })
        .collect()
}

// Expects whitespace already collapsed to single spaces.
fn split_body(body: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut start = 0;
    let mut chars = body.char_indices().peekable();
    while let Some((i, c)) = chars.next() {
        if !matches!(c, '.' | '!' | '?') {
            continue;
        }
        let boundary = match chars.peek() {
            None => true,
            Some(&(_, next)) => next.is_whitespace(),
        };
        if boundary {
            let end = i + c.len_utf8();
            push_fragment(&mut out, &body[start..end]);
            start = end;
        }
    }
    push_fragment(&mut out, &body[start..]);
    out
}

fn push_fragment(out: &mut Vec<String>, fragment: &str) {
    let trimmed = fragment.trim();
    if !trimmed.is_empty() {
        out.push(trimmed.to_string());
    }
}

/// Full post text as sent to a post-level classifier.
pub fn post_text(post: &RawPost, include_title: bool) -> String {
    let title = if include_title {
        collapse_whitespace(&post.title)
    } else {
        String::new()
    };
    let body = collapse_whitespace(&post.body);
    match (title.is_empty(), body.is_empty()) {
        (true, _) => body,
        (false, true) => title,
        (false, false) => format!("{title}\n\n{body}"),
    }
}
