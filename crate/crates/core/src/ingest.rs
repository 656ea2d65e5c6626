//! Input parsing: trusted news corpora, chronological message streams, and
//! tokenization.
//!
//! Both file formats are UTF-8 with one self-describing JSON object per
//! line; blank lines are ignored.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufRead, BufReader, Lines};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// One trusted news-wire document.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NewsArticle {
    pub id: String,
    pub timestamp: i64,
    pub title: String,
    pub text: String,
}

/// Gold label carried by training and evaluation streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Label {
    #[serde(rename = "rumour")]
    Rumour,
    #[serde(rename = "non-rumour")]
    NonRumour,
}

impl std::fmt::Display for Label {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Label::Rumour => f.write_str("rumour"),
            Label::NonRumour => f.write_str("non-rumour"),
        }
    }
}

impl std::str::FromStr for Label {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rumour" => Ok(Label::Rumour),
            "non-rumour" => Ok(Label::NonRumour),
            other => Err(format!("unknown label {other:?}")),
        }
    }
}

/// Per-token part-of-speech tag. Inputs may carry these pre-computed; the
/// built-in lexicon tagger fills them in otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PosTag {
    Verb,
    Noun,
    Adjective,
    Quantity,
    Time,
    Other,
}

/// One timestamped stream document.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Message {
    pub id: String,
    pub timestamp: i64,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<Label>,
    /// Optional pre-computed POS tags aligned with the pre-segmented tokens.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pos: Option<Vec<PosTag>>,
}

/// A tokenized document: the ordered term list plus its distinct-term set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenizedDoc {
    pub doc_id: String,
    pub terms: Vec<String>,
    pub unique_terms: BTreeSet<String>,
}

impl TokenizedDoc {
    pub fn new(doc_id: impl Into<String>, terms: Vec<String>) -> Self {
        let unique_terms = terms.iter().cloned().collect();
        Self {
            doc_id: doc_id.into(),
            terms,
            unique_terms,
        }
    }
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("failed to open {path}: {source}")]
    Open {
        path: String,
        source: std::io::Error,
    },
    #[error("i/o error at line {line}: {source}")]
    Io { line: usize, source: std::io::Error },
    #[error("malformed record at line {line}: {source}")]
    Malformed {
        line: usize,
        source: serde_json::Error,
    },
    #[error("invalid record at line {line}: {reason}")]
    Invalid { line: usize, reason: String },
    #[error("duplicate id {id:?} at line {line}")]
    DuplicateId { id: String, line: usize },
    #[error(
        "out-of-order timestamp: message {current_id:?} ({current_ts}) arrived after \
         {previous_id:?} ({previous_ts})"
    )]
    OutOfOrder {
        previous_id: String,
        previous_ts: i64,
        current_id: String,
        current_ts: i64,
    },
}

/// Load a trusted news corpus from a line-delimited record file.
///
/// Articles come back in file order; every malformed line is an error
/// carrying its 1-based line number.
pub fn load_news_corpus(path: impl AsRef<Path>) -> Result<Vec<NewsArticle>, IngestError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| IngestError::Open {
        path: path.display().to_string(),
        source,
    })?;
    let mut articles = Vec::new();
    let mut seen = BTreeSet::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|source| IngestError::Io {
            line: line_no,
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let article: NewsArticle =
            serde_json::from_str(&line).map_err(|source| IngestError::Malformed {
                line: line_no,
                source,
            })?;
        if article.id.is_empty() {
            return Err(IngestError::Invalid {
                line: line_no,
                reason: "empty id".into(),
            });
        }
        if article.text.is_empty() {
            return Err(IngestError::Invalid {
                line: line_no,
                reason: "empty text".into(),
            });
        }
        if !seen.insert(article.id.clone()) {
            return Err(IngestError::DuplicateId {
                id: article.id,
                line: line_no,
            });
        }
        articles.push(article);
    }
    Ok(articles)
}

/// Lazy single-pass reader over a stream file.
///
/// In strict mode any timestamp decrease aborts iteration with an error
/// naming both message ids; otherwise decreases are tolerated and counted
/// in [`StreamReader::disorder_warnings`].
pub struct StreamReader {
    lines: Lines<BufReader<File>>,
    line_no: usize,
    strict_order: bool,
    previous: Option<(String, i64)>,
    disorder_warnings: u64,
    failed: bool,
}

pub fn open_stream(
    path: impl AsRef<Path>,
    strict_order: bool,
) -> Result<StreamReader, IngestError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| IngestError::Open {
        path: path.display().to_string(),
        source,
    })?;
    Ok(StreamReader {
        lines: BufReader::new(file).lines(),
        line_no: 0,
        strict_order,
        previous: None,
        disorder_warnings: 0,
        failed: false,
    })
}

impl StreamReader {
    /// Number of timestamp decreases observed so far (non-strict mode).
    pub fn disorder_warnings(&self) -> u64 {
        self.disorder_warnings
    }
}

impl Iterator for StreamReader {
    type Item = Result<Message, IngestError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed {
            return None;
        }
        loop {
            let line = match self.lines.next()? {
                Ok(line) => line,
                Err(source) => {
                    self.failed = true;
                    return Some(Err(IngestError::Io {
                        line: self.line_no + 1,
                        source,
                    }));
                }
            };
            self.line_no += 1;
            if line.trim().is_empty() {
                continue;
            }
            let msg: Message = match serde_json::from_str(&line) {
                Ok(msg) => msg,
                Err(source) => {
                    self.failed = true;
                    return Some(Err(IngestError::Malformed {
                        line: self.line_no,
                        source,
                    }));
                }
            };
            if msg.id.is_empty() {
                self.failed = true;
                return Some(Err(IngestError::Invalid {
                    line: self.line_no,
                    reason: "empty id".into(),
                }));
            }
            if let Some((prev_id, prev_ts)) = &self.previous {
                if msg.timestamp < *prev_ts {
                    if self.strict_order {
                        self.failed = true;
                        return Some(Err(IngestError::OutOfOrder {
                            previous_id: prev_id.clone(),
                            previous_ts: *prev_ts,
                            current_id: msg.id.clone(),
                            current_ts: msg.timestamp,
                        }));
                    }
                    self.disorder_warnings += 1;
                }
            }
            self.previous = Some((msg.id.clone(), msg.timestamp));
            return Some(Ok(msg));
        }
    }
}

/// Tokenization strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TokenScheme {
    /// Split on Unicode whitespace, strip surrounding punctuation, lowercase.
    /// Hashtags, mentions and URLs survive as single terms.
    Whitespace,
    /// Input already carries token-separating spaces; lowercase only.
    PreSegmented,
    /// Overlapping character bigrams over non-whitespace runs, for
    /// unsegmented CJK text.
    CharBigram,
}

impl std::fmt::Display for TokenScheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TokenScheme::Whitespace => f.write_str("whitespace"),
            TokenScheme::PreSegmented => f.write_str("pre_segmented"),
            TokenScheme::CharBigram => f.write_str("char_bigram"),
        }
    }
}

impl std::str::FromStr for TokenScheme {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "whitespace" => Ok(TokenScheme::Whitespace),
            "pre_segmented" => Ok(TokenScheme::PreSegmented),
            "char_bigram" => Ok(TokenScheme::CharBigram),
            other => Err(format!("unknown tokenizer scheme {other:?}")),
        }
    }
}

pub fn is_url_term(term: &str) -> bool {
    term.starts_with("http://") || term.starts_with("https://") || term.starts_with("www.")
}

pub fn is_hashtag_term(term: &str) -> bool {
    term.len() > 1 && term.starts_with('#')
}

pub fn is_mention_term(term: &str) -> bool {
    term.len() > 1 && term.starts_with('@')
}

fn strip_punct(token: &str) -> &str {
    token.trim_matches(|c: char| !c.is_alphanumeric())
}

/// Strip trailing sentence punctuation from social tokens while keeping
/// their marker prefix (and a closing `#` on weibo-style `#...#` tags).
fn strip_trailing_punct(token: &str, keep_hash: bool) -> &str {
    token.trim_end_matches(|c: char| !c.is_alphanumeric() && !(keep_hash && c == '#'))
}

/// Tokenize `text` under the given scheme. Deterministic; empty text yields
/// an empty term list.
pub fn tokenize(text: &str, scheme: TokenScheme, doc_id: impl Into<String>) -> TokenizedDoc {
    let lower = text.to_lowercase();
    let terms: Vec<String> = match scheme {
        TokenScheme::Whitespace => lower
            .split_whitespace()
            .filter_map(|raw| {
                let term = if is_url_term(raw) {
                    strip_trailing_punct(raw, false)
                } else if is_hashtag_term(raw) {
                    strip_trailing_punct(raw, true)
                } else if is_mention_term(raw) {
                    strip_trailing_punct(raw, false)
                } else {
                    strip_punct(raw)
                };
                if term.is_empty() {
                    None
                } else {
                    Some(term.to_string())
                }
            })
            .collect(),
        TokenScheme::PreSegmented => lower.split_whitespace().map(str::to_string).collect(),
        TokenScheme::CharBigram => {
            let mut terms = Vec::new();
            for run in lower.split_whitespace() {
                let chars: Vec<char> = run.chars().collect();
                for pair in chars.windows(2) {
                    terms.push(pair.iter().collect());
                }
            }
            terms
        }
    };
    TokenizedDoc::new(doc_id, terms)
}
