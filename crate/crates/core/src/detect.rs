//! The single-pass detection loop: per-message feature extraction, scoring,
//! pseudo-feedback buffer update, verdict emission.
//!
//! Every message is processed exactly once, in stream order, before the
//! next one is read. The loop is strictly sequential because the PF buffer
//! makes later scores depend on earlier admissions; with PF capacity 0 the
//! output is a pure per-message function.

use std::io::{BufRead, Write};

use thiserror::Error;

use crate::features::{
    assemble, context_features, FeatureError, LexiconPack, PosTagger, PF_INDEX, TOTAL_FEATURES,
};
use crate::ingest::{tokenize, IngestError, Label, Message, TokenScheme, TokenizedDoc};
use crate::model::{Model, ModelError};
use crate::novelty::{KtermMemory, TrustedMemory};
use crate::pseudofeedback::{maybe_admit, pf_feature, PfBuffer};
use crate::textstats::{tfidf_vector, top_keywords, KeywordIdf, TfIdfVector};

#[derive(Debug, Error)]
pub enum DetectError {
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error("message {id}: {source}")]
    Feature {
        id: String,
        #[source]
        source: FeatureError,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// What to do when a single message fails feature extraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OnError {
    Skip,
    Abort,
}

impl std::str::FromStr for OnError {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "skip" => Ok(OnError::Skip),
            "abort" => Ok(OnError::Abort),
            other => Err(format!("unknown on_error policy {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct DetectOptions {
    pub tokenizer: TokenScheme,
    pub on_error: OnError,
    pub debug_features: bool,
    /// Insert each scored message's terms into (a copy of) the kterm
    /// memory, so repeated content loses novelty. Off by default: the
    /// memory spans the trusted resources only.
    pub accumulate_stream: bool,
    pub keyword_idf: KeywordIdf,
}

impl Default for DetectOptions {
    fn default() -> Self {
        Self {
            tokenizer: TokenScheme::PreSegmented,
            on_error: OnError::Skip,
            debug_features: false,
            accumulate_stream: false,
            keyword_idf: KeywordIdf::News,
        }
    }
}

/// Scored message.
#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub doc_id: String,
    pub timestamp: i64,
    pub rumour_score: f64,
    pub label: Label,
    pub feature_vector: Option<[f64; TOTAL_FEATURES]>,
}

/// Per-message inputs that do not depend on stream position: the feature
/// vector with the PF slot still zero, and the message tf-idf vector.
pub struct MessageInputs {
    pub base: [f64; TOTAL_FEATURES],
    pub text_vector: TfIdfVector,
}

/// Extract everything except pseudo feedback for one tokenized message.
pub fn extract_inputs(
    msg: &Message,
    doc: &TokenizedDoc,
    kterms: &KtermMemory,
    memory: &TrustedMemory,
    lexicons: &LexiconPack,
    tagger: &PosTagger,
    keyword_idf: KeywordIdf,
) -> Result<MessageInputs, FeatureError> {
    let tags = tagger.tag_doc(msg, doc, lexicons)?;
    let context = context_features(msg, doc, &tags, lexicons);
    let keywords = top_keywords(doc, &memory.vocab, keyword_idf);
    let nov = kterms.novelty_scores(doc, &keywords);
    let fv = assemble(&context, &nov, 0.0)?;
    Ok(MessageInputs {
        base: fv.values,
        text_vector: tfidf_vector(doc, &memory.vocab),
    })
}

/// Streaming scorer holding the model, the trusted memory, and the
/// order-sensitive pseudo-feedback buffer.
pub struct Detector<'a> {
    model: &'a Model,
    memory: &'a TrustedMemory,
    lexicons: &'a LexiconPack,
    tagger: &'a PosTagger,
    opts: DetectOptions,
    pf_buffer: PfBuffer,
    accumulated: Option<KtermMemory>,
    skipped: u64,
}

impl<'a> Detector<'a> {
    pub fn new(
        model: &'a Model,
        memory: &'a TrustedMemory,
        lexicons: &'a LexiconPack,
        tagger: &'a PosTagger,
        opts: DetectOptions,
    ) -> Self {
        let accumulated = opts.accumulate_stream.then(|| memory.kterms.clone());
        Self {
            model,
            memory,
            lexicons,
            tagger,
            opts,
            pf_buffer: PfBuffer::new(model.pf.capacity),
            accumulated,
            skipped: 0,
        }
    }

    /// Messages dropped by the skip policy so far.
    pub fn skipped(&self) -> u64 {
        self.skipped
    }

    pub fn pf_buffer(&self) -> &PfBuffer {
        &self.pf_buffer
    }

    fn kterms(&self) -> &KtermMemory {
        self.accumulated.as_ref().unwrap_or(&self.memory.kterms)
    }

    /// Score one already-tokenized message and update the PF buffer.
    pub fn score_doc(&mut self, msg: &Message, doc: &TokenizedDoc) -> Result<Verdict, DetectError> {
        let inputs = extract_inputs(
            msg,
            doc,
            self.kterms(),
            self.memory,
            self.lexicons,
            self.tagger,
            self.opts.keyword_idf,
        )
        .map_err(|source| DetectError::Feature {
            id: msg.id.clone(),
            source,
        })?;
        let pf = pf_feature(&self.pf_buffer, &inputs.text_vector);
        let mut values = inputs.base;
        values[PF_INDEX] = pf;
        let score = self.model.score_values(&values);
        let label = self.model.classify(score);
        maybe_admit(
            &mut self.pf_buffer,
            &msg.id,
            &inputs.text_vector,
            score,
            &self.model.pf,
        );
        if let Some(mem) = self.accumulated.as_mut() {
            mem.insert_document(&doc.unique_terms);
        }
        Ok(Verdict {
            doc_id: msg.id.clone(),
            timestamp: msg.timestamp,
            rumour_score: score,
            label,
            feature_vector: self.opts.debug_features.then_some(values),
        })
    }

    pub fn score_message(&mut self, msg: &Message) -> Result<Verdict, DetectError> {
        let doc = tokenize(&msg.text, self.opts.tokenizer, msg.id.clone());
        self.score_doc(msg, &doc)
    }
}

/// Lazily score a stream of messages. Ingest errors always propagate;
/// feature errors follow the detector's on_error policy.
pub fn run_stream<'d, 'a, I>(detector: &'d mut Detector<'a>, stream: I) -> RunStream<'d, 'a, I>
where
    I: Iterator<Item = Result<Message, IngestError>>,
{
    RunStream { detector, stream }
}

pub struct RunStream<'d, 'a, I> {
    detector: &'d mut Detector<'a>,
    stream: I,
}

impl<I> Iterator for RunStream<'_, '_, I>
where
    I: Iterator<Item = Result<Message, IngestError>>,
{
    type Item = Result<Verdict, DetectError>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let msg = match self.stream.next()? {
                Ok(msg) => msg,
                Err(e) => return Some(Err(e.into())),
            };
            match self.detector.score_message(&msg) {
                Ok(verdict) => return Some(Ok(verdict)),
                Err(e) => match self.detector.opts.on_error {
                    OnError::Abort => return Some(Err(e)),
                    OnError::Skip => {
                        log::warn!("skipping message: {e}");
                        self.detector.skipped += 1;
                    }
                },
            }
        }
    }
}

pub const VERDICT_HEADER: &str = "doc_id,timestamp,rumour_score,label";

/// Write one verdict as a CSV line: doc id, timestamp, score with six
/// decimal places, label, then the full feature vector in debug mode.
pub fn write_verdict<W: Write>(w: &mut W, v: &Verdict) -> std::io::Result<()> {
    write!(
        w,
        "{},{},{:.6},{}",
        v.doc_id, v.timestamp, v.rumour_score, v.label
    )?;
    if let Some(fv) = &v.feature_vector {
        for value in fv {
            write!(w, ",{value}")?;
        }
    }
    writeln!(w)
}

/// Read a verdict file written by [`write_verdict`] (debug columns are
/// ignored).
pub fn read_verdicts<R: BufRead>(r: R) -> std::io::Result<Vec<Verdict>> {
    let bad = |line: usize, what: &str| {
        std::io::Error::new(
            std::io::ErrorKind::InvalidData,
            format!("verdict file line {line}: {what}"),
        )
    };
    let mut out = Vec::new();
    for (idx, line) in r.lines().enumerate() {
        let line = line?;
        let line_no = idx + 1;
        if line.trim().is_empty() || (idx == 0 && line.starts_with("doc_id,")) {
            continue;
        }
        let mut parts = line.split(',');
        let doc_id = parts.next().ok_or_else(|| bad(line_no, "missing id"))?;
        let timestamp = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| bad(line_no, "bad timestamp"))?;
        let rumour_score = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| bad(line_no, "bad score"))?;
        let label: Label = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| bad(line_no, "bad label"))?;
        out.push(Verdict {
            doc_id: doc_id.to_string(),
            timestamp,
            rumour_score,
            label,
            feature_vector: None,
        });
    }
    Ok(out)
}
