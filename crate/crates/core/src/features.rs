//! The 51 context features, the fixed 58-slot feature vector, and the
//! lexicons and POS tagger that feed them.
//!
//! The vector layout is pinned by a manifest: positions 0..=50 are context
//! features, 51..=56 the six kterm novelty scores, and 57 the
//! pseudo-feedback similarity. A hash of the manifest travels with every
//! vector and every trained model so a layout change can never silently
//! mix with stale artifacts.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::hash::fnv1a64;
use crate::ingest::{is_hashtag_term, is_mention_term, is_url_term, Message, PosTag, TokenizedDoc};
use crate::novelty::NoveltyScores;

pub const CONTEXT_FEATURES: usize = 51;
pub const NOVELTY_FEATURES: usize = 6;
pub const TOTAL_FEATURES: usize = 58;
pub const PF_INDEX: usize = 57;

/// Feature categories; these are also the ablation groups.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Category {
    Punctuation,
    Pos,
    Sentiment,
    Emotion,
    Extreme,
    SocialMedia,
    Length,
    Urls,
    Novelty,
    PseudoFeedback,
}

impl Category {
    pub const ALL: [Category; 10] = [
        Category::Punctuation,
        Category::Pos,
        Category::Sentiment,
        Category::Emotion,
        Category::Extreme,
        Category::SocialMedia,
        Category::Length,
        Category::Urls,
        Category::Novelty,
        Category::PseudoFeedback,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Category::Punctuation => "punctuation",
            Category::Pos => "pos",
            Category::Sentiment => "sentiment",
            Category::Emotion => "emotion",
            Category::Extreme => "extreme",
            Category::SocialMedia => "social_media",
            Category::Length => "length",
            Category::Urls => "urls",
            Category::Novelty => "novelty",
            Category::PseudoFeedback => "pf",
        }
    }
}

impl std::str::FromStr for Category {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "punctuation" => Ok(Category::Punctuation),
            "pos" => Ok(Category::Pos),
            "sentiment" => Ok(Category::Sentiment),
            "emotion" => Ok(Category::Emotion),
            "extreme" => Ok(Category::Extreme),
            "social_media" => Ok(Category::SocialMedia),
            "length" => Ok(Category::Length),
            "urls" => Ok(Category::Urls),
            "novelty" => Ok(Category::Novelty),
            "pf" | "pseudo_feedback" => Ok(Category::PseudoFeedback),
            other => Err(format!("unknown feature group {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureKind {
    Count,
    Normalized,
    Flag,
    Novelty,
    PseudoFeedback,
}

impl FeatureKind {
    pub fn name(self) -> &'static str {
        match self {
            FeatureKind::Count => "count",
            FeatureKind::Normalized => "normalized",
            FeatureKind::Flag => "flag",
            FeatureKind::Novelty => "novelty",
            FeatureKind::PseudoFeedback => "pseudo_feedback",
        }
    }
}

pub struct ManifestEntry {
    pub index: usize,
    pub name: &'static str,
    pub category: Category,
    pub kind: FeatureKind,
}

macro_rules! manifest {
    ($(($idx:expr, $name:literal, $cat:ident, $kind:ident)),+ $(,)?) => {
        &[$(ManifestEntry {
            index: $idx,
            name: $name,
            category: Category::$cat,
            kind: FeatureKind::$kind,
        }),+]
    };
}

/// The fixed feature layout. Order matters: it defines vector positions.
pub const MANIFEST: &[ManifestEntry] = manifest![
    (0, "excl_count", Punctuation, Count),
    (1, "quest_count", Punctuation, Count),
    (2, "period_count", Punctuation, Count),
    (3, "comma_count", Punctuation, Count),
    (4, "multi_excl_runs", Punctuation, Count),
    (5, "multi_quest_runs", Punctuation, Count),
    (6, "interrobang_presence", Punctuation, Flag),
    (7, "ellipsis_presence", Punctuation, Flag),
    (8, "verb_count", Pos, Count),
    (9, "noun_count", Pos, Count),
    (10, "adjective_count", Pos, Count),
    (11, "quantity_count", Pos, Count),
    (12, "time_count", Pos, Count),
    (13, "verb_ratio", Pos, Normalized),
    (14, "noun_ratio", Pos, Normalized),
    (15, "adjective_ratio", Pos, Normalized),
    (16, "quantity_ratio", Pos, Normalized),
    (17, "time_ratio", Pos, Normalized),
    (18, "strong_pos_count", Sentiment, Count),
    (19, "weak_pos_count", Sentiment, Count),
    (20, "strong_neg_count", Sentiment, Count),
    (21, "weak_neg_count", Sentiment, Count),
    (22, "strong_pos_ratio", Sentiment, Normalized),
    (23, "weak_pos_ratio", Sentiment, Normalized),
    (24, "strong_neg_ratio", Sentiment, Normalized),
    (25, "weak_neg_ratio", Sentiment, Normalized),
    (26, "emo_positive_degree", Emotion, Normalized),
    (27, "emo_negative_degree", Emotion, Normalized),
    (28, "emo_sad_degree", Emotion, Normalized),
    (29, "emo_anxious_degree", Emotion, Normalized),
    (30, "emo_surprised_degree", Emotion, Normalized),
    (31, "emo_positive_presence", Emotion, Flag),
    (32, "emo_negative_presence", Emotion, Flag),
    (33, "emo_sad_presence", Emotion, Flag),
    (34, "emo_anxious_presence", Emotion, Flag),
    (35, "emo_surprised_presence", Emotion, Flag),
    (36, "extreme_count", Extreme, Count),
    (37, "extreme_ratio", Extreme, Normalized),
    (38, "hashtag_count", SocialMedia, Count),
    (39, "hashtag_presence", SocialMedia, Flag),
    (40, "mention_count", SocialMedia, Count),
    (41, "mention_presence", SocialMedia, Flag),
    (42, "repost_presence", SocialMedia, Flag),
    (43, "emoticon_count", SocialMedia, Count),
    (44, "char_length", Length, Count),
    (45, "token_count", Length, Count),
    (46, "unique_token_count", Length, Count),
    (47, "type_token_ratio", Length, Normalized),
    (48, "url_count", Urls, Count),
    (49, "url_presence", Urls, Flag),
    (50, "picture_presence", Urls, Flag),
    (51, "novelty_all_k1", Novelty, Novelty),
    (52, "novelty_all_k2", Novelty, Novelty),
    (53, "novelty_all_k3", Novelty, Novelty),
    (54, "novelty_key_k1", Novelty, Novelty),
    (55, "novelty_key_k2", Novelty, Novelty),
    (56, "novelty_key_k3", Novelty, Novelty),
    (57, "pseudo_feedback", PseudoFeedback, PseudoFeedback),
];

/// Canonical text form of the manifest: `index,name,category,kind` lines.
pub fn manifest_text() -> String {
    let mut out = String::from("index,name,category,kind\n");
    for e in MANIFEST {
        writeln!(
            out,
            "{},{},{},{}",
            e.index,
            e.name,
            e.category.name(),
            e.kind.name()
        )
        .unwrap();
    }
    out
}

/// Hash pinning the manifest; stored in vectors and models.
pub fn manifest_hash() -> u64 {
    fnv1a64(0, manifest_text().as_bytes())
}

pub fn feature_name(index: usize) -> &'static str {
    MANIFEST[index].name
}

/// Vector positions belonging to a feature category.
pub fn category_indices(cat: Category) -> Vec<usize> {
    MANIFEST
        .iter()
        .filter(|e| e.category == cat)
        .map(|e| e.index)
        .collect()
}

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("non-finite value at feature index {index} ({name})")]
    NonFinite { index: usize, name: &'static str },
    #[error("feature manifest mismatch: expected {expected:#018x}, found {found:#018x}")]
    ManifestMismatch { expected: u64, found: u64 },
    #[error("failed to load lexicon {path}: {source}")]
    LexiconIo {
        path: String,
        source: std::io::Error,
    },
    #[error("POS tags misaligned: {tags} tags for {tokens} tokens")]
    TagMismatch { tags: usize, tokens: usize },
}

/// The fixed-order 58-dimensional feature vector of one message.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub values: [f64; TOTAL_FEATURES],
    pub manifest_hash: u64,
}

/// Concatenate context, novelty and pseudo-feedback values in manifest
/// order, rejecting non-finite inputs.
pub fn assemble(
    context: &[f64; CONTEXT_FEATURES],
    nov: &NoveltyScores,
    pf: f64,
) -> Result<FeatureVector, FeatureError> {
    let mut values = [0.0; TOTAL_FEATURES];
    values[..CONTEXT_FEATURES].copy_from_slice(context);
    values[CONTEXT_FEATURES..CONTEXT_FEATURES + NOVELTY_FEATURES].copy_from_slice(&nov.as_array());
    values[PF_INDEX] = pf;
    for (index, v) in values.iter().enumerate() {
        if !v.is_finite() {
            return Err(FeatureError::NonFinite {
                index,
                name: feature_name(index),
            });
        }
    }
    Ok(FeatureVector {
        values,
        manifest_hash: manifest_hash(),
    })
}

/// Named term sets backing the sentiment, emotion, extreme-word, quantity
/// and time features. Loaded from one plain-text file per set (one term per
/// line, `#` comments allowed); missing files mean empty sets.
#[derive(Debug, Clone, Default)]
pub struct LexiconPack {
    pub strong_pos: HashSet<String>,
    pub weak_pos: HashSet<String>,
    pub strong_neg: HashSet<String>,
    pub weak_neg: HashSet<String>,
    pub emotion_positive: HashSet<String>,
    pub emotion_negative: HashSet<String>,
    pub emotion_sad: HashSet<String>,
    pub emotion_anxious: HashSet<String>,
    pub emotion_surprised: HashSet<String>,
    pub extreme_words: HashSet<String>,
    pub quantity_words: HashSet<String>,
    pub time_words: HashSet<String>,
}

pub const LEXICON_FILES: [&str; 12] = [
    "strong_pos",
    "weak_pos",
    "strong_neg",
    "weak_neg",
    "emotion_positive",
    "emotion_negative",
    "emotion_sad",
    "emotion_anxious",
    "emotion_surprised",
    "extreme_words",
    "quantity_words",
    "time_words",
];

fn load_set(dir: &Path, name: &str) -> Result<HashSet<String>, FeatureError> {
    let path = dir.join(format!("{name}.txt"));
    if !path.exists() {
        return Ok(HashSet::new());
    }
    let text = fs::read_to_string(&path).map_err(|source| FeatureError::LexiconIo {
        path: path.display().to_string(),
        source,
    })?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| l.to_lowercase())
        .collect())
}

impl LexiconPack {
    pub fn load(dir: impl AsRef<Path>) -> Result<Self, FeatureError> {
        let dir = dir.as_ref();
        Ok(Self {
            strong_pos: load_set(dir, "strong_pos")?,
            weak_pos: load_set(dir, "weak_pos")?,
            strong_neg: load_set(dir, "strong_neg")?,
            weak_neg: load_set(dir, "weak_neg")?,
            emotion_positive: load_set(dir, "emotion_positive")?,
            emotion_negative: load_set(dir, "emotion_negative")?,
            emotion_sad: load_set(dir, "emotion_sad")?,
            emotion_anxious: load_set(dir, "emotion_anxious")?,
            emotion_surprised: load_set(dir, "emotion_surprised")?,
            extreme_words: load_set(dir, "extreme_words")?,
            quantity_words: load_set(dir, "quantity_words")?,
            time_words: load_set(dir, "time_words")?,
        })
    }
}

/// Dictionary tagger: quantity and time tags come from the lexicon pack,
/// verb/noun/adjective from small dictionaries in the same directory
/// (`pos_verb.txt`, `pos_noun.txt`, `pos_adjective.txt`). Purely numeric
/// tokens count as quantity words.
#[derive(Debug, Clone, Default)]
pub struct PosTagger {
    pub verbs: HashSet<String>,
    pub nouns: HashSet<String>,
    pub adjectives: HashSet<String>,
}

impl PosTagger {
    pub fn load(dir: impl AsRef<Path>) -> Result<Self, FeatureError> {
        let dir = dir.as_ref();
        Ok(Self {
            verbs: load_set(dir, "pos_verb")?,
            nouns: load_set(dir, "pos_noun")?,
            adjectives: load_set(dir, "pos_adjective")?,
        })
    }

    pub fn tag(&self, term: &str, lexicons: &LexiconPack) -> PosTag {
        if lexicons.quantity_words.contains(term) || term.chars().all(|c| c.is_ascii_digit()) {
            PosTag::Quantity
        } else if lexicons.time_words.contains(term) {
            PosTag::Time
        } else if self.verbs.contains(term) {
            PosTag::Verb
        } else if self.nouns.contains(term) {
            PosTag::Noun
        } else if self.adjectives.contains(term) {
            PosTag::Adjective
        } else {
            PosTag::Other
        }
    }

    /// One tag per token. Tags carried by the message take precedence and
    /// must align with the token list.
    pub fn tag_doc(
        &self,
        msg: &Message,
        doc: &TokenizedDoc,
        lexicons: &LexiconPack,
    ) -> Result<Vec<PosTag>, FeatureError> {
        if let Some(tags) = &msg.pos {
            if tags.len() != doc.terms.len() {
                return Err(FeatureError::TagMismatch {
                    tags: tags.len(),
                    tokens: doc.terms.len(),
                });
            }
            return Ok(tags.clone());
        }
        Ok(doc.terms.iter().map(|t| self.tag(t, lexicons)).collect())
    }
}

const EMOTICONS: [&str; 12] = [
    ":)", ":(", ":D", ":P", ";)", ":-)", ":-(", ":'(", "T_T", "^_^", "囧", "orz",
];

#[inline]
fn is_excl(c: char) -> bool {
    c == '!' || c == '！'
}

#[inline]
fn is_quest(c: char) -> bool {
    c == '?' || c == '？'
}

#[inline]
fn is_period(c: char) -> bool {
    c == '.' || c == '。'
}

#[inline]
fn is_comma(c: char) -> bool {
    c == ',' || c == '，'
}

fn count_runs(text: &str, pred: fn(char) -> bool) -> (u32, u32) {
    let mut total = 0u32;
    let mut multi_runs = 0u32;
    let mut run = 0u32;
    for c in text.chars() {
        if pred(c) {
            total += 1;
            run += 1;
        } else {
            if run >= 2 {
                multi_runs += 1;
            }
            run = 0;
        }
    }
    if run >= 2 {
        multi_runs += 1;
    }
    (total, multi_runs)
}

fn has_interrobang(text: &str) -> bool {
    let mut prev_quest = false;
    for c in text.chars() {
        if prev_quest && is_excl(c) {
            return true;
        }
        prev_quest = is_quest(c);
    }
    false
}

fn has_ellipsis(text: &str) -> bool {
    text.contains("...") || text.contains('…')
}

fn lexicon_hits(doc: &TokenizedDoc, set: &HashSet<String>) -> u32 {
    if set.is_empty() {
        return 0;
    }
    doc.terms
        .iter()
        .filter(|t| set.contains(t.as_str()))
        .count() as u32
}

fn is_picture_term(term: &str) -> bool {
    is_url_term(term)
        && (term.ends_with(".jpg")
            || term.ends_with(".jpeg")
            || term.ends_with(".png")
            || term.ends_with(".gif"))
}

/// Compute the 51 context features in manifest order. Counts are raw;
/// ratio/degree features are normalized by token count (0 for empty docs);
/// flags are 0 or 1.
pub fn context_features(
    msg: &Message,
    doc: &TokenizedDoc,
    tags: &[PosTag],
    lexicons: &LexiconPack,
) -> [f64; CONTEXT_FEATURES] {
    let text = &msg.text;
    let tokens = doc.terms.len() as f64;
    let norm = |count: u32| -> f64 {
        if tokens == 0.0 {
            0.0
        } else {
            f64::from(count) / tokens
        }
    };

    let mut f = [0.0; CONTEXT_FEATURES];

    // punctuation
    let (excl, multi_excl) = count_runs(text, is_excl);
    let (quest, multi_quest) = count_runs(text, is_quest);
    f[0] = f64::from(excl);
    f[1] = f64::from(quest);
    f[2] = f64::from(text.chars().filter(|&c| is_period(c)).count() as u32);
    f[3] = f64::from(text.chars().filter(|&c| is_comma(c)).count() as u32);
    f[4] = f64::from(multi_excl);
    f[5] = f64::from(multi_quest);
    f[6] = f64::from(u8::from(has_interrobang(text)));
    f[7] = f64::from(u8::from(has_ellipsis(text)));

    // POS
    let tag_count = |wanted: PosTag| tags.iter().filter(|&&t| t == wanted).count() as u32;
    let verb = tag_count(PosTag::Verb);
    let noun = tag_count(PosTag::Noun);
    let adj = tag_count(PosTag::Adjective);
    let quant = tag_count(PosTag::Quantity);
    let time = tag_count(PosTag::Time);
    f[8] = f64::from(verb);
    f[9] = f64::from(noun);
    f[10] = f64::from(adj);
    f[11] = f64::from(quant);
    f[12] = f64::from(time);
    f[13] = norm(verb);
    f[14] = norm(noun);
    f[15] = norm(adj);
    f[16] = norm(quant);
    f[17] = norm(time);

    // sentiment
    let sp = lexicon_hits(doc, &lexicons.strong_pos);
    let wp = lexicon_hits(doc, &lexicons.weak_pos);
    let sn = lexicon_hits(doc, &lexicons.strong_neg);
    let wn = lexicon_hits(doc, &lexicons.weak_neg);
    f[18] = f64::from(sp);
    f[19] = f64::from(wp);
    f[20] = f64::from(sn);
    f[21] = f64::from(wn);
    f[22] = norm(sp);
    f[23] = norm(wp);
    f[24] = norm(sn);
    f[25] = norm(wn);

    // emotion: degree + presence per category
    let emo = [
        lexicon_hits(doc, &lexicons.emotion_positive),
        lexicon_hits(doc, &lexicons.emotion_negative),
        lexicon_hits(doc, &lexicons.emotion_sad),
        lexicon_hits(doc, &lexicons.emotion_anxious),
        lexicon_hits(doc, &lexicons.emotion_surprised),
    ];
    for (i, hits) in emo.iter().enumerate() {
        f[26 + i] = norm(*hits);
        f[31 + i] = f64::from(u8::from(*hits > 0));
    }

    // extreme words
    let extreme = lexicon_hits(doc, &lexicons.extreme_words);
    f[36] = f64::from(extreme);
    f[37] = norm(extreme);

    // social media
    let hashtags = doc.terms.iter().filter(|t| is_hashtag_term(t)).count() as u32;
    let mentions = doc.terms.iter().filter(|t| is_mention_term(t)).count() as u32;
    let lower = text.to_lowercase();
    let repost = lower.contains("//@") || lower.starts_with("rt @") || lower.contains("转发");
    let emoticons: u32 = EMOTICONS.iter().map(|e| text.matches(e).count() as u32).sum();
    f[38] = f64::from(hashtags);
    f[39] = f64::from(u8::from(hashtags > 0));
    f[40] = f64::from(mentions);
    f[41] = f64::from(u8::from(mentions > 0));
    f[42] = f64::from(u8::from(repost));
    f[43] = f64::from(emoticons);

    // length
    let chars = text.chars().count() as u32;
    let unique = doc.unique_terms.len() as u32;
    f[44] = f64::from(chars);
    f[45] = tokens;
    f[46] = f64::from(unique);
    f[47] = norm(unique);

    // URLs
    let urls = doc.terms.iter().filter(|t| is_url_term(t)).count() as u32;
    let picture = doc.terms.iter().any(|t| is_picture_term(t))
        || lower.contains("[pic]")
        || lower.contains("[图片]");
    f[48] = f64::from(urls);
    f[49] = f64::from(u8::from(urls > 0));
    f[50] = f64::from(u8::from(picture));

    f
}
