//! Corpus-level term statistics: document frequencies, smoothed idf,
//! sparse tf-idf vectors, and top-10 keyword extraction.

use std::collections::{BTreeMap, HashMap};
use std::io::{Read, Write};

use thiserror::Error;

use crate::bin;
use crate::hash::fnv1a64;
use crate::ingest::TokenizedDoc;

/// Key space for sparse vector entries. Terms present in the vocabulary use
/// their dense id; out-of-vocabulary terms are mapped into the upper half of
/// the u64 range by a fixed hash, so two messages sharing an unseen term
/// still land on the same coordinate.
const OOV_BIT: u64 = 1 << 63;
const OOV_HASH_SEED: u64 = 0x7465_726d_5f6f_6f76;

#[derive(Debug, Error)]
pub enum TextStatsError {
    #[error("cannot build a vocabulary from an empty corpus")]
    EmptyCorpus,
    #[error("cannot compute average message length of an empty stream")]
    EmptyStream,
}

/// Immutable document-frequency statistics over the trusted news corpus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    total_docs: u32,
    terms: HashMap<String, (u32, u32)>,
    by_id: Vec<String>,
}

impl Vocabulary {
    /// Count document frequencies over a non-empty corpus. Term ids are
    /// assigned densely in order of first appearance, which is deterministic
    /// because corpus order and per-document term sets are.
    pub fn build(corpus: &[TokenizedDoc]) -> Result<Self, TextStatsError> {
        if corpus.is_empty() {
            return Err(TextStatsError::EmptyCorpus);
        }
        let mut terms: HashMap<String, (u32, u32)> = HashMap::new();
        let mut by_id = Vec::new();
        for doc in corpus {
            for term in &doc.unique_terms {
                match terms.get_mut(term) {
                    Some((_, df)) => *df += 1,
                    None => {
                        let id = by_id.len() as u32;
                        terms.insert(term.clone(), (id, 1));
                        by_id.push(term.clone());
                    }
                }
            }
        }
        Ok(Self {
            total_docs: corpus.len() as u32,
            terms,
            by_id,
        })
    }

    pub fn total_docs(&self) -> u32 {
        self.total_docs
    }

    pub fn len(&self) -> usize {
        self.by_id.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_id.is_empty()
    }

    pub fn doc_freq(&self, term: &str) -> u32 {
        self.terms.get(term).map(|&(_, df)| df).unwrap_or(0)
    }

    pub fn term_id(&self, term: &str) -> Option<u32> {
        self.terms.get(term).map(|&(id, _)| id)
    }

    /// Sparse-vector key for a term: dense id if known, stable hash with the
    /// high bit set otherwise.
    pub fn term_key(&self, term: &str) -> u64 {
        match self.term_id(term) {
            Some(id) => u64::from(id),
            None => OOV_BIT | (fnv1a64(OOV_HASH_SEED, term.as_bytes()) >> 1),
        }
    }

    /// Smoothed inverse document frequency: `ln((N + 1) / (df + 1)) + 1`.
    /// Strictly positive, defined for unseen terms (df = 0).
    pub fn idf(&self, term: &str) -> f64 {
        let n = f64::from(self.total_docs);
        let df = f64::from(self.doc_freq(term));
        ((n + 1.0) / (df + 1.0)).ln() + 1.0
    }

    pub fn write_to<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        bin::write_u32(w, self.total_docs)?;
        bin::write_u32(w, self.by_id.len() as u32)?;
        for term in &self.by_id {
            bin::write_str(w, term)?;
            bin::write_u32(w, self.terms[term].1)?;
        }
        Ok(())
    }

    pub fn read_from<R: Read>(r: &mut R) -> std::io::Result<Self> {
        let total_docs = bin::read_u32(r)?;
        let n_terms = bin::read_u32(r)? as usize;
        let mut terms = HashMap::with_capacity(n_terms);
        let mut by_id = Vec::with_capacity(n_terms);
        for id in 0..n_terms {
            let term = bin::read_str(r)?;
            let df = bin::read_u32(r)?;
            terms.insert(term.clone(), (id as u32, df));
            by_id.push(term);
        }
        Ok(Self {
            total_docs,
            terms,
            by_id,
        })
    }
}

/// Sparse tf-idf vector with a cached Euclidean norm. Entries are sorted by
/// key, so iteration order (and therefore every dot product and sum) is
/// deterministic.
#[derive(Debug, Clone, PartialEq)]
pub struct TfIdfVector {
    entries: Vec<(u64, f64)>,
    norm: f64,
}

impl TfIdfVector {
    pub fn from_entries(mut entries: Vec<(u64, f64)>) -> Self {
        entries.retain(|&(_, w)| w != 0.0);
        entries.sort_unstable_by_key(|&(k, _)| k);
        let norm = entries.iter().map(|&(_, w)| w * w).sum::<f64>().sqrt();
        Self { entries, norm }
    }

    pub fn empty() -> Self {
        Self {
            entries: Vec::new(),
            norm: 0.0,
        }
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[(u64, f64)] {
        &self.entries
    }

    pub fn weight(&self, key: u64) -> f64 {
        match self.entries.binary_search_by_key(&key, |&(k, _)| k) {
            Ok(i) => self.entries[i].1,
            Err(_) => 0.0,
        }
    }

    pub fn dot(&self, other: &TfIdfVector) -> f64 {
        let mut sum = 0.0;
        let (mut i, mut j) = (0, 0);
        while i < self.entries.len() && j < other.entries.len() {
            let (ka, wa) = self.entries[i];
            let (kb, wb) = other.entries[j];
            match ka.cmp(&kb) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    sum += wa * wb;
                    i += 1;
                    j += 1;
                }
            }
        }
        sum
    }

    /// Cosine similarity; 0.0 when either vector has zero norm.
    pub fn cosine(&self, other: &TfIdfVector) -> f64 {
        if self.norm == 0.0 || other.norm == 0.0 {
            return 0.0;
        }
        self.dot(other) / (self.norm * other.norm)
    }

    /// Keep only the `n` highest-weighted entries (ties broken by key) and
    /// recompute the norm.
    pub fn truncate_top(&self, n: usize) -> Self {
        if self.entries.len() <= n {
            return self.clone();
        }
        let mut ranked: Vec<(u64, f64)> = self.entries.clone();
        ranked.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
        ranked.truncate(n);
        Self::from_entries(ranked)
    }

    pub fn write_to<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        bin::write_u32(w, self.entries.len() as u32)?;
        for &(k, v) in &self.entries {
            bin::write_u64(w, k)?;
            bin::write_f64(w, v)?;
        }
        bin::write_f64(w, self.norm)
    }

    pub fn read_from<R: Read>(r: &mut R) -> std::io::Result<Self> {
        let n = bin::read_u32(r)? as usize;
        let mut entries = Vec::with_capacity(n);
        for _ in 0..n {
            let k = bin::read_u64(r)?;
            let v = bin::read_f64(r)?;
            entries.push((k, v));
        }
        let norm = bin::read_f64(r)?;
        Ok(Self { entries, norm })
    }
}

/// Per-term raw counts of a document, in sorted term order.
pub fn term_counts(doc: &TokenizedDoc) -> BTreeMap<&str, u32> {
    let mut counts: BTreeMap<&str, u32> = BTreeMap::new();
    for term in &doc.terms {
        *counts.entry(term.as_str()).or_insert(0) += 1;
    }
    counts
}

/// tf-idf vector of a document: raw term count times smoothed idf.
pub fn tfidf_vector(doc: &TokenizedDoc, vocab: &Vocabulary) -> TfIdfVector {
    let entries = term_counts(doc)
        .into_iter()
        .map(|(term, count)| (vocab.term_key(term), f64::from(count) * vocab.idf(term)))
        .collect();
    TfIdfVector::from_entries(entries)
}

/// Ranking of keywords: idf from the news corpus (default) or uniform,
/// which reduces the ranking to raw term frequency.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KeywordIdf {
    News,
    Uniform,
}

/// The up-to-10 distinct terms of a document with the highest tf-idf
/// weight; ties broken lexicographically ascending.
pub const KEYWORD_LIMIT: usize = 10;

pub fn top_keywords(doc: &TokenizedDoc, vocab: &Vocabulary, idf: KeywordIdf) -> Vec<String> {
    let mut ranked: Vec<(f64, &str)> = term_counts(doc)
        .into_iter()
        .map(|(term, count)| {
            let idf = match idf {
                KeywordIdf::News => vocab.idf(term),
                KeywordIdf::Uniform => 1.0,
            };
            (f64::from(count) * idf, term)
        })
        .collect();
    ranked.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(b.1)));
    ranked
        .into_iter()
        .take(KEYWORD_LIMIT)
        .map(|(_, term)| term.to_string())
        .collect()
}

/// Rounded mean term count of a non-empty stream, clamped to at least 1.
pub fn average_message_length(stream: &[TokenizedDoc]) -> Result<u32, TextStatsError> {
    if stream.is_empty() {
        return Err(TextStatsError::EmptyStream);
    }
    let total: u64 = stream.iter().map(|d| d.terms.len() as u64).sum();
    let mean = (total as f64 / stream.len() as f64).round() as u32;
    Ok(mean.max(1))
}
