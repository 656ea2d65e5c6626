//! Trusted-resource novelty memory.
//!
//! Two routes to novelty are provided. The primary one is kterm hashing:
//! every size-k combination of a document's distinct terms (k = 1..=3) is
//! hashed into a per-k Bloom filter while building the memory from the news
//! corpus, and a message's novelty at level k is the fraction of its kterms
//! absent from filter k. The filters form a single fixed-size representation
//! spanning all trusted articles, so a lookup never touches the articles
//! themselves. The alternative route slides a term window over each article
//! and scores novelty as one minus the best cosine similarity between the
//! message vector and any window vector.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use thiserror::Error;

use crate::bin;
use crate::hash::PairHasher;
use crate::ingest::TokenizedDoc;
use crate::textstats::{TfIdfVector, Vocabulary};

/// Reserved byte separating the terms of a canonical kterm key (U+001F,
/// the ASCII unit separator). Terms must not contain it.
pub const KTERM_SEPARATOR: char = '\u{1f}';

const MEMORY_MAGIC: &[u8; 6] = b"RMDMEM";
const MEMORY_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("not a memory file (bad magic)")]
    BadMagic,
    #[error("unsupported memory file version {0}")]
    Version(u32),
}

/// Fixed-size bit array with double hashing. No false negatives; false
/// positives at a rate governed by (m, h, inserted count).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BloomFilter {
    bits: Vec<u64>,
    num_bits: u64,
    num_hashes: u32,
    seeds: [u64; 2],
    inserted_count: u64,
}

impl BloomFilter {
    pub fn new(num_bits: u64, num_hashes: u32, seeds: [u64; 2]) -> Self {
        assert!(num_bits >= 1, "bloom filter needs at least one bit");
        assert!(num_hashes >= 1, "bloom filter needs at least one hash");
        let words = num_bits.div_ceil(64) as usize;
        Self {
            bits: vec![0; words],
            num_bits,
            num_hashes,
            seeds,
            inserted_count: 0,
        }
    }

    pub fn num_bits(&self) -> u64 {
        self.num_bits
    }

    pub fn num_hashes(&self) -> u32 {
        self.num_hashes
    }

    pub fn seeds(&self) -> [u64; 2] {
        self.seeds
    }

    pub fn inserted_count(&self) -> u64 {
        self.inserted_count
    }

    pub fn ones(&self) -> u64 {
        self.bits.iter().map(|w| u64::from(w.count_ones())).sum()
    }

    #[inline]
    fn set(&mut self, bit: u64) {
        self.bits[(bit / 64) as usize] |= 1 << (bit % 64);
    }

    #[inline]
    fn get(&self, bit: u64) -> bool {
        self.bits[(bit / 64) as usize] & (1 << (bit % 64)) != 0
    }

    /// Insert an item from its digest pair. Positions follow the double
    /// hashing scheme `g_i = h1 + i * h2 (mod m)` with `h2` forced odd.
    #[inline]
    pub fn insert_hash(&mut self, h1: u64, h2: u64) {
        let h2 = h2 | 1;
        for i in 0..u64::from(self.num_hashes) {
            self.set(h1.wrapping_add(i.wrapping_mul(h2)) % self.num_bits);
        }
        self.inserted_count += 1;
    }

    #[inline]
    pub fn contains_hash(&self, h1: u64, h2: u64) -> bool {
        let h2 = h2 | 1;
        (0..u64::from(self.num_hashes))
            .all(|i| self.get(h1.wrapping_add(i.wrapping_mul(h2)) % self.num_bits))
    }

    pub fn insert(&mut self, key: &str) {
        let mut h = PairHasher::new(self.seeds);
        h.write(key.as_bytes());
        let (h1, h2) = h.finish();
        self.insert_hash(h1, h2);
    }

    pub fn contains(&self, key: &str) -> bool {
        let mut h = PairHasher::new(self.seeds);
        h.write(key.as_bytes());
        let (h1, h2) = h.finish();
        self.contains_hash(h1, h2)
    }

    fn write_to<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        bin::write_u64(w, self.num_bits)?;
        bin::write_u32(w, self.num_hashes)?;
        bin::write_u64(w, self.seeds[0])?;
        bin::write_u64(w, self.seeds[1])?;
        bin::write_u64(w, self.inserted_count)?;
        for &word in &self.bits {
            bin::write_u64(w, word)?;
        }
        Ok(())
    }

    fn read_from<R: Read>(r: &mut R) -> std::io::Result<Self> {
        let num_bits = bin::read_u64(r)?;
        let num_hashes = bin::read_u32(r)?;
        let seeds = [bin::read_u64(r)?, bin::read_u64(r)?];
        let inserted_count = bin::read_u64(r)?;
        let words = num_bits.div_ceil(64) as usize;
        let mut bits = Vec::with_capacity(words);
        for _ in 0..words {
            bits.push(bin::read_u64(r)?);
        }
        Ok(Self {
            bits,
            num_bits,
            num_hashes,
            seeds,
            inserted_count,
        })
    }
}

/// Expected false-positive probability of a Bloom filter with `m` bits and
/// `h` hash functions after `inserted` insertions.
pub fn analytic_fp_bound(m: u64, h: u32, inserted: u64) -> f64 {
    let exponent = -(f64::from(h) * inserted as f64) / m as f64;
    (1.0 - exponent.exp()).powi(h as i32)
}

/// Number of size-k subsets of an n-element set, for k <= 3.
pub fn kterm_count(n: usize, k: usize) -> u64 {
    let n = n as u64;
    match k {
        1 => n,
        2 => {
            if n < 2 {
                0
            } else {
                n * (n - 1) / 2
            }
        }
        3 => {
            if n < 3 {
                0
            } else {
                n * (n - 1) * (n - 2) / 6
            }
        }
        _ => panic!("kterm length {k} out of range"),
    }
}

/// Enumerate the canonical kterm keys of a term set: every size-k
/// combination, terms sorted lexicographically and joined with
/// [`KTERM_SEPARATOR`].
pub fn enumerate_kterms(unique_terms: &BTreeSet<String>, k: usize) -> BTreeSet<String> {
    assert!((1..=3).contains(&k), "kterm length {k} out of range");
    let terms: Vec<&str> = unique_terms.iter().map(String::as_str).collect();
    let mut out = BTreeSet::new();
    match k {
        1 => {
            for t in &terms {
                out.insert((*t).to_string());
            }
        }
        2 => {
            for i in 0..terms.len() {
                for j in i + 1..terms.len() {
                    out.insert(format!("{}{KTERM_SEPARATOR}{}", terms[i], terms[j]));
                }
            }
        }
        3 => {
            for i in 0..terms.len() {
                for j in i + 1..terms.len() {
                    for l in j + 1..terms.len() {
                        out.insert(format!(
                            "{}{KTERM_SEPARATOR}{}{KTERM_SEPARATOR}{}",
                            terms[i], terms[j], terms[l]
                        ));
                    }
                }
            }
        }
        _ => unreachable!(),
    }
    out
}

/// Visit the digest pair of every size-k combination of `terms` (which must
/// be sorted and distinct) without materializing key strings. Digests are
/// identical to hashing the joined canonical key, because the underlying
/// hash is byte-serial.
fn for_each_kterm_hash<F: FnMut(u64, u64)>(terms: &[&str], k: usize, seeds: [u64; 2], f: &mut F) {
    if k == 0 || terms.len() < k {
        return;
    }
    fn go<F: FnMut(u64, u64)>(
        terms: &[&str],
        k_left: usize,
        start: usize,
        state: PairHasher,
        first: bool,
        f: &mut F,
    ) {
        let end = terms.len() - (k_left - 1);
        for (i, term) in terms.iter().enumerate().take(end).skip(start) {
            let mut s = state;
            if !first {
                s.write_byte(KTERM_SEPARATOR as u8);
            }
            s.write(term.as_bytes());
            if k_left == 1 {
                let (h1, h2) = s.finish();
                f(h1, h2);
            } else {
                go(terms, k_left - 1, i + 1, s, false, f);
            }
        }
    }
    go(terms, k, 0, PairHasher::new(seeds), true, f);
}

/// The six kterm novelty features of one document.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoveltyScores {
    pub all_k1: f64,
    pub all_k2: f64,
    pub all_k3: f64,
    pub key_k1: f64,
    pub key_k2: f64,
    pub key_k3: f64,
}

impl NoveltyScores {
    pub fn zero() -> Self {
        Self {
            all_k1: 0.0,
            all_k2: 0.0,
            all_k3: 0.0,
            key_k1: 0.0,
            key_k2: 0.0,
            key_k3: 0.0,
        }
    }

    pub fn as_array(&self) -> [f64; 6] {
        [
            self.all_k1,
            self.all_k2,
            self.all_k3,
            self.key_k1,
            self.key_k2,
            self.key_k3,
        ]
    }
}

/// One Bloom filter per kterm length 1..=3; together they are the
/// collective memory of all trusted resources. Total footprint is fixed at
/// 3 * m bits no matter how many documents are inserted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KtermMemory {
    filters: [BloomFilter; 3],
}

impl KtermMemory {
    pub fn new(num_bits: u64, num_hashes: u32, seeds: [u64; 2]) -> Self {
        Self {
            filters: [
                BloomFilter::new(num_bits, num_hashes, seeds),
                BloomFilter::new(num_bits, num_hashes, seeds),
                BloomFilter::new(num_bits, num_hashes, seeds),
            ],
        }
    }

    pub fn filter(&self, k: usize) -> &BloomFilter {
        assert!((1..=3).contains(&k), "kterm length {k} out of range");
        &self.filters[k - 1]
    }

    /// Insert all kterms of a document's distinct-term set, for every k.
    /// Empty sets are a no-op.
    pub fn insert_document(&mut self, unique_terms: &BTreeSet<String>) {
        let terms: Vec<&str> = unique_terms.iter().map(String::as_str).collect();
        for k in 1..=3 {
            let filter = &mut self.filters[k - 1];
            let seeds = filter.seeds;
            for_each_kterm_hash(&terms, k, seeds, &mut |h1, h2| filter.insert_hash(h1, h2));
        }
    }

    /// Fraction of the set's kterms absent from filter k. A set producing
    /// no kterms at level k scores 0.0: no content, no unconfirmed content.
    pub fn kterm_novelty(&self, unique_terms: &BTreeSet<String>, k: usize) -> f64 {
        let terms: Vec<&str> = unique_terms.iter().map(String::as_str).collect();
        self.novelty_of_sorted(&terms, k)
    }

    fn novelty_of_sorted(&self, terms: &[&str], k: usize) -> f64 {
        assert!((1..=3).contains(&k), "kterm length {k} out of range");
        let total = kterm_count(terms.len(), k);
        if total == 0 {
            return 0.0;
        }
        let filter = &self.filters[k - 1];
        let mut absent = 0u64;
        for_each_kterm_hash(terms, k, filter.seeds, &mut |h1, h2| {
            if !filter.contains_hash(h1, h2) {
                absent += 1;
            }
        });
        absent as f64 / total as f64
    }

    /// The six novelty features: kterm novelty over all distinct terms and
    /// over the keyword set, for k = 1..=3, against the same per-k filters.
    pub fn novelty_scores(&self, doc: &TokenizedDoc, keywords: &[String]) -> NoveltyScores {
        let all: Vec<&str> = doc.unique_terms.iter().map(String::as_str).collect();
        let mut key: Vec<&str> = keywords.iter().map(String::as_str).collect();
        key.sort_unstable();
        key.dedup();
        NoveltyScores {
            all_k1: self.novelty_of_sorted(&all, 1),
            all_k2: self.novelty_of_sorted(&all, 2),
            all_k3: self.novelty_of_sorted(&all, 3),
            key_k1: self.novelty_of_sorted(&key, 1),
            key_k2: self.novelty_of_sorted(&key, 2),
            key_k3: self.novelty_of_sorted(&key, 3),
        }
    }

    fn write_to<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        for f in &self.filters {
            f.write_to(w)?;
        }
        Ok(())
    }

    fn read_from<R: Read>(r: &mut R) -> std::io::Result<Self> {
        Ok(Self {
            filters: [
                BloomFilter::read_from(r)?,
                BloomFilter::read_from(r)?,
                BloomFilter::read_from(r)?,
            ],
        })
    }
}

/// One sliding-window sub-document of a news article.
#[derive(Debug, Clone, PartialEq)]
pub struct SubDocWindow {
    pub article_id: String,
    pub offset: u32,
    pub vector: TfIdfVector,
}

/// tf-idf index over term-level sliding windows of the news articles,
/// sized to resemble social-media messages.
#[derive(Debug, Clone, PartialEq)]
pub struct SubDocIndex {
    windows: Vec<SubDocWindow>,
    window_length: u32,
    stride: u32,
    keep_top_terms: Option<u32>,
}

impl SubDocIndex {
    pub fn windows(&self) -> &[SubDocWindow] {
        &self.windows
    }

    pub fn window_length(&self) -> u32 {
        self.window_length
    }

    pub fn stride(&self) -> u32 {
        self.stride
    }

    pub fn keep_top_terms(&self) -> Option<u32> {
        self.keep_top_terms
    }

    fn write_to<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        bin::write_u32(w, self.window_length)?;
        bin::write_u32(w, self.stride)?;
        bin::write_u32(w, self.keep_top_terms.unwrap_or(0))?;
        bin::write_u32(w, self.windows.len() as u32)?;
        for win in &self.windows {
            bin::write_str(w, &win.article_id)?;
            bin::write_u32(w, win.offset)?;
            win.vector.write_to(w)?;
        }
        Ok(())
    }

    fn read_from<R: Read>(r: &mut R) -> std::io::Result<Self> {
        let window_length = bin::read_u32(r)?;
        let stride = bin::read_u32(r)?;
        let keep = bin::read_u32(r)?;
        let n = bin::read_u32(r)? as usize;
        let mut windows = Vec::with_capacity(n);
        for _ in 0..n {
            let article_id = bin::read_str(r)?;
            let offset = bin::read_u32(r)?;
            let vector = TfIdfVector::read_from(r)?;
            windows.push(SubDocWindow {
                article_id,
                offset,
                vector,
            });
        }
        Ok(Self {
            windows,
            window_length,
            stride,
            keep_top_terms: if keep == 0 { None } else { Some(keep) },
        })
    }
}

/// Build the sliding-window index. Articles shorter than the window length
/// contribute one window covering the whole article; windows that tokenize
/// to nothing are dropped so every stored vector has positive norm.
pub fn build_subdoc_index(
    corpus: &[TokenizedDoc],
    vocab: &Vocabulary,
    window_length: u32,
    stride: u32,
    keep_top_terms: Option<u32>,
) -> SubDocIndex {
    assert!(window_length >= 1, "window length must be positive");
    assert!(stride >= 1, "stride must be positive");
    let len_l = window_length as usize;
    let mut windows = Vec::new();
    for doc in corpus {
        let n = doc.terms.len();
        let upper = n.saturating_sub(len_l) + 1;
        let mut offset = 0usize;
        while offset < upper.max(1) {
            let slice = &doc.terms[offset..(offset + len_l).min(n)];
            let window_doc = TokenizedDoc::new(doc.doc_id.clone(), slice.to_vec());
            let mut vector = crate::textstats::tfidf_vector(&window_doc, vocab);
            if let Some(top) = keep_top_terms {
                vector = vector.truncate_top(top as usize);
            }
            if vector.norm() > 0.0 {
                windows.push(SubDocWindow {
                    article_id: doc.doc_id.clone(),
                    offset: offset as u32,
                    vector,
                });
            }
            offset += stride as usize;
        }
    }
    SubDocIndex {
        windows,
        window_length,
        stride,
        keep_top_terms,
    }
}

/// Vector-proximity novelty: one minus the best cosine similarity between
/// the message vector and any stored window. An empty index or a zero-norm
/// message matches nothing and scores 1.0.
pub fn vector_novelty(index: &SubDocIndex, doc_vector: &TfIdfVector) -> f64 {
    if index.windows.is_empty() || doc_vector.norm() == 0.0 {
        return 1.0;
    }
    let mut best = 0.0f64;
    for win in &index.windows {
        let c = doc_vector.cosine(&win.vector);
        if c > best {
            best = c;
        }
    }
    (1.0 - best).clamp(0.0, 1.0)
}

/// Everything detection needs from the trusted corpus: the vocabulary, the
/// kterm memory, and the sub-document index, persisted as one file.
#[derive(Debug, Clone, PartialEq)]
pub struct TrustedMemory {
    pub vocab: Vocabulary,
    pub kterms: KtermMemory,
    pub index: SubDocIndex,
}

impl TrustedMemory {
    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), StoreError> {
        let mut w = BufWriter::new(File::create(path)?);
        w.write_all(MEMORY_MAGIC)?;
        bin::write_u32(&mut w, MEMORY_VERSION)?;
        self.vocab.write_to(&mut w)?;
        self.kterms.write_to(&mut w)?;
        self.index.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, StoreError> {
        let mut r = BufReader::new(File::open(path)?);
        let mut magic = [0u8; 6];
        r.read_exact(&mut magic)?;
        if &magic != MEMORY_MAGIC {
            return Err(StoreError::BadMagic);
        }
        let version = bin::read_u32(&mut r)?;
        if version != MEMORY_VERSION {
            return Err(StoreError::Version(version));
        }
        let vocab = Vocabulary::read_from(&mut r)?;
        let kterms = KtermMemory::read_from(&mut r)?;
        let index = SubDocIndex::read_from(&mut r)?;
        Ok(Self {
            vocab,
            kterms,
            index,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hash::DEFAULT_SEEDS;
    use proptest::prelude::*;

    fn term_set(terms: &[&str]) -> BTreeSet<String> {
        terms.iter().map(|s| s.to_string()).collect()
    }

    fn doc(id: &str, terms: &[&str]) -> TokenizedDoc {
        TokenizedDoc::new(id, terms.iter().map(|s| s.to_string()).collect())
    }

    fn small_memory() -> KtermMemory {
        KtermMemory::new(1 << 16, 7, DEFAULT_SEEDS)
    }

    #[test]
    fn enumerate_counts_match_binomials() {
        let set = term_set(&["a", "b", "c", "d"]);
        assert_eq!(enumerate_kterms(&set, 1).len(), 4);
        assert_eq!(enumerate_kterms(&set, 2).len(), 6);
        assert_eq!(enumerate_kterms(&set, 3).len(), 4);
        assert_eq!(enumerate_kterms(&term_set(&["a"]), 3).len(), 0);
    }

    #[test]
    fn enumerate_is_canonical() {
        let set = term_set(&["b", "a"]);
        let kterms = enumerate_kterms(&set, 2);
        assert_eq!(kterms.len(), 1);
        assert!(kterms.contains(&format!("a{KTERM_SEPARATOR}b")));
    }

    #[test]
    fn incremental_hashing_matches_enumerated_keys() {
        let set = term_set(&["gamma", "alpha", "beta", "delta"]);
        let terms: Vec<&str> = set.iter().map(String::as_str).collect();
        for k in 1..=3 {
            let mut streamed = Vec::new();
            for_each_kterm_hash(&terms, k, DEFAULT_SEEDS, &mut |h1, h2| {
                streamed.push((h1, h2));
            });
            let mut joined = Vec::new();
            for key in enumerate_kterms(&set, k) {
                let mut h = PairHasher::new(DEFAULT_SEEDS);
                h.write(key.as_bytes());
                joined.push(h.finish());
            }
            streamed.sort_unstable();
            joined.sort_unstable();
            assert_eq!(streamed, joined, "k={k}");
        }
    }

    #[test]
    fn self_membership_after_insert() {
        let mut mem = small_memory();
        let set = term_set(&["one", "two", "three"]);
        mem.insert_document(&set);
        for k in 1..=3 {
            assert_eq!(mem.kterm_novelty(&set, k), 0.0, "k={k}");
        }
    }

    #[test]
    fn empty_insert_is_noop() {
        let mut mem = small_memory();
        mem.insert_document(&BTreeSet::new());
        for k in 1..=3 {
            assert_eq!(mem.filter(k).inserted_count(), 0);
            assert_eq!(mem.filter(k).ones(), 0);
        }
    }

    #[test]
    fn novelty_on_empty_memory_is_one() {
        let mem = small_memory();
        let set = term_set(&["x", "y", "z"]);
        assert_eq!(mem.kterm_novelty(&set, 1), 1.0);
    }

    #[test]
    fn half_unseen_at_k1() {
        let mut mem = small_memory();
        mem.insert_document(&term_set(&["a", "b"]));
        let q = term_set(&["a", "c"]);
        assert_eq!(mem.kterm_novelty(&q, 1), 0.5);
    }

    #[test]
    fn zero_kterm_sets_score_zero() {
        let mem = small_memory();
        assert_eq!(mem.kterm_novelty(&BTreeSet::new(), 1), 0.0);
        assert_eq!(mem.kterm_novelty(&term_set(&["a"]), 2), 0.0);
    }

    #[test]
    fn novelty_scores_extremes() {
        let mut mem = small_memory();
        mem.insert_document(&term_set(&["a", "b", "c", "d"]));

        let empty = doc("q", &[]);
        let scores = mem.novelty_scores(&empty, &[]);
        assert_eq!(scores.as_array(), [0.0; 6]);

        let contained = doc("q", &["a", "b", "c"]);
        let kw = vec!["a".to_string(), "b".to_string()];
        let scores = mem.novelty_scores(&contained, &kw);
        assert_eq!(scores.as_array(), [0.0; 6]);

        let unseen = doc("q", &["p", "q", "r"]);
        let kw = vec!["p".to_string(), "q".to_string(), "r".to_string()];
        let scores = mem.novelty_scores(&unseen, &kw);
        assert_eq!(scores.as_array(), [1.0; 6]);
    }

    #[test]
    fn inserted_count_tracks_kterms() {
        let mut mem = small_memory();
        mem.insert_document(&term_set(&["a", "b", "c", "d"]));
        assert_eq!(mem.filter(1).inserted_count(), 4);
        assert_eq!(mem.filter(2).inserted_count(), 6);
        assert_eq!(mem.filter(3).inserted_count(), 4);
    }

    #[test]
    fn footprint_is_constant() {
        let mut mem = small_memory();
        let words_before = mem.filters.iter().map(|f| f.bits.len()).sum::<usize>();
        for i in 0..50 {
            let terms: Vec<String> = (0..20).map(|j| format!("t{i}_{j}")).collect();
            mem.insert_document(&terms.into_iter().collect());
        }
        let words_after = mem.filters.iter().map(|f| f.bits.len()).sum::<usize>();
        assert_eq!(words_before, words_after);
        assert_eq!(words_after as u64 * 64, 3 * (1 << 16));
    }

    #[test]
    fn subdoc_window_counts() {
        let vocab = Vocabulary::build(&[doc("a", &["x"])]).unwrap();
        let terms: Vec<&str> = (0..20).map(|_| "x").collect();
        let idx = build_subdoc_index(&[doc("a1", &terms)], &vocab, 14, 1, None);
        assert_eq!(idx.windows().len(), 7);

        let idx = build_subdoc_index(&[doc("a1", &["x"; 5])], &vocab, 14, 1, None);
        assert_eq!(idx.windows().len(), 1);
        assert_eq!(idx.windows()[0].vector.entries().len(), 1);
    }

    #[test]
    fn subdoc_truncation_matches_sort_oracle() {
        // window {a:1, b:2, c:3} with keep_top_terms = 2 keeps {b, c}
        let vocab = Vocabulary::build(&[doc("d", &["a", "b", "c"])]).unwrap();
        let terms = ["a", "b", "b", "c", "c", "c"];
        let idx = build_subdoc_index(&[doc("a1", &terms)], &vocab, 14, 1, Some(2));
        let win = &idx.windows()[0];
        assert_eq!(win.vector.len(), 2);
        assert_eq!(win.vector.weight(vocab.term_key("a")), 0.0);
        assert!(win.vector.weight(vocab.term_key("b")) > 0.0);
        assert!(win.vector.weight(vocab.term_key("c")) > 0.0);
    }

    #[test]
    fn vector_novelty_extremes() {
        let corpus = vec![doc("a1", &["alpha", "beta", "gamma"])];
        let vocab = Vocabulary::build(&corpus).unwrap();
        let idx = build_subdoc_index(&corpus, &vocab, 14, 1, None);

        let same = crate::textstats::tfidf_vector(&doc("q", &["alpha", "beta", "gamma"]), &vocab);
        assert!(vector_novelty(&idx, &same).abs() < 1e-12);

        let disjoint = crate::textstats::tfidf_vector(&doc("q", &["zeta"]), &vocab);
        assert_eq!(vector_novelty(&idx, &disjoint), 1.0);

        let empty = TfIdfVector::empty();
        assert_eq!(vector_novelty(&idx, &empty), 1.0);
    }

    #[test]
    fn vector_novelty_uses_best_window() {
        // Two windows with cosines 0.3 and 0.8 against the query -> 0.2.
        // Construct directly from raw vectors.
        let idx = SubDocIndex {
            windows: vec![
                SubDocWindow {
                    article_id: "a".into(),
                    offset: 0,
                    vector: TfIdfVector::from_entries(vec![(0, 0.3), (1, (1.0f64 - 0.09).sqrt())]),
                },
                SubDocWindow {
                    article_id: "b".into(),
                    offset: 0,
                    vector: TfIdfVector::from_entries(vec![(0, 0.8), (2, (1.0f64 - 0.64).sqrt())]),
                },
            ],
            window_length: 14,
            stride: 1,
            keep_top_terms: None,
        };
        let q = TfIdfVector::from_entries(vec![(0, 1.0)]);
        assert!((vector_novelty(&idx, &q) - 0.2).abs() < 1e-12);
    }

    #[test]
    fn memory_file_roundtrip() {
        let corpus = vec![
            doc("a1", &["alpha", "beta", "gamma", "delta"]),
            doc("a2", &["beta", "epsilon"]),
        ];
        let vocab = Vocabulary::build(&corpus).unwrap();
        let mut kterms = KtermMemory::new(1 << 12, 5, DEFAULT_SEEDS);
        for d in &corpus {
            kterms.insert_document(&d.unique_terms);
        }
        let index = build_subdoc_index(&corpus, &vocab, 3, 1, Some(2));
        let mem = TrustedMemory {
            vocab,
            kterms,
            index,
        };
        let tmp = tempfile::NamedTempFile::new().unwrap();
        mem.save(tmp.path()).unwrap();
        let back = TrustedMemory::load(tmp.path()).unwrap();
        assert_eq!(mem, back);
    }

    #[test]
    fn truncated_memory_file_fails() {
        let corpus = vec![doc("a1", &["alpha", "beta"])];
        let vocab = Vocabulary::build(&corpus).unwrap();
        let mem = TrustedMemory {
            vocab: vocab.clone(),
            kterms: KtermMemory::new(1 << 12, 5, DEFAULT_SEEDS),
            index: build_subdoc_index(&corpus, &vocab, 3, 1, None),
        };
        let tmp = tempfile::NamedTempFile::new().unwrap();
        mem.save(tmp.path()).unwrap();
        let bytes = std::fs::read(tmp.path()).unwrap();
        std::fs::write(tmp.path(), &bytes[..bytes.len() / 2]).unwrap();
        assert!(TrustedMemory::load(tmp.path()).is_err());
    }

    proptest! {
        #[test]
        fn no_false_negatives(docs in proptest::collection::vec(
            proptest::collection::btree_set("[a-f]{1,3}", 1..8), 1..10)) {
            let mut mem = KtermMemory::new(1 << 14, 7, DEFAULT_SEEDS);
            for terms in &docs {
                mem.insert_document(terms);
            }
            for terms in &docs {
                for k in 1..=3 {
                    for key in enumerate_kterms(terms, k) {
                        prop_assert!(mem.filter(k).contains(&key));
                    }
                }
            }
        }

        #[test]
        fn novelty_monotone_under_insertion(
            query in proptest::collection::btree_set("[a-h]{1,3}", 1..8),
            docs in proptest::collection::vec(
                proptest::collection::btree_set("[a-h]{1,3}", 1..8), 1..8)) {
            let mut mem = KtermMemory::new(1 << 14, 7, DEFAULT_SEEDS);
            let mut prev = [1.0f64, 1.0, 1.0];
            for terms in &docs {
                mem.insert_document(terms);
                for k in 1..=3 {
                    let nov = mem.kterm_novelty(&query, k);
                    prop_assert!((0.0..=1.0).contains(&nov));
                    prop_assert!(nov <= prev[k - 1] + 1e-12);
                    prev[k - 1] = nov;
                }
            }
        }

        #[test]
        fn bloom_matches_exact_set_modulo_false_positives(
            inserted in proptest::collection::vec("[a-e]{1,2}", 0..20),
            queries in proptest::collection::vec("[a-e]{1,2}", 0..20)) {
            let mut filter = BloomFilter::new(1 << 14, 7, DEFAULT_SEEDS);
            let mut exact = std::collections::HashSet::new();
            for key in &inserted {
                filter.insert(key);
                exact.insert(key.clone());
            }
            for key in &queries {
                if exact.contains(key) {
                    prop_assert!(filter.contains(key));
                }
                // the converse may fail only with false-positive probability
            }
        }
    }
}
