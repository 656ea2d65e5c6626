//! Seeded synthetic corpus generation: a news corpus, labeled message
//! streams, and matching lexicons, all reproducible from a single seed.
//!
//! The plain stream pairs rumours built largely from corpus-unseen terms
//! with non-rumours paraphrasing windows of single news articles. The
//! duplicate-injected variant additionally plants "echo" rumours that
//! partially repeat an earlier rumour's unseen terms, and noisy non-rumours
//! with the same amount of fresh unseen terms; the two are indistinguishable
//! by novelty or context alone and only pseudo feedback separates them.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::features::{LexiconPack, PosTagger};
use crate::ingest::{Label, Message, NewsArticle};

const CORPUS_POOL: usize = 3000;
const NOVEL_POOL: usize = 2500;
const TYPO_POOL: usize = 2500;
const PUNCT_TOKENS: [&str; 4] = ["!", "!!", "?", "…"];
const STREAM_BASE_TS: i64 = 1_500_000_000;

fn corpus_term(i: usize) -> String {
    format!("w{i:04}")
}

fn novel_term(i: usize) -> String {
    format!("x{i:04}")
}

fn typo_term(i: usize) -> String {
    format!("y{i:04}")
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SynthConfig {
    pub seed: u64,
    pub articles: usize,
    pub messages: usize,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            articles: 200,
            messages: 400,
        }
    }
}

/// The synthetic lexicon sets, written one file per set.
#[derive(Debug, Clone)]
pub struct SynthLexicons {
    pub sets: Vec<(&'static str, Vec<String>)>,
}

impl SynthLexicons {
    fn terms<'a>(&'a self, name: &'a str) -> impl Iterator<Item = String> + 'a {
        self.sets
            .iter()
            .filter(move |(n, _)| *n == name)
            .flat_map(|(_, terms)| terms.iter().cloned())
    }

    pub fn to_pack(&self) -> LexiconPack {
        LexiconPack {
            strong_pos: Default::default(),
            weak_pos: self.terms("weak_pos").collect(),
            strong_neg: self.terms("strong_neg").collect(),
            weak_neg: Default::default(),
            emotion_positive: Default::default(),
            emotion_negative: self.terms("emotion_negative").collect(),
            emotion_sad: Default::default(),
            emotion_anxious: Default::default(),
            emotion_surprised: self.terms("emotion_surprised").collect(),
            extreme_words: self.terms("extreme_words").collect(),
            quantity_words: self.terms("quantity_words").collect(),
            time_words: self.terms("time_words").collect(),
        }
    }

    pub fn to_tagger(&self) -> PosTagger {
        PosTagger {
            verbs: self.terms("pos_verb").collect(),
            nouns: self.terms("pos_noun").collect(),
            adjectives: self.terms("pos_adjective").collect(),
        }
    }

    pub fn write_dir(&self, dir: impl AsRef<std::path::Path>) -> std::io::Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        for (name, terms) in &self.sets {
            let mut body = terms.join("\n");
            body.push('\n');
            std::fs::write(dir.join(format!("{name}.txt")), body)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SynthCorpus {
    pub articles: Vec<NewsArticle>,
    /// Half rumours (>= 30% corpus-unseen terms), half paraphrased news.
    pub stream: Vec<Message>,
    /// Same recipe with echo rumours and noisy non-rumours injected.
    pub stream_dup: Vec<Message>,
    pub lexicons: SynthLexicons,
}

fn make_lexicons(rng: &mut ChaCha8Rng) -> SynthLexicons {
    let named = |prefix: &str, count: usize| -> Vec<String> {
        (0..count).map(|i| format!("{prefix}{i:02}")).collect()
    };
    let corpus_sample = |rng: &mut ChaCha8Rng, count: usize| -> Vec<String> {
        (0..count)
            .map(|_| corpus_term(rng.gen_range(0..CORPUS_POOL)))
            .collect()
    };
    SynthLexicons {
        sets: vec![
            ("extreme_words", named("ext", 20)),
            ("strong_neg", named("neg", 20)),
            ("weak_pos", named("pos", 15)),
            ("emotion_negative", named("emoneg", 15)),
            ("emotion_surprised", named("surp", 15)),
            ("quantity_words", named("qty", 10)),
            ("time_words", named("time", 10)),
            ("pos_verb", corpus_sample(rng, 30)),
            ("pos_noun", corpus_sample(rng, 30)),
            ("pos_adjective", corpus_sample(rng, 30)),
        ],
    }
}

struct ArticleDraft {
    tokens: Vec<String>,
    bag: Vec<String>,
}

fn make_articles(rng: &mut ChaCha8Rng, count: usize, lexicons: &SynthLexicons) -> Vec<ArticleDraft> {
    // each article draws its tokens from a private bag of distinct terms so
    // the per-article kterm count stays bounded
    let mut bags: Vec<Vec<String>> = (0..count)
        .map(|_| {
            let size = rng.gen_range(25..=45);
            let mut bag: Vec<String> = (0..size)
                .map(|_| corpus_term(rng.gen_range(0..CORPUS_POOL)))
                .collect();
            bag.sort();
            bag.dedup();
            bag
        })
        .collect();

    // sprinkle every lexicon term into a few articles so lexicon hits do
    // not read as novelty
    for (name, terms) in &lexicons.sets {
        if name.starts_with("pos_") {
            continue; // POS dictionary terms are corpus terms already
        }
        for term in terms {
            for _ in 0..8 {
                let a = rng.gen_range(0..count);
                bags[a].push(term.clone());
            }
        }
    }
    for bag in bags.iter_mut() {
        bag.sort();
        bag.dedup();
    }

    bags.into_iter()
        .map(|bag| {
            let len = rng.gen_range(20..=200);
            let mut tokens: Vec<String> = (0..len)
                .map(|_| bag[rng.gen_range(0..bag.len())].clone())
                .collect();
            // news articles carry punctuation tokens too, so message
            // punctuation never reads as unseen content
            for p in PUNCT_TOKENS {
                tokens.insert(rng.gen_range(0..=tokens.len()), p.to_string());
            }
            ArticleDraft { tokens, bag }
        })
        .collect()
}

/// Per-class rates for the decorations a message may carry.
struct ContextProfile {
    excl: f64,
    quest: f64,
    extreme: f64,
    strong_neg: f64,
    emo_negative: f64,
    emo_surprised: f64,
}

const RUMOUR_PROFILE: ContextProfile = ContextProfile {
    excl: 0.50,
    quest: 0.30,
    extreme: 0.45,
    strong_neg: 0.35,
    emo_negative: 0.25,
    emo_surprised: 0.20,
};

const CALM_PROFILE: ContextProfile = ContextProfile {
    excl: 0.15,
    quest: 0.10,
    extreme: 0.12,
    strong_neg: 0.10,
    emo_negative: 0.08,
    emo_surprised: 0.05,
};

fn pick<'a>(rng: &mut ChaCha8Rng, terms: &'a [String]) -> &'a str {
    &terms[rng.gen_range(0..terms.len())]
}

fn decorate(
    rng: &mut ChaCha8Rng,
    tokens: &mut Vec<String>,
    profile: &ContextProfile,
    lexicons: &SynthLexicons,
) {
    let set = |name: &str| -> Vec<String> { lexicons.terms(name).collect() };
    if rng.gen_bool(profile.excl) {
        tokens.push(if rng.gen_bool(0.5) { "!!" } else { "!" }.to_string());
    }
    if rng.gen_bool(profile.quest) {
        tokens.push("?".to_string());
    }
    if rng.gen_bool(profile.extreme) {
        tokens.push(pick(rng, &set("extreme_words")).to_string());
        if rng.gen_bool(0.3) {
            tokens.push(pick(rng, &set("extreme_words")).to_string());
        }
    }
    if rng.gen_bool(profile.strong_neg) {
        tokens.push(pick(rng, &set("strong_neg")).to_string());
    }
    if rng.gen_bool(profile.emo_negative) {
        tokens.push(pick(rng, &set("emotion_negative")).to_string());
    }
    if rng.gen_bool(profile.emo_surprised) {
        tokens.push(pick(rng, &set("emotion_surprised")).to_string());
    }
    // class-neutral texture
    if rng.gen_bool(0.10) {
        tokens.push(pick(rng, &set("weak_pos")).to_string());
    }
    if rng.gen_bool(0.10) {
        tokens.push(pick(rng, &set("quantity_words")).to_string());
    }
    if rng.gen_bool(0.10) {
        tokens.push(pick(rng, &set("time_words")).to_string());
    }
    if rng.gen_bool(0.08) {
        tokens.push(format!("@user{}", rng.gen_range(0..500)));
    }
    if rng.gen_bool(0.08) {
        tokens.push(format!("http://news.example/{}", rng.gen_range(0..500)));
    }
    if rng.gen_bool(0.08) {
        tokens.push(format!("#topic{}", rng.gen_range(0..50)));
    }
}

/// Contiguous article window, lightly paraphrased: shuffled order and up to
/// two terms swapped for other terms of the same article.
fn paraphrase_tokens(rng: &mut ChaCha8Rng, articles: &[ArticleDraft]) -> Vec<String> {
    let article = &articles[rng.gen_range(0..articles.len())];
    let len = rng.gen_range(10..=18).min(article.tokens.len());
    let start = rng.gen_range(0..=article.tokens.len() - len);
    let mut window: Vec<String> = article.tokens[start..start + len].to_vec();
    window.shuffle(rng);
    for _ in 0..rng.gen_range(0..=2) {
        let i = rng.gen_range(0..window.len());
        window[i] = article.bag[rng.gen_range(0..article.bag.len())].clone();
    }
    window
}

/// Unconfirmed content: at least 35% of the tokens come from a pool the
/// news corpus has never seen, the rest from random corpus terms.
fn rumour_tokens(rng: &mut ChaCha8Rng) -> (Vec<String>, Vec<String>) {
    let len: usize = rng.gen_range(10..=18);
    let fraction: f64 = rng.gen_range(0.35..0.6);
    let n_novel = ((len as f64 * fraction).ceil() as usize).max(4);
    let mut novel = Vec::with_capacity(n_novel);
    while novel.len() < n_novel {
        let t = novel_term(rng.gen_range(0..NOVEL_POOL));
        if !novel.contains(&t) {
            novel.push(t);
        }
    }
    let mut tokens = novel.clone();
    for _ in 0..len.saturating_sub(n_novel) {
        tokens.push(corpus_term(rng.gen_range(0..CORPUS_POOL)));
    }
    tokens.shuffle(rng);
    (tokens, novel)
}

/// Echo of an earlier rumour: a few of the leader's unseen terms embedded
/// in a single article's window.
fn echo_tokens(
    rng: &mut ChaCha8Rng,
    leader_novel: &[String],
    articles: &[ArticleDraft],
) -> Vec<String> {
    let mut carried: Vec<String> = leader_novel.to_vec();
    carried.shuffle(rng);
    carried.truncate(3);
    let mut tokens = paraphrase_tokens(rng, articles);
    tokens.truncate(tokens.len().saturating_sub(carried.len()).max(7));
    tokens.extend(carried);
    tokens.shuffle(rng);
    tokens
}

/// Same shape as an echo, but the unseen terms are fresh "typos" that no
/// earlier message shares.
fn noisy_tokens(rng: &mut ChaCha8Rng, articles: &[ArticleDraft]) -> Vec<String> {
    let mut tokens = paraphrase_tokens(rng, articles);
    tokens.truncate(tokens.len().saturating_sub(3).max(7));
    for _ in 0..3 {
        tokens.push(typo_term(rng.gen_range(0..TYPO_POOL)));
    }
    tokens.shuffle(rng);
    tokens
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Slot {
    CleanRumour,
    EchoRumour,
    CleanNon,
    NoisyNon,
}

fn build_stream(
    rng: &mut ChaCha8Rng,
    articles: &[ArticleDraft],
    lexicons: &SynthLexicons,
    messages: usize,
    with_duplicates: bool,
    id_prefix: &str,
) -> Vec<Message> {
    let half = messages / 2;
    let per_class = half / 2;
    let mut out = Vec::with_capacity(messages);
    let mut ts = STREAM_BASE_TS;
    let mut msg_index = 0usize;

    for _ in 0..2 {
        let mut slots = Vec::with_capacity(half);
        let echoes = if with_duplicates { per_class / 5 } else { 0 };
        for i in 0..per_class {
            slots.push(if i < echoes {
                Slot::EchoRumour
            } else {
                Slot::CleanRumour
            });
            slots.push(if i < echoes {
                Slot::NoisyNon
            } else {
                Slot::CleanNon
            });
        }
        slots.shuffle(rng);
        // every echo needs an earlier clean rumour in the same half
        for i in 0..slots.len() {
            if slots[i] == Slot::EchoRumour
                && !slots[..i].iter().any(|s| *s == Slot::CleanRumour)
            {
                let j = (i + 1..slots.len())
                    .find(|&j| slots[j] == Slot::CleanRumour)
                    .expect("at least one clean rumour per half");
                slots.swap(i, j);
            }
        }

        // (position in this half, novel terms) of clean rumours seen so far
        let mut leaders: Vec<Vec<String>> = Vec::new();
        for slot in slots {
            let (mut tokens, label, profile) = match slot {
                Slot::CleanRumour => {
                    let (tokens, novel) = rumour_tokens(rng);
                    leaders.push(novel);
                    (tokens, Label::Rumour, &RUMOUR_PROFILE)
                }
                Slot::EchoRumour => {
                    let recent = &leaders[leaders.len().saturating_sub(30)..];
                    let leader = &recent[rng.gen_range(0..recent.len())];
                    (
                        echo_tokens(rng, &leader.clone(), articles),
                        Label::Rumour,
                        &CALM_PROFILE,
                    )
                }
                Slot::CleanNon => (
                    paraphrase_tokens(rng, articles),
                    Label::NonRumour,
                    &CALM_PROFILE,
                ),
                Slot::NoisyNon => (
                    noisy_tokens(rng, articles),
                    Label::NonRumour,
                    &CALM_PROFILE,
                ),
            };
            decorate(rng, &mut tokens, profile, lexicons);
            ts += rng.gen_range(5..=60);
            out.push(Message {
                id: format!("{id_prefix}{msg_index:05}"),
                timestamp: ts,
                text: tokens.join(" "),
                label: Some(label),
                pos: None,
            });
            msg_index += 1;
        }
    }
    out
}

/// Generate the full synthetic corpus from a seed.
pub fn generate(cfg: &SynthConfig) -> SynthCorpus {
    assert!(cfg.articles >= 1, "need at least one article");
    assert!(
        cfg.messages >= 8 && cfg.messages % 4 == 0,
        "message count must be a positive multiple of 4"
    );
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let lexicons = make_lexicons(&mut rng);
    let drafts = make_articles(&mut rng, cfg.articles, &lexicons);

    let articles: Vec<NewsArticle> = drafts
        .iter()
        .enumerate()
        .map(|(i, d)| {
            let title_len = rng.gen_range(3..=6).min(d.bag.len());
            let title: Vec<String> = (0..title_len)
                .map(|_| d.bag[rng.gen_range(0..d.bag.len())].clone())
                .collect();
            NewsArticle {
                id: format!("news{i:04}"),
                timestamp: STREAM_BASE_TS - 86_400 - (cfg.articles - i) as i64 * 600,
                title: title.join(" "),
                text: d.tokens.join(" "),
            }
        })
        .collect();

    let stream = build_stream(&mut rng, &drafts, &lexicons, cfg.messages, false, "m");
    let stream_dup = build_stream(&mut rng, &drafts, &lexicons, cfg.messages, true, "e");

    SynthCorpus {
        articles,
        stream,
        stream_dup,
        lexicons,
    }
}

/// Unlabeled messages for throughput measurement, same shape as the
/// detection stream: alternating paraphrases and novel-content messages.
pub fn bench_messages(corpus: &SynthCorpus, n: usize, seed: u64) -> Vec<Message> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xb33f);
    // rebuild drafts from the articles to keep this self-contained
    let drafts: Vec<ArticleDraft> = corpus
        .articles
        .iter()
        .map(|a| {
            let tokens: Vec<String> = a.text.split_whitespace().map(str::to_string).collect();
            let mut bag = tokens.clone();
            bag.sort();
            bag.dedup();
            ArticleDraft { tokens, bag }
        })
        .collect();
    let mut ts = STREAM_BASE_TS;
    (0..n)
        .map(|i| {
            let (mut tokens, profile) = if i % 2 == 0 {
                (paraphrase_tokens(&mut rng, &drafts), &CALM_PROFILE)
            } else {
                (rumour_tokens(&mut rng).0, &RUMOUR_PROFILE)
            };
            decorate(&mut rng, &mut tokens, profile, &corpus.lexicons);
            ts += 1;
            Message {
                id: format!("b{i:06}"),
                timestamp: ts,
                text: tokens.join(" "),
                label: None,
                pos: None,
            }
        })
        .collect()
}
