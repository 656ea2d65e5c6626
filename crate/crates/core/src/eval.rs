//! Evaluation: accuracy, detection-error-tradeoff curves, feature-group
//! ablation, throughput benchmarking, and a paired sign test.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::time::Instant;

use thiserror::Error;

use crate::detect::{extract_inputs, Verdict};
use crate::features::{category_indices, Category, LexiconPack, PosTagger, PF_INDEX, TOTAL_FEATURES};
use crate::ingest::{tokenize, Label, Message, TokenScheme};
use crate::model::{
    threshold_candidates, train_two_rounds, Model, ModelError, PfThresholdPolicy, SvmConfig,
    TrainExample, TrainReport,
};
use crate::novelty::TrustedMemory;
use crate::pseudofeedback::{maybe_admit, pf_feature, PfBuffer};
use crate::textstats::{KeywordIdf, TfIdfVector};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("cannot evaluate an empty verdict set")]
    EmptyInput,
    #[error("both classes are required (got only {0})")]
    SingleClass(Label),
    #[error("message {0} has no gold label")]
    MissingLabel(String),
    #[error("verdict {0} has no matching message in the stream")]
    UnknownDoc(String),
    #[error("benchmark needs at least 10 batches: {docs} docs with batch size {batch_size}")]
    BenchTooSmall { docs: usize, batch_size: usize },
    #[error("benchmark scoring failed: {0}")]
    Bench(String),
    #[error("paired inputs differ in length: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error(transparent)]
    Feature(#[from] crate::features::FeatureError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Fraction of predictions matching gold labels.
pub fn accuracy(pairs: &[(Label, Label)]) -> Result<f64, EvalError> {
    if pairs.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    let correct = pairs.iter().filter(|(p, g)| p == g).count();
    Ok(correct as f64 / pairs.len() as f64)
}

/// Pair verdicts with gold labels from the stream they were produced on.
pub fn join_gold(verdicts: &[Verdict], stream: &[Message]) -> Result<Vec<(Verdict, Label)>, EvalError> {
    let gold: HashMap<&str, Option<Label>> =
        stream.iter().map(|m| (m.id.as_str(), m.label)).collect();
    verdicts
        .iter()
        .map(|v| match gold.get(v.doc_id.as_str()) {
            Some(Some(label)) => Ok((v.clone(), *label)),
            Some(None) => Err(EvalError::MissingLabel(v.doc_id.clone())),
            None => Err(EvalError::UnknownDoc(v.doc_id.clone())),
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetPoint {
    pub threshold: f64,
    pub miss: f64,
    pub false_alarm: f64,
}

/// Miss probability versus false-alarm probability across the full
/// threshold range, thresholds strictly increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct DetCurve {
    pub points: Vec<DetPoint>,
}

impl DetCurve {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("threshold,miss,false_alarm\n");
        for p in &self.points {
            writeln!(out, "{},{},{}", p.threshold, p.miss, p.false_alarm).unwrap();
        }
        out
    }
}

/// Build the DET curve. Thresholds are the midpoints of adjacent distinct
/// scores plus one value below and one above all scores; `num_thresholds`
/// caps the count by uniform subsampling that always keeps both extremes.
///
/// miss = P(score <= t | rumour), false_alarm = P(score > t | non-rumour).
pub fn det_curve(scored: &[(f64, Label)], num_thresholds: usize) -> Result<DetCurve, EvalError> {
    if scored.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    let total_rumours = scored.iter().filter(|(_, l)| *l == Label::Rumour).count();
    let total_non = scored.len() - total_rumours;
    if total_rumours == 0 {
        return Err(EvalError::SingleClass(Label::NonRumour));
    }
    if total_non == 0 {
        return Err(EvalError::SingleClass(Label::Rumour));
    }

    let mut sorted: Vec<(f64, Label)> = scored.to_vec();
    sorted.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    // rumours among the i lowest-scored messages
    let mut rumour_prefix = Vec::with_capacity(sorted.len() + 1);
    rumour_prefix.push(0usize);
    for (_, l) in &sorted {
        rumour_prefix.push(rumour_prefix.last().unwrap() + usize::from(*l == Label::Rumour));
    }

    let scores: Vec<f64> = sorted.iter().map(|(s, _)| *s).collect();
    let mut candidates = threshold_candidates(&scores);
    if num_thresholds >= 2 && candidates.len() > num_thresholds {
        let last = candidates.len() - 1;
        let picked: Vec<f64> = (0..num_thresholds)
            .map(|i| candidates[(i * last) / (num_thresholds - 1)])
            .collect();
        candidates = picked;
        candidates.dedup();
    }

    let points = candidates
        .into_iter()
        .map(|threshold| {
            let at_most = sorted.partition_point(|(s, _)| *s <= threshold);
            let misses = rumour_prefix[at_most];
            let false_alarms = total_non - (at_most - misses);
            DetPoint {
                threshold,
                miss: misses as f64 / total_rumours as f64,
                false_alarm: false_alarms as f64 / total_non as f64,
            }
        })
        .collect();
    Ok(DetCurve { points })
}

/// One message prepared for the training/ablation pipeline: features with
/// the PF slot still zero, plus the text vector.
#[derive(Debug, Clone)]
pub struct PreparedMessage {
    pub id: String,
    pub timestamp: i64,
    pub gold: Option<Label>,
    pub base: [f64; TOTAL_FEATURES],
    pub text_vector: TfIdfVector,
}

/// Extract features for a whole stream up front. Used by training,
/// evaluation, ablation and the benchmark; the streaming detector computes
/// identical values message by message.
pub fn prepare_messages(
    messages: &[Message],
    memory: &TrustedMemory,
    lexicons: &LexiconPack,
    tagger: &PosTagger,
    tokenizer: TokenScheme,
    keyword_idf: KeywordIdf,
) -> Result<Vec<PreparedMessage>, EvalError> {
    messages
        .iter()
        .map(|msg| {
            let doc = tokenize(&msg.text, tokenizer, msg.id.clone());
            let inputs = extract_inputs(
                msg,
                &doc,
                &memory.kterms,
                memory,
                lexicons,
                tagger,
                keyword_idf,
            )?;
            Ok(PreparedMessage {
                id: msg.id.clone(),
                timestamp: msg.timestamp,
                gold: msg.label,
                base: inputs.base,
                text_vector: inputs.text_vector,
            })
        })
        .collect()
}

/// Convert prepared messages into labeled training examples.
pub fn to_train_examples(prepared: &[PreparedMessage]) -> Result<Vec<TrainExample>, EvalError> {
    prepared
        .iter()
        .map(|p| {
            let label = p.gold.ok_or_else(|| EvalError::MissingLabel(p.id.clone()))?;
            Ok(TrainExample {
                id: p.id.clone(),
                timestamp: p.timestamp,
                label,
                base: p.base,
                text_vector: p.text_vector.clone(),
            })
        })
        .collect()
}

/// Zero-mask over feature positions built from categories.
pub fn category_mask(categories: &[Category]) -> [bool; TOTAL_FEATURES] {
    let mut mask = [false; TOTAL_FEATURES];
    for cat in categories {
        for idx in category_indices(*cat) {
            mask[idx] = true;
        }
    }
    mask
}

/// Run detection over prepared messages, optionally zeroing masked feature
/// positions before scoring. With no mask this reproduces the streaming
/// detector's verdicts exactly.
pub fn detect_prepared(
    model: &Model,
    prepared: &[PreparedMessage],
    mask: Option<&[bool; TOTAL_FEATURES]>,
) -> Vec<Verdict> {
    let mut buffer = PfBuffer::new(model.pf.capacity);
    prepared
        .iter()
        .map(|p| {
            let mut values = p.base;
            values[PF_INDEX] = pf_feature(&buffer, &p.text_vector);
            if let Some(mask) = mask {
                for (j, masked) in mask.iter().enumerate() {
                    if *masked {
                        values[j] = 0.0;
                    }
                }
            }
            let score = model.score_values(&values);
            maybe_admit(&mut buffer, &p.id, &p.text_vector, score, &model.pf);
            Verdict {
                doc_id: p.id.clone(),
                timestamp: p.timestamp,
                rumour_score: score,
                label: model.classify(score),
                feature_vector: None,
            }
        })
        .collect()
}

/// Training settings shared by the full run and every ablation rerun.
#[derive(Debug, Clone, Copy)]
pub struct TrainSettings {
    pub pf_capacity: usize,
    pub pf_policy: PfThresholdPolicy,
    pub svm: SvmConfig,
    pub joint_round2: bool,
}

/// Train on prepared messages and score the test split; returns the model,
/// the report, and test accuracy at the trained threshold.
pub fn train_and_evaluate(
    train: &[PreparedMessage],
    test: &[PreparedMessage],
    settings: &TrainSettings,
    mask: Option<&[bool; TOTAL_FEATURES]>,
) -> Result<(Model, TrainReport, f64), EvalError> {
    let mut examples = to_train_examples(train)?;
    if let Some(mask) = mask {
        for e in &mut examples {
            for (j, masked) in mask.iter().enumerate() {
                if *masked {
                    e.base[j] = 0.0;
                }
            }
        }
    }
    // Masking the PF position means the group is ablated: disable the
    // buffer so the column is structurally zero in both rounds.
    let pf_masked = mask.is_some_and(|m| m[PF_INDEX]);
    let capacity = if pf_masked { 0 } else { settings.pf_capacity };
    let (model, report) = train_two_rounds(
        &examples,
        capacity,
        settings.pf_policy,
        &settings.svm,
        settings.joint_round2,
    )?;
    let verdicts = detect_prepared(&model, test, mask);
    let pairs: Vec<(Label, Label)> = verdicts
        .iter()
        .zip(test)
        .map(|(v, p)| {
            p.gold
                .map(|g| (v.label, g))
                .ok_or_else(|| EvalError::MissingLabel(p.id.clone()))
        })
        .collect::<Result<_, _>>()?;
    let acc = accuracy(&pairs)?;
    Ok((model, report, acc))
}

/// A named ablation group: the categories zeroed together.
#[derive(Debug, Clone)]
pub struct GroupSpec {
    pub name: String,
    pub categories: Vec<Category>,
}

impl GroupSpec {
    /// Parse `"novelty"` or a combined group like `"punctuation+urls"`.
    pub fn parse(spec: &str) -> Result<Self, String> {
        let categories = spec
            .split('+')
            .map(str::trim)
            .map(str::parse)
            .collect::<Result<Vec<Category>, _>>()?;
        if categories.is_empty() {
            return Err("empty group spec".into());
        }
        Ok(Self {
            name: spec.to_string(),
            categories,
        })
    }
}

#[derive(Debug, Clone)]
pub struct AblationReport {
    pub baseline_accuracy: f64,
    /// (group name, test accuracy with that group removed)
    pub groups: Vec<(String, f64)>,
}

impl AblationReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("group,accuracy\n");
        writeln!(out, "all,{}", self.baseline_accuracy).unwrap();
        for (name, acc) in &self.groups {
            writeln!(out, "{name},{acc}").unwrap();
        }
        out
    }
}

/// Feature ablation: for each group, zero its features in train and test,
/// rerun the full two-round training plus detection, and record test
/// accuracy next to the all-features baseline.
pub fn ablate(
    train: &[PreparedMessage],
    test: &[PreparedMessage],
    groups: &[GroupSpec],
    settings: &TrainSettings,
) -> Result<AblationReport, EvalError> {
    let (_, _, baseline) = train_and_evaluate(train, test, settings, None)?;
    let mut results = Vec::with_capacity(groups.len());
    for group in groups {
        let mask = category_mask(&group.categories);
        let (_, _, acc) = train_and_evaluate(train, test, settings, Some(&mask))?;
        results.push((group.name.clone(), acc));
    }
    Ok(AblationReport {
        baseline_accuracy: baseline,
        groups: results,
    })
}

/// Two-sided exact sign test over paired correctness indicators. Returns
/// the p-value for the hypothesis that both systems err alike.
pub fn sign_test(a_correct: &[bool], b_correct: &[bool]) -> Result<f64, EvalError> {
    if a_correct.len() != b_correct.len() {
        return Err(EvalError::LengthMismatch(a_correct.len(), b_correct.len()));
    }
    let mut a_only = 0u64;
    let mut b_only = 0u64;
    for (a, b) in a_correct.iter().zip(b_correct) {
        match (a, b) {
            (true, false) => a_only += 1,
            (false, true) => b_only += 1,
            _ => {}
        }
    }
    let n = a_only + b_only;
    if n == 0 {
        return Ok(1.0);
    }
    let k = a_only.min(b_only);
    // two-sided exact binomial(n, 1/2) tail
    let mut term = 0.5f64.powi(n as i32);
    let mut tail = term;
    for i in 0..k {
        term *= (n - i) as f64 / (i + 1) as f64;
        tail += term;
    }
    Ok((2.0 * tail).min(1.0))
}

/// Least-squares slope of y against indices 0..n.
pub fn least_squares_slope(ys: &[f64]) -> f64 {
    let n = ys.len() as f64;
    if ys.len() < 2 {
        return 0.0;
    }
    let mean_x = (n - 1.0) / 2.0;
    let mean_y = ys.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (i, y) in ys.iter().enumerate() {
        let dx = i as f64 - mean_x;
        num += dx * (y - mean_y);
        den += dx * dx;
    }
    num / den
}

#[derive(Debug, Clone)]
pub struct BenchReport {
    pub total_docs: usize,
    pub runs: usize,
    pub docs_per_second: f64,
    /// (batch index, mean per-doc latency in microseconds)
    pub batches: Vec<(usize, f64)>,
    /// least-squares slope of mean batch latency versus batch index
    pub slope: f64,
}

impl BenchReport {
    pub fn mean_latency_us(&self) -> f64 {
        self.batches.iter().map(|(_, l)| l).sum::<f64>() / self.batches.len() as f64
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("batch,mean_latency_us\n");
        for (batch, latency) in &self.batches {
            writeln!(out, "{batch},{latency}").unwrap();
        }
        writeln!(
            out,
            "# docs_per_second={:.1} slope_us_per_batch={:.6}",
            self.docs_per_second, self.slope
        )
        .unwrap();
        out
    }
}

/// Throughput benchmark over pre-tokenized messages: one warm-up pass,
/// then `runs` timed passes, each on a fresh detector, with per-batch
/// latencies averaged across runs. Parsing and tokenization happen before
/// the timed region; the timed work is the full scoring pipeline (novelty
/// lookups, context features, pseudo feedback, scoring, buffer update).
pub fn bench(
    model: &Model,
    memory: &TrustedMemory,
    lexicons: &LexiconPack,
    tagger: &PosTagger,
    docs: &[(Message, crate::ingest::TokenizedDoc)],
    keyword_idf: KeywordIdf,
    batch_size: usize,
    runs: usize,
) -> Result<BenchReport, EvalError> {
    if batch_size == 0 || docs.len() < 10 * batch_size {
        return Err(EvalError::BenchTooSmall {
            docs: docs.len(),
            batch_size,
        });
    }
    let num_batches = docs.len() / batch_size;
    let docs_used = num_batches * batch_size;
    let runs = runs.max(1);
    let opts = crate::detect::DetectOptions {
        keyword_idf,
        on_error: crate::detect::OnError::Abort,
        ..Default::default()
    };

    let pass = |timings: Option<&mut Vec<f64>>| -> Result<f64, EvalError> {
        let mut detector = crate::detect::Detector::new(model, memory, lexicons, tagger, opts);
        let mut sink = 0.0f64;
        let mut total = 0.0f64;
        let mut score_batch = |slice: &[(Message, crate::ingest::TokenizedDoc)]| {
            for (msg, doc) in slice {
                let verdict = detector
                    .score_doc(msg, doc)
                    .map_err(|e| EvalError::Bench(e.to_string()))?;
                sink += verdict.rumour_score;
            }
            Ok::<_, EvalError>(())
        };
        if let Some(timings) = timings {
            for b in 0..num_batches {
                let start = Instant::now();
                score_batch(&docs[b * batch_size..(b + 1) * batch_size])?;
                let secs = start.elapsed().as_secs_f64();
                timings.push(secs * 1e6 / batch_size as f64);
                total += secs;
            }
        } else {
            score_batch(&docs[..docs_used])?;
        }
        std::hint::black_box(sink);
        Ok(total)
    };

    pass(None)?; // warm caches

    let mut batch_latency = vec![0.0f64; num_batches];
    let mut total_secs = 0.0;
    for _ in 0..runs {
        let mut timings = Vec::with_capacity(num_batches);
        total_secs += pass(Some(&mut timings))?;
        for (acc, t) in batch_latency.iter_mut().zip(&timings) {
            *acc += t;
        }
    }
    for l in batch_latency.iter_mut() {
        *l /= runs as f64;
    }
    let slope = least_squares_slope(&batch_latency);
    Ok(BenchReport {
        total_docs: docs_used,
        runs,
        docs_per_second: (docs_used * runs) as f64 / total_secs,
        batches: batch_latency.into_iter().enumerate().collect(),
        slope,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn r() -> Label {
        Label::Rumour
    }
    fn n() -> Label {
        Label::NonRumour
    }

    #[test]
    fn accuracy_counts() {
        assert_eq!(accuracy(&[(r(), r()), (n(), n())]).unwrap(), 1.0);
        assert_eq!(
            accuracy(&[(r(), r()), (r(), n()), (n(), r()), (n(), n())]).unwrap(),
            0.5
        );
        let six_of_eight = [
            (r(), r()),
            (r(), r()),
            (r(), r()),
            (n(), n()),
            (n(), n()),
            (n(), n()),
            (r(), n()),
            (n(), r()),
        ];
        assert_eq!(accuracy(&six_of_eight).unwrap(), 0.75);
        assert!(matches!(accuracy(&[]), Err(EvalError::EmptyInput)));
    }

    #[test]
    fn det_perfectly_separated_has_zero_zero_point() {
        let scored = vec![(1.0, r()), (2.0, r()), (-1.0, n()), (-2.0, n())];
        let curve = det_curve(&scored, 0).unwrap();
        assert!(curve
            .points
            .iter()
            .any(|p| p.miss == 0.0 && p.false_alarm == 0.0));
    }

    #[test]
    fn det_extremes() {
        let scored = vec![(1.0, r()), (0.5, n()), (0.7, r()), (0.2, n())];
        let curve = det_curve(&scored, 0).unwrap();
        let first = curve.points.first().unwrap();
        assert_eq!((first.miss, first.false_alarm), (0.0, 1.0));
        let last = curve.points.last().unwrap();
        assert_eq!((last.miss, last.false_alarm), (1.0, 0.0));
    }

    #[test]
    fn det_matches_hand_enumerated_confusion() {
        // scores: r: {0.9, 0.6, 0.3}, n: {0.7, 0.4, 0.1}
        let scored = vec![
            (0.9, r()),
            (0.6, r()),
            (0.3, r()),
            (0.7, n()),
            (0.4, n()),
            (0.1, n()),
        ];
        let curve = det_curve(&scored, 0).unwrap();
        // threshold at 0.5: misses = rumours <= 0.5 = {0.3} -> 1/3;
        // false alarms = non-rumours > 0.5 = {0.7} -> 1/3
        let p = curve
            .points
            .iter()
            .find(|p| (p.threshold - 0.5).abs() < 1e-12)
            .expect("midpoint 0.5 present");
        assert!((p.miss - 1.0 / 3.0).abs() < 1e-12);
        assert!((p.false_alarm - 1.0 / 3.0).abs() < 1e-12);
        // threshold at 0.35: misses = {0.3} -> 1/3; false alarms = {0.7, 0.4} -> 2/3
        let p = curve
            .points
            .iter()
            .find(|p| (p.threshold - 0.35).abs() < 1e-12)
            .expect("midpoint 0.35 present");
        assert!((p.miss - 1.0 / 3.0).abs() < 1e-12);
        assert!((p.false_alarm - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn det_rejects_single_class() {
        assert!(det_curve(&[(1.0, r()), (2.0, r())], 0).is_err());
    }

    #[test]
    fn det_subsampling_keeps_extremes() {
        let scored: Vec<(f64, Label)> = (0..100)
            .map(|i| (i as f64, if i % 2 == 0 { r() } else { n() }))
            .collect();
        let curve = det_curve(&scored, 10).unwrap();
        assert!(curve.points.len() <= 10);
        assert_eq!(curve.points.first().unwrap().false_alarm, 1.0);
        assert_eq!(curve.points.last().unwrap().miss, 1.0);
    }

    proptest! {
        #[test]
        fn det_monotone(
            scores in proptest::collection::vec((-10.0f64..10.0, proptest::bool::ANY), 2..60)
        ) {
            let scored: Vec<(f64, Label)> = scores
                .iter()
                .map(|(s, is_r)| (*s, if *is_r { r() } else { n() }))
                .collect();
            let rumours = scored.iter().filter(|(_, l)| *l == r()).count();
            prop_assume!(rumours > 0 && rumours < scored.len());
            let curve = det_curve(&scored, 0).unwrap();
            for pair in curve.points.windows(2) {
                prop_assert!(pair[0].threshold < pair[1].threshold);
                prop_assert!(pair[0].miss <= pair[1].miss);
                prop_assert!(pair[0].false_alarm >= pair[1].false_alarm);
            }
            for p in &curve.points {
                prop_assert!((0.0..=1.0).contains(&p.miss));
                prop_assert!((0.0..=1.0).contains(&p.false_alarm));
            }
        }
    }

    #[test]
    fn slope_of_constant_series_is_zero() {
        assert_eq!(least_squares_slope(&[3.0; 12]), 0.0);
        assert!((least_squares_slope(&[0.0, 1.0, 2.0, 3.0]) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sign_test_values() {
        // no discordant pairs
        assert_eq!(sign_test(&[true, true], &[true, true]).unwrap(), 1.0);
        // 5 discordant pairs all favouring a: p = 2 * 0.5^5
        let a = [true; 5];
        let b = [false; 5];
        let p = sign_test(&a, &b).unwrap();
        assert!((p - 2.0 * 0.5f64.powi(5)).abs() < 1e-12);
        // balanced discordance is not significant
        let a = [true, true, false, false];
        let b = [false, false, true, true];
        assert_eq!(sign_test(&a, &b).unwrap(), 1.0);
        assert!(sign_test(&[true], &[]).is_err());
    }

    fn prepared_fixture() -> (Vec<PreparedMessage>, Vec<PreparedMessage>) {
        // novelty column separates classes except for two hard rumours that
        // only PF can catch (they repeat an earlier rumour's text vector)
        let mut train = Vec::new();
        let mut test = Vec::new();
        let rumour_vec = TfIdfVector::from_entries(vec![(7, 1.0)]);
        for split in 0..2 {
            let out = if split == 0 { &mut train } else { &mut test };
            for i in 0..12 {
                let ts = (split * 1000 + i * 2) as i64;
                let hard = i >= 10;
                let mut base = [0.0; TOTAL_FEATURES];
                base[51] = if hard { 0.1 } else { 1.0 };
                out.push(PreparedMessage {
                    id: format!("r{split}_{i}"),
                    timestamp: ts,
                    gold: Some(r()),
                    base,
                    text_vector: rumour_vec.clone(),
                });
                let mut base = [0.0; TOTAL_FEATURES];
                base[51] = 0.3;
                out.push(PreparedMessage {
                    id: format!("n{split}_{i}"),
                    timestamp: ts + 1,
                    gold: Some(n()),
                    base,
                    text_vector: TfIdfVector::from_entries(vec![(100 + i as u64, 1.0)]),
                });
            }
        }
        (train, test)
    }

    fn settings() -> TrainSettings {
        TrainSettings {
            pf_capacity: 100,
            pf_policy: PfThresholdPolicy::Theta1,
            svm: SvmConfig::default(),
            joint_round2: false,
        }
    }

    #[test]
    fn ablating_inactive_group_changes_nothing() {
        let (train, test) = prepared_fixture();
        // urls features are all zero in this fixture
        let groups = vec![GroupSpec::parse("urls").unwrap()];
        let report = ablate(&train, &test, &groups, &settings()).unwrap();
        assert_eq!(report.groups.len(), 1);
        assert_eq!(report.groups[0].1, report.baseline_accuracy);
    }

    #[test]
    fn ablating_everything_collapses_to_chance() {
        let (train, test) = prepared_fixture();
        let all = GroupSpec {
            name: "everything".into(),
            categories: Category::ALL.to_vec(),
        };
        let report = ablate(&train, &test, &[all], &settings()).unwrap();
        assert_eq!(report.groups[0].1, 0.5);
    }

    #[test]
    fn empty_group_list_is_plain_evaluation() {
        let (train, test) = prepared_fixture();
        let report = ablate(&train, &test, &[], &settings()).unwrap();
        assert!(report.groups.is_empty());
        let (_, _, acc) = train_and_evaluate(&train, &test, &settings(), None).unwrap();
        assert_eq!(report.baseline_accuracy, acc);
    }

    #[test]
    fn ablating_pf_hurts_on_duplicate_fixture() {
        let (train, test) = prepared_fixture();
        let groups = vec![GroupSpec::parse("pf").unwrap()];
        let report = ablate(&train, &test, &groups, &settings()).unwrap();
        assert!(
            report.groups[0].1 < report.baseline_accuracy,
            "pf ablation did not reduce accuracy: {} vs baseline {}",
            report.groups[0].1,
            report.baseline_accuracy
        );
    }

    #[test]
    fn unknown_group_is_an_error() {
        assert!(GroupSpec::parse("sarcasm").is_err());
        assert!(GroupSpec::parse("novelty+sarcasm").is_err());
        assert!(GroupSpec::parse("punctuation+urls").is_ok());
    }

    #[test]
    fn ablation_csv_shape() {
        let report = AblationReport {
            baseline_accuracy: 0.9,
            groups: vec![("novelty".into(), 0.6)],
        };
        let csv = report.to_csv();
        assert!(csv.starts_with("group,accuracy\nall,0.9\n"));
        assert!(csv.contains("novelty,0.6"));
    }

    #[test]
    fn bench_runs_the_real_pipeline() {
        use crate::hash::DEFAULT_SEEDS;
        use crate::ingest::TokenizedDoc;
        use crate::novelty::{build_subdoc_index, KtermMemory};

        let corpus: Vec<TokenizedDoc> = (0..5)
            .map(|i| {
                let terms: Vec<String> = (0..20).map(|j| format!("w{}", (i * 7 + j) % 40)).collect();
                TokenizedDoc::new(format!("a{i}"), terms)
            })
            .collect();
        let vocab = crate::textstats::Vocabulary::build(&corpus).unwrap();
        let mut kterms = KtermMemory::new(1 << 16, 7, DEFAULT_SEEDS);
        for d in &corpus {
            kterms.insert_document(&d.unique_terms);
        }
        let index = build_subdoc_index(&corpus, &vocab, 14, 1, None);
        let memory = TrustedMemory {
            vocab,
            kterms,
            index,
        };
        let (train, _) = prepared_fixture();
        let model = train_and_evaluate(&train, &train, &settings(), None)
            .unwrap()
            .0;
        let lexicons = LexiconPack::default();
        let tagger = PosTagger::default();

        let docs: Vec<(Message, TokenizedDoc)> = (0..200)
            .map(|i| {
                let text = format!("w{} w{} fresh{}", i % 40, (i + 3) % 40, i % 9);
                let msg = Message {
                    id: format!("b{i}"),
                    timestamp: i,
                    text: text.clone(),
                    label: None,
                    pos: None,
                };
                let doc = tokenize(&text, TokenScheme::PreSegmented, msg.id.clone());
                (msg, doc)
            })
            .collect();

        assert!(matches!(
            bench(&model, &memory, &lexicons, &tagger, &docs, KeywordIdf::News, 1000, 1),
            Err(EvalError::BenchTooSmall { .. })
        ));

        let report = bench(
            &model,
            &memory,
            &lexicons,
            &tagger,
            &docs,
            KeywordIdf::News,
            20,
            2,
        )
        .unwrap();
        assert_eq!(report.batches.len(), 10);
        assert!(report.docs_per_second > 0.0);
        assert!(report.to_csv().contains("docs_per_second"));
    }
}
