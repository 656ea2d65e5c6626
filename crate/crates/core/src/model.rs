//! Linear rumour scoring and the two-round training procedure.
//!
//! Round one fits a linear max-margin classifier (hinge loss, L2
//! regularization, deterministic full-batch subgradient descent) on
//! standardized features with the pseudo-feedback dimension frozen at zero,
//! then picks the accuracy-optimal detection threshold. Round two replays
//! the training stream in timestamp order, fills the PF column from a live
//! buffer driven by round-one scores, refits, and splices only the PF
//! weight and the refreshed bias onto the round-one weights.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use thiserror::Error;

use crate::bin;
use crate::features::{self, FeatureVector, PF_INDEX, TOTAL_FEATURES};
use crate::ingest::Label;
use crate::pseudofeedback::{maybe_admit, pf_feature, PfBuffer, PfConfig};
use crate::textstats::TfIdfVector;

const MODEL_MAGIC: &[u8; 6] = b"RMDMDL";
const MODEL_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("training set contains a single class; both rumours and non-rumours are required")]
    SingleClass,
    #[error("empty training set")]
    EmptyTrainingSet,
    #[error(
        "feature manifest mismatch: model was built for {expected:#018x}, input carries {found:#018x}"
    )]
    ManifestMismatch { expected: u64, found: u64 },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("not a model file (bad magic)")]
    BadMagic,
    #[error("unsupported model file version {0}")]
    Version(u32),
}

/// Optimizer settings for the linear classifier. `epochs` caps the batch
/// subgradient iterations; the optimization itself uses no randomness, the
/// seed only namespaces artifacts derived from a config.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SvmConfig {
    pub c: f64,
    pub epochs: u32,
    pub seed: u64,
}

impl Default for SvmConfig {
    fn default() -> Self {
        Self {
            c: 1.0,
            epochs: 500,
            seed: 42,
        }
    }
}

/// Per-feature standardization statistics. Columns that are constant on
/// the training data get their exact value as mean and a stddev of 1, so
/// they standardize to exactly zero and can never pick up weight.
#[derive(Debug, Clone, PartialEq)]
pub struct Scaler {
    pub mean: [f64; TOTAL_FEATURES],
    pub std: [f64; TOTAL_FEATURES],
}

impl Scaler {
    fn fit(rows: &[[f64; TOTAL_FEATURES]]) -> Self {
        let n = rows.len() as f64;
        let mut mean = [0.0; TOTAL_FEATURES];
        let mut std = [1.0; TOTAL_FEATURES];
        for j in 0..TOTAL_FEATURES {
            let first = rows[0][j];
            if rows.iter().all(|r| r[j] == first) {
                mean[j] = first;
                std[j] = 1.0;
                continue;
            }
            let m = rows.iter().map(|r| r[j]).sum::<f64>() / n;
            let var = rows.iter().map(|r| (r[j] - m) * (r[j] - m)).sum::<f64>() / n;
            mean[j] = m;
            std[j] = var.sqrt().max(1e-12);
        }
        Self { mean, std }
    }

    pub fn apply(&self, values: &[f64; TOTAL_FEATURES]) -> [f64; TOTAL_FEATURES] {
        let mut out = [0.0; TOTAL_FEATURES];
        for j in 0..TOTAL_FEATURES {
            out[j] = (values[j] - self.mean[j]) / self.std[j];
        }
        out
    }
}

/// Trained linear model: weights and bias over standardized features, the
/// detection threshold, and the pseudo-feedback configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub weights: [f64; TOTAL_FEATURES],
    pub bias: f64,
    pub scaler: Scaler,
    pub theta: f64,
    pub theta1: f64,
    pub pf: PfConfig,
    pub manifest_hash: u64,
}

/// Outcome of the two training rounds.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    pub round1_train_accuracy: f64,
    pub round2_train_accuracy: f64,
    pub theta1: f64,
    pub theta: f64,
    pub rumour_count: usize,
    pub non_rumour_count: usize,
}

/// One labeled training message: its feature vector with the PF slot left
/// at zero, plus the tf-idf text vector the PF replay compares against.
#[derive(Debug, Clone)]
pub struct TrainExample {
    pub id: String,
    pub timestamp: i64,
    pub label: Label,
    pub base: [f64; TOTAL_FEATURES],
    pub text_vector: TfIdfVector,
}

fn label_y(label: Label) -> f64 {
    match label {
        Label::Rumour => 1.0,
        Label::NonRumour => -1.0,
    }
}

impl Model {
    /// Linear rumour score of a feature vector: `w . standardize(f) + b`.
    pub fn rumour_score(&self, fv: &FeatureVector) -> Result<f64, ModelError> {
        if fv.manifest_hash != self.manifest_hash {
            return Err(ModelError::ManifestMismatch {
                expected: self.manifest_hash,
                found: fv.manifest_hash,
            });
        }
        Ok(self.score_values(&fv.values))
    }

    /// Score raw values that are known to follow the model's manifest.
    pub fn score_values(&self, values: &[f64; TOTAL_FEATURES]) -> f64 {
        let mut score = self.bias;
        for j in 0..TOTAL_FEATURES {
            score += self.weights[j] * (values[j] - self.scaler.mean[j]) / self.scaler.std[j];
        }
        score
    }

    /// Rumour iff the score strictly exceeds the detection threshold.
    pub fn classify(&self, score: f64) -> Label {
        if score > self.theta {
            Label::Rumour
        } else {
            Label::NonRumour
        }
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), ModelError> {
        let mut w = BufWriter::new(File::create(path)?);
        w.write_all(MODEL_MAGIC)?;
        bin::write_u32(&mut w, MODEL_VERSION)?;
        bin::write_u64(&mut w, self.manifest_hash)?;
        bin::write_u64(&mut w, self.pf.capacity as u64)?;
        bin::write_f64(&mut w, self.pf.pf_threshold)?;
        bin::write_f64(&mut w, self.theta)?;
        bin::write_f64(&mut w, self.theta1)?;
        for j in 0..TOTAL_FEATURES {
            bin::write_f64(&mut w, self.scaler.mean[j])?;
            bin::write_f64(&mut w, self.scaler.std[j])?;
        }
        for j in 0..TOTAL_FEATURES {
            bin::write_f64(&mut w, self.weights[j])?;
        }
        bin::write_f64(&mut w, self.bias)?;
        w.flush()?;
        Ok(())
    }

    /// Load a model, rejecting version drift and manifest drift. Scores of
    /// a loaded model are bit-identical to the saved one on any input.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ModelError> {
        let mut r = BufReader::new(File::open(path)?);
        let mut magic = [0u8; 6];
        r.read_exact(&mut magic)?;
        if &magic != MODEL_MAGIC {
            return Err(ModelError::BadMagic);
        }
        let version = bin::read_u32(&mut r)?;
        if version != MODEL_VERSION {
            return Err(ModelError::Version(version));
        }
        let manifest = bin::read_u64(&mut r)?;
        let current = features::manifest_hash();
        if manifest != current {
            return Err(ModelError::ManifestMismatch {
                expected: manifest,
                found: current,
            });
        }
        let pf = PfConfig {
            capacity: bin::read_u64(&mut r)? as usize,
            pf_threshold: bin::read_f64(&mut r)?,
        };
        let theta = bin::read_f64(&mut r)?;
        let theta1 = bin::read_f64(&mut r)?;
        let mut scaler = Scaler {
            mean: [0.0; TOTAL_FEATURES],
            std: [1.0; TOTAL_FEATURES],
        };
        for j in 0..TOTAL_FEATURES {
            scaler.mean[j] = bin::read_f64(&mut r)?;
            scaler.std[j] = bin::read_f64(&mut r)?;
        }
        let mut weights = [0.0; TOTAL_FEATURES];
        for w in weights.iter_mut() {
            *w = bin::read_f64(&mut r)?;
        }
        let bias = bin::read_f64(&mut r)?;
        Ok(Self {
            weights,
            bias,
            scaler,
            theta,
            theta1,
            pf,
            manifest_hash: manifest,
        })
    }

    /// Human-readable weight export: `feature,weight` CSV.
    pub fn weights_csv(&self) -> String {
        let mut out = String::from("feature,weight\n");
        for j in 0..TOTAL_FEATURES {
            out.push_str(&format!(
                "{},{}\n",
                features::feature_name(j),
                self.weights[j]
            ));
        }
        out.push_str(&format!("bias,{}\n", self.bias));
        out
    }
}

/// Accuracy of predicting rumour iff `score > threshold`.
fn accuracy_at(scored: &[(f64, Label)], threshold: f64) -> f64 {
    let correct = scored
        .iter()
        .filter(|(s, l)| (*s > threshold) == (*l == Label::Rumour))
        .count();
    correct as f64 / scored.len() as f64
}

/// Candidate thresholds: midpoints of adjacent distinct sorted scores plus
/// one value below and one above every score.
pub fn threshold_candidates(scores: &[f64]) -> Vec<f64> {
    let mut distinct: Vec<f64> = scores.to_vec();
    distinct.sort_by(|a, b| a.partial_cmp(b).unwrap());
    distinct.dedup();
    let mut out = Vec::with_capacity(distinct.len() + 1);
    out.push(distinct[0] - 1.0);
    for pair in distinct.windows(2) {
        out.push((pair[0] + pair[1]) / 2.0);
    }
    out.push(distinct[distinct.len() - 1] + 1.0);
    out
}

/// The candidate threshold maximizing training accuracy; ties resolve to
/// the lowest candidate. Returns (threshold, accuracy).
pub fn optimal_threshold(scored: &[(f64, Label)]) -> (f64, f64) {
    let scores: Vec<f64> = scored.iter().map(|(s, _)| *s).collect();
    let mut best = (f64::NEG_INFINITY, -1.0);
    for cand in threshold_candidates(&scores) {
        let acc = accuracy_at(scored, cand);
        if acc > best.1 {
            best = (cand, acc);
        }
    }
    best
}

/// Deterministic full-batch subgradient descent on the primal SVM
/// objective, Pegasos-style step sizes and ball projection, over features
/// augmented with a constant-1 bias coordinate. Returns (weights, bias).
fn fit_linear(
    rows: &[[f64; TOTAL_FEATURES]],
    labels: &[f64],
    cfg: &SvmConfig,
) -> ([f64; TOTAL_FEATURES], f64) {
    let n = rows.len();
    let lambda = 1.0 / (cfg.c * n as f64);
    let radius = 1.0 / lambda.sqrt();
    let dim = TOTAL_FEATURES + 1;
    let mut w = vec![0.0f64; dim];
    for t in 1..=u64::from(cfg.epochs.max(1)) {
        let eta = 1.0 / (lambda * t as f64);
        let mut grad_sum = vec![0.0f64; dim];
        for (row, &y) in rows.iter().zip(labels) {
            let mut margin = w[TOTAL_FEATURES];
            for j in 0..TOTAL_FEATURES {
                margin += w[j] * row[j];
            }
            if y * margin < 1.0 {
                for j in 0..TOTAL_FEATURES {
                    grad_sum[j] += y * row[j];
                }
                grad_sum[TOTAL_FEATURES] += y;
            }
        }
        let keep = 1.0 - eta * lambda;
        let step = eta / n as f64;
        for j in 0..dim {
            w[j] = keep * w[j] + step * grad_sum[j];
        }
        let norm = w.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > radius {
            let scale = radius / norm;
            for v in w.iter_mut() {
                *v *= scale;
            }
        }
    }
    let mut weights = [0.0; TOTAL_FEATURES];
    weights.copy_from_slice(&w[..TOTAL_FEATURES]);
    (weights, w[TOTAL_FEATURES])
}

fn check_classes(examples: &[TrainExample]) -> Result<(usize, usize), ModelError> {
    if examples.is_empty() {
        return Err(ModelError::EmptyTrainingSet);
    }
    let rumours = examples
        .iter()
        .filter(|e| e.label == Label::Rumour)
        .count();
    let non_rumours = examples.len() - rumours;
    if rumours == 0 || non_rumours == 0 {
        return Err(ModelError::SingleClass);
    }
    Ok((rumours, non_rumours))
}

/// Round-one fit: all features except pseudo feedback, which stays frozen
/// at zero so it cannot pick up weight.
#[derive(Debug, Clone)]
pub struct Round1 {
    pub weights: [f64; TOTAL_FEATURES],
    pub bias: f64,
    pub scaler: Scaler,
    pub theta1: f64,
    pub train_accuracy: f64,
}

pub fn train_round1(examples: &[TrainExample], cfg: &SvmConfig) -> Result<Round1, ModelError> {
    check_classes(examples)?;
    let rows: Vec<[f64; TOTAL_FEATURES]> = examples
        .iter()
        .map(|e| {
            let mut base = e.base;
            base[PF_INDEX] = 0.0;
            base
        })
        .collect();
    let labels: Vec<f64> = examples.iter().map(|e| label_y(e.label)).collect();
    let scaler = Scaler::fit(&rows);
    let std_rows: Vec<[f64; TOTAL_FEATURES]> = rows.iter().map(|r| scaler.apply(r)).collect();
    let (mut weights, bias) = fit_linear(&std_rows, &labels, cfg);
    weights[PF_INDEX] = 0.0;
    let scored: Vec<(f64, Label)> = std_rows
        .iter()
        .zip(examples)
        .map(|(r, e)| {
            let mut s = bias;
            for j in 0..TOTAL_FEATURES {
                s += weights[j] * r[j];
            }
            (s, e.label)
        })
        .collect();
    let (theta1, train_accuracy) = optimal_threshold(&scored);
    Ok(Round1 {
        weights,
        bias,
        scaler,
        theta1,
        train_accuracy,
    })
}

/// Pseudo-feedback values obtained by replaying the training stream with
/// round-one scores driving buffer admission.
pub fn replay_pf(examples: &[TrainExample], round1: &Round1, pf: &PfConfig) -> Vec<f64> {
    let mut buffer = PfBuffer::new(pf.capacity);
    let mut values = Vec::with_capacity(examples.len());
    for e in examples {
        let pf_value = pf_feature(&buffer, &e.text_vector);
        values.push(pf_value);
        let mut base = e.base;
        base[PF_INDEX] = 0.0;
        let std = round1.scaler.apply(&base);
        let mut score = round1.bias;
        for j in 0..TOTAL_FEATURES {
            score += round1.weights[j] * std[j];
        }
        maybe_admit(&mut buffer, &e.id, &e.text_vector, score, pf);
    }
    values
}

/// Round two: refit on the full 58-dimensional vectors. By default the
/// final model keeps the round-one weights verbatim at the 57 non-PF
/// positions and adopts only the PF weight and the refreshed bias;
/// `joint_round2` keeps the full round-two weight vector instead.
pub fn train_round2(
    examples: &[TrainExample],
    round1: &Round1,
    pf: PfConfig,
    cfg: &SvmConfig,
    joint_round2: bool,
) -> Result<(Model, TrainReport), ModelError> {
    let (rumours, non_rumours) = check_classes(examples)?;
    let pf_values = replay_pf(examples, round1, &pf);
    let rows: Vec<[f64; TOTAL_FEATURES]> = examples
        .iter()
        .zip(&pf_values)
        .map(|(e, &pf_value)| {
            let mut row = e.base;
            row[PF_INDEX] = pf_value;
            row
        })
        .collect();
    let labels: Vec<f64> = examples.iter().map(|e| label_y(e.label)).collect();

    // Non-PF columns are the same data as round one, so their statistics
    // carry over; only the PF column gets fresh stats.
    let mut scaler = round1.scaler.clone();
    let pf_col = Scaler::fit(&rows);
    scaler.mean[PF_INDEX] = pf_col.mean[PF_INDEX];
    scaler.std[PF_INDEX] = pf_col.std[PF_INDEX];

    let std_rows: Vec<[f64; TOTAL_FEATURES]> = rows.iter().map(|r| scaler.apply(r)).collect();
    let (w2, b2) = fit_linear(&std_rows, &labels, cfg);

    let mut weights = if joint_round2 { w2 } else { round1.weights };
    weights[PF_INDEX] = w2[PF_INDEX];
    let bias = b2;

    let scored: Vec<(f64, Label)> = std_rows
        .iter()
        .zip(examples)
        .map(|(r, e)| {
            let mut s = bias;
            for j in 0..TOTAL_FEATURES {
                s += weights[j] * r[j];
            }
            (s, e.label)
        })
        .collect();
    let (theta, round2_train_accuracy) = optimal_threshold(&scored);

    let model = Model {
        weights,
        bias,
        scaler,
        theta,
        theta1: round1.theta1,
        pf,
        manifest_hash: features::manifest_hash(),
    };
    let report = TrainReport {
        round1_train_accuracy: round1.train_accuracy,
        round2_train_accuracy,
        theta1: round1.theta1,
        theta,
        rumour_count: rumours,
        non_rumour_count: non_rumours,
    };
    Ok((model, report))
}

/// How the pseudo-feedback admission threshold is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PfThresholdPolicy {
    /// Use the round-one optimal detection threshold.
    Theta1,
    /// Use a fixed value.
    Fixed(f64),
}

/// The full two-round procedure over a chronologically ordered training
/// stream. Examples are sorted by timestamp (stable) before training.
pub fn train_two_rounds(
    examples: &[TrainExample],
    capacity: usize,
    policy: PfThresholdPolicy,
    cfg: &SvmConfig,
    joint_round2: bool,
) -> Result<(Model, TrainReport), ModelError> {
    let mut ordered: Vec<TrainExample> = examples.to_vec();
    ordered.sort_by_key(|e| e.timestamp);
    let round1 = train_round1(&ordered, cfg)?;
    let pf_threshold = match policy {
        PfThresholdPolicy::Theta1 => round1.theta1,
        PfThresholdPolicy::Fixed(v) => v,
    };
    let pf = PfConfig {
        capacity,
        pf_threshold,
    };
    train_round2(&ordered, &round1, pf, cfg, joint_round2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::manifest_hash;
    use proptest::prelude::*;

    fn identity_model() -> Model {
        Model {
            weights: [0.0; TOTAL_FEATURES],
            bias: 0.0,
            scaler: Scaler {
                mean: [0.0; TOTAL_FEATURES],
                std: [1.0; TOTAL_FEATURES],
            },
            theta: 0.0,
            theta1: 0.0,
            pf: PfConfig {
                capacity: 0,
                pf_threshold: 0.0,
            },
            manifest_hash: manifest_hash(),
        }
    }

    fn example(id: &str, ts: i64, label: Label, base: [f64; TOTAL_FEATURES]) -> TrainExample {
        TrainExample {
            id: id.into(),
            timestamp: ts,
            label,
            base,
            text_vector: TfIdfVector::empty(),
        }
    }

    #[test]
    fn zero_model_scores_zero() {
        let model = identity_model();
        let mut values = [0.0; TOTAL_FEATURES];
        values[5] = 123.0;
        assert_eq!(model.score_values(&values), 0.0);
    }

    #[test]
    fn unit_weight_projects_coordinate() {
        let mut model = identity_model();
        model.weights[7] = 1.0;
        let mut values = [0.0; TOTAL_FEATURES];
        values[7] = 3.5;
        values[8] = 99.0;
        assert_eq!(model.score_values(&values), 3.5);
    }

    #[test]
    fn fixture_dot_product() {
        // deterministic pseudo-random fixture, checked against an
        // independently computed dot product
        let mut model = identity_model();
        let mut values = [0.0; TOTAL_FEATURES];
        let mut state = 0x12345678u64;
        let mut next = || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((state >> 33) as f64) / (u32::MAX as f64) - 0.5
        };
        for j in 0..TOTAL_FEATURES {
            model.weights[j] = next();
            values[j] = next();
        }
        model.bias = next();
        let mut expected = model.bias;
        for j in 0..TOTAL_FEATURES {
            expected += model.weights[j] * values[j];
        }
        assert!((model.score_values(&values) - expected).abs() < 1e-12);
    }

    #[test]
    fn manifest_mismatch_rejected() {
        let model = identity_model();
        let fv = FeatureVector {
            values: [0.0; TOTAL_FEATURES],
            manifest_hash: model.manifest_hash ^ 1,
        };
        assert!(matches!(
            model.rumour_score(&fv),
            Err(ModelError::ManifestMismatch { .. })
        ));
    }

    #[test]
    fn classify_is_strict() {
        let mut model = identity_model();
        model.theta = 0.5;
        assert_eq!(model.classify(0.5), Label::NonRumour);
        assert_eq!(model.classify(0.5 + 1e-9), Label::Rumour);
    }

    proptest! {
        #[test]
        fn classify_monotone(theta in -5.0f64..5.0, a in -5.0f64..5.0, b in -5.0f64..5.0) {
            let mut model = identity_model();
            model.theta = theta;
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            if model.classify(lo) == Label::Rumour {
                prop_assert_eq!(model.classify(hi), Label::Rumour);
            }
        }
    }

    fn base_with(idx: usize, v: f64) -> [f64; TOTAL_FEATURES] {
        let mut base = [0.0; TOTAL_FEATURES];
        base[idx] = v;
        base
    }

    #[test]
    fn separable_toy_reaches_full_accuracy() {
        // two active features, four points, linearly separable
        let examples = vec![
            example("a", 0, Label::Rumour, base_with(0, 2.0)),
            example("b", 1, Label::Rumour, base_with(0, 1.5)),
            example("c", 2, Label::NonRumour, base_with(0, -1.0)),
            example("d", 3, Label::NonRumour, base_with(0, -2.0)),
        ];
        let round1 = train_round1(&examples, &SvmConfig::default()).unwrap();
        assert_eq!(round1.train_accuracy, 1.0);
    }

    #[test]
    fn degenerate_identical_vectors() {
        let base = base_with(3, 1.0);
        let examples = vec![
            example("a", 0, Label::Rumour, base),
            example("b", 1, Label::NonRumour, base),
            example("c", 2, Label::Rumour, base),
            example("d", 3, Label::NonRumour, base),
        ];
        let round1 = train_round1(&examples, &SvmConfig::default()).unwrap();
        assert_eq!(round1.train_accuracy, 0.5);
        assert_eq!(round1.weights, [0.0; TOTAL_FEATURES]);
        assert_eq!(round1.bias, 0.0);
    }

    #[test]
    fn single_class_rejected() {
        let examples = vec![
            example("a", 0, Label::Rumour, base_with(0, 1.0)),
            example("b", 1, Label::Rumour, base_with(0, 2.0)),
        ];
        assert!(matches!(
            train_round1(&examples, &SvmConfig::default()),
            Err(ModelError::SingleClass)
        ));
    }

    #[test]
    fn theta_matches_exhaustive_sweep() {
        // fixed 20-point fixture; brute-force sweep over a fine grid plus
        // all observed scores must not beat the selected threshold
        let mut scored = Vec::new();
        let mut state = 0xdeadbeefu64;
        let mut next = || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((state >> 33) as f64) / (u32::MAX as f64)
        };
        for i in 0..20 {
            let label = if i % 2 == 0 {
                Label::Rumour
            } else {
                Label::NonRumour
            };
            let bump = if label == Label::Rumour { 0.3 } else { 0.0 };
            scored.push((next() + bump, label));
        }
        let (theta, acc) = optimal_threshold(&scored);
        assert!((accuracy_at(&scored, theta) - acc).abs() < 1e-15);
        let lo = scored.iter().map(|(s, _)| *s).fold(f64::INFINITY, f64::min) - 1.0;
        let hi = scored.iter().map(|(s, _)| *s).fold(f64::NEG_INFINITY, f64::max) + 1.0;
        let mut sweep = acc;
        let steps = 20_000;
        for i in 0..=steps {
            let t = lo + (hi - lo) * (i as f64) / (steps as f64);
            sweep = sweep.max(accuracy_at(&scored, t));
        }
        for (s, _) in &scored {
            sweep = sweep.max(accuracy_at(&scored, *s));
        }
        assert!(
            acc >= sweep - 1e-15,
            "sweep found better accuracy: {sweep} > {acc}"
        );
    }

    fn pf_fixture() -> Vec<TrainExample> {
        // rumours share a text direction so later ones see high PF;
        // two "hard" rumours are not separable without it
        let mut examples = Vec::new();
        let rumour_vec = TfIdfVector::from_entries(vec![(1, 1.0)]);
        let mut ts = 0;
        for i in 0..10 {
            let strength = if i < 8 { 1.0 } else { 0.1 };
            examples.push(TrainExample {
                id: format!("r{i}"),
                timestamp: ts,
                label: Label::Rumour,
                base: base_with(51, strength),
                text_vector: rumour_vec.clone(),
            });
            ts += 2;
        }
        let mut ts = 1;
        for i in 0..10 {
            examples.push(TrainExample {
                id: format!("n{i}"),
                timestamp: ts,
                label: Label::NonRumour,
                base: base_with(51, 0.3),
                text_vector: TfIdfVector::from_entries(vec![(100 + i as u64, 1.0)]),
            });
            ts += 2;
        }
        examples
    }

    #[test]
    fn pf_weight_positive_on_duplicate_fixture() {
        let (model, report) = train_two_rounds(
            &pf_fixture(),
            100,
            PfThresholdPolicy::Theta1,
            &SvmConfig::default(),
            false,
        )
        .unwrap();
        assert!(
            model.weights[PF_INDEX] > 0.0,
            "PF weight = {}",
            model.weights[PF_INDEX]
        );
        assert!(report.round2_train_accuracy >= report.round1_train_accuracy);
    }

    #[test]
    fn splice_preserves_round1_weights() {
        let examples = pf_fixture();
        let mut ordered = examples.clone();
        ordered.sort_by_key(|e| e.timestamp);
        let round1 = train_round1(&ordered, &SvmConfig::default()).unwrap();
        let (model, _) = train_two_rounds(
            &examples,
            100,
            PfThresholdPolicy::Theta1,
            &SvmConfig::default(),
            false,
        )
        .unwrap();
        for j in 0..PF_INDEX {
            assert_eq!(
                model.weights[j].to_bits(),
                round1.weights[j].to_bits(),
                "weight {j} not preserved"
            );
        }
    }

    #[test]
    fn unreachable_pf_threshold_freezes_pf_weight() {
        let (model, _) = train_two_rounds(
            &pf_fixture(),
            100,
            PfThresholdPolicy::Fixed(f64::INFINITY),
            &SvmConfig::default(),
            false,
        )
        .unwrap();
        assert_eq!(model.weights[PF_INDEX], 0.0);

        let (model, _) = train_two_rounds(
            &pf_fixture(),
            0,
            PfThresholdPolicy::Theta1,
            &SvmConfig::default(),
            false,
        )
        .unwrap();
        assert_eq!(model.weights[PF_INDEX], 0.0);
    }

    #[test]
    fn zero_capacity_matches_unreachable_threshold() {
        let (a, _) = train_two_rounds(
            &pf_fixture(),
            0,
            PfThresholdPolicy::Theta1,
            &SvmConfig::default(),
            false,
        )
        .unwrap();
        let (b, _) = train_two_rounds(
            &pf_fixture(),
            100,
            PfThresholdPolicy::Fixed(f64::INFINITY),
            &SvmConfig::default(),
            false,
        )
        .unwrap();
        assert_eq!(a.weights, b.weights);
        assert_eq!(a.bias.to_bits(), b.bias.to_bits());
        assert_eq!(a.theta.to_bits(), b.theta.to_bits());
    }

    #[test]
    fn model_file_roundtrip_is_bit_identical() {
        let (model, _) = train_two_rounds(
            &pf_fixture(),
            100,
            PfThresholdPolicy::Theta1,
            &SvmConfig::default(),
            false,
        )
        .unwrap();
        let tmp = tempfile::NamedTempFile::new().unwrap();
        model.save(tmp.path()).unwrap();
        let back = Model::load(tmp.path()).unwrap();
        for j in 0..TOTAL_FEATURES {
            assert_eq!(model.weights[j].to_bits(), back.weights[j].to_bits());
        }
        assert_eq!(model.bias.to_bits(), back.bias.to_bits());
        assert_eq!(model.theta.to_bits(), back.theta.to_bits());
        let mut values = [0.25; TOTAL_FEATURES];
        values[50] = -3.0;
        assert_eq!(
            model.score_values(&values).to_bits(),
            back.score_values(&values).to_bits()
        );
    }

    #[test]
    fn truncated_model_file_fails() {
        let (model, _) = train_two_rounds(
            &pf_fixture(),
            10,
            PfThresholdPolicy::Theta1,
            &SvmConfig::default(),
            false,
        )
        .unwrap();
        let tmp = tempfile::NamedTempFile::new().unwrap();
        model.save(tmp.path()).unwrap();
        let bytes = std::fs::read(tmp.path()).unwrap();
        std::fs::write(tmp.path(), &bytes[..bytes.len() - 9]).unwrap();
        assert!(Model::load(tmp.path()).is_err());
    }

    #[test]
    fn stale_manifest_hash_names_hashes() {
        let (model, _) = train_two_rounds(
            &pf_fixture(),
            10,
            PfThresholdPolicy::Theta1,
            &SvmConfig::default(),
            false,
        )
        .unwrap();
        let tmp = tempfile::NamedTempFile::new().unwrap();
        model.save(tmp.path()).unwrap();
        let mut bytes = std::fs::read(tmp.path()).unwrap();
        bytes[10] ^= 0xff; // corrupt the stored manifest hash
        std::fs::write(tmp.path(), &bytes).unwrap();
        let err = Model::load(tmp.path()).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("0x"), "expected hashes in message, got: {msg}");
    }

    #[test]
    fn training_is_deterministic() {
        let run = || {
            train_two_rounds(
                &pf_fixture(),
                100,
                PfThresholdPolicy::Theta1,
                &SvmConfig::default(),
                false,
            )
            .unwrap()
            .0
        };
        let (a, b) = (run(), run());
        for j in 0..TOTAL_FEATURES {
            assert_eq!(a.weights[j].to_bits(), b.weights[j].to_bits());
        }
        assert_eq!(a.theta.to_bits(), b.theta.to_bits());
    }

    #[test]
    fn weights_csv_lists_every_feature() {
        let model = identity_model();
        let csv = model.weights_csv();
        assert_eq!(csv.lines().count(), TOTAL_FEATURES + 2);
        assert!(csv.contains("pseudo_feedback,0"));
        assert!(csv.contains("bias,0"));
    }
}
