//! Pseudo feedback: a bounded ring of the most recent messages whose
//! rumour score cleared a threshold, and the feature measuring how close a
//! new message comes to any of them.
//!
//! Comparing only against the k most recent pseudo-rumours keeps the
//! per-message cost independent of stream length.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::textstats::TfIdfVector;

/// Capacity and admission threshold for the pseudo-feedback buffer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PfConfig {
    pub capacity: usize,
    pub pf_threshold: f64,
}

/// Ring of the last `capacity` admitted (id, vector) pairs, oldest first.
#[derive(Debug, Clone, Default)]
pub struct PfBuffer {
    capacity: usize,
    entries: VecDeque<(String, TfIdfVector)>,
}

impl PfBuffer {
    pub fn new(capacity: usize) -> Self {
        Self {
            capacity,
            entries: VecDeque::with_capacity(capacity.min(1024)),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Buffered doc ids, oldest first.
    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(id, _)| id.as_str())
    }

    pub fn clear(&mut self) {
        self.entries.clear();
    }
}

/// Maximum cosine similarity between the document vector and any buffered
/// pseudo-rumour; 0.0 for an empty buffer or a zero-norm document.
pub fn pf_feature(buffer: &PfBuffer, doc_vector: &TfIdfVector) -> f64 {
    if doc_vector.norm() == 0.0 {
        return 0.0;
    }
    let mut best = 0.0f64;
    for (_, v) in &buffer.entries {
        let c = doc_vector.cosine(v);
        if c > best {
            best = c;
        }
    }
    best.clamp(0.0, 1.0)
}

/// Admit the document as a pseudo-rumour when its score strictly exceeds
/// the threshold; zero-norm vectors carry no evidence and are never
/// admitted. Oldest entries are evicted once over capacity.
pub fn maybe_admit(
    buffer: &mut PfBuffer,
    doc_id: &str,
    doc_vector: &TfIdfVector,
    rumour_score: f64,
    cfg: &PfConfig,
) {
    if cfg.capacity == 0 || rumour_score <= cfg.pf_threshold || doc_vector.norm() == 0.0 {
        return;
    }
    if buffer.entries.len() == cfg.capacity {
        buffer.entries.pop_front();
    }
    buffer
        .entries
        .push_back((doc_id.to_string(), doc_vector.clone()));
}
