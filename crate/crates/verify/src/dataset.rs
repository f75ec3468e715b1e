//! Trajectory-prediction datasets cut from rollout records, entity-value
//! token weights and the reference weighted negative log-likelihood.
//!
//! States are serialized one entity per line as fixed-width text:
//!
//! ```text
//! tick entity_id x y health ammo flags
//! ```
//!
//! with `flags` one of `-` (active), `S` (suppressed) or `D` (destroyed).
//! A target token is one such line; its annotation is the entity it
//! describes, so token `j` of a sample is annotated by `annotations[j]`.

use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use tacsim_core::canonical::sha256_hex;
use tacsim_core::scenario::ValueClass;
use tacsim_core::sim::{EntityTrack, RolloutRecord};
use tacsim_core::Vec2;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DatasetError {
    #[error("target token {0} has no entity annotation")]
    UnannotatedToken(usize),
    #[error("expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("log-probability {value} at token {index} is not the log of a probability in (0, 1]")]
    NonPositiveProbability { index: usize, value: f64 },
    #[error("prediction shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("no samples")]
    EmptyInput,
}

/// Window, horizon and stride are in ticks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DatasetConfig {
    pub window: usize,
    pub horizon: usize,
    pub stride: usize,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        DatasetConfig { window: 20, horizon: 10, stride: 10 }
    }
}

/// Token weights by entity value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaConfig {
    pub w_b: f64,
    pub w_f: f64,
}

impl Default for EvaConfig {
    fn default() -> Self {
        EvaConfig { w_b: 2.0, w_f: 1.0 }
    }
}

impl EvaConfig {
    /// Weights must satisfy `w_b >= w_f > 0`; equality is allowed so the
    /// unweighted objective is expressible.
    pub fn check(&self) -> Result<(), DatasetError> {
        if !(self.w_f > 0.0 && self.w_f.is_finite() && self.w_b.is_finite() && self.w_b >= self.w_f) {
            return Err(DatasetError::InvalidConfig(format!("need w_b >= w_f > 0, got w_b={} w_f={}", self.w_b, self.w_f)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenAnnotation {
    pub entity_id: String,
    pub value_class: ValueClass,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionSample {
    pub sample_id: String,
    pub plan_id: String,
    pub seed: u64,
    pub log_hash: String,
    /// Last tick of the history window.
    pub cut_tick: usize,
    pub history: String,
    pub target: String,
    pub annotations: Vec<TokenAnnotation>,
    /// Position described by each target token.
    pub target_positions: Vec<Vec2>,
    /// Target tokens per future tick (the entity count).
    pub entities_per_tick: usize,
}

impl PredictionSample {
    pub fn target_tokens(&self) -> impl Iterator<Item = &str> {
        self.target.lines()
    }
}

/// Samples plus the number of records too short to cut.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub samples: Vec<PredictionSample>,
    pub skipped: usize,
}

fn state_line(out: &mut String, tick: usize, t: &EntityTrack) {
    let p = t.positions[tick];
    let flag = if t.health[tick] <= 0.0 {
        'D'
    } else if t.suppressed[tick] {
        'S'
    } else {
        '-'
    };
    let _ = writeln!(out, "{tick:>4} {:<8} {:>8.2} {:>8.2} {:>7.1} {:>3} {flag}", t.entity_id, p.x, p.y, t.health[tick], t.ammo[tick]);
}

/// Cut each record at ticks `window-1, window-1+stride, ...` while the
/// horizon still fits, serializing `window` history ticks and `horizon`
/// target ticks of every entity.
pub fn build_prediction_dataset(records: &[RolloutRecord], config: &DatasetConfig) -> Result<Dataset, DatasetError> {
    if config.window == 0 || config.horizon == 0 || config.stride == 0 {
        return Err(DatasetError::InvalidConfig("window, horizon and stride must be positive".into()));
    }
    let mut out = Dataset { samples: Vec::new(), skipped: 0 };
    for r in records {
        let len = r.tracks.first().map_or(0, |t| t.positions.len());
        if len < config.window + config.horizon {
            out.skipped += 1;
            continue;
        }
        let mut cut = config.window - 1;
        while cut + config.horizon < len {
            let mut history = String::new();
            for k in cut + 1 - config.window..=cut {
                for t in &r.tracks {
                    state_line(&mut history, k, t);
                }
            }
            let mut target = String::new();
            let mut annotations = Vec::new();
            let mut target_positions = Vec::new();
            for k in cut + 1..=cut + config.horizon {
                for t in &r.tracks {
                    state_line(&mut target, k, t);
                    annotations.push(TokenAnnotation { entity_id: t.entity_id.clone(), value_class: t.value_class });
                    target_positions.push(t.positions[k]);
                }
            }
            out.samples.push(PredictionSample {
                sample_id: format!("{}-s{}-t{}", r.plan_id, r.seed.base_seed, cut),
                plan_id: r.plan_id.clone(),
                seed: r.seed.base_seed,
                log_hash: r.log_hash.clone(),
                cut_tick: cut,
                history,
                target,
                annotations,
                target_positions,
                entities_per_tick: r.tracks.len(),
            });
            cut += config.stride;
        }
    }
    Ok(out)
}

/// Weight of every target token: `w_b` for high-value entities, `w_f`
/// otherwise.
pub fn eva_token_weights(sample: &PredictionSample, config: &EvaConfig) -> Result<Vec<f64>, DatasetError> {
    let n = sample.target_tokens().count();
    (0..n)
        .map(|j| match sample.annotations.get(j).map(|a| a.value_class) {
            Some(ValueClass::HighValue) => Ok(config.w_b),
            Some(ValueClass::Ordinary) => Ok(config.w_f),
            None => Err(DatasetError::UnannotatedToken(j)),
        })
        .collect()
}

/// `-(1/n) * sum_j w_j * log p_j` over the `n` target tokens of one sample.
pub fn weighted_nll(sample: &PredictionSample, token_log_probs: &[f64], config: &EvaConfig) -> Result<f64, DatasetError> {
    let weights = eva_token_weights(sample, config)?;
    if weights.len() != token_log_probs.len() {
        return Err(DatasetError::LengthMismatch { expected: weights.len(), got: token_log_probs.len() });
    }
    if weights.is_empty() {
        return Err(DatasetError::EmptyInput);
    }
    let mut sum = 0.0;
    for (j, (w, lp)) in weights.iter().zip(token_log_probs).enumerate() {
        if !(*lp <= 0.0) || lp.is_infinite() {
            return Err(DatasetError::NonPositiveProbability { index: j, value: *lp });
        }
        sum += w * lp;
    }
    Ok(-sum / weights.len() as f64)
}

/// Mean of [`weighted_nll`] over a batch.
pub fn weighted_nll_batch(samples: &[PredictionSample], token_log_probs: &[Vec<f64>], config: &EvaConfig) -> Result<f64, DatasetError> {
    if samples.len() != token_log_probs.len() {
        return Err(DatasetError::LengthMismatch { expected: samples.len(), got: token_log_probs.len() });
    }
    if samples.is_empty() {
        return Err(DatasetError::EmptyInput);
    }
    let mut total = 0.0;
    for (s, lp) in samples.iter().zip(token_log_probs) {
        total += weighted_nll(s, lp, config)?;
    }
    Ok(total / samples.len() as f64)
}

/// Displacement of predicted positions against sample targets. Predictions
/// are given per sample in target-token order. ADE averages every position;
/// FDE averages, over samples, the mean displacement at the final tick.
pub fn eval_predictor(predictions: &[Vec<Vec2>], samples: &[PredictionSample]) -> Result<(f64, f64), DatasetError> {
    if predictions.len() != samples.len() {
        return Err(DatasetError::ShapeMismatch(format!("{} predictions for {} samples", predictions.len(), samples.len())));
    }
    if samples.is_empty() {
        return Err(DatasetError::EmptyInput);
    }
    let (mut sum, mut count, mut final_sum) = (0.0, 0usize, 0.0);
    for (i, (pred, s)) in predictions.iter().zip(samples).enumerate() {
        if pred.len() != s.target_positions.len() || s.entities_per_tick == 0 {
            return Err(DatasetError::ShapeMismatch(format!(
                "sample {i}: {} predicted positions, {} targets",
                pred.len(),
                s.target_positions.len()
            )));
        }
        let d: Vec<f64> = pred.iter().zip(&s.target_positions).map(|(p, t)| p.dist(*t)).collect();
        sum += d.iter().sum::<f64>();
        count += d.len();
        let last = &d[d.len() - s.entities_per_tick..];
        final_sum += last.iter().sum::<f64>() / last.len() as f64;
    }
    Ok((sum / count as f64, final_sum / samples.len() as f64))
}

/// One JSON object per line.
pub fn to_jsonl(samples: &[PredictionSample]) -> String {
    let mut out = String::new();
    for s in samples {
        out.push_str(&serde_json::to_string(s).expect("sample is always serializable"));
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSource {
    pub plan_id: String,
    pub seed: u64,
    pub log_hash: String,
}

/// Provenance of a dataset file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub config: DatasetConfig,
    pub eva: EvaConfig,
    pub n_samples: usize,
    pub skipped_records: usize,
    pub sources: Vec<DatasetSource>,
    /// SHA-256 of the JSONL dataset text.
    pub dataset_digest: String,
}

pub fn manifest(records: &[RolloutRecord], dataset: &Dataset, config: &DatasetConfig, eva: &EvaConfig) -> DatasetManifest {
    DatasetManifest {
        config: *config,
        eva: *eva,
        n_samples: dataset.samples.len(),
        skipped_records: dataset.skipped,
        sources: records.iter().map(|r| DatasetSource { plan_id: r.plan_id.clone(), seed: r.seed.base_seed, log_hash: r.log_hash.clone() }).collect(),
        dataset_digest: sha256_hex(to_jsonl(&dataset.samples).as_bytes()),
    }
}
