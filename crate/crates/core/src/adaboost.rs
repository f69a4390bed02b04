//! AdaBoost over axis-aligned decision stumps.
//!
//! Rounds run for exactly the requested count: a perfect stump (ε = 0) does
//! not stop training, its error is clamped to [`EPSILON_FLOOR`] when the vote
//! weight is computed. Pipelines that use the stump outputs as features rely
//! on getting exactly `T` columns.

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};

/// Lower clamp for ε when computing α.
pub const EPSILON_FLOOR: f64 = 1e-10;
/// Upper clamp for ε when computing α (keeps α > 0).
pub const EPSILON_CEIL: f64 = 0.5 - 1e-10;
/// Weighted errors closer than this are ties, resolved by scan order.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// `sign` with the tie `sign(0) = +1`.
#[inline]
pub fn sign(score: f64) -> i8 {
    if score >= 0.0 {
        1
    } else {
        -1
    }
}

/// `h(x) = polarity` when `x[feature] > threshold`, else `-polarity`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecisionStump {
    pub feature: usize,
    pub threshold: f64,
    pub polarity: i8,
}

impl DecisionStump {
    #[inline]
    pub fn predict(&self, x: &[f64]) -> i8 {
        if x[self.feature] > self.threshold {
            self.polarity
        } else {
            -self.polarity
        }
    }
}

/// A probability distribution over training samples.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleWeights(Vec<f64>);

impl SampleWeights {
    pub fn uniform(n: usize) -> Self {
        assert!(n > 0, "no samples");
        Self(vec![1.0 / n as f64; n])
    }

    /// Accepts nonnegative finite weights summing to 1 within 1e-12.
    pub fn from_vec(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if values.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidArgument("weights must be finite and nonnegative".into()));
        }
        let total: f64 = values.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!("weights sum to {total}, not 1")));
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Per-round training record.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundLog {
    /// Weighted error of the chosen stump, before clamping.
    pub epsilon: f64,
    /// Edge over random guessing, `0.5 - epsilon`.
    pub gamma: f64,
    /// Normalizer of the weight update.
    pub z: f64,
    /// Training error of the ensemble after this round.
    pub train_error: f64,
}

impl RoundLog {
    /// Whether α was computed from a clamped ε.
    pub fn clamped(&self) -> bool {
        self.epsilon < EPSILON_FLOOR || self.epsilon > EPSILON_CEIL
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "wire::AdaBoostWire", into = "wire::AdaBoostWire")]
pub struct AdaBoostModel {
    stumps: Vec<DecisionStump>,
    alphas: Vec<f64>,
    rounds: Vec<RoundLog>,
}

impl AdaBoostModel {
    /// Assembles a model; `stumps`, `alphas` and `rounds` must have equal length
    /// (`rounds` may be empty for hand-built models).
    pub fn from_parts(
        stumps: Vec<DecisionStump>,
        alphas: Vec<f64>,
        rounds: Vec<RoundLog>,
    ) -> Result<Self> {
        if stumps.len() != alphas.len() {
            return Err(Error::DimensionMismatch {
                expected: stumps.len(),
                got: alphas.len(),
            });
        }
        if !rounds.is_empty() && rounds.len() != stumps.len() {
            return Err(Error::DimensionMismatch {
                expected: stumps.len(),
                got: rounds.len(),
            });
        }
        if let Some(s) = stumps.iter().find(|s| s.polarity.abs() != 1) {
            return Err(Error::InvalidArgument(format!("stump polarity {} is not ±1", s.polarity)));
        }
        if alphas.iter().any(|a| !a.is_finite()) {
            return Err(Error::InvalidArgument("non-finite alpha".into()));
        }
        Ok(Self {
            stumps,
            alphas,
            rounds,
        })
    }

    pub fn stumps(&self) -> &[DecisionStump] {
        &self.stumps
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn rounds(&self) -> &[RoundLog] {
        &self.rounds
    }

    pub fn n_rounds(&self) -> usize {
        self.stumps.len()
    }

    /// The model after its first `t` rounds. Training is deterministic and
    /// never stops early, so this equals a fresh `t`-round run.
    pub fn prefix(&self, t: usize) -> AdaBoostModel {
        assert!(t <= self.n_rounds(), "prefix longer than model");
        AdaBoostModel {
            stumps: self.stumps[..t].to_vec(),
            alphas: self.alphas[..t].to_vec(),
            rounds: self.rounds[..t.min(self.rounds.len())].to_vec(),
        }
    }

    /// `f(x) = Σ α_t h_t(x)`.
    pub fn score(&self, x: &[f64]) -> f64 {
        self.stumps
            .iter()
            .zip(&self.alphas)
            .map(|(s, a)| a * f64::from(s.predict(x)))
            .sum()
    }

    pub fn predict(&self, x: &[f64]) -> i8 {
        sign(self.score(x))
    }

    pub fn error_rate(&self, dataset: &Dataset) -> f64 {
        let wrong = (0..dataset.n_samples())
            .filter(|&i| self.predict(dataset.row(i)) != dataset.labels()[i])
            .count();
        wrong as f64 / dataset.n_samples() as f64
    }

    /// Upper bound `exp(-2 Σ γ_t²)` on the training error.
    pub fn training_error_bound(&self) -> f64 {
        (-2.0 * self.rounds.iter().map(|r| r.gamma * r.gamma).sum::<f64>()).exp()
    }
}

pub fn ensemble_score(model: &AdaBoostModel, x: &[f64]) -> f64 {
    model.score(x)
}

pub fn ensemble_predict(model: &AdaBoostModel, x: &[f64]) -> i8 {
    model.predict(x)
}

pub fn training_error_bound(model: &AdaBoostModel) -> f64 {
    model.training_error_bound()
}

/// `α = ½ ln((1 − ε̂)/ε̂)` with ε̂ clamped to `[EPSILON_FLOOR, EPSILON_CEIL]`.
pub fn compute_alpha(epsilon: f64) -> Result<f64> {
    if !(0.0..0.5).contains(&epsilon) {
        return Err(Error::InvalidArgument(format!(
            "weighted error {epsilon} outside [0, 0.5)"
        )));
    }
    let e = epsilon.clamp(EPSILON_FLOOR, EPSILON_CEIL);
    Ok(0.5 * ((1.0 - e) / e).ln())
}

/// Exponential reweighting `D'(i) ∝ D(i)·exp(−α y_i h(x_i))`. Returns the new
/// weights and the normalizer `Z`.
pub fn update_weights(
    weights: &SampleWeights,
    alpha: f64,
    predictions: &[i8],
    labels: &[i8],
) -> Result<(SampleWeights, f64)> {
    let n = weights.len();
    for len in [predictions.len(), labels.len()] {
        if len != n {
            return Err(Error::DimensionMismatch { expected: n, got: len });
        }
    }
    let mut next: Vec<f64> = weights
        .values()
        .iter()
        .zip(predictions.iter().zip(labels))
        .map(|(&w, (&h, &y))| w * (-alpha * f64::from(y * h)).exp())
        .collect();
    let z: f64 = next.iter().sum();
    assert!(z > 0.0 && z.is_finite(), "weight update lost all mass (Z = {z})");
    for w in &mut next {
        *w /= z;
    }
    Ok((SampleWeights(next), z))
}

/// Per-feature sort orders, built once per dataset and reused every round.
#[derive(Debug)]
pub struct StumpSearch {
    columns: Vec<Column>,
}

#[derive(Debug)]
struct Column {
    order: Vec<usize>,
    /// `thresholds[k]` separates `order[..=k]` from `order[k+1..]`, or is NaN
    /// when the two sorted values are equal.
    thresholds: Vec<f64>,
    sentinel: f64,
}

impl StumpSearch {
    pub fn new(dataset: &Dataset) -> Self {
        let x = dataset.features();
        let columns = (0..x.cols())
            .map(|j| {
                let mut order: Vec<usize> = (0..x.rows()).collect();
                order.sort_by(|&a, &b| x.get(a, j).total_cmp(&x.get(b, j)).then(a.cmp(&b)));
                let thresholds = order
                    .windows(2)
                    .map(|w| {
                        let (lo, hi) = (x.get(w[0], j), x.get(w[1], j));
                        if lo < hi {
                            midpoint(lo, hi)
                        } else {
                            f64::NAN
                        }
                    })
                    .collect();
                let min = x.get(order[0], j);
                Column {
                    order,
                    thresholds,
                    sentinel: sentinel_below(min),
                }
            })
            .collect();
        Self { columns }
    }

    /// Exhaustive search over (feature, threshold, polarity) in tie-break
    /// order: lowest feature, lowest threshold, polarity +1 before −1.
    pub fn best(&self, labels: &[i8], weights: &[f64]) -> (DecisionStump, f64) {
        let (mut pos_total, mut neg_total) = (0.0, 0.0);
        for (&y, &w) in labels.iter().zip(weights) {
            if y > 0 {
                pos_total += w;
            } else {
                neg_total += w;
            }
        }

        let mut best = DecisionStump {
            feature: 0,
            threshold: 0.0,
            polarity: 1,
        };
        let mut best_err = f64::INFINITY;
        let mut consider = |feature: usize, threshold: f64, err_pos: f64, err_neg: f64| {
            if err_pos < best_err - TIE_TOLERANCE {
                best_err = err_pos;
                best = DecisionStump { feature, threshold, polarity: 1 };
            }
            if err_neg < best_err - TIE_TOLERANCE {
                best_err = err_neg;
                best = DecisionStump { feature, threshold, polarity: -1 };
            }
        };

        for (feature, col) in self.columns.iter().enumerate() {
            // Sentinel: every sample lies above the threshold.
            consider(feature, col.sentinel, neg_total, pos_total);
            let (mut left_pos, mut left_neg) = (0.0, 0.0);
            for (k, &i) in col.order[..col.order.len() - 1].iter().enumerate() {
                if labels[i] > 0 {
                    left_pos += weights[i];
                } else {
                    left_neg += weights[i];
                }
                let threshold = col.thresholds[k];
                if threshold.is_nan() {
                    continue;
                }
                let err_pos = left_pos + (neg_total - left_neg);
                let err_neg = left_neg + (pos_total - left_pos);
                consider(feature, threshold, err_pos, err_neg);
            }
        }
        (best, best_err.max(0.0))
    }
}

fn midpoint(lo: f64, hi: f64) -> f64 {
    let mid = 0.5 * (lo + hi);
    if mid < hi {
        mid
    } else {
        lo
    }
}

fn sentinel_below(min: f64) -> f64 {
    let s = min - 1.0;
    if s < min {
        s
    } else {
        min - min.abs()
    }
}

/// Trains one stump against the given weights. Returns the stump and its
/// weighted error, which never exceeds 0.5 because both polarities are searched.
pub fn train_stump(dataset: &Dataset, weights: &SampleWeights) -> Result<(DecisionStump, f64)> {
    if weights.len() != dataset.n_samples() {
        return Err(Error::DimensionMismatch {
            expected: dataset.n_samples(),
            got: weights.len(),
        });
    }
    let (stump, _) = StumpSearch::new(dataset).best(dataset.labels(), weights.values());
    let predictions: Vec<i8> = (0..dataset.n_samples()).map(|i| stump.predict(dataset.row(i))).collect();
    Ok((stump, misclassified_mass(weights.values(), &predictions, dataset.labels())))
}

/// Weighted error summed in sample order. The search ranks stumps with
/// prefix sums; the chosen one is rescored directly so rounding does not
/// depend on the sort order.
fn misclassified_mass(weights: &[f64], predictions: &[i8], labels: &[i8]) -> f64 {
    weights
        .iter()
        .zip(predictions.iter().zip(labels))
        .filter(|(_, (h, y))| h != y)
        .fold(0.0, |acc, (w, _)| acc + w)
}

/// Stepwise trainer; [`train_adaboost`] runs it for a fixed number of rounds.
pub struct Booster<'a> {
    dataset: &'a Dataset,
    search: StumpSearch,
    weights: SampleWeights,
    scores: Vec<f64>,
    predictions: Vec<i8>,
    model: AdaBoostModel,
}

impl<'a> Booster<'a> {
    pub fn new(dataset: &'a Dataset) -> Result<Self> {
        dataset.require_both_classes()?;
        let n = dataset.n_samples();
        Ok(Self {
            dataset,
            search: StumpSearch::new(dataset),
            weights: SampleWeights::uniform(n),
            scores: vec![0.0; n],
            predictions: vec![0; n],
            model: AdaBoostModel {
                stumps: Vec::new(),
                alphas: Vec::new(),
                rounds: Vec::new(),
            },
        })
    }

    pub fn weights(&self) -> &SampleWeights {
        &self.weights
    }

    pub fn model(&self) -> &AdaBoostModel {
        &self.model
    }

    pub fn into_model(self) -> AdaBoostModel {
        self.model
    }

    /// Runs one boosting round.
    pub fn step(&mut self) -> Result<RoundLog> {
        let labels = self.dataset.labels();
        let (stump, _) = self.search.best(labels, self.weights.values());
        for (i, p) in self.predictions.iter_mut().enumerate() {
            *p = stump.predict(self.dataset.row(i));
        }
        let epsilon = misclassified_mass(self.weights.values(), &self.predictions, labels);
        let alpha = compute_alpha(epsilon.min(EPSILON_CEIL))?;
        let (next, z) = update_weights(&self.weights, alpha, &self.predictions, labels)?;
        self.weights = next;

        let mut wrong = 0usize;
        for ((s, &p), &y) in self.scores.iter_mut().zip(&self.predictions).zip(labels) {
            *s += alpha * f64::from(p);
            if sign(*s) != y {
                wrong += 1;
            }
        }
        let log = RoundLog {
            epsilon,
            gamma: 0.5 - epsilon,
            z,
            train_error: wrong as f64 / labels.len() as f64,
        };
        self.model.stumps.push(stump);
        self.model.alphas.push(alpha);
        self.model.rounds.push(log);
        Ok(log)
    }
}

/// Runs exactly `rounds` rounds of AdaBoost.
pub fn train_adaboost(dataset: &Dataset, rounds: usize) -> Result<AdaBoostModel> {
    if rounds == 0 {
        return Err(Error::InvalidArgument("number of rounds must be positive".into()));
    }
    let mut booster = Booster::new(dataset)?;
    for _ in 0..rounds {
        booster.step()?;
    }
    Ok(booster.into_model())
}

mod wire {
    use super::*;

    pub const VERSION: &str = "adaboost-v1";

    #[derive(Serialize, Deserialize)]
    pub struct StumpEntry {
        pub feature: usize,
        pub threshold: f64,
        pub polarity: i8,
        pub alpha: f64,
    }

    #[derive(Serialize, Deserialize)]
    pub struct AdaBoostWire {
        pub version: String,
        pub stumps: Vec<StumpEntry>,
        #[serde(default)]
        pub rounds: Vec<RoundLog>,
    }

    impl From<AdaBoostModel> for AdaBoostWire {
        fn from(m: AdaBoostModel) -> Self {
            AdaBoostWire {
                version: VERSION.into(),
                stumps: m
                    .stumps
                    .iter()
                    .zip(&m.alphas)
                    .map(|(s, &alpha)| StumpEntry {
                        feature: s.feature,
                        threshold: s.threshold,
                        polarity: s.polarity,
                        alpha,
                    })
                    .collect(),
                rounds: m.rounds,
            }
        }
    }

    impl TryFrom<AdaBoostWire> for AdaBoostModel {
        type Error = Error;

        fn try_from(w: AdaBoostWire) -> Result<Self> {
            if w.version != VERSION {
                return Err(Error::Format(format!(
                    "expected version {VERSION:?}, found {:?}",
                    w.version
                )));
            }
            let (stumps, alphas) = w
                .stumps
                .into_iter()
                .map(|e| {
                    (
                        DecisionStump {
                            feature: e.feature,
                            threshold: e.threshold,
                            polarity: e.polarity,
                        },
                        e.alpha,
                    )
                })
                .unzip();
            AdaBoostModel::from_parts(stumps, alphas, w.rounds)
        }
    }
}
