//! Boosted stumps as a feature map, followed by a linear SVM on the ±1 stump
//! outputs.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::adaboost::{sign, AdaBoostModel, Booster, DecisionStump};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::svm::{self, Gram, SolverOptions, SvmModel, HARD_MARGIN_C};

/// Maps a row `x` to `(h_1(x), …, h_T(x)) ∈ {−1, +1}^T`.
#[derive(Clone, Copy, Debug)]
pub struct FeatureMap<'a> {
    stumps: &'a [DecisionStump],
}

impl<'a> FeatureMap<'a> {
    pub fn new(stumps: &'a [DecisionStump]) -> Result<Self> {
        if stumps.is_empty() {
            return Err(Error::InvalidArgument("feature map needs at least one stump".into()));
        }
        Ok(Self { stumps })
    }

    pub fn of(model: &'a AdaBoostModel) -> Result<Self> {
        Self::new(model.stumps())
    }

    pub fn dim(&self) -> usize {
        self.stumps.len()
    }

    pub fn stumps(&self) -> &'a [DecisionStump] {
        self.stumps
    }

    /// Smallest input width the stumps can read.
    pub fn required_features(&self) -> usize {
        self.stumps.iter().map(|s| s.feature + 1).max().unwrap_or(0)
    }

    pub fn apply_row(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_width(x.len())?;
        Ok(self.stumps.iter().map(|s| f64::from(s.predict(x))).collect())
    }

    pub fn apply_matrix(&self, x: &Matrix) -> Result<Matrix> {
        self.check_width(x.cols())?;
        let t = self.dim();
        let mut data = Vec::with_capacity(x.rows() * t);
        for row in x.iter_rows() {
            data.extend(self.stumps.iter().map(|s| f64::from(s.predict(row))));
        }
        Matrix::from_vec(x.rows(), t, data)
    }

    fn check_width(&self, width: usize) -> Result<()> {
        let need = self.required_features();
        if width < need {
            return Err(Error::InvalidArgument(format!(
                "stump reads feature {} but rows have {width} features",
                need - 1
            )));
        }
        Ok(())
    }
}

pub fn feature_map_apply(map: &FeatureMap<'_>, dataset: &Dataset) -> Result<Matrix> {
    map.apply_matrix(dataset.features())
}

/// How the SVM stage picks between the hard and the soft margin.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MarginMode {
    /// Hard margin when the mapped data are separable, else soft margin with C.
    #[default]
    HardThenSoft,
    /// Soft margin with C only.
    Soft,
}

/// Result of the hard-margin attempt inside [`train_hybrid`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "kebab-case")]
pub enum HardAttempt {
    NotAttempted,
    Separable,
    /// Two identical mapped rows carry opposite labels.
    ConflictingRows,
    NotSeparable { max_slack: f64 },
    /// The solver hit its iteration cap first.
    Unconverged,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub rounds: usize,
    pub c: f64,
    /// Width of the input rows the model was trained on.
    pub input_features: usize,
    pub mode: MarginMode,
    pub hard_attempt: HardAttempt,
    pub hard_margin_used: bool,
    pub converged: bool,
    pub adaboost_train_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "wire::HybridWire", into = "wire::HybridWire")]
pub struct HybridModel {
    adaboost: AdaBoostModel,
    svm: SvmModel,
    provenance: Provenance,
}

impl HybridModel {
    pub fn adaboost(&self) -> &AdaBoostModel {
        &self.adaboost
    }

    pub fn svm(&self) -> &SvmModel {
        &self.svm
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn feature_map(&self) -> FeatureMap<'_> {
        FeatureMap {
            stumps: self.adaboost.stumps(),
        }
    }

    pub fn predict(&self, x: &[f64]) -> Result<i8> {
        hybrid_predict(self, x)
    }

    pub fn error_rate(&self, dataset: &Dataset) -> Result<f64> {
        let z = feature_map_apply(&self.feature_map(), dataset)?;
        let wrong = z
            .iter_rows()
            .zip(dataset.labels())
            .filter(|(row, &y)| sign(self.svm.decision_value(row)) != y)
            .count();
        Ok(wrong as f64 / dataset.n_samples() as f64)
    }

    /// The same model with the SVM hyperplane replaced by `(α, 0)`, which
    /// makes it vote exactly like the boosted ensemble.
    pub fn with_boosting_hyperplane(&self) -> HybridModel {
        HybridModel {
            svm: self.svm.with_hyperplane(self.adaboost.alphas().to_vec(), 0.0),
            ..self.clone()
        }
    }

    pub fn with_hyperplane(&self, beta: Vec<f64>, bias: f64) -> Result<HybridModel> {
        if beta.len() != self.adaboost.n_rounds() {
            return Err(Error::DimensionMismatch {
                expected: self.adaboost.n_rounds(),
                got: beta.len(),
            });
        }
        Ok(HybridModel {
            svm: self.svm.with_hyperplane(beta, bias),
            ..self.clone()
        })
    }
}

pub fn hybrid_predict(model: &HybridModel, x: &[f64]) -> Result<i8> {
    let expected = model.provenance.input_features;
    if x.len() != expected {
        return Err(Error::DimensionMismatch { expected, got: x.len() });
    }
    let z = model.feature_map().apply_row(x)?;
    model.svm.predict(&z)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HybridOptions {
    pub c: f64,
    pub mode: MarginMode,
    pub solver: SolverOptions,
}

impl HybridOptions {
    pub fn new(c: f64, tol: f64) -> Self {
        Self {
            c,
            mode: MarginMode::default(),
            solver: SolverOptions::with_tol(tol),
        }
    }
}

pub fn train_hybrid(dataset: &Dataset, rounds: usize, c: f64, tol: f64) -> Result<HybridModel> {
    train_hybrid_with(dataset, rounds, &HybridOptions::new(c, tol))
}

pub fn train_hybrid_with(
    dataset: &Dataset,
    rounds: usize,
    options: &HybridOptions,
) -> Result<HybridModel> {
    if rounds == 0 {
        return Err(Error::InvalidArgument("number of rounds must be positive".into()));
    }
    let mut booster = Booster::new(dataset)?;
    for _ in 0..rounds {
        booster.step()?;
    }
    hybrid_from_boosting(dataset, booster.into_model(), options)
}

/// Runs the SVM stage on top of an already trained ensemble.
pub fn hybrid_from_boosting(
    dataset: &Dataset,
    adaboost: AdaBoostModel,
    options: &HybridOptions,
) -> Result<HybridModel> {
    if !(options.c > 0.0) {
        return Err(Error::InvalidArgument(format!("C must be positive, got {}", options.c)));
    }
    let z = feature_map_apply(&FeatureMap::of(&adaboost)?, dataset)?;
    let y = dataset.labels();
    let gram = Gram::new(&z);
    let train_error = adaboost
        .rounds()
        .last()
        .map_or_else(|| adaboost.error_rate(dataset), |r| r.train_error);

    let hard_attempt = match options.mode {
        MarginMode::Soft => (HardAttempt::NotAttempted, None),
        MarginMode::HardThenSoft => attempt_hard(&z, &gram, y, &options.solver),
    };
    let (svm, hard_attempt) = match hard_attempt {
        (HardAttempt::Separable, Some(model)) => (model, HardAttempt::Separable),
        (attempt, _) => (svm::solve_with_gram(&z, &gram, y, options.c, &options.solver), attempt),
    };
    let hard_margin_used = svm.is_hard_margin();
    Ok(HybridModel {
        provenance: Provenance {
            rounds: adaboost.n_rounds(),
            c: options.c,
            input_features: dataset.n_features(),
            mode: options.mode,
            hard_attempt,
            hard_margin_used,
            converged: svm.converged(),
            adaboost_train_error: train_error,
        },
        adaboost,
        svm,
    })
}

fn attempt_hard(
    z: &Matrix,
    gram: &Gram,
    y: &[i8],
    options: &SolverOptions,
) -> (HardAttempt, Option<SvmModel>) {
    if has_conflicting_rows(z, y) {
        return (HardAttempt::ConflictingRows, None);
    }
    let model = svm::solve_with_gram(z, gram, y, HARD_MARGIN_C, options);
    if !model.converged() {
        return (HardAttempt::Unconverged, None);
    }
    match svm::hard_from_soft(model) {
        Ok(model) => (HardAttempt::Separable, Some(model)),
        Err(Error::NotSeparable { max_slack }) => (HardAttempt::NotSeparable { max_slack }, None),
        Err(_) => unreachable!("hard_from_soft only reports separability"),
    }
}

/// Identical rows with opposite labels force `ξ_i + ξ_j ≥ 2`, so no
/// hyperplane separates them.
fn has_conflicting_rows(z: &Matrix, y: &[i8]) -> bool {
    let mut seen: HashMap<Vec<u64>, i8> = HashMap::with_capacity(z.rows());
    for (row, &label) in z.iter_rows().zip(y) {
        let key: Vec<u64> = row.iter().map(|v| v.to_bits()).collect();
        match seen.get(&key) {
            Some(&other) if other != label => return true,
            Some(_) => {}
            None => {
                seen.insert(key, label);
            }
        }
    }
    false
}

/// One entry of [`margin_growth_study`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "kebab-case")]
pub enum GrowthPoint {
    Separable { rounds: usize, margin: f64 },
    NotSeparable { rounds: usize, max_slack: f64 },
    Unconverged { rounds: usize },
}

impl GrowthPoint {
    pub fn rounds(&self) -> usize {
        match *self {
            GrowthPoint::Separable { rounds, .. }
            | GrowthPoint::NotSeparable { rounds, .. }
            | GrowthPoint::Unconverged { rounds } => rounds,
        }
    }

    pub fn margin(&self) -> Option<f64> {
        match *self {
            GrowthPoint::Separable { margin, .. } => Some(margin),
            _ => None,
        }
    }
}

/// Hard-margin geometric margin on each nested prefix of one boosted stump
/// sequence trained to the largest requested length.
pub fn margin_growth_study(dataset: &Dataset, rounds: &[usize], tol: f64) -> Result<Vec<GrowthPoint>> {
    margin_growth_study_with(dataset, rounds, &SolverOptions::with_tol(tol))
}

pub fn margin_growth_study_with(
    dataset: &Dataset,
    rounds: &[usize],
    options: &SolverOptions,
) -> Result<Vec<GrowthPoint>> {
    if rounds.is_empty() || rounds[0] == 0 {
        return Err(Error::InvalidArgument("round list must be non-empty and positive".into()));
    }
    if rounds.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidArgument("round list must be ascending".into()));
    }
    let t_max = *rounds.last().unwrap();
    let model = crate::adaboost::train_adaboost(dataset, t_max)?;
    let full = feature_map_apply(&FeatureMap::of(&model)?, dataset)?;
    prefix_margins(&full, dataset.labels(), rounds, options)
}

/// Hard-margin solve on the first `t` columns of `z` for each `t` in `rounds`.
pub fn prefix_margins(
    z: &Matrix,
    y: &[i8],
    rounds: &[usize],
    options: &SolverOptions,
) -> Result<Vec<GrowthPoint>> {
    let mut out = Vec::with_capacity(rounds.len());
    for &t in rounds {
        if t == 0 || t > z.cols() {
            return Err(Error::InvalidArgument(format!("prefix length {t} out of range")));
        }
        let zt = z.prefix_cols(t);
        let point = match attempt_hard(&zt, &Gram::new(&zt), y, options) {
            (HardAttempt::Separable, Some(model)) => GrowthPoint::Separable {
                rounds: t,
                margin: model.geometric_margin()?,
            },
            (HardAttempt::ConflictingRows, _) => GrowthPoint::NotSeparable {
                rounds: t,
                max_slack: 1.0,
            },
            (HardAttempt::NotSeparable { max_slack }, _) => GrowthPoint::NotSeparable { rounds: t, max_slack },
            _ => GrowthPoint::Unconverged { rounds: t },
        };
        out.push(point);
    }
    Ok(out)
}

mod wire {
    use super::*;

    pub const VERSION: &str = "hybrid-v1";

    #[derive(Serialize, Deserialize)]
    pub struct HybridWire {
        pub version: String,
        pub adaboost: AdaBoostModel,
        pub svm: SvmModel,
        pub provenance: Provenance,
    }

    impl From<HybridModel> for HybridWire {
        fn from(m: HybridModel) -> Self {
            Self {
                version: VERSION.to_string(),
                adaboost: m.adaboost,
                svm: m.svm,
                provenance: m.provenance,
            }
        }
    }

    impl TryFrom<HybridWire> for HybridModel {
        type Error = Error;

        fn try_from(w: HybridWire) -> Result<Self> {
            if w.version != VERSION {
                return Err(Error::Format(format!("expected version {VERSION}, got {}", w.version)));
            }
            if w.svm.dim() != w.adaboost.n_rounds() {
                return Err(Error::DimensionMismatch {
                    expected: w.adaboost.n_rounds(),
                    got: w.svm.dim(),
                });
            }
            Ok(Self {
                adaboost: w.adaboost,
                svm: w.svm,
                provenance: w.provenance,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adaboost::train_adaboost;

    fn dataset(rows: &[[f64; 2]], y: &[i8]) -> Dataset {
        Dataset::new("t", Matrix::from_rows(rows).unwrap(), y.to_vec()).unwrap()
    }

    fn jittered_xor() -> Dataset {
        dataset(&[[0.0, 0.0], [1.0, 1.1], [0.1, 1.0], [1.1, 0.1]], &[-1, -1, 1, 1])
    }

    #[test]
    fn one_stump_column() {
        let stumps = [DecisionStump { feature: 0, threshold: 0.5, polarity: 1 }];
        let map = FeatureMap::new(&stumps).unwrap();
        let x = Matrix::from_rows(&[[0.0], [1.0]]).unwrap();
        assert_eq!(map.apply_matrix(&x).unwrap().as_slice(), &[-1.0, 1.0]);
        assert!(FeatureMap::new(&[]).is_err());
        let wide = [DecisionStump { feature: 3, threshold: 0.0, polarity: 1 }];
        assert!(FeatureMap::new(&wide).unwrap().apply_matrix(&x).is_err());
    }

    #[test]
    fn xor_map_is_separable() {
        let d = jittered_xor();
        let model = train_adaboost(&d, 5).unwrap();
        let z = feature_map_apply(&FeatureMap::of(&model).unwrap(), &d).unwrap();
        assert!(z.as_slice().iter().all(|&v| v == 1.0 || v == -1.0));
        assert!(svm::solve_hard_margin(&z, d.labels(), 1e-9).is_ok());
        let hybrid = train_hybrid(&d, 5, 1.0, 1e-6).unwrap();
        assert!(hybrid.provenance().hard_margin_used);
        assert_eq!(hybrid.error_rate(&d).unwrap(), 0.0);
    }

    #[test]
    fn separable_pair_matches_boosting() {
        let d = dataset(&[[-1.0, 0.0], [1.0, 0.0]], &[-1, 1]);
        let hybrid = train_hybrid(&d, 1, 1.0, 1e-6).unwrap();
        for i in 0..2 {
            assert_eq!(hybrid.predict(d.row(i)).unwrap(), hybrid.adaboost().predict(d.row(i)));
            assert_eq!(hybrid.predict(d.row(i)).unwrap(), d.labels()[i]);
        }
        assert!(hybrid.predict(&[0.0]).is_err());
    }

    #[test]
    fn boosting_hyperplane_reproduces_ensemble() {
        let d = dataset(
            &[[0.0, 3.0], [1.0, 2.0], [2.0, 2.5], [3.0, 0.0], [4.0, 1.0], [5.0, 4.0]],
            &[1, -1, 1, -1, 1, -1],
        );
        let hybrid = train_hybrid(&d, 4, 1.0, 1e-6).unwrap();
        let swapped = hybrid.with_boosting_hyperplane();
        for i in 0..d.n_samples() {
            assert_eq!(swapped.predict(d.row(i)).unwrap(), hybrid.adaboost().predict(d.row(i)));
        }
    }

    #[test]
    fn conflicting_rows_fall_back_to_soft() {
        let d = dataset(&[[0.0, 0.0], [0.0, 0.0], [1.0, 1.0]], &[-1, 1, 1]);
        let hybrid = train_hybrid(&d, 2, 1.0, 1e-6).unwrap();
        assert_eq!(hybrid.provenance().hard_attempt, HardAttempt::ConflictingRows);
        assert!(!hybrid.provenance().hard_margin_used);
        assert_eq!(hybrid.svm().c_value(), 1.0);
    }

    #[test]
    fn soft_mode_skips_hard_attempt() {
        let d = jittered_xor();
        let mut options = HybridOptions::new(0.5, 1e-6);
        options.mode = MarginMode::Soft;
        let hybrid = train_hybrid_with(&d, 5, &options).unwrap();
        assert_eq!(hybrid.provenance().hard_attempt, HardAttempt::NotAttempted);
        assert_eq!(hybrid.svm().c_value(), 0.5);
    }

    #[test]
    fn growth_study_on_xor() {
        let d = jittered_xor();
        let points = margin_growth_study(&d, &[1, 2, 3, 3, 4, 5], 1e-9).unwrap();
        assert_eq!(points.len(), 6);
        assert!(matches!(points[0], GrowthPoint::NotSeparable { .. }));
        assert_eq!(points[2].margin(), points[3].margin());
        let margins: Vec<f64> = points.iter().filter_map(GrowthPoint::margin).collect();
        assert!(!margins.is_empty());
        assert!(margins.windows(2).all(|w| w[1] >= w[0] - 1e-6));
        assert!(margin_growth_study(&d, &[3, 2], 1e-6).is_err());
        assert!(margin_growth_study(&d, &[], 1e-6).is_err());
    }

    #[test]
    fn json_roundtrip() {
        let d = jittered_xor();
        let hybrid = train_hybrid(&d, 3, 1.0, 1e-6).unwrap();
        let text = serde_json::to_string(&hybrid).unwrap();
        assert!(text.contains("\"version\":\"hybrid-v1\""));
        assert!(text.contains("adaboost-v1") && text.contains("svm-v1"));
        let back: HybridModel = serde_json::from_str(&text).unwrap();
        for i in 0..d.n_samples() {
            assert_eq!(back.predict(d.row(i)).unwrap(), hybrid.predict(d.row(i)).unwrap());
        }
        let bad = text.replace("hybrid-v1", "hybrid-v0");
        assert!(serde_json::from_str::<HybridModel>(&bad).is_err());
    }
}
