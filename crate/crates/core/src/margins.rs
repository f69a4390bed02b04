//! Normalized ensemble margins and the exponential margin bounds of boosting.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::adaboost::AdaBoostModel;
use crate::data::Dataset;
use crate::error::{Error, Result};

/// θ grid {0, 0.05, …, 0.95}.
pub fn default_theta_grid() -> Vec<f64> {
    (0..20).map(|k| k as f64 * 0.05).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CdfPoint {
    pub theta: f64,
    /// Fraction of samples with margin ≤ θ.
    pub fraction: f64,
    /// Boosting bound on that fraction, when every round's error lies in (0, ½).
    pub bound: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarginReport {
    /// `y_i f(x_i) / Σ α_t` per sample, in [−1, 1].
    pub margins: Vec<f64>,
    pub min_margin: f64,
    pub cdf: Vec<CdfPoint>,
}

impl MarginReport {
    pub fn cdf_at(&self, theta: f64) -> f64 {
        margin_cdf(self, theta)
    }

    /// Two columns: sample index and margin.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("sample\tmargin\n");
        for (i, m) in self.margins.iter().enumerate() {
            writeln!(out, "{i}\t{m}").unwrap();
        }
        out
    }
}

pub fn normalized_margins(model: &AdaBoostModel, dataset: &Dataset) -> Result<MarginReport> {
    normalized_margins_on_grid(model, dataset, &default_theta_grid())
}

pub fn normalized_margins_on_grid(
    model: &AdaBoostModel,
    dataset: &Dataset,
    grid: &[f64],
) -> Result<MarginReport> {
    let total: f64 = model.alphas().iter().map(|a| a.abs()).sum();
    if !(total > 0.0) {
        return Err(Error::InvalidArgument("total vote weight is zero".into()));
    }
    let margins: Vec<f64> = (0..dataset.n_samples())
        .map(|i| {
            let y = f64::from(dataset.labels()[i]);
            (y * model.score(dataset.row(i)) / total).clamp(-1.0, 1.0)
        })
        .collect();
    let min_margin = margins.iter().copied().fold(f64::INFINITY, f64::min);

    let epsilons: Vec<f64> = model.rounds().iter().map(|r| r.epsilon).collect();
    let mut report = MarginReport {
        margins,
        min_margin,
        cdf: Vec::with_capacity(grid.len()),
    };
    for &theta in grid {
        let bound = if model.rounds().len() == model.n_rounds() {
            schapire_bound(&epsilons, theta).ok()
        } else {
            None
        };
        report.cdf.push(CdfPoint {
            theta,
            fraction: margin_cdf(&report, theta),
            bound,
        });
    }
    Ok(report)
}

/// Empirical `P_S[y f(x) ≤ θ]`.
pub fn margin_cdf(report: &MarginReport, theta: f64) -> f64 {
    let below = report.margins.iter().filter(|&&m| m <= theta).count();
    below as f64 / report.margins.len() as f64
}

/// `2^T ∏ sqrt(ε_t^{1−θ} (1−ε_t)^{1+θ})`, evaluated in log space.
pub fn schapire_bound(epsilons: &[f64], theta: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&theta) {
        return Err(Error::InvalidArgument(format!("theta {theta} outside [0, 1)")));
    }
    let mut log = 0.0;
    for &e in epsilons {
        if !(e > 0.0 && e < 0.5) {
            return Err(Error::InvalidArgument(format!("epsilon {e} outside (0, 0.5)")));
        }
        log += std::f64::consts::LN_2 + 0.5 * ((1.0 - theta) * e.ln() + (1.0 + theta) * (1.0 - e).ln());
    }
    Ok(log.exp())
}

/// `(sqrt((1−2γ)^{1−θ} (1+2γ)^{1+θ}))^T`, evaluated in log space.
pub fn simplified_bound(gamma: f64, theta: f64, rounds: usize) -> Result<f64> {
    if !(gamma > 0.0 && gamma <= 0.5) {
        return Err(Error::InvalidArgument(format!("gamma {gamma} outside (0, 0.5]")));
    }
    if !(theta >= 0.0 && theta.is_finite()) {
        return Err(Error::InvalidArgument(format!("theta {theta} must be ≥ 0")));
    }
    if rounds == 0 {
        return Ok(1.0);
    }
    let low = 1.0 - 2.0 * gamma;
    let log_low_term = if low == 0.0 {
        // 0^{1−θ}: zero for θ < 1, one for θ = 1, unbounded beyond.
        if theta < 1.0 {
            f64::NEG_INFINITY
        } else if theta == 1.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        (1.0 - theta) * low.ln()
    };
    let log_base = 0.5 * (log_low_term + (1.0 + theta) * (1.0 + 2.0 * gamma).ln());
    Ok((rounds as f64 * log_base).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adaboost::{DecisionStump, RoundLog};
    use crate::matrix::Matrix;

    fn line(xs: &[f64], ys: &[i8]) -> Dataset {
        let rows: Vec<[f64; 1]> = xs.iter().map(|&x| [x]).collect();
        Dataset::new("t", Matrix::from_rows(&rows).unwrap(), ys.to_vec()).unwrap()
    }

    const UP: DecisionStump = DecisionStump { feature: 0, threshold: 0.5, polarity: 1 };
    const DOWN: DecisionStump = DecisionStump { feature: 0, threshold: 0.5, polarity: -1 };

    #[test]
    fn single_stump_margins() {
        let m = AdaBoostModel::from_parts(vec![UP], vec![0.7], vec![]).unwrap();
        let r = normalized_margins(&m, &line(&[0.0, 1.0], &[-1, 1])).unwrap();
        assert_eq!(r.margins, vec![1.0, 1.0]);
        let r = normalized_margins(&m, &line(&[0.0, 1.0, 2.0], &[-1, 1, -1])).unwrap();
        assert_eq!(r.margins, vec![1.0, 1.0, -1.0]);
        assert_eq!(r.min_margin, -1.0);
    }

    #[test]
    fn cancelling_stumps() {
        let agree = AdaBoostModel::from_parts(vec![UP, UP], vec![0.4, 0.4], vec![]).unwrap();
        let r = normalized_margins(&agree, &line(&[1.0], &[1])).unwrap();
        assert_eq!(r.margins, vec![1.0]);
        let disagree = AdaBoostModel::from_parts(vec![UP, DOWN], vec![0.4, 0.4], vec![]).unwrap();
        let r = normalized_margins(&disagree, &line(&[1.0], &[1])).unwrap();
        assert_eq!(r.margins, vec![0.0]);
    }

    #[test]
    fn zero_alpha_rejected() {
        let m = AdaBoostModel::from_parts(vec![UP], vec![0.0], vec![]).unwrap();
        assert!(normalized_margins(&m, &line(&[1.0], &[1])).is_err());
    }

    #[test]
    fn cdf_examples() {
        let report = MarginReport {
            margins: vec![-0.5, -0.2, 0.3, 0.9, 1.0],
            min_margin: -0.5,
            cdf: vec![],
        };
        assert_eq!(margin_cdf(&report, 1.0), 1.0);
        assert_eq!(margin_cdf(&report, -1.5), 0.0);
        // Two of five wrong, none exactly zero.
        assert_eq!(margin_cdf(&report, 0.0), 0.4);
        assert_eq!(margin_cdf(&report, 0.3), 0.6);
    }

    #[test]
    fn schapire_values() {
        assert!((schapire_bound(&[0.25], 0.0).unwrap() - 0.866_025_403_784_438_6).abs() < 1e-12);
        assert!((schapire_bound(&[0.5 - 1e-12], 0.0).unwrap() - 1.0).abs() < 1e-9);
        assert_eq!(schapire_bound(&[], 0.3).unwrap(), 1.0);
        assert!(schapire_bound(&[0.0], 0.0).is_err());
        assert!(schapire_bound(&[0.5], 0.0).is_err());
        assert!(schapire_bound(&[0.2], 1.0).is_err());
        // Long products stay representable.
        let tiny = schapire_bound(&vec![0.01; 2000], 0.1).unwrap();
        assert!(tiny >= 0.0 && tiny < 1e-100);
    }

    #[test]
    fn simplified_values() {
        let v = simplified_bound(0.2, 0.1, 1).unwrap();
        assert!((v - 0.956_177_416_961_801_6).abs() < 1e-12);
        assert!(v < 1.0);
        let at_gamma = simplified_bound(0.25, 0.25, 1).unwrap();
        let below = simplified_bound(0.25, 0.2499, 1).unwrap();
        assert!(at_gamma >= below);
        assert_eq!(simplified_bound(0.3, 0.2, 0).unwrap(), 1.0);
        assert_eq!(simplified_bound(0.5, 0.2, 3).unwrap(), 0.0);
        assert!(simplified_bound(0.0, 0.1, 1).is_err());
        assert!(simplified_bound(0.6, 0.1, 1).is_err());
        assert!(simplified_bound(0.2, -0.1, 1).is_err());
    }

    #[test]
    fn report_carries_bound_curve() {
        let log = RoundLog { epsilon: 0.2, gamma: 0.3, z: 0.8, train_error: 0.0 };
        let m = AdaBoostModel::from_parts(vec![UP], vec![0.69], vec![log]).unwrap();
        let r = normalized_margins(&m, &line(&[0.0, 1.0], &[-1, 1])).unwrap();
        assert_eq!(r.cdf.len(), 20);
        assert!(r.cdf.iter().all(|p| p.bound.is_some()));
        assert!(r.cdf.windows(2).all(|w| w[0].fraction <= w[1].fraction));
        let tsv = r.to_tsv();
        assert!(tsv.starts_with("sample\tmargin\n0\t1\n"));
        let json = serde_json::to_string(&r).unwrap();
        assert!(json.contains("\"min_margin\":1.0"));
    }
}
