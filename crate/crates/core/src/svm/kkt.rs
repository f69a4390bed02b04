use serde::{Deserialize, Serialize};

use super::SvmModel;
use crate::error::{Error, Result};
use crate::matrix::{dot, Matrix};

/// Optimality certificate recomputed from the model, the data and the stored
/// dual variables.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KktReport {
    /// `½‖β‖² + C Σξ` (hard margin: `½‖β‖²`).
    pub primal_objective: f64,
    /// `Σλ − ½‖Σ λ_i y_i z_i‖²`.
    pub dual_objective: f64,
    pub duality_gap: f64,
    /// Complementary-slackness violation per sample.
    pub point_violations: Vec<f64>,
    /// `|Σ λ_i y_i|`.
    pub equality_residual: f64,
    /// `‖β − Σ λ_i y_i z_i‖_∞`.
    pub stationarity_residual: f64,
    /// Largest distance of a multiplier outside `[0, C]`.
    pub box_violation: f64,
    pub max_slack: f64,
    /// Largest of all the violations above.
    pub max_violation: f64,
}

pub fn kkt_report(model: &SvmModel, z: &Matrix, y: &[i8]) -> Result<KktReport> {
    let n = z.rows();
    if y.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: y.len() });
    }
    if model.dual_vars.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: model.dual_vars.len(),
        });
    }
    if z.cols() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            got: z.cols(),
        });
    }
    let c = model.c_value;
    let lambda = &model.dual_vars;

    let mut beta_dual = vec![0.0; z.cols()];
    let mut equality = 0.0;
    let mut box_violation: f64 = 0.0;
    for i in 0..n {
        let (l, yi) = (lambda[i], f64::from(y[i]));
        equality += l * yi;
        box_violation = box_violation.max(-l).max(l - c);
        for (b, &v) in beta_dual.iter_mut().zip(z.row(i)) {
            *b += l * yi * v;
        }
    }
    let stationarity = model
        .beta
        .iter()
        .zip(&beta_dual)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);

    let mut point_violations = Vec::with_capacity(n);
    let mut slack_sum = 0.0;
    let mut max_slack: f64 = 0.0;
    for i in 0..n {
        let m = f64::from(y[i]) * model.decision_value(z.row(i));
        let slack = (1.0 - m).max(0.0);
        slack_sum += slack;
        max_slack = max_slack.max(slack);
        let l = lambda[i];
        let v = if l <= 0.0 {
            (1.0 - m).max(0.0)
        } else if l >= c {
            (m - 1.0).max(0.0)
        } else {
            (m - 1.0).abs()
        };
        point_violations.push(v);
    }

    let half_norm = 0.5 * dot(&model.beta, &model.beta);
    let primal_objective = if c.is_finite() {
        half_norm + c * slack_sum
    } else {
        half_norm
    };
    let dual_objective = lambda.iter().sum::<f64>() - 0.5 * dot(&beta_dual, &beta_dual);
    let max_violation = point_violations
        .iter()
        .copied()
        .fold(0.0, f64::max)
        .max(equality.abs())
        .max(stationarity)
        .max(box_violation);

    Ok(KktReport {
        primal_objective,
        dual_objective,
        duality_gap: primal_objective - dual_objective,
        point_violations,
        equality_residual: equality.abs(),
        stationarity_residual: stationarity,
        box_violation,
        max_slack,
        max_violation,
    })
}
