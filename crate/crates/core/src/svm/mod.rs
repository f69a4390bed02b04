//! Linear soft- and hard-margin SVM with an explicit bias,
//!
//! ```text
//! min_{β,b,ξ} ½‖β‖² + C Σ ξ_i   s.t.  y_i(β·z_i + b) ≥ 1 − ξ_i,  ξ_i ≥ 0,
//! ```
//!
//! solved in the dual. The hard margin is the same solve with
//! [`HARD_MARGIN_C`] followed by a slack check.

mod gram;
mod kkt;
mod smo;

use serde::{Deserialize, Serialize};

use crate::adaboost::sign;
use crate::error::{Error, Result};
use crate::matrix::{dot, Matrix};

pub use self::gram::Gram;
pub use self::kkt::{kkt_report, KktReport};

pub const DEFAULT_C: f64 = 1.0;
pub const DEFAULT_TOL: f64 = 1e-6;
pub const MAX_ITERATIONS: usize = 10_000_000;
/// Penalty standing in for C = ∞.
pub const HARD_MARGIN_C: f64 = 1e6;
/// Largest slack still counted as separable.
pub const SEPARABLE_SLACK: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverReport {
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub max_kkt_violation: f64,
    pub iterations: usize,
}

impl SolverReport {
    pub fn duality_gap(&self) -> f64 {
        self.primal_objective - self.dual_objective
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "wire::SvmWire", into = "wire::SvmWire")]
pub struct SvmModel {
    beta: Vec<f64>,
    bias: f64,
    /// `f64::INFINITY` marks a hard-margin model.
    c_value: f64,
    slacks: Vec<f64>,
    dual_vars: Vec<f64>,
    converged: bool,
    report: SolverReport,
}

impl SvmModel {
    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    pub fn c_value(&self) -> f64 {
        self.c_value
    }

    pub fn is_hard_margin(&self) -> bool {
        self.c_value.is_infinite()
    }

    /// Per-sample slacks of the training run (empty for deserialized models).
    pub fn slacks(&self) -> &[f64] {
        &self.slacks
    }

    /// Dual multipliers of the training run (empty for deserialized models).
    pub fn dual_vars(&self) -> &[f64] {
        &self.dual_vars
    }

    pub fn converged(&self) -> bool {
        self.converged
    }

    pub fn report(&self) -> &SolverReport {
        &self.report
    }

    pub fn dim(&self) -> usize {
        self.beta.len()
    }

    /// Same model with the hyperplane replaced; dual variables are kept.
    pub fn with_hyperplane(&self, beta: Vec<f64>, bias: f64) -> SvmModel {
        SvmModel {
            beta,
            bias,
            ..self.clone()
        }
    }

    /// A bare hyperplane with no training diagnostics.
    pub fn from_hyperplane(beta: Vec<f64>, bias: f64) -> SvmModel {
        SvmModel {
            beta,
            bias,
            c_value: f64::INFINITY,
            slacks: Vec::new(),
            dual_vars: Vec::new(),
            converged: true,
            report: SolverReport {
                primal_objective: f64::NAN,
                dual_objective: f64::NAN,
                max_kkt_violation: f64::NAN,
                iterations: 0,
            },
        }
    }

    #[inline]
    pub fn decision_value(&self, z: &[f64]) -> f64 {
        dot(&self.beta, z) + self.bias
    }

    pub fn predict(&self, z: &[f64]) -> Result<i8> {
        if z.len() != self.beta.len() {
            return Err(Error::DimensionMismatch {
                expected: self.beta.len(),
                got: z.len(),
            });
        }
        Ok(sign(self.decision_value(z)))
    }

    pub fn geometric_margin(&self) -> Result<f64> {
        let norm = dot(&self.beta, &self.beta).sqrt();
        if norm == 0.0 {
            Err(Error::ZeroWeightVector)
        } else {
            Ok(1.0 / norm)
        }
    }
}

pub fn svm_predict(model: &SvmModel, z: &[f64]) -> Result<i8> {
    model.predict(z)
}

/// `1/‖β‖₂`.
pub fn geometric_margin(model: &SvmModel) -> Result<f64> {
    model.geometric_margin()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iterations: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            max_iterations: MAX_ITERATIONS,
        }
    }
}

impl SolverOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }
}

fn validate(z: &Matrix, y: &[i8], c: f64, tol: f64) -> Result<()> {
    if z.rows() == 0 {
        return Err(Error::EmptyDataset);
    }
    if y.len() != z.rows() {
        return Err(Error::DimensionMismatch {
            expected: z.rows(),
            got: y.len(),
        });
    }
    if y.iter().any(|&v| v != 1 && v != -1) {
        return Err(Error::InvalidArgument("labels must be ±1".into()));
    }
    if !(y.contains(&1) && y.contains(&-1)) {
        return Err(Error::LabelClasses { found: 1 });
    }
    if !(c > 0.0) {
        return Err(Error::InvalidArgument(format!("C must be positive, got {c}")));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tol must be positive, got {tol}")));
    }
    if z.as_slice().iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("non-finite feature value".into()));
    }
    Ok(())
}

/// Soft-margin solve with the default iteration cap. A run that hits the cap
/// is returned with `converged() == false`.
pub fn solve_soft_margin(z: &Matrix, y: &[i8], c: f64, tol: f64) -> Result<SvmModel> {
    solve_soft_margin_with(z, y, c, &SolverOptions::with_tol(tol))
}

pub fn solve_soft_margin_with(
    z: &Matrix,
    y: &[i8],
    c: f64,
    options: &SolverOptions,
) -> Result<SvmModel> {
    validate(z, y, c, options.tol)?;
    let gram = Gram::new(z);
    Ok(solve_with_gram(z, &gram, y, c, options))
}

/// Solve against a precomputed Gram matrix of `z`.
pub fn solve_with_gram(
    z: &Matrix,
    gram: &Gram,
    y: &[i8],
    c: f64,
    options: &SolverOptions,
) -> SvmModel {
    let sol = smo::Smo::new(gram, y, c).solve(options.tol, options.max_iterations);
    let yf: Vec<f64> = y.iter().map(|&v| f64::from(v)).collect();

    let mut beta = vec![0.0; z.cols()];
    for (i, &l) in sol.lambda.iter().enumerate() {
        if l != 0.0 {
            let w = l * yf[i];
            for (b, &v) in beta.iter_mut().zip(z.row(i)) {
                *b += w * v;
            }
        }
    }
    let bias = recover_bias(&sol.lambda, &sol.gradient, &yf, c);

    let slacks: Vec<f64> = (0..z.rows())
        .map(|i| (1.0 - yf[i] * (dot(&beta, z.row(i)) + bias)).max(0.0))
        .collect();
    let half_norm = 0.5 * dot(&beta, &beta);
    let lambda_sum: f64 = sol.lambda.iter().sum();
    let report = SolverReport {
        primal_objective: half_norm + c * slacks.iter().sum::<f64>(),
        dual_objective: lambda_sum - half_norm,
        max_kkt_violation: sol.violation,
        iterations: sol.iterations,
    };
    SvmModel {
        beta,
        bias,
        c_value: c,
        slacks,
        dual_vars: sol.lambda,
        converged: sol.converged,
        report,
    }
}

/// Average of `−y_i G_i` over free multipliers, else the midpoint of the
/// interval of biases consistent with the bounded ones.
fn recover_bias(lambda: &[f64], gradient: &[f64], y: &[f64], c: f64) -> f64 {
    let mut free_sum = 0.0;
    let mut free_count = 0usize;
    let mut lower = f64::NEG_INFINITY;
    let mut upper = f64::INFINITY;
    for ((&l, &g), &yi) in lambda.iter().zip(gradient).zip(y) {
        let r = -yi * g;
        if l > 0.0 && l < c {
            free_sum += r;
            free_count += 1;
        } else if (l == 0.0) == (yi > 0.0) {
            lower = lower.max(r);
        } else {
            upper = upper.min(r);
        }
    }
    if free_count > 0 {
        free_sum / free_count as f64
    } else {
        match (lower.is_finite(), upper.is_finite()) {
            (true, true) => 0.5 * (lower + upper),
            (true, false) => lower,
            (false, true) => upper,
            (false, false) => 0.0,
        }
    }
}

/// Hard-margin solve: the soft solve with [`HARD_MARGIN_C`], accepted when
/// every slack is at most [`SEPARABLE_SLACK`].
pub fn solve_hard_margin(z: &Matrix, y: &[i8], tol: f64) -> Result<SvmModel> {
    solve_hard_margin_with(z, y, &SolverOptions::with_tol(tol))
}

pub fn solve_hard_margin_with(z: &Matrix, y: &[i8], options: &SolverOptions) -> Result<SvmModel> {
    validate(z, y, HARD_MARGIN_C, options.tol)?;
    let gram = Gram::new(z);
    hard_from_soft(solve_with_gram(z, &gram, y, HARD_MARGIN_C, options))
}

pub(crate) fn hard_from_soft(mut model: SvmModel) -> Result<SvmModel> {
    let max_slack = model.slacks.iter().copied().fold(0.0, f64::max);
    if max_slack > SEPARABLE_SLACK {
        return Err(Error::NotSeparable { max_slack });
    }
    model.c_value = f64::INFINITY;
    model.slacks.iter_mut().for_each(|s| *s = 0.0);
    model.report.primal_objective = 0.5 * dot(&model.beta, &model.beta);
    Ok(model)
}

mod wire {
    use super::*;

    pub const VERSION: &str = "svm-v1";

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    pub enum CValue {
        Finite(f64),
        Named(String),
    }

    #[derive(Serialize, Deserialize)]
    pub struct SvmWire {
        pub version: String,
        pub beta: Vec<f64>,
        pub bias: f64,
        /// A number, or `"inf"` for a hard-margin model.
        pub c_value: CValue,
        pub converged: bool,
        pub report: SolverReport,
    }

    impl From<SvmModel> for SvmWire {
        fn from(m: SvmModel) -> Self {
            let c_value = if m.c_value.is_finite() {
                CValue::Finite(m.c_value)
            } else {
                CValue::Named("inf".into())
            };
            let mut report = m.report;
            // JSON has no NaN; bare hyperplanes carry no objectives.
            for v in [&mut report.primal_objective, &mut report.dual_objective, &mut report.max_kkt_violation] {
                if !v.is_finite() {
                    *v = 0.0;
                }
            }
            SvmWire {
                version: VERSION.into(),
                beta: m.beta,
                bias: m.bias,
                c_value,
                converged: m.converged,
                report,
            }
        }
    }

    impl TryFrom<SvmWire> for SvmModel {
        type Error = Error;

        fn try_from(w: SvmWire) -> Result<Self> {
            if w.version != VERSION {
                return Err(Error::Format(format!(
                    "expected version {VERSION:?}, found {:?}",
                    w.version
                )));
            }
            let c_value = match w.c_value {
                CValue::Finite(c) if c > 0.0 => c,
                CValue::Named(s) if s == "inf" => f64::INFINITY,
                _ => return Err(Error::Format("c_value must be positive or \"inf\"".into())),
            };
            Ok(SvmModel {
                beta: w.beta,
                bias: w.bias,
                c_value,
                slacks: Vec::new(),
                dual_vars: Vec::new(),
                converged: w.converged,
                report: w.report,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[f64]]) -> Matrix {
        Matrix::from_rows(rows).unwrap()
    }

    #[test]
    fn symmetric_pair() {
        let z = m(&[&[1.0], &[-1.0]]);
        let model = solve_soft_margin(&z, &[1, -1], 10.0, 1e-6).unwrap();
        assert!(model.converged());
        assert!((model.beta()[0] - 1.0).abs() < 1e-9);
        assert!(model.bias().abs() < 1e-9);
        assert!((model.geometric_margin().unwrap() - 1.0).abs() < 1e-9);
        assert!(model.dual_vars().iter().all(|&l| l > 0.0));

        let hard = solve_hard_margin(&z, &[1, -1], 1e-6).unwrap();
        assert!((hard.beta()[0] - 1.0).abs() < 1e-9);
        assert!(hard.bias().abs() < 1e-9);
        assert!(hard.is_hard_margin());
    }

    #[test]
    fn contradictory_pair() {
        let z = m(&[&[1.0], &[1.0]]);
        let model = solve_soft_margin(&z, &[1, -1], 1.0, 1e-6).unwrap();
        assert!(model.beta()[0].abs() < 1e-12);
        assert!(model.bias().abs() < 1e-12);
        assert_eq!(model.slacks(), &[1.0, 1.0]);
        assert!((model.report().primal_objective - 2.0).abs() < 1e-12);
        assert!(matches!(
            solve_hard_margin(&z, &[1, -1], 1e-6),
            Err(Error::NotSeparable { .. })
        ));
    }

    #[test]
    fn input_validation() {
        let z = m(&[&[1.0], &[-1.0]]);
        assert!(matches!(solve_soft_margin(&z, &[1, 1], 1.0, 1e-6), Err(Error::LabelClasses { .. })));
        assert!(solve_soft_margin(&z, &[1, -1], 0.0, 1e-6).is_err());
        assert!(solve_soft_margin(&z, &[1, -1], 1.0, 0.0).is_err());
        assert!(solve_soft_margin(&z, &[1], 1.0, 1e-6).is_err());
    }

    #[test]
    fn iteration_cap_flags_non_convergence() {
        let z = m(&[&[0.0, 1.0], &[1.0, 0.3], &[0.2, -1.0], &[-1.0, 0.1], &[0.5, 0.5]]);
        let y = [1, 1, -1, -1, -1];
        let opts = SolverOptions { tol: 1e-12, max_iterations: 1 };
        let model = solve_soft_margin_with(&z, &y, 5.0, &opts).unwrap();
        assert!(!model.converged());
        assert_eq!(model.report().iterations, 1);
    }

    #[test]
    fn margin_and_predict() {
        let model = SvmModel::from_hyperplane(vec![3.0, 4.0], 0.0);
        assert!((geometric_margin(&model).unwrap() - 0.2).abs() < 1e-15);
        assert!(matches!(
            geometric_margin(&SvmModel::from_hyperplane(vec![0.0], 1.0)),
            Err(Error::ZeroWeightVector)
        ));

        let p = |b: f64| svm_predict(&SvmModel::from_hyperplane(vec![1.0], b), &[1.0]).unwrap();
        assert_eq!(p(0.0), 1);
        assert_eq!(p(-2.0), -1);
        assert_eq!(p(-1.0), 1);
        assert!(svm_predict(&model, &[1.0]).is_err());
    }

    #[test]
    fn json_roundtrip() {
        let z = m(&[&[1.0], &[-1.0]]);
        let hard = solve_hard_margin(&z, &[1, -1], 1e-6).unwrap();
        let s = serde_json::to_string(&hard).unwrap();
        assert!(s.contains("\"version\":\"svm-v1\""));
        assert!(s.contains("\"c_value\":\"inf\""));
        let back: SvmModel = serde_json::from_str(&s).unwrap();
        assert_eq!(back.beta(), hard.beta());
        assert!(back.is_hard_margin());
        assert_eq!(back.report(), hard.report());

        let soft = solve_soft_margin(&z, &[1, -1], 2.5, 1e-6).unwrap();
        let s = serde_json::to_string(&soft).unwrap();
        assert!(s.contains("\"c_value\":2.5"));
        let back: SvmModel = serde_json::from_str(&s).unwrap();
        assert_eq!(back.c_value(), 2.5);
        assert!(serde_json::from_str::<SvmModel>(&s.replace("svm-v1", "svm-v2")).is_err());
    }
}
