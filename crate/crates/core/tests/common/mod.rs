//! Reference implementations used as oracles by the integration tests. They
//! share no code with the library: AdaBoost enumerates every stump and sums
//! weights directly, and the dual QP is solved by enumerating active sets.
#![allow(dead_code)]

use std::path::PathBuf;

use boostsvm::data::Dataset;
use boostsvm::matrix::Matrix;
use nalgebra::{DMatrix, DVector};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct TestRng(ChaCha8Rng);

impl TestRng {
    pub fn new(seed: u64) -> Self {
        Self(ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn unit(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.unit()
    }

    pub fn below(&mut self, n: usize) -> usize {
        (self.0.next_u64() % n as u64) as usize
    }

    pub fn sign(&mut self) -> i8 {
        if self.0.next_u64() & 1 == 1 {
            1
        } else {
            -1
        }
    }
}

/// Random ±1 labels with both classes present.
pub fn mixed_labels(rng: &mut TestRng, n: usize) -> Vec<i8> {
    loop {
        let y: Vec<i8> = (0..n).map(|_| rng.sign()).collect();
        if y.contains(&1) && y.contains(&-1) {
            return y;
        }
    }
}

pub fn dataset(rows: &[Vec<f64>], labels: &[i8]) -> Dataset {
    Dataset::new("synthetic", Matrix::from_rows(rows).unwrap(), labels.to_vec()).unwrap()
}

pub fn data_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RefStump {
    pub feature: usize,
    pub threshold: f64,
    pub polarity: i8,
}

impl RefStump {
    pub fn predict(&self, x: &[f64]) -> i8 {
        if x[self.feature] > self.threshold {
            self.polarity
        } else {
            -self.polarity
        }
    }
}

/// Sentinel below the minimum, then midpoints of consecutive distinct values.
pub fn candidate_thresholds(column: &[f64]) -> Vec<f64> {
    let mut values = column.to_vec();
    values.sort_by(f64::total_cmp);
    values.dedup();
    let mut out = vec![values[0] - 1.0];
    out.extend(values.windows(2).map(|w| (w[0] + w[1]) / 2.0));
    out
}

/// Exhaustive search in (feature, threshold, polarity +1 then −1) order; a
/// later candidate wins only if it is better by more than 1e-12.
pub fn reference_best_stump(x: &[Vec<f64>], y: &[i8], w: &[f64]) -> (RefStump, f64) {
    let mut best: Option<(RefStump, f64)> = None;
    for feature in 0..x[0].len() {
        let column: Vec<f64> = x.iter().map(|r| r[feature]).collect();
        for threshold in candidate_thresholds(&column) {
            for polarity in [1i8, -1] {
                let stump = RefStump { feature, threshold, polarity };
                let err: f64 = (0..x.len())
                    .filter(|&i| stump.predict(&x[i]) != y[i])
                    .map(|i| w[i])
                    .sum();
                if best.is_none_or(|(_, e)| err < e - 1e-12) {
                    best = Some((stump, err));
                }
            }
        }
    }
    best.unwrap()
}

#[derive(Clone, Copy, Debug)]
pub struct RefRound {
    pub stump: RefStump,
    pub epsilon: f64,
    pub alpha: f64,
}

pub fn reference_adaboost(x: &[Vec<f64>], y: &[i8], rounds: usize) -> Vec<RefRound> {
    let n = x.len();
    let mut w = vec![1.0 / n as f64; n];
    let mut out = Vec::new();
    for _ in 0..rounds {
        let (stump, epsilon) = reference_best_stump(x, y, &w);
        let e = epsilon.clamp(1e-10, 0.5 - 1e-10);
        let alpha = 0.5 * ((1.0 - e) / e).ln();
        let masses: Vec<f64> = (0..n)
            .map(|i| w[i] * (-alpha * f64::from(y[i]) * f64::from(stump.predict(&x[i]))).exp())
            .collect();
        let z: f64 = masses.iter().sum();
        w = masses.iter().map(|m| m / z).collect();
        out.push(RefRound { stump, epsilon, alpha });
    }
    out
}

#[derive(Clone, Debug)]
pub struct RefDual {
    pub lambda: Vec<f64>,
    /// Minimum of `½ λᵀQλ − Σλ`.
    pub objective: f64,
}

impl RefDual {
    pub fn beta(&self, z: &[Vec<f64>], y: &[i8]) -> Vec<f64> {
        let mut beta = vec![0.0; z[0].len()];
        for i in 0..z.len() {
            for (b, v) in beta.iter_mut().zip(&z[i]) {
                *b += self.lambda[i] * f64::from(y[i]) * v;
            }
        }
        beta
    }
}

/// Soft-margin dual solved by enumerating which multipliers sit at 0, at C
/// or strictly between, solving the KKT system of each pattern and keeping
/// the best feasible point.
pub fn reference_dual(z: &[Vec<f64>], y: &[i8], c: f64) -> RefDual {
    let n = z.len();
    let yf: Vec<f64> = y.iter().map(|&v| f64::from(v)).collect();
    let q = DMatrix::from_fn(n, n, |i, j| {
        yf[i] * yf[j] * z[i].iter().zip(&z[j]).map(|(a, b)| a * b).sum::<f64>()
    });
    let objective = |l: &[f64]| {
        let v = DVector::from_column_slice(l);
        0.5 * v.dot(&(&q * &v)) - v.sum()
    };
    let slack = 1e-9 * c.max(1.0);

    let mut best: Option<RefDual> = None;
    for code in 0..3usize.pow(n as u32) {
        let mut status = Vec::with_capacity(n);
        let mut rest = code;
        for _ in 0..n {
            status.push(rest % 3);
            rest /= 3;
        }
        let free: Vec<usize> = (0..n).filter(|&i| status[i] == 2).collect();
        let mut lambda: Vec<f64> = status.iter().map(|&s| if s == 1 { c } else { 0.0 }).collect();

        if !free.is_empty() {
            let k = free.len();
            let mut a = DMatrix::zeros(k + 1, k + 1);
            let mut rhs = DVector::zeros(k + 1);
            for (r, &i) in free.iter().enumerate() {
                for (s, &j) in free.iter().enumerate() {
                    a[(r, s)] = q[(i, j)];
                }
                a[(r, k)] = yf[i];
                a[(k, r)] = yf[i];
                rhs[r] = 1.0 - (0..n).filter(|&j| status[j] != 2).map(|j| q[(i, j)] * lambda[j]).sum::<f64>();
            }
            rhs[k] = -(0..n).filter(|&j| status[j] != 2).map(|j| yf[j] * lambda[j]).sum::<f64>();
            let Ok(pinv) = a.clone().pseudo_inverse(1e-12) else {
                continue;
            };
            let sol = pinv * &rhs;
            if (&a * &sol - &rhs).norm() > 1e-8 {
                continue;
            }
            for (r, &i) in free.iter().enumerate() {
                lambda[i] = sol[r];
            }
        }
        if lambda.iter().any(|&l| l < -slack || l > c + slack) {
            continue;
        }
        lambda.iter_mut().for_each(|l| *l = l.clamp(0.0, c));
        if lambda.iter().zip(&yf).map(|(l, y)| l * y).sum::<f64>().abs() > slack {
            continue;
        }
        let value = objective(&lambda);
        if best.as_ref().is_none_or(|b| value < b.objective) {
            best = Some(RefDual { lambda, objective: value });
        }
    }
    best.expect("λ = 0 is always feasible")
}

pub fn to_rows(m: &Matrix) -> Vec<Vec<f64>> {
    m.iter_rows().map(<[f64]>::to_vec).collect()
}
