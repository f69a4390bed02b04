use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::error::{Error, Result};
use crate::rng::SplitRng;

/// Fold assignment for k-fold cross-validation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub k: usize,
    pub seed: u64,
    pub assignments: Vec<usize>,
}

impl FoldPlan {
    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        self.indices(|f| f == fold)
    }

    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        self.indices(|f| f != fold)
    }

    fn indices(&self, keep: impl Fn(usize) -> bool) -> Vec<usize> {
        self.assignments
            .iter()
            .enumerate()
            .filter(|&(_, &f)| keep(f))
            .map(|(i, _)| i)
            .collect()
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &f in &self.assignments {
            sizes[f] += 1;
        }
        sizes
    }
}

fn class_indices(labels: &[i8]) -> [Vec<usize>; 2] {
    let mut neg = Vec::new();
    let mut pos = Vec::new();
    for (i, &y) in labels.iter().enumerate() {
        if y > 0 {
            pos.push(i);
        } else {
            neg.push(i);
        }
    }
    [neg, pos]
}

/// Stratified k-fold plan. Each class (−1 first, then +1) is shuffled and dealt
/// round-robin over the folds; the +1 class starts where the −1 class stopped
/// so fold sizes also differ by at most one.
pub fn stratified_kfold(dataset: &Dataset, k: usize, seed: u64) -> Result<FoldPlan> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!("k must be at least 2, got {k}")));
    }
    let classes = class_indices(dataset.labels());
    for (members, label) in classes.iter().zip([-1i8, 1]) {
        if members.len() < k {
            return Err(Error::ClassTooSmall {
                label,
                count: members.len(),
                required: k,
            });
        }
    }

    let mut rng = SplitRng::new(seed);
    let mut assignments = vec![0usize; dataset.n_samples()];
    let mut offset = 0;
    for mut members in classes {
        rng.shuffle(&mut members);
        for (j, &i) in members.iter().enumerate() {
            assignments[i] = (offset + j) % k;
        }
        offset = (offset + members.len()) % k;
    }
    Ok(FoldPlan {
        k,
        seed,
        assignments,
    })
}

/// Per-class sampling without replacement: `round(fraction * class size)`
/// samples of each class (at least one) go to the training set.
pub fn fraction_split(dataset: &Dataset, fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "fraction must lie in (0, 1), got {fraction}"
        )));
    }
    let mut rng = SplitRng::new(seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (mut members, label) in class_indices(dataset.labels()).into_iter().zip([-1i8, 1]) {
        if members.is_empty() {
            return Err(Error::ClassTooSmall {
                label,
                count: 0,
                required: 1,
            });
        }
        rng.shuffle(&mut members);
        let take = ((fraction * members.len() as f64).round() as usize).clamp(1, members.len());
        train.extend_from_slice(&members[..take]);
        test.extend_from_slice(&members[take..]);
    }
    if test.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "fraction {fraction} leaves an empty test set"
        )));
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((dataset.subset(&train), dataset.subset(&test)))
}
