//! Cross-validation, confusion matrices, and the feature-ablation harness.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{
    knn_fit, knn_predict, mlp_predict, mlp_train, FeatureMask, LabeledDataset, MlpTrainConfig,
};
use crate::scalar::Real;

/// Binary confusion counts. "Positive" is the intentional class; a false
/// positive (unintentional touch classified intentional) is the
/// safety-critical direction.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: usize,
    pub tn: usize,
    pub fp: usize,
    pub fn_: usize,
}

impl ConfusionMatrix {
    pub fn record(&mut self, truth: bool, predicted: bool) {
        match (truth, predicted) {
            (true, true) => self.tp += 1,
            (false, false) => self.tn += 1,
            (false, true) => self.fp += 1,
            (true, false) => self.fn_ += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.tp + self.tn + self.fp + self.fn_
    }

    pub fn accuracy(&self) -> f64 {
        if self.total() == 0 {
            0.0
        } else {
            (self.tp + self.tn) as f64 / self.total() as f64
        }
    }

    pub fn merge(&mut self, other: &ConfusionMatrix) {
        self.tp += other.tp;
        self.tn += other.tn;
        self.fp += other.fp;
        self.fn_ += other.fn_;
    }

    /// Row in the report layout: accuracy then TP, TN, FP, FN.
    pub fn format_row(&self) -> String {
        format!(
            "{:.4}  TP={} TN={} FP={} FN={}",
            self.accuracy(),
            self.tp,
            self.tn,
            self.fp,
            self.fn_
        )
    }
}

/// Which classifier a cross-validation run trains per fold.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub enum ModelSpec {
    Knn { k: usize },
    Mlp { epochs: usize, learning_rate: f64 },
}

impl ModelSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ModelSpec::Knn { .. } => "knn",
            ModelSpec::Mlp { .. } => "mlp",
        }
    }
}

impl std::fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ModelSpec::Knn { k } => write!(f, "knn(k={k})"),
            ModelSpec::Mlp { epochs, .. } => write!(f, "mlp(epochs={epochs})"),
        }
    }
}

/// Result of one cross-validation run.
#[derive(Debug, Clone)]
pub struct CrossValidation {
    /// Mean of per-fold accuracies.
    pub mean_accuracy: f64,
    /// Confusion counts pooled over all held-out folds.
    pub pooled: ConfusionMatrix,
    pub fold_accuracies: Vec<f64>,
}

fn shuffled_indices(n: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut indices: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.gen_range(0..=i);
        indices.swap(i, j);
    }
    indices
}

fn fold_ranges(n: usize, folds: usize) -> Vec<(usize, usize)> {
    // Spread the remainder over the first folds so sizes differ by at
    // most one.
    let base = n / folds;
    let extra = n % folds;
    let mut out = Vec::with_capacity(folds);
    let mut start = 0;
    for fold in 0..folds {
        let len = base + usize::from(fold < extra);
        out.push((start, start + len));
        start += len;
    }
    out
}

fn train_split_has_both_classes<T: Real>(
    data: &LabeledDataset<T>,
    indices: &[usize],
    test_range: (usize, usize),
) -> bool {
    let mut pos = false;
    let mut neg = false;
    for (i, &row) in indices.iter().enumerate() {
        if i >= test_range.0 && i < test_range.1 {
            continue;
        }
        if data.rows[row].1 {
            pos = true;
        } else {
            neg = true;
        }
        if pos && neg {
            return true;
        }
    }
    false
}

/// K-fold cross-validation with frame randomization.
///
/// Rows are shuffled by `seed` and partitioned into `folds` contiguous
/// blocks; each block is held out once. If some training split misses a
/// class the shuffle is resampled once (seed + 1) before giving up.
pub fn cross_validate<T: Real>(
    data: &LabeledDataset<T>,
    mask: &FeatureMask,
    spec: &ModelSpec,
    folds: usize,
    seed: u64,
) -> Result<CrossValidation> {
    if folds < 2 {
        return Err(Error::FoldConstruction("need at least 2 folds".into()));
    }
    if data.len() < folds {
        return Err(Error::FoldConstruction(format!(
            "{} rows cannot fill {folds} folds",
            data.len()
        )));
    }
    if !data.has_both_classes() {
        return Err(Error::FoldConstruction(
            "dataset must contain both classes".into(),
        ));
    }

    let ranges = fold_ranges(data.len(), folds);
    let mut indices = shuffled_indices(data.len(), seed);
    let degenerate = ranges
        .iter()
        .any(|&r| !train_split_has_both_classes(data, &indices, r));
    if degenerate {
        indices = shuffled_indices(data.len(), seed.wrapping_add(1));
        if ranges
            .iter()
            .any(|&r| !train_split_has_both_classes(data, &indices, r))
        {
            return Err(Error::FoldConstruction(
                "a training split misses a class even after resampling".into(),
            ));
        }
    }

    let mut pooled = ConfusionMatrix::default();
    let mut fold_accuracies = Vec::with_capacity(folds);
    for &(start, end) in &ranges {
        let train_rows: Vec<_> = indices[..start]
            .iter()
            .chain(&indices[end..])
            .map(|&i| data.rows[i])
            .collect();
        let train = LabeledDataset::new(train_rows);

        let mut fold_confusion = ConfusionMatrix::default();
        match spec {
            ModelSpec::Knn { k } => {
                let model = knn_fit(&train, mask, *k)?;
                for &i in &indices[start..end] {
                    let (fv, truth) = &data.rows[i];
                    let pred = knn_predict(&model, &mask.apply(fv))?;
                    fold_confusion.record(*truth, pred.label);
                }
            }
            ModelSpec::Mlp {
                epochs,
                learning_rate,
            } => {
                let config = MlpTrainConfig {
                    epochs: *epochs,
                    learning_rate: *learning_rate,
                    seed,
                };
                let model = mlp_train(&train, mask, &config)?;
                for &i in &indices[start..end] {
                    let (fv, truth) = &data.rows[i];
                    let pred = mlp_predict(&model, &mask.apply(fv))?;
                    fold_confusion.record(*truth, pred.label);
                }
            }
        }
        fold_accuracies.push(fold_confusion.accuracy());
        pooled.merge(&fold_confusion);
    }

    Ok(CrossValidation {
        mean_accuracy: fold_accuracies.iter().sum::<f64>() / folds as f64,
        pooled,
        fold_accuracies,
    })
}

/// One row of an ablation study.
#[derive(Debug, Clone)]
pub struct AblationRow {
    pub mask: FeatureMask,
    pub spec: ModelSpec,
    pub mean_accuracy: f64,
    pub pooled: ConfusionMatrix,
}

/// Cross-validate every (mask, model) combination and sort the rows by
/// accuracy, best first.
pub fn ablation_study<T: Real>(
    data: &LabeledDataset<T>,
    masks: &[FeatureMask],
    specs: &[ModelSpec],
    folds: usize,
    seed: u64,
) -> Result<Vec<AblationRow>> {
    if masks.len() < 2 {
        return Err(Error::ModelParameter(
            "an ablation study needs at least two masks".into(),
        ));
    }
    let mut rows = Vec::new();
    for spec in specs {
        for mask in masks {
            let cv = cross_validate(data, mask, spec, folds, seed)?;
            rows.push(AblationRow {
                mask: *mask,
                spec: *spec,
                mean_accuracy: cv.mean_accuracy,
                pooled: cv.pooled,
            });
        }
    }
    rows.sort_by(|a, b| {
        b.mean_accuracy
            .partial_cmp(&a.mean_accuracy)
            .expect("accuracies are finite")
    });
    Ok(rows)
}

/// The feature subsets studied in the ablation table, best-known first:
/// all five, drop GS, drop HS, drop HS+GS, touch+position, touch only,
/// position only.
pub fn default_ablation_masks() -> Vec<FeatureMask> {
    let m = |ts, hp, hs, ga, gs| FeatureMask::new(ts, hp, hs, ga, gs).expect("non-empty");
    vec![
        m(true, true, true, true, true),
        m(true, true, true, true, false),
        m(true, true, false, true, true),
        m(true, true, false, true, false),
        m(true, true, false, false, false),
        m(true, false, false, false, false),
        m(false, true, false, false, false),
    ]
}
