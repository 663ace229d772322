//! Supervised classifiers and their evaluation harness.

mod eval;
mod knn;
mod mlp;

pub use eval::{
    ablation_study, cross_validate, default_ablation_masks, AblationRow, ConfusionMatrix,
    CrossValidation, ModelSpec,
};
pub use knn::{knn_fit, knn_predict, KnnModel};
pub use mlp::{mlp_predict, mlp_train, MlpModel, MlpTrainConfig};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{FeatureVector, ScalingParams};
use crate::scalar::Real;

/// Class labels: `true` = intentional, `false` = unintentional.
pub type Label = bool;

/// Feature flags in the Table-style order TS, HP, HS, GA, GS, selecting
/// `[gamma', d', d_dot', alpha', alpha_dot']` components.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureMask {
    pub ts: bool,
    pub hp: bool,
    pub hs: bool,
    pub ga: bool,
    pub gs: bool,
}

impl FeatureMask {
    pub const ALL: FeatureMask = FeatureMask {
        ts: true,
        hp: true,
        hs: true,
        ga: true,
        gs: true,
    };

    pub fn new(ts: bool, hp: bool, hs: bool, ga: bool, gs: bool) -> Result<Self> {
        let mask = Self { ts, hp, hs, ga, gs };
        if mask.dim() == 0 {
            return Err(Error::ModelParameter(
                "feature mask must select at least one feature".into(),
            ));
        }
        Ok(mask)
    }

    fn flags(&self) -> [bool; 5] {
        [self.ts, self.hp, self.hs, self.ga, self.gs]
    }

    pub fn dim(&self) -> usize {
        self.flags().iter().filter(|&&f| f).count()
    }

    /// Select the masked components of a feature vector.
    pub fn apply<T: Real>(&self, fv: &FeatureVector<T>) -> Vec<T> {
        fv.as_array()
            .iter()
            .zip(self.flags())
            .filter_map(|(&value, keep)| keep.then_some(value))
            .collect()
    }

    /// Parse a comma-separated flag list like `TS,HP,GA`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut mask = Self {
            ts: false,
            hp: false,
            hs: false,
            ga: false,
            gs: false,
        };
        for token in text.split(',') {
            match token.trim().to_ascii_uppercase().as_str() {
                "TS" => mask.ts = true,
                "HP" => mask.hp = true,
                "HS" => mask.hs = true,
                "GA" => mask.ga = true,
                "GS" => mask.gs = true,
                "" => {}
                other => {
                    return Err(Error::ModelParameter(format!(
                        "unknown feature flag `{other}` (expected TS, HP, HS, GA, GS)"
                    )))
                }
            }
        }
        if mask.dim() == 0 {
            return Err(Error::ModelParameter(
                "feature mask must select at least one feature".into(),
            ));
        }
        Ok(mask)
    }
}

impl std::fmt::Display for FeatureMask {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let names = ["TS", "HP", "HS", "GA", "GS"];
        let mut first = true;
        for (name, flag) in names.iter().zip(self.flags()) {
            if flag {
                if !first {
                    write!(f, ",")?;
                }
                write!(f, "{name}")?;
                first = false;
            }
        }
        Ok(())
    }
}

/// Labeled feature rows for training and evaluation.
#[derive(Debug, Clone, Default)]
pub struct LabeledDataset<T: Real> {
    pub rows: Vec<(FeatureVector<T>, Label)>,
}

impl<T: Real> LabeledDataset<T> {
    pub fn new(rows: Vec<(FeatureVector<T>, Label)>) -> Self {
        Self { rows }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn positives(&self) -> usize {
        self.rows.iter().filter(|(_, label)| *label).count()
    }

    pub fn positive_fraction(&self) -> f64 {
        if self.rows.is_empty() {
            0.0
        } else {
            self.positives() as f64 / self.len() as f64
        }
    }

    pub fn has_both_classes(&self) -> bool {
        let pos = self.positives();
        pos > 0 && pos < self.len()
    }
}

/// Classifier output: binary label plus a score in `[0, 1]` (vote fraction
/// for kNN, network output for the MLP).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction<T> {
    pub label: Label,
    pub score: T,
}

/// A trained classifier with its feature mask and frozen scaling baked in.
#[derive(Debug, Clone)]
pub struct TrainedModel<T: Real> {
    pub mask: FeatureMask,
    pub scaling: ScalingParams<T>,
    pub classifier: Classifier<T>,
    pub metadata: ModelMetadata,
}

#[derive(Debug, Clone)]
pub enum Classifier<T: Real> {
    Knn(KnnModel<T>),
    Mlp(MlpModel<T>),
}

#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
pub struct ModelMetadata {
    pub seed: u64,
    pub n_samples: usize,
    pub positive_fraction: f64,
}

impl<T: Real> TrainedModel<T> {
    pub fn predict(&self, fv: &FeatureVector<T>) -> Result<Prediction<T>> {
        let masked = self.mask.apply(fv);
        match &self.classifier {
            Classifier::Knn(model) => knn_predict(model, &masked),
            Classifier::Mlp(model) => mlp_predict(model, &masked),
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match &self.classifier {
            Classifier::Knn(_) => "knn",
            Classifier::Mlp(_) => "mlp",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mask_parse_and_display_round_trip() {
        let mask = FeatureMask::parse("TS,GA").unwrap();
        assert_eq!(mask.dim(), 2);
        assert_eq!(mask.to_string(), "TS,GA");
        assert_eq!(FeatureMask::ALL.to_string(), "TS,HP,HS,GA,GS");
        assert!(FeatureMask::parse("").is_err());
        assert!(FeatureMask::parse("XX").is_err());
        // Case-insensitive, whitespace-tolerant.
        assert_eq!(
            FeatureMask::parse(" ts , hp ").unwrap().to_string(),
            "TS,HP"
        );
    }

    #[test]
    fn mask_applies_in_order() {
        let fv = FeatureVector::<f64> {
            gamma_prime: 1.0,
            d_prime: 0.2,
            d_dot_prime: 0.3,
            alpha_prime: 0.4,
            alpha_dot_prime: 0.5,
        };
        let mask = FeatureMask::parse("TS,GA").unwrap();
        assert_eq!(mask.apply(&fv), vec![1.0, 0.4]);
        assert_eq!(FeatureMask::ALL.apply(&fv), vec![1.0, 0.2, 0.3, 0.4, 0.5]);
    }
}
