//! From-scratch k-nearest-neighbours classifier.
//!
//! Training is storage: the model keeps the masked rows verbatim. A query
//! takes the `k` nearest stored rows by squared Euclidean distance; the
//! neighbour order is total because ties at equal distance break by
//! ascending training-row index. `k` is forced odd so the binary vote
//! cannot tie.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{FeatureMask, Label, LabeledDataset, Prediction};
use crate::scalar::Real;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KnnModel<T> {
    pub k: usize,
    /// Masked feature rows, stored verbatim in training order.
    pub rows: Vec<Vec<T>>,
    pub labels: Vec<Label>,
}

/// Store the masked dataset. `k` must be odd and no larger than the
/// dataset.
pub fn knn_fit<T: Real>(
    data: &LabeledDataset<T>,
    mask: &FeatureMask,
    k: usize,
) -> Result<KnnModel<T>> {
    if k == 0 || k.is_multiple_of(2) {
        return Err(Error::ModelParameter(format!(
            "k must be a positive odd integer, got {k}"
        )));
    }
    if k > data.len() {
        return Err(Error::ModelParameter(format!(
            "k = {k} exceeds the {} training rows",
            data.len()
        )));
    }
    Ok(KnnModel {
        k,
        rows: data.rows.iter().map(|(fv, _)| mask.apply(fv)).collect(),
        labels: data.rows.iter().map(|(_, label)| *label).collect(),
    })
}

fn squared_distance<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| (x - y) * (x - y))
        .fold(T::zero(), |acc, d| acc + d)
}

/// Neighbour candidate ordered by (distance, index); the heap keeps the
/// current worst candidate on top.
struct Candidate<T> {
    distance: T,
    index: usize,
}

impl<T: Real> PartialEq for Candidate<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl<T: Real> Eq for Candidate<T> {}
impl<T: Real> PartialOrd for Candidate<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T: Real> Ord for Candidate<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.distance
            .partial_cmp(&other.distance)
            .expect("feature distances are finite")
            .then(self.index.cmp(&other.index))
    }
}

/// Majority vote among the `k` nearest stored rows.
///
/// The score is the fraction of intentional votes. With an odd `k` the
/// vote cannot tie; if a tie ever arose it would resolve to unintentional.
pub fn knn_predict<T: Real>(model: &KnnModel<T>, query: &[T]) -> Result<Prediction<T>> {
    if model.rows.is_empty() {
        return Err(Error::ModelParameter("empty kNN model".into()));
    }
    if query.len() != model.rows[0].len() {
        return Err(Error::InputShape(format!(
            "query has {} features, model stores {}",
            query.len(),
            model.rows[0].len()
        )));
    }

    // Max-heap of the k best candidates seen so far.
    let mut heap: BinaryHeap<Candidate<T>> = BinaryHeap::with_capacity(model.k + 1);
    for (index, row) in model.rows.iter().enumerate() {
        let candidate = Candidate {
            distance: squared_distance(query, row),
            index,
        };
        if heap.len() < model.k {
            heap.push(candidate);
        } else if candidate < *heap.peek().expect("heap is non-empty") {
            heap.pop();
            heap.push(candidate);
        }
    }

    let votes_intentional = heap.iter().filter(|c| model.labels[c.index]).count();
    let k = model.k;
    let score = T::of(votes_intentional as f64 / k as f64);
    let label = if 2 * votes_intentional == k {
        false // unreachable for odd k; safety bias if it ever arises
    } else {
        2 * votes_intentional > k
    };
    Ok(Prediction { label, score })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::FeatureVector;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn fv(values: [f64; 5]) -> FeatureVector<f64> {
        FeatureVector {
            gamma_prime: values[0],
            d_prime: values[1],
            d_dot_prime: values[2],
            alpha_prime: values[3],
            alpha_dot_prime: values[4],
        }
    }

    fn dataset(rows: &[([f64; 5], bool)]) -> LabeledDataset<f64> {
        LabeledDataset::new(rows.iter().map(|(v, l)| (fv(*v), *l)).collect())
    }

    /// Brute-force oracle: full scan, full sort by (distance, index).
    fn oracle_predict(model: &KnnModel<f64>, query: &[f64]) -> (bool, f64) {
        let mut scored: Vec<(f64, usize)> = model
            .rows
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let d: f64 = row.iter().zip(query).map(|(a, b)| (a - b) * (a - b)).sum();
                (d, i)
            })
            .collect();
        scored.sort_by(|(da, ia), (db, ib)| da.partial_cmp(db).unwrap().then(ia.cmp(ib)));
        let votes = scored
            .iter()
            .take(model.k)
            .filter(|(_, i)| model.labels[*i])
            .count();
        (2 * votes > model.k, votes as f64 / model.k as f64)
    }

    #[test]
    fn fit_stores_rows_verbatim() {
        let data = dataset(&[
            ([0.0, 0.1, 0.2, 0.3, 0.4], true),
            ([1.0, 0.9, 0.8, 0.7, 0.6], false),
            ([0.5, 0.5, 0.5, 0.5, 0.5], true),
        ]);
        let model = knn_fit(&data, &FeatureMask::ALL, 1).unwrap();
        assert_eq!(model.rows.len(), 3);
        assert_eq!(model.rows[0], vec![0.0, 0.1, 0.2, 0.3, 0.4]);
        assert_eq!(model.labels, vec![true, false, true]);
    }

    #[test]
    fn even_or_oversized_k_rejected() {
        let data = dataset(&[
            ([0.0; 5], true),
            ([1.0; 5], false),
            ([0.5; 5], true),
            ([0.2; 5], false),
            ([0.8; 5], true),
        ]);
        assert!(knn_fit(&data, &FeatureMask::ALL, 4).is_err());
        assert!(knn_fit(&data, &FeatureMask::ALL, 0).is_err());
        assert!(knn_fit(&data, &FeatureMask::ALL, 7).is_err());
        assert!(knn_fit(&data, &FeatureMask::ALL, 5).is_ok());
    }

    #[test]
    fn k_eleven_accepted_on_large_set() {
        let rows: Vec<([f64; 5], bool)> = (0..3002)
            .map(|i| {
                let x = (i as f64) / 3002.0;
                ([x, 1.0 - x, 0.5, x * x, 0.1], i % 4 == 0)
            })
            .collect();
        let data = dataset(&rows);
        assert!(knn_fit(&data, &FeatureMask::ALL, 11).is_ok());
    }

    #[test]
    fn nearest_neighbour_basics() {
        let data = dataset(&[([0.0; 5], true), ([1.0, 1.0, 1.0, 1.0, 1.0], false)]);
        let model = knn_fit(&data, &FeatureMask::ALL, 1).unwrap();
        let near_zero = knn_predict(&model, &[0.1, 0.0, 0.0, 0.0, 0.0]).unwrap();
        assert!(near_zero.label);
        assert_eq!(near_zero.score, 1.0);
        // Query equal to a stored row returns that row's label.
        let exact = knn_predict(&model, &[1.0; 5]).unwrap();
        assert!(!exact.label);
        assert_eq!(exact.score, 0.0);
    }

    #[test]
    fn shape_mismatch_rejected() {
        let data = dataset(&[([0.0; 5], true)]);
        let model = knn_fit(&data, &FeatureMask::parse("TS,HP").unwrap(), 1).unwrap();
        assert!(knn_predict(&model, &[0.0, 0.0, 0.0]).is_err());
        assert!(knn_predict(&model, &[0.0, 0.0]).is_ok());
    }

    #[test]
    fn matches_brute_force_oracle_on_random_queries() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let rows: Vec<([f64; 5], bool)> = (0..500)
            .map(|_| {
                let mut v = [0.0; 5];
                for x in &mut v {
                    *x = rng.gen_range(0.0..1.0);
                }
                (v, rng.gen_bool(0.3))
            })
            .collect();
        let data = dataset(&rows);
        for k in [1usize, 11, 51] {
            let model = knn_fit(&data, &FeatureMask::ALL, k).unwrap();
            for _ in 0..200 {
                let query: Vec<f64> = (0..5).map(|_| rng.gen_range(0.0..1.0)).collect();
                let got = knn_predict(&model, &query).unwrap();
                let (label, score) = oracle_predict(&model, &query);
                assert_eq!(got.label, label, "label mismatch at k={k}");
                assert_eq!(got.score, score, "vote fraction mismatch at k={k}");
            }
        }
    }

    #[test]
    fn oracle_agreement_with_duplicate_distances() {
        // Many identical rows force distance ties; the index rule must
        // keep impl and oracle aligned.
        let mut rows = vec![([0.5; 5], false); 30];
        rows.extend(vec![([0.5; 5], true); 10]);
        rows.push(([0.9; 5], true));
        let data = dataset(&rows);
        for k in [1usize, 11] {
            let model = knn_fit(&data, &FeatureMask::ALL, k).unwrap();
            let got = knn_predict(&model, &[0.5; 5]).unwrap();
            let (label, score) = oracle_predict(&model, &[0.5; 5]);
            assert_eq!(got.label, label);
            assert_eq!(got.score, score);
        }
    }

    #[test]
    fn deterministic_across_calls() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let rows: Vec<([f64; 5], bool)> = (0..100)
            .map(|_| {
                let mut v = [0.0; 5];
                for x in &mut v {
                    *x = rng.gen_range(0.0..1.0);
                }
                (v, rng.gen_bool(0.5))
            })
            .collect();
        let model = knn_fit(&dataset(&rows), &FeatureMask::ALL, 11).unwrap();
        let q = [0.3, 0.4, 0.5, 0.6, 0.7];
        let a = knn_predict(&model, &q).unwrap();
        let b = knn_predict(&model, &q).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn ts_only_prediction_is_a_function_of_gamma() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let rows: Vec<([f64; 5], bool)> = (0..200)
            .map(|i| {
                let gamma = if i % 3 == 0 { 1.0 } else { 0.0 };
                (
                    [
                        gamma,
                        rng.gen_range(0.0..1.0),
                        rng.gen_range(0.0..1.0),
                        rng.gen_range(0.0..1.0),
                        rng.gen_range(0.0..1.0),
                    ],
                    rng.gen_bool(0.5),
                )
            })
            .collect();
        let mask = FeatureMask::parse("TS").unwrap();
        let model = knn_fit(&dataset(&rows), &mask, 11).unwrap();
        let predict_with_noise = |gamma: f64, seed: u64| {
            let mut r = ChaCha8Rng::seed_from_u64(seed);
            let fv = fv([
                gamma,
                r.gen_range(0.0..1.0),
                r.gen_range(0.0..1.0),
                r.gen_range(0.0..1.0),
                r.gen_range(0.0..1.0),
            ]);
            knn_predict(&model, &mask.apply(&fv)).unwrap()
        };
        for gamma in [0.0, 1.0] {
            let first = predict_with_noise(gamma, 100);
            for seed in 101..140 {
                assert_eq!(predict_with_noise(gamma, seed), first);
            }
        }
    }

    #[test]
    fn permutation_invariance_in_generic_position() {
        // With all-distinct distances the neighbour set is order-free, so
        // shuffling training rows cannot change predictions.
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let rows: Vec<([f64; 5], bool)> = (0..80)
            .map(|_| {
                let mut v = [0.0; 5];
                for x in &mut v {
                    *x = rng.gen_range(0.0..1.0);
                }
                (v, rng.gen_bool(0.4))
            })
            .collect();
        let mut shuffled = rows.clone();
        // Deterministic Fisher-Yates.
        for i in (1..shuffled.len()).rev() {
            let j = rng.gen_range(0..=i);
            shuffled.swap(i, j);
        }
        let m1 = knn_fit(&dataset(&rows), &FeatureMask::ALL, 7).unwrap();
        let m2 = knn_fit(&dataset(&shuffled), &FeatureMask::ALL, 7).unwrap();
        for _ in 0..100 {
            let q: Vec<f64> = (0..5).map(|_| rng.gen_range(0.0..1.0)).collect();
            let a = knn_predict(&m1, &q).unwrap();
            let b = knn_predict(&m2, &q).unwrap();
            assert_eq!(a.label, b.label);
            assert_eq!(a.score, b.score);
        }
    }
}
