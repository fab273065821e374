//! Machine-learning utility: accuracy gap between models trained on real
//! and synthetic data.
//!
//! Two deterministic, dependency-free learners keep the metric reproducible:
//! an L2-regularized multinomial logistic regression trained by full-batch
//! gradient descent for a fixed 500 iterations, and a depth-4 decision tree
//! with information-gain splits. Both see one-hot categorical features and
//! standardized continuous features.

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::schema::{ColumnKind, RawTable};

const LOGREG_ITERS: usize = 500;
const LOGREG_LR: f64 = 0.1;
const LOGREG_L2: f64 = 1e-4;
const TREE_DEPTH: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LearnerKind {
    LogisticRegression,
    DecisionTree,
}

pub const DEFAULT_LEARNERS: [LearnerKind; 2] =
    [LearnerKind::LogisticRegression, LearnerKind::DecisionTree];

/// One learner's accuracies under both training sets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnerScore {
    pub learner: LearnerKind,
    pub acc_real: Option<f64>,
    pub acc_synth: Option<f64>,
    /// Set when a training set was missing a target class.
    pub skipped: bool,
}

/// ML-utility section of a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlUtility {
    pub scores: Vec<LearnerScore>,
    /// Mean over non-skipped learners of |acc_real - acc_synth|.
    pub utility_diff: Option<f64>,
}

/// Accuracy gap between learners trained on `real_train` and on `synth`,
/// both evaluated on `real_test`.
///
/// `synth` must hold between half and twice as many rows as `real_train`
/// and is resampled (seeded) to exactly match its size. A learner whose
/// training set misses a target class is skipped and flagged.
pub fn ml_utility_diff(
    real_train: &RawTable,
    real_test: &RawTable,
    synth: &RawTable,
    seed: u64,
) -> Result<MlUtility> {
    ml_utility_diff_with(real_train, real_test, synth, seed, &DEFAULT_LEARNERS)
}

/// [`ml_utility_diff`] with an explicit learner set.
pub fn ml_utility_diff_with(
    real_train: &RawTable,
    real_test: &RawTable,
    synth: &RawTable,
    seed: u64,
    learners: &[LearnerKind],
) -> Result<MlUtility> {
    if real_train.schema != real_test.schema || real_train.schema != synth.schema {
        return Err(Error::SchemaMismatch("utility inputs differ".into()));
    }
    let n_train = real_train.n_rows();
    let lo = n_train.div_ceil(2);
    let hi = 2 * n_train;
    if synth.n_rows() < lo || synth.n_rows() > hi {
        return Err(Error::SynthSizeOutOfRange {
            synth: synth.n_rows(),
            train: n_train,
            lo,
            hi,
        });
    }
    let synth_matched = if synth.n_rows() == n_train {
        synth.clone()
    } else {
        resample(synth, n_train, seed)
    };

    let real_ok = covers_all_classes(real_train);
    let synth_ok = covers_all_classes(&synth_matched);

    let mut scores = Vec::new();
    let mut diffs = Vec::new();
    for &kind in learners {
        if !real_ok || !synth_ok {
            scores.push(LearnerScore {
                learner: kind,
                acc_real: None,
                acc_synth: None,
                skipped: true,
            });
            continue;
        }
        let acc_real = train_and_score(kind, real_train, real_test);
        let acc_synth = train_and_score(kind, &synth_matched, real_test);
        diffs.push((acc_real - acc_synth).abs());
        scores.push(LearnerScore {
            learner: kind,
            acc_real: Some(acc_real),
            acc_synth: Some(acc_synth),
            skipped: false,
        });
    }
    let utility_diff = if diffs.is_empty() {
        None
    } else {
        Some(diffs.iter().sum::<f64>() / diffs.len() as f64)
    };
    Ok(MlUtility {
        scores,
        utility_diff,
    })
}

fn covers_all_classes(table: &RawTable) -> bool {
    let target = table.schema.target_index();
    let vocab = table.schema.columns[target]
        .vocabulary()
        .expect("target is categorical");
    vocab.iter().all(|class| {
        table
            .rows
            .iter()
            .any(|row| row[target].as_token() == Some(class))
    })
}

fn resample(table: &RawTable, n: usize, seed: u64) -> RawTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = (0..n)
        .map(|_| table.rows[rng.random_range(0..table.n_rows())].clone())
        .collect();
    RawTable {
        schema: table.schema.clone(),
        rows,
    }
}

fn train_and_score(kind: LearnerKind, train: &RawTable, test: &RawTable) -> f64 {
    let space = FeatureSpace::fit(train);
    let x_train = space.features(train);
    let y_train = space.labels(train);
    let x_test = space.features(test);
    let y_test = space.labels(test);
    let predictions = match kind {
        LearnerKind::LogisticRegression => {
            let model = LogReg::train(&x_train, &y_train, space.n_classes);
            model.predict(&x_test)
        }
        LearnerKind::DecisionTree => {
            let tree = Tree::train(&x_train, &y_train, space.n_classes);
            tree.predict(&x_test)
        }
    };
    let correct = predictions
        .iter()
        .zip(&y_test)
        .filter(|(p, t)| p == t)
        .count();
    correct as f64 / y_test.len() as f64
}

/// Numeric feature mapping shared by both learners: standardized continuous
/// columns (training-set statistics) and one-hot categoricals.
struct FeatureSpace {
    schema: crate::schema::TableSchema,
    cont_stats: Vec<(usize, f64, f64)>, // (column, mean, std)
    n_features: usize,
    n_classes: usize,
}

impl FeatureSpace {
    fn fit(train: &RawTable) -> FeatureSpace {
        let mut cont_stats = Vec::new();
        let mut n_features = 0;
        for (i, col) in train.schema.columns.iter().enumerate() {
            if i == train.schema.target_index() {
                continue;
            }
            match col.kind {
                ColumnKind::Continuous => {
                    let values = train.numeric_column(i);
                    let n = values.len() as f64;
                    let mean = values.iter().sum::<f64>() / n;
                    let std =
                        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
                    cont_stats.push((i, mean, std));
                    n_features += 1;
                }
                ColumnKind::Categorical => {
                    n_features += col.vocabulary().expect("categorical").len();
                }
            }
        }
        let n_classes = train.schema.columns[train.schema.target_index()]
            .vocabulary()
            .expect("target is categorical")
            .len();
        FeatureSpace {
            schema: train.schema.clone(),
            cont_stats,
            n_features,
            n_classes,
        }
    }

    fn features(&self, table: &RawTable) -> Array2<f64> {
        let mut x = Array2::zeros((table.n_rows(), self.n_features));
        for (r, row) in table.rows.iter().enumerate() {
            let mut f = 0;
            for (i, col) in self.schema.columns.iter().enumerate() {
                if i == self.schema.target_index() {
                    continue;
                }
                match col.kind {
                    ColumnKind::Continuous => {
                        let (_, mean, std) = self
                            .cont_stats
                            .iter()
                            .find(|(c, _, _)| *c == i)
                            .expect("fitted column");
                        let v = row[i].as_number().expect("continuous cell");
                        x[(r, f)] = if *std > 0.0 { (v - mean) / std } else { 0.0 };
                        f += 1;
                    }
                    ColumnKind::Categorical => {
                        let vocab = col.vocabulary().expect("categorical");
                        let token = row[i].as_token().expect("categorical cell");
                        if let Some(k) = vocab.iter().position(|c| c == token) {
                            x[(r, f + k)] = 1.0;
                        }
                        f += vocab.len();
                    }
                }
            }
        }
        x
    }

    fn labels(&self, table: &RawTable) -> Vec<usize> {
        let target = self.schema.target_index();
        let vocab = self.schema.columns[target]
            .vocabulary()
            .expect("target is categorical");
        table
            .rows
            .iter()
            .map(|row| {
                let token = row[target].as_token().expect("categorical target");
                vocab.iter().position(|c| c == token).expect("cell in vocabulary")
            })
            .collect()
    }
}

/// Multinomial logistic regression, zero-initialized, full-batch gradient
/// descent with a fixed iteration budget.
struct LogReg {
    w: Array2<f64>, // [classes, features]
    b: Array1<f64>,
}

impl LogReg {
    fn train(x: &Array2<f64>, y: &[usize], n_classes: usize) -> LogReg {
        let n = x.nrows() as f64;
        let f = x.ncols();
        let mut w = Array2::zeros((n_classes, f));
        let mut b = Array1::zeros(n_classes);
        for _ in 0..LOGREG_ITERS {
            let logits = x.dot(&w.t()) + &b;
            let probs = softmax_rows(&logits);
            let mut grad_logits = probs;
            for (i, &t) in y.iter().enumerate() {
                grad_logits[(i, t)] -= 1.0;
            }
            grad_logits /= n;
            let grad_w = grad_logits.t().dot(x) + &(&w * LOGREG_L2);
            let grad_b = grad_logits.sum_axis(ndarray::Axis(0));
            w -= &(&grad_w * LOGREG_LR);
            b -= &(&grad_b * LOGREG_LR);
        }
        LogReg { w, b }
    }

    fn predict(&self, x: &Array2<f64>) -> Vec<usize> {
        let logits = x.dot(&self.w.t()) + &self.b;
        logits
            .rows()
            .into_iter()
            .map(|row| argmax_slice(row.as_slice().expect("contiguous")))
            .collect()
    }
}

fn softmax_rows(logits: &Array2<f64>) -> Array2<f64> {
    let mut out = logits.clone();
    for mut row in out.rows_mut() {
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for v in row.iter_mut() {
            *v = (*v - max).exp();
            sum += *v;
        }
        for v in row.iter_mut() {
            *v /= sum;
        }
    }
    out
}

fn argmax_slice(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

/// Depth-limited binary decision tree with information-gain threshold splits.
enum Tree {
    Leaf(usize),
    Node {
        feature: usize,
        threshold: f64,
        left: Box<Tree>,
        right: Box<Tree>,
    },
}

impl Tree {
    fn train(x: &Array2<f64>, y: &[usize], n_classes: usize) -> Tree {
        let idx: Vec<usize> = (0..x.nrows()).collect();
        Tree::grow(x, y, &idx, n_classes, TREE_DEPTH)
    }

    fn grow(x: &Array2<f64>, y: &[usize], idx: &[usize], n_classes: usize, depth: usize) -> Tree {
        let counts = class_counts(y, idx, n_classes);
        let majority = argmax_counts(&counts);
        if depth == 0 || idx.len() < 2 || counts.iter().filter(|&&c| c > 0).count() < 2 {
            return Tree::Leaf(majority);
        }
        let parent_entropy = entropy(&counts, idx.len());
        let mut best: Option<(f64, usize, f64)> = None; // (gain, feature, threshold)
        for feature in 0..x.ncols() {
            let mut values: Vec<f64> = idx.iter().map(|&i| x[(i, feature)]).collect();
            values.sort_by(|a, b| a.partial_cmp(b).expect("finite features"));
            values.dedup();
            for pair in values.windows(2) {
                let threshold = (pair[0] + pair[1]) / 2.0;
                let (left, right): (Vec<usize>, Vec<usize>) =
                    idx.iter().partition(|&&i| x[(i, feature)] <= threshold);
                if left.is_empty() || right.is_empty() {
                    continue;
                }
                let h_left = entropy(&class_counts(y, &left, n_classes), left.len());
                let h_right = entropy(&class_counts(y, &right, n_classes), right.len());
                let weighted = (left.len() as f64 * h_left + right.len() as f64 * h_right)
                    / idx.len() as f64;
                let gain = parent_entropy - weighted;
                let better = match best {
                    None => gain > 1e-12,
                    Some((bg, bf, bt)) => {
                        gain > bg + 1e-12
                            || ((gain - bg).abs() <= 1e-12
                                && (feature, threshold) < (bf, bt))
                    }
                };
                if better {
                    best = Some((gain, feature, threshold));
                }
            }
        }
        match best {
            None => Tree::Leaf(majority),
            Some((_, feature, threshold)) => {
                let (left_idx, right_idx): (Vec<usize>, Vec<usize>) =
                    idx.iter().partition(|&&i| x[(i, feature)] <= threshold);
                Tree::Node {
                    feature,
                    threshold,
                    left: Box::new(Tree::grow(x, y, &left_idx, n_classes, depth - 1)),
                    right: Box::new(Tree::grow(x, y, &right_idx, n_classes, depth - 1)),
                }
            }
        }
    }

    fn predict(&self, x: &Array2<f64>) -> Vec<usize> {
        (0..x.nrows())
            .map(|i| {
                let mut node = self;
                loop {
                    match node {
                        Tree::Leaf(class) => return *class,
                        Tree::Node {
                            feature,
                            threshold,
                            left,
                            right,
                        } => {
                            node = if x[(i, *feature)] <= *threshold {
                                left
                            } else {
                                right
                            };
                        }
                    }
                }
            })
            .collect()
    }
}

fn class_counts(y: &[usize], idx: &[usize], n_classes: usize) -> Vec<usize> {
    let mut counts = vec![0usize; n_classes];
    for &i in idx {
        counts[y[i]] += 1;
    }
    counts
}

fn argmax_counts(counts: &[usize]) -> usize {
    let mut best = 0;
    for (i, &c) in counts.iter().enumerate() {
        if c > counts[best] {
            best = i;
        }
    }
    best
}

fn entropy(counts: &[usize], total: usize) -> f64 {
    let n = total as f64;
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schema::{Cell, ColumnSpec, TableSchema};
    use rand::Rng;

    /// Linearly separable fixture: label is the sign of x plus a categorical
    /// column correlated with nothing.
    fn separable(n: usize, seed: u64) -> RawTable {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let schema = TableSchema::new(
            vec![
                ColumnSpec::continuous("x"),
                ColumnSpec::categorical("grp", vec!["g".into(), "h".into()]),
                ColumnSpec::categorical("y", vec!["neg".into(), "pos".into()]),
            ],
            "y",
        )
        .unwrap();
        let rows = (0..n)
            .map(|i| {
                let x: f64 = rng.random_range(-4.0..4.0);
                let label = if x > 0.0 { "pos" } else { "neg" };
                vec![
                    Cell::Number(x),
                    Cell::Category(if i % 2 == 0 { "g".into() } else { "h".into() }),
                    Cell::Category(label.into()),
                ]
            })
            .collect();
        RawTable::new(schema, rows).unwrap()
    }

    #[test]
    fn identical_training_data_gives_zero_diff() {
        let table = separable(200, 1);
        let (train, test) = crate::schema::split(&table, 0.25, 3).unwrap();
        let u = ml_utility_diff(&train, &test, &train, 9).unwrap();
        assert_eq!(u.utility_diff, Some(0.0));
        for s in &u.scores {
            assert_eq!(s.acc_real, s.acc_synth);
            assert!(!s.skipped);
        }
    }

    #[test]
    fn shuffled_labels_hurt_utility() {
        let table = separable(400, 2);
        let (train, test) = crate::schema::split(&table, 0.25, 3).unwrap();
        // destroy the label relation in the synthetic copy
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut shuffled = train.clone();
        let target = shuffled.schema.target_index();
        let mut labels: Vec<Cell> = shuffled.rows.iter().map(|r| r[target].clone()).collect();
        use rand::seq::SliceRandom;
        labels.shuffle(&mut rng);
        for (row, label) in shuffled.rows.iter_mut().zip(labels) {
            row[target] = label;
        }
        let u = ml_utility_diff(&train, &test, &shuffled, 9).unwrap();
        assert!(u.utility_diff.unwrap() > 0.1, "diff {:?}", u.utility_diff);
    }

    #[test]
    fn deterministic_under_seed() {
        let table = separable(150, 4);
        let (train, test) = crate::schema::split(&table, 0.2, 3).unwrap();
        let synth = separable(150, 10);
        let (s_train, _) = crate::schema::split(&synth, 0.2, 3).unwrap();
        let a = ml_utility_diff(&train, &test, &s_train, 42).unwrap();
        let b = ml_utility_diff(&train, &test, &s_train, 42).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn missing_class_skips_with_flag() {
        let table = separable(100, 6);
        let (train, test) = crate::schema::split(&table, 0.25, 3).unwrap();
        // synthetic copy collapsed to a single label
        let mut collapsed = train.clone();
        let target = collapsed.schema.target_index();
        for row in &mut collapsed.rows {
            row[target] = Cell::Category("pos".into());
        }
        let u = ml_utility_diff(&train, &test, &collapsed, 9).unwrap();
        assert!(u.scores.iter().all(|s| s.skipped));
        assert_eq!(u.utility_diff, None);
    }

    #[test]
    fn size_gate_enforced() {
        let table = separable(100, 7);
        let (train, test) = crate::schema::split(&table, 0.25, 3).unwrap();
        let big = separable(500, 8);
        assert!(matches!(
            ml_utility_diff(&train, &test, &big, 9),
            Err(Error::SynthSizeOutOfRange { .. })
        ));
    }

    #[test]
    fn resampling_matches_train_size() {
        let table = separable(120, 11);
        let (train, test) = crate::schema::split(&table, 0.25, 3).unwrap();
        let synth = separable(160, 12);
        // 160 is within [45, 180] of train size 90, so this must succeed
        let u = ml_utility_diff(&train, &test, &synth, 9).unwrap();
        assert!(u.utility_diff.is_some());
    }

    #[test]
    fn learners_fit_separable_data_well() {
        let table = separable(300, 13);
        let (train, test) = crate::schema::split(&table, 0.25, 3).unwrap();
        for kind in DEFAULT_LEARNERS {
            let acc = train_and_score(kind, &train, &test);
            assert!(acc > 0.95, "{kind:?} reached only {acc}");
        }
    }
}
