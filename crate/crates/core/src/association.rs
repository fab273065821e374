//! Pairwise association statistics for mixed-type columns.
//!
//! Continuous pairs use the (signed) Pearson coefficient, categorical pairs
//! Cramér's V, and mixed pairs the correlation ratio. Degenerate inputs
//! (zero variance, a single observed level) score 0 and set a flag instead
//! of failing, so a collapsed synthetic column still evaluates.

use std::collections::{BTreeSet, HashMap};

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::schema::{ColumnKind, RawTable};

/// An association value plus a degeneracy marker.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssocValue {
    pub value: f64,
    pub degenerate: bool,
}

impl AssocValue {
    fn ok(value: f64) -> Self {
        AssocValue {
            value,
            degenerate: false,
        }
    }

    fn degenerate() -> Self {
        AssocValue {
            value: 0.0,
            degenerate: true,
        }
    }
}

/// Sample Pearson correlation coefficient, in [-1, 1].
pub fn pearson(x: &[f64], y: &[f64]) -> Result<AssocValue> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: 2,
        });
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (&a, &b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Ok(AssocValue::degenerate());
    }
    Ok(AssocValue::ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0)))
}

/// Cramér's V from two categorical sample columns, in [0, 1].
pub fn cramers_v(a: &[&str], b: &[&str]) -> Result<AssocValue> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let levels_a = distinct_levels(a);
    let levels_b = distinct_levels(b);
    if levels_a.len() < 2 || levels_b.len() < 2 {
        return Ok(AssocValue::degenerate());
    }
    let mut counts = vec![vec![0u64; levels_b.len()]; levels_a.len()];
    for (ta, tb) in a.iter().zip(b) {
        let i = levels_a[*ta];
        let j = levels_b[*tb];
        counts[i][j] += 1;
    }
    Ok(cramers_v_from_counts(&counts))
}

/// Cramér's V straight from an r x c contingency table.
pub fn cramers_v_from_counts(counts: &[Vec<u64>]) -> AssocValue {
    let r = counts.len();
    let c = counts.first().map_or(0, Vec::len);
    if r < 2 || c < 2 {
        return AssocValue::degenerate();
    }
    let row_sums: Vec<f64> = counts.iter().map(|row| row.iter().sum::<u64>() as f64).collect();
    let col_sums: Vec<f64> = (0..c)
        .map(|j| counts.iter().map(|row| row[j] as f64).sum())
        .collect();
    let n: f64 = row_sums.iter().sum();
    // empty rows/columns carry no observations and do not count as levels
    let r_eff = row_sums.iter().filter(|&&s| s > 0.0).count();
    let c_eff = col_sums.iter().filter(|&&s| s > 0.0).count();
    if n == 0.0 || r_eff < 2 || c_eff < 2 {
        return AssocValue::degenerate();
    }
    let mut chi2 = 0.0;
    for i in 0..r {
        for j in 0..c {
            let expected = row_sums[i] * col_sums[j] / n;
            if expected > 0.0 {
                let diff = counts[i][j] as f64 - expected;
                chi2 += diff * diff / expected;
            }
        }
    }
    let k = r_eff.min(c_eff) as f64 - 1.0;
    AssocValue::ok((chi2 / (n * k)).sqrt().clamp(0.0, 1.0))
}

/// Correlation ratio between a categorical and a numeric column, in [0, 1].
///
/// eta = sqrt(between-class sum of squares / total sum of squares).
pub fn correlation_ratio(cat: &[&str], num: &[f64]) -> Result<AssocValue> {
    if cat.len() != num.len() {
        return Err(Error::LengthMismatch {
            left: cat.len(),
            right: num.len(),
        });
    }
    if cat.is_empty() {
        return Err(Error::LengthMismatch { left: 0, right: 1 });
    }
    let n = num.len() as f64;
    let grand_mean = num.iter().sum::<f64>() / n;
    let total_ss: f64 = num.iter().map(|&v| (v - grand_mean).powi(2)).sum();
    if total_ss == 0.0 {
        return Ok(AssocValue::degenerate());
    }
    let levels = distinct_levels(cat);
    if levels.len() < 2 {
        return Ok(AssocValue::degenerate());
    }
    let mut sums = vec![0.0; levels.len()];
    let mut counts = vec![0.0; levels.len()];
    for (t, &v) in cat.iter().zip(num) {
        let i = levels[*t];
        sums[i] += v;
        counts[i] += 1.0;
    }
    let between_ss: f64 = sums
        .iter()
        .zip(&counts)
        .map(|(&s, &c)| {
            let class_mean = s / c;
            c * (class_mean - grand_mean).powi(2)
        })
        .sum();
    Ok(AssocValue::ok((between_ss / total_ss).sqrt().clamp(0.0, 1.0)))
}

fn distinct_levels<'a>(tokens: &[&'a str]) -> HashMap<&'a str, usize> {
    let mut map = HashMap::new();
    for &t in tokens {
        let next = map.len();
        map.entry(t).or_insert(next);
    }
    map
}

/// Symmetric matrix of pairwise associations over a table's columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssociationMatrix {
    pub labels: Vec<String>,
    pub kinds: Vec<ColumnKind>,
    /// Row-major f x f values; Pearson entries signed, others in [0, 1].
    pub values: Vec<Vec<f64>>,
    /// Index pairs (i, j) whose statistic was degenerate and scored 0.
    pub degenerate_pairs: BTreeSet<(usize, usize)>,
}

impl AssociationMatrix {
    pub fn size(&self) -> usize {
        self.labels.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i][j]
    }

    pub fn get_by_name(&self, a: &str, b: &str) -> Option<f64> {
        let i = self.labels.iter().position(|l| l == a)?;
        let j = self.labels.iter().position(|l| l == b)?;
        Some(self.values[i][j])
    }

    /// CSV grid with a label header row and column, ready for heatmap tools.
    pub fn to_csv_grid(&self) -> String {
        let mut out = String::new();
        out.push_str("feature");
        for l in &self.labels {
            out.push(',');
            out.push_str(l);
        }
        out.push('\n');
        for (i, l) in self.labels.iter().enumerate() {
            out.push_str(l);
            for j in 0..self.labels.len() {
                out.push(',');
                out.push_str(&format!("{}", self.values[i][j]));
            }
            out.push('\n');
        }
        out
    }

    fn dense(&self) -> Array2<f64> {
        let f = self.size();
        Array2::from_shape_fn((f, f), |(i, j)| self.values[i][j])
    }
}

/// Builds the full pairwise association matrix of a table.
///
/// Dispatch per pair: continuous/continuous -> Pearson, categorical/categorical
/// -> Cramér's V, mixed -> correlation ratio. The diagonal is 1.
pub fn association_matrix(table: &RawTable) -> Result<AssociationMatrix> {
    if table.n_rows() < 2 {
        return Err(Error::LengthMismatch {
            left: table.n_rows(),
            right: 2,
        });
    }
    let f = table.n_columns();
    let kinds: Vec<ColumnKind> = table.schema.columns.iter().map(|c| c.kind).collect();
    let labels = table.schema.column_names();

    let mut values = vec![vec![0.0; f]; f];
    let mut degenerate_pairs = BTreeSet::new();
    for i in 0..f {
        values[i][i] = 1.0;
    }
    for i in 0..f {
        for j in (i + 1)..f {
            let assoc = pair_association(table, i, j)?;
            values[i][j] = assoc.value;
            values[j][i] = assoc.value;
            if assoc.degenerate {
                degenerate_pairs.insert((i, j));
                degenerate_pairs.insert((j, i));
            }
        }
    }
    Ok(AssociationMatrix {
        labels,
        kinds,
        values,
        degenerate_pairs,
    })
}

fn pair_association(table: &RawTable, i: usize, j: usize) -> Result<AssocValue> {
    let kind_i = table.schema.columns[i].kind;
    let kind_j = table.schema.columns[j].kind;
    match (kind_i, kind_j) {
        (ColumnKind::Continuous, ColumnKind::Continuous) => {
            pearson(&table.numeric_column(i), &table.numeric_column(j))
        }
        (ColumnKind::Categorical, ColumnKind::Categorical) => {
            cramers_v(&table.token_column(i), &table.token_column(j))
        }
        (ColumnKind::Categorical, ColumnKind::Continuous) => {
            correlation_ratio(&table.token_column(i), &table.numeric_column(j))
        }
        (ColumnKind::Continuous, ColumnKind::Categorical) => {
            correlation_ratio(&table.token_column(j), &table.numeric_column(i))
        }
    }
}

/// Difference between two association matrices:
/// sqrt of the sum of squared entry differences over all ordered pairs.
pub fn dif_corr(real: &AssociationMatrix, synth: &AssociationMatrix) -> Result<f64> {
    if real.labels != synth.labels || real.kinds != synth.kinds {
        return Err(Error::LabelMismatch);
    }
    let a = real.dense();
    let b = synth.dense();
    let sum: f64 = (&a - &b).iter().map(|d| d * d).sum();
    Ok(sum.sqrt())
}
