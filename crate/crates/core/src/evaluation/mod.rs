//! Statistical-similarity and utility metrics, plus the column-permutation
//! sensitivity experiment.
//!
//! Distances are computed on raw column scales: the Wasserstein-1 distance
//! between empirical distributions for continuous columns, total variation
//! for categorical ones. Association structure is compared through
//! [`crate::association::dif_corr`], and machine-learning utility through
//! two deterministic learners trained on real and synthetic data.

pub mod learners;
mod sensitivity;

pub use learners::{ml_utility_diff, LearnerKind, LearnerScore, MlUtility};
pub use sensitivity::{max_diff_pct, sensitivity_experiment, OrderSensitivity, RepeatCell, SensitivityRecord};

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::association::{association_matrix, dif_corr};
use crate::error::{Error, Result};
use crate::schema::{ColumnKind, RawTable};

pub const REPORT_VERSION: u32 = 1;

/// Wasserstein-1 distance between two continuous empirical distributions.
///
/// Integrates |Q_a(u) - Q_b(u)| over the merged probability grid of both
/// samples; for equal sizes this reduces to the mean absolute difference of
/// the sorted samples.
pub fn wd_continuous(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let mut sa = a.to_vec();
    let mut sb = b.to_vec();
    sa.sort_by(|x, y| x.partial_cmp(y).expect("finite samples"));
    sb.sort_by(|x, y| x.partial_cmp(y).expect("finite samples"));
    let m = sa.len();
    let n = sb.len();

    let mut grid: Vec<f64> = (1..=m)
        .map(|i| i as f64 / m as f64)
        .chain((1..=n).map(|j| j as f64 / n as f64))
        .collect();
    grid.sort_by(|x, y| x.partial_cmp(y).expect("finite grid"));

    let quantile = |sorted: &[f64], u: f64| -> f64 {
        let k = (u * sorted.len() as f64).ceil() as usize;
        sorted[k.clamp(1, sorted.len()) - 1]
    };

    let mut total = 0.0;
    let mut prev = 0.0;
    for &p in &grid {
        if p > prev {
            let mid = (prev + p) / 2.0;
            total += (p - prev) * (quantile(&sa, mid) - quantile(&sb, mid)).abs();
            prev = p;
        }
    }
    Ok(total)
}

/// Wasserstein-1 distance between two categorical distributions under the
/// 0/1 ground metric: total variation of the frequency vectors. Categories
/// seen only in `b` contribute their own mass.
pub fn wd_categorical(a: &[&str], b: &[&str]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let mut levels: Vec<&str> = Vec::new();
    for &t in a.iter().chain(b) {
        if !levels.contains(&t) {
            levels.push(t);
        }
    }
    let freq = |tokens: &[&str]| -> Vec<f64> {
        let mut f = vec![0.0; levels.len()];
        for &t in tokens {
            let i = levels.iter().position(|l| *l == t).expect("level collected");
            f[i] += 1.0;
        }
        for v in &mut f {
            *v /= tokens.len() as f64;
        }
        f
    };
    let fa = freq(a);
    let fb = freq(b);
    let tv = fa
        .iter()
        .zip(&fb)
        .map(|(x, y)| (x - y).abs())
        .sum::<f64>()
        / 2.0;
    Ok(tv)
}

/// Distance for one column, dispatching on its kind.
pub fn wd_1d(a: &RawTable, b: &RawTable, column: usize) -> Result<f64> {
    match a.schema.columns[column].kind {
        ColumnKind::Continuous => wd_continuous(&a.numeric_column(column), &b.numeric_column(column)),
        ColumnKind::Categorical => wd_categorical(&a.token_column(column), &b.token_column(column)),
    }
}

/// Per-column distance on one row of the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnWd {
    pub column: String,
    pub kind: ColumnKind,
    pub wd: f64,
}

/// Per-column Wasserstein-1 distances (raw scale) and their mean.
pub fn table_wd(real: &RawTable, synth: &RawTable) -> Result<(Vec<ColumnWd>, f64)> {
    if real.schema != synth.schema {
        return Err(Error::SchemaMismatch(
            "column names, kinds, or vocabularies differ".into(),
        ));
    }
    let mut per_column = Vec::with_capacity(real.n_columns());
    for c in 0..real.n_columns() {
        per_column.push(ColumnWd {
            column: real.schema.columns[c].name.clone(),
            kind: real.schema.columns[c].kind,
            wd: wd_1d(real, synth, c)?,
        });
    }
    let mean = per_column.iter().map(|c| c.wd).sum::<f64>() / per_column.len() as f64;
    Ok((per_column, mean))
}

/// Statistical-similarity section of a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatSection {
    pub per_column_wd: Vec<ColumnWd>,
    pub mean_wd: f64,
    pub dif_corr: f64,
}

/// Everything a run reports; sections are present when computed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub version: u32,
    pub seeds: Vec<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<serde_json::Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stats: Option<StatSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ml_utility: Option<MlUtility>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sensitivity: Option<SensitivityRecord>,
}

impl EvalReport {
    pub fn new(seeds: Vec<u64>) -> EvalReport {
        EvalReport {
            version: REPORT_VERSION,
            seeds,
            config: None,
            stats: None,
            ml_utility: None,
            sensitivity: None,
        }
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        fs::write(path.as_ref(), text).map_err(|e| Error::io(path.as_ref(), e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<EvalReport> {
        let text = fs::read_to_string(path.as_ref()).map_err(|e| Error::io(path.as_ref(), e))?;
        let value: serde_json::Value = serde_json::from_str(&text)?;
        let version = value
            .get("version")
            .and_then(|v| v.as_u64())
            .ok_or_else(|| Error::ReportFormat("missing version field".into()))?;
        if version != REPORT_VERSION as u64 {
            return Err(Error::ReportVersion {
                expected: REPORT_VERSION,
                found: version as u32,
            });
        }
        Ok(serde_json::from_value(value)?)
    }
}

/// Full comparison of a synthetic table against real data: per-column WD,
/// association-matrix difference, and ML utility (the real table is split
/// into train/test for the latter, deterministically under `seed`).
pub fn evaluate_tables(real: &RawTable, synth: &RawTable, seed: u64) -> Result<EvalReport> {
    let (per_column_wd, mean_wd) = table_wd(real, synth)?;
    let real_assoc = association_matrix(real)?;
    let synth_assoc = association_matrix(synth)?;
    let dc = dif_corr(&real_assoc, &synth_assoc)?;

    let mut report = EvalReport::new(vec![seed]);
    report.stats = Some(StatSection {
        per_column_wd,
        mean_wd,
        dif_corr: dc,
    });
    report.ml_utility = match crate::schema::split(real, 0.2, seed) {
        Ok((train, test)) => Some(ml_utility_diff(&train, &test, synth, seed)?),
        // tiny or single-row-class tables cannot support the utility metric
        Err(Error::Stratification(_)) => None,
        Err(e) => return Err(e),
    };
    Ok(report)
}
