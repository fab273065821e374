//! Reversible transforms between raw rows and dense numeric vectors.
//!
//! Continuous columns use mode-specific normalization: a value is expressed
//! as a bounded offset from its best-matching Gaussian mixture mode plus a
//! one-hot mode indicator. Categorical columns are one-hot encoded. The
//! `no_msn` and `plain` modes swap in min-max scaling and label encoding for
//! the ablation experiments.

mod gmm;

pub use gmm::{em_fit_1d, em_fit_with_trace, GmmParams, EM_MAX_ITERS, EM_TOL, MAX_FIT_SAMPLES, PRUNE_WEIGHT};

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::schema::{Cell, ColumnKind, RawTable, TableSchema};
use crate::util::derive_seed;

/// Default cap on mixture components per continuous column.
pub const DEFAULT_MAX_MODES: usize = 10;

/// How raw columns are mapped to numeric vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EncodingMode {
    /// Mode-specific normalization + one-hot.
    Full,
    /// Min-max scaling + one-hot.
    NoMsn,
    /// Min-max scaling + label encoding (every feature one column wide).
    Plain,
}

/// Fitted transform of a single column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ColumnTransform {
    OneHot { categories: Vec<String> },
    ModeSpecific { gmm: GmmParams },
    MinMax { lo: f64, hi: f64 },
    Label { categories: Vec<String> },
}

impl ColumnTransform {
    pub fn width(&self) -> usize {
        match self {
            ColumnTransform::OneHot { categories } => categories.len(),
            ColumnTransform::ModeSpecific { gmm } => 1 + gmm.active_modes(),
            ColumnTransform::MinMax { .. } | ColumnTransform::Label { .. } => 1,
        }
    }
}

/// Contiguous slice of the encoded vector belonging to one feature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Span {
    pub offset: usize,
    pub width: usize,
}

impl Span {
    pub fn range(&self) -> std::ops::Range<usize> {
        self.offset..self.offset + self.width
    }
}

/// Fitted per-column transforms plus width bookkeeping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncoderState {
    pub schema: TableSchema,
    pub mode: EncodingMode,
    pub transforms: Vec<ColumnTransform>,
    pub spans: Vec<Span>,
    pub total_width: usize,
    /// Continuous columns that carried no variance and fell back to min-max.
    pub zero_variance_columns: Vec<String>,
}

/// Row-major matrix of encoded rows produced by an [`EncoderState`].
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedMatrix {
    pub values: Array2<f64>,
}

impl EncodedMatrix {
    pub fn n_rows(&self) -> usize {
        self.values.nrows()
    }

    pub fn width(&self) -> usize {
        self.values.ncols()
    }
}

/// Fits per-column transforms on a table.
///
/// In `full` mode each continuous column gets a Gaussian mixture with up to
/// `max_modes` components; a zero-variance column degrades to min-max and is
/// flagged in [`EncoderState::zero_variance_columns`].
pub fn fit_encoder(
    table: &RawTable,
    mode: EncodingMode,
    max_modes: usize,
    seed: u64,
) -> Result<EncoderState> {
    if table.rows.is_empty() {
        return Err(Error::EmptyTable);
    }
    let columns: Vec<(usize, &crate::schema::ColumnSpec)> =
        table.schema.columns.iter().enumerate().collect();

    let fitted: Result<Vec<(ColumnTransform, bool)>> = columns
        .par_iter()
        .map(|(idx, col)| fit_column(table, *idx, col, mode, max_modes, derive_seed(seed, *idx as u64)))
        .collect();
    let fitted = fitted?;

    let mut transforms = Vec::with_capacity(fitted.len());
    let mut zero_variance_columns = Vec::new();
    for ((_, col), (transform, degraded)) in columns.iter().zip(fitted) {
        if degraded {
            zero_variance_columns.push(col.name.clone());
        }
        transforms.push(transform);
    }

    let mut spans = Vec::with_capacity(transforms.len());
    let mut offset = 0;
    for t in &transforms {
        let width = t.width();
        spans.push(Span { offset, width });
        offset += width;
    }

    Ok(EncoderState {
        schema: table.schema.clone(),
        mode,
        transforms,
        spans,
        total_width: offset,
        zero_variance_columns,
    })
}

fn fit_column(
    table: &RawTable,
    idx: usize,
    col: &crate::schema::ColumnSpec,
    mode: EncodingMode,
    max_modes: usize,
    seed: u64,
) -> Result<(ColumnTransform, bool)> {
    match col.kind {
        ColumnKind::Categorical => {
            let categories = col.vocabulary().expect("categorical column").to_vec();
            let transform = match mode {
                EncodingMode::Full | EncodingMode::NoMsn => ColumnTransform::OneHot { categories },
                EncodingMode::Plain => ColumnTransform::Label { categories },
            };
            Ok((transform, false))
        }
        ColumnKind::Continuous => {
            let values = table.numeric_column(idx);
            let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            match mode {
                EncodingMode::NoMsn | EncodingMode::Plain => {
                    Ok((ColumnTransform::MinMax { lo, hi }, false))
                }
                EncodingMode::Full => {
                    if lo == hi {
                        return Ok((ColumnTransform::MinMax { lo, hi }, true));
                    }
                    let gmm = em_fit_1d(&values, max_modes, seed)?;
                    Ok((ColumnTransform::ModeSpecific { gmm }, false))
                }
            }
        }
    }
}

impl EncoderState {
    /// Span of the target column in the encoded vector.
    pub fn target_span(&self) -> Span {
        self.spans[self.schema.target_index()]
    }

    /// Size of the target column's vocabulary.
    pub fn target_category_count(&self) -> usize {
        self.schema.columns[self.schema.target_index()]
            .vocabulary()
            .expect("target is categorical")
            .len()
    }

    /// Target-category index of every encoded row: argmax over a one-hot
    /// target span, nearest index for a label-encoded target.
    pub fn decode_target_indices(&self, rows: &Array2<f64>) -> Vec<usize> {
        let span = self.target_span();
        let transform = &self.transforms[self.schema.target_index()];
        rows.rows()
            .into_iter()
            .map(|row| {
                let slot = row.slice(ndarray::s![span.range()]);
                match transform {
                    ColumnTransform::OneHot { .. } => {
                        argmax(slot.as_slice().expect("contiguous row"))
                    }
                    ColumnTransform::Label { categories } => {
                        let hi = categories.len() as f64 - 1.0;
                        let idx = min_max_decode(slot[0], 0.0, hi).round() as usize;
                        idx.min(categories.len() - 1)
                    }
                    _ => unreachable!("target is categorical"),
                }
            })
            .collect()
    }

    /// Drops the target span's columns from every encoded row.
    pub fn strip_target_columns(&self, rows: &Array2<f64>) -> Array2<f64> {
        let span = self.target_span();
        let keep: Vec<usize> = (0..self.total_width)
            .filter(|c| !span.range().contains(c))
            .collect();
        rows.select(ndarray::Axis(1), &keep)
    }

    /// Inverse of [`Self::strip_target_columns`] for gradients: places the
    /// given columns back at their positions, zeros over the target span.
    pub fn scatter_non_target(&self, stripped: &Array2<f64>) -> Array2<f64> {
        let span = self.target_span();
        let mut out = Array2::zeros((stripped.nrows(), self.total_width));
        let mut src = 0;
        for c in 0..self.total_width {
            if span.range().contains(&c) {
                continue;
            }
            out.column_mut(c).assign(&stripped.column(src));
            src += 1;
        }
        out
    }

    /// Encoded width of every feature, in schema order.
    pub fn feature_widths(&self) -> Vec<(String, usize)> {
        self.schema
            .columns
            .iter()
            .zip(&self.spans)
            .map(|(c, s)| (c.name.clone(), s.width))
            .collect()
    }

    pub fn encode_row(&self, row: &[Cell]) -> Result<Vec<f64>> {
        if row.len() != self.schema.columns.len() {
            return Err(Error::ShapeMismatch(format!(
                "row has {} cells, schema has {} columns",
                row.len(),
                self.schema.columns.len()
            )));
        }
        let mut out = vec![0.0; self.total_width];
        for (idx, (cell, transform)) in row.iter().zip(&self.transforms).enumerate() {
            let slot = &mut out[self.spans[idx].range()];
            encode_cell(cell, transform, &self.schema.columns[idx].name, slot)?;
        }
        Ok(out)
    }

    pub fn decode_row(&self, vector: &[f64]) -> Result<Vec<Cell>> {
        if vector.len() != self.total_width {
            return Err(Error::VectorWidth {
                expected: self.total_width,
                found: vector.len(),
            });
        }
        if vector.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("encoded vector".into()));
        }
        let mut row = Vec::with_capacity(self.transforms.len());
        for (transform, span) in self.transforms.iter().zip(&self.spans) {
            row.push(decode_cell(&vector[span.range()], transform));
        }
        Ok(row)
    }

    pub fn encode_table(&self, table: &RawTable) -> Result<EncodedMatrix> {
        let mut values = Array2::zeros((table.n_rows(), self.total_width));
        for (i, row) in table.rows.iter().enumerate() {
            let encoded = self.encode_row(row).map_err(|e| at_row(e, i))?;
            values.row_mut(i).assign(&ndarray::ArrayView1::from(&encoded));
        }
        Ok(EncodedMatrix { values })
    }

    pub fn decode_table(&self, matrix: &EncodedMatrix) -> Result<RawTable> {
        let mut rows = Vec::with_capacity(matrix.n_rows());
        for row in matrix.values.rows() {
            rows.push(self.decode_row(row.as_slice().expect("row-major matrix"))?);
        }
        RawTable::new(self.schema.clone(), rows)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        fs::write(path.as_ref(), text).map_err(|e| Error::io(path.as_ref(), e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<EncoderState> {
        let text = fs::read_to_string(path.as_ref()).map_err(|e| Error::io(path.as_ref(), e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

fn at_row(e: Error, row: usize) -> Error {
    match e {
        Error::UnknownCategory { column, token, .. } => Error::UnknownCategory { column, row, token },
        Error::NonNumericCell { column, token, .. } => Error::NonNumericCell { column, row, token },
        other => other,
    }
}

fn encode_cell(
    cell: &Cell,
    transform: &ColumnTransform,
    column: &str,
    out: &mut [f64],
) -> Result<()> {
    match (transform, cell) {
        (ColumnTransform::OneHot { categories }, Cell::Category(token)) => {
            let idx = categories
                .iter()
                .position(|c| c == token)
                .ok_or_else(|| Error::UnknownCategory {
                    column: column.to_string(),
                    row: 0,
                    token: token.clone(),
                })?;
            out[idx] = 1.0;
            Ok(())
        }
        (ColumnTransform::Label { categories }, Cell::Category(token)) => {
            let idx = categories
                .iter()
                .position(|c| c == token)
                .ok_or_else(|| Error::UnknownCategory {
                    column: column.to_string(),
                    row: 0,
                    token: token.clone(),
                })?;
            out[0] = min_max_encode(idx as f64, 0.0, categories.len() as f64 - 1.0);
            Ok(())
        }
        (ColumnTransform::ModeSpecific { gmm }, Cell::Number(x)) => {
            let k = gmm.posterior_argmax(*x);
            let alpha = (x - gmm.means[k]) / (4.0 * gmm.stds[k]);
            out[0] = alpha.clamp(-1.0, 1.0);
            out[1 + k] = 1.0;
            Ok(())
        }
        (ColumnTransform::MinMax { lo, hi }, Cell::Number(x)) => {
            out[0] = min_max_encode(*x, *lo, *hi);
            Ok(())
        }
        (_, Cell::Number(x)) => Err(Error::UnknownCategory {
            column: column.to_string(),
            row: 0,
            token: x.to_string(),
        }),
        (_, Cell::Category(token)) => Err(Error::NonNumericCell {
            column: column.to_string(),
            row: 0,
            token: token.clone(),
        }),
    }
}

fn min_max_encode(x: f64, lo: f64, hi: f64) -> f64 {
    if hi == lo {
        0.0
    } else {
        (2.0 * (x - lo) / (hi - lo) - 1.0).clamp(-1.0, 1.0)
    }
}

fn min_max_decode(v: f64, lo: f64, hi: f64) -> f64 {
    if hi == lo {
        lo
    } else {
        (v.clamp(-1.0, 1.0) + 1.0) / 2.0 * (hi - lo) + lo
    }
}

fn decode_cell(slot: &[f64], transform: &ColumnTransform) -> Cell {
    match transform {
        ColumnTransform::OneHot { categories } => {
            Cell::Category(categories[argmax(slot)].clone())
        }
        ColumnTransform::Label { categories } => {
            let hi = categories.len() as f64 - 1.0;
            let idx = min_max_decode(slot[0], 0.0, hi).round() as usize;
            Cell::Category(categories[idx.min(categories.len() - 1)].clone())
        }
        ColumnTransform::ModeSpecific { gmm } => {
            let k = argmax(&slot[1..]);
            let alpha = slot[0].clamp(-1.0, 1.0);
            Cell::Number(alpha * 4.0 * gmm.stds[k] + gmm.means[k])
        }
        ColumnTransform::MinMax { lo, hi } => Cell::Number(min_max_decode(slot[0], *lo, *hi)),
    }
}

/// Index of the largest entry; ties broken toward the lowest index.
fn argmax(slice: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in slice.iter().enumerate() {
        if v > slice[best] {
            best = i;
        }
    }
    best
}
