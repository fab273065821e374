//! Column orders for synthesizer training.
//!
//! [`sort_features`] centers highly-associated features: it seeds the order
//! with the strongest pair, then attaches every further feature to whichever
//! side currently holds fewer encoded columns, so the strongly-associated
//! core stays in the middle even after one-hot and mode-indicator expansion.
//! [`order_by_type`] and [`order_by_correlation`] are the two simpler
//! baseline orders, and [`SquareLayout`] describes the row-major square
//! reshape used by image-style synthesizers.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::association::AssociationMatrix;
use crate::encoding::{ColumnTransform, EncoderState};
use crate::error::{Error, Result};
use crate::schema::{ColumnKind, TableSchema};
use crate::util::fingerprint;

/// How a column order was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderMethod {
    Original,
    ByType,
    ByCorrelation,
    /// Width-aware centering of highly-associated features.
    Algorithm1,
}

impl std::fmt::Display for OrderMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            OrderMethod::Original => "original",
            OrderMethod::ByType => "by_type",
            OrderMethod::ByCorrelation => "by_correlation",
            OrderMethod::Algorithm1 => "algorithm1",
        };
        f.write_str(s)
    }
}

/// A permutation of the schema's column names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnOrder {
    pub order: Vec<String>,
    pub method: OrderMethod,
    /// Fingerprint of the association matrix the order was derived from,
    /// when one was used.
    pub provenance: Option<String>,
}

impl ColumnOrder {
    pub fn original(schema: &TableSchema) -> ColumnOrder {
        ColumnOrder {
            order: schema.column_names(),
            method: OrderMethod::Original,
            provenance: None,
        }
    }

    /// Writes the order as a plain text list, one column name per line.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut text = String::new();
        for name in &self.order {
            text.push_str(name);
            text.push('\n');
        }
        fs::write(path.as_ref(), text).map_err(|e| Error::io(path.as_ref(), e))
    }

    /// Reads a plain text order list and checks it against the schema.
    pub fn load(path: impl AsRef<Path>, schema: &TableSchema) -> Result<ColumnOrder> {
        let text = fs::read_to_string(path.as_ref()).map_err(|e| Error::io(path.as_ref(), e))?;
        let order: Vec<String> = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(str::to_string)
            .collect();
        crate::schema::permutation_indices(schema, &order)?;
        Ok(ColumnOrder {
            order,
            method: OrderMethod::Original,
            provenance: None,
        })
    }
}

fn assoc_fingerprint(assoc: &AssociationMatrix) -> String {
    fingerprint(assoc.values.iter().flatten().copied())
}

/// Balance bookkeeping of one [`sort_features`] run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SortTrace {
    /// The seeding pair, in placement order.
    pub seed_pair: Option<(String, String)>,
    /// Encoded columns accumulated left of the seed pair.
    pub c_left: usize,
    /// Encoded columns accumulated right of the seed pair.
    pub c_right: usize,
    /// Widest single chunk added to either side (a chunk is one or two
    /// features placed together).
    pub max_chunk_width: usize,
}

/// Centers highly-associated features, accounting for encoded widths.
///
/// Pairs are visited by descending absolute association (ties by the
/// lexicographically smaller name pair). The first pair seeds the order;
/// every later unplaced feature is appended to the right when the right
/// side holds strictly fewer encoded columns, otherwise prepended to the
/// left. When both members of a pair are unplaced they are placed
/// adjacently on the same side.
pub fn sort_features(
    schema: &TableSchema,
    assoc: &AssociationMatrix,
    widths: &HashMap<String, usize>,
) -> Result<ColumnOrder> {
    sort_features_traced(schema, assoc, widths).map(|(order, _)| order)
}

/// [`sort_features`] plus the side counters, for balance checks.
pub fn sort_features_traced(
    schema: &TableSchema,
    assoc: &AssociationMatrix,
    widths: &HashMap<String, usize>,
) -> Result<(ColumnOrder, SortTrace)> {
    let names = schema.column_names();
    for name in &names {
        if !widths.contains_key(name) {
            return Err(Error::WidthMissing(name.clone()));
        }
        if assoc.labels.iter().all(|l| l != name) {
            return Err(Error::LabelMismatch);
        }
    }
    if names.len() == 1 {
        let order = ColumnOrder {
            order: names,
            method: OrderMethod::Algorithm1,
            provenance: Some(assoc_fingerprint(assoc)),
        };
        let trace = SortTrace {
            seed_pair: None,
            c_left: 0,
            c_right: 0,
            max_chunk_width: 0,
        };
        return Ok((order, trace));
    }

    // all unordered pairs, strongest first; both members in schema order
    let mut pairs: Vec<(f64, &str, &str)> = Vec::new();
    for i in 0..names.len() {
        for j in (i + 1)..names.len() {
            let value = assoc
                .get_by_name(&names[i], &names[j])
                .expect("labels checked above")
                .abs();
            pairs.push((value, names[i].as_str(), names[j].as_str()));
        }
    }
    pairs.sort_by(|a, b| {
        b.0.partial_cmp(&a.0)
            .expect("finite association values")
            .then_with(|| lex_key(a.1, a.2).cmp(&lex_key(b.1, b.2)))
    });

    let mut sorted: VecDeque<&str> = VecDeque::new();
    let mut placed: HashSet<&str> = HashSet::new();
    let mut c_left = 0usize;
    let mut c_right = 0usize;
    let mut seed_pair = None;
    let mut max_chunk_width = 0usize;

    for (_, x, y) in &pairs {
        if placed.len() == names.len() {
            break;
        }
        let fresh: Vec<&str> = [*x, *y]
            .into_iter()
            .filter(|f| !placed.contains(f))
            .collect();
        if fresh.is_empty() {
            continue;
        }
        let chunk_width: usize = fresh.iter().map(|f| widths[&f.to_string()]).sum();
        if sorted.is_empty() {
            // the seed pair starts the order and counts to neither side
            for f in &fresh {
                sorted.push_back(f);
                placed.insert(f);
            }
            seed_pair = Some((x.to_string(), y.to_string()));
        } else {
            max_chunk_width = max_chunk_width.max(chunk_width);
            if c_right < c_left {
                for f in &fresh {
                    sorted.push_back(f);
                    placed.insert(f);
                }
                c_right += chunk_width;
            } else {
                // prepend keeping the chunk's own order
                for f in fresh.iter().rev() {
                    sorted.push_front(f);
                }
                for f in &fresh {
                    placed.insert(f);
                }
                c_left += chunk_width;
            }
        }
    }
    debug_assert_eq!(placed.len(), names.len());

    let order = ColumnOrder {
        order: sorted.into_iter().map(str::to_string).collect(),
        method: OrderMethod::Algorithm1,
        provenance: Some(assoc_fingerprint(assoc)),
    };
    let trace = SortTrace {
        seed_pair,
        c_left,
        c_right,
        max_chunk_width,
    };
    Ok((order, trace))
}

fn lex_key<'a>(a: &'a str, b: &'a str) -> (&'a str, &'a str) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Continuous columns first, then categorical, preserving within-kind order.
pub fn order_by_type(schema: &TableSchema) -> ColumnOrder {
    let mut order: Vec<String> = schema
        .columns
        .iter()
        .filter(|c| c.kind == ColumnKind::Continuous)
        .map(|c| c.name.clone())
        .collect();
    order.extend(
        schema
            .columns
            .iter()
            .filter(|c| c.kind == ColumnKind::Categorical)
            .map(|c| c.name.clone()),
    );
    ColumnOrder {
        order,
        method: OrderMethod::ByType,
        provenance: None,
    }
}

/// Strongly-associated columns first: each feature scores the maximum
/// absolute association with any partner; descending, ties by schema order.
pub fn order_by_correlation(schema: &TableSchema, assoc: &AssociationMatrix) -> ColumnOrder {
    let names = schema.column_names();
    let score = |name: &str| -> f64 {
        names
            .iter()
            .filter(|other| other.as_str() != name)
            .filter_map(|other| assoc.get_by_name(name, other))
            .map(f64::abs)
            .fold(0.0, f64::max)
    };
    let mut indexed: Vec<(usize, f64)> = names
        .iter()
        .enumerate()
        .map(|(i, n)| (i, score(n)))
        .collect();
    indexed.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .expect("finite scores")
            .then_with(|| a.0.cmp(&b.0))
    });
    ColumnOrder {
        order: indexed.into_iter().map(|(i, _)| names[i].clone()).collect(),
        method: OrderMethod::ByCorrelation,
        provenance: Some(assoc_fingerprint(assoc)),
    }
}

/// Row-major square reshape of an encoded row, side = ceil(sqrt(width)).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SquareLayout {
    pub side: usize,
    pub total_width: usize,
    pub pad_count: usize,
}

impl SquareLayout {
    /// The layout for a given width, with the minimal square side.
    pub fn new(total_width: usize) -> SquareLayout {
        assert!(total_width >= 1, "layout needs at least one column");
        let side = (total_width as f64).sqrt().ceil() as usize;
        // guard against floating point at perfect squares
        let side = if (side - 1) * (side - 1) >= total_width {
            side - 1
        } else {
            side
        };
        SquareLayout {
            side,
            total_width,
            pad_count: side * side - total_width,
        }
    }

    /// A layout padded to an explicitly chosen (larger) side.
    pub fn with_side(side: usize, total_width: usize) -> Result<SquareLayout> {
        if side * side < total_width {
            return Err(Error::ShapeMismatch(format!(
                "side {side} too small for width {total_width}"
            )));
        }
        Ok(SquareLayout {
            side,
            total_width,
            pad_count: side * side - total_width,
        })
    }

    /// (row, col) of an encoded column under row-major placement.
    pub fn cell_of(&self, encoded_col: usize) -> (usize, usize) {
        (encoded_col / self.side, encoded_col % self.side)
    }
}

/// Convenience: the square layout for a fitted encoder.
pub fn square_layout(total_width: usize) -> SquareLayout {
    SquareLayout::new(total_width)
}

/// Sparsity of encoded rows under a square layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparsityReport {
    pub side: usize,
    pub total_width: usize,
    pub pad_count: usize,
    /// Nonzero encoded cells per row: 2 per mode-specific feature, 1 per
    /// one-hot feature, 1 per min-max or label feature.
    pub nonzeros_per_row: usize,
    pub zero_fraction: f64,
    pub feature_widths: Vec<(String, usize)>,
}

/// Counts nonzero cells per encoded row and the zero fraction of the
/// reshaped side x side matrix.
pub fn sparsity_report(state: &EncoderState, layout: &SquareLayout) -> SparsityReport {
    let nonzeros: usize = state
        .transforms
        .iter()
        .map(|t| match t {
            ColumnTransform::ModeSpecific { .. } => 2,
            ColumnTransform::OneHot { .. } => 1,
            ColumnTransform::MinMax { .. } | ColumnTransform::Label { .. } => 1,
        })
        .sum();
    let cells = layout.side * layout.side;
    SparsityReport {
        side: layout.side,
        total_width: layout.total_width,
        pad_count: layout.pad_count,
        nonzeros_per_row: nonzeros,
        zero_fraction: 1.0 - nonzeros as f64 / cells as f64,
        feature_widths: state.feature_widths(),
    }
}
