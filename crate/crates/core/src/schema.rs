//! Table schemas, CSV ingestion, and train/test splitting.
//!
//! A [`TableSchema`] declares the column order, the kind of every column
//! (continuous or categorical), and the single categorical target column.
//! [`RawTable`] couples a schema with validated rows. Cell values are kept
//! on their raw scale; all normalization happens in [`crate::encoding`].

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of distinct values above which an all-numeric column is inferred
/// as continuous.
pub const DEFAULT_CATEGORICAL_THRESHOLD: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnKind {
    Continuous,
    Categorical,
}

/// Declaration of a single column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnSpec {
    pub name: String,
    pub kind: ColumnKind,
    /// Ordered vocabulary; present iff the column is categorical.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub categories: Option<Vec<String>>,
}

impl ColumnSpec {
    pub fn continuous(name: impl Into<String>) -> Self {
        ColumnSpec {
            name: name.into(),
            kind: ColumnKind::Continuous,
            categories: None,
        }
    }

    pub fn categorical(name: impl Into<String>, categories: Vec<String>) -> Self {
        ColumnSpec {
            name: name.into(),
            kind: ColumnKind::Categorical,
            categories: Some(categories),
        }
    }

    pub fn vocabulary(&self) -> Option<&[String]> {
        self.categories.as_deref()
    }
}

/// Ordered column declarations plus the name of the target column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableSchema {
    pub columns: Vec<ColumnSpec>,
    pub target: String,
}

impl TableSchema {
    /// Builds a schema and checks its invariants.
    pub fn new(columns: Vec<ColumnSpec>, target: impl Into<String>) -> Result<Self> {
        let schema = TableSchema {
            columns,
            target: target.into(),
        };
        schema.validate()?;
        Ok(schema)
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = HashSet::new();
        for col in &self.columns {
            if col.name.is_empty() {
                return Err(Error::InvalidSchema("empty column name".into()));
            }
            if !seen.insert(col.name.as_str()) {
                return Err(Error::InvalidSchema(format!(
                    "duplicate column name {:?}",
                    col.name
                )));
            }
            match (col.kind, &col.categories) {
                (ColumnKind::Continuous, Some(_)) => {
                    return Err(Error::InvalidSchema(format!(
                        "continuous column {:?} must not list categories",
                        col.name
                    )));
                }
                (ColumnKind::Categorical, None) => {
                    return Err(Error::InvalidSchema(format!(
                        "categorical column {:?} lacks a vocabulary",
                        col.name
                    )));
                }
                (ColumnKind::Categorical, Some(vocab)) => {
                    if vocab.len() < 2 {
                        return Err(Error::InvalidSchema(format!(
                            "categorical column {:?} needs at least 2 categories",
                            col.name
                        )));
                    }
                    let mut cats = HashSet::new();
                    for c in vocab {
                        if !cats.insert(c.as_str()) {
                            return Err(Error::InvalidSchema(format!(
                                "duplicate category {:?} in column {:?}",
                                c, col.name
                            )));
                        }
                    }
                }
                (ColumnKind::Continuous, None) => {}
            }
        }
        let target = self
            .columns
            .iter()
            .find(|c| c.name == self.target)
            .ok_or_else(|| Error::TargetNotFound(self.target.clone()))?;
        if target.kind != ColumnKind::Categorical {
            return Err(Error::InvalidSchema(format!(
                "target column {:?} must be categorical",
                self.target
            )));
        }
        Ok(())
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    pub fn target_index(&self) -> usize {
        self.column_index(&self.target)
            .expect("validated schema always contains its target")
    }

    pub fn column_names(&self) -> Vec<String> {
        self.columns.iter().map(|c| c.name.clone()).collect()
    }

    /// Returns a copy with columns rearranged to `order` (a permutation of
    /// the column names).
    pub fn permuted(&self, order: &[String]) -> Result<TableSchema> {
        let perm = permutation_indices(self, order)?;
        let columns = perm.iter().map(|&i| self.columns[i].clone()).collect();
        TableSchema::new(columns, self.target.clone())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        fs::write(path.as_ref(), text).map_err(|e| Error::io(path.as_ref(), e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<TableSchema> {
        let text = fs::read_to_string(path.as_ref()).map_err(|e| Error::io(path.as_ref(), e))?;
        let schema: TableSchema = serde_json::from_str(&text)?;
        schema.validate()?;
        Ok(schema)
    }
}

/// Maps `order` (column names) to indices into `schema`, requiring a bijection.
pub(crate) fn permutation_indices(schema: &TableSchema, order: &[String]) -> Result<Vec<usize>> {
    if order.len() != schema.columns.len() {
        return Err(Error::InvalidSchema(format!(
            "order lists {} columns, schema has {}",
            order.len(),
            schema.columns.len()
        )));
    }
    let mut perm = Vec::with_capacity(order.len());
    let mut used = HashSet::new();
    for name in order {
        let idx = schema
            .column_index(name)
            .ok_or_else(|| Error::InvalidSchema(format!("unknown column {:?} in order", name)))?;
        if !used.insert(idx) {
            return Err(Error::InvalidSchema(format!(
                "column {:?} appears twice in order",
                name
            )));
        }
        perm.push(idx);
    }
    Ok(perm)
}

/// A single cell value on the raw scale.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Number(f64),
    Category(String),
}

impl Cell {
    pub fn as_number(&self) -> Option<f64> {
        match self {
            Cell::Number(v) => Some(*v),
            Cell::Category(_) => None,
        }
    }

    pub fn as_token(&self) -> Option<&str> {
        match self {
            Cell::Category(t) => Some(t),
            Cell::Number(_) => None,
        }
    }
}

/// Schema plus rows, with every cell validated against the schema.
#[derive(Debug, Clone, PartialEq)]
pub struct RawTable {
    pub schema: TableSchema,
    pub rows: Vec<Vec<Cell>>,
}

impl RawTable {
    pub fn new(schema: TableSchema, rows: Vec<Vec<Cell>>) -> Result<Self> {
        schema.validate()?;
        for (r, row) in rows.iter().enumerate() {
            validate_row(&schema, row, r)?;
        }
        Ok(RawTable { schema, rows })
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_columns(&self) -> usize {
        self.schema.columns.len()
    }

    /// Values of a continuous column.
    pub fn numeric_column(&self, idx: usize) -> Vec<f64> {
        debug_assert_eq!(self.schema.columns[idx].kind, ColumnKind::Continuous);
        self.rows
            .iter()
            .map(|row| row[idx].as_number().expect("validated continuous cell"))
            .collect()
    }

    /// Tokens of a categorical column.
    pub fn token_column(&self, idx: usize) -> Vec<&str> {
        debug_assert_eq!(self.schema.columns[idx].kind, ColumnKind::Categorical);
        self.rows
            .iter()
            .map(|row| row[idx].as_token().expect("validated categorical cell"))
            .collect()
    }

    /// Returns a copy with columns rearranged to `order`.
    pub fn permuted(&self, order: &[String]) -> Result<RawTable> {
        let perm = permutation_indices(&self.schema, order)?;
        let schema = self.schema.permuted(order)?;
        let rows = self
            .rows
            .iter()
            .map(|row| perm.iter().map(|&i| row[i].clone()).collect())
            .collect();
        Ok(RawTable { schema, rows })
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut writer = csv::Writer::from_path(path.as_ref())
            .map_err(|e| Error::io(path.as_ref(), std::io::Error::other(e)))?;
        writer.write_record(self.schema.columns.iter().map(|c| c.name.as_str()))?;
        for row in &self.rows {
            let record: Vec<String> = row
                .iter()
                .map(|cell| match cell {
                    // `Display` for f64 prints the shortest string that
                    // parses back to the same value.
                    Cell::Number(v) => format!("{v}"),
                    Cell::Category(t) => t.clone(),
                })
                .collect();
            writer.write_record(&record)?;
        }
        writer.flush().map_err(|e| Error::io(path.as_ref(), e))?;
        Ok(())
    }
}

fn validate_row(schema: &TableSchema, row: &[Cell], row_idx: usize) -> Result<()> {
    if row.len() != schema.columns.len() {
        return Err(Error::ShapeMismatch(format!(
            "row {} has {} cells, schema has {} columns",
            row_idx,
            row.len(),
            schema.columns.len()
        )));
    }
    for (col, cell) in schema.columns.iter().zip(row) {
        match (col.kind, cell) {
            (ColumnKind::Continuous, Cell::Number(v)) => {
                if !v.is_finite() {
                    return Err(Error::NonNumericCell {
                        column: col.name.clone(),
                        row: row_idx,
                        token: v.to_string(),
                    });
                }
            }
            (ColumnKind::Categorical, Cell::Category(t)) => {
                let vocab = col.vocabulary().expect("validated categorical column");
                if !vocab.iter().any(|c| c == t) {
                    return Err(Error::UnknownCategory {
                        column: col.name.clone(),
                        row: row_idx,
                        token: t.clone(),
                    });
                }
            }
            (ColumnKind::Continuous, Cell::Category(t)) => {
                return Err(Error::NonNumericCell {
                    column: col.name.clone(),
                    row: row_idx,
                    token: t.clone(),
                });
            }
            (ColumnKind::Categorical, Cell::Number(v)) => {
                return Err(Error::UnknownCategory {
                    column: col.name.clone(),
                    row: row_idx,
                    token: v.to_string(),
                });
            }
        }
    }
    Ok(())
}

/// Loads a CSV file against a declared schema.
///
/// The header must contain exactly the schema's column names (any order);
/// rows come back in schema column order.
pub fn load_csv(path: impl AsRef<Path>, schema: &TableSchema) -> Result<RawTable> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(file);

    let headers: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    let expected: HashSet<&str> = schema.columns.iter().map(|c| c.name.as_str()).collect();
    let found: HashSet<&str> = headers.iter().map(String::as_str).collect();
    if expected != found || headers.len() != schema.columns.len() {
        return Err(Error::HeaderMismatch {
            expected: schema.column_names(),
            found: headers,
        });
    }
    // file column index for each schema column
    let source_idx: Vec<usize> = schema
        .columns
        .iter()
        .map(|c| headers.iter().position(|h| h == &c.name).unwrap())
        .collect();

    let mut rows = Vec::new();
    for (row_idx, record) in reader.records().enumerate() {
        let record = record?;
        let mut row = Vec::with_capacity(schema.columns.len());
        for (col, &src) in schema.columns.iter().zip(&source_idx) {
            let token = record.get(src).unwrap_or("").trim();
            row.push(parse_cell(col, token, row_idx)?);
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::EmptyTable);
    }
    RawTable::new(schema.clone(), rows)
}

fn parse_cell(col: &ColumnSpec, token: &str, row_idx: usize) -> Result<Cell> {
    if token.is_empty() {
        return Err(Error::MissingValue {
            column: col.name.clone(),
            row: row_idx,
        });
    }
    match col.kind {
        ColumnKind::Continuous => {
            let value: f64 = token.parse().map_err(|_| Error::NonNumericCell {
                column: col.name.clone(),
                row: row_idx,
                token: token.to_string(),
            })?;
            if !value.is_finite() {
                return Err(Error::NonNumericCell {
                    column: col.name.clone(),
                    row: row_idx,
                    token: token.to_string(),
                });
            }
            Ok(Cell::Number(value))
        }
        ColumnKind::Categorical => {
            let vocab = col.vocabulary().expect("categorical column has vocabulary");
            if !vocab.iter().any(|c| c == token) {
                return Err(Error::UnknownCategory {
                    column: col.name.clone(),
                    row: row_idx,
                    token: token.to_string(),
                });
            }
            Ok(Cell::Category(token.to_string()))
        }
    }
}

/// Infers a schema from a CSV file.
///
/// A column is continuous when every cell parses as a finite number and the
/// column has more than `categorical_threshold` distinct values; otherwise it
/// is categorical with the distinct tokens in first-appearance order. The
/// target column is always categorical.
pub fn infer_schema(
    path: impl AsRef<Path>,
    target: &str,
    categorical_threshold: usize,
) -> Result<TableSchema> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(file);

    let headers: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    if !headers.iter().any(|h| h == target) {
        return Err(Error::TargetNotFound(target.to_string()));
    }

    let n_cols = headers.len();
    let mut distinct: Vec<Vec<String>> = vec![Vec::new(); n_cols];
    let mut seen: Vec<HashSet<String>> = vec![HashSet::new(); n_cols];
    let mut all_numeric = vec![true; n_cols];
    let mut n_rows = 0usize;

    for (row_idx, record) in reader.records().enumerate() {
        let record = record?;
        n_rows += 1;
        for col in 0..n_cols {
            let token = record.get(col).unwrap_or("").trim();
            if token.is_empty() {
                return Err(Error::MissingValue {
                    column: headers[col].clone(),
                    row: row_idx,
                });
            }
            if seen[col].insert(token.to_string()) {
                distinct[col].push(token.to_string());
            }
            if all_numeric[col] && token.parse::<f64>().map_or(true, |v| !v.is_finite()) {
                all_numeric[col] = false;
            }
        }
    }
    if n_rows == 0 {
        return Err(Error::EmptyTable);
    }

    let mut columns = Vec::with_capacity(n_cols);
    for col in 0..n_cols {
        if distinct[col].len() < 2 {
            return Err(Error::DegenerateColumn(headers[col].clone()));
        }
        let continuous = headers[col] != target
            && all_numeric[col]
            && distinct[col].len() > categorical_threshold;
        if continuous {
            columns.push(ColumnSpec::continuous(headers[col].clone()));
        } else {
            columns.push(ColumnSpec::categorical(
                headers[col].clone(),
                std::mem::take(&mut distinct[col]),
            ));
        }
    }
    TableSchema::new(columns, target)
}

/// Stratified train/test split, deterministic for a fixed seed.
///
/// Within every target class, `floor(count * test_fraction)` rows go to the
/// test side (rounding toward training). Returns `(train, test)`.
pub fn split(table: &RawTable, test_fraction: f64, seed: u64) -> Result<(RawTable, RawTable)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::BadFraction(test_fraction));
    }
    if table.rows.is_empty() {
        return Err(Error::EmptyTable);
    }
    let target_idx = table.schema.target_index();
    let vocab = table.schema.columns[target_idx]
        .vocabulary()
        .expect("target is categorical")
        .to_vec();

    let mut by_class: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, row) in table.rows.iter().enumerate() {
        let token = row[target_idx].as_token().expect("categorical target cell");
        let class = vocab.iter().position(|c| c == token).expect("cell in vocabulary");
        by_class.entry(class).or_default().push(i);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train_idx = Vec::new();
    let mut test_idx = Vec::new();
    for (class, indices) in &by_class {
        if indices.len() < 2 {
            return Err(Error::Stratification(format!(
                "target class {:?} has a single row",
                vocab[*class]
            )));
        }
        let mut shuffled = indices.clone();
        shuffled.shuffle(&mut rng);
        let n_test = (indices.len() as f64 * test_fraction).floor() as usize;
        test_idx.extend_from_slice(&shuffled[..n_test]);
        train_idx.extend_from_slice(&shuffled[n_test..]);
    }
    train_idx.sort_unstable();
    test_idx.sort_unstable();

    let pick = |idx: &[usize]| -> Vec<Vec<Cell>> {
        idx.iter().map(|&i| table.rows[i].clone()).collect()
    };
    let train = RawTable {
        schema: table.schema.clone(),
        rows: pick(&train_idx),
    };
    let test = RawTable {
        schema: table.schema.clone(),
        rows: pick(&test_idx),
    };
    Ok((train, test))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn toy_schema() -> TableSchema {
        TableSchema::new(
            vec![
                ColumnSpec::continuous("age"),
                ColumnSpec::categorical("job", vec!["clerk".into(), "smith".into()]),
                ColumnSpec::categorical("y", vec!["no".into(), "yes".into()]),
            ],
            "y",
        )
        .unwrap()
    }

    fn write_temp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f.flush().unwrap();
        f
    }

    #[test]
    fn load_matching_csv() {
        let f = write_temp("age,job,y\n31,clerk,no\n42,smith,yes\n25,clerk,yes\n");
        let table = load_csv(f.path(), &toy_schema()).unwrap();
        assert_eq!(table.n_rows(), 3);
        assert_eq!(table.rows[0][0], Cell::Number(31.0));
        assert_eq!(table.rows[1][1], Cell::Category("smith".into()));
    }

    #[test]
    fn load_reorders_to_schema_order() {
        let f = write_temp("y,age,job\nno,31,clerk\nyes,42,smith\n");
        let table = load_csv(f.path(), &toy_schema()).unwrap();
        assert_eq!(table.schema.columns[0].name, "age");
        assert_eq!(table.rows[0][0], Cell::Number(31.0));
        assert_eq!(table.rows[0][2], Cell::Category("no".into()));
    }

    #[test]
    fn unknown_category_names_column_and_row() {
        let f = write_temp("age,job,y\n31,clerk,no\n42,???,yes\n");
        let err = load_csv(f.path(), &toy_schema()).unwrap_err();
        match err {
            Error::UnknownCategory { column, row, token } => {
                assert_eq!(column, "job");
                assert_eq!(row, 1);
                assert_eq!(token, "???");
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn header_mismatch_rejected() {
        let f = write_temp("age,occupation,y\n31,clerk,no\n");
        assert!(matches!(
            load_csv(f.path(), &toy_schema()),
            Err(Error::HeaderMismatch { .. })
        ));
    }

    #[test]
    fn missing_value_rejected() {
        let f = write_temp("age,job,y\n31,,no\n");
        assert!(matches!(
            load_csv(f.path(), &toy_schema()),
            Err(Error::MissingValue { .. })
        ));
    }

    #[test]
    fn empty_table_rejected() {
        let f = write_temp("age,job,y\n");
        assert!(matches!(load_csv(f.path(), &toy_schema()), Err(Error::EmptyTable)));
    }

    #[test]
    fn csv_round_trip_is_identity() {
        let f = write_temp("age,job,y\n31.25,clerk,no\n-0.125,smith,yes\n1e-7,clerk,yes\n");
        let table = load_csv(f.path(), &toy_schema()).unwrap();
        let out = tempfile::NamedTempFile::new().unwrap();
        table.write_csv(out.path()).unwrap();
        let again = load_csv(out.path(), &toy_schema()).unwrap();
        assert_eq!(table, again);
    }

    #[test]
    fn infer_binary_integers_as_categorical() {
        let rows: String = (0..30).map(|i| format!("{},{}\n", i % 2, i % 3)).collect();
        let f = write_temp(&format!("flag,y\n{rows}"));
        let schema = infer_schema(f.path(), "y", DEFAULT_CATEGORICAL_THRESHOLD).unwrap();
        assert_eq!(schema.columns[0].kind, ColumnKind::Categorical);
        // first-appearance order
        assert_eq!(
            schema.columns[0].vocabulary().unwrap(),
            &["0".to_string(), "1".to_string()]
        );
    }

    #[test]
    fn infer_many_distinct_ints_as_continuous() {
        let rows: String = (0..50).map(|i| format!("{},{}\n", i, i % 2)).collect();
        let f = write_temp(&format!("v,y\n{rows}"));
        let schema = infer_schema(f.path(), "y", 20).unwrap();
        assert_eq!(schema.columns[0].kind, ColumnKind::Continuous);
    }

    #[test]
    fn infer_rejects_degenerate_column() {
        let f = write_temp("v,y\n1,a\n1,b\n1,a\n");
        assert!(matches!(
            infer_schema(f.path(), "y", 20),
            Err(Error::DegenerateColumn(c)) if c == "v"
        ));
    }

    #[test]
    fn infer_missing_target_errors() {
        let f = write_temp("v,y\n1,a\n2,b\n");
        assert!(matches!(
            infer_schema(f.path(), "z", 20),
            Err(Error::TargetNotFound(_))
        ));
    }

    #[test]
    fn split_counts_stratified() {
        let mut rows = Vec::new();
        for i in 0..100 {
            let label = if i < 50 { "no" } else { "yes" };
            rows.push(vec![
                Cell::Number(i as f64),
                Cell::Category("clerk".into()),
                Cell::Category(label.into()),
            ]);
        }
        let table = RawTable::new(toy_schema(), rows).unwrap();
        let (train, test) = split(&table, 0.2, 7).unwrap();
        assert_eq!(train.n_rows(), 80);
        assert_eq!(test.n_rows(), 20);
        let count = |t: &RawTable, label: &str| {
            t.rows
                .iter()
                .filter(|r| r[2] == Cell::Category(label.into()))
                .count()
        };
        assert_eq!(count(&train, "no"), 40);
        assert_eq!(count(&train, "yes"), 40);
        assert_eq!(count(&test, "no"), 10);
        assert_eq!(count(&test, "yes"), 10);
    }

    #[test]
    fn split_deterministic_under_seed() {
        let mut rows = Vec::new();
        for i in 0..40 {
            let label = if i % 2 == 0 { "no" } else { "yes" };
            rows.push(vec![
                Cell::Number(i as f64),
                Cell::Category("clerk".into()),
                Cell::Category(label.into()),
            ]);
        }
        let table = RawTable::new(toy_schema(), rows).unwrap();
        let (a1, b1) = split(&table, 0.25, 99).unwrap();
        let (a2, b2) = split(&table, 0.25, 99).unwrap();
        assert_eq!(a1, a2);
        assert_eq!(b1, b2);
    }

    #[test]
    fn split_single_row_class_errors() {
        let rows = vec![
            vec![
                Cell::Number(1.0),
                Cell::Category("clerk".into()),
                Cell::Category("no".into()),
            ],
            vec![
                Cell::Number(2.0),
                Cell::Category("smith".into()),
                Cell::Category("yes".into()),
            ],
        ];
        let table = RawTable::new(toy_schema(), rows).unwrap();
        assert!(matches!(
            split(&table, 0.5, 0),
            Err(Error::Stratification(_))
        ));
    }

    #[test]
    fn schema_json_round_trip() {
        let schema = toy_schema();
        let f = tempfile::NamedTempFile::new().unwrap();
        schema.save(f.path()).unwrap();
        assert_eq!(TableSchema::load(f.path()).unwrap(), schema);
    }

    #[test]
    fn schema_rejects_two_targets_impossible_but_noncategorical_target() {
        let err = TableSchema::new(
            vec![
                ColumnSpec::continuous("age"),
                ColumnSpec::categorical("y", vec!["a".into(), "b".into()]),
            ],
            "age",
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvalidSchema(_)));
    }
}
