//! UCI dataset ingestion, normalization and random splits.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DatasetName {
    BreastCancer,
    HeartDisease,
    Ionosphere,
    Sonar,
}

/// Column layout of one raw file.
struct ColumnMap {
    file: &'static str,
    /// Leading columns that are not features, such as a sample id.
    skip: usize,
    /// Raw label value mapped to `+1`; everything in `negative` maps to `-1`.
    positive: &'static str,
    negative: &'static str,
}

impl DatasetName {
    pub const ALL: [DatasetName; 4] =
        [DatasetName::BreastCancer, DatasetName::HeartDisease, DatasetName::Ionosphere, DatasetName::Sonar];

    pub fn as_str(self) -> &'static str {
        match self {
            DatasetName::BreastCancer => "breast-cancer",
            DatasetName::HeartDisease => "heart-disease",
            DatasetName::Ionosphere => "ionosphere",
            DatasetName::Sonar => "sonar",
        }
    }

    fn columns(self) -> ColumnMap {
        match self {
            DatasetName::BreastCancer => {
                ColumnMap { file: "breast-cancer-wisconsin.data", skip: 1, positive: "4", negative: "2" }
            }
            DatasetName::HeartDisease => {
                ColumnMap { file: "heart.dat", skip: 0, positive: "2", negative: "1" }
            }
            DatasetName::Ionosphere => {
                ColumnMap { file: "ionosphere.data", skip: 0, positive: "g", negative: "b" }
            }
            DatasetName::Sonar => ColumnMap { file: "sonar.all-data", skip: 0, positive: "M", negative: "R" },
        }
    }

    /// `$OGAPROX_DATA/<file>`, with `data/` when the variable is unset.
    pub fn default_path(self) -> PathBuf {
        let dir = std::env::var_os("OGAPROX_DATA").map(PathBuf::from).unwrap_or_else(|| PathBuf::from("data"));
        dir.join(self.columns().file)
    }

    pub fn file_name(self) -> &'static str {
        self.columns().file
    }
}

impl FromStr for DatasetName {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "breast-cancer" | "breast" => Ok(DatasetName::BreastCancer),
            "heart-disease" | "heart" => Ok(DatasetName::HeartDisease),
            "ionosphere" | "iono" => Ok(DatasetName::Ionosphere),
            "sonar" => Ok(DatasetName::Sonar),
            _ => Err(HarnessError::UnknownDataset(s.to_string())),
        }
    }
}

impl std::fmt::Display for DatasetName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Group structure on the heart-disease data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Grouping {
    None,
    /// Column 1: 0 female, 1 male.
    Sex,
    /// Column 0 in bands `< 50`, `[50, 60)`, `>= 60`.
    Age,
}

impl FromStr for Grouping {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "none" => Ok(Grouping::None),
            "sex" => Ok(Grouping::Sex),
            "age" => Ok(Grouping::Age),
            _ => Err(format!("unknown grouping `{s}` (none, sex, age)")),
        }
    }
}

impl Grouping {
    pub fn names(self) -> &'static [&'static str] {
        match self {
            Grouping::None => &["all"],
            Grouping::Sex => &["female", "male"],
            Grouping::Age => &["age_lt50", "age_50to59", "age_ge60"],
        }
    }
}

#[derive(Debug, Clone)]
pub struct Dataset {
    pub name: DatasetName,
    /// Z-scored features, one sample per row, constant columns removed.
    pub features: DMatrix<f64>,
    pub labels: DVector<f64>,
    /// Features before normalization, all columns kept.
    pub raw: DMatrix<f64>,
    pub dropped_rows: usize,
    pub dropped_columns: Vec<usize>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Group index per sample; heart-disease only unless `grouping` is `None`.
    pub fn groups(&self, grouping: Grouping) -> Result<Vec<usize>> {
        if grouping != Grouping::None && self.name != DatasetName::HeartDisease {
            return Err(HarnessError::value("grouping", format!("{} has no {grouping:?} column", self.name)));
        }
        Ok((0..self.len())
            .map(|i| match grouping {
                Grouping::None => 0,
                Grouping::Sex => usize::from(self.raw[(i, 1)] != 0.0),
                Grouping::Age => {
                    let age = self.raw[(i, 0)];
                    if age < 50.0 {
                        0
                    } else if age < 60.0 {
                        1
                    } else {
                        2
                    }
                }
            })
            .collect())
    }
}

fn is_missing(field: &str) -> bool {
    field.is_empty() || field == "?"
}

/// Reads a raw UCI file; rows with a missing value are dropped. The label is
/// the last column and the feature count is taken from the first row, so
/// copies with constant columns already removed load unchanged.
pub fn load_dataset(name: DatasetName, path: &Path) -> Result<Dataset> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    let delimiter = match text.lines().find(|l| !l.trim().is_empty()) {
        Some(l) if !l.contains(',') => b' ',
        _ => b',',
    };
    let map = name.columns();
    let mut width = 0;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .delimiter(delimiter)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut labels = Vec::new();
    let mut dropped = 0;
    for (r, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| HarnessError::Csv { path: path.to_path_buf(), source: e })?;
        let fields: Vec<&str> = rec.iter().filter(|f| delimiter == b',' || !f.is_empty()).collect();
        if fields.iter().all(|f| f.is_empty()) {
            continue;
        }
        let perr = |column: usize, message: String| HarnessError::Parse { path: path.to_path_buf(), row: r + 1, column, message };
        if width == 0 {
            width = fields.len();
            if width < map.skip + 2 {
                return Err(perr(width, format!("need at least {} columns", map.skip + 2)));
            }
        }
        if fields.len() != width {
            return Err(perr(fields.len(), format!("expected {width} columns, found {}", fields.len())));
        }
        if fields.iter().any(|f| is_missing(f)) {
            dropped += 1;
            continue;
        }
        let mut row = Vec::with_capacity(width - map.skip - 1);
        for (j, f) in fields[map.skip..width - 1].iter().enumerate() {
            let v: f64 = f.parse().map_err(|_| perr(map.skip + j + 1, format!("`{f}` is not a number")))?;
            row.push(v);
        }
        let raw_label = fields[width - 1];
        let label = if raw_label == map.positive {
            1.0
        } else if raw_label == map.negative {
            -1.0
        } else {
            return Err(perr(width, format!("unknown label `{raw_label}`")));
        };
        rows.push(row);
        labels.push(label);
    }
    if rows.is_empty() {
        return Err(HarnessError::Parse { path: path.to_path_buf(), row: 0, column: 0, message: "no complete rows".into() });
    }
    let raw = DMatrix::from_fn(rows.len(), width - map.skip - 1, |i, j| rows[i][j]);
    let (features, dropped_columns) = zscore(&raw);
    for &j in &dropped_columns {
        log::warn!("{}: column {} is constant, dropped before normalization", name, j + map.skip + 1);
    }
    Ok(Dataset { name, features, labels: DVector::from_vec(labels), raw, dropped_rows: dropped, dropped_columns })
}

/// Column-wise zero mean and unit (population) standard deviation;
/// constant columns are removed and their indices returned.
pub fn zscore(raw: &DMatrix<f64>) -> (DMatrix<f64>, Vec<usize>) {
    let n = raw.nrows() as f64;
    let mut keep = Vec::new();
    let mut dropped = Vec::new();
    let mut stats = Vec::new();
    for j in 0..raw.ncols() {
        let col = raw.column(j);
        let mean = col.sum() / n;
        let sd = (col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
        if sd > 1e-12 * (1.0 + mean.abs()) {
            keep.push(j);
            stats.push((mean, sd));
        } else {
            dropped.push(j);
        }
    }
    let out = DMatrix::from_fn(raw.nrows(), keep.len(), |i, c| (raw[(i, keep[c])] - stats[c].0) / stats[c].1);
    (out, dropped)
}

/// Disjoint train and test index sets covering `0..n`; the training set has
/// `round(fraction n)` elements.
pub fn split_indices(n: usize, fraction: f64, rng: &mut dyn RngCore) -> (Vec<usize>, Vec<usize>) {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(rng);
    let ntr = ((fraction * n as f64).round() as usize).clamp(1, n.saturating_sub(1).max(1));
    let test = idx.split_off(ntr);
    (idx, test)
}

pub fn select_rows(m: &DMatrix<f64>, rows: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), m.ncols(), |i, j| m[(rows[i], j)])
}

pub fn select(v: &DVector<f64>, rows: &[usize]) -> DVector<f64> {
    DVector::from_iterator(rows.len(), rows.iter().map(|&i| v[i]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn zscore_drops_constant_columns() {
        let raw = DMatrix::from_row_slice(3, 3, &[1.0, 5.0, 2.0, 2.0, 5.0, 4.0, 3.0, 5.0, 9.0]);
        let (z, dropped) = zscore(&raw);
        assert_eq!(dropped, vec![1]);
        assert_eq!(z.ncols(), 2);
        for c in z.column_iter() {
            assert!(c.mean().abs() < 1e-12);
            assert!((c.variance() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn split_is_a_partition() {
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(3);
        let (tr, te) = split_indices(270, 0.8, &mut rng);
        assert_eq!(tr.len(), 216);
        let mut all: Vec<usize> = tr.iter().chain(&te).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..270).collect::<Vec<_>>());
    }

    #[test]
    fn unknown_dataset() {
        assert!(matches!("iris".parse::<DatasetName>(), Err(HarnessError::UnknownDataset(_))));
    }
}
