//! Labelled datasets: CSV ingestion, twonorm synthesis, standardization,
//! variance-ordered feature selection and balanced stratification.

use std::collections::BTreeSet;
use std::path::Path;

use log::warn;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::feature_map::DataPoint;
use crate::stats;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Preprocessing {
    pub centered: bool,
    pub standardized: bool,
}

/// Row-major feature matrix with binary labels.
///
/// `variances` holds each column's population variance as first observed
/// (before any standardization) and drives feature ordering.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub id: String,
    pub feature_names: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub labels: Vec<u8>,
    pub variances: Vec<f64>,
    pub preprocessing: Preprocessing,
}

/// Canonical JSON description of a dataset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub id: String,
    pub m: usize,
    pub n_features: usize,
    pub class_counts: [usize; 2],
    pub preprocessing: Preprocessing,
}

fn column(rows: &[Vec<f64>], j: usize) -> Vec<f64> {
    rows.iter().map(|r| r[j]).collect()
}

impl Dataset {
    /// Builds a dataset, recording the raw column variances.
    pub fn new(id: impl Into<String>, feature_names: Vec<String>, rows: Vec<Vec<f64>>, labels: Vec<u8>) -> Result<Self> {
        let id = id.into();
        if rows.len() != labels.len() {
            return Err(Error::Dataset(format!("{} rows but {} labels", rows.len(), labels.len())));
        }
        let d = feature_names.len();
        for (i, r) in rows.iter().enumerate() {
            if r.len() != d {
                return Err(Error::Dataset(format!("row {i} has {} features, expected {d}", r.len())));
            }
            if let Some(j) = r.iter().position(|v| !v.is_finite()) {
                return Err(Error::Dataset(format!("row {i}, feature {:?} is not finite", feature_names[j])));
            }
        }
        if let Some(l) = labels.iter().find(|&&l| l > 1) {
            return Err(Error::Dataset(format!("label {l} is not binary")));
        }
        let variances = if rows.is_empty() {
            vec![0.0; d]
        } else {
            (0..d).map(|j| stats::std_dev(&column(&rows, j)).powi(2)).collect()
        };
        Ok(Self {
            id,
            feature_names,
            rows,
            labels,
            variances,
            preprocessing: Preprocessing::default(),
        })
    }

    pub fn m(&self) -> usize {
        self.rows.len()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn class_counts(&self) -> [usize; 2] {
        let ones = self.labels.iter().filter(|&&l| l == 1).count();
        [self.labels.len() - ones, ones]
    }

    pub fn points(&self) -> Result<Vec<DataPoint>> {
        self.rows.iter().map(|r| DataPoint::new(r.clone())).collect()
    }

    pub fn summary(&self) -> DatasetSummary {
        DatasetSummary {
            id: self.id.clone(),
            m: self.m(),
            n_features: self.n_features(),
            class_counts: self.class_counts(),
            preprocessing: self.preprocessing,
        }
    }

    fn with_columns(&self, cols: &[usize]) -> Self {
        Self {
            id: self.id.clone(),
            feature_names: cols.iter().map(|&j| self.feature_names[j].clone()).collect(),
            rows: self.rows.iter().map(|r| cols.iter().map(|&j| r[j]).collect()).collect(),
            labels: self.labels.clone(),
            variances: cols.iter().map(|&j| self.variances[j]).collect(),
            preprocessing: self.preprocessing,
        }
    }

    fn with_rows(&self, id: String, idx: &[usize]) -> Self {
        Self {
            id,
            feature_names: self.feature_names.clone(),
            rows: idx.iter().map(|&i| self.rows[i].clone()).collect(),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
            variances: self.variances.clone(),
            preprocessing: self.preprocessing,
        }
    }
}

/// Reads a CSV with a header row. Labels may be `0`/`1` or any two distinct
/// strings, mapped to 0 and 1 in lexicographic order.
pub fn load_csv(path: impl AsRef<Path>, label_column: &str) -> Result<Dataset> {
    let path = path.as_ref();
    let mut reader = csv::Reader::from_path(path)?;
    let headers = reader.headers()?.clone();
    let label_idx = headers
        .iter()
        .position(|h| h.trim() == label_column)
        .ok_or_else(|| Error::Dataset(format!("label column {label_column:?} not found in {}", path.display())))?;
    let names: Vec<String> = headers
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != label_idx)
        .map(|(_, h)| h.trim().to_string())
        .collect();
    let mut rows = Vec::new();
    let mut raw_labels = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec?;
        let mut row = Vec::with_capacity(names.len());
        for (j, field) in rec.iter().enumerate() {
            if j == label_idx {
                raw_labels.push(field.trim().to_string());
                continue;
            }
            let v: f64 = field.trim().parse().map_err(|_| {
                Error::Dataset(format!("line {}: value {field:?} in column {:?} is not numeric", i + 2, &headers[j]))
            })?;
            if !v.is_finite() {
                return Err(Error::Dataset(format!("line {}: non-finite value in column {:?}", i + 2, &headers[j])));
            }
            row.push(v);
        }
        rows.push(row);
    }
    let classes: BTreeSet<&str> = raw_labels.iter().map(String::as_str).collect();
    if classes.len() > 2 {
        return Err(Error::Dataset(format!("labels are not binary: {classes:?}")));
    }
    let classes: Vec<&str> = classes.into_iter().collect();
    let labels = raw_labels.iter().map(|l| (classes.len() == 2 && l == classes[1]) as u8).collect();
    let id = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    Dataset::new(id, names, rows, labels)
}

/// Twonorm: two unit-variance Gaussians centred at `±(a, …, a)` with
/// `a = 2/√n_features`; class 1 sits at `+a`. Classes are balanced and the
/// row order is shuffled.
pub fn generate_twonorm(m: usize, n_features: usize, seed: u64) -> Result<Dataset> {
    if m == 0 || m % 2 == 1 {
        return Err(Error::Dataset(format!("twonorm needs a positive even m, got {m}")));
    }
    if n_features == 0 {
        return Err(Error::Dataset("twonorm needs at least one feature".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut labels: Vec<u8> = (0..m).map(|i| (i % 2) as u8).collect();
    labels.shuffle(&mut rng);
    let a = 2.0 / (n_features as f64).sqrt();
    let rows = labels
        .iter()
        .map(|&l| {
            let centre = if l == 1 { a } else { -a };
            (0..n_features)
                .map(|_| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    centre + z
                })
                .collect()
        })
        .collect();
    let names = (0..n_features).map(|j| format!("x{j}")).collect();
    Dataset::new(format!("twonorm-m{m}-seed{seed}"), names, rows, labels)
}

/// Centres every feature and scales it to unit population standard
/// deviation. Constant features are dropped.
pub fn preprocess(ds: &Dataset) -> Result<Dataset> {
    if ds.m() < 2 {
        return Err(Error::InsufficientData(format!("preprocessing needs m ≥ 2, got {}", ds.m())));
    }
    let mut keep = Vec::new();
    let mut moments = Vec::new();
    for j in 0..ds.n_features() {
        let col = column(&ds.rows, j);
        let mu = stats::mean(&col);
        let sd = stats::std_dev(&col);
        if sd <= 1e-12 * (1.0 + mu.abs()) {
            warn!("dropping zero-variance feature {:?}", ds.feature_names[j]);
            continue;
        }
        keep.push(j);
        moments.push((mu, sd));
    }
    if keep.is_empty() {
        return Err(Error::Dataset("every feature has zero variance".into()));
    }
    let mut out = ds.with_columns(&keep);
    for row in &mut out.rows {
        for (v, &(mu, sd)) in row.iter_mut().zip(&moments) {
            *v = (*v - mu) / sd;
        }
    }
    out.preprocessing = Preprocessing {
        centered: true,
        standardized: true,
    };
    Ok(out)
}

/// Keeps the `n` features of largest recorded variance, in descending
/// order; ties keep the original column order.
pub fn select_features(ds: &Dataset, n: usize) -> Result<Dataset> {
    if n == 0 || n > ds.n_features() {
        return Err(Error::Config(format!(
            "cannot select {n} features from a dataset with {}",
            ds.n_features()
        )));
    }
    let mut order: Vec<usize> = (0..ds.n_features()).collect();
    order.sort_by(|&a, &b| ds.variances[b].total_cmp(&ds.variances[a]));
    Ok(ds.with_columns(&order[..n]))
}

/// Splits into disjoint class-balanced subsets of `subset_size` rows. Rows
/// are shuffled within each class; rows that do not fill a whole subset are
/// dropped.
pub fn stratify(ds: &Dataset, subset_size: usize, seed: u64) -> Result<Vec<Dataset>> {
    if subset_size == 0 || subset_size % 2 == 1 {
        return Err(Error::Dataset(format!("subset size must be positive and even, got {subset_size}")));
    }
    let half = subset_size / 2;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut by_class: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
    for (i, &l) in ds.labels.iter().enumerate() {
        by_class[l as usize].push(i);
    }
    for c in &mut by_class {
        c.shuffle(&mut rng);
    }
    let k = by_class[0].len().min(by_class[1].len()) / half;
    if k == 0 {
        return Err(Error::Dataset(format!(
            "class counts {:?} too small for balanced subsets of {subset_size}",
            ds.class_counts()
        )));
    }
    let used = k * subset_size;
    if used < ds.m() {
        warn!("stratification drops {} of {} rows", ds.m() - used, ds.m());
    }
    Ok((0..k)
        .map(|s| {
            let mut idx: Vec<usize> = by_class[0][s * half..(s + 1) * half].to_vec();
            idx.extend_from_slice(&by_class[1][s * half..(s + 1) * half]);
            idx.sort_unstable();
            ds.with_rows(format!("{}-subset{s}", ds.id), &idx)
        })
        .collect())
}
