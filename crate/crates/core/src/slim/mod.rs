//! Supersparse linear integer models: integer coefficients on binary
//! features, trained by minimizing weighted 0-1 loss plus sparsity and
//! understandability penalties.
//!
//! Sign convention: +1 is the impaired class, `score = λ0 + Σ λ_j x_j` and
//! the model predicts +1 iff `score > 0`, so a zero score is healthy.

mod sheet;
mod train;

use std::fmt;

use crate::eval::{EvalError, Learner};
use crate::features::{FeatureCatalog, FeatureVector};

pub use sheet::{parse_sheet, render, SheetError};
pub use train::{brute_force_train, feature_order, train};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SlimError {
    #[error("dataset has no examples")]
    Empty,
    #[error("dataset has no features")]
    NoFeatures,
    #[error("training data has a single class")]
    SingleClass,
    #[error("row {row}: {reason}")]
    BadRow { row: usize, reason: String },
    #[error("invalid config: {0}")]
    BadConfig(String),
    #[error("instance too large for enumeration ({0} assignments)")]
    TooLarge(f64),
    #[error("model feature `{0}` is missing from the input")]
    MissingFeature(String),
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
}

/// N×J binary design matrix with ±1 labels. The intercept column is
/// implicit.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryDataset {
    names: Vec<String>,
    x: Vec<Vec<u8>>,
    y: Vec<i8>,
}

impl BinaryDataset {
    pub fn new(names: Vec<String>, x: Vec<Vec<u8>>, y: Vec<i8>) -> Result<Self, SlimError> {
        if x.is_empty() {
            return Err(SlimError::Empty);
        }
        if names.is_empty() {
            return Err(SlimError::NoFeatures);
        }
        if x.len() != y.len() {
            return Err(SlimError::BadRow { row: x.len().min(y.len()), reason: "label count differs".into() });
        }
        for (i, (row, &label)) in x.iter().zip(&y).enumerate() {
            if row.len() != names.len() {
                return Err(SlimError::BadRow { row: i, reason: format!("{} columns, expected {}", row.len(), names.len()) });
            }
            if row.iter().any(|&v| v > 1) {
                return Err(SlimError::BadRow { row: i, reason: "entries must be 0 or 1".into() });
            }
            if label != 1 && label != -1 {
                return Err(SlimError::BadRow { row: i, reason: "labels must be +1 or -1".into() });
            }
        }
        Ok(Self { names, x, y })
    }

    /// Rows of binarized feature vectors; `labels[i]` true means impaired.
    pub fn from_vectors(vectors: &[FeatureVector], labels: &[bool]) -> Result<Self, SlimError> {
        let first = vectors.first().ok_or(SlimError::Empty)?;
        let names: Vec<String> = first.names().map(String::from).collect();
        let mut x = Vec::with_capacity(vectors.len());
        for (i, v) in vectors.iter().enumerate() {
            if !v.names().eq(names.iter().map(String::as_str)) {
                return Err(SlimError::BadRow { row: i, reason: "feature names differ from the first row".into() });
            }
            x.push(v.values().map(|b| u8::from(b != 0.0)).collect());
        }
        Self::new(names, x, labels.iter().map(|&l| if l { 1 } else { -1 }).collect())
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn rows(&self) -> &[Vec<u8>] {
        &self.x
    }

    pub fn labels(&self) -> &[i8] {
        &self.y
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn j(&self) -> usize {
        self.names.len()
    }

    /// Subset of rows, in the given order.
    pub fn subset(&self, rows: &[usize]) -> Self {
        Self {
            names: self.names.clone(),
            x: rows.iter().map(|&r| self.x[r].clone()).collect(),
            y: rows.iter().map(|&r| self.y[r]).collect(),
        }
    }

    pub fn has_both_classes(&self) -> bool {
        self.y.contains(&1) && self.y.contains(&-1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlimConfig {
    pub c_plus: f64,
    pub c_minus: f64,
    pub c0: f64,
    pub c1: f64,
    /// |λ_j| ≤ coeff_bound.
    pub coeff_bound: i32,
    /// |λ0| ≤ intercept_bound.
    pub intercept_bound: i32,
    pub max_features: usize,
    /// Understandability weight per dataset column.
    pub u: Vec<f64>,
    /// Wall-clock cap on the search. Results then depend on machine speed.
    pub time_budget_ms: Option<u64>,
    /// Cap on branch-and-bound nodes; deterministic.
    pub node_budget: Option<u64>,
}

pub const MAX_FEATURES_CAP: usize = 10;

impl SlimConfig {
    /// Defaults with unit understandability weights for `j` features.
    pub fn new(j: usize) -> Self {
        Self {
            c_plus: 1.0,
            c_minus: 1.0,
            c0: 1e-3,
            c1: 0.0,
            coeff_bound: 10,
            intercept_bound: 100,
            max_features: MAX_FEATURES_CAP,
            u: vec![1.0; j],
            time_budget_ms: None,
            node_budget: None,
        }
    }

    /// Weights looked up from the catalog by column name.
    pub fn with_catalog_weights(mut self, names: &[String], catalog: &FeatureCatalog) -> Self {
        self.u = names.iter().map(|n| catalog.get(n).map_or(1.0, |d| d.u as f64)).collect();
        self
    }

    pub fn validate(&self, j: usize) -> Result<(), SlimError> {
        let bad = |s: &str| Err(SlimError::BadConfig(s.into()));
        if !(self.c_plus > 0.0 && self.c_minus > 0.0 && self.c_plus.is_finite() && self.c_minus.is_finite()) {
            return bad("C+ and C- must be positive");
        }
        if !(self.c0 >= 0.0 && self.c1 >= 0.0 && self.c0.is_finite() && self.c1.is_finite()) {
            return bad("C0 and C1 must be nonnegative");
        }
        if self.coeff_bound < 1 || self.intercept_bound < 1 {
            return bad("coefficient and intercept bounds must be at least 1");
        }
        if self.max_features > MAX_FEATURES_CAP {
            return bad("max_features may not exceed 10");
        }
        if self.u.len() != j || self.u.iter().any(|&u| !(u > 0.0 && u.is_finite())) {
            return bad("need one positive u weight per feature");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Optimality {
    ProvenOptimal,
    BudgetBest,
}

impl fmt::Display for Optimality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Optimality::ProvenOptimal => "proven-optimal",
            Optimality::BudgetBest => "budget-best",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlimModel {
    pub names: Vec<String>,
    pub coefficients: Vec<i32>,
    pub intercept: i32,
    /// Class named on the sheet's PREDICT line.
    pub label: Option<String>,
    pub objective: Option<f64>,
    pub optimality: Option<Optimality>,
    pub config: Option<SlimConfig>,
}

pub const MODEL_HEADER: &str = "slim-model v1";
pub const INTERCEPT_ROW: &str = "__intercept__";
pub const LABEL_ROW: &str = "__label__";

impl SlimModel {
    pub fn new(names: Vec<String>, coefficients: Vec<i32>, intercept: i32) -> Self {
        Self { names, coefficients, intercept, label: None, objective: None, optimality: None, config: None }
    }

    pub fn nonzero(&self) -> usize {
        self.coefficients.iter().filter(|&&c| c != 0).count()
    }

    /// Integer score over a binarized vector; errors on absent features.
    pub fn score(&self, x: &FeatureVector) -> Result<i64, SlimError> {
        let mut s = self.intercept as i64;
        for (n, &c) in self.names.iter().zip(&self.coefficients) {
            if c == 0 {
                continue;
            }
            let v = x.get(n).ok_or_else(|| SlimError::MissingFeature(n.clone()))?;
            if v != 0.0 {
                s += c as i64;
            }
        }
        Ok(s)
    }

    /// +1 (impaired) iff the score is positive.
    pub fn predict(&self, x: &FeatureVector) -> Result<i8, SlimError> {
        Ok(if self.score(x)? > 0 { 1 } else { -1 })
    }

    /// Score of a dataset row aligned to this model's columns.
    pub fn score_row(&self, row: &[u8]) -> i64 {
        self.intercept as i64
            + self.coefficients.iter().zip(row).map(|(&c, &x)| if x != 0 { c as i64 } else { 0 }).sum::<i64>()
    }

    /// Model file text. Only nonzero coefficients are written.
    pub fn to_text(&self) -> String {
        let mut s = format!("{MODEL_HEADER}\n");
        if let Some(l) = &self.label {
            s.push_str(&format!("{LABEL_ROW}\t{l}\n"));
        }
        for (n, &c) in self.names.iter().zip(&self.coefficients) {
            if c != 0 {
                s.push_str(&format!("{n}\t{c}\n"));
            }
        }
        s.push_str(&format!("{INTERCEPT_ROW}\t{}\n", self.intercept));
        s
    }

    pub fn parse(text: &str) -> Result<Self, SlimError> {
        let bad = |line: usize, reason: &str| SlimError::Malformed { line, reason: reason.to_string() };
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end_matches('\r')));
        match lines.next() {
            Some((_, h)) if h.trim() == MODEL_HEADER => {}
            _ => return Err(bad(1, "missing `slim-model v1` header")),
        }
        let mut m = SlimModel::new(vec![], vec![], 0);
        let mut intercept = None;
        for (line, l) in lines {
            if l.trim().is_empty() {
                continue;
            }
            if intercept.is_some() {
                return Err(bad(line, "rows after the intercept"));
            }
            let (name, value) = l.split_once('\t').ok_or_else(|| bad(line, "expected `name<TAB>value`"))?;
            if name == LABEL_ROW {
                if m.label.is_some() || !m.names.is_empty() || value.trim().is_empty() {
                    return Err(bad(line, "label must come first, once"));
                }
                m.label = Some(value.trim().to_string());
                continue;
            }
            let v: i32 = value.trim().parse().map_err(|_| bad(line, "coefficient is not an integer"))?;
            if name == INTERCEPT_ROW {
                intercept = Some(v);
            } else if name.is_empty() || name.chars().any(char::is_whitespace) {
                return Err(bad(line, "bad feature name"));
            } else if m.names.iter().any(|n| n == name) {
                return Err(bad(line, "duplicate feature"));
            } else {
                m.names.push(name.to_string());
                m.coefficients.push(v);
            }
        }
        m.intercept = intercept.ok_or_else(|| bad(text.lines().count().max(1), "missing intercept row"))?;
        Ok(m)
    }
}

/// Weighted loss plus penalties, from error counts. Every objective in this
/// module goes through here so equal counts give bit-equal values.
pub fn objective_from_counts(
    false_neg: u64,
    false_pos: u64,
    n: usize,
    nonzero: usize,
    sum_u: f64,
    cfg: &SlimConfig,
) -> f64 {
    (cfg.c_plus * false_neg as f64 + cfg.c_minus * false_pos as f64) / n as f64
        + cfg.c0 * nonzero as f64
        + cfg.c1 * sum_u
}

/// Σ u_j over nonzero coefficients, summed in column order.
pub fn penalty_terms(lambda: &[i32], cfg: &SlimConfig) -> (usize, f64) {
    let mut nnz = 0;
    let mut su = 0.0;
    for (j, &l) in lambda.iter().enumerate() {
        if l != 0 {
            nnz += 1;
            su += cfg.u[j];
        }
    }
    (nnz, su)
}

/// Misclassification indicators: ψ_i = 1 iff the prediction differs from
/// y_i, so a zero score is an error for positives only.
pub fn misclassified(lambda: &[i32], intercept: i32, d: &BinaryDataset) -> Vec<bool> {
    d.x.iter()
        .zip(&d.y)
        .map(|(row, &y)| {
            let s = intercept as i64
                + lambda.iter().zip(row).map(|(&l, &x)| if x != 0 { l as i64 } else { 0 }).sum::<i64>();
            (s > 0) != (y == 1)
        })
        .collect()
}

pub fn objective(lambda: &[i32], intercept: i32, d: &BinaryDataset, cfg: &SlimConfig) -> f64 {
    let psi = misclassified(lambda, intercept, d);
    let fneg = psi.iter().zip(&d.y).filter(|(&p, &y)| p && y == 1).count() as u64;
    let fpos = psi.iter().zip(&d.y).filter(|(&p, &y)| p && y == -1).count() as u64;
    let (nnz, su) = penalty_terms(lambda, cfg);
    objective_from_counts(fneg, fpos, d.n(), nnz, su, cfg)
}

/// Hyperparameters searched by nested cross-validation; C+ is fixed at 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlimHyper {
    pub c_minus: f64,
    pub c0: f64,
    pub c1: f64,
}

impl fmt::Display for SlimHyper {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "C+=1 C-={} C0={} C1={}", self.c_minus, self.c0, self.c1)
    }
}

/// The default 27-point grid, C− outermost.
pub fn default_grid() -> Vec<SlimHyper> {
    let mut g = Vec::new();
    for c_minus in [0.5, 1.0, 2.0] {
        for c0 in [1e-4, 1e-3, 1e-2] {
            for c1 in [0.0, 1e-4, 1e-3] {
                g.push(SlimHyper { c_minus, c0, c1 });
            }
        }
    }
    g
}

/// SLIM as a cross-validation learner over one dataset.
pub struct SlimLearner<'a> {
    pub data: &'a BinaryDataset,
    /// Base config; the grid point overrides C−, C0 and C1.
    pub base: SlimConfig,
}

impl Learner for SlimLearner<'_> {
    type Config = SlimHyper;
    type Model = SlimModel;

    fn fit(&self, h: &SlimHyper, rows: &[usize]) -> Result<SlimModel, EvalError> {
        let cfg = SlimConfig { c_plus: 1.0, c_minus: h.c_minus, c0: h.c0, c1: h.c1, ..self.base.clone() };
        train(&self.data.subset(rows), &cfg).map_err(|e| match e {
            SlimError::SingleClass => EvalError::SingleClass,
            e => EvalError::Trainer(e.to_string()),
        })
    }

    fn score(&self, model: &SlimModel, row: usize) -> f64 {
        model.score_row(&self.data.x[row]) as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> BinaryDataset {
        BinaryDataset::new(
            vec!["a".into(), "b".into()],
            vec![vec![1, 0], vec![1, 1], vec![0, 0], vec![0, 1]],
            vec![1, 1, -1, -1],
        )
        .unwrap()
    }

    #[test]
    fn zero_model_objective() {
        let d = tiny();
        let cfg = SlimConfig::new(2);
        assert_eq!(objective(&[0, 0], 0, &d, &cfg), 0.5);
    }

    #[test]
    fn perfect_separator_objective() {
        let d = tiny();
        let cfg = SlimConfig { c0: 0.01, c1: 0.001, ..SlimConfig::new(2) };
        let o = objective(&[1, 0], 0, &d, &cfg);
        assert!((o - 0.011).abs() < 1e-12);
    }

    #[test]
    fn model_file_round_trip() {
        let mut m = SlimModel::new(vec!["a".into(), "b".into()], vec![-5, 3], 10);
        m.label = Some("MEMORY IMPAIRMENT DISORDER".into());
        let back = SlimModel::parse(&m.to_text()).unwrap();
        assert_eq!(back.coefficients, m.coefficients);
        assert_eq!(back.intercept, 10);
        assert_eq!(back.label, m.label);
        assert!(SlimModel::parse("slim-model v1\na\t1\n").is_err());
        assert!(SlimModel::parse("slim-model v1\na\tx\n__intercept__\t0\n").is_err());
        assert!(SlimModel::parse("nope\n__intercept__\t0\n").is_err());
    }

    #[test]
    fn dataset_validation() {
        assert!(BinaryDataset::new(vec!["a".into()], vec![vec![2]], vec![1]).is_err());
        assert!(BinaryDataset::new(vec!["a".into()], vec![vec![1]], vec![0]).is_err());
        assert!(BinaryDataset::new(vec!["a".into()], vec![], vec![]).is_err());
    }

    #[test]
    fn grid_has_27_points() {
        assert_eq!(default_grid().len(), 27);
    }
}
