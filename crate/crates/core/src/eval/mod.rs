//! Cross-validation harness: AUC, stratified folds, nested grid search and
//! benchmark-table reporting. Scores are oriented so higher means impaired.

mod report;

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::stroke::Group;

pub use report::{benchmark_table, format_cell, BenchmarkTable, EvalReport};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("AUC needs both classes")]
    SingleClass,
    #[error("score and label lengths differ ({scores} vs {labels})")]
    LengthMismatch { scores: usize, labels: usize },
    #[error("need k >= 2 folds, got {0}")]
    TooFewFolds(usize),
    #[error("a class has {count} subjects, fewer than k = {k}")]
    ClassTooSmall { count: usize, k: usize },
    #[error("empty hyperparameter grid")]
    EmptyGrid,
    #[error("task {task} needs group {group}, which is absent from the data")]
    MissingGroup { task: Task, group: Group },
    #[error("training failed: {0}")]
    Trainer(String),
}

/// Mann-Whitney AUC: P(pos > neg) + ½ P(tie). `labels[i]` is true for the
/// impaired (+1) class.
pub fn auc(scores: &[f64], labels: &[bool]) -> Result<f64, EvalError> {
    if scores.len() != labels.len() {
        return Err(EvalError::LengthMismatch { scores: scores.len(), labels: labels.len() });
    }
    let n_pos = labels.iter().filter(|&&l| l).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(EvalError::SingleClass);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    // Walk tie groups in ascending order; each positive beats every negative
    // seen in earlier groups and ties with negatives in its own group.
    let mut concordant = 0.0;
    let mut neg_below = 0usize;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        let (mut p, mut n) = (0usize, 0usize);
        while j < order.len() && scores[order[j]] == scores[order[i]] {
            if labels[order[j]] {
                p += 1;
            } else {
                n += 1;
            }
            j += 1;
        }
        concordant += p as f64 * neg_below as f64 + 0.5 * p as f64 * n as f64;
        neg_below += n;
        i = j;
    }
    Ok(concordant / (n_pos as f64 * n_neg as f64))
}

/// ROC points (FPR, TPR) with one vertex per distinct threshold, from (0,0)
/// to (1,1).
pub fn roc_curve(scores: &[f64], labels: &[bool]) -> Result<Vec<(f64, f64)>, EvalError> {
    if scores.len() != labels.len() {
        return Err(EvalError::LengthMismatch { scores: scores.len(), labels: labels.len() });
    }
    let n_pos = labels.iter().filter(|&&l| l).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(EvalError::SingleClass);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut pts = vec![(0.0, 0.0)];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < order.len() {
        let s = scores[order[i]];
        while i < order.len() && scores[order[i]] == s {
            if labels[order[i]] {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        pts.push((fp as f64 / n_neg as f64, tp as f64 / n_pos as f64));
    }
    Ok(pts)
}

/// AUC by trapezoidal integration of the tie-aware ROC curve.
pub fn auc_trapezoid(scores: &[f64], labels: &[bool]) -> Result<f64, EvalError> {
    let pts = roc_curve(scores, labels)?;
    Ok(pts.windows(2).map(|w| (w[1].0 - w[0].0) * (w[1].1 + w[0].1) / 2.0).sum())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldPlan {
    pub k: usize,
    pub seed: u64,
    /// Fold index per subject.
    pub assignments: Vec<usize>,
}

impl FoldPlan {
    /// Indices of subjects in fold `f`.
    pub fn test_indices(&self, f: usize) -> Vec<usize> {
        (0..self.assignments.len()).filter(|&i| self.assignments[i] == f).collect()
    }

    pub fn train_indices(&self, f: usize) -> Vec<usize> {
        (0..self.assignments.len()).filter(|&i| self.assignments[i] != f).collect()
    }
}

/// Shuffles each class with a seeded ChaCha8 stream, then deals its members
/// round-robin over the folds. The positive class is dealt first, and the
/// negative class continues where it stopped so fold sizes stay balanced.
pub fn stratified_kfold(labels: &[bool], k: usize, seed: u64) -> Result<FoldPlan, EvalError> {
    if k < 2 {
        return Err(EvalError::TooFewFolds(k));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignments = vec![0; labels.len()];
    let mut next = 0;
    for class in [true, false] {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        if members.len() < k {
            return Err(EvalError::ClassTooSmall { count: members.len(), k });
        }
        members.shuffle(&mut rng);
        for i in members {
            assignments[i] = next % k;
            next += 1;
        }
    }
    Ok(FoldPlan { k, seed, assignments })
}

/// The four screening tasks: a clinical group (or all three) against HC.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Task {
    MidVsHc,
    VcdVsHc,
    PdVsHc,
    All3VsHc,
}

impl Task {
    pub const ALL: [Task; 4] = [Task::MidVsHc, Task::VcdVsHc, Task::PdVsHc, Task::All3VsHc];

    pub fn token(self) -> &'static str {
        match self {
            Task::MidVsHc => "MIDvsHC",
            Task::VcdVsHc => "VCDvsHC",
            Task::PdVsHc => "PDvsHC",
            Task::All3VsHc => "All3vsHC",
        }
    }

    /// Groups forming the positive (impaired) class.
    pub fn positive_groups(self) -> &'static [Group] {
        match self {
            Task::MidVsHc => &[Group::MID],
            Task::VcdVsHc => &[Group::VCD],
            Task::PdVsHc => &[Group::PD],
            Task::All3VsHc => &[Group::MID, Group::VCD, Group::PD],
        }
    }

    /// Label for a subject of `group`, or `None` if the task excludes it.
    pub fn label(self, group: Group) -> Option<bool> {
        if group == Group::HC {
            Some(false)
        } else if self.positive_groups().contains(&group) {
            Some(true)
        } else {
            None
        }
    }

    /// Indices of subjects in the task and their labels; errors when a
    /// needed group is absent.
    pub fn select(self, groups: &[Option<Group>]) -> Result<(Vec<usize>, Vec<bool>), EvalError> {
        for &g in std::iter::once(&Group::HC).chain(self.positive_groups()) {
            if !groups.contains(&Some(g)) {
                return Err(EvalError::MissingGroup { task: self, group: g });
            }
        }
        Ok(groups
            .iter()
            .enumerate()
            .filter_map(|(i, g)| g.and_then(|g| self.label(g)).map(|l| (i, l)))
            .unzip())
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for Task {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let l = s.to_ascii_lowercase();
        match l.as_str() {
            "mid" | "midvshc" => Ok(Task::MidVsHc),
            "vcd" | "vcdvshc" => Ok(Task::VcdVsHc),
            "pd" | "pdvshc" => Ok(Task::PdVsHc),
            "all3" | "all" | "all3vshc" => Ok(Task::All3VsHc),
            _ => Err(format!("unknown task `{s}` (expected mid, vcd, pd or all3)")),
        }
    }
}

/// Something trainable on a subset of rows and able to score any row.
pub trait Learner {
    type Config: Clone + fmt::Display;
    type Model;

    fn fit(&self, config: &Self::Config, rows: &[usize]) -> Result<Self::Model, EvalError>;

    /// Higher means more likely impaired.
    fn score(&self, model: &Self::Model, row: usize) -> f64;
}

/// Outer folds plus, per outer fold, the inner folds over its training set.
#[derive(Debug, Clone, PartialEq)]
pub struct NestedPlan {
    pub outer: FoldPlan,
    /// `inner[f]` assigns folds to `outer.train_indices(f)`, in that order.
    pub inner: Vec<FoldPlan>,
}

impl NestedPlan {
    pub fn new(labels: &[bool], k_outer: usize, k_inner: usize, seed: u64) -> Result<Self, EvalError> {
        let outer = stratified_kfold(labels, k_outer, seed)?;
        let inner = (0..k_outer)
            .map(|f| {
                let train = outer.train_indices(f);
                let sub: Vec<bool> = train.iter().map(|&i| labels[i]).collect();
                stratified_kfold(&sub, k_inner, inner_seed(seed, f))
            })
            .collect::<Result<_, _>>()?;
        Ok(Self { outer, inner })
    }

    /// Training rows (global indices) of inner fold `g` within outer fold `f`.
    pub fn inner_train(&self, f: usize, g: usize) -> Vec<usize> {
        let outer_train = self.outer.train_indices(f);
        self.inner[f].train_indices(g).into_iter().map(|i| outer_train[i]).collect()
    }

    pub fn inner_test(&self, f: usize, g: usize) -> Vec<usize> {
        let outer_train = self.outer.train_indices(f);
        self.inner[f].test_indices(g).into_iter().map(|i| outer_train[i]).collect()
    }
}

fn inner_seed(seed: u64, fold: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(fold as u64 + 1)
}

fn fold_auc<L: Learner>(learner: &L, model: &L::Model, rows: &[usize], labels: &[bool]) -> Result<f64, EvalError> {
    let scores: Vec<f64> = rows.iter().map(|&r| learner.score(model, r)).collect();
    let y: Vec<bool> = rows.iter().map(|&r| labels[r]).collect();
    auc(&scores, &y)
}

/// Nested cross-validation. `labels` is indexed by the learner's row ids.
/// The inner search is skipped for a one-point grid.
pub fn nested_cv<L: Learner>(
    learner: &L,
    labels: &[bool],
    grid: &[L::Config],
    plan: &NestedPlan,
    task: Task,
    method: &str,
) -> Result<EvalReport, EvalError> {
    if grid.is_empty() {
        return Err(EvalError::EmptyGrid);
    }
    let mut fold_aucs = Vec::with_capacity(plan.outer.k);
    let mut chosen = Vec::with_capacity(plan.outer.k);
    for f in 0..plan.outer.k {
        let best = if grid.len() == 1 {
            &grid[0]
        } else {
            let mut best: Option<(f64, &L::Config)> = None;
            for cfg in grid {
                let mut total = 0.0;
                for g in 0..plan.inner[f].k {
                    let model = learner.fit(cfg, &plan.inner_train(f, g))?;
                    total += fold_auc(learner, &model, &plan.inner_test(f, g), labels)?;
                }
                let mean = total / plan.inner[f].k as f64;
                if best.is_none_or(|(b, _)| mean > b) {
                    best = Some((mean, cfg));
                }
            }
            best.expect("nonempty grid").1
        };
        let model = learner.fit(best, &plan.outer.train_indices(f))?;
        fold_aucs.push(fold_auc(learner, &model, &plan.outer.test_indices(f), labels)?);
        chosen.push(best.to_string());
    }
    Ok(EvalReport::new(task, method, fold_aucs, chosen))
}

pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}
