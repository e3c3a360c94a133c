//! End-to-end benchmark: cohort → features → nested CV of Rouleau and the
//! two SLIM variants on every task → final models and reports.

use std::collections::BTreeMap;
use std::fmt;

use crate::eval::{benchmark_table, nested_cv, BenchmarkTable, EvalError, EvalReport, NestedPlan, Task};
use crate::features::{FeatureCatalog, FeatureError, FeatureSet, FeatureTable};
use crate::rouleau::{fit_params, GridConfig, RouleauError, RouleauGrid, RouleauInputs, RouleauLearner, RouleauParams, ScoredClock};
use crate::slim::{default_grid, render, train, BinaryDataset, SheetError, SlimConfig, SlimError, SlimHyper, SlimLearner, SlimModel};
use crate::stroke::{write_labels, write_strokes, ClockTest};
use crate::synth::{generate_dataset, preset_phenotypes, GeneratorConfig, SynthError};

/// Node budget used by the benchmark. Local search supplies the incumbent;
/// the search only gets a short deterministic look beyond it.
pub const BENCHMARK_NODE_BUDGET: u64 = 200;

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Slim(#[from] SlimError),
    #[error(transparent)]
    Rouleau(#[from] RouleauError),
    #[error(transparent)]
    Sheet(#[from] SheetError),
    #[error("feature table lacks column `{0}`")]
    MissingColumn(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Rouleau,
    SlimSimplest,
    SlimAll,
}

impl Method {
    /// Table row order.
    pub const ALL: [Method; 3] = [Method::Rouleau, Method::SlimSimplest, Method::SlimAll];

    pub fn name(self) -> &'static str {
        match self {
            Method::Rouleau => "Rouleau",
            Method::SlimSimplest => "SLIM simplest",
            Method::SlimAll => "SLIM all",
        }
    }

    /// File-name form.
    pub fn token(self) -> &'static str {
        match self {
            Method::Rouleau => "rouleau",
            Method::SlimSimplest => "slim-simplest",
            Method::SlimAll => "slim-all",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Class named on a task's scoring sheet.
pub fn sheet_label(task: Task) -> &'static str {
    match task {
        Task::MidVsHc => "MEMORY IMPAIRMENT DISORDER",
        Task::VcdVsHc => "VASCULAR COGNITIVE DISORDER",
        Task::PdVsHc => "PARKINSON'S DISEASE",
        Task::All3VsHc => "COGNITIVE IMPAIRMENT",
    }
}

#[derive(Debug, Clone)]
pub struct BenchmarkSettings {
    pub k_outer: usize,
    pub k_inner: usize,
    pub seed: u64,
    pub slim_grid: Vec<SlimHyper>,
    pub rouleau_grid: RouleauGrid,
    pub node_budget: Option<u64>,
    pub rouleau_clock: ScoredClock,
}

impl BenchmarkSettings {
    pub fn new(seed: u64) -> Self {
        Self {
            k_outer: 5,
            k_inner: 5,
            seed,
            slim_grid: default_grid(),
            rouleau_grid: RouleauGrid::default(),
            node_budget: Some(BENCHMARK_NODE_BUDGET),
            rouleau_clock: ScoredClock::Command,
        }
    }
}

/// Everything one task needs, restricted to its subjects.
#[derive(Debug, Clone)]
pub struct TaskData {
    pub task: Task,
    pub subjects: Vec<String>,
    pub labels: Vec<bool>,
    pub rouleau: Vec<RouleauInputs>,
    pub slim_all: BinaryDataset,
    pub slim_simplest: BinaryDataset,
}

fn binary_dataset(t: &FeatureTable, idx: &[usize], labels: &[bool]) -> Result<BinaryDataset, SlimError> {
    let x = idx.iter().map(|&i| t.rows[i].iter().map(|&v| u8::from(v != 0.0)).collect()).collect();
    let y = labels.iter().map(|&l| if l { 1 } else { -1 }).collect();
    BinaryDataset::new(t.names.clone(), x, y)
}

impl TaskData {
    /// `raw` holds unbinarized values of the full feature set.
    pub fn new(raw: &FeatureTable, catalog: &FeatureCatalog, task: Task, clock: ScoredClock) -> Result<Self, PipelineError> {
        let all = catalog.names(FeatureSet::All);
        let raw = raw.select(&all).ok_or_else(|| {
            PipelineError::MissingColumn(all.iter().find(|n| raw.column(n).is_none()).cloned().unwrap_or_default())
        })?;
        let (idx, labels) = task.select(&raw.groups)?;
        let bin = raw.binarized(catalog);
        let simplest = bin.select(&catalog.names(FeatureSet::Simplest)).expect("simplest is a subset of all");
        Ok(Self {
            task,
            subjects: idx.iter().map(|&i| raw.subjects[i].clone()).collect(),
            rouleau: idx.iter().map(|&i| RouleauInputs::from_vector(&raw.vector(i), clock)).collect(),
            slim_all: binary_dataset(&bin, &idx, &labels)?,
            slim_simplest: binary_dataset(&simplest, &idx, &labels)?,
            labels,
        })
    }

    fn slim_data(&self, method: Method) -> &BinaryDataset {
        match method {
            Method::SlimSimplest => &self.slim_simplest,
            _ => &self.slim_all,
        }
    }
}

fn slim_base(d: &BinaryDataset, catalog: &FeatureCatalog, s: &BenchmarkSettings) -> SlimConfig {
    SlimConfig { node_budget: s.node_budget, ..SlimConfig::new(d.j()).with_catalog_weights(d.names(), catalog) }
}

/// Nested CV of one method on one task.
pub fn evaluate(td: &TaskData, method: Method, catalog: &FeatureCatalog, s: &BenchmarkSettings) -> Result<EvalReport, PipelineError> {
    let plan = NestedPlan::new(&td.labels, s.k_outer, s.k_inner, s.seed)?;
    let report = match method {
        Method::Rouleau => {
            let learner = RouleauLearner { inputs: &td.rouleau, labels: &td.labels };
            nested_cv(&learner, &td.labels, &[GridConfig(s.rouleau_grid.clone())], &plan, td.task, method.name())?
        }
        _ => {
            let data = td.slim_data(method);
            let learner = SlimLearner { data, base: slim_base(data, catalog, s) };
            nested_cv(&learner, &td.labels, &s.slim_grid, &plan, td.task, method.name())?
        }
    };
    Ok(report)
}

/// Most often chosen grid point across outer folds; ties go to the earlier
/// grid entry.
pub fn modal_config<'g, C: fmt::Display>(grid: &'g [C], chosen: &[String]) -> Option<&'g C> {
    let mut best: Option<(usize, &C)> = None;
    for c in grid {
        let name = c.to_string();
        let n = chosen.iter().filter(|x| **x == name).count();
        if best.is_none_or(|(b, _)| n > b) {
            best = Some((n, c));
        }
    }
    best.map(|(_, c)| c)
}

#[derive(Debug, Clone, PartialEq)]
pub enum FinalModel {
    Rouleau { params: RouleauParams, train_auc: f64 },
    Slim(SlimModel),
}

/// Refits a method on all of a task's subjects with the configuration the
/// outer folds chose most often.
pub fn fit_final(
    td: &TaskData,
    method: Method,
    catalog: &FeatureCatalog,
    s: &BenchmarkSettings,
    report: &EvalReport,
) -> Result<FinalModel, PipelineError> {
    match method {
        Method::Rouleau => {
            let (params, train_auc) = fit_params(&td.rouleau, &td.labels, &s.rouleau_grid)?;
            Ok(FinalModel::Rouleau { params, train_auc })
        }
        _ => {
            let data = td.slim_data(method);
            let h = modal_config(&s.slim_grid, &report.chosen).ok_or(EvalError::EmptyGrid)?;
            let cfg = SlimConfig { c_plus: 1.0, c_minus: h.c_minus, c0: h.c0, c1: h.c1, ..slim_base(data, catalog, s) };
            let mut m = train(data, &cfg)?;
            m.label = Some(sheet_label(td.task).to_string());
            Ok(FinalModel::Slim(m))
        }
    }
}

#[derive(Debug, Clone)]
pub struct Benchmark {
    pub table: BenchmarkTable,
    /// Keyed by (task, method).
    pub finals: BTreeMap<(Task, Method), FinalModel>,
}

/// Runs every method on every task, in table order.
pub fn run_benchmark(
    raw: &FeatureTable,
    catalog: &FeatureCatalog,
    tasks: &[Task],
    methods: &[Method],
    s: &BenchmarkSettings,
) -> Result<Benchmark, PipelineError> {
    let mut reports = Vec::new();
    let mut finals = BTreeMap::new();
    for &task in tasks {
        let td = TaskData::new(raw, catalog, task, s.rouleau_clock)?;
        for &method in methods {
            let r = evaluate(&td, method, catalog, s)?;
            finals.insert((task, method), fit_final(&td, method, catalog, s, &r)?);
            reports.push(r);
        }
    }
    // Method-major order so table rows follow `methods`.
    reports.sort_by_key(|r| {
        let m = methods.iter().position(|m| m.name() == r.method).unwrap_or(usize::MAX);
        let t = tasks.iter().position(|t| *t == r.task).unwrap_or(usize::MAX);
        (m, t)
    });
    Ok(Benchmark { table: benchmark_table(reports), finals })
}

/// The full synthetic reproduction as relative path → file contents.
#[derive(Debug, Clone, PartialEq)]
pub struct ReproOutput {
    pub files: BTreeMap<String, String>,
    pub table: BenchmarkTable,
}

pub fn repro(seed: u64, catalog: &FeatureCatalog) -> Result<ReproOutput, PipelineError> {
    let tests = generate_dataset(&GeneratorConfig::default_cohort(seed), &preset_phenotypes())?;
    repro_from_tests(&tests, catalog, &BenchmarkSettings::new(seed))
}

pub fn repro_from_tests(tests: &[ClockTest], catalog: &FeatureCatalog, s: &BenchmarkSettings) -> Result<ReproOutput, PipelineError> {
    let mut files = BTreeMap::new();
    files.insert("data/strokes.txt".to_string(), write_strokes(tests));
    files.insert("data/labels.csv".to_string(), write_labels(tests));
    let raw = FeatureTable::from_tests(tests, catalog, FeatureSet::All)?;
    files.insert("features/all.csv".to_string(), raw.to_csv());
    files.insert("features/all_binary.csv".to_string(), raw.binarized(catalog).to_csv());
    let b = run_benchmark(&raw, catalog, &Task::ALL, &Method::ALL, s)?;
    files.insert("reports/benchmark.txt".to_string(), b.table.to_text());
    files.insert("reports/benchmark.csv".to_string(), b.table.to_csv());
    for row in &b.table.reports {
        for r in row {
            let m = Method::ALL.iter().find(|m| m.name() == r.method).expect("known method");
            files.insert(format!("reports/{}_{}.txt", r.task, m.token()), r.to_text());
        }
    }
    for ((task, method), fm) in &b.finals {
        let stem = format!("models/{task}_{}", method.token());
        match fm {
            FinalModel::Rouleau { params, .. } => {
                files.insert(format!("{stem}.params"), params.to_kv());
            }
            FinalModel::Slim(m) => {
                files.insert(format!("{stem}.slim"), m.to_text());
                files.insert(format!("{stem}.sheet.txt"), render(m, catalog)?);
            }
        }
    }
    Ok(ReproOutput { files, table: b.table })
}
