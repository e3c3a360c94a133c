//! `dcdt`: command-line pipeline for digital clock drawing tests.
//!
//! Exit status is 0 on success, 2 on usage errors and 1 on data errors.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use dcdt_core::eval::Task;
use dcdt_core::features::{FeatureCatalog, FeatureSet, FeatureTable};
use dcdt_core::kv::parse_kv;
use dcdt_core::pipeline::{self, sheet_label, BenchmarkSettings, Method, TaskData};
use dcdt_core::rouleau::{fit_params, score_csv, RouleauGrid, RouleauInputs, RouleauParams, ScoredClock};
use dcdt_core::slim::{parse_sheet, render, train, BinaryDataset, SlimConfig, SlimHyper, SlimModel, MODEL_HEADER};
use dcdt_core::stroke::{attach_labels, parse_labels, parse_strokes, write_labels, write_strokes, Group};
use dcdt_core::synth::{generate_dataset, parse_phenotypes, GeneratorConfig};

#[derive(Parser, Debug)]
#[command(name = "dcdt", version, about = "Digital Clock Drawing Test: features, Rouleau scoring and SLIM scoring systems")]
struct Cli {
    /// key = value file supplying defaults for flags of the chosen subcommand
    /// (keys are long flag names without the leading dashes).
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Generate a synthetic cohort: strokes.txt, labels.csv and phenotypes.kv.
    Generate(GenerateArgs),
    /// Extract a feature table (CSV) from a stroke file.
    Extract(ExtractArgs),
    /// Operationalized Rouleau scoring.
    #[command(subcommand)]
    Rouleau(RouleauCmd),
    /// Train and apply SLIM scoring systems.
    #[command(subcommand)]
    Slim(SlimCmd),
    /// Nested cross-validation of one method on one task.
    Evaluate(EvaluateArgs),
    /// Render a SLIM model as a scoring sheet.
    Render(RenderArgs),
    /// Full synthetic benchmark: generate, extract, evaluate every method on
    /// every task, refit final models.
    Repro(ReproArgs),
}

#[derive(Subcommand, Debug)]
enum RouleauCmd {
    /// Score every subject with fixed parameters.
    Score(RouleauScoreArgs),
    /// Fit thresholds and the cut score by training AUC.
    Fit(RouleauFitArgs),
}

#[derive(Subcommand, Debug)]
enum SlimCmd {
    /// Train a model on one task.
    Train(SlimTrainArgs),
    /// Score and classify subjects with a model file or scoring sheet.
    Predict(SlimPredictArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Preset {
    Default,
    Ideal,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FeatureSetArg {
    All,
    Simplest,
}

impl From<FeatureSetArg> for FeatureSet {
    fn from(f: FeatureSetArg) -> Self {
        match f {
            FeatureSetArg::All => FeatureSet::All,
            FeatureSetArg::Simplest => FeatureSet::Simplest,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ClockArg {
    Command,
    Copy,
}

impl From<ClockArg> for ScoredClock {
    fn from(c: ClockArg) -> Self {
        match c {
            ClockArg::Command => ScoredClock::Command,
            ClockArg::Copy => ScoredClock::Copy,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MethodArg {
    Rouleau,
    Slim,
}

#[derive(Args, Debug)]
struct CatalogArg {
    /// Feature catalog file (defaults to the built-in catalog).
    #[arg(long, value_name = "FILE")]
    catalog: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct GenerateArgs {
    /// Starting phenotype parameters.
    #[arg(long, value_enum, default_value = "default")]
    preset: Preset,
    /// Phenotype overrides, `<GROUP>.<field> = value` lines.
    #[arg(long, value_name = "FILE")]
    phenotypes: Option<PathBuf>,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long, default_value_t = 406)]
    hc: usize,
    #[arg(long, default_value_t = 151)]
    mid: usize,
    #[arg(long, default_value_t = 151)]
    vcd: usize,
    #[arg(long, default_value_t = 151)]
    pd: usize,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct ExtractArgs {
    /// Stroke file.
    #[arg(long, value_name = "FILE")]
    strokes: PathBuf,
    /// Labels file (`subject_id,group`).
    #[arg(long, value_name = "FILE")]
    labels: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "all")]
    features: FeatureSetArg,
    /// Write 0/1 values at the catalog cutpoints instead of raw values.
    #[arg(long)]
    binarize: bool,
    #[command(flatten)]
    catalog: CatalogArg,
    /// Output CSV (stdout when absent).
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct RouleauScoreArgs {
    /// Raw feature table from `extract`.
    #[arg(long, value_name = "FILE")]
    input: PathBuf,
    /// Parameter file (`key = value`); defaults when absent.
    #[arg(long, value_name = "FILE")]
    params: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "command")]
    clock: ClockArg,
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct RouleauFitArgs {
    #[arg(long, value_name = "FILE")]
    input: PathBuf,
    /// mid, vcd, pd or all3.
    #[arg(long)]
    task: Task,
    /// Threshold grid file (`name = v1, v2, ...`); built-in grid when absent.
    #[arg(long, value_name = "FILE")]
    grid: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "command")]
    clock: ClockArg,
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SlimTrainArgs {
    /// Feature table from `extract`.
    #[arg(long, value_name = "FILE")]
    input: PathBuf,
    /// The input table is already binarized.
    #[arg(long)]
    binary_input: bool,
    #[arg(long)]
    task: Task,
    #[arg(long, value_enum, default_value = "all")]
    features: FeatureSetArg,
    #[arg(long, default_value_t = 1.0)]
    c_plus: f64,
    #[arg(long, default_value_t = 1.0)]
    c_minus: f64,
    #[arg(long, default_value_t = 1e-3)]
    c0: f64,
    #[arg(long, default_value_t = 0.0)]
    c1: f64,
    #[arg(long, default_value_t = 10)]
    coeff_bound: i32,
    #[arg(long, default_value_t = 100)]
    intercept_bound: i32,
    #[arg(long, default_value_t = 10)]
    max_features: usize,
    /// Stop the search after this many nodes (deterministic).
    #[arg(long)]
    node_budget: Option<u64>,
    /// Stop the search after this much wall time (not deterministic).
    #[arg(long)]
    time_budget_ms: Option<u64>,
    /// Class named on the sheet (defaults to the task's disorder).
    #[arg(long)]
    label: Option<String>,
    #[command(flatten)]
    catalog: CatalogArg,
    /// Model file (stdout when absent).
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SlimPredictArgs {
    /// Model file or scoring sheet.
    #[arg(long, value_name = "FILE")]
    model: PathBuf,
    #[arg(long, value_name = "FILE")]
    input: PathBuf,
    #[arg(long)]
    binary_input: bool,
    #[command(flatten)]
    catalog: CatalogArg,
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EvaluateArgs {
    /// Raw feature table; when absent, features are extracted from
    /// `<data>/strokes.txt` and `<data>/labels.csv`.
    #[arg(long, value_name = "FILE")]
    input: Option<PathBuf>,
    #[arg(long, value_name = "DIR", default_value = "data")]
    data: PathBuf,
    #[arg(long)]
    task: Task,
    #[arg(long, value_enum)]
    method: MethodArg,
    /// Feature set for SLIM.
    #[arg(long, value_enum, default_value = "all")]
    features: FeatureSetArg,
    #[arg(long, default_value_t = 5)]
    folds: usize,
    #[arg(long, default_value_t = 5)]
    inner_folds: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// SLIM grid values for C− (comma-separated).
    #[arg(long, value_delimiter = ',', default_values_t = [0.5, 1.0, 2.0])]
    c_minus: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = [1e-4, 1e-3, 1e-2])]
    c0: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = [0.0, 1e-4, 1e-3])]
    c1: Vec<f64>,
    #[arg(long, default_value_t = pipeline::BENCHMARK_NODE_BUDGET)]
    node_budget: u64,
    /// Rouleau threshold grid file.
    #[arg(long, value_name = "FILE")]
    grid: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "command")]
    clock: ClockArg,
    #[command(flatten)]
    catalog: CatalogArg,
    /// Report directory.
    #[arg(long, value_name = "DIR", default_value = "reports")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct RenderArgs {
    /// Model file.
    #[arg(long, value_name = "FILE")]
    model: PathBuf,
    /// Override the class named on the PREDICT line.
    #[arg(long)]
    label: Option<String>,
    #[command(flatten)]
    catalog: CatalogArg,
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ReproArgs {
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long, value_name = "DIR", default_value = "repro")]
    out: PathBuf,
}

/// Marks errors that should exit with the usage status.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("{}: cannot read", path.display()))
}

fn write_out(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        None => {
            print!("{text}");
            Ok(())
        }
        Some(p) => write_file(p, text),
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("{}: cannot create directory", dir.display()))?;
    }
    fs::write(path, text).with_context(|| format!("{}: cannot write", path.display()))
}

fn load_catalog(a: &CatalogArg) -> Result<FeatureCatalog> {
    match &a.catalog {
        None => Ok(FeatureCatalog::builtin()),
        Some(p) => FeatureCatalog::parse(&read(p)?).with_context(|| p.display().to_string()),
    }
}

fn load_table(path: &Path) -> Result<FeatureTable> {
    FeatureTable::parse_csv(&read(path)?).with_context(|| path.display().to_string())
}

fn load_model(path: &Path, catalog: &FeatureCatalog) -> Result<SlimModel> {
    let text = read(path)?;
    let ctx = || path.display().to_string();
    if text.lines().next().is_some_and(|l| l.trim() == MODEL_HEADER) {
        SlimModel::parse(&text).with_context(ctx)
    } else {
        parse_sheet(&text, catalog).with_context(ctx)
    }
}

fn cmd_generate(a: GenerateArgs) -> Result<()> {
    let mut text = match a.preset {
        Preset::Default => String::from("preset = default\n"),
        Preset::Ideal => String::from("preset = ideal\n"),
    };
    if let Some(p) = &a.phenotypes {
        text.push_str(&read(p)?);
    }
    let ph = parse_phenotypes(&text).with_context(|| match &a.phenotypes {
        Some(p) => p.display().to_string(),
        None => "phenotypes".to_string(),
    })?;
    let cfg = GeneratorConfig::new([(Group::HC, a.hc), (Group::MID, a.mid), (Group::VCD, a.vcd), (Group::PD, a.pd)], a.seed);
    let tests = generate_dataset(&cfg, &ph)?;
    write_file(&a.out.join("strokes.txt"), &write_strokes(&tests))?;
    write_file(&a.out.join("labels.csv"), &write_labels(&tests))?;
    let kv: String = ph.values().map(|p| p.to_kv()).collect();
    write_file(&a.out.join("phenotypes.kv"), &kv)?;
    Ok(())
}

fn extract_table(strokes: &Path, labels: Option<&Path>, catalog: &FeatureCatalog, set: FeatureSet) -> Result<FeatureTable> {
    let mut tests = parse_strokes(&read(strokes)?).with_context(|| strokes.display().to_string())?;
    if let Some(l) = labels {
        let parsed = parse_labels(&read(l)?).with_context(|| l.display().to_string())?;
        attach_labels(&mut tests, &parsed).with_context(|| l.display().to_string())?;
    }
    Ok(FeatureTable::from_tests(&tests, catalog, set)?)
}

fn cmd_extract(a: ExtractArgs) -> Result<()> {
    let cat = load_catalog(&a.catalog)?;
    let mut t = extract_table(&a.strokes, a.labels.as_deref(), &cat, a.features.into())?;
    if a.binarize {
        t = t.binarized(&cat);
    }
    write_out(a.out.as_deref(), &t.to_csv())
}

fn rouleau_inputs(t: &FeatureTable, clock: ScoredClock) -> Vec<RouleauInputs> {
    (0..t.len()).map(|i| RouleauInputs::from_vector(&t.vector(i), clock)).collect()
}

fn cmd_rouleau_score(a: RouleauScoreArgs) -> Result<()> {
    let t = load_table(&a.input)?;
    let p = match &a.params {
        None => RouleauParams::default(),
        Some(f) => RouleauParams::parse(&read(f)?).with_context(|| f.display().to_string())?,
    };
    write_out(a.out.as_deref(), &score_csv(&t.subjects, &rouleau_inputs(&t, a.clock.into()), &p))
}

fn cmd_rouleau_fit(a: RouleauFitArgs) -> Result<()> {
    let t = load_table(&a.input)?;
    let grid = match &a.grid {
        None => RouleauGrid::default(),
        Some(f) => RouleauGrid::parse(&read(f)?).with_context(|| f.display().to_string())?,
    };
    let (idx, labels) = a.task.select(&t.groups).with_context(|| a.input.display().to_string())?;
    let all = rouleau_inputs(&t, a.clock.into());
    let x: Vec<RouleauInputs> = idx.iter().map(|&i| all[i]).collect();
    let (p, auc) = fit_params(&x, &labels, &grid)?;
    write_out(a.out.as_deref(), &format!("# task {} training AUC {auc:.6}\n{}", a.task, p.to_kv()))
}

/// Task rows of a table as a binary dataset over the chosen feature set.
fn slim_dataset(t: &FeatureTable, binary: bool, task: Task, set: FeatureSet, cat: &FeatureCatalog) -> Result<BinaryDataset> {
    let names = cat.names(set);
    let t = t.select(&names).ok_or_else(|| {
        let missing = names.iter().find(|n| t.column(n).is_none()).cloned().unwrap_or_default();
        anyhow::anyhow!("feature table lacks column `{missing}`")
    })?;
    let t = if binary { t } else { t.binarized(cat) };
    let (idx, labels) = task.select(&t.groups)?;
    let mut x = Vec::with_capacity(idx.len());
    for &i in &idx {
        let row: Vec<u8> = t.rows[i]
            .iter()
            .enumerate()
            .map(|(j, &v)| match v {
                0.0 => Ok(0),
                1.0 => Ok(1),
                _ => bail!("subject {}: `{}` is {v}, not 0 or 1", t.subjects[i], t.names[j]),
            })
            .collect::<Result<_>>()?;
        x.push(row);
    }
    let y = labels.iter().map(|&l| if l { 1 } else { -1 }).collect();
    Ok(BinaryDataset::new(t.names.clone(), x, y)?)
}

fn cmd_slim_train(a: SlimTrainArgs) -> Result<()> {
    let cat = load_catalog(&a.catalog)?;
    let t = load_table(&a.input)?;
    let d = slim_dataset(&t, a.binary_input, a.task, a.features.into(), &cat).with_context(|| a.input.display().to_string())?;
    let cfg = SlimConfig {
        c_plus: a.c_plus,
        c_minus: a.c_minus,
        c0: a.c0,
        c1: a.c1,
        coeff_bound: a.coeff_bound,
        intercept_bound: a.intercept_bound,
        max_features: a.max_features,
        node_budget: a.node_budget,
        time_budget_ms: a.time_budget_ms,
        ..SlimConfig::new(d.j()).with_catalog_weights(d.names(), &cat)
    };
    cfg.validate(d.j()).map_err(|e| Usage(e.to_string()))?;
    let mut m = train(&d, &cfg)?;
    m.label = Some(a.label.unwrap_or_else(|| sheet_label(a.task).to_string()));
    eprintln!(
        "objective {:.6} ({}), {} nonzero coefficients",
        m.objective.unwrap_or(f64::NAN),
        m.optimality.map(|o| o.to_string()).unwrap_or_default(),
        m.nonzero()
    );
    write_out(a.out.as_deref(), &m.to_text())
}

fn cmd_slim_predict(a: SlimPredictArgs) -> Result<()> {
    let cat = load_catalog(&a.catalog)?;
    let m = load_model(&a.model, &cat)?;
    let t = load_table(&a.input)?;
    let t = if a.binary_input { t } else { t.binarized(&cat) };
    let mut s = String::from("subject_id,score,impaired\n");
    for i in 0..t.len() {
        let v = t.vector(i);
        let score = m.score(&v).with_context(|| a.input.display().to_string())?;
        s.push_str(&format!("{},{score},{}\n", t.subjects[i], u8::from(score > 0)));
    }
    write_out(a.out.as_deref(), &s)
}

fn cmd_evaluate(a: EvaluateArgs) -> Result<()> {
    let cat = load_catalog(&a.catalog)?;
    let raw = match &a.input {
        Some(p) => load_table(p)?,
        None => extract_table(&a.data.join("strokes.txt"), Some(&a.data.join("labels.csv")), &cat, FeatureSet::All)?,
    };
    if a.folds < 2 || a.inner_folds < 2 {
        return Err(Usage("--folds and --inner-folds must be at least 2".into()).into());
    }
    let mut s = BenchmarkSettings::new(a.seed);
    s.k_outer = a.folds;
    s.k_inner = a.inner_folds;
    s.node_budget = Some(a.node_budget);
    s.rouleau_clock = a.clock.into();
    s.slim_grid.clear();
    for &c_minus in &a.c_minus {
        for &c0 in &a.c0 {
            for &c1 in &a.c1 {
                s.slim_grid.push(SlimHyper { c_minus, c0, c1 });
            }
        }
    }
    if let Some(g) = &a.grid {
        s.rouleau_grid = RouleauGrid::parse(&read(g)?).with_context(|| g.display().to_string())?;
    }
    let method = match (a.method, a.features) {
        (MethodArg::Rouleau, _) => Method::Rouleau,
        (MethodArg::Slim, FeatureSetArg::All) => Method::SlimAll,
        (MethodArg::Slim, FeatureSetArg::Simplest) => Method::SlimSimplest,
    };
    let td = TaskData::new(&raw, &cat, a.task, s.rouleau_clock)?;
    let r = pipeline::evaluate(&td, method, &cat, &s)?;
    let stem = format!("{}_{}", a.task, method.token());
    write_file(&a.out.join(format!("{stem}.txt")), &r.to_text())?;
    write_file(&a.out.join(format!("{stem}.csv")), &r.to_csv())?;
    print!("{}", r.to_text());
    Ok(())
}

fn cmd_render(a: RenderArgs) -> Result<()> {
    let cat = load_catalog(&a.catalog)?;
    let mut m = load_model(&a.model, &cat)?;
    if let Some(l) = a.label {
        m.label = Some(l);
    }
    let sheet = render(&m, &cat).with_context(|| a.model.display().to_string())?;
    write_out(a.out.as_deref(), &sheet)
}

fn cmd_repro(a: ReproArgs) -> Result<()> {
    let out = pipeline::repro(a.seed, &FeatureCatalog::builtin())?;
    for (rel, text) in &out.files {
        write_file(&a.out.join(rel), text)?;
    }
    print!("{}", out.table.to_text());
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::Generate(a) => cmd_generate(a),
        Cmd::Extract(a) => cmd_extract(a),
        Cmd::Rouleau(RouleauCmd::Score(a)) => cmd_rouleau_score(a),
        Cmd::Rouleau(RouleauCmd::Fit(a)) => cmd_rouleau_fit(a),
        Cmd::Slim(SlimCmd::Train(a)) => cmd_slim_train(a),
        Cmd::Slim(SlimCmd::Predict(a)) => cmd_slim_predict(a),
        Cmd::Evaluate(a) => cmd_evaluate(a),
        Cmd::Render(a) => cmd_render(a),
        Cmd::Repro(a) => cmd_repro(a),
    }
}

/// Appends `--key value` for config entries whose flag is not given on the
/// command line. `true`/`false` values toggle switches.
fn apply_config(args: Vec<OsString>) -> Result<Vec<OsString>> {
    let strs: Vec<String> = args.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    let path = strs.iter().enumerate().find_map(|(i, a)| {
        if a == "--config" {
            strs.get(i + 1).cloned()
        } else {
            a.strip_prefix("--config=").map(str::to_string)
        }
    });
    let Some(path) = path else { return Ok(args) };
    let path = PathBuf::from(path);
    let kv = parse_kv(&read(&path)?).with_context(|| path.display().to_string())?;
    let mut out = args;
    for (k, v) in kv {
        let flag = format!("--{k}");
        if strs.iter().any(|a| *a == flag || a.starts_with(&format!("{flag}="))) {
            continue;
        }
        match v.as_str() {
            "true" => out.push(flag.into()),
            "false" => {}
            _ => {
                out.push(flag.into());
                out.push(v.into());
            }
        }
    }
    Ok(out)
}

fn main() -> ExitCode {
    let args = match apply_config(std::env::args_os().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(1);
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand) {
                let _ = e.print();
                return ExitCode::from(if e.kind() == ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand { 2 } else { 0 });
            }
            let text = e.to_string();
            eprintln!("{}", text.lines().next().unwrap_or("error: invalid arguments"));
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.downcast_ref::<Usage>().is_some() => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
