//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use dcdt_core::eval::{auc, auc_trapezoid, Task};
use dcdt_core::features::{fit_ellipse, largest_angular_gap, FeatureCatalog, FeatureSet, FeatureTable, FeatureVector};
use dcdt_core::pipeline::{evaluate, BenchmarkSettings, Method, TaskData};
use dcdt_core::rouleau::{fit_params, score_face, score_hands, score_numbers, RouleauGrid, RouleauInputs, RouleauParams};
use dcdt_core::slim::{brute_force_train, parse_sheet, render, train, BinaryDataset, Optimality, SlimConfig, SlimModel};
use dcdt_core::stroke::Group;
use dcdt_core::synth::{generate_dataset, GeneratorConfig, PhenotypeParams};

/// Largest nonzero count seen in any model trained by this suite.
static MAX_NONZERO: AtomicUsize = AtomicUsize::new(0);
static MODELS_SEEN: AtomicUsize = AtomicUsize::new(0);

fn record(m: &SlimModel) {
    MAX_NONZERO.fetch_max(m.nonzero(), Ordering::Relaxed);
    MODELS_SEEN.fetch_add(1, Ordering::Relaxed);
}

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn repo_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn random_instance(rng: &mut ChaCha8Rng, n_max: usize, j_max: usize) -> (BinaryDataset, SlimConfig) {
    let n = rng.random_range(4..=n_max);
    let j = rng.random_range(1..=j_max);
    let x: Vec<Vec<u8>> = (0..n).map(|_| (0..j).map(|_| u8::from(rng.random_bool(0.5))).collect()).collect();
    let mut y: Vec<i8> = (0..n).map(|_| if rng.random_bool(0.5) { 1 } else { -1 }).collect();
    y[0] = 1;
    y[1] = -1;
    let names = (0..j).map(|c| format!("f{c}")).collect();
    let d = BinaryDataset::new(names, x, y).expect("valid instance");
    let mut cfg = SlimConfig::new(j);
    cfg.coeff_bound = 3;
    cfg.intercept_bound = 10;
    cfg.c_minus = [0.5, 1.0, 2.0][rng.random_range(0..3)];
    cfg.c0 = [0.0, 1e-3, 0.02, 0.1][rng.random_range(0..4)];
    cfg.c1 = [0.0, 1e-3, 0.01][rng.random_range(0..3)];
    cfg.u = (0..j).map(|_| rng.random_range(1..=3) as f64).collect();
    (d, cfg)
}

fn criterion_1() -> Outcome {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut proven = 0;
    for i in 0..100 {
        let (d, cfg) = random_instance(&mut rng, 30, 4);
        let m = train(&d, &cfg).map_err(|e| format!("instance {i}: {e}"))?;
        let b = brute_force_train(&d, &cfg).map_err(|e| format!("instance {i}: {e}"))?;
        record(&m);
        record(&b);
        ensure(m.optimality == Some(Optimality::ProvenOptimal), format!("instance {i}: not proven optimal"))?;
        let (mo, bo) = (m.objective.unwrap(), b.objective.unwrap());
        ensure(mo.to_bits() == bo.to_bits(), format!("instance {i}: objective {mo} vs brute force {bo}"))?;
        proven += 1;
    }
    let el = t0.elapsed();
    ensure(el < Duration::from_secs(60), format!("took {el:.1?}"))?;
    Ok(format!("{proven}/100 objectives equal brute force exactly, {el:.1?}"))
}

/// Published MID sheet predicates in sheet order.
const TABLE3: [&str; 9] = [
    "cmd_digit_order_correct",
    "cmd_hour_hand_present",
    "cmd_digits_correct_eighth",
    "cmd_crossed_out_digits",
    "cmd_two_hands_not_present",
    "cmd_total_time_s",
    "cmd_minute_hand_at_10",
    "copy_digits_correct_eighth",
    "copy_digits_repeated",
];

fn criterion_2() -> Outcome {
    let cat = FeatureCatalog::builtin();
    let root = repo_root();
    let model = SlimModel::parse(&std::fs::read_to_string(root.join("ref/table3.slim")).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    let golden = std::fs::read_to_string(root.join("ref/table3_sheet.txt")).map_err(|e| e.to_string())?;
    let sheet = render(&model, &cat).map_err(|e| e.to_string())?;
    ensure(sheet == golden, format!("rendered sheet differs from golden:\n{sheet}"))?;
    let back = parse_sheet(&sheet, &cat).map_err(|e| e.to_string())?;
    // (predicates that hold, points by hand, impaired?)
    let cases: [(&[usize], i32, bool); 20] = [
        (&[], 0, true),
        (&[1, 2], 10, false),
        (&[1, 2, 7], 4, true),
        (&[1, 2, 3, 8], 15, false),
        (&[1, 2, 3, 4, 5, 6, 7, 8, 9], 1, true),
        (&[1, 8], 9, true),
        (&[1, 8, 3], 10, false),
        (&[2, 8, 3], 10, false),
        (&[1, 2, 4], 7, true),
        (&[1, 2, 3, 8, 4], 12, false),
        (&[1, 2, 3, 8, 4, 9], 9, true),
        (&[1, 2, 5], 9, true),
        (&[1, 2, 3, 5], 10, false),
        (&[1, 2, 6, 8], 13, false),
        (&[1, 2, 3, 6, 7, 8], 8, true),
        (&[3, 8], 5, true),
        (&[1, 2, 3, 8, 7], 9, true),
        (&[1, 2, 3, 8, 9], 12, false),
        (&[2, 3, 8, 4], 7, true),
        (&[1, 2, 3, 4, 5, 6, 8], 10, false),
    ];
    for (k, (on, points, impaired)) in cases.iter().enumerate() {
        let v = FeatureVector::new(
            TABLE3.iter().enumerate().map(|(i, n)| (n.to_string(), if on.contains(&(i + 1)) { 1.0 } else { 0.0 })).collect(),
        );
        for (which, m) in [("model", &model), ("parsed sheet", &back)] {
            let s = m.score(&v).map_err(|e| e.to_string())?;
            ensure(s == (10 - points) as i64, format!("case {k} ({which}): score {s}, points {points}"))?;
            ensure((m.predict(&v).unwrap() == 1) == *impaired, format!("case {k} ({which}): wrong decision"))?;
        }
    }
    Ok("golden sheet byte-identical; 20/20 crafted decisions match".into())
}

fn criterion_3(repro_models: &[SlimModel]) -> Outcome {
    for m in repro_models {
        record(m);
    }
    // Fifteen independently useful features: the cap has to bind.
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let j = 15;
    let n = 400;
    let mut x = Vec::new();
    let mut y = Vec::new();
    for _ in 0..n {
        let row: Vec<u8> = (0..j).map(|_| u8::from(rng.random_bool(0.5))).collect();
        let s: i32 = row.iter().map(|&b| b as i32).sum::<i32>() * 2 - j as i32 + rng.random_range(-2..=2);
        y.push(if s > 0 { 1 } else { -1 });
        x.push(row);
    }
    let d = BinaryDataset::new((0..j).map(|c| format!("f{c}")).collect(), x, y).unwrap();
    let cfg = SlimConfig { c0: 0.0, node_budget: Some(2000), ..SlimConfig::new(j) };
    let m = train(&d, &cfg).map_err(|e| e.to_string())?;
    record(&m);
    let over = SlimConfig { max_features: 11, ..SlimConfig::new(j) };
    ensure(train(&d, &over).is_err(), "a cap above 10 was accepted")?;
    let max = MAX_NONZERO.load(Ordering::Relaxed);
    let seen = MODELS_SEEN.load(Ordering::Relaxed);
    ensure(max <= 10, format!("a model had {max} nonzero coefficients"))?;
    Ok(format!("{seen} models, largest has {max} nonzero coefficients (stress instance {})", m.nonzero()))
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0f64;
    for i in 0..1000 {
        let n = rng.random_range(2..=60);
        let levels = rng.random_range(1..=5);
        let mut labels: Vec<bool> = (0..n).map(|_| rng.random_bool(0.5)).collect();
        labels[0] = true;
        labels[1] = false;
        let scores: Vec<f64> = (0..n).map(|_| rng.random_range(0..levels) as f64 * 0.5 - 1.0).collect();
        let a = auc(&scores, &labels).unwrap();
        let t = auc_trapezoid(&scores, &labels).unwrap();
        let neg: Vec<f64> = scores.iter().map(|s| -s).collect();
        let mono: Vec<f64> = scores.iter().map(|s| (3.0 * s).exp() + s.powi(3)).collect();
        let d = [(a - t).abs(), (auc(&neg, &labels).unwrap() - (1.0 - a)).abs(), (auc(&mono, &labels).unwrap() - a).abs()];
        let m = d.iter().copied().fold(0.0, f64::max);
        worst = worst.max(m);
        ensure(m < 1e-12, format!("set {i}: deviations {d:?}"))?;
    }
    Ok(format!("1000 tie-heavy sets, max deviation {worst:.1e}"))
}

fn ellipse_points(a: f64, b: f64, center: (f64, f64), n: usize) -> Vec<(f64, f64)> {
    (0..n)
        .map(|k| {
            let t = std::f64::consts::TAU * k as f64 / n as f64;
            (center.0 + a * t.cos(), center.1 + b * t.sin())
        })
        .collect()
}

/// For each direction, the clockwise distance to the nearest direction
/// that differs from it (a full turn when there is none).
fn naive_gap(angles: &[f64]) -> Option<f64> {
    (0..angles.len())
        .map(|i| {
            angles
                .iter()
                .map(|a| (a - angles[i]).rem_euclid(360.0))
                .filter(|&d| d > 0.0)
                .fold(360.0, f64::min)
        })
        .reduce(f64::max)
}

fn criterion_5() -> Outcome {
    let c = fit_ellipse(&ellipse_points(3.0, 3.0, (5.0, 7.0), 120)).map_err(|e| e.to_string())?;
    ensure((c.semi_major - c.semi_minor).abs() < 1e-6, format!("circle axes {} vs {}", c.semi_major, c.semi_minor))?;
    let e = fit_ellipse(&ellipse_points(2.0, 1.0, (0.0, 0.0), 200)).map_err(|e| e.to_string())?;
    ensure((e.eccentricity - 0.8660).abs() < 1e-4, format!("eccentricity {}", e.eccentricity))?;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for i in 0..500 {
        let n = rng.random_range(0..=15);
        let mut angles: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..360.0)).collect();
        if n > 2 && rng.random_bool(0.2) {
            angles[1] = angles[0];
        }
        let (got, want) = (largest_angular_gap(&angles), naive_gap(&angles));
        let same = match (got, want) {
            (None, None) => true,
            (Some(g), Some(w)) => (g - w).abs() < 1e-9,
            _ => false,
        };
        ensure(same, format!("layout {i}: {got:?} vs oracle {want:?} for {angles:?}"))?;
    }
    Ok(format!("circle a-b {:.1e}, eccentricity {:.4}, 500 gap layouts match", (c.semi_major - c.semi_minor).abs(), e.eccentricity))
}

fn ideal_inputs() -> RouleauInputs {
    RouleauInputs {
        face_present: 1.0,
        face_eccentricity: 0.1,
        face_largest_gap_deg: 5.0,
        digits_missing: 0.0,
        digits_repeated: 0.0,
        digit_order_correct: 1.0,
        digits_counterclockwise: 0.0,
        digit_max_angle_error_deg: 5.0,
        hour_hand_present: 1.0,
        minute_hand_present: 1.0,
        hands_perseveration: 0.0,
        hour_hand_angle_error_deg: 3.0,
        minute_hand_angle_error_deg: 3.0,
        hand_size_ratio: 0.6,
    }
}

fn criterion_6() -> Outcome {
    let p = RouleauParams::default();
    let base = ideal_inputs();
    let face: [(u8, RouleauInputs); 3] = [
        (2, base),
        (1, RouleauInputs { face_eccentricity: 0.8, ..base }),
        (0, RouleauInputs { face_present: 0.0, ..base }),
    ];
    let numbers: [(u8, RouleauInputs); 5] = [
        (4, base),
        (3, RouleauInputs { digit_max_angle_error_deg: 30.0, ..base }),
        (2, RouleauInputs { digits_missing: 2.0, digit_order_correct: 0.0, digit_max_angle_error_deg: 20.0, ..base }),
        (1, RouleauInputs { digits_missing: 2.0, digit_order_correct: 0.0, digit_max_angle_error_deg: 70.0, ..base }),
        (0, RouleauInputs { digits_missing: 10.0, digit_order_correct: 0.0, ..base }),
    ];
    let hands: [(u8, RouleauInputs); 5] = [
        (4, base),
        (3, RouleauInputs { minute_hand_angle_error_deg: 25.0, ..base }),
        (2, RouleauInputs { minute_hand_angle_error_deg: 120.0, ..base }),
        (1, RouleauInputs { hour_hand_present: 0.0, hour_hand_angle_error_deg: f64::NAN, hand_size_ratio: f64::NAN, ..base }),
        (0, RouleauInputs { hands_perseveration: 1.0, ..base }),
    ];
    for (want, x) in face {
        let (got, why) = score_face(&x, &p);
        ensure(got == want, format!("face fixture {want} scored {got} ({why})"))?;
    }
    for (want, x) in numbers {
        let (got, why) = score_numbers(&x, &p);
        ensure(got == want, format!("numbers fixture {want} scored {got} ({why})"))?;
    }
    for (want, x) in hands {
        let (got, why) = score_hands(&x, &p);
        ensure(got == want, format!("hands fixture {want} scored {got} ({why})"))?;
    }
    Ok("face 2/1/0, numbers 4/3/2/1/0, hands 4/3/2/1/0 all exact".into())
}

fn run_repro(dir: &Path) -> Result<Duration, String> {
    let t0 = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_dcdt"))
        .args(["repro", "--seed", "7", "--out"])
        .arg(dir)
        .output()
        .map_err(|e| e.to_string())?;
    ensure(out.status.success(), format!("repro failed: {}", String::from_utf8_lossy(&out.stderr)))?;
    Ok(t0.elapsed())
}

fn read_tree(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let rel = p.strip_prefix(dir).unwrap().to_string_lossy().into_owned();
                out.insert(rel, std::fs::read(&p).unwrap());
            }
        }
    }
    out
}

/// Mean AUC per (method, task) from the benchmark CSV.
fn benchmark_means(csv: &str) -> BTreeMap<(String, String), f64> {
    csv.lines()
        .skip(1)
        .filter_map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f.len() == 4 && f[2] == "mean").then(|| ((f[1].to_string(), f[0].to_string()), f[3].parse().unwrap()))
        })
        .collect()
}

fn criterion_7(first: &BTreeMap<String, Vec<u8>>, took: Duration) -> Outcome {
    let csv = String::from_utf8(first.get("reports/benchmark.csv").ok_or("no benchmark.csv")?.clone()).unwrap();
    let means = benchmark_means(&csv);
    let mut cells = Vec::new();
    for task in Task::ALL {
        let get = |m: Method| means.get(&(m.name().to_string(), task.token().to_string())).copied().ok_or(format!("missing {m} on {task}"));
        let (r, s, a) = (get(Method::Rouleau)?, get(Method::SlimSimplest)?, get(Method::SlimAll)?);
        ensure(a > s && s > r, format!("{task}: SLIM all {a:.4}, SLIM simplest {s:.4}, Rouleau {r:.4}"))?;
        cells.push(format!("{task} {a:.3}>{s:.3}>{r:.3}"));
    }
    ensure(took < Duration::from_secs(600), format!("repro took {took:.1?}"))?;
    Ok(format!("{}; repro {took:.1?}", cells.join(", ")))
}

fn criterion_8() -> Outcome {
    let hc = PhenotypeParams::ideal(Group::HC);
    let mid = PhenotypeParams { hand_omission_prob: 1.0, ..PhenotypeParams::ideal(Group::MID) };
    let ph = [(Group::HC, hc), (Group::MID, mid)].into_iter().collect();
    let tests = generate_dataset(&GeneratorConfig::new([(Group::HC, 40), (Group::MID, 40)], 8), &ph).map_err(|e| e.to_string())?;
    let cat = FeatureCatalog::builtin();
    let raw = FeatureTable::from_tests(&tests, &cat, FeatureSet::All).map_err(|e| e.to_string())?;
    let s = BenchmarkSettings::new(8);
    let td = TaskData::new(&raw, &cat, Task::MidVsHc, s.rouleau_clock).map_err(|e| e.to_string())?;
    let r = evaluate(&td, Method::SlimAll, &cat, &s).map_err(|e| e.to_string())?;
    ensure(r.mean >= 0.95, format!("SLIM nested-CV mean AUC {:.4}", r.mean))?;
    let (_, train_auc) = fit_params(&td.rouleau, &td.labels, &RouleauGrid::default()).map_err(|e| e.to_string())?;
    ensure(train_auc == 1.0, format!("Rouleau training AUC {train_auc}"))?;
    Ok(format!("SLIM nested-CV AUC {:.4}, Rouleau training AUC {train_auc:.4}", r.mean))
}

fn criterion_9(a: &BTreeMap<String, Vec<u8>>, b: &BTreeMap<String, Vec<u8>>) -> Outcome {
    ensure(!a.is_empty(), "repro wrote nothing")?;
    for prefix in ["data/", "features/", "reports/", "models/"] {
        ensure(a.keys().any(|k| k.starts_with(prefix)), format!("no {prefix} outputs"))?;
    }
    ensure(a.keys().eq(b.keys()), "the two runs wrote different file sets")?;
    for (k, v) in a {
        ensure(b[k] == *v, format!("{k} differs between runs"))?;
    }
    let bytes: usize = a.values().map(Vec::len).sum();
    Ok(format!("{} files ({bytes} bytes) byte-identical across two runs", a.len()))
}

fn criterion_10() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let c1s = [0.0, 1e-3, 1e-2, 5e-2, 2e-1];
    let mut changed = 0;
    for i in 0..20 {
        let (d, base) = random_instance(&mut rng, 30, 4);
        let mut prev = f64::INFINITY;
        let mut first = None;
        for &c1 in &c1s {
            let cfg = SlimConfig { c1, ..base.clone() };
            let b = brute_force_train(&d, &cfg).map_err(|e| e.to_string())?;
            let m = train(&d, &cfg).map_err(|e| e.to_string())?;
            record(&b);
            record(&m);
            ensure(m.objective.unwrap().to_bits() == b.objective.unwrap().to_bits(), format!("instance {i}, C1 {c1}: train differs from brute force"))?;
            let su: f64 = b.coefficients.iter().zip(&cfg.u).filter(|(&l, _)| l != 0).map(|(_, u)| u).sum();
            ensure(su <= prev, format!("instance {i}: sum u rose from {prev} to {su} at C1 {c1}"))?;
            first.get_or_insert(su);
            prev = su;
        }
        if first != Some(prev) {
            changed += 1;
        }
    }
    Ok(format!("20 instances x 5 C1 values monotone; sum u decreased on {changed} instances"))
}

fn guarded(f: impl FnOnce() -> Outcome) -> Outcome {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
        let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
        Err(format!("panicked: {}", msg.unwrap_or_default()))
    })
}

fn main() {
    let mut results: BTreeMap<u32, (&str, Outcome)> = BTreeMap::new();
    results.insert(1, ("SLIM exactness vs brute force", guarded(criterion_1)));
    results.insert(2, ("published MID sheet and decisions", guarded(criterion_2)));
    results.insert(4, ("AUC dual implementation", guarded(criterion_4)));
    results.insert(5, ("geometry", guarded(criterion_5)));
    results.insert(6, ("Rouleau item fixtures", guarded(criterion_6)));
    results.insert(8, ("separable fixture", guarded(criterion_8)));
    results.insert(10, ("understandability penalty monotone", guarded(criterion_10)));

    let tmp = tempfile::tempdir().expect("temp dir");
    let (d1, d2) = (tmp.path().join("run1"), tmp.path().join("run2"));
    let runs = run_repro(&d1).and_then(|t| run_repro(&d2).map(|_| t));
    let (first, second) = if runs.is_ok() { (read_tree(&d1), read_tree(&d2)) } else { Default::default() };
    match &runs {
        Ok(took) => {
            results.insert(7, ("synthetic benchmark ordering", guarded(|| criterion_7(&first, *took))));
            results.insert(9, ("determinism of repro", guarded(|| criterion_9(&first, &second))));
        }
        Err(e) => {
            results.insert(7, ("synthetic benchmark ordering", Err(e.clone())));
            results.insert(9, ("determinism of repro", Err(e.clone())));
        }
    }
    let models: Vec<SlimModel> = first
        .iter()
        .filter(|(k, _)| k.ends_with(".slim"))
        .filter_map(|(_, v)| SlimModel::parse(std::str::from_utf8(v).ok()?).ok())
        .collect();
    results.insert(3, ("cardinality cap", guarded(|| criterion_3(&models))));

    let mut failed = 0;
    for (n, (title, r)) in &results {
        match r {
            Ok(detail) => println!("criterion {n:2}: PASS  {title}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("criterion {n:2}: FAIL  {title}: {detail}");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
