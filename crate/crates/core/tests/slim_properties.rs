use dcdt_core::features::FeatureCatalog;
use dcdt_core::slim::{
    brute_force_train, objective, parse_sheet, render, train, BinaryDataset, Optimality, SlimConfig, SlimModel,
};
use proptest::prelude::*;

fn instance() -> impl Strategy<Value = (BinaryDataset, SlimConfig)> {
    (1usize..=3, 4usize..=20)
        .prop_flat_map(|(j, n)| {
            (
                prop::collection::vec(prop::collection::vec(0u8..=1, j), n),
                prop::collection::vec(prop::bool::ANY, n),
                prop::sample::select(vec![0.5, 1.0, 2.0]),
                prop::sample::select(vec![0.0, 1e-3, 0.05]),
                prop::collection::vec(1u32..=3, j),
            )
        })
        .prop_map(|(x, yb, c_minus, c0, u)| {
            let j = x[0].len();
            let mut y: Vec<i8> = yb.iter().map(|&b| if b { 1 } else { -1 }).collect();
            y[0] = 1;
            y[1] = -1;
            let d = BinaryDataset::new((0..j).map(|c| format!("f{c}")).collect(), x, y).unwrap();
            let cfg = SlimConfig {
                coeff_bound: 3,
                intercept_bound: 12,
                c_minus,
                c0,
                u: u.into_iter().map(f64::from).collect(),
                ..SlimConfig::new(j)
            };
            (d, cfg)
        })
}

fn flipped(d: &BinaryDataset) -> BinaryDataset {
    BinaryDataset::new(d.names().to_vec(), d.rows().to_vec(), d.labels().iter().map(|&y| -y).collect()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exact_search_matches_enumeration((d, cfg) in instance()) {
        let m = train(&d, &cfg).unwrap();
        let b = brute_force_train(&d, &cfg).unwrap();
        prop_assert_eq!(m.optimality, Some(Optimality::ProvenOptimal));
        prop_assert_eq!(m.objective.unwrap().to_bits(), b.objective.unwrap().to_bits());
        prop_assert_eq!(&m.coefficients, &b.coefficients);
        prop_assert_eq!(m.intercept, b.intercept);
    }

    #[test]
    fn reported_objective_recomputes((d, cfg) in instance()) {
        let m = train(&d, &cfg).unwrap();
        prop_assert_eq!(m.objective.unwrap(), objective(&m.coefficients, m.intercept, &d, &cfg));
    }

    #[test]
    fn cardinality_cap_holds((d, cfg) in instance(), k in 1usize..=3) {
        let cfg = SlimConfig { max_features: k, c0: 0.0, ..cfg };
        let m = train(&d, &cfg).unwrap();
        prop_assert!(m.nonzero() <= k);
    }

    /// Flipping labels, swapping C+ and C−, and mapping (λ, λ0) to
    /// (−λ, 1 − λ0) preserves every decision, so optimal objectives agree.
    #[test]
    fn label_symmetry((d, cfg) in instance()) {
        let swapped = SlimConfig { c_plus: cfg.c_minus, c_minus: cfg.c_plus, ..cfg.clone() };
        let a = brute_force_train(&d, &cfg).unwrap();
        let b = brute_force_train(&flipped(&d), &swapped).unwrap();
        prop_assert_eq!(a.objective.unwrap(), b.objective.unwrap());
        let neg: Vec<i32> = a.coefficients.iter().map(|c| -c).collect();
        prop_assert_eq!(objective(&neg, 1 - a.intercept, &flipped(&d), &swapped), a.objective.unwrap());
    }

    #[test]
    fn sparsity_penalty_is_monotone((d, cfg) in instance()) {
        let mut prev = usize::MAX;
        for c0 in [0.0, 1e-3, 0.01, 0.05, 0.2, 1.0] {
            let m = brute_force_train(&d, &SlimConfig { c0, ..cfg.clone() }).unwrap();
            prop_assert!(m.nonzero() <= prev);
            prev = m.nonzero();
        }
    }

    #[test]
    fn duplicated_example_counts_twice((d, cfg) in instance(), pick in 0usize..20, lam in prop::collection::vec(-3i32..=3, 3), l0 in -5i32..=5) {
        let r = pick % d.n();
        let lam = &lam[..d.j()];
        let mut rows = d.rows().to_vec();
        let mut ys = d.labels().to_vec();
        rows.push(rows[r].clone());
        ys.push(ys[r]);
        let dup = BinaryDataset::new(d.names().to_vec(), rows, ys).unwrap();
        let m = SlimModel::new(d.names().to_vec(), lam.to_vec(), l0);
        let s = m.score_row(&d.rows()[r]);
        let err = if d.labels()[r] == 1 { s <= 0 } else { s > 0 };
        let w = if d.labels()[r] == 1 { cfg.c_plus } else { cfg.c_minus };
        let loss = |dd: &BinaryDataset| {
            let pen = SlimConfig { c0: 0.0, c1: 0.0, ..cfg.clone() };
            objective(lam, l0, dd, &pen) * dd.n() as f64
        };
        let expect = loss(&d) + if err { w } else { 0.0 };
        prop_assert!((loss(&dup) - expect).abs() < 1e-9);
    }

    #[test]
    fn predict_is_sign_of_score(lam in prop::collection::vec(-5i32..=5, 4), l0 in -8i32..=8, x in prop::collection::vec(0u8..=1, 4)) {
        let names: Vec<String> = (0..4).map(|c| format!("f{c}")).collect();
        let m = SlimModel::new(names.clone(), lam.clone(), l0);
        let v = dcdt_core::features::FeatureVector::new(names.iter().cloned().zip(x.iter().map(|&b| b as f64)).collect());
        let s = l0 as i64 + lam.iter().zip(&x).map(|(&l, &b)| l as i64 * b as i64).sum::<i64>();
        prop_assert_eq!(m.score(&v).unwrap(), s);
        prop_assert_eq!(m.predict(&v).unwrap(), if s > 0 { 1 } else { -1 });
        prop_assert_eq!(m.score_row(&x), s);
    }
}

#[test]
fn model_file_and_sheet_round_trip() {
    let cat = FeatureCatalog::builtin();
    let names: Vec<String> = ["cmd_hour_hand_present", "copy_noise_strokes", "both_total_time_s", "cmd_minute_hand_at_10"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    for c in [[-3, 2, 1, 0], [0, 0, 0, 0], [5, -5, 0, 7]] {
        let mut m = SlimModel::new(names.clone(), c.to_vec(), 4);
        m.label = Some("PD".into());
        let back = SlimModel::parse(&m.to_text()).unwrap();
        let sheet = parse_sheet(&render(&m, &cat).unwrap(), &cat).unwrap();
        for bits in 0..16u8 {
            let row: Vec<u8> = (0..4).map(|k| (bits >> k) & 1).collect();
            let v = dcdt_core::features::FeatureVector::new(names.iter().cloned().zip(row.iter().map(|&b| b as f64)).collect());
            assert_eq!(m.predict(&v).unwrap(), back.predict(&v).unwrap());
            assert_eq!(m.predict(&v).unwrap(), sheet.predict(&v).unwrap());
        }
    }
}

#[test]
fn config_validation() {
    let d = BinaryDataset::new(vec!["a".into()], vec![vec![1], vec![0]], vec![1, -1]).unwrap();
    for bad in [
        SlimConfig { max_features: 11, ..SlimConfig::new(1) },
        SlimConfig { c_plus: 0.0, ..SlimConfig::new(1) },
        SlimConfig { c0: -1.0, ..SlimConfig::new(1) },
        SlimConfig { u: vec![], ..SlimConfig::new(1) },
        SlimConfig { coeff_bound: 0, ..SlimConfig::new(1) },
    ] {
        assert!(train(&d, &bad).is_err());
    }
}
