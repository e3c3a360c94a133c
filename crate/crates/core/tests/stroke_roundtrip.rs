use dcdt_core::stroke::{attach_labels, parse_labels, parse_strokes, write_labels, write_strokes, Group, PenPoint};
use dcdt_core::synth::{generate_dataset, preset_phenotypes, GeneratorConfig};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn written_cohorts_parse_back(seed in any::<u64>(), n in 1usize..4) {
        let cfg = GeneratorConfig::new(Group::ALL.map(|g| (g, n)), seed);
        let tests = generate_dataset(&cfg, &preset_phenotypes()).unwrap();
        let text = write_strokes(&tests);
        let mut back = parse_strokes(&text).unwrap();
        prop_assert_eq!(write_strokes(&back), text);
        attach_labels(&mut back, &parse_labels(&write_labels(&tests)).unwrap()).unwrap();
        prop_assert_eq!(back.len(), tests.len());
        for (a, b) in tests.iter().zip(&back) {
            prop_assert_eq!(&a.subject_id, &b.subject_id);
            prop_assert_eq!(a.group, b.group);
            prop_assert_eq!(a.command().strokes().len(), b.command().strokes().len());
            prop_assert_eq!(a.copy().strokes().len(), b.copy().strokes().len());
        }
    }

    #[test]
    fn rigid_motion_keeps_lengths(seed in any::<u64>(), theta in 0.0f64..6.3, dx in -50.0f64..50.0, dt in 0i64..100_000) {
        let cfg = GeneratorConfig::new([(Group::VCD, 1)], seed);
        let t = &generate_dataset(&cfg, &preset_phenotypes()).unwrap()[0];
        let (s, c) = theta.sin_cos();
        let moved = t.map_points(|p| PenPoint::new(p.x * c - p.y * s + dx, p.x * s + p.y * c - dx, p.t + dt)).unwrap();
        for (a, b) in t.command().strokes().iter().zip(moved.command().strokes()) {
            prop_assert!((a.length() - b.length()).abs() < 1e-9 * (1.0 + a.length()));
            prop_assert_eq!(a.duration(), b.duration());
            prop_assert_eq!(a.start_time() + dt, b.start_time());
        }
    }
}

#[test]
fn malformed_input_reports_a_line() {
    let cfg = GeneratorConfig::new([(Group::PD, 1)], 4);
    let text = write_strokes(&generate_dataset(&cfg, &preset_phenotypes()).unwrap());
    let lines: Vec<&str> = text.lines().collect();
    let bad_at = lines.len() / 2;
    let mut broken: Vec<String> = lines.iter().map(|s| s.to_string()).collect();
    broken[bad_at] = "garbage here".into();
    let err = parse_strokes(&broken.join("\n")).unwrap_err();
    assert_eq!(err.line(), Some(bad_at + 1));
    assert!(parse_labels("subject_id,group\nx,NOPE\n").is_err());
}
