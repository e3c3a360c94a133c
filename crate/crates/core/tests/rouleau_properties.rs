use dcdt_core::rouleau::{fit_cut_score, rouleau_total, RouleauInputs, RouleauParams};
use proptest::prelude::*;

fn perfect() -> RouleauInputs {
    RouleauInputs {
        face_present: 1.0,
        face_eccentricity: 0.0,
        face_largest_gap_deg: 0.0,
        digits_missing: 0.0,
        digits_repeated: 0.0,
        digit_order_correct: 1.0,
        digits_counterclockwise: 0.0,
        digit_max_angle_error_deg: 0.0,
        hour_hand_present: 1.0,
        minute_hand_present: 1.0,
        hands_perseveration: 0.0,
        hour_hand_angle_error_deg: 0.0,
        minute_hand_angle_error_deg: 0.0,
        hand_size_ratio: 0.6,
    }
}

fn inputs() -> impl Strategy<Value = RouleauInputs> {
    (
        (0.0f64..1.0, 0.0f64..360.0, 0u8..=12, 0u8..=3),
        (prop::bool::ANY, prop::bool::ANY, 0.0f64..180.0),
        (prop::bool::ANY, prop::bool::ANY, prop::bool::ANY, 0.0f64..180.0, 0.0f64..180.0, 0.0f64..2.0),
    )
        .prop_map(|((ecc, gap, miss, rep), (order, ccw, dev), (h, m, pers, he, me, ratio))| RouleauInputs {
            face_present: 1.0,
            face_eccentricity: ecc,
            face_largest_gap_deg: gap,
            digits_missing: miss as f64,
            digits_repeated: rep as f64,
            digit_order_correct: order as u8 as f64,
            digits_counterclockwise: ccw as u8 as f64,
            digit_max_angle_error_deg: dev,
            hour_hand_present: h as u8 as f64,
            minute_hand_present: m as u8 as f64,
            hands_perseveration: pers as u8 as f64,
            hour_hand_angle_error_deg: he,
            minute_hand_angle_error_deg: me,
            hand_size_ratio: ratio,
        })
}

/// Each numeric error measurement, as a setter.
fn errors() -> Vec<(&'static str, fn(&mut RouleauInputs, f64))> {
    vec![
        ("eccentricity", |x, v| x.face_eccentricity = v / 200.0),
        ("gap", |x, v| x.face_largest_gap_deg = v),
        ("missing", |x, v| x.digits_missing = (v / 15.0).floor().min(12.0)),
        ("digit error", |x, v| x.digit_max_angle_error_deg = v / 2.0),
        ("hour error", |x, v| x.hour_hand_angle_error_deg = v / 2.0),
        ("minute error", |x, v| x.minute_hand_angle_error_deg = v / 2.0),
        ("size ratio", |x, v| x.hand_size_ratio = v / 100.0),
    ]
}

proptest! {
    #[test]
    fn growing_any_error_never_raises_the_score(base in inputs(), a in 0.0f64..360.0, b in 0.0f64..360.0) {
        let p = RouleauParams::default();
        let (lo, hi) = (a.min(b), a.max(b));
        for (name, set) in errors() {
            let (mut x, mut y) = (base, base);
            set(&mut x, lo);
            set(&mut y, hi);
            let (sx, sy) = (rouleau_total(&x, &p), rouleau_total(&y, &p));
            prop_assert!(sy.total <= sx.total, "{name}: {lo} -> {}, {hi} -> {}", sx.total, sy.total);
        }
    }

    #[test]
    fn total_is_bounded_and_sums(x in inputs()) {
        let s = rouleau_total(&x, &RouleauParams::default());
        prop_assert!(s.total <= 10);
        prop_assert!(s.face_pts <= 2 && s.numbers_pts <= 4 && s.hands_pts <= 4);
        prop_assert_eq!(s.total, s.face_pts + s.numbers_pts + s.hands_pts);
        prop_assert_eq!(s.rationale.len(), 3);
    }

    #[test]
    fn cut_score_is_within_range(totals in prop::collection::vec(0u8..=10, 2..60), seed in any::<u64>()) {
        let labels: Vec<bool> = totals.iter().enumerate().map(|(i, _)| (seed >> (i % 64)) & 1 == 1).collect();
        prop_assert!(fit_cut_score(&totals, &labels) <= 11);
    }
}

#[test]
fn perfect_clock_scores_ten_and_missing_scores_low() {
    let p = RouleauParams::default();
    assert_eq!(rouleau_total(&perfect(), &p).total, 10);
    let missing = RouleauInputs {
        face_present: f64::NAN,
        face_eccentricity: f64::NAN,
        face_largest_gap_deg: f64::NAN,
        digits_missing: f64::NAN,
        digits_repeated: f64::NAN,
        digit_order_correct: f64::NAN,
        digits_counterclockwise: f64::NAN,
        digit_max_angle_error_deg: f64::NAN,
        hour_hand_present: f64::NAN,
        minute_hand_present: f64::NAN,
        hands_perseveration: f64::NAN,
        hour_hand_angle_error_deg: f64::NAN,
        minute_hand_angle_error_deg: f64::NAN,
        hand_size_ratio: f64::NAN,
    };
    assert_eq!(rouleau_total(&missing, &p).total, 0);
}
